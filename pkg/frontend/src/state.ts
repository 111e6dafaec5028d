import type { FeedbackPayload, QuestionDetail } from "./types.js";

// The view is a pure function of this record; every transition returns a new
// state so re-rendering from a cached payload reproduces identical feedback.
export interface ViewState {
  question: QuestionDetail | null;
  draft: string;
  payload: FeedbackPayload | null;
  attemptsUsed: number;
  loading: boolean;
  error: string | null;
  retryable: boolean;
  exhausted: boolean;
}

export function initialState(): ViewState {
  return {
    question: null,
    draft: "",
    payload: null,
    attemptsUsed: 0,
    loading: false,
    error: null,
    retryable: false,
    exhausted: false,
  };
}

export function selectQuestion(state: ViewState, question: QuestionDetail): ViewState {
  return {
    ...initialState(),
    question,
    draft: state.question?.id === question.id ? state.draft : "",
  };
}

export function editDraft(state: ViewState, draft: string): ViewState {
  return { ...state, draft };
}

export function canSubmit(state: ViewState): boolean {
  return (
    state.question !== null &&
    !state.loading &&
    !state.exhausted &&
    state.draft.trim().length > 0
  );
}

export function beginSubmit(state: ViewState): ViewState {
  return { ...state, loading: true, error: null, retryable: false };
}

export function submitSucceeded(state: ViewState, payload: FeedbackPayload): ViewState {
  return {
    ...state,
    loading: false,
    payload,
    attemptsUsed: payload.attempt.used,
    exhausted: payload.attempt.used >= payload.attempt.max,
    error: null,
    retryable: false,
  };
}

export function submitFailed(state: ViewState, message: string, retryable: boolean): ViewState {
  // The draft is untouched so the student can retry or revise.
  return { ...state, loading: false, error: message, retryable };
}

export function attemptsExhausted(state: ViewState, message: string): ViewState {
  return { ...state, loading: false, exhausted: true, error: message, retryable: false };
}

export function attemptsRemaining(state: ViewState): number | null {
  if (!state.question) return null;
  return Math.max(state.question.max_attempts - state.attemptsUsed, 0);
}
