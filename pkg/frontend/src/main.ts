import { ApiError, fetchQuestion, fetchQuestions, submitExplanation } from "./api.js";
import { renderBar } from "./bar.js";
import { renderMapping } from "./mapping.js";
import {
  attemptsExhausted,
  attemptsRemaining,
  beginSubmit,
  canSubmit,
  editDraft,
  initialState,
  selectQuestion,
  submitFailed,
  submitSucceeded,
  type ViewState,
} from "./state.js";

function sessionId(): string {
  const key = "explainseg-session";
  let id = localStorage.getItem(key);
  if (!id) {
    id = crypto.randomUUID();
    localStorage.setItem(key, id);
  }
  return id;
}

const els = {
  picker: document.querySelector<HTMLSelectElement>("#question-picker")!,
  title: document.querySelector<HTMLElement>("#question-title")!,
  code: document.querySelector<HTMLElement>("#question-code")!,
  draft: document.querySelector<HTMLTextAreaElement>("#draft")!,
  submit: document.querySelector<HTMLButtonElement>("#submit")!,
  retry: document.querySelector<HTMLButtonElement>("#retry")!,
  attempts: document.querySelector<HTMLElement>("#attempts")!,
  error: document.querySelector<HTMLElement>("#error")!,
  level: document.querySelector<HTMLElement>("#level")!,
  bar: document.querySelector<HTMLElement>("#bar")!,
  mapping: document.querySelector<HTMLElement>("#mapping")!,
  warnings: document.querySelector<HTMLElement>("#warnings")!,
};

let state: ViewState = initialState();

function render(): void {
  els.submit.disabled = !canSubmit(state);
  els.submit.textContent = state.loading ? "Checking…" : "Check my explanation";
  els.retry.hidden = !(state.error !== null && state.retryable);
  els.error.hidden = state.error === null;
  els.error.textContent = state.error ?? "";
  els.draft.disabled = state.exhausted;

  const remaining = attemptsRemaining(state);
  els.attempts.textContent =
    remaining === null ? "" : `${remaining} attempt${remaining === 1 ? "" : "s"} left`;

  els.title.textContent = state.question?.title ?? "";
  els.code.textContent = state.question?.code ?? "";

  els.bar.replaceChildren();
  els.mapping.replaceChildren();
  els.warnings.replaceChildren();
  els.level.textContent = "";
  if (state.payload && state.question) {
    els.level.textContent = `Looks ${state.payload.level}`;
    els.bar.appendChild(renderBar(state.payload));
    els.mapping.appendChild(
      renderMapping(state.payload, state.question.code, state.draft),
    );
    for (const warning of state.payload.warnings) {
      const li = document.createElement("li");
      li.textContent = warning;
      els.warnings.appendChild(li);
    }
  }
}

function update(next: ViewState): void {
  state = next;
  render();
}

async function pickQuestion(id: string): Promise<void> {
  const question = await fetchQuestion(id);
  update(selectQuestion(state, question));
}

async function submit(): Promise<void> {
  if (!canSubmit(state) || !state.question) return;
  const submittedDraft = state.draft;
  update(beginSubmit(state));
  try {
    const payload = await submitExplanation(state.question.id, submittedDraft, sessionId());
    update(submitSucceeded(state, payload));
  } catch (err) {
    if (err instanceof ApiError && err.status === 429) {
      update(attemptsExhausted(state, err.message));
    } else if (err instanceof ApiError) {
      update(submitFailed(state, err.message, err.retrySafe));
    } else {
      update(submitFailed(state, "Could not reach the server.", true));
    }
  }
}

async function init(): Promise<void> {
  const questions = await fetchQuestions();
  for (const question of questions) {
    const option = document.createElement("option");
    option.value = question.id;
    option.textContent = `${question.id} — ${question.title}`;
    els.picker.appendChild(option);
  }
  els.picker.addEventListener("change", () => void pickQuestion(els.picker.value));
  els.draft.addEventListener("input", () => update(editDraft(state, els.draft.value)));
  els.submit.addEventListener("click", () => void submit());
  els.retry.addEventListener("click", () => void submit());
  if (questions.length > 0) {
    els.picker.value = questions[0].id;
    await pickQuestion(questions[0].id);
  }
  render();
}

void init();
