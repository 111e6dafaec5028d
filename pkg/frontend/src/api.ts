import type { FeedbackPayload, QuestionDetail, QuestionSummary } from "./types.js";

export class ApiError extends Error {
  status: number;
  retrySafe: boolean;

  constructor(message: string, status: number, retrySafe = false) {
    super(message);
    this.status = status;
    this.retrySafe = retrySafe;
  }
}

async function errorFrom(response: Response): Promise<ApiError> {
  let message = `request failed (${response.status})`;
  let retrySafe = response.status >= 500;
  try {
    const body = await response.json();
    if (typeof body.detail === "string") {
      message = body.detail;
    } else if (body.detail && typeof body.detail.message === "string") {
      message = body.detail.message;
      retrySafe = Boolean(body.detail.retry_safe);
    }
  } catch {
    // keep the generic message when the body is not JSON
  }
  return new ApiError(message, response.status, retrySafe);
}

export async function fetchQuestions(base = ""): Promise<QuestionSummary[]> {
  const response = await fetch(`${base}/api/questions`);
  if (!response.ok) throw await errorFrom(response);
  return response.json();
}

export async function fetchQuestion(id: string, base = ""): Promise<QuestionDetail> {
  const response = await fetch(`${base}/api/questions/${encodeURIComponent(id)}`);
  if (!response.ok) throw await errorFrom(response);
  return response.json();
}

export async function submitExplanation(
  id: string,
  explanation: string,
  sessionId: string,
  base = "",
): Promise<FeedbackPayload> {
  const response = await fetch(
    `${base}/api/questions/${encodeURIComponent(id)}/segment`,
    {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ explanation, session_id: sessionId }),
    },
  );
  if (!response.ok) throw await errorFrom(response);
  return response.json();
}
