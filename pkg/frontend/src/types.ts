export interface QuestionSummary {
  id: string;
  title: string;
  language: string;
  line_count: number;
}

export interface QuestionDetail {
  id: string;
  title: string;
  code: string;
  max_attempts: number;
}

export interface Span {
  start: number;
  end: number;
}

export interface FeedbackGroup {
  color_index: number;
  portion: string;
  explanation_span: Span | null;
  code_lines: number[];
}

export interface FeedbackPayload {
  groups: FeedbackGroup[];
  bar: { post_count: number; max_segments: number };
  level: string;
  warnings: string[];
  attempt: { used: number; max: number };
}
