import type { FeedbackPayload, QuestionDetail } from "../src/types.js";

export const SUM_POSITIVES_CODE = [
  "int sumOfPositives(int arr[], int size) {",
  "    int x = 0;",
  "    for (int i = 0; i < size; i++) {",
  "        if (arr[i] > 0) {",
  "            x += arr[i];",
  "        }",
  "    }",
  "    return x;",
  "}",
].join("\n");

export const QUESTION: QuestionDetail = {
  id: "A-Q4",
  title: "Sum positive values",
  code: SUM_POSITIVES_CODE,
  max_attempts: 20,
};

export const MULTI_EXPLANATION =
  "input is values with array and length. initially set x to zero, and use for " +
  "loop to set start i from zero and smaller than length, increasing by 1 for i " +
  "each run. If values are bigger than zero, then x plus equal values. it will " +
  "return to x at end.";

// Captured from the feedback service for the line-by-line exemplar: five
// groups survive post-processing (the signature-only group is dropped).
export const MULTI_PAYLOAD: FeedbackPayload = {
  groups: [
    {
      color_index: 0,
      portion: "initially set x to zero",
      explanation_span: { start: 39, end: 62 },
      code_lines: [2],
    },
    {
      color_index: 1,
      portion:
        "use for loop to set start i from zero and smaller than length, increasing by 1 for i each run",
      explanation_span: { start: 68, end: 161 },
      code_lines: [3],
    },
    {
      color_index: 2,
      portion: "values are bigger than zero",
      explanation_span: { start: 166, end: 193 },
      code_lines: [4],
    },
    {
      color_index: 3,
      portion: "x plus equal values",
      explanation_span: { start: 200, end: 219 },
      code_lines: [5],
    },
    {
      color_index: 4,
      portion: "it will return to x at end",
      explanation_span: { start: 221, end: 247 },
      code_lines: [8],
    },
  ],
  bar: { post_count: 5, max_segments: 6 },
  level: "multistructural",
  warnings: [],
  attempt: { used: 1, max: 20 },
};

export const RELATIONAL_EXPLANATION = "sums all positive numbers in the array.";

export const RELATIONAL_PAYLOAD: FeedbackPayload = {
  groups: [
    {
      color_index: 0,
      portion: "sums all positive numbers in the array",
      explanation_span: { start: 0, end: 38 },
      code_lines: [1, 2, 3, 4, 5, 6, 7, 8, 9],
    },
  ],
  bar: { post_count: 1, max_segments: 6 },
  level: "relational",
  warnings: [],
  attempt: { used: 1, max: 20 },
};

export function payloadWithBar(post_count: number, max_segments: number): FeedbackPayload {
  return {
    ...RELATIONAL_PAYLOAD,
    bar: { post_count, max_segments },
  };
}
