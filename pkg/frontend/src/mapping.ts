import { colorFor } from "./palette.js";
import type { FeedbackGroup, FeedbackPayload } from "./types.js";

function highlightExplanation(explanation: string, groups: FeedbackGroup[]): HTMLElement {
  const pane = document.createElement("div");
  pane.className = "explanation-pane";

  const spanned = groups
    .filter((g) => g.explanation_span !== null)
    .sort((a, b) => a.explanation_span!.start - b.explanation_span!.start);

  let cursor = 0;
  for (const group of spanned) {
    const { start, end } = group.explanation_span!;
    if (start < cursor) continue; // overlapping span; first one wins
    if (start > cursor) {
      pane.appendChild(document.createTextNode(explanation.slice(cursor, start)));
    }
    const mark = document.createElement("mark");
    mark.className = "hl";
    mark.dataset.colorIndex = String(group.color_index);
    mark.style.backgroundColor = colorFor(group.color_index);
    mark.textContent = explanation.slice(start, end);
    pane.appendChild(mark);
    cursor = end;
  }
  if (cursor < explanation.length) {
    pane.appendChild(document.createTextNode(explanation.slice(cursor)));
  }

  // Portions the grader could not locate verbatim: shown as dashed chips so
  // students can spot where the model strayed from their words.
  const unverified = groups.filter((g) => g.explanation_span === null);
  for (const group of unverified) {
    const chip = document.createElement("span");
    chip.className = "chip unverified";
    chip.dataset.colorIndex = String(group.color_index);
    chip.style.borderColor = colorFor(group.color_index);
    chip.title = "This wording was not found verbatim in your explanation.";
    chip.textContent = group.portion;
    pane.appendChild(chip);
  }
  return pane;
}

function highlightCode(code: string, groups: FeedbackGroup[]): HTMLElement {
  const pane = document.createElement("ol");
  pane.className = "code-pane";
  const byLine = new Map<number, FeedbackGroup>();
  for (const group of groups) {
    for (const line of group.code_lines) {
      if (!byLine.has(line)) byLine.set(line, group);
    }
  }
  code.split("\n").forEach((text, i) => {
    const item = document.createElement("li");
    item.textContent = text || " ";
    const group = byLine.get(i + 1);
    if (group) {
      item.className = group.explanation_span === null ? "hl unverified" : "hl";
      item.dataset.colorIndex = String(group.color_index);
      item.style.backgroundColor = colorFor(group.color_index);
    }
    pane.appendChild(item);
  });
  return pane;
}

export function renderMapping(
  payload: FeedbackPayload,
  code: string,
  explanation: string,
): HTMLElement {
  const container = document.createElement("div");
  container.className = "mapping";

  if (payload.groups.length === 0) {
    const guidance = document.createElement("p");
    guidance.className = "guidance";
    guidance.textContent =
      "No part of your explanation could be mapped to the code. " +
      "Try describing what the code does in your own words.";
    container.appendChild(guidance);
    return container;
  }

  container.appendChild(highlightExplanation(explanation, payload.groups));
  container.appendChild(highlightCode(code, payload.groups));
  return container;
}
