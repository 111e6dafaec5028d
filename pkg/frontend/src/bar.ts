import type { FeedbackPayload } from "./types.js";

// Progression bar: one block per substantive code line, filled blocks show
// how many segments the grader counted. One filled block sits at the
// "Relational" end; a full bar reads as line-by-line ("Multistructural").
export function renderBar(payload: FeedbackPayload): HTMLElement {
  const wrap = document.createElement("div");
  wrap.className = "bar-wrap";

  const { post_count, max_segments } = payload.bar;
  const filled = Math.min(post_count, max_segments);

  const blocks = document.createElement("div");
  blocks.className = "bar-blocks";
  for (let i = 0; i < max_segments; i++) {
    const block = document.createElement("span");
    block.className = i < filled ? "bar-block filled" : "bar-block";
    blocks.appendChild(block);
  }
  wrap.appendChild(blocks);

  const labels = document.createElement("div");
  labels.className = "bar-labels";
  const left = document.createElement("span");
  left.textContent = "Relational";
  const right = document.createElement("span");
  right.textContent = "Multistructural";
  labels.append(left, right);
  wrap.appendChild(labels);

  if (post_count > max_segments) {
    const overflow = document.createElement("span");
    overflow.className = "bar-overflow";
    overflow.textContent = `${post_count} segments`;
    wrap.appendChild(overflow);
  }
  return wrap;
}
