// Ten distinguishable hues; groups cycle through them by color_index.
export const PALETTE = [
  "#b39ddb",
  "#90caf9",
  "#a5d6a7",
  "#ffe082",
  "#ffab91",
  "#f48fb1",
  "#80cbc4",
  "#ce93d8",
  "#c5e1a5",
  "#ffcc80",
];

export function colorFor(index: number): string {
  return PALETTE[((index % PALETTE.length) + PALETTE.length) % PALETTE.length];
}
