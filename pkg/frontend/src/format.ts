// Number formatting and heatmap colors. The UI does no score arithmetic
// beyond these presentational transforms.

/** F1 in [0,1] displayed on the 0-100 scale with two decimals:
 * 0.938 -> "93.80". */
export function formatF1(f1: number): string {
  return (f1 * 100).toFixed(2);
}

/** Signed delta on the same scale: 0.0078 -> "+0.78". */
export function formatDelta(delta: number): string {
  const text = (delta * 100).toFixed(2);
  return delta >= 0 ? `+${text}` : text;
}

export function formatPercent(value: number): string {
  return (value * 100).toFixed(1);
}

/** Heatmap cell color; positive = first argument better = green,
 * negative = red, zero = neutral. Saturation scales with |diff| and
 * clips at 0.5. */
export function heatColor(diff: number): string {
  if (diff === 0) return "rgb(245, 245, 245)";
  const strength = Math.min(Math.abs(diff) / 0.5, 1);
  const other = Math.round(235 - 150 * strength);
  return diff > 0
    ? `rgb(${other}, 235, ${other})`
    : `rgb(235, ${other}, ${other})`;
}
