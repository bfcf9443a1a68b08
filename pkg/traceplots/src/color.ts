/** Perceptual colormap (viridis anchor points, linearly interpolated). */

export type Rgb = [number, number, number];

const ANCHORS: Rgb[] = [
  [68, 1, 84], [71, 44, 122], [59, 81, 139], [44, 113, 142], [33, 144, 141],
  [39, 173, 129], [92, 200, 99], [170, 220, 50], [253, 231, 37],
];

export function viridis(v: number): Rgb {
  const x = Math.min(1, Math.max(0, v)) * (ANCHORS.length - 1);
  const i = Math.min(ANCHORS.length - 2, Math.floor(x));
  const f = x - i;
  const [r0, g0, b0] = ANCHORS[i];
  const [r1, g1, b1] = ANCHORS[i + 1];
  return [
    Math.round(r0 + (r1 - r0) * f),
    Math.round(g0 + (g1 - g0) * f),
    Math.round(b0 + (b1 - b0) * f),
  ];
}

export function css([r, g, b]: Rgb): string {
  return `rgb(${r},${g},${b})`;
}

export const INK: Rgb = [40, 40, 48];
export const PAPER: Rgb = [255, 255, 255];
export const ACCENT: Rgb = [214, 93, 14];
export const SERIES_A: Rgb = [31, 119, 180];
export const SERIES_B: Rgb = [214, 93, 14];
