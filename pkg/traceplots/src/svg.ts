/** Tiny SVG builder for the vector output path. */

export class Svg {
  private parts: string[] = [];

  constructor(readonly width: number, readonly height: number) {
    this.parts.push(
      `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
      `viewBox="0 0 ${width} ${height}">`,
      `<rect width="${width}" height="${height}" fill="white"/>`);
  }

  rect(x: number, y: number, w: number, h: number, fill: string, extra = ""): void {
    this.parts.push(`<rect x="${x}" y="${y}" width="${w}" height="${h}" fill="${fill}" ${extra}/>`);
  }

  outline(x: number, y: number, w: number, h: number, stroke: string, strokeWidth = 1): void {
    this.parts.push(
      `<rect x="${x}" y="${y}" width="${w}" height="${h}" fill="none" ` +
      `stroke="${stroke}" stroke-width="${strokeWidth}"/>`);
  }

  line(x1: number, y1: number, x2: number, y2: number, stroke: string, strokeWidth = 1): void {
    this.parts.push(
      `<line x1="${x1}" y1="${y1}" x2="${x2}" y2="${y2}" stroke="${stroke}" ` +
      `stroke-width="${strokeWidth}"/>`);
  }

  polyline(points: Array<[number, number]>, stroke: string, strokeWidth = 2): void {
    const pts = points.map(([x, y]) => `${x},${y}`).join(" ");
    this.parts.push(
      `<polyline points="${pts}" fill="none" stroke="${stroke}" stroke-width="${strokeWidth}"/>`);
  }

  circle(x: number, y: number, r: number, fill: string): void {
    this.parts.push(`<circle cx="${x}" cy="${y}" r="${r}" fill="${fill}"/>`);
  }

  text(x: number, y: number, s: string, fill: string, size = 11, anchor = "start"): void {
    const esc = s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
    this.parts.push(
      `<text x="${x}" y="${y}" font-family="monospace" font-size="${size}" ` +
      `fill="${fill}" text-anchor="${anchor}">${esc}</text>`);
  }

  toString(): string {
    return this.parts.join("\n") + "\n</svg>\n";
  }
}
