/** Tiny deterministic SVG builder: string assembly only, no DOM. */

export interface Frame {
  x: number;
  y: number;
  width: number;
  height: number;
}

export const BLOCK_SIZE_COLORS: Record<number, string> = {
  4: "#1f77b4",
  8: "#ff7f0e",
  16: "#2ca02c",
  32: "#d62728",
};

export function colorForBlockSize(bs: number): string {
  return BLOCK_SIZE_COLORS[bs] ?? "#7f7f7f";
}

export function esc(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

export function fmt(v: number): string {
  return Number.isInteger(v) && Math.abs(v) < 1e7 ? String(v) : v.toPrecision(6);
}

export class SvgDoc {
  private parts: string[] = [];

  constructor(readonly width: number, readonly height: number) {}

  raw(s: string): void {
    this.parts.push(s);
  }

  rect(x: number, y: number, w: number, h: number, fill: string, opacity = 1): void {
    this.raw(
      `<rect x="${fmt(x)}" y="${fmt(y)}" width="${fmt(w)}" height="${fmt(h)}" ` +
        `fill="${fill}" fill-opacity="${opacity}"/>`,
    );
  }

  line(x1: number, y1: number, x2: number, y2: number, stroke = "#333", width = 1): void {
    this.raw(
      `<line x1="${fmt(x1)}" y1="${fmt(y1)}" x2="${fmt(x2)}" y2="${fmt(y2)}" ` +
        `stroke="${stroke}" stroke-width="${width}"/>`,
    );
  }

  polyline(points: [number, number][], stroke: string, width = 1.5): void {
    const pts = points.map(([x, y]) => `${fmt(x)},${fmt(y)}`).join(" ");
    this.raw(`<polyline points="${pts}" fill="none" stroke="${stroke}" stroke-width="${width}"/>`);
  }

  text(x: number, y: number, s: string, size = 11, anchor = "start", fill = "#222"): void {
    this.raw(
      `<text x="${fmt(x)}" y="${fmt(y)}" font-size="${size}" text-anchor="${anchor}" ` +
        `fill="${fill}" font-family="sans-serif">${esc(s)}</text>`,
    );
  }

  render(): string {
    return (
      `<svg xmlns="http://www.w3.org/2000/svg" width="${this.width}" ` +
      `height="${this.height}" viewBox="0 0 ${this.width} ${this.height}">\n` +
      `<rect width="${this.width}" height="${this.height}" fill="white"/>\n` +
      this.parts.join("\n") +
      "\n</svg>\n"
    );
  }
}

/** Maps a value onto a pixel range through log10, clamping at the frame. */
export function logScale(domain: [number, number], range: [number, number]) {
  const [d0, d1] = [Math.log10(domain[0]), Math.log10(domain[1])];
  const [r0, r1] = range;
  return (v: number): number => {
    const t = (Math.log10(v) - d0) / (d1 - d0 || 1);
    return r0 + Math.max(0, Math.min(1, t)) * (r1 - r0);
  };
}

export function drawFrame(doc: SvgDoc, f: Frame, title: string): void {
  doc.raw(
    `<rect x="${fmt(f.x)}" y="${fmt(f.y)}" width="${fmt(f.width)}" height="${fmt(f.height)}" ` +
      `fill="none" stroke="#999" stroke-width="1"/>`,
  );
  doc.text(f.x + f.width / 2, f.y - 6, title, 12, "middle");
}
