/**
 * Histogram grid: one row per block size; entry-magnitude bins on the left,
 * selected scale factors on the right. The band past the largest entry bin
 * is shaded red: nothing there is representable in the element format.
 */

import { HistRow, orderedStrategies, parseHistCsv } from "./schema.js";
import { colorForBlockSize, drawFrame, Frame, SvgDoc } from "./svg.js";

const PANEL_W = 300;
const PANEL_H = 120;
const MARGIN = 60;
const GAP = 26;

function drawBars(
  doc: SvgDoc,
  frame: Frame,
  rows: HistRow[],
  color: string,
  shadeTail: boolean,
): void {
  const bins = [...new Set(rows.map((r) => r.bin_value))].sort((a, b) => a - b);
  const total = rows.reduce((acc, r) => acc + r.count, 0);
  const counts = new Map<number, number>();
  for (const r of rows) {
    counts.set(r.bin_value, (counts.get(r.bin_value) ?? 0) + r.count);
  }
  const maxFrac = Math.max(...bins.map((b) => (counts.get(b) ?? 0) / total), 1e-9);
  const slot = frame.width / (bins.length + (shadeTail ? 1 : 0));
  bins.forEach((b, i) => {
    const frac = (counts.get(b) ?? 0) / total;
    const h = (frac / maxFrac) * (frame.height - 14);
    doc.rect(frame.x + i * slot + slot * 0.15, frame.y + frame.height - h, slot * 0.7, h, color, 0.85);
    doc.text(frame.x + (i + 0.5) * slot, frame.y + frame.height + 11, String(b), 8, "middle");
  });
  if (shadeTail) {
    doc.rect(frame.x + bins.length * slot, frame.y, slot, frame.height, "#d62728", 0.15);
  }
}

export function plotHistSvg(csv: string): string {
  const rows = parseHistCsv(csv);
  const strategies = orderedStrategies(rows.map((r) => r.strategy));
  const blockSizes = [...new Set(rows.map((r) => r.block_size))].sort((a, b) => a - b);
  const region = rows[0].region;

  const cols = 2 * strategies.length;
  const width = MARGIN * 2 + cols * PANEL_W + (cols - 1) * GAP;
  const height = MARGIN + blockSizes.length * (PANEL_H + 34) + 30;
  const doc = new SvgDoc(width, height);
  doc.text(
    width / 2, 22,
    `Region ${region}: entry magnitudes (left) and scale factors (right)`,
    14, "middle",
  );

  blockSizes.forEach((bs, rowIdx) => {
    const y = MARGIN + rowIdx * (PANEL_H + 34);
    strategies.forEach((strategy, sIdx) => {
      for (const [half, kind] of [[0, "entry"], [1, "scale"]] as const) {
        const col = 2 * sIdx + half;
        const frame: Frame = {
          x: MARGIN + col * (PANEL_W + GAP),
          y,
          width: PANEL_W,
          height: PANEL_H,
        };
        const title = rowIdx === 0 ? `${strategy} ${kind === "entry" ? "entries" : "scales"}` : "";
        drawFrame(doc, frame, title);
        const sub = rows.filter(
          (r) => r.block_size === bs && r.strategy === strategy && r.bin_kind === kind,
        );
        if (sub.length > 0) {
          drawBars(doc, frame, sub, colorForBlockSize(bs), kind === "entry");
        }
        if (col === 0) {
          doc.text(frame.x - 10, y + PANEL_H / 2, `bs=${bs}`, 11, "end");
        }
      }
    });
  });

  return doc.render();
}
