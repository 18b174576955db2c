/**
 * Sweep figure: one panel per strategy (abs-max, prevent-zero, 4-over-6,
 * combined, brute-force order), one line per block size, log-log axes of
 * MSE against the distribution scale.
 */

import { orderedStrategies, parseSweepCsv, SweepRow } from "./schema.js";
import { colorForBlockSize, drawFrame, Frame, logScale, SvgDoc } from "./svg.js";

const PANEL_W = 260;
const PANEL_H = 220;
const MARGIN = 50;
const GAP = 30;
const FLOOR = 1e-300; // keeps exact-zero MSE plottable on the log axis

export function plotSweepSvg(csv: string): string {
  const rows = parseSweepCsv(csv);
  const strategies = orderedStrategies(rows.map((r) => r.strategy));
  const blockSizes = [...new Set(rows.map((r) => r.block_size))].sort((a, b) => a - b);
  const sigmas = [...new Set(rows.map((r) => r.sigma))].sort((a, b) => a - b);

  const mses = rows.map((r) => Math.max(r.mse, FLOOR));
  const yMin = Math.min(...mses);
  const yMax = Math.max(...mses, yMin * 10);

  const width = MARGIN * 2 + strategies.length * PANEL_W + (strategies.length - 1) * GAP;
  const height = MARGIN * 2 + PANEL_H + 40;
  const doc = new SvgDoc(width, height);
  doc.text(width / 2, 20, "Quantization MSE vs distribution scale", 14, "middle");

  strategies.forEach((strategy, i) => {
    const frame: Frame = {
      x: MARGIN + i * (PANEL_W + GAP),
      y: MARGIN,
      width: PANEL_W,
      height: PANEL_H,
    };
    const label = `(${String.fromCharCode(97 + i)}) ${strategy}`;
    drawFrame(doc, frame, label);
    const sx = logScale([sigmas[0], sigmas[sigmas.length - 1]], [frame.x, frame.x + frame.width]);
    const sy = logScale([yMin, yMax], [frame.y + frame.height, frame.y]);

    for (const bs of blockSizes) {
      const line = rows
        .filter((r) => r.strategy === strategy && r.block_size === bs)
        .sort((a, b) => a.sigma - b.sigma)
        .map((r): [number, number] => [sx(r.sigma), sy(Math.max(r.mse, FLOOR))]);
      if (line.length > 0) {
        doc.polyline(line, colorForBlockSize(bs));
      }
    }
    doc.text(frame.x + frame.width / 2, frame.y + frame.height + 16, "sigma (log)", 10, "middle");
    if (i === 0) {
      doc.text(frame.x - 8, frame.y + frame.height / 2, "MSE (log)", 10, "middle");
    }
  });

  // block-size legend
  blockSizes.forEach((bs, i) => {
    const lx = MARGIN + i * 90;
    const ly = height - 16;
    doc.line(lx, ly - 4, lx + 22, ly - 4, colorForBlockSize(bs), 2);
    doc.text(lx + 28, ly, `bs=${bs}`, 11);
  });

  return doc.render();
}

export { SweepRow };
