/**
 * Deterministic semantic rendering of layouts from their JSON form and the
 * service palette: a flat list of draw commands consumed by the canvas
 * layer, plus an SVG serialization used by snapshot tests. Paint order
 * matches the service rasterizer: decreasing box area, ties by element
 * index, so small controls stay visible.
 */
import type { LayoutJson, Palette, QueryRequest } from "./schema.js";

export interface RectCommand {
  x: number;
  y: number;
  w: number;
  h: number;
  color: string;
}

function cssColor(rgb: readonly [number, number, number]): string {
  const to255 = (v: number) => Math.round(v * 255);
  return `rgb(${to255(rgb[0])},${to255(rgb[1])},${to255(rgb[2])})`;
}

export function colorTable(palette: Palette): Map<string, string> {
  const table = new Map<string, string>();
  for (const entry of palette.classes) {
    table.set(entry.name, cssColor(entry.color));
  }
  return table;
}

export function renderCommands(
  layout: LayoutJson | QueryRequest,
  palette: Palette,
  targetW: number,
  targetH: number,
): RectCommand[] {
  const sx = targetW / layout.width;
  const sy = targetH / layout.height;
  const table = colorTable(palette);
  const commands: RectCommand[] = [
    { x: 0, y: 0, w: targetW, h: targetH, color: cssColor(palette.background) },
  ];
  const order = layout.detections
    .map((det, index) => {
      const [x0, y0, x1, y1] = det.box;
      return { det, index, area: (x1 - x0) * (y1 - y0) };
    })
    .sort((a, b) => b.area - a.area || a.index - b.index);
  for (const { det } of order) {
    const [x0, y0, x1, y1] = det.box;
    commands.push({
      x: x0 * sx,
      y: y0 * sy,
      w: (x1 - x0) * sx,
      h: (y1 - y0) * sy,
      color: table.get(det.class) ?? "rgb(0,0,0)",
    });
  }
  return commands;
}

const round2 = (v: number) => Math.round(v * 100) / 100;

export function toSvg(commands: RectCommand[], width: number, height: number): string {
  const rects = commands
    .map(
      (c) =>
        `<rect x="${round2(c.x)}" y="${round2(c.y)}" width="${round2(c.w)}" ` +
        `height="${round2(c.h)}" fill="${c.color}"/>`,
    )
    .join("\n  ");
  return `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}">\n  ${rects}\n</svg>`;
}
