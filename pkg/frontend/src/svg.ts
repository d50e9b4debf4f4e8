/**
 * Tiny deterministic SVG builder: line panels and bar panels with shaded
 * background spans. No DOM, no canvas; output is a plain SVG string.
 */

export interface Line {
  xs: number[]
  ys: number[]
  color: string
  label?: string
}

export interface Shade {
  x0: number
  x1: number
  color: string
  label?: string
}

export interface Panel {
  title: string
  lines: Line[]
  bars?: { xs: number[]; widths: number[]; heights: number[]; color: string }
  shades?: Shade[]
  hline?: number
  xLabel?: string
  yLabel?: string
}

const W = 360
const H = 220
const MARGIN = { left: 54, right: 12, top: 26, bottom: 34 }

function extent(values: number[]): [number, number] {
  let lo = Infinity
  let hi = -Infinity
  for (const v of values) {
    if (v < lo) lo = v
    if (v > hi) hi = v
  }
  if (!isFinite(lo)) return [0, 1]
  if (hi - lo < 1e-12) {
    const pad = Math.max(Math.abs(hi) * 0.1, 1e-3)
    return [lo - pad, hi + pad]
  }
  const pad = (hi - lo) * 0.06
  return [lo - pad, hi + pad]
}

function ticks(lo: number, hi: number, n = 5): number[] {
  const span = hi - lo
  const step = Math.pow(10, Math.floor(Math.log10(span / n)))
  const mult = span / n / step > 5 ? 10 : span / n / step > 2 ? 5 : 2
  const inc = step * mult
  const first = Math.ceil(lo / inc) * inc
  const out: number[] = []
  for (let v = first; v <= hi + 1e-12; v += inc) out.push(v)
  return out
}

const fmt = (v: number) =>
  Math.abs(v) >= 1000 || (Math.abs(v) < 0.01 && v !== 0)
    ? v.toExponential(1)
    : String(Math.round(v * 1000) / 1000)

function renderPanel(panel: Panel, ox: number, oy: number): string {
  const xsAll = panel.lines.flatMap(l => l.xs)
    .concat(panel.bars ? panel.bars.xs.concat(
      panel.bars.xs.map((x, i) => x + panel.bars!.widths[i])) : [])
  const ysAll = panel.lines.flatMap(l => l.ys)
    .concat(panel.bars ? panel.bars.heights.concat([0]) : [])
    .concat(panel.hline !== undefined ? [panel.hline] : [])
  const [x0, x1] = extent(xsAll)
  const [y0, y1] = extent(ysAll)
  const px = (x: number) =>
    ox + MARGIN.left + ((x - x0) / (x1 - x0)) * (W - MARGIN.left - MARGIN.right)
  const py = (y: number) =>
    oy + H - MARGIN.bottom - ((y - y0) / (y1 - y0)) * (H - MARGIN.top - MARGIN.bottom)

  const parts: string[] = []
  parts.push(`<text x="${ox + W / 2}" y="${oy + 14}" text-anchor="middle" ` +
    `font-size="12" font-weight="bold">${panel.title}</text>`)
  for (const shade of panel.shades ?? []) {
    const sx = px(Math.max(shade.x0, x0))
    const swidth = Math.max(px(Math.min(shade.x1, x1)) - sx, 0)
    parts.push(`<rect x="${sx.toFixed(2)}" y="${oy + MARGIN.top}" ` +
      `width="${swidth.toFixed(2)}" height="${H - MARGIN.top - MARGIN.bottom}" ` +
      `fill="${shade.color}" fill-opacity="0.18"/>`)
  }
  // axes
  parts.push(`<rect x="${ox + MARGIN.left}" y="${oy + MARGIN.top}" ` +
    `width="${W - MARGIN.left - MARGIN.right}" ` +
    `height="${H - MARGIN.top - MARGIN.bottom}" fill="none" stroke="#999"/>`)
  for (const t of ticks(x0, x1)) {
    parts.push(`<line x1="${px(t).toFixed(2)}" y1="${oy + H - MARGIN.bottom}" ` +
      `x2="${px(t).toFixed(2)}" y2="${oy + H - MARGIN.bottom + 4}" stroke="#555"/>`)
    parts.push(`<text x="${px(t).toFixed(2)}" y="${oy + H - MARGIN.bottom + 16}" ` +
      `text-anchor="middle" font-size="9">${fmt(t)}</text>`)
  }
  for (const t of ticks(y0, y1)) {
    parts.push(`<line x1="${ox + MARGIN.left - 4}" y1="${py(t).toFixed(2)}" ` +
      `x2="${ox + MARGIN.left}" y2="${py(t).toFixed(2)}" stroke="#555"/>`)
    parts.push(`<text x="${ox + MARGIN.left - 6}" y="${py(t).toFixed(2)}" ` +
      `text-anchor="end" dominant-baseline="middle" font-size="9">${fmt(t)}</text>`)
  }
  if (panel.xLabel) {
    parts.push(`<text x="${ox + W / 2}" y="${oy + H - 4}" text-anchor="middle" ` +
      `font-size="10">${panel.xLabel}</text>`)
  }
  if (panel.yLabel) {
    const lx = ox + 12
    const ly = oy + H / 2
    parts.push(`<text x="${lx}" y="${ly}" text-anchor="middle" font-size="10" ` +
      `transform="rotate(-90 ${lx} ${ly})">${panel.yLabel}</text>`)
  }
  if (panel.hline !== undefined) {
    parts.push(`<line x1="${ox + MARGIN.left}" y1="${py(panel.hline).toFixed(2)}" ` +
      `x2="${ox + W - MARGIN.right}" y2="${py(panel.hline).toFixed(2)}" ` +
      `stroke="#c22" stroke-dasharray="5,3"/>`)
  }
  if (panel.bars) {
    const { xs, widths, heights, color } = panel.bars
    for (let i = 0; i < xs.length; i++) {
      const bx = px(xs[i])
      const bw = Math.max(px(xs[i] + widths[i]) - bx - 0.5, 0.5)
      const byTop = py(heights[i])
      parts.push(`<rect x="${bx.toFixed(2)}" y="${byTop.toFixed(2)}" ` +
        `width="${bw.toFixed(2)}" height="${(py(0) - byTop).toFixed(2)}" ` +
        `fill="${color}" fill-opacity="0.75"/>`)
    }
  }
  for (const line of panel.lines) {
    const pts = line.xs.map((x, i) =>
      `${px(x).toFixed(2)},${py(line.ys[i]).toFixed(2)}`).join(' ')
    parts.push(`<polyline points="${pts}" fill="none" stroke="${line.color}" ` +
      `stroke-width="1.6"/>`)
  }
  return parts.join('\n')
}

export function renderFigure(panels: Panel[], columns: number,
                             legend: Array<{ label: string; color: string }> = []): string {
  const rows = Math.ceil(panels.length / columns)
  const legendH = legend.length ? 24 : 0
  const width = columns * W
  const height = rows * H + legendH
  const parts: string[] = [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" ` +
    `height="${height}" viewBox="0 0 ${width} ${height}" ` +
    `font-family="Helvetica,Arial,sans-serif">`,
    `<rect width="${width}" height="${height}" fill="white"/>`,
  ]
  legend.forEach((item, i) => {
    const lx = 20 + i * 190
    parts.push(`<rect x="${lx}" y="8" width="18" height="4" fill="${item.color}"/>`)
    parts.push(`<text x="${lx + 24}" y="14" font-size="11">${item.label}</text>`)
  })
  panels.forEach((panel, i) => {
    const ox = (i % columns) * W
    const oy = legendH + Math.floor(i / columns) * H
    parts.push(renderPanel(panel, ox, oy))
  })
  parts.push('</svg>')
  return parts.join('\n')
}
