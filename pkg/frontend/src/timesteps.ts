/**
 * Timestep figure: one bar per step with its optimized duration, placed on
 * the cumulative-time axis, the dt upper bound as a dashed line, and the
 * end-effector activation intervals shaded in the background.
 */
import { writeFileSync } from 'fs'
import { RunArtifacts, runLabel } from './artifacts.js'
import { TimestepSeries, timestepSeries } from './series.js'
import { Panel, Shade, renderFigure } from './svg.js'

export const EEF_COLORS: Record<string, string> = {}
const EEF_PALETTE = ['#1f77b4', '#ff7f0e', '#2ca02c', '#d62728']

export function timestepPanel(run: RunArtifacts, dtBound?: number): Panel {
  const series: TimestepSeries = timestepSeries(run)
  const starts = series.times.map((t, i) => t - series.dts[i])
  const shades: Shade[] = series.spans.map(span => ({
    x0: span.start === 0 ? 0 : series.times[span.start - 1],
    x1: series.times[span.end - 1],
    color: EEF_PALETTE[series.eefIds.indexOf(span.eef) % EEF_PALETTE.length],
    label: span.eef,
  }))
  return {
    title: `timestep durations - ${runLabel(run)}`,
    xLabel: 'time [s]',
    yLabel: 'dt [s]',
    lines: [],
    bars: { xs: starts, widths: series.dts, heights: series.dts,
            color: '#444' },
    shades,
    hline: dtBound,
  }
}

export function plotTimesteps(run: RunArtifacts, outImage: string,
                              dtBound?: number): string {
  const legend = run.eefIds.map((eef, i) => ({
    label: eef, color: EEF_PALETTE[i % EEF_PALETTE.length] }))
  const svg = renderFigure([timestepPanel(run, dtBound)], 1, legend)
  writeFileSync(outImage, svg)
  return outImage
}
