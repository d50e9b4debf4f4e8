/**
 * Momentum figure: six panels (linear / angular momentum per axis, divided
 * by robot mass) over cumulative physical time, one color per run, so
 * fixed-time and time-optimized runs are directly comparable.
 */
import { writeFileSync } from 'fs'
import { RunArtifacts, runLabel } from './artifacts.js'
import { MomentumSeries, momentumSeries } from './series.js'
import { Panel, renderFigure } from './svg.js'

export const RUN_COLORS = ['#1f77b4', '#ff7f0e', '#2ca02c', '#d62728',
                           '#9467bd', '#8c564b']

export function buildMomentumSeries(runs: RunArtifacts[]): MomentumSeries[] {
  if (runs.length === 0) throw new Error('plot_momentum needs at least one run')
  const masses = new Set(runs.map(r => r.report.mass ?? 1))
  if (masses.size > 1) {
    console.warn(`warning: runs have different masses (${[...masses].join(', ')}); ` +
      'plotting mass-normalized values anyway')
  }
  return runs.map(run => momentumSeries(run, runLabel(run)))
}

export function momentumPanels(series: MomentumSeries[]): Panel[] {
  const axes = ['x', 'y', 'z'] as const
  const panels: Panel[] = []
  for (const [field, name, unit] of
       [['l', 'linear momentum', 'm/s'],
        ['k', 'angular momentum', 'm^2/s']] as const) {
    axes.forEach((axis, i) => {
      panels.push({
        title: `${name} ${axis} / mass`,
        xLabel: 'time [s]',
        yLabel: `[${unit}]`,
        lines: series.map((s, j) => ({
          xs: s.times,
          ys: (field === 'l' ? s.l : s.k)[i],
          color: RUN_COLORS[j % RUN_COLORS.length],
          label: s.label,
        })),
      })
    })
  }
  return panels
}

export function plotMomentum(runs: RunArtifacts[], outImage: string): string {
  const series = buildMomentumSeries(runs)
  const svg = renderFigure(
    momentumPanels(series), 3,
    series.map((s, j) => ({ label: s.label,
                            color: RUN_COLORS[j % RUN_COLORS.length] })))
  writeFileSync(outImage, svg)
  return outImage
}
