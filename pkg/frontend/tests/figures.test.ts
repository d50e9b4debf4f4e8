import { existsSync, mkdtempSync, readFileSync, rmSync } from 'fs'
import { tmpdir } from 'os'
import { join } from 'path'
import { afterAll, describe, expect, it } from 'vitest'
import { loadRun } from '../src/artifacts.js'
import { buildMomentumSeries, plotMomentum } from '../src/momentum.js'
import { peakAbs, stepsAtBound, supportWindows, timestepSeries } from '../src/series.js'
import { plotTimesteps, timestepPanel } from '../src/timesteps.js'

const outDir = mkdtempSync(join(tmpdir(), 'momplan-figs-'))
afterAll(() => rmSync(outDir, { recursive: true, force: true }))

const stairsFixed = loadRun('fixtures/stairs_fixed')
const stairsTime = loadRun('fixtures/stairs_time')
const lowfricTime = loadRun('fixtures/lowfric_time')
const handsTrust = loadRun('fixtures/hands_trust')

describe('momentum figure', () => {
  it('writes a six-panel SVG for a single run', () => {
    const path = join(outDir, 'single.svg')
    plotMomentum([handsTrust], path)
    const svg = readFileSync(path, 'utf8')
    expect(svg).toContain('<svg')
    expect((svg.match(/<polyline/g) ?? []).length).toBe(6)
    expect(svg).toContain('angular momentum y / mass')
  })

  it('overlays several runs with a legend', () => {
    const path = join(outDir, 'pair.svg')
    plotMomentum([stairsFixed, stairsTime], path)
    const svg = readFileSync(path, 'utf8')
    expect((svg.match(/<polyline/g) ?? []).length).toBe(12)
    expect(svg).toContain('stairs/fixed')
    expect(svg).toContain('stairs/time-opt')
  })

  it('rejects an empty run list', () => {
    expect(() => plotMomentum([], join(outDir, 'none.svg'))).toThrow()
  })

  it('is deterministic', () => {
    const a = join(outDir, 'det_a.svg')
    const b = join(outDir, 'det_b.svg')
    plotMomentum([stairsFixed], a)
    plotMomentum([stairsFixed], b)
    expect(readFileSync(a, 'utf8')).toBe(readFileSync(b, 'utf8'))
  })
})

describe('timestep figure', () => {
  it('fixed-time run shows flat bars at the nominal duration', () => {
    const series = timestepSeries(stairsFixed)
    for (const dt of series.dts) expect(dt).toBeCloseTo(0.1, 12)
    const path = join(outDir, 'bars_fixed.svg')
    plotTimesteps(stairsFixed, path, 0.25)
    expect(existsSync(path)).toBe(true)
    const svg = readFileSync(path, 'utf8')
    expect((svg.match(/<rect/g) ?? []).length).toBeGreaterThan(36)
  })

  it('shades activation intervals', () => {
    const panel = timestepPanel(stairsTime)
    expect(panel.shades?.length).toBe(4)
    expect(panel.bars?.heights.length).toBe(36)
  })

  it('renders without shading when activations are absent', () => {
    const bare = { ...stairsFixed, activations: new Map(), eefIds: [] }
    const path = join(outDir, 'bars_bare.svg')
    plotTimesteps(bare, path)
    expect(readFileSync(path, 'utf8')).toContain('<svg')
  })
})

describe('acceptance: figure data checks', () => {
  it('time optimization reduces the stairs k_y peak', () => {
    const [fixed, time] = buildMomentumSeries([stairsFixed, stairsTime])
    const peakFixed = peakAbs(fixed.k[1])
    const peakTime = peakAbs(time.k[1])
    expect(peakFixed).toBeGreaterThan(0.02) // the fixed run has real peaks
    expect(peakTime).toBeLessThan(peakFixed)
    expect(peakTime / peakFixed).toBeLessThan(0.75)
  })

  it('low-friction durations saturate at dt_max during double support', () => {
    const series = timestepSeries(lowfricTime)
    const saturated = new Set(stepsAtBound(series.dts, 0.25, 1e-9))
    expect(saturated.size).toBeGreaterThan(0)
    const windows = supportWindows(lowfricTime, 2)
    expect(windows.length).toBeGreaterThan(0)
    let inDoubleSupport = 0
    for (const [start, end] of windows) {
      for (let t = start; t < end; t++) {
        if (saturated.has(t)) inDoubleSupport++
      }
    }
    expect(inDoubleSupport).toBeGreaterThanOrEqual(5)
    // and the run really used more time than the nominal horizon
    const total = series.times[series.times.length - 1]
    expect(total).toBeGreaterThan(lowfricTime.report.horizon as number)
  })
})
