/**
 * Data transforms behind the figures. These arrays are what the scripted
 * checks assert on; the SVG layer only draws them.
 */
import { RunArtifacts } from './artifacts.js'

export interface MomentumSeries {
  /** physical time at the end of each step (cumulative dt) */
  times: number[]
  /** mass-normalized linear momentum components, one array per axis */
  l: [number[], number[], number[]]
  /** mass-normalized angular momentum components */
  k: [number[], number[], number[]]
  label: string
  mass: number
}

export function cumulativeTimes(dts: number[]): number[] {
  const out: number[] = []
  let acc = 0
  for (const dt of dts) {
    acc += dt
    out.push(acc)
  }
  return out
}

export function momentumSeries(run: RunArtifacts, label: string): MomentumSeries {
  const mass = run.report.mass ?? 1
  const pick = (get: (row: (typeof run.trajectory)[number]) => number) =>
    run.trajectory.map(row => get(row) / mass)
  return {
    times: cumulativeTimes(run.trajectory.map(r => r.dt)),
    l: [pick(r => r.l.x), pick(r => r.l.y), pick(r => r.l.z)],
    k: [pick(r => r.k.x), pick(r => r.k.y), pick(r => r.k.z)],
    label,
    mass,
  }
}

export interface ActivationSpan {
  eef: string
  /** step interval, half open */
  start: number
  end: number
}

export interface TimestepSeries {
  dts: number[]
  times: number[]
  spans: ActivationSpan[]
  eefIds: string[]
  dtMax: number
}

export function activationSpans(run: RunArtifacts): ActivationSpan[] {
  const spans: ActivationSpan[] = []
  for (const eef of run.eefIds) {
    let start: number | null = null
    const n = run.trajectory.length
    for (let t = 0; t <= n; t++) {
      const active = t < n && (run.activations.get(t) ?? []).includes(eef)
      if (active && start === null) start = t
      if (!active && start !== null) {
        spans.push({ eef, start, end: t })
        start = null
      }
    }
  }
  return spans
}

export function timestepSeries(run: RunArtifacts): TimestepSeries {
  const dts = run.trajectory.map(r => r.dt)
  return {
    dts,
    times: cumulativeTimes(dts),
    spans: activationSpans(run),
    eefIds: run.eefIds,
    dtMax: Math.max(...dts),
  }
}

/** Largest |value| of a component series within a step window. */
export function peakAbs(values: number[], start = 0, end = values.length): number {
  let peak = 0
  for (let t = start; t < Math.min(end, values.length); t++) {
    peak = Math.max(peak, Math.abs(values[t]))
  }
  return peak
}

/** Steps whose duration sits at the given bound (within tol). */
export function stepsAtBound(dts: number[], bound: number, tol = 1e-9): number[] {
  const out: number[] = []
  dts.forEach((dt, t) => { if (dt >= bound - tol) out.push(t) })
  return out
}

/** Step windows where at least `count` end-effectors are active. */
export function supportWindows(run: RunArtifacts, count: number): Array<[number, number]> {
  const n = run.trajectory.length
  const windows: Array<[number, number]> = []
  let start: number | null = null
  for (let t = 0; t <= n; t++) {
    const active = t < n && (run.activations.get(t) ?? []).length >= count
    if (active && start === null) start = t
    if (!active && start !== null) {
      windows.push([start, t])
      start = null
    }
  }
  return windows
}
