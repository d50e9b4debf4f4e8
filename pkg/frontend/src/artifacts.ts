/**
 * Loading of momplan run directories: trajectory/controls/activations CSVs
 * plus the report JSON. Tables are kept as plain arrays so the plotting and
 * the tests share the same numbers.
 */
import { readFileSync, existsSync } from 'fs'
import { join } from 'path'

export interface Vec3 {
  x: number
  y: number
  z: number
}

export interface TrajectoryRow {
  step: number
  dt: number
  r: Vec3
  l: Vec3
  k: Vec3
  ldot: Vec3
  kdot: Vec3
}

export interface ControlRow {
  step: number
  eef: string
  f: Vec3
  tau: number
  zx: number
  zy: number
}

export interface RunReport {
  scenario_name?: string
  time_mode?: string
  relaxation_mode?: string
  mass?: number
  status?: string
  horizon?: number
  violation?: Record<string, number> | null
  [key: string]: unknown
}

export interface RunArtifacts {
  dir: string
  report: RunReport
  trajectory: TrajectoryRow[]
  controls: ControlRow[]
  /** step -> active end-effector ids (may be empty when the file is absent) */
  activations: Map<number, string[]>
  eefIds: string[]
}

function parseCsv(text: string): Record<string, string>[] {
  const lines = text.trim().split(/\r?\n/)
  if (lines.length < 1) return []
  const header = lines[0].split(',')
  return lines.slice(1).map(line => {
    const cells = line.split(',')
    const row: Record<string, string> = {}
    header.forEach((name, i) => { row[name] = cells[i] })
    return row
  })
}

function vec3(row: Record<string, string>, prefix: string): Vec3 {
  return {
    x: Number(row[`${prefix}_x`]),
    y: Number(row[`${prefix}_y`]),
    z: Number(row[`${prefix}_z`]),
  }
}

export function loadRun(dir: string): RunArtifacts {
  const report = JSON.parse(
    readFileSync(join(dir, 'report.json'), 'utf8')) as RunReport

  const trajectory = parseCsv(
    readFileSync(join(dir, 'trajectory.csv'), 'utf8')).map(row => ({
      step: Number(row.step),
      dt: Number(row.dt),
      r: vec3(row, 'r'),
      l: vec3(row, 'l'),
      k: vec3(row, 'k'),
      ldot: vec3(row, 'ldot'),
      kdot: vec3(row, 'kdot'),
    }))
  trajectory.sort((a, b) => a.step - b.step)

  const controls = parseCsv(
    readFileSync(join(dir, 'controls.csv'), 'utf8')).map(row => ({
      step: Number(row.step),
      eef: row.eef,
      f: vec3(row, 'f'),
      tau: Number(row.tau),
      zx: Number(row.z_x),
      zy: Number(row.z_y),
    }))

  const activations = new Map<number, string[]>()
  const eefIds: string[] = []
  const actPath = join(dir, 'activations.csv')
  if (existsSync(actPath)) {
    for (const row of parseCsv(readFileSync(actPath, 'utf8'))) {
      const step = Number(row.step)
      if (!activations.has(step)) activations.set(step, [])
      activations.get(step)!.push(row.eef)
      if (!eefIds.includes(row.eef)) eefIds.push(row.eef)
    }
  }

  const stepCounts = new Set([trajectory.length])
  if (trajectory.length === 0) throw new Error(`empty trajectory in ${dir}`)
  if (stepCounts.size !== 1) throw new Error(`inconsistent tables in ${dir}`)
  return { dir, report, trajectory, controls, activations, eefIds }
}

export function runLabel(run: RunArtifacts): string {
  const name = run.report.scenario_name ?? 'run'
  const mode = run.report.time_mode === 'fixed_time' ? 'fixed'
    : run.report.time_mode === 'time_opt_free_horizon' ? 'time-opt'
    : run.report.time_mode === 'time_opt_fixed_horizon' ? 'time-opt-fh'
    : '?'
  return `${name}/${mode}`
}
