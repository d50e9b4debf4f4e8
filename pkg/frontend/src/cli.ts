/**
 * Figure generation from run directories:
 *
 *   node dist/cli.js momentum  RUN_DIR [RUN_DIR ...] --out fig.svg
 *   node dist/cli.js timesteps RUN_DIR [--dt-max 0.25] --out fig.svg
 */
import { loadRun } from './artifacts.js'
import { plotMomentum } from './momentum.js'
import { plotTimesteps } from './timesteps.js'

function parseArgs(argv: string[]) {
  const positional: string[] = []
  const options: Record<string, string> = {}
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i]
    if (arg.startsWith('--')) {
      options[arg.slice(2)] = argv[++i]
    } else {
      positional.push(arg)
    }
  }
  return { positional, options }
}

function main(argv: string[]): number {
  const { positional, options } = parseArgs(argv)
  const command = positional.shift()
  const out = options.out
  if (!command || !out || positional.length === 0) {
    console.error('usage: cli.js momentum RUN_DIR... --out FIG.svg\n' +
                  '       cli.js timesteps RUN_DIR [--dt-max X] --out FIG.svg')
    return 2
  }
  try {
    if (command === 'momentum') {
      plotMomentum(positional.map(loadRun), out)
    } else if (command === 'timesteps') {
      const dtMax = options['dt-max'] !== undefined
        ? Number(options['dt-max']) : undefined
      plotTimesteps(loadRun(positional[0]), out, dtMax)
    } else {
      console.error(`unknown command ${command}`)
      return 2
    }
  } catch (err) {
    console.error(String(err))
    return 1
  }
  console.log(out)
  return 0
}

process.exit(main(process.argv.slice(2)))
