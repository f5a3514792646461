import * as fs from 'fs';

import {
  EXPERIMENT_DEFAULTS,
  ExperimentConfig,
  ExperimentMode,
  runExperiment,
} from './experiments';

function usage(): never {
  console.error(
    'usage: node dist/src/cli.js --config FILE [--mode baseline|pretrain_no_fda|pretrain_fda]',
  );
  process.exit(2);
}

function parseArgs(argv: string[]): { config: string; mode?: ExperimentMode } {
  let config: string | undefined;
  let mode: ExperimentMode | undefined;
  for (let i = 0; i < argv.length; i++) {
    if (argv[i] === '--config') config = argv[++i];
    else if (argv[i] === '--mode') mode = argv[++i] as ExperimentMode;
    else usage();
  }
  if (!config) usage();
  return { config, mode };
}

function main(): void {
  const args = parseArgs(process.argv.slice(2));
  const raw = JSON.parse(fs.readFileSync(args.config, 'utf-8'));
  const cfg: ExperimentConfig = {
    ...EXPERIMENT_DEFAULTS,
    ...raw,
    epochs: { ...EXPERIMENT_DEFAULTS.epochs, ...(raw.epochs ?? {}) },
    model: { ...EXPERIMENT_DEFAULTS.model, ...(raw.model ?? {}) },
    mode: args.mode ?? raw.mode,
  };
  if (!cfg.mode || !cfg.dataRoot || !cfg.outDir) {
    console.error('config must provide mode, dataRoot, and outDir');
    process.exit(2);
  }
  const { report } = runExperiment(cfg);
  console.log(`${cfg.mode}: test dice mean ${report.mean.toFixed(6)} over ${report.scores.length} samples`);
}

main();
