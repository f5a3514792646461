import * as fs from 'fs';
import * as path from 'path';
import { spawnSync } from 'child_process';
import * as tf from '@tensorflow/tfjs';

import { listPngs, loadPairs, SamplePair, writeMaskPng } from './data';
import { hardDice, thresholdMask, DICE_EPSILON } from './loss';
import { buildUnet } from './model';
import { buildReport, EvalReport, writeReport } from './report';
import { CheckpointEntry, loadCheckpoint, predict, trainPhase } from './train';

export type ExperimentMode = 'baseline' | 'pretrain_no_fda' | 'pretrain_fda';

export interface ExperimentConfig {
  mode: ExperimentMode;
  /** Root holding the role directories produced from the CLI's outputs. */
  dataRoot: string;
  outDir: string;
  epochs: { baseline: number; pretrain: number; finetune: number };
  learningRate: number;
  batchSize: number;
  weightDecay: number;
  alpha: number;
  seed: number;
  model: { depth: number; baseChannels: number };
  pythonBin: string;
  diceEpsilon: number;
}

export const EXPERIMENT_DEFAULTS = {
  epochs: { baseline: 200, pretrain: 150, finetune: 50 },
  learningRate: 1e-4,
  batchSize: 16,
  weightDecay: 1e-2,
  alpha: 0.014,
  seed: 0,
  model: { depth: 4, baseChannels: 64 },
  pythonBin: 'python3',
  diceEpsilon: DICE_EPSILON,
};

export interface ExperimentResult {
  report: EvalReport;
  checkpointLogs: Record<string, CheckpointEntry[]>;
}

interface Roles {
  synthImages: string;
  synthLabels: string;
  synthValImages: string;
  synthValLabels: string;
  realTrainImages: string;
  realTrainLabels: string;
  realValImages: string;
  realValLabels: string;
  realTestImages: string;
  realTestLabels: string;
  targetPool: string;
}

function roles(dataRoot: string): Roles {
  const p = (...parts: string[]) => path.join(dataRoot, ...parts);
  return {
    synthImages: p('synth', 'images'),
    synthLabels: p('synth', 'labels'),
    synthValImages: p('synth_val', 'images'),
    synthValLabels: p('synth_val', 'labels'),
    realTrainImages: p('real_train', 'images'),
    realTrainLabels: p('real_train', 'labels'),
    realValImages: p('real_val', 'images'),
    realValLabels: p('real_val', 'labels'),
    realTestImages: p('real_test', 'images'),
    realTestLabels: p('real_test', 'labels'),
    targetPool: p('target_pool'),
  };
}

function runCli(pythonBin: string, args: string[]): void {
  const result = spawnSync(pythonBin, ['-m', 'echoadapt', ...args], { encoding: 'utf-8' });
  if (result.status !== 0) {
    throw new Error(
      `echoadapt ${args[0]} failed (${result.status}): ${result.stderr || result.stdout}`,
    );
  }
}

/** Adapt a directory via the CLI with per-iteration random pairing. */
function adaptRandom(
  cfg: ExperimentConfig,
  sourceDir: string,
  outDir: string,
  iteration: number,
): void {
  runCli(cfg.pythonBin, [
    'adapt',
    '--source', sourceDir,
    '--target', roles(cfg.dataRoot).targetPool,
    '--out', outDir,
    '--alpha', String(cfg.alpha),
    '--seed', String(cfg.seed),
    '--pairing', 'random',
    '--iteration', String(iteration),
  ]);
}

/** Adapt validation images once, against a stored deterministic assignment. */
function adaptFixed(cfg: ExperimentConfig, sourceDir: string, outDir: string): void {
  const pool = listPngs(roles(cfg.dataRoot).targetPool);
  const sources = listPngs(sourceDir);
  const assignments: Record<string, string> = {};
  sources.forEach((name, i) => {
    assignments[name] = pool[i % pool.length];
  });
  const manifestPath = path.join(cfg.outDir, 'val_pairing.json');
  fs.writeFileSync(manifestPath, JSON.stringify({ assignments }, null, 2) + '\n');
  runCli(cfg.pythonBin, [
    'adapt',
    '--source', sourceDir,
    '--target', roles(cfg.dataRoot).targetPool,
    '--out', outDir,
    '--alpha', String(cfg.alpha),
    '--pairing', 'fixed',
    '--manifest', manifestPath,
  ]);
}

function evaluateOnTest(
  model: tf.LayersModel,
  cfg: ExperimentConfig,
  testPairs: SamplePair[],
): EvalReport {
  const predDir = path.join(cfg.outDir, 'predictions');
  fs.mkdirSync(predDir, { recursive: true });
  const pred = predict(model, testPairs);
  const values = pred.dataSync() as Float32Array;
  pred.dispose();

  const { width, height } = testPairs[0].image;
  const pixels = width * height;
  const scores: number[] = [];
  testPairs.forEach((pair, i) => {
    const mask = thresholdMask(values.subarray(i * pixels, (i + 1) * pixels) as Float32Array);
    const truth = thresholdMask(pair.label.data);
    scores.push(hardDice(truth, mask, cfg.diceEpsilon));
    writeMaskPng(path.join(predDir, pair.id), width, height, mask);
  });
  return buildReport(testPairs.map((p) => p.id), scores, cfg.diceEpsilon);
}

export function runExperiment(cfg: ExperimentConfig): ExperimentResult {
  fs.mkdirSync(cfg.outDir, { recursive: true });
  const r = roles(cfg.dataRoot);
  const logs: Record<string, CheckpointEntry[]> = {};

  const realTrain = loadPairs(r.realTrainImages, r.realTrainLabels);
  const realVal = loadPairs(r.realValImages, r.realValLabels);
  const realTest = loadPairs(r.realTestImages, r.realTestLabels);
  const inputSize = realTrain[0].image.width;

  const model = buildUnet({
    inputSize,
    depth: cfg.model.depth,
    baseChannels: cfg.model.baseChannels,
    seed: cfg.seed,
  });

  const finalCheckpoint = path.join(cfg.outDir, 'checkpoint.json');

  if (cfg.mode !== 'baseline') {
    let pretrainProvider: (epoch: number) => SamplePair[];
    let pretrainVal: SamplePair[];
    if (cfg.mode === 'pretrain_fda') {
      pretrainProvider = (epoch: number) => {
        const adaptedDir = path.join(cfg.outDir, `adapted_epoch_${epoch}`);
        adaptRandom(cfg, r.synthImages, adaptedDir, epoch);
        return loadPairs(adaptedDir, r.synthLabels, listPngs(r.synthImages));
      };
      const adaptedValDir = path.join(cfg.outDir, 'adapted_val');
      adaptFixed(cfg, r.synthValImages, adaptedValDir);
      pretrainVal = loadPairs(adaptedValDir, r.synthValLabels, listPngs(r.synthValImages));
    } else {
      const synthTrain = loadPairs(r.synthImages, r.synthLabels);
      pretrainProvider = () => synthTrain;
      pretrainVal = loadPairs(r.synthValImages, r.synthValLabels);
    }
    const pretrain = trainPhase(model, {
      epochs: cfg.epochs.pretrain,
      batchSize: cfg.batchSize,
      learningRate: cfg.learningRate,
      weightDecay: cfg.weightDecay,
      seed: cfg.seed,
      trainProvider: pretrainProvider,
      valPairs: pretrainVal,
      checkpointPath: path.join(cfg.outDir, 'pretrain_checkpoint.json'),
    });
    logs.pretrain = pretrain.checkpoints;
    // continue fine-tuning from the best pretraining weights
    loadCheckpoint(model, path.join(cfg.outDir, 'pretrain_checkpoint.json'));
  }

  const mainPhase = trainPhase(model, {
    epochs: cfg.mode === 'baseline' ? cfg.epochs.baseline : cfg.epochs.finetune,
    batchSize: cfg.batchSize,
    learningRate: cfg.learningRate,
    weightDecay: cfg.weightDecay,
    seed: cfg.seed + 1,
    trainProvider: () => realTrain,
    valPairs: realVal,
    checkpointPath: finalCheckpoint,
  });
  logs[cfg.mode === 'baseline' ? 'baseline' : 'finetune'] = mainPhase.checkpoints;

  loadCheckpoint(model, finalCheckpoint);
  const report = evaluateOnTest(model, cfg, realTest);
  writeReport(path.join(cfg.outDir, 'report.json'), report);
  fs.writeFileSync(
    path.join(cfg.outDir, 'checkpoints.json'),
    JSON.stringify(logs, null, 2) + '\n',
  );
  fs.writeFileSync(
    path.join(cfg.outDir, 'resolved_config.json'),
    JSON.stringify(cfg, null, 2) + '\n',
  );
  model.dispose();
  return { report, checkpointLogs: logs };
}
