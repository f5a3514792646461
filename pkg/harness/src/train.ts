import * as fs from 'fs';
import * as tf from '@tensorflow/tfjs';

import { AdamW } from './adamw';
import { SamplePair, toTensors } from './data';
import { softDiceLoss } from './loss';

export interface CheckpointEntry {
  epoch: number;
  valLoss: number;
}

export interface PhaseOptions {
  epochs: number;
  batchSize: number;
  learningRate: number;
  weightDecay: number;
  seed: number;
  /** Training pairs for a given epoch (lets callers re-adapt per epoch). */
  trainProvider: (epoch: number) => SamplePair[];
  valPairs: SamplePair[];
  /** Best-so-far weights land here whenever validation improves. */
  checkpointPath: string;
  /** Carried across phases so fine-tuning only checkpoints on real improvement. */
  initialBestValLoss?: number;
}

export interface PhaseResult {
  checkpoints: CheckpointEntry[];
  bestValLoss: number;
  trainLosses: number[];
}

/** Small deterministic shuffle (mulberry32). */
function shuffled<T>(items: T[], seed: number): T[] {
  const out = [...items];
  let state = (seed >>> 0) + 0x6d2b79f5;
  const rand = () => {
    state = Math.imul(state ^ (state >>> 15), state | 1) >>> 0;
    state ^= state + Math.imul(state ^ (state >>> 7), state | 61);
    return ((state ^ (state >>> 14)) >>> 0) / 4294967296;
  };
  for (let i = out.length - 1; i > 0; i--) {
    const j = Math.floor(rand() * (i + 1));
    [out[i], out[j]] = [out[j], out[i]];
  }
  return out;
}

function assertSigmoidRange(pred: tf.Tensor): void {
  const lo = tf.min(pred).dataSync()[0];
  const hi = tf.max(pred).dataSync()[0];
  if (!(lo > 0 && hi < 1)) {
    throw new Error(`network output left (0, 1): min=${lo}, max=${hi}`);
  }
}

export function predict(model: tf.LayersModel, pairs: SamplePair[]): tf.Tensor4D {
  return tf.tidy(() => {
    const { x } = toTensors(pairs);
    return model.apply(x, { training: false }) as tf.Tensor4D;
  });
}

export function validationLoss(model: tf.LayersModel, pairs: SamplePair[]): number {
  return tf.tidy(() => {
    const { x, y } = toTensors(pairs);
    const pred = model.apply(x, { training: false }) as tf.Tensor;
    return softDiceLoss(y, pred).dataSync()[0];
  });
}

export function saveCheckpoint(
  model: tf.LayersModel,
  path: string,
  entry: CheckpointEntry,
): void {
  const tensors = model.getWeights().map((w) => ({
    shape: w.shape,
    data: Buffer.from(new Float32Array(w.dataSync()).buffer).toString('base64'),
  }));
  fs.writeFileSync(path, JSON.stringify({ ...entry, tensors }, null, 2) + '\n');
}

export function loadCheckpoint(model: tf.LayersModel, path: string): CheckpointEntry {
  const raw = JSON.parse(fs.readFileSync(path, 'utf-8'));
  const weights = raw.tensors.map((t: { shape: number[]; data: string }) => {
    const buf = Buffer.from(t.data, 'base64');
    const values = new Float32Array(buf.buffer, buf.byteOffset, buf.byteLength / 4);
    return tf.tensor(values, t.shape);
  });
  model.setWeights(weights);
  weights.forEach((w: tf.Tensor) => w.dispose());
  return { epoch: raw.epoch, valLoss: raw.valLoss };
}

/**
 * Train for a fixed number of epochs, checkpointing only when the
 * validation loss improves on the best seen so far.
 */
export function trainPhase(model: tf.LayersModel, opts: PhaseOptions): PhaseResult {
  const optimizer = new AdamW(opts.learningRate, opts.weightDecay);
  const variables = model.trainableWeights.map(
    (w) => (w as unknown as { val: tf.Variable }).val,
  );
  const checkpoints: CheckpointEntry[] = [];
  const trainLosses: number[] = [];
  let best = opts.initialBestValLoss ?? Number.POSITIVE_INFINITY;

  for (let epoch = 0; epoch < opts.epochs; epoch++) {
    const pairs = shuffled(opts.trainProvider(epoch), opts.seed + epoch);
    const batchSize = Math.min(opts.batchSize, pairs.length);
    let epochLoss = 0;
    let steps = 0;
    for (let start = 0; start < pairs.length; start += batchSize) {
      const batch = pairs.slice(start, start + batchSize);
      const { x, y } = toTensors(batch);
      const loss = optimizer.step(() => {
        const pred = model.apply(x, { training: true }) as tf.Tensor;
        assertSigmoidRange(pred);
        return softDiceLoss(y, pred);
      }, variables);
      if (!Number.isFinite(loss)) {
        throw new Error(`non-finite training loss at epoch ${epoch}`);
      }
      epochLoss += loss;
      steps += 1;
      x.dispose();
      y.dispose();
    }
    trainLosses.push(epochLoss / Math.max(1, steps));

    const valLoss = validationLoss(model, opts.valPairs);
    if (valLoss < best) {
      best = valLoss;
      const entry = { epoch, valLoss };
      checkpoints.push(entry);
      saveCheckpoint(model, opts.checkpointPath, entry);
    }
  }

  optimizer.dispose();
  return { checkpoints, bestValLoss: best, trainLosses };
}
