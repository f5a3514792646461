import { strict as assert } from 'node:assert';
import { test } from 'node:test';
import * as tf from '@tensorflow/tfjs';

import { DICE_EPSILON, hardDice, softDice, softDiceLoss, thresholdMask } from '../src/loss';

test('soft dice of identical masks is 1', () => {
  const mask = tf.tensor([1, 0, 1, 1, 0, 0, 1, 0], [1, 2, 2, 2]);
  const score = softDice(mask, mask).dataSync()[0];
  assert.ok(Math.abs(score - 1) < 1e-6);
});

test('loss at a perfect prediction is 0', () => {
  const mask = tf.tensor([[1, 0], [0, 1]]);
  const loss = softDiceLoss(mask, mask).dataSync()[0];
  assert.ok(Math.abs(loss) < 1e-6);
});

test('disjoint masks score near 0', () => {
  const a = tf.tensor([[1, 1], [0, 0]]);
  const b = tf.tensor([[0, 0], [1, 1]]);
  const score = softDice(a, b).dataSync()[0];
  assert.ok(score < 1e-5);
});

test('hard dice matches hand-counted overlap', () => {
  const a = Uint8Array.from([1, 1, 1, 1, 0, 0, 0, 0]);
  const b = Uint8Array.from([1, 1, 0, 0, 1, 1, 0, 0]);
  const expected = (2 * 2 + DICE_EPSILON) / (4 + 4 + DICE_EPSILON);
  assert.ok(Math.abs(hardDice(a, b) - expected) < 1e-15);
});

test('hard dice of two empty masks is 1', () => {
  const empty = new Uint8Array(4);
  assert.equal(hardDice(empty, empty), 1);
});

test('threshold is strict at the boundary', () => {
  const mask = thresholdMask(Float32Array.from([0.4, 0.5, 0.6]), 0.5);
  assert.deepEqual(Array.from(mask), [0, 0, 1]);
});

test('soft dice gradient matches central finite differences', () => {
  const truthValues = [1, 0, 1, 1, 0, 0, 1, 0, 0, 1, 1, 0, 1, 0, 0, 1];
  const base = [
    0.3, 0.7, 0.6, 0.2, 0.9, 0.4, 0.5, 0.8, 0.1, 0.6, 0.35, 0.75, 0.55, 0.25, 0.45, 0.65,
  ];

  // independent float64 evaluation of the same loss, differenced numerically
  const referenceLoss = (pred: number[]): number => {
    let inter = 0;
    let total = 0;
    for (let i = 0; i < pred.length; i++) {
      inter += truthValues[i] * pred[i];
      total += truthValues[i] + pred[i];
    }
    return 1 - (2 * inter + DICE_EPSILON) / (total + DICE_EPSILON);
  };

  const truth = tf.tensor(truthValues, [4, 4]);
  const pred = tf.variable(tf.tensor(base, [4, 4]));
  const { grads } = tf.variableGrads(() => softDiceLoss(truth, pred), [pred]);
  const analytic = Object.values(grads)[0].dataSync();

  const h = 1e-6;
  let worstRel = 0;
  for (let i = 0; i < base.length; i++) {
    const plus = [...base];
    const minus = [...base];
    plus[i] += h;
    minus[i] -= h;
    const numeric = (referenceLoss(plus) - referenceLoss(minus)) / (2 * h);
    const rel = Math.abs(analytic[i] - numeric) / Math.max(Math.abs(numeric), 1e-8);
    worstRel = Math.max(worstRel, rel);
  }
  assert.ok(worstRel < 1e-4, `worst relative gradient error ${worstRel}`);
});
