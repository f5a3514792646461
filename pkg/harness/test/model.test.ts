import { strict as assert } from 'node:assert';
import { test } from 'node:test';
import * as tf from '@tensorflow/tfjs';

import { buildUnet } from '../src/model';

const SMALL = { inputSize: 32, depth: 2, baseChannels: 4, seed: 3 };

test('output shape matches input with one channel', () => {
  const model = buildUnet(SMALL);
  const x = tf.zeros([2, 32, 32, 1]);
  const y = model.apply(x, { training: false }) as tf.Tensor;
  assert.deepEqual(y.shape, [2, 32, 32, 1]);
  model.dispose();
});

test('sigmoid head keeps outputs strictly inside (0, 1)', () => {
  const model = buildUnet(SMALL);
  const x = tf.randomUniform([1, 32, 32, 1], 0, 1, 'float32', 11);
  const y = model.apply(x, { training: false }) as tf.Tensor;
  const lo = tf.min(y).dataSync()[0];
  const hi = tf.max(y).dataSync()[0];
  assert.ok(lo > 0 && hi < 1, `range [${lo}, ${hi}]`);
  model.dispose();
});

test('seeded rebuild yields identical initial weights', () => {
  const a = buildUnet(SMALL);
  const b = buildUnet(SMALL);
  const wa = a.getWeights();
  const wb = b.getWeights();
  assert.equal(wa.length, wb.length);
  for (let i = 0; i < wa.length; i++) {
    const da = wa[i].dataSync();
    const db = wb[i].dataSync();
    assert.deepEqual(Array.from(da), Array.from(db));
  }
  a.dispose();
  b.dispose();
});

test('channel widths double per level', () => {
  const model = buildUnet(SMALL);
  const enc0 = model.getLayer('enc0_a');
  const enc1 = model.getLayer('enc1_a');
  const mid = model.getLayer('mid_a');
  assert.equal(enc0.outputShape[3], 4);
  assert.equal(enc1.outputShape[3], 8);
  assert.equal(mid.outputShape[3], 16);
  model.dispose();
});
