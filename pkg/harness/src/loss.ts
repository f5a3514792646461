import * as tf from '@tensorflow/tfjs';

export const DICE_EPSILON = 1e-6;

/**
 * Soft Dice overlap on probability maps: (2*sum(p*g) + eps) / (sum(p) + sum(g) + eps).
 * Sums run over the whole batch so the score stays a single differentiable scalar.
 */
export function softDice(
  yTrue: tf.Tensor,
  yPred: tf.Tensor,
  epsilon: number = DICE_EPSILON,
): tf.Scalar {
  return tf.tidy(() => {
    const intersection = tf.sum(tf.mul(yTrue, yPred));
    const total = tf.add(tf.sum(yTrue), tf.sum(yPred));
    return tf.div(
      tf.add(tf.mul(intersection, 2), epsilon),
      tf.add(total, epsilon),
    ) as tf.Scalar;
  });
}

/** Training loss: 1 - softDice (0 at a perfect prediction). */
export function softDiceLoss(
  yTrue: tf.Tensor,
  yPred: tf.Tensor,
  epsilon: number = DICE_EPSILON,
): tf.Scalar {
  return tf.tidy(() => tf.sub(1, softDice(yTrue, yPred, epsilon)) as tf.Scalar);
}

/** Dice on already-thresholded masks, via plain counts. */
export function hardDice(a: Uint8Array, b: Uint8Array, epsilon: number = DICE_EPSILON): number {
  if (a.length !== b.length) {
    throw new Error(`mask length mismatch: ${a.length} vs ${b.length}`);
  }
  let intersection = 0;
  let sizeA = 0;
  let sizeB = 0;
  for (let i = 0; i < a.length; i++) {
    if (a[i]) sizeA++;
    if (b[i]) sizeB++;
    if (a[i] && b[i]) intersection++;
  }
  return (2 * intersection + epsilon) / (sizeA + sizeB + epsilon);
}

export function thresholdMask(values: Float32Array, t = 0.5): Uint8Array {
  const out = new Uint8Array(values.length);
  for (let i = 0; i < values.length; i++) out[i] = values[i] > t ? 1 : 0;
  return out;
}
