import * as tf from '@tensorflow/tfjs';

/**
 * Adam with decoupled weight decay: after each Adam step every trainable
 * weight is scaled by (1 - lr * decay). Decay is applied uniformly to all
 * trainable variables.
 */
export class AdamW {
  private readonly adam: tf.Optimizer;

  constructor(
    readonly learningRate: number,
    readonly weightDecay: number,
  ) {
    this.adam = tf.train.adam(learningRate);
  }

  /** One optimization step; returns the loss value. */
  step(lossFn: () => tf.Scalar, variables: tf.Variable[]): number {
    const { value, grads } = tf.variableGrads(lossFn, variables);
    this.adam.applyGradients(grads);
    const factor = 1 - this.learningRate * this.weightDecay;
    tf.tidy(() => {
      for (const v of variables) {
        v.assign(tf.mul(v, factor));
      }
    });
    const loss = value.dataSync()[0];
    value.dispose();
    Object.values(grads).forEach((g) => g.dispose());
    return loss;
  }

  dispose(): void {
    this.adam.dispose();
  }
}
