import * as tf from '@tensorflow/tfjs';

export interface UnetConfig {
  inputSize: number;
  /** Number of downsampling levels below the input resolution. */
  depth: number;
  /** Channels of the first encoder block; doubles per level. */
  baseChannels: number;
  seed: number;
}

export const DEFAULT_UNET: Omit<UnetConfig, 'inputSize' | 'seed'> = {
  depth: 4,
  baseChannels: 64,
};

/**
 * Encoder-decoder segmentation network with skip connections and a
 * sigmoid output head. Initializers are seeded per layer so rebuilding
 * with the same config yields the same starting weights.
 */
export function buildUnet(cfg: UnetConfig): tf.LayersModel {
  let seedCounter = cfg.seed;
  const conv = (x: tf.SymbolicTensor, filters: number, name: string): tf.SymbolicTensor => {
    seedCounter += 1;
    return tf.layers
      .conv2d({
        filters,
        kernelSize: 3,
        padding: 'same',
        activation: 'relu',
        kernelInitializer: tf.initializers.heNormal({ seed: seedCounter }),
        name,
      })
      .apply(x) as tf.SymbolicTensor;
  };

  const input = tf.input({ shape: [cfg.inputSize, cfg.inputSize, 1], name: 'image' });
  const skips: tf.SymbolicTensor[] = [];
  let x = input;

  for (let level = 0; level < cfg.depth; level++) {
    const filters = cfg.baseChannels * 2 ** level;
    x = conv(x, filters, `enc${level}_a`);
    x = conv(x, filters, `enc${level}_b`);
    skips.push(x);
    x = tf.layers.maxPooling2d({ poolSize: 2, name: `down${level}` }).apply(x) as tf.SymbolicTensor;
  }

  const bottleneckFilters = cfg.baseChannels * 2 ** cfg.depth;
  x = conv(x, bottleneckFilters, 'mid_a');
  x = conv(x, bottleneckFilters, 'mid_b');

  for (let level = cfg.depth - 1; level >= 0; level--) {
    const filters = cfg.baseChannels * 2 ** level;
    x = tf.layers.upSampling2d({ size: [2, 2], name: `up${level}` }).apply(x) as tf.SymbolicTensor;
    x = tf.layers
      .concatenate({ name: `skip${level}` })
      .apply([x, skips[level]]) as tf.SymbolicTensor;
    x = conv(x, filters, `dec${level}_a`);
    x = conv(x, filters, `dec${level}_b`);
  }

  seedCounter += 1;
  const output = tf.layers
    .conv2d({
      filters: 1,
      kernelSize: 1,
      activation: 'sigmoid',
      kernelInitializer: tf.initializers.glorotUniform({ seed: seedCounter }),
      name: 'mask',
    })
    .apply(x) as tf.SymbolicTensor;

  return tf.model({ inputs: input, outputs: output, name: 'unet' });
}
