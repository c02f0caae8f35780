import * as tf from '@tensorflow/tfjs';
import { UnknownBackbone } from './errors';

export const BACKBONES = [
  'vgg16',
  'vgg19',
  'densenet121',
  'resnet50',
  'yolov4-classifier',
] as const;

export type BackboneName = (typeof BACKBONES)[number];

/**
 * Mish activation (x * tanh(softplus(x))), used by the CSPDarknet53 stages.
 * Implemented as a layer because tfjs has no built-in mish.
 */
class Mish extends tf.layers.Layer {
  static className = 'Mish';

  call(inputs: tf.Tensor | tf.Tensor[]): tf.Tensor {
    const x = Array.isArray(inputs) ? inputs[0] : inputs;
    return tf.tidy(() => tf.mul(x, tf.tanh(tf.softplus(x))));
  }

  computeOutputShape(inputShape: tf.Shape): tf.Shape {
    return inputShape;
  }
}
tf.serialization.registerClass(Mish);

/** Deterministic weight init: every layer gets its own derived seed. */
class SeedSequence {
  private counter = 0;
  constructor(private readonly base: number) {}
  next(): number {
    this.counter += 1;
    return (this.base * 7919 + this.counter) % 2147483647;
  }
}

interface Ctx {
  seeds: SeedSequence;
}

function conv(
  ctx: Ctx,
  x: tf.SymbolicTensor,
  filters: number,
  kernel: number,
  stride = 1,
  activation: 'relu' | 'linear' = 'relu',
): tf.SymbolicTensor {
  return tf.layers
    .conv2d({
      filters,
      kernelSize: kernel,
      strides: stride,
      padding: 'same',
      activation,
      kernelInitializer: tf.initializers.glorotUniform({ seed: ctx.seeds.next() }),
    })
    .apply(x) as tf.SymbolicTensor;
}

function bnRelu(x: tf.SymbolicTensor): tf.SymbolicTensor {
  const bn = tf.layers.batchNormalization({ epsilon: 1.001e-5 }).apply(x) as tf.SymbolicTensor;
  return tf.layers.activation({ activation: 'relu' }).apply(bn) as tf.SymbolicTensor;
}

function vgg(ctx: Ctx, input: tf.SymbolicTensor, convsPerBlock: number[]): tf.SymbolicTensor {
  const channels = [64, 128, 256, 512, 512];
  let x = input;
  convsPerBlock.forEach((nConvs, block) => {
    for (let i = 0; i < nConvs; i++) {
      x = conv(ctx, x, channels[block], 3);
    }
    // 'same' pooling matches 'valid' on even dims and keeps 1x1 maps legal
    // at the small input edges used by CPU smoke runs
    x = tf.layers
      .maxPooling2d({ poolSize: 2, strides: 2, padding: 'same' })
      .apply(x) as tf.SymbolicTensor;
  });
  return x;
}

function denseBlock(
  ctx: Ctx,
  input: tf.SymbolicTensor,
  layers: number,
  growth: number,
): tf.SymbolicTensor {
  let x = input;
  for (let i = 0; i < layers; i++) {
    let y = bnRelu(x);
    y = conv(ctx, y, 4 * growth, 1, 1, 'linear');
    y = bnRelu(y);
    y = conv(ctx, y, growth, 3, 1, 'linear');
    x = tf.layers.concatenate().apply([x, y]) as tf.SymbolicTensor;
  }
  return x;
}

function transition(ctx: Ctx, input: tf.SymbolicTensor): tf.SymbolicTensor {
  const channels = input.shape[input.shape.length - 1] as number;
  let x = bnRelu(input);
  x = conv(ctx, x, Math.floor(channels / 2), 1, 1, 'linear');
  return tf.layers
    .averagePooling2d({ poolSize: 2, strides: 2, padding: 'same' })
    .apply(x) as tf.SymbolicTensor;
}

function densenet121(ctx: Ctx, input: tf.SymbolicTensor): tf.SymbolicTensor {
  let x = conv(ctx, input, 64, 7, 2, 'linear');
  x = bnRelu(x);
  x = tf.layers
    .maxPooling2d({ poolSize: 3, strides: 2, padding: 'same' })
    .apply(x) as tf.SymbolicTensor;
  const blocks = [6, 12, 24, 16];
  blocks.forEach((layers, i) => {
    x = denseBlock(ctx, x, layers, 32);
    if (i < blocks.length - 1) x = transition(ctx, x);
  });
  return bnRelu(x);
}

function bottleneck(
  ctx: Ctx,
  input: tf.SymbolicTensor,
  filters: number,
  stride: number,
  project: boolean,
): tf.SymbolicTensor {
  let x = conv(ctx, input, filters, 1, stride, 'linear');
  x = bnRelu(x);
  x = conv(ctx, x, filters, 3, 1, 'linear');
  x = bnRelu(x);
  x = conv(ctx, x, 4 * filters, 1, 1, 'linear');
  x = tf.layers.batchNormalization({ epsilon: 1.001e-5 }).apply(x) as tf.SymbolicTensor;
  let shortcut = input;
  if (project) {
    shortcut = conv(ctx, input, 4 * filters, 1, stride, 'linear');
    shortcut = tf.layers
      .batchNormalization({ epsilon: 1.001e-5 })
      .apply(shortcut) as tf.SymbolicTensor;
  }
  const sum = tf.layers.add().apply([x, shortcut]) as tf.SymbolicTensor;
  return tf.layers.activation({ activation: 'relu' }).apply(sum) as tf.SymbolicTensor;
}

function resnet50(ctx: Ctx, input: tf.SymbolicTensor): tf.SymbolicTensor {
  let x = conv(ctx, input, 64, 7, 2, 'linear');
  x = bnRelu(x);
  x = tf.layers
    .maxPooling2d({ poolSize: 3, strides: 2, padding: 'same' })
    .apply(x) as tf.SymbolicTensor;
  const stages: Array<[number, number]> = [
    [64, 3],
    [128, 4],
    [256, 6],
    [512, 3],
  ];
  stages.forEach(([filters, blocks], stage) => {
    for (let b = 0; b < blocks; b++) {
      const stride = b === 0 && stage > 0 ? 2 : 1;
      x = bottleneck(ctx, x, filters, stride, b === 0);
    }
  });
  return x;
}

function mishConv(
  ctx: Ctx,
  x: tf.SymbolicTensor,
  filters: number,
  kernel: number,
  stride = 1,
): tf.SymbolicTensor {
  let y = conv(ctx, x, filters, kernel, stride, 'linear');
  y = tf.layers.batchNormalization({ epsilon: 1.001e-5 }).apply(y) as tf.SymbolicTensor;
  return new Mish().apply(y) as tf.SymbolicTensor;
}

function cspStage(
  ctx: Ctx,
  input: tf.SymbolicTensor,
  filters: number,
  blocks: number,
): tf.SymbolicTensor {
  // downsample, then a cross-stage-partial split with residual blocks
  let x = mishConv(ctx, input, filters, 3, 2);
  const half = Math.floor(filters / 2);
  const route = mishConv(ctx, x, half, 1);
  let main = mishConv(ctx, x, half, 1);
  for (let i = 0; i < blocks; i++) {
    let y = mishConv(ctx, main, half, 1);
    y = mishConv(ctx, y, half, 3);
    main = tf.layers.add().apply([main, y]) as tf.SymbolicTensor;
  }
  main = mishConv(ctx, main, half, 1);
  const merged = tf.layers.concatenate().apply([main, route]) as tf.SymbolicTensor;
  return mishConv(ctx, merged, filters, 1);
}

function cspdarknet53(ctx: Ctx, input: tf.SymbolicTensor): tf.SymbolicTensor {
  let x = mishConv(ctx, input, 32, 3);
  const stages: Array<[number, number]> = [
    [64, 1],
    [128, 2],
    [256, 8],
    [512, 8],
    [1024, 4],
  ];
  for (const [filters, blocks] of stages) {
    x = cspStage(ctx, x, filters, blocks);
  }
  return x;
}

/**
 * Build a backbone with its classification head replaced by a dense
 * softmax layer over `numClasses`. Weights are randomly initialized from
 * the given seed (no pretrained checkpoints are fetched).
 */
export function buildClassifier(
  backbone: string,
  inputEdge: number,
  numClasses: number,
  seed: number,
): tf.LayersModel {
  const ctx: Ctx = { seeds: new SeedSequence(seed) };
  const input = tf.input({ shape: [inputEdge, inputEdge, 1] });
  let features: tf.SymbolicTensor;
  switch (backbone) {
    case 'vgg16':
      features = vgg(ctx, input, [2, 2, 3, 3, 3]);
      break;
    case 'vgg19':
      features = vgg(ctx, input, [2, 2, 4, 4, 4]);
      break;
    case 'densenet121':
      features = densenet121(ctx, input);
      break;
    case 'resnet50':
      features = resnet50(ctx, input);
      break;
    case 'yolov4-classifier':
      features = cspdarknet53(ctx, input);
      break;
    default:
      throw new UnknownBackbone(backbone);
  }
  const pooled = tf.layers.globalAveragePooling2d({}).apply(features) as tf.SymbolicTensor;
  const logits = tf.layers
    .dense({
      units: numClasses,
      activation: 'softmax',
      kernelInitializer: tf.initializers.glorotUniform({ seed: ctx.seeds.next() }),
    })
    .apply(pooled) as tf.SymbolicTensor;
  return tf.model({ inputs: input, outputs: logits, name: `${backbone}-classifier` });
}
