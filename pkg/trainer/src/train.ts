import * as fs from 'fs';
import * as path from 'path';
import * as tf from '@tensorflow/tfjs';
import { BACKBONES, BackboneName, buildClassifier } from './backbones';
import { listClasses, loadPartition, shuffledIndices, PartitionData } from './data';
import { UnknownBackbone } from './errors';
import { EpochLogRow, PredictionRow, SummaryRow } from './schemas';

export interface TrainSpec {
  backbone: BackboneName;
  epochs: number;
  learningRate: number;
  inputEdge: number;
  splitDir: string;
  outDir: string;
  seed: number;
  batchSize: number;
}

export const DEFAULTS = {
  epochs: 1,
  learningRate: 1e-3,
  inputEdge: 224,
  seed: 0,
  batchSize: 8,
};

export interface TrainResult {
  epochLogPath: string;
  predictionsPath: string;
  summaryPath: string;
  weightsDir: string;
  testAcc: number;
  testLoss: number;
  numTest: number;
}

/** Write-then-rename so consumers never observe a partial file. */
function writeAtomic(filePath: string, content: string): void {
  const tmp = `${filePath}.tmp`;
  fs.writeFileSync(tmp, content);
  fs.renameSync(tmp, filePath);
}

function jsonl(rows: object[]): string {
  return rows.map((r) => JSON.stringify(r)).join('\n') + '\n';
}

function reorder(data: PartitionData, order: number[]) {
  const xs = tf.tidy(() => tf.gather(data.xs, order));
  const ys = tf.tidy(() => tf.gather(data.ys, order));
  return { xs: xs as tf.Tensor4D, ys: ys as tf.Tensor2D };
}

async function evaluate(
  model: tf.LayersModel,
  data: PartitionData,
  batchSize: number,
): Promise<{ loss: number; acc: number }> {
  const [loss, acc] = model.evaluate(data.xs, data.ys, { batchSize }) as tf.Scalar[];
  const out = { loss: (await loss.data())[0], acc: (await acc.data())[0] };
  loss.dispose();
  acc.dispose();
  return out;
}

export async function fineTune(spec: TrainSpec): Promise<TrainResult> {
  if (!(BACKBONES as readonly string[]).includes(spec.backbone)) {
    throw new UnknownBackbone(spec.backbone);
  }
  const classes = listClasses(spec.splitDir);
  const train = loadPartition(spec.splitDir, 'train', classes, spec.inputEdge)!;
  const val = loadPartition(spec.splitDir, 'val', classes, spec.inputEdge);
  const test = loadPartition(spec.splitDir, 'test', classes, spec.inputEdge);

  const model = buildClassifier(spec.backbone, spec.inputEdge, classes.length, spec.seed);
  model.compile({
    optimizer: tf.train.adam(spec.learningRate),
    loss: 'categoricalCrossentropy',
    metrics: ['accuracy'],
  });

  const order = shuffledIndices(train.samples.length, spec.seed);
  const shuffled = reorder(train, order);

  const epochRows: EpochLogRow[] = [];
  const clamp01 = (v: number) => Math.min(1, Math.max(0, v));
  for (let epoch = 1; epoch <= spec.epochs; epoch++) {
    const history = await model.fit(shuffled.xs, shuffled.ys, {
      epochs: 1,
      batchSize: spec.batchSize,
      shuffle: false,
      verbose: 0,
    });
    const trainLoss = history.history['loss'][0] as number;
    const trainAcc = history.history['acc'][0] as number;
    // validation falls back to the training metrics when the split has no
    // val partition (documented in metadata.json)
    let valLoss = trainLoss;
    let valAcc = trainAcc;
    if (val) {
      const v = await evaluate(model, val, spec.batchSize);
      valLoss = v.loss;
      valAcc = v.acc;
    }
    epochRows.push({
      model: spec.backbone,
      epoch,
      train_acc: clamp01(trainAcc),
      train_loss: Math.max(0, trainLoss),
      val_acc: clamp01(valAcc),
      val_loss: Math.max(0, valLoss),
    });
  }

  let testLoss = epochRows[epochRows.length - 1].val_loss;
  let testAcc = epochRows[epochRows.length - 1].val_acc;
  const predictionRows: PredictionRow[] = [];
  if (test) {
    const t = await evaluate(model, test, spec.batchSize);
    testLoss = Math.max(0, t.loss);
    testAcc = clamp01(t.acc);
    const probs = model.predict(test.xs, { batchSize: spec.batchSize }) as tf.Tensor2D;
    const probData = await probs.data();
    probs.dispose();
    const k = classes.length;
    test.samples.forEach((sample, i) => {
      const row = Array.from(probData.slice(i * k, (i + 1) * k), (p) =>
        Math.min(1, Math.max(0, p)),
      );
      let best = 0;
      for (let c = 1; c < k; c++) if (row[c] > row[best]) best = c;
      predictionRows.push({
        sample_id: sample.id,
        true_label: classes[sample.classIndex],
        pred_label: classes[best],
        probs: row,
      });
    });
  }

  fs.mkdirSync(spec.outDir, { recursive: true });
  const epochLogPath = path.join(spec.outDir, 'epochs.jsonl');
  const predictionsPath = path.join(spec.outDir, 'predictions.jsonl');
  const summaryPath = path.join(spec.outDir, 'summary.jsonl');
  const testMetricsPath = path.join(spec.outDir, 'test_metrics.json');
  const metadataPath = path.join(spec.outDir, 'metadata.json');
  const weightsDir = path.join(spec.outDir, 'weights');

  writeAtomic(epochLogPath, jsonl(epochRows));
  writeAtomic(predictionsPath, jsonl(predictionRows));

  const last = epochRows[epochRows.length - 1];
  const summary: SummaryRow = {
    model: spec.backbone,
    train_acc: last.train_acc,
    train_loss: last.train_loss,
    val_acc: last.val_acc,
    val_loss: last.val_loss,
    test_acc: testAcc,
    test_loss: testLoss,
  };
  writeAtomic(summaryPath, jsonl([summary]));
  writeAtomic(
    testMetricsPath,
    JSON.stringify({ model: spec.backbone, test_acc: testAcc, test_loss: testLoss }, null, 2) +
      '\n',
  );
  // the training recipe is not part of the interchange contract, so it is
  // recorded in a sidecar instead of the log files
  writeAtomic(
    metadataPath,
    JSON.stringify(
      {
        backbone: spec.backbone,
        classes,
        epochs: spec.epochs,
        optimizer: 'adam',
        learning_rate: spec.learningRate,
        batch_size: spec.batchSize,
        input_edge: spec.inputEdge,
        input_channels: 1,
        seed: spec.seed,
        augmentation: 'none',
        pretrained_weights: 'none (random init)',
        val_fallback: val ? 'val partition' : 'train metrics (no val images)',
      },
      null,
      2,
    ) + '\n',
  );

  fs.mkdirSync(weightsDir, { recursive: true });
  await model.save(
    tf.io.withSaveHandler(async (artifacts) => {
      const weightData = artifacts.weightData as ArrayBuffer;
      fs.writeFileSync(path.join(weightsDir, 'weights.bin'), Buffer.from(weightData));
      const manifest = {
        modelTopology: artifacts.modelTopology,
        weightsManifest: [
          { paths: ['weights.bin'], weights: artifacts.weightSpecs },
        ],
      };
      writeAtomic(path.join(weightsDir, 'model.json'), JSON.stringify(manifest) + '\n');
      return {
        modelArtifactsInfo: {
          dateSaved: new Date(),
          modelTopologyType: 'JSON',
        },
      };
    }),
  );

  tf.dispose([train.xs, train.ys, shuffled.xs, shuffled.ys]);
  if (val) tf.dispose([val.xs, val.ys]);
  if (test) tf.dispose([test.xs, test.ys]);
  model.dispose();

  return {
    epochLogPath,
    predictionsPath,
    summaryPath,
    weightsDir,
    testAcc,
    testLoss,
    numTest: predictionRows.length,
  };
}
