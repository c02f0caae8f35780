#!/usr/bin/env node
import * as fs from 'fs';
import yargs from 'yargs';
import { hideBin } from 'yargs/helpers';
import { BACKBONES, BackboneName } from './backbones';
import { DEFAULTS, fineTune } from './train';
import { exportSummary } from './summary';

async function run(): Promise<number> {
  const argv = yargs(hideBin(process.argv))
    .command(
      'fine-tune',
      'train a backbone on a materialized split and emit interchange files',
      (y) =>
        y
          .option('backbone', { type: 'string', demandOption: true, choices: [...BACKBONES] })
          .option('split', { type: 'string', demandOption: true, describe: 'split directory with train/val/test trees' })
          .option('out', { type: 'string', demandOption: true })
          .option('epochs', { type: 'number', default: DEFAULTS.epochs })
          .option('lr', { type: 'number', default: DEFAULTS.learningRate })
          .option('input-edge', { type: 'number', default: DEFAULTS.inputEdge })
          .option('batch', { type: 'number', default: DEFAULTS.batchSize })
          .option('seed', { type: 'number', default: DEFAULTS.seed }),
    )
    .command('export-summary', 'fold an epoch log into a summary JSONL line', (y) =>
      y
        .option('log', { type: 'string', demandOption: true })
        .option('test-metrics', { type: 'string' })
        .option('out', { type: 'string', demandOption: true }),
    )
    .demandCommand(1)
    .strict()
    .parseSync();

  const command = argv._[0];
  if (command === 'fine-tune') {
    const result = await fineTune({
      backbone: argv.backbone as BackboneName,
      epochs: argv.epochs as number,
      learningRate: argv.lr as number,
      inputEdge: argv['input-edge'] as number,
      splitDir: argv.split as string,
      outDir: argv.out as string,
      seed: argv.seed as number,
      batchSize: argv.batch as number,
    });
    console.log(
      `fine-tuned ${argv.backbone}: test_acc=${result.testAcc.toFixed(4)} ` +
        `test_loss=${result.testLoss.toFixed(4)} predictions=${result.numTest}`,
    );
    console.log(`wrote ${result.epochLogPath}, ${result.predictionsPath}, ${result.summaryPath}`);
    return 0;
  }
  if (command === 'export-summary') {
    const summary = exportSummary(argv.log as string, argv['test-metrics'] as string | undefined);
    fs.writeFileSync(argv.out as string, JSON.stringify(summary) + '\n');
    console.log(`wrote ${argv.out}`);
    return 0;
  }
  return 2;
}

run()
  .then((code) => process.exit(code))
  .catch((err) => {
    console.error(`mri-trainer: error: ${err.name ?? 'Error'}: ${err.message}`);
    process.exit(1);
  });
