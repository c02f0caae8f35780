import * as fs from 'fs';
import * as path from 'path';
import { EmptyLog } from './errors';
import { epochLogRow, EpochLogRow, SummaryRow } from './schemas';

/**
 * Fold the final epoch of a log plus the sidecar test metrics into one
 * summary JSONL line (the comparison-table row format).
 */
export function exportSummary(logPath: string, testMetricsPath?: string): SummaryRow {
  const lines = fs
    .readFileSync(logPath, 'utf8')
    .split('\n')
    .filter((l) => l.trim().length > 0);
  if (lines.length === 0) {
    throw new EmptyLog(logPath);
  }
  const rows: EpochLogRow[] = lines.map((l, i) => {
    const parsed = epochLogRow.safeParse(JSON.parse(l));
    if (!parsed.success) {
      throw new Error(`bad epoch-log line ${i + 1}: ${parsed.error.message}`);
    }
    return parsed.data;
  });
  const last = rows[rows.length - 1];

  const metricsPath = testMetricsPath ?? path.join(path.dirname(logPath), 'test_metrics.json');
  let testAcc = last.val_acc;
  let testLoss = last.val_loss;
  if (fs.existsSync(metricsPath)) {
    const metrics = JSON.parse(fs.readFileSync(metricsPath, 'utf8'));
    testAcc = metrics.test_acc;
    testLoss = metrics.test_loss;
  }
  return {
    model: last.model,
    train_acc: last.train_acc,
    train_loss: last.train_loss,
    val_acc: last.val_acc,
    val_loss: last.val_loss,
    test_acc: testAcc,
    test_loss: testLoss,
  };
}
