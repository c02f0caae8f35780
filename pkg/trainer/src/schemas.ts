import { z } from 'zod';

/** Interchange row schemas shared with the evaluation toolkit. */

export const epochLogRow = z.object({
  model: z.string(),
  epoch: z.number().int().min(1),
  train_acc: z.number().min(0).max(1),
  train_loss: z.number().min(0),
  val_acc: z.number().min(0).max(1),
  val_loss: z.number().min(0),
});

export const predictionRow = z.object({
  sample_id: z.string(),
  true_label: z.string(),
  pred_label: z.string(),
  probs: z.array(z.number().min(0).max(1)).optional(),
});

export const summaryRow = z.object({
  model: z.string(),
  train_acc: z.number().min(0).max(1),
  train_loss: z.number().min(0),
  val_acc: z.number().min(0).max(1),
  val_loss: z.number().min(0),
  test_acc: z.number().min(0).max(1),
  test_loss: z.number().min(0),
});

export type EpochLogRow = z.infer<typeof epochLogRow>;
export type PredictionRow = z.infer<typeof predictionRow>;
export type SummaryRow = z.infer<typeof summaryRow>;
