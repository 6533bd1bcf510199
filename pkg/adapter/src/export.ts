/** Prediction and attribution exports in the primary toolkit's wire formats. */

import { AttributionRow, PredictionRow, Unit } from "./data.js";
import { Checkpoint, modelFrom } from "./train.js";

export type TargetPolicy = "predicted" | "fixed_dismissal";

export function exportPredictions(checkpoint: Checkpoint, units: Unit[]): PredictionRow[] {
  const { model, tokenizer } = modelFrom(checkpoint);
  const rows: PredictionRow[] = [];
  let truncated = 0;
  for (const unit of units) {
    const encoded = tokenizer.encode(unit.text, checkpoint.spec.maxSeqLen);
    if (encoded.truncated) truncated += 1;
    const { probs } = model.forward(encoded.pieces);
    rows.push({
      unit_id: unit.unit_id,
      predicted: probs[1] > probs[0] ? 1 : 0,
      scores: [probs[0], probs[1]],
    });
  }
  if (truncated > 0) {
    console.warn(`${truncated} unit(s) exceeded ${checkpoint.spec.maxSeqLen} pieces and were truncated head-keep`);
  }
  return rows;
}

/** Sum subword scores per word, normalize by the unit's max |value|, clip. */
export function mergeToWords(
  wordCount: number,
  wordOf: number[],
  pieceScores: number[],
): number[] {
  const merged = new Array<number>(wordCount).fill(0);
  for (let i = 0; i < pieceScores.length; i++) {
    merged[wordOf[i]] += pieceScores[i];
  }
  let maxAbs = 0;
  for (const value of merged) maxAbs = Math.max(maxAbs, Math.abs(value));
  if (maxAbs === 0) return merged; // degenerate unit: all zeros, no division
  return merged.map((value) => Math.max(-1, Math.min(1, value / maxAbs)));
}

export function exportAttributions(
  checkpoint: Checkpoint,
  units: Unit[],
  targetPolicy: TargetPolicy = "predicted",
): AttributionRow[] {
  const { model, tokenizer } = modelFrom(checkpoint);
  const rows: AttributionRow[] = [];
  for (const unit of units) {
    const encoded = tokenizer.encode(unit.text, checkpoint.spec.maxSeqLen);
    const { probs } = model.forward(encoded.pieces);
    const predicted: 0 | 1 = probs[1] > probs[0] ? 1 : 0;
    const target: 0 | 1 = targetPolicy === "fixed_dismissal" ? 0 : predicted;
    const pieceScores = model.pieceAttributions(encoded.pieces, target);
    rows.push({
      unit_id: unit.unit_id,
      predicted,
      true_label: unit.label,
      attribution_target: target,
      words: encoded.words,
      attributions: mergeToWords(encoded.words.length, encoded.wordOf, pieceScores),
    });
  }
  return rows;
}
