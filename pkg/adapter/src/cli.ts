#!/usr/bin/env node
/** adapter train|predict|attribute --config <json>
 *
 * The config file names the units/checkpoint/output paths and optional
 * training overrides:
 *
 * {
 *   "units": "units_chunk.jsonl",
 *   "checkpoint": "checkpoint.json",
 *   "predictions": "predictions.jsonl",
 *   "attributions": "attributions.jsonl",
 *   "targetPolicy": "predicted",
 *   "train": {"seed": 48, "epochs": 1, "learningRate": 2e-5}
 * }
 */

import * as fs from "node:fs";
import * as path from "node:path";

import { readUnits, writeJsonl } from "./data.js";
import { exportAttributions, exportPredictions, TargetPolicy } from "./export.js";
import { finetune, loadCheckpoint, saveCheckpoint, TrainSpec } from "./train.js";

interface AdapterConfig {
  units: string;
  checkpoint: string;
  predictions?: string;
  attributions?: string;
  targetPolicy?: TargetPolicy;
  train?: Partial<TrainSpec>;
}

function loadConfig(configPath: string): AdapterConfig {
  const raw = JSON.parse(fs.readFileSync(configPath, "utf-8")) as AdapterConfig;
  const base = path.dirname(configPath);
  const resolve = (p: string | undefined) =>
    p === undefined ? undefined : path.isAbsolute(p) ? p : path.join(base, p);
  return {
    ...raw,
    units: resolve(raw.units)!,
    checkpoint: resolve(raw.checkpoint)!,
    predictions: resolve(raw.predictions),
    attributions: resolve(raw.attributions),
  };
}

export function run(argv: string[]): number {
  const [command, ...rest] = argv;
  const flagAt = rest.indexOf("--config");
  if (!command || flagAt < 0 || !rest[flagAt + 1]) {
    console.error("usage: adapter train|predict|attribute --config <json>");
    return 2;
  }
  const config = loadConfig(rest[flagAt + 1]);
  const units = readUnits(config.units);

  if (command === "train") {
    const checkpoint = finetune(units, config.train ?? {});
    saveCheckpoint(checkpoint, config.checkpoint);
    const losses = checkpoint.losses;
    console.error(
      JSON.stringify({
        event: "trained",
        units: units.length,
        classWeights: checkpoint.classWeights,
        firstLoss: losses[0],
        lastLoss: losses[losses.length - 1],
        checkpoint: config.checkpoint,
      }),
    );
    return 0;
  }
  if (command === "predict") {
    const checkpoint = loadCheckpoint(config.checkpoint);
    const out = config.predictions ?? "predictions.jsonl";
    writeJsonl(out, exportPredictions(checkpoint, units));
    console.error(JSON.stringify({ event: "predicted", units: units.length, out }));
    return 0;
  }
  if (command === "attribute") {
    const checkpoint = loadCheckpoint(config.checkpoint);
    const out = config.attributions ?? "attributions.jsonl";
    writeJsonl(out, exportAttributions(checkpoint, units, config.targetPolicy ?? "predicted"));
    console.error(JSON.stringify({ event: "attributed", units: units.length, out }));
    return 0;
  }
  console.error(`unknown command ${command}`);
  return 2;
}

const entry = process.argv[1] ? path.resolve(process.argv[1]) : "";
if (import.meta.url === `file://${entry}`) {
  process.exit(run(process.argv.slice(2)));
}
