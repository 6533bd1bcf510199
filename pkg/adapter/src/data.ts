/** Wire formats shared with the primary toolkit (JSONL, one object per line). */

import * as fs from "node:fs";

export interface Unit {
  unit_id: string;
  doc_id: string;
  index: number;
  kind: "summary" | "chunk" | "whole";
  text: string;
  label: 0 | 1;
  token_count: number;
  word_count: number;
}

export interface PredictionRow {
  unit_id: string;
  predicted: 0 | 1;
  scores: [number, number];
}

export interface AttributionRow {
  unit_id: string;
  predicted: 0 | 1;
  true_label: 0 | 1;
  attribution_target: 0 | 1;
  words: string[];
  attributions: number[];
}

function isBinary(value: unknown): value is 0 | 1 {
  return value === 0 || value === 1;
}

export function readUnits(path: string): Unit[] {
  const units: Unit[] = [];
  const lines = fs.readFileSync(path, "utf-8").split("\n");
  lines.forEach((line, at) => {
    if (!line.trim()) return;
    let row: Record<string, unknown>;
    try {
      row = JSON.parse(line);
    } catch {
      throw new Error(`${path}:${at + 1}: not valid JSON`);
    }
    if (
      typeof row.unit_id !== "string" ||
      typeof row.text !== "string" ||
      !isBinary(row.label)
    ) {
      throw new Error(`${path}:${at + 1}: bad unit row`);
    }
    units.push(row as unknown as Unit);
  });
  return units;
}

export function writeJsonl(path: string, rows: object[]): void {
  const body = rows.map((r) => JSON.stringify(r)).join("\n");
  fs.writeFileSync(path, rows.length ? body + "\n" : "");
}

export function whitespaceWords(text: string): string[] {
  return text.split(/\s+/).filter((w) => w.length > 0);
}
