/** Deterministic 200-unit toy corpus with a learnable label signal. */

import { Unit } from "../src/data.js";
import { Rng } from "../src/rng.js";

const CLASS0_WORDS = ["victime", "menacé", "abgewiesen", "Opfer", "respinto"];
const CLASS1_WORDS = ["gutgeheissen", "admis", "accolto", "zulässig", "fondé"];
const FILLER = [
  "le", "tribunal", "fédéral", "die", "beschwerde", "wird", "geprüft",
  "il", "ricorso", "della", "procedura", "recours", "contre", "arrêt",
  "gericht", "urteil", "kosten", "partie", "adverse", "causa",
];

export function toyUnits(count = 200, seed = 7, imbalance = 0.7): Unit[] {
  const rng = new Rng(seed);
  const units: Unit[] = [];
  for (let i = 0; i < count; i++) {
    const label: 0 | 1 = rng.next() < imbalance ? 0 : 1;
    const signal = label === 0 ? CLASS0_WORDS : CLASS1_WORDS;
    const words: string[] = [];
    const length = 8 + rng.int(25);
    for (let w = 0; w < length; w++) {
      const fromSignal = rng.next() < 0.3;
      words.push(fromSignal ? signal[rng.int(signal.length)] : FILLER[rng.int(FILLER.length)]);
    }
    const text = words.join(" ");
    units.push({
      unit_id: `toy${String(i).padStart(3, "0")}#0`,
      doc_id: `toy${String(i).padStart(3, "0")}`,
      index: 0,
      kind: "chunk",
      text,
      label,
      token_count: words.length,
      word_count: words.length,
    });
  }
  return units;
}
