/** Deterministic subword tokenizer.
 *
 * Words are split into fixed-width character pieces (so the word/subword
 * alignment needed by the attribution export is trivially invertible), and
 * piece ids come from a vocabulary built over the training units.  Unknown
 * pieces share a single OOV id.
 */

import { whitespaceWords } from "./data.js";

export const PIECE_WIDTH = 4;
export const OOV = 0;

export interface Encoded {
  /** Piece ids, truncated head-keep at the sequence limit. */
  pieces: number[];
  /** For each piece, the index of the word it came from. */
  wordOf: number[];
  /** Whitespace words of the full text (not truncated). */
  words: string[];
  truncated: boolean;
}

export function piecesOf(word: string): string[] {
  const pieces: string[] = [];
  const folded = word.toLowerCase();
  for (let at = 0; at < folded.length; at += PIECE_WIDTH) {
    pieces.push(folded.slice(at, at + PIECE_WIDTH));
  }
  return pieces;
}

export class Tokenizer {
  readonly vocab: Map<string, number>;

  constructor(vocab: Map<string, number>) {
    this.vocab = vocab;
  }

  static build(texts: string[]): Tokenizer {
    const vocab = new Map<string, number>();
    for (const text of texts) {
      for (const word of whitespaceWords(text)) {
        for (const piece of piecesOf(word)) {
          if (!vocab.has(piece)) vocab.set(piece, vocab.size + 1); // 0 is OOV
        }
      }
    }
    return new Tokenizer(vocab);
  }

  get size(): number {
    return this.vocab.size + 1;
  }

  encode(text: string, maxPieces: number): Encoded {
    const words = whitespaceWords(text);
    const pieces: number[] = [];
    const wordOf: number[] = [];
    let truncated = false;
    outer: for (let w = 0; w < words.length; w++) {
      for (const piece of piecesOf(words[w])) {
        if (pieces.length >= maxPieces) {
          truncated = true;
          break outer;
        }
        pieces.push(this.vocab.get(piece) ?? OOV);
        wordOf.push(w);
      }
    }
    return { pieces, wordOf, words, truncated };
  }

  toJSON(): Record<string, number> {
    return Object.fromEntries(this.vocab);
  }

  static fromJSON(payload: Record<string, number>): Tokenizer {
    return new Tokenizer(new Map(Object.entries(payload)));
  }
}
