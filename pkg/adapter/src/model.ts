/** Compact trainable text classifier with hand-rolled backprop.
 *
 * Mean-pooled subword embeddings -> ReLU hidden layer -> 2-way softmax.
 * Everything is plain double arithmetic with seeded initialization, so a
 * fixed seed reproduces training, predictions, and attributions exactly.
 */

import { Rng } from "./rng.js";

export interface ModelDims {
  vocabSize: number;
  embedDim: number;
  hiddenDim: number;
}

export interface Gradients {
  embeddings: Map<number, Float64Array>;
  w1: Float64Array;
  b1: Float64Array;
  w2: Float64Array;
  b2: Float64Array;
}

export function softmax(logits: [number, number]): [number, number] {
  const m = Math.max(logits[0], logits[1]);
  const e0 = Math.exp(logits[0] - m);
  const e1 = Math.exp(logits[1] - m);
  const z = e0 + e1;
  return [e0 / z, e1 / z];
}

export class Model {
  readonly dims: ModelDims;
  embeddings: Float64Array; // [vocabSize * embedDim]
  w1: Float64Array; // [hiddenDim * embedDim]
  b1: Float64Array; // [hiddenDim]
  w2: Float64Array; // [2 * hiddenDim]
  b2: Float64Array; // [2]

  constructor(dims: ModelDims, rng?: Rng) {
    this.dims = dims;
    const { vocabSize, embedDim, hiddenDim } = dims;
    this.embeddings = new Float64Array(vocabSize * embedDim);
    this.w1 = new Float64Array(hiddenDim * embedDim);
    this.b1 = new Float64Array(hiddenDim);
    this.w2 = new Float64Array(2 * hiddenDim);
    this.b2 = new Float64Array(2);
    if (rng) {
      const scaleE = 0.1;
      const scale1 = Math.sqrt(2 / embedDim);
      const scale2 = Math.sqrt(2 / hiddenDim);
      for (let i = 0; i < this.embeddings.length; i++) this.embeddings[i] = rng.uniform(-scaleE, scaleE);
      for (let i = 0; i < this.w1.length; i++) this.w1[i] = rng.uniform(-scale1, scale1);
      for (let i = 0; i < this.w2.length; i++) this.w2[i] = rng.uniform(-scale2, scale2);
    }
  }

  /** Mean-pooled embedding of a piece sequence. */
  pool(pieces: number[]): Float64Array {
    const { embedDim } = this.dims;
    const x = new Float64Array(embedDim);
    if (pieces.length === 0) return x;
    for (const p of pieces) {
      const base = p * embedDim;
      for (let d = 0; d < embedDim; d++) x[d] += this.embeddings[base + d];
    }
    for (let d = 0; d < embedDim; d++) x[d] /= pieces.length;
    return x;
  }

  hidden(x: Float64Array): { pre: Float64Array; h: Float64Array } {
    const { embedDim, hiddenDim } = this.dims;
    const pre = new Float64Array(hiddenDim);
    const h = new Float64Array(hiddenDim);
    for (let j = 0; j < hiddenDim; j++) {
      let sum = this.b1[j];
      const row = j * embedDim;
      for (let d = 0; d < embedDim; d++) sum += this.w1[row + d] * x[d];
      pre[j] = sum;
      h[j] = sum > 0 ? sum : 0;
    }
    return { pre, h };
  }

  logits(h: Float64Array): [number, number] {
    const { hiddenDim } = this.dims;
    const out: [number, number] = [this.b2[0], this.b2[1]];
    for (let c = 0; c < 2; c++) {
      const row = c * hiddenDim;
      for (let j = 0; j < hiddenDim; j++) out[c] += this.w2[row + j] * h[j];
    }
    return out;
  }

  forward(pieces: number[]): { x: Float64Array; pre: Float64Array; h: Float64Array; logits: [number, number]; probs: [number, number] } {
    const x = this.pool(pieces);
    const { pre, h } = this.hidden(x);
    const z = this.logits(h);
    return { x, pre, h, logits: z, probs: softmax(z) };
  }

  /** Weighted cross-entropy loss and gradients for one example. */
  lossAndGradients(pieces: number[], label: 0 | 1, classWeight: number): { loss: number; grads: Gradients } {
    const { embedDim, hiddenDim } = this.dims;
    const { x, pre, h, probs } = this.forward(pieces);
    const loss = -classWeight * Math.log(Math.max(probs[label], 1e-12));

    const dz: [number, number] = [probs[0], probs[1]];
    dz[label] -= 1;
    dz[0] *= classWeight;
    dz[1] *= classWeight;

    const gw2 = new Float64Array(2 * hiddenDim);
    const gb2 = new Float64Array(2);
    const dh = new Float64Array(hiddenDim);
    for (let c = 0; c < 2; c++) {
      const row = c * hiddenDim;
      gb2[c] = dz[c];
      for (let j = 0; j < hiddenDim; j++) {
        gw2[row + j] = dz[c] * h[j];
        dh[j] += dz[c] * this.w2[row + j];
      }
    }
    for (let j = 0; j < hiddenDim; j++) if (pre[j] <= 0) dh[j] = 0;

    const gw1 = new Float64Array(hiddenDim * embedDim);
    const gb1 = new Float64Array(hiddenDim);
    const dx = new Float64Array(embedDim);
    for (let j = 0; j < hiddenDim; j++) {
      const row = j * embedDim;
      gb1[j] = dh[j];
      for (let d = 0; d < embedDim; d++) {
        gw1[row + d] = dh[j] * x[d];
        dx[d] += dh[j] * this.w1[row + d];
      }
    }

    const gEmb = new Map<number, Float64Array>();
    if (pieces.length > 0) {
      const inv = 1 / pieces.length;
      for (const p of pieces) {
        let slot = gEmb.get(p);
        if (!slot) {
          slot = new Float64Array(embedDim);
          gEmb.set(p, slot);
        }
        for (let d = 0; d < embedDim; d++) slot[d] += dx[d] * inv;
      }
    }
    return { loss, grads: { embeddings: gEmb, w1: gw1, b1: gb1, w2: gw2, b2: gb2 } };
  }

  /** Gradient of one logit w.r.t. each input piece embedding, dotted with the
   * embedding itself (gradient x input), i.e. a per-piece salience score. */
  pieceAttributions(pieces: number[], target: 0 | 1): number[] {
    const { embedDim, hiddenDim } = this.dims;
    if (pieces.length === 0) return [];
    const x = this.pool(pieces);
    const { pre } = this.hidden(x);
    const dh = new Float64Array(hiddenDim);
    const row = target * hiddenDim;
    for (let j = 0; j < hiddenDim; j++) dh[j] = pre[j] > 0 ? this.w2[row + j] : 0;
    const dx = new Float64Array(embedDim);
    for (let j = 0; j < hiddenDim; j++) {
      if (dh[j] === 0) continue;
      const r = j * embedDim;
      for (let d = 0; d < embedDim; d++) dx[d] += dh[j] * this.w1[r + d];
    }
    const inv = 1 / pieces.length;
    return pieces.map((p) => {
      const base = p * embedDim;
      let score = 0;
      for (let d = 0; d < embedDim; d++) score += dx[d] * inv * this.embeddings[base + d];
      return score;
    });
  }
}

/** Adam with decoupled weight decay on the dense layers. */
export class AdamW {
  private m = new Map<string, Float64Array>();
  private v = new Map<string, Float64Array>();
  private step = 0;

  constructor(
    private readonly lr: number,
    private readonly weightDecay: number,
    private readonly beta1 = 0.9,
    private readonly beta2 = 0.999,
    private readonly eps = 1e-8,
  ) {}

  private slot(store: Map<string, Float64Array>, key: string, size: number): Float64Array {
    let slot = store.get(key);
    if (!slot) {
      slot = new Float64Array(size);
      store.set(key, slot);
    }
    return slot;
  }

  private updateDense(name: string, params: Float64Array, grads: Float64Array, decay: boolean): void {
    const m = this.slot(this.m, name, params.length);
    const v = this.slot(this.v, name, params.length);
    const c1 = 1 - Math.pow(this.beta1, this.step);
    const c2 = 1 - Math.pow(this.beta2, this.step);
    for (let i = 0; i < params.length; i++) {
      const g = grads[i];
      m[i] = this.beta1 * m[i] + (1 - this.beta1) * g;
      v[i] = this.beta2 * v[i] + (1 - this.beta2) * g * g;
      let delta = (this.lr * (m[i] / c1)) / (Math.sqrt(v[i] / c2) + this.eps);
      if (decay) delta += this.lr * this.weightDecay * params[i];
      params[i] -= delta;
    }
  }

  apply(model: Model, grads: Gradients): void {
    this.step += 1;
    this.updateDense("w1", model.w1, grads.w1, true);
    this.updateDense("b1", model.b1, grads.b1, false);
    this.updateDense("w2", model.w2, grads.w2, true);
    this.updateDense("b2", model.b2, grads.b2, false);
    const embedDim = model.dims.embedDim;
    const m = this.slot(this.m, "emb", model.embeddings.length);
    const v = this.slot(this.v, "emb", model.embeddings.length);
    const c1 = 1 - Math.pow(this.beta1, this.step);
    const c2 = 1 - Math.pow(this.beta2, this.step);
    for (const [piece, grad] of grads.embeddings) {
      const base = piece * embedDim;
      for (let d = 0; d < embedDim; d++) {
        const i = base + d;
        const g = grad[d];
        m[i] = this.beta1 * m[i] + (1 - this.beta1) * g;
        v[i] = this.beta2 * v[i] + (1 - this.beta2) * g * g;
        model.embeddings[i] -= (this.lr * (m[i] / c1)) / (Math.sqrt(v[i] / c2) + this.eps);
      }
    }
  }
}

export function accumulate(target: Gradients | null, add: Gradients, scale: number): Gradients {
  if (!target) {
    const emb = new Map<number, Float64Array>();
    for (const [p, g] of add.embeddings) emb.set(p, g.map((x) => x * scale));
    return {
      embeddings: emb,
      w1: add.w1.map((x) => x * scale),
      b1: add.b1.map((x) => x * scale),
      w2: add.w2.map((x) => x * scale),
      b2: add.b2.map((x) => x * scale),
    };
  }
  for (const [p, g] of add.embeddings) {
    const slot = target.embeddings.get(p);
    if (slot) {
      for (let d = 0; d < g.length; d++) slot[d] += g[d] * scale;
    } else {
      target.embeddings.set(p, g.map((x) => x * scale));
    }
  }
  for (let i = 0; i < add.w1.length; i++) target.w1[i] += add.w1[i] * scale;
  for (let i = 0; i < add.b1.length; i++) target.b1[i] += add.b1[i] * scale;
  for (let i = 0; i < add.w2.length; i++) target.w2[i] += add.w2[i] * scale;
  for (let i = 0; i < add.b2.length; i++) target.b2[i] += add.b2[i] * scale;
  return target;
}
