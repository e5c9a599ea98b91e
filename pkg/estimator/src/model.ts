/**
 * One-hidden-layer feed-forward regressor trained with mini-batch Adam on
 * squared error.  Seeded initialization and deterministic batch shuffling
 * make training bit-reproducible.
 */
import { Rng } from "./rng.js";

export interface TrainOptions {
  hiddenWidth?: number;
  epochs?: number;
  learningRate?: number;
  batchSize?: number;
}

const DEFAULTS: Required<TrainOptions> = {
  hiddenWidth: 64,
  epochs: 200,
  learningRate: 3e-3,
  batchSize: 64,
};

export class Regressor {
  readonly inputWidth: number;
  readonly hiddenWidth: number;
  readonly lossHistory: number[] = [];
  private w1: Float64Array;
  private b1: Float64Array;
  private w2: Float64Array;
  private b2: number;

  constructor(inputWidth: number, hiddenWidth: number, rng: Rng) {
    this.inputWidth = inputWidth;
    this.hiddenWidth = hiddenWidth;
    const scale1 = Math.sqrt(2 / inputWidth);
    const scale2 = Math.sqrt(2 / hiddenWidth);
    this.w1 = new Float64Array(inputWidth * hiddenWidth);
    for (let i = 0; i < this.w1.length; i++) this.w1[i] = rng.nextGaussian() * scale1;
    this.b1 = new Float64Array(hiddenWidth);
    this.w2 = new Float64Array(hiddenWidth);
    for (let i = 0; i < this.w2.length; i++) this.w2[i] = rng.nextGaussian() * scale2;
    this.b2 = 0;
  }

  predictOne(x: Float64Array): number {
    const { inputWidth: din, hiddenWidth: h } = this;
    let out = this.b2;
    for (let j = 0; j < h; j++) {
      let z = this.b1[j];
      for (let i = 0; i < din; i++) z += x[i] * this.w1[i * h + j];
      if (z > 0) out += z * this.w2[j];
    }
    return out;
  }

  predict(xs: readonly Float64Array[]): number[] {
    return xs.map((x) => this.predictOne(x));
  }

  /** Mean squared error over a dataset. */
  loss(xs: readonly Float64Array[], ys: readonly number[]): number {
    let total = 0;
    for (let i = 0; i < xs.length; i++) {
      const err = this.predictOne(xs[i]) - ys[i];
      total += err * err;
    }
    return total / xs.length;
  }

  fit(
    xs: readonly Float64Array[],
    ys: readonly number[],
    options: TrainOptions = {},
    rng: Rng = new Rng(0),
  ): void {
    const opts = { ...DEFAULTS, ...options };
    const m = xs.length;
    if (m === 0) throw new Error("empty training set");
    const { inputWidth: din, hiddenWidth: h } = this;
    // center the output on the label mean so training fits residuals
    this.b2 = ys.reduce((s, y) => s + y, 0) / m;

    // Adam state
    const nParams = this.w1.length + this.b1.length + this.w2.length + 1;
    const mom = new Float64Array(nParams);
    const vel = new Float64Array(nParams);
    const beta1 = 0.9;
    const beta2 = 0.999;
    const eps = 1e-8;
    let step = 0;

    const gw1 = new Float64Array(this.w1.length);
    const gb1 = new Float64Array(h);
    const gw2 = new Float64Array(h);
    const hidden = new Float64Array(h);
    const order = [...Array(m).keys()];

    const adam = (params: Float64Array | null, grads: Float64Array | null, offset: number, lr: number, scalarGrad = 0): number => {
      // shared Adam update walking the flattened parameter layout
      if (params && grads) {
        for (let i = 0; i < params.length; i++) {
          const g = grads[i];
          mom[offset + i] = beta1 * mom[offset + i] + (1 - beta1) * g;
          vel[offset + i] = beta2 * vel[offset + i] + (1 - beta2) * g * g;
          const mHat = mom[offset + i] / (1 - Math.pow(beta1, step));
          const vHat = vel[offset + i] / (1 - Math.pow(beta2, step));
          params[i] -= (lr * mHat) / (Math.sqrt(vHat) + eps);
        }
        return 0;
      }
      const g = scalarGrad;
      mom[offset] = beta1 * mom[offset] + (1 - beta1) * g;
      vel[offset] = beta2 * vel[offset] + (1 - beta2) * g * g;
      const mHat = mom[offset] / (1 - Math.pow(beta1, step));
      const vHat = vel[offset] / (1 - Math.pow(beta2, step));
      return (lr * mHat) / (Math.sqrt(vHat) + eps);
    };

    for (let epoch = 0; epoch < opts.epochs; epoch++) {
      rng.shuffle(order);
      for (let start = 0; start < m; start += opts.batchSize) {
        const end = Math.min(start + opts.batchSize, m);
        const batch = end - start;
        gw1.fill(0);
        gb1.fill(0);
        gw2.fill(0);
        let gb2 = 0;

        for (let b = start; b < end; b++) {
          const x = xs[order[b]];
          const y = ys[order[b]];
          let out = this.b2;
          for (let j = 0; j < h; j++) {
            let z = this.b1[j];
            for (let i = 0; i < din; i++) z += x[i] * this.w1[i * h + j];
            hidden[j] = z > 0 ? z : 0;
            out += hidden[j] * this.w2[j];
          }
          const delta = (2 * (out - y)) / batch;
          gb2 += delta;
          for (let j = 0; j < h; j++) {
            gw2[j] += delta * hidden[j];
            if (hidden[j] > 0) {
              const back = delta * this.w2[j];
              gb1[j] += back;
              for (let i = 0; i < din; i++) gw1[i * h + j] += back * x[i];
            }
          }
        }

        step += 1;
        let offset = 0;
        adam(this.w1, gw1, offset, opts.learningRate);
        offset += this.w1.length;
        adam(this.b1, gb1, offset, opts.learningRate);
        offset += this.b1.length;
        adam(this.w2, gw2, offset, opts.learningRate);
        offset += this.w2.length;
        this.b2 -= adam(null, null, offset, opts.learningRate, gb2);
      }
      this.lossHistory.push(this.loss(xs, ys));
    }
  }
}

export function trainRegressor(
  xs: readonly Float64Array[],
  ys: readonly number[],
  options: TrainOptions = {},
  seed = 0,
): Regressor {
  if (xs.length < 1) throw new Error("empty training set");
  if (xs.length !== ys.length) throw new Error("feature/label length mismatch");
  const opts = { ...DEFAULTS, ...options };
  if (opts.hiddenWidth < 1) throw new Error("hidden width must be >= 1");
  const rng = new Rng(seed);
  const model = new Regressor(xs[0].length, opts.hiddenWidth, rng);
  model.fit(xs, ys, opts, rng);
  return model;
}
