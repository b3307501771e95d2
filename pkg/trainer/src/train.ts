/**
 * PINN training for the viscous Burgers problem on t in [0,1], x in [-1,1]:
 *
 *   u_t + u u_x - (0.01/pi) u_xx = 0
 *   u(0, x) = -sin(pi x),  u(t, -1) = u(t, 1) = 0
 *
 * The loss is the mean squared residual on collocation points plus mean
 * squared initial/boundary errors.  Derivatives come from the explicit
 * chain-rule recursion in the model, so Adam needs only one gradient pass.
 */

import * as tf from "@tensorflow/tfjs";
import { TanhMLP } from "./model";

const NU = 0.01 / Math.PI;

/** Deterministic 32-bit PRNG (mulberry32) so runs are reproducible. */
export function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) >>> 0;
    let t = a;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

export interface BurgersData {
  collocation: tf.Tensor2D; // [nC, 2] interior points (t, x)
  initial: tf.Tensor2D; // [nI, 2] with t = 0
  initialTarget: tf.Tensor2D; // [nI, 1] -sin(pi x)
  boundary: tf.Tensor2D; // [nB, 2] with x = +-1
}

export function makeBurgersData(
  nCollocation: number,
  nInitial: number,
  nBoundary: number,
  seed: number
): BurgersData {
  const rand = mulberry32(seed);
  const coll: number[][] = [];
  for (let s = 0; s < nCollocation; s++) {
    coll.push([rand(), 2 * rand() - 1]);
  }
  const init: number[][] = [];
  const initTarget: number[][] = [];
  for (let s = 0; s < nInitial; s++) {
    const x = 2 * rand() - 1;
    init.push([0, x]);
    initTarget.push([-Math.sin(Math.PI * x)]);
  }
  const bnd: number[][] = [];
  for (let s = 0; s < nBoundary; s++) {
    bnd.push([rand(), s % 2 === 0 ? -1 : 1]);
  }
  return {
    collocation: tf.tensor2d(coll),
    initial: tf.tensor2d(init),
    initialTarget: tf.tensor2d(initTarget),
    boundary: tf.tensor2d(bnd),
  };
}

export function burgersResidual(model: TanhMLP, x: tf.Tensor2D): tf.Tensor2D {
  const { u, du, d2u } = model.forwardWithDerivs(x, [0, 1], [1]);
  return tf.add(
    tf.add(du.get(0)!, tf.mul(u, du.get(1)!)),
    tf.mul(-NU, d2u.get(1)!)
  ) as tf.Tensor2D;
}

export function burgersLoss(model: TanhMLP, data: BurgersData): tf.Scalar {
  return tf.tidy(() => {
    const res = burgersResidual(model, data.collocation);
    const lossRes = tf.mean(tf.square(res));
    const lossInit = tf.mean(
      tf.square(tf.sub(model.forward(data.initial), data.initialTarget))
    );
    const lossBnd = tf.mean(tf.square(model.forward(data.boundary)));
    return tf.addN([lossRes, lossInit, lossBnd]) as tf.Scalar;
  });
}

export interface TrainOptions {
  layers: number; // number of hidden layers
  width: number;
  iters: number;
  seed: number;
  learningRate: number;
  nCollocation: number;
  nInitial: number;
  nBoundary: number;
  logEvery: number;
  log?: (msg: string) => void;
}

export const DEFAULT_OPTIONS: TrainOptions = {
  layers: 3,
  width: 16,
  iters: 5000,
  seed: 7,
  learningRate: 2e-3,
  nCollocation: 2000,
  nInitial: 256,
  nBoundary: 256,
  logEvery: 500,
};

export interface TrainResult {
  model: TanhMLP;
  initialLoss: number;
  finalLoss: number;
  meanAbsResidual: number;
}

export function trainBurgers(opts: TrainOptions): TrainResult {
  const model = new TanhMLP({
    inDim: 2,
    hidden: new Array(opts.layers).fill(opts.width),
    outDim: 1,
    seed: opts.seed,
  });
  const data = makeBurgersData(
    opts.nCollocation,
    opts.nInitial,
    opts.nBoundary,
    opts.seed + 1
  );
  const optimizer = tf.train.adam(opts.learningRate);
  const lossFn = () => burgersLoss(model, data);

  const initialLoss = lossFn().dataSync()[0];
  let finalLoss = initialLoss;
  for (let it = 0; it < opts.iters; it++) {
    const value = optimizer.minimize(lossFn, true)!;
    finalLoss = value.dataSync()[0];
    value.dispose();
    if (opts.log && (it + 1) % opts.logEvery === 0) {
      opts.log(`iter ${it + 1}/${opts.iters} loss=${finalLoss.toExponential(4)}`);
    }
  }
  const meanAbsResidual = tf.tidy(() =>
    tf.mean(tf.abs(burgersResidual(model, data.collocation))).dataSync()[0]
  );
  optimizer.dispose();
  return { model, initialLoss, finalLoss, meanAbsResidual };
}
