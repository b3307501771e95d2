import * as tf from "@tensorflow/tfjs";
import { describe, expect, it } from "vitest";
import { forwardFloat64, toNetworkJSON } from "../src/export";
import { TanhMLP } from "../src/model";
import {
  burgersResidual,
  burgersLoss,
  makeBurgersData,
  mulberry32,
  trainBurgers,
} from "../src/train";

function freshModel(seed = 1): TanhMLP {
  return new TanhMLP({ inDim: 2, hidden: [8, 8], outDim: 1, seed });
}

describe("TanhMLP derivatives", () => {
  it("matches central finite differences", () => {
    const model = freshModel();
    const rand = mulberry32(3);
    const pts: number[][] = [];
    for (let s = 0; s < 40; s++) pts.push([rand(), 2 * rand() - 1]);
    const x = tf.tensor2d(pts);
    const { du, d2u } = model.forwardWithDerivs(x, [0, 1], [1]);
    const duT = du.get(0)!.arraySync() as number[][];
    const duX = du.get(1)!.arraySync() as number[][];
    const d2uX = d2u.get(1)!.arraySync() as number[][];

    const h1 = 1e-3;
    const h2 = 1e-2;
    const shift = (dim: number, h: number) =>
      pts.map((p) => p.map((v, d) => (d === dim ? v + h : v)));
    const evalAt = (q: number[][]) =>
      (model.forward(tf.tensor2d(q)).arraySync() as number[][]).map((r) => r[0]);

    const fdT = evalAt(shift(0, h1)).map(
      (v, s) => (v - evalAt(shift(0, -h1))[s]) / (2 * h1)
    );
    const fdX = evalAt(shift(1, h1)).map(
      (v, s) => (v - evalAt(shift(1, -h1))[s]) / (2 * h1)
    );
    const mid = evalAt(pts);
    const fdXX = evalAt(shift(1, h2)).map(
      (v, s) => (v - 2 * mid[s] + evalAt(shift(1, -h2))[s]) / (h2 * h2)
    );
    for (let s = 0; s < pts.length; s++) {
      expect(duT[s][0]).toBeCloseTo(fdT[s], 2);
      expect(duX[s][0]).toBeCloseTo(fdX[s], 2);
      expect(d2uX[s][0]).toBeCloseTo(fdXX[s], 1);
    }
    model.dispose();
  });

  it("rejects out-of-range coordinates", () => {
    const model = freshModel();
    expect(() =>
      model.forwardWithDerivs(tf.zeros([1, 2]), [2], [])
    ).toThrow(/out of range/);
    model.dispose();
  });
});

describe("export format", () => {
  it("is row-major and round-trips through the float64 forward pass", () => {
    const model = freshModel(5);
    const net = toNetworkJSON(model);
    expect(net.activation).toBe("tanh");
    expect(net.layers.length).toBe(3);
    expect(net.layers[0].weight.length).toBe(8); // rows = output neurons
    expect(net.layers[0].weight[0].length).toBe(2);

    const pts = [
      [0.1, -0.5],
      [0.9, 0.3],
    ];
    const ref = forwardFloat64(net, pts);
    const got = model.forward(tf.tensor2d(pts)).arraySync() as number[][];
    for (let s = 0; s < pts.length; s++) {
      // float32 graph vs float64 reference
      expect(Math.abs(ref[s][0] - got[s][0])).toBeLessThan(1e-4);
    }
    model.dispose();
  });
});

describe("training", () => {
  it("reduces the Burgers loss substantially in a short run", () => {
    const result = trainBurgers({
      layers: 2,
      width: 8,
      iters: 300,
      seed: 11,
      learningRate: 5e-3,
      nCollocation: 400,
      nInitial: 64,
      nBoundary: 64,
      logEvery: 1000,
    });
    expect(result.finalLoss).toBeLessThan(result.initialLoss / 2);
    result.model.dispose();
  });

  it("residual operator matches its definition", () => {
    const model = freshModel(2);
    const data = makeBurgersData(50, 10, 10, 4);
    const res = burgersResidual(model, data.collocation);
    const { u, du, d2u } = model.forwardWithDerivs(data.collocation, [0, 1], [1]);
    const manual = tf.add(
      tf.add(du.get(0)!, tf.mul(u, du.get(1)!)),
      tf.mul(-0.01 / Math.PI, d2u.get(1)!)
    );
    const diff = tf.max(tf.abs(tf.sub(res, manual))).dataSync()[0];
    expect(diff).toBeLessThan(1e-6);
    expect(burgersLoss(model, data).dataSync()[0]).toBeGreaterThan(0);
    model.dispose();
  });
});
