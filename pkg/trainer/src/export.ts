/**
 * Weight export in the verifier's JSON format, plus a float64 reference
 * forward pass used to produce cross-implementation check points.
 */

import * as fs from "fs";
import { TanhMLP } from "./model";

export interface LayerJSON {
  weight: number[][];
  bias: number[];
}

export interface NetworkJSON {
  activation: "tanh";
  layers: LayerJSON[];
}

export function toNetworkJSON(model: TanhMLP): NetworkJSON {
  const layers: LayerJSON[] = [];
  for (let k = 0; k < model.weights.length; k++) {
    const [out, inp] = model.weights[k].shape as [number, number];
    const flat = model.weights[k].dataSync();
    const weight: number[][] = [];
    for (let r = 0; r < out; r++) {
      weight.push(Array.from(flat.slice(r * inp, (r + 1) * inp)));
    }
    layers.push({ weight, bias: Array.from(model.biases[k].dataSync()) });
  }
  return { activation: "tanh", layers };
}

export function saveNetwork(model: TanhMLP, path: string): void {
  fs.writeFileSync(path, JSON.stringify(toNetworkJSON(model)));
}

/** Double-precision forward pass over the exported weights. */
export function forwardFloat64(net: NetworkJSON, points: number[][]): number[][] {
  return points.map((p) => {
    let z = p.slice();
    for (let k = 0; k < net.layers.length; k++) {
      const { weight, bias } = net.layers[k];
      const y = weight.map(
        (row, m) => row.reduce((acc, w, n) => acc + w * z[n], bias[m])
      );
      z = k === net.layers.length - 1 ? y : y.map(Math.tanh);
    }
    return z;
  });
}

export interface CheckFile {
  points: number[][];
  values: number[][];
}

/** Sample check points in a box and record float64 forward values. */
export function makeCheckFile(
  net: NetworkJSON,
  lower: number[],
  upper: number[],
  count: number,
  rand: () => number
): CheckFile {
  const points: number[][] = [];
  for (let s = 0; s < count; s++) {
    points.push(lower.map((lo, d) => lo + rand() * (upper[d] - lo)));
  }
  return { points, values: forwardFloat64(net, points) };
}
