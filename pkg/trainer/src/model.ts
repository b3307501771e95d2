/**
 * Fully-connected tanh network with analytic input derivatives.
 *
 * The spatial/temporal derivatives needed by PINN losses are expressed with
 * explicit tensor ops (the chain-rule recursions for dz/dx_i and d2z/dx_i^2)
 * instead of nested automatic differentiation, so a single tf.grads pass over
 * the loss suffices to train.
 */

import * as tf from "@tensorflow/tfjs";

export interface MLPConfig {
  inDim: number;
  hidden: number[];
  outDim: number;
  seed: number;
}

export class TanhMLP {
  readonly weights: tf.Variable[] = [];
  readonly biases: tf.Variable[] = [];
  readonly dims: number[];

  constructor(cfg: MLPConfig) {
    if (cfg.hidden.length === 0) {
      throw new Error("need at least one hidden layer");
    }
    this.dims = [cfg.inDim, ...cfg.hidden, cfg.outDim];
    for (let k = 0; k + 1 < this.dims.length; k++) {
      const fanIn = this.dims[k];
      const fanOut = this.dims[k + 1];
      const std = Math.sqrt(2.0 / (fanIn + fanOut));
      this.weights.push(
        tf.variable(
          tf.randomNormal([fanOut, fanIn], 0, std, "float32", cfg.seed + 2 * k),
          true,
          `w${k}`
        )
      );
      this.biases.push(
        tf.variable(tf.zeros([fanOut]), true, `b${k}`)
      );
    }
  }

  get variables(): tf.Variable[] {
    return [...this.weights, ...this.biases];
  }

  /** Plain forward pass on inputs of shape [n, inDim]. */
  forward(x: tf.Tensor2D): tf.Tensor2D {
    return tf.tidy(() => {
      let z: tf.Tensor2D = x;
      const last = this.weights.length - 1;
      for (let k = 0; k < this.weights.length; k++) {
        const y = tf.add(
          tf.matMul(z, this.weights[k], false, true),
          this.biases[k]
        ) as tf.Tensor2D;
        z = k === last ? y : (tf.tanh(y) as tf.Tensor2D);
      }
      return z;
    });
  }

  /**
   * Forward pass together with du/dx_i for each requested coordinate and
   * d2u/dx_i^2 for each coordinate listed in `second`.
   *
   * Derivative state propagates alongside the activations:
   *   v^(k) = sigma'(y) * (W v^(k-1)),  v^(0) = e_i
   *   s^(k) = sigma''(y) * (W v^(k-1))^2 + sigma'(y) * (W s^(k-1)),  s^(0) = 0
   */
  forwardWithDerivs(
    x: tf.Tensor2D,
    first: number[],
    second: number[]
  ): { u: tf.Tensor2D; du: Map<number, tf.Tensor2D>; d2u: Map<number, tf.Tensor2D> } {
    const n = x.shape[0];
    const inDim = this.dims[0];
    for (const i of [...first, ...second]) {
      if (i < 0 || i >= inDim) {
        throw new Error(`input coordinate ${i} out of range for dim ${inDim}`);
      }
    }
    const coords = Array.from(new Set([...first, ...second]));

    let z: tf.Tensor2D = x;
    const v = new Map<number, tf.Tensor2D>();
    const s = new Map<number, tf.Tensor2D>();
    for (const i of coords) {
      const seed = new Array(inDim).fill(0);
      seed[i] = 1;
      v.set(i, tf.tile(tf.tensor2d([seed]), [n, 1]) as tf.Tensor2D);
      if (second.includes(i)) {
        s.set(i, tf.zeros([n, inDim]) as tf.Tensor2D);
      }
    }

    const last = this.weights.length - 1;
    for (let k = 0; k < last; k++) {
      const W = this.weights[k];
      const y = tf.add(tf.matMul(z, W, false, true), this.biases[k]);
      const t = tf.tanh(y);
      const sp = tf.sub(1, tf.square(t)); // sigma'
      const spp = tf.mul(tf.mul(-2, t), sp); // sigma''
      for (const i of coords) {
        const wv = tf.matMul(v.get(i)!, W, false, true);
        if (s.has(i)) {
          const ws = tf.matMul(s.get(i)!, W, false, true);
          s.set(i, tf.add(tf.mul(spp, tf.square(wv)), tf.mul(sp, ws)) as tf.Tensor2D);
        }
        v.set(i, tf.mul(sp, wv) as tf.Tensor2D);
      }
      z = t as tf.Tensor2D;
    }

    const Wl = this.weights[last];
    const u = tf.add(
      tf.matMul(z, Wl, false, true),
      this.biases[last]
    ) as tf.Tensor2D;
    const du = new Map<number, tf.Tensor2D>();
    const d2u = new Map<number, tf.Tensor2D>();
    for (const i of first) {
      du.set(i, tf.matMul(v.get(i)!, Wl, false, true) as tf.Tensor2D);
    }
    for (const i of second) {
      d2u.set(i, tf.matMul(s.get(i)!, Wl, false, true) as tf.Tensor2D);
    }
    return { u, du, d2u };
  }

  dispose(): void {
    for (const t of this.variables) t.dispose();
  }
}
