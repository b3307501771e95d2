#!/usr/bin/env node
/** Command-line entry point: train a Burgers PINN and export its weights. */

import * as fs from "fs";
import * as path from "path";
import yargs from "yargs";
import { hideBin } from "yargs/helpers";
import { makeCheckFile, saveNetwork, toNetworkJSON } from "./export";
import { mulberry32, trainBurgers, DEFAULT_OPTIONS } from "./train";

async function main(): Promise<void> {
  await yargs(hideBin(process.argv))
    .command(
      "train",
      "train a PINN and export weights as JSON",
      (y) =>
        y
          .option("pde", { choices: ["burgers"] as const, default: "burgers" })
          .option("layers", { type: "number", default: DEFAULT_OPTIONS.layers })
          .option("width", { type: "number", default: DEFAULT_OPTIONS.width })
          .option("iters", { type: "number", default: DEFAULT_OPTIONS.iters })
          .option("seed", { type: "number", default: DEFAULT_OPTIONS.seed })
          .option("lr", { type: "number", default: DEFAULT_OPTIONS.learningRate })
          .option("collocation", { type: "number", default: DEFAULT_OPTIONS.nCollocation })
          .option("out", { type: "string", demandOption: true })
          .option("check-points", {
            type: "number",
            default: 1000,
            describe: "sample count for the companion forward-value check file",
          }),
      (argv) => {
        const result = trainBurgers({
          ...DEFAULT_OPTIONS,
          layers: argv.layers,
          width: argv.width,
          iters: argv.iters,
          seed: argv.seed,
          learningRate: argv.lr,
          nCollocation: argv.collocation,
          log: (msg) => console.log(msg),
        });
        console.log(
          `loss ${result.initialLoss.toExponential(4)} -> ${result.finalLoss.toExponential(4)}, ` +
            `mean |residual| ${result.meanAbsResidual.toExponential(4)}`
        );
        saveNetwork(result.model, argv.out);
        console.log(`wrote ${argv.out}`);
        if (argv.checkPoints > 0) {
          const net = toNetworkJSON(result.model);
          const check = makeCheckFile(
            net,
            [0, -1],
            [1, 1],
            argv.checkPoints,
            mulberry32(argv.seed + 1000)
          );
          const ext = path.extname(argv.out);
          const checkPath = argv.out.slice(0, argv.out.length - ext.length) + "_check" + ext;
          fs.writeFileSync(checkPath, JSON.stringify(check));
          console.log(`wrote ${checkPath}`);
        }
        result.model.dispose();
      }
    )
    .demandCommand(1)
    .strict()
    .help()
    .parseAsync();
}

main().catch((err) => {
  console.error(`error: ${err.message}`);
  process.exit(2);
});
