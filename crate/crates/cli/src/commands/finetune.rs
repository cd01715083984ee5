//! Chunk-to-chunk training under the configured algorithm, from a
//! pretrained checkpoint or, when asked explicitly, from scratch.

use std::path::Path;

use chunkflow_core::error::{Error, Result};
use chunkflow_core::flow::checkpoint::{load_checkpoint, save_checkpoint, InversionCache};
use chunkflow_core::flow::train::{train, train_conventional_baseline, Algorithm, TrainOutput};
use chunkflow_core::numerics::rng::Rng;

use crate::commands::{loss_csv, net_config, train_recipe, Ctx};
use crate::dataset::{load_split, Split};

pub fn run(ctx: &Ctx) -> Result<()> {
    let cfg = &ctx.cfg;
    // Recipe invariants (coupling rule, ranges) come first; a bad recipe
    // must be rejected before any dataset or checkpoint I/O.
    let recipe = train_recipe(cfg, ctx.seed)?;
    let init_path = cfg.text("train.init_checkpoint");
    if recipe.algorithm == Algorithm::ConventionalBaseline {
        if !init_path.is_empty() {
            return Err(Error::Config(
                "conventional_baseline builds its own wide net; remove train.init_checkpoint"
                    .into(),
            ));
        }
    } else if init_path.is_empty() && !recipe.from_scratch {
        return Err(Error::Config(
            "finetune needs train.init_checkpoint, or train.from_scratch = true to start untrained"
                .into(),
        ));
    } else if !init_path.is_empty() && recipe.from_scratch {
        return Err(Error::Config(
            "train.init_checkpoint conflicts with train.from_scratch = true; pick one".into(),
        ));
    }

    let ds = load_split(cfg, Split::Train)?;
    let d = ds.flat_dim();
    let run = ctx.run_dir()?;
    run.write_text("config.txt", &cfg.echo())?;

    let out: TrainOutput = if recipe.algorithm == Algorithm::ConventionalBaseline {
        train_conventional_baseline(&ds.pairs, &net_config(cfg), &recipe)?
    } else {
        let init = if recipe.from_scratch {
            let mut rng = Rng::new(ctx.seed).fork("init");
            net_config(cfg).build(d, d, &mut rng)?
        } else {
            load_checkpoint(Path::new(init_path))?.net
        };
        let mut cache = if recipe.algorithm == Algorithm::Alg1OcTi {
            // Inversions under the frozen init are pure; persist them so
            // repeated runs skip the backward ODE entirely.
            InversionCache::on_disk(run.path().join("inversions"))?
        } else {
            InversionCache::in_memory()
        };
        let recipe_hash = recipe.hash();
        train(&recipe, &ds.pairs, init, &mut cache, |step, net| {
            save_checkpoint(
                &run.file(&format!("ckpt_step_{step:06}.fc2s"))?,
                net,
                step,
                recipe_hash,
            )
        })?
    };

    run.write_text("loss.csv", &loss_csv(&out.log))?;
    if !out.warnings.is_empty() {
        run.write_text("warnings.txt", &format!("{}\n", out.warnings.join("\n")))?;
    }
    save_checkpoint(&run.file("ckpt_final.fc2s")?, &out.net, recipe.steps, recipe.hash())?;

    let final_loss = out.log.last().map(|r| r.loss);
    for warning in &out.warnings {
        eprintln!("warning: {warning}");
    }
    let dir = run.finalize()?;
    match final_loss {
        Some(loss) => println!(
            "finetune[{}]: {} steps over {} pairs, final loss {loss:.6}",
            recipe.algorithm.name(),
            recipe.steps,
            ds.pairs.len()
        ),
        None => println!(
            "finetune[{}]: 0 steps; checkpoint holds the initialization",
            recipe.algorithm.name()
        ),
    }
    println!("run directory: {}", dir.display());
    Ok(())
}
