//! Noise-to-data pretraining over the train split's succeeding chunks.

use chunkflow_core::error::Result;
use chunkflow_core::flow::checkpoint::save_checkpoint;
use chunkflow_core::flow::train::{pretrain_noise_to_data, PretrainRecipe};
use chunkflow_core::numerics::optim::ScheduleKind;
use chunkflow_core::numerics::tensor::Tensor;

use crate::commands::{loss_csv, net_config, timestep_sampler, Ctx};
use crate::dataset::{load_split, Split};

pub fn run(ctx: &Ctx) -> Result<()> {
    let cfg = &ctx.cfg;
    let mut recipe = PretrainRecipe::new(net_config(cfg), ctx.seed);
    recipe.steps = cfg.num("train.steps");
    recipe.batch_size = cfg.num("train.batch_size");
    recipe.schedule = ScheduleKind::parse(cfg.text("train.schedule"))?;
    recipe.base_lr = cfg.num("train.lr");
    recipe.sampler = timestep_sampler(cfg)?;

    let ds = load_split(cfg, Split::Train)?;
    let targets: Vec<Tensor> = ds.pairs.iter().map(|p| p.x1_flat()).collect();

    let run = ctx.run_dir()?;
    run.write_text("config.txt", &cfg.echo())?;
    let out = pretrain_noise_to_data(&targets, &recipe)?;
    run.write_text("loss.csv", &loss_csv(&out.log))?;
    save_checkpoint(&run.file("ckpt_final.fc2s")?, &out.net, recipe.steps, cfg.hash())?;

    let final_loss = out.log.last().map(|r| r.loss);
    let dir = run.finalize()?;
    match final_loss {
        Some(loss) => println!(
            "pretrain: {} steps over {} targets, final loss {loss:.6}",
            recipe.steps,
            targets.len()
        ),
        None => println!("pretrain: 0 steps; checkpoint holds the initialization"),
    }
    println!("run directory: {}", dir.display());
    Ok(())
}
