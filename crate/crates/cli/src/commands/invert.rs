//! Recover the latent start point whose forward integration lands on a
//! stored target chunk, then measure the round trip.

use chunkflow_core::error::{Error, Result};
use chunkflow_core::flow::checkpoint::load_checkpoint;
use chunkflow_core::flow::invert::invert_target;
use chunkflow_core::flow::sample::sample_continuation;
use chunkflow_core::numerics::io::save_tensor;

use crate::commands::{inversion_order, positive, Ctx};
use crate::dataset::{load_split, require_path, Split};

pub fn run(ctx: &Ctx) -> Result<()> {
    let cfg = &ctx.cfg;
    let order = inversion_order(cfg)?;
    let steps = positive(cfg, "train.inversion_steps")?;
    let r: f64 = cfg.num("train.inversion_r");
    let ck = load_checkpoint(&require_path(cfg, "sample.checkpoint")?)?;
    let ds = load_split(cfg, Split::All)?;
    let (video, pair_index) = cfg.pair_ref("sample.chunk");
    let pair = ds.find_pair(video, pair_index).ok_or_else(|| {
        Error::Config(format!(
            "sample.chunk = {video}:{pair_index} is not in the dataset manifest"
        ))
    })?;
    let d = ds.flat_dim();
    if ck.net.data_input_dim() != d {
        return Err(Error::Config(format!(
            "inversion needs a direct {d} -> {d} model; this checkpoint takes {} inputs",
            ck.net.data_input_dim()
        )));
    }

    let run = ctx.run_dir()?;
    run.write_text("config.txt", &cfg.echo())?;

    let x1 = pair.x1_flat();
    let xhat = invert_target(&ck.net, &x1, steps, order, r)?;
    save_tensor(&run.file("xhat1.fc2s")?, &xhat)?;
    let recon = sample_continuation(&ck.net, &xhat, steps)?;
    let rel = recon.sub(&x1)?.norm() / x1.norm();

    let order_n: usize = cfg.num("train.inversion_order");
    run.write_text(
        "invert.csv",
        &format!("steps,order,r,roundtrip_rel_err\n{steps},{order_n},{r},{rel}\n"),
    )?;
    let dir = run.finalize()?;
    println!(
        "invert: chunk {video}:{pair_index}, {steps} steps at order {order_n}, round-trip rel err {rel:.3e}"
    );
    println!("run directory: {}", dir.display());
    Ok(())
}
