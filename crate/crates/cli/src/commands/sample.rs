//! Generate continuations from a stored chunk: tensors, per-frame PGM
//! images, the integration trace, and a per-chunk metric row.

use std::fmt::Write as _;

use chunkflow_core::error::{Error, Result};
use chunkflow_core::flow::checkpoint::load_checkpoint;
use chunkflow_core::flow::sample::{
    sample_conditional, sample_continuation, sample_continuation_traced,
};
use chunkflow_core::metrics::seam::seam_metrics;
use chunkflow_core::metrics::trajectory::endpoint_mse;
use chunkflow_core::numerics::io::save_tensor;
use chunkflow_core::numerics::rng::Rng;
use chunkflow_core::numerics::tensor::Tensor;
use chunkflow_core::pgm::write_frame_pgm;

use crate::commands::{positive, Ctx};
use crate::dataset::{load_split, require_path, LoadedDataset, Split};

/// Ground truth for the i-th generated chunk (1-based), when the dataset
/// still covers that part of the video. Pair p holds video-chunk ordinals
/// 2p and 2p+1; generation starts after ordinal 2p.
fn truth_chunk(ds: &LoadedDataset, video: u32, pair_index: u32, i: usize) -> Option<Tensor> {
    let ordinal = 2 * pair_index as usize + i;
    let pair = ds.find_pair(video, (ordinal / 2) as u32)?;
    Some(if ordinal % 2 == 0 {
        pair.x0_flat()
    } else {
        pair.x1_flat()
    })
}

pub fn run(ctx: &Ctx) -> Result<()> {
    let cfg = &ctx.cfg;
    let ck = load_checkpoint(&require_path(cfg, "sample.checkpoint")?)?;
    let ds = load_split(cfg, Split::All)?;
    let (video, pair_index) = cfg.pair_ref("sample.chunk");
    let pair = ds.find_pair(video, pair_index).ok_or_else(|| {
        Error::Config(format!(
            "sample.chunk = {video}:{pair_index} is not in the dataset manifest"
        ))
    })?;
    let nfe = positive(cfg, "sample.nfe")?;
    let n_chunks = positive(cfg, "sample.n_chunks")?;
    let d = ds.flat_dim();
    let conditional = ck.net.data_input_dim() == 2 * d;
    if !conditional && ck.net.data_input_dim() != d {
        return Err(Error::Config(format!(
            "checkpoint expects {}-dimensional inputs but the dataset's chunks have {d} values",
            ck.net.data_input_dim()
        )));
    }
    let (l, h, w) = (
        ds.manifest.chunk_len,
        ds.manifest.frame_h,
        ds.manifest.frame_w,
    );

    let run = ctx.run_dir()?;
    run.write_text("config.txt", &cfg.echo())?;

    let mut generated: Vec<Tensor> = Vec::with_capacity(n_chunks);
    if conditional {
        // The wide net integrates the noisy target half; the conditioning
        // chunk rides along. Noise gets its own seed stream.
        let mut noise = Rng::new(ctx.seed).fork("sample");
        let mut cond = pair.x0_flat();
        for _ in 0..n_chunks {
            let eps = noise.normal_tensor(vec![d]);
            let g = sample_conditional(&ck.net, &cond, &eps, nfe)?;
            generated.push(g.clone());
            cond = g;
        }
    } else {
        let traj = sample_continuation_traced(&ck.net, &pair.x0_flat(), nfe)?;
        let mut trace = String::from("k,t,state_norm\n");
        for (k, (state, t)) in traj.states.iter().zip(&traj.ts).enumerate() {
            let _ = writeln!(trace, "{k},{t},{}", state.norm());
        }
        run.write_text("trajectory.csv", &trace)?;
        let mut current = traj.endpoint().clone();
        generated.push(current.clone());
        for _ in 1..n_chunks {
            current = sample_continuation(&ck.net, &current, nfe)?;
            generated.push(current.clone());
        }
    }

    let mut metrics = String::from("chunk,endpoint_mse,seam_jump,seam_accel\n");
    let mut first_mse = None;
    let mut prev = pair.x0.clone();
    for (idx, flat) in generated.iter().enumerate() {
        let i = idx + 1;
        let chunk = flat.clone().reshape(vec![l, h, w])?;
        save_tensor(&run.file(&format!("gen_chunk_{i:02}.fc2s"))?, &chunk)?;
        for f in 0..l {
            write_frame_pgm(
                &run.file(&format!("frames/chunk{i:02}_f{f:02}.pgm"))?,
                &chunk.index_leading(f)?,
                0.0,
                1.0,
            )?;
        }
        let (jump, accel) = seam_metrics(&prev, &chunk)?;
        let mse = match truth_chunk(&ds, video, pair_index, i) {
            Some(truth) => {
                let e = endpoint_mse(flat, &truth)?;
                if first_mse.is_none() {
                    first_mse = Some(e);
                }
                e.to_string()
            }
            None => String::new(),
        };
        let _ = writeln!(metrics, "{i},{mse},{jump},{accel}");
        prev = chunk;
    }
    run.write_text("metrics.csv", &metrics)?;

    let dir = run.finalize()?;
    match first_mse {
        Some(e) => println!(
            "sample: {n_chunks} chunk(s) from {video}:{pair_index} at nfe {nfe}, first endpoint mse {e:.6}"
        ),
        None => println!("sample: {n_chunks} chunk(s) from {video}:{pair_index} at nfe {nfe}"),
    }
    println!("run directory: {}", dir.display());
    Ok(())
}
