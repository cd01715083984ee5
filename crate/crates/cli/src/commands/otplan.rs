//! Solve one exact transport problem over stored chunks and export the
//! plan as text, heatmap, and summary statistics.

use std::fmt::Write as _;

use chunkflow_core::coupling::export::{save_boundaries, save_plan_heatmap, save_plan_text};
use chunkflow_core::coupling::solve::{adjacency_mass, make_mask, solve_ot_exact, MaskKind, OtOptions};
use chunkflow_core::coupling::{cost_matrix, ChunkLabel};
use chunkflow_core::error::{Error, Result};
use chunkflow_core::numerics::tensor::Tensor;

use crate::commands::{positive, Ctx};
use crate::dataset::{load_split, Split};

pub fn run(ctx: &Ctx) -> Result<()> {
    let cfg = &ctx.cfg;
    let kind = MaskKind::parse(cfg.text("eval.ot_mask"))?;
    let n_videos = positive(cfg, "eval.ot_videos")?;
    let per_video = positive(cfg, "eval.ot_chunks_per_video")?;
    let ds = load_split(cfg, Split::All)?;

    // First n distinct videos in manifest order, then the first chunks of
    // each in video order: pair p supplies ordinals 2p and 2p+1.
    let mut videos: Vec<u32> = Vec::new();
    for e in &ds.manifest.entries {
        if !videos.contains(&e.video) {
            videos.push(e.video);
        }
    }
    if videos.len() < n_videos {
        return Err(Error::Config(format!(
            "eval.ot_videos = {n_videos} but the dataset has only {} videos",
            videos.len()
        )));
    }
    videos.truncate(n_videos);

    let mut labels: Vec<ChunkLabel> = Vec::new();
    let mut chunks: Vec<Tensor> = Vec::new();
    for &video in &videos {
        let mut pairs: Vec<_> = ds.pairs.iter().filter(|p| p.video == video).collect();
        pairs.sort_by_key(|p| p.pair_index);
        let mut taken = 0;
        'fill: for p in pairs {
            for (half, flat) in [(0, p.x0_flat()), (1, p.x1_flat())] {
                if taken == per_video {
                    break 'fill;
                }
                labels.push(ChunkLabel {
                    video,
                    index: 2 * p.pair_index + half,
                });
                chunks.push(flat);
                taken += 1;
            }
        }
        if taken < per_video {
            return Err(Error::Config(format!(
                "video {video} has only {taken} chunks, need eval.ot_chunks_per_video = {per_video}"
            )));
        }
    }

    let items: Vec<(ChunkLabel, &Tensor)> = labels.iter().copied().zip(chunks.iter()).collect();
    let cm = cost_matrix(&items)?;
    let mask = make_mask(&cm.rows, &cm.cols, kind);
    let opts = OtOptions {
        infeasible_fallback: cfg.num("eval.ot_fallback"),
        ..OtOptions::default()
    };
    let plan = solve_ot_exact(&cm, &mask, &opts)?;

    let run = ctx.run_dir()?;
    run.write_text("config.txt", &cfg.echo())?;
    save_plan_heatmap(&run.file("heatmap.pgm")?, &plan)?;
    save_plan_text(&run.file("plan.txt")?, &plan)?;
    save_boundaries(&run.file("boundaries.txt")?, &plan)?;

    let adj = adjacency_mass(&plan, &plan.rows, &plan.cols);
    let mut stats = String::from("stat,value\n");
    let _ = writeln!(stats, "n,{}", plan.n());
    let _ = writeln!(stats, "mask,{}", kind.name());
    let _ = writeln!(stats, "objective,{}", plan.objective);
    let _ = writeln!(stats, "penalty_matches,{}", plan.penalty_matches);
    let _ = writeln!(stats, "adjacency_mass,{adj}");
    run.write_text("stats.csv", &stats)?;

    let dir = run.finalize()?;
    println!(
        "otplan: n = {}, mask = {}, objective = {:.6}, adjacency mass = {:.4}",
        plan.n(),
        kind.name(),
        plan.objective,
        adj
    );
    println!("run directory: {}", dir.display());
    Ok(())
}
