//! Dataset generation: render the class grid of blob videos, detect cuts,
//! extract chunk pairs, and write tensors plus manifests.

use chunkflow_core::datagen::blob::gen_blob_video_sigma;
use chunkflow_core::datagen::manifest::{DatasetManifest, ManifestEntry};
use chunkflow_core::datagen::scene::detect_scene_cuts;
use chunkflow_core::datagen::{chunk_video, CameraClass, MotionClass};
use chunkflow_core::error::{Error, Result};
use chunkflow_core::numerics::io::save_tensor;
use chunkflow_core::numerics::rng::Rng;
use chunkflow_core::numerics::tensor::Tensor;

use crate::commands::Ctx;
use crate::dataset::{dataset_dir, EVAL_MANIFEST, FULL_MANIFEST, TRAIN_MANIFEST};
use crate::rundir::RunDir;

fn parse_classes<T: Copy + PartialEq>(
    names: &[String],
    what: &str,
    parse: impl Fn(&str) -> Result<T>,
) -> Result<Vec<T>> {
    if names.is_empty() {
        return Err(Error::Config(format!("data.{what}_classes must not be empty")));
    }
    let mut out = Vec::with_capacity(names.len());
    for name in names {
        let c = parse(name)?;
        if out.contains(&c) {
            return Err(Error::Config(format!(
                "data.{what}_classes lists '{name}' twice"
            )));
        }
        out.push(c);
    }
    Ok(out)
}

pub fn run(ctx: &Ctx) -> Result<()> {
    let cfg = &ctx.cfg;
    let frames: usize = cfg.num("data.frames");
    let h: usize = cfg.num("data.height");
    let w: usize = cfg.num("data.width");
    let l: usize = cfg.num("data.chunk_len");
    if l == 0 {
        return Err(Error::Config("data.chunk_len must be at least 1".into()));
    }
    if frames < 2 * l {
        return Err(Error::Config(format!(
            "data.frames = {frames} cannot hold a chunk pair (needs at least 2 * chunk_len = {})",
            2 * l
        )));
    }
    let videos_per_class: usize = cfg.num("data.videos_per_class");
    if videos_per_class == 0 {
        return Err(Error::Config("data.videos_per_class must be at least 1".into()));
    }
    let sigma_frac: f64 = cfg.num("data.sigma_frac");
    if !(sigma_frac > 0.0) {
        return Err(Error::Config(format!(
            "data.sigma_frac must be positive, got {sigma_frac}"
        )));
    }
    let eval_fraction: f64 = cfg.num("data.eval_fraction");
    if !(0.0..=1.0).contains(&eval_fraction) {
        return Err(Error::Config(format!(
            "data.eval_fraction must lie in [0,1], got {eval_fraction}"
        )));
    }
    let motion = parse_classes(&cfg.str_list("data.motion_classes"), "motion", MotionClass::parse)?;
    let camera = parse_classes(&cfg.str_list("data.camera_classes"), "camera", CameraClass::parse)?;
    let cut_bins: usize = cfg.num("data.cut_bins");
    let cut_threshold: f64 = cfg.num("data.cut_threshold");
    let sigma = sigma_frac * h.min(w) as f64;

    // The dataset gets a stable directory instead of a timestamped one so
    // later commands can reference it; claiming refuses to clobber.
    let run = RunDir::claim(&dataset_dir(cfg))?;
    run.write_text("config.txt", &cfg.echo())?;

    // Last n_eval videos of every class cell are held out.
    let n_eval = ((eval_fraction * videos_per_class as f64).ceil() as usize).min(videos_per_class);
    let data_rng = Rng::new(ctx.seed).fork("data");

    let mut full = DatasetManifest::new(l, h, w);
    let mut train = DatasetManifest::new(l, h, w);
    let mut eval = DatasetManifest::new(l, h, w);
    let mut video_id = 0u32;
    for &m in &motion {
        for &c in &camera {
            for slot in 0..videos_per_class {
                let video_seed = data_rng.fork_index(video_id as u64).seed();
                let video = gen_blob_video_sigma(video_seed, frames, h, w, m, c, sigma)?;
                let cuts = detect_scene_cuts(&video.frames, cut_bins, cut_threshold)?;
                for pair in chunk_video(video_id, &video.frames, l, &cuts)? {
                    let rel = format!("pairs/v{video_id:04}_p{:02}.fc2s", pair.pair_index);
                    let data: Vec<f64> = pair
                        .x0
                        .data()
                        .iter()
                        .chain(pair.x1.data())
                        .copied()
                        .collect();
                    save_tensor(&run.file(&rel)?, &Tensor::new(vec![2, l, h, w], data)?)?;
                    let entry = ManifestEntry {
                        path: rel,
                        video: video_id,
                        pair_index: pair.pair_index,
                        motion: m,
                        camera: c,
                    };
                    if slot >= videos_per_class - n_eval {
                        eval.entries.push(entry.clone());
                    } else {
                        train.entries.push(entry.clone());
                    }
                    full.entries.push(entry);
                }
                video_id += 1;
            }
        }
    }
    if full.entries.is_empty() {
        return Err(Error::Degenerate(
            "no chunk pairs were produced; raise data.frames or lower data.chunk_len".into(),
        ));
    }
    full.save(&run.file(FULL_MANIFEST)?)?;
    train.save(&run.file(TRAIN_MANIFEST)?)?;
    eval.save(&run.file(EVAL_MANIFEST)?)?;
    let (pairs, train_n, eval_n) = (full.entries.len(), train.entries.len(), eval.entries.len());
    let dir = run.finalize()?;
    println!(
        "dataset: {} ({video_id} videos, {pairs} pairs; {train_n} train / {eval_n} eval)",
        dir.display()
    );
    Ok(())
}
