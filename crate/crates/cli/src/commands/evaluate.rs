//! Held-out evaluation of a trained model: step-count sweep, multi-chunk
//! rollout error, per-class seam quality, and an overall report. With a
//! baseline checkpoint it also emits the activation scaling comparison.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use chunkflow_core::datagen::{CameraClass, MotionClass};
use chunkflow_core::error::{Error, Result};
use chunkflow_core::flow::checkpoint::load_checkpoint;
use chunkflow_core::flow::sample::sample_continuation;
use chunkflow_core::metrics::report::{nfe_sweep, nfe_sweep_csv, rollout_errors, EvalReport};
use chunkflow_core::metrics::seam::{motion_continuity, seam_metrics};

use crate::commands::{median, positive, Ctx};
use crate::dataset::{chunk_chains, load_split, require_path, Split};

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn run(ctx: &Ctx) -> Result<()> {
    let cfg = &ctx.cfg;
    let ds = load_split(cfg, Split::Eval)?;
    let d = ds.flat_dim();
    let ck = load_checkpoint(&require_path(cfg, "eval.checkpoint")?)?;
    if ck.net.data_input_dim() != d {
        return Err(Error::Config(format!(
            "eval.checkpoint must hold a direct {d} -> {d} model ({} inputs found); \
             wide conditional nets go in eval.baseline_checkpoint",
            ck.net.data_input_dim()
        )));
    }
    let nfe_list = cfg.usize_list("eval.nfe_list");
    if nfe_list.iter().any(|&n| n == 0) {
        return Err(Error::Config("eval.nfe_list entries must be positive".into()));
    }
    let nfe = positive(cfg, "eval.nfe")?;
    let rollout_chunks = positive(cfg, "eval.rollout_chunks")?;
    let rollout_nfe = positive(cfg, "eval.rollout_nfe")?;

    let run = ctx.run_dir()?;
    run.write_text("config.txt", &cfg.echo())?;

    let sweep = nfe_sweep(&ck.net, &ds.pairs, &nfe_list)?;
    run.write_text("nfe_sweep.csv", &nfe_sweep_csv(&sweep))?;

    // Rollout: chains of rollout_chunks + 1 consecutive chunks; the first
    // seeds the model, the rest are ground truth.
    let chains = chunk_chains(&ds, rollout_chunks + 1);
    if chains.is_empty() {
        return Err(Error::Degenerate(format!(
            "no eval video has {} consecutive chunks for the rollout",
            rollout_chunks + 1
        )));
    }
    let mut per_chunk: Vec<Vec<f64>> = vec![Vec::new(); rollout_chunks];
    let mut rollout = String::from("video,chunk,endpoint_mse\n");
    for (video, chain) in &chains {
        let errs = rollout_errors(&ck.net, chain, rollout_nfe)?;
        for (j, e) in errs.iter().enumerate() {
            let _ = writeln!(rollout, "{video},{},{e}", j + 1);
            per_chunk[j].push(*e);
        }
    }
    let medians: Vec<f64> = per_chunk.iter().map(|v| median(v)).collect();
    for (j, m) in medians.iter().enumerate() {
        let _ = writeln!(rollout, "median,{},{m}", j + 1);
    }
    run.write_text("rollout.csv", &rollout)?;

    // One continuation per eval pair at the headline step count, grouped
    // by motion and camera class. Continuity needs a trackable blob in
    // the generated frames, so it can be undefined for weak models.
    let (l, h, w) = (
        ds.manifest.chunk_len,
        ds.manifest.frame_h,
        ds.manifest.frame_w,
    );
    let mut by_class: BTreeMap<(usize, usize), (Vec<f64>, Vec<f64>, Vec<f64>)> = BTreeMap::new();
    let mut all_jump = Vec::new();
    let mut all_accel = Vec::new();
    let mut all_cont = Vec::new();
    for (i, pair) in ds.pairs.iter().enumerate() {
        let gen = sample_continuation(&ck.net, &pair.x0_flat(), nfe)?;
        let chunk = gen.reshape(vec![l, h, w])?;
        let (jump, accel) = seam_metrics(&pair.x0, &chunk)?;
        let (motion, camera) = ds.class_of(i);
        let mi = MotionClass::ALL.iter().position(|m| *m == motion).unwrap();
        let ci = CameraClass::ALL.iter().position(|c| *c == camera).unwrap();
        let slot = by_class.entry((mi, ci)).or_default();
        slot.0.push(jump);
        slot.1.push(accel);
        all_jump.push(jump);
        all_accel.push(accel);
        if let Ok(cont) = motion_continuity(&pair.x0, &chunk) {
            slot.2.push(cont);
            all_cont.push(cont);
        }
    }
    let mut table = String::from("motion,camera,pairs,seam_jump,seam_accel,motion_continuity\n");
    for ((mi, ci), (jumps, accels, conts)) in &by_class {
        let cont_cell = if conts.is_empty() {
            String::new()
        } else {
            mean(conts).to_string()
        };
        let _ = writeln!(
            table,
            "{},{},{},{},{},{cont_cell}",
            MotionClass::ALL[*mi].name(),
            CameraClass::ALL[*ci].name(),
            jumps.len(),
            mean(jumps),
            mean(accels),
        );
    }
    run.write_text("seam_by_class.csv", &table)?;

    let mut entries = vec![
        ("seam_jump_mean".to_string(), mean(&all_jump)),
        ("seam_accel_mean".to_string(), mean(&all_accel)),
    ];
    if !all_cont.is_empty() {
        entries.push(("motion_continuity_mean".to_string(), mean(&all_cont)));
    }
    for (j, m) in medians.iter().enumerate() {
        entries.push((format!("rollout_mse_chunk{}", j + 1), *m));
    }
    if medians[0] > 0.0 {
        entries.push((
            "rollout_growth".to_string(),
            medians[rollout_chunks - 1] / medians[0],
        ));
    }
    let report = EvalReport::new(entries, cfg.hash(), ds.pairs.len())?;
    run.write_text("report.csv", &report.to_csv())?;

    let baseline_path = cfg.text("eval.baseline_checkpoint").to_string();
    let mut ratio_note = String::new();
    if !baseline_path.is_empty() {
        let bk = load_checkpoint(&require_path(cfg, "eval.baseline_checkpoint")?)?;
        let hidden_of = |ws: &[usize]| ws[1..ws.len() - 1].to_vec();
        let hidden = hidden_of(ck.net.widths());
        if hidden_of(bk.net.widths()) != hidden {
            return Err(Error::Config(format!(
                "scaling comparison needs matched hidden widths: direct {:?} vs baseline {:?}",
                hidden,
                hidden_of(bk.net.widths())
            )));
        }
        let grid = cfg.volume_list("eval.volume_grid");
        let table = super::memfit::scaling_table(&hidden, &grid)?;
        run.write_text("scaling_points.csv", &super::memfit::points_csv(&table))?;
        run.write_text("scaling_fit.csv", &super::memfit::fit_csv(&table))?;
        ratio_note = format!(
            ", activation slope ratio {:.3}",
            table.fit_direct.k / table.fit_conv.k
        );
    }

    let dir = run.finalize()?;
    println!(
        "evaluate: {} pairs, seam jump {:.6}, rollout chunk-{} median {:.6}{}",
        ds.pairs.len(),
        mean(&all_jump),
        rollout_chunks,
        medians[rollout_chunks - 1],
        ratio_note
    );
    println!("run directory: {}", dir.display());
    Ok(())
}
