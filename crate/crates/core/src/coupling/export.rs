//! Plan exports: text dump, grayscale heatmap, video-boundary sidecar.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::coupling::solve::TransportPlan;
use crate::coupling::ChunkLabel;
use crate::error::Result;
use crate::pgm::write_frame_pgm;

/// Tab-separated dump: a small header, the assignment, then the dense plan
/// matrix one row per line.
pub fn plan_text(plan: &TransportPlan) -> String {
    let n = plan.n();
    let mut out = String::new();
    let _ = writeln!(out, "n\t{n}");
    let _ = writeln!(out, "mask\t{}", plan.mask_kind.name());
    let _ = writeln!(out, "objective\t{}", plan.objective);
    let _ = writeln!(out, "penalty_matches\t{}", plan.penalty_matches);
    let cols: Vec<String> = plan.assignment.iter().map(|c| c.to_string()).collect();
    let _ = writeln!(out, "assignment\t{}", cols.join("\t"));
    let m = plan.matrix();
    for r in 0..n {
        let row: Vec<String> = (0..n).map(|c| m.at2(r, c).to_string()).collect();
        let _ = writeln!(out, "{}", row.join("\t"));
    }
    out
}

pub fn save_plan_text(path: &Path, plan: &TransportPlan) -> Result<()> {
    fs::write(path, plan_text(plan))?;
    Ok(())
}

/// 8-bit heatmap, row = source, column = target; the per-entry mass 1/n maps
/// to full white.
pub fn save_plan_heatmap(path: &Path, plan: &TransportPlan) -> Result<()> {
    write_frame_pgm(path, &plan.matrix(), 0.0, plan.mass())
}

/// Indices where the video label changes, i.e. the first position of every
/// video after the first. Assumes labels are grouped by video.
pub fn video_boundaries(labels: &[ChunkLabel]) -> Vec<usize> {
    labels
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[0].video != w[1].video)
        .map(|(i, _)| i + 1)
        .collect()
}

/// Sidecar listing boundary tick positions on both axes, one per line.
pub fn save_boundaries(path: &Path, plan: &TransportPlan) -> Result<()> {
    let mut out = String::new();
    for i in video_boundaries(&plan.rows) {
        let _ = writeln!(out, "row\t{i}");
    }
    for j in video_boundaries(&plan.cols) {
        let _ = writeln!(out, "col\t{j}");
    }
    fs::write(path, out)?;
    Ok(())
}
