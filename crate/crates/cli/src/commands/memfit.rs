//! Activation-memory scaling: count live activations for the direct and
//! conditional model shapes over a grid of chunk volumes, fit lines, and
//! compare slopes.

use std::fmt::Write as _;

use chunkflow_core::error::Result;
use chunkflow_core::metrics::scaling::{activation_cost, ols_fit, ScalingFit};

use crate::commands::Ctx;

pub struct ScalingTable {
    pub volumes: Vec<usize>,
    pub direct: Vec<usize>,
    pub conventional: Vec<usize>,
    pub fit_direct: ScalingFit,
    pub fit_conv: ScalingFit,
}

/// Activation counts at matched hidden widths. The direct model maps a
/// chunk to a chunk (width V at both ends); the conventional one carries
/// condition and state together (width 2V at both ends).
pub fn scaling_table(hidden: &[usize], grid: &[(usize, usize, usize)]) -> Result<ScalingTable> {
    let volumes: Vec<usize> = grid.iter().map(|&(l, h, w)| l * h * w).collect();
    let mut direct = Vec::with_capacity(volumes.len());
    let mut conventional = Vec::with_capacity(volumes.len());
    for &v in &volumes {
        let mut outs = hidden.to_vec();
        outs.push(v);
        direct.push(activation_cost(v, &outs));
        *outs.last_mut().unwrap() = 2 * v;
        conventional.push(activation_cost(2 * v, &outs));
    }
    let pts = |costs: &[usize]| -> Vec<(f64, f64)> {
        volumes
            .iter()
            .zip(costs)
            .map(|(&v, &c)| (v as f64, c as f64))
            .collect()
    };
    let fit_direct = ols_fit(&pts(&direct))?;
    let fit_conv = ols_fit(&pts(&conventional))?;
    Ok(ScalingTable {
        volumes,
        direct,
        conventional,
        fit_direct,
        fit_conv,
    })
}

pub fn points_csv(t: &ScalingTable) -> String {
    let mut out = String::from("volume,direct_cost,conventional_cost\n");
    for i in 0..t.volumes.len() {
        let _ = writeln!(out, "{},{},{}", t.volumes[i], t.direct[i], t.conventional[i]);
    }
    out
}

pub fn fit_csv(t: &ScalingTable) -> String {
    let mut out = String::from("quantity,value\n");
    let _ = writeln!(out, "k_direct,{}", t.fit_direct.k);
    let _ = writeln!(out, "b_direct,{}", t.fit_direct.b);
    let _ = writeln!(out, "k_conventional,{}", t.fit_conv.k);
    let _ = writeln!(out, "b_conventional,{}", t.fit_conv.b);
    let _ = writeln!(out, "slope_ratio,{}", t.fit_direct.k / t.fit_conv.k);
    out
}

pub fn run(ctx: &Ctx) -> Result<()> {
    let cfg = &ctx.cfg;
    let hidden = cfg.usize_list("model.hidden");
    let grid = cfg.volume_list("eval.volume_grid");
    let table = scaling_table(&hidden, &grid)?;

    let run = ctx.run_dir()?;
    run.write_text("config.txt", &cfg.echo())?;
    run.write_text("memfit_points.csv", &points_csv(&table))?;
    run.write_text("memfit_fit.csv", &fit_csv(&table))?;
    let dir = run.finalize()?;
    println!(
        "memfit: {} volumes, slope {:.3} per million (direct) vs {:.3} (conventional), ratio {:.3}",
        table.volumes.len(),
        table.fit_direct.k,
        table.fit_conv.k,
        table.fit_direct.k / table.fit_conv.k
    );
    println!("run directory: {}", dir.display());
    Ok(())
}
