//! Run configuration: plain `key = value` lines under `[section]` headers.
//!
//! Every key has a default, so an empty file is a valid configuration.
//! Unknown sections, unknown keys, and type-invalid values are rejected
//! with their 1-based line number. `echo` renders the fully resolved set in
//! a canonical order; parsing that text reproduces the configuration
//! exactly.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use chunkflow_core::error::{Error, Result};
use chunkflow_core::numerics::rng::fnv1a64;

pub const SECTIONS: [&str; 5] = ["data", "model", "train", "sample", "eval"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    U64,
    Usize,
    F64,
    Bool,
    Str,
    /// Comma-separated positive integers.
    UsizeList,
    /// Comma-separated items, free-form.
    StrList,
    /// Comma-separated LxHxW triples.
    VolumeList,
    /// video:pair, both unsigned.
    PairRef,
}

struct KeySpec {
    key: &'static str,
    kind: Kind,
    default: &'static str,
    help: &'static str,
}

/// One row per known key; the single source of truth for defaults and the
/// documentation table.
const KEYS: &[KeySpec] = &[
    KeySpec { key: "seed", kind: Kind::U64, default: "0", help: "root RNG seed; --seed overrides" },
    // data
    KeySpec { key: "data.dir", kind: Kind::Str, default: "data", help: "dataset directory written by gen-data and read by everything else" },
    KeySpec { key: "data.videos_per_class", kind: Kind::Usize, default: "3", help: "videos per (motion, camera) grid cell" },
    KeySpec { key: "data.motion_classes", kind: Kind::StrList, default: "slow,medium,fast", help: "motion classes to generate" },
    KeySpec { key: "data.camera_classes", kind: Kind::StrList, default: "static,pan_tilt,zoom,complex", help: "camera classes to generate" },
    KeySpec { key: "data.frames", kind: Kind::Usize, default: "32", help: "frames per video" },
    KeySpec { key: "data.height", kind: Kind::Usize, default: "16", help: "frame height in pixels" },
    KeySpec { key: "data.width", kind: Kind::Usize, default: "16", help: "frame width in pixels" },
    KeySpec { key: "data.chunk_len", kind: Kind::Usize, default: "4", help: "frames per chunk" },
    KeySpec { key: "data.sigma_frac", kind: Kind::F64, default: "0.08", help: "blob standard deviation as a fraction of min(height, width)" },
    KeySpec { key: "data.cut_bins", kind: Kind::Usize, default: "16", help: "histogram bins for scene-cut detection" },
    KeySpec { key: "data.cut_threshold", kind: Kind::F64, default: "0.5", help: "histogram-distance threshold declaring a cut" },
    KeySpec { key: "data.eval_fraction", kind: Kind::F64, default: "0.25", help: "fraction of each cell's videos held out for evaluation" },
    // model
    KeySpec { key: "model.hidden", kind: Kind::UsizeList, default: "64,64", help: "hidden layer widths" },
    KeySpec { key: "model.time_embed", kind: Kind::Usize, default: "8", help: "timestep embedding width" },
    // train
    KeySpec { key: "train.algorithm", kind: Kind::Str, default: "alg1_oc_ti", help: "alg1_oc_ti | alg2_plain | alg3_oc_only | conventional_baseline" },
    KeySpec { key: "train.coupling", kind: Kind::Str, default: "auto", help: "auto | independent | inherent | minibatch_ot" },
    KeySpec { key: "train.rho", kind: Kind::F64, default: "0.7", help: "target-inversion probability" },
    KeySpec { key: "train.steps", kind: Kind::U64, default: "200", help: "optimizer steps" },
    KeySpec { key: "train.batch_size", kind: Kind::Usize, default: "8", help: "pairs per step" },
    KeySpec { key: "train.lr", kind: Kind::F64, default: "0.0002", help: "base learning rate" },
    KeySpec { key: "train.schedule", kind: Kind::Str, default: "constant", help: "constant | linear | cosine" },
    KeySpec { key: "train.weighting", kind: Kind::Str, default: "uniform", help: "timestep sampler: uniform | logit_normal" },
    KeySpec { key: "train.logit_location", kind: Kind::F64, default: "0", help: "logit-normal location" },
    KeySpec { key: "train.logit_scale", kind: Kind::F64, default: "1", help: "logit-normal scale" },
    KeySpec { key: "train.time_shift", kind: Kind::F64, default: "1", help: "timestep shift factor, 1 = identity" },
    KeySpec { key: "train.sigma0", kind: Kind::F64, default: "0.3", help: "scale of the inverted latent in the inversion branch" },
    KeySpec { key: "train.inversion_steps", kind: Kind::Usize, default: "20", help: "backward-ODE steps for target inversion" },
    KeySpec { key: "train.inversion_order", kind: Kind::Usize, default: "2", help: "inversion solver order, 1 or 2" },
    KeySpec { key: "train.inversion_r", kind: Kind::F64, default: "0.5", help: "probe fraction of the second-order inversion step" },
    KeySpec { key: "train.checkpoint_every", kind: Kind::U64, default: "0", help: "steps between intermediate checkpoints, 0 disables" },
    KeySpec { key: "train.from_scratch", kind: Kind::Bool, default: "false", help: "train without an initial checkpoint" },
    KeySpec { key: "train.init_checkpoint", kind: Kind::Str, default: "", help: "checkpoint to fine-tune from" },
    // sample
    KeySpec { key: "sample.checkpoint", kind: Kind::Str, default: "", help: "model checkpoint to sample from" },
    KeySpec { key: "sample.chunk", kind: Kind::PairRef, default: "0:0", help: "input chunk as video:pair" },
    KeySpec { key: "sample.nfe", kind: Kind::Usize, default: "8", help: "Euler steps per generated chunk" },
    KeySpec { key: "sample.n_chunks", kind: Kind::Usize, default: "1", help: "chunks to generate autoregressively" },
    // eval
    KeySpec { key: "eval.checkpoint", kind: Kind::Str, default: "", help: "model checkpoint to evaluate" },
    KeySpec { key: "eval.baseline_checkpoint", kind: Kind::Str, default: "", help: "conventional checkpoint; enables the scaling comparison" },
    KeySpec { key: "eval.nfe_list", kind: Kind::UsizeList, default: "1,2,5,10,20,40", help: "step counts for the sweep" },
    KeySpec { key: "eval.nfe", kind: Kind::Usize, default: "8", help: "step count for seam and per-class metrics" },
    KeySpec { key: "eval.rollout_chunks", kind: Kind::Usize, default: "4", help: "generated chunks per rollout" },
    KeySpec { key: "eval.rollout_nfe", kind: Kind::Usize, default: "8", help: "Euler steps per rollout chunk" },
    KeySpec { key: "eval.ot_mask", kind: Kind::Str, default: "no_self", help: "transport mask: none | no_self | next_only" },
    KeySpec { key: "eval.ot_videos", kind: Kind::Usize, default: "4", help: "videos in the transport-plan subset" },
    KeySpec { key: "eval.ot_chunks_per_video", kind: Kind::Usize, default: "2", help: "chunks taken from each video" },
    KeySpec { key: "eval.ot_fallback", kind: Kind::Bool, default: "true", help: "replace an infeasible mask by a finite penalty" },
    KeySpec { key: "eval.volume_grid", kind: Kind::VolumeList, default: "2x8x8,4x8x8,4x12x12,4x16x16,8x16x16", help: "LxHxW grid for the memory-scaling fit" },
];

fn key_spec(full: &str) -> Option<&'static KeySpec> {
    KEYS.iter().find(|s| s.key == full)
}

fn check_kind(kind: Kind, value: &str) -> std::result::Result<(), String> {
    let num = |v: &str, what: &str| -> std::result::Result<(), String> {
        match kind {
            Kind::U64 | Kind::Usize => v
                .parse::<u64>()
                .map(|_| ())
                .map_err(|_| format!("'{v}' is not {what}")),
            _ => {
                let x: f64 = v.parse().map_err(|_| format!("'{v}' is not {what}"))?;
                if x.is_finite() {
                    Ok(())
                } else {
                    Err(format!("'{v}' is not finite"))
                }
            }
        }
    };
    match kind {
        Kind::U64 | Kind::Usize => num(value, "an unsigned integer"),
        Kind::F64 => num(value, "a number"),
        Kind::Bool => match value {
            "true" | "false" => Ok(()),
            other => Err(format!("'{other}' is not 'true' or 'false'")),
        },
        Kind::Str | Kind::StrList => Ok(()),
        Kind::UsizeList => {
            if value.is_empty() {
                return Err("empty list".into());
            }
            for item in value.split(',') {
                item.trim()
                    .parse::<u64>()
                    .map_err(|_| format!("'{item}' is not an unsigned integer"))?;
            }
            Ok(())
        }
        Kind::VolumeList => {
            if value.is_empty() {
                return Err("empty list".into());
            }
            for item in value.split(',') {
                parse_volume(item.trim())?;
            }
            Ok(())
        }
        Kind::PairRef => parse_pair_ref(value).map(|_| ()),
    }
}

fn parse_volume(item: &str) -> std::result::Result<(usize, usize, usize), String> {
    let parts: Vec<&str> = item.split('x').collect();
    if parts.len() != 3 {
        return Err(format!("'{item}' is not of the form LxHxW"));
    }
    let mut dims = [0usize; 3];
    for (d, p) in dims.iter_mut().zip(&parts) {
        *d = p
            .parse()
            .map_err(|_| format!("'{p}' in '{item}' is not an unsigned integer"))?;
        if *d == 0 {
            return Err(format!("'{item}' has a zero extent"));
        }
    }
    Ok((dims[0], dims[1], dims[2]))
}

fn parse_pair_ref(value: &str) -> std::result::Result<(u32, u32), String> {
    let Some((v, p)) = value.split_once(':') else {
        return Err(format!("'{value}' is not of the form video:pair"));
    };
    let video = v
        .parse()
        .map_err(|_| format!("'{v}' is not an unsigned integer"))?;
    let pair = p
        .parse()
        .map_err(|_| format!("'{p}' is not an unsigned integer"))?;
    Ok((video, pair))
}

/// A fully resolved configuration: every known key maps to a value string
/// that already passed its kind check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Config {
    values: BTreeMap<String, String>,
}

impl Default for Config {
    fn default() -> Self {
        let values = KEYS
            .iter()
            .map(|s| (s.key.to_string(), s.default.to_string()))
            .collect();
        Self { values }
    }
}

impl Config {
    pub fn parse_text(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let mut section: Option<&'static str> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(inner) = line.strip_prefix('[') {
                let Some(name) = inner.strip_suffix(']') else {
                    return Err(Error::Config(format!(
                        "line {line_no}: unterminated section header '{line}'"
                    )));
                };
                let name = name.trim();
                let Some(known) = SECTIONS.iter().find(|s| **s == name) else {
                    return Err(Error::Config(format!(
                        "line {line_no}: unknown section [{name}] (expected one of {})",
                        SECTIONS.join(", ")
                    )));
                };
                section = Some(known);
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(Error::Config(format!(
                    "line {line_no}: expected 'key = value', got '{line}'"
                )));
            };
            let (key, value) = (k.trim(), v.trim());
            let full = match section {
                Some(sec) => format!("{sec}.{key}"),
                None => key.to_string(),
            };
            let Some(spec) = key_spec(&full) else {
                return Err(Error::Config(format!("line {line_no}: unknown key '{full}'")));
            };
            check_kind(spec.kind, value)
                .map_err(|msg| Error::Config(format!("line {line_no}: {full}: {msg}")))?;
            cfg.values.insert(full, value.to_string());
        }
        Ok(cfg)
    }

    pub fn parse_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::Config(format!("cannot read config {}: {e}", path.display()))
        })?;
        Self::parse_text(&text)
    }

    /// Canonical text: top-level keys, then each section in declaration
    /// order with keys sorted. Parsing the result reproduces `self`.
    pub fn echo(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.values {
            if !k.contains('.') {
                let _ = writeln!(out, "{k} = {v}");
            }
        }
        for sec in SECTIONS {
            let _ = writeln!(out);
            let _ = writeln!(out, "[{sec}]");
            let prefix = format!("{sec}.");
            for (k, v) in &self.values {
                if let Some(rest) = k.strip_prefix(&prefix) {
                    let _ = writeln!(out, "{rest} = {v}");
                }
            }
        }
        out
    }

    /// Digest of the resolved configuration, seed included.
    pub fn hash(&self) -> u64 {
        fnv1a64(self.echo().as_bytes())
    }

    pub fn set_seed(&mut self, seed: u64) {
        self.values.insert("seed".into(), seed.to_string());
    }

    fn raw(&self, key: &str) -> &str {
        self.values
            .get(key)
            .unwrap_or_else(|| panic!("lookup of unknown config key '{key}'"))
    }

    /// Numeric getter; the value's syntax was checked at parse time.
    pub fn num<T>(&self, key: &str) -> T
    where
        T: std::str::FromStr,
        T::Err: std::fmt::Debug,
    {
        self.raw(key)
            .parse()
            .unwrap_or_else(|e| panic!("config key '{key}' failed to parse: {e:?}"))
    }

    pub fn text(&self, key: &str) -> &str {
        self.raw(key)
    }

    pub fn usize_list(&self, key: &str) -> Vec<usize> {
        self.raw(key)
            .split(',')
            .map(|s| s.trim().parse().expect("kind-checked at parse"))
            .collect()
    }

    pub fn str_list(&self, key: &str) -> Vec<String> {
        self.raw(key)
            .split(',')
            .map(|s| s.trim().to_string())
            .filter(|s| !s.is_empty())
            .collect()
    }

    pub fn volume_list(&self, key: &str) -> Vec<(usize, usize, usize)> {
        self.raw(key)
            .split(',')
            .map(|s| parse_volume(s.trim()).expect("kind-checked at parse"))
            .collect()
    }

    pub fn pair_ref(&self, key: &str) -> (u32, u32) {
        parse_pair_ref(self.raw(key)).expect("kind-checked at parse")
    }
}

/// The key table as a markdown-ish listing, one `key  default  help` line
/// per entry. Backs the README and `--help` output.
pub fn key_table() -> String {
    let mut out = String::new();
    for spec in KEYS {
        let shown = if spec.default.is_empty() { "(empty)" } else { spec.default };
        let _ = writeln!(out, "  {:28} default {:40} {}", spec.key, shown, spec.help);
    }
    out
}
