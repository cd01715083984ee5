//! Subcommand implementations and the plumbing they share.

pub mod evaluate;
pub mod finetune;
pub mod gen_data;
pub mod invert;
pub mod memfit;
pub mod otplan;
pub mod pretrain;
pub mod sample;
pub mod verify;

use std::fmt::Write as _;
use std::path::PathBuf;

use chunkflow_core::coupling::CouplingStrategy;
use chunkflow_core::error::{Error, Result};
use chunkflow_core::flow::codec::Sigma0;
use chunkflow_core::flow::invert::InversionOrder;
use chunkflow_core::flow::sampler::TimestepSampler;
use chunkflow_core::flow::train::{Algorithm, LossRecord, TrainRecipe};
use chunkflow_core::numerics::net::NetConfig;
use chunkflow_core::numerics::optim::ScheduleKind;

use crate::args::{CliArgs, Command};
use crate::config::Config;

/// Resolved invocation state: which command runs, the config with the
/// effective seed applied, the seed itself, and the root under which run
/// directories are created.
pub struct Ctx {
    pub command: Command,
    pub cfg: Config,
    pub seed: u64,
    pub out_root: PathBuf,
}

impl Ctx {
    /// Start this command's run directory under the output root.
    pub fn run_dir(&self) -> Result<crate::rundir::RunDir> {
        crate::rundir::RunDir::create(&self.out_root, self.command.name(), self.cfg.hash())
    }
}

pub fn prepare(cli: &CliArgs) -> Result<Ctx> {
    let mut cfg = Config::parse_file(&cli.config)?;
    let seed = cli.seed.unwrap_or_else(|| cfg.num::<u64>("seed"));
    cfg.set_seed(seed);
    let out_root = cli.out.clone().unwrap_or_else(|| PathBuf::from("runs"));
    Ok(Ctx {
        command: cli.command,
        cfg,
        seed,
        out_root,
    })
}

pub fn net_config(cfg: &Config) -> NetConfig {
    NetConfig {
        hidden: cfg.usize_list("model.hidden"),
        time_embed_width: cfg.num("model.time_embed"),
    }
}

pub fn timestep_sampler(cfg: &Config) -> Result<TimestepSampler> {
    let base = match cfg.text("train.weighting") {
        "uniform" => TimestepSampler::uniform(),
        "logit_normal" => TimestepSampler::logit_normal(
            cfg.num("train.logit_location"),
            cfg.num("train.logit_scale"),
        ),
        other => {
            return Err(Error::Config(format!(
                "train.weighting = {other}: expected uniform or logit_normal"
            )))
        }
    };
    Ok(base.with_shift(cfg.num("train.time_shift")))
}

pub fn inversion_order(cfg: &Config) -> Result<InversionOrder> {
    match cfg.num::<usize>("train.inversion_order") {
        1 => Ok(InversionOrder::First),
        2 => Ok(InversionOrder::Second),
        n => Err(Error::Config(format!(
            "train.inversion_order = {n}: expected 1 or 2"
        ))),
    }
}

/// Build and validate the training recipe. Validation runs here, before
/// any dataset or checkpoint is touched, so invariant violations are the
/// first thing reported.
pub fn train_recipe(cfg: &Config, seed: u64) -> Result<TrainRecipe> {
    let algorithm = Algorithm::parse(cfg.text("train.algorithm"))?;
    let coupling = match cfg.text("train.coupling") {
        "auto" => algorithm.required_coupling(),
        other => CouplingStrategy::parse(other)?,
    };
    let mut r = TrainRecipe::new(algorithm, seed);
    r.rho = cfg.num("train.rho");
    r.coupling = coupling;
    r.steps = cfg.num("train.steps");
    r.batch_size = cfg.num("train.batch_size");
    r.schedule = ScheduleKind::parse(cfg.text("train.schedule"))?;
    r.base_lr = cfg.num("train.lr");
    r.sampler = timestep_sampler(cfg)?;
    r.sigma0 = Sigma0::Scalar(cfg.num("train.sigma0"));
    r.inversion_steps = cfg.num("train.inversion_steps");
    r.inversion_order = inversion_order(cfg)?;
    r.inversion_r = cfg.num("train.inversion_r");
    r.checkpoint_every = cfg.num("train.checkpoint_every");
    r.from_scratch = cfg.num("train.from_scratch");
    r.validate()?;
    Ok(r)
}

pub fn loss_csv(log: &[LossRecord]) -> String {
    let mut out = String::from("step,loss,lr\n");
    for rec in log {
        let _ = writeln!(out, "{},{},{}", rec.step, rec.loss, rec.lr);
    }
    out
}

/// Positive-count guard for step knobs the core treats as shape inputs.
pub fn positive(cfg: &Config, key: &str) -> Result<usize> {
    let v: usize = cfg.num(key);
    if v == 0 {
        return Err(Error::Config(format!("{key} must be at least 1")));
    }
    Ok(v)
}

/// Lower median; even-sized inputs average the two middle values.
pub fn median(values: &[f64]) -> f64 {
    debug_assert!(!values.is_empty());
    let mut xs = values.to_vec();
    xs.sort_by(|a, b| a.partial_cmp(b).expect("finite metric values"));
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recipe_reads_the_train_section() {
        let cfg = Config::parse_text(
            "[train]\nalgorithm = alg2_plain\nrho = 0.1\nsteps = 7\nbatch_size = 3\n\
             schedule = cosine\nweighting = logit_normal\nlogit_location = 0.5\n\
             time_shift = 3\nlr = 0.001\n",
        )
        .unwrap();
        let r = train_recipe(&cfg, 42).unwrap();
        assert_eq!(r.algorithm, Algorithm::Alg2Plain);
        assert_eq!(r.coupling, CouplingStrategy::Independent);
        assert_eq!(r.steps, 7);
        assert_eq!(r.batch_size, 3);
        assert_eq!(r.base_lr, 0.001);
        assert_eq!(r.seed, 42);
        assert_eq!(r.sampler.shift(), 3.0);
    }

    #[test]
    fn coupling_mismatch_is_rejected_up_front() {
        let cfg = Config::parse_text("[train]\nalgorithm = alg1_oc_ti\ncoupling = independent\n")
            .unwrap();
        let err = train_recipe(&cfg, 0).unwrap_err().to_string();
        assert!(err.contains("requires coupling"), "{err}");
    }

    #[test]
    fn bad_enum_values_name_the_key_domain() {
        let cfg = Config::parse_text("[train]\nweighting = cosine\n").unwrap();
        assert!(timestep_sampler(&cfg).is_err());
        let cfg = Config::parse_text("[train]\ninversion_order = 3\n").unwrap();
        assert!(inversion_order(&cfg).is_err());
    }

    #[test]
    fn median_conventions() {
        assert_eq!(median(&[3.0]), 3.0);
        assert_eq!(median(&[1.0, 2.0, 9.0]), 2.0);
        assert_eq!(median(&[1.0, 3.0]), 2.0);
    }
}
