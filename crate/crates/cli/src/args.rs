//! Command-line parsing. One subcommand, three flags, and for `verify` an
//! optional positional run directory.

use std::path::PathBuf;

use chunkflow_core::error::{Error, Result};

use crate::config;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    GenData,
    Pretrain,
    Finetune,
    Sample,
    Invert,
    OtPlan,
    Evaluate,
    MemFit,
    Verify,
}

impl Command {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "gen-data" => Ok(Self::GenData),
            "pretrain" => Ok(Self::Pretrain),
            "finetune" => Ok(Self::Finetune),
            "sample" => Ok(Self::Sample),
            "invert" => Ok(Self::Invert),
            "otplan" => Ok(Self::OtPlan),
            "evaluate" => Ok(Self::Evaluate),
            "memfit" => Ok(Self::MemFit),
            "verify" => Ok(Self::Verify),
            other => Err(Error::Config(format!(
                "unknown subcommand '{other}'; run with --help for usage"
            ))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::GenData => "gen-data",
            Self::Pretrain => "pretrain",
            Self::Finetune => "finetune",
            Self::Sample => "sample",
            Self::Invert => "invert",
            Self::OtPlan => "otplan",
            Self::Evaluate => "evaluate",
            Self::MemFit => "memfit",
            Self::Verify => "verify",
        }
    }
}

#[derive(Debug, Clone)]
pub struct CliArgs {
    pub command: Command,
    pub config: PathBuf,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    /// Positional run directory, `verify` only.
    pub target: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub enum Invocation {
    Help,
    Run(CliArgs),
}

pub fn parse(args: &[String]) -> Result<Invocation> {
    if args.is_empty() {
        return Err(Error::Config("missing subcommand; run with --help for usage".into()));
    }
    if args[0] == "--help" || args[0] == "-h" || args[0] == "help" {
        return Ok(Invocation::Help);
    }
    let command = Command::parse(&args[0])?;
    let mut config: Option<PathBuf> = None;
    let mut seed: Option<u64> = None;
    let mut out: Option<PathBuf> = None;
    let mut target: Option<PathBuf> = None;

    let mut i = 1;
    let value_of = |i: &mut usize, flag: &str| -> Result<String> {
        *i += 1;
        args.get(*i)
            .cloned()
            .ok_or_else(|| Error::Config(format!("{flag} needs a value")))
    };
    while i < args.len() {
        match args[i].as_str() {
            "--help" | "-h" => return Ok(Invocation::Help),
            "--config" => config = Some(PathBuf::from(value_of(&mut i, "--config")?)),
            "--seed" => {
                let v = value_of(&mut i, "--seed")?;
                seed = Some(v.parse().map_err(|_| {
                    Error::Config(format!("--seed needs an unsigned integer, got '{v}'"))
                })?);
            }
            "--out" => out = Some(PathBuf::from(value_of(&mut i, "--out")?)),
            flag if flag.starts_with('-') => {
                return Err(Error::Config(format!("unknown flag '{flag}'")));
            }
            positional => {
                if command != Command::Verify {
                    return Err(Error::Config(format!(
                        "unexpected argument '{positional}' (only verify takes a run directory)"
                    )));
                }
                if target.is_some() {
                    return Err(Error::Config("verify takes at most one run directory".into()));
                }
                target = Some(PathBuf::from(positional));
            }
        }
        i += 1;
    }
    let config = config.ok_or_else(|| Error::Config("--config PATH is required".into()))?;
    Ok(Invocation::Run(CliArgs {
        command,
        config,
        seed,
        out,
        target,
    }))
}

pub fn usage() -> String {
    let mut s = String::from(
        "chunkflow: train and probe flow-matching models over consecutive video chunks\n\
         \n\
         usage: chunkflow <command> --config PATH [--seed U64] [--out DIR]\n\
         \n\
         commands:\n\
         \x20 gen-data   render the synthetic video dataset and its manifests\n\
         \x20 pretrain   flow matching from noise to succeeding chunks\n\
         \x20 finetune   chunk-to-chunk training per the configured algorithm\n\
         \x20 sample     integrate continuations from a stored chunk\n\
         \x20 invert     backward-ODE inversion of a stored target chunk\n\
         \x20 otplan     exact transport plan over a chunk subset, with heatmap\n\
         \x20 evaluate   step-count sweep, rollout errors, per-class seam metrics\n\
         \x20 memfit     activation-memory scaling fit over a volume grid\n\
         \x20 verify     re-hash run artifacts against their manifest\n\
         \n\
         flags:\n\
         \x20 --config PATH  run configuration (required)\n\
         \x20 --seed U64     override the config seed\n\
         \x20 --out DIR      run-directory root (default: runs)\n\
         \n\
         verify also accepts one positional run directory; without it every\n\
         run under --out plus the dataset directory is checked.\n\
         \n\
         exit codes: 0 ok, 2 configuration error, 3 numeric divergence,\n\
         4 infeasible transport mask, 1 anything else.\n\
         \n\
         config keys (key = value under [section] headers, '#' comments):\n",
    );
    s.push_str(&config::key_table());
    s
}
