//! Training loops: the three chunk-to-chunk algorithms, noise-to-data
//! pretraining, and the wide conditional baseline.
//!
//! Determinism contract: every random decision comes from one of four
//! streams forked off the recipe seed ("batch", "t", "ti", "noise"), each
//! consumed only by its own concern. In particular the target-inversion
//! coin lives on its own stream, so a run with rho = 0 is bit-identical to
//! the no-inversion algorithm under the same seed.

use std::collections::HashMap;

use crate::coupling::batch::{draw_coupled_batch, BatchPair, CouplingStrategy};
use crate::coupling::solve::OtOptions;
use crate::datagen::chunks::ChunkPair;
use crate::error::{Error, Result};
use crate::flow::checkpoint::InversionCache;
use crate::flow::codec::Sigma0;
use crate::flow::invert::InversionOrder;
use crate::flow::loss::{cfm_loss_batch, conditional_cfm_loss_batch};
use crate::flow::sampler::TimestepSampler;
use crate::numerics::net::{NetConfig, VectorFieldNet};
use crate::numerics::optim::{lr_schedule, AdamW, AdamWConfig, ScheduleKind};
use crate::numerics::rng::{fnv1a64, Rng};
use crate::numerics::tensor::Tensor;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    /// Inherent couplings with probabilistic target inversion.
    Alg1OcTi,
    /// Independent couplings, no inversion.
    Alg2Plain,
    /// Inherent couplings, no inversion.
    Alg3OcOnly,
    /// Wide net over concat(conditioning, noised target).
    ConventionalBaseline,
}

impl Algorithm {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "alg1_oc_ti" => Ok(Self::Alg1OcTi),
            "alg2_plain" => Ok(Self::Alg2Plain),
            "alg3_oc_only" => Ok(Self::Alg3OcOnly),
            "conventional_baseline" => Ok(Self::ConventionalBaseline),
            other => Err(Error::Config(format!(
                "unknown algorithm '{other}' \
                 (expected alg1_oc_ti|alg2_plain|alg3_oc_only|conventional_baseline)"
            ))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Alg1OcTi => "alg1_oc_ti",
            Self::Alg2Plain => "alg2_plain",
            Self::Alg3OcOnly => "alg3_oc_only",
            Self::ConventionalBaseline => "conventional_baseline",
        }
    }

    /// The coupling strategy each algorithm is defined over.
    pub fn required_coupling(self) -> CouplingStrategy {
        match self {
            Self::Alg1OcTi | Self::Alg3OcOnly | Self::ConventionalBaseline => {
                CouplingStrategy::Inherent
            }
            Self::Alg2Plain => CouplingStrategy::Independent,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainRecipe {
    pub algorithm: Algorithm,
    /// Target-inversion probability; read only by `Alg1OcTi`.
    pub rho: f64,
    pub coupling: CouplingStrategy,
    pub steps: u64,
    pub batch_size: usize,
    pub schedule: ScheduleKind,
    pub base_lr: f64,
    pub adamw: AdamWConfig,
    pub sampler: TimestepSampler,
    /// Scale of the inverted latent in the inversion branch.
    pub sigma0: Sigma0,
    pub inversion_steps: usize,
    pub inversion_order: InversionOrder,
    pub inversion_r: f64,
    pub seed: u64,
    /// Invoke the checkpoint callback every this many steps; 0 disables.
    pub checkpoint_every: u64,
    /// True when the initial net is untrained rather than pretrained.
    pub from_scratch: bool,
}

impl TrainRecipe {
    pub fn new(algorithm: Algorithm, seed: u64) -> Self {
        Self {
            algorithm,
            rho: 0.7,
            coupling: algorithm.required_coupling(),
            steps: 2000,
            batch_size: 16,
            schedule: ScheduleKind::Constant,
            base_lr: 2e-4,
            adamw: AdamWConfig::default(),
            sampler: TimestepSampler::uniform(),
            sigma0: Sigma0::Scalar(0.3),
            inversion_steps: 50,
            inversion_order: InversionOrder::Second,
            inversion_r: 0.5,
            seed,
            checkpoint_every: 0,
            from_scratch: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.rho) {
            return Err(Error::Config(format!(
                "rho must lie in [0,1], got {}",
                self.rho
            )));
        }
        let required = self.algorithm.required_coupling();
        if self.coupling != required {
            return Err(Error::Config(format!(
                "{} requires coupling = {}, got {}",
                self.algorithm.name(),
                required.name(),
                self.coupling.name()
            )));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch size must be positive".into()));
        }
        if !(self.base_lr >= 0.0) || !self.base_lr.is_finite() {
            return Err(Error::Config(format!(
                "base_lr must be finite and non-negative, got {}",
                self.base_lr
            )));
        }
        if self.inversion_steps == 0 {
            return Err(Error::Config("inversion_steps must be positive".into()));
        }
        if !(self.inversion_r > 0.0 && self.inversion_r <= 1.0) {
            return Err(Error::Config(format!(
                "inversion_r must lie in (0,1], got {}",
                self.inversion_r
            )));
        }
        self.adamw.validate()?;
        self.sampler.validate()?;
        self.sigma0.validate()
    }

    /// Stable digest of everything that shapes the trained model. The
    /// checkpoint cadence is excluded: it changes artifacts, not math.
    pub fn hash(&self) -> u64 {
        let sampler = match self.sampler {
            TimestepSampler::Uniform { shift } => format!("uniform:{:016x}", shift.to_bits()),
            TimestepSampler::LogitNormal {
                location,
                scale,
                shift,
            } => format!(
                "logit_normal:{:016x}:{:016x}:{:016x}",
                location.to_bits(),
                scale.to_bits(),
                shift.to_bits()
            ),
        };
        let sigma0 = match &self.sigma0 {
            Sigma0::Scalar(s) => format!("scalar:{:016x}", s.to_bits()),
            Sigma0::PerDim(t) => {
                let mut bytes = Vec::with_capacity(t.data().len() * 8);
                for v in t.data() {
                    bytes.extend_from_slice(&v.to_bits().to_le_bytes());
                }
                format!("perdim:{:016x}", fnv1a64(&bytes))
            }
        };
        let order = match self.inversion_order {
            InversionOrder::First => 1,
            InversionOrder::Second => 2,
        };
        let text = format!(
            "{}|{:016x}|{}|{}|{}|{}|{:016x}|{:016x}|{:016x}|{:016x}|{:016x}|{sampler}|{sigma0}|{}|{order}|{:016x}|{}|{}",
            self.algorithm.name(),
            self.rho.to_bits(),
            self.coupling.name(),
            self.steps,
            self.batch_size,
            self.schedule.name(),
            self.base_lr.to_bits(),
            self.adamw.beta1.to_bits(),
            self.adamw.beta2.to_bits(),
            self.adamw.epsilon.to_bits(),
            self.adamw.weight_decay.to_bits(),
            self.inversion_steps,
            self.inversion_r.to_bits(),
            self.seed,
            self.from_scratch
        );
        fnv1a64(text.as_bytes())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossRecord {
    pub step: u64,
    pub loss: f64,
    pub lr: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutput {
    pub net: VectorFieldNet,
    pub log: Vec<LossRecord>,
    pub warnings: Vec<String>,
}

struct Streams {
    batch: Rng,
    t: Rng,
    ti: Rng,
    noise: Rng,
}

impl Streams {
    fn new(seed: u64) -> Self {
        let root = Rng::new(seed);
        Self {
            batch: root.fork("batch"),
            t: root.fork("t"),
            ti: root.fork("ti"),
            noise: root.fork("noise"),
        }
    }
}

/// Run the recipe's algorithm over the chunk-pair dataset, starting from
/// `init`. For the inversion branch, `init` doubles as the frozen reference
/// field whose inversions are served from `cache`. `on_checkpoint` fires
/// every `checkpoint_every` steps with the step count and current net.
pub fn train<F>(
    recipe: &TrainRecipe,
    dataset: &[ChunkPair],
    init: VectorFieldNet,
    cache: &mut InversionCache,
    mut on_checkpoint: F,
) -> Result<TrainOutput>
where
    F: FnMut(u64, &VectorFieldNet) -> Result<()>,
{
    recipe.validate()?;
    if dataset.is_empty() {
        return Err(Error::Degenerate("empty chunk-pair dataset".into()));
    }
    let d = dataset[0].flat_dim();
    let want = match recipe.algorithm {
        Algorithm::ConventionalBaseline => 2 * d,
        _ => d,
    };
    if init.data_input_dim() != want || init.output_dim() != want {
        return Err(Error::Shape(format!(
            "{} expects a {want} -> {want} net over {d}-dimensional chunks, got {} -> {}",
            recipe.algorithm.name(),
            init.data_input_dim(),
            init.output_dim()
        )));
    }

    let mut warnings = Vec::new();
    if recipe.algorithm == Algorithm::Alg1OcTi && recipe.from_scratch {
        warnings.push(
            "target inversion runs against the frozen untrained initialization".to_string(),
        );
    }

    let by_id: HashMap<(u32, u32), &ChunkPair> = dataset
        .iter()
        .map(|p| ((p.video, p.pair_index), p))
        .collect();
    let frozen = init.clone();
    let mut net = init;
    let mut opt = AdamW::new(&net, recipe.adamw)?;
    let mut streams = Streams::new(recipe.seed);
    let ot_opts = OtOptions::default();
    let mut log = Vec::with_capacity(recipe.steps as usize);
    let mut warned_replacement = false;
    // Inverted latents are loop-invariant under the frozen net; this memo
    // keeps the shared cache (which re-keys on the net parameters) off the
    // per-sample hot path.
    let mut inverted: HashMap<(u32, u32), Tensor> = HashMap::new();

    for step in 0..recipe.steps {
        let lr = lr_schedule(recipe.schedule, step, recipe.steps, recipe.base_lr)?;
        let batch = draw_coupled_batch(
            recipe.coupling,
            dataset,
            &mut streams.batch,
            recipe.batch_size,
            &ot_opts,
        )?;
        if batch.with_replacement && !warned_replacement {
            warnings.push(format!(
                "batch size {} exceeds the {} stored pairs; drawing with replacement",
                recipe.batch_size,
                dataset.len()
            ));
            warned_replacement = true;
        }
        let ts: Vec<f64> = batch
            .pairs
            .iter()
            .map(|_| recipe.sampler.sample(&mut streams.t))
            .collect::<Result<_>>()?;

        let (loss, grads) = match recipe.algorithm {
            Algorithm::Alg2Plain | Algorithm::Alg3OcOnly => {
                let rows: Vec<(&Tensor, &Tensor, f64)> = batch
                    .pairs
                    .iter()
                    .zip(&ts)
                    .map(|(p, &t)| (&p.x0, &p.x1, t))
                    .collect();
                cfm_loss_batch(&net, &rows)?
            }
            Algorithm::Alg1OcTi => {
                let sources: Vec<Tensor> = batch
                    .pairs
                    .iter()
                    .map(|p| {
                        inversion_source(p, recipe, &frozen, &by_id, cache, &mut inverted, &mut streams.ti)
                    })
                    .collect::<Result<_>>()?;
                let rows: Vec<(&Tensor, &Tensor, f64)> = sources
                    .iter()
                    .zip(&batch.pairs)
                    .zip(&ts)
                    .map(|((x0, p), &t)| (x0, &p.x1, t))
                    .collect();
                cfm_loss_batch(&net, &rows)?
            }
            Algorithm::ConventionalBaseline => {
                let noises: Vec<Tensor> = batch
                    .pairs
                    .iter()
                    .map(|_| streams.noise.normal_tensor(vec![d]))
                    .collect();
                let rows: Vec<(&Tensor, &Tensor, &Tensor, f64)> = batch
                    .pairs
                    .iter()
                    .zip(&noises)
                    .zip(&ts)
                    .map(|((p, eps), &t)| (&p.x0, eps, &p.x1, t))
                    .collect();
                conditional_cfm_loss_batch(&net, &rows)?
            }
        };
        opt.apply(&mut net, &grads, lr)?;
        log.push(LossRecord { step, loss, lr });
        if recipe.checkpoint_every > 0 && (step + 1) % recipe.checkpoint_every == 0 {
            on_checkpoint(step + 1, &net)?;
        }
    }
    Ok(TrainOutput { net, log, warnings })
}

/// The inversion branch: with probability rho the source is
/// mu0 + sigma0 ⊙ invert(x1) under the frozen net, otherwise mu0 itself.
#[allow(clippy::too_many_arguments)]
fn inversion_source(
    pair: &BatchPair,
    recipe: &TrainRecipe,
    frozen: &VectorFieldNet,
    by_id: &HashMap<(u32, u32), &ChunkPair>,
    cache: &mut InversionCache,
    memo: &mut HashMap<(u32, u32), Tensor>,
    ti: &mut Rng,
) -> Result<Tensor> {
    let p = ti.uniform();
    if p >= recipe.rho {
        return Ok(pair.x0.clone());
    }
    let id = pair
        .source
        .ok_or_else(|| Error::Config("inversion needs pairs with a stored source".into()))?;
    let inverted = if let Some(hit) = memo.get(&id) {
        hit
    } else {
        let stored = by_id[&id];
        let computed = cache.get_or_compute(
            frozen,
            stored,
            recipe.inversion_steps,
            recipe.inversion_order,
            recipe.inversion_r,
        )?;
        memo.entry(id).or_insert(computed)
    };
    pair.x0.add(&recipe.sigma0.scale(inverted)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PretrainRecipe {
    pub net: NetConfig,
    pub steps: u64,
    pub batch_size: usize,
    pub schedule: ScheduleKind,
    pub base_lr: f64,
    pub adamw: AdamWConfig,
    pub sampler: TimestepSampler,
    pub seed: u64,
}

impl PretrainRecipe {
    pub fn new(net: NetConfig, seed: u64) -> Self {
        Self {
            net,
            steps: 2000,
            batch_size: 16,
            schedule: ScheduleKind::Constant,
            base_lr: 2e-4,
            adamw: AdamWConfig::default(),
            sampler: TimestepSampler::uniform(),
            seed,
        }
    }
}

/// Standard flow matching from Gaussian noise to the target pool; the
/// result stands in for a pretrained prior over succeeding chunks.
pub fn pretrain_noise_to_data(targets: &[Tensor], recipe: &PretrainRecipe) -> Result<TrainOutput> {
    if targets.is_empty() {
        return Err(Error::Degenerate("empty pretraining target pool".into()));
    }
    if recipe.batch_size == 0 {
        return Err(Error::Config("batch size must be positive".into()));
    }
    recipe.adamw.validate()?;
    recipe.sampler.validate()?;
    let d = targets[0].data().len();
    let mut streams = Streams::new(recipe.seed);
    let mut init_rng = Rng::new(recipe.seed).fork("init");
    let mut net = recipe.net.build(d, d, &mut init_rng)?;
    let mut opt = AdamW::new(&net, recipe.adamw)?;
    let mut log = Vec::with_capacity(recipe.steps as usize);

    for step in 0..recipe.steps {
        let lr = lr_schedule(recipe.schedule, step, recipe.steps, recipe.base_lr)?;
        let picks: Vec<usize> = (0..recipe.batch_size)
            .map(|_| streams.batch.below(targets.len()))
            .collect();
        let noises: Vec<Tensor> = (0..recipe.batch_size)
            .map(|_| streams.noise.normal_tensor(vec![d]))
            .collect();
        let ts: Vec<f64> = (0..recipe.batch_size)
            .map(|_| recipe.sampler.sample(&mut streams.t))
            .collect::<Result<_>>()?;
        let rows: Vec<(&Tensor, &Tensor, f64)> = picks
            .iter()
            .zip(&noises)
            .zip(&ts)
            .map(|((&i, eps), &t)| (eps, &targets[i], t))
            .collect();
        let (loss, grads) = cfm_loss_batch(&net, &rows)?;
        opt.apply(&mut net, &grads, lr)?;
        log.push(LossRecord { step, loss, lr });
    }
    Ok(TrainOutput {
        net,
        log,
        warnings: Vec::new(),
    })
}

/// Convenience runner for the comparison arm: builds the wide 2d -> 2d net
/// and trains it with the baseline recipe.
pub fn train_conventional_baseline(
    dataset: &[ChunkPair],
    net_cfg: &NetConfig,
    recipe: &TrainRecipe,
) -> Result<TrainOutput> {
    if recipe.algorithm != Algorithm::ConventionalBaseline {
        return Err(Error::Config(format!(
            "baseline runner got algorithm {}",
            recipe.algorithm.name()
        )));
    }
    if dataset.is_empty() {
        return Err(Error::Degenerate("empty chunk-pair dataset".into()));
    }
    let d = dataset[0].flat_dim();
    let mut init_rng = Rng::new(recipe.seed).fork("init");
    let init = net_cfg.build(2 * d, 2 * d, &mut init_rng)?;
    let mut cache = InversionCache::in_memory();
    train(recipe, dataset, init, &mut cache, |_, _| Ok(()))
}
