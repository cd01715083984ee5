//! Temporary tuning probes; not part of the shipped suite.

use chunkflow_core::datagen::blob::gen_blob_video_sigma;
use chunkflow_core::datagen::{chunk_video, CameraClass, ChunkPair, MotionClass};
use chunkflow_core::error::Result;
use chunkflow_core::flow::checkpoint::InversionCache;
use chunkflow_core::flow::train::{
    pretrain_noise_to_data, train, Algorithm, PretrainRecipe, TrainRecipe,
};
use chunkflow_core::flow::Sigma0;
use chunkflow_core::metrics::report::{nfe_sweep, rollout_errors};
use chunkflow_core::numerics::net::NetConfig;
use chunkflow_core::numerics::optim::ScheduleKind;
use chunkflow_core::numerics::rng::Rng;
use chunkflow_core::numerics::tensor::Tensor;

const SIDE: usize = 16;
const SIGMA: f64 = 1.28;
const FRAMES: usize = 48;
const CHUNK_LEN: usize = 4;

fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

#[allow(clippy::type_complexity)]
fn dataset(per_class: usize, eval_per_class: usize) -> Result<(
    Vec<ChunkPair>,
    Vec<ChunkPair>,
    Vec<(MotionClass, CameraClass)>,
)> {
    let root = Rng::new(7).fork("data");
    let mut train_pairs = Vec::new();
    let mut eval_pairs = Vec::new();
    let mut eval_class = Vec::new();
    let mut video_id = 0u32;
    for (motion, camera) in [
        (MotionClass::Slow, CameraClass::Static),
        (MotionClass::Slow, CameraClass::PanTilt),
    ] {
        for slot in 0..per_class {
            let seed = root.fork_index(video_id as u64).seed();
            let video = gen_blob_video_sigma(seed, FRAMES, SIDE, SIDE, motion, camera, SIGMA)?;
            let pairs = chunk_video(video_id, &video.frames, CHUNK_LEN, &[])?;
            if slot >= per_class - eval_per_class {
                eval_class.extend(pairs.iter().map(|_| (motion, camera)));
                eval_pairs.extend(pairs);
            } else {
                train_pairs.extend(pairs);
            }
            video_id += 1;
        }
    }
    Ok((train_pairs, eval_pairs, eval_class))
}

fn growth_nfe(
    net: &chunkflow_core::numerics::net::VectorFieldNet,
    eval_pairs: &[ChunkPair],
    eval_class: &[(MotionClass, CameraClass)],
    nfe: usize,
) -> Result<(Vec<f64>, f64)> {
    let mut videos: Vec<u32> = Vec::new();
    for (pair, class) in eval_pairs.iter().zip(eval_class) {
        if *class == (MotionClass::Slow, CameraClass::Static) && !videos.contains(&pair.video) {
            videos.push(pair.video);
        }
    }
    let mut per_chunk: Vec<Vec<f64>> = vec![Vec::new(); 4];
    for &v in &videos {
        let mut pairs: Vec<&ChunkPair> = eval_pairs.iter().filter(|p| p.video == v).collect();
        pairs.sort_by_key(|p| p.pair_index);
        let mut chain = Vec::new();
        for p in pairs {
            chain.push(p.x0.clone());
            chain.push(p.x1.clone());
        }
        chain.truncate(5);
        let errs = rollout_errors(net, &chain, nfe)?;
        for (j, e) in errs.iter().enumerate() {
            per_chunk[j].push(*e);
        }
    }
    let med: Vec<f64> = per_chunk.iter().map(|v| median(v)).collect();
    let g = med[3] / med[0];
    Ok((med, g))
}

#[test]
fn s_rollout_grid() -> Result<()> {
    // Battery: training-class restriction, augmentation strength, net choice, NFE.
    let (train_pairs, eval_pairs, eval_class) = dataset(25, 5)?;
    let static_train: Vec<ChunkPair> = train_pairs
        .iter()
        .filter(|p| p.video < 20)
        .cloned()
        .collect();

    // Identity-map control: gen_k == x0 forever; plateau over decorrelation.
    {
        let mut per_chunk: Vec<Vec<f64>> = vec![Vec::new(); 4];
        let mut videos: Vec<u32> = Vec::new();
        for (pair, class) in eval_pairs.iter().zip(&eval_class) {
            if *class == (MotionClass::Slow, CameraClass::Static) && !videos.contains(&pair.video) {
                videos.push(pair.video);
            }
        }
        for &v in &videos {
            let mut pairs: Vec<&ChunkPair> = eval_pairs.iter().filter(|p| p.video == v).collect();
            pairs.sort_by_key(|p| p.pair_index);
            let mut chain = Vec::new();
            for p in pairs {
                chain.push(p.x0.clone());
                chain.push(p.x1.clone());
            }
            chain.truncate(5);
            let base = chain[0].clone();
            let d = base.data().len() as f64;
            for k in 1..chain.len() {
                per_chunk[k - 1].push(base.sub(&chain[k])?.norm_sq() / d);
            }
        }
        let med: Vec<f64> = per_chunk.iter().map(|c| median(c)).collect();
        println!(
            "identity control: growth {:.2} ({:?})",
            med[3] / med[0],
            med.iter().map(|m| format!("{m:.3e}")).collect::<Vec<_>>()
        );
    }
    println!(
        "train {} (static-only {}) eval {}",
        train_pairs.len(),
        static_train.len(),
        eval_pairs.len()
    );
    let cfg = NetConfig { hidden: vec![64, 64], time_embed_width: 8 };

    let pairs: &[ChunkPair] = &static_train;
    let targets: Vec<Tensor> = pairs.iter().map(|p| p.x1_flat()).collect();
    let d = targets[0].data().len();
    let perdim_std = {
        let mut mean = vec![0.0f64; d];
        for t in &targets {
            for (m, v) in mean.iter_mut().zip(t.data()) {
                *m += v;
            }
        }
        let n = targets.len() as f64;
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0f64; d];
        for t in &targets {
            for ((v, m), x) in var.iter_mut().zip(&mean).zip(t.data()) {
                *v += (x - m) * (x - m);
            }
        }
        var.iter_mut().for_each(|v| *v = (*v / n).sqrt().max(1e-2));
        Tensor::from_vec(var)?
    };

    for (label, factor, rho, steps, seed) in [
        ("perdim6.0 rho.95 s3k seed900", 6.0, 0.95, 3000u64, 900u64),
        ("perdim6.0 rho.95 s3k seed901", 6.0, 0.95, 3000, 901),
        ("perdim6.0 rho.95 s3k seed902", 6.0, 0.95, 3000, 902),
        ("perdim8.0 rho.95 s3k seed900", 8.0, 0.95, 3000, 900),
        ("perdim8.0 rho.95 s3k seed901", 8.0, 0.95, 3000, 901),
        ("perdim8.0 rho.95 s3k seed902", 8.0, 0.95, 3000, 902),
    ] {
        let mut pre = PretrainRecipe::new(cfg.clone(), seed);
        pre.steps = 2000;
        let pretrained = pretrain_noise_to_data(&targets, &pre)?.net;
        let mut r = TrainRecipe::new(Algorithm::Alg1OcTi, seed);
        r.steps = steps;
        r.rho = rho;
        r.sigma0 = Sigma0::PerDim(perdim_std.scale(factor));
        let mut cache = InversionCache::in_memory();
        let net = train(&r, pairs, pretrained.clone(), &mut cache, |_, _| Ok(()))?.net;
        let (med, g) = growth_nfe(&net, &eval_pairs, &eval_class, 8)?;
        let meds: Vec<String> = med.iter().map(|m| format!("{m:.3e}")).collect();
        println!("{label}: growth {g:.2} ({meds:?})");
    }
    Ok(())
}

#[test]
fn s_c06_seeds() -> Result<()> {
    let (train_pairs, eval_pairs, _) = dataset(8, 3)?;
    println!("train {} eval {}", train_pairs.len(), eval_pairs.len());
    let targets: Vec<Tensor> = train_pairs.iter().map(|p| p.x1_flat()).collect();
    let cfg = NetConfig { hidden: vec![64, 64], time_embed_width: 8 };
    for s in 0..3u64 {
        let seed = 100 + s;
        let mut pre = PretrainRecipe::new(cfg.clone(), seed);
        pre.steps = 2000;
        let pretrained = pretrain_noise_to_data(&targets, &pre)?.net;
        let mut ratios = Vec::new();
        for alg in [Algorithm::Alg1OcTi, Algorithm::Alg2Plain] {
            let mut r = TrainRecipe::new(alg, seed);
            r.steps = 2000;
            let mut cache = InversionCache::in_memory();
            let out = train(&r, &train_pairs, pretrained.clone(), &mut cache, |_, _| Ok(()))?;
            let rows = nfe_sweep(&out.net, &eval_pairs, &[5, 40])?;
            ratios.push(rows[0].endpoint_mse / rows[1].endpoint_mse);
        }
        println!(
            "seed {seed}: alg1 ratio {:.4} (dev {:.4}), alg2 ratio {:.4} (dev {:.4}) -> {}",
            ratios[0],
            (ratios[0] - 1.0).abs(),
            ratios[1],
            (ratios[1] - 1.0).abs(),
            if (ratios[1] - 1.0).abs() > (ratios[0] - 1.0).abs() { "ok" } else { "LOSS" }
        );
    }
    Ok(())
}
