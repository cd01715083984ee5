//! Model checkpoints and the per-pair inversion cache.
//!
//! A checkpoint is a short text header (architecture, step, recipe hash)
//! followed by `---` and the layer tensors as binary records, weights and
//! biases interleaved in layer order.

use std::collections::HashMap;
use std::io::Cursor;
use std::path::{Path, PathBuf};

use crate::datagen::chunks::ChunkPair;
use crate::error::{Error, Result};
use crate::flow::invert::{invert_target, InversionOrder};
use crate::numerics::io::{load_tensor, read_tensor, save_tensor, write_tensor};
use crate::numerics::net::{Layer, VectorFieldNet};
use crate::numerics::rng::fnv1a64;
use crate::numerics::tensor::Tensor;

const HEADER_TAG: &str = "FC2S-CKPT v1";
const SEPARATOR: &[u8] = b"---\n";

#[derive(Debug, Clone)]
pub struct Checkpoint {
    pub net: VectorFieldNet,
    pub step: u64,
    pub recipe_hash: u64,
}

pub fn save_checkpoint(
    path: &Path,
    net: &VectorFieldNet,
    step: u64,
    recipe_hash: u64,
) -> Result<()> {
    let widths: Vec<String> = net.widths().iter().map(|w| w.to_string()).collect();
    let mut bytes = format!(
        "{HEADER_TAG}\nwidths\t{}\ntime_embed\t{}\nstep\t{step}\nrecipe\t{recipe_hash:016x}\n",
        widths.join("\t"),
        net.time_embed_width()
    )
    .into_bytes();
    bytes.extend_from_slice(SEPARATOR);
    for layer in net.layers() {
        write_tensor(&mut bytes, &layer.weight)?;
        write_tensor(&mut bytes, &layer.bias)?;
    }
    std::fs::write(path, bytes)?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint> {
    let bytes = std::fs::read(path)?;
    let sep = bytes
        .windows(SEPARATOR.len())
        .position(|w| w == SEPARATOR)
        .ok_or_else(|| Error::Format("checkpoint has no header separator".into()))?;
    let header = std::str::from_utf8(&bytes[..sep])
        .map_err(|_| Error::Format("checkpoint header is not UTF-8".into()))?;
    let mut lines = header.lines();
    if lines.next() != Some(HEADER_TAG) {
        return Err(Error::Format("unrecognized checkpoint tag".into()));
    }
    let mut widths: Option<Vec<usize>> = None;
    let mut time_embed: Option<usize> = None;
    let mut step: Option<u64> = None;
    let mut recipe_hash: Option<u64> = None;
    for line in lines {
        let mut parts = line.split('\t');
        let key = parts.next().unwrap_or("");
        let rest: Vec<&str> = parts.collect();
        let bad = |what: &str| Error::Format(format!("checkpoint header: bad {what} line"));
        match key {
            "widths" => {
                widths = Some(
                    rest.iter()
                        .map(|s| s.parse::<usize>().map_err(|_| bad("widths")))
                        .collect::<Result<_>>()?,
                );
            }
            "time_embed" => {
                time_embed =
                    Some(rest.first().and_then(|s| s.parse().ok()).ok_or_else(|| bad("time_embed"))?);
            }
            "step" => {
                step = Some(rest.first().and_then(|s| s.parse().ok()).ok_or_else(|| bad("step"))?);
            }
            "recipe" => {
                recipe_hash = Some(
                    rest.first()
                        .and_then(|s| u64::from_str_radix(s, 16).ok())
                        .ok_or_else(|| bad("recipe"))?,
                );
            }
            other => {
                return Err(Error::Format(format!(
                    "checkpoint header: unknown key '{other}'"
                )));
            }
        }
    }
    let widths = widths.ok_or_else(|| Error::Format("checkpoint header missing widths".into()))?;
    let time_embed =
        time_embed.ok_or_else(|| Error::Format("checkpoint header missing time_embed".into()))?;
    let step = step.ok_or_else(|| Error::Format("checkpoint header missing step".into()))?;
    let recipe_hash =
        recipe_hash.ok_or_else(|| Error::Format("checkpoint header missing recipe".into()))?;

    let mut cursor = Cursor::new(&bytes[sep + SEPARATOR.len()..]);
    let n_layers = widths.len().saturating_sub(1);
    let mut layers = Vec::with_capacity(n_layers);
    for _ in 0..n_layers {
        let weight = read_tensor(&mut cursor)?;
        let bias = read_tensor(&mut cursor)?;
        layers.push(Layer { weight, bias });
    }
    if (cursor.position() as usize) < cursor.get_ref().len() {
        return Err(Error::Format("checkpoint has trailing bytes".into()));
    }
    let net = VectorFieldNet::from_layers(layers, time_embed)?;
    if net.widths() != widths.as_slice() {
        return Err(Error::Format(format!(
            "checkpoint widths {:?} disagree with stored tensors {:?}",
            widths,
            net.widths()
        )));
    }
    Ok(Checkpoint {
        net,
        step,
        recipe_hash,
    })
}

/// Inverted latents are loop-invariant under a frozen net, so each pair is
/// inverted once and reused. Keys cover the net parameters, the pair
/// identity, and the inversion settings; entries optionally persist to a
/// directory so repeated runs skip the work entirely.
pub struct InversionCache {
    dir: Option<PathBuf>,
    map: HashMap<u64, Tensor>,
}

impl InversionCache {
    pub fn in_memory() -> Self {
        Self {
            dir: None,
            map: HashMap::new(),
        }
    }

    pub fn on_disk(dir: PathBuf) -> Result<Self> {
        std::fs::create_dir_all(&dir)?;
        Ok(Self {
            dir: Some(dir),
            map: HashMap::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    fn key(
        net: &VectorFieldNet,
        pair: &ChunkPair,
        steps: usize,
        order: InversionOrder,
        r: f64,
    ) -> u64 {
        let ord = match order {
            InversionOrder::First => 1,
            InversionOrder::Second => 2,
        };
        let text = format!(
            "{:016x}:{}:{}:{steps}:{ord}:{:016x}",
            net.param_hash(),
            pair.video,
            pair.pair_index,
            r.to_bits()
        );
        fnv1a64(text.as_bytes())
    }

    pub fn get_or_compute(
        &mut self,
        net: &VectorFieldNet,
        pair: &ChunkPair,
        steps: usize,
        order: InversionOrder,
        r: f64,
    ) -> Result<Tensor> {
        let key = Self::key(net, pair, steps, order, r);
        if let Some(hit) = self.map.get(&key) {
            return Ok(hit.clone());
        }
        let path = self
            .dir
            .as_ref()
            .map(|d| d.join(format!("inv_{key:016x}.fc2s")));
        if let Some(p) = &path {
            if p.exists() {
                let t = load_tensor(p)?;
                self.map.insert(key, t.clone());
                return Ok(t);
            }
        }
        let inverted =
            invert_target(net, &pair.x1_flat(), steps, order, r).map_err(|e| match e {
                Error::Divergence { step, context } => Error::Divergence {
                    step,
                    context: format!(
                        "inverting video {} pair {}: {context}",
                        pair.video, pair.pair_index
                    ),
                },
                other => other,
            })?;
        if let Some(p) = &path {
            save_tensor(p, &inverted)?;
        }
        self.map.insert(key, inverted.clone());
        Ok(inverted)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::net::NetConfig;
    use crate::numerics::rng::Rng;

    fn small_net(seed: u64) -> VectorFieldNet {
        let mut rng = Rng::new(seed);
        NetConfig {
            hidden: vec![5, 4],
            time_embed_width: 4,
        }
        .build(3, 3, &mut rng)
        .unwrap()
    }

    #[test]
    fn checkpoint_round_trips_bit_exactly() {
        let net = small_net(42);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.ckpt");
        save_checkpoint(&path, &net, 1234, 0xDEADBEEF).unwrap();
        let loaded = load_checkpoint(&path).unwrap();
        assert_eq!(loaded.step, 1234);
        assert_eq!(loaded.recipe_hash, 0xDEADBEEF);
        assert_eq!(loaded.net.widths(), net.widths());
        assert_eq!(loaded.net.time_embed_width(), net.time_embed_width());
        assert_eq!(loaded.net.param_hash(), net.param_hash());
        for (a, b) in loaded.net.layers().iter().zip(net.layers()) {
            assert_eq!(a.weight.data(), b.weight.data());
            assert_eq!(a.bias.data(), b.bias.data());
        }
    }

    #[test]
    fn corrupt_checkpoints_are_rejected() {
        let net = small_net(7);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.ckpt");
        save_checkpoint(&path, &net, 1, 2).unwrap();
        let good = std::fs::read(&path).unwrap();

        // Wrong tag.
        let mut bad = good.clone();
        bad[0] = b'X';
        std::fs::write(&path, &bad).unwrap();
        assert!(load_checkpoint(&path).is_err());

        // Truncated payload.
        std::fs::write(&path, &good[..good.len() - 9]).unwrap();
        assert!(load_checkpoint(&path).is_err());

        // Trailing bytes.
        let mut long = good.clone();
        long.extend_from_slice(b"junk");
        std::fs::write(&path, &long).unwrap();
        assert!(load_checkpoint(&path).is_err());
    }

    fn toy_pair(seed: u64) -> ChunkPair {
        let mut rng = Rng::new(seed);
        ChunkPair {
            video: 3,
            pair_index: 1,
            start_frame: 2,
            x0: rng.normal_tensor(vec![1, 1, 3]),
            x1: rng.normal_tensor(vec![1, 1, 3]),
        }
    }

    #[test]
    fn cache_hits_memory_then_disk() {
        let net = small_net(9);
        let pair = toy_pair(5);
        let dir = tempfile::tempdir().unwrap();
        let mut cache = InversionCache::on_disk(dir.path().to_path_buf()).unwrap();
        let first = cache
            .get_or_compute(&net, &pair, 10, InversionOrder::Second, 0.5)
            .unwrap();
        assert_eq!(cache.len(), 1);

        // Memory hit: deleting the disk entry must not matter.
        let files: Vec<_> = std::fs::read_dir(dir.path())
            .unwrap()
            .map(|e| e.unwrap().path())
            .collect();
        assert_eq!(files.len(), 1);
        std::fs::remove_file(&files[0]).unwrap();
        let second = cache
            .get_or_compute(&net, &pair, 10, InversionOrder::Second, 0.5)
            .unwrap();
        assert_eq!(first.data(), second.data());

        // Disk hit: a fresh cache reloads the persisted tensor bit-exactly.
        let mut warm = InversionCache::on_disk(dir.path().to_path_buf()).unwrap();
        save_tensor(&files[0], &first).unwrap();
        let third = warm
            .get_or_compute(&net, &pair, 10, InversionOrder::Second, 0.5)
            .unwrap();
        assert_eq!(first.data(), third.data());
    }

    #[test]
    fn cache_key_separates_nets_and_settings() {
        let net_a = small_net(1);
        let net_b = small_net(2);
        let pair = toy_pair(8);
        let mut cache = InversionCache::in_memory();
        cache
            .get_or_compute(&net_a, &pair, 10, InversionOrder::Second, 0.5)
            .unwrap();
        cache
            .get_or_compute(&net_b, &pair, 10, InversionOrder::Second, 0.5)
            .unwrap();
        cache
            .get_or_compute(&net_a, &pair, 20, InversionOrder::Second, 0.5)
            .unwrap();
        cache
            .get_or_compute(&net_a, &pair, 10, InversionOrder::First, 0.5)
            .unwrap();
        assert_eq!(cache.len(), 4, "each (net, settings) combination is distinct");
    }
}
