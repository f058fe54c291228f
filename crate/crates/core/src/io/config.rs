//! Line-based `key = value` configuration files.
//!
//! Blank lines and lines starting with `#` are ignored. Keys are dotted
//! (`encoder.hidden`, `train.epochs`, ...). Lists are comma separated.
//! Unknown keys are an error so typos do not silently fall back to defaults.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::{DecoderGraph, FeatureLoss, ModelConfig, Propagation};
use crate::train::TrainConfig;

#[derive(Clone, Debug, Default)]
pub struct ConfigMap {
    origin: PathBuf,
    entries: BTreeMap<String, (String, usize)>,
}

impl ConfigMap {
    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(origin, i + 1, "expected `key = value`"))?;
            let key = key.trim();
            if key.is_empty() {
                return Err(Error::parse(origin, i + 1, "empty key"));
            }
            if entries
                .insert(key.to_string(), (value.trim().to_string(), i + 1))
                .is_some()
            {
                return Err(Error::parse(origin, i + 1, format!("duplicate key `{key}`")));
            }
        }
        Ok(Self {
            origin: origin.to_path_buf(),
            entries,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&super::read_text(path)?, path)
    }

    /// Removes and parses `key`.
    pub fn take<T: FromStr>(&mut self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.entries.remove(key) {
            None => Ok(None),
            Some((v, line)) => v
                .parse()
                .map(Some)
                .map_err(|e: T::Err| Error::parse(&self.origin, line, format!("{key}: {e}"))),
        }
    }

    pub fn take_list<T: FromStr>(&mut self, key: &str) -> Result<Option<Vec<T>>>
    where
        T::Err: std::fmt::Display,
    {
        match self.entries.remove(key) {
            None => Ok(None),
            Some((v, line)) => v
                .split(',')
                .map(|s| s.trim())
                .filter(|s| !s.is_empty())
                .map(|s| {
                    s.parse()
                        .map_err(|e: T::Err| Error::parse(&self.origin, line, format!("{key}: {e}")))
                })
                .collect::<Result<Vec<T>>>()
                .map(Some),
        }
    }

    pub fn set<T: FromStr>(&mut self, key: &str, slot: &mut T) -> Result<()>
    where
        T::Err: std::fmt::Display,
    {
        if let Some(v) = self.take(key)? {
            *slot = v;
        }
        Ok(())
    }

    /// Fails on any key nobody consumed.
    pub fn finish(self) -> Result<()> {
        match self.entries.into_iter().next() {
            None => Ok(()),
            Some((key, (_, line))) => Err(Error::parse(self.origin, line, format!("unknown key `{key}`"))),
        }
    }
}

impl FromStr for Propagation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "renorm" | "renorm_adj" => Ok(Self::RenormAdj),
            "left" | "left_norm" | "left_norm_adj" => Ok(Self::LeftNormAdj),
            other => Err(Error::InvalidArgument(format!("unknown propagation `{other}`"))),
        }
    }
}

impl FromStr for DecoderGraph {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "original" => Ok(Self::Original),
            "unpooled" => Ok(Self::Unpooled),
            other => Err(Error::InvalidArgument(format!("unknown decoder graph `{other}`"))),
        }
    }
}

impl FromStr for FeatureLoss {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mse" => Ok(Self::Mse),
            "bce" | "cross_entropy" => Ok(Self::Bce),
            other => Err(Error::InvalidArgument(format!("unknown feature loss `{other}`"))),
        }
    }
}

/// Applies `encoder.*`, `pool.*`, `decoder.*` and `loss.*` keys. The encoder
/// input dimension comes from the data, so `encoder.hidden` lists only the
/// layer output sizes.
pub fn apply_model(map: &mut ConfigMap, cfg: &mut ModelConfig) -> Result<()> {
    if let Some(hidden) = map.take_list::<usize>("encoder.hidden")? {
        let input = cfg.encoder.layer_dims.first().copied().unwrap_or(0);
        cfg.encoder.layer_dims = std::iter::once(input).chain(hidden).collect();
    }
    map.set("encoder.propagation", &mut cfg.encoder.propagation)?;
    map.set("encoder.stack", &mut cfg.encoder.stack_layer_outputs)?;
    let enabled: Option<bool> = map.take("pool.enabled")?;
    let mut pool = cfg.pool.unwrap_or_default();
    map.set("pool.clusters", &mut pool.clusters)?;
    map.set("pool.attention_hidden", &mut pool.attention_hidden)?;
    cfg.pool = match enabled {
        Some(false) => None,
        Some(true) => Some(pool),
        None => cfg.pool.map(|_| pool),
    };
    let d = &mut cfg.decoder;
    map.set("decoder.variant", &mut d.variant)?;
    map.set("decoder.wavelet_order", &mut d.wavelet_order)?;
    map.set("decoder.scale", &mut d.scale)?;
    map.set("decoder.inverse_order", &mut d.inverse_order)?;
    map.set("decoder.hidden", &mut d.hidden)?;
    map.set("decoder.graph", &mut d.decoder_graph)?;
    map.set("loss.structure", &mut cfg.loss.structure)?;
    map.set("loss.feature", &mut cfg.loss.feature)?;
    map.set("loss.feature_kind", &mut cfg.loss.feature_loss)?;
    Ok(())
}

/// Applies `train.*` keys.
pub fn apply_train(map: &mut ConfigMap, tc: &mut TrainConfig) -> Result<()> {
    map.set("train.epochs", &mut tc.epochs)?;
    map.set("train.batch_size", &mut tc.batch_size)?;
    map.set("train.learning_rate", &mut tc.learning_rate)?;
    map.set("train.seed", &mut tc.seed)?;
    map.set("train.shuffle", &mut tc.shuffle)?;
    map.set("train.checkpoint_every", &mut tc.checkpoint_every)?;
    if let Some(dir) = map.take::<String>("train.checkpoint_dir")? {
        tc.checkpoint_dir = Some(PathBuf::from(dir));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::DecoderVariant;
    use crate::train::Task;

    const SAMPLE: &str = "\
# graph-level defaults
encoder.hidden = 64, 16
encoder.propagation = left
pool.clusters = 16
decoder.variant = gcn_dec
decoder.graph = unpooled
loss.feature_kind = bce
train.epochs = 15
train.learning_rate = 0.005
";

    #[test]
    fn parses_and_applies() {
        let mut map = ConfigMap::parse(SAMPLE, Path::new("cfg")).unwrap();
        let mut cfg = ModelConfig::embedding_defaults(7);
        let mut tc = TrainConfig::new(Task::Embed);
        apply_model(&mut map, &mut cfg).unwrap();
        apply_train(&mut map, &mut tc).unwrap();
        map.finish().unwrap();
        assert_eq!(cfg.encoder.layer_dims, vec![7, 64, 16]);
        assert_eq!(cfg.encoder.propagation, Propagation::LeftNormAdj);
        assert_eq!(cfg.pool.unwrap().clusters, 16);
        assert_eq!(cfg.pool.unwrap().attention_hidden, 128);
        assert_eq!(cfg.decoder.variant, DecoderVariant::Gcn);
        assert_eq!(cfg.decoder.decoder_graph, DecoderGraph::Unpooled);
        assert_eq!(cfg.loss.feature_loss, FeatureLoss::Bce);
        assert_eq!((tc.epochs, tc.learning_rate), (15, 0.005));
    }

    #[test]
    fn pool_can_be_disabled() {
        let mut map = ConfigMap::parse("pool.enabled = false\n", Path::new("cfg")).unwrap();
        let mut cfg = ModelConfig::embedding_defaults(3);
        apply_model(&mut map, &mut cfg).unwrap();
        assert!(cfg.pool.is_none());
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = ConfigMap::parse("a = 1\nnot a pair\n", Path::new("cfg")).unwrap_err();
        assert!(err.to_string().contains("cfg:2"), "{err}");
        assert!(ConfigMap::parse("a = 1\na = 2\n", Path::new("cfg")).is_err());

        let mut map = ConfigMap::parse("train.epochs = many\n", Path::new("cfg")).unwrap();
        let mut tc = TrainConfig::new(Task::Embed);
        assert!(apply_train(&mut map, &mut tc).is_err());

        let map = ConfigMap::parse("train.epoch = 3\n", Path::new("cfg")).unwrap();
        let err = map.finish().unwrap_err();
        assert!(err.to_string().contains("unknown key `train.epoch`"));
    }
}
