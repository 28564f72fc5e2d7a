use crate::error::{Error, Result};
use crate::model::Aggregator;

use super::loss::LossKind;

/// Training hyperparameters.
///
/// `dims` is the full layer chain including the input feature width, e.g.
/// `[f, 512]` for a single `f × 512` projection.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    /// Smoothing depth.
    pub k: usize,
    pub dims: Vec<usize>,
    pub lr: f64,
    /// Weight of the unsupervised loss.
    pub alpha: f64,
    /// Weight of the `‖θ‖²` penalty.
    pub beta: f64,
    pub epochs: usize,
    pub neg_per_node: usize,
    /// Rows per mini-batch step; `0` trains full-batch.
    pub batch_size: usize,
    pub aggregator: Aggregator,
    pub loss: LossKind,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            k: 2,
            dims: Vec::new(),
            lr: 0.001,
            alpha: 15000.0,
            beta: 5e-4,
            epochs: 20,
            neg_per_node: 5,
            batch_size: 0,
            aggregator: Aggregator::None,
            loss: LossKind::Sce,
            seed: 0,
        }
    }
}

impl TrainConfig {
    /// Recognized configuration keys, as accepted by [`TrainConfig::set`].
    pub const KEYS: [&'static str; 11] = [
        "k",
        "dims",
        "lr",
        "alpha",
        "beta",
        "epochs",
        "neg_per_node",
        "batch_size",
        "aggregator",
        "loss",
        "seed",
    ];

    /// Assigns one field from its textual form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key {
            "k" => self.k = parse(key, value)?,
            "dims" => self.dims = parse_dims(value)?,
            "lr" => self.lr = parse(key, value)?,
            "alpha" => self.alpha = parse(key, value)?,
            "beta" => self.beta = parse(key, value)?,
            "epochs" => self.epochs = parse(key, value)?,
            "neg_per_node" => self.neg_per_node = parse(key, value)?,
            "batch_size" => self.batch_size = parse(key, value)?,
            "aggregator" => self.aggregator = value.parse()?,
            "loss" => self.loss = value.parse()?,
            "seed" => self.seed = parse(key, value)?,
            other => {
                return Err(Error::Config(format!(
                    "unknown key {other:?}; expected one of {}",
                    Self::KEYS.join(", ")
                )))
            }
        }
        Ok(())
    }

    /// Applies every `key = value` line of a config file on top of `self`.
    ///
    /// Blank lines and `#` comments are ignored.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (key, value, line) in parse_key_values(text)? {
            self.set(&key, &value).map_err(|e| Error::Parse {
                line,
                msg: e.to_string(),
            })?;
        }
        Ok(())
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut config = Self::default();
        config.apply_text(text)?;
        Ok(config)
    }

    /// Checks the configuration against a graph of `n` nodes with `f`-wide
    /// features.
    pub fn validate(&self, n: usize, f: usize) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return fail(format!("lr must be positive, got {}", self.lr));
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return fail(format!("alpha must be non-negative, got {}", self.alpha));
        }
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return fail(format!("beta must be non-negative, got {}", self.beta));
        }
        if self.neg_per_node == 0 {
            return fail("neg_per_node must be at least 1".into());
        }
        if self.batch_size > n {
            return fail(format!(
                "batch_size {} exceeds node count {n}",
                self.batch_size
            ));
        }
        if self.batch_size == 1 {
            return fail("batch_size 1 admits no negative pairs; use 0 or at least 2".into());
        }
        if n < 2 {
            return fail(format!("training needs at least two nodes, got {n}"));
        }
        if self.aggregator != Aggregator::None && self.k == 0 {
            return fail(format!("aggregator {} needs k >= 1", self.aggregator));
        }
        if self.dims.len() < 2 {
            return fail(format!(
                "dims must list the input width and at least one layer width, got {:?}",
                self.dims
            ));
        }
        if self.dims[0] != f {
            return fail(format!(
                "dims start with {} but the features have {f} columns",
                self.dims[0]
            ));
        }
        if self.dims.contains(&0) {
            return fail(format!("zero layer width in dims {:?}", self.dims));
        }
        Ok(())
    }

    /// Layer chain for every scale of the configured encoder.
    pub fn dims_per_scale(&self) -> Vec<Vec<usize>> {
        vec![self.dims.clone(); self.aggregator.levels(self.k).len()]
    }

    /// `key = value` rendering that [`TrainConfig::from_text`] reads back.
    pub fn to_text(&self) -> String {
        let dims: Vec<String> = self.dims.iter().map(usize::to_string).collect();
        format!(
            "k = {}\ndims = {}\nlr = {}\nalpha = {}\nbeta = {}\nepochs = {}\nneg_per_node = {}\nbatch_size = {}\naggregator = {}\nloss = {}\nseed = {}\n",
            self.k,
            dims.join(","),
            self.lr,
            self.alpha,
            self.beta,
            self.epochs,
            self.neg_per_node,
            self.batch_size,
            self.aggregator,
            self.loss,
            self.seed
        )
    }
}

/// Splits `key = value` lines; returns `(key, value, line number)`.
pub fn parse_key_values(text: &str) -> Result<Vec<(String, String, usize)>> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
            line: idx + 1,
            msg: format!("expected `key = value`, found {line:?}"),
        })?;
        out.push((key.trim().to_string(), value.trim().to_string(), idx + 1));
    }
    Ok(out)
}

fn parse<V: std::str::FromStr>(key: &str, value: &str) -> Result<V>
where
    V::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e| Error::Config(format!("bad value {value:?} for {key}: {e}")))
}

/// Parses a comma-separated list of layer widths.
pub fn parse_dims(value: &str) -> Result<Vec<usize>> {
    value
        .split(',')
        .map(|tok| parse::<usize>("dims", tok.trim()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_every_key() {
        let text = "# comment\nk = 3\ndims = 8, 6,4\nlr=0.01\nalpha = 2\nbeta = 0\nepochs = 7\n\
                    neg_per_node = 2\nbatch_size = 16\naggregator = max\nloss = negative\nseed = 42\n";
        let c = TrainConfig::from_text(text).unwrap();
        assert_eq!(c.k, 3);
        assert_eq!(c.dims, vec![8, 6, 4]);
        assert_eq!(c.lr, 0.01);
        assert_eq!(c.aggregator, Aggregator::Max);
        assert_eq!(c.loss, LossKind::NegativeDistance);
        assert_eq!(
            (c.epochs, c.neg_per_node, c.batch_size, c.seed),
            (7, 2, 16, 42)
        );
        assert_eq!(TrainConfig::from_text(&c.to_text()).unwrap(), c);
    }

    #[test]
    fn unknown_keys_and_bad_lines_fail_with_line_numbers() {
        match TrainConfig::from_text("k = 2\nwarmup = 3") {
            Err(Error::Parse { line: 2, msg }) => assert!(msg.contains("warmup"), "{msg}"),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            TrainConfig::from_text("k 2"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(TrainConfig::from_text("epochs = -1").is_err());
        assert!(TrainConfig::from_text("dims = 4,x").is_err());
    }

    #[test]
    fn validation() {
        let good = TrainConfig {
            dims: vec![8, 4],
            ..TrainConfig::default()
        };
        assert!(good.validate(10, 8).is_ok());
        assert!(good.validate(10, 9).is_err());
        assert!(good.validate(1, 8).is_err());
        for bad in [
            TrainConfig {
                lr: 0.0,
                ..good.clone()
            },
            TrainConfig {
                alpha: -1.0,
                ..good.clone()
            },
            TrainConfig {
                beta: -1.0,
                ..good.clone()
            },
            TrainConfig {
                neg_per_node: 0,
                ..good.clone()
            },
            TrainConfig {
                batch_size: 11,
                ..good.clone()
            },
            TrainConfig {
                batch_size: 1,
                ..good.clone()
            },
            TrainConfig {
                dims: vec![8],
                ..good.clone()
            },
            TrainConfig {
                dims: vec![8, 0],
                ..good.clone()
            },
            TrainConfig {
                k: 0,
                aggregator: Aggregator::Mean,
                ..good.clone()
            },
        ] {
            assert!(bad.validate(10, 8).is_err(), "{bad:?}");
        }
    }

    #[test]
    fn scales_follow_aggregator() {
        let c = TrainConfig {
            k: 3,
            dims: vec![5, 2],
            aggregator: Aggregator::Concat,
            ..TrainConfig::default()
        };
        assert_eq!(c.dims_per_scale().len(), 3);
        let plain = TrainConfig {
            aggregator: Aggregator::None,
            ..c
        };
        assert_eq!(plain.dims_per_scale(), vec![vec![5, 2]]);
    }
}
