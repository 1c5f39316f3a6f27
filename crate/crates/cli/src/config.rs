use anyhow::{bail, Context, Result};
use bplab::gradients::FIRST_ACTIVE_ANGLE;
use bplab::training::{AmsGradConfig, GradientMode, PROBE_SPREAD};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::Command;

/// Circuit depths, either listed or as an inclusive range.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Layers {
    List(Vec<usize>),
    Range { start: usize, end: usize, step: usize },
}

impl Layers {
    pub fn values(&self) -> Result<Vec<usize>> {
        match self {
            Layers::List(v) => Ok(v.clone()),
            Layers::Range { start, end, step } => {
                if *step == 0 {
                    bail!("layer range step must be positive");
                }
                Ok((*start..=*end).step_by(*step).collect())
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub n: Vec<usize>,
    pub n_cost: Vec<usize>,
    pub cost_offset: usize,
    pub layers: Layers,
    /// `random`, `partitioned` or `hard_limit_<L_E>[_first|_last|_even]`.
    pub schemes: Vec<String>,
    /// Cost specs: `default`, `raw:<obs>`, `abs:<obs>` or `compressor`.
    pub costs: Vec<String>,
    pub samples: usize,
    pub param_index: usize,
    pub seed: u64,
    /// Training and pretraining runs use seeds `seed, seed+1, …`.
    pub runs: usize,
    pub epochs: usize,
    pub optimizer: AmsGradConfig,
    pub modes: Vec<GradientMode>,
    /// Overrides the per-cost success threshold of the training summary.
    pub threshold: Option<f64>,
    pub target_loss: Option<f64>,
    pub steps: usize,
    pub fd_step: f64,
    pub probe_samples: usize,
    pub probe_every: usize,
    pub probe_spread: f64,
    pub n_g: usize,
    pub scale: f64,
    /// Existing compressor dataset; generated into the output directory when absent.
    pub dataset: Option<String>,
}

impl ExperimentConfig {
    pub fn defaults(cmd: Command, full: bool) -> Self {
        let mut c = ExperimentConfig {
            name: cmd.name().to_string(),
            n: vec![3, 5, 7],
            n_cost: vec![2],
            cost_offset: 0,
            layers: Layers::List(vec![60]),
            schemes: vec!["random".into(), "partitioned".into()],
            costs: vec!["default".into()],
            samples: 2000,
            param_index: FIRST_ACTIVE_ANGLE,
            seed: 0,
            runs: 5,
            epochs: 1500,
            optimizer: AmsGradConfig::default(),
            modes: vec![GradientMode::Plain],
            threshold: None,
            target_loss: None,
            steps: 3000,
            fd_step: 1e-4,
            probe_samples: 1000,
            probe_every: 100,
            probe_spread: PROBE_SPREAD,
            n_g: 8,
            scale: 1.0,
            dataset: None,
        };
        match (cmd, full) {
            (Command::VarianceSweep, false) => {}
            (Command::VarianceSweep, true) => {
                c.n = vec![3, 5, 7, 9];
                c.layers = Layers::Range { start: 20, end: 200, step: 20 };
                c.schemes = ["random", "partitioned", "hard_limit_1", "hard_limit_2", "hard_limit_4", "hard_limit_8"]
                    .map(String::from)
                    .to_vec();
            }
            (Command::VarianceVsEntropy, full) => {
                c.n = if full { vec![3, 5, 7, 9] } else { vec![3, 5] };
                c.layers = Layers::Range { start: 2, end: if full { 100 } else { 40 }, step: 2 };
                c.schemes = vec!["random".into()];
            }
            (Command::Train, full) => {
                c.n = vec![if full { 9 } else { 7 }];
                c.n_cost = vec![3];
                c.layers = Layers::List(vec![if full { 200 } else { 50 }]);
                c.costs = vec!["raw:Z1 Z2 X3".into(), "abs:Z1 Z2 Z3".into()];
                c.schemes = vec!["random".into()];
                if full {
                    c.epochs = 3000;
                }
            }
            (Command::Pretrain, full) => {
                c.n = vec![if full { 7 } else { 3 }];
                c.layers = Layers::List(vec![if full { 60 } else { 20 }]);
                c.schemes = vec!["random".into()];
                if full {
                    c.steps = 10000;
                }
            }
            (Command::CompressorData, full) => {
                c.n = vec![if full { 9 } else { 7 }];
            }
        }
        c
    }

    /// Defaults for `cmd`, overlaid key by key with the JSON object in
    /// `overlay` and then with the command-line seed.
    pub fn resolve(cmd: Command, full: bool, overlay: Option<&str>, seed: Option<u64>) -> Result<Self> {
        let mut base = serde_json::to_value(Self::defaults(cmd, full))?;
        if let Some(text) = overlay {
            let user: Value = serde_json::from_str(text).context("config is not valid JSON")?;
            let Value::Object(user) = user else { bail!("config must be a JSON object") };
            let obj = base.as_object_mut().expect("config serializes to an object");
            for (k, v) in user {
                obj.insert(k, v);
            }
        }
        let mut cfg: ExperimentConfig = serde_json::from_value(base).context("invalid experiment config")?;
        if let Some(s) = seed {
            cfg.seed = s;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        if self.n.is_empty() || self.n_cost.is_empty() {
            bail!("n and n_cost lists must be non-empty");
        }
        if self.layers.values()?.is_empty() {
            bail!("no circuit depths selected");
        }
        if self.samples < 3 || self.probe_samples < 3 {
            bail!("variance estimates need at least 3 samples");
        }
        if self.runs == 0 {
            bail!("runs must be at least 1");
        }
        if self.probe_every == 0 {
            bail!("probe_every must be at least 1");
        }
        self.optimizer.validate()?;
        Ok(())
    }

    pub fn run_seeds(&self) -> impl Iterator<Item = u64> + '_ {
        (0..self.runs as u64).map(move |i| self.seed.wrapping_add(i))
    }
}
