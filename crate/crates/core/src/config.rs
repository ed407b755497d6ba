//! Run configuration as a flat JSON object with dotted keys.
//!
//! ```json
//! { "preset": "retail", "mcmc.iterations": 2000, "seed": 7 }
//! ```
//!
//! `preset` (`vague` or `retail`) picks the base values; every other key
//! overrides one field. Unknown keys are rejected.

use std::path::Path;

use serde_json::{Map, Value};

use crate::analytics::{DensityTarget, DEFAULT_EPSILON, DEFAULT_OC_DRAWS};
use crate::dpmm::{Hyperparams, MCMCConfig};
use crate::partition::DEFAULT_K_GRID;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub preset: String,
    pub priors: Hyperparams,
    pub mcmc: MCMCConfig,
    /// Expected row width; checked against the data when set.
    pub n: Option<usize>,
    pub epsilon: f64,
    pub oc_draws: usize,
    pub ppc_reps: usize,
    pub k_grid: Vec<f64>,
    pub density_targets: Vec<String>,
    pub density_points: usize,
}

impl RunConfig {
    pub fn preset(name: &str) -> Result<Self> {
        let priors = match name {
            "vague" => Hyperparams::vague(),
            "retail" => Hyperparams::retail(),
            _ => return Err(Error::Config(format!("unknown preset {name:?}; expected vague or retail"))),
        };
        Ok(RunConfig {
            preset: name.to_string(),
            priors,
            mcmc: MCMCConfig::default(),
            n: None,
            epsilon: DEFAULT_EPSILON,
            oc_draws: DEFAULT_OC_DRAWS,
            ppc_reps: 1,
            k_grid: DEFAULT_K_GRID.to_vec(),
            density_targets: vec!["pooled".into(), "length".into(), "top".into()],
            density_points: 200,
        })
    }

    pub fn seed(&self) -> u64 {
        self.mcmc.seed
    }

    pub fn validate(&self) -> Result<()> {
        self.priors.validate()?;
        self.mcmc.validate()?;
        let bad = |m: String| Err(Error::Config(m));
        if !(self.epsilon.is_finite() && self.epsilon >= 0.0) {
            return bad(format!("analytics.epsilon must be nonnegative, got {}", self.epsilon));
        }
        if self.oc_draws < 1000 {
            return bad(format!("analytics.oc_draws must be at least 1000, got {}", self.oc_draws));
        }
        if self.ppc_reps == 0 {
            return bad("analytics.ppc_reps must be at least 1".into());
        }
        if self.n == Some(0) {
            return bad("data.n must be positive".into());
        }
        if self.k_grid.is_empty() || self.k_grid.iter().any(|k| !(0.0..=1.0).contains(k)) {
            return bad("partition.k_grid must be a nonempty list of values in [0, 1]".into());
        }
        if self.density_points < 2 {
            return bad("density.points must be at least 2".into());
        }
        for t in &self.density_targets {
            if t != "top" {
                DensityTarget::parse(t)?;
            }
        }
        Ok(())
    }

    /// Resolves configured target names for rows of width `n`; `top` is the
    /// largest order statistic.
    pub fn targets_for(&self, n: usize) -> Result<Vec<DensityTarget>> {
        self.density_targets
            .iter()
            .map(|t| {
                let target = if t == "top" {
                    DensityTarget::OrderStatistic(n)
                } else {
                    DensityTarget::parse(t)?
                };
                if let DensityTarget::OrderStatistic(j) = target {
                    if j == 0 || j > n {
                        return Err(Error::Config(format!("density target {t} needs 1 <= j <= {n}")));
                    }
                }
                Ok(target)
            })
            .collect()
    }

    pub fn to_flat(&self) -> Map<String, Value> {
        let h = &self.priors;
        let m = &self.mcmc;
        let mut map = Map::new();
        let mut put = |k: &str, v: Value| {
            map.insert(k.to_string(), v);
        };
        put("preset", self.preset.clone().into());
        put("seed", m.seed.into());
        put("priors.a", h.a.into());
        put("priors.b", h.b.into());
        put("priors.alpha1", h.alpha1.into());
        put("priors.alpha2", h.alpha2.into());
        put("priors.beta1", h.beta1.into());
        put("priors.beta2", h.beta2.into());
        put("priors.lambda1", h.lambda1.into());
        put("priors.lambda2", h.lambda2.into());
        put("priors.tau1", h.tau1.into());
        put("priors.tau2", h.tau2.into());
        put("mcmc.iterations", m.iterations.into());
        put("mcmc.burn_in", m.burn_in.into());
        put("mcmc.thin", m.thin.into());
        put("mcmc.aux_count", m.aux_count.into());
        put("mcmc.mh_inner", m.mh_inner.into());
        put("mcmc.init_clusters", m.init_clusters.into());
        put("mcmc.step_alpha", m.step_sizes.alpha.into());
        put("mcmc.step_beta", m.step_sizes.beta.into());
        put("mcmc.step_lambda", m.step_sizes.lambda.into());
        put("mcmc.step_w", m.step_sizes.w.into());
        put("data.n", self.n.map_or(Value::Null, Value::from));
        put("analytics.epsilon", self.epsilon.into());
        put("analytics.oc_draws", self.oc_draws.into());
        put("analytics.ppc_reps", self.ppc_reps.into());
        put("partition.k_grid", self.k_grid.clone().into());
        put("density.targets", self.density_targets.clone().into());
        put("density.points", self.density_points.into());
        map
    }

    /// Pretty JSON with a trailing newline; keys sorted.
    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(&Value::Object(self.to_flat()))
            .expect("config serialises");
        s.push('\n');
        s
    }

    pub fn from_flat(map: &Map<String, Value>) -> Result<Self> {
        let preset = match map.get("preset") {
            None => "vague",
            Some(v) => v
                .as_str()
                .ok_or_else(|| Error::Config("preset must be a string".into()))?,
        };
        let mut cfg = RunConfig::preset(preset)?;
        for (key, value) in map {
            if key != "preset" {
                cfg.set(key, value)?;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        match serde_json::from_str::<Value>(text)? {
            Value::Object(map) => RunConfig::from_flat(&map),
            _ => Err(Error::Config("configuration must be a JSON object".into())),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        RunConfig::from_json_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    fn set(&mut self, key: &str, v: &Value) -> Result<()> {
        let num = || {
            v.as_f64()
                .ok_or_else(|| Error::Config(format!("{key} must be a number")))
        };
        let count = || {
            v.as_u64()
                .map(|x| x as usize)
                .ok_or_else(|| Error::Config(format!("{key} must be a nonnegative integer")))
        };
        let h = &mut self.priors;
        let m = &mut self.mcmc;
        match key {
            "seed" => {
                m.seed = v
                    .as_u64()
                    .ok_or_else(|| Error::Config("seed must be a nonnegative integer".into()))?
            }
            "priors.a" => h.a = num()?,
            "priors.b" => h.b = num()?,
            "priors.alpha1" => h.alpha1 = num()?,
            "priors.alpha2" => h.alpha2 = num()?,
            "priors.beta1" => h.beta1 = num()?,
            "priors.beta2" => h.beta2 = num()?,
            "priors.lambda1" => h.lambda1 = num()?,
            "priors.lambda2" => h.lambda2 = num()?,
            "priors.tau1" => h.tau1 = num()?,
            "priors.tau2" => h.tau2 = num()?,
            "mcmc.iterations" => m.iterations = count()?,
            "mcmc.burn_in" => m.burn_in = count()?,
            "mcmc.thin" => m.thin = count()?,
            "mcmc.aux_count" => m.aux_count = count()?,
            "mcmc.mh_inner" => m.mh_inner = count()?,
            "mcmc.init_clusters" => m.init_clusters = count()?,
            "mcmc.step_alpha" => m.step_sizes.alpha = num()?,
            "mcmc.step_beta" => m.step_sizes.beta = num()?,
            "mcmc.step_lambda" => m.step_sizes.lambda = num()?,
            "mcmc.step_w" => m.step_sizes.w = num()?,
            "data.n" => self.n = if v.is_null() { None } else { Some(count()?) },
            "analytics.epsilon" => self.epsilon = num()?,
            "analytics.oc_draws" => self.oc_draws = count()?,
            "analytics.ppc_reps" => self.ppc_reps = count()?,
            "partition.k_grid" => {
                self.k_grid = v
                    .as_array()
                    .and_then(|a| a.iter().map(Value::as_f64).collect())
                    .ok_or_else(|| Error::Config("partition.k_grid must be a list of numbers".into()))?
            }
            "density.targets" => {
                self.density_targets = v
                    .as_array()
                    .and_then(|a| a.iter().map(|x| x.as_str().map(String::from)).collect())
                    .ok_or_else(|| Error::Config("density.targets must be a list of strings".into()))?
            }
            "density.points" => self.density_points = count()?,
            _ => return Err(Error::Config(format!("unknown configuration key {key:?}"))),
        }
        Ok(())
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig::preset("vague").expect("built-in preset")
    }
}
