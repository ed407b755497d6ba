//! Synthetic datasets from finite mixtures with known components.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Row};
use crate::fsutil::write_atomic;
use crate::variates::{binomial_sample, gamma_sample};
use crate::{Atom, Error, Result, RngStream, Sequence};

/// Generator of the uncensored values of one component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kernel", rename_all = "lowercase")]
pub enum Kernel {
    Ew { alpha: f64, beta: f64, lambda: f64 },
    Gamma { shape: f64, rate: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub weight: f64,
    #[serde(flatten)]
    pub kernel: Kernel,
    pub w: f64,
}

impl Component {
    pub fn ew(weight: f64, alpha: f64, beta: f64, lambda: f64, w: f64) -> Self {
        Component {
            weight,
            kernel: Kernel::Ew { alpha, beta, lambda },
            w,
        }
    }

    pub fn gamma(weight: f64, shape: f64, rate: f64, w: f64) -> Self {
        Component {
            weight,
            kernel: Kernel::Gamma { shape, rate },
            w,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.weight > 0.0 && self.weight.is_finite()) {
            return Err(Error::domain(format!("component weight must be positive, got {}", self.weight)));
        }
        match self.kernel {
            Kernel::Ew { alpha, beta, lambda } => Atom::new(alpha, beta, lambda, self.w).map(|_| ()),
            Kernel::Gamma { shape, rate } => {
                if !(shape > 0.0 && rate > 0.0 && shape.is_finite() && rate.is_finite()) {
                    return Err(Error::domain(format!("gamma shape and rate must be positive, got ({shape}, {rate})")));
                }
                if !(self.w > 0.0 && self.w < 1.0) {
                    return Err(Error::domain(format!("w must be in (0, 1), got {}", self.w)));
                }
                Ok(())
            }
        }
    }

    /// Atom for EW components.
    pub fn atom(&self) -> Option<Atom> {
        match self.kernel {
            Kernel::Ew { alpha, beta, lambda } => Atom::new(alpha, beta, lambda, self.w).ok(),
            Kernel::Gamma { .. } => None,
        }
    }

    fn draw_value(&self, rng: &mut RngStream) -> Result<f64> {
        match self.kernel {
            Kernel::Ew { alpha, beta, lambda } => Ok(crate::EWParams { alpha, beta, lambda }.sample(rng)),
            Kernel::Gamma { shape, rate } => gamma_sample(rng, shape, rate),
        }
    }

    fn draw_sequence(&self, rng: &mut RngStream, n: usize) -> Result<Sequence> {
        let l = 1 + binomial_sample(rng, n as u64 - 1, self.w)? as usize;
        for _ in 0..1000 {
            let mut xs = (0..n).map(|_| self.draw_value(rng)).collect::<Result<Vec<_>>>()?;
            xs.sort_unstable_by(|a, b| b.total_cmp(a));
            xs.truncate(l);
            if let Ok(seq) = Sequence::new(n, xs) {
                return Ok(seq);
            }
        }
        Err(Error::domain(format!("could not draw a tie-free sequence from {self:?}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Study {
    /// Three EW components with weights 0.4, 0.35, 0.25.
    Study1,
    /// Three gamma components (shape, rate) with the same weights.
    Study2,
    Custom(Vec<Component>),
}

impl Study {
    pub fn components(&self) -> Vec<Component> {
        match self {
            Study::Study1 => vec![
                Component::ew(0.4, 0.15, 0.8, 0.91, 0.65),
                Component::ew(0.35, 2.5, 3.3, 0.35, 0.75),
                Component::ew(0.25, 0.64, 1.7, 0.4, 0.9),
            ],
            Study::Study2 => vec![
                Component::gamma(0.4, 0.15, 0.5, 0.65),
                Component::gamma(0.35, 1.7, 1.0, 0.75),
                Component::gamma(0.25, 32.0, 10.0, 0.9),
            ],
            Study::Custom(c) => c.clone(),
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "study1" => Ok(Study::Study1),
            "study2" => Ok(Study::Study2),
            _ => Err(Error::Config(format!("unknown study {name:?}; expected study1 or study2"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Simulation {
    pub dataset: Dataset,
    /// Zero-based component index of every row.
    pub labels: Vec<usize>,
    pub components: Vec<Component>,
}

impl Simulation {
    /// `id,component,kernel,param1,param2,param3,w`; `param3` is empty for
    /// gamma components.
    pub fn truth_csv_string(&self) -> String {
        let mut s = String::from("id,component,kernel,param1,param2,param3,w\n");
        for (row, &k) in self.dataset.rows.iter().zip(&self.labels) {
            let c = &self.components[k];
            let (kind, params) = match c.kernel {
                Kernel::Ew { alpha, beta, lambda } => ("ew", format!("{alpha},{beta},{lambda}")),
                Kernel::Gamma { shape, rate } => ("gamma", format!("{shape},{rate},")),
            };
            let _ = writeln!(s, "{},{},{kind},{params},{}", row.id, k + 1, c.w);
        }
        s
    }

    /// Writes `data.csv` and `truth.csv` under `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        self.dataset.write_csv(&dir.join("data.csv"))?;
        write_atomic(&dir.join("truth.csv"), self.truth_csv_string().as_bytes())
    }
}

/// Reads a JSON list of components, e.g.
/// `[{"weight": 1, "kernel": "ew", "alpha": 1, "beta": 2, "lambda": 3, "w": 0.5}]`.
pub fn read_components(path: &Path) -> Result<Vec<Component>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

/// Draws `n_obs` observations of width `n`.
pub fn simulate(study: &Study, n_obs: usize, n: usize, seed: u64) -> Result<Simulation> {
    let components = study.components();
    if components.is_empty() {
        return Err(Error::domain("study has no components"));
    }
    for c in &components {
        c.validate()?;
    }
    if n_obs == 0 || n == 0 {
        return Err(Error::domain("need at least one observation of width at least 1"));
    }
    let total: f64 = components.iter().map(|c| c.weight).sum();
    let mut rng = RngStream::new(seed).substream("simulate");
    let width = n_obs.to_string().len();
    let mut rows = Vec::with_capacity(n_obs);
    let mut labels = Vec::with_capacity(n_obs);
    for i in 0..n_obs {
        let u = rng.unit() * total;
        let mut acc = 0.0;
        let k = components
            .iter()
            .position(|c| {
                acc += c.weight;
                u < acc
            })
            .unwrap_or(components.len() - 1);
        let sequence = components[k].draw_sequence(&mut rng, n)?;
        rows.push(Row {
            id: format!("obs{:0width$}", i + 1),
            sequence,
        });
        labels.push(k);
    }
    Ok(Simulation {
        dataset: Dataset::new(n, rows)?,
        labels,
        components,
    })
}
