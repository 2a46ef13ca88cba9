use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::policies::{HvRefRule, IdealMode, PolicyContext, PolicyId};
use crate::refsets::{das_dennis, divisions_for, FrontKind};
use crate::scheduler::Schedule;

/// Everything that determines an experiment. Unknown keys are rejected when
/// loading from JSON; missing keys take the defaults below.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub fronts: Vec<FrontKind>,
    /// Number of objectives.
    pub m: usize,
    pub n_solutions: usize,
    pub mu: usize,
    pub n_shuffles: usize,
    pub policies: Vec<PolicyId>,
    pub schedules: Vec<Schedule>,
    /// Base seed: the point set of every front is sampled from it, and
    /// shuffle `k` uses `seed + k`.
    pub seed: u64,
    pub theta: f64,
    pub kappa: f64,
    pub hv_ref_rule: HvRefRule,
    /// `None` fixes the ideal point at the origin.
    pub ideal_mode: Option<IdealMode>,
    pub prefilter: bool,
    pub alpha: f64,
    /// Lattice divisions of the IGD reference set.
    pub igd_divisions: usize,
    pub output_dir: PathBuf,
    /// Worker threads; `None` uses one per available core.
    pub workers: Option<usize>,
    /// Write per-event normalisation traces of NSGA-III runs.
    pub diagnostics: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            fronts: FrontKind::ALL.to_vec(),
            m: 3,
            n_solutions: 5000,
            mu: 105,
            n_shuffles: 31,
            policies: PolicyId::ALL.to_vec(),
            schedules: Schedule::ALL.to_vec(),
            seed: 1,
            theta: 5.0,
            kappa: 0.05,
            hv_ref_rule: HvRefRule::default(),
            ideal_mode: None,
            prefilter: false,
            alpha: 0.05,
            igd_divisions: 99,
            output_dir: PathBuf::from("results"),
            workers: None,
            diagnostics: false,
        }
    }
}

fn no_duplicates<T: std::hash::Hash + Eq>(what: &str, items: &[T]) -> Result<()> {
    if items.is_empty() {
        return Err(Error::Config(format!("`{what}` must not be empty")));
    }
    let mut seen = HashSet::new();
    if !items.iter().all(|v| seen.insert(v)) {
        return Err(Error::Config(format!("`{what}` lists an entry twice")));
    }
    Ok(())
}

impl ExperimentConfig {
    /// Smallest grid that still exercises every policy and schedule.
    pub fn smoke() -> Self {
        Self {
            n_solutions: 300,
            mu: 21,
            n_shuffles: 5,
            ..Self::default()
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let config: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::Config(format!("at `{path}`: {}", e.into_inner()))
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }

    pub fn validate(&self) -> Result<()> {
        no_duplicates("fronts", &self.fronts)?;
        no_duplicates("policies", &self.policies)?;
        no_duplicates("schedules", &self.schedules)?;
        if !(2..=3).contains(&self.m) {
            return Err(Error::Config(format!("`m` must be 2 or 3, got {}", self.m)));
        }
        if self.n_shuffles == 0 {
            return Err(Error::Config("`n_shuffles` must be at least 1".into()));
        }
        if self.mu == 0 || self.mu >= self.n_solutions {
            return Err(Error::Config(format!(
                "`mu` must satisfy 0 < mu < n_solutions (mu={}, n_solutions={})",
                self.mu, self.n_solutions
            )));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Config(format!("`alpha` must lie in (0, 1), got {}", self.alpha)));
        }
        if !(self.kappa > 0.0) {
            return Err(Error::Config(format!("`kappa` must be positive, got {}", self.kappa)));
        }
        if !(self.theta >= 0.0) {
            return Err(Error::Config(format!("`theta` must be non-negative, got {}", self.theta)));
        }
        if self.igd_divisions == 0 {
            return Err(Error::Config("`igd_divisions` must be positive".into()));
        }
        if self.workers == Some(0) {
            return Err(Error::Config("`workers` must be at least 1".into()));
        }
        if let Some(IdealMode::Fixed(z)) = &self.ideal_mode {
            if z.len() != self.m {
                return Err(Error::Config(format!(
                    "`ideal_mode` has {} entries, expected {}",
                    z.len(),
                    self.m
                )));
            }
        }
        if let HvRefRule::Fixed(r) = &self.hv_ref_rule {
            if r.len() != self.m {
                return Err(Error::Config(format!(
                    "`hv_ref_rule` has {} entries, expected {}",
                    r.len(),
                    self.m
                )));
            }
        }
        if self.policies.iter().any(|p| p.needs_weights()) && divisions_for(self.m, self.mu).is_none() {
            return Err(Error::Config(format!(
                "`mu` = {} is not a simplex-lattice size for m = {}, so MOEA/D and NSGA-III have no weight set",
                self.mu, self.m
            )));
        }
        Ok(())
    }

    /// Policy context shared by every run; the NSGA-III seed is set per run.
    pub fn policy_context(&self) -> Result<PolicyContext> {
        let weights = match divisions_for(self.m, self.mu) {
            Some(h) => Some(das_dennis(self.m, h)?),
            None => None,
        };
        let mut ctx = PolicyContext::new(self.m, weights);
        ctx.theta = self.theta;
        ctx.kappa = self.kappa;
        ctx.hv_ref_rule = self.hv_ref_rule.clone();
        if let Some(mode) = &self.ideal_mode {
            ctx.ideal_mode = mode.clone();
        }
        ctx.prefilter = self.prefilter;
        Ok(ctx)
    }

    pub fn grid_size(&self) -> usize {
        self.fronts.len() * self.n_shuffles * self.policies.len() * self.schedules.len()
    }
}
