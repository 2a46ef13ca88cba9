//! Archive truncation policies.
//!
//! Every policy reduces an over-capacity candidate set to the archive
//! capacity. Ties are broken towards the lower solution id, except for the
//! random choices inside NSGA-III niching, which draw from a seeded stream.

mod crowding;
mod hv;
mod ibea;
mod moead;
mod nsga3;

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use crowding::{crowding_distance, truncate_nsga2_iterative, truncate_nsga2_oneoff};
pub use hv::{truncate_hv_inclusion, truncate_sms_removal};
pub use ibea::truncate_ibea;
pub use moead::{truncate_moead, MoeadState};
pub use nsga3::{normalisation, truncate_nsga3, truncate_nsga3_with_rng, Normalisation};

use crate::error::{Error, Result};
use crate::indicators::ReferencePoint;
use crate::pareto::{nondominated_filter, Solution};
use crate::refsets::WeightVectorSet;

/// The seven truncation criteria.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PolicyId {
    /// Crowding distance computed once on the splitting front.
    Nsga2Oneoff,
    /// Crowding distance recomputed after every single removal.
    Nsga2Iterative,
    /// Greedy removal of the least hypervolume contributor.
    SmsRemoval,
    /// Greedy inclusion of the largest hypervolume contributor.
    HvInclusion,
    /// Exponential ε-indicator fitness, worst removed one at a time.
    Ibea,
    /// Per-weight PBI incumbents.
    MoeadPbi,
    /// Reference-direction niching.
    Nsga3,
}

impl PolicyId {
    pub const ALL: [PolicyId; 7] = [
        PolicyId::Nsga2Oneoff,
        PolicyId::Nsga2Iterative,
        PolicyId::SmsRemoval,
        PolicyId::HvInclusion,
        PolicyId::Ibea,
        PolicyId::MoeadPbi,
        PolicyId::Nsga3,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PolicyId::Nsga2Oneoff => "NSGA2_ONEOFF",
            PolicyId::Nsga2Iterative => "NSGA2_ITERATIVE",
            PolicyId::SmsRemoval => "SMS_REMOVAL",
            PolicyId::HvInclusion => "HV_INCLUSION",
            PolicyId::Ibea => "IBEA",
            PolicyId::MoeadPbi => "MOEAD_PBI",
            PolicyId::Nsga3 => "NSGA3",
        }
    }

    /// Lower-case form used in file names.
    pub fn slug(self) -> String {
        self.name().to_ascii_lowercase()
    }

    /// Column heading for report tables.
    pub fn label(self) -> &'static str {
        match self {
            PolicyId::Nsga2Oneoff => "NSGA-II",
            PolicyId::Nsga2Iterative => "NSGA-II (1-by-1)",
            PolicyId::SmsRemoval => "SMS-EMOA",
            PolicyId::HvInclusion => "HV inclusion",
            PolicyId::Ibea => "IBEA",
            PolicyId::MoeadPbi => "MOEA/D",
            PolicyId::Nsga3 => "NSGA-III",
        }
    }

    pub fn needs_weights(self) -> bool {
        matches!(self, PolicyId::MoeadPbi | PolicyId::Nsga3)
    }
}

impl fmt::Display for PolicyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PolicyId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PolicyId::ALL
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown policy `{s}`")))
    }
}

/// How the hypervolume reference point is chosen at each truncation event.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HvRefRule {
    /// Factor times the componentwise maximum of the candidate set.
    ScaledMax(f64),
    Fixed(Vec<f64>),
}

impl Default for HvRefRule {
    fn default() -> Self {
        HvRefRule::ScaledMax(1.1)
    }
}

impl HvRefRule {
    pub fn reference_for(&self, cands: &[Solution]) -> Result<ReferencePoint> {
        match self {
            HvRefRule::ScaledMax(factor) => ReferencePoint::scaled_max(cands, *factor),
            HvRefRule::Fixed(v) => ReferencePoint::new(v.clone()),
        }
    }
}

/// Ideal point handling for the PBI policy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IdealMode {
    Fixed(Vec<f64>),
    RunningMin,
}

/// Parameters shared by all policies.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyContext {
    pub weights: Option<WeightVectorSet>,
    pub theta: f64,
    pub kappa: f64,
    pub hv_ref_rule: HvRefRule,
    pub ideal_mode: IdealMode,
    /// Seeds the NSGA-III niching stream.
    pub seed: u64,
    /// Drop dominated candidates before truncating.
    pub prefilter: bool,
}

impl PolicyContext {
    /// θ = 5, κ = 0.05, 1.1×max reference, ideal fixed at the origin.
    pub fn new(m: usize, weights: Option<WeightVectorSet>) -> Self {
        Self {
            weights,
            theta: 5.0,
            kappa: 0.05,
            hv_ref_rule: HvRefRule::default(),
            ideal_mode: IdealMode::Fixed(vec![0.0; m]),
            seed: 0,
            prefilter: false,
        }
    }

    pub(crate) fn weights_for(&self, policy: PolicyId, mu: usize) -> Result<&WeightVectorSet> {
        let weights = self.weights.as_ref().ok_or(Error::WeightCount {
            policy: policy.name(),
            expected: mu,
            found: 0,
        })?;
        if weights.len() != mu {
            return Err(Error::WeightCount {
                policy: policy.name(),
                expected: mu,
                found: weights.len(),
            });
        }
        Ok(weights)
    }
}

pub(crate) fn check_candidates(cands: &[Solution]) -> Result<()> {
    if let Some(first) = cands.first() {
        for s in &cands[1..] {
            crate::pareto::check_dims(first.values(), s.values())?;
        }
    }
    Ok(())
}

/// Picks `indices` out of `cands`, keeping candidate order.
pub(crate) fn keep_indices(cands: &[Solution], mut indices: Vec<usize>) -> Vec<Solution> {
    indices.sort_unstable();
    indices.into_iter().map(|i| cands[i].clone()).collect()
}

/// Stateful truncation for one run: owns the NSGA-III random stream so that
/// successive events draw fresh numbers.
pub struct Truncator<'a> {
    policy: PolicyId,
    ctx: &'a PolicyContext,
    rng: ChaCha8Rng,
}

impl<'a> Truncator<'a> {
    pub fn new(policy: PolicyId, ctx: &'a PolicyContext, mu: usize) -> Result<Self> {
        if policy.needs_weights() {
            ctx.weights_for(policy, mu)?;
        }
        Ok(Self {
            policy,
            ctx,
            rng: ChaCha8Rng::seed_from_u64(ctx.seed),
        })
    }

    pub fn policy(&self) -> PolicyId {
        self.policy
    }

    /// Reduces `cands` to at most `mu` members.
    pub fn truncate(&mut self, cands: Vec<Solution>, mu: usize) -> Result<Vec<Solution>> {
        let cands = if self.ctx.prefilter && cands.len() > mu {
            nondominated_filter(&cands)?
        } else {
            cands
        };
        if cands.len() <= mu && self.policy != PolicyId::MoeadPbi {
            return Ok(cands);
        }
        let ctx = self.ctx;
        match self.policy {
            PolicyId::Nsga2Oneoff => truncate_nsga2_oneoff(&cands, mu, ctx),
            PolicyId::Nsga2Iterative => truncate_nsga2_iterative(&cands, mu, ctx),
            PolicyId::SmsRemoval => truncate_sms_removal(&cands, mu, ctx),
            PolicyId::HvInclusion => truncate_hv_inclusion(&cands, mu, ctx),
            PolicyId::Ibea => truncate_ibea(&cands, mu, ctx),
            PolicyId::MoeadPbi => truncate_moead(&cands, mu, ctx),
            PolicyId::Nsga3 => truncate_nsga3_with_rng(&cands, mu, ctx, &mut self.rng),
        }
    }
}
