//! MOEA/D style archive: one PBI incumbent per weight vector.

use super::{check_candidates, IdealMode, PolicyContext, PolicyId};
use crate::error::{Error, Result};
use crate::indicators::pbi;
use crate::pareto::Solution;

/// Incremental per-weight incumbents. Each arrival replaces the incumbent of
/// every weight it strictly improves.
#[derive(Debug, Clone)]
pub struct MoeadState {
    weights: Vec<Vec<f64>>,
    theta: f64,
    running_min: bool,
    ideal: Vec<f64>,
    incumbents: Vec<Option<(Solution, f64)>>,
}

impl MoeadState {
    pub fn new(ctx: &PolicyContext, mu: usize) -> Result<Self> {
        let weights = ctx.weights_for(PolicyId::MoeadPbi, mu)?;
        let m = weights.dim();
        let (running_min, ideal) = match &ctx.ideal_mode {
            IdealMode::Fixed(z) => {
                if z.len() != m {
                    return Err(Error::DimensionMismatch {
                        expected: m,
                        found: z.len(),
                    });
                }
                (false, z.clone())
            }
            IdealMode::RunningMin => (true, vec![f64::INFINITY; m]),
        };
        Ok(Self {
            weights: weights.vectors().to_vec(),
            theta: ctx.theta,
            running_min,
            ideal,
            incumbents: vec![None; mu],
        })
    }

    pub fn ideal(&self) -> &[f64] {
        &self.ideal
    }

    pub fn offer(&mut self, s: &Solution) -> Result<()> {
        if self.running_min {
            let mut moved = false;
            for (z, v) in self.ideal.iter_mut().zip(s.values()) {
                if *v < *z {
                    *z = *v;
                    moved = true;
                }
            }
            if moved {
                for (w, slot) in self.weights.iter().zip(&mut self.incumbents) {
                    if let Some((inc, value)) = slot {
                        *value = pbi(inc.values(), w, &self.ideal, self.theta)?;
                    }
                }
            }
        }
        for (w, slot) in self.weights.iter().zip(&mut self.incumbents) {
            let value = pbi(s.values(), w, &self.ideal, self.theta)?;
            match slot {
                Some((_, best)) if value >= *best => {}
                _ => *slot = Some((s.clone(), value)),
            }
        }
        Ok(())
    }

    /// Distinct incumbents, sorted by id.
    pub fn members(&self) -> Vec<Solution> {
        let mut out: Vec<Solution> = self
            .incumbents
            .iter()
            .flatten()
            .map(|(s, _)| s.clone())
            .collect();
        out.sort_by_key(|s| s.id);
        out.dedup_by_key(|s| s.id);
        out
    }
}

/// Processes `cands` in order through a fresh [`MoeadState`] and returns the
/// distinct incumbents. The result may hold fewer than `mu` solutions.
pub fn truncate_moead(cands: &[Solution], mu: usize, ctx: &PolicyContext) -> Result<Vec<Solution>> {
    check_candidates(cands)?;
    let mut state = MoeadState::new(ctx, mu)?;
    for s in cands {
        state.offer(s)?;
    }
    Ok(state.members())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::refsets::{das_dennis, WeightVectorSet};

    fn sols(points: &[&[f64]]) -> Vec<Solution> {
        points
            .iter()
            .enumerate()
            .map(|(i, p)| Solution::from_values(i, p).unwrap())
            .collect()
    }

    #[test]
    fn three_weight_example() {
        let weights =
            WeightVectorSet::from_vectors(vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![0.5, 0.5]])
                .unwrap();
        let ctx = PolicyContext::new(2, Some(weights));
        let set = sols(&[&[0.2, 0.8], &[0.8, 0.2], &[0.5, 0.5]]);
        let state = {
            let mut st = MoeadState::new(&ctx, 3).unwrap();
            for s in &set {
                st.offer(s).unwrap();
            }
            st
        };
        let winners: Vec<usize> = state
            .incumbents
            .iter()
            .map(|slot| slot.as_ref().unwrap().0.id)
            .collect();
        assert_eq!(winners, vec![1, 0, 2]);
        assert_eq!(truncate_moead(&set, 3, &ctx).unwrap().len(), 3);
    }

    #[test]
    fn on_ray_candidates_fill_every_weight() {
        let weights = das_dennis(3, 4).unwrap();
        let set: Vec<Solution> = weights
            .vectors()
            .iter()
            .enumerate()
            .map(|(i, w)| Solution::from_values(i, w).unwrap())
            .collect();
        let ctx = PolicyContext::new(3, Some(weights.clone()));
        assert_eq!(truncate_moead(&set, weights.len(), &ctx).unwrap().len(), weights.len());
    }

    #[test]
    fn reversed_order_same_incumbents() {
        let weights = das_dennis(3, 3).unwrap();
        let mu = weights.len();
        let ctx = PolicyContext::new(3, Some(weights));
        let pts = crate::refsets::sample_front(crate::refsets::FrontKind::Simplex, 3, 60, 5).unwrap();
        let set: Vec<Solution> = pts
            .iter()
            .enumerate()
            .map(|(i, p)| Solution::from_values(i, p).unwrap())
            .collect();
        let mut rev = set.clone();
        rev.reverse();
        assert_eq!(
            truncate_moead(&set, mu, &ctx).unwrap(),
            truncate_moead(&rev, mu, &ctx).unwrap()
        );
    }

    #[test]
    fn running_min_tracks_ideal() {
        let weights = das_dennis(2, 1).unwrap();
        let mut ctx = PolicyContext::new(2, Some(weights));
        ctx.ideal_mode = IdealMode::RunningMin;
        let mut st = MoeadState::new(&ctx, 2).unwrap();
        for s in sols(&[&[0.4, 0.7], &[0.6, 0.3]]) {
            st.offer(&s).unwrap();
        }
        assert_eq!(st.ideal(), &[0.4, 0.3]);
    }

    #[test]
    fn weight_count_checked() {
        let ctx = PolicyContext::new(3, Some(das_dennis(3, 2).unwrap()));
        assert!(matches!(
            truncate_moead(&[], 5, &ctx),
            Err(Error::WeightCount { expected: 5, found: 6, .. })
        ));
    }
}
