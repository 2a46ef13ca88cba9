//! IBEA environmental selection with the additive ε-indicator.

use super::{check_candidates, keep_indices, PolicyContext};
use crate::error::{Error, Result};
use crate::indicators::IbeaScaling;
use crate::pareto::Solution;

/// Removes the lowest-fitness member one at a time. Rescaling and `c` are
/// fixed for the event; survivors' fitness is updated after each removal.
pub fn truncate_ibea(cands: &[Solution], mu: usize, ctx: &PolicyContext) -> Result<Vec<Solution>> {
    if cands.len() <= mu {
        return Ok(cands.to_vec());
    }
    check_candidates(cands)?;
    if !(ctx.kappa > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "kappa must be positive, got {}",
            ctx.kappa
        )));
    }
    let kappa = ctx.kappa;
    let scaling = IbeaScaling::new(cands);
    let n = cands.len();
    let mut fitness: Vec<f64> = (0..n)
        .map(|x| {
            (0..n)
                .filter(|&y| y != x)
                .map(|y| -scaling.pressure(y, x, kappa))
                .sum()
        })
        .collect();
    let mut alive = vec![true; n];
    for _ in mu..n {
        let worst = (0..n)
            .filter(|&i| alive[i])
            .min_by(|&a, &b| {
                fitness[a]
                    .total_cmp(&fitness[b])
                    .then(cands[a].id.cmp(&cands[b].id))
            })
            .expect("candidates remain");
        alive[worst] = false;
        for x in 0..n {
            if alive[x] {
                fitness[x] += scaling.pressure(worst, x, kappa);
            }
        }
    }
    Ok(keep_indices(cands, (0..n).filter(|&i| alive[i]).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::indicators::ibea_fitness;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sols(points: &[&[f64]]) -> Vec<Solution> {
        points
            .iter()
            .enumerate()
            .map(|(i, p)| Solution::from_values(i, p).unwrap())
            .collect()
    }

    fn ids(kept: &[Solution]) -> Vec<usize> {
        kept.iter().map(|s| s.id).collect()
    }

    #[test]
    fn duplicate_goes_first() {
        let set = sols(&[&[0.5, 0.5], &[0.0, 1.0], &[0.5, 0.5]]);
        let kept = truncate_ibea(&set, 2, &PolicyContext::new(2, None)).unwrap();
        let ids = ids(&kept);
        assert!(ids.contains(&1));
        assert_eq!(ids.len(), 2);
    }

    #[test]
    fn three_point_example_keeps_boundary() {
        // The middle point carries the lowest fitness under κ = 0.05.
        let set = sols(&[&[0.0, 1.0], &[0.5, 0.5], &[1.0, 0.0]]);
        let kept = truncate_ibea(&set, 2, &PolicyContext::new(2, None)).unwrap();
        assert_eq!(ids(&kept), vec![0, 2]);
    }

    /// Survivors when fitness is recomputed from scratch after each removal,
    /// with the scaling frozen on the full set.
    fn naive_survivors(cands: &[Solution], mu: usize, kappa: f64) -> Vec<usize> {
        let scaling = IbeaScaling::new(cands);
        let mut alive: Vec<usize> = (0..cands.len()).collect();
        while alive.len() > mu {
            let f = |x: usize| -> f64 {
                alive
                    .iter()
                    .filter(|&&y| y != x)
                    .map(|&y| -scaling.pressure(y, x, kappa))
                    .sum()
            };
            let (pos, _) = alive
                .iter()
                .enumerate()
                .map(|(pos, &x)| (pos, f(x)))
                .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
                .unwrap();
            alive.remove(pos);
        }
        alive
    }

    #[test]
    fn incremental_matches_recompute() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let set: Vec<Solution> = (0..20)
                .map(|i| {
                    let v: Vec<f64> = (0..3).map(|_| rng.gen::<f64>()).collect();
                    Solution::from_values(i, &v).unwrap()
                })
                .collect();
            let mu = rng.gen_range(1..20);
            let kept = truncate_ibea(&set, mu, &PolicyContext::new(3, None)).unwrap();
            let kept_ids = ids(&kept);
            let naive = naive_survivors(&set, mu, 0.05);
            assert_eq!(kept_ids, naive);
        }
    }

    #[test]
    fn first_removal_is_fitness_argmin() {
        let set = sols(&[&[0.1, 0.9], &[0.3, 0.6], &[0.35, 0.55], &[0.9, 0.1]]);
        let f = ibea_fitness(&set, 0.05).unwrap();
        let worst = (0..4)
            .min_by(|&a, &b| f[a].total_cmp(&f[b]).then(a.cmp(&b)))
            .unwrap();
        let kept = truncate_ibea(&set, 3, &PolicyContext::new(2, None)).unwrap();
        assert!(!ids(&kept).contains(&worst));
    }
}
