//! NSGA-III reference-direction niching.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::crowding::split_fronts;
use super::{check_candidates, keep_indices, PolicyContext, PolicyId};
use crate::error::{Error, Result};
use crate::pareto::Solution;

/// Off-axis weight of the achievement scalarising function used to find
/// extreme points.
const ASF_EPS: f64 = 1e-6;

/// Normalisation of one truncation event: `(f - ideal) / intercepts`.
#[derive(Debug, Clone, PartialEq)]
pub struct Normalisation {
    pub ideal: Vec<f64>,
    pub intercepts: Vec<f64>,
    /// `ideal + intercepts`.
    pub nadir: Vec<f64>,
    /// True when the hyperplane could not be used and the componentwise
    /// maximum stood in for it.
    pub fallback: bool,
}

impl Normalisation {
    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        f.iter()
            .zip(&self.ideal)
            .zip(&self.intercepts)
            .map(|((v, z), a)| (v - z) / a)
            .collect()
    }
}

/// Solves `a x = b` in place by Gaussian elimination with partial pivoting.
fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let m = b.len();
    for col in 0..m {
        let pivot = (col..m).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in (col + 1)..m {
            let factor = a[row][col] / a[col][col];
            for k in col..m {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; m];
    for row in (0..m).rev() {
        let tail: f64 = ((row + 1)..m).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - tail) / a[row][row];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

/// Ideal point, extreme-point hyperplane intercepts and nadir of `points`.
pub fn normalisation<P: AsRef<[f64]>>(points: &[P]) -> Result<Normalisation> {
    let first = points.first().ok_or(Error::EmptyInput("normalisation"))?;
    let m = first.as_ref().len();
    for p in &points[1..] {
        crate::pareto::check_dims(first.as_ref(), p.as_ref())?;
    }
    let mut ideal = vec![f64::INFINITY; m];
    let mut worst = vec![f64::NEG_INFINITY; m];
    for p in points {
        for (i, v) in p.as_ref().iter().enumerate() {
            ideal[i] = ideal[i].min(*v);
            worst[i] = worst[i].max(*v);
        }
    }
    let translated: Vec<Vec<f64>> = points
        .iter()
        .map(|p| p.as_ref().iter().zip(&ideal).map(|(v, z)| v - z).collect())
        .collect();

    let extremes: Vec<Vec<f64>> = (0..m)
        .map(|axis| {
            let asf = |f: &[f64]| {
                f.iter()
                    .enumerate()
                    .map(|(i, v)| v / if i == axis { 1.0 } else { ASF_EPS })
                    .fold(f64::NEG_INFINITY, f64::max)
            };
            let best = (0..translated.len())
                .min_by(|&a, &b| asf(&translated[a]).total_cmp(&asf(&translated[b])).then(a.cmp(&b)))
                .expect("non-empty");
            translated[best].clone()
        })
        .collect();

    let hyperplane = solve(extremes, vec![1.0; m]).and_then(|a| {
        let intercepts: Vec<f64> = a.iter().map(|v| 1.0 / v).collect();
        intercepts
            .iter()
            .all(|v| v.is_finite() && *v > 0.0)
            .then_some(intercepts)
    });
    let (mut intercepts, fallback) = match hyperplane {
        Some(v) => (v, false),
        None => (worst.iter().zip(&ideal).map(|(w, z)| w - z).collect(), true),
    };
    for v in &mut intercepts {
        if *v <= 0.0 {
            *v = 1.0;
        }
    }
    let nadir = ideal.iter().zip(&intercepts).map(|(z, a)| z + a).collect();
    Ok(Normalisation {
        ideal,
        intercepts,
        nadir,
        fallback,
    })
}

/// Nearest reference direction and its perpendicular distance.
fn associate(f: &[f64], dirs: &[(Vec<f64>, f64)]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, (w, norm2)) in dirs.iter().enumerate() {
        let t = f.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / norm2;
        let d2: f64 = f.iter().zip(w).map(|(a, b)| (a - t * b).powi(2)).sum();
        if d2 < best.1 {
            best = (j, d2);
        }
    }
    (best.0, best.1.sqrt())
}

/// [`truncate_nsga3_with_rng`] with a generator seeded from `ctx.seed`.
pub fn truncate_nsga3(cands: &[Solution], mu: usize, ctx: &PolicyContext) -> Result<Vec<Solution>> {
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    truncate_nsga3_with_rng(cands, mu, ctx, &mut rng)
}

/// Fills whole fronts, then picks from the splitting front by niching
/// around the reference directions in `ctx.weights`.
pub fn truncate_nsga3_with_rng(
    cands: &[Solution],
    mu: usize,
    ctx: &PolicyContext,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Solution>> {
    let weights = ctx.weights_for(PolicyId::Nsga3, mu)?;
    if cands.len() <= mu {
        return Ok(cands.to_vec());
    }
    check_candidates(cands)?;
    crate::pareto::check_dims(cands[0].values(), &weights.vectors()[0])?;
    let split = split_fronts(cands, mu);
    if split.take == 0 {
        return Ok(keep_indices(cands, split.kept));
    }

    let pool: Vec<usize> = split.kept.iter().chain(&split.splitting).copied().collect();
    let norm = normalisation(&pool.iter().map(|&i| cands[i].values()).collect::<Vec<_>>())?;
    let dirs: Vec<(Vec<f64>, f64)> = weights
        .vectors()
        .iter()
        .map(|w| (w.clone(), w.iter().map(|v| v * v).sum()))
        .collect();

    let mut niche = vec![0usize; dirs.len()];
    for &i in &split.kept {
        niche[associate(&norm.apply(cands[i].values()), &dirs).0] += 1;
    }
    // splitting-front members per reference, kept in candidate order
    let mut members: Vec<Vec<(usize, f64)>> = vec![Vec::new(); dirs.len()];
    for &i in &split.splitting {
        let (j, d) = associate(&norm.apply(cands[i].values()), &dirs);
        members[j].push((i, d));
    }

    let mut active = vec![true; dirs.len()];
    let mut chosen = split.kept;
    let mut left = split.take;
    while left > 0 {
        let min_count = (0..dirs.len())
            .filter(|&j| active[j])
            .map(|j| niche[j])
            .min()
            .expect("a reference with members remains");
        let ties: Vec<usize> = (0..dirs.len())
            .filter(|&j| active[j] && niche[j] == min_count)
            .collect();
        let j = if ties.len() == 1 {
            ties[0]
        } else {
            ties[rng.gen_range(0..ties.len())]
        };
        if members[j].is_empty() {
            active[j] = false;
            continue;
        }
        let pick = if niche[j] == 0 {
            (0..members[j].len())
                .min_by(|&a, &b| {
                    let (ia, da) = members[j][a];
                    let (ib, db) = members[j][b];
                    da.total_cmp(&db).then(cands[ia].id.cmp(&cands[ib].id))
                })
                .expect("non-empty")
        } else if members[j].len() == 1 {
            0
        } else {
            rng.gen_range(0..members[j].len())
        };
        chosen.push(members[j].remove(pick).0);
        niche[j] += 1;
        left -= 1;
    }
    Ok(keep_indices(cands, chosen))
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

    fn ids(kept: &[Solution]) -> Vec<usize> {
        kept.iter().map(|s| s.id).collect()
    }

    #[test]
    fn hyperplane_on_simplex_vertices() {
        let norm = normalisation(&[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [0.2, 0.3, 0.5]])
            .unwrap();
        assert!(!norm.fallback);
        assert_eq!(norm.ideal, vec![0.0; 3]);
        for a in &norm.intercepts {
            assert!((a - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn flat_objective_falls_back() {
        let norm = normalisation(&[[0.0, 1.0, 0.5], [1.0, 0.0, 0.5], [0.5, 0.5, 0.5]]).unwrap();
        assert!(norm.fallback);
        assert_eq!(norm.intercepts[2], 1.0);
        assert_eq!(norm.intercepts[0], 1.0);
    }

    #[test]
    fn flat_objective_still_truncates() {
        let weights = das_dennis(3, 2).unwrap();
        let ctx = PolicyContext::new(3, Some(weights));
        let pts: Vec<Vec<f64>> = (0..10)
            .map(|i| {
                let x = i as f64 / 9.0;
                vec![x, 1.0 - x, 0.5]
            })
            .collect();
        let set: Vec<Solution> = pts
            .iter()
            .enumerate()
            .map(|(i, p)| Solution::from_values(i, p).unwrap())
            .collect();
        assert_eq!(truncate_nsga3(&set, 6, &ctx).unwrap().len(), 6);
    }

    #[test]
    fn on_ray_candidates_all_selected() {
        let weights = das_dennis(3, 3).unwrap();
        let mu = weights.len();
        let mut pts: Vec<Vec<f64>> = weights.vectors().to_vec();
        pts.push(vec![0.4, 0.4, 0.4]);
        let set: Vec<Solution> = pts
            .iter()
            .enumerate()
            .map(|(i, p)| Solution::from_values(i, p).unwrap())
            .collect();
        for seed in 0..5 {
            let mut ctx = PolicyContext::new(3, Some(weights.clone()));
            ctx.seed = seed;
            let kept = truncate_nsga3(&set, mu, &ctx).unwrap();
            assert_eq!(ids(&kept), (0..mu).collect::<Vec<_>>());
        }
    }

    #[test]
    fn empty_niche_served_first() {
        // Two points crowd around the (1,0) direction, one sits near (0,1).
        let weights = WeightVectorSet::from_vectors(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let ctx = PolicyContext::new(2, Some(weights));
        let set = sols(&[&[1.0, 0.0], &[0.9, 0.05], &[0.0, 1.0]]);
        for seed in 0..8 {
            let mut ctx = ctx.clone();
            ctx.seed = seed;
            let kept = ids(&truncate_nsga3(&set, 2, &ctx).unwrap());
            assert!(kept.contains(&2), "seed {seed}: {kept:?}");
        }
    }

    #[test]
    fn fills_fronts_before_niching() {
        let weights = das_dennis(2, 1).unwrap();
        let ctx = PolicyContext::new(2, Some(weights));
        let set = sols(&[&[0.0, 0.0], &[1.0, 1.0], &[2.0, 2.0]]);
        assert_eq!(ids(&truncate_nsga3(&set, 2, &ctx).unwrap()), vec![0, 1]);
    }

    #[test]
    fn same_seed_same_result() {
        let weights = das_dennis(3, 4).unwrap();
        let mu = weights.len();
        let mut ctx = PolicyContext::new(3, Some(weights));
        ctx.seed = 99;
        let pts = crate::refsets::sample_front(crate::refsets::FrontKind::Simplex, 3, 80, 3).unwrap();
        let set: Vec<Solution> = pts
            .iter()
            .enumerate()
            .map(|(i, p)| Solution::from_values(i, p).unwrap())
            .collect();
        assert_eq!(
            truncate_nsga3(&set, mu, &ctx).unwrap(),
            truncate_nsga3(&set, mu, &ctx).unwrap()
        );
    }
}
