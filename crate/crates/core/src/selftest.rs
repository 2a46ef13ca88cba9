//! Embedded oracle suite: each check compares a library routine against an
//! independent, slower implementation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::indicators::hypervolume;
use crate::pareto::Solution;
use crate::policies::{crowding_distance, truncate_hv_inclusion, truncate_nsga2_oneoff, truncate_sms_removal, HvRefRule, PolicyContext};
use crate::stats::wilcoxon_rank_sum;

/// Knobs for negative controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelftestOptions {
    /// Multiplies every hypervolume under test; anything but 1 should fail.
    pub hv_scale: f64,
    pub mc_samples: usize,
    pub seed: u64,
}

impl Default for SelftestOptions {
    fn default() -> Self {
        Self {
            hv_scale: 1.0,
            mc_samples: 1_000_000,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleCheck {
    pub name: String,
    pub cases: usize,
    pub failures: Vec<String>,
}

impl OracleCheck {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelftestReport {
    pub checks: Vec<OracleCheck>,
}

impl SelftestReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(OracleCheck::passed)
    }
}

pub fn run_selftest(opts: &SelftestOptions) -> SelftestReport {
    SelftestReport {
        checks: vec![
            hypervolume_vs_monte_carlo(opts),
            greedy_vs_exhaustive(opts),
            wilcoxon_vs_distribution(opts),
            crowding_hand_cases(),
        ],
    }
}

fn to_solutions(points: &[Vec<f64>]) -> Vec<Solution> {
    points
        .iter()
        .enumerate()
        .map(|(i, p)| Solution::from_values(i, p).expect("finite test point"))
        .collect()
}

/// 25 random sets in 2D and 25 in 3D, up to 20 points each, checked against
/// uniform sampling of the bounding box within three standard errors. The
/// 2D sets are also compared with the exact grid area.
pub fn hypervolume_vs_monte_carlo(opts: &SelftestOptions) -> OracleCheck {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut failures = Vec::new();
    let cases = 50;
    for case in 0..cases {
        let m = if case < 25 { 2 } else { 3 };
        let n = rng.gen_range(1..=20);
        let points: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..m).map(|_| rng.gen::<f64>()).collect())
            .collect();
        let reference: Vec<f64> = (0..m).map(|_| rng.gen_range(1.0..1.5)).collect();
        let lo: Vec<f64> = (0..m)
            .map(|i| points.iter().map(|p| p[i]).fold(f64::INFINITY, f64::min))
            .collect();
        let box_volume: f64 = lo.iter().zip(&reference).map(|(a, b)| b - a).product();

        let mut hits = 0usize;
        let mut sample = vec![0.0; m];
        for _ in 0..opts.mc_samples {
            for i in 0..m {
                sample[i] = rng.gen_range(lo[i]..reference[i]);
            }
            if points.iter().any(|p| p.iter().zip(&sample).all(|(a, s)| a <= s)) {
                hits += 1;
            }
        }
        let frac = hits as f64 / opts.mc_samples as f64;
        let estimate = box_volume * frac;
        let se = box_volume * (frac * (1.0 - frac) / opts.mc_samples as f64).sqrt();
        let exact = hypervolume(&points, &reference).expect("valid input") * opts.hv_scale;
        if (exact - estimate).abs() > 3.0 * se + 1e-12 {
            failures.push(format!(
                "set {case} (m={m}, n={n}): exact {exact:.6e}, sampled {estimate:.6e} ± {se:.1e}"
            ));
        }
        if m == 2 {
            let grid = grid_area(&points, &reference);
            if (exact - grid).abs() > 1e-12 * grid.max(1.0) {
                failures.push(format!("set {case} (m=2, n={n}): exact {exact:.15e}, grid {grid:.15e}"));
            }
        }
    }
    OracleCheck {
        name: "hypervolume vs Monte-Carlo".into(),
        cases,
        failures,
    }
}

/// Area of a union of 2D boxes `[p, r]` on the compressed coordinate grid.
fn grid_area(points: &[Vec<f64>], r: &[f64]) -> f64 {
    let mut xs: Vec<f64> = points.iter().map(|p| p[0]).chain([r[0]]).collect();
    let mut ys: Vec<f64> = points.iter().map(|p| p[1]).chain([r[1]]).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    ys.sort_by(f64::total_cmp);
    ys.dedup();
    let mut area = 0.0;
    for i in 0..xs.len() - 1 {
        for j in 0..ys.len() - 1 {
            if points.iter().any(|p| p[0] <= xs[i] && p[1] <= ys[j]) {
                area += (xs[i + 1] - xs[i]) * (ys[j + 1] - ys[j]);
            }
        }
    }
    area
}

fn subset_area(points: &[Vec<f64>], members: &[usize], r: &[f64]) -> f64 {
    let chosen: Vec<Vec<f64>> = members.iter().map(|&i| points[i].clone()).collect();
    grid_area(&chosen, r)
}

fn naive_removal(points: &[Vec<f64>], mu: usize, r: &[f64]) -> Vec<usize> {
    let mut alive: Vec<usize> = (0..points.len()).collect();
    while alive.len() > mu {
        let total = subset_area(points, &alive, r);
        let mut best: Option<(f64, usize)> = None;
        for pos in 0..alive.len() {
            let mut rest = alive.clone();
            rest.remove(pos);
            let loss = total - subset_area(points, &rest, r);
            if best.is_none_or(|(b, _)| loss < b) {
                best = Some((loss, pos));
            }
        }
        alive.remove(best.expect("non-empty").1);
    }
    alive
}

fn naive_inclusion(points: &[Vec<f64>], mu: usize, r: &[f64]) -> Vec<usize> {
    let mut chosen: Vec<usize> = Vec::new();
    while chosen.len() < mu {
        let base = subset_area(points, &chosen, r);
        let mut best: Option<(f64, usize)> = None;
        for i in 0..points.len() {
            if chosen.contains(&i) {
                continue;
            }
            let mut with = chosen.clone();
            with.push(i);
            let gain = subset_area(points, &with, r) - base;
            if best.is_none_or(|(b, _)| gain > b) {
                best = Some((gain, i));
            }
        }
        chosen.push(best.expect("candidates remain").1);
    }
    chosen.sort_unstable();
    chosen
}

fn best_subset(points: &[Vec<f64>], mu: usize, r: &[f64]) -> f64 {
    let n = points.len();
    let mut best: f64 = 0.0;
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize == mu {
            let members: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
            best = best.max(subset_area(points, &members, r));
        }
    }
    best
}

/// Greedy removal and inclusion on random 2D sets of up to 12 candidates
/// against a grid-based greedy oracle (exact agreement) and the best subset
/// found by enumeration (upper bound). Coordinates are multiples of 1/64 so
/// both sides compute areas exactly and ties are real ties.
pub fn greedy_vs_exhaustive(opts: &SelftestOptions) -> OracleCheck {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x5eed);
    let r = vec![1.0, 1.0];
    let mut ctx = PolicyContext::new(2, None);
    ctx.hv_ref_rule = HvRefRule::Fixed(r.clone());
    let mut failures = Vec::new();
    let mut cases = 0;
    for n in 2..=12usize {
        for mu in 1..=6usize.min(n - 1) {
            for rep in 0..6 {
                cases += 1;
                let points: Vec<Vec<f64>> = (0..n)
                    .map(|_| {
                        if rep % 2 == 0 {
                            // points near the anti-diagonal
                            let x = rng.gen_range(0..64) as f64 / 64.0;
                            vec![x, (63.0 - x * 64.0 + rng.gen_range(0..2) as f64) / 64.0]
                        } else {
                            vec![rng.gen_range(0..64) as f64 / 64.0, rng.gen_range(0..64) as f64 / 64.0]
                        }
                    })
                    .map(|p| p.into_iter().map(|v: f64| v.min(63.0 / 64.0)).collect())
                    .collect();
                let sols = to_solutions(&points);
                let optimum = best_subset(&points, mu, &r);
                let label = format!("n={n} mu={mu} rep={rep}");

                for (name, got, expected) in [
                    (
                        "removal",
                        truncate_sms_removal(&sols, mu, &ctx),
                        naive_removal(&points, mu, &r),
                    ),
                    (
                        "inclusion",
                        truncate_hv_inclusion(&sols, mu, &ctx),
                        naive_inclusion(&points, mu, &r),
                    ),
                ] {
                    let got: Vec<usize> = match got {
                        Ok(kept) => kept.iter().map(|s| s.id).collect(),
                        Err(e) => {
                            failures.push(format!("{label} {name}: {e}"));
                            continue;
                        }
                    };
                    if got != expected {
                        failures.push(format!("{label} {name}: kept {got:?}, oracle {expected:?}"));
                    }
                    let kept: Vec<Vec<f64>> = got.iter().map(|&i| points[i].clone()).collect();
                    let value = hypervolume(&kept, &r).expect("2D input") * opts.hv_scale;
                    if value > optimum + 1e-12 {
                        failures.push(format!("{label} {name}: {value} exceeds optimum {optimum}"));
                    }
                    let oracle_value = subset_area(&points, &expected, &r);
                    if (value - oracle_value).abs() > 1e-12 {
                        failures.push(format!("{label} {name}: volume {value}, oracle {oracle_value}"));
                    }
                }
            }
        }
    }
    OracleCheck {
        name: "greedy hypervolume selection vs enumeration".into(),
        cases,
        failures,
    }
}

/// Two-sided exact p-value of the rank-sum statistic for untied samples,
/// from the counting recursion over `(n1, n2, U)`.
fn rank_sum_distribution_p(x: &[f64], y: &[f64]) -> f64 {
    let (n1, n2) = (x.len(), y.len());
    let u: usize = x
        .iter()
        .map(|a| y.iter().filter(|b| *b < a).count())
        .sum();
    // counts[i][j][u]: arrangements of i x's and j y's with statistic u
    let max_u = n1 * n2;
    let mut counts = vec![vec![vec![0u64; max_u + 1]; n2 + 1]; n1 + 1];
    for j in 0..=n2 {
        counts[0][j][0] = 1;
    }
    for i in 1..=n1 {
        counts[i][0][0] = 1;
        for j in 1..=n2 {
            for v in 0..=i * j {
                // the largest element is an x (contributing j) or a y
                let from_x = if v >= j { counts[i - 1][j][v - j] } else { 0 };
                let from_y = counts[i][j - 1][v];
                counts[i][j][v] = from_x + from_y;
            }
        }
    }
    let dist = &counts[n1][n2];
    let total: u64 = dist.iter().sum();
    let centre = max_u as f64 / 2.0;
    let observed = (u as f64 - centre).abs();
    let extreme: u64 = (0..=max_u)
        .filter(|&v| (v as f64 - centre).abs() >= observed - 1e-9)
        .map(|v| dist[v])
        .sum();
    extreme as f64 / total as f64
}

/// Every sample-size pair with `n1 + n2 <= 12`, five random untied draws
/// each.
pub fn wilcoxon_vs_distribution(opts: &SelftestOptions) -> OracleCheck {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0xface);
    let mut failures = Vec::new();
    let mut cases = 0;
    for n1 in 1..12usize {
        for n2 in 1..=(12 - n1) {
            for _ in 0..5 {
                cases += 1;
                let x: Vec<f64> = (0..n1).map(|_| rng.gen::<f64>() + 0.1).collect();
                let y: Vec<f64> = (0..n2).map(|_| rng.gen::<f64>()).collect();
                let expected = rank_sum_distribution_p(&x, &y);
                match wilcoxon_rank_sum(&x, &y) {
                    Ok(p) if (p - expected).abs() <= 1e-12 => {}
                    Ok(p) => failures.push(format!("n1={n1} n2={n2}: p {p}, oracle {expected}")),
                    Err(e) => failures.push(format!("n1={n1} n2={n2}: {e}")),
                }
            }
        }
    }
    OracleCheck {
        name: "Wilcoxon rank-sum vs exact distribution".into(),
        cases,
        failures,
    }
}

/// Crowding distances and one-off truncations worked out by hand.
pub fn crowding_hand_cases() -> OracleCheck {
    let inf = f64::INFINITY;
    let mut failures = Vec::new();
    let distance_cases: [(&[&[f64]], &[f64]); 3] = [
        (&[&[0.0, 1.0], &[0.5, 0.5], &[1.0, 0.0]], &[inf, 2.0, inf]),
        (&[&[0.0, 1.0], &[1.0, 0.0]], &[inf, inf]),
        (
            &[&[0.0, 1.0], &[0.4, 0.6], &[0.45, 0.55], &[0.5, 0.5], &[1.0, 0.0]],
            &[inf, 0.9, 0.2, 1.1, inf],
        ),
    ];
    for (k, (points, expected)) in distance_cases.iter().enumerate() {
        let pts: Vec<Vec<f64>> = points.iter().map(|p| p.to_vec()).collect();
        let got = crowding_distance(&to_solutions(&pts));
        let ok = got.len() == expected.len()
            && got
                .iter()
                .zip(expected.iter())
                .all(|(a, b)| (a.is_infinite() && b.is_infinite()) || (a - b).abs() < 1e-12);
        if !ok {
            failures.push(format!("distance case {k}: got {got:?}, expected {expected:?}"));
        }
    }
    let pts = vec![
        vec![0.0, 1.0],
        vec![0.1, 0.9],
        vec![0.48, 0.52],
        vec![0.5, 0.5],
        vec![1.0, 0.0],
    ];
    let ctx = PolicyContext::new(2, None);
    match truncate_nsga2_oneoff(&to_solutions(&pts), 3, &ctx) {
        Ok(kept) => {
            let ids: Vec<usize> = kept.iter().map(|s| s.id).collect();
            if ids != [0, 3, 4] {
                failures.push(format!("one-off truncation kept {ids:?}, expected [0, 3, 4]"));
            }
        }
        Err(e) => failures.push(format!("one-off truncation: {e}")),
    }
    OracleCheck {
        name: "crowding distance hand cases".into(),
        cases: distance_cases.len() + 1,
        failures,
    }
}
