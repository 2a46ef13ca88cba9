//! Wilcoxon rank-sum tests and compact letter displays.

use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Combined sample size up to which p-values come from full enumeration.
pub const EXACT_LIMIT: usize = 12;

/// Mid-ranks (1-based) of `values`, aligned with the input.
pub fn midranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        let rank = (start + end + 1) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

fn check_sample(what: &'static str, v: &[f64]) -> Result<()> {
    if v.is_empty() {
        return Err(Error::EmptyInput(what));
    }
    if let Some(index) = v.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFinite { index });
    }
    Ok(())
}

/// Two-sided rank-sum p-value. Exact (conditional on ties) when
/// `x.len() + y.len() <= EXACT_LIMIT`, otherwise the normal approximation
/// with tie and continuity corrections.
pub fn wilcoxon_rank_sum(x: &[f64], y: &[f64]) -> Result<f64> {
    check_sample("rank-sum sample x", x)?;
    check_sample("rank-sum sample y", y)?;
    let pooled: Vec<f64> = x.iter().chain(y).copied().collect();
    let ranks = midranks(&pooled);
    let (n1, n) = (x.len(), pooled.len());
    let w: f64 = ranks[..n1].iter().sum();
    let expected = n1 as f64 * (n as f64 + 1.0) / 2.0;
    let observed = (w - expected).abs();

    if n <= EXACT_LIMIT {
        return Ok(exact_p(&ranks, n1, expected, observed));
    }

    let mut tie_term = 0.0;
    let mut sorted = pooled.clone();
    sorted.sort_by(f64::total_cmp);
    for group in sorted.chunk_by(|a, b| a == b) {
        let t = group.len() as f64;
        tie_term += t * t * t - t;
    }
    let (n1f, n2f, nf) = (n1 as f64, (n - n1) as f64, n as f64);
    let variance = n1f * n2f / 12.0 * ((nf + 1.0) - tie_term / (nf * (nf - 1.0)));
    if !(variance > 0.0) {
        return Ok(1.0);
    }
    let z = ((observed - 0.5).max(0.0)) / variance.sqrt();
    let normal = Normal::standard();
    Ok((2.0 * normal.sf(z)).min(1.0))
}

/// Share of all `C(n, n1)` rank subsets at least as far from the mean as
/// the observed one.
fn exact_p(ranks: &[f64], n1: usize, expected: f64, observed: f64) -> f64 {
    let n = ranks.len();
    let mut extreme = 0u64;
    let mut total = 0u64;
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != n1 {
            continue;
        }
        let s: f64 = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| ranks[i]).sum();
        total += 1;
        if (s - expected).abs() >= observed - 1e-9 {
            extreme += 1;
        }
    }
    extreme as f64 / total as f64
}

/// Letters per label; two labels share a letter iff their difference is not
/// significant.
#[derive(Debug, Clone, PartialEq)]
pub struct LetterAssignment {
    pub labels: Vec<String>,
    pub letters: Vec<String>,
}

impl LetterAssignment {
    pub fn get(&self, label: &str) -> Option<&str> {
        self.labels
            .iter()
            .position(|l| l == label)
            .map(|i| self.letters[i].as_str())
    }
}

/// Insert-and-absorb compact letter display. Letters are handed out in
/// ascending-mean order, so `a` marks the best (lowest) group.
pub fn compact_letters(
    labels: &[String],
    means: &[f64],
    pairwise_p: &[Vec<f64>],
    alpha: f64,
) -> Result<LetterAssignment> {
    let k = labels.len();
    if means.len() != k {
        return Err(Error::DimensionMismatch {
            expected: k,
            found: means.len(),
        });
    }
    if pairwise_p.len() != k || pairwise_p.iter().any(|r| r.len() != k) {
        return Err(Error::InvalidParameter(format!(
            "pairwise p-values must form a {k}x{k} matrix"
        )));
    }
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| means[a].total_cmp(&means[b]).then(a.cmp(&b)));
    let mut position = vec![0; k];
    for (pos, &i) in order.iter().enumerate() {
        position[i] = pos;
    }

    // columns hold label indices, sorted ascending
    let mut columns: Vec<Vec<usize>> = if k == 0 { Vec::new() } else { vec![(0..k).collect()] };
    for i in 0..k {
        for j in (i + 1)..k {
            if !(pairwise_p[i][j] < alpha) {
                continue;
            }
            let mut next = Vec::new();
            for col in columns {
                if col.contains(&i) && col.contains(&j) {
                    next.push(col.iter().copied().filter(|&v| v != i).collect());
                    next.push(col.iter().copied().filter(|&v| v != j).collect());
                } else {
                    next.push(col);
                }
            }
            columns = absorb(next);
        }
    }
    columns.sort_by_key(|col| col.iter().map(|&v| position[v]).min());

    let mut letters = vec![String::new(); k];
    for (c, col) in columns.iter().enumerate() {
        let letter = letter_name(c);
        for &v in col {
            letters[v].push_str(&letter);
        }
    }
    Ok(LetterAssignment {
        labels: labels.to_vec(),
        letters,
    })
}

/// Drops duplicate columns and columns contained in another column.
fn absorb(columns: Vec<Vec<usize>>) -> Vec<Vec<usize>> {
    let mut kept: Vec<Vec<usize>> = Vec::new();
    for (a, col) in columns.iter().enumerate() {
        let covered = columns.iter().enumerate().any(|(b, other)| {
            a != b
                && col.iter().all(|v| other.contains(v))
                && (other.len() > col.len() || b < a)
        });
        if !covered {
            kept.push(col.clone());
        }
    }
    kept
}

fn letter_name(mut c: usize) -> String {
    let mut s = Vec::new();
    loop {
        s.push(b'a' + (c % 26) as u8);
        if c < 26 {
            break;
        }
        c = c / 26 - 1;
    }
    s.reverse();
    String::from_utf8(s).expect("ascii")
}

/// One labelled sample, such as the 31 IGD values of a schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleGroup {
    pub label: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupSummary {
    pub label: String,
    pub mean: f64,
    pub std: f64,
    pub letters: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub groups: Vec<GroupSummary>,
    pub pairwise_p: Vec<Vec<f64>>,
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample standard deviation with the `n - 1` divisor; 0 for fewer than two
/// values or identical values.
pub fn std_dev(values: &[f64]) -> f64 {
    if values.len() < 2 || values.iter().all(|v| *v == values[0]) {
        return 0.0;
    }
    let m = mean(values);
    let ss: f64 = values.iter().map(|v| (v - m) * (v - m)).sum();
    (ss / (values.len() - 1) as f64).sqrt()
}

/// Mean, standard deviation and letters for each group.
pub fn summarize(groups: &[SampleGroup], alpha: f64) -> Result<Summary> {
    if groups.len() < 2 {
        return Err(Error::TooFewPoints {
            what: "summary groups",
            required: 2,
            found: groups.len(),
        });
    }
    for g in groups {
        check_sample("summary group", &g.values)?;
    }
    let k = groups.len();
    let mut pairwise_p = vec![vec![1.0; k]; k];
    for i in 0..k {
        for j in (i + 1)..k {
            let p = wilcoxon_rank_sum(&groups[i].values, &groups[j].values)?;
            pairwise_p[i][j] = p;
            pairwise_p[j][i] = p;
        }
    }
    let labels: Vec<String> = groups.iter().map(|g| g.label.clone()).collect();
    let means: Vec<f64> = groups.iter().map(|g| mean(&g.values)).collect();
    let letters = compact_letters(&labels, &means, &pairwise_p, alpha)?;
    Ok(Summary {
        groups: groups
            .iter()
            .zip(means)
            .zip(letters.letters)
            .map(|((g, mean), letters)| GroupSummary {
                label: g.label.clone(),
                mean,
                std: std_dev(&g.values),
                letters,
            })
            .collect(),
        pairwise_p,
    })
}

/// Scientific notation with `decimals` digits after the point and a signed
/// two-digit exponent: `3.718e-02`.
pub fn format_sci(v: f64, decimals: usize) -> String {
    let s = format!("{v:.decimals$e}");
    let (mantissa, exp) = s.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn labels(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("g{i}")).collect()
    }

    fn sig_matrix(k: usize, sig: &[(usize, usize)]) -> Vec<Vec<f64>> {
        let mut p = vec![vec![1.0; k]; k];
        for &(i, j) in sig {
            p[i][j] = 0.001;
            p[j][i] = 0.001;
        }
        p
    }

    #[test]
    fn rank_sum_examples() {
        assert_abs_diff_eq!(wilcoxon_rank_sum(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]).unwrap(), 0.1, epsilon = 1e-12);
        let x = [0.3, 0.1, 0.2, 0.5];
        assert_eq!(wilcoxon_rank_sum(&x, &x).unwrap(), 1.0);
        let big: Vec<f64> = (0..20).map(|i| i as f64).collect();
        assert_eq!(wilcoxon_rank_sum(&big, &big).unwrap(), 1.0);
        assert_eq!(wilcoxon_rank_sum(&[0.5; 31], &[0.5; 31]).unwrap(), 1.0);
    }

    #[test]
    fn rank_sum_rejects_empty() {
        assert!(wilcoxon_rank_sum(&[], &[1.0]).is_err());
    }

    #[test]
    fn normal_branch_matches_reference_value() {
        // x = 1..10, y = 11..20: W = 55, E = 105, sigma^2 = 175,
        // z = 49.5 / sqrt(175), p = 2 * (1 - Phi(z)).
        let x: Vec<f64> = (1..=10).map(f64::from).collect();
        let y: Vec<f64> = (11..=20).map(f64::from).collect();
        let p = wilcoxon_rank_sum(&x, &y).unwrap();
        assert_abs_diff_eq!(p, 1.826_717_911_095_5e-4, epsilon = 1e-12);
    }

    #[test]
    fn midranks_average_ties() {
        assert_eq!(midranks(&[3.0, 1.0, 3.0, 2.0]), vec![3.5, 1.0, 3.5, 2.0]);
    }

    #[test]
    fn letter_examples() {
        let means = [1.0, 2.0, 3.0];
        let all = compact_letters(&labels(3), &means, &sig_matrix(3, &[(0, 1), (0, 2), (1, 2)]), 0.05).unwrap();
        assert_eq!(all.letters, vec!["a", "b", "c"]);
        let none = compact_letters(&labels(3), &means, &sig_matrix(3, &[]), 0.05).unwrap();
        assert_eq!(none.letters, vec!["a", "a", "a"]);
        let mixed = compact_letters(&labels(3), &means, &sig_matrix(3, &[(0, 1), (0, 2)]), 0.05).unwrap();
        assert_eq!(mixed.letters, vec!["a", "b", "b"]);
        assert_eq!(mixed.get("g1"), Some("b"));
    }

    #[test]
    fn letters_follow_means_not_label_order() {
        let means = [3.0, 1.0, 2.0];
        let l = compact_letters(&labels(3), &means, &sig_matrix(3, &[(0, 1), (0, 2), (1, 2)]), 0.05).unwrap();
        assert_eq!(l.letters, vec!["c", "a", "b"]);
    }

    #[test]
    fn overlapping_groups() {
        // 0-2 significant only: 0 and 2 split, 1 sits in both columns
        let l = compact_letters(&labels(3), &[1.0, 2.0, 3.0], &sig_matrix(3, &[(0, 2)]), 0.05).unwrap();
        assert_eq!(l.letters, vec!["a", "ab", "b"]);
    }

    #[test]
    fn summary_of_identical_groups() {
        let groups: Vec<SampleGroup> = (0..3)
            .map(|i| SampleGroup {
                label: format!("s{i}"),
                values: vec![0.037; 31],
            })
            .collect();
        let s = summarize(&groups, 0.05).unwrap();
        for g in &s.groups {
            assert_eq!(g.std, 0.0);
            assert_eq!(g.letters, "a");
        }
    }

    #[test]
    fn std_uses_n_minus_one() {
        assert_abs_diff_eq!(std_dev(&[1.0, 2.0, 3.0, 4.0]), (5.0f64 / 3.0).sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn sci_format() {
        assert_eq!(format_sci(0.03718, 3), "3.718e-02");
        assert_eq!(format_sci(0.0, 1), "0.0e+00");
        assert_eq!(format_sci(0.22291, 3), "2.229e-01");
        assert_eq!(format_sci(123456.0, 3), "1.235e+05");
        assert_eq!(format_sci(9.9996e-3, 3), "1.000e-02");
    }

    #[test]
    fn letter_names_extend_past_z() {
        assert_eq!(letter_name(0), "a");
        assert_eq!(letter_name(25), "z");
        assert_eq!(letter_name(26), "aa");
    }
}
