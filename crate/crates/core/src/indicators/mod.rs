//! Quality indicators and per-solution fitness measures.

pub mod hypervolume;

pub use hypervolume::{hv_contributions, hypervolume, ReferencePoint};

use crate::error::{Error, Result};
use crate::pareto::check_dims;

/// Reference front for IGD.
#[derive(Debug, Clone, PartialEq)]
pub struct IgdReferenceSet(Vec<Vec<f64>>);

impl IgdReferenceSet {
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self> {
        let first = points.first().ok_or(Error::EmptyInput("IGD reference set"))?;
        for p in &points[1..] {
            check_dims(first, p)?;
        }
        Ok(Self(points))
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Smallest `e` such that `a` shifted down by `e` weakly dominates `b`.
pub fn additive_epsilon(a: &[f64], b: &[f64]) -> Result<f64> {
    check_dims(a, b)?;
    Ok(additive_epsilon_unchecked(a, b))
}

#[inline]
pub(crate) fn additive_epsilon_unchecked(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| x - y)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Objectives rescaled to `[0, 1]` over the set; flat objectives map to 0.
pub(crate) fn rescale_unit<P: AsRef<[f64]>>(set: &[P]) -> Vec<Vec<f64>> {
    let m = set[0].as_ref().len();
    let mut lo = vec![f64::INFINITY; m];
    let mut hi = vec![f64::NEG_INFINITY; m];
    for p in set {
        for (i, v) in p.as_ref().iter().enumerate() {
            lo[i] = lo[i].min(*v);
            hi[i] = hi[i].max(*v);
        }
    }
    set.iter()
        .map(|p| {
            p.as_ref()
                .iter()
                .enumerate()
                .map(|(i, v)| {
                    let span = hi[i] - lo[i];
                    if span > 0.0 {
                        (v - lo[i]) / span
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect()
}

/// Rescaled objectives plus the IBEA normaliser `c = max |I(y, x)|` over
/// ordered pairs (1 when every indicator value is zero).
pub(crate) struct IbeaScaling {
    pub(crate) scaled: Vec<Vec<f64>>,
    pub(crate) c: f64,
}

impl IbeaScaling {
    pub(crate) fn new<P: AsRef<[f64]>>(set: &[P]) -> Self {
        let scaled = rescale_unit(set);
        let mut c: f64 = 0.0;
        for (y, sy) in scaled.iter().enumerate() {
            for (x, sx) in scaled.iter().enumerate() {
                if x != y {
                    c = c.max(additive_epsilon_unchecked(sy, sx).abs());
                }
            }
        }
        if c == 0.0 {
            c = 1.0;
        }
        Self { scaled, c }
    }

    /// `exp(-I(y, x) / (κ c))`, the magnitude of y's pressure on x.
    #[inline]
    pub(crate) fn pressure(&self, y: usize, x: usize, kappa: f64) -> f64 {
        (-additive_epsilon_unchecked(&self.scaled[y], &self.scaled[x]) / (kappa * self.c)).exp()
    }
}

/// IBEA fitness `F(x) = Σ_{y≠x} -exp(-I(y,x) / (κ c))` with the additive
/// ε-indicator on objectives rescaled to `[0, 1]`. Lower is worse.
pub fn ibea_fitness<P: AsRef<[f64]>>(set: &[P], kappa: f64) -> Result<Vec<f64>> {
    if set.len() < 2 {
        return Err(Error::TooFewPoints {
            what: "IBEA fitness",
            required: 2,
            found: set.len(),
        });
    }
    if !(kappa > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "kappa must be positive, got {kappa}"
        )));
    }
    for p in &set[1..] {
        check_dims(set[0].as_ref(), p.as_ref())?;
    }
    let scaling = IbeaScaling::new(set);
    let n = set.len();
    Ok((0..n)
        .map(|x| {
            (0..n)
                .filter(|&y| y != x)
                .map(|y| -scaling.pressure(y, x, kappa))
                .sum()
        })
        .collect())
}

#[inline]
fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Mean distance from each reference point to its nearest set member.
pub fn igd<P: AsRef<[f64]>>(set: &[P], refset: &IgdReferenceSet) -> Result<f64> {
    if set.is_empty() {
        return Err(Error::EmptyInput("IGD"));
    }
    let r0 = &refset.points()[0];
    for p in set {
        check_dims(r0, p.as_ref())?;
    }
    let total: f64 = refset
        .points()
        .iter()
        .map(|r| {
            set.iter()
                .map(|z| squared_distance(r, z.as_ref()))
                .fold(f64::INFINITY, f64::min)
                .sqrt()
        })
        .sum();
    Ok(total / refset.len() as f64)
}

/// Projection length along `w` (clamped at zero) and perpendicular distance
/// of `f - ideal` from the ray spanned by `w`.
fn pbi_parts(f: &[f64], w: &[f64], ideal: &[f64]) -> Result<(f64, f64)> {
    check_dims(f, w)?;
    check_dims(f, ideal)?;
    let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::ZeroWeight);
    }
    let mut along = 0.0;
    for ((fi, zi), wi) in f.iter().zip(ideal).zip(w) {
        along += (fi - zi) * wi / norm;
    }
    let d1 = along.max(0.0);
    let d2 = f
        .iter()
        .zip(ideal)
        .zip(w)
        .map(|((fi, zi), wi)| {
            let g = fi - zi - d1 * wi / norm;
            g * g
        })
        .sum::<f64>()
        .sqrt();
    Ok((d1, d2))
}

/// Penalty-based boundary intersection: `d1 + θ d2`.
pub fn pbi(f: &[f64], w: &[f64], ideal: &[f64], theta: f64) -> Result<f64> {
    let (d1, d2) = pbi_parts(f, w, ideal)?;
    Ok(d1 + theta * d2)
}

/// Distance from `f - ideal` to the line spanned by `w`.
pub fn perpendicular_distance(f: &[f64], w: &[f64], ideal: &[f64]) -> Result<f64> {
    check_dims(f, w)?;
    check_dims(f, ideal)?;
    let norm2 = w.iter().map(|v| v * v).sum::<f64>();
    if norm2 == 0.0 {
        return Err(Error::ZeroWeight);
    }
    let g: Vec<f64> = f.iter().zip(ideal).map(|(a, b)| a - b).collect();
    let t = g.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / norm2;
    Ok(g
        .iter()
        .zip(w)
        .map(|(gi, wi)| (gi - t * wi).powi(2))
        .sum::<f64>()
        .sqrt())
}
