//! Exact hypervolume for two and three objectives.
//!
//! Two-objective inputs are embedded as three-objective points with a zero
//! third coordinate and a unit-height reference slab, so one sweep serves
//! both cases. The sweep runs over ascending third coordinate while a 2D
//! staircase tracks the union area of everything seen so far.
//!
//! Exclusive contributions are computed per point against the remaining
//! points projected onto its box (`max(y, z)`). Contributions never shrink
//! when points are removed and gains never grow when points are added, so
//! both greedy loops keep stale values in a heap as bounds and re-evaluate
//! only the entry on top.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::pareto::check_dims;

pub(crate) type P3 = [f64; 3];

/// Reference (upper) corner for the hypervolume.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferencePoint(Vec<f64>);

impl ReferencePoint {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "reference point must be finite".into(),
            ));
        }
        Ok(Self(values))
    }

    /// `factor` times the componentwise maximum of `points`. Non-positive
    /// maxima are shifted up by `factor - 1` instead so the corner still lies
    /// strictly beyond every point.
    pub fn scaled_max<P: AsRef<[f64]>>(points: &[P], factor: f64) -> Result<Self> {
        let first = points
            .first()
            .ok_or(Error::EmptyInput("reference point rule"))?
            .as_ref();
        let mut max = first.to_vec();
        for p in points {
            let p = p.as_ref();
            check_dims(first, p)?;
            for (m, v) in max.iter_mut().zip(p) {
                *m = m.max(*v);
            }
        }
        for m in &mut max {
            *m = if *m > 0.0 {
                *m * factor
            } else {
                *m + (factor - 1.0)
            };
        }
        Self::new(max)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

impl AsRef<[f64]> for ReferencePoint {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

fn check_input<P: AsRef<[f64]>>(set: &[P], reference: &[f64]) -> Result<()> {
    let m = reference.len();
    if !(2..=3).contains(&m) {
        return Err(Error::UnsupportedDimension(m));
    }
    for p in set {
        check_dims(reference, p.as_ref())?;
    }
    Ok(())
}

#[inline]
pub(crate) fn embed(p: &[f64]) -> P3 {
    match p.len() {
        2 => [p[0], p[1], 0.0],
        _ => [p[0], p[1], p[2]],
    }
}

#[inline]
pub(crate) fn embed_ref(r: &[f64]) -> P3 {
    match r.len() {
        2 => [r[0], r[1], 1.0],
        _ => [r[0], r[1], r[2]],
    }
}

#[inline]
fn inside(p: &P3, r: &P3) -> bool {
    p[0] < r[0] && p[1] < r[1] && p[2] < r[2]
}

#[inline]
fn box_volume(p: &P3, r: &P3) -> f64 {
    if inside(p, r) {
        (r[0] - p[0]) * (r[1] - p[1]) * (r[2] - p[2])
    } else {
        0.0
    }
}

fn by_height(a: &P3, b: &P3) -> Ordering {
    a[2].total_cmp(&b[2])
        .then(a[0].total_cmp(&b[0]))
        .then(a[1].total_cmp(&b[1]))
}

/// Union of the boxes `[p, (rx, ry)]` in the plane, as a staircase with
/// ascending x and strictly descending y.
#[derive(Debug, Default)]
pub(crate) struct Staircase {
    steps: Vec<(f64, f64)>,
    rx: f64,
    ry: f64,
    area: f64,
}

impl Staircase {
    pub(crate) fn reset(&mut self, rx: f64, ry: f64) {
        self.steps.clear();
        self.rx = rx;
        self.ry = ry;
        self.area = 0.0;
    }

    pub(crate) fn area(&self) -> f64 {
        self.area
    }

    /// Adds `(x, y)`; returns false when it is weakly dominated by the
    /// current staircase (and therefore changes nothing).
    pub(crate) fn insert(&mut self, x: f64, y: f64) -> bool {
        let idx = self.steps.partition_point(|s| s.0 <= x);
        if idx > 0 && self.steps[idx - 1].1 <= y {
            return false;
        }
        let start = if idx > 0 && self.steps[idx - 1].0 == x {
            idx - 1
        } else {
            idx
        };
        let mut height = if idx > 0 { self.steps[idx - 1].1 } else { self.ry };
        let mut u = x;
        let mut end = idx;
        let mut added = 0.0;
        while end < self.steps.len() {
            let (qx, qy) = self.steps[end];
            added += (height - y) * (qx - u);
            if qy < y {
                break;
            }
            u = qx;
            height = qy;
            end += 1;
        }
        if end == self.steps.len() {
            added += (height - y) * (self.rx - u);
        }
        self.steps.splice(start..end, std::iter::once((x, y)));
        self.area += added;
        true
    }
}

/// Volume of the union of boxes; `points` must be sorted by [`by_height`].
fn sweep_volume(points: &[P3], r: &P3, stair: &mut Staircase) -> f64 {
    stair.reset(r[0], r[1]);
    let mut volume = 0.0;
    let mut prev = match points.first() {
        Some(p) => p[2],
        None => return 0.0,
    };
    for p in points {
        volume += stair.area() * (p[2] - prev);
        prev = p[2];
        stair.insert(p[0], p[1]);
    }
    volume + stair.area() * (r[2] - prev)
}

/// Lebesgue measure of the union of `[z, reference]` over the set. Points
/// that do not strictly dominate the reference contribute nothing.
pub fn hypervolume<P: AsRef<[f64]>>(set: &[P], reference: &[f64]) -> Result<f64> {
    check_input(set, reference)?;
    let r = embed_ref(reference);
    let mut pts: Vec<P3> = set
        .iter()
        .map(|p| embed(p.as_ref()))
        .filter(|p| inside(p, &r))
        .collect();
    pts.sort_by(by_height);
    Ok(sweep_volume(&pts, &r, &mut Staircase::default()))
}

/// Volume dominated by `z` alone, i.e. not covered by any of `others`.
/// `others` must be in ascending third coordinate.
pub(crate) fn exclusive_volume<'a, I>(z: &P3, others: I, r: &P3, stair: &mut Staircase) -> f64
where
    I: Iterator<Item = &'a P3>,
{
    if !inside(z, r) {
        return 0.0;
    }
    let face = (r[0] - z[0]) * (r[1] - z[1]);
    stair.reset(r[0], r[1]);
    let mut prev = z[2];
    let mut exclusive = 0.0;
    for y in others {
        if !inside(y, r) {
            continue;
        }
        let h = y[2].max(z[2]);
        exclusive += (face - stair.area()).max(0.0) * (h - prev);
        prev = h;
        if y[0] <= z[0] && y[1] <= z[1] {
            // From this height up the face of z is fully covered.
            return exclusive;
        }
        stair.insert(y[0].max(z[0]), y[1].max(z[1]));
    }
    exclusive + (face - stair.area()).max(0.0) * (r[2] - prev)
}

fn height_order(points: &[P3]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| by_height(&points[a], &points[b]).then(a.cmp(&b)));
    order
}

/// Hypervolume lost by removing each point, aligned with the input order.
pub fn hv_contributions<P: AsRef<[f64]>>(set: &[P], reference: &[f64]) -> Result<Vec<f64>> {
    check_input(set, reference)?;
    let pts: Vec<P3> = set.iter().map(|p| embed(p.as_ref())).collect();
    let r = embed_ref(reference);
    let order = height_order(&pts);
    let mut stair = Staircase::default();
    Ok((0..pts.len())
        .map(|i| {
            let others = order.iter().filter(|&&j| j != i).map(|&j| &pts[j]);
            exclusive_volume(&pts[i], others, &r, &mut stair)
        })
        .collect())
}

/// Greedy hypervolume removal down to `k` points.
///
/// Each step drops the point with the smallest exclusive contribution; ties
/// go to the smaller `tie_keys` entry. Returns the surviving indices in
/// ascending order.
pub(crate) fn greedy_removal(points: &[P3], tie_keys: &[usize], reference: &P3, k: usize) -> Vec<usize> {
    let n = points.len();
    if n <= k {
        return (0..n).collect();
    }
    let mut order = height_order(points);
    let mut alive = vec![true; n];
    let mut stair = Staircase::default();
    let mut heap: BinaryHeap<Reverse<(Key, usize, usize, usize)>> = BinaryHeap::with_capacity(n);
    for i in 0..n {
        let others = order.iter().filter(|&&j| j != i).map(|&j| &points[j]);
        let c = exclusive_volume(&points[i], others, reference, &mut stair);
        heap.push(Reverse((Key(c), tie_keys[i], i, 0)));
    }
    let mut removed = 0;
    while n - removed > k {
        let Reverse((_, tie, i, stamp)) = heap.pop().expect("live entries remain");
        if stamp == removed {
            alive[i] = false;
            removed += 1;
            if removed % 64 == 0 {
                order.retain(|&j| alive[j]);
            }
            continue;
        }
        let others = order
            .iter()
            .filter(|&&j| j != i && alive[j])
            .map(|&j| &points[j]);
        let c = exclusive_volume(&points[i], others, reference, &mut stair);
        heap.push(Reverse((Key(c), tie, i, removed)));
    }
    (0..n).filter(|&i| alive[i]).collect()
}

/// `f64` wrapper with a total order, for heaps.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Key(f64);

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Greedy hypervolume-maximising selection of `k` points.
///
/// Each step adds the point with the largest marginal gain; ties go to the
/// smaller `tie_keys` entry. Gains never increase as the selection grows,
/// so stale heap entries are upper bounds and lazy re-evaluation yields the
/// same picks as a full rescan. Returns indices in selection order.
pub(crate) fn greedy_inclusion(points: &[P3], tie_keys: &[usize], reference: &P3, k: usize) -> Vec<usize> {
    let mut heap: BinaryHeap<(Key, Reverse<usize>, usize, usize)> = points
        .iter()
        .enumerate()
        .map(|(i, p)| (Key(box_volume(p, reference)), Reverse(tie_keys[i]), i, 0))
        .collect();
    let mut selected: Vec<usize> = Vec::with_capacity(k);
    // selected points kept in sweep order for the exclusive-volume pass
    let mut sorted_selected: Vec<usize> = Vec::with_capacity(k);
    let mut stair = Staircase::default();
    while selected.len() < k {
        let Some((_, tie, i, stamp)) = heap.pop() else {
            break;
        };
        if stamp == selected.len() {
            selected.push(i);
            let pos = sorted_selected
                .partition_point(|&j| by_height(&points[j], &points[i]) != Ordering::Greater);
            sorted_selected.insert(pos, i);
            continue;
        }
        let gain = exclusive_volume(
            &points[i],
            sorted_selected.iter().map(|&j| &points[j]),
            reference,
            &mut stair,
        );
        heap.push((Key(gain), tie, i, selected.len()));
    }
    selected
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn single_box() {
        let hv = hypervolume(&[[0.5, 0.5, 0.5]], &[1.0, 1.0, 1.0]).unwrap();
        assert_abs_diff_eq!(hv, 0.125, epsilon = 1e-15);
    }

    #[test]
    fn two_boxes_inclusion_exclusion() {
        let hv = hypervolume(&[[0.2, 0.6, 0.6], [0.6, 0.2, 0.6]], &[1.0, 1.0, 1.0]).unwrap();
        assert_abs_diff_eq!(hv, 0.128 + 0.128 - 0.064, epsilon = 1e-12);
    }

    #[test]
    fn empty_set_is_zero() {
        let empty: [[f64; 3]; 0] = [];
        assert_eq!(hypervolume(&empty, &[1.0, 1.0, 1.0]).unwrap(), 0.0);
    }

    #[test]
    fn unsupported_dimension() {
        assert!(matches!(
            hypervolume(&[[0.0; 4]], &[1.0; 4]),
            Err(Error::UnsupportedDimension(4))
        ));
    }

    #[test]
    fn points_outside_reference_ignored() {
        let hv = hypervolume(&[[0.5, 0.5], [1.5, 0.0]], &[1.0, 1.0]).unwrap();
        assert_abs_diff_eq!(hv, 0.25, epsilon = 1e-15);
    }

    #[test]
    fn staircase_contributions_2d() {
        let c = hv_contributions(&[[0.0, 1.0], [0.5, 0.5], [1.0, 0.0]], &[2.0, 2.0]).unwrap();
        assert_eq!(c, vec![0.5, 0.25, 0.5]);
    }

    #[test]
    fn singleton_contribution_is_box() {
        let c = hv_contributions(&[[0.25, 0.5, 0.75]], &[1.0, 1.0, 1.0]).unwrap();
        assert_abs_diff_eq!(c[0], 0.75 * 0.5 * 0.25, epsilon = 1e-15);
    }

    #[test]
    fn duplicates_contribute_nothing() {
        let c = hv_contributions(&[[0.3, 0.4, 0.5], [0.3, 0.4, 0.5]], &[1.0, 1.0, 1.0]).unwrap();
        assert_eq!(c, vec![0.0, 0.0]);
    }

    #[test]
    fn staircase_handles_equal_coordinates() {
        let mut s = Staircase::default();
        s.reset(4.0, 4.0);
        assert!(s.insert(1.0, 3.0));
        assert!(s.insert(3.0, 1.0));
        assert!(s.insert(1.0, 2.0));
        assert!(!s.insert(3.0, 2.0));
        assert!(s.insert(2.0, 1.0));
        // boxes: [1,4]x[2,4] and [2,4]x[1,4] → 6 + 6 - 4
        assert_abs_diff_eq!(s.area(), 8.0, epsilon = 1e-12);
    }

    #[test]
    fn scaled_max_reference() {
        let r = ReferencePoint::scaled_max(&[[1.0, 0.5], [0.0, -1.0]], 1.1).unwrap();
        assert_abs_diff_eq!(r.values()[0], 1.1, epsilon = 1e-15);
        assert_abs_diff_eq!(r.values()[1], 0.55, epsilon = 1e-15);
        let r = ReferencePoint::scaled_max(&[[0.0, -1.0]], 1.1).unwrap();
        assert_abs_diff_eq!(r.values()[0], 0.1, epsilon = 1e-15);
        assert_abs_diff_eq!(r.values()[1], -0.9, epsilon = 1e-15);
    }

    #[test]
    fn removal_example() {
        let pts = vec![[0.0, 1.0, 0.0], [0.5, 0.5, 0.0], [1.0, 0.0, 0.0]];
        assert_eq!(greedy_removal(&pts, &[0, 1, 2], &[2.0, 2.0, 1.0], 2), vec![0, 2]);
        // the two ends tie after the middle point goes; the smaller key is dropped
        assert_eq!(greedy_removal(&pts, &[0, 1, 2], &[2.0, 2.0, 1.0], 1), vec![2]);
    }

    #[test]
    fn removal_matches_full_rescan() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let pts: Vec<P3> = (0..40)
                .map(|_| {
                    let a: f64 = rng.gen();
                    let b: f64 = rng.gen::<f64>() * (1.0 - a);
                    [a, b, 1.0 - a - b]
                })
                .collect();
            let r = [1.1, 1.1, 1.1];
            let keys: Vec<usize> = (0..pts.len()).collect();
            let mut alive: Vec<usize> = keys.clone();
            while alive.len() > 10 {
                let sub: Vec<P3> = alive.iter().map(|&i| pts[i]).collect();
                let c = hv_contributions(&sub, &r).unwrap();
                let worst = (0..sub.len())
                    .min_by(|&a, &b| c[a].total_cmp(&c[b]).then(a.cmp(&b)))
                    .unwrap();
                alive.remove(worst);
            }
            assert_eq!(greedy_removal(&pts, &keys, &r, 10), alive);
        }
    }

    #[test]
    fn inclusion_example() {
        let pts = vec![[0.0, 1.0, 0.0], [0.5, 0.5, 0.0], [1.0, 0.0, 0.0]];
        let picks = greedy_inclusion(&pts, &[0, 1, 2], &[2.0, 2.0, 1.0], 2);
        assert_eq!(picks, vec![1, 0]);
    }
}

