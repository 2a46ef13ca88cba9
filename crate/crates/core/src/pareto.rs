//! Objective-space primitives: vectors, Pareto dominance, nondominated
//! sorting and the bounded archive container.
//!
//! Everything here assumes minimisation.

use std::ops::Deref;

use crate::error::{Error, Result};

/// A point in objective space. Entries are finite and there are at least two
/// of them.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveVector(Vec<f64>);

impl ObjectiveVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::TooFewObjectives(values.len()));
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for ObjectiveVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl AsRef<[f64]> for ObjectiveVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for ObjectiveVector {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Self::new(values)
    }
}

/// An objective vector tagged with its arrival id. Ids drive every
/// deterministic tie-break in the crate.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub id: usize,
    pub objectives: ObjectiveVector,
}

impl Solution {
    pub fn new(id: usize, objectives: ObjectiveVector) -> Self {
        Self { id, objectives }
    }

    /// Convenience for tests and small literals.
    pub fn from_values(id: usize, values: &[f64]) -> Result<Self> {
        Ok(Self::new(id, ObjectiveVector::new(values.to_vec())?))
    }

    pub fn values(&self) -> &[f64] {
        &self.objectives
    }
}

impl AsRef<[f64]> for Solution {
    fn as_ref(&self) -> &[f64] {
        &self.objectives
    }
}

/// One layer of a nondominated sort.
#[derive(Debug, Clone, PartialEq)]
pub struct Front {
    pub rank: usize,
    pub members: Vec<Solution>,
}

/// A capacity-bounded set of solutions.
#[derive(Debug, Clone, PartialEq)]
pub struct Archive {
    capacity: usize,
    members: Vec<Solution>,
}

impl Archive {
    pub fn new(capacity: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::InvalidParameter(
                "archive capacity must be positive".into(),
            ));
        }
        Ok(Self {
            capacity,
            members: Vec::new(),
        })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn members(&self) -> &[Solution] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Replaces the members wholesale. Callers are responsible for having
    /// truncated to capacity first.
    pub(crate) fn replace(&mut self, members: Vec<Solution>) {
        debug_assert!(members.len() <= self.capacity);
        self.members = members;
    }

    pub fn into_members(self) -> Vec<Solution> {
        self.members
    }

    pub fn ids(&self) -> Vec<usize> {
        let mut ids: Vec<usize> = self.members.iter().map(|s| s.id).collect();
        ids.sort_unstable();
        ids
    }
}

pub(crate) fn check_dims(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    Ok(())
}

/// `a` Pareto-dominates `b`: no worse everywhere and not equal.
pub fn dominates(a: &[f64], b: &[f64]) -> Result<bool> {
    check_dims(a, b)?;
    Ok(dominates_unchecked(a, b))
}

#[inline]
pub(crate) fn dominates_unchecked(a: &[f64], b: &[f64]) -> bool {
    let mut strictly_better = false;
    for (x, y) in a.iter().zip(b) {
        if x > y {
            return false;
        }
        if x < y {
            strictly_better = true;
        }
    }
    strictly_better
}

fn check_common_dim(set: &[Solution]) -> Result<()> {
    if let Some(first) = set.first() {
        for s in &set[1..] {
            check_dims(first.values(), s.values())?;
        }
    }
    Ok(())
}

/// Members not dominated by any other member, in input order. Equal vectors
/// do not dominate each other, so duplicates survive together.
pub fn nondominated_filter(set: &[Solution]) -> Result<Vec<Solution>> {
    check_common_dim(set)?;
    Ok(set
        .iter()
        .filter(|s| {
            !set
                .iter()
                .any(|o| dominates_unchecked(o.values(), s.values()))
        })
        .cloned()
        .collect())
}

/// Deb's fast nondominated sort. Fronts come out in rank order; members of
/// each front keep their input order.
pub fn fast_nondominated_sort(set: &[Solution]) -> Result<Vec<Front>> {
    check_common_dim(set)?;
    Ok(nondominated_ranks(set)
        .into_iter()
        .enumerate()
        .map(|(rank, idx)| Front {
            rank,
            members: idx.into_iter().map(|i| set[i].clone()).collect(),
        })
        .collect())
}

/// Index form of [`fast_nondominated_sort`]: one ascending index list per front.
pub(crate) fn nondominated_ranks(set: &[Solution]) -> Vec<Vec<usize>> {
    let n = set.len();
    let mut dominated_by_count = vec![0usize; n];
    let mut dominates_list: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for j in (i + 1)..n {
            let (a, b) = (set[i].values(), set[j].values());
            if dominates_unchecked(a, b) {
                dominates_list[i].push(j);
                dominated_by_count[j] += 1;
            } else if dominates_unchecked(b, a) {
                dominates_list[j].push(i);
                dominated_by_count[i] += 1;
            }
        }
    }

    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| dominated_by_count[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            for &j in &dominates_list[i] {
                dominated_by_count[j] -= 1;
                if dominated_by_count[j] == 0 {
                    next.push(j);
                }
            }
        }
        next.sort_unstable();
        fronts.push(std::mem::replace(&mut current, next));
    }
    fronts
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sols(points: &[&[f64]]) -> Vec<Solution> {
        points
            .iter()
            .enumerate()
            .map(|(i, p)| Solution::from_values(i, p).unwrap())
            .collect()
    }

    fn values(set: &[Solution]) -> Vec<Vec<f64>> {
        set.iter().map(|s| s.values().to_vec()).collect()
    }

    #[test]
    fn dominance_examples() {
        assert!(dominates(&[1.0, 2.0, 3.0], &[2.0, 2.0, 3.0]).unwrap());
        assert!(!dominates(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap());
        assert!(!dominates(&[0.0, 1.0], &[1.0, 0.0]).unwrap());
    }

    #[test]
    fn dominance_dimension_mismatch() {
        assert!(matches!(
            dominates(&[0.0, 1.0], &[1.0, 0.0, 2.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn objective_vector_rejects_bad_input() {
        assert!(ObjectiveVector::new(vec![1.0]).is_err());
        assert!(ObjectiveVector::new(vec![1.0, f64::NAN]).is_err());
        assert!(ObjectiveVector::new(vec![1.0, f64::INFINITY]).is_err());
    }

    #[test]
    fn filter_examples() {
        let set = sols(&[&[0.0, 1.0], &[1.0, 0.0], &[1.0, 1.0]]);
        assert_eq!(
            values(&nondominated_filter(&set).unwrap()),
            vec![vec![0.0, 1.0], vec![1.0, 0.0]]
        );

        let set = sols(&[&[0.0, 1.0], &[1.0, 0.0]]);
        assert_eq!(nondominated_filter(&set).unwrap(), set);

        let set = sols(&[&[1.0, 2.0, 3.0], &[2.0, 3.0, 4.0], &[3.0, 1.0, 2.0]]);
        assert_eq!(
            values(&nondominated_filter(&set).unwrap()),
            vec![vec![1.0, 2.0, 3.0], vec![3.0, 1.0, 2.0]]
        );

        assert!(nondominated_filter(&[]).unwrap().is_empty());
    }

    #[test]
    fn filter_keeps_duplicates() {
        let set = sols(&[&[0.5, 0.5], &[0.5, 0.5], &[1.0, 1.0]]);
        let kept = nondominated_filter(&set).unwrap();
        assert_eq!(kept.iter().map(|s| s.id).collect::<Vec<_>>(), vec![0, 1]);
    }

    #[test]
    fn sort_examples() {
        let fronts = fast_nondominated_sort(&sols(&[&[0.0, 1.0], &[1.0, 0.0]])).unwrap();
        assert_eq!(fronts.len(), 1);

        let fronts =
            fast_nondominated_sort(&sols(&[&[0.0, 0.0], &[1.0, 1.0], &[2.0, 2.0]])).unwrap();
        assert_eq!(fronts.len(), 3);
        assert!(fronts.iter().all(|f| f.members.len() == 1));

        let fronts = fast_nondominated_sort(&sols(&[
            &[0.0, 1.0],
            &[1.0, 0.0],
            &[1.0, 1.0],
            &[2.0, 2.0],
        ]))
        .unwrap();
        let ids: Vec<Vec<usize>> = fronts
            .iter()
            .map(|f| f.members.iter().map(|s| s.id).collect())
            .collect();
        assert_eq!(ids, vec![vec![0, 1], vec![2], vec![3]]);
        assert_eq!(fronts[2].rank, 2);
    }

    #[test]
    fn archive_rejects_zero_capacity() {
        assert!(Archive::new(0).is_err());
    }
}
