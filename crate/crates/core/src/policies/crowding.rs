//! NSGA-II style truncation: nondominated sorting, then crowding distance on
//! the front that does not fit.

use std::cmp::Ordering;

use super::{check_candidates, keep_indices, PolicyContext};
use crate::error::Result;
use crate::pareto::{nondominated_ranks, Solution};

const NONE: usize = usize::MAX;

/// Whole fronts that fit, plus the splitting front and how many of it to keep.
pub(crate) struct FrontSplit {
    pub(crate) kept: Vec<usize>,
    pub(crate) splitting: Vec<usize>,
    pub(crate) take: usize,
}

pub(crate) fn split_fronts(cands: &[Solution], mu: usize) -> FrontSplit {
    let mut kept = Vec::new();
    for front in nondominated_ranks(cands) {
        if kept.len() + front.len() <= mu {
            kept.extend(front);
            if kept.len() == mu {
                break;
            }
        } else {
            let take = mu - kept.len();
            return FrontSplit {
                kept,
                splitting: front,
                take,
            };
        }
    }
    FrontSplit {
        kept,
        splitting: Vec::new(),
        take: 0,
    }
}

/// Per-objective sorted neighbour lists over a front, with crowding
/// distances that stay identical to a from-scratch computation as members
/// are removed.
struct CrowdingLists<'a> {
    points: Vec<&'a [f64]>,
    prev: Vec<Vec<usize>>,
    next: Vec<Vec<usize>>,
    first: Vec<usize>,
    last: Vec<usize>,
    parts: Vec<Vec<f64>>,
    distance: Vec<f64>,
    alive: Vec<bool>,
}

impl<'a> CrowdingLists<'a> {
    fn new(points: Vec<&'a [f64]>, ids: &[usize]) -> Self {
        let n = points.len();
        let m = points.first().map_or(0, |p| p.len());
        let mut lists = Self {
            prev: vec![vec![NONE; n]; m],
            next: vec![vec![NONE; n]; m],
            first: vec![NONE; m],
            last: vec![NONE; m],
            parts: vec![vec![0.0; n]; m],
            distance: vec![0.0; n],
            alive: vec![true; n],
            points,
        };
        for k in 0..m {
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| {
                lists.points[a][k]
                    .total_cmp(&lists.points[b][k])
                    .then(ids[a].cmp(&ids[b]))
            });
            for w in order.windows(2) {
                lists.next[k][w[0]] = w[1];
                lists.prev[k][w[1]] = w[0];
            }
            lists.first[k] = order[0];
            lists.last[k] = order[n - 1];
            for i in 0..n {
                lists.update_part(k, i);
            }
        }
        for i in 0..n {
            lists.update_distance(i);
        }
        lists
    }

    fn update_part(&mut self, k: usize, i: usize) {
        let (p, q) = (self.prev[k][i], self.next[k][i]);
        self.parts[k][i] = if p == NONE || q == NONE {
            f64::INFINITY
        } else {
            let range = self.points[self.last[k]][k] - self.points[self.first[k]][k];
            if range > 0.0 {
                (self.points[q][k] - self.points[p][k]) / range
            } else {
                0.0
            }
        };
    }

    fn update_distance(&mut self, i: usize) {
        let mut d = 0.0;
        for k in 0..self.parts.len() {
            d += self.parts[k][i];
        }
        self.distance[i] = d;
    }

    fn remove(&mut self, i: usize) {
        self.alive[i] = false;
        let m = self.parts.len();
        let mut touched = Vec::with_capacity(2 * m);
        let mut range_changed = false;
        for k in 0..m {
            let (p, q) = (self.prev[k][i], self.next[k][i]);
            if p != NONE {
                self.next[k][p] = q;
                touched.push((k, p));
            } else {
                self.first[k] = q;
                range_changed = true;
            }
            if q != NONE {
                self.prev[k][q] = p;
                touched.push((k, q));
            } else {
                self.last[k] = p;
                range_changed = true;
            }
        }
        if range_changed {
            let alive: Vec<usize> = (0..self.alive.len()).filter(|&j| self.alive[j]).collect();
            for k in 0..m {
                for &j in &alive {
                    self.update_part(k, j);
                }
            }
            for j in alive {
                self.update_distance(j);
            }
            return;
        }
        for &(k, j) in &touched {
            self.update_part(k, j);
        }
        for (_, j) in touched {
            self.update_distance(j);
        }
    }
}

/// Removal order: smallest distance first; among equal distances the higher
/// id goes first, so a single removal agrees with the one-off variant.
fn removal_order(da: f64, ia: usize, db: f64, ib: usize) -> Ordering {
    da.total_cmp(&db).then(ib.cmp(&ia))
}

/// Crowding distance of each member, aligned with the input.
pub fn crowding_distance(front: &[Solution]) -> Vec<f64> {
    if front.is_empty() {
        return Vec::new();
    }
    let ids: Vec<usize> = front.iter().map(|s| s.id).collect();
    CrowdingLists::new(front.iter().map(Solution::values).collect(), &ids).distance
}

/// Fills whole fronts, then keeps the largest crowding distances of the
/// splitting front, computed once.
pub fn truncate_nsga2_oneoff(
    cands: &[Solution],
    mu: usize,
    _ctx: &PolicyContext,
) -> Result<Vec<Solution>> {
    if cands.len() <= mu {
        return Ok(cands.to_vec());
    }
    check_candidates(cands)?;
    let FrontSplit {
        mut kept,
        splitting,
        take,
    } = split_fronts(cands, mu);
    if take > 0 {
        let front: Vec<Solution> = splitting.iter().map(|&i| cands[i].clone()).collect();
        let distance = crowding_distance(&front);
        let mut order: Vec<usize> = (0..front.len()).collect();
        // largest distance first, ties to the lower id
        order.sort_by(|&a, &b| {
            distance[b]
                .total_cmp(&distance[a])
                .then(front[a].id.cmp(&front[b].id))
        });
        kept.extend(order[..take].iter().map(|&i| splitting[i]));
    }
    Ok(keep_indices(cands, kept))
}

/// As the one-off variant, but removes the single most crowded member of the
/// splitting front at a time and refreshes the distances after each removal.
pub fn truncate_nsga2_iterative(
    cands: &[Solution],
    mu: usize,
    _ctx: &PolicyContext,
) -> Result<Vec<Solution>> {
    if cands.len() <= mu {
        return Ok(cands.to_vec());
    }
    check_candidates(cands)?;
    let FrontSplit {
        mut kept,
        splitting,
        take,
    } = split_fronts(cands, mu);
    if take > 0 {
        let ids: Vec<usize> = splitting.iter().map(|&i| cands[i].id).collect();
        let mut lists = CrowdingLists::new(
            splitting.iter().map(|&i| cands[i].values()).collect(),
            &ids,
        );
        let mut remaining = splitting.len();
        while remaining > take {
            let worst = (0..splitting.len())
                .filter(|&i| lists.alive[i])
                .min_by(|&a, &b| {
                    removal_order(lists.distance[a], ids[a], lists.distance[b], ids[b])
                })
                .expect("front has members");
            lists.remove(worst);
            remaining -= 1;
        }
        kept.extend((0..splitting.len()).filter(|&i| lists.alive[i]).map(|i| splitting[i]));
    }
    Ok(keep_indices(cands, kept))
}
