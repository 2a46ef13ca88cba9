//! Hypervolume-based truncation: greedy removal (SMS-EMOA) and greedy
//! inclusion.

use super::{check_candidates, keep_indices, PolicyContext};
use crate::error::{Error, Result};
use crate::indicators::hypervolume::{embed, embed_ref, greedy_inclusion, greedy_removal};
use crate::pareto::Solution;

fn check_hv_dim(cands: &[Solution]) -> Result<()> {
    let m = cands[0].objectives.dim();
    if m > 3 {
        return Err(Error::UnsupportedDimension(m));
    }
    Ok(())
}

/// Removes the least hypervolume contributor until `mu` remain. The
/// reference point is fixed for the whole event.
pub fn truncate_sms_removal(
    cands: &[Solution],
    mu: usize,
    ctx: &PolicyContext,
) -> Result<Vec<Solution>> {
    if cands.len() <= mu {
        return Ok(cands.to_vec());
    }
    check_candidates(cands)?;
    check_hv_dim(cands)?;
    let reference = ctx.hv_ref_rule.reference_for(cands)?;
    crate::pareto::check_dims(cands[0].values(), reference.values())?;
    let points: Vec<_> = cands.iter().map(|s| embed(s.values())).collect();
    let ids: Vec<usize> = cands.iter().map(|s| s.id).collect();
    let kept = greedy_removal(&points, &ids, &embed_ref(reference.values()), mu);
    Ok(keep_indices(cands, kept))
}

/// Starts from an empty archive and adds the candidate with the largest
/// hypervolume gain until `mu` are selected.
pub fn truncate_hv_inclusion(
    cands: &[Solution],
    mu: usize,
    ctx: &PolicyContext,
) -> Result<Vec<Solution>> {
    if cands.len() <= mu {
        return Ok(cands.to_vec());
    }
    check_candidates(cands)?;
    check_hv_dim(cands)?;
    let reference = ctx.hv_ref_rule.reference_for(cands)?;
    crate::pareto::check_dims(cands[0].values(), reference.values())?;
    let points: Vec<_> = cands.iter().map(|s| embed(s.values())).collect();
    let ids: Vec<usize> = cands.iter().map(|s| s.id).collect();
    let picked = greedy_inclusion(&points, &ids, &embed_ref(reference.values()), mu);
    Ok(keep_indices(cands, picked))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policies::HvRefRule;

    fn sols(points: &[&[f64]]) -> Vec<Solution> {
        points
            .iter()
            .enumerate()
            .map(|(i, p)| Solution::from_values(i, p).unwrap())
            .collect()
    }

    fn ctx_fixed(r: &[f64]) -> PolicyContext {
        let mut ctx = PolicyContext::new(r.len(), None);
        ctx.hv_ref_rule = HvRefRule::Fixed(r.to_vec());
        ctx
    }

    fn ids(kept: &[Solution]) -> Vec<usize> {
        kept.iter().map(|s| s.id).collect()
    }

    #[test]
    fn removal_drops_smallest_contributor() {
        let set = sols(&[&[0.0, 1.0], &[0.5, 0.5], &[1.0, 0.0]]);
        let kept = truncate_sms_removal(&set, 2, &ctx_fixed(&[2.0, 2.0])).unwrap();
        assert_eq!(ids(&kept), vec![0, 2]);
    }

    #[test]
    fn removal_takes_a_duplicate_first() {
        let set = sols(&[&[0.2, 0.8], &[0.5, 0.5], &[0.5, 0.5]]);
        let kept = truncate_sms_removal(&set, 2, &ctx_fixed(&[1.0, 1.0])).unwrap();
        // both copies contribute zero; the lower id goes
        assert_eq!(ids(&kept), vec![0, 2]);
    }

    #[test]
    fn inclusion_example() {
        let set = sols(&[&[0.0, 1.0], &[0.5, 0.5], &[1.0, 0.0]]);
        let kept = truncate_hv_inclusion(&set, 2, &ctx_fixed(&[2.0, 2.0])).unwrap();
        assert_eq!(ids(&kept), vec![0, 1]);

        let kept = truncate_hv_inclusion(&set, 1, &ctx_fixed(&[2.0, 2.0])).unwrap();
        assert_eq!(ids(&kept), vec![1]);
    }

    #[test]
    fn under_capacity_is_identity() {
        let set = sols(&[&[0.0, 1.0], &[0.5, 0.5], &[1.0, 0.0]]);
        let ctx = ctx_fixed(&[2.0, 2.0]);
        assert_eq!(truncate_hv_inclusion(&set, 3, &ctx).unwrap(), set);
        assert_eq!(truncate_sms_removal(&set, 3, &ctx).unwrap(), set);
    }

    #[test]
    fn four_objectives_rejected() {
        let set = sols(&[&[0.1, 0.2, 0.3, 0.4], &[0.4, 0.3, 0.2, 0.1]]);
        let ctx = PolicyContext::new(4, None);
        assert!(matches!(
            truncate_sms_removal(&set, 1, &ctx),
            Err(Error::UnsupportedDimension(4))
        ));
    }

    #[test]
    fn default_reference_rule_is_scaled_max() {
        let set = sols(&[&[0.0, 1.0], &[0.5, 0.5], &[1.0, 0.0]]);
        let ctx = PolicyContext::new(2, None);
        let c = crate::indicators::hv_contributions(&set, &[1.1, 1.1]).unwrap();
        let kept = truncate_sms_removal(&set, 2, &ctx).unwrap();
        let worst = (0..3)
            .min_by(|&a, &b| c[a].total_cmp(&c[b]).then(a.cmp(&b)))
            .unwrap();
        assert!(!ids(&kept).contains(&worst));
    }
}
