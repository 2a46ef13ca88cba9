use archive_core::policies::{truncate_moead, Truncator};
use archive_core::refsets::{build_sequence, das_dennis, BatchSize};
use archive_core::{run_archiving, FrontKind, PolicyContext, PolicyId, Schedule, Solution};
use proptest::prelude::*;

const MU: usize = 10;

fn context(seed: u64) -> PolicyContext {
    let mut ctx = PolicyContext::new(3, Some(das_dennis(3, 3).unwrap()));
    ctx.seed = seed;
    ctx
}

fn sorted_ids(set: &[Solution]) -> Vec<usize> {
    let mut v: Vec<usize> = set.iter().map(|s| s.id).collect();
    v.sort_unstable();
    v
}

fn kind(inverted: bool) -> FrontKind {
    if inverted {
        FrontKind::Inverted
    } else {
        FrontKind::Simplex
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn archive_is_bounded_subset_of_input(
        n in 1usize..60,
        seed in 0u64..1000,
        inverted in any::<bool>(),
    ) {
        let seq = build_sequence(kind(inverted), 3, n, seed, seed + 1, BatchSize::All).unwrap();
        let ctx = context(seed);
        for policy in PolicyId::ALL {
            for schedule in Schedule::ALL {
                let trace = run_archiving(&seq, policy, schedule, MU, &ctx, false).unwrap();
                let members = trace.final_archive.members();
                prop_assert!(members.len() <= MU);
                if policy != PolicyId::MoeadPbi {
                    prop_assert_eq!(members.len(), n.min(MU));
                }
                let ids = sorted_ids(members);
                prop_assert!(ids.windows(2).all(|w| w[0] < w[1]));
                prop_assert!(ids.iter().all(|&i| i < n));
            }
        }
    }

    #[test]
    fn unbounded_schedule_is_one_direct_truncation(n in 11usize..60, seed in 0u64..1000) {
        let seq = build_sequence(FrontKind::Simplex, 3, n, seed, seed, BatchSize::Fixed(7)).unwrap();
        let ctx = context(seed);
        for policy in PolicyId::ALL {
            let trace = run_archiving(&seq, policy, Schedule::Unbounded, MU, &ctx, false).unwrap();
            prop_assert_eq!(trace.truncation_event_count, 1);
            let direct = Truncator::new(policy, &ctx, MU).unwrap().truncate(seq.flatten(), MU).unwrap();
            prop_assert_eq!(sorted_ids(trace.final_archive.members()), sorted_ids(&direct));
        }
    }

    #[test]
    fn event_counts_follow_batch_sizes(n in 1usize..80, seed in 0u64..1000) {
        let seq = build_sequence(FrontKind::Simplex, 3, n, seed, seed, BatchSize::All).unwrap();
        let ctx = context(seed);
        let immediate = n.saturating_sub(MU);
        let batch = if n > MU { n.div_ceil(MU) - 1 } else { 0 };
        let unbounded = usize::from(n > MU);
        for (schedule, expected) in [
            (Schedule::Immediate, immediate),
            (Schedule::Batch, batch),
            (Schedule::Unbounded, unbounded),
        ] {
            let sms = run_archiving(&seq, PolicyId::SmsRemoval, schedule, MU, &ctx, false).unwrap();
            prop_assert_eq!(sms.truncation_event_count, expected);
            // deduplicated incumbents can leave the archive below capacity
            let moead = run_archiving(&seq, PolicyId::MoeadPbi, schedule, MU, &ctx, false).unwrap();
            prop_assert!(moead.truncation_event_count <= expected);
        }
    }

    #[test]
    fn moead_final_archive_does_not_depend_on_schedule(n in 1usize..80, seed in 0u64..1000, inverted in any::<bool>()) {
        let seq = build_sequence(kind(inverted), 3, n, seed, seed, BatchSize::All).unwrap();
        let ctx = context(seed);
        let direct = sorted_ids(&truncate_moead(&seq.flatten(), MU, &ctx).unwrap());
        for schedule in Schedule::ALL {
            let trace = run_archiving(&seq, PolicyId::MoeadPbi, schedule, MU, &ctx, false).unwrap();
            prop_assert_eq!(sorted_ids(trace.final_archive.members()), direct.clone());
        }
    }

    #[test]
    fn input_batching_is_irrelevant(n in 1usize..50, k in 1usize..20, seed in 0u64..1000) {
        let chunked = build_sequence(FrontKind::Inverted, 3, n, seed, seed, BatchSize::Fixed(k)).unwrap();
        let whole = build_sequence(FrontKind::Inverted, 3, n, seed, seed, BatchSize::All).unwrap();
        let ctx = context(seed);
        for policy in PolicyId::ALL {
            for schedule in Schedule::ALL {
                let a = run_archiving(&chunked, policy, schedule, MU, &ctx, false).unwrap();
                let b = run_archiving(&whole, policy, schedule, MU, &ctx, false).unwrap();
                prop_assert_eq!(a, b);
            }
        }
    }
}

#[test]
fn diagnostics_record_every_event() {
    let seq = build_sequence(FrontKind::Inverted, 3, 40, 3, 4, BatchSize::All).unwrap();
    let ctx = context(0);
    for schedule in Schedule::ALL {
        let trace = run_archiving(&seq, PolicyId::Nsga3, schedule, MU, &ctx, true).unwrap();
        let diags = trace.diagnostics.expect("requested");
        assert_eq!(diags.len(), trace.truncation_event_count);
        for d in &diags {
            assert!(d.size_before > MU);
            assert_eq!(d.size_after, MU);
            assert!(d.ideal.iter().zip(&d.nadir).all(|(lo, hi)| lo <= hi));
        }
    }
    let quiet = run_archiving(&seq, PolicyId::Nsga3, Schedule::Batch, MU, &ctx, false).unwrap();
    assert!(quiet.diagnostics.is_none());
}

#[test]
fn moead_with_wrong_weight_count_is_rejected() {
    let seq = build_sequence(FrontKind::Simplex, 3, 20, 1, 1, BatchSize::All).unwrap();
    let ctx = context(0);
    assert!(run_archiving(&seq, PolicyId::MoeadPbi, Schedule::Batch, MU + 1, &ctx, false).is_err());
    assert!(run_archiving(&seq, PolicyId::Nsga3, Schedule::Batch, MU + 1, &ctx, false).is_err());
}
