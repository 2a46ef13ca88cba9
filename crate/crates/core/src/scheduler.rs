//! Feeds an input sequence through a bounded archive.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pareto::{Archive, Solution};
use crate::policies::{normalisation, MoeadState, PolicyContext, PolicyId, Truncator};
use crate::refsets::{BatchSize, InputSequence};

/// When the archive is truncated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Schedule {
    /// After every arrival.
    Immediate,
    /// After every μ arrivals.
    Batch,
    /// Once, after everything has arrived.
    Unbounded,
}

impl Schedule {
    pub const ALL: [Schedule; 3] = [Schedule::Immediate, Schedule::Batch, Schedule::Unbounded];

    pub fn name(self) -> &'static str {
        match self {
            Schedule::Immediate => "immediate",
            Schedule::Batch => "batch",
            Schedule::Unbounded => "unbounded",
        }
    }

    pub fn batch_size(self, mu: usize) -> BatchSize {
        match self {
            Schedule::Immediate => BatchSize::Fixed(1),
            Schedule::Batch => BatchSize::Fixed(mu),
            Schedule::Unbounded => BatchSize::All,
        }
    }
}

impl fmt::Display for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Schedule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Schedule::ALL
            .into_iter()
            .find(|v| v.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown schedule `{s}`")))
    }
}

/// Snapshot of one truncation event. `ideal` and `nadir` describe the
/// candidate set the policy saw, as estimated by the NSGA-III normalisation.
#[derive(Debug, Clone, PartialEq)]
pub struct EventDiagnostics {
    /// Zero-based index of the batch that triggered the event.
    pub batch: usize,
    pub size_before: usize,
    pub size_after: usize,
    pub ideal: Vec<f64>,
    pub nadir: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    pub final_archive: Archive,
    pub truncation_event_count: usize,
    pub diagnostics: Option<Vec<EventDiagnostics>>,
}

/// Runs one archiving pass. The sequence is re-chopped to the batch size
/// the schedule implies, so any batching of `seq` is accepted.
///
/// Every batch is merged with the archive; when the union exceeds `mu` the
/// policy truncates it. MOEA/D instead updates its incumbents on every
/// arrival, and an event is counted whenever the union would overflow.
pub fn run_archiving(
    seq: &InputSequence,
    policy: PolicyId,
    schedule: Schedule,
    mu: usize,
    ctx: &PolicyContext,
    diagnostics: bool,
) -> Result<RunTrace> {
    let mut archive = Archive::new(mu)?;
    let mut truncator = Truncator::new(policy, ctx, mu)?;
    let mut moead = if policy == PolicyId::MoeadPbi {
        Some(MoeadState::new(ctx, mu)?)
    } else {
        None
    };
    let mut events = 0;
    let mut trace = diagnostics.then(Vec::new);

    for (t, batch) in seq.rebatch(schedule.batch_size(mu))?.batches.into_iter().enumerate() {
        let size_before = archive.len() + batch.len();
        let overflow = size_before > mu;
        let snapshot = match (&mut trace, overflow) {
            (Some(_), true) => {
                let cands: Vec<&Solution> = archive.members().iter().chain(&batch).collect();
                let values: Vec<&[f64]> = cands.iter().map(|s| s.values()).collect();
                Some(normalisation(&values)?)
            }
            _ => None,
        };

        let next = if let Some(state) = moead.as_mut() {
            for s in &batch {
                state.offer(s)?;
            }
            state.members()
        } else {
            let mut cands = archive.members().to_vec();
            cands.extend(batch);
            if overflow {
                truncator.truncate(cands, mu)?
            } else {
                cands
            }
        };
        if overflow {
            events += 1;
        }
        if let (Some(trace), Some(norm)) = (&mut trace, snapshot) {
            trace.push(EventDiagnostics {
                batch: t,
                size_before,
                size_after: next.len(),
                ideal: norm.ideal,
                nadir: norm.nadir,
            });
        }
        archive.replace(next);
    }

    Ok(RunTrace {
        final_archive: archive,
        truncation_event_count: events,
        diagnostics: trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policies::HvRefRule;
    use crate::refsets::{build_sequence, das_dennis, FrontKind};

    fn seq_of(points: &[&[f64]]) -> InputSequence {
        let batch = points
            .iter()
            .enumerate()
            .map(|(i, p)| Solution::from_values(i, p).unwrap())
            .collect();
        InputSequence {
            front_kind: FrontKind::Simplex,
            base_seed: 0,
            shuffle_seed: 0,
            batches: vec![batch],
        }
    }

    #[test]
    fn immediate_sms_example() {
        let seq = seq_of(&[&[0.0, 1.0], &[1.0, 0.0], &[0.5, 0.5]]);
        let mut ctx = PolicyContext::new(2, None);
        ctx.hv_ref_rule = HvRefRule::Fixed(vec![2.0, 2.0]);
        let run = run_archiving(&seq, PolicyId::SmsRemoval, Schedule::Immediate, 2, &ctx, true).unwrap();
        assert_eq!(run.final_archive.ids(), vec![0, 1]);
        assert_eq!(run.truncation_event_count, 1);
        let diag = run.diagnostics.unwrap();
        assert_eq!(diag.len(), 1);
        assert_eq!((diag[0].batch, diag[0].size_before, diag[0].size_after), (2, 3, 2));
    }

    #[test]
    fn event_counts_per_schedule() {
        let seq = build_sequence(FrontKind::Simplex, 3, 50, 1, 1, BatchSize::All).unwrap();
        let ctx = PolicyContext::new(3, None);
        let count = |s| {
            run_archiving(&seq, PolicyId::Nsga2Oneoff, s, 10, &ctx, false)
                .unwrap()
                .truncation_event_count
        };
        assert_eq!(count(Schedule::Immediate), 40);
        assert_eq!(count(Schedule::Batch), 4);
        assert_eq!(count(Schedule::Unbounded), 1);
    }

    #[test]
    fn moead_schedules_agree() {
        let weights = das_dennis(3, 4).unwrap();
        let mu = weights.len();
        let ctx = PolicyContext::new(3, Some(weights));
        let seq = build_sequence(FrontKind::Inverted, 3, 100, 4, 9, BatchSize::All).unwrap();
        let runs: Vec<Vec<usize>> = Schedule::ALL
            .iter()
            .map(|&s| {
                run_archiving(&seq, PolicyId::MoeadPbi, s, mu, &ctx, false)
                    .unwrap()
                    .final_archive
                    .ids()
            })
            .collect();
        assert_eq!(runs[0], runs[1]);
        assert_eq!(runs[0], runs[2]);
    }

    #[test]
    fn schedule_names_round_trip() {
        for s in Schedule::ALL {
            assert_eq!(s.name().parse::<Schedule>().unwrap(), s);
        }
        assert!("eventually".parse::<Schedule>().is_err());
    }
}
