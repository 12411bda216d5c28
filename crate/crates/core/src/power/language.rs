//! Protocol language over power-state labels.
//!
//! Adjacent plateaus of the same state are indistinguishable after
//! extraction, so the language is closed under stuttering: a label sequence
//! is accepted iff its run-length collapse matches
//! `(S0 S1)+ S0 S2 S3 S0 S1`.

use super::{Label, PowerState};

/// Drops consecutive duplicates.
pub fn collapse(labels: &[Label]) -> Vec<Label> {
    let mut out: Vec<Label> = labels.to_vec();
    out.dedup();
    out
}

#[derive(Clone, Copy)]
enum Q {
    Start,
    Idle,
    Net,
    IdleAfterNet,
    Load,
    Hash,
    IdleAfterHash,
    Output,
    Reject,
}

/// Runs the hand-built automaton over `labels`; any `None` rejects.
pub fn validate_language(labels: &[Label]) -> bool {
    use PowerState::*;
    let mut q = Q::Start;
    for label in labels {
        let Some(s) = *label else { return false };
        q = match (q, s) {
            (Q::Start, S0) | (Q::Idle, S0) => Q::Idle,
            (Q::Idle, S1) | (Q::Net, S1) | (Q::IdleAfterNet, S1) => Q::Net,
            (Q::Net, S0) | (Q::IdleAfterNet, S0) => Q::IdleAfterNet,
            (Q::IdleAfterNet, S2) | (Q::Load, S2) => Q::Load,
            (Q::Load, S3) | (Q::Hash, S3) => Q::Hash,
            (Q::Hash, S0) | (Q::IdleAfterHash, S0) => Q::IdleAfterHash,
            (Q::IdleAfterHash, S1) | (Q::Output, S1) => Q::Output,
            _ => Q::Reject,
        };
        if matches!(q, Q::Reject) {
            return false;
        }
    }
    matches!(q, Q::Output)
}
