//! Synthetic orientation flips for classifier tests.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::eval::{classify_discontinuities, test_pair, PoseTrace, Thresholds, TraceRecord};

const ATTEMPTS: usize = 200;

#[derive(Debug, Clone, PartialEq)]
pub struct FlipInjection {
    pub trace: PoseTrace,
    pub k: usize,
    /// Record indices where the trace switches branch; the flagged pair for
    /// index `i` is `(i - 1, i)`.
    pub switches: Vec<usize>,
}

/// Switches the trace onto the ambiguity-twin branch at `k` random records.
///
/// Each switch toggles between the original and the twin pose, so the trace
/// jumps across the origin exactly `k` times. Switch points are chosen where
/// the jump passes both discontinuity tests in either direction and no
/// run on the twin branch produces flags of its own. `k ≤ 0` returns the
/// trace unchanged.
pub fn inject_flips(trace: &PoseTrace, k: i64, seed: u64, th: &Thresholds) -> Result<FlipInjection> {
    if k <= 0 {
        return Ok(FlipInjection { trace: trace.clone(), k: 0, switches: Vec::new() });
    }
    let k = k as usize;
    let n = trace.len();
    if n <= 2 * k {
        return Err(Error::InvalidParameter(format!("trace of {n} records is too short for {k} flips")));
    }
    let twins: Vec<TraceRecord> = trace.records.iter().map(TraceRecord::ambiguity_twin).collect();
    let flags = |a: &TraceRecord, b: &TraceRecord| test_pair(a, b, th).is_some_and(|t| t.flagged());
    let eligible: Vec<usize> = (1..n)
        .filter(|&i| flags(&trace.records[i - 1], &twins[i]) && flags(&twins[i - 1], &trace.records[i]))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..ATTEMPTS {
        let mut pool = eligible.clone();
        pool.shuffle(&mut rng);
        let mut chosen: Vec<usize> = Vec::with_capacity(k);
        for i in pool {
            if chosen.iter().all(|&c| c.abs_diff(i) >= 2) {
                chosen.push(i);
                if chosen.len() == k {
                    break;
                }
            }
        }
        if chosen.len() < k {
            break;
        }
        chosen.sort_unstable();
        let mut records = Vec::with_capacity(n);
        let mut flipped = false;
        for (i, (orig, twin)) in trace.records.iter().zip(&twins).enumerate() {
            if chosen.binary_search(&i).is_ok() {
                flipped = !flipped;
            }
            records.push(if flipped { twin.clone() } else { orig.clone() });
        }
        let injected = PoseTrace { records, ..trace.clone() };
        let expected: Vec<usize> = chosen.iter().map(|&i| i - 1).collect();
        if classify_discontinuities(&injected, th) == expected {
            return Ok(FlipInjection { trace: injected, k, switches: chosen });
        }
    }
    Err(Error::InvalidParameter(format!(
        "could not place {k} isolated flips: {} eligible records out of {n}",
        eligible.len()
    )))
}
