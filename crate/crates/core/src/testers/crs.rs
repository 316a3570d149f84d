use super::{same_domain, TesterError, Verdict};
use crate::dist::{Distribution, SampleBatch};

/// Point-wise baseline: Accept iff every sampled element `i` (from either
/// batch) has `q̂_i` within a factor `1 ± ε/10` of `p̂_i`.
pub fn crs15_test(
    phat: &Distribution,
    qhat: &Distribution,
    p_batch: &SampleBatch,
    q_batch: &SampleBatch,
    eps: f64,
) -> Result<Verdict, TesterError> {
    let n = phat.len();
    same_domain(n, qhat.len())?;
    same_domain(n, p_batch.len())?;
    same_domain(n, q_batch.len())?;
    let lo = 1.0 - eps / 10.0;
    let hi = 1.0 + eps / 10.0;
    let consistent = (0..n)
        .filter(|&k| p_batch.counts()[k] > 0 || q_batch.counts()[k] > 0)
        .all(|k| {
            let (p, q) = (phat.probs()[k], qhat.probs()[k]);
            lo * p <= q && q <= hi * p
        });
    Ok(if consistent {
        Verdict::Accept
    } else {
        Verdict::Reject
    })
}
