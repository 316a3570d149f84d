//! Generators for the distribution families used in experiments and
//! lower-bound constructions.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

use crate::dist::{mix, tv_distance, DistError, Distribution};
use crate::rng::SeededRng;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InstanceError {
    #[error("domain size {0} too small for this construction")]
    DomainTooSmall(usize),
    #[error("parameter {name} = {value} {requirement}")]
    ParameterOutOfRange {
        name: &'static str,
        value: f64,
        requirement: &'static str,
    },
    #[error("number of large elements became zero after the parity adjustment")]
    ParityAdjustmentFailed,
    #[error(transparent)]
    Dist(#[from] DistError),
}

fn require(
    ok: bool,
    name: &'static str,
    value: f64,
    requirement: &'static str,
) -> Result<(), InstanceError> {
    if ok {
        Ok(())
    } else {
        Err(InstanceError::ParameterOutOfRange {
            name,
            value,
            requirement,
        })
    }
}

pub type Metadata = BTreeMap<String, f64>;

/// A closeness instance `(p, q)` together with a prediction of `p`.
#[derive(Clone, Debug)]
pub struct InstancePair {
    pub p: Distribution,
    pub q: Distribution,
    pub phat: Distribution,
    pub metadata: Metadata,
}

/// Layout of the hard closeness instance over `[n]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HardLayout {
    pub n: usize,
    /// Shared heavy block `1..=m` with `m = ⌊n^{2/3}⌋`.
    pub m: usize,
    /// `p`'s block `p_lo..=p_hi`.
    pub p_lo: usize,
    pub p_hi: usize,
    /// `q`'s block `q_lo..=n`.
    pub q_lo: usize,
}

impl HardLayout {
    pub fn new(n: usize) -> Result<Self, InstanceError> {
        if n < 8 {
            return Err(InstanceError::DomainTooSmall(n));
        }
        let m = icbrt((n as u128) * (n as u128)) as usize;
        if m > n / 2 {
            return Err(InstanceError::DomainTooSmall(n));
        }
        Ok(Self {
            n,
            m,
            p_lo: n / 2 + 1,
            p_hi: 3 * n / 4,
            q_lo: 3 * n / 4 + 1,
        })
    }
}

/// Largest `r` with `r³ ≤ x`.
fn icbrt(x: u128) -> u128 {
    let mut r = (x as f64).cbrt() as u128;
    while r * r * r > x {
        r -= 1;
    }
    while (r + 1) * (r + 1) * (r + 1) <= x {
        r += 1;
    }
    r
}

/// `p` and `q` agree on `m = ⌊n^{2/3}⌋` heavy elements of mass `1/(2m)`;
/// the remaining half of `p` is spread as `2/n` over `(n/2, 3n/4]` and that
/// of `q` over `(3n/4, n]`. Rounding residue of each distribution is put on
/// element 1. `phat` is `p`.
pub fn hard_closeness_instance(n: usize) -> Result<InstancePair, InstanceError> {
    let layout = HardLayout::new(n)?;
    let heavy = 1.0 / (2 * layout.m) as f64;
    let light = 2.0 / n as f64;
    let build = |lo: usize, hi: usize| -> Result<Distribution, InstanceError> {
        let mut v = vec![0.0; n];
        v[..layout.m].fill(heavy);
        v[lo - 1..hi].fill(light);
        let residue = 1.0 - v.iter().sum::<f64>();
        v[0] += residue;
        if v[0] < 0.0 {
            return Err(InstanceError::DomainTooSmall(n));
        }
        Ok(Distribution::new(v)?)
    };
    let p = build(layout.p_lo, layout.p_hi)?;
    let q = build(layout.q_lo, n)?;
    let mut metadata = Metadata::new();
    metadata.insert("n".into(), n as f64);
    metadata.insert("m".into(), layout.m as f64);
    metadata.insert("tv_pq".into(), tv_distance(&p, &q)?);
    metadata.insert("tv_p_phat".into(), 0.0);
    Ok(InstancePair {
        phat: p.clone(),
        p,
        q,
        metadata,
    })
}

/// `p̂ = (1 − β)·p + β·U_n`.
pub fn interpolated_predictor(p: &Distribution, beta: f64) -> Result<Distribution, InstanceError> {
    Ok(mix(p, &Distribution::uniform(p.len()), beta)?)
}

/// Hint for the point-wise baseline on the hard instance: the last
/// `⌈drop_fraction·m⌉` heavy elements of `base` get mass 0 and their mass is
/// spread evenly over the empty gap `m+1..=n/2`.
pub fn crs_perturbed_hint(
    base: &Distribution,
    drop_fraction: f64,
) -> Result<Distribution, InstanceError> {
    require(
        drop_fraction > 0.0 && drop_fraction < 1.0,
        "drop_fraction",
        drop_fraction,
        "must lie in (0, 1)",
    )?;
    let layout = HardLayout::new(base.len())?;
    let k = ((drop_fraction * layout.m as f64).ceil() as usize).min(layout.m - 1);
    let gap = layout.n / 2 - layout.m;
    if k == 0 || gap == 0 {
        return Err(InstanceError::DomainTooSmall(layout.n));
    }
    let mut v = base.probs().to_vec();
    let moved: f64 = v[layout.m - k..layout.m].iter().sum();
    v[layout.m - k..layout.m].fill(0.0);
    let share = moved / gap as f64;
    v[layout.m..layout.n / 2]
        .iter_mut()
        .for_each(|x| *x += share);
    Ok(Distribution::new(v)?)
}

/// Prediction and the two candidate distributions of the uniformity lower
/// bound, with `q = U_n`.
#[derive(Clone, Debug)]
pub struct UniformityLbTriple {
    /// `(1 ± 2d)/n` on even / odd elements.
    pub phat: Distribution,
    /// Pairs `(2j−1, 2j)` carry `(1 ∓ 2Z_j ε′)/n` for random signs `Z_j`.
    pub p_bullet: Distribution,
    /// `(1 ± 2(d − α′))/n` on even / odd elements.
    pub p_diamond: Distribution,
    pub metadata: Metadata,
}

fn parity_tilted(n: usize, tilt: f64) -> Result<Distribution, InstanceError> {
    let inv = 1.0 / n as f64;
    let v = (1..=n)
        .map(|i| {
            if i % 2 == 0 {
                (1.0 + 2.0 * tilt) * inv
            } else {
                (1.0 - 2.0 * tilt) * inv
            }
        })
        .collect();
    Ok(Distribution::new(v)?)
}

/// Builds the triple with `ε′ = min(2ε, 1/2)` and `α′ = α/2`.
pub fn uniformity_lb_triple(
    n: usize,
    eps: f64,
    d: f64,
    alpha: f64,
    rng: &mut SeededRng,
) -> Result<UniformityLbTriple, InstanceError> {
    if n < 2 || !n.is_multiple_of(2) {
        return Err(InstanceError::DomainTooSmall(n));
    }
    require(eps > 0.0 && eps < 0.5, "eps", eps, "must lie in (0, 1/2)")?;
    require(d > 0.0 && d <= 0.5, "d", d, "must lie in (0, 1/2]")?;
    require(
        alpha > 0.0 && alpha < d,
        "alpha",
        alpha,
        "must lie in (0, d)",
    )?;

    let eps_p = (2.0 * eps).min(0.5);
    let alpha_p = alpha / 2.0;
    let phat = parity_tilted(n, d)?;
    let p_diamond = parity_tilted(n, d - alpha_p)?;

    let inv = 1.0 / n as f64;
    let mut bullet = vec![0.0; n];
    for pair in bullet.chunks_exact_mut(2) {
        let z = if rng.random::<bool>() { 1.0 } else { -1.0 };
        pair[0] = (1.0 - 2.0 * z * eps_p) * inv;
        pair[1] = (1.0 + 2.0 * z * eps_p) * inv;
    }
    let p_bullet = Distribution::new(bullet)?;

    let uniform = Distribution::uniform(n);
    let mut metadata = Metadata::new();
    metadata.insert("n".into(), n as f64);
    metadata.insert("eps".into(), eps);
    metadata.insert("d".into(), d);
    metadata.insert("alpha".into(), alpha);
    metadata.insert("eps_prime".into(), eps_p);
    metadata.insert("alpha_prime".into(), alpha_p);
    metadata.insert("tv_phat_uniform".into(), tv_distance(&phat, &uniform)?);
    metadata.insert(
        "tv_p_bullet_uniform".into(),
        tv_distance(&p_bullet, &uniform)?,
    );
    metadata.insert("tv_p_diamond_phat".into(), tv_distance(&p_diamond, &phat)?);
    Ok(UniformityLbTriple {
        phat,
        p_bullet,
        p_diamond,
        metadata,
    })
}

/// Prediction `U_n` and the two candidates of the closeness lower bound.
#[derive(Clone, Debug)]
pub struct ClosenessLbInstance {
    pub phat: Distribution,
    pub p_plus: Distribution,
    pub p_minus: Distribution,
    /// Large elements, sorted.
    pub large: Vec<usize>,
    pub metadata: Metadata,
}

/// Number of large elements: `⌊n^{2/3}α^{4/3}/(2ε^{4/3})⌋`, lowered by one
/// when its parity differs from `n`'s.
pub fn large_element_count(n: usize, eps: f64, alpha: f64) -> usize {
    let raw =
        ((n as f64).powf(2.0 / 3.0) * alpha.powf(4.0 / 3.0) / (2.0 * eps.powf(4.0 / 3.0))).floor();
    let raw = raw.max(0.0) as usize;
    if raw % 2 != n % 2 {
        raw.saturating_sub(1)
    } else {
        raw
    }
}

/// `ℓ` random large elements of mass `1/n + α/ℓ`; the rest have mass
/// `s = 1/n − α/(n − ℓ)` in `p⁺`, and `(1 ± 6ε)·s` on two random halves in
/// `p⁻`.
///
/// Only the constraints the construction itself needs are enforced
/// (`0 < α < ε < 1/6`, `1 ≤ ℓ < n/2`). The metadata flag
/// `in_theorem_regime` records whether additionally `α > 1/(√n·ε²)`.
pub fn closeness_lb_instance(
    n: usize,
    eps: f64,
    alpha: f64,
    rng: &mut SeededRng,
) -> Result<ClosenessLbInstance, InstanceError> {
    require(
        eps > 0.0 && eps < 1.0 / 6.0,
        "eps",
        eps,
        "must lie in (0, 1/6)",
    )?;
    require(
        alpha > 0.0 && alpha < eps,
        "alpha",
        alpha,
        "must lie in (0, eps)",
    )?;
    let ell = large_element_count(n, eps, alpha);
    if ell == 0 {
        return Err(InstanceError::ParityAdjustmentFailed);
    }
    if 2 * ell >= n {
        return Err(InstanceError::ParameterOutOfRange {
            name: "alpha",
            value: alpha,
            requirement: "gives at least n/2 large elements",
        });
    }

    let mut order: Vec<usize> = (1..=n).collect();
    order.shuffle(rng);
    let half = (n - ell) / 2;
    let (large, rest) = order.split_at(ell);
    let (small_up, _) = rest.split_at(half);

    let eps_t = 6.0 * eps;
    let inv = 1.0 / n as f64;
    let lp = inv + alpha / ell as f64;
    let sp = inv - alpha / (n - ell) as f64;

    let mut plus = vec![sp; n];
    for &i in large {
        plus[i - 1] = lp;
    }
    let mut minus = vec![(1.0 - eps_t) * sp; n];
    for &i in large {
        minus[i - 1] = lp;
    }
    for &i in small_up {
        minus[i - 1] = (1.0 + eps_t) * sp;
    }
    let p_plus = Distribution::new(plus)?;
    let p_minus = Distribution::new(minus)?;
    let phat = Distribution::uniform(n);

    let mut large = large.to_vec();
    large.sort_unstable();
    let mut metadata = Metadata::new();
    metadata.insert("n".into(), n as f64);
    metadata.insert("eps".into(), eps);
    metadata.insert("alpha".into(), alpha);
    metadata.insert("ell".into(), ell as f64);
    metadata.insert("eps_tilde".into(), eps_t);
    metadata.insert(
        "in_theorem_regime".into(),
        (alpha > 1.0 / ((n as f64).sqrt() * eps * eps)) as u8 as f64,
    );
    metadata.insert("tv_p_plus_phat".into(), tv_distance(&p_plus, &phat)?);
    metadata.insert("tv_p_plus_p_minus".into(), tv_distance(&p_plus, &p_minus)?);
    Ok(ClosenessLbInstance {
        phat,
        p_plus,
        p_minus,
        large,
        metadata,
    })
}
