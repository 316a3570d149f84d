use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use super::config::{Algorithm, InstanceSpec, SweepConfig};
use super::separation::separation_error;
use super::HarnessError;
use crate::dist::{tv_distance, Distribution, Sampler};
use crate::flatten::{build_augmented_flattening, flatten_batch};
use crate::instances::{crs_perturbed_hint, hard_closeness_instance, interpolated_predictor};
use crate::io::load_dist;
use crate::l2::collision_rate;
use crate::rng::{child_seed, SeededRng};
use crate::testers::{accept_threshold, crs15_test, t_statistic, Verdict};

/// `L_p` above this multiple of the flattening bound marks a trial inaccurate.
const INACCURATE_FACTOR: f64 = 30.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Case {
    /// Both sides sample `p`.
    Same,
    /// One side samples `p`, the other `q`.
    Far,
}

impl Case {
    fn id(self) -> u64 {
        match self {
            Case::Same => 0,
            Case::Far => 1,
        }
    }
}

/// Distributions a sweep runs on.
#[derive(Clone, Debug)]
pub struct ResolvedInstance {
    pub p: Distribution,
    pub q: Distribution,
    /// Prediction of `p` before interpolation towards uniform.
    pub hint: Distribution,
    /// Hints `(p̂, q̂)` of the point-wise baseline in the two cases.
    pub crs_same: (Distribution, Distribution),
    pub crs_far: (Distribution, Distribution),
}

pub fn resolve_instance(
    spec: &InstanceSpec,
    drop_fraction: f64,
) -> Result<ResolvedInstance, HarnessError> {
    match spec {
        InstanceSpec::HardCloseness { n } => {
            let inst = hard_closeness_instance(*n)?;
            let same_q = crs_perturbed_hint(&inst.p, drop_fraction)?;
            let far_q = crs_perturbed_hint(&inst.q, drop_fraction)?;
            Ok(ResolvedInstance {
                crs_same: (inst.p.clone(), same_q),
                crs_far: (inst.p.clone(), far_q),
                hint: inst.phat,
                p: inst.p,
                q: inst.q,
            })
        }
        InstanceSpec::Files { p, q, hint } => {
            let p = load_dist(p)?;
            let q = load_dist(q)?;
            let hint = match hint {
                Some(h) => load_dist(h)?,
                None => p.clone(),
            };
            if p.len() != q.len() || p.len() != hint.len() {
                return Err(HarnessError::Config(format!(
                    "instance files disagree on the domain size ({}, {}, {})",
                    p.len(),
                    q.len(),
                    hint.len()
                )));
            }
            Ok(ResolvedInstance {
                crs_same: (p.clone(), hint.clone()),
                crs_far: (p.clone(), q.clone()),
                p,
                q,
                hint,
            })
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialRecord {
    pub budget: u64,
    pub trial: usize,
    pub case: Case,
    pub algorithm: Algorithm,
    /// `T` for the testers, 1/0 for the baseline's accept/reject; empty for
    /// inaccurate trials.
    pub statistic: Option<f64>,
    pub verdict: Verdict,
    /// Samples of `p` spent on the flattening, outside the budget.
    pub prep_samples: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SummaryRow {
    pub budget: u64,
    pub algorithm: Algorithm,
    pub threshold: Option<f64>,
    pub error: Option<f64>,
    pub inaccurate_rate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BetaRow {
    pub beta: f64,
    pub tv_p_phat: f64,
    pub error_augmented: Option<f64>,
    pub error_standard: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepOutput {
    pub trials: Vec<TrialRecord>,
    pub summary: Vec<SummaryRow>,
}

struct Context<'a> {
    cfg: &'a SweepConfig,
    inst: &'a ResolvedInstance,
    phat: Distribution,
    p: Sampler,
    q: Sampler,
    n: usize,
    s_f: f64,
    bound: f64,
}

impl<'a> Context<'a> {
    fn new(
        cfg: &'a SweepConfig,
        inst: &'a ResolvedInstance,
        beta: f64,
    ) -> Result<Self, HarnessError> {
        let n = inst.p.len();
        let n_f = n as f64;
        let s_f = (n_f.powf(2.0 / 3.0) * cfg.alpha.cbrt() / cfg.eps.powf(4.0 / 3.0)).min(n_f);
        Ok(Self {
            cfg,
            inst,
            phat: interpolated_predictor(&inst.hint, beta)?,
            p: Sampler::new(&inst.p),
            q: Sampler::new(&inst.q),
            n,
            s_f,
            bound: 2.0 * cfg.alpha / s_f + 4.0 / n_f,
        })
    }

    fn seed(&self, budget: u64, trial: usize, case: Case, alg: Algorithm) -> u64 {
        let key = budget * 1_000_000 + trial as u64 * 8 + case.id() * 4 + alg.id();
        child_seed(self.cfg.seed, key)
    }

    fn trial(
        &self,
        budget: u64,
        trial: usize,
        case: Case,
        alg: Algorithm,
    ) -> Result<TrialRecord, HarnessError> {
        let mut rng = SeededRng::new(self.seed(budget, trial, case, alg));
        let other = match case {
            Case::Same => &self.p,
            Case::Far => &self.q,
        };
        let eps = self.cfg.eps;
        let mut prep_samples = 0;
        let (statistic, verdict) = match alg {
            Algorithm::Standard => {
                let x = self.p.draw(&mut rng, budget);
                let y = other.draw(&mut rng, budget);
                let t = t_statistic(&x, &y)?;
                (Some(t), vote(t, budget, eps, self.n))
            }
            Algorithm::Augmented => {
                prep_samples = ((budget as f64 / 2.0).min(self.s_f)).floor() as u64;
                let prep = self.p.draw(&mut rng, prep_samples);
                let f = build_augmented_flattening(&self.phat, &prep, 1.0 / self.n as f64)?;
                let x = flatten_batch(&f, &self.p.draw(&mut rng, budget), &mut rng)?;
                let y = flatten_batch(&f, &other.draw(&mut rng, budget), &mut rng)?;
                if collision_rate(&x) > INACCURATE_FACTOR * self.bound {
                    (None, Verdict::Inaccurate)
                } else {
                    let t = t_statistic(&x, &y)?;
                    (Some(t), vote(t, budget, eps, f.flat_size()))
                }
            }
            Algorithm::Crs15 => {
                let (phat, qhat) = match case {
                    Case::Same => &self.inst.crs_same,
                    Case::Far => &self.inst.crs_far,
                };
                let x = self.p.draw(&mut rng, budget);
                let y = other.draw(&mut rng, budget);
                let v = crs15_test(phat, qhat, &x, &y, eps)?;
                (Some(if v == Verdict::Accept { 1.0 } else { 0.0 }), v)
            }
        };
        Ok(TrialRecord {
            budget,
            trial,
            case,
            algorithm: alg,
            statistic,
            verdict,
            prep_samples,
        })
    }

    /// Records ordered by budget, algorithm (config order), case, trial.
    fn records(
        &self,
        budgets: &[u64],
        algorithms: &[Algorithm],
    ) -> Result<Vec<TrialRecord>, HarnessError> {
        let mut cells = Vec::new();
        for &b in budgets {
            for &a in algorithms {
                for case in [Case::Same, Case::Far] {
                    for t in 0..self.cfg.trials {
                        cells.push((b, a, case, t));
                    }
                }
            }
        }
        cells
            .into_par_iter()
            .map(|(b, a, case, t)| self.trial(b, t, case, a))
            .collect()
    }
}

fn vote(t: f64, budget: u64, eps: f64, domain: usize) -> Verdict {
    if t <= accept_threshold(budget, eps, domain) {
        Verdict::Accept
    } else {
        Verdict::Reject
    }
}

fn summarize(
    records: &[TrialRecord],
    budget: u64,
    alg: Algorithm,
) -> Result<SummaryRow, HarnessError> {
    let mut same = Vec::new();
    let mut far = Vec::new();
    let mut inaccurate = 0usize;
    let mut total = 0usize;
    for r in records
        .iter()
        .filter(|r| r.budget == budget && r.algorithm == alg)
    {
        total += 1;
        match (r.statistic, r.case) {
            (None, _) => inaccurate += 1,
            (Some(z), Case::Same) => same.push(z),
            (Some(z), Case::Far) => far.push(z),
        }
    }
    let sep = if same.is_empty() || far.is_empty() {
        None
    } else {
        Some(separation_error(&same, &far)?)
    };
    Ok(SummaryRow {
        budget,
        algorithm: alg,
        threshold: sep.map(|s| s.threshold),
        error: sep.map(|s| s.error),
        inaccurate_rate: inaccurate as f64 / total.max(1) as f64,
    })
}

/// All configured budgets and algorithms at interpolation `cfg.beta`.
pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepOutput, HarnessError> {
    cfg.validate()?;
    let inst = resolve_instance(&cfg.instance, cfg.crs_drop_fraction)?;
    run_sweep_on(cfg, &inst)
}

pub(crate) fn run_sweep_on(
    cfg: &SweepConfig,
    inst: &ResolvedInstance,
) -> Result<SweepOutput, HarnessError> {
    let ctx = Context::new(cfg, inst, cfg.beta)?;
    let trials = ctx.records(&cfg.budgets, &cfg.algorithms)?;
    let mut summary = Vec::new();
    for &b in &cfg.budgets {
        for &a in &cfg.algorithms {
            summary.push(summarize(&trials, b, a)?);
        }
    }
    Ok(SweepOutput { trials, summary })
}

/// Augmented and standard separation error at the fixed budget
/// `cfg.beta_budget()` for each `β` in `cfg.betas`.
pub fn beta_sweep(cfg: &SweepConfig) -> Result<Vec<BetaRow>, HarnessError> {
    cfg.validate()?;
    let inst = resolve_instance(&cfg.instance, cfg.crs_drop_fraction)?;
    let budget = cfg.beta_budget();
    let algs = [Algorithm::Augmented, Algorithm::Standard];
    let mut rows = Vec::with_capacity(cfg.betas.len());
    for &beta in &cfg.betas {
        let ctx = Context::new(cfg, &inst, beta)?;
        let records = ctx.records(&[budget], &algs)?;
        rows.push(BetaRow {
            beta,
            tv_p_phat: tv_distance(&inst.p, &ctx.phat)?,
            error_augmented: summarize(&records, budget, Algorithm::Augmented)?.error,
            error_standard: summarize(&records, budget, Algorithm::Standard)?.error,
        });
    }
    Ok(rows)
}

fn write_csv<W: Write, T: Serialize>(rows: &[T], writer: W) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(writer);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Columns `budget,trial,case,algorithm,statistic,verdict,prep_samples`.
pub fn write_trials_csv<W: Write>(rows: &[TrialRecord], writer: W) -> Result<(), HarnessError> {
    write_csv(rows, writer)
}

/// Columns `budget,algorithm,threshold,error,inaccurate_rate`.
pub fn write_summary_csv<W: Write>(rows: &[SummaryRow], writer: W) -> Result<(), HarnessError> {
    write_csv(rows, writer)
}

/// Columns `beta,tv_p_phat,error_augmented,error_standard`.
pub fn write_beta_csv<W: Write>(rows: &[BetaRow], writer: W) -> Result<(), HarnessError> {
    write_csv(rows, writer)
}
