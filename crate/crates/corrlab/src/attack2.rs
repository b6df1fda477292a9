//! Iterative correlation attack: rounds of individual-reliability
//! updates driven by per-check agreement probabilities, threshold
//! flipping, and convergence/stagnation tracking.

use crate::attack1::{clamp_crossover, fold_s, pstar};
use crate::bits::BitSequence;
use crate::checks::{CheckEvaluation, CheckSystem};
use crate::error::{Error, Result};
use crate::info::empirical_mi;
use crate::numeric::binom_pmf;
use serde::{Deserialize, Serialize};

/// Reliability products are kept strictly inside (0, 1); the log-odds
/// accumulation would otherwise produce infinities.
const RELIABILITY_FLOOR: f64 = 1e-12;

fn clamp_unit(x: f64) -> f64 {
    x.clamp(RELIABILITY_FLOOR, 1.0 - RELIABILITY_FLOOR)
}

/// Probability that a parity over bits of individual agreement
/// probabilities q_0..q_{t-1} is error-free: fold of the pairwise
/// rule S <- q*S + (1-q)(1-S).
pub fn smatrix_entry(q: &[f64]) -> Result<f64> {
    let (&first, rest) = q
        .split_first()
        .ok_or(Error::InvalidArity { got: 0, want: 1 })?;
    let mut s = first;
    for &ql in rest {
        s = ql * s + (1.0 - ql) * (1.0 - s);
    }
    Ok(s)
}

/// One Jacobi update of the reliability vector: every bit's posterior
/// is recomputed from the previous vector's values at the other
/// positions of each of its checks.
pub fn update_pstar_individual(
    z: &BitSequence,
    checks: &CheckSystem,
    p_star_prev: &[f64],
    p1: f64,
) -> Vec<f64> {
    let eval = checks.evaluate(z);
    let mut out = vec![0.0; checks.n()];
    update_from_eval(checks, &eval, p_star_prev, clamp_crossover(p1), &mut out);
    out
}

/// Core of the update: log-odds of disagreement per bit, one lambda
/// contribution per check, sign by hold/fail status.
fn update_from_eval(
    checks: &CheckSystem,
    eval: &CheckEvaluation,
    prev: &[f64],
    p1: f64,
    out: &mut [f64],
) {
    let llr0 = (p1 / (1.0 - p1)).ln();
    out.fill(llr0);
    for c in 0..checks.num_checks() {
        let mut s = 1.0;
        let mut seen = false;
        for &o in checks.others_of(c) {
            let q = prev[o as usize];
            s = if seen { q * s + (1.0 - q) * (1.0 - s) } else { q };
            seen = true;
        }
        let s = clamp_unit(s);
        let lambda = (s / (1.0 - s)).ln();
        let j = checks.target_of(c) as usize;
        if eval.holds[c] {
            out[j] -= lambda;
        } else {
            out[j] += lambda;
        }
    }
    for d in out.iter_mut() {
        *d = clamp_unit(1.0 / (1.0 + d.exp()));
    }
}

/// Channel estimate from the fraction f of satisfied base-level
/// checks, inverting f = (1 + (1-2p)^(t+1)) / 2. A fraction at or
/// below one half carries no information and maps to the clamp
/// ceiling.
pub fn estimate_p1(z: &BitSequence, checks: &CheckSystem) -> Result<f64> {
    let f = checks
        .evaluate(z)
        .level0_fraction()
        .ok_or_else(|| Error::InsufficientData("no base-level checks".into()))?;
    let u: f64 = 2.0 * f - 1.0;
    if u <= 0.0 {
        return Ok(0.5 - crate::attack1::CROSSOVER_FLOOR);
    }
    let arity = checks.t() as f64 + 1.0;
    Ok(clamp_crossover((1.0 - u.powf(1.0 / arity)) / 2.0))
}

/// Decision thresholds optimized for expected net correction in the
/// first iteration: a bit is wrong with probability p1 and then sees
/// each check hold with probability 1-s (s if right).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Thresholds {
    /// Checks-holding count below which a bit is flipped.
    pub h_thr: u32,
    /// Reliability value equivalent to h_thr under the uniform model.
    pub p_thr: f64,
    /// Expected number of sub-threshold bits; exceeding it ends a round.
    pub n_thr: f64,
}

pub fn compute_thresholds(p1: f64, checks: &CheckSystem, n: usize) -> Thresholds {
    let p1 = clamp_crossover(p1);
    let s = fold_s(p1, checks.t() as u32);
    let w = checks.mean_weight().round() as u32;
    // cumulative expected net correction when flipping all bits with
    // fewer than h_thr holding checks; argmax, ties to the smallest
    let mut best_h = 1;
    let mut best_net = f64::NEG_INFINITY;
    let mut net = 0.0;
    for h_thr in 1..=w.max(1) {
        let h = h_thr - 1;
        net += n as f64
            * (p1 * binom_pmf(w, 1.0 - s, h) - (1.0 - p1) * binom_pmf(w, s, h));
        if net > best_net {
            best_net = net;
            best_h = h_thr;
        }
    }
    let n_thr: f64 = (0..best_h)
        .map(|h| {
            n as f64 * (p1 * binom_pmf(w, 1.0 - s, h) + (1.0 - p1) * binom_pmf(w, s, h))
        })
        .sum();
    Thresholds {
        h_thr: best_h,
        p_thr: pstar(p1, s, w, best_h),
        n_thr,
    }
}

/// P* value every bit is reset to between rounds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ResetPolicy {
    /// 1 - p1, the prior probability that a bit agrees with the
    /// noiseless sequence.
    #[default]
    Agreement,
    /// Literal p1.
    Prior,
}

impl ResetPolicy {
    pub fn reset_value(self, p1: f64) -> f64 {
        match self {
            ResetPolicy::Agreement => 1.0 - p1,
            ResetPolicy::Prior => p1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Attack2Params {
    /// Iterations per round.
    pub alpha: u32,
    pub p_thr: f64,
    pub n_thr: f64,
    pub max_rounds: u32,
    /// P* value at the start of every round.
    pub reset_value: f64,
}

impl Attack2Params {
    pub fn new(alpha: u32, thresholds: Thresholds, max_rounds: u32, reset_value: f64) -> Self {
        assert!(alpha >= 1, "at least one iteration per round");
        assert!(thresholds.p_thr > 0.0 && thresholds.p_thr < 1.0);
        assert!(thresholds.n_thr >= 0.0);
        Attack2Params {
            alpha,
            p_thr: thresholds.p_thr,
            n_thr: thresholds.n_thr,
            max_rounds,
            reset_value,
        }
    }
}

/// One round: reliabilities start at the reset value, up to alpha
/// Jacobi updates run (ending early once more than n_thr bits fall
/// below p_thr), then every sub-threshold bit is flipped.
pub fn run_round(
    y: &BitSequence,
    checks: &CheckSystem,
    params: &Attack2Params,
    p1: f64,
) -> (BitSequence, u32, usize) {
    let p1 = clamp_crossover(p1);
    let n = checks.n();
    let eval = checks.evaluate(y);
    let mut p_star = vec![params.reset_value; n];
    let mut scratch = vec![0.0; n];
    let mut iterations = 0;
    for _ in 0..params.alpha {
        update_from_eval(checks, &eval, &p_star, p1, &mut scratch);
        std::mem::swap(&mut p_star, &mut scratch);
        iterations += 1;
        let low = p_star.iter().filter(|&&p| p < params.p_thr).count();
        if low as f64 > params.n_thr {
            break;
        }
    }
    let mut updated = y.clone();
    let mut flips = 0;
    for (j, &p) in p_star.iter().enumerate() {
        if p < params.p_thr {
            updated.flip(j);
            flips += 1;
        }
    }
    (updated, iterations, flips)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Attack2Status {
    Converged,
    Stagnated,
    RoundCap,
}

impl Attack2Status {
    pub fn label(&self) -> &'static str {
        match self {
            Attack2Status::Converged => "converged",
            Attack2Status::Stagnated => "stagnated",
            Attack2Status::RoundCap => "round_cap",
        }
    }
}

/// Per-round observables, measured after the round's flips.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RoundRecord {
    /// Hamming distance to the noiseless sequence.
    pub errors: usize,
    pub flips: usize,
    pub iterations: u32,
    /// Empirical mutual information with the noiseless sequence.
    pub mi: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RoundTrace {
    pub initial_errors: usize,
    pub initial_mi: f64,
    pub rounds: Vec<RoundRecord>,
    pub status: Attack2Status,
}

impl RoundTrace {
    pub fn final_errors(&self) -> usize {
        self.rounds.last().map_or(self.initial_errors, |r| r.errors)
    }

    pub fn num_rounds(&self) -> usize {
        self.rounds.len()
    }
}

/// Runs rounds until the sequence matches the truth, a round flips
/// nothing, or the round cap is reached. The truth is used only for
/// instrumentation (error counts, MI, convergence detection); the
/// per-round decisions depend on the observed sequence alone.
pub fn run_attack2(
    y0: &BitSequence,
    a_truth: &BitSequence,
    checks: &CheckSystem,
    params: &Attack2Params,
    p1: f64,
) -> RoundTrace {
    assert_eq!(y0.len(), a_truth.len(), "sequence lengths must agree");
    let mi_of = |z: &BitSequence| empirical_mi(a_truth, z).unwrap_or(0.0);
    let initial_errors = y0.hamming(a_truth);
    let mut trace = RoundTrace {
        initial_errors,
        initial_mi: mi_of(y0),
        rounds: Vec::new(),
        status: Attack2Status::RoundCap,
    };
    if initial_errors == 0 {
        trace.status = Attack2Status::Converged;
        return trace;
    }
    let mut z = y0.clone();
    for _ in 0..params.max_rounds {
        let (updated, iterations, flips) = run_round(&z, checks, params, p1);
        z = updated;
        let errors = z.hamming(a_truth);
        trace.rounds.push(RoundRecord {
            errors,
            flips,
            iterations,
            mi: mi_of(&z),
        });
        if errors == 0 {
            trace.status = Attack2Status::Converged;
            return trace;
        }
        if flips == 0 {
            trace.status = Attack2Status::Stagnated;
            return trace;
        }
    }
    trace
}
