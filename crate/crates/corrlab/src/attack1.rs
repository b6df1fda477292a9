//! Non-iterative correlation attack: posterior reliability per bit,
//! selection of the most reliable linearly independent positions, and
//! exhaustive toggle search ordered by Hamming distance, plus the
//! analytic trial-count estimates.

use crate::bits::BitSequence;
use crate::checks::{CheckEvaluation, CheckSystem};
use crate::error::{Error, Result};
use crate::gf2::{dependency_rows, invert, sequence_rows, ConnectionPolynomial, Gf2Basis, LfsrKey};
use crate::info::binary_entropy;
use crate::numeric::binom_tail_at_least;

/// Crossover probabilities are kept strictly inside (0, 0.5) before the
/// posterior formulas; the endpoints make them indeterminate.
pub const CROSSOVER_FLOOR: f64 = 1e-6;

pub fn clamp_crossover(p: f64) -> f64 {
    p.clamp(CROSSOVER_FLOOR, 0.5 - CROSSOVER_FLOOR)
}

/// Probability that a parity over t independently-noisy bits is
/// error-free: the chance of an even number of flips among t bits of
/// flip rate p1. Closed form (1 + (1-2p1)^t) / 2.
pub fn fold_s(p1: f64, t: u32) -> f64 {
    debug_assert!(t >= 1);
    (1.0 + (1.0 - 2.0 * p1).powi(t as i32)) / 2.0
}

/// Posterior probability that a bit matches the noiseless sequence
/// given h of its w checks hold, each check error-free with
/// probability s. Log-domain evaluation; the balanced case h = w/2
/// returns the prior exactly.
pub fn pstar(p1: f64, s: f64, w: u32, h: u32) -> f64 {
    debug_assert!(h <= w);
    if 2 * h == w {
        return 1.0 - p1;
    }
    let d = (p1 / (1.0 - p1)).ln()
        - (2.0 * h as f64 - w as f64) * (s / (1.0 - s)).ln();
    1.0 / (1.0 + d.exp())
}

/// Per-bit posterior reliabilities from a check evaluation. Each
/// check's fold probability is computed from its own arity (uniform
/// within one system, since squaring preserves tap count).
pub fn reliability_vector(z: &BitSequence, checks: &CheckSystem, p1: f64) -> Vec<f64> {
    let p1 = clamp_crossover(p1);
    let s = fold_s(p1, checks.t() as u32);
    let eval = checks.evaluate(z);
    reliability_from_eval(checks, &eval, p1, s)
}

pub(crate) fn reliability_from_eval(
    checks: &CheckSystem,
    eval: &CheckEvaluation,
    p1: f64,
    s: f64,
) -> Vec<f64> {
    (0..checks.n())
        .map(|j| pstar(p1, s, checks.weight(j) as u32, eval.h[j]))
        .collect()
}

/// Greedy scan in descending reliability (ties to the lower index),
/// keeping positions whose dependency rows are linearly independent,
/// until k are found.
pub fn select_reliable_independent(
    p_star: &[f64],
    poly: &ConnectionPolynomial,
    k: u32,
) -> Result<Vec<usize>> {
    let n = p_star.len();
    if n < k as usize {
        return Err(Error::RankDeficient {
            found: 0,
            needed: k as usize,
        });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| p_star[b].total_cmp(&p_star[a]).then(a.cmp(&b)));
    let rows = sequence_rows(poly, n);
    let mut basis = Gf2Basis::new(k);
    let mut selected = Vec::with_capacity(k as usize);
    for idx in order {
        if basis.try_insert(rows[idx]) {
            selected.push(idx);
            if selected.len() == k as usize {
                return Ok(selected);
            }
        }
    }
    Err(Error::RankDeficient {
        found: selected.len(),
        needed: k as usize,
    })
}

/// Toggle patterns over k selected positions, ordered by Hamming
/// distance and lexicographically by toggled index set within one
/// distance. Yields bitmasks over the selection indices.
pub struct TogglePatterns {
    k: u32,
    distance: u32,
    // current combination as ascending indices; empty before distance 1
    indices: Vec<u32>,
    done: bool,
    fresh_distance: bool,
}

impl TogglePatterns {
    pub fn new(k: u32) -> Self {
        assert!(k >= 1 && k <= 63);
        TogglePatterns {
            k,
            distance: 0,
            indices: Vec::new(),
            done: false,
            fresh_distance: true,
        }
    }

    fn mask(&self) -> u64 {
        self.indices.iter().fold(0u64, |m, &i| m | 1u64 << i)
    }
}

impl Iterator for TogglePatterns {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        if self.done {
            return None;
        }
        if self.fresh_distance {
            self.fresh_distance = false;
            self.indices = (0..self.distance).collect();
            return Some(self.mask());
        }
        // advance the combination: rightmost index that can move right
        let d = self.distance as usize;
        let mut i = d;
        loop {
            if i == 0 {
                // distance exhausted
                if self.distance == self.k {
                    self.done = true;
                    return None;
                }
                self.distance += 1;
                self.fresh_distance = true;
                return self.next();
            }
            i -= 1;
            if self.indices[i] < self.k - (d - i) as u32 {
                self.indices[i] += 1;
                for j in i + 1..d {
                    self.indices[j] = self.indices[j - 1] + 1;
                }
                return Some(self.mask());
            }
        }
    }
}

/// Number of patterns with Hamming distance at most r: sum of C(k, i).
pub fn pattern_count(k: u32, r: u32) -> u128 {
    debug_assert!(r <= k);
    let mut total: u128 = 0;
    let mut c: u128 = 1;
    for i in 0..=r {
        total += c;
        c = c * (k - i) as u128 / (i + 1) as u128;
    }
    total
}

/// Entropy-form trial estimate 2^(H(rho) * k) with rho = r / k.
pub fn entropy_order(k: u32, r: f64) -> f64 {
    let rho = r / k as f64;
    (binary_entropy(rho) * k as f64).exp2()
}

/// Exact pattern budget A(k, r) together with its entropy-form bound.
pub fn trials_budget(k: u32, r: u32) -> (u128, f64) {
    (pattern_count(k, r), entropy_order(k, r as f64))
}

pub const DEFAULT_MAX_TRIALS: u64 = 1 << 20;

/// Result of one toggle-search key recovery.
#[derive(Clone, Debug)]
pub struct Attack1Outcome {
    pub success: bool,
    /// Candidate keys tested, including the successful one.
    pub trials: u64,
    pub recovered_key: Option<LfsrKey>,
    pub selected_positions: Vec<usize>,
    /// Selected positions whose observed bit disagrees with the true
    /// sequence (the r that governs the search depth).
    pub wrong_selected: u32,
}

/// Recovers the initial state from a noisy observation: ranks bits by
/// posterior reliability, picks k independent positions, solves for the
/// base candidate, then toggles the selected values in distance order.
/// Every solved candidate counts as one trial and is verified against
/// the true key (worst-case verification oracle). Stops at max_trials
/// and records a failure if no pattern matched.
pub fn run_attack1(
    y: &BitSequence,
    checks: &CheckSystem,
    p_prime: f64,
    true_key: &LfsrKey,
    poly: &ConnectionPolynomial,
    max_trials: u64,
) -> Result<Attack1Outcome> {
    assert!(max_trials >= 1);
    let k = poly.degree();
    let reliab = reliability_vector(y, checks, p_prime);
    let selected = select_reliable_independent(&reliab, poly, k)?;
    let rows = dependency_rows(&selected, poly);
    let inv = invert(&rows, k)?;

    // base solution from the observed bits at the selected positions
    let mut vmask = 0u64;
    for (i, &pos) in selected.iter().enumerate() {
        if y.get(pos) {
            vmask |= 1u64 << i;
        }
    }
    let solve = |v: u64| -> u64 {
        let mut state = 0u64;
        for (i, &m) in inv.iter().enumerate() {
            if (m & v).count_ones() & 1 == 1 {
                state |= 1u64 << i;
            }
        }
        state
    };
    let base = solve(vmask);
    // toggling value bit i moves the solution by the i-th inverse column
    let columns: Vec<u64> = (0..k).map(|i| solve(1u64 << i)).collect();

    let truth = generate_bits_at(poly, true_key, &selected)?;
    let wrong_selected = selected
        .iter()
        .enumerate()
        .filter(|&(i, &pos)| y.get(pos) != truth[i])
        .count() as u32;

    let mut trials = 0u64;
    for pattern in TogglePatterns::new(k) {
        if trials == max_trials {
            break;
        }
        trials += 1;
        let mut cand = base;
        let mut rest = pattern;
        while rest != 0 {
            let i = rest.trailing_zeros();
            cand ^= columns[i as usize];
            rest &= rest - 1;
        }
        if cand == true_key.state() {
            return Ok(Attack1Outcome {
                success: true,
                trials,
                recovered_key: Some(*true_key),
                selected_positions: selected,
                wrong_selected,
            });
        }
    }
    Ok(Attack1Outcome {
        success: false,
        trials,
        recovered_key: None,
        selected_positions: selected,
        wrong_selected,
    })
}

fn generate_bits_at(
    poly: &ConnectionPolynomial,
    key: &LfsrKey,
    positions: &[usize],
) -> Result<Vec<bool>> {
    let n = positions.iter().copied().max().map_or(0, |m| m + 1);
    let seq = crate::gf2::generate_sequence(poly, key, n)?;
    Ok(positions.iter().map(|&p| seq.get(p)).collect())
}

/// Analytic estimate of the search difficulty. h_prime is the deepest
/// check count such that at least k bits are expected to satisfy that
/// many of their checks; r_bar the expected number of wrong bits among
/// the k selected; trial_order the entropy-form trial estimate 2^(H(r_bar/k)k).
pub fn expected_wrong_selected(
    k: u32,
    w_avg: f64,
    p_prime: f64,
    n: usize,
    checks: &CheckSystem,
) -> (u32, f64, f64) {
    let p = p_prime.clamp(0.0, 0.5);
    let w = w_avg.max(0.0).round() as u32;
    if w == 0 || n == 0 {
        return (0, k as f64 * p, entropy_order(k, k as f64 * p));
    }
    let s = fold_s(p, checks.t() as u32);
    // a wrong bit satisfies each check with probability 1 - s, a right
    // bit with probability s; scan thresholds from the deepest down
    let mixture = |h: u32| -> (f64, f64, f64) {
        let tail_wrong = binom_tail_at_least(w, 1.0 - s, h);
        let tail_right = binom_tail_at_least(w, s, h);
        (
            tail_wrong,
            tail_right,
            p * tail_wrong + (1.0 - p) * tail_right,
        )
    };
    let mut h_prime = 0;
    for h in (0..=w).rev() {
        let (_, _, mix) = mixture(h);
        if n as f64 * mix >= k as f64 {
            h_prime = h;
            break;
        }
    }
    let (tail_wrong, _, mix) = mixture(h_prime);
    let r_bar = k as f64 * p * tail_wrong / mix;
    (h_prime, r_bar, entropy_order(k, r_bar))
}
