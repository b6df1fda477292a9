//! Parity-check derivation from the LFSR recurrence and its squarings.
//!
//! The base recurrence relates t+1 positions spaced by the polynomial's
//! tap offsets. Squaring the polynomial m times keeps the same number
//! of terms (over GF(2), g(X)^2 = g(X^2)) and scales every offset by
//! 2^m. Every rearrangement of each relation that fits inside the
//! window is stored as a check targeting one position, with the other
//! t positions recorded as its index set.

use crate::bits::BitSequence;
use crate::gf2::ConnectionPolynomial;

/// All parity checks for a sequence window, grouped by target bit.
pub struct CheckSystem {
    n: usize,
    t: usize,
    max_level: u32,
    // flat storage: check c targets target[c] with others
    // others[c*t .. (c+1)*t], derived at squaring level level[c].
    target: Vec<u32>,
    level: Vec<u8>,
    others: Vec<u32>,
    // per-bit ranges: checks of bit j are bit_start[j]..bit_start[j+1]
    bit_start: Vec<u32>,
    level0_count: usize,
}

/// Hold/fail status of every check against a concrete sequence.
pub struct CheckEvaluation {
    /// Per check: parity over the full index set (target included) is zero.
    pub holds: Vec<bool>,
    /// Per bit: number of its checks that hold.
    pub h: Vec<u32>,
    /// Total checks not holding.
    pub failures: usize,
    /// Level-0 checks holding / total, for channel-parameter estimation.
    pub level0_held: usize,
    pub level0_total: usize,
}

impl CheckSystem {
    /// Default squaring depth: largest m with k·2^m <= n-1, so squared
    /// relations still fit the window; zero when nothing fits.
    pub fn default_max_squarings(poly: &ConnectionPolynomial, n: usize) -> u32 {
        let k = poly.degree() as usize;
        if n == 0 || (n - 1) / k == 0 {
            return 0;
        }
        ((n - 1) / k).ilog2()
    }

    /// Derives checks at the default squaring depth for the window.
    pub fn derive_full(poly: &ConnectionPolynomial, n: usize) -> Self {
        Self::derive(poly, n, Self::default_max_squarings(poly, n))
    }

    /// Derives all checks for squaring levels m = 0..=max_squarings
    /// whose span k·2^m fits strictly inside n.
    pub fn derive(poly: &ConnectionPolynomial, n: usize, max_squarings: u32) -> Self {
        let k = poly.degree() as usize;
        let taps = poly.taps();
        let t = taps.len() - 1;
        let mut per_bit: Vec<Vec<(u8, Vec<u32>)>> = vec![Vec::new(); n];
        let mut max_level = 0;
        let mut level0_count = 0;
        for m in 0..=max_squarings {
            let Some(span) = (k as u64).checked_shl(m).filter(|&s| s < n as u64) else {
                break;
            };
            let span = span as usize;
            max_level = m;
            let offsets: Vec<usize> = taps.iter().map(|&tp| (tp as usize) << m).collect();
            for j in 0..n - span {
                let positions: Vec<u32> = offsets.iter().map(|&o| (j + o) as u32).collect();
                for u in 0..positions.len() {
                    let others: Vec<u32> = positions
                        .iter()
                        .enumerate()
                        .filter(|&(v, _)| v != u)
                        .map(|(_, &p)| p)
                        .collect();
                    per_bit[positions[u] as usize].push((m as u8, others));
                    if m == 0 {
                        level0_count += 1;
                    }
                }
            }
        }
        let total: usize = per_bit.iter().map(|c| c.len()).sum();
        let mut target = Vec::with_capacity(total);
        let mut level = Vec::with_capacity(total);
        let mut others = Vec::with_capacity(total * t);
        let mut bit_start = Vec::with_capacity(n + 1);
        bit_start.push(0u32);
        for (j, checks) in per_bit.into_iter().enumerate() {
            for (lv, idx) in checks {
                target.push(j as u32);
                level.push(lv);
                others.extend_from_slice(&idx);
            }
            bit_start.push(target.len() as u32);
        }
        CheckSystem {
            n,
            t,
            max_level,
            target,
            level,
            others,
            bit_start,
            level0_count,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Others per check (t of the polynomial).
    pub fn t(&self) -> usize {
        self.t
    }

    pub fn num_checks(&self) -> usize {
        self.target.len()
    }

    /// Highest squaring level actually stored.
    pub fn max_level(&self) -> u32 {
        self.max_level
    }

    /// Check indices targeting bit j.
    pub fn checks_of(&self, j: usize) -> std::ops::Range<usize> {
        self.bit_start[j] as usize..self.bit_start[j + 1] as usize
    }

    /// Number of checks stored for bit j (w_j).
    pub fn weight(&self, j: usize) -> usize {
        self.checks_of(j).len()
    }

    /// Mean of w_j over all bits.
    pub fn mean_weight(&self) -> f64 {
        if self.n == 0 {
            return 0.0;
        }
        self.num_checks() as f64 / self.n as f64
    }

    pub fn target_of(&self, c: usize) -> usize {
        self.target[c] as usize
    }

    pub fn level_of(&self, c: usize) -> u32 {
        self.level[c] as u32
    }

    /// The t non-target positions of check c.
    pub fn others_of(&self, c: usize) -> &[u32] {
        &self.others[c * self.t..(c + 1) * self.t]
    }

    /// Evaluates every check against a sequence of length n.
    pub fn evaluate(&self, z: &BitSequence) -> CheckEvaluation {
        assert_eq!(z.len(), self.n, "sequence length mismatch");
        let num = self.num_checks();
        let mut holds = Vec::with_capacity(num);
        let mut h = vec![0u32; self.n];
        let mut failures = 0;
        let mut level0_held = 0;
        for c in 0..num {
            let parity = z.parity_at(self.others_of(c)) ^ z.get(self.target[c] as usize);
            let hold = !parity;
            holds.push(hold);
            if hold {
                h[self.target[c] as usize] += 1;
                if self.level[c] == 0 {
                    level0_held += 1;
                }
            } else {
                failures += 1;
            }
        }
        CheckEvaluation {
            holds,
            h,
            failures,
            level0_held,
            level0_total: self.level0_count,
        }
    }
}

impl CheckEvaluation {
    /// Fraction of level-0 checks holding, None when none exist.
    pub fn level0_fraction(&self) -> Option<f64> {
        if self.level0_total == 0 {
            None
        } else {
            Some(self.level0_held as f64 / self.level0_total as f64)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf2::{generate_sequence, vetted_poly, ConnectionPolynomial, LfsrKey};
    use crate::rng::stream;
    use rand::Rng;
    use std::collections::BTreeSet;

    fn poly_k3() -> ConnectionPolynomial {
        ConnectionPolynomial::from_exponents(&[0, 1, 3]).unwrap()
    }

    #[test]
    fn window_too_small_yields_empty_system() {
        let p = poly_k3();
        let sys = CheckSystem::derive(&p, 3, 4);
        assert_eq!(sys.num_checks(), 0);
        for j in 0..3 {
            assert_eq!(sys.weight(j), 0);
        }
    }

    #[test]
    fn interior_weight_level0_only() {
        // t = 2: every interior bit sits in t+1 = 3 windows.
        let p = poly_k3();
        let sys = CheckSystem::derive(&p, 100, 0);
        for j in 3..97 {
            assert_eq!(sys.weight(j), 3, "bit {j}");
        }
        // boundary bits have fewer
        assert_eq!(sys.weight(0), 1);
        assert_eq!(sys.weight(99), 1);
        assert_eq!(sys.max_level(), 0);
    }

    // Hand enumeration for k=3, taps {0,1,3}, n=20, one squaring:
    // level 0 windows j..j+3, level 1 offsets {0,2,6} windows j..j+6.
    #[test]
    fn hand_enumerated_small_system() {
        let p = poly_k3();
        let sys = CheckSystem::derive(&p, 20, 1);
        assert_eq!(sys.max_level(), 1);
        // level-0: 17 windows x 3 members; level-1: 14 windows x 3
        assert_eq!(sys.num_checks(), 17 * 3 + 14 * 3);
        // bit 0: target of (0,{1,3}) at level 0 and (0,{2,6}) at level 1
        let c0: Vec<(u32, Vec<u32>)> = sys
            .checks_of(0)
            .map(|c| (sys.level_of(c), sys.others_of(c).to_vec()))
            .collect();
        assert!(c0.contains(&(0, vec![1, 3])));
        assert!(c0.contains(&(1, vec![2, 6])));
        assert_eq!(c0.len(), 2);
        // interior bit 9 participates in 3 level-0 + 3 level-1 checks
        assert_eq!(sys.weight(9), 6);
        let l1_of_9: BTreeSet<Vec<u32>> = sys
            .checks_of(9)
            .filter(|&c| sys.level_of(c) == 1)
            .map(|c| {
                let mut o = sys.others_of(c).to_vec();
                o.sort_unstable();
                o
            })
            .collect();
        // windows with position set {j, j+2, j+6} containing 9:
        // {9,11,15}, {7,9,13}, {3,5,9}
        let expect: BTreeSet<Vec<u32>> = [vec![11, 15], vec![7, 13], vec![3, 5]]
            .into_iter()
            .collect();
        assert_eq!(l1_of_9, expect);
    }

    #[test]
    fn no_check_contains_its_target() {
        let p = vetted_poly(5).unwrap();
        let sys = CheckSystem::derive(&p, 200, 3);
        for c in 0..sys.num_checks() {
            let tgt = sys.target_of(c) as u32;
            assert!(!sys.others_of(c).contains(&tgt), "check {c}");
            assert!(sys.others_of(c).iter().all(|&p| (p as usize) < 200));
        }
    }

    #[test]
    fn squared_offsets_scale_by_level() {
        let p = poly_k3();
        let sys = CheckSystem::derive(&p, 200, 2);
        for c in 0..sys.num_checks() {
            let m = sys.level_of(c);
            let mut set: Vec<i64> = sys
                .others_of(c)
                .iter()
                .map(|&x| x as i64)
                .chain([sys.target_of(c) as i64])
                .collect();
            set.sort_unstable();
            let base = set[0];
            let offsets: Vec<i64> = set.iter().map(|x| x - base).collect();
            assert_eq!(
                offsets,
                vec![0, 1 << m, 3 << m],
                "check {c} at level {m}"
            );
        }
    }

    #[test]
    fn default_depth_fits_window() {
        let p31 = vetted_poly(31).unwrap();
        // (3100-1)/31 = 99, floor log2 = 6
        assert_eq!(CheckSystem::default_max_squarings(&p31, 3100), 6);
        let p3 = poly_k3();
        assert_eq!(CheckSystem::default_max_squarings(&p3, 20), 2);
        assert_eq!(CheckSystem::default_max_squarings(&p3, 3), 0);
        assert_eq!(CheckSystem::default_max_squarings(&p3, 0), 0);
    }

    #[test]
    fn all_checks_hold_on_noiseless_sequences() {
        let mut rng = stream(5, 0, "check-soundness");
        for degree in [3u32, 5, 8, 11] {
            let p = vetted_poly(degree).unwrap();
            let key = LfsrKey::random(&mut rng, degree);
            let n = 50 * degree as usize;
            let a = generate_sequence(&p, &key, n).unwrap();
            let depth = CheckSystem::default_max_squarings(&p, n);
            let sys = CheckSystem::derive(&p, n, depth);
            let eval = sys.evaluate(&a);
            assert_eq!(eval.failures, 0, "degree {degree}");
            assert_eq!(eval.level0_fraction(), Some(1.0));
            for j in 0..n {
                assert_eq!(eval.h[j] as usize, sys.weight(j), "bit {j}");
            }
        }
    }

    #[test]
    fn evaluation_counts_seeded_error() {
        let p = poly_k3();
        let key = LfsrKey::new(0b001, 3).unwrap();
        let n = 20;
        let a = generate_sequence(&p, &key, n).unwrap();
        let sys = CheckSystem::derive(&p, n, 0);
        let mut z = a.clone();
        z.flip(9);
        let eval = sys.evaluate(&z);
        // every check whose index set includes bit 9 now fails
        for c in 0..sys.num_checks() {
            let touches = sys.target_of(c) == 9 || sys.others_of(c).contains(&9);
            assert_eq!(eval.holds[c], !touches, "check {c}");
        }
        assert_eq!(eval.failures, 9);
    }

    #[test]
    fn random_checks_sound_across_degrees() {
        let mut rng = stream(6, 0, "check-sample");
        for _ in 0..40 {
            let degree = rng.random_range(3u32..=16);
            let p = vetted_poly(degree).unwrap();
            let key = LfsrKey::random(&mut rng, degree);
            let n = rng.random_range(4 * degree as usize..40 * degree as usize);
            let a = generate_sequence(&p, &key, n).unwrap();
            let depth = CheckSystem::default_max_squarings(&p, n);
            let sys = CheckSystem::derive(&p, n, depth);
            if sys.num_checks() == 0 {
                continue;
            }
            for _ in 0..25 {
                let c = rng.random_range(0..sys.num_checks());
                let mut parity = a.get(sys.target_of(c));
                for &o in sys.others_of(c) {
                    parity ^= a.get(o as usize);
                }
                assert!(!parity, "degree {degree} check {c}");
            }
        }
    }
}
