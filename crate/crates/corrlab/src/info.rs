//! Entropy and mutual information, closed-form and empirical.

use crate::bits::BitSequence;
use crate::error::{Error, Result};

/// Binary entropy in bits, with 0 log 0 = 0.
pub fn binary_entropy(p: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&p), "entropy of {p}");
    let mut h = 0.0;
    if p > 0.0 {
        h -= p * p.log2();
    }
    if p < 1.0 {
        h -= (1.0 - p) * (1.0 - p).log2();
    }
    h
}

/// Probability that a maximal-length sequence bit is one:
/// 2^(k-1) / (2^k - 1).
pub fn lfsr_marginal_one(k: u32) -> f64 {
    assert!(k >= 1, "degree must be positive");
    // Evaluated as a ratio of exact integers; both fit f64 for k <= 63.
    let denom = 2f64.powi(k as i32) - 1.0;
    2f64.powi(k as i32 - 1) / denom
}

/// Closed-form mutual information between a maximal-length sequence bit
/// and its observation through a BSC with crossover p_prime:
/// H(q) - H(p_prime), where q = Pr(observed bit = 1).
pub fn closed_form_mi(p_prime: f64, k: u32) -> f64 {
    let m = lfsr_marginal_one(k);
    let q = m * (1.0 - p_prime) + (1.0 - m) * p_prime;
    binary_entropy(q) - binary_entropy(p_prime)
}

/// Plug-in mutual information estimate from joint bit counts of two
/// equal-length sequences. Empty cells contribute zero.
pub fn empirical_mi(a: &BitSequence, y: &BitSequence) -> Result<f64> {
    if a.len() != y.len() {
        return Err(Error::DimensionMismatch(format!(
            "sequence lengths {} vs {}",
            a.len(),
            y.len()
        )));
    }
    let n = a.len();
    if n == 0 {
        return Err(Error::InsufficientData("empty sequences".into()));
    }
    let ones_a = a.count_ones();
    let ones_y = y.count_ones();
    let n11 = a.and_count(y);
    let n10 = ones_a - n11;
    let n01 = ones_y - n11;
    let n00 = n - n11 - n10 - n01;
    let nf = n as f64;
    let marg_a = [(n - ones_a) as f64, ones_a as f64];
    let marg_y = [(n - ones_y) as f64, ones_y as f64];
    let joint = [[n00 as f64, n01 as f64], [n10 as f64, n11 as f64]];
    let mut mi = 0.0;
    for va in 0..2 {
        for vy in 0..2 {
            let c = joint[va][vy];
            if c > 0.0 {
                mi += (c / nf) * ((c * nf) / (marg_a[va] * marg_y[vy])).log2();
            }
        }
    }
    Ok(mi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::apply_bsc;
    use crate::gf2::{generate_sequence, vetted_poly, LfsrKey};
    use crate::rng::stream;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn entropy_pinned_values() {
        assert_eq!(binary_entropy(0.5), 1.0);
        assert_eq!(binary_entropy(0.0), 0.0);
        assert_eq!(binary_entropy(1.0), 0.0);
        assert_abs_diff_eq!(binary_entropy(0.26), 0.826746, epsilon = 1e-6);
    }

    #[test]
    fn marginal_pinned_values() {
        assert_eq!(lfsr_marginal_one(1), 1.0);
        assert_abs_diff_eq!(lfsr_marginal_one(3), 4.0 / 7.0, epsilon = 1e-15);
        assert_abs_diff_eq!(lfsr_marginal_one(31), 0.5, epsilon = 1e-9);
    }

    #[test]
    fn marginal_matches_period_count() {
        // degree 3: 4 ones over the period-7 sequence
        let p = vetted_poly(3).unwrap();
        let k = LfsrKey::new(1, 3).unwrap();
        let s = generate_sequence(&p, &k, 7).unwrap();
        assert_abs_diff_eq!(
            lfsr_marginal_one(3),
            s.count_ones() as f64 / 7.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn closed_form_pinned_values() {
        assert_eq!(closed_form_mi(0.5, 31), 0.0);
        assert_abs_diff_eq!(closed_form_mi(0.0, 31), 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(closed_form_mi(0.26, 31), 0.173254, epsilon = 1e-6);
    }

    #[test]
    fn empirical_identical_is_entropy() {
        let a = BitSequence::from_bits((0..64).map(|i| i % 3 == 0));
        let h = binary_entropy(a.count_ones() as f64 / 64.0);
        assert_abs_diff_eq!(empirical_mi(&a, &a).unwrap(), h, epsilon = 1e-12);
    }

    #[test]
    fn empirical_complement_is_entropy() {
        let a = BitSequence::from_bits((0..64).map(|i| i % 3 == 0));
        let compl = BitSequence::from_bits(a.iter().map(|b| !b));
        let h = binary_entropy(a.count_ones() as f64 / 64.0);
        assert_abs_diff_eq!(empirical_mi(&a, &compl).unwrap(), h, epsilon = 1e-12);
    }

    #[test]
    fn empirical_tracks_closed_form() {
        let p = vetted_poly(15).unwrap();
        let key = LfsrKey::new(0x1234, 15).unwrap();
        let n = 100_000;
        let a = generate_sequence(&p, &key, n).unwrap();
        let mut rng = stream(3, 0, "mi-oracle");
        let y = apply_bsc(&a, 0.2, &mut rng).unwrap();
        let mi = empirical_mi(&a, &y).unwrap();
        assert!((mi - closed_form_mi(0.2, 15)).abs() < 0.02, "mi {mi}");
    }

    #[test]
    fn empirical_rejects_mismatched_lengths() {
        let a = BitSequence::zeros(8);
        let b = BitSequence::zeros(9);
        assert!(matches!(
            empirical_mi(&a, &b),
            Err(Error::DimensionMismatch(_))
        ));
    }

    // With overlap counts fixed, the estimate depends only on the
    // counts, not on which positions carry the errors.
    #[test]
    fn empirical_depends_only_on_counts() {
        let a = BitSequence::from_bits((0..40).map(|i| i < 20));
        // two error patterns, each flipping one 1-bit and two 0-bits
        let mut y1 = a.clone();
        y1.flip(0);
        y1.flip(21);
        y1.flip(22);
        let mut y2 = a.clone();
        y2.flip(19);
        y2.flip(38);
        y2.flip(39);
        assert_abs_diff_eq!(
            empirical_mi(&a, &y1).unwrap(),
            empirical_mi(&a, &y2).unwrap(),
            epsilon = 1e-15
        );
    }

    proptest! {
        #[test]
        fn prop_empirical_symmetric_nonnegative(
            bits_a in proptest::collection::vec(any::<bool>(), 2..128),
            bits_b_seed in any::<u64>(),
        ) {
            let a = BitSequence::from_bits(bits_a.iter().copied());
            let b = BitSequence::from_bits(
                bits_a.iter().enumerate().map(|(i, &x)| {
                    x ^ ((bits_b_seed >> (i % 64)) & 1 == 1)
                }),
            );
            let ab = empirical_mi(&a, &b).unwrap();
            let ba = empirical_mi(&b, &a).unwrap();
            prop_assert!((ab - ba).abs() < 1e-12);
            prop_assert!(ab >= -1e-12);
        }

        // Eq.-(5)-style bound: MI never exceeds 1 - H(p')
        #[test]
        fn prop_closed_form_bounded(p in 0.0..=0.5f64, k in 2u32..32) {
            let mi = closed_form_mi(p, k);
            prop_assert!(mi <= 1.0 - binary_entropy(p) + 1e-12);
            prop_assert!(mi >= -1e-12);
        }

        #[test]
        fn prop_closed_form_decreasing(k in 2u32..32) {
            let grid: Vec<f64> = (0..50).map(|i| i as f64 * 0.01).collect();
            for w in grid.windows(2) {
                prop_assert!(
                    closed_form_mi(w[0], k) > closed_form_mi(w[1], k),
                    "k {} p {} {}", k, w[0], w[1]
                );
            }
        }
    }
}
