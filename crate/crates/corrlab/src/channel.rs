//! Binary symmetric channel simulation and capacity formulas.

use crate::bits::BitSequence;
use crate::error::{Error, Result};
use crate::info::binary_entropy;
use rand::Rng;

/// Independent flip pattern of rate p over n positions. One f64 draw
/// per bit, in position order, so the pattern is a pure function of the
/// rng stream.
pub fn sample_noise<R: Rng + ?Sized>(rng: &mut R, n: usize, p: f64) -> Result<BitSequence> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidProbability(p, "[0, 1]"));
    }
    let mut noise = BitSequence::zeros(n);
    for i in 0..n {
        if rng.random::<f64>() < p {
            noise.set(i, true);
        }
    }
    Ok(noise)
}

/// Passes a sequence through a BSC with crossover probability p.
pub fn apply_bsc<R: Rng + ?Sized>(
    seq: &BitSequence,
    p: f64,
    rng: &mut R,
) -> Result<BitSequence> {
    let noise = sample_noise(rng, seq.len(), p)?;
    Ok(seq.xor(&noise))
}

/// Aggregate crossover probability of two cascaded BSCs.
pub fn cascade(p1: f64, p2: f64) -> f64 {
    p1 + p2 - 2.0 * p1 * p2
}

/// Secrecy capacity of a BSC wiretap pair: (1 - H(p_main)) - (1 - H(p_wire)).
/// Positive exactly when the eavesdropper's channel is noisier.
pub fn secrecy_capacity(p_main: f64, p_wire: f64) -> f64 {
    binary_entropy(p_wire) - binary_entropy(p_main)
}
