//! Small numeric helpers shared by the attack modules.

/// Binomial pmf Pr[Bin(w, p) = h], evaluated in log space for
/// stability at moderate w.
pub fn binom_pmf(w: u32, p: f64, h: u32) -> f64 {
    debug_assert!(h <= w);
    debug_assert!((0.0..=1.0).contains(&p));
    if p == 0.0 {
        return if h == 0 { 1.0 } else { 0.0 };
    }
    if p == 1.0 {
        return if h == w { 1.0 } else { 0.0 };
    }
    // ln C(w, h) = sum_{i=1..h} ln((w - h + i) / i)
    let mut ln_choose = 0.0f64;
    for i in 1..=h.min(w - h) {
        ln_choose += ((w - h.min(w - h) + i) as f64 / i as f64).ln();
    }
    let ln_pmf = ln_choose + h as f64 * p.ln() + (w - h) as f64 * (1.0 - p).ln();
    ln_pmf.exp()
}

/// Pr[Bin(w, p) >= h].
pub fn binom_tail_at_least(w: u32, p: f64, h: u32) -> f64 {
    (h..=w).map(|i| binom_pmf(w, p, i)).sum()
}
