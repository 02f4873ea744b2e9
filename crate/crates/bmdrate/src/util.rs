//! Small numeric helpers.

use crate::scalar::Scalar;

/// Stable log-sum-exp over the finite terms of `it`; returns −∞ when every
/// term is −∞ (or the iterator is empty).
pub(crate) fn logsumexp<F: Scalar>(it: impl Iterator<Item = F> + Clone) -> F {
    let max = it.clone().fold(F::neg_infinity(), F::max);
    if !max.is_finite() {
        return F::neg_infinity();
    }
    let sum: F = it.map(|v| (v - max).exp()).sum();
    max + sum.ln()
}

/// Golden-section search for the maximum of a unimodal function on
/// `[lo, hi]`; returns `(argmax, max)` once the bracket is below `xtol`.
pub(crate) fn golden_max<F: Scalar>(
    mut f: impl FnMut(F) -> F,
    lo: F,
    hi: F,
    xtol: F,
) -> (F, F) {
    let phi = (F::of(5.0).sqrt() - F::one()) / F::of(2.0);
    let mut a = lo;
    let mut b = hi;
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while b - a > xtol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = f(d);
        }
    }
    let mid = (a + b) / F::of(2.0);
    let fmid = f(mid);
    if fc > fmid && fc > fd {
        (c, fc)
    } else if fd > fmid {
        (d, fd)
    } else {
        (mid, fmid)
    }
}

/// SplitMix64 step, used to derive independent per-cell seeds.
pub(crate) fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn logsumexp_matches_direct_sum() {
        let vals = [-1.0f64, -2.5, -0.3];
        let direct: f64 = vals.iter().map(|v| v.exp()).sum::<f64>().ln();
        assert!((logsumexp(vals.iter().copied()) - direct).abs() < 1e-14);
    }

    #[test]
    fn logsumexp_handles_extremes() {
        let vals = [-1000.0f64, -1001.0];
        let r = logsumexp(vals.iter().copied());
        assert!((r - (-1000.0 + (1.0 + (-1.0f64).exp()).ln())).abs() < 1e-12);
        assert_eq!(
            logsumexp([f64::NEG_INFINITY].iter().copied()),
            f64::NEG_INFINITY
        );
        assert_eq!(logsumexp(std::iter::empty::<f64>()), f64::NEG_INFINITY);
    }

    #[test]
    fn splitmix_is_deterministic() {
        assert_eq!(splitmix64(42), splitmix64(42));
        assert_ne!(splitmix64(1), splitmix64(2));
    }
}
