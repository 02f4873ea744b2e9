//! Rate functionals for matched and bit-metric decoding.
//!
//! Everything here is an expectation over the joint law of the input label
//! and the channel output, evaluated through a [`Channel`]'s output grid:
//! exact sums for finite-output channels, Gauss–Legendre quadrature for the
//! AWGN channel. Mixture logarithms are taken in the log domain; entropy
//! integrands are accumulated linearly because they vanish together with the
//! mixture when it underflows.

use crate::channel::{Channel, OutputPoint};
use crate::dist::{bit_level, BitMarginal, JointDistribution};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::util::logsumexp;

/// The bit-metric decoding rate `H(B) − Σ_i H(B_i|Y)`, before and after
/// clipping at zero. The raw value can be negative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BmdRate<F: Scalar = f64> {
    pub raw: F,
    pub clipped: F,
}

/// Result of maximizing the generalized mutual information over `s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SgmiRate<F: Scalar = f64> {
    pub s_star: F,
    pub rate: F,
}

/// Entropic quantities of one (channel, input) pair, gathered in a single
/// pass over the output grid. All values are in bits; output entropies of
/// continuous-output channels are differential.
pub(crate) struct ChannelStats<F: Scalar> {
    /// h(Y)
    pub h_y: F,
    /// h(Y|B)
    pub h_y_given_b: F,
    /// h(Y|B_i) for i = 1..m
    pub h_y_given_bit: Vec<F>,
    pub marginals: Vec<BitMarginal<F>>,
    pub entropy: F,
}

impl<F: Scalar> ChannelStats<F> {
    /// I(B;Y), clamped at zero against quadrature noise.
    pub fn mutual_information(&self) -> F {
        (self.h_y - self.h_y_given_b).max(F::zero())
    }

    /// I(B_i;Y) for the 0-based bit index.
    pub fn bit_mi(&self, idx: usize) -> F {
        self.h_y - self.h_y_given_bit[idx]
    }

    /// H(B_i|Y) for the 0-based bit index.
    pub fn bit_conditional_entropy(&self, idx: usize) -> F {
        self.marginals[idx].entropy() - self.bit_mi(idx)
    }

    /// Σ_i I(B_i;Y)
    pub fn bitwise_mi_sum(&self) -> F {
        (0..self.h_y_given_bit.len())
            .map(|i| self.bit_mi(i))
            .sum()
    }

    /// H(B) − Σ_i H(B_i|Y)
    pub fn bmd_raw(&self) -> F {
        self.entropy
            - (0..self.h_y_given_bit.len())
                .map(|i| self.bit_conditional_entropy(i))
                .sum::<F>()
    }
}

/// Gathers every entropic quantity used by the rate functionals in one pass
/// over the output grid.
pub(crate) fn channel_stats<F: Scalar, C: Channel<F>>(
    ch: &C,
    d: &JointDistribution<F>,
) -> ChannelStats<F> {
    let m = ch.bits();
    assert_eq!(d.m(), m, "distribution and channel dimension mismatch");
    let labels = ch.num_labels();
    let ln2 = F::LN_2();
    let marginals = d.marginals();

    let supp: Vec<usize> = d.support().collect();
    let ln_d: Vec<F> = (0..labels)
        .map(|b| {
            if d.prob(b) >= F::support_eps() {
                d.prob(b).ln()
            } else {
                F::neg_infinity()
            }
        })
        .collect();

    let mut h_y = F::zero();
    let mut h_y_given_b = F::zero();
    let mut bit_acc = vec![[F::zero(); 2]; m];

    let mut ll = vec![F::zero(); labels];
    let mut shifted = vec![F::zero(); labels];

    for k in 0..ch.num_outputs() {
        let w = ch.output_weight(k);
        for (b, slot) in ll.iter_mut().enumerate() {
            *slot = ch.log_likelihood(k, b);
        }

        // shift all joint terms ln d_b + ll_b by their common maximum; the
        // subset sums below reuse the shifted exponentials
        let mut shift = F::neg_infinity();
        for &b in &supp {
            shift = shift.max(ln_d[b] + ll[b]);
        }
        if !shift.is_finite() {
            continue;
        }
        let eshift = shift.exp();
        if eshift <= F::zero() {
            // the whole node sits more than ~700 nats below the densest
            // point; every integrand here carries the same factor
            continue;
        }
        let mut total = F::zero();
        for &b in &supp {
            let e = (ln_d[b] + ll[b] - shift).exp();
            shifted[b] = e;
            total += e;

            // h(Y|B): the log of the integrand is the likelihood itself,
            // and P(b)·p(y|b) = e^shift · shifted
            if ll[b].is_finite() {
                h_y_given_b -= w * eshift * e * ll[b];
            }
        }

        // h(Y)
        let lp = shift + total.ln();
        let p = eshift * total;
        if p > F::zero() {
            h_y -= w * p * lp;
        }

        // h(Y|B_i = bv) over the same shifted exponentials
        for i in 0..m {
            let mut sums = [F::zero(); 2];
            for &b in &supp {
                sums[bit_level(b, i + 1, m)] += shifted[b];
            }
            for bv in 0..2 {
                let marg = marginals[i].prob(bv);
                if marg < F::support_eps() || sums[bv] <= F::zero() {
                    continue;
                }
                // ln p(y|B_i=bv) = shift + ln Σ − ln P(B_i=bv)
                let lcond = shift + sums[bv].ln() - marg.ln();
                let weighted = eshift * sums[bv]; // P(bv)·p(y|bv)
                if weighted > F::zero() {
                    bit_acc[i][bv] += w * weighted * lcond;
                }
            }
        }
    }

    let h_y_given_bit = bit_acc
        .iter()
        .map(|acc| -(acc[0] + acc[1]) / ln2)
        .collect();

    ChannelStats {
        h_y: h_y / ln2,
        h_y_given_b: h_y_given_b / ln2,
        h_y_given_bit,
        marginals,
        entropy: d.entropy(),
    }
}

/// Mutual information I(B;Y) in bits: `h(Y) − h(Y|B)` for the AWGN channel,
/// `H(Y) − H(Y|B)` for a discrete channel.
pub fn mutual_information<F: Scalar, C: Channel<F>>(ch: &C, d: &JointDistribution<F>) -> F {
    channel_stats(ch, d).mutual_information()
}

/// Output entropy h(Y) (differential for continuous outputs) in bits.
pub fn output_entropy<F: Scalar, C: Channel<F>>(ch: &C, d: &JointDistribution<F>) -> F {
    channel_stats(ch, d).h_y
}

/// Conditional entropy of one bit-level given the output, `H(B_i|Y)`,
/// computed as `H(B_i) − [h(Y) − h(Y|B_i)]`. `i` is 1-based.
pub fn bit_conditional_entropy<F: Scalar, C: Channel<F>>(
    ch: &C,
    d: &JointDistribution<F>,
    i: usize,
) -> Result<F> {
    if i < 1 || i > ch.bits() {
        return Err(Error::BitIndexOutOfRange {
            index: i,
            m: ch.bits(),
        });
    }
    Ok(channel_stats(ch, d).bit_conditional_entropy(i - 1))
}

/// Per-level mutual informations `I(B_i;Y)` for i = 1..m.
pub fn per_bit_mutual_information<F: Scalar, C: Channel<F>>(
    ch: &C,
    d: &JointDistribution<F>,
) -> Vec<F> {
    let stats = channel_stats(ch, d);
    (0..ch.bits()).map(|i| stats.bit_mi(i)).collect()
}

/// Σ_i I(B_i;Y), the bit-metric decoding rate of a product input.
pub fn bitwise_mi_sum<F: Scalar, C: Channel<F>>(ch: &C, d: &JointDistribution<F>) -> F {
    channel_stats(ch, d).bitwise_mi_sum()
}

/// The bit-metric decoding rate `H(B) − Σ_i H(B_i|Y)`, raw and clipped.
pub fn rate_bmd<F: Scalar, C: Channel<F>>(ch: &C, d: &JointDistribution<F>) -> BmdRate<F> {
    let raw = channel_stats(ch, d).bmd_raw();
    BmdRate {
        raw,
        clipped: raw.max(F::zero()),
    }
}

/// Σ_i I(B_i;Y) for a product input distribution; rejects inputs that are
/// not the product of their marginals.
pub fn rate_bmd_independent<F: Scalar, C: Channel<F>>(
    ch: &C,
    d: &JointDistribution<F>,
) -> Result<F> {
    let tol = F::of(1e-10).max(F::epsilon() * F::of(100.0));
    let dev = d.product_deviation();
    if dev > tol {
        return Err(Error::NotProductDistribution {
            max_dev: dev.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(bitwise_mi_sum(ch, d))
}

/// Decoding metric `q(y, b)`, served in the natural-log domain.
pub trait Metric<F: Scalar>: Sync {
    /// `ln q(y, b)`; −∞ where the metric vanishes.
    fn log_value(&self, y: &OutputPoint<F>, label: usize) -> F;

    /// Fills `ln q(y, ·)` for every label.
    fn log_row(&self, y: &OutputPoint<F>, out: &mut [F]) {
        for (label, slot) in out.iter_mut().enumerate() {
            *slot = self.log_value(y, label);
        }
    }
}

/// The matched metric `q = p_{Y|B}`.
pub struct MatchedMetric<'a, C> {
    ch: &'a C,
}

impl<'a, C> MatchedMetric<'a, C> {
    pub fn new(ch: &'a C) -> Self {
        Self { ch }
    }
}

impl<F: Scalar, C: Channel<F>> Metric<F> for MatchedMetric<'_, C> {
    fn log_value(&self, y: &OutputPoint<F>, label: usize) -> F {
        self.ch.log_likelihood_at(y, label)
    }
}

/// The bit-metric `q(y, b) = Π_i p_{Y|B_i}(y | b_i)`: the product of the
/// bit-conditional output laws induced by the input distribution. Labels
/// containing a zero-probability bit value get metric 0.
pub struct BmdMetric<'a, F: Scalar, C> {
    ch: &'a C,
    d: &'a JointDistribution<F>,
    marginals: Vec<BitMarginal<F>>,
}

/// Builds the bit-metric for a (channel, input) pair.
pub fn q_bmd<'a, F: Scalar, C: Channel<F>>(
    ch: &'a C,
    d: &'a JointDistribution<F>,
) -> BmdMetric<'a, F, C> {
    assert_eq!(d.m(), ch.bits(), "distribution and channel dimension mismatch");
    BmdMetric {
        ch,
        d,
        marginals: d.marginals(),
    }
}

impl<F: Scalar, C: Channel<F>> BmdMetric<'_, F, C> {
    /// `ln p(y | B_i = bv)` for each bit-level and value, from the label
    /// log-likelihood row at y; −∞ where the bit marginal is zero.
    fn log_bit_conditionals(&self, ll: &[F]) -> Vec<[F; 2]> {
        let m = self.ch.bits();
        (0..m)
            .map(|i| {
                let mut out = [F::neg_infinity(); 2];
                for (bv, slot) in out.iter_mut().enumerate() {
                    let marg = self.marginals[i].prob(bv);
                    if marg < F::support_eps() {
                        continue;
                    }
                    let lse = logsumexp(
                        (0..self.ch.num_labels())
                            .filter(|&a| {
                                bit_level(a, i + 1, m) == bv
                                    && self.d.prob(a) >= F::support_eps()
                            })
                            .map(|a| self.d.prob(a).ln() + ll[a]),
                    );
                    *slot = lse - marg.ln();
                }
                out
            })
            .collect()
    }
}

impl<F: Scalar, C: Channel<F>> Metric<F> for BmdMetric<'_, F, C> {
    fn log_value(&self, y: &OutputPoint<F>, label: usize) -> F {
        let mut row = vec![F::zero(); self.ch.num_labels()];
        self.log_row(y, &mut row);
        row[label]
    }

    fn log_row(&self, y: &OutputPoint<F>, out: &mut [F]) {
        let m = self.ch.bits();
        let ll: Vec<F> = (0..self.ch.num_labels())
            .map(|a| self.ch.log_likelihood_at(y, a))
            .collect();
        let lcond = self.log_bit_conditionals(&ll);
        for (label, slot) in out.iter_mut().enumerate() {
            let mut acc = F::zero();
            for (i, cond) in lcond.iter().enumerate() {
                acc += cond[bit_level(label, i + 1, m)];
            }
            *slot = acc;
        }
    }
}

/// Cached per-grid tables for the generalized rate expression, so that a
/// search over `s` does not re-evaluate the metric.
struct RateTables<F: Scalar> {
    supp: Vec<usize>,
    ln_d: Vec<F>,
    ln_r: Vec<F>,
    /// ln q, row-major [output][label]
    log_q: Vec<F>,
    /// ln p(y|b), row-major [output][label]
    log_p: Vec<F>,
    weights: Vec<F>,
    labels: usize,
}

/// `s·ln q` under the convention `q^0 ≡ 1`.
#[inline]
fn scaled_log<F: Scalar>(s: F, lq: F) -> F {
    if s.is_zero() {
        F::zero()
    } else if lq.is_finite() {
        s * lq
    } else {
        F::neg_infinity()
    }
}

impl<F: Scalar> RateTables<F> {
    fn build<C: Channel<F>, Q: Metric<F>>(
        ch: &C,
        d: &JointDistribution<F>,
        q: &Q,
        r: &[F],
    ) -> Self {
        let labels = ch.num_labels();
        let outputs = ch.num_outputs();
        let supp: Vec<usize> = d.support().collect();
        let ln_d: Vec<F> = (0..labels)
            .map(|b| {
                if d.prob(b) >= F::support_eps() {
                    d.prob(b).ln()
                } else {
                    F::neg_infinity()
                }
            })
            .collect();
        let ln_r: Vec<F> = (0..labels)
            .map(|b| {
                if d.prob(b) >= F::support_eps() {
                    r[b].ln()
                } else {
                    F::zero()
                }
            })
            .collect();
        let mut log_q = vec![F::zero(); outputs * labels];
        let mut log_p = vec![F::zero(); outputs * labels];
        for k in 0..outputs {
            let y = ch.output_point(k);
            q.log_row(&y, &mut log_q[k * labels..(k + 1) * labels]);
            for b in 0..labels {
                log_p[k * labels + b] = ch.log_likelihood(k, b);
            }
        }
        let weights = (0..outputs).map(|k| ch.output_weight(k)).collect();
        Self {
            supp,
            ln_d,
            ln_r,
            log_q,
            log_p,
            weights,
            labels,
        }
    }

    /// `E[log2 (q(Y,B)^s r(B) / Σ_{b∈supp} P(b) q(Y,b)^s r(b))]` with the
    /// denominator restricted to the support of the input distribution.
    fn rate(&self, s: F, d: &JointDistribution<F>) -> F {
        let mut acc = F::zero();
        for (k, &w) in self.weights.iter().enumerate() {
            let lq = &self.log_q[k * self.labels..(k + 1) * self.labels];
            let lp = &self.log_p[k * self.labels..(k + 1) * self.labels];
            let den = logsumexp(
                self.supp
                    .iter()
                    .map(|&b| self.ln_d[b] + scaled_log(s, lq[b]) + self.ln_r[b]),
            );
            for &b in &self.supp {
                if !lp[b].is_finite() {
                    continue;
                }
                let weight = w * d.prob(b) * lp[b].exp();
                if weight <= F::zero() {
                    continue;
                }
                let num = scaled_log(s, lq[b]) + self.ln_r[b];
                acc += weight * (num - den);
            }
        }
        acc / F::LN_2()
    }
}

/// The generalized rate expression `R(P_B, q, s, r)` in bits: the expected
/// log-ratio of the scaled metric against its support-restricted average.
/// `r` is indexed by label; entries outside the support are ignored.
pub fn rate_generic<F: Scalar, C: Channel<F>, Q: Metric<F>>(
    ch: &C,
    d: &JointDistribution<F>,
    q: &Q,
    s: F,
    r: &[F],
) -> Result<F> {
    if s < F::zero() {
        return Err(Error::NegativeMetricExponent {
            s: s.to_f64().unwrap_or(f64::NAN),
        });
    }
    assert_eq!(d.m(), ch.bits(), "distribution and channel dimension mismatch");
    assert_eq!(r.len(), ch.num_labels(), "label function has wrong length");
    for b in d.support() {
        assert!(r[b] > F::zero(), "r must be positive on the support");
    }
    let tables = RateTables::build(ch, d, q, r);
    Ok(tables.rate(s, d))
}

/// The reweighting `r(b) = Π_i P_{B_i}(b_i) / P_B(b)` on the support.
fn r_bmd<F: Scalar>(d: &JointDistribution<F>) -> Vec<F> {
    let m = d.m();
    let marginals = d.marginals();
    (0..d.num_labels())
        .map(|b| {
            if d.prob(b) < F::support_eps() {
                F::one()
            } else {
                let prod = (0..m)
                    .map(|i| marginals[i].prob(bit_level(b, i + 1, m)))
                    .fold(F::one(), |acc, p| acc * p);
                prod / d.prob(b)
            }
        })
        .collect()
}

/// The achievable-rate instance `R(P_B, q_BMD, 1, r_BMD)`. Equals the raw
/// bit-metric decoding rate whenever the input distribution is strictly
/// positive, and upper-bounds it otherwise.
pub fn rate_lm_instance<F: Scalar, C: Channel<F>>(ch: &C, d: &JointDistribution<F>) -> F {
    let q = q_bmd(ch, d);
    let r = r_bmd(d);
    rate_generic(ch, d, &q, F::one(), &r).expect("s = 1 is valid")
}

/// Generalized mutual information for the bit-metric: maximizes
/// `R(P_B, q_BMD, s, 1)` over `s ≥ 0` by golden-section search on `[0, 4]`,
/// widening the interval when the maximizer lands on its upper edge. The
/// returned rate is clipped at zero.
pub fn rate_sgmi<F: Scalar, C: Channel<F>>(ch: &C, d: &JointDistribution<F>) -> SgmiRate<F> {
    let q = q_bmd(ch, d);
    let ones = vec![F::one(); ch.num_labels()];
    let tables = RateTables::build(ch, d, &q, &ones);
    let mut hi = F::of(4.0);
    let stol = F::of(1e-6);
    loop {
        let (s_star, rate) =
            crate::util::golden_max(|s| tables.rate(s, d), F::zero(), hi, stol);
        if s_star < hi - F::of(1e-3) || hi > F::of(512.0) {
            return SgmiRate {
                s_star,
                rate: rate.max(F::zero()),
            };
        }
        hi *= F::of(2.0);
    }
}

/// All rate functionals evaluated at one operating point.
#[derive(Debug, Clone)]
pub struct RateReport<F: Scalar = f64> {
    /// Operating SNR in dB; `None` for discrete channels.
    pub snr_db: Option<F>,
    /// Constellation scaling; `None` for discrete channels.
    pub delta: Option<F>,
    pub distribution: JointDistribution<F>,
    /// I(B;Y)
    pub capacity_mi: F,
    /// H(B) − Σ H(B_i|Y), unclipped
    pub bmd_raw: F,
    /// max(0, bmd_raw)
    pub bmd: F,
    pub sgmi: F,
    pub sgmi_s: F,
    pub lm_instance: F,
    pub per_bit_mi: Vec<F>,
    pub bitwise_mi_sum: F,
}

/// Evaluates every rate functional of this module at one operating point.
pub fn rate_report<F: Scalar, C: Channel<F>>(
    ch: &C,
    d: &JointDistribution<F>,
    snr_db: Option<F>,
    delta: Option<F>,
) -> RateReport<F> {
    let stats = channel_stats(ch, d);
    let raw = stats.bmd_raw();
    let sgmi = rate_sgmi(ch, d);
    RateReport {
        snr_db,
        delta,
        distribution: d.clone(),
        capacity_mi: stats.mutual_information(),
        bmd_raw: raw,
        bmd: raw.max(F::zero()),
        sgmi: sgmi.rate,
        sgmi_s: sgmi.s_star,
        lm_instance: rate_lm_instance(ch, d),
        per_bit_mi: (0..ch.bits()).map(|i| stats.bit_mi(i)).collect(),
        bitwise_mi_sum: stats.bitwise_mi_sum(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{AwgnChannel, DiscreteChannel};
    use crate::constellation::Constellation;
    use crate::dist::maxwell_boltzmann;

    fn dependent_pair() -> JointDistribution<f64> {
        JointDistribution::new(2, vec![0.0, 0.5, 0.5, 0.0]).unwrap()
    }

    fn awgn(m: usize, delta: f64) -> AwgnChannel<f64> {
        AwgnChannel::new(Constellation::ask_brgc(m, delta).unwrap())
    }

    #[test]
    fn mi_identity_channel_dependent_input() {
        let ch = DiscreteChannel::<f64>::identity_2bit();
        assert!((mutual_information(&ch, &dependent_pair()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mi_erase_all_is_zero() {
        let ch = DiscreteChannel::<f64>::erase_all_2bit();
        assert_eq!(mutual_information(&ch, &dependent_pair()), 0.0);
        assert_eq!(mutual_information(&ch, &JointDistribution::uniform(2)), 0.0);
    }

    #[test]
    fn mi_bpsk_zero_snr_limit() {
        let ch = awgn(1, 1e-8);
        let mi = mutual_information(&ch, &JointDistribution::uniform(1));
        assert!(mi.abs() < 1e-12);
    }

    // reference values computed with an independent quadrature implementation
    #[test]
    fn mi_frozen_awgn_values() {
        let u1 = JointDistribution::uniform(1);
        assert!((mutual_information(&awgn(1, 1.0), &u1) - 0.485944154133).abs() < 1e-9);
        assert!((mutual_information(&awgn(1, 2.0), &u1) - 0.912822285774).abs() < 1e-9);
        let u2 = JointDistribution::uniform(2);
        assert!((mutual_information(&awgn(2, 1.0), &u2) - 1.219413104132).abs() < 1e-9);
    }

    #[test]
    fn bit_conditional_entropy_builtin_channels() {
        let erase = DiscreteChannel::<f64>::erase_all_2bit();
        let h = bit_conditional_entropy(&erase, &dependent_pair(), 1).unwrap();
        assert!((h - 1.0).abs() < 1e-12);

        let ident = DiscreteChannel::<f64>::identity_2bit();
        let h = bit_conditional_entropy(&ident, &dependent_pair(), 1).unwrap();
        assert!(h.abs() < 1e-12);

        // high-SNR BPSK: the output reveals the bit
        let ch = awgn(1, 8.0);
        let h = bit_conditional_entropy(&ch, &JointDistribution::uniform(1), 1).unwrap();
        assert!(h.abs() < 1e-6);
    }

    #[test]
    fn bit_conditional_entropy_frozen_values() {
        let ch = awgn(2, 1.0);
        let d = JointDistribution::uniform(2);
        let h1 = bit_conditional_entropy(&ch, &d, 1).unwrap();
        let h2 = bit_conditional_entropy(&ch, &d, 2).unwrap();
        assert!((h1 - 0.266531050001076).abs() < 1e-9);
        assert!((h2 - 0.520782327772639).abs() < 1e-9);
    }

    #[test]
    fn bit_conditional_entropy_bad_index() {
        let ch = DiscreteChannel::<f64>::identity_2bit();
        assert!(bit_conditional_entropy(&ch, &dependent_pair(), 0).is_err());
        assert!(bit_conditional_entropy(&ch, &dependent_pair(), 3).is_err());
    }

    #[test]
    fn rate_bmd_builtin_channel_examples() {
        let ident = DiscreteChannel::<f64>::identity_2bit();
        let r = rate_bmd(&ident, &dependent_pair());
        assert!((r.raw - 1.0).abs() < 1e-12);
        assert!((r.clipped - 1.0).abs() < 1e-12);

        // independent point masses achieve nothing on the identity channel
        let pm = JointDistribution::<f64>::point_mass(2, 0b01);
        let r = rate_bmd(&ident, &pm);
        assert!(r.raw.abs() < 1e-12);

        let erase = DiscreteChannel::<f64>::erase_all_2bit();
        let r = rate_bmd(&erase, &dependent_pair());
        assert!((r.raw + 1.0).abs() < 1e-12);
        assert_eq!(r.clipped, 0.0);
    }

    #[test]
    fn rate_bmd_frozen_awgn_values() {
        let ch = awgn(2, 1.0);
        let r = rate_bmd(&ch, &JointDistribution::uniform(2));
        assert!((r.raw - 1.212686622226).abs() < 1e-9);

        let pts: Vec<f64> = Constellation::<f64>::ask_brgc(3, 1.0)
            .unwrap()
            .points()
            .to_vec();
        let d = maxwell_boltzmann(&pts, 0.05);
        let ch = awgn(3, 0.8);
        let r = rate_bmd(&ch, &d);
        assert!((r.raw - 1.359745201514).abs() < 1e-9);
        assert!((mutual_information(&ch, &d) - 1.389598567481).abs() < 1e-9);
    }

    #[test]
    fn rate_bmd_independent_consistency() {
        let ch = awgn(1, 1.3);
        let u1 = JointDistribution::uniform(1);
        let sum = rate_bmd_independent(&ch, &u1).unwrap();
        assert!((sum - mutual_information(&ch, &u1)).abs() < 1e-12);

        // product input: sum of bit MIs equals the raw BMD rate
        let d = JointDistribution::product(&[
            BitMarginal { p0: 0.3, p1: 0.7 },
            BitMarginal { p0: 0.55, p1: 0.45 },
        ]);
        let ch = awgn(2, 0.9);
        let sum = rate_bmd_independent(&ch, &d).unwrap();
        let raw = rate_bmd(&ch, &d).raw;
        assert!((sum - raw).abs() < 1e-9);

        // any product input on the erase-all channel gives zero
        let erase = DiscreteChannel::<f64>::erase_all_2bit();
        let sum = rate_bmd_independent(&erase, &JointDistribution::uniform(2)).unwrap();
        assert!(sum.abs() < 1e-12);
    }

    #[test]
    fn rate_bmd_independent_matches_raw_on_32_ask() {
        // uniform 32-ASK near the SNR where the sum reaches 3.8 bits
        let power = 10f64.powf(2.432);
        let delta = (power / 341.0).sqrt();
        let ch = awgn(5, delta);
        let d = JointDistribution::uniform(5);
        let sum = rate_bmd_independent(&ch, &d).unwrap();
        let raw = rate_bmd(&ch, &d).raw;
        assert!((sum - raw).abs() < 1e-9);
        assert!((sum - 3.8).abs() < 0.05);
    }

    #[test]
    fn rate_bmd_independent_rejects_dependent_input() {
        let ch = DiscreteChannel::<f64>::identity_2bit();
        assert!(matches!(
            rate_bmd_independent(&ch, &dependent_pair()),
            Err(Error::NotProductDistribution { .. })
        ));
    }

    #[test]
    fn rate_generic_matched_recovers_mi() {
        let ch = awgn(2, 1.1);
        let d = JointDistribution::new(2, vec![0.4, 0.1, 0.2, 0.3]).unwrap();
        let q = MatchedMetric::new(&ch);
        let ones = vec![1.0; 4];
        let r = rate_generic(&ch, &d, &q, 1.0, &ones).unwrap();
        assert!((r - mutual_information(&ch, &d)).abs() < 1e-9);

        let dmc = DiscreteChannel::new(
            2,
            3,
            vec![
                0.7, 0.2, 0.1, //
                0.1, 0.8, 0.1, //
                0.25, 0.25, 0.5, //
                0.3, 0.3, 0.4,
            ],
        )
        .unwrap();
        let q = MatchedMetric::new(&dmc);
        let r = rate_generic(&dmc, &d, &q, 1.0, &ones).unwrap();
        assert!((r - mutual_information(&dmc, &d)).abs() < 1e-12);
    }

    #[test]
    fn rate_generic_s_zero_is_zero() {
        let ch = awgn(2, 1.0);
        let d = JointDistribution::uniform(2);
        let q = q_bmd(&ch, &d);
        let ones = vec![1.0; 4];
        let r = rate_generic(&ch, &d, &q, 0.0, &ones).unwrap();
        assert!(r.abs() < 1e-13);
    }

    #[test]
    fn rate_generic_rejects_negative_s() {
        let ch = awgn(1, 1.0);
        let d = JointDistribution::uniform(1);
        let q = MatchedMetric::new(&ch);
        assert!(matches!(
            rate_generic(&ch, &d, &q, -0.5, &[1.0, 1.0]),
            Err(Error::NegativeMetricExponent { .. })
        ));
    }

    #[test]
    fn q_bmd_m1_is_matched() {
        let ch = awgn(1, 1.4);
        let d = JointDistribution::uniform(1);
        let q = q_bmd(&ch, &d);
        for &y in &[-2.0, 0.1, 3.0] {
            let y = OutputPoint::Continuous(y);
            for b in 0..2 {
                assert!((q.log_value(&y, b) - ch.log_likelihood_at(&y, b)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn q_bmd_four_ask_hand_enumeration() {
        // uniform 4-ASK at y = 0: q(0, b) is the product of the two
        // bit-conditional mixtures
        let ch = awgn(2, 1.0);
        let d = JointDistribution::uniform(2);
        let q = q_bmd(&ch, &d);
        let pdf = |y: f64, x: f64| {
            (-0.5 * (y - x) * (y - x)).exp() / (2.0 * std::f64::consts::PI).sqrt()
        };
        let y = 0.0;
        for label in 0..4 {
            // B1 = 0 -> {-3, -1}; B1 = 1 -> {1, 3}; B2 = 0 -> {-3, 3}; B2 = 1 -> {-1, 1}
            let m1 = if bit_level(label, 1, 2) == 0 {
                0.5 * (pdf(y, -3.0) + pdf(y, -1.0))
            } else {
                0.5 * (pdf(y, 1.0) + pdf(y, 3.0))
            };
            let m2 = if bit_level(label, 2, 2) == 0 {
                0.5 * (pdf(y, -3.0) + pdf(y, 3.0))
            } else {
                0.5 * (pdf(y, -1.0) + pdf(y, 1.0))
            };
            let got = q.log_value(&OutputPoint::Continuous(y), label).exp();
            assert!((got - m1 * m2).abs() < 1e-12);
        }
    }

    #[test]
    fn q_bmd_erase_all_support() {
        let ch = DiscreteChannel::<f64>::erase_all_2bit();
        let d = dependent_pair();
        let q = q_bmd(&ch, &d);
        let y = OutputPoint::Discrete(0);
        for &b in &[0b01, 0b10] {
            assert!((q.log_value(&y, b).exp() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn lm_instance_strictly_positive_equals_raw() {
        let d = JointDistribution::new(2, vec![0.15, 0.35, 0.3, 0.2]).unwrap();
        let ch = awgn(2, 0.8);
        let raw = rate_bmd(&ch, &d).raw;
        assert!((rate_lm_instance(&ch, &d) - raw).abs() < 1e-9);

        let dmc = DiscreteChannel::new(
            2,
            2,
            vec![0.9, 0.1, 0.6, 0.4, 0.3, 0.7, 0.2, 0.8],
        )
        .unwrap();
        let raw = rate_bmd(&dmc, &d).raw;
        assert!((rate_lm_instance(&dmc, &d) - raw).abs() < 1e-9);
    }

    #[test]
    fn lm_instance_dominates_raw_without_full_support() {
        let ident = DiscreteChannel::<f64>::identity_2bit();
        let d = dependent_pair();
        let lm = rate_lm_instance(&ident, &d);
        let raw = rate_bmd(&ident, &d).raw;
        assert!(lm >= raw - 1e-12);
        assert!((lm - 1.0).abs() < 1e-9);

        let erase = DiscreteChannel::<f64>::erase_all_2bit();
        let lm = rate_lm_instance(&erase, &d);
        assert!(lm.abs() < 1e-12);
        assert!(lm > rate_bmd(&erase, &d).raw);
    }

    #[test]
    fn lm_instance_m1_uniform_is_mi() {
        let ch = awgn(1, 1.7);
        let d = JointDistribution::uniform(1);
        assert!((rate_lm_instance(&ch, &d) - mutual_information(&ch, &d)).abs() < 1e-9);
    }

    #[test]
    fn sgmi_product_input_hits_s_one() {
        let ch = awgn(2, 1.0);
        let d = JointDistribution::uniform(2);
        let sg = rate_sgmi(&ch, &d);
        assert!((sg.s_star - 1.0).abs() < 1e-4);
        let sum = bitwise_mi_sum(&ch, &d);
        assert!((sg.rate - sum).abs() < 1e-6);
    }

    #[test]
    fn sgmi_erase_all_is_zero() {
        let ch = DiscreteChannel::<f64>::erase_all_2bit();
        let sg = rate_sgmi(&ch, &dependent_pair());
        assert_eq!(sg.rate, 0.0);
    }

    #[test]
    fn sgmi_frozen_value() {
        let pts: Vec<f64> = Constellation::<f64>::ask_brgc(3, 1.0)
            .unwrap()
            .points()
            .to_vec();
        let d = maxwell_boltzmann(&pts, 0.05);
        let ch = awgn(3, 0.8);
        let sg = rate_sgmi(&ch, &d);
        assert!((sg.rate - 1.329514965404).abs() < 1e-6);
        assert!((sg.s_star - 0.912).abs() < 5e-3);
        // GMI never exceeds the achievable-rate instance for positive inputs
        assert!(sg.rate <= rate_lm_instance(&ch, &d).max(0.0) + 1e-6);
    }

    #[test]
    fn quadrature_refinement_is_converged() {
        let c = Constellation::<f64>::ask_brgc(2, 1.0).unwrap();
        let d = JointDistribution::uniform(2);
        let coarse = mutual_information(&AwgnChannel::with_nodes_per_unit(c.clone(), 16), &d);
        let fine = mutual_information(&AwgnChannel::with_nodes_per_unit(c, 32), &d);
        assert!((coarse - fine).abs() < 1e-7);
    }

    #[test]
    fn output_entropy_high_snr_bpsk() {
        // well-separated BPSK: h(Y) = h(N(0,1)) + 1 bit
        let ch = awgn(1, 6.0);
        let h = output_entropy(&ch, &JointDistribution::uniform(1));
        let gauss = 0.5 * (2.0 * std::f64::consts::PI * std::f64::consts::E).log2();
        assert!((h - (gauss + 1.0)).abs() < 1e-6);
    }

    #[test]
    fn rate_report_is_consistent() {
        let ch = awgn(2, 1.2);
        let d = JointDistribution::new(2, vec![0.2, 0.3, 0.3, 0.2]).unwrap();
        let report = rate_report(&ch, &d, Some(10.0), Some(1.2));
        assert_eq!(report.bmd, report.bmd_raw.max(0.0));
        assert!(report.capacity_mi >= report.bmd_raw - 1e-9);
        let sum: f64 = report.per_bit_mi.iter().sum();
        assert!((sum - report.bitwise_mi_sum).abs() < 1e-12);
        assert!((report.lm_instance - report.bmd_raw).abs() < 1e-9);
    }

    #[test]
    fn f32_rates_are_sane() {
        let c = Constellation::<f32>::ask_brgc(1, 1.0).unwrap();
        let ch = AwgnChannel::new(c);
        let d = JointDistribution::<f32>::uniform(1);
        let mi = mutual_information(&ch, &d);
        assert!((mi - 0.4859).abs() < 1e-3);
    }
}
