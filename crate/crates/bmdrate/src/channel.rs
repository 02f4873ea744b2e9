//! Channel models: AWGN with a scaled ASK input and generic finite-output
//! discrete memoryless channels.
//!
//! Rate functionals consume channels through the [`Channel`] trait, which
//! exposes a weighted evaluation grid over the output alphabet: quadrature
//! nodes for the AWGN density, the output symbols themselves (weight 1) for
//! a discrete channel. Likelihoods are served in the natural-log domain;
//! densities are combined linearly where an underflowing mixture also kills
//! the integrand, and by log-sum-exp inside the rate functionals where it
//! does not.

use crate::constellation::Constellation;
use crate::dist::{bit_level, JointDistribution};
use crate::error::{Error, Result};
use crate::quad::{make_quadrature, QuadratureRule, DEFAULT_NODES_PER_UNIT};
use crate::scalar::Scalar;
use crate::util::logsumexp;

/// A point of the output alphabet: a real observation for continuous-output
/// channels, a symbol index for finite-output channels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OutputPoint<F: Scalar = f64> {
    Continuous(F),
    Discrete(usize),
}

/// Memoryless channel with `{0,1}^m` input labels, seen through a weighted
/// evaluation grid over its output alphabet.
pub trait Channel<F: Scalar>: Sync {
    /// Bits per input label.
    fn bits(&self) -> usize;

    /// Number of input labels `2^m`.
    fn num_labels(&self) -> usize {
        1 << self.bits()
    }

    /// Size of the output evaluation grid.
    fn num_outputs(&self) -> usize;

    /// Integration weight of grid point `k` (1 for discrete outputs).
    fn output_weight(&self, k: usize) -> F;

    /// The output value at grid point `k`.
    fn output_point(&self, k: usize) -> OutputPoint<F>;

    /// Natural log of `p(y | label)` at an arbitrary output point; −∞ where
    /// the transition probability vanishes.
    fn log_likelihood_at(&self, y: &OutputPoint<F>, label: usize) -> F;

    /// Natural log of `p(y_k | label)` at grid point `k`.
    fn log_likelihood(&self, k: usize, label: usize) -> F {
        self.log_likelihood_at(&self.output_point(k), label)
    }
}

/// AWGN channel `Y = Δ·x_B + Z` with unit-variance Gaussian noise.
///
/// The noise variance is fixed at one; the operating point is carried
/// entirely by the constellation scaling Δ, so `SNR = 10·log10 E[(Δ·x_B)²]`.
#[derive(Debug, Clone)]
pub struct AwgnChannel<F: Scalar = f64> {
    constellation: Constellation<F>,
    quad: QuadratureRule<F>,
}

impl<F: Scalar> AwgnChannel<F> {
    /// Channel with the default quadrature density.
    pub fn new(constellation: Constellation<F>) -> Self {
        Self::with_nodes_per_unit(constellation, DEFAULT_NODES_PER_UNIT)
    }

    /// Channel with an explicit quadrature density (nodes per unit length).
    pub fn with_nodes_per_unit(constellation: Constellation<F>, nodes_per_unit: usize) -> Self {
        let quad = make_quadrature(&constellation, nodes_per_unit);
        Self {
            constellation,
            quad,
        }
    }

    #[inline]
    pub fn constellation(&self) -> &Constellation<F> {
        &self.constellation
    }

    #[inline]
    pub fn quadrature(&self) -> &QuadratureRule<F> {
        &self.quad
    }

    /// Conditional density `p(y | label)`, a unit-variance Gaussian centered
    /// on the labeled point.
    pub fn conditional_density(&self, y: F, label: usize) -> F {
        self.log_conditional_density(y, label).exp()
    }

    /// Natural log of the conditional density.
    pub fn log_conditional_density(&self, y: F, label: usize) -> F {
        let d = y - self.constellation.point(label);
        F::of(-0.5) * d * d - F::of(0.5) * (F::of(2.0) * F::PI()).ln()
    }
}

impl<F: Scalar> Channel<F> for AwgnChannel<F> {
    fn bits(&self) -> usize {
        self.constellation.m()
    }

    fn num_outputs(&self) -> usize {
        self.quad.len()
    }

    fn output_weight(&self, k: usize) -> F {
        self.quad.weights()[k]
    }

    fn output_point(&self, k: usize) -> OutputPoint<F> {
        OutputPoint::Continuous(self.quad.nodes()[k])
    }

    fn log_likelihood_at(&self, y: &OutputPoint<F>, label: usize) -> F {
        match *y {
            OutputPoint::Continuous(y) => self.log_conditional_density(y, label),
            OutputPoint::Discrete(_) => panic!("AWGN channel has a continuous output"),
        }
    }

    fn log_likelihood(&self, k: usize, label: usize) -> F {
        self.log_conditional_density(self.quad.nodes()[k], label)
    }
}

/// Finite-output discrete memoryless channel given by its transition matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteChannel<F: Scalar = f64> {
    m: usize,
    num_outputs: usize,
    /// Row-major `P(y | label)`, rows indexed by label.
    transition: Vec<F>,
}

impl<F: Scalar> DiscreteChannel<F> {
    /// Builds a channel from row-major transition probabilities
    /// (`2^m` rows of `num_outputs` entries, each row summing to 1).
    pub fn new(m: usize, num_outputs: usize, transition: Vec<F>) -> Result<Self> {
        let labels = 1usize << m;
        if transition.len() != labels * num_outputs {
            return Err(Error::WrongLength {
                expected: labels * num_outputs,
                got: transition.len(),
            });
        }
        for label in 0..labels {
            let row = &transition[label * num_outputs..(label + 1) * num_outputs];
            for (output, &p) in row.iter().enumerate() {
                if p < F::zero() || !p.is_finite() {
                    return Err(Error::NegativeTransition {
                        label,
                        output,
                        value: p.to_f64().unwrap_or(f64::NAN),
                    });
                }
            }
            let sum: F = row.iter().copied().sum();
            if (sum - F::one()).abs() > F::mass_tol() {
                return Err(Error::ChannelRowNotNormalized {
                    label,
                    sum: sum.to_f64().unwrap_or(f64::NAN),
                });
            }
        }
        Ok(Self {
            m,
            num_outputs,
            transition,
        })
    }

    /// The 4-input identity channel: the output reproduces the label.
    pub fn identity_2bit() -> Self {
        let mut t = vec![F::zero(); 16];
        for b in 0..4 {
            t[b * 4 + b] = F::one();
        }
        Self {
            m: 2,
            num_outputs: 4,
            transition: t,
        }
    }

    /// The 4-input erase-all channel: a single output symbol `e` regardless
    /// of the input.
    pub fn erase_all_2bit() -> Self {
        Self {
            m: 2,
            num_outputs: 1,
            transition: vec![F::one(); 4],
        }
    }

    /// Bits per input label.
    #[inline]
    pub fn m(&self) -> usize {
        self.m
    }

    /// Transition probability `P(y | label)`.
    #[inline]
    pub fn transition(&self, label: usize, y: usize) -> F {
        self.transition[label * self.num_outputs + y]
    }

    /// One row of the transition matrix.
    #[inline]
    pub fn row(&self, label: usize) -> &[F] {
        &self.transition[label * self.num_outputs..(label + 1) * self.num_outputs]
    }

    /// Parses the plain-text channel format: first line `m K`, then `2^m`
    /// rows of `K` probabilities; `#` comments allowed.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(|raw| raw.split('#').next().unwrap_or("").trim())
            .filter(|l| !l.is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty channel file".into()))?;
        let mut head = header.split_whitespace();
        let m: usize = head
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::Parse("expected header `m K`".into()))?;
        let k: usize = head
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::Parse("expected header `m K`".into()))?;
        if head.next().is_some() {
            return Err(Error::Parse("expected header `m K`".into()));
        }
        if !(1..=8).contains(&m) {
            return Err(Error::BitsOutOfRange { m });
        }
        if k == 0 {
            return Err(Error::Parse("output alphabet must be non-empty".into()));
        }
        let labels = 1usize << m;
        let mut transition = Vec::with_capacity(labels * k);
        for row in 0..labels {
            let line = lines
                .next()
                .ok_or_else(|| Error::Parse(format!("missing row {row}")))?;
            let values: Vec<f64> = line
                .split_whitespace()
                .map(|t| {
                    t.parse()
                        .map_err(|e| Error::Parse(format!("row {row}: {e}")))
                })
                .collect::<Result<_>>()?;
            if values.len() != k {
                return Err(Error::Parse(format!(
                    "row {row} has {} entries, expected {k}",
                    values.len()
                )));
            }
            transition.extend(values.into_iter().map(F::of));
        }
        if lines.next().is_some() {
            return Err(Error::Parse("trailing content after transition rows".into()));
        }
        Self::new(m, k, transition)
    }

    /// Renders the channel in the plain-text file format.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.m, self.num_outputs);
        for label in 0..self.num_labels() {
            let row: Vec<String> = self.row(label).iter().map(|p| format!("{p}")).collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }
}

impl<F: Scalar> Channel<F> for DiscreteChannel<F> {
    fn bits(&self) -> usize {
        self.m
    }

    fn num_outputs(&self) -> usize {
        self.num_outputs
    }

    fn output_weight(&self, _k: usize) -> F {
        F::one()
    }

    fn output_point(&self, k: usize) -> OutputPoint<F> {
        OutputPoint::Discrete(k)
    }

    fn log_likelihood_at(&self, y: &OutputPoint<F>, label: usize) -> F {
        match *y {
            OutputPoint::Discrete(k) => {
                let p = self.transition(label, k);
                if p > F::zero() {
                    p.ln()
                } else {
                    F::neg_infinity()
                }
            }
            OutputPoint::Continuous(_) => {
                panic!("discrete channel has a finite output alphabet")
            }
        }
    }
}

/// Natural log of the bit-conditional output law `p(y | B_i = b)` under the
/// input distribution `d`; `None` when the bit marginal `P(B_i = b)` is zero
/// and the conditional is undefined.
pub fn log_bit_conditional_density<F: Scalar, C: Channel<F>>(
    ch: &C,
    d: &JointDistribution<F>,
    y: &OutputPoint<F>,
    i: usize,
    b: usize,
) -> Option<F> {
    let m = ch.bits();
    assert_eq!(d.m(), m, "distribution and channel dimension mismatch");
    assert!(i >= 1 && i <= m, "bit index {i} out of range 1..={m}");
    assert!(b <= 1, "bit value must be 0 or 1");
    let marg = d.marginal(i).expect("index validated above").prob(b);
    if marg < F::support_eps() {
        return None;
    }
    let lse = logsumexp(
        (0..ch.num_labels())
            .filter(|&a| bit_level(a, i, m) == b && d.prob(a) >= F::support_eps())
            .map(|a| d.prob(a).ln() + ch.log_likelihood_at(y, a)),
    );
    Some(lse - marg.ln())
}

/// The bit-conditional output law `p(y | B_i = b)` in the linear domain;
/// `None` when `P(B_i = b)` is zero.
pub fn bit_conditional_density<F: Scalar, C: Channel<F>>(
    ch: &C,
    d: &JointDistribution<F>,
    y: &OutputPoint<F>,
    i: usize,
    b: usize,
) -> Option<F> {
    log_bit_conditional_density(ch, d, y, i, b).map(|l| l.exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dependent_pair() -> JointDistribution<f64> {
        JointDistribution::new(2, vec![0.0, 0.5, 0.5, 0.0]).unwrap()
    }

    #[test]
    fn awgn_density_peak_and_unit_offset() {
        let c = Constellation::<f64>::ask_brgc(2, 1.0).unwrap();
        let ch = AwgnChannel::new(c);
        for label in 0..4 {
            let peak = ch.conditional_density(ch.constellation().point(label), label);
            assert!((peak - 0.3989422804014327).abs() < 1e-12);
            let off = ch.conditional_density(ch.constellation().point(label) + 1.0, label);
            assert!((off - 0.24197072451914337).abs() < 1e-12);
        }
    }

    #[test]
    fn awgn_density_symmetry() {
        let c = Constellation::<f64>::ask_brgc(2, 0.7).unwrap();
        let ch = AwgnChannel::new(c);
        // labels 00 and 10 sit at -3Δ and +3Δ
        let y = 1.234;
        assert!(
            (ch.conditional_density(y, 0b00) - ch.conditional_density(-y, 0b10)).abs() < 1e-15
        );
    }

    #[test]
    fn identity_channel_matrix() {
        let ch = DiscreteChannel::<f64>::identity_2bit();
        for b in 0..4 {
            for y in 0..4 {
                assert_eq!(ch.transition(b, y), if b == y { 1.0 } else { 0.0 });
            }
            let sum: f64 = ch.row(b).iter().sum();
            assert_eq!(sum, 1.0);
        }
    }

    #[test]
    fn erase_all_channel_matrix() {
        let ch = DiscreteChannel::<f64>::erase_all_2bit();
        assert_eq!(ch.num_outputs(), 1);
        for b in 0..4 {
            assert_eq!(ch.transition(b, 0), 1.0);
        }
    }

    #[test]
    fn channel_validation() {
        assert!(matches!(
            DiscreteChannel::new(1, 2, vec![0.5, 0.4, 1.0, 0.0]),
            Err(Error::ChannelRowNotNormalized { .. })
        ));
        assert!(matches!(
            DiscreteChannel::new(1, 2, vec![-0.1, 1.1, 1.0, 0.0]),
            Err(Error::NegativeTransition { .. })
        ));
    }

    #[test]
    fn bit_conditional_density_m1_equals_conditional() {
        let c = Constellation::<f64>::ask_brgc(1, 1.5).unwrap();
        let ch = AwgnChannel::new(c);
        let d = JointDistribution::uniform(1);
        for &y in &[-2.0, 0.0, 0.33] {
            for b in 0..2 {
                let cond = bit_conditional_density(&ch, &d, &OutputPoint::Continuous(y), 1, b)
                    .unwrap();
                assert!((cond - ch.conditional_density(y, b)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn bit_conditional_density_four_ask_enumeration() {
        // uniform 4-ASK: labels 00, 01 carry B1 = 0, so the conditional is
        // the equal mixture of the Gaussians at -3Δ and -Δ
        let c = Constellation::<f64>::ask_brgc(2, 1.0).unwrap();
        let ch = AwgnChannel::new(c);
        let d = JointDistribution::uniform(2);
        for &y in &[-1.0, 0.3, 2.0] {
            let got =
                bit_conditional_density(&ch, &d, &OutputPoint::Continuous(y), 1, 0).unwrap();
            let want =
                0.5 * (ch.conditional_density(y, 0b00) + ch.conditional_density(y, 0b01));
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn bit_conditional_density_erase_all() {
        let ch = DiscreteChannel::<f64>::erase_all_2bit();
        let d = dependent_pair();
        for i in 1..=2 {
            for b in 0..2 {
                let got =
                    bit_conditional_density(&ch, &d, &OutputPoint::Discrete(0), i, b).unwrap();
                assert!((got - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn bit_conditional_density_undefined_branch() {
        let d = JointDistribution::<f64>::point_mass(2, 0b11);
        let ch = DiscreteChannel::<f64>::identity_2bit();
        assert!(bit_conditional_density(&ch, &d, &OutputPoint::Discrete(3), 1, 0).is_none());
    }

    #[test]
    fn bit_marginalization_consistency() {
        // sum_b P_{B_i}(b) p(y|B_i=b) equals the full mixture p_Y(y)
        let c = Constellation::ask_brgc(3, 0.9).unwrap();
        let ch = AwgnChannel::new(c);
        let d = JointDistribution::new(
            3,
            vec![0.02, 0.08, 0.2, 0.2, 0.15, 0.05, 0.13, 0.17],
        )
        .unwrap();
        for &y in &[-2.2, 0.0, 1.7] {
            let full: f64 = (0..8)
                .map(|a| d.prob(a) * ch.conditional_density(y, a))
                .sum();
            for i in 1..=3 {
                let marg = d.marginal(i).unwrap();
                let mixed: f64 = (0..2)
                    .filter_map(|b| {
                        bit_conditional_density(&ch, &d, &OutputPoint::Continuous(y), i, b)
                            .map(|c| marg.prob(b) * c)
                    })
                    .sum();
                assert!((mixed - full).abs() < 1e-12, "i={i} y={y}");
            }
        }
    }

    #[test]
    fn parse_channel_roundtrip() {
        let ch = DiscreteChannel::new(
            1,
            3,
            vec![0.25, 0.5, 0.25, 0.1, 0.2, 0.7],
        )
        .unwrap();
        let text = ch.to_text();
        let back = DiscreteChannel::<f64>::parse(&text).unwrap();
        assert_eq!(ch, back);
    }

    #[test]
    fn parse_channel_rejects_malformed() {
        assert!(DiscreteChannel::<f64>::parse("").is_err());
        assert!(DiscreteChannel::<f64>::parse("1 2\n0.5 0.5\n").is_err()); // missing row
        assert!(DiscreteChannel::<f64>::parse("1 2\n0.5 0.5\n0.9 0.2\n").is_err());
        let ok = DiscreteChannel::<f64>::parse("# comment\n1 1\n1\n1\n").unwrap();
        assert_eq!(ok.num_outputs(), 1);
    }
}
