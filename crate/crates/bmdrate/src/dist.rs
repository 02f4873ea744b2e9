//! Probability distributions over m-bit label vectors.
//!
//! Labels are indexed by their integer value with bit-level 1 as the most
//! significant bit: for m = 3 the label `101` has index 5 and its bit-levels
//! are B1 = 1, B2 = 0, B3 = 1.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Value of bit-level `i` (1-based, B1 = MSB) of `label` with `m` bits.
#[inline]
pub fn bit_level(label: usize, i: usize, m: usize) -> usize {
    debug_assert!(i >= 1 && i <= m);
    (label >> (m - i)) & 1
}

/// Joint probability mass function over `{0,1}^m` labels.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution<F: Scalar = f64> {
    m: usize,
    probs: Vec<F>,
}

/// Marginal distribution of a single bit-level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BitMarginal<F: Scalar = f64> {
    pub p0: F,
    pub p1: F,
}

impl<F: Scalar> BitMarginal<F> {
    /// Probability of the bit value `b` (0 or 1).
    #[inline]
    pub fn prob(&self, b: usize) -> F {
        if b == 0 {
            self.p0
        } else {
            self.p1
        }
    }

    /// Binary entropy in bits, with the 0·log 0 = 0 convention.
    pub fn entropy(&self) -> F {
        let mut h = F::zero();
        for p in [self.p0, self.p1] {
            if p >= F::support_eps() {
                h -= p * p.log2();
            }
        }
        h
    }
}

impl<F: Scalar> JointDistribution<F> {
    /// Builds a distribution from `2^m` label probabilities.
    ///
    /// Entries must be non-negative and sum to 1 within the mass tolerance
    /// of the scalar type (1e-12 for `f64`).
    pub fn new(m: usize, probs: Vec<F>) -> Result<Self> {
        let expected = 1usize << m;
        if probs.len() != expected {
            return Err(Error::WrongLength {
                expected,
                got: probs.len(),
            });
        }
        for (label, &p) in probs.iter().enumerate() {
            if p < F::zero() || !p.is_finite() {
                return Err(Error::NegativeProbability {
                    label,
                    value: p.to_f64().unwrap_or(f64::NAN),
                });
            }
        }
        let sum: F = probs.iter().copied().sum();
        if (sum - F::one()).abs() > F::mass_tol() {
            return Err(Error::NotNormalized {
                sum: sum.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(Self { m, probs })
    }

    /// Uniform distribution on `{0,1}^m`.
    pub fn uniform(m: usize) -> Self {
        let n = 1usize << m;
        let p = F::one() / F::from_usize(n).unwrap();
        Self {
            m,
            probs: vec![p; n],
        }
    }

    /// Distribution placing all mass on one label.
    pub fn point_mass(m: usize, label: usize) -> Self {
        let n = 1usize << m;
        assert!(label < n, "label {label} out of range for m={m}");
        let mut probs = vec![F::zero(); n];
        probs[label] = F::one();
        Self { m, probs }
    }

    /// Product distribution built from per-bit marginals.
    pub fn product(marginals: &[BitMarginal<F>]) -> Self {
        let m = marginals.len();
        let n = 1usize << m;
        let probs = (0..n)
            .map(|label| {
                (1..=m)
                    .map(|i| marginals[i - 1].prob(bit_level(label, i, m)))
                    .fold(F::one(), |acc, p| acc * p)
            })
            .collect();
        Self { m, probs }
    }

    /// Number of bit-levels m.
    #[inline]
    pub fn m(&self) -> usize {
        self.m
    }

    /// Number of labels `2^m`.
    #[inline]
    pub fn num_labels(&self) -> usize {
        self.probs.len()
    }

    /// Probability of `label`.
    #[inline]
    pub fn prob(&self, label: usize) -> F {
        self.probs[label]
    }

    /// All label probabilities in label order.
    #[inline]
    pub fn probs(&self) -> &[F] {
        &self.probs
    }

    /// Labels with probability above the support threshold.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.probs
            .iter()
            .enumerate()
            .filter(|(_, &p)| p >= F::support_eps())
            .map(|(b, _)| b)
    }

    /// Whether every label carries positive probability.
    pub fn is_strictly_positive(&self) -> bool {
        self.probs.iter().all(|&p| p >= F::support_eps())
    }

    /// Marginal distribution of bit-level `i` (1-based).
    pub fn marginal(&self, i: usize) -> Result<BitMarginal<F>> {
        if i < 1 || i > self.m {
            return Err(Error::BitIndexOutOfRange { index: i, m: self.m });
        }
        let mut p = [F::zero(); 2];
        for (label, &prob) in self.probs.iter().enumerate() {
            p[bit_level(label, i, self.m)] += prob;
        }
        Ok(BitMarginal { p0: p[0], p1: p[1] })
    }

    /// All m bit marginals.
    pub fn marginals(&self) -> Vec<BitMarginal<F>> {
        (1..=self.m).map(|i| self.marginal(i).unwrap()).collect()
    }

    /// The product distribution of this distribution's marginals.
    pub fn product_of_marginals(&self) -> Self {
        Self::product(&self.marginals())
    }

    /// Entropy H(B) in bits, with the 0·log 0 = 0 convention.
    pub fn entropy(&self) -> F {
        let mut h = F::zero();
        for &p in &self.probs {
            if p >= F::support_eps() {
                h -= p * p.log2();
            }
        }
        h
    }

    /// Maximum absolute deviation from the product of marginals.
    pub fn product_deviation(&self) -> F {
        let prod = self.product_of_marginals();
        self.probs
            .iter()
            .zip(&prod.probs)
            .map(|(&a, &b)| (a - b).abs())
            .fold(F::zero(), F::max)
    }

    /// Parses the plain-text distribution format: one `<bitstring> <prob>`
    /// line per label, `#` comments allowed. Probabilities are renormalized
    /// when their sum is within 1e-6 of 1 and rejected otherwise.
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries: Vec<(usize, usize, F)> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let bits = parts.next().unwrap();
            let prob_str = parts.next().ok_or_else(|| {
                Error::Parse(format!("line {}: missing probability", lineno + 1))
            })?;
            if parts.next().is_some() {
                return Err(Error::Parse(format!(
                    "line {}: expected `<bitstring> <probability>`",
                    lineno + 1
                )));
            }
            if bits.is_empty() || !bits.chars().all(|c| c == '0' || c == '1') {
                return Err(Error::Parse(format!(
                    "line {}: `{}` is not a bitstring",
                    lineno + 1,
                    bits
                )));
            }
            let label = usize::from_str_radix(bits, 2)
                .map_err(|e| Error::Parse(format!("line {}: {}", lineno + 1, e)))?;
            let prob: f64 = prob_str
                .parse()
                .map_err(|e| Error::Parse(format!("line {}: {}", lineno + 1, e)))?;
            entries.push((bits.len(), label, F::of(prob)));
        }
        if entries.is_empty() {
            return Err(Error::Parse("no distribution entries found".into()));
        }
        let m = entries[0].0;
        if entries.iter().any(|&(len, _, _)| len != m) {
            return Err(Error::Parse("bitstrings have inconsistent lengths".into()));
        }
        let n = 1usize << m;
        if entries.len() != n {
            return Err(Error::Parse(format!(
                "expected {} labels for m={}, found {}",
                n,
                m,
                entries.len()
            )));
        }
        let mut probs = vec![F::nan(); n];
        for &(_, label, p) in &entries {
            if !probs[label].is_nan() {
                return Err(Error::Parse(format!("duplicate label {label:0m$b}")));
            }
            if p < F::zero() {
                return Err(Error::NegativeProbability {
                    label,
                    value: p.to_f64().unwrap_or(f64::NAN),
                });
            }
            probs[label] = p;
        }
        let sum: F = probs.iter().copied().sum();
        if (sum - F::one()).abs() > F::of(1e-6) {
            return Err(Error::NotNormalized {
                sum: sum.to_f64().unwrap_or(f64::NAN),
            });
        }
        let probs = probs.into_iter().map(|p| p / sum).collect();
        Self::new(m, probs)
    }

    /// Renders the distribution in the plain-text file format.
    pub fn to_text(&self) -> String {
        let mut out = String::from("# label probability\n");
        for (label, &p) in self.probs.iter().enumerate() {
            out.push_str(&format!("{:0width$b} {}\n", label, p, width = self.m));
        }
        out
    }
}

/// Maxwell–Boltzmann distribution over labels: P(b) ∝ exp(−nu · x_b²),
/// with `points` the unscaled amplitudes in label order. `nu = 0` gives the
/// uniform distribution.
pub fn maxwell_boltzmann<F: Scalar>(points: &[F], nu: F) -> JointDistribution<F> {
    assert!(nu >= F::zero(), "nu must be non-negative");
    assert!(
        points.len().is_power_of_two() && !points.is_empty(),
        "points must have length 2^m"
    );
    let m = points.len().trailing_zeros() as usize;
    // shift the exponent by the smallest squared amplitude so that large nu
    // cannot underflow every weight at once
    let min_sq = points
        .iter()
        .map(|&x| x * x)
        .fold(F::infinity(), F::min);
    let weights: Vec<F> = points
        .iter()
        .map(|&x| (-nu * (x * x - min_sq)).exp())
        .collect();
    let z: F = weights.iter().copied().sum();
    JointDistribution {
        m,
        probs: weights.into_iter().map(|w| w / z).collect(),
    }
}
