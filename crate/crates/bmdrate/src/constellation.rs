//! Bipolar ASK constellations with Binary Reflected Gray Code labeling.

use crate::dist::JointDistribution;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Scaled bipolar ASK constellation.
///
/// The unscaled amplitudes are the odd integers `{±1, ±3, …, ±(2^m−1)}`;
/// every point is stored as `delta * amplitude`, indexed by its label
/// integer. Labels follow the Binary Reflected Gray Code applied to the
/// amplitude rank, with bit-level 1 as the most significant bit of the Gray
/// word; amplitude-adjacent points therefore differ in exactly one bit.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation<F: Scalar = f64> {
    m: usize,
    points: Vec<F>,
    delta: F,
}

/// Gray code of an amplitude rank.
#[inline]
fn gray(rank: usize) -> usize {
    rank ^ (rank >> 1)
}

impl<F: Scalar> Constellation<F> {
    /// Builds the `2^m`-point ASK constellation with BRGC labeling, scaled
    /// by `delta`. Supported range: `1 <= m <= 8`.
    pub fn ask_brgc(m: usize, delta: F) -> Result<Self> {
        if !(1..=8).contains(&m) {
            return Err(Error::BitsOutOfRange { m });
        }
        assert!(delta > F::zero(), "delta must be positive");
        let n = 1usize << m;
        let mut points = vec![F::zero(); n];
        for rank in 0..n {
            let amplitude = 2 * (rank as i64 + 1) - 1 - n as i64;
            points[gray(rank)] = delta * F::from_i64(amplitude).unwrap();
        }
        Ok(Self { m, points, delta })
    }

    /// Bits per symbol.
    #[inline]
    pub fn m(&self) -> usize {
        self.m
    }

    /// Scaling factor Δ.
    #[inline]
    pub fn delta(&self) -> F {
        self.delta
    }

    /// Scaled points indexed by label integer.
    #[inline]
    pub fn points(&self) -> &[F] {
        &self.points
    }

    /// Scaled point of one label.
    #[inline]
    pub fn point(&self, label: usize) -> F {
        self.points[label]
    }

    /// Unscaled amplitudes in label order.
    pub fn unscaled_points(&self) -> Vec<F> {
        self.points.iter().map(|&p| p / self.delta).collect()
    }

    /// Smallest and largest scaled point.
    pub fn range(&self) -> (F, F) {
        let lo = self.points.iter().copied().fold(F::infinity(), F::min);
        let hi = self.points.iter().copied().fold(F::neg_infinity(), F::max);
        (lo, hi)
    }

    /// Average transmit power `E[(Δ·x_B)²]` under the input distribution.
    pub fn average_power(&self, d: &JointDistribution<F>) -> Result<F> {
        if d.m() != self.m {
            return Err(Error::DimensionMismatch {
                expected: self.m,
                got: d.m(),
            });
        }
        Ok(self
            .points
            .iter()
            .zip(d.probs())
            .map(|(&x, &p)| p * x * x)
            .sum())
    }
}

/// Solves the power constraint with equality: the Δ for which the scaled
/// constellation under `d` has average power exactly `power`.
pub fn delta_for_power<F: Scalar>(
    m: usize,
    d: &JointDistribution<F>,
    power: F,
) -> Result<F> {
    assert!(power > F::zero(), "power must be positive");
    let unit = Constellation::ask_brgc(m, F::one())?;
    let second_moment = unit.average_power(d)?;
    if second_moment <= F::zero() {
        return Err(Error::ZeroPowerDistribution);
    }
    Ok((power / second_moment).sqrt())
}
