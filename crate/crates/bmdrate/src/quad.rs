//! One-dimensional quadrature over the channel output.
//!
//! All AWGN integrals use a composite Gauss–Legendre rule on a truncated
//! interval: 10 noise standard deviations of guard band beyond the extreme
//! constellation points leave a Gaussian tail mass below 1e-23, far under
//! every tolerance in this crate. Composite panels of width at most one are
//! used because the integrands are mixtures of unit-variance Gaussians times
//! logarithms of such mixtures; a single high-order rule centered anywhere
//! resolves them poorly.

use crate::constellation::Constellation;
use crate::scalar::Scalar;

/// Default node density per unit length.
pub const DEFAULT_NODES_PER_UNIT: usize = 16;

/// Guard band beyond the extreme points, in noise standard deviations.
const GUARD_BAND: f64 = 10.0;

/// Node/weight set over a truncated interval `[lo, hi]`.
#[derive(Debug, Clone)]
pub struct QuadratureRule<F: Scalar = f64> {
    nodes: Vec<F>,
    weights: Vec<F>,
    lo: F,
    hi: F,
}

impl<F: Scalar> QuadratureRule<F> {
    /// Composite Gauss–Legendre rule on `[lo, hi]` with panels of width at
    /// most one and `nodes_per_unit` nodes per panel.
    pub fn composite_gauss_legendre(lo: F, hi: F, nodes_per_unit: usize) -> Self {
        assert!(hi > lo, "empty integration interval");
        let nodes_per_unit = nodes_per_unit.max(1);
        let span = hi - lo;
        let panels = span.ceil().to_usize().unwrap().max(1);
        let (xs, ws) = gauss_legendre_unit::<F>(nodes_per_unit);
        let mut nodes = Vec::with_capacity(panels * nodes_per_unit);
        let mut weights = Vec::with_capacity(panels * nodes_per_unit);
        let width = span / F::from_usize(panels).unwrap();
        let half = F::of(0.5);
        for p in 0..panels {
            let a = lo + width * F::from_usize(p).unwrap();
            let b = a + width;
            let mid = half * (a + b);
            let halflen = half * (b - a);
            for (&x, &w) in xs.iter().zip(&ws) {
                nodes.push(mid + halflen * x);
                weights.push(halflen * w);
            }
        }
        Self {
            nodes,
            weights,
            lo,
            hi,
        }
    }

    /// Number of nodes.
    #[inline]
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    #[inline]
    pub fn nodes(&self) -> &[F] {
        &self.nodes
    }

    #[inline]
    pub fn weights(&self) -> &[F] {
        &self.weights
    }

    #[inline]
    pub fn lo(&self) -> F {
        self.lo
    }

    #[inline]
    pub fn hi(&self) -> F {
        self.hi
    }

    /// Integrates `f` over `[lo, hi]`.
    pub fn integrate(&self, f: impl Fn(F) -> F) -> F {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Quadrature rule covering a constellation's output range plus guard band.
pub fn make_quadrature<F: Scalar>(
    c: &Constellation<F>,
    nodes_per_unit: usize,
) -> QuadratureRule<F> {
    let (lo, hi) = c.range();
    let guard = F::of(GUARD_BAND);
    QuadratureRule::composite_gauss_legendre(lo - guard, hi + guard, nodes_per_unit)
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, by Newton iteration on the
/// Legendre recurrence.
fn gauss_legendre_unit<F: Scalar>(n: usize) -> (Vec<F>, Vec<F>) {
    let mut nodes = vec![F::zero(); n];
    let mut weights = vec![F::zero(); n];
    let nf = F::from_usize(n).unwrap();
    for i in 0..n.div_ceil(2) {
        let k = F::from_usize(i).unwrap();
        // Tricomi initial guess for the i-th root
        let mut x = ((k + F::of(0.75)) / (nf + F::of(0.5)) * F::PI()).cos();
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            let dx = p / d;
            x -= dx;
            if dx.abs() <= F::epsilon() * (x.abs() + F::one()) {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, x);
        let w = F::of(2.0) / ((F::one() - x * x) * dp * dp);
        nodes[i] = -x;
        weights[i] = w;
        nodes[n - 1 - i] = x;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Legendre polynomial P_n and its derivative at `x`.
fn legendre_with_derivative<F: Scalar>(n: usize, x: F) -> (F, F) {
    let mut p0 = F::one();
    let mut p1 = x;
    if n == 0 {
        return (p0, F::zero());
    }
    for k in 2..=n {
        let kf = F::from_usize(k).unwrap();
        let p2 = ((F::of(2.0) * kf - F::one()) * x * p1 - (kf - F::one()) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let deriv = F::from_usize(n).unwrap() * (x * p1 - p0) / (x * x - F::one());
    (p1, deriv)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_rule_matches_reference_values() {
        // 5-point rule, textbook values
        let (x, w) = gauss_legendre_unit::<f64>(5);
        let xr = [
            -0.906179845938664,
            -0.538469310105683,
            0.0,
            0.538469310105683,
            0.906179845938664,
        ];
        let wr = [
            0.23692688505618908,
            0.47862867049936647,
            0.5688888888888889,
            0.47862867049936647,
            0.23692688505618908,
        ];
        for i in 0..5 {
            assert!((x[i] - xr[i]).abs() < 1e-14, "node {i}");
            assert!((w[i] - wr[i]).abs() < 1e-14, "weight {i}");
        }
    }

    #[test]
    fn weights_integrate_constants_exactly() {
        let rule = QuadratureRule::<f64>::composite_gauss_legendre(-13.0, 17.0, 16);
        let total: f64 = rule.weights().iter().sum();
        assert!((total - 30.0).abs() < 1e-12);
    }

    #[test]
    fn nodes_strictly_increasing_inside_bounds() {
        let rule = QuadratureRule::<f64>::composite_gauss_legendre(-2.0, 3.5, 8);
        for pair in rule.nodes().windows(2) {
            assert!(pair[0] < pair[1]);
        }
        assert!(rule.nodes()[0] > rule.lo());
        assert!(*rule.nodes().last().unwrap() < rule.hi());
    }

    #[test]
    fn standard_normal_moments() {
        let c = Constellation::<f64>::ask_brgc(1, 1.0).unwrap();
        let rule = make_quadrature(&c, DEFAULT_NODES_PER_UNIT);
        let norm = |y: f64| (-0.5 * y * y).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let mass = rule.integrate(norm);
        assert!((mass - 1.0).abs() < 1e-10);
        let second = rule.integrate(|y| y * y * norm(y));
        assert!((second - 1.0).abs() < 1e-9);
    }

    #[test]
    fn mixture_density_normalizes() {
        // uniform 4-ASK, delta = 1
        let c = Constellation::<f64>::ask_brgc(2, 1.0).unwrap();
        let rule = make_quadrature(&c, DEFAULT_NODES_PER_UNIT);
        let pts = c.points().to_vec();
        let mix = |y: f64| {
            pts.iter()
                .map(|&x| 0.25 * (-0.5 * (y - x) * (y - x)).exp())
                .sum::<f64>()
                / (2.0 * std::f64::consts::PI).sqrt()
        };
        assert!((rule.integrate(mix) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn polynomial_exactness() {
        // an n-point rule is exact through degree 2n-1 on each panel
        let rule = QuadratureRule::<f64>::composite_gauss_legendre(0.0, 4.0, 6);
        let val = rule.integrate(|y| y.powi(11));
        let exact = 4.0f64.powi(12) / 12.0;
        assert!(((val - exact) / exact).abs() < 1e-13);
    }

    #[test]
    fn f32_rule_has_reasonable_accuracy() {
        let rule = QuadratureRule::<f32>::composite_gauss_legendre(-10.0, 10.0, 16);
        let norm =
            |y: f32| (-0.5 * y * y).exp() / (2.0 * std::f32::consts::PI).sqrt();
        assert!((rule.integrate(norm) - 1.0).abs() < 1e-5);
    }
}
