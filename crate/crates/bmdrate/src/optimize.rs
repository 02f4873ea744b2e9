//! Input-distribution and scaling optimization on the AWGN channel:
//! Maxwell–Boltzmann capacity search, bit-shaped search over product
//! inputs, SNR-at-target-rate bisection and dB-gap readout.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::channel::AwgnChannel;
use crate::constellation::{delta_for_power, Constellation};
use crate::dist::{maxwell_boltzmann, BitMarginal, JointDistribution};
use crate::error::{Error, Result};
use crate::quad::DEFAULT_NODES_PER_UNIT;
use crate::rates::{channel_stats, rate_sgmi};
use crate::scalar::Scalar;

/// The rate curves this crate can trace over SNR.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RateFunctional {
    /// I(B;Y) maximized over the Maxwell–Boltzmann family.
    Capacity,
    /// H(B) − Σ H(B_i|Y) at the capacity-optimal input.
    ShapedBmd,
    /// GMI of the bit-metric at the capacity-optimal input.
    Sgmi,
    /// Σ I(B_i;Y) maximized over product inputs.
    BitshapedBmd,
    /// Σ I(B_i;Y) with uniform input.
    UniformBmd,
    /// GMI of the bit-metric with uniform input.
    UniformSgmi,
}

impl RateFunctional {
    /// All functionals in canonical (reporting) order.
    pub const ALL: [RateFunctional; 6] = [
        RateFunctional::Capacity,
        RateFunctional::ShapedBmd,
        RateFunctional::Sgmi,
        RateFunctional::BitshapedBmd,
        RateFunctional::UniformBmd,
        RateFunctional::UniformSgmi,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            RateFunctional::Capacity => "capacity",
            RateFunctional::ShapedBmd => "shaped-bmd",
            RateFunctional::Sgmi => "sgmi",
            RateFunctional::BitshapedBmd => "bitshaped-bmd",
            RateFunctional::UniformBmd => "uniform-bmd",
            RateFunctional::UniformSgmi => "uniform-sgmi",
        }
    }
}

impl std::fmt::Display for RateFunctional {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for RateFunctional {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "capacity" => Ok(RateFunctional::Capacity),
            "shaped-bmd" => Ok(RateFunctional::ShapedBmd),
            "sgmi" => Ok(RateFunctional::Sgmi),
            "bitshaped-bmd" => Ok(RateFunctional::BitshapedBmd),
            "uniform-bmd" => Ok(RateFunctional::UniformBmd),
            "uniform-sgmi" => Ok(RateFunctional::UniformSgmi),
            other => Err(Error::Parse(format!("unknown rate functional `{other}`"))),
        }
    }
}

/// One optimized operating point under a power constraint.
#[derive(Debug, Clone)]
pub struct OperatingPoint<F: Scalar = f64> {
    /// The power constraint, met with equality.
    pub power: F,
    /// Optimal constellation scaling Δ*.
    pub delta: F,
    /// Optimal input distribution.
    pub distribution: JointDistribution<F>,
    /// Achieved value of the optimized functional, in bits.
    pub rate: F,
    pub functional: RateFunctional,
}

/// Knobs shared by the optimizers.
#[derive(Debug, Clone)]
pub struct OptimizeConfig {
    /// Quadrature node density.
    pub nodes_per_unit: usize,
    /// Random restarts of the bit-shaped search (plus the uniform start).
    pub restarts: usize,
    /// Seed for the restart draws.
    pub seed: u64,
    /// Free the sign bit instead of pinning it at probability 1/2.
    pub free_sign_bit: bool,
}

impl Default for OptimizeConfig {
    fn default() -> Self {
        Self {
            nodes_per_unit: DEFAULT_NODES_PER_UNIT,
            restarts: 8,
            seed: 0,
            free_sign_bit: false,
        }
    }
}

/// Minimum improvement treated as progress by the ascent loops.
const IMPROVE_EPS: f64 = 1e-11;

/// Terminal coordinate step of the bit-shaped search.
const BIT_STEP: f64 = 0.005;

fn awgn_at<F: Scalar>(m: usize, delta: F, nodes_per_unit: usize) -> AwgnChannel<F> {
    AwgnChannel::with_nodes_per_unit(
        Constellation::ask_brgc(m, delta).expect("m validated by caller"),
        nodes_per_unit,
    )
}

/// I(B;Y) of the Maxwell–Boltzmann input with parameter `nu`, scaled to meet
/// the power constraint with equality.
fn mb_rate<F: Scalar>(m: usize, power: F, nu: F, nodes_per_unit: usize) -> F {
    let points = Constellation::<F>::ask_brgc(m, F::one())
        .expect("m validated by caller")
        .points()
        .to_vec();
    let d = maxwell_boltzmann(&points, nu);
    let delta = delta_for_power(m, &d, power).expect("ASK amplitudes have positive power");
    let ch = awgn_at(m, delta, nodes_per_unit);
    channel_stats(&ch, &d).mutual_information()
}

/// Maximizes I(B;Y) over the Maxwell–Boltzmann family under the power
/// constraint: a coarse scan over `nu` with automatic interval expansion,
/// followed by golden-section refinement until the bracketed rate change is
/// below 1e-9 relative.
pub fn capacity_mb<F: Scalar>(m: usize, power: F, nodes_per_unit: usize) -> OperatingPoint<F> {
    assert!(power > F::zero(), "power must be positive");
    assert!((1..=8).contains(&m), "m out of supported range");
    let rate_at = |nu: F| mb_rate(m, power, nu, nodes_per_unit);

    // coarse localization with expansion while the argmax presses the edge
    let grid_points = 17usize;
    let mut hi = F::of(0.25);
    let mut best_idx;
    loop {
        let values: Vec<F> = (0..grid_points)
            .map(|i| {
                let nu = hi * F::from_usize(i).unwrap() / F::from_usize(grid_points - 1).unwrap();
                rate_at(nu)
            })
            .collect();
        // ties break toward smaller nu, so a rate that is flat in nu (all
        // points at equal energy) settles at the uniform input
        best_idx = 0;
        for i in 1..grid_points {
            if values[i] > values[best_idx] {
                best_idx = i;
            }
        }
        if best_idx < grid_points - 2 || hi > F::of(1024.0) {
            break;
        }
        hi *= F::of(2.0);
    }
    let step = hi / F::from_usize(grid_points - 1).unwrap();
    let lo_b = step * F::from_usize(best_idx.saturating_sub(1)).unwrap();
    let hi_b = step * F::from_usize((best_idx + 1).min(grid_points - 1)).unwrap();

    // golden-section refinement
    let phi = (F::of(5.0).sqrt() - F::one()) / F::of(2.0);
    let (mut a, mut b) = (lo_b, hi_b);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let mut fc = rate_at(c);
    let mut fd = rate_at(d);
    let ftol = F::of(1e-9);
    for _ in 0..200 {
        let fbest = fc.max(fd);
        if b - a <= F::of(1e-12) || (fc - fd).abs() <= ftol * fbest.max(F::one()) {
            break;
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = rate_at(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = rate_at(d);
        }
    }
    let mut nu = if fc > fd { c } else { d };
    let mut rate = fc.max(fd);

    // the family contains the uniform input at nu = 0; prefer it on ties
    let at_zero = rate_at(F::zero());
    if at_zero >= rate - F::of(IMPROVE_EPS) {
        nu = F::zero();
        rate = at_zero;
    }

    let points = Constellation::<F>::ask_brgc(m, F::one())
        .unwrap()
        .points()
        .to_vec();
    let distribution = maxwell_boltzmann(&points, nu);
    let delta = delta_for_power(m, &distribution, power).unwrap();
    OperatingPoint {
        power,
        delta,
        distribution,
        rate,
        functional: RateFunctional::Capacity,
    }
}

/// Σ I(B_i;Y) of the product input with the given per-bit probabilities of
/// the value one, scaled to the power constraint.
fn product_rate<F: Scalar>(m: usize, power: F, bit_p1: &[F], nodes_per_unit: usize) -> F {
    let marginals: Vec<BitMarginal<F>> = bit_p1
        .iter()
        .map(|&p1| BitMarginal {
            p0: F::one() - p1,
            p1,
        })
        .collect();
    let d = JointDistribution::product(&marginals);
    let delta = delta_for_power(m, &d, power).expect("ASK amplitudes have positive power");
    let ch = awgn_at(m, delta, nodes_per_unit);
    channel_stats(&ch, &d).bitwise_mi_sum()
}

/// One cyclic coordinate-ascent run from a starting point. The first sweep
/// line-searches each coordinate on a 21-point grid over [0, 1] and refines
/// the best bracket by golden section; later sweeps refine locally. The run
/// terminates when no coordinate move of size 0.005 improves the rate.
fn ascend<F: Scalar>(
    m: usize,
    power: F,
    start: Vec<F>,
    coords: &[usize],
    nodes_per_unit: usize,
) -> (Vec<F>, F) {
    let mut p = start;
    let mut val = product_rate(m, power, &p, nodes_per_unit);
    let eps = F::of(IMPROVE_EPS);
    let step = F::of(BIT_STEP);
    for sweep in 0..200 {
        let val_before = val;
        for &j in coords {
            let eval = |x: F| {
                let mut q = p.clone();
                q[j] = x;
                product_rate(m, power, &q, nodes_per_unit)
            };
            let mut best_x = p[j];
            let mut best_v = val;
            let radius = if sweep == 0 {
                // coarse grid over the full range
                let grid = 21usize;
                for g in 0..grid {
                    let x = F::from_usize(g).unwrap() / F::from_usize(grid - 1).unwrap();
                    let v = eval(x);
                    if v > best_v {
                        best_v = v;
                        best_x = x;
                    }
                }
                F::of(0.05)
            } else {
                F::of(0.15)
            };
            let lo = (best_x - radius).max(F::zero());
            let hi = (best_x + radius).min(F::one());
            let (x, v) = crate::util::golden_max(eval, lo, hi, F::of(5e-4));
            if v > best_v {
                best_v = v;
                best_x = x;
            }
            if best_v > val + eps {
                p[j] = best_x;
                val = best_v;
            }
        }
        if val - val_before <= F::of(1e-9) {
            // terminal check at the stated precision
            let mut improved = false;
            for &j in coords {
                for dx in [-F::one() * step, step] {
                    let x = (p[j] + dx).max(F::zero()).min(F::one());
                    let mut q = p.clone();
                    q[j] = x;
                    let v = product_rate(m, power, &q, nodes_per_unit);
                    if v > val + eps {
                        p[j] = x;
                        val = v;
                        improved = true;
                    }
                }
            }
            if !improved {
                break;
            }
        }
    }
    (p, val)
}

/// Maximizes Σ I(B_i;Y) over product input distributions and Δ under the
/// power constraint, by multi-start cyclic coordinate ascent over the per-bit
/// probabilities with Δ re-solved for power equality at every step.
///
/// The sign bit carries no amplitude information under the Gray labeling, so
/// it is pinned at probability 1/2 unless `cfg.free_sign_bit` is set.
pub fn bitshaped_search<F: Scalar>(m: usize, power: F, cfg: &OptimizeConfig) -> OperatingPoint<F> {
    assert!(power > F::zero(), "power must be positive");
    assert!((1..=8).contains(&m), "m out of supported range");
    let coords: Vec<usize> = if cfg.free_sign_bit {
        (0..m).collect()
    } else {
        (1..m).collect()
    };

    let half = F::of(0.5);
    let mut starts: Vec<Vec<F>> = vec![vec![half; m]];
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for _ in 0..cfg.restarts {
        let mut p: Vec<F> = (0..m)
            .map(|_| F::of(rng.random_range(0.05..0.95)))
            .collect();
        if !cfg.free_sign_bit {
            p[0] = half;
        }
        starts.push(p);
    }

    let results: Vec<(Vec<F>, F)> = starts
        .into_par_iter()
        .map(|s| ascend(m, power, s, &coords, cfg.nodes_per_unit))
        .collect();
    let (best_p, rate) = results
        .into_iter()
        .enumerate()
        .max_by(|(ia, (_, va)), (ib, (_, vb))| {
            va.partial_cmp(vb)
                .unwrap()
                .then_with(|| ib.cmp(ia))
        })
        .map(|(_, r)| r)
        .unwrap();

    let marginals: Vec<BitMarginal<F>> = best_p
        .iter()
        .map(|&p1| BitMarginal {
            p0: F::one() - p1,
            p1,
        })
        .collect();
    let distribution = JointDistribution::product(&marginals);
    let delta = delta_for_power(m, &distribution, power).unwrap();
    OperatingPoint {
        power,
        delta,
        distribution,
        rate,
        functional: RateFunctional::BitshapedBmd,
    }
}

/// Evaluates one rate functional at a power constraint, applying its input
/// policy (uniform, capacity-optimal or bit-shaped input).
pub fn evaluate_functional<F: Scalar>(
    functional: RateFunctional,
    m: usize,
    power: F,
    cfg: &OptimizeConfig,
) -> F {
    match functional {
        RateFunctional::Capacity => capacity_mb(m, power, cfg.nodes_per_unit).rate,
        RateFunctional::ShapedBmd | RateFunctional::Sgmi => {
            let op = capacity_mb(m, power, cfg.nodes_per_unit);
            let ch = awgn_at(m, op.delta, cfg.nodes_per_unit);
            match functional {
                RateFunctional::ShapedBmd => {
                    channel_stats(&ch, &op.distribution).bmd_raw().max(F::zero())
                }
                _ => rate_sgmi(&ch, &op.distribution).rate,
            }
        }
        RateFunctional::BitshapedBmd => bitshaped_search(m, power, cfg).rate,
        RateFunctional::UniformBmd | RateFunctional::UniformSgmi => {
            let d = JointDistribution::uniform(m);
            let delta = delta_for_power(m, &d, power).unwrap();
            let ch = awgn_at(m, delta, cfg.nodes_per_unit);
            match functional {
                RateFunctional::UniformBmd => channel_stats(&ch, &d).bitwise_mi_sum(),
                _ => rate_sgmi(&ch, &d).rate,
            }
        }
    }
}

/// SNR bisection bracket and termination.
const SNR_LO_DB: f64 = -10.0;
const SNR_HI_DB: f64 = 60.0;
const SNR_MAX_ITERS: usize = 80;
const RATE_TOL: f64 = 1e-6;

/// Finds the SNR in dB at which a functional reaches `target` bits per
/// channel use, by bisection on the transmit power over [−10, 60] dB.
/// Returns `10·log10 E[(Δ·x_B)²]`; the power constraint is met with
/// equality, so this is the bisected power itself.
///
/// The bracket endpoints are never evaluated directly; when the bisection
/// collapses onto an endpoint without reaching the target, the target is
/// unreachable inside the bracket.
pub fn snr_at_rate<F: Scalar>(
    functional: RateFunctional,
    m: usize,
    target: F,
    cfg: &OptimizeConfig,
) -> Result<F> {
    assert!(
        target > F::zero() && target < F::from_usize(m).unwrap(),
        "target rate must lie in (0, m)"
    );
    let rate_at = |snr_db: F| {
        let power = F::of(10.0).powf(snr_db / F::of(10.0));
        evaluate_functional(functional, m, power, cfg)
    };
    let mut lo = F::of(SNR_LO_DB);
    let mut hi = F::of(SNR_HI_DB);
    let tol = F::of(RATE_TOL);
    for _ in 0..SNR_MAX_ITERS {
        let mid = (lo + hi) / F::of(2.0);
        let r = rate_at(mid);
        if (r - target).abs() <= tol {
            return Ok(mid);
        }
        if r < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= F::of(1e-9) {
            break;
        }
    }
    if hi >= F::of(SNR_HI_DB - 1e-6) {
        return Err(Error::TargetRateUnreachable {
            target: target.to_f64().unwrap_or(f64::NAN),
            reason: format!("{functional} stays below target up to the 60 dB cap"),
        });
    }
    if lo <= F::of(SNR_LO_DB + 1e-6) {
        return Err(Error::TargetRateUnreachable {
            target: target.to_f64().unwrap_or(f64::NAN),
            reason: format!("{functional} already exceeds target at -10 dB"),
        });
    }
    Ok((lo + hi) / F::of(2.0))
}

/// SNR gap in dB between two functionals at a common target rate:
/// `snr_at_rate(b) − snr_at_rate(a)`.
pub fn gap_db<F: Scalar>(
    a: RateFunctional,
    b: RateFunctional,
    m: usize,
    target: F,
    cfg: &OptimizeConfig,
) -> Result<F> {
    let snr_a = snr_at_rate(a, m, target, cfg)?;
    let snr_b = snr_at_rate(b, m, target, cfg)?;
    Ok(snr_b - snr_a)
}
