//! Achievable information rates for bit-metric decoding.
//!
//! This crate computes the rate functionals of coded modulation with binary
//! labels — mutual information, the bit-metric decoding rate
//! `H(B) − Σ_i H(B_i|Y)`, its mismatched-decoding relatives (the
//! generalized mutual information of the bit-metric and the reweighted
//! achievable-rate instance) — on finite-output discrete channels and on the
//! AWGN channel with Gray-labeled bipolar ASK. On top of the functionals sit
//! input-distribution optimizers (Maxwell–Boltzmann capacity search,
//! bit-shaped search over product inputs), SNR-gap readout at a target rate,
//! and a Monte Carlo simulator of the random-coding experiment.
//!
//! The numerics are generic over the floating-point scalar through
//! [`Scalar`]; `f64` is the default for every type and the intended
//! production precision, with `f32` available through the `*32` aliases.

pub mod channel;
pub mod constellation;
pub mod dist;
pub mod error;
pub mod optimize;
pub mod quad;
pub mod rates;
pub mod simulate;

mod scalar;
mod util;

pub use channel::{
    bit_conditional_density, log_bit_conditional_density, AwgnChannel, Channel, DiscreteChannel,
    OutputPoint,
};
pub use constellation::{delta_for_power, Constellation};
pub use dist::{bit_level, maxwell_boltzmann, BitMarginal, JointDistribution};
pub use error::{Error, Result};
pub use optimize::{
    bitshaped_search, capacity_mb, evaluate_functional, gap_db, snr_at_rate, OperatingPoint,
    OptimizeConfig, RateFunctional,
};
pub use quad::{make_quadrature, QuadratureRule, DEFAULT_NODES_PER_UNIT};
pub use rates::{
    bit_conditional_entropy, bitwise_mi_sum, mutual_information, output_entropy,
    per_bit_mutual_information, q_bmd, rate_bmd, rate_bmd_independent, rate_generic,
    rate_lm_instance, rate_report, rate_sgmi, BmdMetric, BmdRate, MatchedMetric, Metric,
    RateReport, SgmiRate,
};
pub use scalar::Scalar;
pub use simulate::{
    rate_sweep, run_sim, run_sim_trials, sweep_csv_header, DecoderKind, SimChannel, SimConfig,
    SimResult, SweepRow, TrialOutcome,
};

/// Single-precision aliases; the unsuffixed names default to `f64`.
pub type JointDistribution32 = dist::JointDistribution<f32>;
pub type BitMarginal32 = dist::BitMarginal<f32>;
pub type Constellation32 = constellation::Constellation<f32>;
pub type AwgnChannel32 = channel::AwgnChannel<f32>;
pub type DiscreteChannel32 = channel::DiscreteChannel<f32>;
pub type QuadratureRule32 = quad::QuadratureRule<f32>;
pub type RateReport32 = rates::RateReport<f32>;
pub type OperatingPoint32 = optimize::OperatingPoint<f32>;

/// Numeric output formatting shared by the library's file emitters and the
/// command-line front-end.
pub mod fmt {
    /// Formats with nine significant digits in plain decimal notation.
    pub fn sig9(x: f64) -> String {
        if !x.is_finite() {
            return format!("{x}");
        }
        if x == 0.0 {
            return "0.00000000".to_string();
        }
        let mag = x.abs().log10().floor() as i32;
        let decimals = (8 - mag).max(0) as usize;
        format!("{x:.decimals$}")
    }

}
