//! Monte Carlo validation of achievability at toy scale: random codebooks
//! drawn iid from the input distribution, transmission over a channel, and
//! decoding with either the matched likelihood or the product bit-metric.
//!
//! A frame error is counted when the decoded codeword differs from the
//! transmitted one as a symbol sequence; ties between identical codewords
//! therefore never count as errors, matching the random tie-breaking of the
//! decision rule.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::channel::{AwgnChannel, DiscreteChannel};
use crate::dist::{bit_level, JointDistribution};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::util::{logsumexp, splitmix64};

/// Decoder driven by the simulator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecoderKind {
    /// Product of per-bit-level metrics.
    BitMetric,
    /// Matched maximum-likelihood decoding.
    MatchedMl,
}

impl std::str::FromStr for DecoderKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bit-metric" => Ok(DecoderKind::BitMetric),
            "matched-ml" => Ok(DecoderKind::MatchedMl),
            other => Err(Error::Parse(format!("unknown decoder `{other}`"))),
        }
    }
}

/// One simulation setup.
#[derive(Debug, Clone)]
pub struct SimConfig<F: Scalar = f64> {
    /// Block length n.
    pub block_length: usize,
    /// Code rate in bits per channel use; the codebook holds
    /// `2^ceil(n·rate)` words.
    pub rate: F,
    pub trials: usize,
    pub seed: u64,
    pub decoder: DecoderKind,
}

/// Aggregated simulation outcome.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimResult<F: Scalar = f64> {
    pub trials: usize,
    pub errors: usize,
    pub frame_error_rate: F,
    /// Trials whose decision involved a random tie-break.
    pub ties_broken: usize,
}

/// Outcome of a single trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialOutcome {
    pub error: bool,
    pub tie_broken: bool,
}

/// Channel interface for the simulator: sampling plus pointwise likelihoods.
pub trait SimChannel<F: Scalar>: Sync {
    type Output: Copy + Send + Sync;

    /// Bits per input label.
    fn input_bits(&self) -> usize;

    /// Draws one channel output for the given input label.
    fn sample_output<R: Rng + ?Sized>(&self, label: usize, rng: &mut R) -> Self::Output;

    /// `ln p(y | label)`; −∞ where the transition probability vanishes.
    fn log_likelihood_sample(&self, y: &Self::Output, label: usize) -> F;
}

impl<F: Scalar> SimChannel<F> for AwgnChannel<F> {
    type Output = F;

    fn input_bits(&self) -> usize {
        self.constellation().m()
    }

    fn sample_output<R: Rng + ?Sized>(&self, label: usize, rng: &mut R) -> F {
        let z: f64 = StandardNormal.sample(rng);
        self.constellation().point(label) + F::of(z)
    }

    fn log_likelihood_sample(&self, y: &F, label: usize) -> F {
        self.log_conditional_density(*y, label)
    }
}

impl<F: Scalar> SimChannel<F> for DiscreteChannel<F> {
    type Output = usize;

    fn input_bits(&self) -> usize {
        self.m()
    }

    fn sample_output<R: Rng + ?Sized>(&self, label: usize, rng: &mut R) -> usize {
        let u = F::of(rng.random::<f64>());
        let row = self.row(label);
        let mut acc = F::zero();
        for (y, &p) in row.iter().enumerate() {
            acc += p;
            if u < acc {
                return y;
            }
        }
        row.len() - 1
    }

    fn log_likelihood_sample(&self, y: &usize, label: usize) -> F {
        let p = self.transition(label, *y);
        if p > F::zero() {
            p.ln()
        } else {
            F::neg_infinity()
        }
    }
}

/// Codebook exponent `ceil(n·rate)`, capped at 2^20 codewords.
fn codebook_exponent<F: Scalar>(n: usize, rate: F) -> Result<u32> {
    let nr = (F::from_usize(n).unwrap() * rate).to_f64().unwrap_or(f64::NAN);
    assert!(nr.is_finite() && nr >= 0.0, "rate must be non-negative");
    let k = (nr - 1e-9).ceil().max(0.0) as u32;
    if k > 20 {
        return Err(Error::CodebookTooLarge { exponent: k });
    }
    Ok(k)
}

/// Precomputed input-distribution tables shared across trials.
struct SimContext<F: Scalar> {
    m: usize,
    labels: usize,
    cdf: Vec<F>,
    /// Uniform inputs take a bit-peeling fast path through the codebook fill.
    uniform: bool,
    ln_d: Vec<F>,
    /// ln P(B_i = bv), −∞ off the marginal support
    ln_marg: Vec<[F; 2]>,
    supp: Vec<usize>,
}

impl<F: Scalar> SimContext<F> {
    fn new(m: usize, d: &JointDistribution<F>) -> Self {
        let labels = d.num_labels();
        let mut cdf = Vec::with_capacity(labels);
        let mut acc = F::zero();
        for b in 0..labels {
            acc += d.prob(b);
            cdf.push(acc);
        }
        let uniform = (0..labels).all(|b| d.prob(b) == d.prob(0));
        let ln_d = (0..labels)
            .map(|b| {
                if d.prob(b) >= F::support_eps() {
                    d.prob(b).ln()
                } else {
                    F::neg_infinity()
                }
            })
            .collect();
        let ln_marg = d
            .marginals()
            .iter()
            .map(|marg| {
                let f = |p: F| {
                    if p >= F::support_eps() {
                        p.ln()
                    } else {
                        F::neg_infinity()
                    }
                };
                [f(marg.p0), f(marg.p1)]
            })
            .collect();
        Self {
            m,
            labels,
            cdf,
            uniform,
            ln_d,
            ln_marg,
            supp: d.support().collect(),
        }
    }

    fn sample_label<R: Rng + ?Sized>(&self, rng: &mut R) -> u8 {
        let u = F::of(rng.random::<f64>());
        for (b, &c) in self.cdf.iter().enumerate() {
            if u < c {
                return b as u8;
            }
        }
        (self.labels - 1) as u8
    }

    fn fill_labels<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [u8]) {
        if self.uniform {
            let bits = self.m as u32;
            let mask = (1u64 << bits) - 1;
            let mut buf = 0u64;
            let mut avail = 0u32;
            for slot in out.iter_mut() {
                if avail < bits {
                    buf = rng.random::<u64>();
                    avail = 64;
                }
                *slot = (buf & mask) as u8;
                buf >>= bits;
                avail -= bits;
            }
        } else {
            for slot in out.iter_mut() {
                *slot = self.sample_label(rng);
            }
        }
    }

    /// Per-label decoding scores at one received symbol.
    fn symbol_scores<C: SimChannel<F>>(
        &self,
        ch: &C,
        y: &C::Output,
        decoder: DecoderKind,
        out: &mut [F],
    ) {
        match decoder {
            DecoderKind::MatchedMl => {
                for (label, slot) in out.iter_mut().enumerate() {
                    *slot = ch.log_likelihood_sample(y, label);
                }
            }
            DecoderKind::BitMetric => {
                let ll: Vec<F> = (0..self.labels)
                    .map(|a| ch.log_likelihood_sample(y, a))
                    .collect();
                // ln p(y | B_i = bv) from the label mixture
                let mut lcond = vec![[F::neg_infinity(); 2]; self.m];
                for (i, cond) in lcond.iter_mut().enumerate() {
                    for (bv, slot) in cond.iter_mut().enumerate() {
                        if !self.ln_marg[i][bv].is_finite() {
                            continue;
                        }
                        let lse = logsumexp(
                            self.supp
                                .iter()
                                .filter(|&&a| bit_level(a, i + 1, self.m) == bv)
                                .map(|&a| self.ln_d[a] + ll[a]),
                        );
                        *slot = lse - self.ln_marg[i][bv];
                    }
                }
                for (label, slot) in out.iter_mut().enumerate() {
                    let mut acc = F::zero();
                    for (i, cond) in lcond.iter().enumerate() {
                        acc += cond[bit_level(label, i + 1, self.m)];
                    }
                    *slot = acc;
                }
            }
        }
    }
}

fn simulate_one<F: Scalar, C: SimChannel<F>>(
    ch: &C,
    ctx: &SimContext<F>,
    cfg: &SimConfig<F>,
    msg_count: usize,
    trial: u64,
) -> TrialOutcome {
    let n = cfg.block_length;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(trial + 1);

    // fresh codebook per trial, iid from the input distribution
    let mut codebook = vec![0u8; msg_count * n];
    ctx.fill_labels(&mut rng, &mut codebook);
    let w = rng.random_range(0..msg_count);
    let tx = codebook[w * n..(w + 1) * n].to_vec();

    let received: Vec<C::Output> = tx
        .iter()
        .map(|&s| ch.sample_output(s as usize, &mut rng))
        .collect();

    // per-symbol score table, then codeword scores
    let mut table = vec![F::zero(); n * ctx.labels];
    for (t, y) in received.iter().enumerate() {
        ctx.symbol_scores(ch, y, cfg.decoder, &mut table[t * ctx.labels..(t + 1) * ctx.labels]);
    }

    let mut best_score = F::neg_infinity();
    let mut ties: Vec<usize> = Vec::new();
    for c in 0..msg_count {
        let word = &codebook[c * n..(c + 1) * n];
        let mut score = F::zero();
        for (t, &s) in word.iter().enumerate() {
            score += table[t * ctx.labels + s as usize];
        }
        if score > best_score {
            best_score = score;
            ties.clear();
            ties.push(c);
        } else if score == best_score {
            ties.push(c);
        }
    }
    let tie_broken = ties.len() > 1;
    let picked = if tie_broken {
        ties[rng.random_range(0..ties.len())]
    } else {
        ties[0]
    };
    let decoded = &codebook[picked * n..(picked + 1) * n];
    TrialOutcome {
        error: decoded != tx.as_slice(),
        tie_broken,
    }
}

/// Runs the simulation and returns every trial outcome. Trials derive
/// independent random streams from the master seed, so parallel execution is
/// deterministic.
pub fn run_sim_trials<F: Scalar, C: SimChannel<F>>(
    ch: &C,
    d: &JointDistribution<F>,
    cfg: &SimConfig<F>,
) -> Result<Vec<TrialOutcome>> {
    assert!(cfg.block_length >= 1, "block length must be at least 1");
    assert_eq!(
        d.m(),
        ch.input_bits(),
        "distribution and channel dimension mismatch"
    );
    let k = codebook_exponent(cfg.block_length, cfg.rate)?;
    let msg_count = 1usize << k;
    let ctx = SimContext::new(ch.input_bits(), d);
    Ok((0..cfg.trials as u64)
        .into_par_iter()
        .map(|t| simulate_one(ch, &ctx, cfg, msg_count, t))
        .collect())
}

/// Runs the simulation and aggregates the frame-error rate.
pub fn run_sim<F: Scalar, C: SimChannel<F>>(
    ch: &C,
    d: &JointDistribution<F>,
    cfg: &SimConfig<F>,
) -> Result<SimResult<F>> {
    let outcomes = run_sim_trials(ch, d, cfg)?;
    let errors = outcomes.iter().filter(|o| o.error).count();
    let ties_broken = outcomes.iter().filter(|o| o.tie_broken).count();
    let fer = if cfg.trials == 0 {
        F::zero()
    } else {
        F::from_usize(errors).unwrap() / F::from_usize(cfg.trials).unwrap()
    };
    Ok(SimResult {
        trials: cfg.trials,
        errors,
        frame_error_rate: fer,
        ties_broken,
    })
}

/// One cell of a rate sweep.
#[derive(Debug, Clone)]
pub struct SweepRow<F: Scalar = f64> {
    pub block_length: usize,
    pub rate: F,
    pub result: SimResult<F>,
}

impl<F: Scalar> SweepRow<F> {
    /// CSV row matching [`sweep_csv_header`].
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.block_length,
            crate::fmt::sig9(self.rate.to_f64().unwrap_or(f64::NAN)),
            self.result.trials,
            self.result.errors,
            crate::fmt::sig9(self.result.frame_error_rate.to_f64().unwrap_or(f64::NAN)),
            self.result.ties_broken,
        )
    }
}

/// Header of the sweep CSV schema.
pub fn sweep_csv_header() -> &'static str {
    "n,rate,trials,errors,fer,ties"
}

/// Grid of simulations over block lengths and rates. Every cell derives its
/// own seed from the master seed, so the table is deterministic regardless
/// of execution order. `trials = 0` yields an empty table.
pub fn rate_sweep<F: Scalar, C: SimChannel<F>>(
    ch: &C,
    d: &JointDistribution<F>,
    n_list: &[usize],
    rate_list: &[F],
    trials: usize,
    seed: u64,
    decoder: DecoderKind,
) -> Result<Vec<SweepRow<F>>> {
    if trials == 0 {
        return Ok(Vec::new());
    }
    let mut rows = Vec::with_capacity(n_list.len() * rate_list.len());
    let mut cell = 0u64;
    for &n in n_list {
        for &rate in rate_list {
            let cfg = SimConfig {
                block_length: n,
                rate,
                trials,
                seed: splitmix64(seed.wrapping_add(cell)),
                decoder,
            };
            rows.push(SweepRow {
                block_length: n,
                rate,
                result: run_sim(ch, d, &cfg)?,
            });
            cell += 1;
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constellation::Constellation;

    fn dependent_pair() -> JointDistribution<f64> {
        JointDistribution::new(2, vec![0.0, 0.5, 0.5, 0.0]).unwrap()
    }

    #[test]
    fn determinism_same_seed_same_result() {
        let ch = DiscreteChannel::<f64>::identity_2bit();
        let d = dependent_pair();
        let cfg = SimConfig {
            block_length: 8,
            rate: 0.5,
            trials: 200,
            seed: 42,
            decoder: DecoderKind::BitMetric,
        };
        let a = run_sim(&ch, &d, &cfg).unwrap();
        let b = run_sim(&ch, &d, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn identity_channel_below_rate_never_errs() {
        // distinct codewords are always recovered on the identity channel;
        // ties only occur between identical codewords and never err under
        // the sequence-level error count
        let ch = DiscreteChannel::<f64>::identity_2bit();
        let d = dependent_pair();
        let cfg = SimConfig {
            block_length: 8,
            rate: 0.5,
            trials: 2000,
            seed: 3,
            decoder: DecoderKind::BitMetric,
        };
        let r = run_sim(&ch, &d, &cfg).unwrap();
        assert_eq!(r.errors, 0);
    }

    #[test]
    fn erase_all_channel_guesses_uniformly() {
        let ch = DiscreteChannel::<f64>::erase_all_2bit();
        let d = dependent_pair();
        let cfg = SimConfig {
            block_length: 16,
            rate: 0.5,
            trials: 3000,
            seed: 5,
            decoder: DecoderKind::BitMetric,
        };
        let r = run_sim(&ch, &d, &cfg).unwrap();
        let expected = 1.0 - 0.5f64.powi(8);
        assert!(
            (r.frame_error_rate - expected).abs() < 0.005,
            "fer {} vs {}",
            r.frame_error_rate,
            expected
        );
        // every trial scores all codewords equally
        assert_eq!(r.ties_broken, r.trials);
    }

    #[test]
    fn bpsk_decoders_agree_per_trial() {
        let c = Constellation::ask_brgc(1, 3.0).unwrap();
        let ch = AwgnChannel::new(c);
        let d = JointDistribution::uniform(1);
        let mut cfg = SimConfig {
            block_length: 16,
            rate: 0.5,
            trials: 500,
            seed: 11,
            decoder: DecoderKind::BitMetric,
        };
        let bm = run_sim_trials(&ch, &d, &cfg).unwrap();
        cfg.decoder = DecoderKind::MatchedMl;
        let ml = run_sim_trials(&ch, &d, &cfg).unwrap();
        assert_eq!(bm, ml);
    }

    #[test]
    fn codebook_cap_enforced() {
        let ch = DiscreteChannel::<f64>::identity_2bit();
        let d = dependent_pair();
        let cfg = SimConfig {
            block_length: 50,
            rate: 0.5,
            trials: 1,
            seed: 0,
            decoder: DecoderKind::BitMetric,
        };
        assert!(matches!(
            run_sim(&ch, &d, &cfg),
            Err(Error::CodebookTooLarge { .. })
        ));
    }

    #[test]
    fn codebook_exponent_rounds_up_without_float_fuzz() {
        assert_eq!(codebook_exponent(32, 0.5f64).unwrap(), 16);
        assert_eq!(codebook_exponent(32, 0.5000000001f64).unwrap(), 17);
        assert_eq!(codebook_exponent(10, 0.55f64).unwrap(), 6);
    }

    #[test]
    fn empty_sweep_for_zero_trials() {
        let ch = DiscreteChannel::<f64>::identity_2bit();
        let d = dependent_pair();
        let rows =
            rate_sweep(&ch, &d, &[8, 16], &[0.25, 0.5], 0, 1, DecoderKind::BitMetric).unwrap();
        assert!(rows.is_empty());
    }

    #[test]
    fn sweep_is_deterministic_and_ordered() {
        let ch = DiscreteChannel::<f64>::identity_2bit();
        let d = dependent_pair();
        let a = rate_sweep(&ch, &d, &[4, 8], &[0.25, 0.5], 50, 9, DecoderKind::BitMetric)
            .unwrap();
        let b = rate_sweep(&ch, &d, &[4, 8], &[0.25, 0.5], 50, 9, DecoderKind::BitMetric)
            .unwrap();
        assert_eq!(a.len(), 4);
        for (ra, rb) in a.iter().zip(&b) {
            assert_eq!(ra.result, rb.result);
            assert_eq!(ra.block_length, rb.block_length);
        }
        assert_eq!(a[0].block_length, 4);
        assert_eq!(a[3].block_length, 8);
    }

    #[test]
    fn sweep_error_rate_trends() {
        // two parallel BSC(0.25) pipes as a 4-ary channel
        let p = 0.25f64;
        let mut t = vec![0.0; 16];
        for b in 0..4usize {
            for y in 0..4usize {
                let flips = (b ^ y).count_ones();
                t[b * 4 + y] = p.powi(flips as i32) * (1.0 - p).powi(2 - flips as i32);
            }
        }
        let ch = DiscreteChannel::new(2, 4, t).unwrap();
        let d = JointDistribution::uniform(2);
        let raw = 0.3774; // H(B) − Σ H(B_i|Y) for this channel and input

        // below the rate vs above it at fixed n
        let rows = rate_sweep(
            &ch,
            &d,
            &[16],
            &[0.5 * raw, 1.5 * raw],
            10_000,
            21,
            DecoderKind::BitMetric,
        )
        .unwrap();
        assert!(
            rows[0].result.frame_error_rate < rows[1].result.frame_error_rate,
            "fer {} !< {}",
            rows[0].result.frame_error_rate,
            rows[1].result.frame_error_rate
        );

        // fixed rate 0.6·raw: error rate non-increasing in n within two
        // standard errors
        let rows = rate_sweep(
            &ch,
            &d,
            &[8, 16, 32],
            &[0.6 * raw],
            10_000,
            22,
            DecoderKind::BitMetric,
        )
        .unwrap();
        for pair in rows.windows(2) {
            let (a, b) = (&pair[0].result, &pair[1].result);
            let se = |r: &SimResult<f64>| {
                (r.frame_error_rate * (1.0 - r.frame_error_rate) / r.trials as f64).sqrt()
            };
            assert!(
                b.frame_error_rate <= a.frame_error_rate + 2.0 * (se(a) + se(b)),
                "fer rose from {} (n={}) to {} (n={})",
                a.frame_error_rate,
                pair[0].block_length,
                b.frame_error_rate,
                pair[1].block_length
            );
        }
    }

    #[test]
    fn csv_row_schema() {
        let row = SweepRow {
            block_length: 8,
            rate: 0.5f64,
            result: SimResult {
                trials: 100,
                errors: 7,
                frame_error_rate: 0.07,
                ties_broken: 3,
            },
        };
        assert_eq!(sweep_csv_header(), "n,rate,trials,errors,fer,ties");
        assert_eq!(row.csv_row(), "8,0.500000000,100,7,0.0700000000,3");
    }
}
