//! Subcommand implementations.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use bmdrate::fmt::sig9;
use bmdrate::{
    bitshaped_search, bitwise_mi_sum, capacity_mb, delta_for_power, rate_bmd, rate_lm_instance,
    rate_sgmi, rate_sweep, snr_at_rate, AwgnChannel, Constellation, DecoderKind, DiscreteChannel,
    JointDistribution, OptimizeConfig, RateFunctional, DEFAULT_NODES_PER_UNIT,
};
use clap::Args;
use rayon::prelude::*;

use crate::config::Config;

const ALL_RATES: &str = "capacity,shaped-bmd,sgmi,bitshaped-bmd,uniform-bmd,uniform-sgmi";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum OutputFormat {
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => bail!("unknown format `{other}` (expected csv or json)"),
        }
    }
}

fn write_output(path: Option<&Path>, content: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, content)
            .with_context(|| format!("writing output file {}", p.display())),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

/// Parses a comma-separated rate set; the result follows the canonical
/// column order regardless of how the request was spelled.
fn parse_rate_set(text: &str) -> Result<Vec<RateFunctional>> {
    let mut requested = Vec::new();
    for token in text.split(',') {
        let token = token.trim();
        if token.is_empty() {
            continue;
        }
        let f: RateFunctional = token.parse()?;
        if !requested.contains(&f) {
            requested.push(f);
        }
    }
    if requested.is_empty() {
        bail!("rate set must not be empty");
    }
    Ok(RateFunctional::ALL
        .into_iter()
        .filter(|f| requested.contains(f))
        .collect())
}

fn parse_usize_list(text: &str) -> Result<Vec<usize>> {
    text.split(',')
        .map(|t| t.trim())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<usize>().with_context(|| format!("bad integer `{t}`")))
        .collect()
}

fn parse_f64_list(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|t| t.trim())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().with_context(|| format!("bad number `{t}`")))
        .collect()
}

fn column_name(f: RateFunctional) -> String {
    f.name().replace('-', "_")
}

/// Rounds to the 9 significant digits the text output carries.
fn sig9_value(x: f64) -> f64 {
    sig9(x).parse().unwrap_or(x)
}

fn validate_m(m: usize) -> Result<()> {
    if !(1..=8).contains(&m) {
        bail!("m must lie in 1..=8, got {m}");
    }
    Ok(())
}

// ---------------------------------------------------------------- rate-curve

#[derive(Args, Debug)]
pub struct RateCurveArgs {
    /// Bits per symbol (2^m-ASK)
    #[arg(long)]
    m: Option<usize>,
    #[arg(long = "snr-min")]
    snr_min: Option<f64>,
    #[arg(long = "snr-max")]
    snr_max: Option<f64>,
    #[arg(long = "snr-step")]
    snr_step: Option<f64>,
    /// Comma-separated subset of: capacity, shaped-bmd, sgmi, bitshaped-bmd,
    /// uniform-bmd, uniform-sgmi
    #[arg(long)]
    rates: Option<String>,
    /// Quadrature nodes per unit length
    #[arg(long = "quad-nodes")]
    quad_nodes: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv or json
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Random restarts of the bit-shaped search
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long)]
    config: Option<PathBuf>,
}

/// Rates of the requested functionals at one SNR point, sharing the
/// capacity-optimal and uniform operating points across columns.
fn evaluate_row(
    m: usize,
    snr_db: f64,
    set: &[RateFunctional],
    cfg: &OptimizeConfig,
) -> Vec<f64> {
    let power = 10f64.powf(snr_db / 10.0);
    let needs_cap = set.iter().any(|f| {
        matches!(
            f,
            RateFunctional::Capacity | RateFunctional::ShapedBmd | RateFunctional::Sgmi
        )
    });
    let cap = needs_cap.then(|| {
        let op = capacity_mb(m, power, cfg.nodes_per_unit);
        let ch = AwgnChannel::with_nodes_per_unit(
            Constellation::ask_brgc(m, op.delta).unwrap(),
            cfg.nodes_per_unit,
        );
        (op, ch)
    });
    let needs_uniform = set.iter().any(|f| {
        matches!(
            f,
            RateFunctional::UniformBmd | RateFunctional::UniformSgmi
        )
    });
    let uniform = needs_uniform.then(|| {
        let d = JointDistribution::uniform(m);
        let delta = delta_for_power(m, &d, power).unwrap();
        let ch = AwgnChannel::with_nodes_per_unit(
            Constellation::ask_brgc(m, delta).unwrap(),
            cfg.nodes_per_unit,
        );
        (d, ch)
    });

    set.iter()
        .map(|f| match f {
            RateFunctional::Capacity => cap.as_ref().unwrap().0.rate,
            RateFunctional::ShapedBmd => {
                let (op, ch) = cap.as_ref().unwrap();
                rate_bmd(ch, &op.distribution).clipped
            }
            RateFunctional::Sgmi => {
                let (op, ch) = cap.as_ref().unwrap();
                rate_sgmi(ch, &op.distribution).rate
            }
            RateFunctional::BitshapedBmd => bitshaped_search(m, power, cfg).rate,
            RateFunctional::UniformBmd => {
                let (d, ch) = uniform.as_ref().unwrap();
                bitwise_mi_sum(ch, d)
            }
            RateFunctional::UniformSgmi => {
                let (d, ch) = uniform.as_ref().unwrap();
                rate_sgmi(ch, d).rate
            }
        })
        .collect()
}

pub fn run_rate_curve(args: RateCurveArgs) -> Result<bool> {
    let cfg = Config::load(args.config.as_deref())?;
    let m: usize = cfg.resolve_required(args.m, "m")?;
    validate_m(m)?;
    let snr_min: f64 = cfg.resolve_required(args.snr_min, "snr-min")?;
    let snr_max: f64 = cfg.resolve_required(args.snr_max, "snr-max")?;
    let snr_step: f64 = cfg.resolve_required(args.snr_step, "snr-step")?;
    if snr_step <= 0.0 {
        bail!("snr-step must be positive");
    }
    if snr_max < snr_min {
        bail!("snr-max must be at least snr-min");
    }
    let rates_text: String = cfg.resolve(args.rates, "rates", ALL_RATES.to_string())?;
    let set = parse_rate_set(&rates_text)?;
    let quad_nodes: usize = cfg.resolve(args.quad_nodes, "quad-nodes", DEFAULT_NODES_PER_UNIT)?;
    let seed: u64 = cfg.resolve(args.seed, "seed", 0)?;
    let restarts: usize = cfg.resolve(args.restarts, "restarts", 8)?;
    let format: OutputFormat = cfg.resolve(
        args.format.map(|s| s.parse()).transpose()?,
        "format",
        OutputFormat::Csv,
    )?;
    let out = cfg.resolve_opt(args.out, "out")?;

    let opt_cfg = OptimizeConfig {
        nodes_per_unit: quad_nodes,
        restarts,
        seed,
        free_sign_bit: false,
    };

    let mut grid = Vec::new();
    let mut k = 0usize;
    loop {
        let snr = snr_min + snr_step * k as f64;
        if snr > snr_max + 1e-9 {
            break;
        }
        grid.push(snr);
        k += 1;
    }

    let rows: Vec<Vec<f64>> = grid
        .par_iter()
        .map(|&snr| evaluate_row(m, snr, &set, &opt_cfg))
        .collect();

    let content = match format {
        OutputFormat::Csv => {
            let mut text = String::from("snr_db");
            for f in &set {
                text.push(',');
                text.push_str(&column_name(*f));
            }
            text.push('\n');
            for (snr, row) in grid.iter().zip(&rows) {
                text.push_str(&sig9(*snr));
                for v in row {
                    text.push(',');
                    text.push_str(&sig9(*v));
                }
                text.push('\n');
            }
            text
        }
        OutputFormat::Json => {
            let mut arr = Vec::new();
            for (snr, row) in grid.iter().zip(&rows) {
                let mut obj = serde_json::Map::new();
                obj.insert("snr_db".into(), serde_json::json!(sig9_value(*snr)));
                for (f, v) in set.iter().zip(row) {
                    obj.insert(column_name(*f), serde_json::json!(sig9_value(*v)));
                }
                arr.push(serde_json::Value::Object(obj));
            }
            format!("{}\n", serde_json::to_string_pretty(&arr)?)
        }
    };
    write_output(out.as_deref(), &content)?;
    Ok(true)
}

// ----------------------------------------------------------------------- gap

#[derive(Args, Debug)]
pub struct GapArgs {
    #[arg(long)]
    m: Option<usize>,
    #[arg(long = "target-rate")]
    target_rate: Option<f64>,
    /// Functionals to read out (capacity is always computed as reference)
    #[arg(long)]
    rates: Option<String>,
    #[arg(long = "quad-nodes")]
    quad_nodes: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long)]
    config: Option<PathBuf>,
}

pub fn run_gap(args: GapArgs) -> Result<bool> {
    let cfg = Config::load(args.config.as_deref())?;
    let m: usize = cfg.resolve_required(args.m, "m")?;
    validate_m(m)?;
    let target: f64 = cfg.resolve_required(args.target_rate, "target-rate")?;
    if target <= 0.0 || target >= m as f64 {
        bail!("target-rate must lie strictly between 0 and m = {m}");
    }
    let rates_text: String = cfg.resolve(args.rates, "rates", ALL_RATES.to_string())?;
    let set = parse_rate_set(&rates_text)?;
    let quad_nodes: usize = cfg.resolve(args.quad_nodes, "quad-nodes", DEFAULT_NODES_PER_UNIT)?;
    let seed: u64 = cfg.resolve(args.seed, "seed", 0)?;
    let restarts: usize = cfg.resolve(args.restarts, "restarts", 8)?;
    let format: OutputFormat = cfg.resolve(
        args.format.map(|s| s.parse()).transpose()?,
        "format",
        OutputFormat::Csv,
    )?;
    let out = cfg.resolve_opt(args.out, "out")?;

    let opt_cfg = OptimizeConfig {
        nodes_per_unit: quad_nodes,
        restarts,
        seed,
        free_sign_bit: false,
    };

    let capacity_snr = snr_at_rate(RateFunctional::Capacity, m, target, &opt_cfg)
        .context("capacity reference")?;
    let mut entries = Vec::new();
    for f in &set {
        let snr = if *f == RateFunctional::Capacity {
            capacity_snr
        } else {
            snr_at_rate(*f, m, target, &opt_cfg).with_context(|| f.name().to_string())?
        };
        entries.push((*f, snr, snr - capacity_snr));
    }

    let content = match format {
        OutputFormat::Csv => {
            let mut text = String::from("functional,snr_db,gap_db_vs_capacity\n");
            for (f, snr, gap) in &entries {
                text.push_str(&format!("{},{},{}\n", f.name(), sig9(*snr), sig9(*gap)));
            }
            text
        }
        OutputFormat::Json => {
            let mut obj = serde_json::Map::new();
            obj.insert("m".into(), serde_json::json!(m));
            obj.insert("target_rate".into(), serde_json::json!(target));
            obj.insert(
                "capacity_snr_db".into(),
                serde_json::json!(sig9_value(capacity_snr)),
            );
            let mut arr = Vec::new();
            for (f, snr, gap) in &entries {
                let mut e = serde_json::Map::new();
                e.insert("functional".into(), serde_json::json!(f.name()));
                e.insert("snr_db".into(), serde_json::json!(sig9_value(*snr)));
                e.insert(
                    "gap_db_vs_capacity".into(),
                    serde_json::json!(sig9_value(*gap)),
                );
                arr.push(serde_json::Value::Object(e));
            }
            obj.insert("entries".into(), serde_json::Value::Array(arr));
            format!("{}\n", serde_json::to_string_pretty(&obj)?)
        }
    };
    write_output(out.as_deref(), &content)?;
    Ok(true)
}

// ------------------------------------------------------------------ examples

#[derive(Args, Debug)]
pub struct ExamplesArgs {
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

pub fn run_examples(args: ExamplesArgs) -> Result<bool> {
    let cfg = Config::load(args.config.as_deref())?;
    let out = cfg.resolve_opt(args.out, "out")?;

    let dependent = JointDistribution::new(2, vec![0.0, 0.5, 0.5, 0.0]).unwrap();
    let point_product = JointDistribution::<f64>::point_mass(2, 0b01);
    let identity = DiscreteChannel::<f64>::identity_2bit();
    let erase_all = DiscreteChannel::<f64>::erase_all_2bit();

    // (case, channel, input, expected raw, expected clipped, expected lm)
    let cases: [(&str, &DiscreteChannel, &JointDistribution, f64, f64, f64); 4] = [
        ("identity + dependent", &identity, &dependent, 1.0, 1.0, 1.0),
        (
            "identity + product-masses",
            &identity,
            &point_product,
            0.0,
            0.0,
            0.0,
        ),
        ("erase-all + dependent", &erase_all, &dependent, -1.0, 0.0, 0.0),
        (
            "erase-all + product-masses",
            &erase_all,
            &point_product,
            0.0,
            0.0,
            0.0,
        ),
    ];

    let tol = 1e-9;
    let mut all_ok = true;
    let mut text = String::new();
    for (name, ch, d, want_raw, want_clipped, want_lm) in cases {
        let r = rate_bmd(ch, d);
        let lm = rate_lm_instance(ch, d);
        let ok = (r.raw - want_raw).abs() <= tol
            && (r.clipped - want_clipped).abs() <= tol
            && (lm - want_lm).abs() <= tol;
        all_ok &= ok;
        text.push_str(&format!(
            "{name}: raw={} clipped={} lm={} expected raw={} clipped={} lm={} [{}]\n",
            sig9(r.raw),
            sig9(r.clipped),
            sig9(lm),
            sig9(want_raw),
            sig9(want_clipped),
            sig9(want_lm),
            if ok { "ok" } else { "MISMATCH" },
        ));
    }
    write_output(out.as_deref(), &text)?;
    Ok(all_ok)
}

// ------------------------------------------------------------------ optimize

#[derive(Args, Debug)]
pub struct OptimizeArgs {
    #[arg(long)]
    m: Option<usize>,
    /// Operating SNR in dB (transmit power in dB over unit noise)
    #[arg(long = "snr-db")]
    snr_db: Option<f64>,
    /// capacity or bitshaped-bmd
    #[arg(long)]
    functional: Option<String>,
    #[arg(long = "quad-nodes")]
    quad_nodes: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    restarts: Option<usize>,
    /// Also optimize the sign-bit probability in the bit-shaped search
    #[arg(long = "free-sign-bit")]
    free_sign_bit: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    config: Option<PathBuf>,
}

pub fn run_optimize(args: OptimizeArgs) -> Result<bool> {
    let cfg = Config::load(args.config.as_deref())?;
    let m: usize = cfg.resolve_required(args.m, "m")?;
    validate_m(m)?;
    let snr_db: f64 = cfg.resolve_required(args.snr_db, "snr-db")?;
    let functional_text: String =
        cfg.resolve(args.functional, "functional", "capacity".to_string())?;
    let functional: RateFunctional = functional_text.parse()?;
    let quad_nodes: usize = cfg.resolve(args.quad_nodes, "quad-nodes", DEFAULT_NODES_PER_UNIT)?;
    let seed: u64 = cfg.resolve(args.seed, "seed", 0)?;
    let restarts: usize = cfg.resolve(args.restarts, "restarts", 8)?;
    let free_sign_bit: bool = cfg.resolve(
        args.free_sign_bit.then_some(true),
        "free-sign-bit",
        false,
    )?;
    let format: OutputFormat = cfg.resolve(
        args.format.map(|s| s.parse()).transpose()?,
        "format",
        OutputFormat::Csv,
    )?;
    let out = cfg.resolve_opt(args.out, "out")?;

    let opt_cfg = OptimizeConfig {
        nodes_per_unit: quad_nodes,
        restarts,
        seed,
        free_sign_bit,
    };
    let power = 10f64.powf(snr_db / 10.0);
    let op = match functional {
        RateFunctional::Capacity => capacity_mb(m, power, opt_cfg.nodes_per_unit),
        RateFunctional::BitshapedBmd => bitshaped_search(m, power, &opt_cfg),
        other => bail!("optimize supports capacity or bitshaped-bmd, got {other}"),
    };

    let content = match format {
        OutputFormat::Json => {
            let mut obj = serde_json::Map::new();
            obj.insert("functional".into(), serde_json::json!(op.functional.name()));
            obj.insert("snr_db".into(), serde_json::json!(sig9_value(snr_db)));
            obj.insert("power".into(), serde_json::json!(sig9_value(op.power)));
            obj.insert("delta".into(), serde_json::json!(sig9_value(op.delta)));
            obj.insert("rate".into(), serde_json::json!(sig9_value(op.rate)));
            let mut dist = serde_json::Map::new();
            for label in 0..op.distribution.num_labels() {
                dist.insert(
                    format!("{label:0m$b}"),
                    serde_json::json!(sig9_value(op.distribution.prob(label))),
                );
            }
            obj.insert("distribution".into(), serde_json::Value::Object(dist));
            format!("{}\n", serde_json::to_string_pretty(&obj)?)
        }
        // the text form doubles as a loadable distribution file
        OutputFormat::Csv => {
            let mut text = format!(
                "# functional = {}\n# snr_db = {}\n# delta = {}\n# rate = {}\n# label probability\n",
                op.functional.name(),
                sig9(snr_db),
                sig9(op.delta),
                sig9(op.rate),
            );
            for label in 0..op.distribution.num_labels() {
                text.push_str(&format!(
                    "{label:0m$b} {}\n",
                    sig9(op.distribution.prob(label))
                ));
            }
            text
        }
    };
    write_output(out.as_deref(), &content)?;
    Ok(true)
}

// ------------------------------------------------------------------ simulate

#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// Discrete channel file (`m K` header plus transition rows)
    #[arg(long = "channel-file")]
    channel_file: Option<PathBuf>,
    /// AWGN: bits per symbol (used with --snr-db when no channel file)
    #[arg(long)]
    m: Option<usize>,
    /// AWGN: operating SNR in dB
    #[arg(long = "snr-db")]
    snr_db: Option<f64>,
    /// Input distribution file; uniform when omitted
    #[arg(long = "dist-file")]
    dist_file: Option<PathBuf>,
    /// Comma-separated block lengths
    #[arg(long = "n-list")]
    n_list: Option<String>,
    /// Comma-separated code rates in bits per channel use
    #[arg(long = "rate-list")]
    rate_list: Option<String>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// bit-metric or matched-ml
    #[arg(long)]
    decoder: Option<String>,
    #[arg(long = "quad-nodes")]
    quad_nodes: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

pub fn run_simulate(args: SimulateArgs) -> Result<bool> {
    let cfg = Config::load(args.config.as_deref())?;
    let channel_file: Option<PathBuf> = cfg.resolve_opt(args.channel_file, "channel-file")?;
    let dist_file: Option<PathBuf> = cfg.resolve_opt(args.dist_file, "dist-file")?;
    let n_text: String = cfg.resolve_required(args.n_list, "n-list")?;
    let rate_text: String = cfg.resolve_required(args.rate_list, "rate-list")?;
    let trials: usize = cfg.resolve(args.trials, "trials", 1000)?;
    let seed: u64 = cfg.resolve(args.seed, "seed", 0)?;
    let decoder_text: String = cfg.resolve(args.decoder, "decoder", "bit-metric".to_string())?;
    let decoder: DecoderKind = decoder_text.parse()?;
    let quad_nodes: usize = cfg.resolve(args.quad_nodes, "quad-nodes", DEFAULT_NODES_PER_UNIT)?;
    let out = cfg.resolve_opt(args.out, "out")?;

    let n_list = parse_usize_list(&n_text)?;
    let rate_list = parse_f64_list(&rate_text)?;
    if n_list.is_empty() {
        bail!("n-list must not be empty");
    }
    if rate_list.is_empty() {
        bail!("rate-list must not be empty");
    }

    let load_dist = |m: usize| -> Result<JointDistribution> {
        match &dist_file {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading distribution file {}", path.display()))?;
                let d = JointDistribution::parse(&text)?;
                if d.m() != m {
                    bail!("distribution has m={}, channel has m={m}", d.m());
                }
                Ok(d)
            }
            None => Ok(JointDistribution::uniform(m)),
        }
    };

    let rows = match channel_file {
        Some(path) => {
            let text = std::fs::read_to_string(&path)
                .with_context(|| format!("reading channel file {}", path.display()))?;
            let ch = DiscreteChannel::<f64>::parse(&text)?;
            let d = load_dist(ch.m())?;
            rate_sweep(&ch, &d, &n_list, &rate_list, trials, seed, decoder)?
        }
        None => {
            let m: usize = cfg.resolve_required(args.m, "m")?;
            validate_m(m)?;
            let snr_db: f64 = cfg.resolve_required(args.snr_db, "snr-db")?;
            let d = load_dist(m)?;
            let power = 10f64.powf(snr_db / 10.0);
            let delta = delta_for_power(m, &d, power)?;
            let ch = AwgnChannel::with_nodes_per_unit(
                Constellation::ask_brgc(m, delta)?,
                quad_nodes,
            );
            rate_sweep(&ch, &d, &n_list, &rate_list, trials, seed, decoder)?
        }
    };

    let mut text = format!("{}\n", bmdrate::sweep_csv_header());
    for row in &rows {
        text.push_str(&row.csv_row());
        text.push('\n');
    }
    write_output(out.as_deref(), &text)?;
    Ok(true)
}
