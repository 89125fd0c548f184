//! Command-line surface for the spin-bath dynamics crate.
//!
//! Subcommands: `trace` (map coefficients), `rates` (canonical rates),
//! `nonmarkov` (q(t), trace distance, measures), `thermo` (entropy and
//! purity diagnostics), `verify` (invariant suites), `sweep` (parallel
//! parameter grid). Identical configuration and seed produce byte-identical
//! output files.

mod rows;
mod verify;

use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use spinbath::bath::{map_coefficients_cached, subspace_terms, BathParams};
use spinbath::channel::DensityMatrix;
use spinbath::error::Error as SpinError;
use spinbath::generator::{canonical_rates_from, uniform_grid};
use spinbath::nonmarkov::{
    blp_lower_bound, blp_p_from, rhp_measure, rhp_q, trace_distance, StatePair,
};
use spinbath::thermo::{thermo_sample_from, witness_phi};

use rows::{Flag, Format, NonmarkovRow, RatesRow, SweepRow, ThermoRow, TraceRow};

#[derive(Parser)]
#[command(
    name = "spinbath",
    about = "Exact reduced dynamics of a central spin-1/2 in an unpolarized spin bath",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Number of bath spins N
    #[arg(long, default_value_t = 20)]
    n_bath: u32,
    /// Coupling strength alpha (in units of omega0)
    #[arg(long, default_value_t = 0.03, allow_hyphen_values = true)]
    alpha: f64,
    /// Central-spin level splitting omega0 (sets the time unit)
    #[arg(long, default_value_t = 1.0)]
    omega0: f64,
    /// End of the time grid
    #[arg(long, default_value_t = 200.0)]
    t_max: f64,
    /// Grid step
    #[arg(long, default_value_t = 0.01)]
    dt: f64,
    /// Output file (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Seed for the randomized suites
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Map coefficients A, B, C over the time grid
    Trace(CommonArgs),
    /// Canonical rates (dissipation, absorption, dephasing, drive)
    Rates(CommonArgs),
    /// Divisibility and trace-distance non-Markovianity columns plus the
    /// eta/G summary and the BLP lower bound (summary JSON on stdout)
    Nonmarkov {
        #[command(flatten)]
        common: CommonArgs,
        /// State pair for the D(t), p(t) columns
        #[arg(long, default_value = "plus-minus")]
        pair: String,
    },
    /// Entropy production, purity, and their rates along one trajectory
    Thermo {
        #[command(flatten)]
        common: CommonArgs,
        /// Initial state: 0, 1, +, -, +i, -i, mixed, or "rx,ry,rz"
        #[arg(long, default_value = "1", allow_hyphen_values = true)]
        initial: String,
    },
    /// Machine-readable pass/fail report of all module invariant suites
    Verify(CommonArgs),
    /// One summary row per (alpha, N) cell, computed in parallel
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma-separated alpha values
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        sweep_alpha: Vec<f64>,
        /// Comma-separated N values
        #[arg(long, value_delimiter = ',')]
        sweep_n: Vec<u32>,
        /// Initial state for the entropy witness column
        #[arg(long, default_value = "1", allow_hyphen_values = true)]
        initial: String,
        /// Worker threads (library default when omitted)
        #[arg(long)]
        workers: Option<usize>,
    },
}

fn parse_initial(spec: &str) -> Result<DensityMatrix> {
    let named = match spec.trim() {
        "0" | "zero" | "ket0" => Some(DensityMatrix::ket0()),
        "1" | "one" | "ket1" => Some(DensityMatrix::ket1()),
        "+" | "plus" => Some(DensityMatrix::plus()),
        "-" | "minus" => Some(DensityMatrix::minus()),
        "+i" | "plus-i" => Some(DensityMatrix::plus_i()),
        "-i" | "minus-i" => Some(DensityMatrix::minus_i()),
        "mixed" | "maximally-mixed" => Some(DensityMatrix::maximally_mixed()),
        _ => None,
    };
    if let Some(state) = named {
        return Ok(state);
    }
    let parts: Vec<f64> = spec
        .split(',')
        .map(|x| x.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .with_context(|| format!("cannot parse initial state {spec:?}"))?;
    if parts.len() != 3 {
        bail!("Bloch vector needs three components, got {spec:?}");
    }
    DensityMatrix::from_bloch(parts[0], parts[1], parts[2]).map_err(|e| anyhow!(e))
}

fn parse_pair(spec: &str) -> Result<StatePair> {
    match spec.trim() {
        "plus-minus" | "pm" => Ok(StatePair::plus_minus()),
        "zero-one" | "01" => Ok(StatePair::zero_one()),
        "plus-minus-i" | "pmi" => Ok(StatePair::plus_minus_i()),
        other => bail!("unknown pair {other:?} (expected plus-minus, zero-one, or plus-minus-i)"),
    }
}

fn bath_params(common: &CommonArgs) -> Result<BathParams> {
    BathParams::new(common.n_bath, common.alpha, common.omega0).map_err(|e| anyhow!(e))
}

fn grid(common: &CommonArgs) -> Result<Vec<f64>> {
    uniform_grid(common.t_max, common.dt).map_err(|e| anyhow!(e))
}

fn run_trace(common: &CommonArgs) -> Result<()> {
    let params = bath_params(common)?;
    let terms = subspace_terms(&params);
    let rows: Vec<TraceRow> = grid(common)?
        .iter()
        .map(|&t| {
            let c = map_coefficients_cached(&params, &terms, t).map_err(|e| anyhow!(e))?;
            Ok(TraceRow {
                t,
                a: c.a,
                b: c.b,
                c_re: c.c.re,
                c_im: c.c.im,
                flag: Flag::Ok,
            })
        })
        .collect::<Result<_>>()?;
    rows::write_rows(common.out.as_deref(), common.format, &rows)
}

fn run_rates(common: &CommonArgs) -> Result<()> {
    let params = bath_params(common)?;
    let terms = subspace_terms(&params);
    let rows: Vec<RatesRow> = grid(common)?
        .iter()
        .map(|&t| {
            let c = map_coefficients_cached(&params, &terms, t).map_err(|e| anyhow!(e))?;
            Ok(match canonical_rates_from(&c, params.eps_degeneracy()) {
                Ok(r) => RatesRow {
                    t,
                    gamma_dis: Some(r.gamma_dis),
                    gamma_abs: Some(r.gamma_abs),
                    gamma_deph: Some(r.gamma_deph),
                    u: Some(r.u_rate),
                    flag: Flag::Ok,
                },
                Err(SpinError::SingularMap { .. }) => RatesRow {
                    t,
                    gamma_dis: None,
                    gamma_abs: None,
                    gamma_deph: None,
                    u: None,
                    flag: Flag::SingularMap,
                },
                Err(e) => return Err(anyhow!(e)),
            })
        })
        .collect::<Result<_>>()?;
    rows::write_rows(common.out.as_deref(), common.format, &rows)
}

#[derive(serde::Serialize)]
struct NonmarkovSummary {
    eta: f64,
    g_measure: f64,
    undefined_fraction: f64,
    blp_lower_bound: f64,
    pair: String,
}

fn run_nonmarkov(common: &CommonArgs, pair_spec: &str) -> Result<()> {
    let params = bath_params(common)?;
    let pair = parse_pair(pair_spec)?;
    let terms = subspace_terms(&params);
    let eps = params.eps_degeneracy();
    let rows: Vec<NonmarkovRow> = grid(common)?
        .iter()
        .map(|&t| {
            let c = map_coefficients_cached(&params, &terms, t).map_err(|e| anyhow!(e))?;
            let d = trace_distance(&c, &pair);
            let p = blp_p_from(&c, &pair, eps).ok();
            Ok(match canonical_rates_from(&c, eps) {
                Ok(r) => {
                    let q = rhp_q(&r);
                    NonmarkovRow {
                        t,
                        q_dis: Some(q.q_dis),
                        q_deph: Some(q.q_deph),
                        q: Some(q.q_total()),
                        d,
                        p,
                        flag: if p.is_some() {
                            Flag::Ok
                        } else {
                            Flag::SingularMap
                        },
                    }
                }
                Err(SpinError::SingularMap { .. }) => NonmarkovRow {
                    t,
                    q_dis: None,
                    q_deph: None,
                    q: None,
                    d,
                    p,
                    flag: Flag::SingularMap,
                },
                Err(e) => return Err(anyhow!(e)),
            })
        })
        .collect::<Result<_>>()?;
    rows::write_rows(common.out.as_deref(), common.format, &rows)?;

    let summary_measure = rhp_measure(&params, common.t_max, common.dt).map_err(|e| anyhow!(e))?;
    let mut pairs = StatePair::default_pairs();
    pairs.push(pair);
    let bound =
        blp_lower_bound(&params, &pairs, common.t_max, common.dt).map_err(|e| anyhow!(e))?;
    let summary = NonmarkovSummary {
        eta: summary_measure.eta,
        g_measure: summary_measure.g_measure,
        undefined_fraction: summary_measure.undefined_fraction,
        blp_lower_bound: bound,
        pair: pair_spec.to_string(),
    };
    let mut stdout = std::io::stdout();
    use std::io::Write;
    writeln!(stdout, "{}", serde_json::to_string(&summary)?)?;
    Ok(())
}

fn run_thermo(common: &CommonArgs, initial: &str) -> Result<()> {
    let params = bath_params(common)?;
    let rho0 = parse_initial(initial)?;
    let terms = subspace_terms(&params);
    let eps = params.eps_degeneracy();
    let rows: Vec<ThermoRow> = grid(common)?
        .iter()
        .map(|&t| {
            let c = map_coefficients_cached(&params, &terms, t).map_err(|e| anyhow!(e))?;
            let gamma_dis = canonical_rates_from(&c, eps).ok().map(|r| r.gamma_dis);
            Ok(match thermo_sample_from(&c, &rho0, eps) {
                Ok(s) => ThermoRow {
                    t,
                    gamma_dis,
                    entropy: s.entropy,
                    sigma: Some(s.sigma),
                    sigma_limit: None,
                    bloch_x: s.bloch_x,
                    purity: s.purity,
                    purity_rate: s.purity_rate,
                    flag: if gamma_dis.is_some() {
                        Flag::Ok
                    } else {
                        Flag::SingularMap
                    },
                },
                Err(SpinError::PureState { limit, .. }) => {
                    let limit_str = if limit == f64::INFINITY {
                        "inf"
                    } else if limit == f64::NEG_INFINITY {
                        "-inf"
                    } else {
                        "0"
                    };
                    // sigma diverges at pure samples but x, P, dP/dt stay finite
                    let (x, dx) = spinbath::thermo::bloch_norm_and_rate(&c, &rho0);
                    ThermoRow {
                        t,
                        gamma_dis,
                        entropy: spinbath::thermo::entropy_from_bloch_norm(x.min(1.0)),
                        sigma: None,
                        sigma_limit: Some(limit_str.to_string()),
                        bloch_x: x,
                        purity: (1.0 + (x * x).min(1.0)) / 2.0,
                        purity_rate: x * dx,
                        flag: Flag::PureState,
                    }
                }
                Err(e) => return Err(anyhow!(e)),
            })
        })
        .collect::<Result<_>>()?;
    rows::write_rows(common.out.as_deref(), common.format, &rows)
}

fn run_verify(common: &CommonArgs) -> Result<i32> {
    let params = bath_params(common)?;
    let results = verify::run_all(&params, common.seed);
    let bytes = serde_json::to_vec_pretty(&results)?;
    if let Some(path) = &common.out {
        std::fs::write(path, &bytes)?;
    }
    use std::io::Write;
    let mut stdout = std::io::stdout();
    stdout.write_all(&bytes)?;
    writeln!(stdout)?;
    let failed = results.iter().filter(|r| !r.pass).count();
    if failed > 0 {
        eprintln!("{failed} suite(s) failed");
        return Ok(1);
    }
    Ok(0)
}

fn sweep_cell(n: u32, alpha: f64, common: &CommonArgs, rho0: &DensityMatrix) -> Result<SweepRow> {
    let params = BathParams::new(n, alpha, common.omega0).map_err(|e| anyhow!(e))?;
    let summary = rhp_measure(&params, common.t_max, common.dt).map_err(|e| anyhow!(e))?;
    let bound = blp_lower_bound(
        &params,
        &StatePair::default_pairs(),
        common.t_max,
        common.dt,
    )
    .map_err(|e| anyhow!(e))?;
    let phi = witness_phi(&params, rho0, common.t_max, common.dt).map_err(|e| anyhow!(e))?;
    let terms = subspace_terms(&params);
    let mut min_gamma = f64::INFINITY;
    for &t in &uniform_grid(common.t_max, common.dt).map_err(|e| anyhow!(e))? {
        let c = map_coefficients_cached(&params, &terms, t).map_err(|e| anyhow!(e))?;
        if let Ok(r) = canonical_rates_from(&c, params.eps_degeneracy()) {
            min_gamma = min_gamma.min(r.gamma_dis);
        }
    }
    Ok(SweepRow {
        n,
        alpha,
        eta: summary.eta,
        g_measure: summary.g_measure,
        blp_lower_bound: bound,
        phi: phi.phi,
        min_gamma_dis: min_gamma,
    })
}

fn run_sweep(
    common: &CommonArgs,
    sweep_alpha: &[f64],
    sweep_n: &[u32],
    initial: &str,
    workers: Option<usize>,
) -> Result<()> {
    if sweep_alpha.is_empty() || sweep_n.is_empty() {
        bail!("sweep needs non-empty --sweep-alpha and --sweep-n lists");
    }
    let rho0 = parse_initial(initial)?;
    let mut cells: Vec<(u32, f64)> = sweep_n
        .iter()
        .flat_map(|&n| sweep_alpha.iter().map(move |&a| (n, a)))
        .collect();
    // deterministic output order regardless of completion order
    cells.sort_by(|x, y| x.0.cmp(&y.0).then(x.1.partial_cmp(&y.1).unwrap()));

    let compute = || -> Result<Vec<SweepRow>> {
        cells
            .par_iter()
            .map(|&(n, alpha)| sweep_cell(n, alpha, common, &rho0))
            .collect()
    };
    let rows = match workers {
        Some(count) => rayon::ThreadPoolBuilder::new()
            .num_threads(count)
            .build()
            .context("building worker pool")?
            .install(compute),
        None => compute(),
    }?;
    rows::write_rows(common.out.as_deref(), common.format, &rows)
}

fn main() {
    let cli = Cli::parse();
    let (common, result) = match &cli.command {
        Command::Trace(common) => (common, run_trace(common)),
        Command::Rates(common) => (common, run_rates(common)),
        Command::Nonmarkov { common, pair } => (common, run_nonmarkov(common, pair)),
        Command::Thermo { common, initial } => (common, run_thermo(common, initial)),
        Command::Verify(common) => match run_verify(common) {
            Ok(code) => std::process::exit(code),
            Err(e) => (common, Err(e)),
        },
        Command::Sweep {
            common,
            sweep_alpha,
            sweep_n,
            initial,
            workers,
        } => (
            common,
            run_sweep(common, sweep_alpha, sweep_n, initial, *workers),
        ),
    };
    if let Err(e) = result {
        rows::cleanup_partial(common.out.as_deref());
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
