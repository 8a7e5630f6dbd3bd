//! Command-line front end.
//!
//! Subcommands: `moments`, `hankel`, `poly`, `recur`, `pvi`, `sk`,
//! `scan-zeros`, `verify`. Outputs are deterministic: identical
//! configuration and seed produce byte-identical files.
//!
//! Exit codes: 0 on success, 1 on a verification or computation failure,
//! 2 on usage or configuration errors.

mod config;
mod emit;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use config::FileConfig;
use emit::{csv_table, fmt_f64, json_complex, json_num};
use eop::elliptic::{lattice_from_tau, TruncationPolicy};
use eop::moments::MomentTable;
use eop::polynomials::build_pi;
use eop::recurrences::{ladder_direct, ProbeSet, Provenance};
use eop::verify::{run_verify, SuiteStatus, VerifyConfig};
use eop::{hankel, painleve, scan, C64};
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Parser, Debug)]
#[command(
    name = "eop",
    about = "Elliptic orthogonal systems: moments, Hankel ladders, matrix systems, Painleve VI data",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Modular parameter as RE,IM (upper half plane)
    #[arg(long, global = true)]
    tau: Option<String>,

    /// Tolerance override NAME=VAL (repeatable; verify suites)
    #[arg(long = "tol", global = true)]
    tol: Vec<String>,

    /// Output path (default: stdout)
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Output format
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Worker threads for scans and verification
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Seed for probe-point randomness
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Flat key=value config file; flags win over file values
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Moment table: even/odd power moments and the mixed grid
    Moments {
        /// Largest wp-power
        #[arg(long, default_value_t = 10)]
        max: usize,
    },
    /// Hankel determinants, bordered determinants, and norms
    Hankel {
        #[arg(long, default_value_t = 5)]
        kmax: usize,
    },
    /// Polynomial traces along the contour
    Poly {
        /// Degrees to trace (no degree 1 exists)
        #[arg(long, default_value = "0,2,4,6")]
        degrees: String,
        /// Sample count on [0, 1]
        #[arg(long, default_value_t = 200)]
        samples: usize,
    },
    /// Recurrence coefficient ladder with provenance
    Recur {
        #[arg(long, default_value_t = 7)]
        nmax: usize,
    },
    /// Painleve VI data on a t-grid
    Pvi {
        #[arg(long, default_value_t = 2)]
        kmax: usize,
        #[arg(long, default_value_t = 0.1)]
        tmin: f64,
        #[arg(long, default_value_t = 0.9)]
        tmax: f64,
        #[arg(long, default_value_t = 9)]
        steps: usize,
    },
    /// Tau recursion constants
    Sk {
        #[arg(long, default_value_t = 5)]
        kmax: usize,
    },
    /// Winding-number zero scan of Hankel determinants
    ScanZeros {
        /// RE window as MIN,MAX
        #[arg(long = "re-range")]
        re_range: Option<String>,
        /// IM window as MIN,MAX
        #[arg(long = "im-range")]
        im_range: Option<String>,
        /// Grid as NxM
        #[arg(long)]
        grid: Option<String>,
        /// Determinant indices
        #[arg(long)]
        indices: Option<String>,
    },
    /// Run every invariant suite and emit a report
    Verify,
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            // Configuration / input shape problems exit 2, runtime ones 1.
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(UsageError(msg.into()).into())
}

struct Settings {
    tau: C64,
    seed: u64,
    format: Format,
    out: Option<PathBuf>,
    tolerances: BTreeMap<String, f64>,
}

fn resolve_settings(cli: &Cli, default_format: Format) -> Result<Settings> {
    let file = match &cli.config {
        Some(path) => FileConfig::load(path).map_err(|e| UsageError(format!("{e:#}")))?,
        None => FileConfig::default(),
    };
    let tau_str = cli
        .tau
        .clone()
        .or_else(|| file.get("tau").map(str::to_string))
        .unwrap_or_else(|| "0,1".to_string());
    let tau = config::parse_complex(&tau_str).map_err(|e| UsageError(format!("--tau: {e:#}")))?;
    if tau.im <= 0.0 {
        return usage_err(format!(
            "modular parameter must have positive imaginary part, got {tau}"
        ));
    }
    let seed = match cli.seed {
        Some(s) => s,
        None => file
            .get("seed")
            .map(|s| s.parse())
            .transpose()
            .map_err(|e| UsageError(format!("seed: {e}")))?
            .unwrap_or(7),
    };
    let format = cli.format.unwrap_or_else(|| match file.get("format") {
        Some("csv") => Format::Csv,
        Some("json") => Format::Json,
        _ => default_format,
    });
    let out = cli
        .out
        .clone()
        .or_else(|| file.get("out").map(PathBuf::from));
    let mut tolerances = BTreeMap::new();
    for spec in &cli.tol {
        let (name, val) =
            config::parse_tol(spec).map_err(|e| UsageError(format!("--tol: {e:#}")))?;
        tolerances.insert(name, val);
    }
    if let Some(jobs) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .ok();
    }
    Ok(Settings {
        tau,
        seed,
        format,
        out,
        tolerances,
    })
}

fn write_output(settings: &Settings, content: &str) -> Result<()> {
    match &settings.out {
        Some(path) => {
            std::fs::write(path, content).with_context(|| format!("writing {}", path.display()))?
        }
        None => print!("{content}"),
    }
    Ok(())
}

fn table_at(tau: C64, j_max: usize) -> Result<MomentTable> {
    let lat = lattice_from_tau(tau, &TruncationPolicy::default())?;
    Ok(MomentTable::by_recursion_exact_seeds(lat, j_max)?)
}

fn run(cli: Cli) -> Result<ExitCode> {
    match &cli.command {
        Command::Moments { max } => {
            let settings = resolve_settings(&cli, Format::Json)?;
            // the mixed grid below touches odd powers up to 6, i.e. even
            // powers up to 9
            let table = table_at(settings.tau, (*max).max(12))?;
            let even: Vec<Value> = (0..=*max)
                .map(|j| table.even(j).map(json_complex))
                .collect::<eop::Result<_>>()?;
            let odd: Vec<Value> = (0..=max.saturating_sub(3))
                .map(|j| table.odd(j).map(json_complex))
                .collect::<eop::Result<_>>()?;
            let mut mixed = Vec::new();
            for i in (0..=9usize).filter(|&i| i != 1) {
                for j in (i..=9usize).filter(|&j| j != 1) {
                    let mu = table.mixed(i, j)?;
                    mixed.push(Value::Array(vec![
                        json!(i),
                        json!(j),
                        json_num(mu.re),
                        json_num(mu.im),
                    ]));
                }
            }
            let doc = json!({
                "tau": json_complex(settings.tau),
                "weight": "constant-one",
                "even": even,
                "odd": odd,
                "mixed": mixed,
            });
            let content = match settings.format {
                Format::Json => format!("{}\n", serde_json::to_string_pretty(&doc)?),
                Format::Csv => {
                    let mut rows = Vec::new();
                    for (j, v) in (0..=*max).zip(even.iter()) {
                        let arr = v.as_array().unwrap();
                        rows.push(vec![
                            "even".into(),
                            j.to_string(),
                            String::new(),
                            arr[0].to_string(),
                            arr[1].to_string(),
                        ]);
                    }
                    csv_table(&["kind", "i", "j", "re", "im"], &rows)
                }
            };
            write_output(&settings, &content)?;
            Ok(ExitCode::SUCCESS)
        }

        Command::Hankel { kmax } => {
            let settings = resolve_settings(&cli, Format::Json)?;
            let table = table_at(settings.tau, (2 * kmax).max(4))?;
            let ladder = hankel::HankelLadder::build(&table, *kmax)?;
            let doc = json!({
                "tau": json_complex(settings.tau),
                "deltas_even": ladder.delta_even.iter().map(|&v| json_complex(v)).collect::<Vec<_>>(),
                "deltas_odd": ladder.delta_odd.iter().map(|&v| json_complex(v)).collect::<Vec<_>>(),
                "gammas": ladder.gamma.iter().map(|&v| json_complex(v)).collect::<Vec<_>>(),
                "lambdas": ladder.lambda.iter().map(|&v| json_complex(v)).collect::<Vec<_>>(),
                "h": ladder.h.iter().map(|&(n, v)| Value::Array(vec![json!(n), json_num(v.re), json_num(v.im)])).collect::<Vec<_>>(),
                "cond": ladder.cond_even.iter().map(|&c| json_num(c)).collect::<Vec<_>>(),
            });
            write_output(
                &settings,
                &format!("{}\n", serde_json::to_string_pretty(&doc)?),
            )?;
            Ok(ExitCode::SUCCESS)
        }

        Command::Poly { degrees, samples } => {
            let settings = resolve_settings(&cli, Format::Csv)?;
            let degrees = config::parse_usize_list(degrees)
                .map_err(|e| UsageError(format!("--degrees: {e:#}")))?;
            if degrees.contains(&1) {
                return usage_err("degree 1 does not exist");
            }
            if *samples < 2 {
                return usage_err("need at least 2 samples");
            }
            let j_max = degrees.iter().copied().max().unwrap_or(4).max(4);
            let table = table_at(settings.tau, j_max + 2)?;
            let mut sections = Vec::new();
            for &n in &degrees {
                let p = build_pi(n, &table)?;
                let mut rows = Vec::with_capacity(*samples);
                for i in 0..*samples {
                    let s = i as f64 / (*samples as f64 - 1.0);
                    let z = settings.tau / 2.0 + s;
                    let v = p.eval(z, &table.lat)?;
                    rows.push(vec![fmt_f64(s), fmt_f64(v.re), fmt_f64(v.im)]);
                }
                let body = csv_table(&["s", "re", "im"], &rows);
                sections.push((n, body));
            }
            match &settings.out {
                Some(path) if degrees.len() > 1 => {
                    // one file per degree next to the requested stem
                    let stem = path.to_string_lossy().to_string();
                    let stem = stem.strip_suffix(".csv").unwrap_or(&stem).to_string();
                    for (n, body) in &sections {
                        let per = PathBuf::from(format!("{stem}_deg{n}.csv"));
                        std::fs::write(&per, body)
                            .with_context(|| format!("writing {}", per.display()))?;
                    }
                }
                _ => {
                    let mut content = String::new();
                    for (n, body) in &sections {
                        if sections.len() > 1 {
                            content.push_str(&format!("# degree {n}\n"));
                        }
                        content.push_str(body);
                    }
                    write_output(&settings, &content)?;
                }
            }
            Ok(ExitCode::SUCCESS)
        }

        Command::Recur { nmax } => {
            let settings = resolve_settings(&cli, Format::Json)?;
            let table = table_at(settings.tau, (2 * nmax).max(12))?;
            let lat = table.lat;
            let probes = ProbeSet::seeded(&lat, settings.seed, 5);
            let ladder = ladder_direct(*nmax, &table, &probes)?;
            let prov = |p: Provenance| match p {
                Provenance::Direct => "direct",
                Provenance::Recursed => "recursed",
            };
            let doc = json!({
                "tau": json_complex(settings.tau),
                "alphas": ladder.alphas.iter().map(|(&n, &(v, p))| Value::Array(vec![json!(n), json_num(v.re), json_num(v.im), json!(prov(p))])).collect::<Vec<_>>(),
                "betas": ladder.betas.iter().map(|(&n, &v)| Value::Array(vec![json!(n), json_num(v.re), json_num(v.im)])).collect::<Vec<_>>(),
                "hs": ladder.hs.iter().map(|(&n, &v)| Value::Array(vec![json!(n), json_num(v.re), json_num(v.im)])).collect::<Vec<_>>(),
                "bs": ladder.bs.iter().map(|(&n, &v)| Value::Array(vec![json!(n), json_num(v.re), json_num(v.im)])).collect::<Vec<_>>(),
            });
            write_output(
                &settings,
                &format!("{}\n", serde_json::to_string_pretty(&doc)?),
            )?;
            Ok(ExitCode::SUCCESS)
        }

        Command::Pvi {
            kmax,
            tmin,
            tmax,
            steps,
        } => {
            let settings = resolve_settings(&cli, Format::Csv)?;
            if !(0.0 < *tmin && *tmin <= *tmax && *tmax < 1.0) {
                return usage_err("need 0 < tmin <= tmax < 1");
            }
            let mut rows = Vec::new();
            for i in 0..*steps {
                let t = if *steps == 1 {
                    *tmin
                } else {
                    tmin + (tmax - tmin) * i as f64 / (*steps as f64 - 1.0)
                };
                for k in 0..=*kmax {
                    let b = painleve::bundle(k, t)?;
                    let pvi = painleve::pvi_residual(k, t)?;
                    let sigma = painleve::sigma_residual(k, t)?;
                    rows.push(vec![
                        fmt_f64(t),
                        k.to_string(),
                        fmt_f64(b.u.re),
                        fmt_f64(b.v.re),
                        fmt_f64(b.zeta.re),
                        fmt_f64(b.tau.re),
                        fmt_f64(pvi),
                        fmt_f64(sigma),
                    ]);
                }
            }
            let content = csv_table(
                &[
                    "t",
                    "k",
                    "u",
                    "v",
                    "zeta",
                    "tau",
                    "pvi_residual",
                    "sigma_residual",
                ],
                &rows,
            );
            write_output(&settings, &content)?;
            Ok(ExitCode::SUCCESS)
        }

        Command::Sk { kmax } => {
            let settings = resolve_settings(&cli, Format::Csv)?;
            let grid = [0.3, 0.4, 0.5, 0.6, 0.7];
            let ladder = painleve::tau_and_sk(*kmax, &grid)?;
            let mut rows = Vec::new();
            for s in &ladder.s {
                rows.push(vec![
                    s.k.to_string(),
                    fmt_f64(s.value.re),
                    fmt_f64(s.value.im),
                    fmt_f64(s.spread),
                ]);
            }
            let content = csv_table(&["k", "s_re", "s_im", "spread"], &rows);
            eprintln!("recursion constants on t-grid {grid:?}:");
            for s in &ladder.s {
                eprintln!("  s_{} = {:+.6} (spread {:.2e})", s.k, s.value.re, s.spread);
            }
            write_output(&settings, &content)?;
            Ok(ExitCode::SUCCESS)
        }

        Command::ScanZeros {
            re_range,
            im_range,
            grid,
            indices,
        } => {
            let settings = resolve_settings(&cli, Format::Json)?;
            let mut cfg = scan::ScanConfig::default();
            if let Some(r) = re_range {
                let (a, b) =
                    config::parse_range(r).map_err(|e| UsageError(format!("--re-range: {e:#}")))?;
                cfg.re_min = a;
                cfg.re_max = b;
            }
            if let Some(r) = im_range {
                let (a, b) =
                    config::parse_range(r).map_err(|e| UsageError(format!("--im-range: {e:#}")))?;
                cfg.im_min = a;
                cfg.im_max = b;
            }
            if let Some(g) = grid {
                let (n, m) =
                    config::parse_grid(g).map_err(|e| UsageError(format!("--grid: {e:#}")))?;
                cfg.n_re = n;
                cfg.n_im = m;
            }
            if let Some(ix) = indices {
                cfg.indices = config::parse_usize_list(ix)
                    .map_err(|e| UsageError(format!("--indices: {e:#}")))?;
            }
            if let Err(e) = cfg.validate() {
                return usage_err(format!("{e}"));
            }
            let hits = scan::scan_zeros(&cfg)?;
            let content = match settings.format {
                Format::Json => {
                    let list: Vec<Value> = hits
                        .iter()
                        .map(|h| {
                            json!({
                                "index": h.index,
                                "tau": json_complex(h.tau),
                                "abs_delta": json_num(h.abs_delta),
                                "cell": [h.cell.0, h.cell.1],
                                "winding": h.winding,
                            })
                        })
                        .collect();
                    format!("{}\n", serde_json::to_string_pretty(&Value::Array(list))?)
                }
                Format::Csv => {
                    let rows: Vec<Vec<String>> = hits
                        .iter()
                        .map(|h| {
                            vec![
                                h.index.to_string(),
                                fmt_f64(h.tau.re),
                                fmt_f64(h.tau.im),
                                fmt_f64(h.abs_delta),
                                h.winding.to_string(),
                            ]
                        })
                        .collect();
                    csv_table(&["index", "re", "im", "abs_delta", "winding"], &rows)
                }
            };
            write_output(&settings, &content)?;
            Ok(ExitCode::SUCCESS)
        }

        Command::Verify => {
            let settings = resolve_settings(&cli, Format::Json)?;
            let cfg = VerifyConfig {
                tau: settings.tau,
                seed: settings.seed,
                tolerances: settings.tolerances.clone(),
            };
            let report = run_verify(&cfg)?;
            for s in &report.suites {
                let tag = match s.status {
                    SuiteStatus::Pass => "PASS",
                    SuiteStatus::Fail => "FAIL",
                    SuiteStatus::SingularExpected => "SINGULAR (expected)",
                };
                eprintln!(
                    "{:32} {:20} residual {:>12} tol {:.1e}",
                    s.name,
                    tag,
                    if s.max_residual.is_nan() {
                        "-".to_string()
                    } else {
                        format!("{:.3e}", s.max_residual)
                    },
                    s.tolerance
                );
            }
            let content = format!("{}\n", serde_json::to_string_pretty(&report)?);
            write_output(&settings, &content)?;
            if report.all_passed {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::from(1))
            }
        }
    }
}
