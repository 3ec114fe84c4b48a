use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use isodescent::descent::{CurveSpec, DescentError, Direction};
use isodescent::localfield::SearchPolicy;
use isodescent::qfield::QuadField;
use isodescent::sharank::{descend, ShaRankError, DEFAULT_HEIGHT};
use isodescent::verify::{explain, render_descent, sweep, SweepConfig, VerifyError};

const EXIT_MISMATCH: u8 = 2;
const EXIT_UNDECIDED: u8 = 3;
const EXIT_USAGE: u8 = 4;

#[derive(Parser)]
#[command(name = "isodescent", version, about = "2-isogeny descent for y^2 = x(x + eps p)(x + eps q) over class-number-one imaginary quadratic fields")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Dir {
    Phi,
    Phihat,
}

impl From<Dir> for Direction {
    fn from(d: Dir) -> Self {
        match d {
            Dir::Phi => Direction::Phi,
            Dir::Phihat => Direction::PhiHat,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Tsv,
}

#[derive(Subcommand)]
enum Cmd {
    /// Compute both Selmer groups and the rank/Sha statement for one curve.
    Descent {
        /// D in K = Q(sqrt(D)); the discriminants -4 and -8 are accepted too.
        #[arg(long, allow_hyphen_values = true)]
        field: i64,
        #[arg(long)]
        p: u64,
        #[arg(long, allow_hyphen_values = true, value_parser = parse_eps)]
        eps: i64,
        #[arg(long, value_enum)]
        dir: Option<Dir>,
        #[arg(long, default_value_t = DEFAULT_HEIGHT)]
        height: u64,
        #[arg(long)]
        depth: Option<u32>,
        #[arg(long)]
        prec: Option<u32>,
    },
    /// Descend every twin pair p < pmax and compare with the expected rows.
    Sweep {
        #[arg(long)]
        pmax: u64,
        /// `all` or a comma-separated list of D values.
        #[arg(long, default_value = "all", allow_hyphen_values = true)]
        fields: String,
        /// `both`, `+1` or `-1`.
        #[arg(long, default_value = "both", allow_hyphen_values = true)]
        eps: String,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[arg(long)]
        out: Option<std::path::PathBuf>,
        #[arg(long)]
        depth: Option<u32>,
        #[arg(long)]
        prec: Option<u32>,
        #[arg(long)]
        jobs: Option<usize>,
        /// Height bound for the point search behind `rank_lower`.
        #[arg(long, default_value_t = DEFAULT_HEIGHT)]
        height: u64,
    },
    /// Show the per-place verdicts and witnesses for one class.
    Explain {
        #[arg(long, allow_hyphen_values = true)]
        field: i64,
        #[arg(long)]
        p: u64,
        #[arg(long, allow_hyphen_values = true, value_parser = parse_eps)]
        eps: i64,
        /// Product of generators, e.g. `-2`, `-1*pi2`, `mu_p*q`.
        #[arg(long, allow_hyphen_values = true)]
        d: String,
        #[arg(long, value_enum, default_value = "phi")]
        dir: Dir,
        #[arg(long)]
        json: bool,
        #[arg(long)]
        depth: Option<u32>,
        #[arg(long)]
        prec: Option<u32>,
    },
}

fn parse_eps(s: &str) -> Result<i64, String> {
    match s {
        "+1" | "1" => Ok(1),
        "-1" => Ok(-1),
        _ => Err(format!("eps must be +1 or -1, got {s}")),
    }
}

fn parse_fields(s: &str) -> Result<Vec<QuadField>> {
    if s == "all" {
        return Ok(QuadField::all().collect());
    }
    s.split(',')
        .map(|t| {
            let d: i64 = t.trim().parse().with_context(|| format!("bad field {t:?}"))?;
            Ok(QuadField::from_label(d)?)
        })
        .collect()
}

fn parse_eps_selector(s: &str) -> Result<Vec<i64>> {
    Ok(match s {
        "both" => vec![1, -1],
        other => vec![parse_eps(other).map_err(anyhow::Error::msg)?],
    })
}

/// Errors that come from bad user input rather than from the computation.
fn is_usage(e: &anyhow::Error) -> bool {
    if let Some(v) = e.downcast_ref::<VerifyError>() {
        return matches!(
            v,
            VerifyError::Descent(DescentError::UnknownClass { .. } | DescentError::Field(_) | DescentError::NotTwin(_) | DescentError::BadEps(_))
        );
    }
    e.downcast_ref::<DescentError>().is_some_and(|d| !matches!(d, DescentError::Undecided { .. }))
        || e.downcast_ref::<isodescent::qfield::QfieldError>().is_some()
        || e.downcast_ref::<std::num::ParseIntError>().is_some()
        || e.to_string().starts_with("eps must be")
}

fn run(cmd: Cmd) -> Result<u8> {
    match cmd {
        Cmd::Descent {
            field,
            p,
            eps,
            dir,
            height,
            depth,
            prec,
        } => {
            let curve = CurveSpec::new(QuadField::from_label(field)?, p, eps)?;
            let policy = SearchPolicy { depth, prec };
            match descend(&curve, &policy, height) {
                Ok(rep) => {
                    print!("{}", render_descent(&rep, dir.map(Into::into)));
                    Ok(0)
                }
                Err(ShaRankError::Descent(e @ DescentError::Undecided { .. })) => {
                    eprintln!("{e}");
                    Ok(EXIT_UNDECIDED)
                }
                Err(e) => Err(e.into()),
            }
        }
        Cmd::Sweep {
            pmax,
            fields,
            eps,
            format,
            out,
            depth,
            prec,
            jobs,
            height,
        } => {
            if let Some(k) = jobs {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(k)
                    .build_global()
                    .context("configuring worker pool")?;
            }
            let cfg = SweepConfig {
                p_max: pmax,
                fields: parse_fields(&fields)?,
                eps: parse_eps_selector(&eps)?,
                policy: SearchPolicy { depth, prec },
                height,
            };
            let start = Instant::now();
            let outcome = sweep(&cfg)?;
            let rep = &outcome.report;
            let text = match format {
                Format::Json => rep.to_json(),
                Format::Tsv => rep.to_tsv(),
            };
            match out {
                Some(path) => std::fs::write(&path, text)
                    .with_context(|| format!("writing {}", path.display()))?,
                None => print!("{text}"),
            }
            let s = &rep.summary;
            eprintln!(
                "{} curves, {} in scope, {} matched, {} mismatches, {} undecided, {:.1}s",
                s.records,
                s.applicable,
                s.matched,
                s.mismatches.len(),
                s.undecided.len(),
                start.elapsed().as_secs_f64()
            );
            for m in &s.mismatches {
                eprintln!("mismatch: {m}");
            }
            for u in &s.undecided {
                eprintln!("undecided: {u}");
            }
            Ok(if !s.undecided.is_empty() {
                EXIT_UNDECIDED
            } else if !s.mismatches.is_empty() {
                EXIT_MISMATCH
            } else {
                0
            })
        }
        Cmd::Explain {
            field,
            p,
            eps,
            d,
            dir,
            json,
            depth,
            prec,
        } => {
            let curve = CurveSpec::new(QuadField::from_label(field)?, p, eps)?;
            let ex = explain(&curve, dir.into(), &d, &SearchPolicy { depth, prec })?;
            if json {
                println!("{}", serde_json::to_string_pretty(&ex.to_json())?);
            } else {
                print!("{ex}");
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.cmd) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            if is_usage(&e) {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
