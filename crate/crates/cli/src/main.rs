//! Command-line front end: evaluators, stage operations and the batch
//! pipeline.
//!
//! Exit codes: 0 all checks pass, 1 verification failure, 2 usage or
//! configuration error.

use clap::{Args, Parser, Subcommand};
use metazeta::crossbreed::run_script;
use metazeta::factorization::{factorize, verify_certificate};
use metazeta::grafting::{
    build_strips, find_graft, find_grafts_multi, parse_decimal, validate_u_set,
    DEFAULT_GRAFT_TOL,
};
use metazeta::ladder::{build_ladder, LadderTable};
use metazeta::meta::{verify_meta, MetaEquationInstance, MetaForm};
use metazeta::num::quad;
use metazeta::pipeline::{required_table_range, run_pipeline, PipelineConfig, PipelineError};
use metazeta::report::{check_lines, headline_json, headline_markdown};
use metazeta::trig::{eval_f, mean_value_closed_form};
use metazeta::zeta::{critical_sample, zeta, EvalConfig};
use metazeta::Config;
use num_complex::Complex64;
use serde_json::json;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "metazeta", version, about = "Certificates for zeta factorization identities, grafts and meta-functional equations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate zeta or the critical-line functions.
    Zeta {
        #[command(subcommand)]
        which: ZetaCommand,
    },
    /// Verify the closed-form interval means against quadrature.
    Trig {
        #[command(subcommand)]
        which: TrigCommand,
    },
    /// Build or inspect ladder tables.
    Ladder {
        #[command(subcommand)]
        which: LadderCommand,
    },
    /// Construct and verify one factorization certificate.
    Factorize(FactorizeArgs),
    /// Search a strip for a graft point.
    Graft(GraftArgs),
    /// Strip construction.
    Strips {
        #[command(subcommand)]
        which: StripsCommand,
    },
    /// Width-set validation.
    Usets {
        #[command(subcommand)]
        which: UsetsCommand,
    },
    /// Verify a stored meta-equation instance.
    Meta {
        #[command(subcommand)]
        which: MetaCommand,
    },
    /// Run a symbolic derivation script.
    Crossbreed {
        #[command(subcommand)]
        which: CrossbreedCommand,
    },
    /// Emit the headline verification report.
    Report {
        #[command(subcommand)]
        which: ReportCommand,
    },
    /// Run the full pipeline from a configuration file.
    Run(RunArgs),
}

#[derive(Subcommand)]
enum ZetaCommand {
    /// zeta(sigma + i t) as JSON {s, value_re, value_im}.
    Eval {
        #[arg(long)]
        sigma: f64,
        #[arg(long)]
        t: f64,
    },
    /// Hardy Z and the normalized square as JSON {t, z, z_tilde_sq}.
    Z {
        #[arg(long)]
        t: f64,
        /// Lower cutoff override (must exceed e).
        #[arg(long, default_value_t = 100.0)]
        t_min: f64,
    },
}

#[derive(Subcommand)]
enum TrigCommand {
    /// CSV of (l, U, closed_form, quadrature, abs_err) over a width grid.
    Verify {
        #[arg(long, default_value_t = 50)]
        grid: u32,
    },
}

#[derive(Subcommand)]
enum LadderCommand {
    /// Build a table and write the CSV cache plus JSON sidecar.
    Build {
        #[arg(long)]
        t_lo: f64,
        #[arg(long)]
        t_hi: f64,
        #[arg(long, default_value_t = 0.05)]
        resolution: f64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct FactorizeArgs {
    #[arg(long)]
    l: u32,
    #[arg(long)]
    k: u32,
    #[arg(long = "U")]
    u: f64,
    #[arg(long = "L")]
    big_l: i64,
    /// Ladder cache (CSV path with JSON sidecar); built on the fly if
    /// omitted.
    #[arg(long)]
    table: Option<PathBuf>,
}

#[derive(Args)]
struct GraftArgs {
    /// Strip index 1..=12 (strips from --sigma1/--sigma2/--delta).
    #[arg(long)]
    strip: u32,
    #[arg(long)]
    target: f64,
    /// Window (a, b) in t.
    #[arg(long, num_args = 2, value_names = ["A", "B"])]
    t_window: Vec<f64>,
    #[arg(long, default_value_t = 0.6)]
    sigma1: f64,
    #[arg(long, default_value_t = 0.9)]
    sigma2: f64,
    #[arg(long, default_value_t = 0.005)]
    delta: f64,
    #[arg(long, default_value_t = DEFAULT_GRAFT_TOL)]
    tol: f64,
    /// Collect up to this many distinct solutions.
    #[arg(long, default_value_t = 1)]
    multi: usize,
}

#[derive(Subcommand)]
enum StripsCommand {
    Build {
        #[arg(long)]
        sigma1: f64,
        #[arg(long)]
        sigma2: f64,
        #[arg(long)]
        delta: f64,
    },
}

#[derive(Subcommand)]
enum UsetsCommand {
    /// Validate a file of decimal widths, one per line.
    Validate { file: PathBuf },
}

#[derive(Subcommand)]
enum MetaCommand {
    Verify {
        #[arg(long)]
        eq: u32,
        #[arg(long, value_parser = ["exact", "asymptotic"])]
        form: String,
        /// JSON file holding a stored meta-equation instance.
        #[arg(long)]
        bindings: PathBuf,
        /// Ladder cache; rebuilt from the instance range if omitted.
        #[arg(long)]
        table: Option<PathBuf>,
        #[arg(long, default_value_t = 1e-6)]
        cert_tol: f64,
        #[arg(long, default_value_t = 1e-9)]
        graft_tol: f64,
    },
}

#[derive(Subcommand)]
enum CrossbreedCommand {
    Derive {
        #[arg(long)]
        script: PathBuf,
    },
}

#[derive(Subcommand)]
enum ReportCommand {
    /// Run the pipeline and print the markdown headline report.
    Headline {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Also write report.md, report.json and manifest.json here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Directory for the manifest and stage artifacts.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Error wrapper distinguishing usage/config errors (exit 2) from
/// verification failures (exit 1).
enum CliError {
    Usage(String),
    Verification(String),
}

impl CliError {
    fn code(&self) -> ExitCode {
        match self {
            CliError::Usage(_) => ExitCode::from(2),
            CliError::Verification(_) => ExitCode::from(1),
        }
    }
}

fn usage<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Usage(e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match &e {
                CliError::Usage(m) => eprintln!("error: {m}"),
                CliError::Verification(m) => eprintln!("verification failure: {m}"),
            }
            e.code()
        }
    }
}

fn load_or_build_table(
    table: Option<&Path>,
    big_l: i64,
    u: f64,
    k: u32,
    cfg: &Config,
) -> Result<LadderTable<f64>, CliError> {
    match table {
        Some(path) => LadderTable::<f64>::load(path).map_err(usage),
        None => {
            let (t_lo, t_hi) = required_table_range(big_l, u, k);
            eprintln!("note: building ladder table over [{t_lo:.1}, {t_hi:.1}] (pass --table to reuse a cache)");
            build_ladder(t_lo, t_hi, 0.05, cfg).map_err(usage)
        }
    }
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Zeta { which } => match which {
            ZetaCommand::Eval { sigma, t } => {
                let cfg = Config::default();
                let v = zeta(Complex64::new(sigma, t), &cfg).map_err(usage)?;
                println!(
                    "{}",
                    json!({ "s": { "sigma": sigma, "t": t }, "value_re": v.re, "value_im": v.im })
                );
                Ok(())
            }
            ZetaCommand::Z { t, t_min } => {
                let cfg = EvalConfig::new(15, t_min, 1e-9, 1e-12).map_err(usage)?;
                let s = critical_sample(t, &cfg).map_err(usage)?;
                println!(
                    "{}",
                    json!({ "t": s.t, "z": s.z, "z_tilde_sq": s.z_tilde_sq })
                );
                Ok(())
            }
        },
        Command::Trig { which } => match which {
            TrigCommand::Verify { grid } => {
                if grid == 0 {
                    return Err(CliError::Usage("grid must be positive".into()));
                }
                println!("l,U,closed_form,quadrature,abs_err");
                let mut worst = 0.0f64;
                for l in 1..=9u32 {
                    for i in 1..=grid {
                        let u = metazeta::trig::max_width::<f64>() * i as f64
                            / (grid + 1) as f64;
                        let closed = mean_value_closed_form(l, u).map_err(usage)?;
                        let q = quad::integrate(
                            |t: f64| eval_f(l, t).expect("valid index"),
                            0.0,
                            u,
                            1e-13,
                        )
                        .map_err(usage)?
                            / u;
                        let err = (closed - q).abs();
                        worst = worst.max(err / closed.abs().max(1.0));
                        println!("{l},{u},{closed},{q},{err:e}");
                    }
                }
                if worst > 1e-10 {
                    return Err(CliError::Verification(format!(
                        "worst relative deviation {worst:e} exceeds 1e-10"
                    )));
                }
                Ok(())
            }
        },
        Command::Ladder { which } => match which {
            LadderCommand::Build {
                t_lo,
                t_hi,
                resolution,
                out,
            } => {
                let cfg = Config::default();
                let table = build_ladder(t_lo, t_hi, resolution, &cfg).map_err(usage)?;
                table.save(&out).map_err(usage)?;
                eprintln!(
                    "wrote {} nodes to {} (+ sidecar)",
                    table.len(),
                    out.display()
                );
                Ok(())
            }
        },
        Command::Factorize(args) => {
            let cfg = Config::default();
            let table =
                load_or_build_table(args.table.as_deref(), args.big_l, args.u, args.k, &cfg)?;
            let cert =
                factorize(args.l, args.k, args.u, args.big_l, &table, &cfg).map_err(usage)?;
            let report = verify_certificate(&cert, &table, &cfg).map_err(usage)?;
            println!("{}", serde_json::to_string_pretty(&cert).expect("serializes"));
            if !report.passes(1e-6) {
                return Err(CliError::Verification(format!(
                    "certificate re-verification failed: relative residual {:e}, violations {:?}",
                    report.relative_residual, report.violations
                )));
            }
            Ok(())
        }
        Command::Graft(args) => {
            if args.t_window.len() != 2 {
                return Err(CliError::Usage("--t-window takes two values".into()));
            }
            let strips =
                build_strips(args.sigma1, args.sigma2, args.delta).map_err(usage)?;
            let strip = strips
                .get((args.strip.wrapping_sub(1)) as usize)
                .ok_or_else(|| CliError::Usage(format!("strip {} outside 1..=12", args.strip)))?;
            let window = (args.t_window[0], args.t_window[1]);
            if args.multi <= 1 {
                let g = find_graft(strip, args.target, window, args.tol).map_err(usage)?;
                println!("{}", serde_json::to_string_pretty(&g).expect("serializes"));
            } else {
                let gs = find_grafts_multi(strip, args.target, window, args.multi, args.tol)
                    .map_err(usage)?;
                println!("{}", serde_json::to_string_pretty(&gs).expect("serializes"));
            }
            Ok(())
        }
        Command::Strips { which } => match which {
            StripsCommand::Build {
                sigma1,
                sigma2,
                delta,
            } => {
                let strips = build_strips(sigma1, sigma2, delta).map_err(usage)?;
                println!("{}", serde_json::to_string_pretty(&strips).expect("serializes"));
                Ok(())
            }
        },
        Command::Usets { which } => match which {
            UsetsCommand::Validate { file } => {
                let text = std::fs::read_to_string(&file).map_err(usage)?;
                let mut values = Vec::new();
                for (i, line) in text.lines().enumerate() {
                    let line = line.trim();
                    if line.is_empty() || line.starts_with('#') {
                        continue;
                    }
                    values.push(parse_decimal(line).ok_or_else(|| {
                        CliError::Usage(format!("line {}: not a decimal: {line}", i + 1))
                    })?);
                }
                match validate_u_set(&values) {
                    Ok(set) => {
                        println!(
                            "{}",
                            json!({ "valid": true, "n0": set.len(), "violations": [] })
                        );
                        Ok(())
                    }
                    Err(violations) => {
                        let names: Vec<String> =
                            violations.iter().map(|v| v.to_string()).collect();
                        println!("{}", json!({ "valid": false, "violations": names }));
                        Err(CliError::Verification("width set inadmissible".into()))
                    }
                }
            }
        },
        Command::Meta { which } => match which {
            MetaCommand::Verify {
                eq,
                form,
                bindings,
                table,
                cert_tol,
                graft_tol,
            } => {
                let text = std::fs::read_to_string(&bindings).map_err(usage)?;
                let instance: MetaEquationInstance<f64> =
                    serde_json::from_str(&text).map_err(usage)?;
                if instance.eq_id != eq {
                    return Err(CliError::Usage(format!(
                        "bindings file holds equation {}, not {eq}",
                        instance.eq_id
                    )));
                }
                let cfg = Config::default();
                let cert = &instance.certificate;
                let table =
                    load_or_build_table(table.as_deref(), cert.big_l, cert.u, cert.k, &cfg)?;
                let form = if form == "exact" {
                    MetaForm::Exact
                } else {
                    MetaForm::Asymptotic
                };
                let report = verify_meta(&instance, form, &table, &cfg, cert_tol, graft_tol)
                    .map_err(usage)?;
                println!("{}", serde_json::to_string_pretty(&report).expect("serializes"));
                if report.passes {
                    Ok(())
                } else {
                    Err(CliError::Verification(format!(
                        "residual {:e} exceeds budget {:e}",
                        report.residual, report.budget
                    )))
                }
            }
        },
        Command::Crossbreed { which } => match which {
            CrossbreedCommand::Derive { script } => {
                let text = std::fs::read_to_string(&script).map_err(usage)?;
                let out = run_script(&text).map_err(usage)?;
                print!("{out}");
                Ok(())
            }
        },
        Command::Report { which } => match which {
            ReportCommand::Headline { config, out } => {
                let cfg = load_config(config.as_deref())?;
                let outcome = run_pipeline(&cfg).map_err(pipeline_error)?;
                let md = headline_markdown(&outcome);
                print!("{md}");
                if let Some(dir) = out {
                    std::fs::create_dir_all(&dir).map_err(usage)?;
                    std::fs::write(dir.join("report.md"), &md).map_err(usage)?;
                    std::fs::write(
                        dir.join("report.json"),
                        serde_json::to_string_pretty(&headline_json(&outcome))
                            .expect("serializes"),
                    )
                    .map_err(usage)?;
                    std::fs::write(
                        dir.join("manifest.json"),
                        serde_json::to_string_pretty(&outcome.manifest).expect("serializes"),
                    )
                    .map_err(usage)?;
                }
                if outcome.manifest.overall_pass {
                    Ok(())
                } else {
                    Err(CliError::Verification("one or more checks failed".into()))
                }
            }
        },
        Command::Run(args) => {
            let cfg = load_config(Some(&args.config))?;
            let outcome = run_pipeline(&cfg).map_err(pipeline_error)?;
            for line in check_lines(&outcome.manifest) {
                println!("{line}");
            }
            if let Some(dir) = &args.out {
                write_artifacts(dir, &outcome).map_err(usage)?;
                eprintln!("artifacts written to {}", dir.display());
            } else {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&outcome.manifest).expect("serializes")
                );
            }
            if outcome.manifest.overall_pass {
                Ok(())
            } else {
                Err(CliError::Verification(
                    "one or more pipeline checks failed; see manifest".into(),
                ))
            }
        }
    }
}

fn load_config(path: Option<&Path>) -> Result<PipelineConfig, CliError> {
    match path {
        None => Ok(PipelineConfig::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(usage)?;
            PipelineConfig::parse(&text).map_err(pipeline_error)
        }
    }
}

fn pipeline_error(e: PipelineError) -> CliError {
    match e {
        PipelineError::Config(_) | PipelineError::BadWidthSet(_) => usage(e),
        other => CliError::Verification(other.to_string()),
    }
}

fn write_artifacts(
    dir: &Path,
    outcome: &metazeta::pipeline::PipelineOutcome,
) -> Result<(), std::io::Error> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(
        dir.join("manifest.json"),
        serde_json::to_string_pretty(&outcome.manifest).expect("serializes"),
    )?;
    outcome
        .table
        .save(&dir.join("table.csv"))
        .map_err(|e| std::io::Error::other(e.to_string()))?;
    let certs_dir = dir.join("certificates");
    std::fs::create_dir_all(&certs_dir)?;
    for cert in outcome
        .certificates
        .iter()
        .chain(&outcome.meta_certificates)
    {
        let name = format!("cert_l{}_k{}_U{}_L{}.json", cert.l, cert.k, cert.u, cert.big_l);
        std::fs::write(
            certs_dir.join(name),
            serde_json::to_string_pretty(cert).expect("serializes"),
        )?;
    }
    let grafts_dir = dir.join("grafts");
    std::fs::create_dir_all(&grafts_dir)?;
    for (l, g) in &outcome.grafts {
        std::fs::write(
            grafts_dir.join(format!("graft_{l}.json")),
            serde_json::to_string_pretty(g).expect("serialize"),
        )?;
    }
    let meta_dir = dir.join("meta");
    std::fs::create_dir_all(&meta_dir)?;
    for inst in &outcome.instances {
        std::fs::write(
            meta_dir.join(format!("eq_{}.json", inst.eq_id)),
            serde_json::to_string_pretty(inst).expect("serializes"),
        )?;
    }
    std::fs::write(
        dir.join("report.md"),
        metazeta::report::headline_markdown(outcome),
    )?;
    std::fs::write(
        dir.join("report.json"),
        serde_json::to_string_pretty(&metazeta::report::headline_json(outcome))
            .expect("serializes"),
    )?;
    Ok(())
}
