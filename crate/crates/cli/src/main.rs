//! `carpet`: deterministic pipeline from a carpet spec to spectra, heat-trace
//! models, zeta functions and gas thermodynamics.

mod artifacts;
mod config;
mod pipeline;

use std::path::PathBuf;
use std::process::ExitCode;

use carpet_core::{BoundaryCondition, Error, Result};
use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde_json::{json, Value};

use config::{Overrides, RunConfig};
use pipeline::{BecArgs, ModelChoice};

#[derive(Parser)]
#[command(name = "carpet", version, about = "Spectral analysis and quantum gases on generalized Sierpinski carpets")]
struct Cli {
    /// TOML run configuration; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (default `carpet-out`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct CarpetArgs {
    /// Built-in carpet: SC31, MS31, MS42, MS53, MS64.
    #[arg(long)]
    preset: Option<String>,
    /// Carpet spec file.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Approximation level.
    #[arg(long)]
    level: Option<usize>,
    /// neumann, dirichlet (periodic only applies to boxes).
    #[arg(long, value_parser = parse_bc)]
    bc: Option<BoundaryCondition>,
}

#[derive(Args, Clone, Default)]
struct ModelArgs {
    /// Heat-trace model JSON instead of fitting the carpet.
    #[arg(long)]
    model: Option<PathBuf>,
    /// Unit-volume Euclidean model in this dimension.
    #[arg(long)]
    euclid: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Check the carpet conditions.
    Validate(CarpetArgs),
    /// Dimensions, bounds and cell counts.
    Info(CarpetArgs),
    Graph {
        #[command(subcommand)]
        cmd: GraphCmd,
    },
    Spectrum {
        #[command(subcommand)]
        cmd: SpectrumCmd,
    },
    Trace {
        #[command(subcommand)]
        cmd: TraceCmd,
    },
    Zeta {
        #[command(subcommand)]
        cmd: ZetaCmd,
    },
    Thermo {
        #[command(subcommand)]
        cmd: ThermoCmd,
    },
    Oracle {
        #[command(subcommand)]
        cmd: OracleCmd,
    },
    /// Validation, spectrum, trace analysis, pole table and BEC report.
    Run {
        #[command(flatten)]
        carpet: CarpetArgs,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
    },
}

#[derive(Subcommand)]
enum GraphCmd {
    /// Build the approximation graph and write its edge list.
    Build(CarpetArgs),
}

#[derive(Subcommand)]
enum SpectrumCmd {
    /// Full Laplacian spectrum (cached).
    Compute(CarpetArgs),
}

#[derive(Subcommand)]
enum TraceCmd {
    /// Spectral dimension fit, log-period detection and Fourier model.
    Analyze {
        #[command(flatten)]
        carpet: CarpetArgs,
        /// Fit boundary terms from the Dirichlet/Neumann pair.
        #[arg(long)]
        boundary: bool,
    },
}

#[derive(Args, Clone)]
struct ZetaSource {
    #[command(flatten)]
    carpet: CarpetArgs,
    #[command(flatten)]
    model: ModelArgs,
    /// Use the unit Dirichlet interval.
    #[arg(long)]
    interval: bool,
}

#[derive(Subcommand)]
enum ZetaCmd {
    /// Evaluate the continued zeta function.
    Eval {
        #[command(flatten)]
        source: ZetaSource,
        /// Points `re` or `re,im`; repeatable.
        #[arg(long = "s", required = true, allow_hyphen_values = true, value_parser = parse_complex)]
        s: Vec<Complex64>,
        #[arg(long, default_value = "0", allow_hyphen_values = true, value_parser = parse_complex)]
        gamma: Complex64,
    },
    /// Pole and residue table.
    Poles {
        #[command(flatten)]
        source: ZetaSource,
        #[arg(long, default_value = "0", allow_hyphen_values = true, value_parser = parse_complex)]
        gamma: Complex64,
    },
    /// `zeta(-1/2) / 2`.
    Casimir {
        #[command(flatten)]
        source: ZetaSource,
    },
}

#[derive(Subcommand)]
enum ThermoCmd {
    /// Critical densities, BEC verdict and optional fugacity solve.
    Bec {
        #[command(flatten)]
        carpet: CarpetArgs,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        /// Domain scale.
        #[arg(long, default_value_t = 1.0)]
        l: f64,
        /// Target density for the fugacity solve.
        #[arg(long)]
        rho: Option<f64>,
    },
    /// Photon energy density and pressure.
    Blackbody {
        #[command(flatten)]
        carpet: CarpetArgs,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        beta: f64,
        #[arg(long, default_value_t = 1.0)]
        l: f64,
    },
    /// Waveguide Casimir pressure.
    Casimir {
        #[command(flatten)]
        carpet: CarpetArgs,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        a: f64,
        #[arg(long)]
        b: f64,
        /// Adds the leading thermal pressure.
        #[arg(long)]
        beta: Option<f64>,
    },
    /// Critical densities and blackbody law over a beta grid.
    Sweep {
        #[command(flatten)]
        carpet: CarpetArgs,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 0.1)]
        beta_min: f64,
        #[arg(long, default_value_t = 10.0)]
        beta_max: f64,
        #[arg(long, default_value_t = 50)]
        steps: usize,
        #[arg(long, default_value_t = 1.0)]
        l: f64,
    },
}

#[derive(Subcommand)]
enum OracleCmd {
    /// Euclidean reference checks.
    Selftest,
}

fn parse_bc(s: &str) -> std::result::Result<BoundaryCondition, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_complex(s: &str) -> std::result::Result<Complex64, String> {
    let mut parts = s.split(',');
    let re = parts.next().unwrap_or("").trim().parse::<f64>().map_err(|e| format!("{s}: {e}"))?;
    let im = match parts.next() {
        Some(p) => p.trim().parse::<f64>().map_err(|e| format!("{s}: {e}"))?,
        None => 0.0,
    };
    if parts.next().is_some() {
        return Err(format!("{s}: expected `re` or `re,im`"));
    }
    Ok(Complex64::new(re, im))
}

fn resolve(cli_config: &Option<PathBuf>, out: &Option<PathBuf>, c: CarpetArgs) -> Result<RunConfig> {
    RunConfig::resolve(Overrides {
        preset: c.preset,
        spec: c.spec,
        level: c.level,
        bc: c.bc,
        out: out.clone(),
        config: cli_config.clone(),
    })
}

fn choice(m: ModelArgs) -> ModelChoice {
    ModelChoice { model_file: m.model, euclid: m.euclid }
}

/// Summary JSON and whether the command succeeded.
fn dispatch(cli: Cli) -> Result<(Value, bool)> {
    let (cf, out) = (&cli.config, &cli.out);
    let ok = |v: Value| Ok((v, true));
    match cli.command {
        Command::Validate(c) => {
            let v = pipeline::validate(&resolve(cf, out, c)?)?;
            let valid = v["valid"] == json!(true);
            Ok((v, valid))
        }
        Command::Info(c) => ok(pipeline::info(&resolve(cf, out, c)?)?),
        Command::Graph { cmd: GraphCmd::Build(c) } => ok(pipeline::graph_build(&resolve(cf, out, c)?)?),
        Command::Spectrum { cmd: SpectrumCmd::Compute(c) } => ok(pipeline::spectrum_compute(&resolve(cf, out, c)?)?),
        Command::Trace { cmd: TraceCmd::Analyze { carpet, boundary } } => {
            ok(pipeline::trace_analyze(&resolve(cf, out, carpet)?, boundary)?)
        }
        Command::Zeta { cmd } => match cmd {
            ZetaCmd::Eval { source, s, gamma } => {
                let cfg = resolve(cf, out, source.carpet)?;
                ok(pipeline::zeta_eval(&cfg, source.interval, &choice(source.model), gamma, &s)?)
            }
            ZetaCmd::Poles { source, gamma } => {
                let cfg = resolve(cf, out, source.carpet)?;
                ok(pipeline::zeta_poles(&cfg, source.interval, &choice(source.model), gamma)?)
            }
            ZetaCmd::Casimir { source } => {
                let cfg = resolve(cf, out, source.carpet)?;
                ok(pipeline::zeta_casimir(&cfg, source.interval, &choice(source.model))?)
            }
        },
        Command::Thermo { cmd } => match cmd {
            ThermoCmd::Bec { carpet, model, beta, l, rho } => {
                let cfg = resolve(cf, out, carpet)?;
                ok(pipeline::thermo_bec(&cfg, &choice(model), &BecArgs { beta, l, rho })?)
            }
            ThermoCmd::Blackbody { carpet, model, beta, l } => {
                ok(pipeline::thermo_blackbody(&resolve(cf, out, carpet)?, &choice(model), beta, l)?)
            }
            ThermoCmd::Casimir { carpet, model, a, b, beta } => {
                ok(pipeline::thermo_casimir(&resolve(cf, out, carpet)?, &choice(model), a, b, beta)?)
            }
            ThermoCmd::Sweep { carpet, model, beta_min, beta_max, steps, l } => ok(pipeline::thermo_sweep(
                &resolve(cf, out, carpet)?,
                &choice(model),
                beta_min,
                beta_max,
                steps,
                l,
            )?),
        },
        Command::Oracle { cmd: OracleCmd::Selftest } => {
            pipeline::oracle_selftest(&resolve(cf, out, CarpetArgs::default())?)
        }
        Command::Run { carpet, beta } => ok(pipeline::run_all(&resolve(cf, out, carpet)?, beta)?),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok((summary, passed)) => {
            println!("{}", serde_json::to_string_pretty(&summary).expect("summary serializes"));
            if passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            let err = json!({ "error": { "kind": e.kind(), "message": e.to_string() } });
            eprintln!("{err}");
            ExitCode::from(2)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_arguments() {
        assert_eq!(parse_complex("-0.5").unwrap(), Complex64::new(-0.5, 0.0));
        assert_eq!(parse_complex("2, -3e1").unwrap(), Complex64::new(2.0, -30.0));
        assert!(parse_complex("1,2,3").is_err());
        assert!(parse_complex("x").is_err());
    }
}
