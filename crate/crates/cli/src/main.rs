use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use susy_tfd::fock::FockSpaceConfig;
use susy_tfd::model::ModelParams;
use susy_tfd::sweep::{
    frequencies_document, run_sweep, spectrum_rows, verify_report, write_outputs,
    write_spectrum_csv, OutputFormat, SweepConfig,
};
use susy_tfd::thermal::{Cutoff, AUTO_CUTOFF_MAX};

const WORKERS_ENV: &str = "SUSY_TFD_WORKERS";

#[derive(Parser, Debug)]
#[command(
    name = "susy-tfd",
    version,
    about = "Supersymmetric oscillator on a truncated Fock space, at zero and finite temperature"
)]
struct Cli {
    /// Worker threads for parallel sweeps.
    #[arg(long, global = true, env = WORKERS_ENV)]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the operator-identity suite and write a JSON pass/fail report.
    Verify(VerifyArgs),
    /// Lowest eigenvalues of the model Hamiltonian as CSV.
    Spectrum(SpectrumArgs),
    /// Thermal vacuum energy, Witten index and Goldstino norms over a temperature grid.
    ThermalSweep(SweepArgs),
    /// Bosonic frequencies compatible with a given omega2 and alpha2.
    Frequencies(FrequencyArgs),
    /// Goldstino norms over a temperature grid.
    Goldstino(SweepArgs),
}

#[derive(Args, Debug, Clone)]
struct ModelArgs {
    #[arg(long, default_value_t = 1.0)]
    omega1: f64,
    #[arg(long, default_value_t = 0.5)]
    alpha2: f64,
    /// Override the derived omega2 (produces a detuned, non-supersymmetric model).
    #[arg(long)]
    omega2: Option<f64>,
}

impl ModelArgs {
    fn params(&self) -> Result<ModelParams> {
        Ok(match self.omega2 {
            Some(w2) => ModelParams::detuned(self.omega1, self.alpha2, w2)?,
            None => ModelParams::new(self.omega1, self.alpha2)?,
        })
    }
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Boson cutoff: an integer or "auto".
    #[arg(long, default_value = "64")]
    nb: Cutoff,
    /// Tolerance for the ladder-algebra relations.
    #[arg(long, default_value_t = susy_tfd::algebra::DEFAULT_TOLERANCE)]
    tolerance: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SpectrumArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Number of eigenvalues.
    #[arg(short, long, default_value_t = 7)]
    k: usize,
    #[arg(long, default_value = "64")]
    nb: Cutoff,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Lowest temperature in units of omega1.
    #[arg(long, default_value_t = 0.1)]
    tmin: f64,
    #[arg(long, default_value_t = 2.0)]
    tmax: f64,
    #[arg(long, default_value_t = 20)]
    points: usize,
    #[arg(long, default_value = "auto")]
    nb: Cutoff,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Also write an SVG chart and a gnuplot data file next to the output.
    #[arg(long)]
    plot: bool,
    /// Largest tolerated boson tail mass.
    #[arg(long, default_value_t = FockSpaceConfig::DEFAULT_TAIL_TOLERANCE)]
    tolerance: f64,
}

#[derive(Args, Debug)]
struct FrequencyArgs {
    #[arg(long)]
    omega2: f64,
    #[arg(long)]
    alpha2: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => {
            std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

/// The given cutoff, or the smallest of 64, 128, … that certifies the
/// supercharge dressing.
fn model_space(model: &ModelParams, nb: Cutoff) -> Result<FockSpaceConfig> {
    let candidates: Vec<usize> = match nb {
        Cutoff::Fixed(n) => vec![n],
        Cutoff::Auto => std::iter::successors(Some(64), |n| Some(n * 2))
            .take_while(|&n| n <= AUTO_CUTOFF_MAX)
            .collect(),
    };
    let mut last = None;
    for n in candidates {
        match FockSpaceConfig::new(n)?.with_dressing_guard(model.dressing()) {
            Ok(cfg) => return Ok(cfg),
            Err(e) => last = Some(e),
        }
    }
    Err(last.expect("at least one candidate").into())
}

fn cmd_verify(args: &VerifyArgs) -> Result<bool> {
    let model = args.model.params()?;
    let cfg = model_space(&model, args.nb)?;
    let report = verify_report(model, &cfg, args.tolerance)?;
    for c in &report.checks {
        eprintln!(
            "{} {:<40} {:.3e} (tol {:.0e})",
            if c.passed { "pass" } else { "FAIL" },
            c.relation,
            c.max_deviation,
            c.tolerance
        );
    }
    for n in &report.notes {
        eprintln!("note: {n}");
    }
    emit(
        args.out.as_deref(),
        &(serde_json::to_string_pretty(&report)? + "\n"),
    )?;
    Ok(report.passed)
}

fn cmd_spectrum(args: &SpectrumArgs) -> Result<bool> {
    let model = args.model.params()?;
    let cfg = model_space(&model, args.nb)?;
    let rows = spectrum_rows(model, args.k, &cfg)?;
    let mut buf = Vec::new();
    writeln!(
        buf,
        "# lowest {} eigenvalues, omega1 = {}, alpha2 = {}, omega2 = {}, N_b = {}",
        args.k, model.omega1, model.alpha2, model.omega2, cfg.boson_cutoff
    )?;
    write_spectrum_csv(&rows, &mut buf)?;
    emit(args.out.as_deref(), std::str::from_utf8(&buf)?)?;
    Ok(true)
}

fn sweep_config(args: &SweepArgs, default_out: &str) -> Result<SweepConfig> {
    if args.model.omega2.is_some() {
        bail!(
            "--omega2 is not supported for thermal sweeps; omega2 follows from omega1 and alpha2"
        );
    }
    let mut cfg = SweepConfig::new(
        args.out
            .clone()
            .unwrap_or_else(|| PathBuf::from(default_out)),
    );
    cfg.omega1 = args.model.omega1;
    cfg.alpha2 = args.model.alpha2;
    cfg.t_min = args.tmin;
    cfg.t_max = args.tmax;
    cfg.points = args.points;
    cfg.cutoff = args.nb;
    cfg.format = match args.format {
        Format::Csv => OutputFormat::Csv,
        Format::Json => OutputFormat::Json,
    };
    cfg.emit_plot = args.plot;
    cfg.tail_tolerance = args.tolerance;
    cfg.validate()?;
    Ok(cfg)
}

fn timestamp() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

fn cmd_thermal_sweep(args: &SweepArgs) -> Result<bool> {
    let default = match args.format {
        Format::Csv => "thermal_sweep.csv",
        Format::Json => "thermal_sweep.json",
    };
    let cfg = sweep_config(args, default)?;
    let result = run_sweep(&cfg, timestamp())?;
    let written = write_outputs(&result)?;
    for r in &result.rows {
        eprintln!(
            "T/ω₁ = {:.4}  E₀/ω₁ = {:.10}  closed form = {:.10}  N_b = {}{}",
            r.t_over_omega1,
            r.e0_over_omega1,
            r.e0_closed_form,
            r.n_b_used,
            if r.flagged {
                "  [flagged: truncation]"
            } else {
                ""
            }
        );
    }
    for p in &written {
        eprintln!("wrote {}", p.display());
    }
    let flagged = result.flagged_rows();
    if flagged > 0 {
        eprintln!("{flagged} row(s) flagged: the boson cutoff is too small for those temperatures");
    }
    Ok(flagged == 0)
}

fn cmd_goldstino(args: &SweepArgs) -> Result<bool> {
    let cfg = sweep_config(args, "goldstino.json")?;
    let result = run_sweep(&cfg, timestamp())?;
    let rows: Vec<_> = result
        .rows
        .iter()
        .map(|r| {
            json!({
                "T_over_omega1": r.t_over_omega1,
                "beta": r.beta,
                "norm_g2s": r.goldstino_norm_numeric,
                "norm_g2s_dagger": r.goldstino_norm2_numeric,
                "closed_form": r.goldstino_norm_closed_form,
                "N_b_used": r.n_b_used,
                "flagged": r.flagged,
            })
        })
        .collect();
    let text = match args.format {
        Format::Json => serde_json::to_string_pretty(&rows)? + "\n",
        Format::Csv => {
            let mut s = String::from(
                "T_over_omega1,beta,norm_g2s,norm_g2s_dagger,closed_form,N_b_used,flagged\n",
            );
            for r in &result.rows {
                s.push_str(&format!(
                    "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{},{}\n",
                    r.t_over_omega1,
                    r.beta,
                    r.goldstino_norm_numeric,
                    r.goldstino_norm2_numeric,
                    r.goldstino_norm_closed_form,
                    r.n_b_used,
                    r.flagged
                ));
            }
            s
        }
    };
    emit(args.out.as_deref(), &text)?;
    Ok(result.flagged_rows() == 0)
}

fn cmd_frequencies(args: &FrequencyArgs) -> Result<bool> {
    let (ok, doc) = frequencies_document(args.omega2, args.alpha2);
    if !ok {
        eprintln!(
            "{}",
            doc["message"].as_str().unwrap_or("invalid parameters")
        );
    }
    emit(
        args.out.as_deref(),
        &(serde_json::to_string_pretty(&doc)? + "\n"),
    )?;
    Ok(ok)
}

fn run(cli: Cli) -> Result<bool> {
    if let Some(n) = cli.workers {
        if n == 0 {
            bail!("{WORKERS_ENV} / --workers must be positive");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the worker pool")?;
    }
    match &cli.command {
        Command::Verify(a) => cmd_verify(a),
        Command::Spectrum(a) => cmd_spectrum(a),
        Command::ThermalSweep(a) => cmd_thermal_sweep(a),
        Command::Frequencies(a) => cmd_frequencies(a),
        Command::Goldstino(a) => cmd_goldstino(a),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
