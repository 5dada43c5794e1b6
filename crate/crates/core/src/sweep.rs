//! Temperature sweeps, invariant-suite reports and their file formats.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{verify_full_algebra, AlgebraReport, LadderSet};
use crate::bogoliubov::{canonical_transform, reduce_hamiltonian, transformed_supercharges};
use crate::error::{Error, Result};
use crate::fock::FockSpaceConfig;
use crate::linalg::{compress, hermitian_eigen, spectral_norm};
use crate::model::{
    build_interacting_model, check_susy_exactness, solve_frequencies, ModelParams, MODEL_TOLERANCE,
};
use crate::thermal::{evaluate, Cutoff, ThermalParams, ThermalRecord};

pub const ENGINE_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub omega1: f64,
    pub alpha2: f64,
    /// Lowest temperature, in units of `ω₁`.
    pub t_min: f64,
    pub t_max: f64,
    pub points: usize,
    pub cutoff: Cutoff,
    pub output_path: PathBuf,
    pub format: OutputFormat,
    pub emit_plot: bool,
    pub tail_tolerance: f64,
}

impl SweepConfig {
    /// The default grid `T/ω₁ ∈ [0.1, 2.0]` with 20 points at `ω₁ = 1`,
    /// `α₂ = 0.5`.
    pub fn new(output_path: impl Into<PathBuf>) -> Self {
        SweepConfig {
            omega1: 1.0,
            alpha2: 0.5,
            t_min: 0.1,
            t_max: 2.0,
            points: 20,
            cutoff: Cutoff::Auto,
            output_path: output_path.into(),
            format: OutputFormat::Csv,
            emit_plot: false,
            tail_tolerance: FockSpaceConfig::DEFAULT_TAIL_TOLERANCE,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_min.is_finite()
            && self.t_max.is_finite()
            && 0.0 < self.t_min
            && self.t_min < self.t_max)
        {
            return Err(Error::InvalidConfig(format!(
                "need 0 < tmin < tmax, got tmin = {}, tmax = {}",
                self.t_min, self.t_max
            )));
        }
        if self.points < 2 {
            return Err(Error::InvalidConfig(format!(
                "need at least 2 points, got {}",
                self.points
            )));
        }
        if !(self.tail_tolerance.is_finite() && self.tail_tolerance > 0.0) {
            return Err(Error::InvalidConfig(
                "tail tolerance must be positive".into(),
            ));
        }
        ModelParams::new(self.omega1, self.alpha2)?;
        Ok(())
    }

    /// Uniform grid in `T/ω₁`, endpoints included exactly.
    pub fn temperatures(&self) -> Vec<f64> {
        let n = self.points;
        let step = (self.t_max - self.t_min) / (n - 1) as f64;
        (0..n)
            .map(|i| {
                if i == n - 1 {
                    self.t_max
                } else {
                    self.t_min + step * i as f64
                }
            })
            .collect()
    }

    pub fn model(&self) -> Result<ModelParams> {
        ModelParams::new(self.omega1, self.alpha2)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub config: SweepConfig,
    pub engine_version: String,
    pub timestamp: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub rows: Vec<ThermalRecord>,
    pub provenance: Provenance,
}

impl SweepResult {
    pub fn flagged_rows(&self) -> usize {
        self.rows.iter().filter(|r| r.flagged).count()
    }
}

/// Evaluate every temperature of the grid in parallel (on the current rayon
/// pool); rows come back in ascending temperature order.
pub fn run_sweep(config: &SweepConfig, timestamp: impl Into<String>) -> Result<SweepResult> {
    config.validate()?;
    let model = config.model()?;
    let rows = config
        .temperatures()
        .into_par_iter()
        .map(|t| {
            let params = ThermalParams::from_temperature(t, config.omega1)?;
            evaluate(model, &params, config.cutoff, config.tail_tolerance)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult {
        rows,
        provenance: Provenance {
            config: config.clone(),
            engine_version: ENGINE_VERSION.to_string(),
            timestamp: timestamp.into(),
        },
    })
}

pub const CSV_COLUMNS: [&str; 14] = [
    "beta",
    "T_over_omega1",
    "E0_over_omega1",
    "E0_closed_form",
    "gibbs_oracle",
    "witten_numeric",
    "witten_closed_form",
    "goldstino_norm_numeric",
    "goldstino_norm2_numeric",
    "goldstino_norm_closed_form",
    "N_b_used",
    "tail_mass",
    "path",
    "flagged",
];

/// 17 significant digits, enough to reproduce every `f64` exactly.
fn fixed(x: f64) -> String {
    format!("{x:.16e}")
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// CSV with a single `#` provenance line followed by a header row.
pub fn write_csv<W: Write>(result: &SweepResult, mut out: W) -> Result<()> {
    let p = &result.provenance;
    writeln!(
        out,
        "# susy-tfd {} at {} config {}",
        p.engine_version,
        p.timestamp,
        serde_json::to_string(&p.config)?
    )
    .map_err(|source| Error::Io {
        path: PathBuf::from("<csv>"),
        source,
    })?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_COLUMNS)?;
    for r in &result.rows {
        w.write_record([
            fixed(r.beta),
            fixed(r.t_over_omega1),
            fixed(r.e0_over_omega1),
            fixed(r.e0_closed_form),
            fixed(r.gibbs_oracle),
            fixed(r.witten_numeric),
            fixed(r.witten_closed_form),
            fixed(r.goldstino_norm_numeric),
            fixed(r.goldstino_norm2_numeric),
            fixed(r.goldstino_norm_closed_form),
            r.n_b_used.to_string(),
            fixed(r.tail_mass),
            r.path.to_string(),
            r.flagged.to_string(),
        ])?;
    }
    w.flush().map_err(|source| Error::Io {
        path: PathBuf::from("<csv>"),
        source,
    })?;
    Ok(())
}

/// Rows of a CSV written by [`write_csv`].
pub fn read_csv<R: Read>(input: R) -> Result<Vec<ThermalRecord>> {
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(input);
    let mut rows = Vec::new();
    for rec in r.deserialize() {
        rows.push(rec?);
    }
    Ok(rows)
}

/// Gnuplot-compatible whitespace-separated columns.
pub fn write_plot_data<W: Write>(result: &SweepResult, mut out: W) -> std::io::Result<()> {
    writeln!(out, "# T_over_omega1 E0_over_omega1 E0_closed_form")?;
    for r in &result.rows {
        writeln!(
            out,
            "{} {} {}",
            fixed(r.t_over_omega1),
            fixed(r.e0_over_omega1),
            fixed(r.e0_closed_form)
        )?;
    }
    Ok(())
}

/// A self-contained SVG line chart of `E₀/ω₁` against `T/ω₁`.
pub fn render_svg(result: &SweepResult) -> String {
    const W: f64 = 640.0;
    const H: f64 = 420.0;
    const M: f64 = 56.0;
    let xs: Vec<f64> = result.rows.iter().map(|r| r.t_over_omega1).collect();
    let ys: Vec<f64> = result.rows.iter().map(|r| r.e0_over_omega1).collect();
    let (x0, x1) = (
        xs.iter().cloned().fold(f64::INFINITY, f64::min),
        xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
    );
    let y1 = ys.iter().cloned().fold(0.0, f64::max).max(1e-12);
    let sx = |x: f64| M + (x - x0) / (x1 - x0).max(f64::MIN_POSITIVE) * (W - 2.0 * M);
    let sy = |y: f64| H - M - y / y1 * (H - 2.0 * M);
    let points: Vec<String> = xs
        .iter()
        .zip(&ys)
        .map(|(&x, &y)| format!("{:.2},{:.2}", sx(x), sy(y)))
        .collect();

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    svg.push_str(&format!(
        "<line x1=\"{M}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\" stroke=\"black\"/>\n<line x1=\"{M}\" y1=\"{M}\" x2=\"{M}\" y2=\"{b}\" stroke=\"black\"/>\n",
        b = H - M,
        r = W - M
    ));
    for i in 0..=4 {
        let f = i as f64 / 4.0;
        let (x, y) = (x0 + f * (x1 - x0), f * y1);
        svg.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"11\" text-anchor=\"middle\">{x:.2}</text>\n",
            sx(x),
            H - M + 16.0
        ));
        svg.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"11\" text-anchor=\"end\">{y:.2}</text>\n",
            M - 6.0,
            sy(y) + 4.0
        ));
    }
    svg.push_str(&format!(
        "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"13\" text-anchor=\"middle\">T/ω₁</text>\n",
        W / 2.0,
        H - 12.0
    ));
    svg.push_str(&format!(
        "<text x=\"16\" y=\"{:.2}\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 16 {:.2})\">E₀/ω₁</text>\n",
        H / 2.0,
        H / 2.0
    ));
    svg.push_str(&format!(
        "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\" points=\"{}\"/>\n",
        points.join(" ")
    ));
    svg.push_str("</svg>\n");
    svg
}

fn sibling(path: &Path, ext: &str) -> PathBuf {
    path.with_extension(ext)
}

/// Write the sweep in the configured format, plus `.svg` and `.dat` plot
/// files next to it when requested. Returns the paths written.
pub fn write_outputs(result: &SweepResult) -> Result<Vec<PathBuf>> {
    let cfg = &result.provenance.config;
    let path = &cfg.output_path;
    let file = File::create(path).map_err(io_err(path))?;
    let mut out = BufWriter::new(file);
    match cfg.format {
        OutputFormat::Csv => write_csv(result, &mut out).map_err(|e| with_path(e, path))?,
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut out, result)?;
            writeln!(out).map_err(io_err(path))?;
        }
    }
    out.flush().map_err(io_err(path))?;
    let mut written = vec![path.clone()];
    if cfg.emit_plot {
        let svg = sibling(path, "svg");
        std::fs::write(&svg, render_svg(result)).map_err(io_err(&svg))?;
        let dat = sibling(path, "dat");
        let f = File::create(&dat).map_err(io_err(&dat))?;
        let mut w = BufWriter::new(f);
        write_plot_data(result, &mut w).map_err(io_err(&dat))?;
        w.flush().map_err(io_err(&dat))?;
        written.extend([svg, dat]);
    }
    Ok(written)
}

fn with_path(e: Error, path: &Path) -> Error {
    match e {
        Error::Io { source, .. } => Error::Io {
            path: path.to_path_buf(),
            source,
        },
        other => other,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub params: ModelParams,
    pub boson_cutoff: usize,
    pub guard_band: usize,
    pub checks: Vec<AlgebraReport>,
    pub ground_energy: f64,
    pub notes: Vec<String>,
    pub passed: bool,
}

/// The invariant suite: bare and transformed ladder algebra, supersymmetry
/// of the model, the supercharge identity and the Bogoliubov reduction.
pub fn verify_report(
    model: ModelParams,
    cfg: &FockSpaceConfig,
    algebra_tolerance: f64,
) -> Result<VerifyReport> {
    let bundle = build_interacting_model(model, cfg)?;
    let space = bundle.space;
    let mut checks = Vec::new();
    let mut notes = Vec::new();

    let tag = |mut r: AlgebraReport, prefix: &str| {
        r.relation = format!("{prefix}: {}", r.relation);
        r
    };
    for r in verify_full_algebra(&LadderSet::canonical(&space)?, &space, algebra_tolerance)? {
        checks.push(tag(r, "bare"));
    }
    let modes = canonical_transform(&model, &space)?;
    if modes.params.is_identity() {
        notes.push("alpha2 = 0: the Bogoliubov transformation is the identity".into());
    }
    for r in verify_full_algebra(&modes.ladder_set()?, &modes.space, algebra_tolerance)? {
        checks.push(tag(r, "transformed"));
    }

    let exact = check_susy_exactness(&bundle)?;
    checks.push(exact.commutator.clone());
    checks.push(exact.annihilation.clone());
    checks.push(AlgebraReport::new(
        "|E_ground| = 0",
        exact.ground_energy.abs(),
        MODEL_TOLERANCE,
        exact.ground_multiplicity,
    ));
    checks.push(bundle.supercharge_identity());
    checks.push(bundle.nilpotency());

    let reduction = reduce_hamiltonian(&bundle, &modes)?;
    checks.push(AlgebraReport::new(
        "H = ω₁(a₂†a₂ + b₂†b₂)",
        reduction.residual,
        MODEL_TOLERANCE,
        reduction.guarded_dim,
    ));
    let (g2, _) = transformed_supercharges(&modes)?;
    let g2 = g2.to_dense()?;
    let idx = modes.space.guarded_single_indices();
    let comm = &reduction.h_reduced * &g2 - &g2 * &reduction.h_reduced;
    checks.push(AlgebraReport::new(
        "[H_reduced, G_2S] = 0",
        spectral_norm(&compress(&comm, &idx)),
        MODEL_TOLERANCE,
        idx.len(),
    ));

    if !model.is_supersymmetric() {
        notes.push(format!(
            "detuned: omega2 = {} differs from (omega1² + alpha2²)/omega1 = {}",
            model.omega2,
            (model.omega1 * model.omega1 + model.alpha2 * model.alpha2) / model.omega1
        ));
    }
    let passed = checks.iter().all(|c| c.passed);
    Ok(VerifyReport {
        params: model,
        boson_cutoff: space.boson_cutoff,
        guard_band: space.guard_band,
        checks,
        ground_energy: exact.ground_energy,
        notes,
        passed,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumRow {
    pub index: usize,
    pub eigenvalue: f64,
    pub multiplicity: usize,
}

/// Lowest `k` eigenvalues, one row each, annotated with the multiplicity of
/// the level they belong to.
pub fn spectrum_rows(
    model: ModelParams,
    k: usize,
    cfg: &FockSpaceConfig,
) -> Result<Vec<SpectrumRow>> {
    let bundle = build_interacting_model(model, cfg)?;
    let levels = crate::model::spectrum(&bundle, k)?;
    let (values, _) = hermitian_eigen(&bundle.h)?;
    let mut rows = Vec::with_capacity(k);
    let mut idx = 0;
    for (_, mult) in levels {
        for _ in 0..mult {
            rows.push(SpectrumRow {
                index: idx,
                eigenvalue: values[idx],
                multiplicity: mult,
            });
            idx += 1;
        }
    }
    Ok(rows)
}

pub fn write_spectrum_csv<W: Write>(rows: &[SpectrumRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["index", "eigenvalue", "multiplicity"])?;
    for r in rows {
        w.write_record([
            r.index.to_string(),
            fixed(r.eigenvalue),
            r.multiplicity.to_string(),
        ])?;
    }
    w.flush().map_err(|source| Error::Io {
        path: PathBuf::from("<csv>"),
        source,
    })?;
    Ok(())
}

/// JSON document for the frequency solver: the solution, or a structured
/// error with an explanation.
pub fn frequencies_document(omega2: f64, alpha2: f64) -> (bool, serde_json::Value) {
    match solve_frequencies(omega2, alpha2) {
        Ok(s) => (true, serde_json::to_value(s).expect("plain struct")),
        Err(e) => {
            let kind = match e {
                Error::ComplexRoots { .. } => "complex-roots",
                _ => "invalid-parameter",
            };
            (
                false,
                serde_json::json!({
                    "error": kind,
                    "message": e.to_string(),
                    "omega2": omega2,
                    "alpha2": alpha2,
                }),
            )
        }
    }
}
