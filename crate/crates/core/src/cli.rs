//! The `steklov` command-line interface.
//!
//! Every flag mirrors a key of the JSON config file given by `--config`;
//! flags override the file. Exit codes: 0 success, 2 input or validation
//! error, 3 numerical failure, 4 invariant violation.

use crate::elliptic::QuadraticProblem;
use crate::error::{Error, Result};
use crate::io::{csv_table, to_json_string, write_atomic, write_json, SCHEMA_VERSION};
use crate::lift::{analyze_pair, assign_symmetry, PairAnalysis};
use crate::monodromy::{default_lambda_grid, selfcheck};
use crate::pants::{circle_data, moduli, pants_of, CircleData, ModuliTriple, PantsClass};
use crate::rational_map::{assemble_full_map, ps3_instance, reconstruct_from_a, RationalMap, RedSegmentChoice};
use crate::spectral::{count_zeros_of, solve, u_from_coefficients, SpectralProblem, Spectrum, Symmetry, CONVERGED_GAP};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_INVARIANT: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "steklov",
    version,
    about = "Spectral analysis of Poincaré–Steklov equations with a rational parameter"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the truncated spectral problem; writes spectrum.json and eigenfunctions.csv.
    Spectrum(CommonArgs),
    /// Lift each converged eigenpair and run the invariant checks; writes analysis.json.
    Analyze(CommonArgs),
    /// Build a map from a branch value a or from four branch values; writes map.json.
    Reconstruct(CommonArgs),
    /// Print the cross-ratio moduli of the pants and the circle certificate.
    PantsModuli(CommonArgs),
    /// Compare solver eigenvalues of the quadratic map with the closed form.
    ValidateQuadratic(CommonArgs),
    /// Run the identity battery of the monodromy algebra over a λ grid.
    MonodromySelfcheck(CommonArgs),
}

/// Flags shared by all commands. Each has a config-file key of the same name
/// with dashes replaced by underscores.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// JSON config file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Map as inline JSON {"num": [...], "den": [...]} or a path to such a file.
    #[arg(long)]
    pub map: Option<String>,
    /// Use the quadratic map with parameter C > 1.
    #[arg(long)]
    pub quadratic: Option<f64>,
    /// Use the assembled cubic test instance with normalized branch value a.
    #[arg(long)]
    pub ps3_a: Option<f64>,
    /// Red window of the test instance, as two fractions `f0,f1`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub window: Option<Vec<f64>>,
    /// Truncation order N.
    #[arg(long)]
    pub n: Option<usize>,
    /// Only report eigenvalues in `lo,hi`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub lambda_range: Option<Vec<f64>>,
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
    /// Eigenvalues with |λ − 1| at or below this gap are not analyzed.
    #[arg(long)]
    pub converged_gap: Option<f64>,
    /// Existing spectrum.json used by `analyze`.
    #[arg(long)]
    pub spectrum: Option<PathBuf>,
    /// Normalized branch value for `reconstruct`.
    #[arg(long)]
    pub a: Option<f64>,
    /// Four cyclically increasing branch values for `reconstruct`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub branch_points: Option<Vec<f64>>,
    #[arg(long, value_enum)]
    pub segment: Option<SegmentArg>,
    /// Spectral parameter for the circle data of `pants-moduli`.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// λ grid for `monodromy-selfcheck`.
    #[arg(long, value_delimiter = ',')]
    pub lambdas: Option<Vec<f64>>,
    /// Number of eigenvalues compared by `validate-quadratic`.
    #[arg(long)]
    pub count: Option<usize>,
    #[arg(long, hide = true)]
    pub inject_sign_error: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SegmentArg {
    Annulus,
    Inner,
    Outer,
}

impl From<SegmentArg> for RedSegmentChoice {
    fn from(s: SegmentArg) -> Self {
        match s {
            SegmentArg::Annulus => RedSegmentChoice::Annulus,
            SegmentArg::Inner => RedSegmentChoice::Inner,
            SegmentArg::Outer => RedSegmentChoice::Outer,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "default_gap")]
    pub converged_gap: f64,
    /// Relative eigenvalue error accepted by `validate-quadratic`.
    #[serde(default = "default_quadratic_rel")]
    pub quadratic_rel: f64,
}

fn default_gap() -> f64 {
    CONVERGED_GAP
}

fn default_quadratic_rel() -> f64 {
    1e-6
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { converged_gap: default_gap(), quadratic_rel: default_quadratic_rel() }
    }
}

/// Map given inline or through a file path.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MapSource {
    Inline(RationalMap),
    Path(String),
}

/// Merged configuration of a run.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub command: Option<String>,
    pub map: Option<MapSource>,
    pub quadratic: Option<f64>,
    pub ps3_a: Option<f64>,
    pub window: Option<(f64, f64)>,
    pub n: Option<usize>,
    pub lambda_range: Option<(f64, f64)>,
    pub output_dir: Option<PathBuf>,
    pub tolerances: Tolerances,
    pub spectrum: Option<PathBuf>,
    pub a: Option<f64>,
    pub branch_points: Option<[f64; 4]>,
    pub segment: Option<SegmentArg>,
    pub lambda: Option<f64>,
    pub lambdas: Option<Vec<f64>>,
    pub count: Option<usize>,
    pub inject_sign_error: bool,
}

fn input_err(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

impl RunConfig {
    /// Loads the config file, if any, and applies the flags on top.
    pub fn from_args(command: &str, args: &CommonArgs) -> Result<Self> {
        let mut cfg = match &args.config {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| input_err(format!("cannot read config {}: {e}", p.display())))?;
                serde_json::from_str::<RunConfig>(&text)?
            }
            None => RunConfig::default(),
        };
        if let Some(c) = &cfg.command {
            if c != command {
                return Err(input_err(format!("config is for command `{c}`, not `{command}`")));
            }
        }
        cfg.command = Some(command.to_string());
        if let Some(m) = &args.map {
            cfg.map = Some(if m.trim_start().starts_with('{') {
                MapSource::Inline(serde_json::from_str(m)?)
            } else {
                MapSource::Path(m.clone())
            });
        }
        macro_rules! take {
            ($($f:ident),*) => { $( if args.$f.is_some() { cfg.$f = args.$f.clone(); } )* };
        }
        take!(quadratic, ps3_a, n, output_dir, spectrum, a, segment, lambda, lambdas, count);
        let arity = |name: &str, v: &[f64], k: usize| {
            if v.len() == k {
                Ok(())
            } else {
                Err(input_err(format!("--{name} takes {k} comma-separated values, got {}", v.len())))
            }
        };
        if let Some(w) = &args.window {
            arity("window", w, 2)?;
            cfg.window = Some((w[0], w[1]));
        }
        if let Some(r) = &args.lambda_range {
            arity("lambda-range", r, 2)?;
            cfg.lambda_range = Some((r[0], r[1]));
        }
        if let Some(b) = &args.branch_points {
            arity("branch-points", b, 4)?;
            cfg.branch_points = Some([b[0], b[1], b[2], b[3]]);
        }
        if let Some(g) = args.converged_gap {
            cfg.tolerances.converged_gap = g;
        }
        cfg.inject_sign_error |= args.inject_sign_error;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        let t = &self.tolerances;
        if !(t.converged_gap > 0.0 && t.quadratic_rel > 0.0) {
            return Err(input_err("tolerances must be positive"));
        }
        if let Some(n) = self.n {
            if n < 4 {
                return Err(input_err(format!("N = {n} is below the minimum 4")));
            }
        }
        if let Some((lo, hi)) = self.lambda_range {
            if !(lo < hi) {
                return Err(input_err("lambda_range must satisfy lo < hi"));
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n.unwrap_or(64)
    }

    pub fn output_dir(&self) -> PathBuf {
        self.output_dir.clone().unwrap_or_else(|| PathBuf::from("."))
    }

    fn in_range(&self, lambda: f64) -> bool {
        self.lambda_range.is_none_or(|(lo, hi)| lambda >= lo && lambda <= hi)
    }

    /// The map selected by `map`, `quadratic` or `ps3_a`, in that order.
    pub fn resolve_map(&self) -> Result<RationalMap> {
        if let Some(src) = &self.map {
            return match src {
                MapSource::Inline(m) => Ok(m.clone()),
                MapSource::Path(p) => {
                    let text =
                        std::fs::read_to_string(p).map_err(|e| input_err(format!("cannot read map {p}: {e}")))?;
                    Ok(serde_json::from_str(&text)?)
                }
            };
        }
        if let Some(c) = self.quadratic {
            return RationalMap::quadratic(c);
        }
        if let Some(a) = self.ps3_a {
            return ps3_instance(a, self.window.unwrap_or((0.8, 0.99)));
        }
        Err(input_err("no map given (use --map, --quadratic or --ps3-a)"))
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidInput(_)
        | Error::NotInComponent(_)
        | Error::AtBranchPoint(_)
        | Error::InvalidGauge(_)
        | Error::ReconstructionFailed(_)
        | Error::ExcludedParameter(_)
        | Error::DomainError(_)
        | Error::InvalidPants(_)
        | Error::Io(_) => EXIT_INPUT,
        Error::NotAnEigenpair(_) | Error::CountingViolation(_) => EXIT_INVARIANT,
        _ => EXIT_NUMERICAL,
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_INPUT,
            };
        }
    };
    run(&cli.command)
}

pub fn run(command: &Command) -> i32 {
    let (name, args) = match command {
        Command::Spectrum(a) => ("spectrum", a),
        Command::Analyze(a) => ("analyze", a),
        Command::Reconstruct(a) => ("reconstruct", a),
        Command::PantsModuli(a) => ("pants-moduli", a),
        Command::ValidateQuadratic(a) => ("validate-quadratic", a),
        Command::MonodromySelfcheck(a) => ("monodromy-selfcheck", a),
    };
    let outcome = RunConfig::from_args(name, args).and_then(|cfg| match command {
        Command::Spectrum(_) => cmd_spectrum(&cfg),
        Command::Analyze(_) => cmd_analyze(&cfg),
        Command::Reconstruct(_) => cmd_reconstruct(&cfg),
        Command::PantsModuli(_) => cmd_pants_moduli(&cfg),
        Command::ValidateQuadratic(_) => cmd_validate_quadratic(&cfg),
        Command::MonodromySelfcheck(_) => cmd_selfcheck(&cfg),
    });
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("steklov {name}: {e}");
            exit_code(&e)
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairRecord {
    pub lambda: f64,
    pub residual: f64,
    pub matrix_residual: f64,
    pub symmetry: Symmetry,
    pub converged: bool,
    /// Zeros on [−1, 1] including both endpoints.
    pub zeros: usize,
    pub coefficients: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectrumDocument {
    pub schema: u32,
    pub map: RationalMap,
    pub n: usize,
    pub order: usize,
    pub convergence_warning: bool,
    pub spurious: Vec<(f64, f64)>,
    pub pairs: Vec<PairRecord>,
}

fn compute_spectrum(cfg: &RunConfig, map: &RationalMap) -> Result<Spectrum> {
    let mut sp = solve(&SpectralProblem::new(map.clone(), cfg.n())?)?;
    assign_symmetry(map, &mut sp);
    Ok(sp)
}

fn spectrum_document(cfg: &RunConfig, map: &RationalMap, sp: &Spectrum) -> SpectrumDocument {
    let pairs = sp
        .pairs
        .iter()
        .filter(|p| cfg.in_range(p.lambda))
        .map(|p| PairRecord {
            lambda: p.lambda,
            residual: p.residual,
            matrix_residual: p.matrix_residual,
            symmetry: p.symmetry,
            converged: (p.lambda - 1.0).abs() > cfg.tolerances.converged_gap,
            zeros: count_zeros_of(&p.coefficients).total(),
            coefficients: p.coefficients.clone(),
        })
        .collect();
    SpectrumDocument {
        schema: SCHEMA_VERSION,
        map: map.clone(),
        n: sp.n,
        order: sp.order,
        convergence_warning: sp.convergence_warning,
        spurious: sp.spurious.clone(),
        pairs,
    }
}

fn eigenfunction_csv(doc: &SpectrumDocument) -> String {
    let chosen: Vec<&PairRecord> = doc.pairs.iter().filter(|p| p.converged).collect();
    let names: Vec<String> =
        std::iter::once("x".to_string()).chain((1..=chosen.len()).map(|k| format!("u_{k}"))).collect();
    let header: Vec<&str> = names.iter().map(String::as_str).collect();
    let rows: Vec<Vec<f64>> = (0..=200)
        .map(|k| {
            let x = -(std::f64::consts::PI * k as f64 / 200.0).cos();
            std::iter::once(x).chain(chosen.iter().map(|p| u_from_coefficients(&p.coefficients, x))).collect()
        })
        .collect();
    csv_table(&header, &rows)
}

pub fn cmd_spectrum(cfg: &RunConfig) -> Result<i32> {
    let map = cfg.resolve_map()?;
    let sp = compute_spectrum(cfg, &map)?;
    let doc = spectrum_document(cfg, &map, &sp);
    let dir = cfg.output_dir();
    write_json(&dir.join("spectrum.json"), &doc)?;
    write_atomic(&dir.join("eigenfunctions.csv"), eigenfunction_csv(&doc).as_bytes())?;
    if doc.convergence_warning {
        eprintln!("warning: spectrum may be under-resolved at N = {}", doc.n);
    }
    log::info!("wrote {} eigenpairs to {}", doc.pairs.len(), dir.display());
    Ok(EXIT_OK)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnalysisEntry {
    pub lambda: f64,
    pub analysis: Option<PairAnalysis>,
    pub error: Option<String>,
    pub passed: bool,
    pub failed_checks: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnalysisDocument {
    pub schema: u32,
    pub map: RationalMap,
    pub n: usize,
    pub pants: Option<PantsClass>,
    pub moduli: Option<ModuliTriple>,
    pub pairs: Vec<AnalysisEntry>,
    pub passed: bool,
}

pub fn cmd_analyze(cfg: &RunConfig) -> Result<i32> {
    let doc = match &cfg.spectrum {
        Some(p) => {
            let text =
                std::fs::read_to_string(p).map_err(|e| input_err(format!("cannot read {}: {e}", p.display())))?;
            let mut doc: SpectrumDocument = serde_json::from_str(&text)?;
            if cfg.map.is_some() || cfg.quadratic.is_some() || cfg.ps3_a.is_some() {
                doc.map = cfg.resolve_map()?;
            }
            doc
        }
        None => {
            let map = cfg.resolve_map()?;
            let sp = compute_spectrum(cfg, &map)?;
            spectrum_document(cfg, &map, &sp)
        }
    };
    let map = doc.map.clone();
    if map.degree() != 3 {
        return Err(input_err("analysis needs a degree-3 map"));
    }
    let pants = pants_of(&map)?;
    let selected: Vec<&PairRecord> = doc
        .pairs
        .iter()
        .filter(|p| (p.lambda - 1.0).abs() > cfg.tolerances.converged_gap && cfg.in_range(p.lambda))
        .collect();
    let results: Vec<(AnalysisEntry, bool)> = selected
        .par_iter()
        .map(|p| {
            let pair = crate::spectral::EigenPair {
                lambda: p.lambda,
                coefficients: p.coefficients.clone(),
                residual: p.residual,
                matrix_residual: p.matrix_residual,
                symmetry: p.symmetry,
            };
            match analyze_pair(&map, &pair) {
                Ok(a) => {
                    let failed = a.failed_checks();
                    (
                        AnalysisEntry {
                            lambda: p.lambda,
                            passed: a.passed(),
                            failed_checks: failed,
                            analysis: Some(a),
                            error: None,
                        },
                        false,
                    )
                }
                Err(e) => {
                    let invariant = exit_code(&e) == EXIT_INVARIANT;
                    let name = match e {
                        Error::NotAnEigenpair(_) => "kappa_constancy".to_string(),
                        _ => "lift".to_string(),
                    };
                    (
                        AnalysisEntry {
                            lambda: p.lambda,
                            analysis: None,
                            error: Some(e.to_string()),
                            passed: false,
                            failed_checks: vec![name],
                        },
                        !invariant,
                    )
                }
            }
        })
        .collect();
    let numerical_only = results.iter().filter(|(e, _)| !e.passed).all(|(_, num)| *num);
    let entries: Vec<AnalysisEntry> = results.into_iter().map(|(e, _)| e).collect();
    let passed = entries.iter().all(|e| e.passed);
    let out = AnalysisDocument {
        schema: SCHEMA_VERSION,
        map,
        n: doc.n,
        moduli: Some(moduli(&pants)),
        pants: Some(pants),
        pairs: entries,
        passed,
    };
    write_json(&cfg.output_dir().join("analysis.json"), &out)?;
    if passed {
        return Ok(EXIT_OK);
    }
    for e in out.pairs.iter().filter(|e| !e.passed) {
        eprintln!("lambda = {:.12}: failed {}", e.lambda, e.failed_checks.join(", "));
    }
    Ok(if numerical_only { EXIT_NUMERICAL } else { EXIT_INVARIANT })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReconstructionReport {
    pub schema: u32,
    pub input: serde_json::Value,
    pub c: f64,
    pub b: f64,
    pub critical_points: [f64; 4],
    pub critical_values: [f64; 4],
    pub expected_values: [f64; 4],
    pub max_error: f64,
    pub pants: Option<PantsClass>,
    pub passed: bool,
}

fn value_error(got: f64, want: f64) -> f64 {
    if want.is_infinite() || got.is_infinite() {
        if got.is_infinite() && want.is_infinite() {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (got - want).abs() / want.abs().max(1.0)
    }
}

fn map_json(map: &RationalMap) -> serde_json::Value {
    serde_json::json!({
        "schema": SCHEMA_VERSION,
        "num": map.num().coeffs(),
        "den": map.den().coeffs(),
    })
}

pub fn cmd_reconstruct(cfg: &RunConfig) -> Result<i32> {
    let (map, report) = if let Some(bp) = cfg.branch_points {
        let choice: RedSegmentChoice = cfg.segment.map(Into::into).unwrap_or_default();
        let asm = assemble_full_map(bp, choice)?;
        let s = asm.map.critical_structure()?;
        let pants = pants_of(&asm.map)?;
        let got = pants.endpoints();
        let want = [-1.0, 1.0, bp[0], bp[1], bp[2], bp[3]];
        let max_error = got.iter().zip(want.iter()).map(|(&g, &w)| value_error(g, w)).fold(0.0, f64::max);
        let report = ReconstructionReport {
            schema: SCHEMA_VERSION,
            input: serde_json::json!({"branch_points": bp, "segment": choice}),
            c: asm.reconstruction.c,
            b: asm.reconstruction.b,
            critical_points: s.b,
            critical_values: s.a,
            expected_values: bp,
            max_error,
            passed: max_error < 1e-9,
            pants: Some(pants),
        };
        (asm.map, report)
    } else if let Some(a) = cfg.a {
        let rec = reconstruct_from_a(a)?;
        let want = [0.0, 1.0, a, f64::INFINITY];
        let max_error = rec.structure.a.iter().zip(want.iter()).map(|(&g, &w)| value_error(g, w)).fold(0.0, f64::max);
        let report = ReconstructionReport {
            schema: SCHEMA_VERSION,
            input: serde_json::json!({"a": a}),
            c: rec.c,
            b: rec.b,
            critical_points: rec.structure.b,
            critical_values: rec.structure.a,
            expected_values: want,
            max_error,
            passed: max_error < 1e-9,
            pants: None,
        };
        (rec.map, report)
    } else {
        return Err(input_err("reconstruct needs --a or --branch-points"));
    };
    let dir = cfg.output_dir();
    write_json(&dir.join("map.json"), &map_json(&map))?;
    write_json(&dir.join("reconstruction.json"), &report)?;
    if report.passed {
        Ok(EXIT_OK)
    } else {
        eprintln!("critical values deviate by {:.3e}", report.max_error);
        Ok(EXIT_INVARIANT)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PantsReport {
    pub schema: u32,
    pub pants: PantsClass,
    pub moduli: ModuliTriple,
    pub circle: CircleData,
    pub certificate_positive: bool,
}

pub fn cmd_pants_moduli(cfg: &RunConfig) -> Result<i32> {
    let map = cfg.resolve_map()?;
    let pants = pants_of(&map)?;
    let lambda = match cfg.lambda {
        Some(l) => l,
        None => {
            let sp = compute_spectrum(cfg, &map)?;
            sp.pairs
                .iter()
                .find(|p| p.symmetry == Symmetry::Antisymmetric)
                .map(|p| p.lambda)
                .ok_or_else(|| Error::SolverError("no antisymmetric eigenvalue found; pass --lambda".into()))?
        }
    };
    let circle = circle_data(lambda);
    let report = PantsReport {
        schema: SCHEMA_VERSION,
        moduli: moduli(&pants),
        pants,
        certificate_positive: circle.disjoint(),
        circle,
    };
    let text = to_json_string(&report)?;
    print!("{text}");
    if let Some(dir) = &cfg.output_dir {
        write_atomic(&dir.join("pants.json"), text.as_bytes())?;
    }
    Ok(EXIT_OK)
}

pub fn cmd_validate_quadratic(cfg: &RunConfig) -> Result<i32> {
    let c = cfg.quadratic.unwrap_or(3.0);
    let q = QuadraticProblem::new(c)?;
    let map = RationalMap::quadratic(c)?;
    let sp = solve(&SpectralProblem::new(map, cfg.n())?)?;
    let count = cfg.count.unwrap_or(4);
    if sp.pairs.len() < count {
        return Err(Error::SolverError(format!("only {} eigenpairs computed", sp.pairs.len())));
    }
    let rows: Vec<Vec<f64>> = (1..=count)
        .map(|n| {
            let exact = q.lambda_n(n);
            let got = sp.pairs[n - 1].lambda;
            vec![n as f64, exact, got, (got - exact).abs() / exact]
        })
        .collect();
    let mut text = String::from("n,lambda_closed_form,lambda_solver,rel_error\n");
    for r in &rows {
        text.push_str(&format!("{},{:.16e},{:.16e},{:.16e}\n", r[0] as usize, r[1], r[2], r[3]));
    }
    print!("{text}");
    if let Some(dir) = &cfg.output_dir {
        write_atomic(&dir.join("validate_quadratic.csv"), text.as_bytes())?;
    }
    let worst = rows.iter().map(|r| r[3]).fold(0.0, f64::max);
    if worst > cfg.tolerances.quadratic_rel {
        eprintln!("relative eigenvalue error {worst:.3e} exceeds {:.1e}", cfg.tolerances.quadratic_rel);
        return Ok(EXIT_INVARIANT);
    }
    Ok(EXIT_OK)
}

pub fn cmd_selfcheck(cfg: &RunConfig) -> Result<i32> {
    let grid = cfg.lambdas.clone().unwrap_or_else(default_lambda_grid);
    let report = selfcheck(&grid, cfg.inject_sign_error);
    for (l, why) in &report.skipped {
        println!("skipped lambda = {l}: {why}");
    }
    let worst = report.entries.iter().map(|e| e.max_residual()).fold(0.0, f64::max);
    println!(
        "checked {} lambda values, worst residual {worst:.3e}, tolerance {:.1e}",
        report.entries.len(),
        report.tolerance
    );
    if let Some(dir) = &cfg.output_dir {
        write_json(&dir.join("selfcheck.json"), &report)?;
    }
    if report.passed() {
        println!("monodromy self-check passed");
        Ok(EXIT_OK)
    } else {
        for e in report.entries.iter().filter(|e| e.max_residual() >= report.tolerance) {
            eprintln!("identity violated at lambda = {}: {e:?}", e.lambda);
        }
        Ok(EXIT_INVARIANT)
    }
}

/// Reads a spectrum document written by `spectrum`.
pub fn read_spectrum(path: &Path) -> Result<SpectrumDocument> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}
