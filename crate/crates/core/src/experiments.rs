//! Experiment harness behind the `qelab` binary: config parsing, one runner
//! per subcommand, deterministic JSON + CSV artifacts.
//!
//! Every report embeds the sha256 of the resolved config (canonical JSON,
//! after the seed override), so identical inputs give identical bytes.

use crate::error::{Error, Result};
use crate::fuchsian::FuchsianGroup;
use crate::modsurf::{maass_selberg_check, EigenvalueTable};
use crate::qvar::{self, EigenfunctionGrid, ErgodicSpec, Observable, VarMode};
use crate::quad::Tolerance;
use crate::traceform::{trace_residual, weyl_count, TraceOptions};
use crate::transforms::{
    admissibility_check, gaussian_triple, heat_triple, round_trip, spectral_action_average, window_error,
    RoundTripConfig, SpectralInterval, TestFunctionTriple,
};
use crate::wpbound::{self, VolumeTable};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

pub const SCHEMA: &str = include_str!("../schema/config.schema.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Subcommand {
    Transform,
    Geodesics,
    ThinPart,
    SpectralAction,
    MaassSelberg,
    Trace,
    Weyl,
    Variance,
    ErgodicDecay,
    SystoleProb,
}

impl Subcommand {
    pub const ALL: [Subcommand; 10] = [
        Subcommand::Transform,
        Subcommand::Geodesics,
        Subcommand::ThinPart,
        Subcommand::SpectralAction,
        Subcommand::MaassSelberg,
        Subcommand::Trace,
        Subcommand::Weyl,
        Subcommand::Variance,
        Subcommand::ErgodicDecay,
        Subcommand::SystoleProb,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Subcommand::Transform => "transform",
            Subcommand::Geodesics => "geodesics",
            Subcommand::ThinPart => "thin-part",
            Subcommand::SpectralAction => "spectral-action",
            Subcommand::MaassSelberg => "maass-selberg",
            Subcommand::Trace => "trace",
            Subcommand::Weyl => "weyl",
            Subcommand::Variance => "variance",
            Subcommand::ErgodicDecay => "ergodic-decay",
            Subcommand::SystoleProb => "systole-prob",
        }
    }

    fn stem(self) -> String {
        self.name().replace('-', "_")
    }
}

// ---- config ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntervalSpec {
    /// Eigenvalue bounds, a > 1/4.
    pub a: f64,
    pub b: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum TestFunctionSpec {
    Heat { t: f64 },
    Gaussian,
}

impl TestFunctionSpec {
    fn triple(&self) -> Result<TestFunctionTriple> {
        match *self {
            TestFunctionSpec::Heat { t } => heat_triple(t),
            TestFunctionSpec::Gaussian => Ok(gaussian_triple()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Budgets {
    pub tol_abs: f64,
    pub tol_rel: f64,
    pub max_intervals: usize,
    /// Word depth for group searches.
    pub depth: usize,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets { tol_abs: 1e-10, tol_rel: 1e-10, max_intervals: 4000, depth: 10 }
    }
}

impl Budgets {
    pub fn tolerance(&self) -> Tolerance {
        Tolerance { abs: self.tol_abs, rel: self.tol_rel, max_intervals: self.max_intervals }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TransformParams {
    pub r_max: f64,
    pub r_points: usize,
    pub u_max: f64,
    pub panels: usize,
    pub degree: usize,
    pub window_times: Vec<f64>,
}

impl Default for TransformParams {
    fn default() -> Self {
        TransformParams { r_max: 20.0, r_points: 201, u_max: 16.0, panels: 32, degree: 24, window_times: vec![5.0, 10.0, 20.0] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeodesicsParams {
    pub lmax: f64,
}

impl Default for GeodesicsParams {
    fn default() -> Self {
        GeodesicsParams { lmax: 10.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ThinPartParams {
    pub radii: Vec<f64>,
    pub samples: usize,
}

impl Default for ThinPartParams {
    fn default() -> Self {
        ThinPartParams { radii: vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6], samples: 4096 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectralActionParams {
    pub horizons: Vec<f64>,
    pub r_points: usize,
}

impl Default for SpectralActionParams {
    fn default() -> Self {
        SpectralActionParams { horizons: vec![20.0, 40.0], r_points: 50 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MaassSelbergParams {
    pub r_values: Vec<f64>,
    pub cuts: Vec<f64>,
    pub modes: usize,
}

impl Default for MaassSelbergParams {
    fn default() -> Self {
        MaassSelbergParams { r_values: vec![1.0, 2.0, 5.0], cuts: vec![3.0, 5.0], modes: 24 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TraceParams {
    /// (eigenvalue count, Lmax) pairs; the last is the headline run.
    pub refinements: Vec<(usize, f64)>,
    pub include_elliptic: bool,
    pub eigenvalue_file: Option<PathBuf>,
}

impl Default for TraceParams {
    fn default() -> Self {
        TraceParams { refinements: vec![(10, 8.0), (25, 10.0)], include_elliptic: true, eigenvalue_file: None }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WeylParams {
    /// Extra intervals besides the top-level one.
    pub intervals: Vec<IntervalSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VarianceParams {
    pub observable: Observable,
    pub mode: VarMode,
    /// Cut height for the mean-zero reduction report.
    pub reduce_cut: f64,
    pub eigenfunction_file: Option<PathBuf>,
}

impl Default for VarianceParams {
    fn default() -> Self {
        VarianceParams {
            observable: Observable::cusp_indicator(3.0).expect("valid cut"),
            mode: VarMode::EisensteinOnly,
            reduce_cut: 3.0,
            eigenfunction_file: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ErgodicParams {
    pub observable: Observable,
    /// When set, the observable is first reduced to mean zero at this height.
    pub reduce_cut: Option<f64>,
    pub times: Vec<f64>,
    pub separation: f64,
    pub samples: usize,
}

impl Default for ErgodicParams {
    fn default() -> Self {
        ErgodicParams {
            observable: Observable::bump(crate::hgeom::UHPoint { x: 0.0, y: 1.3 }, 0.5, 1.0).expect("valid bump"),
            reduce_cut: Some(3.0),
            times: vec![2.0, 3.0, 4.0],
            separation: 1.0,
            samples: 128,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SystoleProbParams {
    pub g: u32,
    pub k: u32,
    pub eps: Vec<f64>,
    pub table_file: Option<PathBuf>,
    pub length_grid: Vec<f64>,
}

impl Default for SystoleProbParams {
    fn default() -> Self {
        SystoleProbParams {
            g: 2,
            k: 1,
            eps: vec![0.01, 0.02, 0.03, 0.04, 0.05],
            table_file: None,
            length_grid: (0..=8).map(|i| 0.5 * i as f64).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub model: String,
    pub seed: u64,
    pub interval: IntervalSpec,
    pub test_function: TestFunctionSpec,
    pub budgets: Budgets,
    pub transform: TransformParams,
    pub geodesics: GeodesicsParams,
    pub thin_part: ThinPartParams,
    pub spectral_action: SpectralActionParams,
    pub maass_selberg: MaassSelbergParams,
    pub trace: TraceParams,
    pub weyl: WeylParams,
    pub variance: VarianceParams,
    pub ergodic_decay: ErgodicParams,
    pub systole_prob: SystoleProbParams,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            model: "modular".into(),
            seed: 1,
            interval: IntervalSpec { a: 0.5, b: 1.0 },
            test_function: TestFunctionSpec::Heat { t: 1.0 },
            budgets: Budgets::default(),
            transform: Default::default(),
            geodesics: Default::default(),
            thin_part: Default::default(),
            spectral_action: Default::default(),
            maass_selberg: Default::default(),
            trace: Default::default(),
            weyl: Default::default(),
            variance: Default::default(),
            ergodic_decay: Default::default(),
            systole_prob: Default::default(),
        }
    }
}

fn cfg_err(path: &str, msg: impl Into<String>) -> Error {
    Error::Config { path: path.into(), msg: msg.into() }
}

impl ExperimentConfig {
    /// Parse JSON; errors name the offending field path.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            cfg_err(if path.is_empty() { "." } else { &path }, e.into_inner().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Semantic checks beyond the schema shape.
    pub fn validate(&self) -> Result<()> {
        let b = &self.budgets;
        if !(b.tol_abs > 0.0) || !(b.tol_rel >= 0.0) || b.max_intervals == 0 || b.depth == 0 {
            return Err(cfg_err("budgets", "all budgets must be positive"));
        }
        SpectralInterval::from_eigenvalues(self.interval.a, self.interval.b)
            .map_err(|e| cfg_err("interval", e.to_string()))?;
        if let TestFunctionSpec::Heat { t } = self.test_function {
            if !(t > 0.0) {
                return Err(cfg_err("test_function.t", "heat time must be positive"));
            }
        }
        for (i, iv) in self.weyl.intervals.iter().enumerate() {
            SpectralInterval::from_eigenvalues(iv.a, iv.b)
                .map_err(|e| cfg_err(&format!("weyl.intervals[{i}]"), e.to_string()))?;
        }
        let t = &self.transform;
        if !(t.r_max > 0.0) || t.r_points < 2 || !(t.u_max > 0.0) || t.panels == 0 || t.degree < 2 {
            return Err(cfg_err("transform", "grid sizes must be positive"));
        }
        if self.thin_part.samples == 0 || self.thin_part.radii.iter().any(|r| !(*r > 0.0)) {
            return Err(cfg_err("thin_part", "need positive radii and samples"));
        }
        let sa = &self.spectral_action;
        if sa.r_points == 0 || sa.horizons.is_empty() || sa.horizons.iter().any(|h| !(*h > 0.0)) {
            return Err(cfg_err("spectral_action", "need positive horizons and r_points"));
        }
        let ms = &self.maass_selberg;
        if ms.modes == 0 || ms.cuts.iter().any(|c| !(*c >= 1.0)) || ms.r_values.contains(&0.0) {
            return Err(cfg_err("maass_selberg", "need modes > 0, cuts >= 1 and r != 0"));
        }
        if self.trace.refinements.is_empty() || self.trace.refinements.iter().any(|&(n, l)| n == 0 || !(l > 0.0)) {
            return Err(cfg_err("trace.refinements", "need nonempty (count > 0, Lmax > 0) pairs"));
        }
        Observable::new(self.variance.observable.atoms.clone())
            .map_err(|e| cfg_err("variance.observable", e.to_string()))?;
        Observable::new(self.ergodic_decay.observable.atoms.clone())
            .map_err(|e| cfg_err("ergodic_decay.observable", e.to_string()))?;
        let ed = &self.ergodic_decay;
        if ed.samples < 2 || ed.times.is_empty() || !(ed.separation > 0.0) {
            return Err(cfg_err("ergodic_decay", "need samples >= 2, times and a positive separation"));
        }
        let sp = &self.systole_prob;
        if sp.eps.is_empty() || sp.eps.iter().any(|e| !(*e >= 0.0) || *e >= wpbound::collar_threshold()) {
            return Err(cfg_err("systole_prob.eps", "every eps must lie in [0, 2 asinh 1)"));
        }
        Ok(())
    }

    fn spectral_interval(&self) -> Result<SpectralInterval> {
        SpectralInterval::from_eigenvalues(self.interval.a, self.interval.b)
    }

    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        hex(&Sha256::digest(canonical.as_bytes()))
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().fold(String::with_capacity(2 * bytes.len()), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

// ---- artifacts -----------------------------------------------------------------------

/// A CSV curve: header plus rows of already-formatted cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Curve {
    fn new(name: &str, header: &[&str]) -> Self {
        Curve { name: name.into(), header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    fn push<I: IntoIterator<Item = String>>(&mut self, row: I) {
        self.rows.push(row.into_iter().collect());
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.join(","));
            s.push('\n');
        }
        s
    }
}

fn num(x: f64) -> String {
    format!("{x}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub report: Value,
    pub curves: Vec<Curve>,
}

/// Exit status of a run.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config { .. } | Error::InvalidInput(_) | Error::Parse { .. } | Error::Unsupported(_) | Error::MissingEntries(_) => 2,
        Error::Budget { .. } | Error::Quadrature { .. } => 3,
        _ => 1,
    }
}

/// Run one experiment and write `<name>.json` plus `<name>_<curve>.csv` into
/// `out`. On a budget failure a partial report flagged `"status": "budget_failure"`
/// is still written before the error is returned.
pub fn run_and_write(cmd: Subcommand, cfg: &ExperimentConfig, out: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out)?;
    let stem = cmd.stem();
    let header = json!({
        "subcommand": cmd.name(),
        "config_hash": cfg.hash(),
        "seed": cfg.seed,
        "budgets": cfg.budgets,
    });
    let mut written = Vec::new();
    let (status, body, curves, err) = match run(cmd, cfg) {
        Ok(o) => ("ok", o.report, o.curves, None),
        Err(e) => {
            let code = exit_code(&e);
            if code == 2 {
                return Err(e);
            }
            let status = if code == 3 { "budget_failure" } else { "error" };
            (status, json!({ "error": e.to_string() }), Vec::new(), Some(e))
        }
    };
    let mut doc = header;
    doc["status"] = json!(status);
    doc["partial"] = json!(err.is_some());
    doc["report"] = body;
    let path = out.join(format!("{stem}.json"));
    std::fs::write(&path, serde_json::to_string_pretty(&doc).map_err(|e| Error::Io(e.to_string()))? + "\n")?;
    written.push(path);
    for c in &curves {
        let p = out.join(format!("{stem}_{}.csv", c.name));
        std::fs::write(&p, c.to_csv())?;
        written.push(p);
    }
    match err {
        Some(e) => Err(e),
        None => Ok(written),
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report serializes")
}

fn require_modular(cfg: &ExperimentConfig, what: &str) -> Result<()> {
    if cfg.model != "modular" {
        return Err(Error::Unsupported(format!("{what} is implemented for the modular surface only, got model {:?}", cfg.model)));
    }
    Ok(())
}

pub fn run(cmd: Subcommand, cfg: &ExperimentConfig) -> Result<Outcome> {
    cfg.validate()?;
    match cmd {
        Subcommand::Transform => run_transform(cfg),
        Subcommand::Geodesics => run_geodesics(cfg),
        Subcommand::ThinPart => run_thin_part(cfg),
        Subcommand::SpectralAction => run_spectral_action(cfg),
        Subcommand::MaassSelberg => run_maass_selberg(cfg),
        Subcommand::Trace => run_trace(cfg),
        Subcommand::Weyl => run_weyl(cfg),
        Subcommand::Variance => run_variance(cfg),
        Subcommand::ErgodicDecay => run_ergodic(cfg),
        Subcommand::SystoleProb => run_systole_prob(cfg),
    }
}

fn run_transform(cfg: &ExperimentConfig) -> Result<Outcome> {
    let p = &cfg.transform;
    let triple = cfg.test_function.triple()?;
    let grid: Vec<f64> = (0..p.r_points).map(|i| p.r_max * i as f64 / (p.r_points - 1) as f64).collect();
    let rt_cfg = RoundTripConfig { u_max: p.u_max, panels: p.panels, degree: p.degree, tol: cfg.budgets.tolerance() };
    let h = triple.h.clone();
    let rt = round_trip(move |r| h(r), &grid, rt_cfg)?;
    let adm = admissibility_check(&triple);
    let iv = cfg.spectral_interval()?;
    let mut win = Curve::new("window", &["t", "error", "error_estimate", "t_error_over_sqrt_b"]);
    let mut windows = Vec::new();
    for &t in &p.window_times {
        let e = window_error(iv, t, cfg.budgets.tolerance())?;
        let scaled = e.value.abs() * t / iv.b.sqrt();
        win.push([num(t), num(e.value), num(e.error), num(scaled)]);
        windows.push(json!({ "t": t, "error": e.value, "error_estimate": e.error, "fitted_c": scaled }));
    }
    let mut rtc = Curve::new("round_trip", &["r", "h", "h_round_trip", "abs_error"]);
    for ((r, a), b) in rt.r_grid.iter().zip(&rt.h).zip(&rt.h_round_trip) {
        rtc.push([num(*r), num(*a), num(*b), num((a - b).abs())]);
    }
    let mut kc = Curve::new("kernel", &["rho", "k"]);
    for (x, k) in &rt.kernel_samples {
        kc.push([num(*x), num(*k)]);
    }
    let report = json!({
        "test_function": triple.name,
        "round_trip_max_error": rt.max_error,
        "admissibility": to_value(&adm),
        "interval": to_value(&iv),
        "window": windows,
    });
    Ok(Outcome { report, curves: vec![rtc, kc, win] })
}

fn run_geodesics(cfg: &ExperimentConfig) -> Result<Outcome> {
    let g = FuchsianGroup::builtin(&cfg.model)?;
    let spec = g.length_spectrum(cfg.geodesics.lmax, cfg.budgets.depth)?;
    let sys = g.systole(cfg.budgets.depth)?;
    let mut c = Curve::new("length_spectrum", &["length", "trace", "multiplicity", "word"]);
    for e in &spec.entries {
        c.push([num(e.length), num(e.trace), e.multiplicity.to_string(), e.representative_word.clone()]);
    }
    let report = json!({
        "model": cfg.model,
        "systole": to_value(&sys),
        "lmax": spec.lmax,
        "complete": spec.complete,
        "method": spec.method,
        "distinct_lengths": spec.entries.len(),
        "classes": spec.class_count(),
    });
    Ok(Outcome { report, curves: vec![c] })
}

fn run_thin_part(cfg: &ExperimentConfig) -> Result<Outcome> {
    let g = FuchsianGroup::builtin(&cfg.model)?;
    let p = &cfg.thin_part;
    let mut c = Curve::new("fraction", &["radius", "fraction", "std_error"]);
    let mut rows = Vec::new();
    for &r in &p.radii {
        let est = g.thin_part_fraction(r, p.samples, cfg.seed)?;
        c.push([num(r), num(est.mean), num(est.std_error)]);
        rows.push(json!({ "radius": r, "estimate": to_value(&est) }));
    }
    Ok(Outcome { report: json!({ "model": cfg.model, "samples": p.samples, "fractions": rows }), curves: vec![c] })
}

fn run_spectral_action(cfg: &ExperimentConfig) -> Result<Outcome> {
    let iv = cfg.spectral_interval()?;
    let p = &cfg.spectral_action;
    let grid: Vec<f64> = if p.r_points == 1 {
        vec![iv.alpha]
    } else {
        (0..p.r_points).map(|i| iv.alpha + (iv.beta - iv.alpha) * i as f64 / (p.r_points - 1) as f64).collect()
    };
    let tol = Tolerance { abs: cfg.budgets.tol_abs.max(1e-9), ..cfg.budgets.tolerance() };
    let mut c = Curve::new("average", &["horizon", "r", "value", "error"]);
    let mut mins = Vec::new();
    for &t in &p.horizons {
        let mut m = f64::INFINITY;
        for &r in &grid {
            let a = spectral_action_average(t, r, tol)?;
            c.push([num(t), num(r), num(a.value), num(a.error)]);
            m = m.min(a.value);
        }
        mins.push(json!({ "horizon": t, "min": m }));
    }
    let rel = if mins.len() >= 2 {
        let a = mins[0]["min"].as_f64().unwrap_or(0.0);
        let b = mins[mins.len() - 1]["min"].as_f64().unwrap_or(0.0);
        Some((b - a).abs() / a.abs().max(f64::MIN_POSITIVE))
    } else {
        None
    };
    Ok(Outcome {
        report: json!({ "interval": to_value(&iv), "r_points": grid.len(), "minima": mins, "relative_change": rel }),
        curves: vec![c],
    })
}

fn run_maass_selberg(cfg: &ExperimentConfig) -> Result<Outcome> {
    require_modular(cfg, "maass-selberg")?;
    let p = &cfg.maass_selberg;
    let mut c = Curve::new("residuals", &["r", "cut", "lhs", "rhs", "tail", "residual"]);
    let mut reps = Vec::new();
    let mut worst: f64 = 0.0;
    for &r in &p.r_values {
        for &y in &p.cuts {
            let rep = maass_selberg_check(r, y, p.modes, cfg.budgets.tolerance())?;
            c.push([num(r), num(y), num(rep.lhs), num(rep.rhs), num(rep.tail), num(rep.residual)]);
            worst = worst.max(rep.residual.abs());
            reps.push(to_value(&rep));
        }
    }
    Ok(Outcome { report: json!({ "checks": reps, "max_abs_residual": worst }), curves: vec![c] })
}

fn eigen_table(path: &Option<PathBuf>) -> Result<EigenvalueTable> {
    match path {
        Some(p) => EigenvalueTable::load(p),
        None => Ok(EigenvalueTable::modular()),
    }
}

fn run_trace(cfg: &ExperimentConfig) -> Result<Outcome> {
    require_modular(cfg, "trace")?;
    let p = &cfg.trace;
    let h = cfg.test_function.triple()?;
    let table = eigen_table(&p.eigenvalue_file)?;
    let lmax_all = p.refinements.iter().map(|r| r.1).fold(0.0, f64::max);
    let spectrum = FuchsianGroup::modular().length_spectrum(lmax_all, cfg.budgets.depth)?;
    let mut c = Curve::new("refinement", &["eigenvalues", "lmax", "residual", "budget", "within_budget"]);
    let mut reports = Vec::new();
    for &(n, lmax) in &p.refinements {
        if n > table.len() {
            return Err(cfg_err("trace.refinements", format!("table has only {} eigenvalues, asked for {n}", table.len())));
        }
        let opts = TraceOptions { lmax, include_elliptic: p.include_elliptic, tol: cfg.budgets.tolerance(), ..Default::default() };
        let rep = trace_residual(&h, &table.truncated(n), &spectrum.truncated(lmax), opts)?;
        c.push([n.to_string(), num(lmax), num(rep.residual), num(rep.budget.total), rep.within_budget.to_string()]);
        reports.push(rep);
    }
    let monotone = reports.windows(2).all(|w| w[1].residual.abs() < w[0].residual.abs());
    let last = reports.last().expect("nonempty refinements");
    Ok(Outcome {
        report: json!({ "headline": to_value(last), "refinements": to_value(&reports), "residual_decreasing": monotone }),
        curves: vec![c],
    })
}

fn run_weyl(cfg: &ExperimentConfig) -> Result<Outcome> {
    require_modular(cfg, "weyl")?;
    let table = EigenvalueTable::modular();
    let mut c = Curve::new("counts", &["a", "b", "N", "M", "main_term", "remainder"]);
    let mut reps = Vec::new();
    for iv in std::iter::once(&cfg.interval).chain(&cfg.weyl.intervals) {
        let si = SpectralInterval::from_eigenvalues(iv.a, iv.b)?;
        let w = weyl_count(&si, &table, cfg.budgets.tolerance())?;
        c.push([num(w.a), num(w.b), w.discrete.to_string(), num(w.continuous), num(w.main_term), num(w.remainder)]);
        reps.push(to_value(&w));
    }
    Ok(Outcome { report: json!({ "counts": reps, "table_source": table.source }), curves: vec![c] })
}

fn run_variance(cfg: &ExperimentConfig) -> Result<Outcome> {
    require_modular(cfg, "variance")?;
    let p = &cfg.variance;
    let iv = cfg.spectral_interval()?;
    let table = EigenvalueTable::modular();
    let grids: Vec<EigenfunctionGrid> = match &p.eigenfunction_file {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            serde_json::from_str(&text).map_err(|e| cfg_err("variance.eigenfunction_file", e.to_string()))?
        }
        None => Vec::new(),
    };
    let rep = qvar::quantum_mean_abs_dev(&p.observable, &iv, p.mode, &table, &grids, cfg.budgets.tolerance())?;
    let reduced = qvar::mean_zero_reduce(&p.observable, p.reduce_cut.max(p.observable.support_height()).max(1.0))?;
    let reduced_integral = qvar::domain_integral(&reduced, |v| v, Tolerance::new(1e-12, 1e-12))?;
    let mut c = Curve::new("integrand", &["r", "eisenstein_mass", "compensated"]);
    for s in &rep.samples {
        c.push([num(s.r), num(s.eisenstein_mass), num(s.compensated)]);
    }
    let relative_budget = if rep.total != 0.0 { rep.error_budget / rep.total.abs() } else { 0.0 };
    let mut v = to_value(&rep);
    v["relative_error_budget"] = json!(relative_budget);
    v["mean_zero_check"] = json!({ "observable": to_value(&reduced), "integral": reduced_integral.value, "error": reduced_integral.error });
    Ok(Outcome { report: v, curves: vec![c] })
}

fn run_ergodic(cfg: &ExperimentConfig) -> Result<Outcome> {
    require_modular(cfg, "ergodic-decay")?;
    let p = &cfg.ergodic_decay;
    let a = match p.reduce_cut {
        Some(y) => qvar::mean_zero_reduce(&p.observable, y)?,
        None => p.observable.clone(),
    };
    let spec = ErgodicSpec {
        times: p.times.clone(),
        separation: p.separation,
        samples: p.samples,
        seed: cfg.seed,
        tol: Tolerance { abs: cfg.budgets.tol_abs.max(1e-8), rel: cfg.budgets.tol_rel.max(1e-6), ..cfg.budgets.tolerance() },
    };
    let rep = qvar::ergodic_decay(&a, &spec)?;
    let mut c = Curve::new("decay", &["t", "set_measure", "deviation", "std_error"]);
    for q in &rep.points {
        c.push([num(q.t), num(q.set_measure), num(q.deviation), num(q.std_error)]);
    }
    Ok(Outcome { report: to_value(&rep), curves: vec![c] })
}

fn run_systole_prob(cfg: &ExperimentConfig) -> Result<Outcome> {
    let p = &cfg.systole_prob;
    let table = match &p.table_file {
        Some(path) => VolumeTable::parse(&std::fs::read_to_string(path)?)?,
        None => VolumeTable::shipped(),
    };
    let curve = wpbound::epsilon_scaling_curve(p.g, p.k, &p.eps, &table)?;
    let details: Vec<Value> = p
        .eps
        .iter()
        .map(|&e| wpbound::systole_prob_bound(p.g, p.k, e, &table).map(|r| to_value(&r)))
        .collect::<Result<_>>()?;
    let mut checks = Vec::new();
    for ((g, n), _) in table.entries() {
        if table.polynomial(g, n).is_some() {
            let grid: &[f64] = if n <= 2 { &p.length_grid } else { &p.length_grid[..p.length_grid.len().min(5)] };
            let v = wpbound::volume_exp_bound_check(&table, g, n, grid)?;
            checks.push(json!({ "g": g, "n": n, "holds": v.holds, "worst_ratio": v.worst_ratio, "worst_margin": v.worst_margin }));
        }
    }
    let ratio = wpbound::ratio_check(&table, p.g, p.k).ok().map(|r| to_value(&r));
    let mut c = Curve::new("scaling", &["eps", "bound"]);
    for (e, b) in &curve.points {
        c.push([num(*e), num(*b)]);
    }
    Ok(Outcome {
        report: json!({
            "convention": table.convention,
            "curve": to_value(&curve),
            "bounds": details,
            "exp_bound_checks": checks,
            "ratio_check": ratio,
        }),
        curves: vec![c],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_uses_defaults() {
        let c = ExperimentConfig::from_json("{}").unwrap();
        assert_eq!(c, ExperimentConfig::default());
        assert_eq!(c.hash().len(), 64);
    }

    #[test]
    fn unknown_field_reports_path() {
        match ExperimentConfig::from_json(r#"{"budgets": {"tol_abs": 1e-8, "bogus": 1}}"#) {
            Err(Error::Config { path, .. }) => assert!(path.starts_with("budgets"), "{path}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn interval_touching_quarter_is_rejected() {
        let e = ExperimentConfig::from_json(r#"{"interval": {"a": 0.25, "b": 1.0}}"#).unwrap_err();
        assert_eq!(exit_code(&e), 2);
        assert!(matches!(e, Error::Config { ref path, .. } if path == "interval"));
    }

    #[test]
    fn hash_tracks_seed() {
        let mut c = ExperimentConfig::default();
        let h = c.hash();
        c.seed = 2;
        assert_ne!(h, c.hash());
    }

    #[test]
    fn schema_is_json() {
        let v: Value = serde_json::from_str(SCHEMA).unwrap();
        assert_eq!(v["type"], "object");
        // every top-level config key is described
        let keys = serde_json::to_value(ExperimentConfig::default()).unwrap();
        for k in keys.as_object().unwrap().keys() {
            assert!(v["properties"].get(k).is_some(), "schema lacks {k}");
        }
    }

    #[test]
    fn observable_config_round_trips() {
        let text = r#"{"variance": {"observable": {"atoms": [
            {"kind": "bump", "center": {"x": 0.0, "y": 1.3}, "radius": 0.4, "height": 1.0},
            {"kind": "cusp_indicator", "cut": 3.0, "height": 0.5}]}}}"#;
        let c = ExperimentConfig::from_json(text).unwrap();
        assert_eq!(c.variance.observable.atoms.len(), 2);
        let bad = r#"{"variance": {"observable": {"atoms": [{"kind": "cusp_indicator", "cut": 0.5, "height": 1}]}}}"#;
        assert!(ExperimentConfig::from_json(bad).is_err());
    }

    #[test]
    fn weyl_run_writes_artifacts_deterministically() {
        let dir = tempfile::tempdir().unwrap();
        let c = ExperimentConfig::from_json(r#"{"weyl": {"intervals": [{"a": 81.25, "b": 100.25}]}}"#).unwrap();
        let files = run_and_write(Subcommand::Weyl, &c, dir.path()).unwrap();
        assert_eq!(files.len(), 2);
        let first: Vec<Vec<u8>> = files.iter().map(|f| std::fs::read(f).unwrap()).collect();
        run_and_write(Subcommand::Weyl, &c, dir.path()).unwrap();
        let second: Vec<Vec<u8>> = files.iter().map(|f| std::fs::read(f).unwrap()).collect();
        assert_eq!(first, second);
        let csv = String::from_utf8(first[1].clone()).unwrap();
        assert!(csv.starts_with("a,b,N,M,main_term,remainder\n"));
        let json: Value = serde_json::from_slice(&first[0]).unwrap();
        assert_eq!(json["config_hash"], c.hash());
        assert_eq!(json["report"]["counts"][1]["discrete"], 1);
    }
}
