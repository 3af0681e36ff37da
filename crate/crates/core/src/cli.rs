//! Scenario configs, the parallel runner and report emission.
//!
//! A config is one JSON document:
//!
//! ```json
//! { "scenarios": [
//!     { "id": "vz2-id",
//!       "pairs": [{ "kind": "V", "g": [[0,0],[0,0],[1,0]], "psi": { "a": [1,0], "b": [0,0] } }],
//!       "p": 2, "q": 2,
//!       "checks": ["verdict", "svals"],
//!       "settings": { "dims": [32, 64, 128] } } ] }
//! ```
//!
//! Polynomials are coefficient arrays of `[re, im]`, lowest degree first.
//! Every setting has a default; see [`Settings`].

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classify::{self, ClassificationVerdict, DifferenceVerdict, Extended};
use crate::error::{ConfigIssue, FockError, Result};
use crate::fockmat::{self, CompactnessEvidence, OperatorSpec, SingularSpectrum, MIN_DIM};
use crate::planequad::{self, DEFAULT_RADII};
use crate::symbols::{AffineMap, ComplexPolynomial, OperatorKind, SymbolPair};

pub const DEFAULT_MAX_DIM: usize = 512;
pub const MAX_DIM_ENV: &str = "FOCKLAB_MAX_DIM";
pub const REPORT_SCHEMA: u32 = 1;

/// The verification corpus shipped with the crate.
pub const CORPUS_JSON: &str = include_str!("../corpus/corpus.json");

/// `FOCKLAB_MAX_DIM`, or [`DEFAULT_MAX_DIM`] when unset.
pub fn max_dim_from_env() -> Result<usize> {
    match std::env::var(MAX_DIM_ENV) {
        Err(_) => Ok(DEFAULT_MAX_DIM),
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n >= MIN_DIM => Ok(n),
            _ => Err(FockError::InvalidArgument(format!("{MAX_DIM_ENV} must be an integer >= {MIN_DIM}, got {s:?}"))),
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    Verdict,
    Berezin,
    Matrix,
    Svals,
    Schatten,
    Difference,
    Spectrum,
    Kernel,
    LittlewoodPaley,
}

impl Check {
    pub const ALL: [Check; 9] = [
        Check::Verdict,
        Check::Berezin,
        Check::Matrix,
        Check::Svals,
        Check::Schatten,
        Check::Difference,
        Check::Spectrum,
        Check::Kernel,
        Check::LittlewoodPaley,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Check::Verdict => "verdict",
            Check::Berezin => "berezin",
            Check::Matrix => "matrix",
            Check::Svals => "svals",
            Check::Schatten => "schatten",
            Check::Difference => "difference",
            Check::Spectrum => "spectrum",
            Check::Kernel => "kernel",
            Check::LittlewoodPaley => "littlewood_paley",
        }
    }
}

/// Numeric settings of one scenario. Complex numbers are `[re, im]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Settings {
    /// Quadrature target accuracy.
    pub eps: f64,
    /// Truncation ladder for proxies, Schatten norms and resolvents.
    pub dims: Vec<usize>,
    /// Dimension for the `matrix` check; the top of `dims` when absent.
    pub matrix_dim: Option<usize>,
    /// Radii for criterion and Berezin profiles.
    pub radii: Vec<f64>,
    pub tail_fraction: f64,
    pub tol: f64,
    /// A profile is unbounded when its last step grows by more than this factor.
    pub growth_ratio: f64,
    /// A profile vanishes when its tail decreases to below this fraction of its max.
    pub decay_ratio: f64,
    /// Berezin probes sit at `psi(r * direction)`.
    pub direction: [f64; 2],
    pub schatten_p: Vec<f64>,
    /// Truncated Schatten norms count as converged below this relative change.
    pub stabilize_tol: f64,
    pub lambda: Vec<[f64; 2]>,
    /// Resolvent norms count as growing when the last step grows by at least this factor.
    pub growth_factor: f64,
    pub resolvent_tol: f64,
    /// Kernel probe points.
    pub w: Vec<[f64; 2]>,
    pub kernel_tol: f64,
    pub lp_degree: usize,
    pub lp_refine_tol: f64,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            eps: planequad::DEFAULT_EPS,
            dims: fockmat::DEFAULT_DIMS.to_vec(),
            matrix_dim: None,
            radii: DEFAULT_RADII.to_vec(),
            tail_fraction: fockmat::DEFAULT_TAIL_FRACTION,
            tol: fockmat::DEFAULT_TAIL_TOL,
            growth_ratio: 1.5,
            decay_ratio: 0.2,
            direction: [1.0, 0.0],
            schatten_p: vec![1.0, 4.0],
            stabilize_tol: 0.01,
            lambda: vec![[1.5, 0.0], [2.5, 0.0]],
            growth_factor: 2.0,
            resolvent_tol: 0.05,
            w: vec![[0.0, 0.0], [1.0, 0.0], [0.0, 2.0], [2.0, 2.0], [3.0, 0.0]],
            kernel_tol: 1e-6,
            lp_degree: 40,
            lp_refine_tol: 1e-6,
        }
    }
}

fn default_exponent() -> f64 {
    2.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub id: String,
    pub pairs: Vec<SymbolPair>,
    #[serde(default = "default_exponent")]
    pub p: f64,
    #[serde(default = "default_exponent")]
    pub q: f64,
    pub checks: Vec<Check>,
    #[serde(default)]
    pub settings: Settings,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub scenarios: Vec<Scenario>,
}

fn c64(x: [f64; 2]) -> Complex64 {
    Complex64::new(x[0], x[1])
}

impl Config {
    /// Parses without validating; errors carry the JSON path of the offending value.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            FockError::Config(vec![ConfigIssue { path, reason: e.into_inner().to_string() }])
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| FockError::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn corpus() -> Result<Self> {
        Self::from_json(CORPUS_JSON)
    }

    /// Collects every problem rather than stopping at the first.
    pub fn validate(&self, max_dim: usize) -> Result<()> {
        if self.scenarios.is_empty() {
            return Err(FockError::NoScenarios);
        }
        let mut issues = Vec::new();
        let mut seen = HashSet::new();
        for (i, sc) in self.scenarios.iter().enumerate() {
            let at = |field: &str| format!("scenarios[{i}].{field}");
            let mut bad = |field: &str, reason: String| issues.push(ConfigIssue { path: at(field), reason });
            if sc.id.is_empty() || !sc.id.chars().all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c)) {
                bad("id", format!("id {:?} must be nonempty and use only [A-Za-z0-9_.-]", sc.id));
            } else if !seen.insert(sc.id.as_str()) {
                bad("id", format!("duplicate id {:?}", sc.id));
            }
            if !(1..=2).contains(&sc.pairs.len()) {
                bad("pairs", format!("expected one or two symbol pairs, got {}", sc.pairs.len()));
            }
            if sc.checks.is_empty() {
                bad("checks", "at least one check is required".into());
            }
            if sc.checks.contains(&Check::Difference) && sc.pairs.len() != 2 {
                bad("checks", "difference needs two pairs".into());
            }
            for (name, x) in [("p", sc.p), ("q", sc.q)] {
                if !(x.is_finite() && x > 0.0) {
                    bad(name, format!("exponent must be finite and positive, got {x}"));
                }
            }
            let s = &sc.settings;
            let mut bad = |field: &str, reason: String| {
                issues.push(ConfigIssue { path: at(&format!("settings.{field}")), reason })
            };
            if !(s.eps > 0.0 && s.eps <= 1e-2) {
                bad("eps", format!("must lie in (0, 1e-2], got {}", s.eps));
            }
            if s.dims.len() < 3 || s.dims.windows(2).any(|w| w[0] >= w[1]) {
                bad("dims", "need at least 3 strictly increasing dimensions".into());
            }
            for (k, &n) in s.dims.iter().enumerate() {
                if n < MIN_DIM || n > max_dim {
                    bad(&format!("dims[{k}]"), format!("{n} outside [{MIN_DIM}, {max_dim}] ({MAX_DIM_ENV})"));
                }
            }
            if let Some(n) = s.matrix_dim {
                if n < MIN_DIM || n > max_dim {
                    bad("matrix_dim", format!("{n} outside [{MIN_DIM}, {max_dim}] ({MAX_DIM_ENV})"));
                }
            }
            if s.radii.len() < 3 || s.radii.windows(2).any(|w| !(w[0] < w[1])) || !(s.radii[0] > 0.0) {
                bad("radii", "need at least 3 positive strictly increasing radii".into());
            }
            if !(s.tail_fraction > 0.0 && s.tail_fraction < 1.0) {
                bad("tail_fraction", format!("must lie in (0, 1), got {}", s.tail_fraction));
            }
            if !(s.decay_ratio > 0.0 && s.decay_ratio < 1.0) {
                bad("decay_ratio", format!("must lie in (0, 1), got {}", s.decay_ratio));
            }
            for (name, x) in [("growth_ratio", s.growth_ratio), ("growth_factor", s.growth_factor)] {
                if !(x > 1.0 && x.is_finite()) {
                    bad(name, format!("must exceed 1, got {x}"));
                }
            }
            for (name, x) in [
                ("tol", s.tol),
                ("stabilize_tol", s.stabilize_tol),
                ("resolvent_tol", s.resolvent_tol),
                ("kernel_tol", s.kernel_tol),
                ("lp_refine_tol", s.lp_refine_tol),
            ] {
                if !(x > 0.0 && x.is_finite()) {
                    bad(name, format!("must be finite and positive, got {x}"));
                }
            }
            if !(c64(s.direction).norm() > 0.0 && c64(s.direction).norm().is_finite()) {
                bad("direction", "must be finite and nonzero".into());
            }
            if s.schatten_p.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
                bad("schatten_p", "exponents must be finite and positive".into());
            }
            if s.lambda.iter().chain(&s.w).flatten().any(|x| !x.is_finite()) {
                bad("lambda", "probe points must be finite".into());
            }
        }
        if issues.is_empty() {
            Ok(())
        } else {
            Err(FockError::Config(issues))
        }
    }
}

/// A criterion or Berezin profile over the radii ladder.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileOutput {
    pub radii: Vec<f64>,
    pub values: Vec<Extended>,
    pub bounded: bool,
    pub vanishing: bool,
}

/// Reads boundedness and vanishing off the tail of a sampled profile.
pub fn profile_signature(values: &[f64], growth_ratio: f64, decay_ratio: f64) -> (bool, bool) {
    let n = values.len();
    let (prev, last) = (values[n - 2], values[n - 1]);
    let max = values.iter().copied().fold(0.0, f64::max);
    if max == 0.0 {
        return (true, true);
    }
    let bounded = last.is_finite() && last <= growth_ratio * prev;
    let tail = &values[n.saturating_sub(3)..];
    let decreasing = tail.windows(2).all(|w| w[1] < w[0]);
    let vanishing = bounded && max.is_finite() && decreasing && last <= decay_ratio * max;
    (bounded, vanishing)
}

fn profile(radii: &[f64], values: Vec<f64>, s: &Settings) -> ProfileOutput {
    let (bounded, vanishing) = profile_signature(&values, s.growth_ratio, s.decay_ratio);
    ProfileOutput { radii: radii.to_vec(), values: values.into_iter().map(Extended).collect(), bounded, vanishing }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerdictOutput {
    pub verdicts: Vec<ClassificationVerdict>,
    /// Sup of the criterion on circles, per pair.
    pub profiles: Vec<ProfileOutput>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BerezinOutput {
    pub exponent: f64,
    /// Transform at `psi(r * direction)`, per pair.
    pub profiles: Vec<ProfileOutput>,
    /// Smallest `B(psi(zeta)) / criterion(zeta)^q` over the probes, per pair.
    pub min_lower_ratio: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatrixOutput {
    pub dim: usize,
    pub frobenius: f64,
    pub max_abs_entry: f64,
    pub nonzero_entries: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub parts_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub entries: Option<serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SvalsOutput {
    pub expected_bounded: bool,
    pub expected_compact: bool,
    pub evidence: CompactnessEvidence,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchattenEntry {
    pub p: f64,
    pub norms: Vec<f64>,
    pub relative_change: f64,
    pub stabilized: bool,
    pub expected_member: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchattenOutput {
    pub dims: Vec<usize>,
    pub entries: Vec<SchattenEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DifferenceOutput {
    pub verdict: DifferenceVerdict,
    pub schatten: Vec<(f64, Option<bool>)>,
    pub proxy_compact: bool,
    pub proxy_tail_quantiles: Vec<f64>,
    pub summand_proxy_compact: [bool; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolventProbe {
    pub lambda: [f64; 2],
    pub inside: bool,
    pub norms: Vec<Extended>,
    pub growing: bool,
    pub stabilized: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumOutput {
    pub radius: f64,
    pub dims: Vec<usize>,
    pub probes: Vec<ResolventProbe>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelPoint {
    pub w: [f64; 2],
    pub value: f64,
    pub expected: f64,
    pub relative_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelOutput {
    pub p: f64,
    pub points: Vec<KernelPoint>,
    pub max_relative_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LittlewoodPaleyOutput {
    pub p: f64,
    /// Ratio for `z^n`, `n = 0..=lp_degree`.
    pub ratios: Vec<f64>,
    pub min: f64,
    pub max: f64,
    pub max_refine_change: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum CheckOutput {
    Verdict(VerdictOutput),
    Berezin(BerezinOutput),
    Matrix(MatrixOutput),
    Svals(SvalsOutput),
    Schatten(SchattenOutput),
    Difference(DifferenceOutput),
    Spectrum(SpectrumOutput),
    Kernel(KernelOutput),
    LittlewoodPaley(LittlewoodPaleyOutput),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Result(CheckOutput),
    Error(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRecord {
    /// Symbolic verdict against numerical evidence; absent when nothing was compared.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub agreement: Option<bool>,
    #[serde(flatten)]
    pub outcome: Outcome,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioReport {
    pub id: String,
    pub agreement: bool,
    pub comparisons: usize,
    pub errors: usize,
    pub checks: BTreeMap<Check, CheckRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportMeta {
    pub tool: &'static str,
    pub version: &'static str,
    pub schema: u32,
    pub max_dim: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub ok: bool,
    pub scenarios: usize,
    pub checks: usize,
    pub comparisons: usize,
    pub disagreements: Vec<String>,
    pub errors: Vec<String>,
}

/// Wall time of one check; kept out of the JSON report.
#[derive(Debug, Clone, PartialEq)]
pub struct Timing {
    pub scenario: String,
    pub check: Check,
    pub millis: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub meta: ReportMeta,
    pub scenarios: Vec<ScenarioReport>,
    pub summary: Summary,
    #[serde(skip)]
    pub timings: Vec<Timing>,
}

impl RunReport {
    /// Deterministic pretty JSON with a trailing newline.
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn exit_ok(&self) -> bool {
        self.summary.ok
    }

    pub fn scenario(&self, id: &str) -> Option<&ScenarioReport> {
        self.scenarios.iter().find(|s| s.id == id)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOptions {
    pub max_dim: usize,
    /// Worker threads; rayon's default when absent.
    pub jobs: Option<usize>,
    /// Restrict to these checks; scenarios requesting none of them are skipped.
    pub only: Option<BTreeSet<Check>>,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { max_dim: DEFAULT_MAX_DIM, jobs: None, only: None }
    }
}

/// Validates, then runs every scenario in parallel.
pub fn run(config: &Config, opts: &RunOptions) -> Result<RunReport> {
    config.validate(opts.max_dim)?;
    let selected: Vec<(&Scenario, Vec<Check>)> = config
        .scenarios
        .iter()
        .map(|sc| {
            let checks: BTreeSet<Check> =
                sc.checks.iter().copied().filter(|c| opts.only.as_ref().is_none_or(|o| o.contains(c))).collect();
            (sc, checks.into_iter().collect::<Vec<_>>())
        })
        .filter(|(_, checks)| !checks.is_empty())
        .collect();
    if selected.is_empty() {
        return Err(FockError::NoScenarios);
    }

    let work = || selected.par_iter().map(|(sc, checks)| run_scenario(sc, checks)).collect::<Vec<_>>();
    let results = match opts.jobs {
        Some(0) => return Err(FockError::InvalidArgument("--jobs must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| FockError::InvalidArgument(format!("thread pool: {e}")))?
            .install(work),
        None => work(),
    };

    let mut scenarios = Vec::with_capacity(results.len());
    let mut timings = Vec::new();
    let mut summary =
        Summary { ok: true, scenarios: 0, checks: 0, comparisons: 0, disagreements: Vec::new(), errors: Vec::new() };
    for (report, times) in results {
        summary.scenarios += 1;
        summary.checks += report.checks.len();
        summary.comparisons += report.comparisons;
        for (check, rec) in &report.checks {
            if rec.agreement == Some(false) {
                summary.disagreements.push(format!("{}/{}", report.id, check.name()));
            }
            if let Outcome::Error(e) = &rec.outcome {
                summary.errors.push(format!("{}/{}: {e}", report.id, check.name()));
            }
        }
        timings.extend(times);
        scenarios.push(report);
    }
    summary.ok = summary.disagreements.is_empty() && summary.errors.is_empty();
    Ok(RunReport {
        meta: ReportMeta {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            schema: REPORT_SCHEMA,
            max_dim: opts.max_dim,
        },
        scenarios,
        summary,
        timings,
    })
}

fn run_scenario(sc: &Scenario, checks: &[Check]) -> (ScenarioReport, Vec<Timing>) {
    let mut records = BTreeMap::new();
    let mut timings = Vec::new();
    for &check in checks {
        let start = Instant::now();
        let record = match run_check(sc, check) {
            Ok((out, agreement)) => CheckRecord { agreement, outcome: Outcome::Result(out) },
            Err(e) => CheckRecord { agreement: None, outcome: Outcome::Error(e.to_string()) },
        };
        timings.push(Timing { scenario: sc.id.clone(), check, millis: start.elapsed().as_secs_f64() * 1e3 });
        records.insert(check, record);
    }
    let comparisons = records.values().filter(|r| r.agreement.is_some()).count();
    let errors = records.values().filter(|r| matches!(r.outcome, Outcome::Error(_))).count();
    let agreement = records.values().all(|r| r.agreement != Some(false));
    (ScenarioReport { id: sc.id.clone(), agreement, comparisons, errors, checks: records }, timings)
}

fn run_check(sc: &Scenario, check: Check) -> Result<(CheckOutput, Option<bool>)> {
    match check {
        Check::Verdict => check_verdict(sc),
        Check::Berezin => check_berezin(sc),
        Check::Matrix => check_matrix(sc),
        Check::Svals => check_svals(sc),
        Check::Schatten => check_schatten(sc),
        Check::Difference => check_difference(sc),
        Check::Spectrum => check_spectrum(sc),
        Check::Kernel => check_kernel(sc),
        Check::LittlewoodPaley => check_littlewood_paley(sc),
    }
}

/// The single operator a scenario denotes: its pair, or the difference of its two pairs.
fn scenario_operator(sc: &Scenario) -> OperatorSpec {
    match sc.pairs.as_slice() {
        [a, b] => OperatorSpec::Difference { first: a.clone(), second: b.clone() },
        [a, ..] => OperatorSpec::Pair(a.clone()),
        [] => unreachable!("validated scenario has pairs"),
    }
}

/// Expected `(bounded, compact)` on `F_2`, where the matrix oracle lives.
fn expected_on_f2(sc: &Scenario) -> Result<(bool, bool)> {
    match sc.pairs.as_slice() {
        [a, b] => Ok((true, classify::difference_compact(a, b, 2.0, 2.0)?.compact)),
        [a, ..] => {
            let v = classify::verdict(a, 2.0, 2.0)?;
            Ok((v.bounded, v.compact))
        }
        [] => unreachable!("validated scenario has pairs"),
    }
}

fn check_verdict(sc: &Scenario) -> Result<(CheckOutput, Option<bool>)> {
    let s = &sc.settings;
    let mut verdicts = Vec::new();
    let mut profiles = Vec::new();
    let mut agree = true;
    for pair in &sc.pairs {
        let v = classify::verdict(pair, sc.p, sc.q)?;
        let prof = planequad::sup_on_annuli(|z| classify::criterion(pair, z), &s.radii)?;
        let out = profile(prof.radii(), prof.sup_values().to_vec(), s);
        agree &= v.bounded == out.bounded && v.compact == out.vanishing;
        verdicts.push(v);
        profiles.push(out);
    }
    // below the diagonal the verdict is an integrability statement, not a profile one
    let agreement = (sc.p <= sc.q).then_some(agree);
    Ok((CheckOutput::Verdict(VerdictOutput { verdicts, profiles }), agreement))
}

fn check_berezin(sc: &Scenario) -> Result<(CheckOutput, Option<bool>)> {
    let s = &sc.settings;
    let dir = c64(s.direction) / c64(s.direction).norm();
    let mut profiles = Vec::new();
    let mut min_lower_ratio = Vec::new();
    let mut agree = true;
    for pair in &sc.pairs {
        let mut values = Vec::with_capacity(s.radii.len());
        let mut lower: Option<f64> = None;
        for &r in &s.radii {
            let zeta = dir * r;
            let b = classify::berezin_auto(pair, sc.q, pair.psi.apply(zeta), s.eps)?;
            let m = classify::criterion(pair, zeta);
            if m > 0.0 && b.is_finite() {
                let ratio = b / m.powf(sc.q);
                lower = Some(lower.map_or(ratio, |x: f64| x.min(ratio)));
            }
            values.push(b);
        }
        let out = profile(&s.radii, values, s);
        let v = classify::verdict(pair, sc.p, sc.q)?;
        agree &= v.bounded == out.bounded && v.compact == out.vanishing;
        profiles.push(out);
        min_lower_ratio.push(lower);
    }
    let agreement = (sc.p <= sc.q).then_some(agree);
    Ok((CheckOutput::Berezin(BerezinOutput { exponent: sc.q, profiles, min_lower_ratio }), agreement))
}

fn check_matrix(sc: &Scenario) -> Result<(CheckOutput, Option<bool>)> {
    let s = &sc.settings;
    let dim = s.matrix_dim.unwrap_or(*s.dims.last().expect("validated dims"));
    let t = fockmat::build(&scenario_operator(sc), dim)?;
    let frobenius = t.entries().iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let nonzero_entries = t.entries().iter().filter(|c| c.norm() > 0.0).count();
    let parts_residual = match sc.pairs.as_slice() {
        [pair] if pair.psi == AffineMap::identity() && dim > pair.g.degree().unwrap_or(0) + 2 => {
            Some(fockmat::parts_identity_residual(&pair.g, dim)?)
        }
        _ => None,
    };
    let entries = if dim <= fockmat::JSON_MAX_DIM { Some(t.to_json()?) } else { None };
    let out = MatrixOutput { dim, frobenius, max_abs_entry: t.max_abs_entry(), nonzero_entries, parts_residual, entries };
    Ok((CheckOutput::Matrix(out), None))
}

fn proxy(spec: &OperatorSpec, s: &Settings) -> Result<CompactnessEvidence> {
    fockmat::compactness_proxy(spec, &s.dims, s.tail_fraction, s.tol)
}

fn check_svals(sc: &Scenario) -> Result<(CheckOutput, Option<bool>)> {
    let (expected_bounded, expected_compact) = expected_on_f2(sc)?;
    let evidence = proxy(&scenario_operator(sc), &sc.settings)?;
    let agreement = evidence.bounded_signature == expected_bounded && evidence.compact == expected_compact;
    Ok((CheckOutput::Svals(SvalsOutput { expected_bounded, expected_compact, evidence }), Some(agreement)))
}

fn relative_change(prev: f64, last: f64) -> f64 {
    if prev == 0.0 && last == 0.0 {
        0.0
    } else {
        (last - prev).abs() / prev.abs().max(last.abs())
    }
}

fn check_schatten(sc: &Scenario) -> Result<(CheckOutput, Option<bool>)> {
    let s = &sc.settings;
    let spec = scenario_operator(sc);
    let spectra: Vec<SingularSpectrum> = s
        .dims
        .par_iter()
        .map(|&n| fockmat::build(&spec, n).and_then(|t| fockmat::singular_values(&t)))
        .collect::<Result<_>>()?;
    let mut entries = Vec::new();
    for &p in &s.schatten_p {
        let norms = spectra.iter().map(|sp| sp.schatten(p)).collect::<Result<Vec<_>>>()?;
        let relative_change = relative_change(norms[norms.len() - 2], norms[norms.len() - 1]);
        let expected_member = match sc.pairs.as_slice() {
            [a, b] => classify::difference_schatten(a, b, p)?.schatten_for_p == Some(true),
            [a, ..] => {
                let v = classify::verdict(a, 2.0, 2.0)?;
                v.compact && v.schatten_cutoff.value() < p
            }
            [] => unreachable!("validated scenario has pairs"),
        };
        entries.push(SchattenEntry { p, norms, relative_change, stabilized: relative_change <= s.stabilize_tol, expected_member });
    }
    let agreement = entries.iter().all(|e| e.stabilized == e.expected_member);
    Ok((CheckOutput::Schatten(SchattenOutput { dims: s.dims.clone(), entries }), Some(agreement)))
}

fn check_difference(sc: &Scenario) -> Result<(CheckOutput, Option<bool>)> {
    let s = &sc.settings;
    let [a, b] = sc.pairs.as_slice() else {
        return Err(FockError::InvalidArgument("difference needs two pairs".into()));
    };
    let verdict = classify::difference_compact(a, b, sc.p, sc.q)?;
    let schatten = s
        .schatten_p
        .iter()
        .map(|&p| Ok((p, classify::difference_schatten(a, b, p)?.schatten_for_p)))
        .collect::<Result<Vec<_>>>()?;
    let diff = proxy(&scenario_operator(sc), s)?;
    let first = proxy(&OperatorSpec::Pair(a.clone()), s)?;
    let second = proxy(&OperatorSpec::Pair(b.clone()), s)?;
    let agreement = (sc.p <= sc.q).then_some(diff.compact == verdict.compact);
    let out = DifferenceOutput {
        verdict,
        schatten,
        proxy_compact: diff.compact,
        proxy_tail_quantiles: diff.tail_quantiles,
        summand_proxy_compact: [first.compact, second.compact],
    };
    Ok((CheckOutput::Difference(out), agreement))
}

fn check_spectrum(sc: &Scenario) -> Result<(CheckOutput, Option<bool>)> {
    let s = &sc.settings;
    for pair in &sc.pairs {
        if pair.kind != OperatorKind::V || pair.psi != AffineMap::identity() {
            return Err(FockError::InvalidArgument("spectrum needs kind V pairs with psi = z".into()));
        }
    }
    let g1 = &sc.pairs[0].g;
    let g2 = sc.pairs.get(1).map_or_else(ComplexPolynomial::zero, |p| p.g.clone());
    let radius = classify::spectrum_disk(g1, &g2)?;
    let spec = scenario_operator(sc);
    let mats = s.dims.iter().map(|&n| fockmat::build(&spec, n)).collect::<Result<Vec<_>>>()?;
    let mut probes = Vec::new();
    for &l in &s.lambda {
        let lambda = c64(l);
        let inside = classify::spectrum_contains(g1, &g2, lambda, sc.p)?;
        let norms = mats.par_iter().map(|t| fockmat::resolvent_norm(t, lambda)).collect::<Result<Vec<_>>>()?;
        let (prev, last) = (norms[norms.len() - 2], norms[norms.len() - 1]);
        let increasing = norms.windows(2).all(|w| w[1] > w[0]);
        let growing = last.is_infinite() || (increasing && last >= s.growth_factor * prev);
        let stabilized = last.is_finite() && relative_change(prev, last) <= s.resolvent_tol;
        probes.push(ResolventProbe { lambda: l, inside, norms: norms.into_iter().map(Extended).collect(), growing, stabilized });
    }
    let agreement = probes.iter().all(|p| p.inside == p.growing);
    Ok((CheckOutput::Spectrum(SpectrumOutput { radius, dims: s.dims.clone(), probes }), Some(agreement)))
}

fn check_kernel(sc: &Scenario) -> Result<(CheckOutput, Option<bool>)> {
    let s = &sc.settings;
    let points = s
        .w
        .iter()
        .map(|&w| {
            let z = c64(w);
            let value = classify::kernel_norm(z, sc.p, &classify::kernel_grid(z, sc.p, s.eps)?)?;
            let expected = (0.5 * z.norm_sqr()).exp();
            Ok(KernelPoint { w, value, expected, relative_error: (value - expected).abs() / expected })
        })
        .collect::<Result<Vec<_>>>()?;
    let max_relative_error = points.iter().map(|p| p.relative_error).fold(0.0, f64::max);
    let agreement = max_relative_error <= s.kernel_tol;
    Ok((CheckOutput::Kernel(KernelOutput { p: sc.p, points, max_relative_error }), Some(agreement)))
}

fn check_littlewood_paley(sc: &Scenario) -> Result<(CheckOutput, Option<bool>)> {
    let s = &sc.settings;
    let rows = (0..=s.lp_degree)
        .into_par_iter()
        .map(|n| {
            let f = ComplexPolynomial::monomial(n, Complex64::new(1.0, 0.0));
            let grid = planequad::polynomial_grid(&f, sc.p, s.eps)?;
            let ratio = planequad::littlewood_paley_ratio(&f, sc.p, &grid)?;
            let fine = planequad::littlewood_paley_ratio(&f, sc.p, &grid.refined())?;
            Ok((ratio, relative_change(ratio, fine)))
        })
        .collect::<Result<Vec<_>>>()?;
    let ratios: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let max = ratios.iter().copied().fold(0.0, f64::max);
    let max_refine_change = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    let agreement = min > 0.0 && max.is_finite() && max_refine_change <= s.lp_refine_tol;
    Ok((CheckOutput::LittlewoodPaley(LittlewoodPaleyOutput { p: sc.p, ratios, min, max, max_refine_change }), Some(agreement)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Format {
    Json,
    Csv,
    Plotdata,
}

impl FromStr for Format {
    type Err = FockError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "plotdata" => Ok(Format::Plotdata),
            other => Err(FockError::InvalidArgument(format!("unknown format {other:?} (json, csv, plotdata)"))),
        }
    }
}

/// Writes via a sibling temp file and a rename.
fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, contents).map_err(|e| FockError::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| FockError::io(path, e))
}

fn ext(x: Extended) -> String {
    x.to_string()
}

/// Flat `scenario,check,metric,value` rows.
pub fn tables_csv(report: &RunReport) -> String {
    let mut out = String::from("scenario,check,metric,value\n");
    let mut row = |id: &str, check: Check, metric: &str, value: String| {
        let _ = writeln!(out, "{id},{},{metric},{value}", check.name());
    };
    for sc in &report.scenarios {
        for (&check, rec) in &sc.checks {
            if let Some(a) = rec.agreement {
                row(&sc.id, check, "agreement", a.to_string());
            }
            let out = match &rec.outcome {
                Outcome::Error(e) => {
                    row(&sc.id, check, "error", format!("\"{}\"", e.replace('"', "'")));
                    continue;
                }
                Outcome::Result(o) => o,
            };
            match out {
                CheckOutput::Verdict(v) => {
                    for (i, (vd, pr)) in v.verdicts.iter().zip(&v.profiles).enumerate() {
                        row(&sc.id, check, &format!("pair{i}.bounded"), vd.bounded.to_string());
                        row(&sc.id, check, &format!("pair{i}.compact"), vd.compact.to_string());
                        row(&sc.id, check, &format!("pair{i}.schatten_cutoff"), ext(vd.schatten_cutoff));
                        row(&sc.id, check, &format!("pair{i}.profile_bounded"), pr.bounded.to_string());
                        row(&sc.id, check, &format!("pair{i}.profile_vanishing"), pr.vanishing.to_string());
                    }
                }
                CheckOutput::Berezin(b) => {
                    for (i, pr) in b.profiles.iter().enumerate() {
                        row(&sc.id, check, &format!("pair{i}.last"), ext(*pr.values.last().expect("radii")));
                        row(&sc.id, check, &format!("pair{i}.bounded"), pr.bounded.to_string());
                        row(&sc.id, check, &format!("pair{i}.vanishing"), pr.vanishing.to_string());
                    }
                }
                CheckOutput::Matrix(m) => {
                    row(&sc.id, check, "dim", m.dim.to_string());
                    row(&sc.id, check, "frobenius", m.frobenius.to_string());
                    row(&sc.id, check, "max_abs_entry", m.max_abs_entry.to_string());
                    if let Some(r) = m.parts_residual {
                        row(&sc.id, check, "parts_residual", r.to_string());
                    }
                }
                CheckOutput::Svals(s) => {
                    row(&sc.id, check, "operator_norm", s.evidence.spectrum.largest().to_string());
                    row(&sc.id, check, "bounded_signature", s.evidence.bounded_signature.to_string());
                    row(&sc.id, check, "proxy_compact", s.evidence.compact.to_string());
                }
                CheckOutput::Schatten(s) => {
                    for e in &s.entries {
                        row(&sc.id, check, &format!("p{}.norm", e.p), e.norms.last().expect("dims").to_string());
                        row(&sc.id, check, &format!("p{}.relative_change", e.p), e.relative_change.to_string());
                    }
                }
                CheckOutput::Difference(d) => {
                    row(&sc.id, check, "compact", d.verdict.compact.to_string());
                    row(&sc.id, check, "proxy_compact", d.proxy_compact.to_string());
                }
                CheckOutput::Spectrum(s) => {
                    row(&sc.id, check, "radius", s.radius.to_string());
                    for p in &s.probes {
                        let tag = format!("lambda({}|{})", p.lambda[0], p.lambda[1]);
                        row(&sc.id, check, &format!("{tag}.last"), ext(*p.norms.last().expect("dims")));
                        row(&sc.id, check, &format!("{tag}.inside"), p.inside.to_string());
                    }
                }
                CheckOutput::Kernel(k) => row(&sc.id, check, "max_relative_error", k.max_relative_error.to_string()),
                CheckOutput::LittlewoodPaley(l) => {
                    row(&sc.id, check, "min", l.min.to_string());
                    row(&sc.id, check, "max", l.max.to_string());
                    row(&sc.id, check, "max_refine_change", l.max_refine_change.to_string());
                }
            }
        }
    }
    for t in &report.timings {
        row(&t.scenario, t.check, "wall_ms", format!("{:.3}", t.millis));
    }
    out
}

/// `(file name, contents)` for each plot-data file the report supports.
pub fn plotdata_files(report: &RunReport) -> Vec<(String, String)> {
    let mut files = Vec::new();
    for sc in &report.scenarios {
        let result = |c: Check| match sc.checks.get(&c).map(|r| &r.outcome) {
            Some(Outcome::Result(o)) => Some(o),
            _ => None,
        };
        if let Some(CheckOutput::Svals(s)) = result(Check::Svals) {
            files.push((format!("svals_{}.csv", sc.id), s.evidence.spectrum.to_csv()));
        }
        let mut prof = String::new();
        if let Some(CheckOutput::Verdict(v)) = result(Check::Verdict) {
            for (i, p) in v.profiles.iter().enumerate() {
                for (r, x) in p.radii.iter().zip(&p.values) {
                    let _ = writeln!(prof, "criterion,{i},{r},{x}");
                }
            }
        }
        if let Some(CheckOutput::Berezin(b)) = result(Check::Berezin) {
            for (i, p) in b.profiles.iter().enumerate() {
                for (r, x) in p.radii.iter().zip(&p.values) {
                    let _ = writeln!(prof, "berezin,{i},{r},{x}");
                }
            }
        }
        if !prof.is_empty() {
            files.push((format!("profile_{}.csv", sc.id), format!("source,pair,radius,value\n{prof}")));
        }
        if let Some(CheckOutput::Spectrum(s)) = result(Check::Spectrum) {
            let mut csv = String::from("lambda_re,lambda_im,dim,norm\n");
            for p in &s.probes {
                for (n, x) in s.dims.iter().zip(&p.norms) {
                    let _ = writeln!(csv, "{},{},{n},{x}", p.lambda[0], p.lambda[1]);
                }
            }
            files.push((format!("resolvent_{}.csv", sc.id), csv));
        }
    }
    files
}

/// Writes the requested formats under `out`; returns the paths written.
pub fn emit(report: &RunReport, formats: &[Format], out: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out).map_err(|e| FockError::io(out, e))?;
    let formats: BTreeSet<Format> = formats.iter().copied().collect();
    let mut written = Vec::new();
    if formats.contains(&Format::Json) {
        let path = out.join("report.json");
        write_atomic(&path, &report.to_json()?)?;
        written.push(path);
    }
    if formats.contains(&Format::Csv) {
        let path = out.join("tables.csv");
        write_atomic(&path, &tables_csv(report))?;
        written.push(path);
    }
    if formats.contains(&Format::Plotdata) {
        let dir = out.join("plotdata");
        fs::create_dir_all(&dir).map_err(|e| FockError::io(&dir, e))?;
        for (name, contents) in plotdata_files(report) {
            let path = dir.join(name);
            write_atomic(&path, &contents)?;
            written.push(path);
        }
    }
    Ok(written)
}
