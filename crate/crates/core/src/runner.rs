//! Configuration-driven batch runs: a TOML file in, a JSON envelope and CSV tables out.
//!
//! Every check a module can make is surfaced as a named [`Assertion`]; the
//! exit status of a run follows [`ExitStatus`].

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::compactness::{exclusion_scan_with, multiplier_divergence_scan, ExclusionProbe, FamilyKind, SingularFamily};
use crate::dynamics::{
    geodesic_velocity_orthogonality, integrate, re_families_from_cc, tau_conjugation_residual, verify_families,
    write_trajectory_csv, ReKind,
};
use crate::error::{CcError, Result};
use crate::geodesic::{enumerate_geodesic_ccs_with, spherical_regime_check, GeodesicCC, GeodesicEnumeration};
use crate::linalg::InertiaTriple;
use crate::manifold::{
    apply_symmetry, configuration_from_angles, configuration_to_angles, AmbientPoint, AnglePoint, Curvature, MassList,
    SymmetryElement,
};
use crate::parallel::{with_jobs, Execution};
use crate::planar::{degenerate_two_body_probe, multistart_solve_with, quotient_hessian_inertia, PlanarSearchConfig};
use crate::potentials::{mc_identities, multiplier_and_residual};
use crate::spectral::spectral_ordering_check_with;
use crate::tol::Tolerances;

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOLKIT_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    SolveGeodesic,
    SolvePlanar,
    Index,
    DynamicsVerify,
    Compactness,
    PalmoreCount,
}

impl Command {
    pub const ALL: [Command; 6] = [
        Command::SolveGeodesic,
        Command::SolvePlanar,
        Command::Index,
        Command::DynamicsVerify,
        Command::Compactness,
        Command::PalmoreCount,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::SolveGeodesic => "solve-geodesic",
            Command::SolvePlanar => "solve-planar",
            Command::Index => "index",
            Command::DynamicsVerify => "dynamics-verify",
            Command::Compactness => "compactness",
            Command::PalmoreCount => "palmore-count",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = CcError;
    fn from_str(s: &str) -> Result<Self> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| CcError::Config(format!("unknown command `{s}`")))
    }
}

/// What `c` is measured against.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CScale {
    #[default]
    Absolute,
    MinMass,
    TotalMass,
}

impl CScale {
    fn resolve(self, c: f64, masses: &MassList) -> f64 {
        match self {
            CScale::Absolute => c,
            CScale::MinMass => c * masses.min(),
            CScale::TotalMass => c * masses.total(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseSpec {
    #[serde(default)]
    pub label: Option<String>,
    pub sigma: Curvature,
    pub masses: MassList,
    #[serde(default)]
    pub c: Option<f64>,
    #[serde(default)]
    pub c_relative_to: CScale,
    /// Configuration file analysed by `index` instead of enumerating.
    #[serde(default)]
    pub configuration: Option<PathBuf>,
}

/// `count` mass vectors per `n`, uniform in `mass_range`, each run at every `c`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomCases {
    pub sigma: Curvature,
    pub n: Vec<usize>,
    pub count: usize,
    pub mass_range: [f64; 2],
    pub c: Vec<f64>,
    #[serde(default)]
    pub c_relative_to: CScale,
    /// RNG stream; blocks sharing a stream and seed draw the same masses.
    #[serde(default)]
    pub stream: Option<u64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Limits {
    /// Wall-time budget for the whole run.
    pub runtime_s: Option<f64>,
    /// Smallest number of solved OCCs the run must have examined.
    pub min_instances: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeodesicOptions {
    /// Check that `τq` is an OCC with multiplier `−λ` (`S³` only).
    pub check_tau: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlanarOptions {
    pub starts: Option<usize>,
    pub starts_per_body: usize,
    pub reflection_merge: bool,
    pub min_total: Option<usize>,
    pub min_nongeodesic: Option<usize>,
}

impl Default for PlanarOptions {
    fn default() -> Self {
        PlanarOptions {
            starts: None,
            starts_per_body: 500,
            reflection_merge: true,
            min_total: None,
            min_nongeodesic: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DegenerateOptions {
    pub mass: f64,
    pub samples: usize,
    pub min_samples: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IndexOptions {
    pub cone_samples: usize,
    /// Required zero-classification margin, in units of `tol_zero`.
    pub min_margin: f64,
    /// Bound on `|A c₁|` and `|A c₂ − 2λ c₂|`.
    pub eigvec_tol: f64,
    pub degenerate: Option<DegenerateOptions>,
}

impl Default for IndexOptions {
    fn default() -> Self {
        IndexOptions {
            cone_samples: 200,
            min_margin: 10.0,
            eigvec_tol: 1e-9,
            degenerate: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DynamicsOptions {
    pub t_end: f64,
    pub dt: f64,
    pub s_grid: Vec<f64>,
    /// Bound on the `τ`-conjugation residual (`S³`).
    pub tau_tol: f64,
    /// Write the trajectory of the first family of each case.
    pub trajectory_csv: bool,
}

impl Default for DynamicsOptions {
    fn default() -> Self {
        DynamicsOptions {
            t_end: 5.0,
            dt: 1e-3,
            s_grid: vec![0.0, 0.7, std::f64::consts::FRAC_PI_2],
            tau_tol: 1e-12,
            trajectory_csv: false,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeExpectation {
    /// Minimum residual stays above `10·ε_cc` on every ball.
    Excluded,
    /// An OCC is exhibited in every ball.
    Detected,
    #[default]
    Report,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilySpec {
    pub label: String,
    #[serde(default)]
    pub check_divergence: bool,
    pub family: SingularFamily,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeSpec {
    pub label: String,
    pub sigma: Curvature,
    pub masses: MassList,
    #[serde(default)]
    pub center: Option<Vec<AmbientPoint>>,
    /// Center in angle form `[θ, φ]`.
    #[serde(default)]
    pub center_angles: Option<Vec<[f64; 2]>>,
    /// Family whose members are counted in each ball; also supplies the center if none is given.
    #[serde(default)]
    pub family: Option<SingularFamily>,
    pub radius_max: f64,
    pub decades: u32,
    #[serde(default = "one")]
    pub per_decade: u32,
    #[serde(default = "ten_thousand")]
    pub sample_count: usize,
    #[serde(default = "four")]
    pub refine: usize,
    #[serde(default)]
    pub expect: ProbeExpectation,
}

fn one() -> u32 {
    1
}
fn four() -> usize {
    4
}
fn ten_thousand() -> usize {
    10_000
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompactnessOptions {
    pub families: Vec<FamilySpec>,
    pub probes: Vec<ProbeSpec>,
    pub expected_exponent: f64,
    pub exponent_tol: f64,
}

impl Default for CompactnessOptions {
    fn default() -> Self {
        CompactnessOptions {
            families: Vec::new(),
            probes: Vec::new(),
            expected_exponent: -3.0,
            exponent_tol: 0.1,
        }
    }
}

/// A run description, read from TOML.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: Command,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output_path: Option<PathBuf>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default, rename = "case")]
    pub cases: Vec<CaseSpec>,
    #[serde(default)]
    pub random_cases: Vec<RandomCases>,
    #[serde(default)]
    pub limits: Limits,
    #[serde(default)]
    pub geodesic: GeodesicOptions,
    #[serde(default)]
    pub planar: PlanarOptions,
    #[serde(default)]
    pub index: IndexOptions,
    #[serde(default)]
    pub dynamics: DynamicsOptions,
    #[serde(default)]
    pub compactness: CompactnessOptions,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| CcError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CcError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            CcError::Config(msg) => CcError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.tolerances.validate()?;
        let cfg_err = |m: String| Err(CcError::Config(m));
        for (k, c) in self.cases.iter().enumerate() {
            match (self.command, &c.configuration, c.c) {
                (Command::Index, Some(_), _) => {}
                (_, Some(_), _) => return cfg_err(format!("case {k}: `configuration` is only read by `index`")),
                (_, None, None) => return cfg_err(format!("case {k}: missing `c`")),
                (_, None, Some(v)) if !(v > 0.0 && v.is_finite()) => {
                    return cfg_err(format!("case {k}: c must be positive"))
                }
                _ => {}
            }
        }
        for (k, r) in self.random_cases.iter().enumerate() {
            let [lo, hi] = r.mass_range;
            if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
                return cfg_err(format!("random_cases {k}: mass_range must satisfy 0 < lo ≤ hi"));
            }
            if r.n.iter().any(|&n| n < 2) || r.c.is_empty() || r.c.iter().any(|&c| !(c > 0.0)) {
                return cfg_err(format!("random_cases {k}: need n ≥ 2 and positive c values"));
            }
        }
        let needs_cases = !matches!(self.command, Command::Compactness);
        let has_degenerate = self.command == Command::Index && self.index.degenerate.is_some();
        if needs_cases && self.cases.is_empty() && self.random_cases.is_empty() && !has_degenerate {
            return cfg_err(format!(
                "`{}` needs at least one [[case]] or [[random_cases]] entry",
                self.command
            ));
        }
        if self.command == Command::Compactness
            && self.compactness.families.is_empty()
            && self.compactness.probes.is_empty()
        {
            return cfg_err("`compactness` needs [[compactness.families]] or [[compactness.probes]]".into());
        }
        let d = &self.dynamics;
        if !(d.dt > 0.0 && d.t_end > 0.0) || d.s_grid.is_empty() {
            return cfg_err("dynamics: need dt > 0, t_end > 0 and a non-empty s_grid".into());
        }
        for f in &self.compactness.families {
            f.family
                .validate()
                .map_err(|e| CcError::Config(format!("family `{}`: {e}", f.label)))?;
        }
        for p in &self.compactness.probes {
            if p.center.is_some() && p.center_angles.is_some() {
                return cfg_err(format!("probe `{}`: give one of `center` or `center_angles`", p.label));
            }
            if p.center.is_none() && p.center_angles.is_none() && p.family.is_none() {
                return cfg_err(format!("probe `{}`: no center", p.label));
            }
            if !(p.radius_max > 0.0) || p.per_decade == 0 {
                return cfg_err(format!("probe `{}`: need radius_max > 0 and per_decade ≥ 1", p.label));
            }
        }
        Ok(())
    }

    /// Explicit cases followed by the generated random ones.
    pub fn expand_cases(&self, seed: u64) -> Result<Vec<ResolvedCase>> {
        let mut out = Vec::new();
        for c in &self.cases {
            let value = c.c.map(|v| c.c_relative_to.resolve(v, &c.masses));
            out.push(ResolvedCase {
                label: c.label.clone().unwrap_or_else(|| format!("case-{}", out.len())),
                sigma: c.sigma,
                masses: c.masses.clone(),
                c: value,
                configuration: c.configuration.clone(),
                seed: 0,
            });
        }
        for (b, r) in self.random_cases.iter().enumerate() {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(r.stream.unwrap_or(1000 + b as u64));
            for &n in &r.n {
                for k in 0..r.count {
                    let m: Vec<f64> = (0..n)
                        .map(|_| rng.gen_range(r.mass_range[0]..=r.mass_range[1]))
                        .collect();
                    let masses = MassList::new(m).map_err(|e| CcError::Config(e.to_string()))?;
                    for &c in &r.c {
                        out.push(ResolvedCase {
                            label: format!("random{b}-n{n}-{k}-c{c}"),
                            sigma: r.sigma,
                            c: Some(r.c_relative_to.resolve(c, &masses)),
                            masses: masses.clone(),
                            configuration: None,
                            seed: 0,
                        });
                    }
                }
            }
        }
        for (k, c) in out.iter_mut().enumerate() {
            c.seed = seed.wrapping_add(k as u64);
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResolvedCase {
    pub label: String,
    pub sigma: Curvature,
    pub masses: MassList,
    pub c: Option<f64>,
    pub configuration: Option<PathBuf>,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Assertion {
    pub name: String,
    pub case: Option<String>,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaseRecord {
    pub case: ResolvedCase,
    pub result: Value,
    pub error: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExitStatus {
    Pass,
    AssertionFailure,
    ConfigError,
    NumericalFailure,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        match self {
            ExitStatus::Pass => 0,
            ExitStatus::AssertionFailure => 1,
            ExitStatus::ConfigError => 2,
            ExitStatus::NumericalFailure => 3,
        }
    }

    pub fn for_error(e: &CcError) -> ExitStatus {
        if e.is_numerical() {
            ExitStatus::NumericalFailure
        } else {
            ExitStatus::ConfigError
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultEnvelope {
    pub schema_version: u32,
    pub toolkit_version: String,
    pub command: Command,
    pub seed: u64,
    pub config: ExperimentConfig,
    pub cases: Vec<CaseRecord>,
    /// Run-level results that belong to no single case.
    pub summary: Value,
    pub assertions: Vec<Assertion>,
    pub passed: bool,
    pub status: ExitStatus,
    /// Excluded from the determinism contract.
    pub wall_time_s: f64,
}

impl ResultEnvelope {
    pub fn failed(&self) -> impl Iterator<Item = &Assertion> {
        self.assertions.iter().filter(|a| !a.passed)
    }
}

/// A flat CSV table.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(|e| CcError::Io(std::io::Error::other(e)))?;
        w.write_record(&self.header)
            .map_err(|e| CcError::Io(std::io::Error::other(e)))?;
        for r in &self.rows {
            w.write_record(r).map_err(|e| CcError::Io(std::io::Error::other(e)))?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
    pub jobs: Option<usize>,
}

pub struct RunOutput {
    pub envelope: ResultEnvelope,
    pub tables: BTreeMap<String, Table>,
    pub out_dir: Option<PathBuf>,
}

struct Ctx<'a> {
    cfg: &'a ExperimentConfig,
    tol: &'a Tolerances,
    exec: Execution,
    out_dir: Option<&'a Path>,
    assertions: Vec<Assertion>,
    tables: BTreeMap<String, Table>,
    instances: usize,
    numerical_failure: bool,
}

impl Ctx<'_> {
    fn check(&mut self, name: &str, case: Option<&str>, passed: bool, detail: impl Into<String>) {
        self.assertions.push(Assertion {
            name: name.into(),
            case: case.map(str::to_string),
            passed,
            detail: detail.into(),
        });
    }

    fn table(&mut self, name: &str, header: &[&str]) -> &mut Table {
        self.tables
            .entry(name.to_string())
            .or_insert_with(|| Table::new(header))
    }
}

fn f(v: f64) -> String {
    format!("{v:e}")
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";")
}

fn factorial(n: usize) -> usize {
    (1..=n).product()
}

/// Lower bound `(3n − 4)(n − 1)!/2` on the number of planar classes.
pub fn palmore_lower_bound(n: usize) -> usize {
    (3 * n - 4) * factorial(n - 1) / 2
}

/// Runs a configuration; writes the envelope and tables when an output directory is known.
pub fn run(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<RunOutput> {
    cfg.validate()?;
    let seed = opts.seed.unwrap_or(cfg.seed);
    let out_dir = opts.out_dir.clone().or_else(|| cfg.output_path.clone());
    let exec = if opts.jobs == Some(1) {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    let start = Instant::now();
    let (cases, summary, mut ctx_out) = with_jobs(opts.jobs, || -> Result<_> {
        let cases = cfg.expand_cases(seed)?;
        let mut ctx = Ctx {
            cfg,
            tol: &cfg.tolerances,
            exec,
            out_dir: out_dir.as_deref(),
            assertions: Vec::new(),
            tables: BTreeMap::new(),
            instances: 0,
            numerical_failure: false,
        };
        if let Some(dir) = &out_dir {
            std::fs::create_dir_all(dir)?;
        }
        let mut records = Vec::with_capacity(cases.len());
        for case in &cases {
            let res = match cfg.command {
                Command::SolveGeodesic => run_geodesic(&mut ctx, case),
                Command::SolvePlanar | Command::PalmoreCount => run_planar(&mut ctx, case),
                Command::Index => run_index(&mut ctx, case),
                Command::DynamicsVerify => run_dynamics(&mut ctx, case),
                Command::Compactness => Ok(Value::Null),
            };
            let record = match res {
                Ok(result) => CaseRecord {
                    case: case.clone(),
                    result,
                    error: None,
                },
                Err(e) => {
                    if e.is_numerical() {
                        ctx.numerical_failure = true;
                    } else if matches!(e, CcError::Config(_) | CcError::InvalidInput(_)) {
                        return Err(CcError::Config(format!("case `{}`: {e}", case.label)));
                    }
                    ctx.check("case_completed", Some(&case.label), false, e.to_string());
                    CaseRecord {
                        case: case.clone(),
                        result: Value::Null,
                        error: Some(e.to_string()),
                    }
                }
            };
            records.push(record);
        }
        let summary = match cfg.command {
            Command::Compactness => run_compactness(&mut ctx, seed)?,
            Command::Index => match &cfg.index.degenerate {
                Some(d) => run_degenerate(&mut ctx, d)?,
                None => Value::Null,
            },
            _ => Value::Null,
        };
        Ok((
            records,
            summary,
            (ctx.assertions, ctx.tables, ctx.instances, ctx.numerical_failure),
        ))
    })?;
    let wall = start.elapsed().as_secs_f64();
    let (ref mut assertions, _, instances, numerical) = ctx_out;
    if let Some(limit) = cfg.limits.runtime_s {
        assertions.push(Assertion {
            name: "runtime".into(),
            case: None,
            passed: wall < limit,
            detail: format!("limit {limit} s"),
        });
    }
    if let Some(min) = cfg.limits.min_instances {
        assertions.push(Assertion {
            name: "instances".into(),
            case: None,
            passed: instances >= min,
            detail: format!("{instances} solved OCCs examined, need {min}"),
        });
    }
    let passed = assertions.iter().all(|a| a.passed) && !numerical;
    let status = if numerical {
        ExitStatus::NumericalFailure
    } else if passed {
        ExitStatus::Pass
    } else {
        ExitStatus::AssertionFailure
    };
    let (assertions, tables, _, _) = ctx_out;
    let envelope = ResultEnvelope {
        schema_version: SCHEMA_VERSION,
        toolkit_version: TOOLKIT_VERSION.into(),
        command: cfg.command,
        seed,
        config: cfg.clone(),
        cases,
        summary,
        assertions,
        passed,
        status,
        wall_time_s: wall,
    };
    if let Some(dir) = &out_dir {
        write_envelope(&envelope, &dir.join("envelope.json"))?;
        for (name, t) in &tables {
            t.write(&dir.join(format!("{name}.csv")))?;
        }
    }
    Ok(RunOutput {
        envelope,
        tables,
        out_dir,
    })
}

pub fn write_envelope(env: &ResultEnvelope, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(env).map_err(|e| CcError::Io(std::io::Error::other(e)))?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}

fn need_c(case: &ResolvedCase) -> Result<f64> {
    case.c
        .ok_or_else(|| CcError::Config(format!("case `{}` has no c", case.label)))
}

fn enumerate(ctx: &Ctx, case: &ResolvedCase) -> Result<GeodesicEnumeration> {
    enumerate_geodesic_ccs_with(&case.masses, need_c(case)?, case.sigma, ctx.exec, ctx.tol)
}

fn mc_max(q: &[AmbientPoint], m: &MassList) -> f64 {
    mc_identities(q, m).iter().fold(0.0, |a, v| a.max(v.abs()))
}

fn run_geodesic(ctx: &mut Ctx, case: &ResolvedCase) -> Result<Value> {
    let e = enumerate(ctx, case)?;
    let n = case.masses.len();
    let label = case.label.as_str();
    let tol = ctx.tol.clone();
    let expected = factorial(n) / 2;
    ctx.check(
        "class_count",
        Some(label),
        e.classes.len() == expected,
        format!("{} classes, expected {expected}", e.classes.len()),
    );
    if e.classes.len() > 1 {
        ctx.check(
            "class_separation",
            Some(label),
            e.min_class_separation > tol.class,
            format!("min class_gap {:e}", e.min_class_separation),
        );
    }
    let mut worst_res: f64 = 0.0;
    let mut worst_mc: f64 = 0.0;
    for s in &e.solutions {
        let q = s.ambient();
        let r = multiplier_and_residual(&q, &case.masses, case.sigma)?;
        worst_res = worst_res.max(r.residual_norm.max(s.residual));
        worst_mc = worst_mc.max(mc_max(&q, &case.masses));
    }
    ctx.instances += e.solutions.len();
    ctx.check(
        "residual",
        Some(label),
        worst_res < tol.cc,
        format!("max residual {worst_res:e}"),
    );
    ctx.check(
        "mc_identities",
        Some(label),
        worst_mc < tol.cc,
        format!("max {worst_mc:e}"),
    );
    let neg = e.solutions.iter().all(|s| s.lambda < 0.0);
    ctx.check(
        "multiplier_negative",
        Some(label),
        neg,
        format!("{} solutions", e.solutions.len()),
    );
    let regime = (case.sigma == Curvature::Spherical).then(|| spherical_regime_check(&case.masses, e.c, &e.solutions));
    if let Some(r) = &regime {
        if let Some(b) = r.bound {
            ctx.check(
                "regime",
                Some(label),
                r.ok(),
                format!("max |θ| {:.6} against bound {b:.6}", r.max_abs_theta),
            );
        }
    }
    let reps: Vec<GeodesicCC> = e.representatives().cloned().collect();
    let inertia = ctx
        .exec
        .map(&reps, |cc| {
            spectral_ordering_check_with(
                cc,
                &case.masses,
                case.sigma,
                tol.tol_zero_rel,
                tol.gap_min,
                0,
                case.seed,
            )
        })
        .into_iter()
        .map(|r| r.map(|r| r.inertia_total.triple))
        .collect::<Result<Vec<_>>>()?;
    if case.sigma == Curvature::Hyperbolic || e.c < case.masses.min() / 4.0 {
        let want = InertiaTriple::new(0, n, n - 2);
        ctx.check(
            "inertia_triple",
            Some(label),
            inertia.iter().all(|t| *t == want),
            format!("expected {want}"),
        );
    }
    let mut tau_rows = Vec::new();
    if ctx.cfg.geodesic.check_tau && case.sigma == Curvature::Spherical {
        for s in e.representatives() {
            let tq = apply_symmetry(&SymmetryElement::tau(), &s.ambient(), case.sigma)?;
            let r = multiplier_and_residual(&tq, &case.masses, case.sigma)?;
            tau_rows.push((s.lambda, r.lambda, r.residual_norm));
        }
        let ok = tau_rows
            .iter()
            .all(|&(l, lt, res)| res < tol.cc && (l + lt).abs() < 1e-9);
        let worst = tau_rows.iter().map(|&(l, lt, _)| (l + lt).abs()).fold(0.0, f64::max);
        ctx.check(
            "tau_duality",
            Some(label),
            ok,
            format!("{} OCCs, max |λ(τq) + λ| {worst:e}", tau_rows.len()),
        );
    }
    let t = ctx.table(
        "geodesic_classes",
        &[
            "case",
            "sigma",
            "class",
            "members",
            "ordering",
            "lambda",
            "residual",
            "c_achieved",
            "inertia",
            "theta",
        ],
    );
    for (k, cl) in e.classes.iter().enumerate() {
        let s = &e.solutions[cl.representative];
        t.push(vec![
            label.to_string(),
            case.sigma.to_string(),
            k.to_string(),
            cl.members.len().to_string(),
            s.ordering.iter().map(|o| o.to_string()).collect::<Vec<_>>().join(";"),
            f(s.lambda),
            f(s.residual),
            f(s.c_achieved),
            inertia[k].to_string(),
            join(&s.theta),
        ]);
    }
    Ok(json!({
        "c": e.c,
        "classes": e.classes.len(),
        "solutions": e.solutions.len(),
        "min_class_separation": e.min_class_separation,
        "max_within_class_gap": e.max_within_class_gap,
        "max_residual": worst_res,
        "representatives": reps,
        "inertia": inertia,
        "regime": regime,
        "tau": tau_rows.iter().map(|&(l, lt, r)| json!({"lambda": l, "lambda_tau": lt, "residual_tau": r})).collect::<Vec<_>>(),
    }))
}

fn run_planar(ctx: &mut Ctx, case: &ResolvedCase) -> Result<Value> {
    let label = case.label.as_str();
    let n = case.masses.len();
    let opts = ctx.cfg.planar.clone();
    let tol = ctx.tol.clone();
    let mut pc = PlanarSearchConfig::new(case.masses.clone(), need_c(case)?, case.sigma, case.seed);
    pc.n_starts = opts.starts.unwrap_or(opts.starts_per_body * n);
    pc.reflection_merge = opts.reflection_merge;
    let cat = multistart_solve_with(&pc, ctx.exec, &tol)?;
    let worst_res = cat.classes.iter().map(|s| s.residual).fold(0.0, f64::max);
    let worst_mc = cat
        .classes
        .iter()
        .map(|s| mc_max(&s.ambient, &case.masses))
        .fold(0.0, f64::max);
    ctx.instances += cat.classes.len();
    ctx.check(
        "residual",
        Some(label),
        worst_res < tol.cc,
        format!("max residual {worst_res:e}"),
    );
    ctx.check(
        "mc_identities",
        Some(label),
        worst_mc < tol.cc,
        format!("max {worst_mc:e}"),
    );
    let neg = cat.classes.iter().filter(|s| s.lambda >= 0.0).count();
    ctx.check(
        "multiplier_negative",
        Some(label),
        neg == 0,
        format!("{neg} of {} classes with λ ≥ 0", cat.classes.len()),
    );
    if let Some(gm) = &cat.geodesic_match {
        ctx.check(
            "geodesic_match",
            Some(label),
            gm.complete(),
            format!(
                "{} catalog geodesic classes, {} enumerated, {} matched",
                gm.catalog_geodesic, gm.enumerated_classes, gm.matched_catalog
            ),
        );
    }
    let (min_total, min_nongeo) = match ctx.cfg.command {
        Command::PalmoreCount => {
            let b = palmore_lower_bound(n);
            (
                Some(opts.min_total.unwrap_or(b)),
                Some(opts.min_nongeodesic.unwrap_or(b - factorial(n) / 2)),
            )
        }
        _ => (opts.min_total, opts.min_nongeodesic),
    };
    if let Some(k) = min_total {
        ctx.check(
            "class_total",
            Some(label),
            cat.counts.total >= k,
            format!("{} classes, need ≥ {k}", cat.counts.total),
        );
    }
    if let Some(k) = min_nongeo {
        ctx.check(
            "class_nongeodesic",
            Some(label),
            cat.counts.nongeodesic >= k,
            format!("{} non-geodesic classes, need ≥ {k}", cat.counts.nongeodesic),
        );
    }
    let t = ctx.table(
        "catalog",
        &[
            "case",
            "sigma",
            "class",
            "geodesic",
            "lambda",
            "residual",
            "inertia_value",
            "hits",
            "source",
            "hessian_inertia",
            "theta",
            "phi",
        ],
    );
    for s in &cat.classes {
        t.push(vec![
            label.to_string(),
            case.sigma.to_string(),
            s.class_id.to_string(),
            s.geodesic.to_string(),
            f(s.lambda),
            f(s.residual),
            f(s.inertia_value),
            s.hits.to_string(),
            format!("{:?}", s.source),
            s.hessian_inertia
                .as_ref()
                .map_or(String::new(), |h| h.triple.to_string()),
            join(&s.angles.iter().map(|a| a.theta).collect::<Vec<_>>()),
            join(&s.angles.iter().map(|a| a.phi).collect::<Vec<_>>()),
        ]);
    }
    Ok(json!({
        "c": pc.c,
        "n_starts": pc.n_starts,
        "counts": cat.counts,
        "converged_starts": cat.converged_starts,
        "failed_starts": cat.failed_starts,
        "min_class_separation": cat.min_class_separation,
        "geodesic_match": cat.geodesic_match,
        "degenerate_classes": cat.degenerate_classes,
        "palmore_bound": palmore_lower_bound(n),
    }))
}

fn run_index(ctx: &mut Ctx, case: &ResolvedCase) -> Result<Value> {
    if let Some(path) = &case.configuration {
        return index_supplied(ctx, case, path);
    }
    let e = enumerate(ctx, case)?;
    let n = case.masses.len();
    let label = case.label.as_str();
    let (tol, io) = (ctx.tol.clone(), ctx.cfg.index.clone());
    let reps: Vec<GeodesicCC> = e.representatives().cloned().collect();
    let reports = ctx.exec.map(&reps, |cc| {
        spectral_ordering_check_with(
            cc,
            &case.masses,
            case.sigma,
            tol.tol_zero_rel,
            tol.gap_min,
            io.cone_samples,
            case.seed,
        )
    });
    let reports = reports.into_iter().collect::<Result<Vec<_>>>()?;
    ctx.instances += reports.len();
    let want_total = InertiaTriple::new(0, n, n - 2);
    let want_shift = InertiaTriple::new(1, 1, n - 2);
    let all = |p: &dyn Fn(&crate::spectral::SpectralReport) -> bool| reports.iter().all(p);
    let worst = |g: &dyn Fn(&crate::spectral::SpectralReport) -> f64| reports.iter().map(g).fold(0.0, f64::max);
    let min_margin = reports
        .iter()
        .map(|r| r.inertia_total.margin)
        .fold(f64::INFINITY, f64::min);
    ctx.check(
        "inertia_triple",
        Some(label),
        all(&|r| r.inertia_total.triple == want_total),
        format!("expected {want_total} at {} classes", reports.len()),
    );
    ctx.check(
        "zero_margin",
        Some(label),
        min_margin >= io.min_margin,
        format!("min margin {min_margin:.3e}, need ≥ {}", io.min_margin),
    );
    let eig = worst(&|r| r.c1_residual.max(r.c2_residual));
    ctx.check(
        "a_eigenvectors",
        Some(label),
        eig < io.eigvec_tol,
        format!("max residual {eig:e}"),
    );
    ctx.check(
        "a_ordering",
        Some(label),
        all(&|r| r.ordering_ok),
        format!(
            "min gap {:e}",
            reports.iter().map(|r| r.ordering_gap).fold(f64::INFINITY, f64::min)
        ),
    );
    ctx.check(
        "a_shift_inertia",
        Some(label),
        all(&|r| r.inertia_a_shift.triple == want_shift),
        format!("expected {want_shift}"),
    );
    ctx.check(
        "multiplier_negative",
        Some(label),
        all(&|r| r.lambda < 0.0),
        String::new(),
    );
    ctx.check("cone", Some(label), all(&|r| r.cone.ok()), String::new());
    let t = ctx.table(
        "spectral",
        &[
            "case",
            "sigma",
            "class",
            "lambda",
            "inertia_total",
            "margin",
            "inertia_h1",
            "inertia_h2_quotient",
            "inertia_a_shift",
            "c1_residual",
            "c2_residual",
            "ordering_gap",
            "congruence_residual",
        ],
    );
    for (k, r) in reports.iter().enumerate() {
        t.push(vec![
            label.to_string(),
            case.sigma.to_string(),
            k.to_string(),
            f(r.lambda),
            r.inertia_total.triple.to_string(),
            f(r.inertia_total.margin),
            r.inertia_h1.triple.to_string(),
            r.inertia_h2_quotient.triple.to_string(),
            r.inertia_a_shift.triple.to_string(),
            f(r.c1_residual),
            f(r.c2_residual),
            f(r.ordering_gap),
            f(r.congruence_residual),
        ]);
    }
    Ok(json!({ "c": e.c, "reports": reports }))
}

fn index_supplied(ctx: &mut Ctx, case: &ResolvedCase, path: &Path) -> Result<Value> {
    let conf = load_configuration_file(path)?;
    if conf.sigma != case.sigma || conf.masses != case.masses {
        return Err(CcError::Config(format!(
            "{}: masses or sigma differ from the case",
            path.display()
        )));
    }
    let label = case.label.as_str();
    let r = multiplier_and_residual(&conf.ambient, &conf.masses, conf.sigma)?;
    ctx.check(
        "residual",
        Some(label),
        r.residual_norm < ctx.tol.cc,
        format!("residual {:e}", r.residual_norm),
    );
    let angles = configuration_to_angles(&conf.ambient, conf.sigma)?;
    if angles.iter().all(|a| a.phi.abs() < 1e-12) {
        let theta: Vec<f64> = angles.iter().map(|a| a.theta).collect();
        let mut ordering: Vec<usize> = (0..theta.len()).collect();
        ordering.sort_by(|&a, &b| theta[a].total_cmp(&theta[b]));
        let cc = GeodesicCC {
            sigma: conf.sigma,
            c_achieved: crate::potentials::inertia(&conf.ambient, &conf.masses),
            theta,
            lambda: r.lambda,
            residual: r.residual_norm,
            ordering,
            iterations: 0,
        };
        let rep = spectral_ordering_check_with(
            &cc,
            &conf.masses,
            conf.sigma,
            ctx.tol.tol_zero_rel,
            ctx.tol.gap_min,
            ctx.cfg.index.cone_samples,
            case.seed,
        )?;
        Ok(json!({ "geodesic": true, "report": rep }))
    } else {
        let q = quotient_hessian_inertia(&angles, &conf.masses, conf.sigma, r.lambda, ctx.tol.tol_zero_rel)?;
        Ok(json!({ "geodesic": false, "lambda": r.lambda, "residual": r.residual_norm, "quotient_inertia": q }))
    }
}

fn run_degenerate(ctx: &mut Ctx, d: &DegenerateOptions) -> Result<Value> {
    let rep = degenerate_two_body_probe(d.mass, d.samples)?;
    let tol_cc = ctx.tol.cc;
    let want = InertiaTriple::new(1, 1, 0);
    let good = rep
        .samples
        .iter()
        .filter(|s| s.residual < tol_cc && s.inertia.triple == want)
        .count();
    ctx.check(
        "degenerate_continuum",
        None,
        good >= d.min_samples,
        format!(
            "{good} of {} samples with residual < ε_cc and inertia {want}, need ≥ {}",
            rep.samples.len(),
            d.min_samples
        ),
    );
    if let Some(p) = &rep.perturbed_inertia {
        ctx.check(
            "perturbed_nondegenerate",
            None,
            p.triple.n0 == 0,
            format!("c = m − {:e}: inertia {}", rep.perturbed_delta, p.triple),
        );
    }
    let t = ctx.table(
        "degenerate",
        &["theta1", "theta2", "lambda", "residual", "inertia_value", "inertia"],
    );
    for s in &rep.samples {
        t.push(vec![
            f(s.theta[0]),
            f(s.theta[1]),
            f(s.lambda),
            f(s.residual),
            f(s.inertia_value),
            s.inertia.triple.to_string(),
        ]);
    }
    Ok(json!({ "degenerate": rep }))
}

fn expected_kinds(sigma: Curvature, lambda: f64, s_grid: &[f64]) -> BTreeSet<String> {
    s_grid
        .iter()
        .map(|&s| {
            let (a, b) = crate::dynamics::family_parameters(lambda, sigma, s);
            format!("{:?}", ReKind::classify(a, b, sigma))
        })
        .collect()
}

fn run_dynamics(ctx: &mut Ctx, case: &ResolvedCase) -> Result<Value> {
    let e = enumerate(ctx, case)?;
    let label = case.label.as_str();
    let (tol, d) = (ctx.tol.clone(), ctx.cfg.dynamics.clone());
    let mut rows = Vec::new();
    let mut kinds = BTreeSet::new();
    let mut expected = BTreeSet::new();
    let (mut dev, mut eom, mut tau): (f64, f64, f64) = (0.0, 0.0, 0.0);
    let (mut orth_ok, mut failed) = (true, 0usize);
    for (k, cc) in e.representatives().enumerate() {
        let fams = re_families_from_cc(&cc.ambient(), cc.lambda, case.sigma, &d.s_grid)?;
        expected.extend(expected_kinds(case.sigma, cc.lambda, &d.s_grid));
        let reports = verify_families(&fams, &case.masses, d.t_end, d.dt, tol.dynamics, ctx.exec);
        for (fam, rep) in fams.iter().zip(reports) {
            let rep = rep?;
            kinds.insert(format!("{:?}", rep.kind));
            dev = dev.max(rep.max_deviation);
            eom = eom.max(rep.max_eom_residual);
            failed += usize::from(!rep.passed);
            orth_ok &= geodesic_velocity_orthogonality(fam)?;
            if case.sigma == Curvature::Spherical {
                let times: Vec<f64> = (0..=10).map(|i| d.t_end * i as f64 / 10.0).collect();
                tau = tau.max(tau_conjugation_residual(fam, &times)?);
            }
            rows.push((k, rep));
        }
        if d.trajectory_csv && k == 0 {
            if let (Some(dir), Some(fam)) = (ctx.out_dir, fams.first()) {
                let traj = integrate(&fam.state(0.0), &case.masses, case.sigma, d.t_end, d.dt, 100)?;
                write_trajectory_csv(&traj, &dir.join(format!("trajectory-{}.csv", case.label)))?;
            }
        }
    }
    ctx.instances += e.classes.len();
    ctx.check(
        "re_integration",
        Some(label),
        dev < tol.dynamics,
        format!(
            "max deviation {dev:e} over T = {} (dt = {}), {failed} of {} families above {:e}",
            d.t_end,
            d.dt,
            rows.len(),
            tol.dynamics
        ),
    );
    ctx.check(
        "re_closed_form",
        Some(label),
        eom < tol.dynamics,
        format!("max EOM residual {eom:e}"),
    );
    ctx.check("velocity_orthogonality", Some(label), orth_ok, String::new());
    if case.sigma == Curvature::Spherical {
        ctx.check("tau_conjugation", Some(label), tau < d.tau_tol, format!("max {tau:e}"));
    }
    ctx.check(
        "kinds_covered",
        Some(label),
        kinds == expected,
        format!("{}", kinds.iter().cloned().collect::<Vec<_>>().join(",")),
    );
    let t = ctx.table(
        "relative_equilibria",
        &[
            "case",
            "sigma",
            "class",
            "s",
            "kind",
            "alpha",
            "beta",
            "max_deviation",
            "max_eom_residual",
            "energy_drift",
            "periodicity",
            "passed",
        ],
    );
    for (k, r) in &rows {
        t.push(vec![
            label.to_string(),
            case.sigma.to_string(),
            k.to_string(),
            r.s.to_string(),
            format!("{:?}", r.kind),
            f(r.alpha),
            f(r.beta),
            f(r.max_deviation),
            f(r.max_eom_residual),
            f(r.energy_drift),
            serde_json::to_string(&r.periodicity).unwrap_or_default(),
            r.passed.to_string(),
        ]);
    }
    Ok(json!({
        "c": e.c,
        "max_deviation": dev,
        "max_eom_residual": eom,
        "tau_conjugation": tau,
        "families": rows.iter().map(|(_, r)| r).collect::<Vec<_>>(),
    }))
}

fn run_compactness(ctx: &mut Ctx, seed: u64) -> Result<Value> {
    let opts = ctx.cfg.compactness.clone();
    let tol = ctx.tol.clone();
    let mut fam_out = Vec::new();
    for fs in &opts.families {
        let scan = multiplier_divergence_scan(&fs.family)?;
        let l = fs.label.as_str();
        ctx.check(
            "family_exact",
            Some(l),
            scan.all_exact(tol.cc),
            format!("max residual {:e}", scan.max_residual),
        );
        if fs.check_divergence {
            ctx.check("divergence_monotone", Some(l), scan.monotone, String::new());
            ctx.check("multiplier_negative", Some(l), scan.all_negative, String::new());
            let ok = (scan.fitted_exponent - opts.expected_exponent).abs() <= opts.exponent_tol;
            ctx.check(
                "divergence_exponent",
                Some(l),
                ok,
                format!(
                    "fitted {:.4} on {} points, expected {} ± {}",
                    scan.fitted_exponent, scan.fit_points, opts.expected_exponent, opts.exponent_tol
                ),
            );
        }
        let t = ctx.table(
            "divergence",
            &["family", "theta", "lambda", "inertia", "d_min", "residual"],
        );
        for r in &scan.rows {
            t.push(vec![
                l.to_string(),
                f(r.theta),
                f(r.lambda),
                f(r.inertia),
                f(r.d_min),
                f(r.residual),
            ]);
        }
        let rows: Vec<Value> = scan
            .rows
            .iter()
            .map(|r| json!([r.theta, r.lambda, r.inertia, r.d_min, r.residual]))
            .collect();
        fam_out.push(json!({
            "label": fs.label,
            "kind": scan.kind,
            "fitted_exponent": scan.fitted_exponent,
            "fitted_prefactor": scan.fitted_prefactor,
            "fit_points": scan.fit_points,
            "monotone": scan.monotone,
            "max_residual": scan.max_residual,
            "rows_theta_lambda_inertia_dmin_residual": rows,
        }));
    }
    let mut probe_out = Vec::new();
    for (k, p) in opts.probes.iter().enumerate() {
        let center = match (&p.center, &p.center_angles, &p.family) {
            (Some(c), _, _) => c.clone(),
            (None, Some(a), _) => {
                let angles: Vec<AnglePoint> = a.iter().map(|&[t, f]| AnglePoint::new(t, f)).collect();
                configuration_from_angles(&angles, p.sigma)?
            }
            (None, None, Some(fam)) => fam.singular_limit()?,
            (None, None, None) => unreachable!("validated"),
        };
        if let Some(fam) = &p.family {
            if fam.kind != FamilyKind::Custom && (fam.sigma != p.sigma || fam.masses != p.masses) {
                return Err(CcError::Config(format!(
                    "probe `{}`: family masses or sigma differ from the probe",
                    p.label
                )));
            }
        }
        let probe = ExclusionProbe {
            center,
            radius_grid: ExclusionProbe::log_radii(p.radius_max, p.decades, p.per_decade),
            sample_count: p.sample_count,
            seed: seed.wrapping_add(k as u64),
            refine: p.refine,
        };
        let rep = exclusion_scan_with(&probe, &p.masses, p.sigma, p.family.as_ref(), ctx.exec, tol.cc)?;
        let l = p.label.as_str();
        match p.expect {
            ProbeExpectation::Excluded => {
                ctx.check(
                    "center_hypotheses",
                    Some(l),
                    rep.center.hypotheses_hold,
                    format!("I(X) = {:e}", rep.center.inertia),
                );
                ctx.check(
                    "exclusion",
                    Some(l),
                    rep.excluded_above(10.0 * tol.cc),
                    format!(
                        "min residual {:e} over {} radii",
                        rep.min_residual_found,
                        rep.rows.len()
                    ),
                );
            }
            ProbeExpectation::Detected => {
                let hits = rep.rows.iter().filter(|r| r.occ_detected).count();
                ctx.check(
                    "detection",
                    Some(l),
                    rep.detected_everywhere(),
                    format!("OCC exhibited in {hits} of {} balls", rep.rows.len()),
                );
            }
            ProbeExpectation::Report => {}
        }
        let t = ctx.table(
            "exclusion",
            &[
                "probe",
                "radius",
                "samples",
                "skipped",
                "min_residual",
                "median_residual",
                "refined_min_residual",
                "family_members_inside",
                "occ_detected",
            ],
        );
        for r in &rep.rows {
            t.push(vec![
                l.to_string(),
                f(r.radius),
                r.samples_evaluated.to_string(),
                r.samples_skipped.to_string(),
                f(r.min_residual),
                f(r.median_residual),
                r.refined_min_residual.map(f).unwrap_or_default(),
                r.family_members_inside.to_string(),
                r.occ_detected.to_string(),
            ]);
        }
        probe_out.push(json!({ "label": p.label, "report": rep }));
    }
    Ok(json!({ "families": fam_out, "probes": probe_out }))
}

/// A particle configuration with masses, as stored on disk.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Configuration {
    pub sigma: Curvature,
    pub masses: MassList,
    pub ambient: Vec<AmbientPoint>,
    /// Present when the file was in angle form.
    pub angles: Option<Vec<AnglePoint>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigurationFile {
    sigma: Curvature,
    masses: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    angles: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ambient: Option<Vec<[f64; 4]>>,
}

/// Reads a configuration in angle form (`angles = [[θ, φ], …]`) or ambient form (`ambient = [[x, y, z, w], …]`).
pub fn load_configuration_file(path: &Path) -> Result<Configuration> {
    let text = std::fs::read_to_string(path).map_err(|e| CcError::Config(format!("{}: {e}", path.display())))?;
    parse_configuration(&text).map_err(|e| match e {
        CcError::Config(m) => CcError::Config(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn parse_configuration(text: &str) -> Result<Configuration> {
    let file: ConfigurationFile = toml::from_str(text).map_err(|e| CcError::Config(e.to_string()))?;
    let masses = MassList::new(file.masses).map_err(|e| CcError::Config(e.to_string()))?;
    let sigma = file.sigma;
    let (ambient, angles) = match (file.angles, file.ambient) {
        (Some(_), Some(_)) | (None, None) => {
            return Err(CcError::Config(
                "give exactly one of `angles` or `ambient`; mixed or missing forms are rejected".into(),
            ))
        }
        (Some(a), None) => {
            let angles: Vec<AnglePoint> = a.iter().map(|&[t, f]| AnglePoint::new(t, f)).collect();
            let q = angles
                .iter()
                .enumerate()
                .map(|(i, p)| {
                    crate::manifold::angles_to_point(p, sigma)
                        .map_err(|e| CcError::Config(format!("particle {i}: {e}")))
                })
                .collect::<Result<Vec<_>>>()?;
            (q, Some(angles))
        }
        (None, Some(v)) => {
            let q: Vec<AmbientPoint> = v.into_iter().map(AmbientPoint).collect();
            for (i, p) in q.iter().enumerate() {
                p.check_on_manifold(sigma, crate::tol::EPS_MFLD)
                    .map_err(|e| CcError::Config(format!("particle {i}: {e}")))?;
            }
            (q, None)
        }
    };
    if ambient.len() != masses.len() {
        return Err(CcError::Config(format!(
            "{} positions for {} masses",
            ambient.len(),
            masses.len()
        )));
    }
    Ok(Configuration {
        sigma,
        masses,
        ambient,
        angles,
    })
}

/// Writes the angle form when available, the ambient form otherwise.
pub fn save_configuration_file(conf: &Configuration, path: &Path) -> Result<()> {
    let file = ConfigurationFile {
        sigma: conf.sigma,
        masses: conf.masses.as_slice().to_vec(),
        angles: conf
            .angles
            .as_ref()
            .map(|a| a.iter().map(|p| [p.theta, p.phi]).collect()),
        ambient: if conf.angles.is_some() {
            None
        } else {
            Some(conf.ambient.iter().map(|p| p.0).collect())
        },
    };
    let text = toml::to_string(&file).map_err(|e| CcError::Io(std::io::Error::other(e)))?;
    std::fs::write(path, text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const GEODESIC: &str = r#"
command = "solve-geodesic"
seed = 3

[[case]]
sigma = -1
masses = [1.0, 1.0, 1.0]
c = 1.0
"#;

    #[test]
    fn command_names_round_trip() {
        for c in Command::ALL {
            assert_eq!(c.name().parse::<Command>().unwrap(), c);
        }
        assert!("solve".parse::<Command>().is_err());
    }

    #[test]
    fn geodesic_run_passes() {
        let cfg = ExperimentConfig::from_toml(GEODESIC).unwrap();
        let out = run(&cfg, &RunOptions::default()).unwrap();
        assert!(out.envelope.passed, "{:?}", out.envelope.failed().collect::<Vec<_>>());
        assert_eq!(out.envelope.cases[0].result["classes"], 3);
        assert_eq!(out.tables["geodesic_classes"].rows.len(), 3);
    }

    #[test]
    fn unknown_fields_rejected() {
        let bad = GEODESIC.replace("seed = 3", "seed = 3\nsede = 4");
        assert!(matches!(ExperimentConfig::from_toml(&bad), Err(CcError::Config(_))));
        let bad = GEODESIC.replace("c = 1.0", "");
        assert!(matches!(ExperimentConfig::from_toml(&bad), Err(CcError::Config(_))));
        let bad = format!("{GEODESIC}\n[tolerances]\ncc = 1.0\n");
        assert!(matches!(ExperimentConfig::from_toml(&bad), Err(CcError::Config(_))));
    }

    #[test]
    fn random_cases_deterministic() {
        let text = r#"
command = "solve-geodesic"
[[random_cases]]
sigma = 1
n = [3, 4]
count = 2
mass_range = [0.5, 2.0]
c = [0.4, 0.2]
c_relative_to = "min_mass"
"#;
        let cfg = ExperimentConfig::from_toml(text).unwrap();
        let a = cfg.expand_cases(9).unwrap();
        assert_eq!(a.len(), 8);
        assert_eq!(a, cfg.expand_cases(9).unwrap());
        assert_ne!(a[0].masses, cfg.expand_cases(10).unwrap()[0].masses);
        assert!((a[0].c.unwrap() - 0.4 * a[0].masses.min()).abs() < 1e-15);
    }

    #[test]
    fn configuration_forms() {
        let angle = "sigma = -1\nmasses = [1.0, 2.0]\nangles = [[0.1, 0.0], [-0.3, 0.2]]\n";
        let c = parse_configuration(angle).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.toml");
        save_configuration_file(&c, &p).unwrap();
        assert_eq!(load_configuration_file(&p).unwrap(), c);

        let off = "sigma = 1\nmasses = [1.0, 1.0]\nambient = [[1.0, 0.0, 0.0, 0.001], [0.0, 1.0, 0.0, 0.0]]\n";
        let e = parse_configuration(off).unwrap_err().to_string();
        assert!(e.contains("particle 0"), "{e}");
        let mixed = "sigma = 1\nmasses = [1.0, 1.0]\nambient = [[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0]]\nangles = [[0.0, 0.0], [1.0, 0.0]]\n";
        assert!(parse_configuration(mixed)
            .unwrap_err()
            .to_string()
            .contains("exactly one"));
    }

    #[test]
    fn palmore_bound_values() {
        assert_eq!(palmore_lower_bound(3), 5);
        assert_eq!(palmore_lower_bound(4), 24);
    }
}
