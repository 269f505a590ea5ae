//! Configuration-driven experiment runner: a JSON config selects a model and a
//! suite, the suite expands into named checks, the checks run on a bounded
//! thread pool, and the results are written as `report.json` / `report.csv`.
//!
//! Every check seeds its own generator from the config seed and the check name,
//! so a report depends only on the config (and `--seed`), never on scheduling.

mod suites;

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::aspanier::Manifold;
use crate::error::{Error, Result};
use crate::index::{IndexReport, ModelEcho};
use crate::models::{Model, Space};
use crate::op::C64;

pub const CSV_COLUMNS: [&str; 9] =
    ["suite", "check", "value_re", "value_im", "oracle_re", "oracle_im", "residual", "tolerance", "pass"];

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub manifold: Manifold,
    #[serde(rename = "N")]
    pub n: usize,
    pub pad: usize,
    #[serde(default = "unit_kappa")]
    pub kappa: [i64; 2],
    #[serde(default)]
    pub space: Space,
}

fn unit_kappa() -> [i64; 2] {
    [1, 1]
}

impl ModelSpec {
    pub fn build(&self) -> Result<Model> {
        self.with_size(self.n, self.pad)
    }

    /// Same manifold, space and κ at another truncation.
    pub fn with_size(&self, n: usize, pad: usize) -> Result<Model> {
        Model::new(self.manifold, n, pad, self.space)?.with_kappa(self.kappa[0], self.kappa[1])
    }
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub model: ModelSpec,
    pub suite: String,
    #[serde(default)]
    pub params: serde_json::Map<String, serde_json::Value>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| Error::Invalid(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Invalid(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        Suite::parse(&self.suite)?;
        if let Some((k, v)) = self.tolerances.iter().find(|(_, v)| !(**v > 0.0)) {
            return Err(Error::Invalid(format!("tolerance {k} must be positive, got {v}")));
        }
        if self.model.kappa[1] == 0 {
            return Err(Error::Invalid("kappa denominator is zero".into()));
        }
        Ok(())
    }

    fn tolerance(&self, check: &str, default: f64) -> f64 {
        let family = check.split('/').next().unwrap_or(check);
        self.tolerances.get(check).or_else(|| self.tolerances.get(family)).copied().unwrap_or(default)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Identities,
    Fredholm,
    HeltonHowe,
    Suspension,
    Heat,
    Sweep,
}

impl Suite {
    pub const ALL: [Suite; 6] =
        [Suite::Identities, Suite::Fredholm, Suite::HeltonHowe, Suite::Suspension, Suite::Heat, Suite::Sweep];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Identities => "identities",
            Suite::Fredholm => "fredholm",
            Suite::HeltonHowe => "helton-howe",
            Suite::Suspension => "suspension",
            Suite::Heat => "heat",
            Suite::Sweep => "sweep",
        }
    }

    pub fn parse(s: &str) -> Result<Suite> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::Invalid(format!("unknown suite '{s}' (expected one of {})", suite_names().join(", "))))
    }

    fn info(self) -> SuiteInfo {
        let (params, certifies): (&[&str], &str) = match self {
            Suite::Identities => (
                &["cases", "max_dim", "max_degree"],
                "b² = B² = bB + Bb = 0, (b+B)ch = 0 for idempotents and invertibles, and ch(end) − ch(start) = (b+B)Tch along the lift, exponential and suspension paths",
            ),
            Suite::Fredholm => (&["powers"], "Tr(I − QD) − Tr(I − DQ) = −winding(u) for Toeplitz symbols u = z^k"),
            Suite::HeltonHowe => (
                &["pairs", "bandwidth", "families"],
                "Tr[T_f₀, …, T_f_m] = κ·q!/((2πi)^q (2q)!)·∫ f₀ df₁ ∧ … ∧ df_m at top degree m = 2q − 1, and vanishing above it",
            ),
            Suite::Suspension => (&["cases", "width"], "suspended index of a Dirac-type D equals the Toeplitz index of its positive spectral projection"),
            Suite::Heat => (&["t", "shifts", "limit_t"], "the heat-lift index is independent of t and tends to the kernel-projection limit"),
            Suite::Sweep => (&["N", "cases"], "suspension residual over a grid of truncations, final size within tolerance"),
        };
        SuiteInfo { name: self.name(), params, certifies }
    }
}

pub fn suite_names() -> Vec<&'static str> {
    Suite::ALL.iter().map(|s| s.name()).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteInfo {
    pub name: &'static str,
    pub params: &'static [&'static str],
    pub certifies: &'static str,
}

pub fn suite_catalog() -> Vec<SuiteInfo> {
    Suite::ALL.iter().map(|s| s.info()).collect()
}

/// What a check computed: a value, the independent oracle it is compared with,
/// and the index report when the value came from an index evaluator.
pub(crate) struct Outcome {
    pub value: C64,
    pub oracle: C64,
    pub report: Option<IndexReport>,
}

impl Outcome {
    /// A residual-type check: the value should vanish.
    pub fn residual(r: f64) -> Self {
        Outcome { value: C64::new(r, 0.0), oracle: C64::new(0.0, 0.0), report: None }
    }

    pub fn compare(value: C64, oracle: C64) -> Self {
        Outcome { value, oracle, report: None }
    }

    pub fn from_report(r: IndexReport) -> Result<Self> {
        let oracle = r.oracle.ok_or_else(|| Error::Invalid(format!("{} report without oracle", r.method)))?;
        Ok(Outcome { value: r.value, oracle, report: Some(r) })
    }
}

type Job = Box<dyn Fn() -> Result<Outcome> + Send + Sync>;
type Derive = Box<dyn Fn(&[CheckResult]) -> Vec<CheckResult>>;

pub(crate) struct CheckSpec {
    name: String,
    /// `None` marks an informational row that cannot fail numerically.
    tolerance: Option<f64>,
    job: Job,
}

impl CheckSpec {
    pub fn new(name: impl Into<String>, tolerance: Option<f64>, job: impl Fn() -> Result<Outcome> + Send + Sync + 'static) -> Self {
        CheckSpec { name: name.into(), tolerance, job: Box::new(job) }
    }
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct CheckResult {
    pub suite: String,
    pub check: String,
    pub value: Option<C64>,
    pub oracle: Option<C64>,
    pub residual: Option<f64>,
    pub tolerance: Option<f64>,
    pub pass: bool,
    pub error: Option<String>,
    pub report: Option<IndexReport>,
}

impl CheckResult {
    fn from_outcome(suite: Suite, spec: &CheckSpec, outcome: Result<Outcome>) -> Self {
        let mut r = CheckResult {
            suite: suite.name().to_string(),
            check: spec.name.clone(),
            value: None,
            oracle: None,
            residual: None,
            tolerance: spec.tolerance,
            pass: false,
            error: None,
            report: None,
        };
        match outcome {
            Ok(o) => {
                let residual = (o.value - o.oracle).norm();
                r.pass = residual.is_finite() && spec.tolerance.is_none_or(|t| residual <= t);
                r.value = Some(o.value);
                r.oracle = Some(o.oracle);
                r.residual = Some(residual);
                r.report = o.report;
            }
            Err(e) => r.error = Some(e.to_string()),
        }
        r
    }
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct Report {
    pub name: String,
    pub suite: String,
    pub seed: u64,
    pub model: ModelEcho,
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

impl Report {
    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::Invalid(format!("csv: {e}"));
        w.write_record(CSV_COLUMNS).map_err(io)?;
        let num = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
        for c in &self.checks {
            w.write_record([
                c.suite.clone(),
                c.check.clone(),
                num(c.value.map(|v| v.re)),
                num(c.value.map(|v| v.im)),
                num(c.oracle.map(|v| v.re)),
                num(c.oracle.map(|v| v.im)),
                num(c.residual),
                num(c.tolerance),
                c.pass.to_string(),
            ])
            .map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Invalid(format!("csv: {e}")))?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }

    /// Writes `report.json` and `report.csv` into `dir`, creating it if needed.
    pub fn write(&self, dir: &Path) -> Result<()> {
        let io = |e: std::io::Error| Error::Invalid(format!("cannot write reports to {}: {e}", dir.display()));
        fs::create_dir_all(dir).map_err(io)?;
        fs::write(dir.join("report.json"), self.to_json_string()).map_err(io)?;
        fs::write(dir.join("report.csv"), self.to_csv_string()?).map_err(io)?;
        Ok(())
    }
}

/// Runs the configured suite on `jobs` worker threads (rayon's default when `None`).
/// Errors are configuration errors; numerical failures become failed checks.
pub fn run(config: &ExperimentConfig, jobs: Option<usize>) -> Result<Report> {
    config.validate()?;
    let suite = Suite::parse(&config.suite)?;
    let model = config.model.build()?;
    let plan = suites::plan(suite, config, &model)?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        builder = builder.num_threads(j.max(1));
    }
    let pool = builder.build().map_err(|e| Error::Invalid(format!("thread pool: {e}")))?;
    log::info!("running {} checks of suite {} on {} threads", plan.checks.len(), suite.name(), pool.current_num_threads());
    let mut checks: Vec<CheckResult> = pool.install(|| {
        plan.checks.par_iter().map(|spec| CheckResult::from_outcome(suite, spec, (spec.job)())).collect()
    });
    checks.extend((plan.derive)(&checks));
    checks.sort_by(|a, b| a.check.cmp(&b.check));
    Ok(Report {
        name: config.name.clone(),
        suite: suite.name().to_string(),
        seed: config.seed,
        model: (&model).into(),
        passed: checks.iter().all(|c| c.pass),
        checks,
    })
}

pub(crate) struct Plan {
    checks: Vec<CheckSpec>,
    /// Rows computed from the finished checks (e.g. monotonicity of a sweep).
    derive: Derive,
}

impl Plan {
    fn simple(checks: Vec<CheckSpec>) -> Self {
        Plan { checks, derive: Box::new(|_| Vec::new()) }
    }
}
