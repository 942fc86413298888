//! Command-line front-end: argument parsing, dispatch and the output envelope.
//!
//! Data goes to the output stream, diagnostics to stderr. Exit codes: 0 on
//! success, 2 for invalid input, 3 for numerical failure.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::exact::{self, fmt_sig, Pmf};
use crate::identities;
use crate::limits::{self, LimitLaw};
use crate::lpsm::{self, Moment};
use crate::model::{derive, LpsmParams, ModelParams, ParamSet};
use crate::oracle;
use crate::par::{with_threads, Exec};
use crate::sim::{self, SimConfig, SimMode, DEFAULT_HIST_CAP, DEFAULT_MAX_EVENTS};
use crate::tail::{self, TailExpansion};

/// Missing-mass target when neither --nmax nor --eps is given.
pub const DEFAULT_EPS: f64 = 1e-8;

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "FLUCTUATE_THREADS";

#[derive(Parser, Debug)]
#[command(
    name = "fluctuate",
    version,
    about = "Mutant-count distributions for fluctuation analysis"
)]
pub struct Cli {
    /// Significant digits for floating-point output.
    #[arg(long, global = true, default_value_t = 17, value_parser = clap::value_parser!(u8).range(1..=17))]
    pub digits: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Probability mass function.
    Pmf(PmfArgs),
    /// Mean and variance.
    Moments(MomentsArgs),
    /// Probability of no mutants, and the θ giving a target value.
    P0(P0Args),
    /// Most probable mutant number of the limit law.
    Mode(ModeArgs),
    /// θ at which zero and one mutant are equally likely.
    Boundary(BoundaryArgs),
    /// Large-n expansion of p_n.
    Tail(TailArgs),
    /// Limit law with scaling constants and Laplace exponent.
    Limit(LimitArgs),
    /// Monte Carlo ensemble.
    Simulate(SimArgs),
    /// Monte Carlo ensemble against a computed pmf.
    Compare(CompareArgs),
    /// Identity and oracle checks.
    Selftest(SelftestArgs),
}

/// Either raw rates (--alpha --beta --nu --delta --N [--N0]) or limit parameters (--gamma --theta --q).
#[derive(Args, Debug, Clone, Default, Serialize)]
pub struct ParamArgs {
    /// Mutant birth rate α.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Mutant death rate β.
    #[arg(long)]
    pub beta: Option<f64>,
    /// Mutation rate ν.
    #[arg(long)]
    pub nu: Option<f64>,
    /// Wild-type growth rate δ.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Final population size.
    #[arg(long = "N")]
    #[serde(rename = "N")]
    pub n: Option<f64>,
    /// Initial population size.
    #[arg(long = "N0")]
    #[serde(rename = "N0")]
    pub n0: Option<f64>,
    /// Growth-rate ratio γ.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Mutation intensity θ.
    #[arg(long)]
    pub theta: Option<f64>,
    /// Clone extinction probability q.
    #[arg(long)]
    pub q: Option<f64>,
}

fn missing(pairs: &[(&str, Option<f64>)]) -> Vec<String> {
    pairs
        .iter()
        .filter(|(_, v)| v.is_none())
        .map(|(k, _)| format!("missing --{k}"))
        .collect()
}

impl ParamArgs {
    fn model_flags(&self) -> [(&'static str, Option<f64>); 6] {
        [
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("nu", self.nu),
            ("delta", self.delta),
            ("N", self.n),
            ("N0", self.n0),
        ]
    }

    fn lpsm_flags(&self) -> [(&'static str, Option<f64>); 3] {
        [("gamma", self.gamma), ("theta", self.theta), ("q", self.q)]
    }

    fn any_model(&self) -> bool {
        self.model_flags().iter().any(|(_, v)| v.is_some())
    }

    fn any_lpsm(&self) -> bool {
        self.lpsm_flags().iter().any(|(_, v)| v.is_some())
    }

    /// The parameter set named by the flags; mixing both kinds is an error.
    pub fn resolve(&self) -> Result<ParamSet> {
        match (self.any_model(), self.any_lpsm()) {
            (true, true) => Err(Error::validation(
                "mixed parameter sets: give either --alpha/--beta/--nu/--delta/--N[/--N0] or --gamma/--theta/--q",
            )),
            (true, false) => {
                let m = missing(&self.model_flags()[..5]);
                if !m.is_empty() {
                    return Err(Error::Validation(m));
                }
                let p = ModelParams::new(
                    self.alpha.unwrap_or_default(),
                    self.beta.unwrap_or_default(),
                    self.nu.unwrap_or_default(),
                    self.delta.unwrap_or_default(),
                    self.n.unwrap_or_default(),
                )
                .with_n0(self.n0.unwrap_or(1.0));
                p.validate()?;
                Ok(p.into())
            }
            (false, true) => {
                let m = missing(&self.lpsm_flags());
                if !m.is_empty() {
                    return Err(Error::Validation(m));
                }
                let p = LpsmParams::new(
                    self.gamma.unwrap_or_default(),
                    self.theta.unwrap_or_default(),
                    self.q.unwrap_or_default(),
                );
                p.validate()?;
                Ok(p.into())
            }
            (false, false) => Err(Error::validation("no parameters given")),
        }
    }

    fn model(&self) -> Result<ModelParams> {
        match self.resolve()? {
            ParamSet::Model(p) => Ok(p),
            ParamSet::Lpsm(_) => Err(Error::validation("this command needs --alpha/--beta/--nu/--delta/--N")),
        }
    }

    fn lpsm(&self) -> Result<LpsmParams> {
        match self.resolve()? {
            ParamSet::Lpsm(p) => Ok(p),
            ParamSet::Model(_) => Err(Error::validation("this command needs --gamma/--theta/--q")),
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RegimeArg {
    Exact,
    Neutral,
    Lpsm,
}

#[derive(ValueEnum, Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Args, Debug, Serialize)]
pub struct PmfArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub params: ParamArgs,
    #[arg(long, value_enum)]
    pub regime: Option<RegimeArg>,
    /// Largest mutant number; if omitted, nmax grows until the missing mass is below --eps.
    #[arg(long)]
    pub nmax: Option<usize>,
    /// Missing-mass target for adaptive truncation [default: 1e-8].
    #[arg(long, conflicts_with = "nmax")]
    pub eps: Option<f64>,
    /// Largest nmax tried when growing adaptively.
    #[arg(long, default_value_t = 1 << 14)]
    pub cap: usize,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct MomentsArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub params: ParamArgs,
    #[arg(long, value_enum)]
    pub regime: Option<RegimeArg>,
}

#[derive(Args, Debug, Serialize)]
pub struct P0Args {
    #[command(flatten)]
    #[serde(flatten)]
    pub params: ParamArgs,
    /// Also report the θ at which P(V = 0) equals this value (needs --gamma and --q).
    #[arg(long)]
    pub target_p0: Option<f64>,
}

#[derive(Args, Debug, Serialize)]
pub struct ModeArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub params: ParamArgs,
    /// Largest mutant number scanned.
    #[arg(long, default_value_t = 1_000_000)]
    pub cap: usize,
}

#[derive(Args, Debug, Serialize)]
pub struct BoundaryArgs {
    #[arg(long)]
    pub gamma: f64,
    #[arg(long)]
    pub q: f64,
}

#[derive(Args, Debug, Serialize)]
pub struct TailArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub params: ParamArgs,
    /// Tabulate the computed pmf next to the expansion.
    #[arg(long)]
    pub compare_pmf: bool,
    /// Mutant numbers at which to evaluate.
    #[arg(long = "n", value_delimiter = ',', default_values_t = vec![10usize, 100, 1000])]
    pub ns: Vec<usize>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyArg {
    LargeTheta,
    LargeN,
}

#[derive(Args, Debug, Serialize)]
pub struct LimitArgs {
    #[arg(long, value_enum)]
    pub family: FamilyArg,
    #[command(flatten)]
    #[serde(flatten)]
    pub params: ParamArgs,
    /// Laplace variables at which to tabulate the exponent.
    #[arg(long, value_delimiter = ',')]
    pub s_grid: Vec<f64>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeArg {
    Semi,
    Full,
}

#[derive(Args, Debug, Serialize)]
pub struct SimArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub params: ParamArgs,
    /// JSON simulation config (replaces the parameter and sampler flags).
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ModeArg::Semi)]
    pub mode: ModeArg,
    #[arg(long, default_value_t = 10_000)]
    pub trajectories: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_HIST_CAP)]
    pub hist_cap: u64,
    #[arg(long, default_value_t = DEFAULT_MAX_EVENTS)]
    pub max_events: u64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

impl SimArgs {
    fn config(&self) -> Result<SimConfig> {
        if let Some(path) = &self.config {
            if self.params.any_model() || self.params.any_lpsm() {
                return Err(Error::validation("--config cannot be combined with parameter flags"));
            }
            let cfg: SimConfig = serde_json::from_str(&std::fs::read_to_string(path)?)?;
            cfg.validate()?;
            return Ok(cfg);
        }
        let mode = match self.mode {
            ModeArg::Semi => SimMode::SemiDeterministic,
            ModeArg::Full => SimMode::FullyStochastic,
        };
        let cfg = SimConfig {
            params: self.params.model()?,
            trajectories: self.trajectories,
            seed: self.seed,
            mode,
            max_events: self.max_events,
            hist_cap: self.hist_cap,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ReferenceArg {
    Exact,
    Lpsm,
}

#[derive(Args, Debug, Serialize)]
pub struct CompareArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub sim: SimArgs,
    /// Reference pmf: the finite-N law or its limit with θ = Nμ.
    #[arg(long, value_enum, default_value_t = ReferenceArg::Exact)]
    pub reference: ReferenceArg,
    /// Length of the reference pmf.
    #[arg(long, default_value_t = 5000)]
    pub nmax: usize,
}

#[derive(Args, Debug, Serialize)]
pub struct SelftestArgs {
    /// Random cases per identity family.
    #[arg(long, default_value_t = 1000)]
    pub cases: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

/// Everything needed to reproduce a run.
#[derive(Serialize)]
struct Envelope<'a> {
    command: &'a str,
    parameters: Value,
    result: Value,
    version: &'a str,
    wall_time_s: f64,
}

/// Rounds every float in `v` to `digits` significant digits.
fn round_floats(v: &mut Value, digits: usize) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(x) = n.as_f64() {
                if let Some(r) = fmt_sig(x, digits)
                    .parse::<f64>()
                    .ok()
                    .and_then(serde_json::Number::from_f64)
                {
                    *n = r;
                }
            }
        }
        Value::Array(a) => a.iter_mut().for_each(|x| round_floats(x, digits)),
        Value::Object(o) => o.values_mut().for_each(|x| round_floats(x, digits)),
        _ => {}
    }
}

/// What a command produced.
enum Output {
    Json(Value),
    Text(String),
}

fn json<T: Serialize>(v: &T) -> Result<Output> {
    Ok(Output::Json(serde_json::to_value(v)?))
}

fn csv_unavailable(cmd: &str) -> Error {
    Error::validation(format!("csv output is not available for {cmd}"))
}

fn threads_from_env() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(s) => s
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .map(Some)
            .ok_or_else(|| Error::validation(format!("{THREADS_ENV} must be a positive integer, got {s:?}"))),
        Err(_) => Ok(None),
    }
}

fn default_regime(p: &ParamSet) -> RegimeArg {
    match p {
        ParamSet::Model(_) => RegimeArg::Exact,
        ParamSet::Lpsm(_) => RegimeArg::Lpsm,
    }
}

fn pmf_builder(params: &ParamArgs, regime: Option<RegimeArg>) -> Result<Box<dyn Fn(usize) -> Result<Pmf>>> {
    let p = params.resolve()?;
    let exec = Exec::default();
    Ok(match (regime.unwrap_or(default_regime(&p)), p) {
        (RegimeArg::Exact, ParamSet::Model(m)) => Box::new(move |n| exact::pmf_exact(&m, n, exec)),
        (RegimeArg::Neutral, ParamSet::Model(m)) => {
            Box::new(move |n| exact::pmf_from_coefficients(&exact::coefficients_neutral(&m, n)?, n))
        }
        (RegimeArg::Lpsm, ParamSet::Lpsm(l)) => Box::new(move |n| lpsm::pmf_v_with(&l, n, exec)),
        (r, _) => {
            return Err(Error::validation(format!(
                "regime {r:?} does not match the parameters given (exact/neutral need rates, lpsm needs gamma/theta/q)"
            )))
        }
    })
}

fn cmd_pmf(a: &PmfArgs, digits: usize) -> Result<Output> {
    let build = pmf_builder(&a.params, a.regime)?;
    let pmf = match (a.nmax, a.eps.unwrap_or(DEFAULT_EPS)) {
        (Some(n), _) => build(n)?,
        (None, eps) if !(eps > 0.0 && eps < 1.0) => return Err(Error::validation("--eps must lie in (0, 1)")),
        (None, eps) => exact::pmf_adaptive(&build, eps, a.cap)?,
    };
    if let exact::Truncation::CapReached { eps, cap } = pmf.truncation {
        eprintln!(
            "note: missing mass {:e} still above {eps:e} at the nmax cap {cap}",
            pmf.truncation_mass
        );
    }
    match a.format {
        Format::Csv => Ok(Output::Text(pmf.to_csv(digits))),
        Format::Json => json(&pmf),
    }
}

#[derive(Serialize)]
struct Moments {
    mean: Moment,
    variance: Moment,
}

fn cmd_moments(a: &MomentsArgs) -> Result<Output> {
    let p = a.params.resolve()?;
    let r = a.regime.unwrap_or(default_regime(&p));
    match (r, p) {
        (RegimeArg::Exact | RegimeArg::Neutral, ParamSet::Model(m)) => json(&Moments {
            mean: Moment::Finite(exact::mean_b(&m)?),
            variance: Moment::Finite(exact::variance_b(&m)?),
        }),
        (RegimeArg::Lpsm, ParamSet::Lpsm(l)) => json(&lpsm::moments_v(&l)?),
        (r, _) => Err(Error::validation(format!(
            "regime {r:?} does not match the parameters given"
        ))),
    }
}

#[derive(Serialize)]
struct P0Report {
    #[serde(skip_serializing_if = "Option::is_none")]
    p0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    p_positive: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    contour_theta: Option<lpsm::ThetaPair>,
}

fn cmd_p0(a: &P0Args) -> Result<Output> {
    let pa = &a.params;
    // A contour query needs only γ and q.
    if let (Some(t), None, false) = (a.target_p0, pa.theta, pa.any_model()) {
        let (g, q) = match (pa.gamma, pa.q) {
            (Some(g), Some(q)) => (g, q),
            _ => return Err(Error::Validation(missing(&[("gamma", pa.gamma), ("q", pa.q)]))),
        };
        let c = lpsm::p0_contour_theta(g, q, t)?;
        return json(&P0Report {
            p0: None,
            p_positive: None,
            contour_theta: Some(c),
        });
    }
    let (p0, p_positive) = match pa.resolve()? {
        ParamSet::Lpsm(l) => {
            let r = lpsm::resistance_p0(&l)?;
            (r.p0, r.p_positive)
        }
        ParamSet::Model(m) => {
            let p0 = exact::pmf_exact(&m, 0, Exec::Sequential)?.probs[0];
            (p0, 1.0 - p0)
        }
    };
    let contour_theta = match (a.target_p0, pa.gamma, pa.q) {
        (Some(t), Some(g), Some(q)) => Some(lpsm::p0_contour_theta(g, q, t)?),
        (Some(_), _, _) => return Err(Error::validation("--target-p0 needs --gamma and --q")),
        _ => None,
    };
    json(&P0Report {
        p0: Some(p0),
        p_positive: Some(p_positive),
        contour_theta,
    })
}

#[derive(Serialize)]
struct TailRow {
    n: usize,
    exact: f64,
    asymptotic: f64,
    leading: f64,
    ratio: f64,
}

#[derive(Serialize)]
struct TailReport {
    expansion: TailExpansion,
    #[serde(skip_serializing_if = "Option::is_none")]
    comparison: Option<Vec<TailRow>>,
}

fn cmd_tail(a: &TailArgs, digits: usize) -> Result<Output> {
    let p = a.params.resolve()?;
    let expansion = match &p {
        ParamSet::Lpsm(l) => tail::tail_lpsm_general(l)?,
        ParamSet::Model(m) => tail::tail_finite_n_gamma1(m)?,
    };
    let comparison = if a.compare_pmf {
        let nmax = a.ns.iter().copied().max().unwrap_or(0);
        let pmf = match &p {
            ParamSet::Lpsm(l) => lpsm::pmf_v(l, nmax)?,
            ParamSet::Model(m) => exact::pmf_exact(m, nmax, Exec::default())?,
        };
        Some(
            a.ns.iter()
                .map(|&n| {
                    let asymptotic = expansion.evaluate(n as f64);
                    TailRow {
                        n,
                        exact: pmf.probs[n],
                        asymptotic,
                        leading: expansion.leading(n as f64),
                        ratio: pmf.probs[n] / asymptotic,
                    }
                })
                .collect::<Vec<_>>(),
        )
    } else {
        None
    };
    match (a.format, comparison) {
        (Format::Csv, Some(rows)) => {
            let mut s = String::from("n,exact,asymptotic,leading,ratio\n");
            for r in rows {
                let f = |x: f64| fmt_sig(x, digits);
                s.push_str(&format!(
                    "{},{},{},{},{}\n",
                    r.n,
                    f(r.exact),
                    f(r.asymptotic),
                    f(r.leading),
                    f(r.ratio)
                ));
            }
            Ok(Output::Text(s))
        }
        (Format::Csv, None) => Err(Error::validation("csv output for tail needs --compare-pmf")),
        (Format::Json, comparison) => json(&TailReport { expansion, comparison }),
    }
}

#[derive(Serialize)]
struct ExponentRow {
    s: f64,
    exponent: f64,
}

#[derive(Serialize)]
struct LimitReport {
    law: LimitLaw,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    table: Vec<ExponentRow>,
}

fn cmd_limit(a: &LimitArgs, digits: usize) -> Result<Output> {
    let law = match a.family {
        FamilyArg::LargeTheta => {
            let l = a.params.lpsm()?;
            limits::large_theta_law(l.gamma, l.q, l.theta)?
        }
        FamilyArg::LargeN => limits::large_n_law(&a.params.model()?)?,
    };
    let table = a
        .s_grid
        .iter()
        .map(|&s| {
            Ok(ExponentRow {
                s,
                exponent: law.exponent(s)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    match a.format {
        Format::Csv => {
            let mut s = String::from("s,exponent\n");
            for r in &table {
                s.push_str(&format!("{},{}\n", fmt_sig(r.s, digits), fmt_sig(r.exponent, digits)));
            }
            Ok(Output::Text(s))
        }
        Format::Json => json(&LimitReport { law, table }),
    }
}

fn cmd_simulate(a: &SimArgs) -> Result<Output> {
    let cfg = a.config()?;
    let summary = sim::simulate(&cfg, Exec::default())?;
    match a.format {
        Format::Csv => Ok(Output::Text(summary.to_csv())),
        Format::Json => json(&summary),
    }
}

#[derive(Serialize)]
struct CompareReport {
    reference: ReferenceArg,
    tv_distance: f64,
    chi_square: sim::ChiSquare,
    summary: sim::EnsembleSummary,
}

fn cmd_compare(a: &CompareArgs) -> Result<Output> {
    if a.sim.format == Format::Csv {
        return Err(csv_unavailable("compare"));
    }
    let cfg = a.sim.config()?;
    let summary = sim::simulate(&cfg, Exec::default())?;
    let reference = match a.reference {
        ReferenceArg::Exact => exact::pmf_exact(&cfg.params, a.nmax, Exec::default())?,
        ReferenceArg::Lpsm => {
            let d = derive(&cfg.params)?;
            lpsm::pmf_v(&LpsmParams::new(d.gamma, d.theta, d.q), a.nmax)?
        }
    };
    let label = match a.reference {
        ReferenceArg::Exact => "exact",
        ReferenceArg::Lpsm => "lpsm",
    };
    let chi_square = sim::chi_square(&summary, &reference)?;
    let summary = summary.with_reference(label, &reference);
    let tv_distance = summary.tv_distance_vs.as_ref().map_or(f64::NAN, |t| t.value);
    json(&CompareReport {
        reference: a.reference,
        tv_distance,
        chi_square,
        summary,
    })
}

/// One named pass/fail check.
#[derive(Clone, Debug, Serialize)]
pub struct SelfCheck {
    pub name: String,
    pub passed: bool,
    pub detail: Value,
}

#[derive(Serialize)]
struct SelftestReport {
    passed: bool,
    checks: Vec<SelfCheck>,
}

fn oracle_checks() -> Result<Vec<SelfCheck>> {
    let mut out = Vec::new();
    let mut push = |name: &str, passed: bool, detail: Value| {
        out.push(SelfCheck {
            name: name.into(),
            passed,
            detail,
        });
    };

    let v = lpsm::pmf_v(&LpsmParams::new(1.0, 1.0, 0.0), 1)?;
    let e = (-1f64).exp();
    let err = (v.probs[0] - e).abs().max((v.probs[1] - e / 2.0).abs());
    push("lea_coulson", err < 1e-12, serde_json::json!({ "max_abs_error": err }));

    let p = ModelParams::from_reduced(1.5, 0.5, 0.01, 100.0);
    let rec = exact::pmf_exact(&p, 50, Exec::default())?;
    let orc = oracle::pmf_oracle_cauchy(&p.into(), 50, oracle::default_grid(50))?;
    let err = rec
        .probs
        .iter()
        .zip(&orc.probs)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    push(
        "recursion_vs_cauchy",
        err < 1e-8,
        serde_json::json!({ "max_abs_error": err }),
    );

    let p = ModelParams::from_reduced(2.0, 0.0, 0.01, 100.0);
    let pmf = exact::pmf_adaptive(|n| exact::pmf_exact(&p, n, Exec::default()), 1e-14, 1 << 16)?;
    let rel = ((pmf.mean() - exact::mean_b(&p)?) / exact::mean_b(&p)?).abs();
    push(
        "moment_closure",
        rel < 1e-4,
        serde_json::json!({ "mean_rel_error": rel }),
    );

    let l = LpsmParams::new(2.5, 3.0, 0.3);
    let r = lpsm::resistance_p0(&l)?;
    let via_pmf = lpsm::pmf_v(&l, 0)?.probs[0];
    let err = (r.p0 - via_pmf).abs();
    push(
        "resistance_probability",
        err < 1e-13,
        serde_json::json!({ "abs_error": err }),
    );
    Ok(out)
}

fn cmd_selftest(a: &SelftestArgs) -> Result<(Output, bool)> {
    let mut checks: Vec<SelfCheck> = identities::hyp2f1_suite(a.cases, a.seed)
        .into_iter()
        .map(|r| SelfCheck {
            name: r.name.clone(),
            passed: r.passed(),
            detail: serde_json::to_value(&r).unwrap_or_default(),
        })
        .collect();
    checks.extend(oracle_checks()?);
    for c in &checks {
        eprintln!("{} {}", if c.passed { "PASS" } else { "FAIL" }, c.name);
    }
    let passed = checks.iter().all(|c| c.passed);
    Ok((json(&SelftestReport { passed, checks })?, passed))
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Pmf(_) => "pmf",
        Command::Moments(_) => "moments",
        Command::P0(_) => "p0",
        Command::Mode(_) => "mode",
        Command::Boundary(_) => "boundary",
        Command::Tail(_) => "tail",
        Command::Limit(_) => "limit",
        Command::Simulate(_) => "simulate",
        Command::Compare(_) => "compare",
        Command::Selftest(_) => "selftest",
    }
}

fn parameters(c: &Command, digits: u8) -> Result<Value> {
    let mut v = match c {
        Command::Pmf(a) => serde_json::to_value(a)?,
        Command::Moments(a) => serde_json::to_value(a)?,
        Command::P0(a) => serde_json::to_value(a)?,
        Command::Mode(a) => serde_json::to_value(a)?,
        Command::Boundary(a) => serde_json::to_value(a)?,
        Command::Tail(a) => serde_json::to_value(a)?,
        Command::Limit(a) => serde_json::to_value(a)?,
        Command::Simulate(a) => serde_json::to_value(a)?,
        Command::Compare(a) => serde_json::to_value(a)?,
        Command::Selftest(a) => serde_json::to_value(a)?,
    };
    if let Value::Object(o) = &mut v {
        o.retain(|_, x| !x.is_null());
        o.insert("digits".into(), digits.into());
    }
    Ok(v)
}

fn out_path(c: &Command) -> Option<&PathBuf> {
    match c {
        Command::Pmf(a) => a.out.as_ref(),
        _ => None,
    }
}

/// Executes a parsed command and writes its output; returns the exit code.
pub fn execute(cli: &Cli, out: &mut dyn Write) -> Result<i32> {
    let start = Instant::now();
    let digits = cli.digits as usize;
    let threads = threads_from_env()?;
    let (output, ok) = with_threads(threads, || -> Result<(Output, bool)> {
        let o = match &cli.command {
            Command::Pmf(a) => cmd_pmf(a, digits)?,
            Command::Moments(a) => cmd_moments(a)?,
            Command::P0(a) => cmd_p0(a)?,
            Command::Mode(a) => json(&lpsm::mode_v(&a.params.lpsm()?, a.cap)?)?,
            Command::Boundary(a) => json(&lpsm::boundary_theta(a.gamma, a.q)?)?,
            Command::Tail(a) => cmd_tail(a, digits)?,
            Command::Limit(a) => cmd_limit(a, digits)?,
            Command::Simulate(a) => cmd_simulate(a)?,
            Command::Compare(a) => cmd_compare(a)?,
            Command::Selftest(a) => return cmd_selftest(a),
        };
        Ok((o, true))
    })?;
    let text = match output {
        Output::Text(s) => s,
        Output::Json(mut result) => {
            if digits < 17 {
                round_floats(&mut result, digits);
            }
            let env = Envelope {
                command: command_name(&cli.command),
                parameters: parameters(&cli.command, cli.digits)?,
                result,
                version: env!("CARGO_PKG_VERSION"),
                wall_time_s: start.elapsed().as_secs_f64(),
            };
            serde_json::to_string_pretty(&env)? + "\n"
        }
    };
    match out_path(&cli.command) {
        Some(path) => std::fs::write(path, text)?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(if ok { 0 } else { 3 })
}

/// Parses `args` (including the program name), runs the command and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli, out) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
