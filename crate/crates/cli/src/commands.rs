use std::fmt;
use std::str::FromStr;

use clap::{Args, ValueEnum};
use mbl_core::constants::{self as k, EnsembleSpec, Exponent};
use mbl_core::delta_opt::{optimize_delta_n, OptimizerConfig};
use mbl_core::experiments::{intersection_experiment, log_volume_ball, wlln_experiment};
use mbl_core::sampler::{sample_unit_ball_eigen, ChainConfig};
use mbl_core::stats::linear_grid;
use mbl_core::ullman::{self, FreeEntropyMethod, UllmanDist};
use mbl_core::vandermonde::{fekete_points, gauss_lobatto_nodes, gl_vandermonde_log_closed_form, k_diameter, log_vandermonde};
use serde::{Serialize, Serializer};
use serde_json::{json, Value};

use crate::artifact::Table;
use crate::{Failure, FileConfig};

pub struct Context {
    pub seed: u64,
    pub file: FileConfig,
}

pub struct Outcome {
    pub command: &'static str,
    pub params: Value,
    pub table: Table,
    pub summary: String,
    /// Also write the JSON artifact next to a CSV file.
    pub sidecar: bool,
}

type CmdResult = Result<Outcome, Failure>;

fn usage(msg: impl fmt::Display) -> Failure {
    Failure::Usage(anyhow::anyhow!("{msg}"))
}

fn outcome(command: &'static str, args: &impl Serialize, table: Table, summary: String) -> CmdResult {
    let params = serde_json::to_value(args).map_err(|e| Failure::Runtime(e.into()))?;
    Ok(Outcome { command, params, table, summary, sidecar: false })
}

fn display<T: fmt::Display, S: Serializer>(v: &T, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(v)
}

fn display_opt<T: fmt::Display, S: Serializer>(v: &Option<T>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(v) => s.collect_str(v),
        None => s.serialize_none(),
    }
}

fn finite_exponent(p: Exponent, what: &str) -> Result<f64, Failure> {
    p.as_finite().ok_or_else(|| usage(format!("{what} = inf is not supported here")))
}

/// Metadata strings that parse as numbers are stored as numbers.
fn meta_value(s: &str) -> Value {
    if let Ok(i) = s.parse::<i64>() {
        return json!(i);
    }
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() => json!(v),
        _ => json!(s),
    }
}

/// Inclusive linear grid written `lo:hi:count`.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl Grid {
    pub fn points(&self) -> Vec<f64> {
        linear_grid(self.lo, self.hi, self.count)
    }
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [lo, hi, count] = parts[..] else {
            return Err(format!("expected lo:hi:count, got {s:?}"));
        };
        let lo: f64 = lo.parse().map_err(|_| format!("bad lower end {lo:?}"))?;
        let hi: f64 = hi.parse().map_err(|_| format!("bad upper end {hi:?}"))?;
        let count: usize = count.parse().map_err(|_| format!("bad count {count:?}"))?;
        if !(lo.is_finite() && hi.is_finite()) || hi < lo || count == 0 {
            return Err(format!("need finite lo <= hi and count >= 1, got {s:?}"));
        }
        Ok(Self { lo, hi, count })
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.lo, self.hi, self.count)
    }
}

#[derive(Args, Debug, Serialize)]
pub struct ChainArgs {
    /// Discarded sweeps per chain (default 1000).
    #[arg(long)]
    pub burn_in: Option<usize>,
    /// Sweeps between recorded states (default n).
    #[arg(long)]
    pub thinning: Option<usize>,
    /// Independent Metropolis chains (default 4).
    #[arg(long)]
    pub chains: Option<usize>,
    /// Initial proposal scale relative to the support radius (default 0.1).
    #[arg(long)]
    pub proposal_scale: Option<f64>,
}

impl ChainArgs {
    fn resolve(&self, ctx: &Context) -> ChainConfig {
        let mut c = ctx.file.chain;
        c.seed = ctx.seed;
        if let Some(v) = self.burn_in {
            c.burn_in = v;
        }
        if self.thinning.is_some() {
            c.thinning = self.thinning;
        }
        if let Some(v) = self.chains {
            c.chains = v;
        }
        if let Some(v) = self.proposal_scale {
            c.proposal_scale = v;
        }
        c
    }
}

#[derive(Args, Debug, Serialize)]
pub struct ConstantsArgs {
    /// Exponent p in (0, ∞]; `inf` is accepted.
    #[arg(long)]
    #[serde(serialize_with = "display")]
    pub p: Exponent,
    #[arg(long)]
    #[serde(serialize_with = "display_opt")]
    pub q: Option<Exponent>,
    #[arg(long, default_value_t = 2.0)]
    pub beta: f64,
    /// Matrix size for c_{n,β} and the asymptotic radius.
    #[arg(long)]
    pub n: Option<usize>,
}

fn named_row(t: &mut Table, name: &str, value: Result<f64, mbl_core::Error>) {
    let (v, note) = match value {
        Ok(v) => (json!(v), String::new()),
        Err(e) => (Value::Null, e.to_string()),
    };
    t.push(vec![json!(name), v, json!(note)]);
}

pub fn constants(a: &ConstantsArgs, _ctx: &Context) -> CmdResult {
    k::a_p_beta(a.p, a.beta)?;
    let mut t = Table::new(&["name", "value", "note"]);
    named_row(&mut t, "delta_p", Ok(k::delta_p_closed_form(a.p)));
    if let Some(p) = a.p.as_finite() {
        named_row(&mut t, "lambda_p", Ok(ullman::lambda_p(p)));
        named_row(&mut t, "b_p", k::b_p(p));
    }
    named_row(&mut t, "a_p_beta", k::a_p_beta(a.p, a.beta));
    if let Some(q) = a.q {
        named_row(&mut t, "a_pq", Ok(k::a_pq(a.p, q)));
        if let (Some(p), Some(qf)) = (a.p.as_finite(), q.as_finite()) {
            named_row(&mut t, "c_pq", k::c_pq(p, qf));
            match k::intersection_threshold(p, qf) {
                Err(mbl_core::Error::DegenerateExponents { fallback, .. }) => {
                    eprintln!("warning: p = q lies outside the intersection theorem; reporting the formal value 1");
                    t.push(vec![json!("threshold"), json!(fallback), json!("p = q is excluded; formal value")]);
                }
                other => named_row(&mut t, "threshold", other),
            }
        }
        named_row(&mut t, "a_pq_classical", k::a_pq_classical(a.p, q));
    }
    if let Some(n) = a.n {
        let spec = EnsembleSpec::new(n, a.beta, a.p)?;
        let s = k::asymptotic_volume_radius(&spec)?;
        named_row(&mut t, "log_c_n_beta", k::log_c_n_beta(n, a.beta));
        t.push(vec![json!("asymptotic_radius"), json!(s.value), json!(s.label)]);
        t.push(vec![json!("asymptotic_radius_beta_root"), json!(s.beta_root_value), json!(s.label)]);
    }
    let summary = format!("constants: {} values for p = {}", t.rows.len(), a.p);
    outcome("constants", a, t, summary)
}

#[derive(Args, Debug, Serialize)]
pub struct DeltaArgs {
    #[arg(long)]
    pub p: f64,
    #[arg(long, default_value_t = 12)]
    pub n_max: usize,
    #[arg(long, default_value_t = 2)]
    pub n_min: usize,
    /// Gradient tolerance (overrides the config file).
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Random restarts used when p < 1.
    #[arg(long)]
    pub restarts: Option<usize>,
}

impl DeltaArgs {
    fn resolve(&self, ctx: &Context) -> OptimizerConfig {
        let mut c = ctx.file.optimizer;
        c.seed = ctx.seed;
        c.record_trace = false;
        if let Some(v) = self.tol {
            c.tol = v;
        }
        if let Some(v) = self.max_iter {
            c.max_iter = v;
        }
        if let Some(v) = self.restarts {
            c.restarts = v;
        }
        c
    }
}

pub fn delta(a: &DeltaArgs, ctx: &Context) -> CmdResult {
    if a.n_min < 2 || a.n_max < a.n_min {
        return Err(usage(format!("need 2 <= n-min <= n-max, got {}..{}", a.n_min, a.n_max)));
    }
    let cfg = a.resolve(ctx);
    let mut t = Table::new(&["n", "delta_n", "log_delta_n", "max_lagrange_residual", "gradient_norm", "iterations", "status"]);
    let mut stalled = 0;
    for n in a.n_min..=a.n_max {
        let r = optimize_delta_n(a.p, n, &cfg)?;
        if !r.converged {
            stalled += 1;
        }
        let status = if r.converged { "converged" } else { "not_converged" };
        t.push(vec![
            json!(n),
            json!(r.delta_n),
            json!(r.log_delta_n),
            json!(r.max_lagrange_residual),
            json!(r.gradient_norm),
            json!(r.iterations),
            json!(status),
        ]);
    }
    let limit = k::log_delta_p(Exponent::Finite(a.p));
    t.push(vec![json!("inf"), json!(limit.exp()), json!(limit), Value::Null, Value::Null, Value::Null, json!("closed_form")]);
    if stalled > 0 {
        eprintln!("warning: {stalled} optimizer runs did not reach the tolerance");
    }
    t.meta("optimizer", serde_json::to_value(cfg).map_err(|e| Failure::Runtime(e.into()))?);
    let summary = format!("delta: n = {}..{} for p = {}, limit {:.6}", a.n_min, a.n_max, a.p, limit.exp());
    outcome("delta", a, t, summary)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EntropyMethod {
    Plain,
    Qmc,
}

#[derive(Args, Debug, Serialize)]
pub struct UllmanArgs {
    #[arg(long)]
    pub p: f64,
    /// Support half-width.
    #[arg(long, default_value_t = 1.0)]
    pub b: f64,
    /// Evaluation points `lo:hi:count`.
    #[arg(long, default_value = "-1:1:21", allow_hyphen_values = true)]
    #[serde(serialize_with = "display")]
    pub grid: Grid,
    /// Compare the logarithmic potential with its closed form (needs b = 1).
    #[arg(long)]
    pub check_potential: bool,
    /// Pairs for a Monte Carlo check of the free entropy.
    #[arg(long)]
    pub pairs: Option<usize>,
    #[arg(long, value_enum, default_value = "plain")]
    pub method: EntropyMethod,
}

pub fn ullman(a: &UllmanArgs, ctx: &Context) -> CmdResult {
    let dist = UllmanDist::new(a.p, a.b)?;
    let mut cols = vec!["x", "pdf", "cdf"];
    if a.check_potential {
        if a.b != 1.0 {
            return Err(usage("--check-potential needs b = 1"));
        }
        cols.extend(["potential", "identity_rhs", "abs_error"]);
    }
    let mut t = Table::new(&cols);
    let mut worst: f64 = 0.0;
    for x in a.grid.points() {
        let mut row = vec![json!(x), json!(dist.pdf(x)?), json!(dist.cdf(x)?)];
        if a.check_potential {
            let r = ullman::log_potential(a.p, x)?;
            worst = worst.max(r.abs_error);
            row.extend([json!(r.potential_value), json!(r.identity_rhs), json!(r.abs_error)]);
        }
        t.push(row);
    }
    t.meta("lambda_p", ullman::lambda_p(a.p));
    t.meta("free_entropy", ullman::free_entropy(a.p));
    let mut summary = format!("ullman: {} points for p = {}", t.rows.len(), a.p);
    if a.check_potential {
        t.meta("max_potential_error", worst);
        summary.push_str(&format!(", max potential error {worst:.2e}"));
    }
    if let Some(pairs) = a.pairs {
        let method = match a.method {
            EntropyMethod::Plain => FreeEntropyMethod::PlainPairs,
            EntropyMethod::Qmc => FreeEntropyMethod::ConditionedQmc,
        };
        let est = ullman::free_entropy_mc(a.p, pairs, ctx.seed, method)?;
        let gap = (est.value - ullman::free_entropy(a.p)).abs();
        t.meta("free_entropy_mc", est.value);
        t.meta("free_entropy_mc_stderr", est.stderr);
        t.meta("free_entropy_mc_discrepancy", gap);
        summary.push_str(&format!(", free entropy discrepancy {gap:.2e}"));
    }
    outcome("ullman", a, t, summary)
}

#[derive(Args, Debug, Serialize)]
pub struct VandermondeArgs {
    #[arg(long, default_value_t = 50)]
    pub n_max: usize,
    /// Fail unless every Gauss–Lobatto identity gap is below 1e-9.
    #[arg(long)]
    pub check_gl: bool,
}

const GL_GAP_LIMIT: f64 = 1e-9;

pub fn vandermonde(a: &VandermondeArgs, _ctx: &Context) -> CmdResult {
    if a.n_max < 2 {
        return Err(usage("need n-max >= 2"));
    }
    let mut t = Table::new(&["n", "gl_log_vandermonde", "gl_closed_form", "gl_identity_gap", "fekete_log_vandermonde", "k_diameter"]);
    let mut worst: f64 = 0.0;
    for n in 2..=a.n_max {
        let gl = log_vandermonde(&gauss_lobatto_nodes(n)?.points)?;
        let closed = gl_vandermonde_log_closed_form(n);
        let gap = (gl - closed).abs();
        worst = worst.max(gap);
        let fek = log_vandermonde(&fekete_points(n)?.points)?;
        t.push(vec![json!(n), json!(gl), json!(closed), json!(gap), json!(fek), json!(k_diameter(n)?)]);
    }
    t.meta("max_identity_gap", worst);
    if a.check_gl && worst >= GL_GAP_LIMIT {
        return Err(Failure::Runtime(anyhow::anyhow!("Gauss–Lobatto identity gap {worst:e} exceeds {GL_GAP_LIMIT:e}")));
    }
    let summary = format!("vandermonde: n = 2..{}, max identity gap {worst:.2e}", a.n_max);
    outcome("vandermonde", a, t, summary)
}

#[derive(Args, Debug, Serialize)]
pub struct SampleArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 2.0)]
    pub beta: f64,
    #[arg(long)]
    #[serde(serialize_with = "display")]
    pub p: Exponent,
    #[arg(long, default_value_t = 1000)]
    pub count: usize,
    #[command(flatten)]
    pub chain: ChainArgs,
}

pub fn sample(a: &SampleArgs, ctx: &Context) -> CmdResult {
    finite_exponent(a.p, "p")?;
    let spec = EnsembleSpec::new(a.n, a.beta, a.p)?;
    let set = sample_unit_ball_eigen(&spec, a.count, &a.chain.resolve(ctx))?;
    let mut cols = vec!["index".to_string()];
    cols.extend((1..=a.n).map(|i| format!("lambda_{i}")));
    let mut t = Table { columns: cols, ..Table::default() };
    for (i, s) in set.samples.iter().enumerate() {
        let mut row = vec![json!(i)];
        row.extend(s.values.iter().map(|v| json!(v)));
        t.push(row);
    }
    for (key, v) in &set.metadata {
        t.meta(key, meta_value(v));
    }
    t.meta("effective_samples", set.effective_samples);
    let summary = format!("sample: {} eigenvalue vectors of size {} ({})", set.len(), a.n, set.metadata["base_source"]);
    let mut out = outcome("sample", a, t, summary)?;
    out.sidecar = true;
    Ok(out)
}

#[derive(Args, Debug, Serialize)]
pub struct WllnArgs {
    #[arg(long)]
    pub p: f64,
    #[arg(long)]
    pub q: f64,
    #[arg(long, default_value_t = 2.0)]
    pub beta: f64,
    /// Matrix sizes, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub n: Vec<usize>,
    #[arg(long, default_value_t = 500)]
    pub reps: usize,
    #[command(flatten)]
    pub chain: ChainArgs,
}

pub fn wlln(a: &WllnArgs, ctx: &Context) -> CmdResult {
    let chain = a.chain.resolve(ctx);
    let mut t = Table::new(&["n", "mean", "stderr", "c_pq", "abs_deviation", "sample_std", "effective_samples", "base_source"]);
    for &n in &a.n {
        let spec = EnsembleSpec::new(n, a.beta, Exponent::Finite(a.p))?;
        let est = wlln_experiment(&spec, a.q, a.reps, &chain)?;
        let m = |key: &str| meta_value(&est.metadata[key]);
        t.push(vec![
            json!(n),
            json!(est.value),
            json!(est.stderr),
            m("c_pq"),
            m("abs_deviation"),
            m("sample_std"),
            m("effective_samples"),
            m("base_source"),
        ]);
    }
    let last = t.rows.last().map(|r| r[4].clone()).unwrap_or(Value::Null);
    let summary = format!("wlln: {} sizes, final deviation {last}", a.n.len());
    outcome("wlln", a, t, summary)
}

#[derive(Args, Debug, Serialize)]
pub struct IntersectArgs {
    #[arg(long)]
    pub p: f64,
    #[arg(long)]
    pub q: f64,
    #[arg(long, default_value_t = 2.0)]
    pub beta: f64,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 500)]
    pub reps: usize,
    /// Dilations `lo:hi:count`.
    #[arg(long)]
    #[serde(serialize_with = "display")]
    pub t_grid: Grid,
    #[command(flatten)]
    pub chain: ChainArgs,
}

pub fn intersect(a: &IntersectArgs, ctx: &Context) -> CmdResult {
    let grid = a.t_grid.points();
    let pts = intersection_experiment(a.p, a.q, a.beta, a.n, &grid, a.reps, &a.chain.resolve(ctx))?;
    let threshold = k::intersection_threshold(a.p, a.q)?;
    let mut t = Table::new(&["t", "t_over_threshold", "fraction", "stderr"]);
    for pt in &pts {
        t.push(vec![json!(pt.t), json!(pt.t / threshold), json!(pt.estimate.value), json!(pt.estimate.stderr)]);
    }
    t.meta("threshold", threshold);
    t.meta("a_pq", k::a_pq(Exponent::Finite(a.p), Exponent::Finite(a.q)));
    t.meta("c_pq", k::c_pq(a.p, a.q)?);
    let summary = format!("intersect: {} dilations, threshold {threshold:.6}", pts.len());
    outcome("intersect", a, t, summary)
}

#[derive(Args, Debug, Serialize)]
pub struct VolumeArgs {
    /// Matrix sizes, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub n: Vec<usize>,
    #[arg(long, default_value_t = 2.0)]
    pub beta: f64,
    #[arg(long)]
    #[serde(serialize_with = "display")]
    pub p: Exponent,
    /// Uniform points of the classical ball per size.
    #[arg(long, default_value_t = 1_000_000)]
    pub samples: usize,
}

pub fn volume(a: &VolumeArgs, ctx: &Context) -> CmdResult {
    let mut t = Table::new(&[
        "n",
        "log_volume",
        "stderr",
        "log_i",
        "log_c_n_beta",
        "radius_2_over_n2",
        "surrogate_radius",
        "surrogate_over_radius",
    ]);
    for &n in &a.n {
        let spec = EnsembleSpec::new(n, a.beta, a.p)?;
        let est = log_volume_ball(&spec, a.samples, ctx.seed)?;
        let m = |key: &str| meta_value(&est.metadata[key]);
        t.push(vec![
            json!(n),
            json!(est.value),
            json!(est.stderr),
            m("log_i"),
            m("log_c_n_beta"),
            m("radius_2_over_n2"),
            m("surrogate_radius"),
            m("surrogate_over_radius"),
        ]);
    }
    t.meta("surrogate_label", k::SURROGATE_LABEL);
    let summary = format!("volume: {} sizes for p = {}, beta = {}", a.n.len(), a.p, a.beta);
    outcome("volume", a, t, summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parsing() {
        let g: Grid = "0.8:1.2:9".parse().unwrap();
        assert_eq!(g.points().len(), 9);
        assert_eq!(g.points()[8], 1.2);
        assert_eq!(g.to_string(), "0.8:1.2:9");
        assert!("1:0:3".parse::<Grid>().is_err());
        assert!("0:1".parse::<Grid>().is_err());
        assert!("0:1:0".parse::<Grid>().is_err());
    }

    #[test]
    fn numeric_metadata() {
        assert_eq!(meta_value("1.5"), json!(1.5));
        assert_eq!(meta_value("1000"), json!(1000));
        assert_eq!(meta_value("mcmc"), json!("mcmc"));
    }
}
