//! Run configuration, the end-to-end pipeline and report emission.
//!
//! A [`RunConfig`] is a JSON document. [`run`] builds the graph, kernel,
//! spectrum and potential, simulates what the selected checks need, and
//! returns a [`Report`] whose JSON form is byte-stable for a fixed config
//! and tool version.

use std::collections::BTreeSet;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::check::{NamedCheck, Verdict};
use crate::error::{Error, Result};
use crate::graph::{build_graph, Graph, GraphSpec};
use crate::harmonic::{defect_report, embed, embedded_martingale_check};
use crate::kernel::{srw_kernel, Kernel};
use crate::martingale::{verify_martingale_lemmas, MartingaleParams, MartingaleSpec, YuvalParams};
use crate::potential::{
    escape_lower_bound, finite_bound_curve, folner_indicator, heat_flow_potential, BoundCurve, PotentialResult,
};
use crate::spectral::{closed_form_eigenpair, second_eigenpair, SpectralResult, DEFAULT_MAX_ITER, DEFAULT_TOL};
use crate::walker::{
    sample_trajectories, simulate, verify_against_bounds, verify_mean_escape, verify_walk_inequalities,
    InequalityParams, WalkConfig, WalkSummary,
};
use crate::VERSION;

pub const TOOL: &str = "driftwalk";
/// Tolerance for the exact embedding identities.
const IDENTITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectralMethod {
    /// Character table for abelian families, power iteration otherwise.
    Auto,
    Power,
    ClosedForm,
}

/// Every numeric default in one table; echoed into each report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Defaults {
    pub tol: f64,
    pub max_iter: usize,
    pub c_occ: f64,
    pub tolerance_sigmas: f64,
    pub censor_limit: f64,
    pub spectral_method: SpectralMethod,
}

impl Default for Defaults {
    fn default() -> Self {
        Defaults {
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            c_occ: crate::walker::default_c_occ(),
            tolerance_sigmas: crate::walker::default_sigmas(),
            censor_limit: crate::walker::default_censor_limit(),
            spectral_method: SpectralMethod::Auto,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PotentialMode {
    #[default]
    Eigenfunction,
    HeatFlow {
        box_side: usize,
        theta_cap: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckSelector {
    Bounds,
    Mark,
    Lindrift,
    Smallball,
    Mghit,
    L1mg,
    Yuval,
    Mgocc,
    Harmonic,
    ConjectureSweep,
}

impl CheckSelector {
    pub fn name(&self) -> &'static str {
        match self {
            CheckSelector::Bounds => "bounds",
            CheckSelector::Mark => "mark",
            CheckSelector::Lindrift => "lindrift",
            CheckSelector::Smallball => "smallball",
            CheckSelector::Mghit => "mghit",
            CheckSelector::L1mg => "l1mg",
            CheckSelector::Yuval => "yuval",
            CheckSelector::Mgocc => "mgocc",
            CheckSelector::Harmonic => "harmonic",
            CheckSelector::ConjectureSweep => "conjecture-sweep",
        }
    }

    fn needs_walk(&self) -> bool {
        matches!(
            self,
            CheckSelector::Bounds | CheckSelector::Mark | CheckSelector::Lindrift | CheckSelector::Smallball
        )
    }

    fn is_martingale(&self) -> bool {
        matches!(
            self,
            CheckSelector::Mghit | CheckSelector::L1mg | CheckSelector::Yuval | CheckSelector::Mgocc
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub format: OutputFormat,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InequalitySettings {
    /// The horizon `T`; the walk must run to `2T`.
    pub horizon: u64,
    #[serde(default)]
    pub smallball_epsilons: Vec<f64>,
    #[serde(default)]
    pub occupation_epsilons: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MartingaleFamily {
    SrwOnIntegers,
    LazySrw {
        holding: f64,
    },
    /// The run's own potential, embedded and walked from `walk.x0`.
    Embedded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MartingaleConfig {
    pub family: MartingaleFamily,
    pub n_samples: u64,
    /// Defaults to the walk seed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default)]
    pub hit_radii: Vec<f64>,
    #[serde(default = "default_step_cap")]
    pub step_cap: u64,
    #[serde(default)]
    pub l1_horizon: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub yuval: Option<YuvalParams>,
    #[serde(default)]
    pub occ_horizon: u64,
    #[serde(default)]
    pub occ_epsilons: Vec<f64>,
}

fn default_step_cap() -> u64 {
    100_000
}

impl MartingaleConfig {
    pub fn new(family: MartingaleFamily, n_samples: u64) -> Self {
        MartingaleConfig {
            family,
            n_samples,
            seed: None,
            hit_radii: Vec::new(),
            step_cap: default_step_cap(),
            l1_horizon: 0,
            yuval: None,
            occ_horizon: 0,
            occ_epsilons: Vec::new(),
        }
    }

    pub fn params(&self, seed: u64, defaults: &Defaults, workers: usize) -> MartingaleParams {
        MartingaleParams {
            n_samples: self.n_samples,
            seed: self.seed.unwrap_or(seed),
            hit_radii: self.hit_radii.clone(),
            step_cap: self.step_cap,
            l1_horizon: self.l1_horizon,
            yuval: self.yuval.clone(),
            occ_horizon: self.occ_horizon,
            occ_epsilons: self.occ_epsilons.clone(),
            c_occ: defaults.c_occ,
            sigmas: defaults.tolerance_sigmas,
            censor_limit: defaults.censor_limit,
            workers,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HarmonicSettings {
    /// Times at which `E‖Ψ(X_t) - Ψ(X_0)‖²` is estimated.
    pub times: Vec<u64>,
    /// Defaults to `walk.n_samples`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_samples: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub families: Vec<GraphSpec>,
    pub eps0_grid: Vec<f64>,
    pub n_samples: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub graph: GraphSpec,
    #[serde(default)]
    pub potential: PotentialMode,
    /// Defaults to 64 steps, 10⁴ samples, seed 0.
    #[serde(default = "default_walk")]
    pub walk: WalkConfig,
    #[serde(default)]
    pub checks: Vec<CheckSelector>,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub defaults: Defaults,
    /// Bound grid; defaults to powers of two and their triples up to
    /// `t_max`. Always cut to the relaxation window.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound_times: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inequalities: Option<InequalitySettings>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub martingale: Option<MartingaleConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub harmonic: Option<HarmonicSettings>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
}

fn default_walk() -> WalkConfig {
    WalkConfig::new(64, 10_000, 0)
}

impl RunConfig {
    pub fn new(graph: GraphSpec, walk: WalkConfig) -> Self {
        RunConfig {
            graph,
            potential: PotentialMode::Eigenfunction,
            walk,
            checks: Vec::new(),
            output: OutputConfig::default(),
            defaults: Defaults::default(),
            bound_times: None,
            inequalities: None,
            martingale: None,
            harmonic: None,
            sweep: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    fn validate(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        for c in &self.checks {
            if !seen.insert(*c) {
                return Err(Error::Config(format!("check {} requested twice", c.name())));
            }
            if c.is_martingale() && self.martingale.is_none() {
                return Err(Error::Config(format!("check {} needs a martingale section", c.name())));
            }
            if *c == CheckSelector::ConjectureSweep && self.sweep.is_none() {
                return Err(Error::Config("conjecture-sweep needs a sweep section".into()));
            }
        }
        if !(self.defaults.tolerance_sigmas >= 0.0) || !(self.defaults.tol > 0.0) {
            return Err(Error::Config("tolerance_sigmas must be ≥ 0 and tol > 0".into()));
        }
        self.walk.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumInfo {
    pub lambda: f64,
    pub relaxation_time: f64,
    pub residual: f64,
    pub iterations: usize,
    pub method: SpectralMethod,
}

/// Second eigenpair by the configured method.
pub fn compute_spectrum(graph: &Graph, kernel: &Kernel, defaults: &Defaults) -> Result<(SpectralResult, SpectrumInfo)> {
    let closed = match defaults.spectral_method {
        SpectralMethod::Power => None,
        SpectralMethod::Auto | SpectralMethod::ClosedForm => closed_form_eigenpair(graph, kernel),
    };
    let (result, method) = match (closed, defaults.spectral_method) {
        (Some(r), _) => (r, SpectralMethod::ClosedForm),
        (None, SpectralMethod::ClosedForm) => {
            return Err(Error::UnsupportedFamily(format!(
                "{} (no closed-form spectrum)",
                graph.family().name()
            )))
        }
        (None, _) => (
            second_eigenpair(kernel, defaults.tol, defaults.max_iter)?,
            SpectralMethod::Power,
        ),
    };
    let info = SpectrumInfo {
        lambda: result.lambda,
        relaxation_time: result.relaxation_time(),
        residual: result.residual,
        iterations: result.iterations,
        method,
    };
    Ok((result, info))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialInfo {
    pub mode: PotentialMode,
    pub dirichlet_form: f64,
    pub ratio: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<u64>,
    /// `min_t exact_bound(t) / (p_* t)` over the bound grid: the constant `c`
    /// in `E[dist²] ≥ c p_* t` that this potential certifies.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound_constant: Option<f64>,
}

/// The potential vector selected by `mode`.
pub fn build_potential(
    graph: &Graph,
    kernel: &Kernel,
    mode: &PotentialMode,
    spectral: &SpectralResult,
) -> Result<(Vec<f64>, PotentialInfo, Option<PotentialResult>)> {
    let (psi, heat) = match mode {
        PotentialMode::Eigenfunction => (spectral.psi.clone(), None),
        PotentialMode::HeatFlow { box_side, theta_cap } => {
            let f = folner_indicator(graph, *box_side)?;
            let r = heat_flow_potential(kernel, &f, *theta_cap)?;
            (r.phi.clone(), Some(r))
        }
    };
    let info = PotentialInfo {
        mode: mode.clone(),
        dirichlet_form: kernel.dirichlet_form(&psi)?,
        ratio: kernel.rayleigh_ratio(&psi)?,
        theta: heat.as_ref().map(|h| h.theta),
        k: heat.as_ref().map(|h| h.k),
        bound_constant: None,
    };
    Ok((psi, info, heat))
}

/// Powers of two and three times powers of two up to `t_max`, plus
/// `t_max`; every time when `t_max ≤ 64`.
pub fn default_bound_times(t_max: u64) -> Vec<u64> {
    if t_max <= 64 {
        return (1..=t_max).collect();
    }
    let mut times = BTreeSet::new();
    let mut p = 1u64;
    while p <= t_max {
        times.insert(p);
        if 3 * p <= t_max {
            times.insert(3 * p);
        }
        p *= 2;
    }
    times.insert(t_max);
    times.into_iter().collect()
}

/// Largest `t` with `t ≤ (1-λ)^-1`, allowing for rounding in `1 - λ`.
pub fn relaxation_cutoff(lambda: f64) -> u64 {
    let relax = 1.0 / (1.0 - lambda);
    if !relax.is_finite() {
        return u64::MAX;
    }
    (relax * (1.0 + 1e-9)).floor() as u64
}

/// Lower-bound curve for `psi` on `times`, including the geometric bound
/// when `λ ∈ (-1, 1)`.
pub fn bound_curve(kernel: &Kernel, psi: &[f64], lambda: f64, times: &[u64]) -> Result<BoundCurve> {
    if times.is_empty() {
        return Ok(BoundCurve {
            p_star: kernel.p_star(),
            ..Default::default()
        });
    }
    let curve = escape_lower_bound(kernel, psi, times)?;
    if lambda > -1.0 && lambda < 1.0 {
        let geometric = finite_bound_curve(lambda, kernel.p_star(), times)?;
        return curve.with_geometric(&geometric);
    }
    Ok(curve)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub verdict: Verdict,
    pub items: Vec<NamedCheck>,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub note: String,
}

impl CheckResult {
    fn from_items(name: &str, items: Vec<NamedCheck>) -> Self {
        let verdict = Verdict::combine(items.iter().map(|c| &c.verdict));
        CheckResult {
            name: name.into(),
            verdict,
            items,
            note: String::new(),
        }
    }
}

/// One CSV/JSON row per simulated time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesRow {
    pub time: u64,
    pub mean_dist: f64,
    pub mean_sq_dist: f64,
    pub ci_half_width: f64,
    pub exact_bound: Option<f64>,
    pub quadratic_bound: Option<f64>,
    pub improved_bound: Option<f64>,
    pub geometric_bound: Option<f64>,
}

/// Joins a walk summary with a bound curve on the summary's full time range.
pub fn series(summary: &WalkSummary, curve: &BoundCurve) -> Vec<SeriesRow> {
    let mut rows: Vec<SeriesRow> = (0..=summary.t_max as usize)
        .map(|t| SeriesRow {
            time: t as u64,
            mean_dist: summary.mean_dist[t],
            mean_sq_dist: summary.mean_sq_dist[t],
            ci_half_width: summary.ci_half_width[t],
            exact_bound: None,
            quadratic_bound: None,
            improved_bound: None,
            geometric_bound: None,
        })
        .collect();
    for (i, &t) in curve.times.iter().enumerate() {
        if let Some(row) = rows.get_mut(t as usize) {
            row.exact_bound = curve.exact_bound.get(i).copied();
            row.quadratic_bound = curve.quadratic_bound.get(i).copied();
            row.improved_bound = curve.improved_bound.get(i).copied();
            row.geometric_bound = curve.geometric_bound.get(i).copied();
        }
    }
    rows
}

/// Writes series rows with the fixed column order; undefined bounds are
/// empty cells.
pub fn write_series_csv<W: Write>(rows: &[SeriesRow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "time",
        "mean_dist",
        "mean_sq_dist",
        "ci_half_width",
        "exact_bound",
        "quadratic_bound",
        "improved_bound",
        "geometric_bound",
    ])?;
    let cell = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in rows {
        w.write_record([
            r.time.to_string(),
            r.mean_dist.to_string(),
            r.mean_sq_dist.to_string(),
            r.ci_half_width.to_string(),
            cell(r.exact_bound),
            cell(r.quadratic_bound),
            cell(r.improved_bound),
            cell(r.geometric_bound),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes a bound curve alone, one row per grid time.
pub fn write_curve_csv<W: Write>(curve: &BoundCurve, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "time",
        "exact_bound",
        "quadratic_bound",
        "improved_bound",
        "geometric_bound",
    ])?;
    let cell = |v: &Vec<f64>, i: usize| v.get(i).map(|x| x.to_string()).unwrap_or_default();
    for (i, t) in curve.times.iter().enumerate() {
        w.write_record([
            t.to_string(),
            cell(&curve.exact_bound, i),
            cell(&curve.quadratic_bound, i),
            cell(&curve.improved_bound, i),
            cell(&curve.geometric_bound, i),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub graph: GraphSpec,
    pub degree: usize,
    pub diameter: u32,
    pub eps0: f64,
    /// `floor(eps0 · D²)`.
    pub t_max: u64,
    /// `min_{1≤t≤t_max} E[dist²]·d/t`; absent when `t_max = 0`.
    pub min_ratio: Option<f64>,
    pub argmin: Option<u64>,
    /// `E[dist²]·d/t` for `t = 1..=t_max`.
    pub ratios: Vec<f64>,
}

/// Exploratory data for the diffusive-window question: for each graph and
/// `eps0`, simulates up to `eps0 · D²` steps and records `E[dist²]·d/t`.
pub fn conjecture_sweep(
    families: &[GraphSpec],
    eps0_grid: &[f64],
    n_samples: u64,
    seed: u64,
    workers: usize,
) -> Result<Vec<SweepEntry>> {
    let mut out = Vec::new();
    for spec in families {
        let graph = build_graph(spec)?;
        let kernel = srw_kernel(&graph);
        let diameter = graph.diameter();
        let d = graph.degree() as f64;
        let longest = eps0_grid
            .iter()
            .map(|e| (e * (diameter as f64).powi(2)).floor() as u64)
            .max()
            .unwrap_or(0);
        let summary = if longest > 0 {
            let mut cfg = WalkConfig::new(longest, n_samples, seed);
            cfg.workers = workers;
            Some(simulate(&kernel, &graph, &cfg)?)
        } else {
            None
        };
        for &eps0 in eps0_grid {
            if !(eps0 >= 0.0) {
                return Err(Error::OutOfRange {
                    value: eps0,
                    range: "eps0 ≥ 0",
                });
            }
            let t_max = (eps0 * (diameter as f64).powi(2)).floor() as u64;
            let ratios: Vec<f64> = match &summary {
                Some(s) => (1..=t_max).map(|t| s.mean_sq_dist[t as usize] * d / t as f64).collect(),
                None => Vec::new(),
            };
            let best = ratios
                .iter()
                .enumerate()
                .fold(None, |best: Option<(usize, f64)>, (i, &r)| match best {
                    Some((_, b)) if b <= r => best,
                    _ => Some((i, r)),
                });
            out.push(SweepEntry {
                graph: spec.clone(),
                degree: graph.degree(),
                diameter,
                eps0,
                t_max,
                min_ratio: best.map(|b| b.1),
                argmin: best.map(|b| b.0 as u64 + 1),
                ratios,
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub tool: String,
    pub version: String,
    pub seed: u64,
    pub config: RunConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<SpectrumInfo>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potential: Option<PotentialInfo>,
    pub checks: Vec<CheckResult>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub series: Vec<SeriesRow>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sweep: Vec<SweepEntry>,
}

impl Report {
    /// `check` or `check/item` names of every failed verdict.
    pub fn failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        for c in &self.checks {
            if c.verdict != Verdict::Fail {
                continue;
            }
            let failed: Vec<_> = c.items.iter().filter(|i| i.verdict == Verdict::Fail).collect();
            if failed.is_empty() {
                out.push(c.name.clone());
            }
            out.extend(failed.iter().map(|i| format!("{}/{}", c.name, i.name)));
        }
        out
    }

    /// 0 when no check failed, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.checks.iter().any(|c| c.verdict == Verdict::Fail) {
            1
        } else {
            0
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        write_series_csv(&self.series, writer)
    }
}

fn harmonic_check(
    graph: &Graph,
    kernel: &Kernel,
    psi: &[f64],
    lambda: Option<f64>,
    config: &RunConfig,
) -> Result<CheckResult> {
    let emb = embed(graph, kernel, psi)?;
    let defects = defect_report(graph, kernel, &emb)?;
    let ratio = kernel.rayleigh_ratio(psi)?;
    let half = ratio / 2.0;
    let energy_err = defects.max_energy_error();
    let mut items = vec![
        NamedCheck::new(
            "local_energy",
            Verdict::from_bool(energy_err <= IDENTITY_TOL),
            energy_err,
            IDENTITY_TOL,
            0.0,
        )
        .with_note("max |energy - 1| over vertices"),
        NamedCheck::new(
            "defect",
            Verdict::from_bool((defects.defect - half).abs() <= IDENTITY_TOL * half),
            defects.defect,
            half,
            0.0,
        )
        .with_note("expected rayleigh ratio / 2"),
        NamedCheck::new(
            "defect_uniformity",
            Verdict::from_bool(defects.defect_spread <= IDENTITY_TOL),
            defects.defect_spread,
            IDENTITY_TOL,
            0.0,
        ),
        NamedCheck::new(
            "lipschitz",
            Verdict::from_bool(defects.lipschitz <= defects.lipschitz_bound + IDENTITY_TOL),
            defects.lipschitz,
            defects.lipschitz_bound,
            0.0,
        ),
    ];
    let settings = config.harmonic.clone().unwrap_or(HarmonicSettings {
        times: [0u64, 1, 2, 4, 8, 16, 32, 64]
            .into_iter()
            .filter(|&t| t <= config.walk.t_max)
            .collect(),
        n_samples: None,
    });
    let mut times = settings.times.clone();
    times.sort_unstable();
    times.dedup();
    let mut cfg = config.walk.clone();
    cfg.n_samples = settings.n_samples.unwrap_or(cfg.n_samples);
    let trajectories = sample_trajectories(kernel, &cfg, &times)?;
    let mg = embedded_martingale_check(
        graph,
        kernel,
        &emb,
        &trajectories,
        lambda,
        config.defaults.tolerance_sigmas,
    )?;
    if let (Some(dev), Some(l)) = (mg.one_step_deviation, lambda) {
        items.push(
            NamedCheck::new(
                "one_step",
                Verdict::from_bool(dev <= IDENTITY_TOL),
                dev,
                IDENTITY_TOL,
                0.0,
            )
            .with_note(format!("max ‖PΨ - λΨ‖ with λ = {l}")),
        );
    }
    for row in &mg.rows {
        items.push(
            NamedCheck::new(
                format!("martingale[t={}]", row.t),
                row.verdict,
                row.measured,
                row.exact,
                row.ci,
            )
            .with_note(format!("interval [{}, {}]", row.lower, row.upper)),
        );
    }
    Ok(CheckResult::from_items("harmonic", items))
}

/// Builds everything the selected checks need and evaluates them.
///
/// Bound checks are restricted to `t ≤ (1-λ)^-1`; an empty window is
/// reported inconclusive.
pub fn run(config: &RunConfig) -> Result<Report> {
    config.validate()?;
    let defaults = &config.defaults;
    let sigmas = defaults.tolerance_sigmas;
    let graph = build_graph(&config.graph)?;
    let kernel = srw_kernel(&graph);
    if config.walk.x0 >= graph.n() {
        return Err(Error::VertexOutOfRange {
            vertex: config.walk.x0,
            n: graph.n(),
        });
    }
    let (spectral, spectrum) = compute_spectrum(&graph, &kernel, defaults)?;

    let needs_potential = config.checks.iter().any(|c| {
        matches!(c, CheckSelector::Bounds | CheckSelector::Harmonic)
            || (c.is_martingale()
                && matches!(
                    config.martingale.as_ref().map(|m| &m.family),
                    Some(MartingaleFamily::Embedded)
                ))
    });
    let potential = if needs_potential || config.checks.is_empty() {
        Some(build_potential(&graph, &kernel, &config.potential, &spectral)?)
    } else {
        None
    };

    let cutoff = relaxation_cutoff(spectral.lambda);
    let grid: Vec<u64> = config
        .bound_times
        .clone()
        .unwrap_or_else(|| default_bound_times(config.walk.t_max))
        .into_iter()
        .filter(|&t| t <= cutoff && t <= config.walk.t_max)
        .collect();
    let curve = match &potential {
        Some((psi, _, _)) => bound_curve(&kernel, psi, spectral.lambda, &grid)?,
        None => BoundCurve::default(),
    };
    let mut potential = potential;
    if let Some((_, info, _)) = potential.as_mut() {
        info.bound_constant = curve
            .times
            .iter()
            .zip(&curve.exact_bound)
            .map(|(&t, &b)| b / (curve.p_star * t as f64))
            .reduce(f64::min);
    }

    let summary = if config.checks.iter().any(CheckSelector::needs_walk) || config.checks.is_empty() {
        Some(simulate(&kernel, &graph, &config.walk)?)
    } else {
        None
    };

    let walk_checks = match (&summary, &config.inequalities) {
        (Some(s), Some(ineq))
            if config.checks.iter().any(|c| {
                matches!(
                    c,
                    CheckSelector::Mark | CheckSelector::Lindrift | CheckSelector::Smallball
                )
            }) =>
        {
            let params = InequalityParams {
                horizon: ineq.horizon,
                smallball_epsilons: ineq.smallball_epsilons.clone(),
                occupation_epsilons: ineq.occupation_epsilons.clone(),
                c_occ: defaults.c_occ,
                sigmas,
                censor_limit: defaults.censor_limit,
            };
            verify_walk_inequalities(s, &params)?
        }
        (Some(s), None)
            if config.checks.iter().any(|c| {
                matches!(
                    c,
                    CheckSelector::Mark | CheckSelector::Lindrift | CheckSelector::Smallball
                )
            }) =>
        {
            let mut params = InequalityParams::new(config.walk.t_max / 2);
            params.c_occ = defaults.c_occ;
            params.sigmas = sigmas;
            params.censor_limit = defaults.censor_limit;
            verify_walk_inequalities(s, &params)?
        }
        _ => Vec::new(),
    };

    let martingale_checks = match &config.martingale {
        Some(mc) if config.checks.iter().any(CheckSelector::is_martingale) => {
            let params = mc.params(config.walk.seed, defaults, config.walk.workers);
            match mc.family {
                MartingaleFamily::SrwOnIntegers => verify_martingale_lemmas(MartingaleSpec::SrwOnIntegers, &params)?,
                MartingaleFamily::LazySrw { holding } => {
                    verify_martingale_lemmas(MartingaleSpec::LazySrw { holding }, &params)?
                }
                MartingaleFamily::Embedded => {
                    let psi = &potential.as_ref().expect("embedded family builds the potential").0;
                    let emb = embed(&graph, &kernel, psi)?;
                    let spec = MartingaleSpec::Embedded {
                        kernel: &kernel,
                        embedding: &emb,
                        x0: config.walk.x0,
                    };
                    verify_martingale_lemmas(spec, &params)?
                }
            }
        }
        _ => Vec::new(),
    };

    let pick = |items: &[NamedCheck], prefixes: &[&str]| -> Vec<NamedCheck> {
        items
            .iter()
            .filter(|c| {
                prefixes
                    .iter()
                    .any(|p| c.name == *p || c.name.starts_with(&format!("{p}[")))
            })
            .cloned()
            .collect()
    };

    let mut sweep = Vec::new();
    let mut checks = Vec::with_capacity(config.checks.len());
    for selector in &config.checks {
        let result = match selector {
            CheckSelector::Bounds => {
                let s = summary.as_ref().expect("bounds simulate the walk");
                let report = verify_against_bounds(s, &curve, sigmas)?;
                let mut items: Vec<NamedCheck> = report
                    .rows
                    .iter()
                    .map(|r| {
                        let lower = [r.exact_bound, r.quadratic_bound, r.geometric_bound]
                            .iter()
                            .flatten()
                            .fold(0.0f64, |a, &b| a.max(b));
                        NamedCheck::new(format!("bounds[t={}]", r.t), r.verdict, r.mean_sq_dist, lower, r.ci)
                    })
                    .collect();
                items.extend(verify_mean_escape(s, &grid, kernel.p_star(), sigmas)?);
                let mut result = CheckResult::from_items("bounds", items);
                if grid.is_empty() {
                    result.note = format!("relaxation time {:.6} leaves no admissible t", spectrum.relaxation_time);
                }
                result
            }
            CheckSelector::Mark => CheckResult::from_items("mark", pick(&walk_checks, &["mark"])),
            CheckSelector::Lindrift => CheckResult::from_items("lindrift", pick(&walk_checks, &["lindrift"])),
            CheckSelector::Smallball => {
                CheckResult::from_items("smallball", pick(&walk_checks, &["smallball", "occupation"]))
            }
            CheckSelector::Mghit => CheckResult::from_items("mghit", pick(&martingale_checks, &["mghit"])),
            CheckSelector::L1mg => CheckResult::from_items("l1mg", pick(&martingale_checks, &["l1mg"])),
            CheckSelector::Yuval => CheckResult::from_items("yuval", pick(&martingale_checks, &["yuval"])),
            CheckSelector::Mgocc => CheckResult::from_items("mgocc", pick(&martingale_checks, &["mgocc"])),
            CheckSelector::Harmonic => {
                let (psi, _, _) = potential.as_ref().expect("harmonic builds the potential");
                let lambda = matches!(config.potential, PotentialMode::Eigenfunction).then_some(spectral.lambda);
                harmonic_check(&graph, &kernel, psi, lambda, config)?
            }
            CheckSelector::ConjectureSweep => {
                let sc = config.sweep.as_ref().expect("validated");
                sweep = conjecture_sweep(
                    &sc.families,
                    &sc.eps0_grid,
                    sc.n_samples,
                    config.walk.seed,
                    config.walk.workers,
                )?;
                let items = sweep
                    .iter()
                    .map(|e| {
                        NamedCheck::new(
                            format!("sweep[{},eps0={}]", e.graph.family.name(), e.eps0),
                            Verdict::Inconclusive,
                            e.min_ratio.unwrap_or(0.0),
                            0.0,
                            0.0,
                        )
                        .with_note(format!("diameter {}, t_max {}", e.diameter, e.t_max))
                    })
                    .collect();
                let mut r = CheckResult::from_items("conjecture-sweep", items);
                r.verdict = Verdict::Inconclusive;
                r.note = "exploratory data, no verdict".into();
                r
            }
        };
        checks.push(result);
    }

    Ok(Report {
        tool: TOOL.into(),
        version: VERSION.into(),
        seed: config.walk.seed,
        config: config.clone(),
        spectrum: Some(spectrum),
        potential: potential.map(|p| p.1),
        checks,
        series: summary.as_ref().map(|s| series(s, &curve)).unwrap_or_default(),
        sweep,
    })
}
