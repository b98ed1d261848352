//! Seeded Monte Carlo simulation of the kernel walk and the checks that
//! consume it.
//!
//! All per-time statistics are accumulated as integer histograms of
//! `dist(X_0, X_t)`, so a summary is bit-identical for any worker count.

use serde::{Deserialize, Serialize};

use crate::check::{NamedCheck, Verdict};
use crate::error::{Error, Result};
use crate::graph::{bfs_distances, Graph};
use crate::kernel::Kernel;
use crate::potential::BoundCurve;
use crate::rng::{fold_chunks, map_chunks, TrajectoryRng};
use crate::stats::histogram_mean_se;

/// Trajectories per parallel work item.
const CHUNK: usize = 256;
pub const DEFAULT_SIGMAS: f64 = 3.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkConfig {
    pub t_max: u64,
    pub n_samples: u64,
    pub seed: u64,
    #[serde(default)]
    pub x0: usize,
    /// Occupation radii `ε√(t_max/d)` reported in the summary.
    #[serde(default)]
    pub occupation_epsilons: Vec<f64>,
    /// Radii `k` whose hitting times `H_k` are recorded.
    #[serde(default)]
    pub hitting_radii: Vec<u32>,
    /// Rayon threads; 0 uses the global pool. Does not affect results.
    #[serde(default)]
    pub workers: usize,
}

impl WalkConfig {
    pub fn new(t_max: u64, n_samples: u64, seed: u64) -> Self {
        WalkConfig {
            t_max,
            n_samples,
            seed,
            x0: 0,
            occupation_epsilons: Vec::new(),
            hitting_radii: Vec::new(),
            workers: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.t_max < 1 {
            return Err(Error::Config("t_max must be at least 1".into()));
        }
        if self.n_samples < 1 {
            return Err(Error::Config("n_samples must be at least 1".into()));
        }
        if let Some(e) = self.occupation_epsilons.iter().find(|e| !(**e > 0.0)) {
            return Err(Error::OutOfRange {
                value: *e,
                range: "epsilon > 0",
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OccupationEntry {
    /// 0 when the entry was requested by radius.
    pub epsilon: f64,
    pub horizon: u64,
    pub radius: f64,
    /// `(1/T) Σ_{s=0}^{T} P̂[dist(X_0,X_s) ≤ radius]`.
    pub fraction: f64,
    /// Half-width from the variance bound of a `[0, (T+1)/T]`-valued mean.
    pub ci: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HittingEntry {
    pub radius: u32,
    /// Mean of `min(H_k, t_max)`; censoring biases it low.
    pub mean: f64,
    pub se: f64,
    pub censored: u64,
    pub n_samples: u64,
}

impl HittingEntry {
    pub fn censored_fraction(&self) -> f64 {
        self.censored as f64 / self.n_samples as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkSummary {
    pub n_samples: u64,
    pub t_max: u64,
    pub seed: u64,
    pub x0: usize,
    pub degree: usize,
    /// Largest one-step displacement `dist(X_0, X_1)`.
    pub b_step: u32,
    pub sigmas: f64,
    /// Indexed by `t = 0..=t_max`.
    pub mean_dist: Vec<f64>,
    pub se_dist: Vec<f64>,
    pub mean_sq_dist: Vec<f64>,
    pub se_sq_dist: Vec<f64>,
    /// `sigmas · se_sq_dist`.
    pub ci_half_width: Vec<f64>,
    pub occupation: Vec<OccupationEntry>,
    pub hitting: Vec<HittingEntry>,
    #[serde(skip)]
    hist: Histograms,
}

/// Counts of `dist(X_0, X_t) = j` for `j ≤ min(t, cap)`, stored back to back.
#[derive(Debug, Clone, PartialEq, Default)]
struct Histograms {
    offsets: Vec<usize>,
    counts: Vec<u64>,
}

impl Histograms {
    fn layout(t_max: u64, cap: u32) -> Vec<usize> {
        let mut offsets = Vec::with_capacity(t_max as usize + 2);
        let mut acc = 0usize;
        for t in 0..=t_max {
            offsets.push(acc);
            acc += t.min(cap as u64) as usize + 1;
        }
        offsets.push(acc);
        offsets
    }

    fn at(&self, t: u64) -> &[u64] {
        let t = t as usize;
        &self.counts[self.offsets[t]..self.offsets[t + 1]]
    }
}

struct Acc {
    counts: Vec<u64>,
    hit_sum: Vec<u64>,
    hit_sum_sq: Vec<u128>,
    censored: Vec<u64>,
}

impl Acc {
    fn new(len: usize, radii: usize) -> Self {
        Acc {
            counts: vec![0; len],
            hit_sum: vec![0; radii],
            hit_sum_sq: vec![0; radii],
            censored: vec![0; radii],
        }
    }

    fn merge(mut self, other: Acc) -> Acc {
        self.counts.iter_mut().zip(&other.counts).for_each(|(a, b)| *a += b);
        for i in 0..self.hit_sum.len() {
            self.hit_sum[i] += other.hit_sum[i];
            self.hit_sum_sq[i] += other.hit_sum_sq[i];
            self.censored[i] += other.censored[i];
        }
        self
    }
}

/// Simulates `n_samples` walks of length `t_max` from `x0`.
///
/// Trajectory `i` draws its steps from stream `i` of the generator keyed by
/// `cfg.seed`.
pub fn simulate(kernel: &Kernel, graph: &Graph, cfg: &WalkConfig) -> Result<WalkSummary> {
    cfg.validate()?;
    if kernel.n() != graph.n() {
        return Err(Error::LengthMismatch {
            expected: graph.n(),
            got: kernel.n(),
        });
    }
    let field = bfs_distances(graph, cfg.x0)?;
    let dist = &field.dist;
    let cap = field.max();
    let offsets = Histograms::layout(cfg.t_max, cap);
    let len = *offsets.last().unwrap();
    let radii = &cfg.hitting_radii;
    let n_items = usize::try_from(cfg.n_samples).map_err(|_| Error::Config("n_samples too large".into()))?;

    let acc = fold_chunks(
        n_items,
        CHUNK,
        cfg.workers,
        || Acc::new(len, radii.len()),
        |acc, range| {
            let mut hit_at = vec![0u64; radii.len()];
            for i in range {
                let mut rng = TrajectoryRng::new(cfg.seed, i as u64);
                let mut x = cfg.x0;
                acc.counts[offsets[0]] += 1;
                hit_at.iter_mut().for_each(|h| *h = u64::MAX);
                let mut pending = radii.iter().filter(|&&k| k > 0).count();
                for (h, &k) in hit_at.iter_mut().zip(radii) {
                    if k == 0 {
                        *h = 0;
                    }
                }
                for t in 1..=cfg.t_max {
                    x = kernel.sample_next(x, rng.next_f64());
                    let d = dist[x];
                    acc.counts[offsets[t as usize] + d as usize] += 1;
                    if pending > 0 {
                        for (h, &k) in hit_at.iter_mut().zip(radii) {
                            if *h == u64::MAX && d >= k {
                                *h = t;
                                pending -= 1;
                            }
                        }
                    }
                }
                for (j, &h) in hit_at.iter().enumerate() {
                    let h = if h == u64::MAX {
                        acc.censored[j] += 1;
                        cfg.t_max
                    } else {
                        h
                    };
                    acc.hit_sum[j] += h;
                    acc.hit_sum_sq[j] += (h as u128) * (h as u128);
                }
            }
        },
        Acc::merge,
    );

    let hist = Histograms {
        offsets,
        counts: acc.counts,
    };
    let b_step = graph
        .neighbors(cfg.x0)
        .iter()
        .map(|&y| dist[y as usize])
        .max()
        .unwrap_or(0);
    let mut summary = WalkSummary {
        n_samples: cfg.n_samples,
        t_max: cfg.t_max,
        seed: cfg.seed,
        x0: cfg.x0,
        degree: graph.degree(),
        b_step,
        sigmas: DEFAULT_SIGMAS,
        mean_dist: Vec::new(),
        se_dist: Vec::new(),
        mean_sq_dist: Vec::new(),
        se_sq_dist: Vec::new(),
        ci_half_width: Vec::new(),
        occupation: Vec::new(),
        hitting: Vec::new(),
        hist,
    };
    for t in 0..=cfg.t_max {
        let counts = summary.hist.at(t);
        let (m1, s1) = histogram_mean_se(counts, |j| j as f64);
        let (m2, s2) = histogram_mean_se(counts, |j| (j * j) as f64);
        summary.mean_dist.push(m1);
        summary.se_dist.push(s1);
        summary.mean_sq_dist.push(m2);
        summary.se_sq_dist.push(s2);
        summary.ci_half_width.push(DEFAULT_SIGMAS * s2);
    }
    let d = graph.degree() as f64;
    for &eps in &cfg.occupation_epsilons {
        let radius = eps * (cfg.t_max as f64 / d).sqrt();
        let mut entry = summary.occupation_fraction(radius, cfg.t_max)?;
        entry.epsilon = eps;
        summary.occupation.push(entry);
    }
    let n = cfg.n_samples as f64;
    for (j, &k) in radii.iter().enumerate() {
        let mean = acc.hit_sum[j] as f64 / n;
        let var = if cfg.n_samples > 1 {
            ((acc.hit_sum_sq[j] as f64 - n * mean * mean) / (n - 1.0)).max(0.0)
        } else {
            0.0
        };
        summary.hitting.push(HittingEntry {
            radius: k,
            mean,
            se: (var / n).sqrt(),
            censored: acc.censored[j],
            n_samples: cfg.n_samples,
        });
    }
    Ok(summary)
}

impl WalkSummary {
    fn check_time(&self, t: u64) -> Result<()> {
        if t > self.t_max {
            return Err(Error::InsufficientHorizon(format!(
                "time {t} beyond simulated horizon {}",
                self.t_max
            )));
        }
        Ok(())
    }

    /// Raw histogram of `dist(X_0, X_t)`; empty when the summary was
    /// deserialized rather than simulated.
    pub fn distance_counts(&self, t: u64) -> &[u64] {
        if self.hist.counts.is_empty() || t > self.t_max {
            return &[];
        }
        self.hist.at(t)
    }

    /// Mean and standard error of `(dist(X_0,X_t) + shift)²`.
    pub fn shifted_sq_moment(&self, t: u64, shift: f64) -> Result<(f64, f64)> {
        self.check_time(t)?;
        if self.hist.counts.is_empty() {
            return Err(Error::Config("summary carries no histogram".into()));
        }
        Ok(histogram_mean_se(self.hist.at(t), |j| (j as f64 + shift).powi(2)))
    }

    /// `(1/T) Σ_{s=0}^{T} P̂[dist(X_0, X_s) ≤ radius]` with `T = horizon`.
    pub fn occupation_fraction(&self, radius: f64, horizon: u64) -> Result<OccupationEntry> {
        self.check_time(horizon)?;
        if horizon == 0 {
            return Err(Error::InsufficientHorizon("occupation horizon must be positive".into()));
        }
        if self.hist.counts.is_empty() {
            return Err(Error::Config("summary carries no histogram".into()));
        }
        let r = radius.floor();
        let mut inside = 0u64;
        for s in 0..=horizon {
            inside += self
                .hist
                .at(s)
                .iter()
                .enumerate()
                .filter(|(j, _)| *j as f64 <= r)
                .map(|(_, &c)| c)
                .sum::<u64>();
        }
        let t = horizon as f64;
        let fraction = inside as f64 / (self.n_samples as f64 * t);
        // per-trajectory occupation / T lies in [0, (T+1)/T]
        let var = (fraction * ((t + 1.0) / t - fraction)).max(0.0);
        let ci = self.sigmas * (var / self.n_samples as f64).sqrt();
        Ok(OccupationEntry {
            epsilon: 0.0,
            horizon,
            radius,
            fraction,
            ci,
        })
    }
}

/// Per-time comparison of simulated moments with a [`BoundCurve`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub t: u64,
    pub mean_sq_dist: f64,
    pub ci: f64,
    /// `E[(dist + 1)²]` estimate and its half-width, for the improved bound.
    pub mean_shifted_sq: f64,
    pub shifted_ci: f64,
    pub exact_bound: Option<f64>,
    pub quadratic_bound: Option<f64>,
    pub improved_bound: Option<f64>,
    pub geometric_bound: Option<f64>,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub rows: Vec<BoundRow>,
    pub verdict: Verdict,
}

impl BoundReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

/// Passes at `t` when every bound of the curve is below the simulated
/// moment plus `sigmas` standard errors. An empty grid is inconclusive.
pub fn verify_against_bounds(summary: &WalkSummary, curve: &BoundCurve, sigmas: f64) -> Result<BoundReport> {
    let len = curve.times.len();
    for (name, v) in [
        ("exact", &curve.exact_bound),
        ("quadratic", &curve.quadratic_bound),
        ("improved", &curve.improved_bound),
        ("geometric", &curve.geometric_bound),
    ] {
        if !v.is_empty() && v.len() != len {
            return Err(Error::GridMismatch(format!(
                "{name} bound has {} points for {len} times",
                v.len()
            )));
        }
    }
    let pick = |v: &Vec<f64>, i: usize| v.get(i).copied();
    let mut rows = Vec::with_capacity(len);
    for (i, &t) in curve.times.iter().enumerate() {
        summary
            .check_time(t)
            .map_err(|_| Error::GridMismatch(format!("time {t} not simulated")))?;
        let m = summary.mean_sq_dist[t as usize];
        let ci = sigmas * summary.se_sq_dist[t as usize];
        let (shifted, shifted_se) = summary.shifted_sq_moment(t, 1.0)?;
        let shifted_ci = sigmas * shifted_se;
        let exact = pick(&curve.exact_bound, i);
        let quadratic = pick(&curve.quadratic_bound, i);
        let improved = pick(&curve.improved_bound, i);
        let geometric = pick(&curve.geometric_bound, i);
        let ok = [exact, quadratic, geometric].iter().flatten().all(|&b| m + ci >= b)
            && improved.is_none_or(|b| shifted + shifted_ci >= b);
        rows.push(BoundRow {
            t,
            mean_sq_dist: m,
            ci,
            mean_shifted_sq: shifted,
            shifted_ci,
            exact_bound: exact,
            quadratic_bound: quadratic,
            improved_bound: improved,
            geometric_bound: geometric,
            verdict: Verdict::from_bool(ok),
        });
    }
    let verdict = Verdict::combine(rows.iter().map(|r| &r.verdict));
    Ok(BoundReport { rows, verdict })
}

/// Upper envelope `E[dist²] ≤ slope · t`, failing only when the estimate
/// exceeds the envelope by more than `sigmas` standard errors.
pub fn verify_upper_envelope(summary: &WalkSummary, times: &[u64], slope: f64, sigmas: f64) -> Result<Vec<NamedCheck>> {
    times
        .iter()
        .map(|&t| {
            summary.check_time(t)?;
            let m = summary.mean_sq_dist[t as usize];
            let ci = sigmas * summary.se_sq_dist[t as usize];
            let bound = slope * t as f64;
            Ok(NamedCheck::new(
                format!("envelope[t={t}]"),
                Verdict::from_bool(m - ci <= bound),
                m,
                bound,
                ci,
            ))
        })
        .collect()
}

/// Mean escape with the explicit constant: `E dist(X_0,X_t) ≥ √(p_* t)/24 - 3B/2`
/// with `B` the largest one-step distance.
pub fn verify_mean_escape(summary: &WalkSummary, times: &[u64], p_star: f64, sigmas: f64) -> Result<Vec<NamedCheck>> {
    let b = summary.b_step.max(1) as f64;
    times
        .iter()
        .map(|&t| {
            summary.check_time(t)?;
            let m = summary.mean_dist[t as usize];
            let ci = sigmas * summary.se_dist[t as usize];
            let bound = (p_star * t as f64).sqrt() / 24.0 - 1.5 * b;
            Ok(NamedCheck::new(
                format!("escape[t={t}]"),
                Verdict::from_bool(m + ci >= bound),
                m,
                bound,
                ci,
            ))
        })
        .collect()
}

/// Parameters of the hitting-time and occupation inequalities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityParams {
    /// The horizon `T`; the summary must extend to `2T`.
    pub horizon: u64,
    #[serde(default)]
    pub smallball_epsilons: Vec<f64>,
    #[serde(default)]
    pub occupation_epsilons: Vec<f64>,
    #[serde(default = "default_c_occ")]
    pub c_occ: f64,
    #[serde(default = "default_sigmas")]
    pub sigmas: f64,
    #[serde(default = "default_censor_limit")]
    pub censor_limit: f64,
}

pub fn default_c_occ() -> f64 {
    8.0
}

pub fn default_sigmas() -> f64 {
    DEFAULT_SIGMAS
}

pub fn default_censor_limit() -> f64 {
    0.01
}

impl InequalityParams {
    pub fn new(horizon: u64) -> Self {
        InequalityParams {
            horizon,
            smallball_epsilons: Vec::new(),
            occupation_epsilons: Vec::new(),
            c_occ: default_c_occ(),
            sigmas: default_sigmas(),
            censor_limit: default_censor_limit(),
        }
    }
}

/// Drift comparison: `E dist(X_0,X_T) ≥ ½ max_{t≤T}(E dist(X_0,X_t) - E dist(X_0,X_1))`.
pub fn check_mark(summary: &WalkSummary, horizon: u64, sigmas: f64) -> Result<NamedCheck> {
    summary.check_time(horizon)?;
    if horizon < 1 {
        return Err(Error::InsufficientHorizon("mark needs T ≥ 1".into()));
    }
    let base = summary.mean_dist[1];
    let (arg, peak) = (1..=horizon)
        .map(|t| (t, summary.mean_dist[t as usize] - base))
        .fold((1, f64::MIN), |best, cur| if cur.1 > best.1 { cur } else { best });
    let ci_t = sigmas * summary.se_dist[horizon as usize];
    let ci_peak = sigmas * (summary.se_dist[arg as usize] + summary.se_dist[1]);
    let measured = summary.mean_dist[horizon as usize];
    let bound = 0.5 * peak;
    Ok(NamedCheck::new(
        "mark",
        Verdict::from_bool(measured + ci_t >= bound - 0.5 * ci_peak),
        measured,
        bound,
        ci_t,
    ))
}

/// Hitting-time lemmas at every recorded radius, plus the occupation bound
/// at radius `ε√(T/d)`.
///
/// A radius enters the lindrift and smallball checks only when `h(k) ≤ T`
/// is consistent with the data (`mean - ci ≤ T`) and censoring is within
/// `censor_limit`; otherwise the check is inconclusive.
pub fn verify_walk_inequalities(summary: &WalkSummary, params: &InequalityParams) -> Result<Vec<NamedCheck>> {
    let t = params.horizon;
    if t < 1 || 2 * t > summary.t_max {
        return Err(Error::InsufficientHorizon(format!(
            "need t_max ≥ 2T = {}, simulated {}",
            2 * t,
            summary.t_max
        )));
    }
    let sigmas = params.sigmas;
    let mut out = vec![check_mark(summary, t, sigmas)?];
    let b = summary.b_step.max(1) as f64;
    let far = summary.mean_dist[2 * t as usize];
    let far_ci = sigmas * summary.se_dist[2 * t as usize];
    let near = summary.mean_dist[1];

    for h in &summary.hitting {
        let k = h.radius;
        let hit_ci = sigmas * h.se;
        let mut usable = Verdict::Pass;
        let mut note = String::new();
        if h.censored_fraction() > params.censor_limit {
            usable = Verdict::Inconclusive;
            note = format!("{:.2}% of hitting times censored", 100.0 * h.censored_fraction());
        } else if h.mean - hit_ci > t as f64 {
            usable = Verdict::Inconclusive;
            note = format!("hypothesis h({k}) ≤ {t} rejected: estimate {:.2}", h.mean);
        }

        let bound = k as f64 / 12.0 - 0.5 * near;
        let verdict = match usable {
            Verdict::Pass => Verdict::from_bool(far + far_ci >= bound),
            other => other,
        };
        out.push(NamedCheck::new(format!("lindrift[k={k}]"), verdict, far, bound, far_ci).with_note(note.clone()));

        for &eps in &params.smallball_epsilons {
            let name = format!("smallball[k={k},eps={eps}]");
            if eps * (k as f64) < 1.0 {
                out.push(
                    NamedCheck::new(name, Verdict::Inconclusive, 0.0, params.c_occ * eps, 0.0)
                        .with_note("requires eps ≥ 1/k"),
                );
                continue;
            }
            let occ = summary.occupation_fraction(eps / b * k as f64, t)?;
            let bound = params.c_occ * eps;
            let verdict = match usable {
                Verdict::Pass => Verdict::from_bool(occ.fraction - occ.ci <= bound),
                other => other,
            };
            out.push(NamedCheck::new(name, verdict, occ.fraction, bound, occ.ci).with_note(note.clone()));
        }
    }

    let d = summary.degree as f64;
    for &eps in &params.occupation_epsilons {
        let occ = summary.occupation_fraction(eps * (t as f64 / d).sqrt(), t)?;
        let bound = params.c_occ * eps;
        out.push(
            NamedCheck::new(
                format!("occupation[eps={eps}]"),
                Verdict::from_bool(occ.fraction - occ.ci <= bound),
                occ.fraction,
                bound,
                occ.ci,
            )
            .with_note(format!("fraction/eps = {:.3}", occ.fraction / eps)),
        );
    }
    Ok(out)
}

/// Positions of sampled walks at selected times.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectories {
    pub x0: usize,
    pub times: Vec<u64>,
    pub n_samples: usize,
    /// `positions[i * times.len() + j]` is trajectory `i` at `times[j]`.
    pub positions: Vec<u32>,
}

impl Trajectories {
    pub fn at(&self, sample: usize, time_index: usize) -> usize {
        self.positions[sample * self.times.len() + time_index] as usize
    }
}

/// Records walk positions at `times` (ascending). Uses the same streams as
/// [`simulate`], so trajectory `i` is the same path in both.
pub fn sample_trajectories(kernel: &Kernel, cfg: &WalkConfig, times: &[u64]) -> Result<Trajectories> {
    cfg.validate()?;
    if cfg.x0 >= kernel.n() {
        return Err(Error::VertexOutOfRange {
            vertex: cfg.x0,
            n: kernel.n(),
        });
    }
    if times.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::GridMismatch("times must be ascending".into()));
    }
    let horizon = times.last().copied().unwrap_or(0);
    let n_items = cfg.n_samples as usize;
    let chunks = map_chunks(n_items, CHUNK, cfg.workers, |range| {
        let mut out = Vec::with_capacity(range.len() * times.len());
        for i in range {
            let mut rng = TrajectoryRng::new(cfg.seed, i as u64);
            let mut x = cfg.x0;
            let mut next = 0;
            for t in 0..=horizon {
                if t > 0 {
                    x = kernel.sample_next(x, rng.next_f64());
                }
                while next < times.len() && times[next] == t {
                    out.push(x as u32);
                    next += 1;
                }
            }
        }
        out
    });
    Ok(Trajectories {
        x0: cfg.x0,
        times: times.to_vec(),
        n_samples: n_items,
        positions: chunks.concat(),
    })
}
