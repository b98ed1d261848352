//! Synthetic Hilbert-space martingales with unit conditional step variance,
//! and checks of the hitting-time, `L^1`-rate and occupation lemmas on them.
//!
//! Each lemma draws from its own block of generator streams, so adding or
//! removing one check never changes the numbers reported by another.

use serde::{Deserialize, Serialize};

use crate::check::{NamedCheck, Verdict};
use crate::error::{Error, Result};
use crate::harmonic::Embedding;
use crate::kernel::Kernel;
use crate::rng::{map_chunks, TrajectoryRng, AUX_STREAM};
use crate::stats::Moments;

const CHUNK: usize = 256;
const BLOCK_SUMMARY: u64 = 0;
const BLOCK_L1: u64 = 1;
const BLOCK_YUVAL: u64 = 2;
const BLOCK_OCC: u64 = 3;
/// Hitting-time radius `j` uses block `BLOCK_HIT + j`.
const BLOCK_HIT: u64 = 16;

/// A martingale `M_t` with `E[‖M_{t+1} - M_t‖² | F_t] = 1` and
/// `‖M_{t+1} - M_t‖ ≤ B`.
#[derive(Debug, Clone, Copy)]
pub enum MartingaleSpec<'a> {
    /// `±1` steps on the integers.
    SrwOnIntegers,
    /// Holds with probability `holding`, otherwise steps `±1/√(1-holding)`.
    LazySrw { holding: f64 },
    /// `Ψ(X_t) - Ψ(x0)` for the kernel walk `X_t` started at `x0`. This is a
    /// martingale only when `Ψ` is harmonic; the unit step variance holds for
    /// every normalized embedding.
    Embedded {
        kernel: &'a Kernel,
        embedding: &'a Embedding,
        x0: usize,
    },
}

impl MartingaleSpec<'_> {
    pub fn name(&self) -> &'static str {
        match self {
            MartingaleSpec::SrwOnIntegers => "srw_on_integers",
            MartingaleSpec::LazySrw { .. } => "lazy_srw",
            MartingaleSpec::Embedded { .. } => "embedded",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            MartingaleSpec::SrwOnIntegers => Ok(()),
            MartingaleSpec::LazySrw { holding } => {
                if (0.0..1.0).contains(&holding) {
                    Ok(())
                } else {
                    Err(Error::OutOfRange {
                        value: holding,
                        range: "[0, 1)",
                    })
                }
            }
            MartingaleSpec::Embedded { kernel, embedding, x0 } => {
                if kernel.n() != embedding.n() {
                    return Err(Error::LengthMismatch {
                        expected: embedding.n(),
                        got: kernel.n(),
                    });
                }
                if x0 >= kernel.n() {
                    return Err(Error::VertexOutOfRange {
                        vertex: x0,
                        n: kernel.n(),
                    });
                }
                Ok(())
            }
        }
    }

    /// Almost-sure bound `B` on the step norm.
    pub fn step_bound(&self) -> f64 {
        match *self {
            MartingaleSpec::SrwOnIntegers => 1.0,
            MartingaleSpec::LazySrw { holding } => 1.0 / (1.0 - holding).sqrt(),
            // the step norm out of x depends only on the generator, by equivariance
            MartingaleSpec::Embedded { kernel, embedding, x0 } => {
                let (cols, _) = kernel.row(x0);
                cols.iter()
                    .map(|&y| embedding.sq_distance(x0, y as usize))
                    .fold(0.0, f64::max)
                    .sqrt()
            }
        }
    }

    pub fn dimension(&self) -> usize {
        match self {
            MartingaleSpec::Embedded { embedding, .. } => embedding.m(),
            _ => 1,
        }
    }

    /// `E[‖M_{t+1} - M_t‖² | M_t]`, evaluated exhaustively per vertex for
    /// embedded specs (one entry for the scalar families). It is 1 up to
    /// rounding for every family.
    pub fn conditional_second_moment(&self) -> Vec<f64> {
        match *self {
            MartingaleSpec::SrwOnIntegers => vec![1.0],
            MartingaleSpec::LazySrw { holding } => {
                let s = self.step_bound();
                vec![(1.0 - holding) * s * s]
            }
            MartingaleSpec::Embedded { kernel, embedding, .. } => (0..kernel.n())
                .map(|x| {
                    let (cols, probs) = kernel.row(x);
                    cols.iter()
                        .zip(probs)
                        .map(|(&y, &p)| p * embedding.sq_distance(x, y as usize))
                        .sum()
                })
                .collect(),
        }
    }
}

/// Running state of one sample path.
enum Path<'a> {
    Scalar {
        holding: Option<f64>,
        scale: f64,
        k: i64,
    },
    Walk {
        kernel: &'a Kernel,
        sq_from_start: &'a [f64],
        x: usize,
    },
}

impl Path<'_> {
    #[inline]
    fn step(&mut self, rng: &mut TrajectoryRng) {
        match self {
            Path::Scalar { holding: None, k, .. } => *k += if rng.next_bit() { 1 } else { -1 },
            Path::Scalar {
                holding: Some(p), k, ..
            } => {
                let u = rng.next_f64();
                if u >= *p {
                    *k += if u < *p + (1.0 - *p) / 2.0 { 1 } else { -1 };
                }
            }
            Path::Walk { kernel, x, .. } => *x = kernel.sample_next(*x, rng.next_f64()),
        }
    }

    /// `‖M_t - M_0‖`.
    #[inline]
    fn displacement(&self) -> f64 {
        match self {
            Path::Scalar { scale, k, .. } => k.unsigned_abs() as f64 * scale,
            Path::Walk { sq_from_start, x, .. } => sq_from_start[*x].sqrt(),
        }
    }

    #[inline]
    fn sq_displacement(&self) -> f64 {
        match self {
            Path::Scalar { scale, k, .. } => (*k as f64 * scale).powi(2),
            Path::Walk { sq_from_start, x, .. } => sq_from_start[*x],
        }
    }

    /// `‖M_t‖` when `M_0` has norm `offset`. Scalar paths move along the
    /// line through `M_0`; walk paths add the offset in a coordinate
    /// orthogonal to the embedding.
    #[inline]
    fn norm_from(&self, offset: f64) -> f64 {
        match self {
            Path::Scalar { scale, k, .. } => (offset + *k as f64 * scale).abs(),
            Path::Walk { sq_from_start, x, .. } => (offset * offset + sq_from_start[*x]).sqrt(),
        }
    }
}

/// Precomputed data shared by all paths of a spec.
struct Sampler<'a> {
    spec: MartingaleSpec<'a>,
    sq_from_start: Vec<f64>,
}

impl<'a> Sampler<'a> {
    fn new(spec: MartingaleSpec<'a>) -> Result<Self> {
        spec.validate()?;
        let sq_from_start = match spec {
            MartingaleSpec::Embedded { embedding, x0, .. } => {
                (0..embedding.n()).map(|y| embedding.sq_distance(x0, y)).collect()
            }
            _ => Vec::new(),
        };
        Ok(Sampler { spec, sq_from_start })
    }

    fn path(&self) -> Path<'_> {
        match self.spec {
            MartingaleSpec::SrwOnIntegers => Path::Scalar {
                holding: None,
                scale: 1.0,
                k: 0,
            },
            MartingaleSpec::LazySrw { holding } => Path::Scalar {
                holding: Some(holding),
                scale: self.spec.step_bound(),
                k: 0,
            },
            MartingaleSpec::Embedded { kernel, x0, .. } => Path::Walk {
                kernel,
                sq_from_start: &self.sq_from_start,
                x: x0,
            },
        }
    }
}

fn rng_for(seed: u64, block: u64, i: usize) -> TrajectoryRng {
    TrajectoryRng::new(seed, block * AUX_STREAM + i as u64)
}

fn merged(parts: Vec<Vec<Moments>>, len: usize) -> Vec<Moments> {
    let mut out = vec![Moments::default(); len];
    for part in parts {
        out.iter_mut().zip(&part).for_each(|(a, b)| a.merge(b));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MartingaleSummary {
    pub family: String,
    pub step_bound: f64,
    pub dimension: usize,
    pub t_max: u64,
    pub n_samples: u64,
    pub seed: u64,
    /// `E‖M_t - M_0‖²` for `t = 0..=t_max`; equals `t` for true martingales.
    pub mean_sq_disp: Vec<f64>,
    pub se_sq_disp: Vec<f64>,
    pub mean_abs_disp: Vec<f64>,
    pub se_abs_disp: Vec<f64>,
}

/// Simulates `n_samples` paths of length `t_max`. Chunk results are merged
/// in chunk order, so the summary does not depend on `workers`.
pub fn simulate_martingale(
    spec: MartingaleSpec<'_>,
    t_max: u64,
    n_samples: u64,
    seed: u64,
    workers: usize,
) -> Result<MartingaleSummary> {
    if n_samples < 1 {
        return Err(Error::Config("n_samples must be at least 1".into()));
    }
    let sampler = Sampler::new(spec)?;
    let len = t_max as usize + 1;
    let parts = map_chunks(n_samples as usize, CHUNK, workers, |range| {
        let mut sq = vec![Moments::default(); len];
        let mut abs = vec![Moments::default(); len];
        for i in range {
            let mut rng = rng_for(seed, BLOCK_SUMMARY, i);
            let mut path = sampler.path();
            for t in 0..len {
                if t > 0 {
                    path.step(&mut rng);
                }
                sq[t].push(path.sq_displacement());
                abs[t].push(path.displacement());
            }
        }
        sq.extend(abs);
        sq
    });
    let all = merged(parts, 2 * len);
    let (sq, abs) = all.split_at(len);
    Ok(MartingaleSummary {
        family: spec.name().into(),
        step_bound: spec.step_bound(),
        dimension: spec.dimension(),
        t_max,
        n_samples,
        seed,
        mean_sq_disp: sq.iter().map(Moments::mean).collect(),
        se_sq_disp: sq.iter().map(Moments::std_error).collect(),
        mean_abs_disp: abs.iter().map(Moments::mean).collect(),
        se_abs_disp: abs.iter().map(Moments::std_error).collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YuvalParams {
    /// `‖M_0‖`.
    pub offset: f64,
    /// Upper excursion `R`.
    pub r: f64,
    /// Lower excursion `R' ≤ R`.
    pub r_prime: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MartingaleParams {
    pub n_samples: u64,
    pub seed: u64,
    /// Radii `R` for the hitting-time check.
    #[serde(default)]
    pub hit_radii: Vec<f64>,
    /// Paths still running at this many steps count as censored.
    pub step_cap: u64,
    /// Horizon `T` of the `L^1` check; 0 skips it.
    #[serde(default)]
    pub l1_horizon: u64,
    #[serde(default)]
    pub yuval: Option<YuvalParams>,
    /// Horizon `T` of the occupation check.
    #[serde(default)]
    pub occ_horizon: u64,
    #[serde(default)]
    pub occ_epsilons: Vec<f64>,
    #[serde(default = "crate::walker::default_c_occ")]
    pub c_occ: f64,
    #[serde(default = "crate::walker::default_sigmas")]
    pub sigmas: f64,
    #[serde(default = "crate::walker::default_censor_limit")]
    pub censor_limit: f64,
    #[serde(default)]
    pub workers: usize,
}

impl MartingaleParams {
    pub fn new(n_samples: u64, seed: u64) -> Self {
        MartingaleParams {
            n_samples,
            seed,
            hit_radii: Vec::new(),
            step_cap: 100_000,
            l1_horizon: 0,
            yuval: None,
            occ_horizon: 0,
            occ_epsilons: Vec::new(),
            c_occ: crate::walker::default_c_occ(),
            sigmas: crate::walker::default_sigmas(),
            censor_limit: crate::walker::default_censor_limit(),
            workers: 0,
        }
    }
}

/// Integer tallies of a stopping-time experiment.
#[derive(Clone, Copy, Default)]
struct Tally {
    n: u64,
    sum: u64,
    sum_sq: u128,
    censored: u64,
    hits: u64,
}

impl Tally {
    fn merge(mut self, o: Tally) -> Tally {
        self.n += o.n;
        self.sum += o.sum;
        self.sum_sq += o.sum_sq;
        self.censored += o.censored;
        self.hits += o.hits;
        self
    }

    fn mean_se(&self) -> (f64, f64) {
        let n = self.n as f64;
        let mean = self.sum as f64 / n;
        if self.n < 2 {
            return (mean, 0.0);
        }
        let var = ((self.sum_sq as f64 - n * mean * mean) / (n - 1.0)).max(0.0);
        (mean, (var / n).sqrt())
    }

    fn censored_fraction(&self) -> f64 {
        self.censored as f64 / self.n as f64
    }
}

fn tally<F>(params: &MartingaleParams, f: F) -> Tally
where
    F: Fn(usize) -> (Option<u64>, bool) + Sync + Send,
{
    map_chunks(params.n_samples as usize, CHUNK, params.workers, |range| {
        let mut t = Tally::default();
        for i in range {
            let (time, hit) = f(i);
            t.n += 1;
            match time {
                Some(s) => {
                    t.sum += s;
                    t.sum_sq += (s as u128) * (s as u128);
                }
                None => t.censored += 1,
            }
            t.hits += hit as u64;
        }
        t
    })
    .into_iter()
    .fold(Tally::default(), Tally::merge)
}

fn censored_note(fraction: f64) -> String {
    format!("{:.2}% of paths censored", 100.0 * fraction)
}

/// Runs every configured lemma check.
///
/// - `mghit[R]`: `R² - ci ≤ Ê[τ_R] ≤ (R+B)² + ci`.
/// - `l1mg[T]`: `Ê‖M_T - M_0‖ + ci ≥ √((T-B)/8)`.
/// - `yuval`: `p̂ + ci ≥ R'/(2R+B)` from `‖M_0‖ = offset`.
/// - `mgocc[eps]`: `(1/T)Σ_{t≤T} P̂[‖M_t‖ ≤ ε√T] - ci ≤ C_occ·ε` for `ε ≥ B/√T`.
///
/// Stopping-time checks whose censored fraction exceeds `censor_limit` are
/// inconclusive.
pub fn verify_martingale_lemmas(spec: MartingaleSpec<'_>, params: &MartingaleParams) -> Result<Vec<NamedCheck>> {
    if params.n_samples < 1 {
        return Err(Error::Config("n_samples must be at least 1".into()));
    }
    let sampler = Sampler::new(spec)?;
    let b = spec.step_bound();
    let sigmas = params.sigmas;
    let mut out = Vec::new();

    for (j, &r) in params.hit_radii.iter().enumerate() {
        let block = BLOCK_HIT + j as u64;
        let t = tally(params, |i| {
            let mut rng = rng_for(params.seed, block, i);
            let mut path = sampler.path();
            for s in 0..=params.step_cap {
                if path.displacement() >= r {
                    return (Some(s), true);
                }
                path.step(&mut rng);
            }
            (None, false)
        });
        let (mean, se) = t.mean_se();
        let ci = sigmas * se;
        let (lo, hi) = (r * r, (r + b) * (r + b));
        let name = format!("mghit[R={r}]");
        let check = if t.censored_fraction() > params.censor_limit {
            NamedCheck::new(name, Verdict::Inconclusive, mean, lo, ci).with_note(censored_note(t.censored_fraction()))
        } else {
            NamedCheck::new(
                name,
                Verdict::from_bool(lo - ci <= mean && mean <= hi + ci),
                mean,
                lo,
                ci,
            )
            .with_note(format!("interval [{lo}, {hi}]"))
        };
        out.push(check);
    }

    if params.l1_horizon > 0 {
        let horizon = params.l1_horizon;
        let parts = map_chunks(params.n_samples as usize, CHUNK, params.workers, |range| {
            let mut m = Moments::default();
            for i in range {
                let mut rng = rng_for(params.seed, BLOCK_L1, i);
                let mut path = sampler.path();
                for _ in 0..horizon {
                    path.step(&mut rng);
                }
                m.push(path.displacement());
            }
            vec![m]
        });
        let m = merged(parts, 1)[0];
        let ci = sigmas * m.std_error();
        let bound = ((horizon as f64 - b).max(0.0) / 8.0).sqrt();
        out.push(NamedCheck::new(
            format!("l1mg[T={horizon}]"),
            Verdict::from_bool(m.mean() + ci >= bound),
            m.mean(),
            bound,
            ci,
        ));
    }

    if let Some(y) = &params.yuval {
        if !(y.r >= y.r_prime && y.r_prime >= 0.0 && y.offset >= 0.0) {
            return Err(Error::Config("yuval needs R ≥ R' ≥ 0 and offset ≥ 0".into()));
        }
        let (top, bottom) = (y.offset + y.r, y.offset - y.r_prime);
        let t = tally(params, |i| {
            let mut rng = rng_for(params.seed, BLOCK_YUVAL, i);
            let mut path = sampler.path();
            for s in 0..=params.step_cap {
                let norm = path.norm_from(y.offset);
                if norm >= top {
                    return (Some(s), true);
                }
                if norm <= bottom {
                    return (Some(s), false);
                }
                path.step(&mut rng);
            }
            (None, false)
        });
        let p = t.hits as f64 / t.n as f64;
        let ci = sigmas * (p * (1.0 - p) / t.n as f64).sqrt();
        let bound = y.r_prime / (2.0 * y.r + b);
        let name = format!("yuval[offset={},R={},R'={}]", y.offset, y.r, y.r_prime);
        let check = if t.censored_fraction() > params.censor_limit {
            NamedCheck::new(name, Verdict::Inconclusive, p, bound, ci).with_note(censored_note(t.censored_fraction()))
        } else {
            NamedCheck::new(name, Verdict::from_bool(p + ci >= bound), p, bound, ci)
        };
        out.push(check);
    }

    if params.occ_horizon > 0 && !params.occ_epsilons.is_empty() {
        let horizon = params.occ_horizon;
        let root = (horizon as f64).sqrt();
        let radii: Vec<f64> = params.occ_epsilons.iter().map(|e| e * root).collect();
        let parts = map_chunks(params.n_samples as usize, CHUNK, params.workers, |range| {
            let mut acc = vec![Moments::default(); radii.len()];
            let mut inside = vec![0u64; radii.len()];
            for i in range {
                let mut rng = rng_for(params.seed, BLOCK_OCC, i);
                let mut path = sampler.path();
                inside.iter_mut().for_each(|c| *c = 0);
                for s in 0..=horizon {
                    if s > 0 {
                        path.step(&mut rng);
                    }
                    let norm = path.displacement();
                    for (c, &r) in inside.iter_mut().zip(&radii) {
                        *c += (norm <= r) as u64;
                    }
                }
                for (m, &c) in acc.iter_mut().zip(&inside) {
                    m.push(c as f64 / horizon as f64);
                }
            }
            acc
        });
        let acc = merged(parts, radii.len());
        for (&eps, m) in params.occ_epsilons.iter().zip(&acc) {
            let fraction = m.mean();
            let ci = sigmas * m.std_error();
            let bound = params.c_occ * eps;
            let name = format!("mgocc[T={horizon},eps={eps}]");
            let check = if eps < b / root {
                NamedCheck::new(name, Verdict::Inconclusive, fraction, bound, ci).with_note("requires eps ≥ B/√T")
            } else {
                NamedCheck::new(name, Verdict::from_bool(fraction - ci <= bound), fraction, bound, ci)
                    .with_note(format!("fraction/eps = {:.3}", fraction / eps))
            };
            out.push(check);
        }
    }
    Ok(out)
}
