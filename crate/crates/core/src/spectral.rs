//! Second-largest eigenpair of a symmetric stochastic kernel.
//!
//! Power iteration runs on the shifted operator `S = (I + P)/2`, whose
//! spectrum is `(1 + λ_i)/2 ∈ [0, 1]`. On the complement of constants the top
//! eigenvalue of `S` corresponds to the second-largest signed eigenvalue of
//! `P`, so the `-1` eigenvalue of bipartite graphs never wins.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Family, Graph};
use crate::kernel::{dot, norm, Kernel};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 1_000_000;

const START_SEED: u64 = 0x005E_ED0F_5EC7;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralResult {
    pub lambda: f64,
    /// Unit eigenvector orthogonal to constants.
    pub psi: Vec<f64>,
    /// `‖Pψ - λψ‖`.
    pub residual: f64,
    pub iterations: usize,
}

impl SpectralResult {
    /// `(1 - λ)^-1`.
    pub fn relaxation_time(&self) -> f64 {
        1.0 / (1.0 - self.lambda)
    }
}

fn deflate(v: &mut [f64]) {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    v.iter_mut().for_each(|x| *x -= mean);
}

fn normalize(v: &mut [f64]) -> f64 {
    let s = norm(v);
    if s > 0.0 {
        v.iter_mut().for_each(|x| *x /= s);
    }
    s
}

/// Deflated power iteration for the second-largest eigenvalue of `P`.
///
/// Any unit vector of the top eigenspace is accepted when the eigenvalue is
/// degenerate.
pub fn second_eigenpair(kernel: &Kernel, tol: f64, max_iter: usize) -> Result<SpectralResult> {
    let n = kernel.n();
    if n < 2 {
        return Err(Error::NoSecondEigenvalue);
    }
    if !(tol > 0.0) {
        return Err(Error::OutOfRange {
            value: tol,
            range: "tol > 0",
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(START_SEED);
    let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    deflate(&mut v);
    normalize(&mut v);

    let mut pv = vec![0.0; n];
    let mut residual = f64::INFINITY;
    for iteration in 0..=max_iter {
        kernel.apply_into(&v, &mut pv);
        // s = (v + Pv)/2, reusing the buffer
        pv.iter_mut().zip(&v).for_each(|(s, &x)| *s = 0.5 * (*s + x));
        deflate(&mut pv);
        let mu = dot(&v, &pv);
        // Pv - λv = 2(s - μv)
        residual = 2.0 * pv.iter().zip(&v).map(|(s, x)| (s - mu * x).powi(2)).sum::<f64>().sqrt();
        if residual <= tol {
            return Ok(SpectralResult {
                lambda: 2.0 * mu - 1.0,
                psi: v,
                residual,
                iterations: iteration,
            });
        }
        if normalize(&mut pv) == 0.0 {
            // S annihilates v: every non-constant eigenvalue of P is -1.
            return Ok(SpectralResult {
                lambda: -1.0,
                psi: v,
                residual: 0.0,
                iterations: iteration,
            });
        }
        std::mem::swap(&mut v, &mut pv);
    }
    Err(Error::NoConvergence {
        iterations: max_iter,
        residual,
    })
}

/// Second eigenpair from the character table of an abelian family, for
/// graphs too large for power iteration. The residual is measured, not
/// assumed. Returns `None` for non-abelian families.
pub fn closed_form_eigenpair(graph: &Graph, kernel: &Kernel) -> Option<SpectralResult> {
    let d = graph.degree() as f64;
    let loops = graph.spec().self_loops as f64;
    let n = graph.n();
    let (lambda, mut psi): (f64, Vec<f64>) = match *graph.family() {
        Family::Cycle { n: side } | Family::Torus { n: side, .. } => {
            let dim = graph.coords(0)?.len() as f64;
            let w = 2.0 * std::f64::consts::PI / side as f64;
            let lambda = (loops + 2.0 * (dim - 1.0) + 2.0 * w.cos()) / d;
            (lambda, (0..n).map(|x| (w * (x % side) as f64).cos()).collect())
        }
        Family::Hypercube { k } => {
            let lambda = (loops + k as f64 - 2.0) / d;
            (lambda, (0..n).map(|x| if x & 1 == 0 { 1.0 } else { -1.0 }).collect())
        }
        Family::Complete { .. } => {
            let mut v = vec![0.0; n];
            v[0] = 1.0;
            v[1] = -1.0;
            ((loops - 1.0) / d, v)
        }
        _ => return None,
    };
    deflate(&mut psi);
    normalize(&mut psi);
    let p_psi = kernel.apply(&psi).ok()?;
    let residual = norm(&p_psi.iter().zip(&psi).map(|(a, b)| a - lambda * b).collect::<Vec<_>>());
    Some(SpectralResult {
        lambda,
        psi,
        residual,
        iterations: 0,
    })
}
