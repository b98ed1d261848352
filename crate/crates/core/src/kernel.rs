//! Symmetric stochastic kernels and their quadratic forms.

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Below this fraction of `‖ψ‖²` a Dirichlet form is treated as zero.
const DEGENERATE_FORM: f64 = 1e-14;

/// Sparse symmetric stochastic matrix over the vertices of a graph.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    probs: Vec<f64>,
    p_star: f64,
    degree: usize,
}

/// Simple random walk: `P(x,y) = mult(x,y)/d`, loop slots included.
///
/// Each probability is computed as `mult as f64 / d as f64` from an integer
/// multiplicity that is the same in both directions, so `P(x,y)` and `P(y,x)`
/// are bit-identical.
pub fn srw_kernel(graph: &Graph) -> Kernel {
    let n = graph.n();
    let d = graph.degree();
    let mut row_ptr = Vec::with_capacity(n + 1);
    let mut cols = Vec::with_capacity(n * d);
    let mut probs = Vec::with_capacity(n * d);
    let mut p_star = f64::INFINITY;
    let mut slots: Vec<u32> = Vec::with_capacity(d);
    row_ptr.push(0);
    for x in 0..n {
        slots.clear();
        slots.extend_from_slice(graph.neighbors(x));
        slots.sort_unstable();
        let mut i = 0;
        while i < slots.len() {
            let y = slots[i];
            let mut j = i;
            while j < slots.len() && slots[j] == y {
                j += 1;
            }
            let p = (j - i) as f64 / d as f64;
            if y as usize != x {
                p_star = p_star.min(p);
            }
            cols.push(y);
            probs.push(p);
            i = j;
        }
        row_ptr.push(cols.len());
    }
    Kernel {
        n,
        row_ptr,
        cols,
        probs,
        p_star,
        degree: d,
    }
}

impl Kernel {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Minimum transition probability across a non-loop edge.
    pub fn p_star(&self) -> f64 {
        self.p_star
    }

    /// Degree of the underlying graph.
    pub fn degree(&self) -> usize {
        self.degree
    }

    /// `(columns, probabilities)` of row `x`, columns ascending.
    pub fn row(&self, x: usize) -> (&[u32], &[f64]) {
        let r = self.row_ptr[x]..self.row_ptr[x + 1];
        (&self.cols[r.clone()], &self.probs[r])
    }

    /// Draws the next state from row `x` given a uniform `u ∈ [0, 1)`.
    #[inline]
    pub fn sample_next(&self, x: usize, u: f64) -> usize {
        let (cols, probs) = self.row(x);
        let mut acc = 0.0;
        for (&y, &p) in cols.iter().zip(probs) {
            acc += p;
            if u < acc {
                return y as usize;
            }
        }
        *cols.last().expect("rows are non-empty") as usize
    }

    fn check_len(&self, v: &[f64]) -> Result<()> {
        if v.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                got: v.len(),
            });
        }
        Ok(())
    }

    /// `out = P v`. Panics on length mismatch.
    pub fn apply_into(&self, v: &[f64], out: &mut [f64]) {
        assert_eq!(v.len(), self.n);
        assert_eq!(out.len(), self.n);
        for (x, o) in out.iter_mut().enumerate() {
            let (cols, probs) = self.row(x);
            *o = cols.iter().zip(probs).map(|(&y, &p)| p * v[y as usize]).sum();
        }
    }

    /// `(I - P) v` evaluated as `Σ_y P(x,y)(v(x) - v(y))`, exact zero on
    /// constants.
    pub fn laplacian_into(&self, v: &[f64], out: &mut [f64]) {
        assert_eq!(v.len(), self.n);
        assert_eq!(out.len(), self.n);
        for (x, o) in out.iter_mut().enumerate() {
            let (cols, probs) = self.row(x);
            let vx = v[x];
            *o = cols.iter().zip(probs).map(|(&y, &p)| p * (vx - v[y as usize])).sum();
        }
    }

    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.check_len(v)?;
        let mut out = vec![0.0; self.n];
        self.apply_into(v, &mut out);
        Ok(out)
    }

    pub fn laplacian(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.check_len(v)?;
        let mut out = vec![0.0; self.n];
        self.laplacian_into(v, &mut out);
        Ok(out)
    }

    /// `⟨ψ, (I - P) ψ⟩`.
    pub fn dirichlet_form(&self, psi: &[f64]) -> Result<f64> {
        let lap = self.laplacian(psi)?;
        Ok(dot(psi, &lap))
    }

    /// `½ Σ_{x,y} P(x,y) (ψ(x) - ψ(y))²`, the edge-sum form of the same
    /// quantity.
    pub fn dirichlet_form_edges(&self, psi: &[f64]) -> Result<f64> {
        self.check_len(psi)?;
        let mut total = 0.0;
        for x in 0..self.n {
            let (cols, probs) = self.row(x);
            for (&y, &p) in cols.iter().zip(probs) {
                let diff = psi[x] - psi[y as usize];
                total += p * diff * diff;
            }
        }
        Ok(0.5 * total)
    }

    /// `‖(I - P) ψ‖²`.
    pub fn laplacian_norm_sq(&self, psi: &[f64]) -> Result<f64> {
        let lap = self.laplacian(psi)?;
        Ok(dot(&lap, &lap))
    }

    /// `‖(I - P) ψ‖² / ⟨ψ, (I - P) ψ⟩`.
    pub fn rayleigh_ratio(&self, psi: &[f64]) -> Result<f64> {
        let lap = self.laplacian(psi)?;
        let form = dot(psi, &lap);
        if is_degenerate(form, psi) {
            return Err(Error::DegeneratePotential);
        }
        Ok(dot(&lap, &lap) / form)
    }

    /// `⟨ψ, (I - P^t) ψ⟩`.
    pub fn quadratic_under_power(&self, psi: &[f64], t: u64) -> Result<f64> {
        Ok(self.quadratic_under_powers(psi, &[t])?[0])
    }

    /// `⟨ψ, (I - P^t) ψ⟩` for every `t` in `times` (any order), sharing one
    /// pass of `max(times)` kernel applications.
    ///
    /// Evaluated as `⟨(I - P)ψ, Σ_{i<t} P^i ψ⟩`, which stays accurate when `ψ`
    /// is smooth and the form is small relative to `‖ψ‖²`.
    pub fn quadratic_under_powers(&self, psi: &[f64], times: &[u64]) -> Result<Vec<f64>> {
        self.check_len(psi)?;
        let lap = self.laplacian(psi)?;
        let mut order: Vec<usize> = (0..times.len()).collect();
        order.sort_by_key(|&i| times[i]);
        let mut out = vec![0.0; times.len()];
        let mut power = psi.to_vec();
        let mut scratch = vec![0.0; self.n];
        let mut partial = 0.0;
        let mut done = 0u64;
        for i in order {
            while done < times[i] {
                partial += dot(&lap, &power);
                self.apply_into(&power, &mut scratch);
                std::mem::swap(&mut power, &mut scratch);
                done += 1;
            }
            out[i] = partial;
        }
        Ok(out)
    }
}

pub(crate) fn is_degenerate(form: f64, psi: &[f64]) -> bool {
    !(form > DEGENERATE_FORM * dot(psi, psi))
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
