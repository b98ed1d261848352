//! Escape potentials and the lower-bound curves they induce.
//!
//! A potential `ψ` with small Rayleigh ratio `‖(I-P)ψ‖² / ⟨ψ,(I-P)ψ⟩`
//! certifies `E[dist(X_0,X_t)²] ≥ p_* ⟨ψ,(I-P^t)ψ⟩ / ⟨ψ,(I-P)ψ⟩`. Two
//! constructions are provided: the second eigenfunction (see
//! [`crate::spectral`]) and the heat-flow power sum `Σ_{i<k} P^i f` of a
//! nearly invariant seed `f`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Family, Graph};
use crate::kernel::{dot, norm, Kernel};

/// Seeds must have unit norm and zero mean to this tolerance.
const SEED_TOL: f64 = 1e-9;
/// Extra dyadic levels searched past the starting level before giving up.
pub const SEARCH_DEPTH: u32 = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialResult {
    pub phi: Vec<f64>,
    /// Number of power-sum terms, `2^m`.
    pub k: u64,
    /// Selected dyadic level `m`.
    pub m: u32,
    /// Starting level: `2^ell θ ≤ 1/2 ≤ 2^(ell+1) θ`.
    pub ell: u32,
    /// Measured `‖Pf - f‖`.
    pub theta: f64,
    /// Rayleigh ratio of `phi`.
    pub ratio: f64,
    pub seed_norm: f64,
    /// `a_j = ⟨φ_{2^j}, f⟩` for `j = ell..=m+1`.
    pub a: Vec<f64>,
}

impl PotentialResult {
    /// `2 a_m - a_{m+1}`, the quantity the dyadic search drives above
    /// `1/(8θ)`.
    pub fn selected_gap(&self) -> f64 {
        let n = self.a.len();
        2.0 * self.a[n - 2] - self.a[n - 1]
    }

    pub fn threshold(&self) -> f64 {
        1.0 / (8.0 * self.theta)
    }
}

/// Mean-zero unit vector proportional to the indicator of the sub-box
/// `[0, box_side)^dim` of a cycle or torus.
pub fn folner_indicator(graph: &Graph, box_side: usize) -> Result<Vec<f64>> {
    let side = match graph.family() {
        Family::Cycle { n } | Family::Torus { n, .. } => *n,
        other => return Err(Error::UnsupportedFamily(other.name().into())),
    };
    if box_side == 0 || box_side >= side {
        return Err(Error::InvalidSpec(format!("box side {box_side} must lie in 1..{side}")));
    }
    let n = graph.n();
    let inside: Vec<bool> = (0..n)
        .map(|x| {
            graph
                .coords(x)
                .expect("cycle and torus vertices have coordinates")
                .iter()
                .all(|&c| c < box_side)
        })
        .collect();
    let count = inside.iter().filter(|&&b| b).count() as f64;
    let level = count / n as f64;
    let mut f: Vec<f64> = inside.iter().map(|&b| if b { 1.0 - level } else { -level }).collect();
    let s = norm(&f);
    f.iter_mut().for_each(|v| *v /= s);
    Ok(f)
}

/// Heat-flow potential `φ_k = Σ_{i<k} P^i f` with the dyadic choice of `k`.
///
/// Starting from the level `ell` with `2^ell θ ≤ 1/2 ≤ 2^(ell+1) θ`, the
/// search returns `φ_{2^m}` for the smallest `m ≥ ell` with
/// `2 a_m - a_{m+1} ≥ 1/(8θ)`, where `a_j = ⟨φ_{2^j}, f⟩`. Such an `m` exists
/// whenever the Cesàro means of `⟨P^i f, f⟩` vanish, which on a finite
/// connected graph holds for every mean-zero seed, and then the Rayleigh
/// ratio of the result is at most `32θ`.
pub fn heat_flow_potential(kernel: &Kernel, f: &[f64], theta_cap: f64) -> Result<PotentialResult> {
    let n = kernel.n();
    if f.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: f.len(),
        });
    }
    let seed_norm = norm(f);
    if (seed_norm - 1.0).abs() > SEED_TOL {
        return Err(Error::InvalidSeed(format!("‖f‖ = {seed_norm}, expected 1")));
    }
    let mass: f64 = f.iter().sum();
    if mass.abs() > SEED_TOL * (n as f64).sqrt() {
        return Err(Error::InvalidSeed(format!("⟨f, 1⟩ = {mass}, expected 0")));
    }
    let theta = norm(&kernel.laplacian(f)?);
    if theta == 0.0 {
        return Err(Error::DegenerateSeed);
    }
    if theta >= 0.5 {
        return Err(Error::ThetaTooLarge { theta });
    }
    if theta > theta_cap {
        return Err(Error::ThetaAboveCap { theta, cap: theta_cap });
    }

    let mut ell = 0u32;
    while (1u64 << (ell + 1)) as f64 * theta <= 0.5 {
        ell += 1;
    }
    let threshold = 1.0 / (8.0 * theta);
    let m_max = ell + SEARCH_DEPTH;

    let mut sum = PowerSum::new(kernel, f);
    sum.extend_to(1u64 << ell);
    let mut a = vec![dot(&sum.phi, f)];
    for m in ell..m_max {
        let previous = sum.phi.clone();
        sum.extend_to(1u64 << (m + 1));
        a.push(dot(&sum.phi, f));
        let (a_m, a_next) = (a[a.len() - 2], a[a.len() - 1]);
        if 2.0 * a_m - a_next >= threshold {
            let ratio = kernel.rayleigh_ratio(&previous)?;
            return Ok(PotentialResult {
                phi: previous,
                k: 1u64 << m,
                m,
                ell,
                theta,
                ratio,
                seed_norm,
                a,
            });
        }
    }
    Err(Error::SearchExhausted { m_max })
}

/// Incremental `Σ_{i<terms} P^i f`.
struct PowerSum<'a> {
    kernel: &'a Kernel,
    phi: Vec<f64>,
    power: Vec<f64>,
    scratch: Vec<f64>,
    terms: u64,
}

impl<'a> PowerSum<'a> {
    fn new(kernel: &'a Kernel, f: &[f64]) -> Self {
        PowerSum {
            kernel,
            phi: vec![0.0; f.len()],
            power: f.to_vec(),
            scratch: vec![0.0; f.len()],
            terms: 0,
        }
    }

    fn extend_to(&mut self, terms: u64) {
        while self.terms < terms {
            self.phi.iter_mut().zip(&self.power).for_each(|(p, &x)| *p += x);
            self.kernel.apply_into(&self.power, &mut self.scratch);
            std::mem::swap(&mut self.power, &mut self.scratch);
            self.terms += 1;
        }
    }
}

/// Lower-bound curves on a common time grid. A bound that was not computed
/// is an empty vector.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct BoundCurve {
    pub times: Vec<u64>,
    pub p_star: f64,
    /// `p_* ⟨ψ,(I-P^t)ψ⟩ / ⟨ψ,(I-P)ψ⟩`, a bound on `E[dist²]`.
    pub exact_bound: Vec<f64>,
    /// `p_* (t - t² R / 2)` with `R` the Rayleigh ratio of `ψ`.
    pub quadratic_bound: Vec<f64>,
    /// `2 p_* ⟨ψ,(I-P^t)ψ⟩ / ⟨ψ,(I-P)ψ⟩`, a bound on `E[(dist + 1)²]`.
    pub improved_bound: Vec<f64>,
    /// `p_* Σ_{i<t} λ^i`, a bound on `E[dist²]`.
    pub geometric_bound: Vec<f64>,
}

impl BoundCurve {
    /// Takes the geometric bound from `other`, which must share the grid.
    pub fn with_geometric(mut self, other: &BoundCurve) -> Result<Self> {
        if other.times != self.times {
            return Err(Error::GridMismatch("geometric curve uses a different time grid".into()));
        }
        self.geometric_bound = other.geometric_bound.clone();
        Ok(self)
    }
}

fn check_times(times: &[u64]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::GridMismatch("empty time grid".into()));
    }
    Ok(())
}

/// Exact, quadratic and improved lower bounds from a potential `ψ`.
pub fn escape_lower_bound(kernel: &Kernel, psi: &[f64], times: &[u64]) -> Result<BoundCurve> {
    check_times(times)?;
    let ratio = kernel.rayleigh_ratio(psi)?;
    let form = kernel.dirichlet_form(psi)?;
    let quadratic = kernel.quadratic_under_powers(psi, times)?;
    let p = kernel.p_star();
    let exact_bound: Vec<f64> = quadratic.iter().map(|q| p * q / form).collect();
    Ok(BoundCurve {
        times: times.to_vec(),
        p_star: p,
        improved_bound: exact_bound.iter().map(|e| 2.0 * e).collect(),
        exact_bound,
        quadratic_bound: times
            .iter()
            .map(|&t| {
                let t = t as f64;
                p * (t - t * t * ratio / 2.0)
            })
            .collect(),
        geometric_bound: Vec::new(),
    })
}

/// Geometric-series bound `p_* (1 + λ + … + λ^(t-1))` from the second
/// eigenvalue of a finite transitive kernel.
pub fn finite_bound_curve(lambda: f64, p_star: f64, times: &[u64]) -> Result<BoundCurve> {
    check_times(times)?;
    if !(lambda > -1.0 && lambda < 1.0) {
        return Err(Error::OutOfRange {
            value: lambda,
            range: "(-1, 1)",
        });
    }
    if !(p_star > 0.0 && p_star <= 1.0) {
        return Err(Error::OutOfRange {
            value: p_star,
            range: "(0, 1]",
        });
    }
    let geometric_bound: Vec<f64> = times
        .iter()
        .map(|&t| {
            let mut sum = 0.0;
            let mut power = 1.0;
            for _ in 0..t {
                sum += power;
                power *= lambda;
            }
            p_star * sum
        })
        .collect();
    let relax = 1.0 / (1.0 - lambda);
    for (&t, &g) in times.iter().zip(&geometric_bound) {
        debug_assert!(t as f64 > relax || g >= p_star * t as f64 / 2.0 * (1.0 - 1e-12));
    }
    Ok(BoundCurve {
        times: times.to_vec(),
        p_star,
        geometric_bound,
        ..Default::default()
    })
}

/// `p_* t / 2`, valid while `t ≤ 1/(32(1 - λ))`.
pub fn nearly_amenable_bound(lambda: f64, p_star: f64, t: u64) -> Result<f64> {
    if !(lambda < 1.0) {
        return Err(Error::OutOfRange {
            value: lambda,
            range: "λ < 1",
        });
    }
    let window = 1.0 / (32.0 * (1.0 - lambda));
    // relative slack absorbs rounding in 1 - λ
    if t as f64 > window * (1.0 + 1e-9) {
        return Err(Error::WindowExceeded { t, window });
    }
    Ok(p_star * t as f64 / 2.0)
}
