//! Normalized equivariant embedding of a Cayley graph into `l²(group)`.
//!
//! For a potential `ψ` the embedding is `Ψ(x)[g] = ψ(g·x) / √(2⟨ψ,(I-P)ψ⟩)`,
//! using counting measure on the group. Left translation by `h` permutes the
//! coordinates (`Ψ(h·x)[g] = Ψ(x)[g·h]`), so every row difference norm is
//! invariant under the action. Writing the coordinate as `ψ(g⁻¹·x)` instead
//! reindexes the columns by inversion and changes no norm.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::check::Verdict;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::kernel::{is_degenerate, Kernel};
use crate::stats::histogram_mean_se;
use crate::walker::Trajectories;

/// Upper limit on stored entries `n · m`.
pub const MAX_ENTRIES: usize = 100_000_000;
/// Vertices, besides vertex 0, at which the defect is re-evaluated.
const DEFECT_SPOT_CHECKS: usize = 8;
const SPOT_SEED: u64 = 0xDEF_EC7;

#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    n: usize,
    m: usize,
    /// Row-major `n × m`.
    matrix: Vec<f64>,
    norm_const: f64,
    source_psi: Vec<f64>,
}

impl Embedding {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of group elements (columns).
    pub fn m(&self) -> usize {
        self.m
    }

    /// `√(2⟨ψ,(I-P)ψ⟩)`.
    pub fn norm_const(&self) -> f64 {
        self.norm_const
    }

    pub fn source_psi(&self) -> &[f64] {
        &self.source_psi
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.matrix[x * self.m..(x + 1) * self.m]
    }

    pub fn entry(&self, x: usize, g: usize) -> f64 {
        self.matrix[x * self.m + g]
    }

    /// `‖Ψ(x) - Ψ(y)‖²`.
    pub fn sq_distance(&self, x: usize, y: usize) -> f64 {
        self.row(x).iter().zip(self.row(y)).map(|(a, b)| (a - b).powi(2)).sum()
    }

    /// `Σ_y P(x,y) Ψ(y)`.
    pub fn averaged_row(&self, kernel: &Kernel, x: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.m];
        let (cols, probs) = kernel.row(x);
        for (&y, &p) in cols.iter().zip(probs) {
            out.iter_mut().zip(self.row(y as usize)).for_each(|(o, v)| *o += p * v);
        }
        out
    }

    /// Writes one CSV record per vertex: the vertex id, then its `m`
    /// coordinates.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["vertex".to_string()];
        header.extend((0..self.m).map(|g| format!("g{g}")));
        w.write_record(&header)?;
        for x in 0..self.n {
            let mut record = vec![x.to_string()];
            record.extend(self.row(x).iter().map(|v| v.to_string()));
            w.write_record(&record)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Builds `Ψ(x)[g] = ψ(g·x)/√(2⟨ψ,(I-P)ψ⟩)` for all vertices and group
/// elements.
pub fn embed(graph: &Graph, kernel: &Kernel, psi: &[f64]) -> Result<Embedding> {
    let group = graph.group().ok_or(Error::UnsupportedAction)?;
    let n = graph.n();
    if kernel.n() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: kernel.n(),
        });
    }
    let form = kernel.dirichlet_form(psi)?;
    if is_degenerate(form, psi) {
        return Err(Error::DegeneratePotential);
    }
    let m = group.order();
    if n.saturating_mul(m) > MAX_ENTRIES {
        return Err(Error::TooLarge {
            n,
            m,
            limit: MAX_ENTRIES,
        });
    }
    let norm_const = (2.0 * form).sqrt();
    let mut matrix = vec![0.0; n * m];
    matrix.par_chunks_mut(m).enumerate().for_each(|(x, row)| {
        for (g, v) in row.iter_mut().enumerate() {
            *v = psi[group.mul(g, x)] / norm_const;
        }
    });
    Ok(Embedding {
        n,
        m,
        matrix,
        norm_const,
        source_psi: psi.to_vec(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DefectReport {
    /// `Σ_y P(x,y) ‖Ψ(x) - Ψ(y)‖²` per vertex.
    pub local_energy: Vec<f64>,
    /// `‖Ψ(0) - Σ_y P(0,y) Ψ(y)‖²`.
    pub defect: f64,
    /// `(vertex, defect)` at vertex 0 and the spot-check vertices.
    pub defect_samples: Vec<(usize, f64)>,
    /// Largest deviation of a spot-checked defect from `defect`.
    pub defect_spread: f64,
    /// Largest `‖Ψ(x) - Ψ(y)‖` over edges.
    pub lipschitz: f64,
    /// `√(1/p_*)`.
    pub lipschitz_bound: f64,
}

impl DefectReport {
    pub fn max_energy_error(&self) -> f64 {
        self.local_energy.iter().map(|e| (e - 1.0).abs()).fold(0.0, f64::max)
    }
}

fn check_dims(kernel: &Kernel, emb: &Embedding) -> Result<()> {
    if kernel.n() != emb.n {
        return Err(Error::LengthMismatch {
            expected: emb.n,
            got: kernel.n(),
        });
    }
    Ok(())
}

pub fn defect_report(graph: &Graph, kernel: &Kernel, emb: &Embedding) -> Result<DefectReport> {
    check_dims(kernel, emb)?;
    if graph.n() != emb.n {
        return Err(Error::LengthMismatch {
            expected: emb.n,
            got: graph.n(),
        });
    }
    let per_vertex: Vec<(f64, f64)> = (0..emb.n)
        .into_par_iter()
        .map(|x| {
            let (cols, probs) = kernel.row(x);
            let mut energy = 0.0;
            let mut longest = 0.0f64;
            for (&y, &p) in cols.iter().zip(probs) {
                let sq = emb.sq_distance(x, y as usize);
                energy += p * sq;
                if y as usize != x {
                    longest = longest.max(sq);
                }
            }
            (energy, longest)
        })
        .collect();
    let local_energy: Vec<f64> = per_vertex.iter().map(|p| p.0).collect();
    let lipschitz = per_vertex.iter().map(|p| p.1).fold(0.0, f64::max).sqrt();

    let defect_at = |x: usize| -> f64 {
        let avg = emb.averaged_row(kernel, x);
        emb.row(x).iter().zip(&avg).map(|(a, b)| (a - b).powi(2)).sum()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(SPOT_SEED);
    let mut vertices = vec![0];
    vertices.extend((0..DEFECT_SPOT_CHECKS).map(|_| rng.gen_range(0..emb.n)));
    let defect_samples: Vec<(usize, f64)> = vertices.iter().map(|&x| (x, defect_at(x))).collect();
    let defect = defect_samples[0].1;
    let defect_spread = defect_samples.iter().map(|s| (s.1 - defect).abs()).fold(0.0, f64::max);
    Ok(DefectReport {
        local_energy,
        defect,
        defect_samples,
        defect_spread,
        lipschitz,
        lipschitz_bound: (1.0 / kernel.p_star()).sqrt(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MartingaleRow {
    pub t: u64,
    /// Estimate of `E‖Ψ(X_t) - Ψ(X_0)‖²`.
    pub measured: f64,
    pub ci: f64,
    /// Exact value `⟨ψ,(I-P^t)ψ⟩ / ⟨ψ,(I-P)ψ⟩`.
    pub exact: f64,
    /// `t(1 - R t/2)` with `R` the Rayleigh ratio; equals `t` for harmonic maps.
    pub lower: f64,
    pub upper: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MartingaleCheck {
    /// `max_x ‖Σ_y P(x,y)Ψ(y) - λΨ(x)‖` when `λ` was supplied.
    pub one_step_deviation: Option<f64>,
    pub rows: Vec<MartingaleRow>,
    pub verdict: Verdict,
}

/// Checks the martingale structure of `Ψ(X_t)` along sampled walks.
///
/// With `lambda`, every vertex is tested exhaustively for
/// `Σ_y P(x,y)Ψ(y) = λΨ(x)` (within 1e-9), which makes `λ^{-t}Ψ(X_t)` a
/// martingale. At each sampled time the mean of `‖Ψ(X_t) - Ψ(X_0)‖²` must
/// match its exact value and lie in `[t(1 - Rt/2), t]`, both up to
/// `sigmas` standard errors.
pub fn embedded_martingale_check(
    graph: &Graph,
    kernel: &Kernel,
    emb: &Embedding,
    trajectories: &Trajectories,
    lambda: Option<f64>,
    sigmas: f64,
) -> Result<MartingaleCheck> {
    check_dims(kernel, emb)?;
    if graph.n() != emb.n {
        return Err(Error::LengthMismatch {
            expected: emb.n,
            got: graph.n(),
        });
    }
    let one_step_deviation = lambda.map(|lambda| {
        (0..emb.n)
            .into_par_iter()
            .map(|x| {
                let avg = emb.averaged_row(kernel, x);
                avg.iter()
                    .zip(emb.row(x))
                    .map(|(a, v)| (a - lambda * v).powi(2))
                    .sum::<f64>()
                    .sqrt()
            })
            .reduce(|| 0.0, f64::max)
    });

    let psi = &emb.source_psi;
    let ratio = kernel.rayleigh_ratio(psi)?;
    let form = kernel.dirichlet_form(psi)?;
    let exact = kernel.quadratic_under_powers(psi, &trajectories.times)?;
    let x0 = trajectories.x0;
    let sq_from_start: Vec<f64> = (0..emb.n).into_par_iter().map(|y| emb.sq_distance(x0, y)).collect();

    let mut rows = Vec::with_capacity(trajectories.times.len());
    let mut counts = vec![0u64; emb.n];
    for (j, &t) in trajectories.times.iter().enumerate() {
        counts.iter_mut().for_each(|c| *c = 0);
        for i in 0..trajectories.n_samples {
            counts[trajectories.at(i, j)] += 1;
        }
        let (measured, se) = histogram_mean_se(&counts, |y| sq_from_start[y]);
        let ci = sigmas * se;
        let tf = t as f64;
        let exact_t = exact[j] / form;
        let lower = tf * (1.0 - ratio * tf / 2.0);
        let ok = (measured - exact_t).abs() <= ci + 1e-9 * exact_t.max(1.0)
            && measured + ci >= lower - 1e-9
            && measured - ci <= tf + 1e-9;
        rows.push(MartingaleRow {
            t,
            measured,
            ci,
            exact: exact_t,
            lower,
            upper: tf,
            verdict: Verdict::from_bool(ok),
        });
    }
    let mut verdict = Verdict::combine(rows.iter().map(|r| &r.verdict));
    if let Some(dev) = one_step_deviation {
        if dev > 1e-9 {
            verdict = Verdict::Fail;
        } else if verdict == Verdict::Inconclusive {
            verdict = Verdict::Pass;
        }
    }
    Ok(MartingaleCheck {
        one_step_deviation,
        rows,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_graph, translation_action, GraphSpec};
    use crate::kernel::srw_kernel;
    use crate::spectral::{second_eigenpair, DEFAULT_MAX_ITER, DEFAULT_TOL};
    use crate::walker::{sample_trajectories, WalkConfig};

    fn setup(spec: GraphSpec) -> (Graph, Kernel) {
        let g = build_graph(&spec).unwrap();
        let k = srw_kernel(&g);
        (g, k)
    }

    #[test]
    fn cycle4_embedding() {
        let (g, k) = setup(GraphSpec::cycle(4));
        let psi = [1.0, 0.0, -1.0, 0.0];
        let e = embed(&g, &k, &psi).unwrap();
        assert_eq!(e.norm_const(), 2.0);
        assert_eq!(e.row(0), &[0.5, 0.0, -0.5, 0.0]);
        let r = defect_report(&g, &k, &e).unwrap();
        assert!(r.local_energy.iter().all(|&v| (v - 1.0).abs() < 1e-12));
        assert!((r.defect - 0.5).abs() < 1e-12);
        assert!(r.lipschitz <= r.lipschitz_bound + 1e-9);
    }

    #[test]
    fn identity_column_reproduces_psi() {
        let (g, k) = setup(GraphSpec::dihedral(5));
        let psi: Vec<f64> = (0..10).map(|x| ((x * 7 % 10) as f64 - 4.5) / 10.0).collect();
        let e = embed(&g, &k, &psi).unwrap();
        let id = g.group().unwrap().identity();
        for (x, v) in psi.iter().enumerate() {
            assert!((e.entry(x, id) - v / e.norm_const()).abs() < 1e-15);
        }
    }

    #[test]
    fn cycle6_eigen_defect_and_one_step() {
        let (g, k) = setup(GraphSpec::cycle(6));
        let s = second_eigenpair(&k, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
        let e = embed(&g, &k, &s.psi).unwrap();
        let r = defect_report(&g, &k, &e).unwrap();
        assert!((r.defect - 0.25).abs() < 1e-9);
        assert!(r.defect_spread < 1e-9);
        let tr = sample_trajectories(&k, &WalkConfig::new(1, 2000, 4), &[0, 1, 2, 3]).unwrap();
        let c = embedded_martingale_check(&g, &k, &e, &tr, Some(s.lambda), 3.0).unwrap();
        assert!(c.one_step_deviation.unwrap() < 1e-9);
        assert_eq!(c.rows[0].measured, 0.0);
        assert_eq!(c.verdict, Verdict::Pass);
    }

    #[test]
    fn hypercube_rows_have_equal_norm() {
        let (g, k) = setup(GraphSpec::hypercube(3));
        let s = second_eigenpair(&k, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
        let e = embed(&g, &k, &s.psi).unwrap();
        let norms: Vec<f64> = (0..8).map(|x| e.row(x).iter().map(|v| v * v).sum()).collect();
        assert!(norms.iter().all(|v| (v - norms[0]).abs() < 1e-12));
    }

    #[test]
    fn equivariance() {
        let (g, k) = setup(GraphSpec::lamplighter(3));
        let n = g.n();
        let psi: Vec<f64> = (0..n).map(|x| ((x * 13 % n) as f64).sin()).collect();
        let e = embed(&g, &k, &psi).unwrap();
        for (a, b, h) in [(0, 5, 7), (3, 11, 20), (23, 1, 9)] {
            let ha = translation_action(&g, h, a).unwrap();
            let hb = translation_action(&g, h, b).unwrap();
            assert!((e.sq_distance(a, b) - e.sq_distance(ha, hb)).abs() < 1e-12);
        }
    }

    #[test]
    fn errors() {
        let (g, k) = setup(GraphSpec::cycle(4));
        assert_eq!(embed(&g, &k, &[1.0; 4]), Err(Error::DegeneratePotential));
        let bare = build_graph(&GraphSpec::cycle(4)).unwrap().forget_group();
        assert_eq!(embed(&bare, &k, &[1.0, 0.0, -1.0, 0.0]), Err(Error::UnsupportedAction));
        let (big, bk) = setup(GraphSpec::cycle(20_000));
        let mut psi = vec![0.0; 20_000];
        psi[0] = 1.0;
        psi[1] = -1.0;
        assert!(matches!(embed(&big, &bk, &psi), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn csv_rows() {
        let (g, k) = setup(GraphSpec::cycle(4));
        let e = embed(&g, &k, &[1.0, 0.0, -1.0, 0.0]).unwrap();
        let mut buf = Vec::new();
        e.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "vertex,g0,g1,g2,g3");
        assert_eq!(lines[1], "0,0.5,0,-0.5,0");
        assert_eq!(lines.len(), 5);
    }
}
