//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use driftwalk::{build_graph, srw_kernel, Graph, GraphSpec, Kernel};
use nalgebra::{DMatrix, SymmetricEigen};

pub fn setup(spec: GraphSpec) -> (Graph, Kernel) {
    let g = build_graph(&spec).unwrap();
    let k = srw_kernel(&g);
    (g, k)
}

pub fn dense(kernel: &Kernel) -> DMatrix<f64> {
    let n = kernel.n();
    let mut m = DMatrix::zeros(n, n);
    for x in 0..n {
        let (cols, probs) = kernel.row(x);
        for (&y, &p) in cols.iter().zip(probs) {
            m[(x, y as usize)] += p;
        }
    }
    m
}

/// Eigenvalues of the dense transition matrix, largest first.
pub fn dense_spectrum(kernel: &Kernel) -> Vec<f64> {
    let mut ev: Vec<f64> = SymmetricEigen::new(dense(kernel)).eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| b.partial_cmp(a).unwrap());
    ev
}

/// `‖Mv - λv‖` with the dense matrix.
pub fn dense_residual(kernel: &Kernel, lambda: f64, v: &[f64]) -> f64 {
    let m = dense(kernel);
    let v = nalgebra::DVector::from_column_slice(v);
    (&m * &v - lambda * &v).norm()
}

/// Law of the simple walk on `Z` after `t` steps, indexed by `x + t`.
pub fn srw_law(t: usize) -> Vec<f64> {
    let mut p = vec![0.0; 2 * t + 1];
    p[t] = 1.0;
    for _ in 0..t {
        let mut q = vec![0.0; 2 * t + 1];
        for i in 0..p.len() {
            if p[i] == 0.0 {
                continue;
            }
            if i > 0 {
                q[i - 1] += 0.5 * p[i];
            }
            if i + 1 < q.len() {
                q[i + 1] += 0.5 * p[i];
            }
        }
        p = q;
    }
    p
}

/// `E|S_t|` by an exact binomial sum.
pub fn srw_mean_abs(t: usize) -> f64 {
    srw_law(t)
        .iter()
        .enumerate()
        .map(|(i, p)| p * (i as f64 - t as f64).abs())
        .sum()
}

/// `(1/T) Σ_{s=0}^{T} P[|S_s| ≤ r]` by dynamic programming over the law of `S_s`.
pub fn srw_occupation(horizon: usize, r: f64) -> f64 {
    srw_occupation_radii(horizon, &[r])[0]
}

/// [`srw_occupation`] for several radii in one pass.
pub fn srw_occupation_radii(horizon: usize, radii: &[f64]) -> Vec<f64> {
    let t = horizon;
    let mut p = vec![0.0; 2 * t + 1];
    let mut q = vec![0.0; 2 * t + 1];
    p[t] = 1.0;
    let mut total = vec![0.0; radii.len()];
    for s in 0..=t {
        if s > 0 {
            q.iter_mut().for_each(|v| *v = 0.0);
            for i in t - s + 1..t + s {
                let v = 0.5 * p[i];
                q[i - 1] += v;
                q[i + 1] += v;
            }
            std::mem::swap(&mut p, &mut q);
        }
        for (acc, &r) in total.iter_mut().zip(radii) {
            let w = (r.floor() as usize).min(t);
            *acc += p[t - w..=t + w].iter().sum::<f64>();
        }
    }
    total.iter().map(|v| v / t as f64).collect()
}

/// Solves `a_i u_{i-1} + b_i u_i + c_i u_{i+1} = d_i` (Thomas algorithm).
fn tridiagonal(a: &[f64], b: &[f64], c: &[f64], d: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut cp = vec![0.0; n];
    let mut dp = vec![0.0; n];
    cp[0] = c[0] / b[0];
    dp[0] = d[0] / b[0];
    for i in 1..n {
        let m = b[i] - a[i] * cp[i - 1];
        cp[i] = c[i] / m;
        dp[i] = (d[i] - a[i] * dp[i - 1]) / m;
    }
    let mut u = vec![0.0; n];
    u[n - 1] = dp[n - 1];
    for i in (0..n - 1).rev() {
        u[i] = dp[i] - cp[i] * u[i + 1];
    }
    u
}

/// Expected first time the simple walk from 0 reaches `|S| = r`.
pub fn srw_exit_time(r: usize) -> f64 {
    // interior states -r+1..=r-1, h = 1 + (h_{x-1} + h_{x+1})/2, h(±r) = 0
    let n = 2 * r - 1;
    let u = tridiagonal(&vec![-0.5; n], &vec![1.0; n], &vec![-0.5; n], &vec![1.0; n]);
    u[r - 1]
}

/// Probability that the simple walk from `start` reaches `top` before `bottom`.
pub fn srw_ruin(start: i64, bottom: i64, top: i64) -> f64 {
    let n = (top - bottom - 1) as usize;
    let mut d = vec![0.0; n];
    d[n - 1] = 0.5;
    let u = tridiagonal(&vec![-0.5; n], &vec![1.0; n], &vec![-0.5; n], &d);
    u[(start - bottom - 1) as usize]
}

/// Families with at most 64 vertices covering every built-in constructor.
pub fn small_families() -> Vec<GraphSpec> {
    // multiplication table of S_3 as permutations of {0,1,2}
    let perms: [[usize; 3]; 6] = [[0, 1, 2], [1, 0, 2], [0, 2, 1], [2, 1, 0], [1, 2, 0], [2, 0, 1]];
    let index = |p: [usize; 3]| perms.iter().position(|q| *q == p).unwrap();
    let table: Vec<Vec<usize>> = perms
        .iter()
        .map(|a| perms.iter().map(|b| index([a[b[0]], a[b[1]], a[b[2]]])).collect())
        .collect();
    let mut out = vec![
        GraphSpec::cycle(3),
        GraphSpec::cycle(6),
        GraphSpec::cycle(17),
        GraphSpec::cycle(64),
        GraphSpec::cycle(10).with_loops(3),
        GraphSpec::torus(4, 2),
        GraphSpec::torus(8, 2),
        GraphSpec::torus(4, 3),
        GraphSpec::torus(5, 2).with_loops(2),
        GraphSpec::hypercube(2),
        GraphSpec::hypercube(3),
        GraphSpec::hypercube(6),
        GraphSpec::complete(4),
        GraphSpec::complete(13),
        GraphSpec::dihedral(3),
        GraphSpec::dihedral(7),
        GraphSpec::dihedral(32),
        GraphSpec::lamplighter(2),
        GraphSpec::lamplighter(3),
        GraphSpec::lamplighter(4),
    ];
    out.push(GraphSpec::new(driftwalk::Family::Cayley {
        table,
        generators: vec![1, 2, 3],
    }));
    out
}
