//! Acceptance suite. Prints one line per criterion and exits non-zero if any
//! criterion fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::OnceLock;
use std::time::Instant;

use common::*;
use driftwalk::spectral::{DEFAULT_MAX_ITER, DEFAULT_TOL};
use driftwalk::walker::check_mark;
use driftwalk::{
    closed_form_eigenpair, defect_report, embed, escape_lower_bound, finite_bound_curve, folner_indicator,
    heat_flow_potential, run, second_eigenpair, simulate, simulate_martingale, verify_against_bounds,
    verify_martingale_lemmas, verify_walk_inequalities, Error, Graph, GraphSpec, InequalityParams, Kernel,
    MartingaleParams, MartingaleSpec, RunConfig, Verdict, WalkConfig, YuvalParams,
};

/// Relative tolerance of the exact identities.
const IDENTITY_TOL: f64 = 1e-9;
/// Agreement with the dense eigendecomposition.
const SPECTRAL_TOL: f64 = 1e-8;
/// Monte Carlo tolerance in standard errors.
const SIGMAS: f64 = 3.0;
const SEED: u64 = 20_240_601;

type Outcome = std::result::Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("identity suite", identity_suite),
        ("heat-flow guarantee", heat_flow_guarantee),
        ("spectral oracle", spectral_oracle),
        ("diffusive escape at scale", diffusive_escape),
        ("weighted tightness", weighted_tightness),
        ("finite-graph bound", finite_graph_bound),
        ("martingale lemmas", martingale_lemmas),
        ("walk inequalities", walk_inequalities),
        ("occupation bound", occupation_bound),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panic: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS {name} ({secs:.1}s): {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL {name} ({secs:.1}s): {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

fn eigenfunction(g: &Graph, k: &Kernel) -> Vec<f64> {
    closed_form_eigenpair(g, k)
        .map(|s| s.psi)
        .unwrap_or_else(|| second_eigenpair(k, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap().psi)
}

fn unit_centered(mut v: Vec<f64>) -> Vec<f64> {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    v.iter_mut().for_each(|x| *x -= mean);
    let s = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= s);
    v
}

/// Mean-zero seed on the sub-cube `x_0 = x_1 = 0` of a hypercube.
fn subcube_seed(g: &Graph) -> Vec<f64> {
    unit_centered((0..g.n()).map(|x| if x & 3 == 0 { 1.0 } else { 0.0 }).collect())
}

/// Local energy and defect identities of the embedding of `psi`; returns the
/// worst relative error.
fn identities(g: &Graph, k: &Kernel, psi: &[f64]) -> std::result::Result<f64, String> {
    let e = embed(g, k, psi).map_err(|e| e.to_string())?;
    let r = defect_report(g, k, &e).map_err(|e| e.to_string())?;
    let ratio = k.rayleigh_ratio(psi).map_err(|e| e.to_string())?;
    let defect_err = r
        .defect_samples
        .iter()
        .map(|&(_, d)| (d - ratio / 2.0).abs() / (ratio / 2.0))
        .fold(0.0, f64::max);
    Ok(r.max_energy_error().max(defect_err))
}

fn identity_suite() -> Outcome {
    let mut worst = 0.0f64;
    let mut cases = 0;
    for spec in [
        GraphSpec::cycle(6),
        GraphSpec::cycle(4096),
        GraphSpec::torus(32, 2),
        GraphSpec::hypercube(6),
    ] {
        let (g, k) = setup(spec.clone());
        worst = worst.max(identities(&g, &k, &eigenfunction(&g, &k))?);
        cases += 1;
        let seed = match spec.family {
            driftwalk::Family::Hypercube { .. } => subcube_seed(&g),
            _ => folner_indicator(&g, spec_side(&spec) / 2).unwrap(),
        };
        match heat_flow_potential(&k, &seed, 0.5) {
            Ok(p) => {
                worst = worst.max(identities(&g, &k, &p.phi)?);
                cases += 1;
            }
            Err(Error::ThetaTooLarge { theta }) => {
                // no mean-zero seed has θ < 1 - λ₂; on cycle(6) that is 1/2
                let gap = 1.0 - dense_spectrum(&k)[1];
                ensure!(
                    gap >= 0.5 - 1e-12,
                    "{spec:?}: θ = {theta} rejected although 1 - λ₂ = {gap}"
                );
                let f2: Vec<f64> = k.apply(&seed).unwrap().iter().zip(&seed).map(|(a, b)| a + b).collect();
                worst = worst.max(identities(&g, &k, &f2)?);
                cases += 1;
            }
            Err(e) => return Err(format!("{spec:?}: {e}")),
        }
    }
    ensure!(
        worst <= IDENTITY_TOL,
        "worst relative error {worst:.2e} > {IDENTITY_TOL:.0e}"
    );
    Ok(format!(
        "{cases} potentials, worst relative error {worst:.2e} ≤ {IDENTITY_TOL:.0e}; heat-flow on cycle(6) is \
         rejected (θ ≥ 1 - λ₂ = 1/2) and replaced by the power sum f + Pf"
    ))
}

fn spec_side(spec: &GraphSpec) -> usize {
    match spec.family {
        driftwalk::Family::Cycle { n } | driftwalk::Family::Torus { n, .. } => n,
        _ => 0,
    }
}

fn heat_flow_guarantee() -> Outcome {
    let mut lines = Vec::new();
    for (spec, side) in [(GraphSpec::cycle(4096), 2048), (GraphSpec::torus(64, 2), 32)] {
        let (g, k) = setup(spec.clone());
        let f = folner_indicator(&g, side).unwrap();
        let p = heat_flow_potential(&k, &f, 0.5).map_err(|e| e.to_string())?;

        // θ and the ratio from the dense matrix
        let m = dense(&k);
        let fv = nalgebra::DVector::from_column_slice(&f);
        let theta = (&fv - &m * &fv).norm();
        let phi = nalgebra::DVector::from_column_slice(&p.phi);
        let lap = &phi - &m * &phi;
        let ratio = lap.norm_squared() / phi.dot(&lap);
        ensure!(
            (theta - p.theta).abs() <= 1e-12,
            "{spec:?}: θ {theta} vs reported {}",
            p.theta
        );
        ensure!(
            ratio <= 32.0 * theta,
            "{spec:?}: ratio {ratio} > 32θ = {}",
            32.0 * theta
        );

        // a_m = ⟨φ, f⟩ and a_{m+1} = a_m + ⟨φ, P^k f⟩
        let mut pk = f.clone();
        for _ in 0..p.k {
            pk = k.apply(&pk).unwrap();
        }
        let a_m = phi.dot(&fv);
        let a_next = a_m + p.phi.iter().zip(&pk).map(|(a, b)| a * b).sum::<f64>();
        let gap = 2.0 * a_m - a_next;
        ensure!(p.selected_gap() >= p.threshold(), "{spec:?}: selected gap below 1/(8θ)");
        ensure!(
            (gap - p.selected_gap()).abs() <= 1e-9 * gap.abs(),
            "{spec:?}: recomputed gap {gap} vs {}",
            p.selected_gap()
        );
        ensure!(
            gap >= p.threshold() * (1.0 - 1e-12),
            "{spec:?}: recomputed gap {gap} < {}",
            p.threshold()
        );
        lines.push(format!(
            "{}: θ={theta:.4}, k=2^{}, ratio={ratio:.3e} ≤ 32θ={:.3}, 2a_m-a_(m+1)={gap:.3} ≥ {:.3}",
            g.family().name(),
            p.m,
            32.0 * theta,
            p.threshold()
        ));
    }
    Ok(lines.join("; "))
}

fn spectral_oracle() -> Outcome {
    let mut worst = 0.0f64;
    let families = small_families();
    for spec in &families {
        let (g, k) = setup(spec.clone());
        let ev = dense_spectrum(&k);
        let s = second_eigenpair(&k, DEFAULT_TOL, DEFAULT_MAX_ITER).map_err(|e| format!("{spec:?}: {e}"))?;
        worst = worst.max((s.lambda - ev[1]).abs());
        if let Some(c) = closed_form_eigenpair(&g, &k) {
            worst = worst.max((c.lambda - ev[1]).abs());
        }
    }
    ensure!(worst <= SPECTRAL_TOL, "worst |λ - λ_dense| = {worst:.2e}");
    for (spec, lambda) in [
        (GraphSpec::cycle(6), 0.5),
        (GraphSpec::hypercube(3), 1.0 / 3.0),
        (GraphSpec::complete(4), -1.0 / 3.0),
    ] {
        let (_, k) = setup(spec.clone());
        let s = second_eigenpair(&k, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
        ensure!((s.lambda - lambda).abs() <= SPECTRAL_TOL, "{spec:?}: λ = {}", s.lambda);
    }
    Ok(format!(
        "{} graphs with n ≤ 64, worst |λ - λ_dense| = {worst:.1e} ≤ {SPECTRAL_TOL:.0e}",
        families.len()
    ))
}

fn diffusive_escape() -> Outcome {
    let times = [16u64, 64, 256, 1024];
    let (g, k) = setup(GraphSpec::cycle(10_000));
    let s = simulate(&k, &g, &WalkConfig::new(1024, 100_000, SEED)).map_err(|e| e.to_string())?;
    for &t in &times {
        let (m, se) = (s.mean_sq_dist[t as usize], s.se_sq_dist[t as usize]);
        ensure!(
            (m - t as f64).abs() <= SIGMAS * se,
            "cycle t={t}: {m:.2} vs {t} (σ={se:.2})"
        );
    }
    let f = folner_indicator(&g, 5000).unwrap();
    let p = heat_flow_potential(&k, &f, 0.5).map_err(|e| e.to_string())?;
    let curve = escape_lower_bound(&k, &p.phi, &times).unwrap();
    let exact_only = driftwalk::BoundCurve {
        times: curve.times.clone(),
        p_star: curve.p_star,
        exact_bound: curve.exact_bound.clone(),
        ..Default::default()
    };
    let report = verify_against_bounds(&s, &exact_only, SIGMAS).unwrap();
    ensure!(
        report.verdict == Verdict::Pass,
        "heat-flow bound rows {:?}",
        report.rows
    );

    let (g2, k2) = setup(GraphSpec::torus(200, 2));
    let s2 = simulate(&k2, &g2, &WalkConfig::new(1024, 100_000, SEED)).map_err(|e| e.to_string())?;
    for t in 1..=1024usize {
        let (m, se) = (s2.mean_sq_dist[t], s2.se_sq_dist[t]);
        ensure!(
            m + SIGMAS * se >= t as f64 / 4.0,
            "torus t={t}: {m:.2} < {}",
            t as f64 / 4.0
        );
    }
    Ok(format!(
        "cycle(10^4): E[dist²] at t=16,64,256,1024 = {} within 3σ of t and above heat-flow bound {}; \
         torus(200,2): E[dist²] ≥ t/4 for t ≤ 1024 (t=1024: {:.1})",
        times
            .iter()
            .map(|&t| format!("{:.1}", s.mean_sq_dist[t as usize]))
            .collect::<Vec<_>>()
            .join("/"),
        curve
            .exact_bound
            .iter()
            .map(|b| format!("{b:.1}"))
            .collect::<Vec<_>>()
            .join("/"),
        s2.mean_sq_dist[1024]
    ))
}

fn log_grid(max: u64, points: usize) -> Vec<u64> {
    let mut out: Vec<u64> = (0..points)
        .map(|i| ((max as f64).ln() * i as f64 / (points - 1) as f64).exp().round() as u64)
        .map(|t| t.clamp(1, max))
        .collect();
    out.dedup();
    out
}

fn weighted_tightness() -> Outcome {
    let (g, k) = setup(GraphSpec::cycle(10_000).with_loops(6));
    ensure!(
        g.degree() == 8 && k.p_star() == 0.125,
        "degree {} p_* {}",
        g.degree(),
        k.p_star()
    );
    let lambda = closed_form_eigenpair(&g, &k).unwrap().lambda;
    let relax = 1.0 / (1.0 - lambda);
    let t_max = 1024u64;
    ensure!((t_max as f64) <= relax, "t_max outside relaxation window {relax}");
    let s = simulate(&k, &g, &WalkConfig::new(t_max, 100_000, SEED)).map_err(|e| e.to_string())?;
    let times: Vec<u64> = (1..=t_max).collect();
    let curve = finite_bound_curve(lambda, k.p_star(), &times).unwrap();
    let lower = verify_against_bounds(&s, &curve, SIGMAS).unwrap();
    ensure!(lower.verdict == Verdict::Pass, "geometric bound violated");
    let upper = driftwalk::walker::verify_upper_envelope(&s, &times, 2.0 / 8.0, SIGMAS).unwrap();
    if let Some(c) = upper.iter().find(|c| c.verdict != Verdict::Pass) {
        return Err(format!("{}: {:.2} > {:.2} + {:.2}", c.name, c.measured, c.bound, c.ci));
    }
    Ok(format!(
        "d=8, p_*=1/8, relaxation {relax:.3e}: geometric ≤ E[dist²] ≤ 2t/8 + 3σ for t ≤ {t_max} (t={t_max}: {:.1} vs {:.1})",
        s.mean_sq_dist[t_max as usize],
        2.0 * t_max as f64 / 8.0
    ))
}

fn finite_graph_bound() -> Outcome {
    let (g, k) = setup(GraphSpec::cycle(512));
    let expected = (2.0 * std::f64::consts::PI / 512.0).cos();
    let closed = closed_form_eigenpair(&g, &k).unwrap();
    let power = second_eigenpair(&k, DEFAULT_TOL, DEFAULT_MAX_ITER).map_err(|e| e.to_string())?;
    ensure!(
        (closed.lambda - expected).abs() <= 1e-14,
        "closed form λ {}",
        closed.lambda
    );
    ensure!(
        (power.lambda - expected).abs() <= SPECTRAL_TOL,
        "power iteration λ {}",
        power.lambda
    );
    let relax = (1.0 / (1.0 - expected)).floor() as u64;
    let times = log_grid(relax, 8);
    ensure!(times.len() == 8, "grid {times:?}");
    let s = simulate(&k, &g, &WalkConfig::new(relax, 20_000, SEED)).map_err(|e| e.to_string())?;
    for &t in &times {
        let m = s.mean_sq_dist[t as usize];
        let ci = SIGMAS * s.se_sq_dist[t as usize];
        let bound = k.p_star() * t as f64 / 2.0;
        ensure!(m >= bound - ci, "t={t}: {m:.2} < {bound:.2} - {ci:.2}");
    }
    Ok(format!(
        "λ = cos(2π/512) (power iteration error {:.1e}); E[dist²] ≥ t/4 - 3σ at t = {times:?}",
        (power.lambda - expected).abs()
    ))
}

fn martingale_lemmas() -> Outcome {
    let spec = MartingaleSpec::SrwOnIntegers;
    let mut p = MartingaleParams::new(20_000, SEED);
    p.hit_radii = vec![5.0, 10.0];
    p.l1_horizon = 100;
    p.yuval = Some(YuvalParams {
        offset: 10.0,
        r: 5.0,
        r_prime: 5.0,
    });
    p.occ_horizon = 10_000;
    p.occ_epsilons = vec![0.05, 0.1, 0.2];
    let checks = verify_martingale_lemmas(spec, &p).map_err(|e| e.to_string())?;
    if let Some(c) = checks.iter().find(|c| c.verdict != Verdict::Pass) {
        return Err(format!(
            "{} is {:?}: {:.4} vs {:.4}",
            c.name, c.verdict, c.measured, c.bound
        ));
    }
    let by_name = |n: &str| checks.iter().find(|c| c.name == n).unwrap();
    for r in [5usize, 10] {
        let c = by_name(&format!("mghit[R={r}]"));
        let exact = srw_exit_time(r);
        ensure!((exact - (r * r) as f64).abs() < 1e-9, "first-passage oracle {exact}");
        ensure!(
            (c.measured - exact).abs() <= c.ci,
            "mghit R={r}: {:.3} vs {exact} ± {:.3}",
            c.measured,
            c.ci
        );
        let (lo, hi) = ((r * r) as f64, ((r + 1) * (r + 1)) as f64);
        ensure!(
            c.measured + c.ci >= lo && c.measured - c.ci <= hi,
            "mghit R={r} outside [{lo}, {hi}]"
        );
    }
    let l1 = by_name("l1mg[T=100]");
    let l1_exact = srw_mean_abs(100);
    ensure!(
        l1.measured >= 3.52 && l1.bound >= 3.51,
        "l1mg {:.3} vs bound {:.3}",
        l1.measured,
        l1.bound
    );
    ensure!(
        (l1.measured - l1_exact).abs() <= l1.ci,
        "l1mg {:.3} vs exact {l1_exact:.3}",
        l1.measured
    );
    let y = by_name("yuval[offset=10,R=5,R'=5]");
    let ruin = srw_ruin(10, 5, 15);
    ensure!((ruin - 0.5).abs() < 1e-12, "ruin oracle {ruin}");
    ensure!(
        (y.measured - ruin).abs() <= y.ci,
        "yuval {:.4} vs {ruin} ± {:.4}",
        y.measured,
        y.ci
    );
    ensure!(
        ruin >= 5.0 / 11.0 && (y.bound - 5.0 / 11.0).abs() < 1e-15,
        "yuval bound {}",
        y.bound
    );
    let oracle = srw_occupation_radii(10_000, &[5.0, 10.0, 20.0]);
    let mut occ = Vec::new();
    for (&eps, &exact) in p.occ_epsilons.iter().zip(&oracle) {
        let c = by_name(&format!("mgocc[T=10000,eps={eps}]"));
        ensure!(
            c.measured <= 8.0 * eps,
            "mgocc eps={eps}: {:.4} > {}",
            c.measured,
            8.0 * eps
        );
        // small-ε limit 4ε/√(2π) ≈ 1.6ε; the Gaussian tail lowers the ratio as ε grows
        let limit = 4.0 / (2.0 * std::f64::consts::PI).sqrt();
        ensure!(
            (exact / eps - limit).abs() <= 0.2,
            "DP oracle eps={eps}: {exact:.4} is not ≈ 1.6ε"
        );
        ensure!(
            exact <= 2.0 * eps,
            "DP oracle eps={eps}: {exact:.4} leaves less than 4x headroom"
        );
        ensure!(
            (c.measured - exact).abs() <= c.ci,
            "mgocc eps={eps}: {:.4} vs DP {exact:.4}",
            c.measured
        );
        occ.push(format!("{:.4}/{exact:.4} ({:.2}ε)", c.measured, exact / eps));
    }
    Ok(format!(
        "E[τ_5]={:.2}, E[τ_10]={:.2}, E|M_100|={:.3} (exact {l1_exact:.3}), p={:.4} (exact 0.5 ≥ 5/11), \
         occupation simulated/DP {}",
        by_name("mghit[R=5]").measured,
        by_name("mghit[R=10]").measured,
        l1.measured,
        y.measured,
        occ.join(", ")
    ))
}

/// One long cycle(10⁴) simulation shared by the walk-inequality and
/// occupation criteria.
fn long_cycle_walk() -> &'static (driftwalk::WalkSummary, usize) {
    static WALK: OnceLock<(driftwalk::WalkSummary, usize)> = OnceLock::new();
    WALK.get_or_init(|| {
        let (g, k) = setup(GraphSpec::cycle(10_000));
        let mut cfg = WalkConfig::new(2048, 100_000, SEED);
        cfg.hitting_radii = vec![20];
        (simulate(&k, &g, &cfg).unwrap(), g.degree())
    })
}

fn walk_inequalities() -> Outcome {
    let (s, _) = long_cycle_walk();
    let mut params = InequalityParams::new(400);
    params.smallball_epsilons = vec![0.1, 0.2];
    let checks = verify_walk_inequalities(s, &params).map_err(|e| e.to_string())?;
    ensure!(
        checks.len() == 4,
        "expected mark, lindrift and two smallball checks, got {checks:?}"
    );
    if let Some(c) = checks.iter().find(|c| c.verdict != Verdict::Pass) {
        return Err(format!(
            "{} is {:?} ({}): {:.4} vs {:.4}",
            c.name, c.verdict, c.note, c.measured, c.bound
        ));
    }
    let h = &s.hitting[0];
    ensure!((h.mean - 400.0).abs() <= SIGMAS * h.se, "h(20) = {:.1} vs 400", h.mean);
    let mark = check_mark(s, 400, SIGMAS).unwrap();
    let lindrift = &checks[1];
    ensure!(
        (lindrift.measured - srw_mean_abs(800)).abs() <= lindrift.ci,
        "E dist at 800: {:.3} vs binomial {:.3}",
        lindrift.measured,
        srw_mean_abs(800)
    );
    let mut balls = Vec::new();
    for c in &checks[2..] {
        let eps: f64 = if c.name.contains("0.1") { 0.1 } else { 0.2 };
        let exact = srw_occupation(400, eps * 20.0);
        ensure!(
            (c.measured - exact).abs() <= c.ci,
            "{}: {:.4} vs DP {exact:.4}",
            c.name,
            c.measured
        );
        balls.push(format!("ε={eps}: {:.4} (DP {exact:.4}) ≤ {}", c.measured, c.bound));
    }
    Ok(format!(
        "mark {:.2} ≥ {:.2}; h(20)={:.1}, censored {:.2}%, lindrift E dist(800)={:.2} ≥ {:.2}; smallball {}",
        mark.measured,
        mark.bound,
        h.mean,
        100.0 * h.censored_fraction(),
        lindrift.measured,
        lindrift.bound,
        balls.join(", ")
    ))
}

fn occupation_bound() -> Outcome {
    let (s, d) = long_cycle_walk();
    let d = *d;
    let horizon = 1024u64;
    let eps = [1.0 / (horizon as f64).sqrt(), 0.1, 0.2];
    let mut params = InequalityParams::new(horizon);
    params.occupation_epsilons = eps.to_vec();
    let checks = verify_walk_inequalities(s, &params).map_err(|e| e.to_string())?;
    let occ: Vec<_> = checks.iter().filter(|c| c.name.starts_with("occupation")).collect();
    ensure!(occ.len() == 3, "expected three occupation checks");
    let radii: Vec<f64> = eps.iter().map(|e| e * (horizon as f64 / d as f64).sqrt()).collect();
    let oracle = srw_occupation_radii(horizon as usize, &radii);
    let mut out = Vec::new();
    for ((c, &e), &exact) in occ.iter().zip(&eps).zip(&oracle) {
        ensure!(
            c.verdict == Verdict::Pass,
            "{}: {:.4} > {:.4}",
            c.name,
            c.measured,
            c.bound
        );
        ensure!(
            c.measured <= 8.0 * e,
            "{}: point estimate {:.4} > 8ε",
            c.name,
            c.measured
        );
        ensure!(
            (c.measured - exact).abs() <= c.ci,
            "{}: {:.4} vs DP {exact:.4}",
            c.name,
            c.measured
        );
        out.push(format!("ε={e:.4}: {:.4} ≤ {:.3}", c.measured, 8.0 * e));
    }
    Ok(format!("T=1024, radius ε√(T/2): {}", out.join(", ")))
}

fn determinism() -> Outcome {
    let config = r#"{
      "graph": {"family": {"torus": {"n": 16, "dim": 2}}},
      "walk": {"t_max": 64, "n_samples": 20000, "seed": 7, "hitting_radii": [4]},
      "checks": ["bounds", "harmonic", "mark"],
      "inequalities": {"horizon": 32, "smallball_epsilons": [0.5], "occupation_epsilons": [0.2]}
    }"#;
    let cfg = RunConfig::from_json(config).map_err(|e| e.to_string())?;
    let a = run(&cfg).map_err(|e| e.to_string())?.to_json().unwrap();
    let b = run(&cfg).map_err(|e| e.to_string())?.to_json().unwrap();
    ensure!(a == b, "reports differ between identical runs");

    let (g, k) = setup(GraphSpec::lamplighter(5));
    let mut walk = WalkConfig::new(200, 30_000, 99);
    walk.hitting_radii = vec![3, 6];
    walk.occupation_epsilons = vec![0.5];
    let mut reference: Option<(String, Vec<u64>)> = None;
    for workers in [1, 2, 3, 8] {
        walk.workers = workers;
        let s = simulate(&k, &g, &walk).unwrap();
        let json = serde_json::to_string(&s).unwrap();
        let counts = (0..=200).flat_map(|t| s.distance_counts(t).to_vec()).collect();
        match &reference {
            None => reference = Some((json, counts)),
            Some((j, c)) => {
                ensure!(*j == json && *c == counts, "WalkSummary differs with {workers} workers");
            }
        }
    }
    let mut summaries = Vec::new();
    for workers in [1, 4] {
        let m = simulate_martingale(MartingaleSpec::LazySrw { holding: 0.25 }, 100, 10_000, 3, workers).unwrap();
        summaries.push(serde_json::to_string(&m).unwrap());
    }
    ensure!(
        summaries[0] == summaries[1],
        "martingale summary differs across worker counts"
    );
    Ok(format!(
        "two runs give byte-identical {}-byte reports; WalkSummary identical for 1, 2, 3 and 8 workers",
        a.len()
    ))
}
