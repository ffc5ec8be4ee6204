//! The pass/fail invariant suite behind `pinsker verify`: spectrum, solver,
//! harmonics, and simulator identities, each checked at its documented
//! tolerance, plus an optional large-d convergence section.

use pinsker_core::asymptotic::{alignment_boundary, asymptotic, predicted_top_degree};
use pinsker_core::gegenbauer::gegenbauer;
use pinsker_core::harmonics::harmonic_basis;
use pinsker_core::pinsker::{
    lower_bound_diagnostics, solve_kappa, PinskerSolution, ProblemConfig,
};
use pinsker_core::quadrature::{eigenvalue_by_quadrature, weighted_integral};
use pinsker_core::rational::Rational;
use pinsker_core::sim::{
    bayes_risk, bayes_risk_mc, delta_diagnostics, sample_sphere, sequence_exact_risk,
    sequence_mc_risk, sequence_sup_risk, stream_rng,
};
use pinsker_core::spectrum::multiplicity;
use pinsker_core::{funk_hecke, KernelSpec, Result, SpectrumTable};

use rand::Rng;

use crate::config::RunConfig;

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub section: &'static str,
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    fn new(section: &'static str, name: impl Into<String>, passed: bool, detail: String) -> Self {
        Self {
            section,
            name: name.into(),
            passed,
            detail,
        }
    }
}

/// Runs every check; `d_grid` adds the convergence section.
pub fn run_suite(
    config: &RunConfig,
    d_grid: Option<&[usize]>,
    seed: u64,
) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    gegenbauer_checks(&mut out);
    spectrum_checks(config, &mut out)?;
    solver_checks(seed, &mut out);
    harmonics_checks(seed, &mut out);
    simulator_checks(config, seed, &mut out)?;
    if let Some(grid) = d_grid {
        convergence_checks(config, grid, &mut out)?;
    }
    Ok(out)
}

fn gegenbauer_checks(out: &mut Vec<CheckResult>) {
    // Orthogonality and normalization under the projected sphere weight.
    let mut worst_off = 0.0f64;
    let mut worst_norm = 0.0f64;
    for d in [3usize, 5, 10] {
        for k in 0..=6usize {
            for kp in 0..=6usize {
                let v = weighted_integral(
                    |t| gegenbauer(k, d, t).unwrap() * gegenbauer(kp, d, t).unwrap(),
                    d,
                    300,
                );
                if k == kp {
                    let want = 1.0 / multiplicity(d, k).unwrap() as f64;
                    worst_norm = worst_norm.max(((v - want) / want).abs());
                } else {
                    worst_off = worst_off.max(v.abs());
                }
            }
        }
    }
    out.push(CheckResult::new(
        "spectrum",
        "gegenbauer_orthogonality",
        worst_off < 1e-8,
        format!("max |<P_k,P_k'>| = {worst_off:.2e} (tol 1e-8)"),
    ));
    out.push(CheckResult::new(
        "spectrum",
        "gegenbauer_normalization",
        worst_norm < 1e-8,
        format!("max rel |<P_k,P_k>| - 1/N| = {worst_norm:.2e} (tol 1e-8)"),
    ));
}

fn spectrum_checks(config: &RunConfig, out: &mut Vec<CheckResult>) -> Result<()> {
    let kernel = config
        .build_kernel()
        .ok()
        .flatten()
        .unwrap_or_else(|| KernelSpec::rbf(40));

    // Funk-Hecke consistency: closed form vs quadrature.
    let mut worst = 0.0f64;
    for d in [3usize, 11, 24, 40] {
        for k in 0..=6usize.min(kernel.truncation_degree()) {
            let exact = funk_hecke::eigenvalue(&kernel, d, k)?;
            let quad = eigenvalue_by_quadrature(|t| kernel.phi(t), d, k, 400)?;
            let rel = if exact.abs() > 1e-300 {
                ((exact - quad) / exact).abs()
            } else {
                (exact - quad).abs()
            };
            worst = worst.max(rel);
        }
    }
    out.push(CheckResult::new(
        "spectrum",
        "funk_hecke_consistency",
        worst < 1e-8,
        format!("max rel gap beta-path vs quadrature = {worst:.2e} (tol 1e-8)"),
    ));

    // Trace identity: exact for polynomial kernels, bound for the rest.
    out.push(check_trace_identity(
        &KernelSpec::polynomial(6),
        &SpectrumTable::build(&KernelSpec::polynomial(6), 7, 6)?,
    ));
    let table = SpectrumTable::build(&kernel, 9, 8.min(kernel.truncation_degree()))?;
    let bound_ok = table.trace() <= kernel.phi_one() + 1e-12;
    out.push(CheckResult::new(
        "spectrum",
        "trace_bound",
        bound_ok,
        format!(
            "trace {:.12} <= phi(1) {:.12} for {}",
            table.trace(),
            kernel.phi_one(),
            kernel.label()
        ),
    ));

    // Eigenvalue ratio monotonicity.
    let mut worst_ratio = 0.0f64;
    for d in [3usize, 10, 100] {
        let t = SpectrumTable::build(&kernel, d, 8.min(kernel.truncation_degree()))?;
        let blocks = t.blocks();
        for k in 0..blocks.len().saturating_sub(2) {
            if blocks[k].eigenvalue > 0.0 {
                worst_ratio = worst_ratio.max(blocks[k + 2].eigenvalue / blocks[k].eigenvalue);
            }
        }
    }
    out.push(CheckResult::new(
        "spectrum",
        "eigenvalue_ratio_monotone",
        worst_ratio <= 1.0 + 1e-12,
        format!("max mu_(k+2)/mu_k = {worst_ratio:.12} (must be <= 1)"),
    ));

    // Large-d bracket mu_k in [0.9, 1.1]·a_k·k!·d^{-k} for the RBF.
    let rbf = KernelSpec::rbf(60);
    let mut ok = true;
    let mut detail = String::new();
    for d in [500usize, 1000] {
        let t = SpectrumTable::build(&rbf, d, 3)?;
        for (k, b) in t.blocks().iter().enumerate() {
            let k_fact: f64 = (1..=k).map(|i| i as f64).product();
            let scale = rbf.coefficient(k) * k_fact * (d as f64).powi(-(k as i32));
            let r = b.eigenvalue / scale;
            if !(0.9..=1.1).contains(&r) {
                ok = false;
                detail = format!("d={d} k={k}: mu/(a_k k! d^-k) = {r}");
            }
        }
    }
    out.push(CheckResult::new(
        "spectrum",
        "asymptotic_bracket",
        ok,
        if ok { "mu_k within [0.9,1.1]·a_k k! d^-k at d=500,1000".into() } else { detail },
    ));
    Ok(())
}

/// Trace identity for a fully tabulated polynomial kernel; exposed so tests
/// can feed a corrupted table as a negative control.
pub fn check_trace_identity(kernel: &KernelSpec, table: &SpectrumTable) -> CheckResult {
    let gap = ((table.trace() - kernel.phi_one()) / kernel.phi_one()).abs();
    CheckResult::new(
        "spectrum",
        "trace_identity",
        gap < 1e-10,
        format!("relative trace gap {gap:.2e} for {} (tol 1e-10)", kernel.label()),
    )
}

/// A randomized synthetic spectrum and problem, shared by the solver checks.
/// Draws are resampled while the fixed point sits within 1e-4 of dropping its
/// last block: at that margin D* itself is no longer determined at f64
/// precision, so such corners are outside the testable family.
fn random_case(rng: &mut impl Rng) -> (SpectrumTable, ProblemConfig, PinskerSolution) {
    loop {
        let n_blocks = rng.gen_range(1..=6);
        let mut eigs: Vec<f64> = (0..n_blocks)
            .map(|_| 10f64.powf(rng.gen_range(-3.0..0.5)))
            .collect();
        eigs.sort_by(|a, b| b.total_cmp(a));
        let blocks: Vec<(f64, u128)> = eigs
            .into_iter()
            .map(|e| (e, rng.gen_range(1..=5) as u128))
            .collect();
        let spectrum = SpectrumTable::synthetic(&blocks).unwrap();
        let config = ProblemConfig::new(
            2,
            Rational::one(),
            Rational::new(rng.gen_range(1..=4), rng.gen_range(1..=2)),
            1.0,
            10f64.powf(rng.gen_range(-2.0..2.0)),
            10f64.powf(rng.gen_range(-1.0..1.0)),
            Some(rng.gen_range(2..=100_000)),
        )
        .unwrap();
        if let Ok(solution) = solve_kappa(&spectrum, &config) {
            if solution.retained().all(|b| b.weight >= 1e-4) {
                return (spectrum, config, solution);
            }
        }
    }
}

/// Exhaustive per-coordinate reference solver: expands multiplicities and
/// scans every cutoff, verifying the consistency window directly.
fn brute_force_reference(
    spectrum: &SpectrumTable,
    config: &ProblemConfig,
) -> Option<(f64, u128)> {
    let s = config.smoothness.to_f64();
    let n = config.sample_size;
    let sig2 = config.noise_sigma * config.noise_sigma;
    let mut lambdas = Vec::new();
    for b in spectrum.sorted_blocks() {
        for _ in 0..b.multiplicity {
            lambdas.push(b.eigenvalue);
        }
    }
    let mut hits = Vec::new();
    let mut a = 0.0;
    let mut bsum = 0.0;
    for (m, &lam) in lambdas.iter().enumerate() {
        if lam <= 0.0 {
            break;
        }
        let inv_half = lam.powf(-s / 2.0);
        a += inv_half;
        bsum += inv_half * inv_half;
        let kappa = sig2 * a / (n * config.radius + sig2 * bsum);
        let own = lam.powf(s / 2.0);
        let next = lambdas.get(m + 1).map_or(0.0, |l| l.powf(s / 2.0));
        if own > kappa && next <= kappa {
            hits.push((kappa, (m + 1) as u128));
        }
    }
    (hits.len() == 1).then(|| hits[0])
}

fn solver_checks(seed: u64, out: &mut Vec<CheckResult>) {
    let mut rng = stream_rng(seed, 0, 7);
    let cases = 300;
    let mut identity_worst = 0.0f64;
    let mut mismatches = 0usize;
    let mut kappa_worst = 0.0f64;
    for _ in 0..cases {
        let (spectrum, config, sol) = random_case(&mut rng);
        identity_worst = identity_worst.max(sol.identity_residual);
        match brute_force_reference(&spectrum, &config) {
            Some((kappa, cutoff)) if cutoff == sol.cutoff => {
                kappa_worst = kappa_worst.max(((kappa - sol.kappa_star) / kappa).abs());
            }
            _ => mismatches += 1,
        }
    }
    out.push(CheckResult::new(
        "pinsker",
        "dstar_identity_random",
        identity_worst < 1e-10,
        format!("max identity residual over {cases} random spectra = {identity_worst:.2e} (tol 1e-10)"),
    ));
    out.push(CheckResult::new(
        "pinsker",
        "solver_vs_brute_force",
        mismatches == 0 && kappa_worst < 1e-12,
        format!("{mismatches} cutoff mismatches, max kappa gap {kappa_worst:.2e} (tol 1e-12)"),
    ));

    // Monotonicity of kappa* in R and n, and of D* in n.
    let spectrum = SpectrumTable::synthetic(&[(1.0, 2), (0.3, 3), (0.05, 4)]).unwrap();
    let cfg = |n: u64, r: f64| {
        ProblemConfig::new(2, Rational::one(), Rational::one(), 1.0, r, 1.0, Some(n)).unwrap()
    };
    let base = solve_kappa(&spectrum, &cfg(50, 1.0)).unwrap();
    let more_r = solve_kappa(&spectrum, &cfg(50, 3.0)).unwrap();
    let more_n = solve_kappa(&spectrum, &cfg(200, 1.0)).unwrap();
    let ok = more_r.kappa_star < base.kappa_star
        && more_n.kappa_star < base.kappa_star
        && more_n.dstar < base.dstar;
    out.push(CheckResult::new(
        "pinsker",
        "monotonicity",
        ok,
        format!(
            "kappa: base {:.4e}, R x3 -> {:.4e}, n x4 -> {:.4e}; dstar {:.4e} -> {:.4e}",
            base.kappa_star, more_r.kappa_star, more_n.kappa_star, base.dstar, more_n.dstar
        ),
    ));
}

fn harmonics_checks(seed: u64, out: &mut Vec<CheckResult>) {
    let mut worst_gram = 0.0f64;
    for d in [3usize, 5] {
        for degree in 0..=2usize {
            let basis = harmonic_basis(d, degree).unwrap();
            let g = basis.gram();
            for (i, row) in g.iter().enumerate() {
                for (j, &v) in row.iter().enumerate() {
                    let want = if i == j { 1.0 } else { 0.0 };
                    worst_gram = worst_gram.max((v - want).abs());
                }
            }
        }
    }
    out.push(CheckResult::new(
        "harmonics",
        "gram_identity",
        worst_gram < 1e-10,
        format!("max |G - I| entry = {worst_gram:.2e} (tol 1e-10)"),
    ));

    let mut worst_res = 0.0f64;
    let mut rng = stream_rng(seed, 1, 7);
    for d in [3usize, 5, 10] {
        for degree in 0..=2usize {
            for _ in 0..100 {
                let pts = sample_sphere(2, d, &mut rng).unwrap();
                let res = pinsker_core::harmonics::addition_check(
                    d,
                    degree,
                    pts.row(0),
                    pts.row(1),
                )
                .unwrap();
                worst_res = worst_res.max(res);
            }
        }
    }
    out.push(CheckResult::new(
        "harmonics",
        "addition_formula",
        worst_res < 1e-8,
        format!("max residual over 100 pairs x d in {{3,5,10}} x k<=2 = {worst_res:.2e} (tol 1e-8)"),
    ));
}

fn simulator_checks(config: &RunConfig, seed: u64, out: &mut Vec<CheckResult>) -> Result<()> {
    // Sequence-model identities on the configured problem when available,
    // else on the reference two-block spectrum.
    let (spectrum, problem) = match (config.build_spectrum(), config.build_problem()) {
        (Ok(s), Ok(p)) => (s, p),
        _ => (
            SpectrumTable::synthetic(&[(1.0, 1), (0.25, 2)]).unwrap(),
            ProblemConfig::new(2, Rational::one(), Rational::one(), 1.0, 1.0, 1.0, Some(10))
                .unwrap(),
        ),
    };
    let solution = solve_kappa(&spectrum, &problem)?;
    let sup = sequence_sup_risk(&solution, &problem);
    let gap = ((sup - solution.dstar) / solution.dstar).abs();
    out.push(CheckResult::new(
        "simulator",
        "sequence_sup_equals_dstar",
        gap < 1e-10,
        format!("rel gap sup-risk vs D* = {gap:.2e} (tol 1e-10)"),
    ));

    let theta = [0.6, -0.3, 0.2, 0.05];
    let weights = [0.9, 0.7, 0.4, 0.1];
    let eps = 0.25;
    let exact = sequence_exact_risk(&theta, &weights, eps);
    let (mc, se) = sequence_mc_risk(&theta, &weights, eps, 10_000, seed)?;
    out.push(CheckResult::new(
        "simulator",
        "sequence_mc_matches_exact",
        (mc - exact).abs() <= 4.0 * se,
        format!("mc {mc:.6e} vs exact {exact:.6e} (4se = {:.2e})", 4.0 * se),
    ));

    let delta = config.simulation().delta;
    let diag = lower_bound_diagnostics(&solution, &problem, delta)?;
    let mass_gap = ((diag.prior.mass(problem.smoothness.to_f64())
        - (1.0 - delta) * problem.radius)
        / problem.radius)
        .abs();
    let bayes_gap = ((diag.bayes_value - (1.0 - delta) * solution.dstar) / solution.dstar).abs();
    out.push(CheckResult::new(
        "simulator",
        "prior_mass_identity",
        mass_gap < 1e-10,
        format!("rel gap prior mass vs (1-delta)R = {mass_gap:.2e} (tol 1e-10)"),
    ));
    out.push(CheckResult::new(
        "simulator",
        "bayes_value_identity",
        bayes_gap < 1e-10,
        format!("rel gap Bayes value vs (1-delta)D* = {bayes_gap:.2e} (tol 1e-10)"),
    ));

    let designs = [1.0, 0.5, -1.5];
    let offsets = [0.2, 0.0, 0.4];
    let formula = bayes_risk(0.9, &designs, 1.1);
    let (bmc, bse) = bayes_risk_mc(0.9, &designs, &offsets, 1.1, 20_000, seed ^ 0x5a5a)?;
    out.push(CheckResult::new(
        "simulator",
        "bayes_risk_lemma",
        (bmc - formula).abs() <= 3.0 * bse,
        format!("mc {bmc:.6e} vs formula {formula:.6e} (3se = {:.2e})", 3.0 * bse),
    ));

    // Delta_n identities on S^3, degrees {0,1}.
    let bases = [harmonic_basis(3, 0)?, harmonic_basis(3, 1)?];
    let theta5 = vec![1.0; 5];
    let dd = delta_diagnostics(3, 100, &bases, &theta5, 400, seed ^ 0x77)?;
    let agg_ok =
        (dd.aggregate.estimate - dd.aggregate.target).abs() <= 4.0 * dd.aggregate.stderr;
    let cross_ok = dd
        .cross
        .iter()
        .all(|c| c.estimate.abs() <= 4.5 * c.stderr + 1e-15);
    let diag_ok = dd
        .diagonal
        .iter()
        .all(|m| (m.estimate - m.target).abs() <= 4.5 * m.stderr + 1e-15);
    out.push(CheckResult::new(
        "simulator",
        "delta_moment_identities",
        agg_ok && cross_ok && diag_ok,
        format!(
            "aggregate {:.4e} vs {:.4e} (se {:.1e}); cross/diag within 4.5 se: {}/{}",
            dd.aggregate.estimate, dd.aggregate.target, dd.aggregate.stderr, cross_ok, diag_ok
        ),
    ));
    Ok(())
}

fn convergence_checks(config: &RunConfig, grid: &[usize], out: &mut Vec<CheckResult>) -> Result<()> {
    let kernel = match config.build_kernel()? {
        Some(k) => k,
        None => return Ok(()),
    };
    let p = config.problem()?;
    let bound = asymptotic(p.gamma, p.s, p.alpha, p.radius, p.sigma, &kernel)?;
    let mut rows = String::new();
    let mut gaps = Vec::new();
    for &d in grid {
        let problem =
            ProblemConfig::new(d, p.gamma, p.s, p.alpha, p.radius, p.sigma, None)?;
        let degree_p = (p.gamma / (p.s + Rational::one())).floor_to_integer().max(0) as usize;
        let table = SpectrumTable::build(&kernel, d, (degree_p + 5).min(kernel.truncation_degree()))?;
        let sol = solve_kappa(&table, &problem)?;
        let predicted = bound.cstar * (d as f64).powf(-bound.zeta.to_f64());
        let ratio = sol.dstar / predicted;
        rows.push_str(&format!("d={d} ratio={ratio:.6} "));
        gaps.push((ratio - 1.0).abs());
        if let Some(expected_q) = predicted_top_degree(p.gamma, p.s) {
            if sol.q as u32 != expected_q && !alignment_boundary(p.gamma, p.s) {
                out.push(CheckResult::new(
                    "convergence",
                    format!("block_alignment_d{d}"),
                    false,
                    format!("q = {} but lemma predicts {}", sol.q, expected_q),
                ));
            }
        }
    }
    let monotone = gaps.windows(2).all(|w| w[1] <= w[0] + 1e-12);
    out.push(CheckResult::new(
        "convergence",
        "dstar_ratio_monotone",
        monotone,
        rows,
    ));
    Ok(())
}

pub fn render_table(results: &[CheckResult], quiet: bool) -> String {
    let mut out = String::new();
    let mut pass = 0;
    for r in results {
        if r.passed {
            pass += 1;
        }
        if !quiet || !r.passed {
            out.push_str(&format!(
                "[{}] {:12} {:32} {}\n",
                if r.passed { "PASS" } else { "FAIL" },
                r.section,
                r.name,
                r.detail
            ));
        }
    }
    out.push_str(&format!("{pass}/{} checks passed\n", results.len()));
    out
}
