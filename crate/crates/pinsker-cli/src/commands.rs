//! The five subcommands: spectrum, pinsker, curves, simulate, verify.

use std::path::{Path, PathBuf};

use serde_json::json;

use pinsker_core::asymptotic::{
    alignment_boundary, constant_curve, rate_curve, ConstantCurve, RateCurve,
};
use pinsker_core::pinsker::solve_kappa;
use pinsker_core::rational::Rational;
use pinsker_core::sim::{make_target, monte_carlo, stream_rng, Allocation, RegressionFunction};
use pinsker_core::{Error, Result};

use crate::config::RunConfig;
use crate::svg::{Chart, Series};
use crate::verify;

pub struct CommonArgs {
    pub out: Option<PathBuf>,
    pub format: Option<String>,
    pub quiet: bool,
}

fn emit(common: &CommonArgs, content: &str) -> Result<()> {
    match &common.out {
        Some(path) => std::fs::write(path, content)
            .map_err(|e| Error::InvalidConfig(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn emit_to(path: &Path, content: &str) -> Result<()> {
    std::fs::write(path, content)
        .map_err(|e| Error::InvalidConfig(format!("cannot write {}: {e}", path.display())))
}

fn format_of(common: &CommonArgs, config: &RunConfig, default: &str) -> String {
    common
        .format
        .clone()
        .or_else(|| config.output.as_ref().and_then(|o| o.format.clone()))
        .unwrap_or_else(|| default.to_string())
}

/// `pinsker spectrum`: the eigenvalue table as CSV or JSON.
pub fn cmd_spectrum(config: &RunConfig, common: &CommonArgs) -> Result<()> {
    let table = config.build_spectrum()?;
    let hash = config.hash();
    match format_of(common, config, "csv").as_str() {
        "csv" => {
            let mut out = format!("# config_hash={hash}\n");
            out.push_str(&table.to_csv());
            emit(common, &out)
        }
        "json" => {
            let truncation_tail = config
                .build_kernel()
                .ok()
                .flatten()
                .map(|k| k.truncation_tail());
            let doc = json!({
                "config_hash": hash,
                "dimension": table.dimension(),
                "trace": table.trace(),
                "complete": table.is_complete(),
                "leading_strictly_ordered": table.leading_strictly_ordered(table.blocks().len()),
                "truncation_tail_bound": truncation_tail,
                "blocks": table.blocks(),
            });
            emit(common, &format!("{}\n", serde_json::to_string_pretty(&doc).unwrap()))
        }
        other => Err(Error::InvalidConfig(format!(
            "spectrum output supports csv or json, got {other:?}"
        ))),
    }
}

/// `pinsker pinsker`: solved quantities as JSON.
pub fn cmd_pinsker(config: &RunConfig, common: &CommonArgs) -> Result<()> {
    let table = config.build_spectrum()?;
    let problem = config.build_problem()?;
    let solution = solve_kappa(&table, &problem)?;
    let p = config.problem()?;
    let doc = json!({
        "config_hash": config.hash(),
        "kappa_star": solution.kappa_star,
        "N": solution.cutoff,
        "q": solution.q,
        "dstar": solution.dstar,
        "identity_residual": solution.identity_residual,
        "boundary_ambiguous": alignment_boundary(p.gamma, p.s),
        "sample_size": problem.sample_size,
        "blocks": solution.blocks,
    });
    emit(common, &format!("{}\n", serde_json::to_string_pretty(&doc).unwrap()))
}

/// `pinsker curves`: rate and constant curves as CSV, optionally SVG.
pub fn cmd_curves(config: &RunConfig, common: &CommonArgs) -> Result<()> {
    let section = config
        .curves
        .as_ref()
        .ok_or_else(|| Error::InvalidConfig("missing [curves] section".into()))?;
    let kernel = config
        .build_kernel()?
        .ok_or_else(|| Error::InvalidConfig("curves need a [kernel] section".into()))?;
    let grid: Vec<Rational> = match (&section.gamma_grid, section.gamma_min, section.gamma_max) {
        (Some(g), _, _) => g.clone(),
        (None, Some(lo), Some(hi)) => {
            let step = section
                .gamma_step
                .unwrap_or_else(|| Rational::new(1, 10));
            if !(step.is_positive()) {
                return Err(Error::InvalidConfig("gamma_step must be positive".into()));
            }
            let mut g = Vec::new();
            let mut x = lo;
            while x <= hi {
                if x.is_positive() {
                    g.push(x);
                }
                x = x + step;
            }
            g
        }
        _ => Vec::new(),
    };
    if grid.is_empty() {
        return Err(Error::InvalidConfig("empty gamma grid".into()));
    }
    if section.s.is_empty() {
        return Err(Error::InvalidConfig("curves need at least one s".into()));
    }

    let mut rates: Vec<RateCurve> = Vec::new();
    let mut constants: Vec<ConstantCurve> = Vec::new();
    for &s in &section.s {
        rates.push(rate_curve(s, &grid, &kernel)?);
        constants.push(constant_curve(
            s,
            &grid,
            section.alpha,
            section.radius,
            section.sigma,
            &kernel,
        )?);
    }
    let hash = config.hash();

    let mut rate_csv = format!("# config_hash={hash}\n");
    for c in &rates {
        for p in &c.plateaus {
            rate_csv.push_str(&format!(
                "# plateau s={} zeta={} from={} to={}\n",
                c.s, p.zeta, p.start, p.end
            ));
        }
    }
    rate_csv.push_str("s,gamma,zeta\n");
    for c in &rates {
        for p in &c.points {
            rate_csv.push_str(&format!("{},{},{}\n", c.s, p.gamma, p.zeta));
        }
    }

    let mut const_csv = format!("# config_hash={hash}\n");
    for c in &constants {
        let marks: Vec<String> = c.jumps.iter().map(|j| j.to_string()).collect();
        const_csv.push_str(&format!("# jumps s={}: {}\n", c.s, marks.join(" ")));
    }
    const_csv.push_str("s,gamma,cstar,regime\n");
    for c in &constants {
        for p in &c.points {
            const_csv.push_str(&format!(
                "{},{},{:.17e},{}\n",
                c.s,
                p.gamma,
                p.cstar,
                serde_json::to_value(p.regime).unwrap().as_str().unwrap()
            ));
        }
    }

    match format_of(common, config, "csv").as_str() {
        "csv" => match &common.out {
            Some(path) => {
                emit_to(&suffixed(path, "rate.csv"), &rate_csv)?;
                emit_to(&suffixed(path, "constant.csv"), &const_csv)?;
                if !common.quiet {
                    eprintln!(
                        "wrote {} and {}",
                        suffixed(path, "rate.csv").display(),
                        suffixed(path, "constant.csv").display()
                    );
                }
                Ok(())
            }
            None => {
                print!("{rate_csv}");
                print!("{const_csv}");
                Ok(())
            }
        },
        "svg" => {
            let out = common.out.as_ref().ok_or_else(|| {
                Error::InvalidConfig("svg output needs --out PATH".into())
            })?;
            let rate_chart = Chart {
                title: "exact minimax rate".into(),
                x_label: "gamma".into(),
                y_label: "zeta".into(),
                series: rates
                    .iter()
                    .map(|c| Series {
                        label: format!("s={}", c.s),
                        points: c
                            .points
                            .iter()
                            .map(|p| (p.gamma.to_f64(), p.zeta.to_f64()))
                            .collect(),
                        markers: Vec::new(),
                    })
                    .collect(),
            };
            let const_chart = Chart {
                title: "Pinsker constant".into(),
                x_label: "gamma".into(),
                y_label: "C*".into(),
                series: constants
                    .iter()
                    .map(|c| Series {
                        label: format!("s={}", c.s),
                        points: c
                            .points
                            .iter()
                            .map(|p| (p.gamma.to_f64(), p.cstar))
                            .collect(),
                        markers: c
                            .points
                            .iter()
                            .filter(|p| c.jumps.contains(&p.gamma))
                            .map(|p| (p.gamma.to_f64(), p.cstar))
                            .collect(),
                    })
                    .collect(),
            };
            let stamp = format!("<!-- config_hash={hash} -->\n");
            emit_to(&suffixed(out, "rate.svg"), &(stamp.clone() + &rate_chart.render()))?;
            emit_to(&suffixed(out, "constant.svg"), &(stamp + &const_chart.render()))?;
            Ok(())
        }
        other => Err(Error::InvalidConfig(format!(
            "curves output supports csv or svg, got {other:?}"
        ))),
    }
}

fn suffixed(path: &Path, suffix: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().to_string())
        .unwrap_or_else(|| "curves".into());
    path.with_file_name(format!("{stem}_{suffix}"))
}

/// Builds the simulation target family from the config strings, or the
/// default worst-case family.
fn build_targets(
    config: &RunConfig,
    spectrum: &pinsker_core::SpectrumTable,
    solution: &pinsker_core::PinskerSolution,
    s: f64,
    radius: f64,
    seed: u64,
) -> Result<Vec<RegressionFunction>> {
    let mut rng = stream_rng(seed, u64::MAX, 2);
    let retained: Vec<usize> = solution.retained().map(|b| b.degree).collect();
    let sim = config.simulation();
    let mut targets = Vec::new();
    match &sim.targets {
        Some(names) => {
            for name in names {
                let alloc = match name.as_str() {
                    "zero" => Allocation::Zero,
                    "uniform" => Allocation::Uniform,
                    "prior" => Allocation::Prior(solution),
                    other => {
                        let k = other
                            .strip_prefix("single_block:")
                            .or_else(|| other.strip_prefix("single:"))
                            .and_then(|v| v.parse::<usize>().ok())
                            .ok_or_else(|| {
                                Error::InvalidConfig(format!("unknown target {other:?}"))
                            })?;
                        Allocation::SingleBlock(k)
                    }
                };
                let degrees: &[usize] = match alloc {
                    Allocation::SingleBlock(_) | Allocation::Zero => &[],
                    _ => &retained,
                };
                targets.push(make_target(spectrum, s, radius, alloc, degrees, &mut rng)?);
            }
        }
        None => {
            for &k in &retained {
                targets.push(make_target(
                    spectrum,
                    s,
                    radius,
                    Allocation::SingleBlock(k),
                    &[],
                    &mut rng,
                )?);
            }
            // the first dropped block, when the table still carries it
            let next = solution.q + 1;
            if spectrum.block(next).is_some_and(|b| b.eigenvalue > 0.0) {
                targets.push(make_target(
                    spectrum,
                    s,
                    radius,
                    Allocation::SingleBlock(next),
                    &[],
                    &mut rng,
                )?);
            }
            if retained.len() > 1 {
                targets.push(make_target(
                    spectrum,
                    s,
                    radius,
                    Allocation::Uniform,
                    &retained,
                    &mut rng,
                )?);
            }
            targets.push(make_target(
                spectrum,
                s,
                radius,
                Allocation::Prior(solution),
                &retained,
                &mut rng,
            )?);
        }
    }
    Ok(targets)
}

/// `pinsker simulate`: Monte Carlo excess risk of the filter vs D*.
pub fn cmd_simulate(
    config: &RunConfig,
    common: &CommonArgs,
    reps_flag: Option<usize>,
    seed_flag: Option<u64>,
) -> Result<()> {
    let sim = config.simulation();
    let reps = reps_flag.unwrap_or(sim.reps);
    if reps < 2 {
        return Err(Error::InvalidConfig(format!(
            "need at least 2 replications, got {reps}"
        )));
    }
    let seed = seed_flag.unwrap_or(sim.seed);
    let table = config.build_spectrum()?;
    let problem = config.build_problem()?;
    let solution = solve_kappa(&table, &problem)?;
    let s = problem.smoothness.to_f64();
    let targets = build_targets(config, &table, &solution, s, problem.radius, seed)?;
    let report = monte_carlo(
        &problem,
        &solution,
        &table,
        &targets,
        reps,
        seed,
        sim.gram_cap,
    )?;

    let p = config.problem()?;
    let hash = config.hash();
    match format_of(common, config, "json").as_str() {
        "json" => {
            let doc = json!({
                "config_hash": hash,
                "d": p.dimension,
                "gamma": p.gamma,
                "s": p.s,
                "report": report,
            });
            emit(common, &format!("{}\n", serde_json::to_string_pretty(&doc).unwrap()))
        }
        "csv" => {
            let mut out =
                String::from("config_hash,d,gamma,s,reps,mean,stderr,dstar,ratio,seed\n");
            out.push_str(&format!(
                "{hash},{},{},{},{},{:.17e},{:.17e},{:.17e},{:.6},{}\n",
                p.dimension,
                p.gamma,
                p.s,
                report.replications,
                report.max_mean_risk,
                report
                    .targets
                    .iter()
                    .max_by(|a, b| a.mean_risk.total_cmp(&b.mean_risk))
                    .map(|t| t.stderr_risk)
                    .unwrap_or(0.0),
                report.dstar,
                report.max_ratio,
                report.seed,
            ));
            emit(common, &out)
        }
        other => Err(Error::InvalidConfig(format!(
            "simulate output supports json or csv, got {other:?}"
        ))),
    }
}

/// `pinsker verify`: the invariant suite; returns false when any check fails.
pub fn cmd_verify(
    config: &RunConfig,
    common: &CommonArgs,
    d_grid: Option<Vec<usize>>,
    seed_flag: Option<u64>,
) -> Result<bool> {
    let seed = seed_flag.unwrap_or_else(|| config.simulation().seed);
    let results = verify::run_suite(config, d_grid.as_deref(), seed)?;
    let mut out = format!("# config_hash={}\n", config.hash());
    out.push_str(&verify::render_table(&results, common.quiet));
    emit(common, &out)?;
    Ok(results.iter().all(|r| r.passed))
}

/// Debug dump of an explicit harmonic basis (degree ≤ 2) as JSON.
pub fn cmd_dump_basis(common: &CommonArgs, d: usize, degree: usize) -> Result<()> {
    let basis = pinsker_core::harmonics::harmonic_basis(d, degree)?;
    let functions: Vec<Vec<serde_json::Value>> = basis
        .functions
        .iter()
        .map(|f| {
            f.terms()
                .map(|(idx, coeff)| {
                    json!({ "exponents": idx.exponents(), "coefficient": coeff })
                })
                .collect()
        })
        .collect();
    let doc = json!({
        "dimension": d,
        "degree": degree,
        "size": basis.len(),
        "functions": functions,
    });
    emit(common, &format!("{}\n", serde_json::to_string_pretty(&doc).unwrap()))
}
