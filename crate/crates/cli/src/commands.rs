use std::path::Path;

use serde_json::{json, Value};
use spacelike_core::codim2::{codazzi_defect, equivalence_check, equivalence_suite, IDENTITY_TOL};
use spacelike_core::error::Error;
use spacelike_core::estimate::{
    bochner_check, default_samples, estimate_trend, gradient_estimate_report, hyperplane_rigidity_trend,
    key_inequality_check, mean_curvature_vanishing_check, superharmonic_check, ComparisonFn, PlaneBump,
};
use spacelike_core::geometry::{
    check_spacelike, cmc_residual, gauss_map_with, interior_sup, ricci_min, shape_and_mean_curvature,
    tension_field, SpacelikeGraph, DEFAULT_SLACK,
};
use spacelike_core::grid::GridDomain;
use spacelike_core::hyperbolic::self_test;
use spacelike_core::io::{header_path, read_fields, write_fields, FieldSet, HEADER_SUFFIX};
use spacelike_core::problem::ProblemSpec;
use spacelike_core::solver::{central_and_interior_diagnostics, solve, Solution};

use crate::config::{Command, RunConfig};
use crate::report::{Check, Outcome};
use crate::CliError;

/// Defaults used when no override is given.
pub const DEFAULT_C: f64 = 0.25;
pub const ENERGY_TOL: f64 = 5e-2;
pub const TENSION_TOL: f64 = 0.1;
pub const RATIO_TOL: f64 = 0.7;
/// Allowed growth of the implied constant between successive `a`.
pub const TREND_SLACK: f64 = 0.1;
/// `sup |h|` at or below this counts as flat.
pub const FLAT_TOL: f64 = 1e-10;
pub const BOCHNER_SAMPLES: usize = 100;

/// Inputs parsed before any computation; failures here are schema or I/O
/// errors rather than failed checks.
pub enum Prepared {
    Problem(Box<ProblemSpec>),
    Field(FieldSet),
    Nothing,
}

pub fn prepare(cfg: &RunConfig) -> Result<Prepared, CliError> {
    if let Some(p) = &cfg.problem {
        return Ok(Prepared::Problem(Box::new(apply_problem_overrides(p.clone(), cfg)?)));
    }
    let Some(path) = &cfg.input else {
        return match cfg.command {
            Command::Solve | Command::Analyze => Err(CliError::Schema(format!(
                "{} needs --input or an inline problem",
                cfg.command.name()
            ))),
            _ => Ok(Prepared::Nothing),
        };
    };
    if is_field_header(path) {
        if cfg.command == Command::Solve {
            return Err(CliError::Schema("solve takes a problem file, not a field".into()));
        }
        return read_fields(path).map(Prepared::Field).map_err(CliError::from_input);
    }
    let spec = ProblemSpec::load(path).map_err(CliError::from_input)?;
    Ok(Prepared::Problem(Box::new(apply_problem_overrides(spec, cfg)?)))
}

fn is_field_header(path: &Path) -> bool {
    path.to_str().is_some_and(|s| s.ends_with(HEADER_SUFFIX))
}

fn apply_problem_overrides(mut spec: ProblemSpec, cfg: &RunConfig) -> Result<ProblemSpec, CliError> {
    let o = &cfg.overrides;
    if let Some(grid) = &o.grid {
        spec.domain.nodes = grid[0];
    }
    if let Some(h) = o.mean_curvature {
        spec.mean_curvature = h;
    }
    let mut solver = spec.solver_config();
    if let Some(t) = o.tol {
        solver.tol = t;
    }
    solver.deterministic |= cfg.deterministic;
    solver.validate().map_err(|e| CliError::Schema(e.to_string()))?;
    spec.solver = Some(solver);
    // Surface bad boundary specs before the run starts.
    spec.dirichlet().map_err(|e| CliError::Schema(e.to_string()))?;
    Ok(spec)
}

pub fn run_command(cfg: &RunConfig, input: Prepared) -> Result<Outcome, Error> {
    match cfg.command {
        Command::Solve => match input {
            Prepared::Problem(p) => solve_cmd(cfg, &p),
            _ => unreachable!("prepare requires a problem for solve"),
        },
        Command::Analyze => analyze(cfg, input),
        Command::VerifyEstimate => verify_estimate(cfg, input),
        Command::RigidityTrend => rigidity(cfg),
        Command::Codim2 => codim2(cfg, input),
        Command::HyperbolicSelftest => selftest(cfg),
    }
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

fn solve_problem(spec: &ProblemSpec) -> Result<Solution, Error> {
    solve(&spec.dirichlet()?, &spec.solver_config())
}

fn solve_cmd(cfg: &RunConfig, spec: &ProblemSpec) -> Result<Outcome, Error> {
    let solution = solve_problem(spec)?;
    let solver = spec.solver_config();
    let exact_error = spec.exact()?.map(|e| {
        let want = e.sample(&solution.domain);
        solution
            .u
            .iter()
            .zip(&want)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    });
    let mut set = FieldSet::new(solution.domain.clone()).with("u", solution.u.clone())?;
    set.provenance.insert("command".into(), json!("solve"));
    set.provenance.insert("H".into(), json!(spec.mean_curvature));
    set.provenance.insert("seed".into(), json!(cfg.seed));
    write_fields(&cfg.out.join("solution"), &set, cfg.encoding)?;
    let checks = vec![
        Check::holds("converged", solution.converged()),
        Check::at_most("residual_sup", solution.report.residual_sup, solver.tol),
    ];
    Ok(Outcome {
        checks,
        result: json!({
            "problem": spec,
            "solve": solution.report,
            "exact_error": exact_error,
        }),
        artifacts: field_artifacts("solution", cfg),
    })
}

fn field_artifacts(stem: &str, cfg: &RunConfig) -> Vec<String> {
    vec![
        header_path(Path::new(stem)).display().to_string(),
        format!("{stem}.{}", cfg.encoding.extension()),
    ]
}

/// The graph to analyze and its mean curvature, when known.
fn load_graph(cfg: &RunConfig, input: Prepared) -> Result<(SpacelikeGraph, Option<f64>, Value), Error> {
    match input {
        Prepared::Problem(spec) => {
            let s = solve_problem(&spec)?;
            if !s.converged() {
                return Err(Error::Domain(format!(
                    "solve did not converge ({:?}, residual {:e})",
                    s.report.status, s.report.residual_sup
                )));
            }
            let source = json!({"solved": true, "solve": s.report});
            Ok((s.graph()?, Some(spec.mean_curvature), source))
        }
        Prepared::Field(set) => {
            let u = set.require("u")?.to_vec();
            let h = cfg
                .overrides
                .mean_curvature
                .or_else(|| set.provenance.get("H").and_then(Value::as_f64));
            let graph = SpacelikeGraph::new(set.domain.clone(), u, DEFAULT_SLACK)?;
            Ok((graph, h, json!({"solved": false, "provenance": set.provenance})))
        }
        Prepared::Nothing => Err(Error::Domain("no input field".into())),
    }
}

fn analyze(cfg: &RunConfig, input: Prepared) -> Result<Outcome, Error> {
    let (graph, h, source) = load_graph(cfg, input)?;
    let domain = graph.domain().clone();
    let spacelike = check_spacelike(graph.values(), &domain, graph.slack())?;
    let geo = shape_and_mean_curvature(&graph)?;
    let gauss = gauss_map_with(&graph, &geo);
    let tension = tension_field(&gauss, &geo);
    let ricci = ricci_min(&geo);
    let (central, interior) = central_and_interior_diagnostics(&graph)?;
    let h_norm: Vec<f64> = geo.h_norm_sq.iter().map(|v| v.max(0.0).sqrt()).collect();
    let (h_min, h_max) = domain
        .interior_nodes()
        .iter()
        .map(|&q| geo.mean_curvature[q])
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    let residual_sup = match h {
        Some(h) => Some(interior_sup(&domain, &cmc_residual(&graph, h)?)),
        None => None,
    };
    let energy_tol = cfg.overrides.tol.unwrap_or(ENERGY_TOL);
    let mut checks = vec![Check::at_most("energy_identity_central", central.energy_discrepancy, energy_tol)];
    // The Gauss map is harmonic only for constant mean curvature.
    if h.is_some() {
        checks.push(Check::at_most("tension_central", central.tension_sup, TENSION_TOL));
    }

    let mut set = FieldSet::new(domain.clone())
        .with("u", graph.values().to_vec())?
        .with("H", geo.mean_curvature.clone())?
        .with("h_norm", h_norm.clone())?
        .with("tension_norm", tension.norm.clone())?
        .with("ricci_min", ricci.min_eigenvalue.clone())?;
    for (i, z) in gauss.upper_half_components().into_iter().enumerate() {
        set.push(&format!("gauss_z{}", i + 1), z)?;
    }
    set.provenance.insert("command".into(), json!("analyze"));
    set.provenance.insert("seed".into(), json!(cfg.seed));
    write_fields(&cfg.out.join("analysis"), &set, cfg.encoding)?;

    Ok(Outcome {
        checks,
        result: json!({
            "source": source,
            "mean_curvature": h,
            "spacelike": spacelike,
            "sup_h_norm": interior_sup(&domain, &h_norm),
            "mean_curvature_range": [h_min, h_max],
            "cmc_residual_sup": residual_sup,
            "ricci": ricci,
            "energy_identity": {"central": central.energy_discrepancy, "interior": interior.energy_discrepancy},
            "tension": {"central": central.tension_sup, "interior": interior.tension_sup},
        }),
        artifacts: field_artifacts("analysis", cfg),
    })
}

fn verify_estimate(cfg: &RunConfig, input: Prepared) -> Result<Outcome, Error> {
    let c = cfg.overrides.c.unwrap_or(DEFAULT_C);
    if let Prepared::Nothing = input {
        return estimate_family(cfg, c);
    }
    let (graph, _, source) = load_graph(cfg, input)?;
    let domain = graph.domain().clone();
    let half = min_half_extent(&domain);
    let a = cfg.overrides.a_list.as_ref().map_or(0.5 * half, |v| v[0]);
    let g = ComparisonFn::constant(&domain, 0.0);
    let samples = default_samples(&domain, BOCHNER_SAMPLES);
    let estimate = gradient_estimate_report(&graph, domain.center_node(), a, &g, c)?;
    let bochner = bochner_check(&graph, &samples)?;
    let key = key_inequality_check(&graph, &g, c, &samples)?;
    let vanishing = mean_curvature_vanishing_check(&graph, &g, c, &samples)?;
    let geo = shape_and_mean_curvature(&graph)?;
    let superharmonic = superharmonic_check(&g, &geo.metric);
    let checks = vec![
        Check::holds("superharmonic_comparison", superharmonic.pass),
        Check::at_most("bochner_violation", bochner.max_violation(), bochner.tolerance),
        Check::holds("key_inequality", key.pass()),
        Check::holds("mean_curvature_chain", vanishing.pass()),
    ];
    Ok(Outcome {
        checks,
        result: json!({
            "source": source,
            "c": c,
            "estimate": estimate,
            "superharmonic": superharmonic,
            "bochner": bochner,
            "key_inequality": key,
            "mean_curvature_chain": vanishing,
        }),
        artifacts: vec![],
    })
}

fn min_half_extent(domain: &GridDomain) -> f64 {
    domain
        .shape()
        .iter()
        .map(|&n| 0.5 * (n - 1) as f64 * domain.spacing())
        .fold(f64::INFINITY, f64::min)
}

fn estimate_family(cfg: &RunConfig, c: f64) -> Result<Outcome, Error> {
    let family = cfg.family.clone().unwrap_or(PlaneBump {
        extent: 1.25,
        ..PlaneBump::default()
    });
    let a_list = cfg.overrides.a_list.clone().unwrap_or_else(|| vec![2.0, 4.0, 8.0]);
    let slack = cfg.overrides.tol.unwrap_or(TREND_SLACK);
    let mut solver = spacelike_core::solver::SolverConfig::default();
    solver.deterministic |= cfg.deterministic;
    let reports = estimate_trend(&family, &a_list, 0.0, c, &solver)?;
    let growth = reports
        .windows(2)
        .map(|w| if w[0].scaled_sup == 0.0 { 0.0 } else { w[1].scaled_sup / w[0].scaled_sup - 1.0 })
        .fold(0.0, f64::max);
    let mut csv = String::from("a,k,sup_phi,scaled_sup,implied_constant,min_gap\n");
    for r in &reports {
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.a, r.k, r.sup_phi, r.scaled_sup, r.implied_constant, r.min_gap
        ));
    }
    crate::report::write(&cfg.out.join("estimate_trend.csv"), csv.as_bytes()).map_err(cli_to_core)?;
    Ok(Outcome {
        checks: vec![Check::at_most("implied_constant_growth", growth, slack)],
        result: json!({"family": family, "c": c, "reports": reports}),
        artifacts: vec!["estimate_trend.csv".into()],
    })
}

fn cli_to_core(e: CliError) -> Error {
    Error::Io(std::io::Error::other(e.to_string()))
}

fn rigidity(cfg: &RunConfig) -> Result<Outcome, Error> {
    let family = cfg.family.clone().unwrap_or_default();
    let a_list = cfg.overrides.a_list.clone().unwrap_or_else(|| vec![4.0, 8.0]);
    let c = cfg.overrides.c.unwrap_or(DEFAULT_C);
    let bound = cfg.overrides.tol.unwrap_or(RATIO_TOL);
    let mut solver = spacelike_core::solver::SolverConfig::default();
    solver.deterministic |= cfg.deterministic;
    let trend = hyperplane_rigidity_trend(&family, &a_list, 0.0, c, &solver)?;
    let mut checks = vec![Check::holds("all_members_solved", trend.failure.is_none())];
    for (i, w) in trend.rows.windows(2).enumerate() {
        // A flat member has nothing left to decay.
        let ratio = if w[1].sup_h <= FLAT_TOL { 0.0 } else { trend.ratios[i] };
        checks.push(Check::at_most(&format!("ratio_a{}_to_a{}", w[0].a, w[1].a), ratio, bound));
    }
    let mut csv = String::from("a,nodes_per_axis,newton_iterations,sup_h,min_height\n");
    for r in &trend.rows {
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            r.a, r.nodes_per_axis, r.newton_iterations, r.sup_h, r.min_height
        ));
    }
    crate::report::write(&cfg.out.join("trend.csv"), csv.as_bytes()).map_err(cli_to_core)?;
    Ok(Outcome {
        checks,
        result: json!({"family": family, "trend": trend}),
        artifacts: vec!["trend.csv".into()],
    })
}

fn codim2(cfg: &RunConfig, input: Prepared) -> Result<Outcome, Error> {
    let tol = cfg.overrides.tol.unwrap_or(IDENTITY_TOL);
    if let Prepared::Field(set) = input {
        let f = set.to_second_form()?;
        let report = equivalence_check(&f, tol);
        let codazzi = interior_sup(f.domain(), &codazzi_defect(&f));
        return Ok(Outcome {
            checks: vec![Check::at_most("equivalence_discrepancy", report.max_discrepancy, tol)],
            result: json!({"equivalence": report, "codazzi_defect_sup": codazzi}),
            artifacts: vec![],
        });
    }
    let nodes = cfg.overrides.grid.as_ref().map_or(33, |g| g[0]);
    let fields = cfg.overrides.fields.unwrap_or(20);
    let suite = equivalence_suite(cfg.seed, fields, nodes, tol)?;
    let checks = vec![
        Check::at_most("equivalence_discrepancy", suite.max_discrepancy, tol),
        Check::at_most("reconstruction_error", suite.max_reconstruction_error, tol),
        Check::at_most("potential_residual", suite.potential_max_residual, suite.potential_tolerance),
        Check::at_most("adapted_energy_gap", suite.adapted_energy_gap, 0.0),
        Check::holds("adapted_block", suite.adapted_block_matches),
    ];
    Ok(Outcome {
        checks,
        result: to_value(&suite),
        artifacts: vec![],
    })
}

fn selftest(cfg: &RunConfig) -> Result<Outcome, Error> {
    let samples = cfg.overrides.samples.unwrap_or(100);
    let r = self_test(cfg.seed, samples)?;
    let checks = vec![
        Check::at_most("round_trip", r.max_round_trip, 1e-10),
        Check::at_most("isometry", r.max_isometry, 1e-9),
        Check::at_most("busemann_limit", r.max_limit_error, 1e-6),
        Check::holds("busemann_limit_monotone", r.limit_monotone),
        Check::at_most("hessian_identity", r.max_hessian_residual, 1e-9),
        Check::at_most("unit_gradient", r.max_gradient_defect, 1e-10),
    ];
    Ok(Outcome {
        checks,
        result: to_value(&r),
        artifacts: vec![],
    })
}
