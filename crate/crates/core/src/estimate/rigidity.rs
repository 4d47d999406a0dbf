use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{gauss_map_with, shape_and_mean_curvature, GaussField, GeometryFields};
use crate::grid::GridDomain;
use crate::solver::{solve, DirichletProblem, Solution, SolverConfig};

use super::comparison::ComparisonFn;
use super::phi::{estimate_from_fields, interior_ball, phi_field, EstimateReport};

/// Boundary data `t . x + A exp(-|x - p|^2 / w^2)` on `[-L, L]^m`, where the
/// bump center `p = (L, 0, ..., 0)` sits on the boundary and `L = extent * a`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlaneBump {
    pub tilt: Vec<f64>,
    pub amplitude: f64,
    pub width: f64,
    /// Half-width of the box as a multiple of `a`.
    pub extent: f64,
    pub spacing: f64,
}

impl Default for PlaneBump {
    fn default() -> Self {
        Self {
            tilt: vec![0.2, 0.1],
            amplitude: 0.4,
            width: 1.0,
            extent: 1.0,
            spacing: 0.125,
        }
    }
}

impl PlaneBump {
    pub fn plane(tilt: Vec<f64>) -> Self {
        Self {
            tilt,
            amplitude: 0.0,
            ..Self::default()
        }
    }

    pub fn dim(&self) -> usize {
        self.tilt.len()
    }

    pub fn half_width(&self, a: f64) -> f64 {
        self.extent * a
    }

    pub fn domain(&self, a: f64) -> Result<GridDomain> {
        let half = self.half_width(a);
        let cells = (2.0 * half / self.spacing).round();
        if (cells * self.spacing - 2.0 * half).abs() > 1e-9 * half.max(1.0) {
            return Err(Error::Domain(format!(
                "box half-width {half} is not a multiple of the spacing {}",
                self.spacing
            )));
        }
        GridDomain::centered_cube(self.dim(), half, cells as usize + 1)
    }

    pub fn eval(&self, a: f64, x: &[f64]) -> f64 {
        let half = self.half_width(a);
        let plane: f64 = self.tilt.iter().zip(x).map(|(t, v)| t * v).sum();
        let d2: f64 = x
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let p = if i == 0 { half } else { 0.0 };
                (v - p) * (v - p)
            })
            .sum();
        plane + self.amplitude * (-d2 / (self.width * self.width)).exp()
    }

    pub fn problem(&self, a: f64) -> Result<DirichletProblem> {
        let domain = self.domain(a)?;
        DirichletProblem::from_fn(domain, |x| self.eval(a, x), 0.0)
    }
}

/// A solved family member with its geometry.
pub struct FamilyMember {
    pub a: f64,
    pub solution: Solution,
    pub geo: GeometryFields,
    pub gauss: GaussField,
}

pub fn solve_member(family: &PlaneBump, a: f64, config: &SolverConfig) -> Result<FamilyMember> {
    let problem = family.problem(a)?;
    let solution = solve(&problem, config)?;
    if !solution.converged() {
        return Err(Error::Domain(format!(
            "solve at a = {a} did not converge ({:?}, residual {:e})",
            solution.report.status, solution.report.residual_sup
        )));
    }
    let graph = solution.graph()?;
    let geo = shape_and_mean_curvature(&graph)?;
    let gauss = gauss_map_with(&graph, &geo);
    Ok(FamilyMember {
        a,
        solution,
        geo,
        gauss,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct TrendRow {
    pub a: f64,
    pub nodes_per_axis: usize,
    pub newton_iterations: usize,
    /// `sup |h|` over the intrinsic ball of radius `a / 2` around the center.
    pub sup_h: f64,
    /// Smallest upper half-space height of the Gauss image over the grid.
    pub min_height: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct TrendReport {
    pub c: f64,
    pub rows: Vec<TrendRow>,
    /// `sup_h(a_{i+1}) / sup_h(a_i)`; zero where both vanish.
    pub ratios: Vec<f64>,
    pub max_ratio: f64,
    pub decreasing: bool,
    /// Set when some member failed; rows cover the members before it.
    pub failure: Option<String>,
}

/// Solve the family at every `a` and tabulate the decay of `sup |h|` on the
/// half ball. Every member's Gauss image must lie in the horoball `{z_m > c}`; otherwise the violation is returned as an
/// error. The comparison function is the constant `g_level` on every member.
pub fn hyperplane_rigidity_trend(
    family: &PlaneBump,
    a_list: &[f64],
    g_level: f64,
    c: f64,
    config: &SolverConfig,
) -> Result<TrendReport> {
    let mut rows = Vec::new();
    let mut failure = None;
    for &a in a_list {
        let member = match solve_member(family, a, config) {
            Ok(member) => member,
            Err(e) => {
                failure = Some(e.to_string());
                break;
            }
        };
        let domain = member.geo.domain().clone();
        let center = domain.center_node();
        let half_ball = interior_ball(&member.geo, center, a / 2.0)?;
        let g = ComparisonFn::constant(&domain, g_level);
        let phi = phi_field(&member.gauss, &g, c)?;
        let (argmin, min_height) = phi
            .busemann
            .height
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (i, z)| if z < acc.1 { (i, z) } else { acc });
        if !(min_height > c) {
            return Err(Error::HoroballViolation {
                node: argmin,
                gap: phi.busemann.values[argmin],
            });
        }
        let sup_h = half_ball
            .nodes
            .iter()
            .map(|&q| member.geo.h_norm_sq[q].max(0.0).sqrt())
            .fold(0.0, f64::max);
        rows.push(TrendRow {
            a,
            nodes_per_axis: domain.shape()[0],
            newton_iterations: member.solution.report.iterations,
            sup_h,
            min_height,
        });
    }
    let ratios: Vec<f64> = rows
        .windows(2)
        .map(|w| if w[0].sup_h == 0.0 { 0.0 } else { w[1].sup_h / w[0].sup_h })
        .collect();
    let max_ratio = ratios.iter().copied().fold(0.0, f64::max);
    let decreasing = rows.windows(2).all(|w| w[1].sup_h < w[0].sup_h || w[0].sup_h == 0.0);
    Ok(TrendReport {
        c,
        rows,
        ratios,
        max_ratio,
        decreasing,
        failure,
    })
}

/// Gradient-estimate reports at the box center for every `a` of the family,
/// with the constant comparison function `g_level`.
pub fn estimate_trend(
    family: &PlaneBump,
    a_list: &[f64],
    g_level: f64,
    c: f64,
    config: &SolverConfig,
) -> Result<Vec<EstimateReport>> {
    a_list
        .iter()
        .map(|&a| {
            let member = solve_member(family, a, config)?;
            let domain = member.geo.domain().clone();
            let g = ComparisonFn::constant(&domain, g_level);
            estimate_from_fields(&member.geo, &member.gauss, domain.center_node(), a, &g, c)
        })
        .collect()
}
