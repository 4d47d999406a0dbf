use std::collections::HashMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{GeometryFields, LaplaceBeltrami, MetricFields};
use crate::grid::gradient;
use crate::linalg::{conjugate_gradient, CsrMatrix, KrylovOptions};

use super::comparison::ComparisonFn;
use super::phi::{interior_ball, ricci_constants};

/// Solve `Lap phi = source` on interior nodes with Dirichlet data taken from
/// the boundary entries of `boundary`. The system is `-sqrt(g) Lap`, which is
/// symmetric positive definite, so plain CG applies.
pub fn solve_laplace_beltrami(lap: &LaplaceBeltrami, boundary: &[f64], source: &[f64]) -> Result<Vec<f64>> {
    let domain = lap.domain();
    domain.check_field(boundary)?;
    domain.check_field(source)?;
    let interior = lap.interior();
    let slot: HashMap<usize, usize> = interior.iter().enumerate().map(|(k, &p)| (p, k)).collect();
    let mut rows = Vec::with_capacity(interior.len());
    let mut rhs = Vec::with_capacity(interior.len());
    for (k, row) in lap.weighted_rows().iter().enumerate() {
        let p = interior[k];
        let mut b = -lap.sqrt_det_g()[p] * source[p];
        let mut out = Vec::with_capacity(row.len());
        for &(q, w) in row {
            match slot.get(&q) {
                Some(&col) => out.push((col, -w)),
                None => b += w * boundary[q],
            }
        }
        rows.push(out);
        rhs.push(b);
    }
    let a = CsrMatrix::from_rows(rows);
    let opts = KrylovOptions {
        rel_tol: 1e-13,
        max_iter: 100_000,
    };
    let sol = conjugate_gradient(&a, &rhs, opts)?;
    let mut phi = boundary.to_vec();
    for (k, &p) in interior.iter().enumerate() {
        phi[p] = sol.x[k];
    }
    Ok(phi)
}

#[derive(Clone, Debug, Serialize)]
pub struct ScalarLiouvilleReport {
    pub a: f64,
    pub center: usize,
    pub k: f64,
    pub sup_ratio: f64,
    pub argmax: usize,
    /// `sup_ratio * a / (1 + k a)`.
    pub implied_constant: f64,
    pub min_gap: f64,
    pub gap_shift: f64,
    /// The harmonic function itself.
    #[serde(skip)]
    pub f: Vec<f64>,
    /// `|grad f| / (f - g)` on the half ball, NaN elsewhere.
    #[serde(skip)]
    pub ratio: Vec<f64>,
}

/// Solve for the harmonic function with the given boundary data, then measure
/// `sup |grad f| / (f - g)` over the intrinsic ball of radius `a / 2`. The gap
/// `f - g` is normalized to be at least 1 over the ball of radius `a`.
pub fn scalar_liouville_check(
    geo: &GeometryFields,
    boundary: &[f64],
    g: &ComparisonFn,
    center: usize,
    a: f64,
) -> Result<ScalarLiouvilleReport> {
    let metric: &MetricFields = &geo.metric;
    let domain = &metric.domain;
    domain.check_field(g.values())?;
    let lap = LaplaceBeltrami::new(metric);
    let f = solve_laplace_beltrami(&lap, boundary, &vec![0.0; domain.len()])?;
    let ball = interior_ball(geo, center, a)?;
    let gv = g.values();
    let (raw_min, argmin) = ball
        .nodes
        .iter()
        .map(|&q| (f[q] - gv[q], q))
        .fold((f64::INFINITY, center), |acc, x| if x.0 < acc.0 { x } else { acc });
    if !(raw_min > 0.0) {
        return Err(Error::Domain(format!(
            "harmonic function does not lie above g: f - g = {raw_min} at node {argmin}"
        )));
    }
    let shift = if raw_min < 1.0 { 1.0 - raw_min } else { 0.0 };
    let mut ratio = vec![f64::NAN; domain.len()];
    let mut sup_ratio = 0.0f64;
    let mut argmax = center;
    for q in ball.within(a / 2.0) {
        let grad = metric.norm_sq(q, &gradient(domain, &f, q)).sqrt();
        let r = grad / (f[q] - gv[q] + shift);
        ratio[q] = r;
        if r > sup_ratio {
            sup_ratio = r;
            argmax = q;
        }
    }
    let (k, _) = ricci_constants(geo);
    Ok(ScalarLiouvilleReport {
        a,
        center,
        k,
        sup_ratio,
        argmax,
        implied_constant: sup_ratio * a / (1.0 + k * a),
        min_gap: raw_min + shift,
        gap_shift: shift,
        f,
        ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{induced_metric, shape_and_mean_curvature, SpacelikeGraph, DEFAULT_SLACK};
    use crate::grid::GridDomain;

    #[test]
    fn weighted_rows_are_symmetric() {
        let d = GridDomain::centered_cube(2, 1.0, 11).unwrap();
        let graph = SpacelikeGraph::from_fn(d, |x| 0.3 * (x[0] + x[1] * x[1]).sin(), DEFAULT_SLACK).unwrap();
        let lap = LaplaceBeltrami::new(&induced_metric(&graph).unwrap());
        let interior = lap.interior();
        let slot: HashMap<usize, usize> = interior.iter().enumerate().map(|(k, &p)| (p, k)).collect();
        let rows = lap
            .weighted_rows()
            .iter()
            .map(|r| r.iter().filter_map(|&(q, w)| slot.get(&q).map(|&c| (c, w))).collect())
            .collect();
        assert!(CsrMatrix::from_rows(rows).asymmetry() < 1e-12);
    }

    #[test]
    fn constant_data_gives_zero_ratio() {
        let d = GridDomain::centered_cube(2, 1.0, 17).unwrap();
        let graph = SpacelikeGraph::from_fn(d.clone(), |_| 0.0, DEFAULT_SLACK).unwrap();
        let geo = shape_and_mean_curvature(&graph).unwrap();
        let g = ComparisonFn::constant(&d, 0.0);
        let r = scalar_liouville_check(&geo, &vec![3.0; d.len()], &g, d.center_node(), 0.5).unwrap();
        assert!(r.sup_ratio < 1e-10);
    }
}
