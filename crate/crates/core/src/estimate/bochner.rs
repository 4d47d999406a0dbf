use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{
    gauss_map_with, metric_gradient_sq, shape_and_mean_curvature, GaussField, GeometryFields,
    LaplaceBeltrami, SpacelikeGraph,
};
use crate::grid::{gradient, partial, second_partial, GridDomain};
use crate::solver::DIAGNOSTIC_FRACTION;

use super::phi::ricci_constants;

/// `1 / (2 m n)` for a map from an m-manifold into an n-manifold.
pub fn kato_epsilon(m: usize, n: usize) -> f64 {
    1.0 / (2.0 * m as f64 * n as f64)
}

fn lorentz(a: &[f64], b: &[f64]) -> f64 {
    -a[0] * b[0] + a[1..].iter().zip(&b[1..]).map(|(x, y)| x * y).sum::<f64>()
}

/// `|nabla df|^2` of the Gauss map at an interior node.
///
/// Ambient second derivatives of the normal are projected onto the tangent
/// space of the hyperboloid and corrected by the Christoffel symbols
/// `Gamma^l_ij = -u_ij u_l / W^2` of the induced metric.
pub fn hessian_norm_sq(graph: &SpacelikeGraph, geo: &GeometryFields, gauss: &GaussField, idx: usize) -> f64 {
    let domain = graph.domain();
    let m = domain.dim();
    let u = graph.values();
    let du = gradient(domain, u, idx);
    let w2 = geo.metric.sqrt_det_g[idx].powi(2);
    let nu = gauss.nu_at(idx);
    let d_nu: Vec<Vec<f64>> = (0..m)
        .map(|l| gauss.nu.iter().map(|c| partial(domain, c, idx, l)).collect())
        .collect();
    let mut a = vec![vec![0.0; m + 1]; m * m];
    for i in 0..m {
        for j in 0..m {
            let dd: Vec<f64> = gauss
                .nu
                .iter()
                .map(|c| second_partial(domain, c, idx, i, j))
                .collect();
            let along = lorentz(&dd, &nu);
            let uij = second_partial(domain, u, idx, i, j);
            let entry = &mut a[i * m + j];
            for comp in 0..=m {
                let mut v = dd[comp] + along * nu[comp];
                for l in 0..m {
                    v += uij * du[l] / w2 * d_nu[l][comp];
                }
                entry[comp] = v;
            }
        }
    }
    let gi = &geo.metric.g_inv[idx];
    let mut total = 0.0;
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                for l in 0..m {
                    total += gi[(i, k)] * gi[(j, l)] * lorentz(&a[i * m + j], &a[k * m + l]);
                }
            }
        }
    }
    total
}

#[derive(Clone, Debug, Serialize)]
pub struct BochnerSample {
    pub node: usize,
    /// `(1/2) Lap |grad f|^2`
    pub half_lap_energy: f64,
    /// `|f^k_ij|^2`
    pub hessian_sq: f64,
    /// `|grad |grad f||^2`
    pub grad_norm_sq: f64,
    pub energy: f64,
    /// `|grad f| Lap |grad f|`
    pub norm_lap_norm: f64,
    /// Amounts by which each inequality fails (zero when it holds).
    pub violation_bochner: f64,
    pub violation_kato: f64,
    pub violation_combined: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct BochnerReport {
    pub epsilon: f64,
    pub k: f64,
    pub spacing: f64,
    pub scale: f64,
    /// `10 h scale`
    pub tolerance: f64,
    pub max_violation_bochner: f64,
    pub max_violation_kato: f64,
    pub max_violation_combined: f64,
    pub flagged: usize,
    pub samples: Vec<BochnerSample>,
}

impl BochnerReport {
    pub fn max_violation(&self) -> f64 {
        self.max_violation_bochner
            .max(self.max_violation_kato)
            .max(self.max_violation_combined)
    }

    pub fn pass(&self) -> bool {
        self.flagged == 0
    }
}

/// Evaluate the Bochner inequality, the refined Kato inequality and their
/// combination at the given nodes. Target dimension is `n = m`.
pub fn bochner_check(graph: &SpacelikeGraph, samples: &[usize]) -> Result<BochnerReport> {
    let geo = shape_and_mean_curvature(graph)?;
    let gauss = gauss_map_with(graph, &geo);
    bochner_from_fields(graph, &geo, &gauss, samples)
}

pub fn bochner_from_fields(
    graph: &SpacelikeGraph,
    geo: &GeometryFields,
    gauss: &GaussField,
    samples: &[usize],
) -> Result<BochnerReport> {
    let domain = graph.domain();
    if let Some(&bad) = samples.iter().find(|&&q| domain.boundary_distance(q) < 2) {
        return Err(Error::Domain(format!(
            "sample node {bad} is closer than 2 nodes to the boundary"
        )));
    }
    let m = domain.dim();
    let epsilon = kato_epsilon(m, m);
    let (k, _) = ricci_constants(geo);
    let k2 = k * k;
    let lap = LaplaceBeltrami::new(&geo.metric);
    let energy = &gauss.energy;
    let norm: Vec<f64> = energy.iter().map(|e| e.max(0.0).sqrt()).collect();
    let lap_energy = lap.apply(energy);
    let lap_norm = lap.apply(&norm);
    let grad_norm = metric_gradient_sq(&geo.metric, &norm);

    let mut out = Vec::with_capacity(samples.len());
    let mut scale = 1.0f64;
    for &q in samples {
        let hess = hessian_norm_sq(graph, geo, gauss, q);
        let e = energy[q];
        let s = BochnerSample {
            node: q,
            half_lap_energy: 0.5 * lap_energy[q],
            hessian_sq: hess,
            grad_norm_sq: grad_norm[q],
            energy: e,
            norm_lap_norm: norm[q] * lap_norm[q],
            violation_bochner: (hess - k2 * e - 0.5 * lap_energy[q]).max(0.0),
            violation_kato: ((1.0 + epsilon) * grad_norm[q] - hess).max(0.0),
            violation_combined: (epsilon * grad_norm[q] - k2 * e - norm[q] * lap_norm[q]).max(0.0),
        };
        scale = scale
            .max(e)
            .max(hess)
            .max(s.half_lap_energy.abs())
            .max(s.norm_lap_norm.abs());
        out.push(s);
    }
    let h = domain.spacing();
    let tolerance = 10.0 * h * scale;
    let max_of = |f: fn(&BochnerSample) -> f64| out.iter().map(f).fold(0.0, f64::max);
    let max_violation_bochner = max_of(|s| s.violation_bochner);
    let max_violation_kato = max_of(|s| s.violation_kato);
    let max_violation_combined = max_of(|s| s.violation_combined);
    let flagged = out
        .iter()
        .filter(|s| s.violation_bochner.max(s.violation_kato).max(s.violation_combined) > tolerance)
        .count();
    Ok(BochnerReport {
        epsilon,
        k,
        spacing: h,
        scale,
        tolerance,
        max_violation_bochner,
        max_violation_kato,
        max_violation_combined,
        flagged,
        samples: out,
    })
}

/// Default inequality sample set: nodes at stride 2 inside the central box
/// used for solved-field diagnostics, at least 2 nodes from the boundary,
/// thinned evenly to at most `count`.
pub fn default_samples(domain: &GridDomain, count: usize) -> Vec<usize> {
    let central = domain.central_nodes(DIAGNOSTIC_FRACTION);
    let nodes: Vec<usize> = domain
        .stride_samples(2, 2)
        .into_iter()
        .filter(|q| central.binary_search(q).is_ok())
        .collect();
    GridDomain::thin(&nodes, count)
}

/// Nodes nearest to a tensor lattice `start + k * step`, `k < per_axis`, on
/// every axis. Used to compare the same physical points across grids.
pub fn lattice_samples(domain: &GridDomain, start: f64, step: f64, per_axis: usize) -> Result<Vec<usize>> {
    let m = domain.dim();
    let total = per_axis.pow(m as u32);
    let mut out = Vec::with_capacity(total);
    for code in 0..total {
        let mut c = code;
        let x: Vec<f64> = (0..m)
            .map(|_| {
                let k = c % per_axis;
                c /= per_axis;
                start + k as f64 * step
            })
            .collect();
        let idx = domain
            .nearest_node(&x)
            .ok_or_else(|| Error::Domain(format!("lattice point {x:?} lies outside the grid")))?;
        out.push(idx);
    }
    Ok(out)
}
