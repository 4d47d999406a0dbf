//! Discrete differential geometry of spacelike graphs `x_0 = u(x)` in
//! Minkowski space.
//!
//! Gradients and metric quantities live on every node (one-sided stencils on
//! the boundary). Curvature lives on interior nodes only; boundary entries of
//! curvature fields are `NaN` and every sup norm runs over interior nodes.

mod ball;
mod gauss;
pub(crate) mod operators;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

pub use ball::{intrinsic_ball, IntrinsicBall};
pub use gauss::{energy_density, gauss_map, gauss_map_with, tension_field, GaussField, TensionField};
pub use operators::{cmc_residual, laplace_beltrami, metric_gradient_sq, LaplaceBeltrami};

use crate::error::{Error, Result};
use crate::grid::{gradient, second_partial, GridDomain};

/// Default slack `delta` in `|grad u| <= 1 - delta`.
pub const DEFAULT_SLACK: f64 = 1e-6;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct SpacelikeReport {
    pub spacelike: bool,
    pub max_gradient: f64,
    pub argmax: usize,
}

/// Max interior `|grad u|` (centered differences) against `1 - slack`.
pub fn check_spacelike(u: &[f64], domain: &GridDomain, slack: f64) -> Result<SpacelikeReport> {
    domain.check_field(u)?;
    let mut max_gradient = 0.0f64;
    let mut argmax = domain.center_node();
    for idx in domain.interior_nodes() {
        let g = gradient(domain, u, idx);
        let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > max_gradient || norm.is_nan() {
            max_gradient = norm;
            argmax = idx;
        }
    }
    Ok(SpacelikeReport {
        spacelike: max_gradient <= 1.0 - slack,
        max_gradient,
        argmax,
    })
}

/// A height function whose graph is spacelike with slack `delta`.
#[derive(Clone, Debug)]
pub struct SpacelikeGraph {
    domain: GridDomain,
    u: Vec<f64>,
    slack: f64,
}

impl SpacelikeGraph {
    pub fn new(domain: GridDomain, u: Vec<f64>, slack: f64) -> Result<Self> {
        if !(slack > 0.0 && slack < 1.0) {
            return Err(Error::Domain(format!("slack must lie in (0, 1), got {slack}")));
        }
        let report = check_spacelike(&u, &domain, slack)?;
        if !report.spacelike {
            return Err(Error::NotSpacelike {
                node: report.argmax,
                max_gradient: report.max_gradient,
                limit: 1.0 - slack,
            });
        }
        Ok(Self { domain, u, slack })
    }

    pub fn from_fn<F: Fn(&[f64]) -> f64>(domain: GridDomain, f: F, slack: f64) -> Result<Self> {
        let u = domain.sample(f);
        Self::new(domain, u, slack)
    }

    pub fn domain(&self) -> &GridDomain {
        &self.domain
    }

    pub fn values(&self) -> &[f64] {
        &self.u
    }

    pub fn slack(&self) -> f64 {
        self.slack
    }

    pub fn into_values(self) -> Vec<f64> {
        self.u
    }
}

/// Induced metric `g_ij = delta_ij - u_i u_j` and derived quantities on every node.
#[derive(Clone, Debug)]
pub struct MetricFields {
    pub domain: GridDomain,
    /// `grad u`, node-major with `m` entries per node.
    pub gradient: Vec<f64>,
    pub g: Vec<DMatrix<f64>>,
    pub g_inv: Vec<DMatrix<f64>>,
    /// `sqrt(det g) = sqrt(1 - |grad u|^2)`.
    pub sqrt_det_g: Vec<f64>,
    /// Rows are the orthonormal frame obtained by Gram-Schmidt of the
    /// coordinate basis in `g`, axis 1 first (`E g E^T = I`).
    pub frame: Vec<DMatrix<f64>>,
}

impl MetricFields {
    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn grad_u(&self, idx: usize) -> &[f64] {
        let m = self.dim();
        &self.gradient[idx * m..(idx + 1) * m]
    }

    /// Flat metric on a bare grid, as for a constant height function.
    pub fn flat(domain: &GridDomain) -> Self {
        let m = domain.dim();
        let n = domain.len();
        let eye = DMatrix::<f64>::identity(m, m);
        Self {
            domain: domain.clone(),
            gradient: vec![0.0; n * m],
            g: vec![eye.clone(); n],
            g_inv: vec![eye.clone(); n],
            sqrt_det_g: vec![1.0; n],
            frame: vec![eye; n],
        }
    }

    /// `|grad phi|_g^2` at a node from the centered (or one-sided) gradient.
    pub fn norm_sq(&self, idx: usize, covector: &[f64]) -> f64 {
        let gi = &self.g_inv[idx];
        let m = self.dim();
        let mut s = 0.0;
        for i in 0..m {
            for j in 0..m {
                s += gi[(i, j)] * covector[i] * covector[j];
            }
        }
        s
    }
}

pub fn induced_metric(graph: &SpacelikeGraph) -> Result<MetricFields> {
    let domain = graph.domain();
    let u = graph.values();
    let m = domain.dim();
    let n = domain.len();
    let mut grad_all = Vec::with_capacity(n * m);
    let mut g = Vec::with_capacity(n);
    let mut g_inv = Vec::with_capacity(n);
    let mut sqrt_det_g = Vec::with_capacity(n);
    let mut frame = Vec::with_capacity(n);
    for idx in 0..n {
        let du = gradient(domain, u, idx);
        let w2 = 1.0 - du.iter().map(|v| v * v).sum::<f64>();
        if !(w2 > 0.0) {
            return Err(Error::NotSpacelike {
                node: idx,
                max_gradient: (1.0 - w2).sqrt(),
                limit: 1.0,
            });
        }
        let dv = DMatrix::from_column_slice(m, 1, &du);
        let outer = &dv * dv.transpose();
        let gm = DMatrix::<f64>::identity(m, m) - &outer;
        let gi = DMatrix::<f64>::identity(m, m) + outer / w2;
        let chol = gm
            .clone()
            .cholesky()
            .ok_or(Error::NotSpacelike {
                node: idx,
                max_gradient: (1.0 - w2).sqrt(),
                limit: 1.0,
            })?;
        let e = chol
            .l()
            .try_inverse()
            .expect("Cholesky factor of a positive definite matrix is invertible");
        grad_all.extend_from_slice(&du);
        g.push(gm);
        g_inv.push(gi);
        sqrt_det_g.push(w2.sqrt());
        frame.push(e);
    }
    Ok(MetricFields {
        domain: domain.clone(),
        gradient: grad_all,
        g,
        g_inv,
        sqrt_det_g,
        frame,
    })
}

/// Metric plus second fundamental form, mean curvature and `|h|^2`.
#[derive(Clone, Debug)]
pub struct GeometryFields {
    pub metric: MetricFields,
    /// `h_ij = u_ij / sqrt(1 - |grad u|^2)`; NaN on boundary nodes.
    pub h: Vec<DMatrix<f64>>,
    pub mean_curvature: Vec<f64>,
    /// `|h|^2 = g^ik g^jl h_ij h_kl`.
    pub h_norm_sq: Vec<f64>,
}

impl GeometryFields {
    pub fn domain(&self) -> &GridDomain {
        &self.metric.domain
    }

    pub fn dim(&self) -> usize {
        self.metric.dim()
    }

    /// `h` in the orthonormal frame, `E h E^T`.
    pub fn h_frame(&self, idx: usize) -> DMatrix<f64> {
        let e = &self.metric.frame[idx];
        e * &self.h[idx] * e.transpose()
    }

    /// Largest |value| of an interior field.
    pub fn interior_sup(&self, field: &[f64]) -> f64 {
        interior_sup(self.domain(), field)
    }
}

pub fn interior_sup(domain: &GridDomain, field: &[f64]) -> f64 {
    domain
        .interior_nodes()
        .into_iter()
        .map(|i| field[i].abs())
        .fold(0.0, f64::max)
}

pub fn shape_and_mean_curvature(graph: &SpacelikeGraph) -> Result<GeometryFields> {
    let metric = induced_metric(graph)?;
    let domain = graph.domain();
    let u = graph.values();
    let m = domain.dim();
    let n = domain.len();
    let nan = DMatrix::from_element(m, m, f64::NAN);
    let mut h = vec![nan; n];
    let mut mean_curvature = vec![f64::NAN; n];
    let mut h_norm_sq = vec![f64::NAN; n];
    for idx in domain.interior_nodes() {
        let w = metric.sqrt_det_g[idx];
        let hess = DMatrix::from_fn(m, m, |i, j| second_partial(domain, u, idx, i, j) / w);
        let gi = &metric.g_inv[idx];
        let mixed = gi * &hess;
        mean_curvature[idx] = mixed.trace() / m as f64;
        h_norm_sq[idx] = (&mixed * &mixed).trace();
        h[idx] = hess;
    }
    Ok(GeometryFields {
        metric,
        h,
        mean_curvature,
        h_norm_sq,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct RicciReport {
    /// Smallest Ricci eigenvalue per node (NaN on the boundary).
    #[serde(skip)]
    pub min_eigenvalue: Vec<f64>,
    pub global_min: f64,
    pub global_argmin: usize,
    /// Smallest value of `Ric_min + m^2 H^2 / 4` over interior nodes.
    pub worst_bound_margin: f64,
    pub bound_holds: bool,
}

/// Ricci curvature of the graph from the Gauss equation in flat ambient
/// space: `Ric = h^2 - (tr h) h` in an orthonormal frame.
pub fn ricci_min(geo: &GeometryFields) -> RicciReport {
    let domain = geo.domain();
    let m = geo.dim() as f64;
    let mut min_eigenvalue = vec![f64::NAN; domain.len()];
    let mut global_min = f64::INFINITY;
    let mut global_argmin = domain.center_node();
    let mut worst_bound_margin = f64::INFINITY;
    for idx in domain.interior_nodes() {
        let hf = geo.h_frame(idx);
        let ric = &hf * &hf - &hf * hf.trace();
        let lo = SymmetricEigen::new(ric).eigenvalues.min();
        min_eigenvalue[idx] = lo;
        if lo < global_min {
            global_min = lo;
            global_argmin = idx;
        }
        let hm = geo.mean_curvature[idx];
        worst_bound_margin = worst_bound_margin.min(lo + m * m * hm * hm / 4.0);
    }
    RicciReport {
        min_eigenvalue,
        global_min,
        global_argmin,
        worst_bound_margin,
        bound_holds: worst_bound_margin >= -1e-10,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square(n: usize) -> GridDomain {
        GridDomain::centered_cube(2, 1.0, n).unwrap()
    }

    #[test]
    fn spacelike_check_constant_gradient() {
        let d = square(9);
        let u = d.sample(|x| 0.9 * x[0]);
        let r = check_spacelike(&u, &d, 0.09).unwrap();
        assert!(r.spacelike);
        assert!((r.max_gradient - 0.9).abs() < 1e-12);
        assert!(!check_spacelike(&u, &d, 0.11).unwrap().spacelike);
        assert!(check_spacelike(&u[1..], &d, 0.1).is_err());
    }

    #[test]
    fn tilted_plane_metric() {
        let d = square(7);
        let graph = SpacelikeGraph::from_fn(d, |x| 0.5 * x[0], DEFAULT_SLACK).unwrap();
        let metric = induced_metric(&graph).unwrap();
        let idx = graph.domain().center_node();
        assert!((metric.g[idx][(0, 0)] - 0.75).abs() < 1e-14);
        assert!((metric.g[idx][(1, 1)] - 1.0).abs() < 1e-14);
        assert!(metric.g[idx][(0, 1)].abs() < 1e-14);
        let e = &metric.frame[idx];
        let id = e * &metric.g[idx] * e.transpose();
        assert!((id - DMatrix::<f64>::identity(2, 2)).amax() < 1e-14);
    }

    #[test]
    fn linear_graph_is_flat() {
        let d = square(9);
        let graph = SpacelikeGraph::from_fn(d, |x| 0.3 * x[0] - 0.2 * x[1] + 1.0, DEFAULT_SLACK)
            .unwrap();
        let geo = shape_and_mean_curvature(&graph).unwrap();
        assert!(geo.interior_sup(&geo.mean_curvature) < 1e-12);
        assert!(geo.interior_sup(&geo.h_norm_sq) < 1e-20);
        let ric = ricci_min(&geo);
        assert!(ric.global_min.abs() < 1e-12);
    }

    #[test]
    fn steep_graph_rejected() {
        let d = square(9);
        let err = SpacelikeGraph::from_fn(d, |x| 1.2 * x[0], DEFAULT_SLACK).unwrap_err();
        assert!(matches!(err, Error::NotSpacelike { .. }));
    }
}
