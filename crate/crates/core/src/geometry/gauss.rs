//! Gauss map of a spacelike graph into the hyperboloid, its differential,
//! energy density and tension field.

use nalgebra::DMatrix;

use super::operators::LaplaceBeltrami;
use super::{shape_and_mean_curvature, GeometryFields, MetricFields, SpacelikeGraph};
use crate::error::Result;
use crate::grid::{gradient, partial};
use crate::hyperbolic::{christoffel_upper_half, hyperboloid_to_upper_half, Model, ModelPoint};

#[derive(Clone, Debug)]
pub struct GaussField {
    /// Unit timelike normal `(1, grad u) / sqrt(1 - |grad u|^2)`, one array
    /// per hyperboloid coordinate.
    pub nu: Vec<Vec<f64>>,
    /// Frame components `f^k_i` from finite differences of the normal,
    /// stored as `df[node][(i, k)]`; NaN on the boundary.
    pub df: Vec<DMatrix<f64>>,
    /// The same components read off the second fundamental form, `h_ik`.
    pub df_shape: Vec<DMatrix<f64>>,
    /// Largest entry of `|df - df_shape|` per interior node.
    pub df_discrepancy: Vec<f64>,
    /// `|grad f|^2` on every node.
    pub energy: Vec<f64>,
}

impl GaussField {
    pub fn dim(&self) -> usize {
        self.nu.len() - 1
    }

    pub fn nu_at(&self, idx: usize) -> Vec<f64> {
        self.nu.iter().map(|c| c[idx]).collect()
    }

    pub fn point(&self, idx: usize) -> ModelPoint {
        ModelPoint::unchecked(Model::Hyperboloid, self.nu_at(idx))
    }

    /// Upper half-space coordinates of the Gauss image at a node.
    pub fn upper_half_at(&self, idx: usize) -> Vec<f64> {
        hyperboloid_to_upper_half(&self.nu_at(idx))
    }

    /// Upper half-space coordinates on every node, one array per coordinate.
    pub fn upper_half_components(&self) -> Vec<Vec<f64>> {
        let m = self.dim();
        let n = self.nu[0].len();
        let mut out = vec![vec![0.0; n]; m];
        for idx in 0..n {
            for (a, z) in self.upper_half_at(idx).into_iter().enumerate() {
                out[a][idx] = z;
            }
        }
        out
    }
}

fn lorentz(a: &[f64], b: &[f64]) -> f64 {
    -a[0] * b[0] + a[1..].iter().zip(&b[1..]).map(|(x, y)| x * y).sum::<f64>()
}

/// Derivatives `d_j nu` at a node, one vector in R^{m+1} per axis.
fn normal_derivatives(metric: &MetricFields, nu: &[Vec<f64>], idx: usize) -> Vec<Vec<f64>> {
    let domain = &metric.domain;
    (0..domain.dim())
        .map(|j| nu.iter().map(|c| partial(domain, c, idx, j)).collect())
        .collect()
}

/// `|grad f|^2 = g^ij <d_i nu, d_j nu>_L` on every node.
pub fn energy_density(gauss: &GaussField, geo: &GeometryFields) -> Vec<f64> {
    energy_from_metric(&gauss.nu, &geo.metric)
}

fn energy_from_metric(nu: &[Vec<f64>], metric: &MetricFields) -> Vec<f64> {
    let m = metric.dim();
    (0..metric.domain.len())
        .map(|idx| {
            let dn = normal_derivatives(metric, nu, idx);
            let gi = &metric.g_inv[idx];
            let mut e = 0.0;
            for i in 0..m {
                for j in 0..m {
                    e += gi[(i, j)] * lorentz(&dn[i], &dn[j]);
                }
            }
            e
        })
        .collect()
}

pub fn gauss_map(graph: &SpacelikeGraph) -> Result<GaussField> {
    let geo = shape_and_mean_curvature(graph)?;
    Ok(gauss_map_with(graph, &geo))
}

/// Gauss map reusing already computed geometry of the same graph.
pub fn gauss_map_with(graph: &SpacelikeGraph, geo: &GeometryFields) -> GaussField {
    let domain = graph.domain();
    let metric = &geo.metric;
    let m = domain.dim();
    let n = domain.len();

    let mut nu = vec![vec![0.0; n]; m + 1];
    for idx in 0..n {
        let du = metric.grad_u(idx);
        let w = metric.sqrt_det_g[idx];
        nu[0][idx] = 1.0 / w;
        for a in 0..m {
            nu[a + 1][idx] = du[a] / w;
        }
    }

    let nan = DMatrix::from_element(m, m, f64::NAN);
    let mut df = vec![nan.clone(); n];
    let mut df_shape = vec![nan; n];
    let mut df_discrepancy = vec![f64::NAN; n];
    let u = graph.values();
    for idx in domain.interior_nodes() {
        let dn = normal_derivatives(metric, &nu, idx);
        let du = gradient(domain, u, idx);
        // <d_j nu, T_l>_L with T_l = (u_l, e_l).
        let pulled = DMatrix::from_fn(m, m, |j, l| -dn[j][0] * du[l] + dn[j][l + 1]);
        let e = &metric.frame[idx];
        let fd = e * pulled * e.transpose();
        let sh = geo.h_frame(idx);
        df_discrepancy[idx] = (&fd - &sh).amax();
        df[idx] = fd;
        df_shape[idx] = sh;
    }
    let energy = energy_from_metric(&nu, metric);
    GaussField {
        nu,
        df,
        df_shape,
        df_discrepancy,
        energy,
    }
}

#[derive(Clone, Debug)]
pub struct TensionField {
    /// Upper half-space components `tau^alpha`; NaN on the boundary.
    pub components: Vec<Vec<f64>>,
    /// `|tau|` in the hyperbolic metric.
    pub norm: Vec<f64>,
}

/// Tension `tau^a = Lap f^a + Gamma^a_bc(f) g^ij d_i f^b d_j f^c` of the Gauss
/// map, written in upper half-space coordinates of the target.
pub fn tension_field(gauss: &GaussField, geo: &GeometryFields) -> TensionField {
    let metric = &geo.metric;
    let domain = &metric.domain;
    let m = domain.dim();
    let n = domain.len();
    let z = gauss.upper_half_components();
    let lap = LaplaceBeltrami::new(metric);
    let lap_z: Vec<Vec<f64>> = z.iter().map(|c| lap.apply(c)).collect();

    let mut components = vec![vec![f64::NAN; n]; m];
    let mut norm = vec![f64::NAN; n];
    for idx in domain.interior_nodes() {
        let zp: Vec<f64> = z.iter().map(|c| c[idx]).collect();
        let dz: Vec<Vec<f64>> = z.iter().map(|c| gradient(domain, c, idx)).collect();
        let gi = &metric.g_inv[idx];
        // Q^{bc} = g^ij d_i f^b d_j f^c
        let mut q = vec![0.0; m * m];
        for b in 0..m {
            for c in 0..m {
                let mut s = 0.0;
                for i in 0..m {
                    for j in 0..m {
                        s += gi[(i, j)] * dz[b][i] * dz[c][j];
                    }
                }
                q[b * m + c] = s;
            }
        }
        let gamma = christoffel_upper_half(&zp);
        let mut sq = 0.0;
        for a in 0..m {
            let mut t = lap_z[a][idx];
            for b in 0..m {
                for c in 0..m {
                    t += gamma[(a * m + b) * m + c] * q[b * m + c];
                }
            }
            components[a][idx] = t;
            sq += t * t;
        }
        norm[idx] = sq.sqrt() / zp[m - 1];
    }
    TensionField { components, norm }
}
