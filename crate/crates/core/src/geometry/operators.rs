//! Flux-form operators: the spacelike CMC residual and the Laplace-Beltrami
//! operator of the induced metric.

use super::{MetricFields, SpacelikeGraph};
use crate::error::Result;
use crate::grid::{gradient, GridDomain};

/// Gradient stencil on the face between `lo` and `lo + e_axis`: the normal
/// component is the two-point difference, tangential components average the
/// centered differences at both endpoints. Returns one stencil per component,
/// or `None` when a tangential neighbor falls outside the grid.
pub(crate) fn face_gradient_stencil(
    domain: &GridDomain,
    lo: usize,
    axis: usize,
) -> Option<Vec<Vec<(usize, f64)>>> {
    let h = domain.spacing();
    let hi = domain.neighbor(lo, axis, 1)?;
    let mut out = Vec::with_capacity(domain.dim());
    for j in 0..domain.dim() {
        if j == axis {
            out.push(vec![(hi, 1.0 / h), (lo, -1.0 / h)]);
        } else {
            let q = 1.0 / (4.0 * h);
            out.push(vec![
                (domain.neighbor(lo, j, 1)?, q),
                (domain.neighbor(hi, j, 1)?, q),
                (domain.neighbor(lo, j, -1)?, -q),
                (domain.neighbor(hi, j, -1)?, -q),
            ]);
        }
    }
    Some(out)
}

/// Face gradient `G`, `W = sqrt(1 - |G|^2)` and the normal flux `G_axis / W`.
pub(crate) struct FaceFlux {
    pub stencil: Vec<Vec<(usize, f64)>>,
    pub grad: Vec<f64>,
    pub w: f64,
    pub flux: f64,
}

pub(crate) fn face_flux(domain: &GridDomain, u: &[f64], lo: usize, axis: usize) -> Option<FaceFlux> {
    let stencil = face_gradient_stencil(domain, lo, axis)?;
    let grad: Vec<f64> = stencil
        .iter()
        .map(|s| s.iter().map(|&(q, c)| c * u[q]).sum())
        .collect();
    let w2 = 1.0 - grad.iter().map(|v| v * v).sum::<f64>();
    let w = if w2 > 0.0 { w2.sqrt() } else { f64::NAN };
    let flux = grad[axis] / w;
    Some(FaceFlux {
        stencil,
        grad,
        w,
        flux,
    })
}

/// Discrete `div(grad u / sqrt(1 - |grad u|^2)) - m H` at interior nodes
/// (boundary entries are zero). A face where `u` is not spacelike yields NaN.
pub(crate) fn residual_raw(domain: &GridDomain, u: &[f64], mean_curvature: f64) -> Vec<f64> {
    let m = domain.dim();
    let h = domain.spacing();
    let mut r = vec![0.0; domain.len()];
    for idx in domain.interior_nodes() {
        let mut div = 0.0;
        for axis in 0..m {
            let lo = domain.neighbor(idx, axis, -1).expect("interior node");
            let up = face_flux(domain, u, idx, axis).expect("interior node").flux;
            let down = face_flux(domain, u, lo, axis).expect("interior node").flux;
            div += (up - down) / h;
        }
        r[idx] = div - m as f64 * mean_curvature;
    }
    r
}

/// Flux-form CMC residual of a spacelike graph against the target `H`.
pub fn cmc_residual(graph: &SpacelikeGraph, mean_curvature: f64) -> Result<Vec<f64>> {
    Ok(residual_raw(graph.domain(), graph.values(), mean_curvature))
}

/// `|grad phi|_g^2` on every node.
pub fn metric_gradient_sq(metric: &MetricFields, phi: &[f64]) -> Vec<f64> {
    let domain = &metric.domain;
    (0..domain.len())
        .map(|idx| metric.norm_sq(idx, &gradient(domain, phi, idx)))
        .collect()
}

/// Laplace-Beltrami operator `(1/sqrt g) d_i (sqrt g g^ij d_j phi)` of an
/// induced metric, assembled once as a stencil per interior node.
///
/// Diagonal coefficients act through face differences, off-diagonal ones
/// through cell-centered gradients, so that `sqrt(g) * Laplacian` is the
/// negative of a symmetric bilinear form: on fields vanishing near the
/// boundary `<Lap phi, psi>_sqrt(g) = <phi, Lap psi>_sqrt(g)` exactly.
#[derive(Clone, Debug)]
pub struct LaplaceBeltrami {
    domain: GridDomain,
    /// `rows[k]` is the stencil of `sqrt(g) Lap` at `interior[k]`.
    interior: Vec<usize>,
    rows: Vec<Vec<(usize, f64)>>,
    sqrt_det_g: Vec<f64>,
}

impl LaplaceBeltrami {
    pub fn new(metric: &MetricFields) -> Self {
        let domain = metric.domain.clone();
        let m = domain.dim();
        let h = domain.spacing();
        let n = domain.len();
        // K = sqrt(g) g^{-1} on every node.
        let k_node: Vec<Vec<f64>> = (0..n)
            .map(|idx| {
                let gi = &metric.g_inv[idx];
                let s = metric.sqrt_det_g[idx];
                (0..m * m).map(|e| s * gi[(e / m, e % m)]).collect()
            })
            .collect();
        let interior = domain.interior_nodes();
        let corner_count = 1usize << m;
        let cross_scale = 1.0 / ((1usize << (m - 1)) as f64 * h).powi(2);
        let mut rows = Vec::with_capacity(interior.len());
        for &p in &interior {
            let mut row: Vec<(usize, f64)> = Vec::with_capacity(3usize.pow(m as u32));
            let mut diag = 0.0;
            for i in 0..m {
                for dir in [-1isize, 1] {
                    let q = domain.neighbor(p, i, dir).expect("interior node");
                    let kf = 0.5 * (k_node[p][i * m + i] + k_node[q][i * m + i]);
                    row.push((q, kf / (h * h)));
                    diag -= kf / (h * h);
                }
            }
            row.push((p, diag));
            if m > 1 {
                // Cells around p: lower corner p - sigma for sigma in {0,1}^m.
                for sigma in 0..corner_count {
                    let lower: Vec<isize> = (0..m).map(|a| -(((sigma >> a) & 1) as isize)).collect();
                    let corners: Vec<(usize, usize)> = (0..corner_count)
                        .map(|tau| {
                            let off: Vec<isize> =
                                (0..m).map(|a| lower[a] + ((tau >> a) & 1) as isize).collect();
                            (tau, domain.offset(p, &off).expect("interior node has all cells"))
                        })
                        .collect();
                    let mut k_cell = vec![0.0; m * m];
                    for &(_, q) in &corners {
                        for (e, kc) in k_cell.iter_mut().enumerate() {
                            *kc += k_node[q][e] / corner_count as f64;
                        }
                    }
                    let sign = |bits: usize, axis: usize| if (bits >> axis) & 1 == 1 { 1.0 } else { -1.0 };
                    for &(tau, q) in &corners {
                        let mut w = 0.0;
                        for i in 0..m {
                            for j in 0..m {
                                if i != j {
                                    w -= k_cell[i * m + j] * sign(tau, j) * sign(sigma, i);
                                }
                            }
                        }
                        if w != 0.0 {
                            row.push((q, w * cross_scale));
                        }
                    }
                }
            }
            rows.push(row);
        }
        Self {
            domain,
            interior,
            rows,
            sqrt_det_g: metric.sqrt_det_g.clone(),
        }
    }

    pub fn domain(&self) -> &GridDomain {
        &self.domain
    }

    pub fn interior(&self) -> &[usize] {
        &self.interior
    }

    /// Stencil rows of `sqrt(g) Lap`, aligned with [`Self::interior`].
    pub fn weighted_rows(&self) -> &[Vec<(usize, f64)>] {
        &self.rows
    }

    pub fn sqrt_det_g(&self) -> &[f64] {
        &self.sqrt_det_g
    }

    /// `Lap phi` on interior nodes; boundary entries are NaN.
    pub fn apply(&self, phi: &[f64]) -> Vec<f64> {
        let mut out = vec![f64::NAN; self.domain.len()];
        for (&p, row) in self.interior.iter().zip(&self.rows) {
            let s: f64 = row.iter().map(|&(q, w)| w * phi[q]).sum();
            out[p] = s / self.sqrt_det_g[p];
        }
        out
    }

    /// `Lap phi` at a single interior node.
    pub fn apply_at(&self, phi: &[f64], k: usize) -> f64 {
        let p = self.interior[k];
        self.rows[k].iter().map(|&(q, w)| w * phi[q]).sum::<f64>() / self.sqrt_det_g[p]
    }
}

pub fn laplace_beltrami(phi: &[f64], metric: &MetricFields) -> Vec<f64> {
    LaplaceBeltrami::new(metric).apply(phi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{induced_metric, DEFAULT_SLACK};

    #[test]
    fn residual_vanishes_on_planes() {
        let d = GridDomain::centered_cube(2, 1.0, 11).unwrap();
        let g = SpacelikeGraph::from_fn(d, |x| 0.6 * x[0] - 0.3 * x[1] + 2.0, DEFAULT_SLACK).unwrap();
        let r0 = cmc_residual(&g, 0.0).unwrap();
        assert!(r0.iter().all(|v| v.abs() < 1e-12));
        let r1 = cmc_residual(&g, 1.0).unwrap();
        for idx in g.domain().interior_nodes() {
            assert!((r1[idx] + 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn flat_laplacian_of_quadratic() {
        let d = GridDomain::centered_cube(2, 1.0, 11).unwrap();
        let metric = MetricFields::flat(&d);
        let phi = d.sample(|x| x[0] * x[0]);
        let lap = laplace_beltrami(&phi, &metric);
        for idx in d.interior_nodes() {
            assert!((lap[idx] - 2.0).abs() < 1e-10);
        }
    }

    #[test]
    fn constant_field_has_zero_laplacian() {
        let d = GridDomain::centered_cube(2, 1.0, 13).unwrap();
        let g = SpacelikeGraph::from_fn(d, |x| 0.3 * (x[0] * x[1]).sin(), DEFAULT_SLACK).unwrap();
        let metric = induced_metric(&g).unwrap();
        let lap = laplace_beltrami(&vec![3.5; g.domain().len()], &metric);
        for idx in g.domain().interior_nodes() {
            assert!(lap[idx].abs() < 1e-12);
        }
    }
}
