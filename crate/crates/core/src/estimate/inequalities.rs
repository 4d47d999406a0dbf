use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{
    gauss_map_with, metric_gradient_sq, shape_and_mean_curvature, GeometryFields, LaplaceBeltrami,
    SpacelikeGraph,
};

use super::bochner::kato_epsilon;
use super::comparison::ComparisonFn;
use super::phi::{normalized_gap, BusemannField};
use crate::hyperbolic::BusemannRay;

#[derive(Clone, Debug, Serialize)]
pub struct KeySample {
    pub node: usize,
    pub gap: f64,
    pub busemann_grad_sq: f64,
    pub busemann_lap: f64,
    pub energy: f64,
    /// `(eps/4)|grad B f|^2/gap^2 - Lap(B f)/gap - (eps/4)|grad f|^2/gap^2`
    pub key_value: f64,
    /// `Lap(B f) + |grad f|^2 - |grad B f|^2`, nonpositive when the Hessian
    /// comparison holds.
    pub hessian_value: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct KeyInequalityReport {
    pub epsilon: f64,
    pub gap_shift: f64,
    pub tolerance: f64,
    pub min_key_value: f64,
    pub max_hessian_value: f64,
    pub flagged: usize,
    pub samples: Vec<KeySample>,
}

impl KeyInequalityReport {
    pub fn pass(&self) -> bool {
        self.flagged == 0
    }
}

struct Composite {
    gap: Vec<f64>,
    shift: f64,
    grad_b: Vec<f64>,
    lap_b: Vec<f64>,
    energy: Vec<f64>,
}

fn composite(
    graph: &SpacelikeGraph,
    g: &ComparisonFn,
    c: f64,
    samples: &[usize],
) -> Result<(Composite, GeometryFields)> {
    let domain = graph.domain();
    domain.check_field(g.values())?;
    if let Some(&bad) = samples.iter().find(|&&q| domain.boundary_distance(q) < 2) {
        return Err(Error::Domain(format!(
            "sample node {bad} is closer than 2 nodes to the boundary"
        )));
    }
    let geo = shape_and_mean_curvature(graph)?;
    let gauss = gauss_map_with(graph, &geo);
    let busemann = BusemannField::new(&gauss, &BusemannRay::new(c)?);
    let all: Vec<usize> = (0..domain.len()).collect();
    let gap = normalized_gap(&busemann, g, &all)?;
    let lap = LaplaceBeltrami::new(&geo.metric);
    let grad_b = metric_gradient_sq(&geo.metric, &busemann.values);
    let lap_b = lap.apply(&busemann.values);
    Ok((
        Composite {
            gap: gap.values,
            shift: gap.shift,
            grad_b,
            lap_b,
            energy: gauss.energy,
        },
        geo,
    ))
}

/// Samples of the key inequality of the gradient estimate, and of the
/// Hessian-comparison bound `Lap(B f) <= -(|grad f|^2 - |grad B f|^2)` it
/// rests on. Tolerance `10 h` times the largest field magnitude.
pub fn key_inequality_check(
    graph: &SpacelikeGraph,
    g: &ComparisonFn,
    c: f64,
    samples: &[usize],
) -> Result<KeyInequalityReport> {
    let (f, _) = composite(graph, g, c, samples)?;
    let m = graph.domain().dim();
    let epsilon = kato_epsilon(m, m);
    let mut out = Vec::with_capacity(samples.len());
    let mut scale = 1.0f64;
    for &q in samples {
        let d = f.gap[q];
        let key_value = epsilon / 4.0 * f.grad_b[q] / (d * d) - f.lap_b[q] / d
            - epsilon / 4.0 * f.energy[q] / (d * d);
        let hessian_value = f.lap_b[q] + f.energy[q] - f.grad_b[q];
        scale = scale.max(f.energy[q]).max(f.lap_b[q].abs());
        out.push(KeySample {
            node: q,
            gap: d,
            busemann_grad_sq: f.grad_b[q],
            busemann_lap: f.lap_b[q],
            energy: f.energy[q],
            key_value,
            hessian_value,
        });
    }
    let tolerance = 10.0 * graph.domain().spacing() * scale;
    let min_key_value = out.iter().map(|s| s.key_value).fold(f64::INFINITY, f64::min);
    let max_hessian_value = out.iter().map(|s| s.hessian_value).fold(f64::NEG_INFINITY, f64::max);
    let flagged = out
        .iter()
        .filter(|s| s.key_value < -tolerance || s.hessian_value > tolerance)
        .count();
    Ok(KeyInequalityReport {
        epsilon,
        gap_shift: f.shift,
        tolerance,
        min_key_value,
        max_hessian_value,
        flagged,
        samples: out,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct VanishingSample {
    pub node: usize,
    /// `|grad h|^2 + Lap h` with `h = -(B f - g)`
    pub lhs: f64,
    /// `|grad f|^2 / 2`
    pub half_energy: f64,
    /// `m H^2 / 2`
    pub curvature_term: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct VanishingReport {
    pub tolerance: f64,
    /// Smallest `lhs - |grad f|^2/2`.
    pub min_first_margin: f64,
    /// Smallest `|grad f|^2/2 - m H^2/2`.
    pub min_second_margin: f64,
    pub flagged: usize,
    pub samples: Vec<VanishingSample>,
}

impl VanishingReport {
    pub fn pass(&self) -> bool {
        self.flagged == 0
    }
}

/// The pointwise chain `|grad h|^2 + Lap h >= |grad f|^2 / 2 >= m H^2 / 2`
/// for `h = -(B o f - g)`.
pub fn mean_curvature_vanishing_check(
    graph: &SpacelikeGraph,
    g: &ComparisonFn,
    c: f64,
    samples: &[usize],
) -> Result<VanishingReport> {
    let (f, geo) = composite(graph, g, c, samples)?;
    let domain = graph.domain();
    let m = domain.dim() as f64;
    let lap = LaplaceBeltrami::new(&geo.metric);
    let h_aux: Vec<f64> = f.gap.iter().map(|d| -d).collect();
    let grad_h = metric_gradient_sq(&geo.metric, &h_aux);
    // Lap h = -Lap(B f) + Lap g, with Lap g exactly zero for constant g.
    let lap_g = g.laplacian(&lap);
    let mut out = Vec::with_capacity(samples.len());
    let mut scale = 1.0f64;
    for &q in samples {
        let lhs = grad_h[q] - f.lap_b[q] + lap_g[q];
        let hm = geo.mean_curvature[q];
        scale = scale.max(f.energy[q]).max(lhs.abs());
        out.push(VanishingSample {
            node: q,
            lhs,
            half_energy: 0.5 * f.energy[q],
            curvature_term: 0.5 * m * hm * hm,
        });
    }
    let tolerance = 10.0 * domain.spacing() * scale;
    let min_first_margin = out.iter().map(|s| s.lhs - s.half_energy).fold(f64::INFINITY, f64::min);
    let min_second_margin = out
        .iter()
        .map(|s| s.half_energy - s.curvature_term)
        .fold(f64::INFINITY, f64::min);
    let flagged = out
        .iter()
        .filter(|s| s.lhs - s.half_energy < -tolerance || s.half_energy - s.curvature_term < -tolerance)
        .count();
    Ok(VanishingReport {
        tolerance,
        min_first_margin,
        min_second_margin,
        flagged,
        samples: out,
    })
}
