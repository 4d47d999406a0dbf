use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{
    gauss_map_with, intrinsic_ball, ricci_min, shape_and_mean_curvature, GaussField,
    GeometryFields, IntrinsicBall, SpacelikeGraph,
};
use crate::hyperbolic::{busemann_height, BusemannRay};

use super::comparison::{ComparisonFn, ComparisonKind};

/// `B o f` with `B = ln(z_m / c)` evaluated on the upper half-space height of
/// the Gauss image, together with the heights themselves.
#[derive(Clone, Debug)]
pub struct BusemannField {
    pub c: f64,
    pub height: Vec<f64>,
    pub values: Vec<f64>,
}

impl BusemannField {
    pub fn new(gauss: &GaussField, ray: &BusemannRay) -> Self {
        let m = gauss.dim();
        let height: Vec<f64> = (0..gauss.nu[0].len())
            .map(|idx| gauss.upper_half_at(idx)[m - 1])
            .collect();
        let values = height.iter().map(|&z| busemann_height(z, ray.c())).collect();
        Self {
            c: ray.c(),
            height,
            values,
        }
    }
}

/// `B o f - g` after the normalization `min gap >= 1` over a node set.
#[derive(Clone, Debug, Serialize)]
pub struct Gap {
    /// Normalized gap on every node (only the normalization set is checked).
    #[serde(skip)]
    pub values: Vec<f64>,
    /// Minimum of the raw gap over the set.
    pub raw_min: f64,
    pub argmin: usize,
    /// Amount subtracted from `g` (zero when the raw gap already reaches 1).
    pub shift: f64,
}

/// Normalize `B o f - g` over `nodes`. A nonpositive raw gap means the Gauss
/// image leaves the horoball `{B > g}` and is reported as an error.
///
/// For constant `g` the shifted gap is formed as `ln(z / z_min) + 1`, which
/// does not depend on `c` or on the constant at all.
pub fn normalized_gap(busemann: &BusemannField, g: &ComparisonFn, nodes: &[usize]) -> Result<Gap> {
    let gv = g.values();
    let mut raw_min = f64::INFINITY;
    let mut argmin = nodes.first().copied().unwrap_or(0);
    for &idx in nodes {
        let gap = busemann.values[idx] - gv[idx];
        if !(gap >= raw_min) {
            raw_min = gap;
            argmin = idx;
        }
    }
    if !(raw_min > 0.0) {
        return Err(Error::HoroballViolation {
            node: argmin,
            gap: raw_min,
        });
    }
    let shift = if raw_min < 1.0 { 1.0 - raw_min } else { 0.0 };
    let values = match g.kind() {
        ComparisonKind::Constant => {
            let z_min = busemann.height[argmin];
            let base = if shift > 0.0 { 1.0 } else { raw_min };
            busemann.height.iter().map(|z| (z / z_min).ln() + base).collect()
        }
        ComparisonKind::Field => busemann
            .values
            .iter()
            .zip(gv)
            .map(|(b, gg)| b - gg + shift)
            .collect(),
    };
    Ok(Gap {
        values,
        raw_min,
        argmin,
        shift,
    })
}

#[derive(Clone, Debug)]
pub struct PhiField {
    /// `|grad f| / (B o f - g)` on every node.
    pub phi: Vec<f64>,
    pub busemann: BusemannField,
    pub gap: Gap,
}

/// `phi = |grad f| / (B o f - g)` with the gap normalized over the whole grid.
pub fn phi_field(gauss: &GaussField, g: &ComparisonFn, c: f64) -> Result<PhiField> {
    let nodes: Vec<usize> = (0..gauss.nu[0].len()).collect();
    phi_over(gauss, g, c, &nodes)
}

pub(crate) fn phi_over(gauss: &GaussField, g: &ComparisonFn, c: f64, nodes: &[usize]) -> Result<PhiField> {
    if g.values().len() != gauss.nu[0].len() {
        return Err(Error::Dimension {
            expected: gauss.nu[0].len(),
            got: g.values().len(),
        });
    }
    let ray = BusemannRay::new(c)?;
    let busemann = BusemannField::new(gauss, &ray);
    let gap = normalized_gap(&busemann, g, nodes)?;
    let phi = gauss
        .energy
        .iter()
        .zip(&gap.values)
        .map(|(e, d)| e.max(0.0).sqrt() / d)
        .collect();
    Ok(PhiField { phi, busemann, gap })
}

#[derive(Clone, Debug, Serialize)]
pub struct EstimateReport {
    pub a: f64,
    pub center: usize,
    /// `sqrt(max(0, -min Ric))` from the measured Ricci curvature.
    pub k: f64,
    /// The a priori value `m sup|H| / 2` from the Gauss-equation bound.
    pub k_bound: f64,
    pub sup_phi: f64,
    pub argmax: usize,
    /// `sup_phi * a / (1 + k a)`.
    pub implied_constant: f64,
    /// `sup_phi * a`, the implied constant with `k = 0`.
    pub scaled_sup: f64,
    pub min_gap: f64,
    pub gap_shift: f64,
    pub ball_nodes: usize,
    pub half_ball_nodes: usize,
}

/// Ball of radius `a` that must stay off the boundary.
pub(crate) fn interior_ball(geo: &GeometryFields, center: usize, a: f64) -> Result<IntrinsicBall> {
    let ball = intrinsic_ball(&geo.metric, center, a)?;
    let domain = geo.domain();
    if ball.nodes.iter().any(|&q| !domain.is_interior(q)) {
        return Err(Error::DomainTooSmall { center, radius: a });
    }
    Ok(ball)
}

pub(crate) fn ricci_constants(geo: &GeometryFields) -> (f64, f64) {
    let ric = ricci_min(geo);
    let k = (-ric.global_min).max(0.0).sqrt();
    let h_sup = geo.interior_sup(&geo.mean_curvature);
    (k, geo.dim() as f64 * h_sup / 2.0)
}

/// Sup of `phi` over the intrinsic ball of radius `a / 2`, with the gap
/// normalized over the ball of radius `a`.
pub fn gradient_estimate_report(
    graph: &SpacelikeGraph,
    center: usize,
    a: f64,
    g: &ComparisonFn,
    c: f64,
) -> Result<EstimateReport> {
    let geo = shape_and_mean_curvature(graph)?;
    let gauss = gauss_map_with(graph, &geo);
    estimate_from_fields(&geo, &gauss, center, a, g, c)
}

pub fn estimate_from_fields(
    geo: &GeometryFields,
    gauss: &GaussField,
    center: usize,
    a: f64,
    g: &ComparisonFn,
    c: f64,
) -> Result<EstimateReport> {
    let ball = interior_ball(geo, center, a)?;
    let phi = phi_over(gauss, g, c, &ball.nodes)?;
    let half = ball.within(a / 2.0);
    let mut sup_phi = 0.0f64;
    let mut argmax = center;
    for &q in &half {
        if phi.phi[q] > sup_phi {
            sup_phi = phi.phi[q];
            argmax = q;
        }
    }
    let (k, k_bound) = ricci_constants(geo);
    Ok(EstimateReport {
        a,
        center,
        k,
        k_bound,
        sup_phi,
        argmax,
        implied_constant: sup_phi * a / (1.0 + k * a),
        scaled_sup: sup_phi * a,
        min_gap: phi.gap.raw_min + phi.gap.shift,
        gap_shift: phi.gap.shift,
        ball_nodes: ball.nodes.len(),
        half_ball_nodes: half.len(),
    })
}
