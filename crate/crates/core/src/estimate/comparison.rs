use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geometry::{metric_gradient_sq, LaplaceBeltrami, MetricFields};
use crate::grid::GridDomain;

use super::liouville::solve_laplace_beltrami;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComparisonKind {
    Constant,
    Field,
}

/// Lower comparison function `g` for `B o f`, required to satisfy
/// `Lap e^{-g} <= 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonFn {
    kind: ComparisonKind,
    values: Vec<f64>,
}

impl ComparisonFn {
    pub fn constant(domain: &GridDomain, value: f64) -> Self {
        Self {
            kind: ComparisonKind::Constant,
            values: vec![value; domain.len()],
        }
    }

    pub fn field(domain: &GridDomain, values: Vec<f64>) -> Result<Self> {
        domain.check_field(&values)?;
        Ok(Self {
            kind: ComparisonKind::Field,
            values,
        })
    }

    /// `g = -ln v` where `v` solves `Lap v = -rho` with positive Dirichlet
    /// data, so `e^{-g}` is discretely superharmonic whenever `rho >= 0`.
    pub fn from_superharmonic(metric: &MetricFields, rho: &[f64], boundary: &[f64]) -> Result<Self> {
        let lap = LaplaceBeltrami::new(metric);
        let source: Vec<f64> = rho.iter().map(|r| -r).collect();
        let v = solve_laplace_beltrami(&lap, boundary, &source)?;
        if let Some(idx) = v.iter().position(|&x| !(x > 0.0)) {
            return Err(crate::error::Error::Domain(format!(
                "superharmonic interpolant is not positive at node {idx}"
            )));
        }
        Self::field(&metric.domain, v.iter().map(|x| -x.ln()).collect())
    }

    pub fn kind(&self) -> ComparisonKind {
        self.kind
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// The same function moved by `s`.
    pub fn shifted(&self, s: f64) -> Self {
        Self {
            kind: self.kind,
            values: self.values.iter().map(|v| v + s).collect(),
        }
    }

    /// `Lap g`, exactly zero for the constant kind.
    pub(crate) fn laplacian(&self, lap: &LaplaceBeltrami) -> Vec<f64> {
        match self.kind {
            ComparisonKind::Constant => vec![0.0; self.values.len()],
            ComparisonKind::Field => lap.apply(&self.values),
        }
    }

    pub(crate) fn gradient_sq(&self, metric: &MetricFields) -> Vec<f64> {
        match self.kind {
            ComparisonKind::Constant => vec![0.0; self.values.len()],
            ComparisonKind::Field => metric_gradient_sq(metric, &self.values),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SuperharmonicReport {
    /// `Lap e^{-g}` on interior nodes (NaN on the boundary).
    #[serde(skip)]
    pub certificate: Vec<f64>,
    /// `|grad g|^2 - Lap g` on interior nodes.
    #[serde(skip)]
    pub alternative: Vec<f64>,
    pub max_certificate: f64,
    pub max_alternative: f64,
    /// Largest `|Lap e^{-g} - e^{-g} (|grad g|^2 - Lap g)|`.
    pub equivalence_defect: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Condition `Lap e^{-g} <= 0`, evaluated with the Laplace-Beltrami operator
/// of the given metric. Passes when the largest value stays under
/// `10 h^2 max(1, max e^{-g})`.
pub fn superharmonic_check(g: &ComparisonFn, metric: &MetricFields) -> SuperharmonicReport {
    let domain = &metric.domain;
    let h = domain.spacing();
    let lap = LaplaceBeltrami::new(metric);
    let exp_neg: Vec<f64> = g.values.iter().map(|v| (-v).exp()).collect();
    let certificate = match g.kind {
        ComparisonKind::Constant => {
            let mut c = vec![f64::NAN; domain.len()];
            for idx in domain.interior_nodes() {
                c[idx] = 0.0;
            }
            c
        }
        ComparisonKind::Field => lap.apply(&exp_neg),
    };
    let lap_g = g.laplacian(&lap);
    let grad_g = g.gradient_sq(metric);
    let mut alternative = vec![f64::NAN; domain.len()];
    let mut max_certificate = f64::NEG_INFINITY;
    let mut max_alternative = f64::NEG_INFINITY;
    let mut equivalence_defect = 0.0f64;
    for idx in domain.interior_nodes() {
        let alt = grad_g[idx] - lap_g[idx];
        alternative[idx] = alt;
        max_certificate = max_certificate.max(certificate[idx]);
        max_alternative = max_alternative.max(alt);
        equivalence_defect = equivalence_defect.max((certificate[idx] - exp_neg[idx] * alt).abs());
    }
    let scale = exp_neg.iter().fold(1.0f64, |a, &b| a.max(b));
    let tolerance = 10.0 * h * h * scale;
    SuperharmonicReport {
        certificate,
        alternative,
        max_certificate,
        max_alternative,
        equivalence_defect,
        tolerance,
        pass: max_certificate <= tolerance,
    }
}
