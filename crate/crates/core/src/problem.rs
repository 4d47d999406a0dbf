//! JSON problem files for the Dirichlet solver.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridDomain;
use crate::solver::{exact_hyperboloid, exact_plane, DirichletProblem, ExactSolution, SolverConfig};

/// The cube `[-half_width, half_width]^m` with `nodes` nodes per axis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CubeSpec {
    pub m: usize,
    pub half_width: f64,
    pub nodes: usize,
}

impl CubeSpec {
    pub fn domain(&self) -> Result<GridDomain> {
        if !(self.half_width > 0.0 && self.half_width.is_finite()) {
            return Err(Error::Domain(format!(
                "half_width must be positive, got {}",
                self.half_width
            )));
        }
        GridDomain::centered_cube(self.m, self.half_width, self.nodes)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BoundarySpec {
    /// `sqrt(1/k^2 + |x - center|^2) + shift`. `curvature` defaults to the
    /// problem's `H`.
    Hyperboloid {
        #[serde(default)]
        curvature: Option<f64>,
        #[serde(default)]
        center: Option<Vec<f64>>,
        #[serde(default)]
        shift: f64,
    },
    Plane {
        slope: Vec<f64>,
        #[serde(default)]
        offset: f64,
    },
    /// Explicit values on every node in row-major order; only the boundary
    /// entries are used.
    Values { values: Vec<f64> },
    /// `tilt . x + amplitude exp(-|x - center|^2 / width^2)`.
    PlaneBump {
        tilt: Vec<f64>,
        amplitude: f64,
        width: f64,
        center: Vec<f64>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub domain: CubeSpec,
    #[serde(rename = "H")]
    pub mean_curvature: f64,
    pub boundary: BoundarySpec,
    #[serde(default)]
    pub solver: Option<SolverConfig>,
}

impl ProblemSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Closed-form solution of this problem, when the boundary data come
    /// from one and its curvature matches `H`.
    pub fn exact(&self) -> Result<Option<Box<dyn ExactSolution>>> {
        let m = self.domain.m;
        Ok(match &self.boundary {
            BoundarySpec::Hyperboloid {
                curvature,
                center,
                shift,
            } => {
                let k = curvature.unwrap_or(self.mean_curvature);
                if k != self.mean_curvature {
                    return Ok(None);
                }
                let c = center.clone().unwrap_or_else(|| vec![0.0; m]);
                Some(Box::new(exact_hyperboloid(k, c, *shift)?))
            }
            BoundarySpec::Plane { slope, offset } if self.mean_curvature == 0.0 => {
                Some(Box::new(exact_plane(slope.clone(), *offset)?))
            }
            _ => None,
        })
    }

    pub fn dirichlet(&self) -> Result<DirichletProblem> {
        let domain = self.domain.domain()?;
        let m = domain.dim();
        let check_len = |v: &[f64], what: &str| {
            if v.len() != m {
                Err(Error::Domain(format!("{what} has {} entries, expected {m}", v.len())))
            } else {
                Ok(())
            }
        };
        let h = self.mean_curvature;
        match &self.boundary {
            BoundarySpec::Hyperboloid {
                curvature,
                center,
                shift,
            } => {
                let c = center.clone().unwrap_or_else(|| vec![0.0; m]);
                check_len(&c, "center")?;
                let exact = exact_hyperboloid(curvature.unwrap_or(h), c, *shift)?;
                DirichletProblem::from_fn(domain, |x| exact.eval(x), h)
            }
            BoundarySpec::Plane { slope, offset } => {
                check_len(slope, "slope")?;
                DirichletProblem::from_fn(
                    domain,
                    |x| slope.iter().zip(x).map(|(a, v)| a * v).sum::<f64>() + offset,
                    h,
                )
            }
            BoundarySpec::Values { values } => DirichletProblem::new(domain, values.clone(), h),
            BoundarySpec::PlaneBump {
                tilt,
                amplitude,
                width,
                center,
            } => {
                check_len(tilt, "tilt")?;
                check_len(center, "center")?;
                if !(*width > 0.0) {
                    return Err(Error::Domain(format!("bump width must be positive, got {width}")));
                }
                DirichletProblem::from_fn(
                    domain,
                    |x| {
                        let plane: f64 = tilt.iter().zip(x).map(|(a, v)| a * v).sum();
                        let d2: f64 = x.iter().zip(center).map(|(a, c)| (a - c) * (a - c)).sum();
                        plane + amplitude * (-d2 / (width * width)).exp()
                    },
                    h,
                )
            }
        }
    }

    pub fn solver_config(&self) -> SolverConfig {
        self.solver.clone().unwrap_or_default()
    }
}
