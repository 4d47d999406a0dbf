//! Uniform Cartesian grids and the finite-difference stencils shared by every
//! field computation.
//!
//! Nodes are stored row-major: the last axis varies fastest. Axis 0 is `x_1`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDomain")]
pub struct GridDomain {
    origin: Vec<f64>,
    spacing: f64,
    shape: Vec<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDomain {
    origin: Vec<f64>,
    spacing: f64,
    shape: Vec<usize>,
}

impl TryFrom<RawDomain> for GridDomain {
    type Error = Error;

    fn try_from(raw: RawDomain) -> Result<Self> {
        GridDomain::new(raw.origin, raw.spacing, raw.shape)
    }
}

impl GridDomain {
    pub fn new(origin: Vec<f64>, spacing: f64, shape: Vec<usize>) -> Result<Self> {
        if shape.is_empty() {
            return Err(Error::Domain("grid needs at least one axis".into()));
        }
        if origin.len() != shape.len() {
            return Err(Error::Dimension {
                expected: shape.len(),
                got: origin.len(),
            });
        }
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::Domain(format!("spacing must be positive, got {spacing}")));
        }
        if let Some(n) = shape.iter().find(|&&n| n < 3) {
            return Err(Error::Domain(format!(
                "every axis needs at least 3 nodes, got {n}"
            )));
        }
        Ok(Self {
            origin,
            spacing,
            shape,
        })
    }

    /// The cube `[-half_width, half_width]^m` with `nodes` nodes per axis.
    pub fn centered_cube(m: usize, half_width: f64, nodes: usize) -> Result<Self> {
        if nodes < 3 {
            return Err(Error::Domain(format!(
                "every axis needs at least 3 nodes, got {nodes}"
            )));
        }
        let spacing = 2.0 * half_width / (nodes - 1) as f64;
        Self::new(vec![-half_width; m], spacing, vec![nodes; m])
    }

    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn stride(&self, axis: usize) -> usize {
        self.shape[axis + 1..].iter().product()
    }

    pub fn index(&self, multi: &[usize]) -> usize {
        multi
            .iter()
            .enumerate()
            .fold(0, |acc, (axis, &i)| acc + i * self.stride(axis))
    }

    pub fn multi_index(&self, mut idx: usize) -> Vec<usize> {
        let mut multi = vec![0; self.dim()];
        for axis in (0..self.dim()).rev() {
            multi[axis] = idx % self.shape[axis];
            idx /= self.shape[axis];
        }
        multi
    }

    pub fn axis_index(&self, idx: usize, axis: usize) -> usize {
        (idx / self.stride(axis)) % self.shape[axis]
    }

    pub fn coords(&self, idx: usize) -> Vec<f64> {
        self.multi_index(idx)
            .into_iter()
            .zip(&self.origin)
            .map(|(i, o)| o + i as f64 * self.spacing)
            .collect()
    }

    /// Number of node steps to the nearest boundary hyperplane.
    pub fn boundary_distance(&self, idx: usize) -> usize {
        self.multi_index(idx)
            .into_iter()
            .zip(&self.shape)
            .map(|(i, &n)| i.min(n - 1 - i))
            .min()
            .unwrap_or(0)
    }

    pub fn is_interior(&self, idx: usize) -> bool {
        self.boundary_distance(idx) >= 1
    }

    pub fn interior_nodes(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.is_interior(i)).collect()
    }

    pub fn boundary_nodes(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| !self.is_interior(i)).collect()
    }

    /// Node displaced by integer `offsets` (one per axis), if it exists.
    pub fn offset(&self, idx: usize, offsets: &[isize]) -> Option<usize> {
        let mut out = idx as isize;
        for (axis, &d) in offsets.iter().enumerate() {
            if d == 0 {
                continue;
            }
            let i = self.axis_index(idx, axis) as isize + d;
            if i < 0 || i >= self.shape[axis] as isize {
                return None;
            }
            out += d * self.stride(axis) as isize;
        }
        Some(out as usize)
    }

    pub fn neighbor(&self, idx: usize, axis: usize, delta: isize) -> Option<usize> {
        let i = self.axis_index(idx, axis) as isize + delta;
        if i < 0 || i >= self.shape[axis] as isize {
            return None;
        }
        Some((idx as isize + delta * self.stride(axis) as isize) as usize)
    }

    /// Evaluate a closed-form function at every node.
    pub fn sample<F: Fn(&[f64]) -> f64>(&self, f: F) -> Vec<f64> {
        (0..self.len()).map(|i| f(&self.coords(i))).collect()
    }

    /// Node closest to `x`, if `x` lies inside the grid's bounding box.
    pub fn nearest_node(&self, x: &[f64]) -> Option<usize> {
        if x.len() != self.dim() {
            return None;
        }
        let mut multi = Vec::with_capacity(self.dim());
        for (axis, &xi) in x.iter().enumerate() {
            let t = ((xi - self.origin[axis]) / self.spacing).round();
            if t < 0.0 || t >= self.shape[axis] as f64 {
                return None;
            }
            multi.push(t as usize);
        }
        Some(self.index(&multi))
    }

    pub fn center_node(&self) -> usize {
        let multi: Vec<usize> = self.shape.iter().map(|n| n / 2).collect();
        self.index(&multi)
    }

    /// Every node whose multi-index is a multiple of `stride` on all axes and
    /// that sits at least `margin` nodes from the boundary.
    pub fn stride_samples(&self, stride: usize, margin: usize) -> Vec<usize> {
        let stride = stride.max(1);
        (0..self.len())
            .filter(|&i| {
                self.boundary_distance(i) >= margin
                    && self.multi_index(i).iter().all(|k| k % stride == 0)
            })
            .collect()
    }

    /// Nodes inside the concentric box scaled by `fraction` about the grid
    /// center, i.e. `|x_i - mid_i| <= fraction * half_extent_i` on every axis.
    pub fn central_nodes(&self, fraction: f64) -> Vec<usize> {
        let half: Vec<f64> = self
            .shape
            .iter()
            .map(|&n| 0.5 * (n - 1) as f64 * self.spacing)
            .collect();
        let tol = 1e-9 * self.spacing;
        (0..self.len())
            .filter(|&i| {
                self.coords(i)
                    .iter()
                    .enumerate()
                    .all(|(a, x)| (x - self.origin[a] - half[a]).abs() <= fraction * half[a] + tol)
            })
            .collect()
    }

    /// Evenly thinned subset of `nodes` with at most `count` entries.
    pub fn thin(nodes: &[usize], count: usize) -> Vec<usize> {
        if nodes.len() <= count || count == 0 {
            return nodes.to_vec();
        }
        (0..count)
            .map(|k| nodes[k * nodes.len() / count])
            .collect()
    }

    pub fn check_field(&self, values: &[f64]) -> Result<()> {
        if values.len() != self.len() {
            return Err(Error::Dimension {
                expected: self.len(),
                got: values.len(),
            });
        }
        Ok(())
    }
}

/// First partial derivative: centered in the interior, second-order one-sided
/// on the boundary.
pub fn partial(domain: &GridDomain, field: &[f64], idx: usize, axis: usize) -> f64 {
    let h = domain.spacing();
    match (domain.neighbor(idx, axis, -1), domain.neighbor(idx, axis, 1)) {
        (Some(lo), Some(hi)) => (field[hi] - field[lo]) / (2.0 * h),
        (None, Some(hi)) => {
            let hi2 = domain.neighbor(idx, axis, 2).expect("axis has >= 3 nodes");
            (4.0 * (field[hi] - field[idx]) - (field[hi2] - field[idx])) / (2.0 * h)
        }
        (Some(lo), None) => {
            let lo2 = domain.neighbor(idx, axis, -2).expect("axis has >= 3 nodes");
            (field[lo2] - field[idx] - 4.0 * (field[lo] - field[idx])) / (2.0 * h)
        }
        (None, None) => unreachable!("axis has >= 3 nodes"),
    }
}

pub fn gradient(domain: &GridDomain, field: &[f64], idx: usize) -> Vec<f64> {
    (0..domain.dim())
        .map(|axis| partial(domain, field, idx, axis))
        .collect()
}

/// Centered second partial `d^2 f / dx_i dx_j`; `idx` must be interior.
pub fn second_partial(domain: &GridDomain, field: &[f64], idx: usize, i: usize, j: usize) -> f64 {
    let h = domain.spacing();
    let at = |offsets: &[(usize, isize)]| {
        let mut off = vec![0isize; domain.dim()];
        for &(axis, d) in offsets {
            off[axis] += d;
        }
        field[domain.offset(idx, &off).expect("second_partial needs an interior node")]
    };
    if i == j {
        (at(&[(i, 1)]) - 2.0 * field[idx] + at(&[(i, -1)])) / (h * h)
    } else {
        (at(&[(i, 1), (j, 1)]) - at(&[(i, 1), (j, -1)]) - at(&[(i, -1), (j, 1)])
            + at(&[(i, -1), (j, -1)]))
            / (4.0 * h * h)
    }
}
