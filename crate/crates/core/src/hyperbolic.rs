//! Hyperbolic space in three models, isometries between them, distance, and
//! Busemann functions of the vertical ray in the upper half-space.
//!
//! The hyperboloid `{x : -x_0^2 + sum x_i^2 = -1, x_0 > 0}` is the canonical
//! model: distances are always evaluated there.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for model-invariant checks.
pub const INVARIANT_TOL: f64 = 1e-10;
/// Tolerance for isometry checks (distances across models).
pub const ISOMETRY_TOL: f64 = 1e-9;
/// Default ray parameter for [`busemann_limit_approx`].
pub const DEFAULT_LIMIT_T: f64 = 20.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    Hyperboloid,
    UpperHalf,
    Ball,
}

impl Model {
    pub fn name(self) -> &'static str {
        match self {
            Model::Hyperboloid => "hyperboloid",
            Model::UpperHalf => "upper_half",
            Model::Ball => "ball",
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A point of hyperbolic m-space tagged with the model its coordinates live in.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelPoint {
    model: Model,
    coords: Vec<f64>,
}

impl ModelPoint {
    pub fn new(model: Model, coords: Vec<f64>) -> Result<Self> {
        let p = Self { model, coords };
        p.validate()?;
        Ok(p)
    }

    pub fn hyperboloid(coords: Vec<f64>) -> Result<Self> {
        Self::new(Model::Hyperboloid, coords)
    }

    pub fn upper_half(coords: Vec<f64>) -> Result<Self> {
        Self::new(Model::UpperHalf, coords)
    }

    pub fn ball(coords: Vec<f64>) -> Result<Self> {
        Self::new(Model::Ball, coords)
    }

    /// Basepoint of the hyperboloid, `(1, 0, ..., 0)`.
    pub fn basepoint(m: usize) -> Self {
        let mut coords = vec![0.0; m + 1];
        coords[0] = 1.0;
        Self {
            model: Model::Hyperboloid,
            coords,
        }
    }

    /// Construct without checking the model invariant. Used for points that
    /// come out of a conversion formula.
    pub(crate) fn unchecked(model: Model, coords: Vec<f64>) -> Self {
        Self { model, coords }
    }

    pub fn model(&self) -> Model {
        self.model
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }

    /// Dimension m of the hyperbolic space.
    pub fn dim(&self) -> usize {
        match self.model {
            Model::Hyperboloid => self.coords.len() - 1,
            _ => self.coords.len(),
        }
    }

    fn invalid(&self, reason: String) -> Error {
        Error::InvalidPoint {
            model: self.model.name(),
            reason,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.coords.iter().any(|c| !c.is_finite()) {
            return Err(self.invalid("non-finite coordinate".into()));
        }
        match self.model {
            Model::Hyperboloid => {
                if self.coords.len() < 2 {
                    return Err(self.invalid("needs at least 2 coordinates".into()));
                }
                let x0 = self.coords[0];
                if x0 <= 0.0 {
                    return Err(self.invalid(format!("x_0 = {x0} must be positive")));
                }
                let q = lorentz_quadratic(&self.coords);
                // Relative to x_0^2: the two terms cancel to -1 and carry that much rounding.
                if (q + 1.0).abs() > INVARIANT_TOL * x0 * x0 {
                    return Err(self.invalid(format!("<x,x>_L = {q}, expected -1")));
                }
            }
            Model::UpperHalf => {
                let last = *self
                    .coords
                    .last()
                    .ok_or_else(|| self.invalid("empty coordinates".into()))?;
                if last <= 0.0 {
                    return Err(self.invalid(format!("height {last} must be positive")));
                }
            }
            Model::Ball => {
                if self.coords.is_empty() {
                    return Err(self.invalid("empty coordinates".into()));
                }
                let r2: f64 = self.coords.iter().map(|c| c * c).sum();
                if r2 >= 1.0 {
                    return Err(self.invalid(format!("|y| = {} must be < 1", r2.sqrt())));
                }
            }
        }
        Ok(())
    }

    pub fn to(&self, target: Model) -> Result<ModelPoint> {
        convert(self, target)
    }
}

fn lorentz_quadratic(x: &[f64]) -> f64 {
    -x[0] * x[0] + x[1..].iter().map(|v| v * v).sum::<f64>()
}

/// Lorentz inner product `-p_0 q_0 + sum p_i q_i`.
pub fn lorentz_inner(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::Dimension {
            expected: p.len(),
            got: q.len(),
        });
    }
    if p.is_empty() {
        return Err(Error::Dimension {
            expected: 1,
            got: 0,
        });
    }
    Ok(-p[0] * q[0] + p[1..].iter().zip(&q[1..]).map(|(a, b)| a * b).sum::<f64>())
}

fn hyperboloid_coords(p: &ModelPoint) -> Vec<f64> {
    let c = &p.coords;
    match p.model {
        Model::Hyperboloid => c.clone(),
        Model::Ball => {
            let s: f64 = c.iter().map(|v| v * v).sum();
            let denom = 1.0 - s;
            let mut x = Vec::with_capacity(c.len() + 1);
            x.push((1.0 + s) / denom);
            x.extend(c.iter().map(|v| 2.0 * v / denom));
            x
        }
        Model::UpperHalf => {
            let m = c.len();
            let t = c[m - 1];
            let w2: f64 = c[..m - 1].iter().map(|v| v * v).sum();
            let mut x = Vec::with_capacity(m + 1);
            x.push((t * t + w2 + 1.0) / (2.0 * t));
            x.extend(c[..m - 1].iter().map(|v| v / t));
            x.push((t * t + w2 - 1.0) / (2.0 * t));
            x
        }
    }
}

/// Upper half-space coordinates of a hyperboloid point. The height is
/// `1 / (x_0 - x_m)`, evaluated without cancellation.
pub(crate) fn hyperboloid_to_upper_half(x: &[f64]) -> Vec<f64> {
    let m = x.len() - 1;
    let xm = x[m];
    let d = if xm > 0.0 {
        let w2: f64 = x[1..m].iter().map(|v| v * v).sum();
        (1.0 + w2) / (x[0] + xm)
    } else {
        x[0] - xm
    };
    let mut z: Vec<f64> = x[1..m].iter().map(|v| v / d).collect();
    z.push(1.0 / d);
    z
}

/// Isometric conversion between models. Every route passes through the
/// hyperboloid.
pub fn convert(p: &ModelPoint, target: Model) -> Result<ModelPoint> {
    p.validate()?;
    if p.model == target {
        return Ok(p.clone());
    }
    let x = hyperboloid_coords(p);
    let coords = match target {
        Model::Hyperboloid => x,
        Model::Ball => {
            let denom = 1.0 + x[0];
            x[1..].iter().map(|v| v / denom).collect()
        }
        Model::UpperHalf => hyperboloid_to_upper_half(&x),
    };
    Ok(ModelPoint::unchecked(target, coords))
}

/// Hyperbolic distance between two hyperboloid points given as raw coordinates.
pub(crate) fn hyperboloid_distance(p: &[f64], q: &[f64]) -> f64 {
    let x = -(-p[0] * q[0] + p[1..].iter().zip(&q[1..]).map(|(a, b)| a * b).sum::<f64>());
    if x >= 2.0 {
        x.acosh()
    } else {
        // Chord form keeps precision for nearby points.
        let mut chord = -(p[0] - q[0]).powi(2);
        for (a, b) in p[1..].iter().zip(&q[1..]) {
            chord += (a - b).powi(2);
        }
        2.0 * (chord.max(0.0).sqrt() / 2.0).asinh()
    }
}

pub fn hyp_distance(p: &ModelPoint, q: &ModelPoint) -> Result<f64> {
    if p.dim() != q.dim() {
        return Err(Error::Dimension {
            expected: p.dim(),
            got: q.dim(),
        });
    }
    let x = convert(p, Model::Hyperboloid)?;
    let y = convert(q, Model::Hyperboloid)?;
    Ok(hyperboloid_distance(&x.coords, &y.coords))
}

/// Horoball `{z_m > c}` in upper half-space coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HoroballSpec {
    c: f64,
}

impl HoroballSpec {
    pub fn new(c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::Domain(format!("horoball height must be positive, got {c}")));
        }
        Ok(Self { c })
    }

    pub fn c(&self) -> f64 {
        self.c
    }
}

/// The vertical geodesic ray `{(0, ..., 0, z_m) : z_m >= c}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BusemannRay {
    c: f64,
}

impl BusemannRay {
    pub fn new(c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::Domain(format!("ray basepoint height must be positive, got {c}")));
        }
        Ok(Self { c })
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    /// Unit-speed point at arclength `t` along the ray, in m-dimensional
    /// upper half-space.
    pub fn point_at(&self, m: usize, t: f64) -> ModelPoint {
        let mut coords = vec![0.0; m];
        coords[m - 1] = self.c * t.exp();
        ModelPoint::unchecked(Model::UpperHalf, coords)
    }

    pub fn horoball(&self) -> HoroballSpec {
        HoroballSpec { c: self.c }
    }
}

fn height(z: &ModelPoint) -> Result<f64> {
    let u = convert(z, Model::UpperHalf)?;
    Ok(*u.coords.last().expect("validated point"))
}

/// `B_c(z) = ln(z_m / c)`.
pub fn busemann_eval(z: &ModelPoint, ray: &BusemannRay) -> Result<f64> {
    let zm = height(z)?;
    if zm <= 0.0 {
        return Err(Error::Domain(format!("height {zm} must be positive")));
    }
    Ok((zm / ray.c).ln())
}

/// Busemann function from raw upper half-space height.
pub(crate) fn busemann_height(zm: f64, c: f64) -> f64 {
    (zm / c).ln()
}

/// `t - d(z, c(t))`, nondecreasing in `t` and converging to [`busemann_eval`].
pub fn busemann_limit_approx(z: &ModelPoint, ray: &BusemannRay, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("ray parameter must be positive, got {t}")));
    }
    let on_ray = ray.point_at(z.dim(), t);
    Ok(t - hyp_distance(z, &on_ray)?)
}

pub fn horoball_contains(z: &ModelPoint, h: &HoroballSpec) -> Result<bool> {
    Ok(height(z)? > h.c)
}

/// Christoffel symbols of `|dz|^2 / z_m^2`, indexed `[k][i][j]` as
/// `gamma[(k * m + i) * m + j]`.
pub fn christoffel_upper_half(z: &[f64]) -> Vec<f64> {
    let m = z.len();
    let t = z[m - 1];
    let last = m - 1;
    let delta = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
    let mut gamma = vec![0.0; m * m * m];
    for k in 0..m {
        for i in 0..m {
            for j in 0..m {
                gamma[(k * m + i) * m + j] =
                    -(delta(i, k) * delta(j, last) + delta(j, k) * delta(i, last)
                        - delta(i, j) * delta(k, last))
                        / t;
            }
        }
    }
    gamma
}

/// Outcome of checking `Hess B = -(gamma - dB (x) dB)` at a point.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct HessianCheck {
    /// Largest component of `Hess B + gamma - dB (x) dB` in an orthonormal frame.
    pub residual: f64,
    /// `|grad B|` in the hyperbolic metric.
    pub gradient_norm: f64,
}

pub fn busemann_hessian_check(z: &ModelPoint, _ray: &BusemannRay) -> Result<HessianCheck> {
    let zu = convert(z, Model::UpperHalf)?;
    let z = zu.coords();
    let m = z.len();
    let t = z[m - 1];
    // B = ln z_m - ln c: only the last partials are nonzero.
    let mut d_b = vec![0.0; m];
    d_b[m - 1] = 1.0 / t;
    let mut dd_b = vec![0.0; m * m];
    dd_b[(m - 1) * m + (m - 1)] = -1.0 / (t * t);

    let gamma = christoffel_upper_half(z);
    let mut residual = 0.0f64;
    for a in 0..m {
        for b in 0..m {
            let mut hess = dd_b[a * m + b];
            for k in 0..m {
                hess -= gamma[(k * m + a) * m + b] * d_b[k];
            }
            let metric = if a == b { 1.0 / (t * t) } else { 0.0 };
            let r = hess + metric - d_b[a] * d_b[b];
            // Rescale by t^2 to read the component in an orthonormal frame.
            residual = residual.max((r * t * t).abs());
        }
    }
    let gradient_norm = t * d_b.iter().map(|v| v * v).sum::<f64>().sqrt();
    Ok(HessianCheck {
        residual,
        gradient_norm,
    })
}

/// Closed-form distance in the upper half-space.
fn upper_half_distance(p: &[f64], q: &[f64]) -> f64 {
    let m = p.len();
    let d2: f64 = p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum();
    2.0 * (d2.sqrt() / (2.0 * (p[m - 1] * q[m - 1]).sqrt())).asinh()
}

/// Closed-form distance in the ball.
fn ball_distance(p: &[f64], q: &[f64]) -> f64 {
    let d2: f64 = p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum();
    let np: f64 = p.iter().map(|v| v * v).sum();
    let nq: f64 = q.iter().map(|v| v * v).sum();
    2.0 * (d2 / ((1.0 - np) * (1.0 - nq))).sqrt().asinh()
}

#[derive(Clone, Debug, Serialize)]
pub struct SelfTestReport {
    pub seed: u64,
    pub samples: usize,
    pub max_round_trip: f64,
    pub max_isometry: f64,
    pub limit_t: f64,
    pub max_limit_error: f64,
    /// `t - d(z, c(t))` nondecreasing along `t` in {5, 10, 20} at every sample.
    pub limit_monotone: bool,
    pub max_hessian_residual: f64,
    pub max_gradient_defect: f64,
    pub pass: bool,
}

/// Seeded invariant suite over the three models in dimensions 2 and 3:
/// round trips, cross-model distances against closed forms, the Busemann
/// limit, and the Hessian identity with `|grad B| = 1`.
pub fn self_test(seed: u64, samples: usize) -> Result<SelfTestReport> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut max_round_trip = 0.0f64;
    let mut max_isometry = 0.0f64;
    let mut max_limit_error = 0.0f64;
    let mut limit_monotone = true;
    let mut max_hessian_residual = 0.0f64;
    let mut max_gradient_defect = 0.0f64;
    for k in 0..samples {
        let m = 2 + k % 2;
        let mut draw = || -> Result<ModelPoint> {
            let mut z: Vec<f64> = (0..m - 1).map(|_| rng.gen_range(-2.0..2.0)).collect();
            z.push(rng.gen_range(0.1..5.0));
            ModelPoint::upper_half(z)
        };
        let p = draw()?;
        let q = draw()?;
        let ray = BusemannRay::new(rng.gen_range(0.5..2.0))?;

        let ph = convert(&p, Model::Hyperboloid)?;
        for via in [Model::UpperHalf, Model::Ball] {
            let back = convert(&convert(&ph, via)?, Model::Hyperboloid)?;
            for (a, b) in ph.coords().iter().zip(back.coords()) {
                max_round_trip = max_round_trip.max((a - b).abs());
            }
        }

        let d = hyp_distance(&p, &q)?;
        let d_upper = upper_half_distance(p.coords(), q.coords());
        let d_ball = ball_distance(convert(&p, Model::Ball)?.coords(), convert(&q, Model::Ball)?.coords());
        max_isometry = max_isometry.max((d - d_upper).abs()).max((d - d_ball).abs());

        let exact = busemann_eval(&p, &ray)?;
        let mut prev = f64::NEG_INFINITY;
        for t in [5.0, 10.0, DEFAULT_LIMIT_T] {
            let v = busemann_limit_approx(&p, &ray, t)?;
            if v < prev - 1e-12 {
                limit_monotone = false;
            }
            prev = v;
        }
        max_limit_error = max_limit_error.max((prev - exact).abs());

        let h = busemann_hessian_check(&p, &ray)?;
        max_hessian_residual = max_hessian_residual.max(h.residual);
        max_gradient_defect = max_gradient_defect.max((h.gradient_norm - 1.0).abs());
    }
    let pass = max_round_trip <= INVARIANT_TOL
        && max_isometry <= ISOMETRY_TOL
        && max_limit_error <= 1e-6
        && limit_monotone
        && max_hessian_residual <= ISOMETRY_TOL
        && max_gradient_defect <= INVARIANT_TOL;
    Ok(SelfTestReport {
        seed,
        samples,
        max_round_trip,
        max_isometry,
        limit_t: DEFAULT_LIMIT_T,
        max_limit_error,
        limit_monotone,
        max_hessian_residual,
        max_gradient_defect,
        pass,
    })
}
