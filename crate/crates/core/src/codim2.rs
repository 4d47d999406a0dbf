//! Spacelike surfaces in R^4_2 at the level of second fundamental form fields.
//!
//! Fields live on a flat parameter grid: the induced metric is the identity
//! and the normal connection form `omega_34` vanishes, so covariant
//! derivatives `h^a_ijk` are plain partials `d_k h^a_ij`.

use nalgebra::{Matrix4, Vector4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{partial, GridDomain};

/// Channel names in storage order.
pub const CHANNELS: [&str; 6] = ["h3_11", "h3_12", "h3_22", "h4_11", "h4_12", "h4_22"];

/// Default tolerance for the exact nodal identities.
pub const IDENTITY_TOL: f64 = 1e-12;

/// Symmetric 2x2 forms `h3`, `h4` stored as `(11, 12, 22)` components, so
/// symmetry holds by construction.
#[derive(Clone, Debug, PartialEq)]
pub struct SecondFormField2D {
    domain: GridDomain,
    h3: [Vec<f64>; 3],
    h4: [Vec<f64>; 3],
}

impl SecondFormField2D {
    pub fn new(domain: GridDomain, h3: [Vec<f64>; 3], h4: [Vec<f64>; 3]) -> Result<Self> {
        if domain.dim() != 2 {
            return Err(Error::Dimension {
                expected: 2,
                got: domain.dim(),
            });
        }
        for c in h3.iter().chain(&h4) {
            domain.check_field(c)?;
        }
        Ok(Self { domain, h3, h4 })
    }

    /// Build from the six channels in `CHANNELS` order.
    pub fn from_channels(domain: GridDomain, channels: Vec<Vec<f64>>) -> Result<Self> {
        let [a, b, c, d, e, f]: [Vec<f64>; 6] = channels.try_into().map_err(|v: Vec<Vec<f64>>| {
            Error::Format(format!("expected 6 channels, got {}", v.len()))
        })?;
        Self::new(domain, [a, b, c], [d, e, f])
    }

    /// Sample a closed form returning the channels in `CHANNELS` order.
    pub fn from_fn<F: Fn(&[f64]) -> [f64; 6]>(domain: GridDomain, f: F) -> Result<Self> {
        let mut channels = vec![Vec::with_capacity(domain.len()); 6];
        for idx in 0..domain.len() {
            let v = f(&domain.coords(idx));
            for (c, x) in channels.iter_mut().zip(v) {
                c.push(x);
            }
        }
        Self::from_channels(domain, channels)
    }

    /// Stress-function construction `h11 = D2 D2 psi`, `h12 = -D1 D2 psi`,
    /// `h22 = D1 D1 psi` with the grid difference operators. Because those
    /// operators commute, both rows of each form are discretely divergence
    /// free and the parallel-mean-curvature residuals vanish to round-off.
    pub fn from_potentials(domain: GridDomain, psi3: &[f64], psi4: &[f64]) -> Result<Self> {
        if domain.dim() != 2 {
            return Err(Error::Dimension {
                expected: 2,
                got: domain.dim(),
            });
        }
        domain.check_field(psi3)?;
        domain.check_field(psi4)?;
        let build = |psi: &[f64]| {
            let d1 = diff(&domain, psi, 0);
            let d2 = diff(&domain, psi, 1);
            let d22 = diff(&domain, &d2, 1);
            let d12: Vec<f64> = diff(&domain, &d2, 0).into_iter().map(|v| -v).collect();
            let d11 = diff(&domain, &d1, 0);
            [d22, d12, d11]
        };
        let h3 = build(psi3);
        let h4 = build(psi4);
        Self::new(domain, h3, h4)
    }

    /// Smooth random field: each channel is a seeded sum of low-frequency
    /// trigonometric modes with coefficients in `[-1, 1]`.
    pub fn random_smooth(domain: GridDomain, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let modes: Vec<Vec<[f64; 4]>> = (0..6)
            .map(|_| {
                (0..4)
                    .map(|_| {
                        [
                            rng.gen_range(-1.0..1.0),
                            rng.gen_range(-2.0..2.0),
                            rng.gen_range(-2.0..2.0),
                            rng.gen_range(0.0..std::f64::consts::TAU),
                        ]
                    })
                    .collect()
            })
            .collect();
        Self::from_fn(domain, |x| {
            let mut out = [0.0; 6];
            for (o, ms) in out.iter_mut().zip(&modes) {
                *o = ms
                    .iter()
                    .map(|[amp, k1, k2, phase]| amp * (k1 * x[0] + k2 * x[1] + phase).sin())
                    .sum();
            }
            out
        })
    }

    pub fn domain(&self) -> &GridDomain {
        &self.domain
    }

    pub fn h3(&self) -> &[Vec<f64>; 3] {
        &self.h3
    }

    pub fn h4(&self) -> &[Vec<f64>; 3] {
        &self.h4
    }

    /// Channels in `CHANNELS` order.
    pub fn channels(&self) -> Vec<&[f64]> {
        self.h3.iter().chain(&self.h4).map(|c| c.as_slice()).collect()
    }

    pub fn channel(&self, name: &str) -> Option<&[f64]> {
        CHANNELS
            .iter()
            .position(|c| *c == name)
            .map(|k| self.channels()[k])
    }

    /// `omega_34`, identically zero in this setting.
    pub fn normal_connection(&self) -> Vec<f64> {
        vec![0.0; self.domain.len()]
    }

    /// `h^alpha` at a node as `[[h11, h12], [h12, h22]]`, `alpha` in {3, 4}.
    pub fn form_at(&self, alpha: usize, idx: usize) -> [[f64; 2]; 2] {
        let h = if alpha == 3 { &self.h3 } else { &self.h4 };
        [[h[0][idx], h[1][idx]], [h[1][idx], h[2][idx]]]
    }

    /// `alpha * self + beta * other` channel by channel.
    pub fn combine(&self, alpha: f64, other: &Self, beta: f64) -> Result<Self> {
        if self.domain != other.domain {
            return Err(Error::Domain("fields live on different grids".into()));
        }
        let mix = |a: &[Vec<f64>; 3], b: &[Vec<f64>; 3]| -> [Vec<f64>; 3] {
            std::array::from_fn(|k| a[k].iter().zip(&b[k]).map(|(x, y)| alpha * x + beta * y).collect())
        };
        Self::new(self.domain.clone(), mix(&self.h3, &other.h3), mix(&self.h4, &other.h4))
    }
}

fn diff(domain: &GridDomain, field: &[f64], axis: usize) -> Vec<f64> {
    (0..domain.len()).map(|i| partial(domain, field, i, axis)).collect()
}

fn sup_abs(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).fold(0.0, f64::max)
}

/// `H^alpha = (h^alpha_11 + h^alpha_22) / 2` and `|H|`.
#[derive(Clone, Debug, PartialEq)]
pub struct MeanCurvatureVector2D {
    pub h3: Vec<f64>,
    pub h4: Vec<f64>,
    pub norm: Vec<f64>,
}

impl MeanCurvatureVector2D {
    pub fn from_field(f: &SecondFormField2D) -> Self {
        let half_trace = |h: &[Vec<f64>; 3]| -> Vec<f64> {
            h[0].iter().zip(&h[2]).map(|(a, b)| 0.5 * (a + b)).collect()
        };
        let h3 = half_trace(&f.h3);
        let h4 = half_trace(&f.h4);
        let norm = h3.iter().zip(&h4).map(|(a, b)| a.hypot(*b)).collect();
        Self { h3, h4, norm }
    }
}

/// The four quantities `d1 h^a_i1 + d2 h^a_i2` for `(a, i)` = (3,1), (3,2),
/// (4,1), (4,2); all vanish iff the mean curvature vector is parallel.
pub fn parallel_h_residual(f: &SecondFormField2D) -> [Vec<f64>; 4] {
    let d = &f.domain;
    let row = |h: &[Vec<f64>; 3], first: usize, second: usize| -> Vec<f64> {
        let a = diff(d, &h[first], 0);
        let b = diff(d, &h[second], 1);
        a.iter().zip(&b).map(|(x, y)| x + y).collect()
    };
    [row(&f.h3, 0, 1), row(&f.h3, 1, 2), row(&f.h4, 0, 1), row(&f.h4, 1, 2)]
}

/// Components of the split Gauss map differential and the two energy
/// densities. Each 2x2 field is stored as `[c11, c12, c21, c22]`.
#[derive(Clone, Debug, PartialEq)]
pub struct SplitGaussDifferential {
    pub a: [Vec<f64>; 4],
    pub b: [Vec<f64>; 4],
    pub e1: Vec<f64>,
    pub e2: Vec<f64>,
}

impl SplitGaussDifferential {
    pub fn total_energy(&self) -> Vec<f64> {
        self.e1.iter().zip(&self.e2).map(|(x, y)| x + y).collect()
    }
}

/// `a` pulls back `omega_13 + omega_24` and `omega_23 - omega_14` along the
/// first factor, `b` pulls back `omega_13 - omega_24` and `omega_23 + omega_14`
/// along the second.
pub fn split_differential(f: &SecondFormField2D) -> SplitGaussDifferential {
    let n = f.domain.len();
    let [p11, p12, p22] = &f.h3;
    let [q11, q12, q22] = &f.h4;
    let mut a: [Vec<f64>; 4] = std::array::from_fn(|_| Vec::with_capacity(n));
    let mut b: [Vec<f64>; 4] = std::array::from_fn(|_| Vec::with_capacity(n));
    let mut e1 = Vec::with_capacity(n);
    let mut e2 = Vec::with_capacity(n);
    for i in 0..n {
        let av = [p11[i] + q12[i], p12[i] + q22[i], q11[i] - p12[i], q12[i] - p22[i]];
        let bv = [p11[i] - q12[i], p12[i] - q22[i], q11[i] + p12[i], q12[i] + p22[i]];
        for k in 0..4 {
            a[k].push(av[k]);
            b[k].push(bv[k]);
        }
        e1.push(0.5 * av.iter().map(|x| x * x).sum::<f64>());
        e2.push(0.5 * bv.iter().map(|x| x * x).sum::<f64>());
    }
    SplitGaussDifferential { a, b, e1, e2 }
}

fn row_divergence(d: &GridDomain, c: &[Vec<f64>; 4]) -> [Vec<f64>; 2] {
    let div = |x: &[f64], y: &[f64]| -> Vec<f64> {
        diff(d, x, 0).iter().zip(diff(d, y, 1)).map(|(u, v)| u + v).collect()
    };
    [div(&c[0], &c[1]), div(&c[2], &c[3])]
}

/// Harmonicity residuals of the first factor: the divergence of each row of
/// `a`, which expands to
/// `(h3_111 + h3_122 + h4_211 + h4_222, h4_111 + h4_122 - h3_211 - h3_222)`.
pub fn gamma1_harmonic_residual(f: &SecondFormField2D) -> [Vec<f64>; 2] {
    row_divergence(&f.domain, &split_differential(f).a)
}

/// Same for the second factor, with the cross terms sign-flipped.
pub fn gamma2_harmonic_residual(f: &SecondFormField2D) -> [Vec<f64>; 2] {
    row_divergence(&f.domain, &split_differential(f).b)
}

/// Map from the parallel residuals `(r1, r2, r3, r4)` to the harmonicity
/// residuals `(g1_1, g1_2, g2_1, g2_2)`.
pub fn equivalence_matrix() -> Matrix4<f64> {
    Matrix4::new(
        1.0, 0.0, 0.0, 1.0, //
        0.0, -1.0, 1.0, 0.0, //
        1.0, 0.0, 0.0, -1.0, //
        0.0, 1.0, 1.0, 0.0,
    )
}

#[derive(Clone, Debug, Serialize)]
pub struct EquivalenceReport {
    pub nodes: usize,
    pub tolerance: f64,
    /// Largest nodal gap between the harmonicity residuals and the matching
    /// combinations of the parallel residuals.
    pub max_discrepancy: f64,
    /// Largest gap when the parallel residuals are recovered from the
    /// harmonicity residuals by solving the 4x4 system.
    pub max_reconstruction_error: f64,
    pub determinant: f64,
    pub max_parallel_residual: f64,
    pub max_gamma1_residual: f64,
    pub max_gamma2_residual: f64,
    pub holds: bool,
}

/// Check node by node that both factors' harmonicity residuals are the
/// invertible combinations `(r1 + r4, r3 - r2)` and `(r1 - r4, r3 + r2)` of
/// the parallel residuals.
pub fn equivalence_check(f: &SecondFormField2D, tol: f64) -> EquivalenceReport {
    let r = parallel_h_residual(f);
    let g1 = gamma1_harmonic_residual(f);
    let g2 = gamma2_harmonic_residual(f);
    let m = equivalence_matrix();
    let determinant = m.determinant();
    let lu = m.lu();
    let mut max_discrepancy = 0.0f64;
    let mut max_reconstruction_error = 0.0f64;
    for i in 0..f.domain.len() {
        let rv = Vector4::new(r[0][i], r[1][i], r[2][i], r[3][i]);
        let gv = Vector4::new(g1[0][i], g1[1][i], g2[0][i], g2[1][i]);
        max_discrepancy = max_discrepancy.max((m * rv - gv).amax());
        if let Some(back) = lu.solve(&gv) {
            max_reconstruction_error = max_reconstruction_error.max((back - rv).amax());
        } else {
            max_reconstruction_error = f64::INFINITY;
        }
    }
    let max_parallel_residual = r.iter().map(|v| sup_abs(v)).fold(0.0, f64::max);
    let max_gamma1_residual = g1.iter().map(|v| sup_abs(v)).fold(0.0, f64::max);
    let max_gamma2_residual = g2.iter().map(|v| sup_abs(v)).fold(0.0, f64::max);
    EquivalenceReport {
        nodes: f.domain.len(),
        tolerance: tol,
        max_discrepancy,
        max_reconstruction_error,
        determinant,
        max_parallel_residual,
        max_gamma1_residual,
        max_gamma2_residual,
        holds: max_discrepancy <= tol && max_reconstruction_error <= tol && determinant.abs() > 0.5,
    }
}

/// `max_alpha max(|d2 h_11 - d1 h_12|, |d2 h_12 - d1 h_22|)` per node: the
/// failure of `h^alpha_ijk` to be symmetric in all three indices.
pub fn codazzi_defect(f: &SecondFormField2D) -> Vec<f64> {
    let d = &f.domain;
    let defect = |h: &[Vec<f64>; 3]| -> Vec<f64> {
        let a = diff(d, &h[0], 1);
        let b = diff(d, &h[1], 0);
        let c = diff(d, &h[1], 1);
        let e = diff(d, &h[2], 0);
        (0..d.len())
            .map(|i| (a[i] - b[i]).abs().max((c[i] - e[i]).abs()))
            .collect()
    };
    defect(&f.h3)
        .into_iter()
        .zip(defect(&f.h4))
        .map(|(x, y)| x.max(y))
        .collect()
}

#[derive(Clone, Debug)]
pub struct AdaptedFrame {
    /// The forms in the adapted frame.
    pub field: SecondFormField2D,
    /// Per-node rotation of `(e3, e4)` that makes `e3` parallel to `H`.
    pub normal_angle: Vec<f64>,
    /// Per-node rotation of `(e1, e2)`.
    pub tangent_angle: Vec<f64>,
    pub report: DiagonalizationReport,
}

#[derive(Clone, Debug, Serialize)]
pub struct DiagonalizationReport {
    /// Largest `|h^3_12|`, `|h^4_12|` after the normal rotation alone.
    pub off_diagonal_h3: f64,
    pub off_diagonal_h4: f64,
    /// Largest off-diagonal entry of either form after the tangent rotation.
    pub residual: f64,
    /// Largest `|H^4|` in the adapted frame (zero up to round-off).
    pub max_h4_trace: f64,
    pub max_parallel_residual: f64,
    pub max_codazzi_defect: f64,
}

fn rotate_form(h: [[f64; 2]; 2], phi: f64) -> [f64; 3] {
    // R^T h R with R the rotation by phi.
    let (s, c) = phi.sin_cos();
    let h11 = c * c * h[0][0] + 2.0 * s * c * h[0][1] + s * s * h[1][1];
    let h22 = s * s * h[0][0] - 2.0 * s * c * h[0][1] + c * c * h[1][1];
    let h12 = (c * c - s * s) * h[0][1] + s * c * (h[1][1] - h[0][0]);
    [h11, h12, h22]
}

/// Smallest rotation angle that diagonalizes a symmetric 2x2 form.
fn diagonalizing_angle(h: [[f64; 2]; 2]) -> f64 {
    if h[0][1] == 0.0 {
        return 0.0;
    }
    let quarter = std::f64::consts::FRAC_PI_4;
    let mut phi = 0.5 * (2.0 * h[0][1]).atan2(h[0][0] - h[1][1]);
    if phi > quarter {
        phi -= 2.0 * quarter;
    } else if phi <= -quarter {
        phi += 2.0 * quarter;
    }
    phi
}

fn anisotropy(h: [[f64; 2]; 2]) -> f64 {
    (0.5 * (h[0][0] - h[1][1])).hypot(h[0][1])
}

/// Rotate the normal frame so that `e3 = H / |H|`, then rotate the tangent
/// frame to diagonalize both forms at once. The tangent rotation is the one
/// that diagonalizes the more anisotropic form; the reported residual is the
/// off-diagonal left in the other.
pub fn adapted_frame(f: &SecondFormField2D, hvec: &MeanCurvatureVector2D) -> Result<AdaptedFrame> {
    let n = f.domain.len();
    for v in [&hvec.h3, &hvec.h4, &hvec.norm] {
        f.domain.check_field(v)?;
    }
    let fresh = MeanCurvatureVector2D::from_field(f);
    let mismatch = fresh
        .h3
        .iter()
        .zip(&hvec.h3)
        .chain(fresh.h4.iter().zip(&hvec.h4))
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    if mismatch > IDENTITY_TOL * fresh.norm.iter().copied().fold(1.0, f64::max) {
        return Err(Error::Domain(format!(
            "mean curvature vector does not match the field (gap {mismatch:e})"
        )));
    }
    let mut h3: [Vec<f64>; 3] = std::array::from_fn(|_| Vec::with_capacity(n));
    let mut h4: [Vec<f64>; 3] = std::array::from_fn(|_| Vec::with_capacity(n));
    let mut normal_angle = Vec::with_capacity(n);
    let mut tangent_angle = Vec::with_capacity(n);
    let mut off3 = 0.0f64;
    let mut off4 = 0.0f64;
    let mut residual = 0.0f64;
    for i in 0..n {
        if !(hvec.norm[i] > 0.0) {
            return Err(Error::DegenerateFrame { node: i });
        }
        let (c, s) = (hvec.h3[i] / hvec.norm[i], hvec.h4[i] / hvec.norm[i]);
        let p = f.form_at(3, i);
        let q = f.form_at(4, i);
        let mix = |x: f64, y: f64| -> [[f64; 2]; 2] {
            std::array::from_fn(|r| std::array::from_fn(|k| x * p[r][k] + y * q[r][k]))
        };
        let n3 = mix(c, s);
        let n4 = mix(-s, c);
        off3 = off3.max(n3[0][1].abs());
        off4 = off4.max(n4[0][1].abs());
        let phi = if anisotropy(n3) >= anisotropy(n4) {
            diagonalizing_angle(n3)
        } else {
            diagonalizing_angle(n4)
        };
        let r3 = rotate_form(n3, phi);
        let r4 = rotate_form(n4, phi);
        residual = residual.max(r3[1].abs()).max(r4[1].abs());
        for k in 0..3 {
            h3[k].push(r3[k]);
            h4[k].push(r4[k]);
        }
        normal_angle.push(s.atan2(c));
        tangent_angle.push(phi);
    }
    let field = SecondFormField2D::new(f.domain.clone(), h3, h4)?;
    let adapted_h = MeanCurvatureVector2D::from_field(&field);
    let max_parallel_residual = parallel_h_residual(f)
        .iter()
        .map(|v| sup_abs(v))
        .fold(0.0, f64::max);
    Ok(AdaptedFrame {
        report: DiagonalizationReport {
            off_diagonal_h3: off3,
            off_diagonal_h4: off4,
            residual,
            max_h4_trace: sup_abs(&adapted_h.h4),
            max_parallel_residual,
            max_codazzi_defect: sup_abs(&codazzi_defect(f)),
        },
        field,
        normal_angle,
        tangent_angle,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct Codim2Suite {
    pub seed: u64,
    pub fields: usize,
    pub nodes_per_axis: usize,
    pub tolerance: f64,
    pub determinant: f64,
    pub max_discrepancy: f64,
    pub max_reconstruction_error: f64,
    /// Parallel residual of stress-function fields, zero up to round-off.
    pub potential_max_residual: f64,
    /// `max(tolerance, 64 eps sup|psi| / h^3)`: third differences of the
    /// potential amplify its rounding by `h^-3`.
    pub potential_tolerance: f64,
    /// `max |e1 - e2|` over adapted diagonal fields (exactly zero expected).
    pub adapted_energy_gap: f64,
    /// The adapted `a` block reads `(h3_11, h4_22, h4_11, -h3_22)` exactly.
    pub adapted_block_matches: bool,
    pub reports: Vec<EquivalenceReport>,
    pub pass: bool,
}

/// Seeded suite on `[-1, 1]^2`: the equivalence check on `fields` random
/// smooth fields, a stress-function field, and adapted diagonal fields.
pub fn equivalence_suite(seed: u64, fields: usize, nodes: usize, tol: f64) -> Result<Codim2Suite> {
    let domain = GridDomain::centered_cube(2, 1.0, nodes)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut reports = Vec::with_capacity(fields);
    for _ in 0..fields {
        let f = SecondFormField2D::random_smooth(domain.clone(), rng.gen())?;
        reports.push(equivalence_check(&f, tol));
    }

    let base = SecondFormField2D::random_smooth(domain.clone(), rng.gen())?;
    let psi3 = base.h3[0].clone();
    let psi4 = base.h4[0].clone();
    let stress = SecondFormField2D::from_potentials(domain.clone(), &psi3, &psi4)?;
    let potential_max_residual = parallel_h_residual(&stress)
        .iter()
        .map(|v| sup_abs(v))
        .fold(0.0, f64::max);

    let psi_sup = sup_abs(&psi3).max(sup_abs(&psi4));
    let potential_tolerance = tol.max(64.0 * f64::EPSILON * psi_sup / domain.spacing().powi(3));

    let zero = vec![0.0; domain.len()];
    let diag = SecondFormField2D::new(
        domain.clone(),
        [base.h3[0].clone(), zero.clone(), base.h3[2].clone()],
        [base.h4[0].clone(), zero, base.h4[2].clone()],
    )?;
    let split = split_differential(&diag);
    let adapted_energy_gap = split
        .e1
        .iter()
        .zip(&split.e2)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let adapted_block_matches = (0..domain.len()).all(|i| {
        split.a[0][i] == diag.h3[0][i]
            && split.a[1][i] == diag.h4[2][i]
            && split.a[2][i] == diag.h4[0][i]
            && split.a[3][i] == -diag.h3[2][i]
    });

    let max_discrepancy = reports.iter().map(|r| r.max_discrepancy).fold(0.0, f64::max);
    let max_reconstruction_error = reports
        .iter()
        .map(|r| r.max_reconstruction_error)
        .fold(0.0, f64::max);
    let pass = reports.iter().all(|r| r.holds)
        && potential_max_residual <= potential_tolerance
        && adapted_energy_gap == 0.0
        && adapted_block_matches;
    Ok(Codim2Suite {
        seed,
        fields,
        nodes_per_axis: nodes,
        tolerance: tol,
        determinant: equivalence_matrix().determinant(),
        max_discrepancy,
        max_reconstruction_error,
        potential_max_residual,
        potential_tolerance,
        adapted_energy_gap,
        adapted_block_matches,
        reports,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> GridDomain {
        GridDomain::centered_cube(2, 1.0, n).unwrap()
    }

    fn constant(v: [f64; 6]) -> SecondFormField2D {
        SecondFormField2D::from_fn(grid(9), |_| v).unwrap()
    }

    #[test]
    fn constant_fields_are_parallel() {
        let f = constant([0.3, -1.2, 2.0, 0.7, 0.1, -0.4]);
        for r in parallel_h_residual(&f) {
            assert!(r.iter().all(|&x| x == 0.0));
        }
        for r in gamma1_harmonic_residual(&f).iter().chain(&gamma2_harmonic_residual(&f)) {
            assert!(r.iter().all(|&x| x == 0.0));
        }
    }

    #[test]
    fn linear_channels() {
        let f = SecondFormField2D::from_fn(grid(9), |x| [x[1], 0.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        for r in parallel_h_residual(&f) {
            assert!(r.iter().all(|&x| x.abs() < 1e-14));
        }
        let f = SecondFormField2D::from_fn(grid(9), |x| [x[0], 0.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        let r = parallel_h_residual(&f);
        assert!(r[0].iter().all(|&x| (x - 1.0).abs() < 1e-13));
        assert!(r[1..].iter().all(|c| c.iter().all(|&x| x.abs() < 1e-14)));
    }

    #[test]
    fn determinant_is_four_in_magnitude() {
        assert!((equivalence_matrix().determinant().abs() - 4.0).abs() < 1e-14);
    }

    #[test]
    fn zero_field_has_zero_energy() {
        let s = split_differential(&constant([0.0; 6]));
        assert!(s.e1.iter().chain(&s.e2).all(|&e| e == 0.0));
        assert!(s.a.iter().chain(&s.b).all(|c| c.iter().all(|&x| x == 0.0)));
    }

    #[test]
    fn adapted_block() {
        let (l, mu, rho, sigma) = (1.5, -0.5, 0.75, -0.25);
        let s = split_differential(&constant([l, 0.0, mu, rho, 0.0, sigma]));
        assert_eq!([s.a[0][0], s.a[1][0], s.a[2][0], s.a[3][0]], [l, sigma, rho, -mu]);
        let e = 0.5 * (l * l + mu * mu + rho * rho + sigma * sigma);
        assert_eq!(s.e1[0], e);
        assert_eq!(s.e2[0], e);
    }

    #[test]
    fn rotation_round_trip() {
        let h = [[0.4, -0.3], [-0.3, 1.1]];
        let phi = diagonalizing_angle(h);
        let r = rotate_form(h, phi);
        assert!(r[1].abs() < 1e-15);
        let back = rotate_form([[r[0], 0.0], [0.0, r[2]]], -phi);
        assert!((back[0] - 0.4).abs() < 1e-14 && (back[1] + 0.3).abs() < 1e-14);
    }

    #[test]
    fn degenerate_frame_names_node() {
        let f = SecondFormField2D::from_fn(grid(5), |x| {
            [x[0], 0.0, x[0], 0.0, 0.0, 0.0]
        })
        .unwrap();
        let hv = MeanCurvatureVector2D::from_field(&f);
        match adapted_frame(&f, &hv) {
            Err(Error::DegenerateFrame { node }) => assert_eq!(f.domain().coords(node)[0], 0.0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn suite_with_seed_7() {
        for n in [17, 33, 65] {
            let s = equivalence_suite(7, 20, n, IDENTITY_TOL).unwrap();
            assert!(s.pass, "n = {n}: {:e} {:e}", s.max_discrepancy, s.potential_max_residual);
        }
    }

    #[test]
    fn channel_lookup() {
        let f = constant([1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        assert_eq!(f.channel("h4_12").unwrap()[0], 5.0);
        assert!(f.channel("h5_11").is_none());
        assert!(f.normal_connection().iter().all(|&w| w == 0.0));
    }
}
