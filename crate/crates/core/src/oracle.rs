//! Closed-form far field of a disk by separation of variables.
//!
//! With the incident plane wave expanded in cylindrical modes, each outgoing
//! mode's coefficient is a ratio of Bessel and Hankel functions at `ka`.
//! The far-field normalization is `u^s ≈ e^{ikr}/√r · u^∞`, giving
//!
//! ```text
//! u^∞(x̂, θ) = √(2/(πk)) e^{−iπ/4} Σ_n c_n e^{in(ψ)},   ψ = ∠(x̂, θ)
//! ```
//!
//! with `c_n = −J_n/H_n` (sound-soft), `−J_n′/H_n′` (sound-hard), or
//! `−(J_n′ + iλJ_n)/(H_n′ + iλH_n)` (impedance `∂_ν u + ikλu = 0`). This
//! convention reproduces the published reference table to four decimals.

use crate::error::{Error, Result};
use crate::geometry::{Direction, Vec2};
use crate::special::bessel_jy_seq;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_4, PI};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum DiskCondition {
    Dirichlet,
    Neumann,
    Impedance { lambda: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiskSpec {
    pub radius: f64,
    pub center: Vec2,
    pub bc: DiskCondition,
}

impl DiskSpec {
    pub fn new(radius: f64, center: Vec2, bc: DiskCondition) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::InvalidParameter(format!("disk radius {radius} must be positive")));
        }
        if let DiskCondition::Impedance { lambda } = bc {
            if !(lambda > 0.0) || !lambda.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "impedance {lambda} must be a positive real"
                )));
            }
        }
        Ok(Self { radius, center, bc })
    }

    pub fn centered(radius: f64, bc: DiskCondition) -> Result<Self> {
        Self::new(radius, Vec2::default(), bc)
    }
}

/// Truncation order for the mode series at size parameter `ka`.
pub fn mode_count(ka: f64) -> usize {
    (ka + 8.0 * ka.cbrt() + 10.0).ceil() as usize
}

/// Mode coefficients `c_0 ..= c_n` (and `c_{−n} = c_n`).
pub fn mode_coefficients(spec: &DiskSpec, k: f64, order: usize) -> Vec<Complex64> {
    let ka = k * spec.radius;
    let (j, y) = bessel_jy_seq(order + 1, ka);
    let deriv = |f: &[f64], n: usize| if n == 0 { -f[1] } else { 0.5 * (f[n - 1] - f[n + 1]) };
    (0..=order)
        .map(|n| {
            let jn = j[n];
            let hn = Complex64::new(j[n], y[n]);
            let jd = deriv(&j, n);
            let hd = Complex64::new(jd, deriv(&y, n));
            match spec.bc {
                DiskCondition::Dirichlet => -jn / hn,
                DiskCondition::Neumann => -jd / hd,
                DiskCondition::Impedance { lambda } => {
                    let il = Complex64::new(0.0, lambda);
                    -(jd + il * jn) / (hd + il * hn)
                }
            }
        })
        .collect()
}

pub fn far_field_prefactor(k: f64) -> Complex64 {
    (2.0 / (PI * k)).sqrt() * Complex64::from_polar(1.0, -FRAC_PI_4)
}

/// Far-field pattern of the disk for observation `xhat`, incidence `theta`.
pub fn disk_far_field(spec: &DiskSpec, xhat: Direction, theta: Direction, k: f64) -> Result<Complex64> {
    disk_far_field_with_order(spec, xhat, theta, k, mode_count(k * spec.radius))
}

pub fn disk_far_field_with_order(
    spec: &DiskSpec,
    xhat: Direction,
    theta: Direction,
    k: f64,
    order: usize,
) -> Result<Complex64> {
    if !(k > 0.0) || !k.is_finite() {
        return Err(Error::InvalidParameter(format!("wavenumber {k} must be positive")));
    }
    let coeffs = mode_coefficients(spec, k, order + 2);
    let residual = 2.0 * (coeffs[order + 1].norm() + coeffs[order + 2].norm());
    if residual > 1e-12 {
        return Err(Error::Truncation { residual });
    }
    let psi = xhat.angle() - theta.angle();
    let mut sum = coeffs[0];
    for (n, c) in coeffs.iter().enumerate().take(order + 1).skip(1) {
        sum += *c * (2.0 * (n as f64 * psi).cos());
    }
    let shift = (theta.vec() - xhat.vec()).dot(spec.center);
    Ok(far_field_prefactor(k) * sum * Complex64::from_polar(1.0, k * shift))
}

/// One cell of the published disk reference table (radius 1.5, d = (1, 0)).
#[derive(Debug, Clone, Copy)]
pub struct TableCell {
    pub bc: DiskCondition,
    pub backscatter: bool,
    pub k: f64,
    pub value: Complex64,
}

impl TableCell {
    /// Observation/incidence pair: forward `(d, d)` or backscatter `(−d, d)`.
    pub fn directions(&self) -> (Direction, Direction) {
        let d = Direction::from_angle(0.0);
        if self.backscatter {
            (-d, d)
        } else {
            (d, d)
        }
    }

    pub fn label(&self) -> String {
        let bc = match self.bc {
            DiskCondition::Dirichlet => "dirichlet".to_string(),
            DiskCondition::Neumann => "neumann".to_string(),
            DiskCondition::Impedance { lambda } => format!("impedance({lambda})"),
        };
        let pair = if self.backscatter { "(d,-d)" } else { "(d,d)" };
        format!("{bc} u({pair},{})", self.k)
    }
}

pub const TABLE_RADIUS: f64 = 1.5;

/// Reference values for the radius-1.5 disk: four boundary conditions ×
/// {forward, backscatter} × k ∈ {20, 50}.
pub fn reference_table() -> Vec<TableCell> {
    let c = Complex64::new;
    let rows = [
        (DiskCondition::Neumann, [c(-3.3288, 3.8856), c(-0.8189, 0.2814), c(-5.5900, 6.0797), c(0.6111, 0.6135)]),
        (
            DiskCondition::Impedance { lambda: 0.06 },
            [c(-3.5254, 3.9288), c(-0.7255, 0.2493), c(-5.8112, 6.1183), c(0.5418, 0.5442)],
        ),
        (
            DiskCondition::Impedance { lambda: 12.06 },
            [c(-4.3081, 3.6514), c(0.7007, -0.2172), c(-6.4356, 5.8676), c(-0.5109, -0.5262)],
        ),
        (DiskCondition::Dirichlet, [c(-4.3184, 3.6405), c(0.8278, -0.2555), c(-6.4422, 5.8608), c(-0.6030, -0.6217)]),
    ];
    let mut cells = Vec::new();
    for (bc, values) in rows {
        for (i, value) in values.into_iter().enumerate() {
            cells.push(TableCell {
                bc,
                backscatter: i % 2 == 1,
                k: if i < 2 { 20.0 } else { 50.0 },
                value,
            });
        }
    }
    cells
}
