//! Nyström boundary-integral solver for the exterior Helmholtz problem.
//!
//! The scattered field is sought as a combined potential
//! `u^s = Dψ − iη Sψ` with `η = k`, which is uniquely solvable at every
//! wavenumber. Boundary traces give
//!
//! * sound-soft: `(½I + K − iηS) ψ = −u^i`
//! * sound-hard: `(T − iη(K′ − ½I)) ψ = −∂_ν u^i`
//! * impedance:  `(T − iη(K′ − ½I) + ikΛ(½I + K − iηS)) ψ = −(∂_ν u^i + ikλ u^i)`
//!
//! where `S, K, K′, T` are the single-layer, double-layer, adjoint
//! double-layer and hypersingular operators (no factor 2). Logarithmic
//! kernel singularities are split off and integrated with the
//! trigonometric-interpolation weights `R_j`; `T` is evaluated through
//! Maue's identity `Tψ = d/ds S(dψ/ds) + k² ν·S(νψ)` with spectral
//! differentiation along the parameter.

use crate::error::{Error, Result};
use crate::geometry::{BoundaryCurve, Direction, Vec2};
use crate::profile::ImpedanceProfile;
use crate::special::{hankel01, EULER_GAMMA};
use faer::linalg::solvers::Solve;
use faer::Mat;
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_4, PI, TAU};
use std::fmt;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum BoundaryCondition {
    Dirichlet,
    Neumann,
    Impedance { profile: ImpedanceProfile },
}

impl BoundaryCondition {
    pub fn impedance(profile: ImpedanceProfile) -> Self {
        BoundaryCondition::Impedance { profile }
    }

    /// λ at parameter `t`: ∞ for sound-soft, 0 for sound-hard.
    pub fn lambda_at(&self, t: f64) -> f64 {
        match self {
            BoundaryCondition::Dirichlet => f64::INFINITY,
            BoundaryCondition::Neumann => 0.0,
            BoundaryCondition::Impedance { profile } => profile.eval(t),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            BoundaryCondition::Dirichlet => "dirichlet",
            BoundaryCondition::Neumann => "neumann",
            BoundaryCondition::Impedance { .. } => "impedance",
        }
    }
}

impl TryFrom<crate::oracle::DiskCondition> for BoundaryCondition {
    type Error = Error;

    fn try_from(bc: crate::oracle::DiskCondition) -> Result<Self> {
        use crate::oracle::DiskCondition;
        Ok(match bc {
            DiskCondition::Dirichlet => BoundaryCondition::Dirichlet,
            DiskCondition::Neumann => BoundaryCondition::Neumann,
            DiskCondition::Impedance { lambda } => BoundaryCondition::impedance(ImpedanceProfile::constant(lambda)?),
        })
    }
}

impl fmt::Display for BoundaryCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundaryCondition::Impedance { profile } => write!(f, "impedance({profile})"),
            other => f.write_str(other.name()),
        }
    }
}

/// An obstacle: boundary curve plus boundary condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScattererSpec {
    pub curve: BoundaryCurve,
    pub bc: BoundaryCondition,
}

impl ScattererSpec {
    pub fn new(curve: BoundaryCurve, bc: BoundaryCondition) -> Result<Self> {
        if let BoundaryCondition::Impedance { profile } = &bc {
            let min = profile.min_value();
            if !(min > 0.0) {
                return Err(Error::NonpositiveProfile { t: f64::NAN, value: min });
            }
        }
        Ok(Self { curve, bc })
    }
}

/// Smallest admissible quadrature size: ten nodes per wavelength, at least 64, even.
pub fn required_nodes(curve: &BoundaryCurve, k: f64) -> usize {
    let per_wavelength = (10.0 * k * curve.length() / TAU).ceil() as usize;
    let n = per_wavelength.max(64);
    n + (n & 1)
}

#[derive(Debug, Clone)]
pub struct SolveRequest {
    pub spec: ScattererSpec,
    pub k: f64,
    pub incident: Vec<Direction>,
    pub observation: Vec<Direction>,
    pub nodes: usize,
}

impl SolveRequest {
    /// A request at the minimal admissible quadrature size.
    pub fn new(spec: ScattererSpec, k: f64, incident: Vec<Direction>, observation: Vec<Direction>) -> Self {
        let nodes = required_nodes(&spec.curve, k);
        Self { spec, k, incident, observation, nodes }
    }
}

/// Quadrature nodes on the curve, `t_j = −π + jπ/n`, `j = 0..2n`.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub params: Vec<f64>,
    pub points: Vec<Vec2>,
    pub d1: Vec<Vec2>,
    pub d2: Vec<Vec2>,
    pub speed: Vec<f64>,
    pub normals: Vec<Vec2>,
}

impl Discretization {
    pub fn new(curve: &BoundaryCurve, nodes: usize) -> Result<Self> {
        if nodes < 4 || nodes % 2 == 1 {
            return Err(Error::InvalidParameter(format!("quadrature size {nodes} must be even and ≥ 4")));
        }
        let mut d = Discretization {
            params: Vec::with_capacity(nodes),
            points: Vec::with_capacity(nodes),
            d1: Vec::with_capacity(nodes),
            d2: Vec::with_capacity(nodes),
            speed: Vec::with_capacity(nodes),
            normals: Vec::with_capacity(nodes),
        };
        for j in 0..nodes {
            let t = -PI + TAU * j as f64 / nodes as f64;
            let jet = curve.jet(t);
            let speed = jet.speed();
            if speed < 1e-12 {
                return Err(Error::SingularParametrization { t });
            }
            d.params.push(t);
            d.points.push(jet.point);
            d.d1.push(jet.d1);
            d.d2.push(jet.d2);
            d.speed.push(speed);
            d.normals.push(Vec2::new(jet.d1.y / speed, -jet.d1.x / speed));
        }
        Ok(d)
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    /// Trapezoid weight `π/n`.
    pub fn weight(&self) -> f64 {
        TAU / self.len() as f64
    }
}

/// Weights `R_m` integrating `ln(4 sin²((t−τ)/2)) f(τ)` exactly for
/// trigonometric polynomials of degree below `n`; entry `m` is for node offset `m`.
pub fn log_weights(nodes: usize) -> Vec<f64> {
    let n = nodes / 2;
    let nf = n as f64;
    (0..nodes)
        .map(|m| {
            let mut s = 0.0;
            for l in 1..n {
                s += (l as f64 * m as f64 * PI / nf).cos() / l as f64;
            }
            let parity = if m % 2 == 0 { 1.0 } else { -1.0 };
            -TAU / nf * s - PI / (nf * nf) * parity
        })
        .collect()
}

/// Which operators to assemble.
#[derive(Debug, Clone, Copy, Default)]
struct Needs {
    single: bool,
    double: bool,
    adjoint: bool,
    hypersingular: bool,
}

/// Dense Nyström matrices of the four boundary operators, mapping nodal
/// density values to nodal values of the (direct, principal-value) integral.
#[derive(Debug, Clone)]
pub struct OperatorBundle {
    pub single: Mat<Complex64>,
    pub double: Mat<Complex64>,
    pub adjoint: Mat<Complex64>,
    pub hypersingular: Mat<Complex64>,
}

struct Assembled {
    single: Option<Mat<Complex64>>,
    double: Option<Mat<Complex64>>,
    adjoint: Option<Mat<Complex64>>,
    hypersingular: Option<Mat<Complex64>>,
}

fn assemble(disc: &Discretization, k: f64, needs: Needs) -> Assembled {
    let n = disc.len();
    let w = disc.weight();
    let r = log_weights(n);
    let zero = || Mat::<Complex64>::zeros(n, n);
    let mut single = needs.single.then(zero);
    let mut double = needs.double.then(zero);
    let mut adjoint = needs.adjoint.then(zero);
    // Parametric single layer without the speed factor, and the k² ν·ν term.
    let mut bare = needs.hypersingular.then(zero);
    let mut normal_part = needs.hypersingular.then(zero);

    let quarter_i = Complex64::new(0.0, 0.25);
    let inv4pi = 1.0 / (4.0 * PI);
    for i in 0..n {
        let xi = disc.points[i];
        let speed_i = disc.speed[i];
        for j in 0..n {
            let rw = r[(i + n - j) % n];
            if i == j {
                let d1 = disc.d1[i];
                let d2 = disc.d2[i];
                let diag_log = Complex64::new(
                    -EULER_GAMMA / TAU - (0.5 * k * speed_i).ln() / TAU,
                    0.25,
                );
                let curv = (d2.x * d1.y - d2.y * d1.x) * inv4pi / (speed_i * speed_i);
                let m1 = -inv4pi;
                if let Some(s) = single.as_mut() {
                    s[(i, i)] = rw * m1 * speed_i + w * diag_log * speed_i;
                }
                if let Some(b) = bare.as_mut() {
                    b[(i, i)] = Complex64::from(rw * m1) + w * diag_log;
                }
                if let Some(p) = normal_part.as_mut() {
                    p[(i, i)] = k * k * (rw * m1 * speed_i + w * diag_log * speed_i);
                }
                if let Some(d) = double.as_mut() {
                    d[(i, i)] = Complex64::from(w * curv);
                }
                if let Some(a) = adjoint.as_mut() {
                    a[(i, i)] = Complex64::from(w * curv);
                }
                continue;
            }
            let xj = disc.points[j];
            let diff = xi - xj;
            let dist = diff.norm();
            let (h0, h1) = hankel01(k * dist);
            let half_angle = 0.5 * (disc.params[i] - disc.params[j]);
            let log_term = (4.0 * half_angle.sin().powi(2)).ln();
            let speed_j = disc.speed[j];

            // Single layer, per unit parameter length.
            let m = quarter_i * h0;
            let m1 = -inv4pi * h0.re;
            let m2 = m - m1 * log_term;
            let sij = rw * m1 + w * m2;
            if let Some(s) = single.as_mut() {
                s[(i, j)] = sij * speed_j;
            }
            if let Some(b) = bare.as_mut() {
                b[(i, j)] = sij;
            }
            if let Some(p) = normal_part.as_mut() {
                let nn = disc.normals[i].dot(disc.normals[j]);
                p[(i, j)] = k * k * nn * speed_j * sij;
            }
            if let Some(d) = double.as_mut() {
                let num = diff.x * disc.d1[j].y - diff.y * disc.d1[j].x;
                let l = quarter_i * k * h1 * (num / dist);
                let l1 = -k * inv4pi * h1.re * num / dist;
                d[(i, j)] = rw * l1 + w * (l - l1 * log_term);
            }
            if let Some(a) = adjoint.as_mut() {
                let num = (diff.x * disc.d1[i].y - diff.y * disc.d1[i].x) * speed_j / speed_i;
                let l = -quarter_i * k * h1 * (num / dist);
                let l1 = k * inv4pi * h1.re * num / dist;
                a[(i, j)] = rw * l1 + w * (l - l1 * log_term);
            }
        }
    }

    let hypersingular = needs.hypersingular.then(|| {
        let mut bare = bare.expect("assembled");
        // bare ← D · bare · D, with D the spectral differentiation matrix.
        differentiate_rows(&mut bare, true);
        differentiate_columns(&mut bare);
        let mut t = normal_part.expect("assembled");
        for i in 0..n {
            let inv = 1.0 / disc.speed[i];
            for j in 0..n {
                t[(i, j)] += bare[(i, j)] * inv;
            }
        }
        t
    });
    Assembled { single, double, adjoint, hypersingular }
}

/// Trigonometric-interpolation derivative of periodic nodal data, in place.
fn spectral_derivative(planner: &mut FftPlanner<f64>, data: &mut [Complex64]) {
    let n = data.len();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    fwd.process(data);
    // Nodes start at −π rather than 0; a shift does not change the derivative.
    let scale = 1.0 / n as f64;
    for (m, c) in data.iter_mut().enumerate() {
        let freq = if m < n / 2 {
            m as f64
        } else if m == n / 2 {
            0.0
        } else {
            m as f64 - n as f64
        };
        *c *= Complex64::new(0.0, freq * scale);
    }
    inv.process(data);
}

/// Right-multiplication by `D` (rows are transformed with `Dᵀ = −D`).
fn differentiate_rows(mat: &mut Mat<Complex64>, right: bool) {
    let n = mat.nrows();
    let mut planner = FftPlanner::new();
    let mut buf = vec![Complex64::default(); mat.ncols()];
    for i in 0..n {
        for (j, b) in buf.iter_mut().enumerate() {
            *b = mat[(i, j)];
        }
        spectral_derivative(&mut planner, &mut buf);
        let sign = if right { -1.0 } else { 1.0 };
        for (j, b) in buf.iter().enumerate() {
            mat[(i, j)] = *b * sign;
        }
    }
}

/// Left-multiplication by `D`.
fn differentiate_columns(mat: &mut Mat<Complex64>) {
    let mut planner = FftPlanner::new();
    let mut buf = vec![Complex64::default(); mat.nrows()];
    for j in 0..mat.ncols() {
        for (i, b) in buf.iter_mut().enumerate() {
            *b = mat[(i, j)];
        }
        spectral_derivative(&mut planner, &mut buf);
        for (i, b) in buf.iter().enumerate() {
            mat[(i, j)] = *b;
        }
    }
}

/// `boundary_operators`: all four operator matrices on `nodes` nodes.
pub fn boundary_operators(curve: &BoundaryCurve, k: f64, nodes: usize) -> Result<OperatorBundle> {
    check_wavenumber(k)?;
    let required = required_nodes(curve, k);
    if nodes < required {
        return Err(Error::QuadratureTooCoarse { required, given: nodes });
    }
    let disc = Discretization::new(curve, nodes)?;
    let a = assemble(&disc, k, Needs { single: true, double: true, adjoint: true, hypersingular: true });
    Ok(OperatorBundle {
        single: a.single.expect("assembled"),
        double: a.double.expect("assembled"),
        adjoint: a.adjoint.expect("assembled"),
        hypersingular: a.hypersingular.expect("assembled"),
    })
}

fn check_wavenumber(k: f64) -> Result<()> {
    if !(k > 0.0) || !k.is_finite() {
        return Err(Error::InvalidParameter(format!("wavenumber {k} must be positive")));
    }
    Ok(())
}

/// A factorized system for one scatterer at one wavenumber, reusable for any
/// number of incident directions.
pub struct FactorizedScatterer {
    disc: Discretization,
    k: f64,
    eta: f64,
    lambda: Vec<f64>,
    bc_kind: BcKind,
    lu: faer::linalg::solvers::PartialPivLu<Complex64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum BcKind {
    Dirichlet,
    Neumann,
    Impedance,
}

impl FactorizedScatterer {
    pub fn new(spec: &ScattererSpec, k: f64, nodes: usize) -> Result<Self> {
        check_wavenumber(k)?;
        let required = required_nodes(&spec.curve, k);
        if nodes < required {
            return Err(Error::QuadratureTooCoarse { required, given: nodes });
        }
        Self::new_unchecked(spec, k, nodes)
    }

    /// Skips the nodes-per-wavelength floor; for convergence studies.
    pub fn new_unchecked(spec: &ScattererSpec, k: f64, nodes: usize) -> Result<Self> {
        check_wavenumber(k)?;
        let disc = Discretization::new(&spec.curve, nodes)?;
        let n = disc.len();
        let eta = k;
        let ie = Complex64::new(0.0, eta);
        let (bc_kind, lambda) = match &spec.bc {
            BoundaryCondition::Dirichlet => (BcKind::Dirichlet, vec![f64::INFINITY; n]),
            BoundaryCondition::Neumann => (BcKind::Neumann, vec![0.0; n]),
            BoundaryCondition::Impedance { profile } => {
                (BcKind::Impedance, disc.params.iter().map(|&t| profile.eval(t)).collect())
            }
        };
        let needs = match bc_kind {
            BcKind::Dirichlet => Needs { single: true, double: true, ..Default::default() },
            BcKind::Neumann => Needs { adjoint: true, hypersingular: true, ..Default::default() },
            BcKind::Impedance => Needs { single: true, double: true, adjoint: true, hypersingular: true },
        };
        let ops = assemble(&disc, k, needs);
        let system = match bc_kind {
            BcKind::Dirichlet => {
                let s = ops.single.expect("assembled");
                let mut a = ops.double.expect("assembled");
                for i in 0..n {
                    for j in 0..n {
                        a[(i, j)] -= ie * s[(i, j)];
                    }
                    a[(i, i)] += 0.5;
                }
                a
            }
            BcKind::Neumann | BcKind::Impedance => {
                let mut a = ops.hypersingular.expect("assembled");
                let kp = ops.adjoint.expect("assembled");
                for i in 0..n {
                    for j in 0..n {
                        a[(i, j)] -= ie * kp[(i, j)];
                    }
                    a[(i, i)] += 0.5 * ie;
                }
                if bc_kind == BcKind::Impedance {
                    let s = ops.single.expect("assembled");
                    let d = ops.double.expect("assembled");
                    for i in 0..n {
                        let ikl = Complex64::new(0.0, k * lambda[i]);
                        for j in 0..n {
                            a[(i, j)] += ikl * (d[(i, j)] - ie * s[(i, j)]);
                        }
                        a[(i, i)] += 0.5 * ikl;
                    }
                }
                a
            }
        };
        let lu = system.partial_piv_lu();
        let u = lu.U();
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for i in 0..n {
            let d = u[(i, i)].norm();
            lo = lo.min(d);
            hi = hi.max(d);
        }
        if !(lo > 1e-14 * hi) {
            return Err(Error::SolverBreakdown(format!(
                "pivot ratio {:e} at k = {k}",
                lo / hi
            )));
        }
        Ok(Self { disc, k, eta, lambda, bc_kind, lu })
    }

    pub fn discretization(&self) -> &Discretization {
        &self.disc
    }

    pub fn wavenumber(&self) -> f64 {
        self.k
    }

    /// Boundary densities for each incident direction (one column each).
    pub fn densities(&self, incident: &[Direction]) -> Result<Mat<Complex64>> {
        let n = self.disc.len();
        let k = self.k;
        let rhs = Mat::<Complex64>::from_fn(n, incident.len(), |i, c| {
            let theta = incident[c];
            let x = self.disc.points[i];
            let ui = Complex64::from_polar(1.0, k * theta.dot(x));
            let dn = Complex64::new(0.0, k * theta.dot(self.disc.normals[i])) * ui;
            match self.bc_kind {
                BcKind::Dirichlet => -ui,
                BcKind::Neumann => -dn,
                BcKind::Impedance => -(dn + Complex64::new(0.0, k * self.lambda[i]) * ui),
            }
        });
        let sol = self.lu.solve(&rhs);
        for c in 0..sol.ncols() {
            for i in 0..n {
                if !sol[(i, c)].re.is_finite() || !sol[(i, c)].im.is_finite() {
                    return Err(Error::SolverBreakdown(format!("non-finite density at k = {k}")));
                }
            }
        }
        Ok(sol)
    }

    /// Far field of the density in column `col` at observation `xhat`.
    pub fn far_field_of(&self, density: &Mat<Complex64>, col: usize, xhat: Direction) -> Complex64 {
        let k = self.k;
        let gamma = Complex64::from_polar(1.0, -FRAC_PI_4) / (8.0 * PI * k).sqrt();
        let mut sum = Complex64::default();
        for i in 0..self.disc.len() {
            let y = self.disc.points[i];
            let weight = (k * xhat.dot(self.disc.normals[i]) + self.eta) * self.disc.speed[i];
            sum += Complex64::from_polar(weight, -k * xhat.dot(y)) * density[(i, col)];
        }
        gamma * sum * self.disc.weight()
    }

    /// Far-field matrix: rows observation directions, columns incident directions.
    pub fn far_field_matrix(&self, incident: &[Direction], observation: &[Direction]) -> Result<Mat<Complex64>> {
        let dens = self.densities(incident)?;
        Ok(Mat::from_fn(observation.len(), incident.len(), |r, c| {
            self.far_field_of(&dens, c, observation[r])
        }))
    }
}

/// `solve_far_field`: rows are observation directions, columns incident directions.
pub fn solve_far_field(req: &SolveRequest) -> Result<Mat<Complex64>> {
    let fact = FactorizedScatterer::new(&req.spec, req.k, req.nodes)?;
    fact.far_field_matrix(&req.incident, &req.observation)
}

/// Physical-optics (Kirchhoff) backscatter approximation for the pair `(x̂, −x̂)`.
///
/// Integrates `(λ − ν·x̂)/(λ + ν·x̂) · (−2ik x̂·ν) e^{−2ik x̂·y}` over the lit part
/// of the boundary, scaled by `C₂ k^{−1/2}/2`, `C₂ = −e^{iπ/4}/√(2π)`.
pub fn po_far_field(spec: &ScattererSpec, xhat: Direction, k: f64) -> Result<Complex64> {
    check_wavenumber(k)?;
    let nodes = (required_nodes(&spec.curve, 2.0 * k) * 4).max(1024);
    let disc = Discretization::new(&spec.curve, nodes)?;
    let mut sum = Complex64::default();
    for i in 0..disc.len() {
        let nu = disc.normals[i];
        let c = xhat.dot(nu);
        // Lit by incidence −x̂ where ν·(−x̂) < 0.
        if c <= 0.0 {
            continue;
        }
        let lambda = spec.bc.lambda_at(disc.params[i]);
        let reflection = if lambda.is_infinite() { 1.0 } else { (lambda - c) / (lambda + c) };
        let amp = Complex64::new(0.0, -2.0 * k * c) * reflection * disc.speed[i];
        sum += amp * Complex64::from_polar(1.0, -2.0 * k * xhat.dot(disc.points[i]));
    }
    Ok(c2() * (0.5 / k.sqrt()) * sum * disc.weight())
}

/// The two-dimensional constant `C₂ = −e^{iπ/4}/√(2π)`.
pub fn c2() -> Complex64 {
    -Complex64::from_polar(1.0, FRAC_PI_4) / TAU.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{disk_far_field, DiskCondition, DiskSpec};

    fn disk(a: f64) -> BoundaryCurve {
        BoundaryCurve::disk(a, Vec2::default()).unwrap()
    }

    #[test]
    fn log_weights_integrate_cosines() {
        // ∫ ln(4 sin²(τ/2)) cos(mτ) dτ = −2π/|m| (m ≠ 0), 0 for m = 0.
        let nodes = 32;
        let r = log_weights(nodes);
        for m in 0..15 {
            let approx: f64 = (0..nodes)
                .map(|j| r[j] * (m as f64 * TAU * j as f64 / nodes as f64).cos())
                .sum();
            let exact = if m == 0 { 0.0 } else { -TAU / m as f64 };
            assert!((approx - exact).abs() < 1e-12, "m={m}: {approx} vs {exact}");
        }
    }

    #[test]
    fn spectral_derivative_of_trig_polynomial() {
        let n = 16;
        let mut planner = FftPlanner::new();
        let mut v: Vec<Complex64> = (0..n)
            .map(|j| {
                let t = -PI + TAU * j as f64 / n as f64;
                Complex64::new((3.0 * t).sin() + (2.0 * t).cos(), 0.0)
            })
            .collect();
        spectral_derivative(&mut planner, &mut v);
        for (j, d) in v.iter().enumerate() {
            let t = -PI + TAU * j as f64 / n as f64;
            let exact = 3.0 * (3.0 * t).cos() - 2.0 * (2.0 * t).sin();
            assert!((d.re - exact).abs() < 1e-12 && d.im.abs() < 1e-12);
        }
    }

    #[test]
    fn node_floor() {
        assert_eq!(required_nodes(&disk(0.1), 1.0), 64);
        let n = required_nodes(&disk(1.5), 50.0);
        assert_eq!(n, 750);
        let spec = ScattererSpec::new(disk(1.5), BoundaryCondition::Dirichlet).unwrap();
        match FactorizedScatterer::new(&spec, 50.0, 374) {
            Err(Error::QuadratureTooCoarse { required, given }) => {
                assert_eq!((required, given), (750, 374));
            }
            other => panic!("{:?}", other.err()),
        }
    }

    #[test]
    fn single_layer_on_constant_density() {
        // On a circle, S·1 = (iπa/2) J_0(ka) H_0(ka).
        let a = 1.0;
        let k = 0.5;
        let ops = boundary_operators(&disk(a), k, 64).unwrap();
        let (h0, _) = hankel01(k * a);
        let exact = Complex64::new(0.0, PI * a / 2.0) * h0.re * h0;
        for i in 0..64 {
            let row: Complex64 = (0..64).map(|j| ops.single[(i, j)]).sum();
            assert!((row - exact).norm() < 1e-8, "{row} vs {exact}");
        }
    }

    #[test]
    fn double_layer_and_adjoint_are_weighted_transposes() {
        let curve = BoundaryCurve::egg();
        let nodes = 96;
        let ops = boundary_operators(&curve, 3.0, nodes).unwrap();
        let disc = Discretization::new(&curve, nodes).unwrap();
        // K′_ij |x′_i| = K_ji |x′_j| for the kernel parts.
        let mut worst: f64 = 0.0;
        for i in 0..nodes {
            for j in 0..nodes {
                let lhs = ops.adjoint[(i, j)] * disc.speed[i];
                let rhs = ops.double[(j, i)] * disc.speed[j];
                worst = worst.max((lhs - rhs).norm());
            }
        }
        assert!(worst < 1e-10, "{worst}");
    }

    #[test]
    fn calderon_identity_on_smooth_densities() {
        let curve = disk(1.0);
        let nodes = 256;
        let ops = boundary_operators(&curve, 2.0, nodes).unwrap();
        let ts = mat_mul(&ops.hypersingular, &ops.single);
        let kk = mat_mul(&ops.adjoint, &ops.adjoint);
        for m in 0..6 {
            let psi: Vec<Complex64> = (0..nodes)
                .map(|j| Complex64::from_polar(1.0, m as f64 * (-PI + TAU * j as f64 / nodes as f64)))
                .collect();
            for i in 0..nodes {
                let lhs: Complex64 = (0..nodes).map(|j| ts[(i, j)] * psi[j]).sum();
                let rhs: Complex64 = (0..nodes).map(|j| kk[(i, j)] * psi[j]).sum::<Complex64>() - 0.25 * psi[i];
                assert!((lhs - rhs).norm() < 1e-6, "m={m} i={i}: {lhs} vs {rhs}");
            }
        }
    }

    fn mat_mul(a: &Mat<Complex64>, b: &Mat<Complex64>) -> Mat<Complex64> {
        a * b
    }

    #[test]
    fn matches_oracle_on_disk() {
        for (bc, dbc) in [
            (BoundaryCondition::Dirichlet, DiskCondition::Dirichlet),
            (BoundaryCondition::Neumann, DiskCondition::Neumann),
            (
                BoundaryCondition::impedance(ImpedanceProfile::constant(2.0).unwrap()),
                DiskCondition::Impedance { lambda: 2.0 },
            ),
        ] {
            let spec = ScattererSpec::new(disk(1.5), bc).unwrap();
            let oracle = DiskSpec::centered(1.5, dbc).unwrap();
            let k = 5.0;
            let inc = vec![Direction::from_angle(0.3), Direction::from_angle(-2.0)];
            let obs = vec![Direction::from_angle(1.0), Direction::from_angle(3.0)];
            let ff = solve_far_field(&SolveRequest::new(spec, k, inc.clone(), obs.clone())).unwrap();
            for (r, &x) in obs.iter().enumerate() {
                for (c, &t) in inc.iter().enumerate() {
                    let exact = disk_far_field(&oracle, x, t, k).unwrap();
                    let got = ff[(r, c)];
                    assert!((got - exact).norm() < 1e-6 * exact.norm(), "{dbc:?}: {got} vs {exact}");
                }
            }
        }
    }

    #[test]
    fn physical_optics_limits() {
        let x = Direction::from_angle(0.0);
        let soft = ScattererSpec::new(disk(1.5), BoundaryCondition::Dirichlet).unwrap();
        let hard = ScattererSpec::new(disk(1.5), BoundaryCondition::Neumann).unwrap();
        let huge = ScattererSpec::new(
            disk(1.5),
            BoundaryCondition::impedance(ImpedanceProfile::constant(1e12).unwrap()),
        )
        .unwrap();
        let a = po_far_field(&soft, x, 50.0).unwrap();
        let b = po_far_field(&hard, x, 50.0).unwrap();
        let c = po_far_field(&huge, x, 50.0).unwrap();
        assert!((a + b).norm() < 1e-12 * a.norm());
        assert!((a - c).norm() < 1e-9 * a.norm());
    }

    fn egg_spec(bc: BoundaryCondition) -> ScattererSpec {
        ScattererSpec::new(BoundaryCurve::egg(), bc).unwrap()
    }

    fn three_conditions() -> Vec<BoundaryCondition> {
        vec![
            BoundaryCondition::Dirichlet,
            BoundaryCondition::Neumann,
            BoundaryCondition::impedance(crate::profile::parse_profile("2+0.5*sin(t)+0.2*sin(5*t)").unwrap()),
        ]
    }

    #[test]
    fn reference_table_through_the_solver() {
        use crate::oracle::{reference_table, TABLE_RADIUS};
        for cell in reference_table() {
            let bc = match cell.bc {
                DiskCondition::Dirichlet => BoundaryCondition::Dirichlet,
                DiskCondition::Neumann => BoundaryCondition::Neumann,
                DiskCondition::Impedance { lambda } => {
                    BoundaryCondition::impedance(ImpedanceProfile::constant(lambda).unwrap())
                }
            };
            let spec = ScattererSpec::new(disk(TABLE_RADIUS), bc).unwrap();
            let (x, t) = cell.directions();
            let v = solve_far_field(&SolveRequest::new(spec, cell.k, vec![t], vec![x])).unwrap()[(0, 0)];
            assert!(
                (v.re - cell.value.re).abs() < 2e-3 && (v.im - cell.value.im).abs() < 2e-3,
                "{}: {v}",
                cell.label()
            );
        }
    }

    #[test]
    fn reciprocity_on_the_egg() {
        let dirs: Vec<Direction> = [0.3, 1.9, -2.4, 2.8].iter().map(|&a| Direction::from_angle(a)).collect();
        let neg: Vec<Direction> = dirs.iter().map(|&d| -d).collect();
        for bc in three_conditions() {
            for k in [5.0, 20.0] {
                let fact = FactorizedScatterer::new(&egg_spec(bc.clone()), k, required_nodes(&BoundaryCurve::egg(), k)).unwrap();
                // ff[(r, c)] = u∞(dirs[r], dirs[c]); rf[(r, c)] = u∞(−dirs[r], −dirs[c]).
                let ff = fact.far_field_matrix(&dirs, &dirs).unwrap();
                let rf = fact.far_field_matrix(&neg, &neg).unwrap();
                for r in 0..dirs.len() {
                    for c in 0..dirs.len() {
                        let a = ff[(r, c)];
                        let b = rf[(c, r)];
                        assert!((a - b).norm() < 1e-6 * a.norm().max(1.0), "{bc} k={k}: {a} vs {b}");
                    }
                }
            }
        }
    }

    #[test]
    fn doubling_nodes_changes_little() {
        let x = vec![Direction::from_angle(0.7)];
        let t = vec![Direction::from_angle(-1.1)];
        for bc in three_conditions() {
            let spec = egg_spec(bc.clone());
            let k = 10.0;
            let n = required_nodes(&spec.curve, k);
            let a = FactorizedScatterer::new(&spec, k, n).unwrap().far_field_matrix(&t, &x).unwrap()[(0, 0)];
            let b = FactorizedScatterer::new(&spec, k, 2 * n).unwrap().far_field_matrix(&t, &x).unwrap()[(0, 0)];
            assert!((a - b).norm() < 1e-6 * b.norm(), "{bc}: {a} vs {b}");
        }
    }

    #[test]
    fn impedance_far_field_energy_is_positive() {
        let obs: Vec<Direction> = (0..360).map(|i| Direction::from_angle(TAU * i as f64 / 360.0)).collect();
        for lambda in ["0.5", "2+0.5*sin(t)+0.2*sin(5*t)"] {
            let bc = BoundaryCondition::impedance(crate::profile::parse_profile(lambda).unwrap());
            let k = 4.0;
            let ff = solve_far_field(&SolveRequest::new(egg_spec(bc), k, vec![Direction::from_angle(0.4)], obs.clone()))
                .unwrap();
            let energy: f64 = (0..360).map(|r| ff[(r, 0)].norm_sqr()).sum::<f64>() * TAU / 360.0;
            assert!(k * energy > 0.0);
        }
    }

    #[test]
    fn translation_keeps_modulus() {
        use crate::geometry::TrigSeries;
        let shifted = BoundaryCurve::trigonometric(
            TrigSeries { cos: vec![-0.65 + 0.4, 1.0, 0.65], sin: vec![] },
            TrigSeries { cos: vec![-0.3], sin: vec![0.0, 1.5] },
        )
        .unwrap();
        let x = vec![Direction::from_angle(2.2), Direction::from_angle(-0.5)];
        let t = vec![Direction::from_angle(0.1)];
        for bc in three_conditions() {
            let a = solve_far_field(&SolveRequest::new(
                ScattererSpec::new(BoundaryCurve::kite(), bc.clone()).unwrap(),
                8.0,
                t.clone(),
                x.clone(),
            ))
            .unwrap();
            let b = solve_far_field(&SolveRequest::new(ScattererSpec::new(shifted.clone(), bc.clone()).unwrap(), 8.0, t.clone(), x.clone()))
                .unwrap();
            for r in 0..2 {
                assert!((a[(r, 0)].norm() - b[(r, 0)].norm()).abs() < 1e-6, "{bc}");
            }
        }
    }

    #[test]
    fn physical_optics_tracks_the_solver_at_high_frequency() {
        let x = Direction::from_angle(0.0);
        let spec = ScattererSpec::new(disk(1.5), BoundaryCondition::Dirichlet).unwrap();
        let po = po_far_field(&spec, x, 50.0).unwrap();
        let bie = solve_far_field(&SolveRequest::new(spec, 50.0, vec![-x], vec![x])).unwrap()[(0, 0)];
        assert!((po.norm() - bie.norm()).abs() < 0.1 * bie.norm(), "{po} vs {bie}");
        let hard = ScattererSpec::new(disk(1.5), BoundaryCondition::Neumann).unwrap();
        let po_hard = po_far_field(&hard, x, 50.0).unwrap();
        assert!((po_hard + po).norm() < 1e-12);
    }
}
