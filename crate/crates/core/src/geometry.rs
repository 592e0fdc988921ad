//! Parametric boundary curves and the differential geometry the inversion
//! relies on: outward normals, signed curvature, Gauss-map inversion, and the
//! reflecting-plane constructions.
//!
//! Every curve is 2π-periodic in `t ∈ [−π, π)` and oriented
//! counterclockwise, so the outward unit normal is `(y′, −x′)/|x′|`.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the planar cross product.
    pub fn cross(self, other: Vec2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Vec2) -> f64 {
        (self - other).norm()
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// A unit vector in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "Vec2", try_from = "Vec2")]
pub struct Direction(Vec2);

impl Direction {
    pub fn from_angle(angle: f64) -> Self {
        Direction(Vec2::new(angle.cos(), angle.sin()))
    }

    /// Normalizes `v`; fails on vectors shorter than 1e-12.
    pub fn new(v: Vec2) -> Result<Self> {
        let n = v.norm();
        if !(n > 1e-12) || !n.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "cannot normalize ({}, {})",
                v.x, v.y
            )));
        }
        Ok(Direction(v * (1.0 / n)))
    }

    /// Takes `(x, y)` verbatim if it is a unit vector to within 1e-12.
    pub fn from_unit(x: f64, y: f64) -> Result<Self> {
        let v = Vec2::new(x, y);
        if (v.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!("({x}, {y}) is not a unit vector")));
        }
        Ok(Direction(v))
    }

    pub fn vec(self) -> Vec2 {
        self.0
    }

    /// Componentwise agreement within `tol`.
    pub fn approx_eq(self, other: Direction, tol: f64) -> bool {
        (self.0.x - other.0.x).abs() <= tol && (self.0.y - other.0.y).abs() <= tol
    }

    pub fn x(self) -> f64 {
        self.0.x
    }

    pub fn y(self) -> f64 {
        self.0.y
    }

    pub fn angle(self) -> f64 {
        self.0.y.atan2(self.0.x)
    }

    pub fn dot(self, v: Vec2) -> f64 {
        self.0.dot(v)
    }

    /// Cosine of the angle to `other`, clamped to [−1, 1].
    pub fn cos_angle(self, other: Direction) -> f64 {
        if self == other {
            return 1.0;
        }
        if self == -other {
            return -1.0;
        }
        self.0.dot(other.0).clamp(-1.0, 1.0)
    }

    /// Rotation by `angle` radians (counterclockwise).
    pub fn rotated(self, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Direction(Vec2::new(c * self.0.x - s * self.0.y, s * self.0.x + c * self.0.y))
    }
}

impl Neg for Direction {
    type Output = Direction;
    fn neg(self) -> Direction {
        Direction(-self.0)
    }
}

impl From<Direction> for Vec2 {
    fn from(d: Direction) -> Vec2 {
        d.0
    }
}

impl TryFrom<Vec2> for Direction {
    type Error = Error;
    fn try_from(v: Vec2) -> Result<Self> {
        Direction::new(v)
    }
}

/// Wraps `t` into `[−π, π)`.
pub fn wrap_parameter(t: f64) -> f64 {
    let w = (t + PI).rem_euclid(TAU) - PI;
    if w >= PI {
        w - TAU
    } else {
        w
    }
}

/// Coefficients of `x(t) = Σ a_n cos nt + b_n sin nt` (index 0 is the constant).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrigSeries {
    pub cos: Vec<f64>,
    pub sin: Vec<f64>,
}

impl TrigSeries {
    fn eval(&self, t: f64) -> [f64; 3] {
        let mut out = [0.0; 3];
        for (n, &a) in self.cos.iter().enumerate() {
            let nf = n as f64;
            let (s, c) = (nf * t).sin_cos();
            out[0] += a * c;
            out[1] -= a * nf * s;
            out[2] -= a * nf * nf * c;
        }
        for (n, &b) in self.sin.iter().enumerate() {
            let nf = n as f64;
            let (s, c) = (nf * t).sin_cos();
            out[0] += b * s;
            out[1] += b * nf * c;
            out[2] -= b * nf * nf * s;
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum CurveKind {
    Disk { radius: f64, center: Vec2 },
    Egg,
    Kite,
    Trigonometric { x: TrigSeries, y: TrigSeries },
}

/// A smooth closed curve with position and first two derivatives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryCurve {
    kind: CurveKind,
    /// Trigonometric curves given clockwise are traversed as `t ↦ −t`.
    reversed: bool,
}

/// Position, first and second derivative at one parameter value.
#[derive(Debug, Clone, Copy)]
pub struct CurveJet {
    pub point: Vec2,
    pub d1: Vec2,
    pub d2: Vec2,
}

impl CurveJet {
    pub fn speed(&self) -> f64 {
        self.d1.norm()
    }
}

impl BoundaryCurve {
    pub fn disk(radius: f64, center: Vec2) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidParameter(format!("disk radius {radius} must be positive")));
        }
        Ok(Self { kind: CurveKind::Disk { radius, center }, reversed: false })
    }

    pub fn egg() -> Self {
        Self { kind: CurveKind::Egg, reversed: false }
    }

    pub fn kite() -> Self {
        Self { kind: CurveKind::Kite, reversed: false }
    }

    pub fn trigonometric(x: TrigSeries, y: TrigSeries) -> Result<Self> {
        let mut curve = Self { kind: CurveKind::Trigonometric { x, y }, reversed: false };
        let area = curve.signed_area(2048);
        if area.abs() < 1e-12 {
            return Err(Error::InvalidParameter("trigonometric curve encloses no area".into()));
        }
        curve.reversed = area < 0.0;
        Ok(curve)
    }

    pub fn kind(&self) -> &CurveKind {
        &self.kind
    }

    /// Convexity of the presets; trigonometric curves are checked by sampling.
    pub fn is_convex(&self) -> bool {
        match self.kind {
            CurveKind::Disk { .. } | CurveKind::Egg => true,
            CurveKind::Kite => false,
            CurveKind::Trigonometric { .. } => (0..1024)
                .map(|i| -PI + TAU * i as f64 / 1024.0)
                .all(|t| self.curvature(t).map(|k| k > 0.0).unwrap_or(false)),
        }
    }

    pub fn jet(&self, t: f64) -> CurveJet {
        let t = wrap_parameter(t);
        let (tt, sign) = if self.reversed { (-t, -1.0) } else { (t, 1.0) };
        let (p, d1, d2) = match &self.kind {
            CurveKind::Disk { radius, center } => {
                let (s, c) = tt.sin_cos();
                (
                    Vec2::new(center.x + radius * c, center.y + radius * s),
                    Vec2::new(-radius * s, radius * c),
                    Vec2::new(-radius * c, -radius * s),
                )
            }
            CurveKind::Egg => {
                let (s, c) = tt.sin_cos();
                let d = 1.0 + 0.2 * c;
                (
                    Vec2::new(1.5 * c, s / d),
                    Vec2::new(-1.5 * s, (c + 0.2) / (d * d)),
                    Vec2::new(-1.5 * c, s * (0.2 * c - 0.92) / (d * d * d)),
                )
            }
            CurveKind::Kite => {
                let (s, c) = tt.sin_cos();
                let (s2, c2) = (2.0 * tt).sin_cos();
                (
                    Vec2::new(c + 0.65 * c2 - 0.65, 1.5 * s),
                    Vec2::new(-s - 1.3 * s2, 1.5 * c),
                    Vec2::new(-c - 2.6 * c2, -1.5 * s),
                )
            }
            CurveKind::Trigonometric { x, y } => {
                let ex = x.eval(tt);
                let ey = y.eval(tt);
                (
                    Vec2::new(ex[0], ey[0]),
                    Vec2::new(ex[1], ey[1]),
                    Vec2::new(ex[2], ey[2]),
                )
            }
        };
        CurveJet { point: p, d1: d1 * sign, d2 }
    }

    pub fn point(&self, t: f64) -> Vec2 {
        self.jet(t).point
    }

    pub fn normal(&self, t: f64) -> Result<Direction> {
        let jet = self.jet(t);
        let speed = jet.speed();
        if speed < 1e-12 {
            return Err(Error::SingularParametrization { t });
        }
        Ok(Direction(Vec2::new(jet.d1.y / speed, -jet.d1.x / speed)))
    }

    /// Signed curvature, positive on counterclockwise convex arcs.
    pub fn curvature(&self, t: f64) -> Result<f64> {
        let jet = self.jet(t);
        let speed = jet.speed();
        if speed < 1e-12 {
            return Err(Error::SingularParametrization { t });
        }
        Ok(jet.d1.cross(jet.d2) / speed.powi(3))
    }

    fn signed_area(&self, samples: usize) -> f64 {
        // Green's theorem with the trapezoid rule, exact for trig polynomials.
        let h = TAU / samples as f64;
        (0..samples)
            .map(|i| {
                let jet = self.jet(-PI + h * i as f64);
                0.5 * jet.point.cross(jet.d1)
            })
            .sum::<f64>()
            * h
    }

    /// Curve length by the trapezoid rule (spectrally accurate here).
    pub fn length(&self) -> f64 {
        let samples = 1024;
        let h = TAU / samples as f64;
        (0..samples).map(|i| self.jet(-PI + h * i as f64).speed()).sum::<f64>() * h
    }

    pub fn area(&self) -> f64 {
        self.signed_area(2048)
    }

    /// Largest distance from the origin of any boundary point.
    pub fn max_radius(&self) -> f64 {
        (0..1024)
            .map(|i| self.point(-PI + TAU * i as f64 / 1024.0).norm())
            .fold(0.0, f64::max)
    }

    /// Every `t` whose outward normal equals `target`.
    pub fn gauss_preimage(&self, target: Direction) -> Result<Vec<f64>> {
        const GRID: usize = 4096;
        let h = TAU / GRID as f64;
        // g(t) = target × ν(t) vanishes where ν ∥ target; keep the aligned roots.
        let g = |t: f64| -> Result<f64> { Ok(target.vec().cross(self.normal(t)?.vec())) };
        let mut roots = Vec::new();
        let mut t0 = -PI;
        let mut g0 = g(t0)?;
        for i in 1..=GRID {
            let t1 = -PI + h * i as f64;
            let g1 = g(t1)?;
            let aligned = |t: f64| self.normal(t).map(|n| n.dot(target.vec()) > 0.0);
            if g0 == 0.0 {
                if aligned(t0)? {
                    roots.push(t0);
                }
            } else if g0 * g1 < 0.0 {
                let (mut lo, mut hi, mut glo) = (t0, t1, g0);
                while hi - lo > 1e-13 {
                    let mid = 0.5 * (lo + hi);
                    let gm = g(mid)?;
                    if gm == 0.0 {
                        lo = mid;
                        hi = mid;
                        break;
                    }
                    if (gm < 0.0) == (glo < 0.0) {
                        lo = mid;
                        glo = gm;
                    } else {
                        hi = mid;
                    }
                }
                let root = 0.5 * (lo + hi);
                if aligned(root)? {
                    roots.push(wrap_parameter(root));
                }
            }
            t0 = t1;
            g0 = g1;
        }
        roots.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
        if roots.len() > 1 && (roots[0] - roots[roots.len() - 1]).abs() > TAU - 1e-9 {
            roots.pop();
        }
        if roots.is_empty() {
            return Err(Error::EmptyPreimage(target.x(), target.y()));
        }
        Ok(roots)
    }

    /// Parameter of the specular point for the pair; see [`reflection_point`].
    pub fn reflection_parameter(&self, xhat: Direction, theta: Direction) -> Result<f64> {
        let phi = reflect_normal(xhat, theta)?;
        let candidates = self.gauss_preimage(-phi)?;
        let best = candidates
            .into_iter()
            .map(|t| (t, self.point(t).dot(phi.vec())))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("non-empty preimage");
        Ok(best.0)
    }

    /// The boundary point with outward normal `−φ(x̂, θ)`. Among several
    /// preimages (nonconvex curves) the one minimizing `y·φ` is returned.
    pub fn reflection_point(&self, xhat: Direction, theta: Direction) -> Result<Vec2> {
        Ok(self.point(self.reflection_parameter(xhat, theta)?))
    }

    /// Whether the point at `t` lies on the side lit by incidence `theta`.
    pub fn illuminated(&self, t: f64, theta: Direction) -> Result<bool> {
        Ok(self.normal(t)?.dot(theta.vec()) < 0.0)
    }

    /// Unsigned distance from `p` to the curve, by dense sampling and a few
    /// Newton steps on `(x(t) − p)·x′(t) = 0`.
    pub fn distance_to(&self, p: Vec2) -> f64 {
        let samples = 720;
        let h = TAU / samples as f64;
        let (mut best_t, mut best_d) = (0.0, f64::INFINITY);
        for i in 0..samples {
            let t = -PI + h * i as f64;
            let d = self.point(t).distance(p);
            if d < best_d {
                best_d = d;
                best_t = t;
            }
        }
        let mut t = best_t;
        for _ in 0..20 {
            let jet = self.jet(t);
            let r = jet.point - p;
            let f = r.dot(jet.d1);
            let df = jet.d1.dot(jet.d1) + r.dot(jet.d2);
            if df.abs() < 1e-14 {
                break;
            }
            let step = (f / df).clamp(-h, h);
            t -= step;
            if step.abs() < 1e-14 {
                break;
            }
        }
        best_d.min(self.point(t).distance(p))
    }

    /// Whether `p` lies inside, by winding number over a fine polygon.
    pub fn contains(&self, p: Vec2) -> bool {
        let samples = 2048;
        let h = TAU / samples as f64;
        let mut winding = 0.0;
        let mut prev = self.point(-PI) - p;
        for i in 1..=samples {
            let cur = self.point(-PI + h * i as f64) - p;
            winding += prev.cross(cur).atan2(prev.dot(cur));
            prev = cur;
        }
        winding.abs() > PI
    }
}

impl fmt::Display for BoundaryCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            CurveKind::Disk { radius, center } => {
                write!(f, "disk:a={},cx={},cy={}", radius, center.x, center.y)
            }
            CurveKind::Egg => f.write_str("egg"),
            CurveKind::Kite => f.write_str("kite"),
            CurveKind::Trigonometric { .. } => f.write_str("trigonometric"),
        }
    }
}

impl FromStr for BoundaryCurve {
    type Err = Error;

    /// Accepts `egg`, `kite`, or `disk[:a=R,cx=X,cy=Y]` (defaults a=1.5 at the origin).
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "egg" => return Ok(Self::egg()),
            "kite" => return Ok(Self::kite()),
            _ => {}
        }
        let rest = s.strip_prefix("disk").ok_or_else(|| {
            Error::InvalidParameter(format!("unknown geometry '{s}' (expected disk, egg or kite)"))
        })?;
        let (mut radius, mut center) = (1.5, Vec2::default());
        let rest = rest.strip_prefix(':').unwrap_or(rest);
        for item in rest.split(',').filter(|p| !p.trim().is_empty()) {
            let (key, value) = item.split_once('=').ok_or_else(|| {
                Error::InvalidParameter(format!("malformed disk parameter '{item}'"))
            })?;
            let value: f64 = value.trim().parse().map_err(|_| {
                Error::InvalidParameter(format!("disk parameter '{item}' is not a number"))
            })?;
            match key.trim() {
                "a" | "r" => radius = value,
                "cx" => center.x = value,
                "cy" => center.y = value,
                other => {
                    return Err(Error::InvalidParameter(format!("unknown disk parameter '{other}'")))
                }
            }
        }
        Self::disk(radius, center)
    }
}

/// Normal of the reflecting plane, `φ = (θ − x̂)/|θ − x̂|`.
pub fn reflect_normal(xhat: Direction, theta: Direction) -> Result<Direction> {
    if xhat == -theta {
        return Ok(theta);
    }
    let d = theta.vec() - xhat.vec();
    let n = d.norm();
    if n < 1e-12 {
        return Err(Error::UndefinedBisector);
    }
    Ok(Direction(d * (1.0 / n)))
}

/// The open half-plane `{z : z·normal > offset}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HalfPlane {
    pub normal: Direction,
    pub offset: f64,
}

impl HalfPlane {
    pub fn contains(&self, z: Vec2) -> bool {
        self.normal.dot(z) > self.offset
    }
}
