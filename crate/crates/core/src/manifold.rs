//! Ambient geometry of `S³ ⊂ R⁴` and `H³ ⊂ R^{3,1}`.
//!
//! Points are stored as 4-vectors `(x, y, z, w)` with the signed inner product
//! `a·b = x x' + y y' + z z' + σ w w'`. The planar submanifolds used throughout
//! the crate are `H²_{xyw}` (`z = 0`) and `S²_{xyz}` (`w = 0`), parametrized by
//! the angle charts
//!
//! ```text
//! H²: (x, y, w) = (sinh θ, cosh θ sinh φ, cosh θ cosh φ)
//! S²: (x, y, z) = (sin θ,  cos θ sin φ,  cos θ cos φ),   |θ|, |φ| < π/2
//! ```
//!
//! so that `φ = 0` is the geodesic `H¹_{xw}` resp. `S¹_{xz}`.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{CcError, Result};
use crate::tol::{D_MIN, EPS_MFLD};

/// Sign of the curvature: `+1` for `S³`, `−1` for `H³`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "i8", into = "i8")]
pub enum Curvature {
    Spherical,
    Hyperbolic,
}

impl Curvature {
    pub fn sigma(self) -> f64 {
        match self {
            Curvature::Spherical => 1.0,
            Curvature::Hyperbolic => -1.0,
        }
    }

    pub fn from_sign(sign: i64) -> Result<Self> {
        match sign {
            1 => Ok(Curvature::Spherical),
            -1 => Ok(Curvature::Hyperbolic),
            s => Err(CcError::InvalidInput(format!(
                "curvature sign must be +1 or -1, got {s}"
            ))),
        }
    }

    /// `sin` or `sinh`.
    pub fn s(self, t: f64) -> f64 {
        match self {
            Curvature::Spherical => t.sin(),
            Curvature::Hyperbolic => t.sinh(),
        }
    }

    /// `cos` or `cosh`.
    pub fn c(self, t: f64) -> f64 {
        match self {
            Curvature::Spherical => t.cos(),
            Curvature::Hyperbolic => t.cosh(),
        }
    }
}

impl TryFrom<i8> for Curvature {
    type Error = CcError;
    fn try_from(v: i8) -> Result<Self> {
        Curvature::from_sign(v as i64)
    }
}

impl From<Curvature> for i8 {
    fn from(c: Curvature) -> i8 {
        match c {
            Curvature::Spherical => 1,
            Curvature::Hyperbolic => -1,
        }
    }
}

impl fmt::Display for Curvature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Curvature::Spherical => write!(f, "S3"),
            Curvature::Hyperbolic => write!(f, "H3"),
        }
    }
}

/// A point `(x, y, z, w)` of `S³` or `H³`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AmbientPoint(pub [f64; 4]);

impl AmbientPoint {
    pub const fn new(x: f64, y: f64, z: f64, w: f64) -> Self {
        AmbientPoint([x, y, z, w])
    }

    pub fn x(&self) -> f64 {
        self.0[0]
    }
    pub fn y(&self) -> f64 {
        self.0[1]
    }
    pub fn z(&self) -> f64 {
        self.0[2]
    }
    pub fn w(&self) -> f64 {
        self.0[3]
    }

    /// Checks `q·q = σ` (and `w ≥ 1` on `H³`) to within `tol`.
    pub fn check_on_manifold(&self, sigma: Curvature, tol: f64) -> Result<()> {
        let n = signed_dot(self, self, sigma);
        if (n - sigma.sigma()).abs() > tol {
            return Err(CcError::Constraint(format!(
                "q·q = {n} differs from σ = {}",
                sigma.sigma()
            )));
        }
        if sigma == Curvature::Hyperbolic && self.w() < 1.0 - tol {
            return Err(CcError::Constraint(format!("w = {} < 1 on the hyperboloid", self.w())));
        }
        Ok(())
    }

    /// Rescales onto the manifold (upper sheet for `H³`).
    pub fn normalized(&self, sigma: Curvature) -> AmbientPoint {
        let n = signed_dot(self, self, sigma) * sigma.sigma();
        let s = 1.0 / n.abs().sqrt();
        let mut p = self.0.map(|v| v * s);
        if sigma == Curvature::Hyperbolic && p[3] < 0.0 {
            p = p.map(|v| -v);
        }
        AmbientPoint(p)
    }
}

/// Angle-chart coordinates `(θ, φ)` on `H²_{xyw}` or the cap `z > 0` of `S²_{xyz}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnglePoint {
    pub theta: f64,
    pub phi: f64,
}

impl AnglePoint {
    pub const fn new(theta: f64, phi: f64) -> Self {
        AnglePoint { theta, phi }
    }

    pub fn geodesic(theta: f64) -> Self {
        AnglePoint { theta, phi: 0.0 }
    }
}

/// Positive masses, at least two of them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct MassList(Vec<f64>);

impl MassList {
    pub fn new(m: Vec<f64>) -> Result<Self> {
        if m.len() < 2 {
            return Err(CcError::InvalidInput(format!(
                "need at least two masses, got {}",
                m.len()
            )));
        }
        if let Some((i, v)) = m.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v > 0.0)) {
            return Err(CcError::InvalidInput(format!("mass {i} must be positive, got {v}")));
        }
        Ok(MassList(m))
    }

    /// `n` copies of the same mass.
    pub fn equal(n: usize, m: f64) -> Result<Self> {
        MassList::new(vec![m; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn min(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn scaled(&self, k: f64) -> MassList {
        MassList(self.0.iter().map(|m| m * k).collect())
    }

    pub fn permuted(&self, perm: &[usize]) -> MassList {
        MassList(perm.iter().map(|&i| self.0[i]).collect())
    }
}

impl std::ops::Index<usize> for MassList {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl TryFrom<Vec<f64>> for MassList {
    type Error = CcError;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        MassList::new(v)
    }
}

impl From<MassList> for Vec<f64> {
    fn from(m: MassList) -> Vec<f64> {
        m.0
    }
}

/// `x x' + y y' + z z' + σ w w'`.
pub fn signed_dot(a: &AmbientPoint, b: &AmbientPoint, sigma: Curvature) -> f64 {
    dot4(&a.0, &b.0, sigma)
}

pub(crate) fn dot4(a: &[f64; 4], b: &[f64; 4], sigma: Curvature) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + sigma.sigma() * a[3] * b[3]
}

fn euclid_norm(v: &[f64; 4]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Geodesic distance, `cos d = a·b` on `S³` and `cosh d = −a·b` on `H³`.
///
/// The angle is recovered from chord lengths rather than `acos`, which keeps
/// full relative precision near coincident (and, on `S³`, antipodal) points.
/// Inner products past the domain boundary by more than `ε_mfld` are rejected.
pub fn distance(a: &AmbientPoint, b: &AmbientPoint, sigma: Curvature) -> Result<f64> {
    let ab = signed_dot(a, b, sigma);
    match sigma {
        Curvature::Spherical => {
            if ab.abs() > 1.0 + EPS_MFLD {
                return Err(CcError::Domain { value: ab });
            }
            let diff = [a.0[0] - b.0[0], a.0[1] - b.0[1], a.0[2] - b.0[2], a.0[3] - b.0[3]];
            let sum = [a.0[0] + b.0[0], a.0[1] + b.0[1], a.0[2] + b.0[2], a.0[3] + b.0[3]];
            Ok(2.0 * euclid_norm(&diff).atan2(euclid_norm(&sum)))
        }
        Curvature::Hyperbolic => {
            if -ab < 1.0 - EPS_MFLD {
                return Err(CcError::Domain { value: ab });
            }
            let diff = AmbientPoint([a.0[0] - b.0[0], a.0[1] - b.0[1], a.0[2] - b.0[2], a.0[3] - b.0[3]]);
            // ⟨a−b, a−b⟩ = 4 sinh²(d/2) on the hyperboloid
            let chord2 = signed_dot(&diff, &diff, sigma).max(0.0);
            Ok(2.0 * (chord2.sqrt() / 2.0).asinh())
        }
    }
}

/// `cos d`/`cosh d` and `sin d`/`sinh d` of a pair.
#[derive(Clone, Copy, Debug)]
pub(crate) struct PairTrig {
    pub c: f64,
    pub s: f64,
}

/// Pair geometry with the collision (and antipodal) guard used by the potentials.
pub(crate) fn pair_trig(a: &AmbientPoint, b: &AmbientPoint, sigma: Curvature, i: usize, j: usize) -> Result<PairTrig> {
    let d = distance(a, b, sigma)?;
    let near_singular = d < D_MIN || (sigma == Curvature::Spherical && PI - d < D_MIN);
    if near_singular {
        return Err(CcError::Singular { i, j, distance: d });
    }
    Ok(PairTrig {
        c: sigma.c(d),
        s: sigma.s(d),
    })
}

/// Smallest pairwise distance of a configuration.
pub fn min_pair_distance(q: &[AmbientPoint], sigma: Curvature) -> Result<f64> {
    let mut best = f64::INFINITY;
    for i in 0..q.len() {
        for j in i + 1..q.len() {
            best = best.min(distance(&q[i], &q[j], sigma)?);
        }
    }
    Ok(best)
}

/// Maps angle coordinates into the planar embedding (`z = 0` on `H²`, `w = 0` on `S²`).
pub fn angles_to_point(p: &AnglePoint, sigma: Curvature) -> Result<AmbientPoint> {
    let (t, f) = (p.theta, p.phi);
    match sigma {
        Curvature::Hyperbolic => Ok(AmbientPoint::new(
            t.sinh(),
            t.cosh() * f.sinh(),
            0.0,
            t.cosh() * f.cosh(),
        )),
        Curvature::Spherical => {
            if t.abs() >= FRAC_PI_2 || f.abs() >= FRAC_PI_2 {
                return Err(CcError::Chart(format!(
                    "(θ, φ) = ({t}, {f}) outside the open cap |θ|, |φ| < π/2"
                )));
            }
            Ok(AmbientPoint::new(t.sin(), t.cos() * f.sin(), t.cos() * f.cos(), 0.0))
        }
    }
}

/// Inverse of [`angles_to_point`] for points of `H²_{xyw}` / the cap `z > 0` of `S²_{xyz}`.
pub fn point_to_angles(q: &AmbientPoint, sigma: Curvature) -> Result<AnglePoint> {
    match sigma {
        Curvature::Hyperbolic => {
            if q.z().abs() > EPS_MFLD {
                return Err(CcError::Chart(format!("point has z = {} off H²_xyw", q.z())));
            }
            let theta = q.x().asinh();
            Ok(AnglePoint::new(theta, (q.y() / theta.cosh()).asinh()))
        }
        Curvature::Spherical => {
            if q.w().abs() > EPS_MFLD || q.z() <= 0.0 {
                return Err(CcError::Chart(format!(
                    "point ({}, {}, {}, {}) outside the cap z > 0 of S²_xyz",
                    q.x(),
                    q.y(),
                    q.z(),
                    q.w()
                )));
            }
            let theta = q.x().clamp(-1.0, 1.0).asin();
            Ok(AnglePoint::new(theta, q.y().atan2(q.z())))
        }
    }
}

pub fn configuration_from_angles(angles: &[AnglePoint], sigma: Curvature) -> Result<Vec<AmbientPoint>> {
    angles.iter().map(|p| angles_to_point(p, sigma)).collect()
}

pub fn configuration_to_angles(q: &[AmbientPoint], sigma: Curvature) -> Result<Vec<AnglePoint>> {
    q.iter().map(|p| point_to_angles(p, sigma)).collect()
}

/// Point of the chart together with its first and second partials in `(θ, φ)`.
#[derive(Clone, Copy, Debug)]
pub(crate) struct ChartJet {
    pub q: [f64; 4],
    /// `[∂θ q, ∂φ q]`
    pub d1: [[f64; 4]; 2],
    /// `[[∂θθ, ∂θφ], [∂φθ, ∂φφ]]`
    pub d2: [[[f64; 4]; 2]; 2],
}

pub(crate) fn chart_jet(p: &AnglePoint, sigma: Curvature) -> ChartJet {
    let (t, f) = (p.theta, p.phi);
    match sigma {
        Curvature::Hyperbolic => {
            let (st, ct, sf, cf) = (t.sinh(), t.cosh(), f.sinh(), f.cosh());
            let q = [st, ct * sf, 0.0, ct * cf];
            let qt = [ct, st * sf, 0.0, st * cf];
            let qf = [0.0, ct * cf, 0.0, ct * sf];
            let qtf = [0.0, st * cf, 0.0, st * sf];
            ChartJet {
                q,
                d1: [qt, qf],
                d2: [[q, qtf], [qtf, q_phiphi_h(ct, sf, cf)]],
            }
        }
        Curvature::Spherical => {
            let (st, ct, sf, cf) = (t.sin(), t.cos(), f.sin(), f.cos());
            let q = [st, ct * sf, ct * cf, 0.0];
            let qt = [ct, -st * sf, -st * cf, 0.0];
            let qf = [0.0, ct * cf, -ct * sf, 0.0];
            let qtt = [-st, -ct * sf, -ct * cf, 0.0];
            let qtf = [0.0, -st * cf, st * sf, 0.0];
            let qff = [0.0, -ct * sf, -ct * cf, 0.0];
            ChartJet {
                q,
                d1: [qt, qf],
                d2: [[qtt, qtf], [qtf, qff]],
            }
        }
    }
}

fn q_phiphi_h(ct: f64, sf: f64, cf: f64) -> [f64; 4] {
    [0.0, ct * sf, 0.0, ct * cf]
}

/// Distance between two points of the same geodesic chart (`φ = 0`).
pub fn geodesic_distance_1d(theta_i: f64, theta_j: f64) -> f64 {
    (theta_i - theta_j).abs()
}

/// Element `χ = (χ₁, χ₂) ∘ τ^flag` of `SO(2)×SO(2)` (on `S³`) or `SO(2)×SO⁺(1,1)` (on `H³`).
///
/// `angle1` rotates the `xy`-plane; `param2` rotates the `zw`-plane on `S³` or
/// is the boost rapidity on `H³`. With `tau` the swap `τ(x,y,z,w) = (z,w,x,y)`
/// is applied first (spherical only).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymmetryElement {
    pub angle1: f64,
    pub param2: f64,
    pub tau: bool,
}

impl SymmetryElement {
    pub const IDENTITY: SymmetryElement = SymmetryElement {
        angle1: 0.0,
        param2: 0.0,
        tau: false,
    };

    pub fn new(angle1: f64, param2: f64) -> Self {
        SymmetryElement {
            angle1,
            param2,
            tau: false,
        }
    }

    pub fn tau() -> Self {
        SymmetryElement {
            angle1: 0.0,
            param2: 0.0,
            tau: true,
        }
    }

    pub fn matrix(&self, sigma: Curvature) -> Result<[[f64; 4]; 4]> {
        if self.tau && sigma == Curvature::Hyperbolic {
            return Err(CcError::InvalidInput("τ is only an isometry of S³".into()));
        }
        let (ca, sa) = (self.angle1.cos(), self.angle1.sin());
        let lower = match sigma {
            Curvature::Spherical => {
                let (cb, sb) = (self.param2.cos(), self.param2.sin());
                [[cb, -sb], [sb, cb]]
            }
            Curvature::Hyperbolic => {
                let (cb, sb) = (self.param2.cosh(), self.param2.sinh());
                [[cb, sb], [sb, cb]]
            }
        };
        let rot = [
            [ca, -sa, 0.0, 0.0],
            [sa, ca, 0.0, 0.0],
            [0.0, 0.0, lower[0][0], lower[0][1]],
            [0.0, 0.0, lower[1][0], lower[1][1]],
        ];
        if !self.tau {
            return Ok(rot);
        }
        // rot · τ: columns permuted (0,1,2,3) -> (2,3,0,1)
        let mut m = [[0.0; 4]; 4];
        for (r, row) in rot.iter().enumerate() {
            m[r] = [row[2], row[3], row[0], row[1]];
        }
        Ok(m)
    }

    pub fn apply(&self, q: &AmbientPoint, sigma: Curvature) -> Result<AmbientPoint> {
        let m = self.matrix(sigma)?;
        Ok(AmbientPoint(apply_matrix(&m, &q.0)))
    }

    /// Group product `self ∘ other`.
    pub fn compose(&self, other: &SymmetryElement) -> SymmetryElement {
        // τ A(a, b) = A(b, a) τ
        let (a2, b2) = if self.tau {
            (other.param2, other.angle1)
        } else {
            (other.angle1, other.param2)
        };
        SymmetryElement {
            angle1: self.angle1 + a2,
            param2: self.param2 + b2,
            tau: self.tau ^ other.tau,
        }
    }
}

pub(crate) fn apply_matrix(m: &[[f64; 4]; 4], v: &[f64; 4]) -> [f64; 4] {
    let mut out = [0.0; 4];
    for (o, row) in out.iter_mut().zip(m.iter()) {
        *o = row.iter().zip(v.iter()).map(|(a, b)| a * b).sum();
    }
    out
}

/// `χq = (χq₁, …, χqₙ)`.
pub fn apply_symmetry(g: &SymmetryElement, q: &[AmbientPoint], sigma: Curvature) -> Result<Vec<AmbientPoint>> {
    let m = g.matrix(sigma)?;
    Ok(q.iter().map(|p| AmbientPoint(apply_matrix(&m, &p.0))).collect())
}

/// Boosts an `H³` configuration so that `Σ zᵢwᵢ = 0`.
///
/// The boost orbit of any configuration contains exactly one such point, so
/// two configurations in one class agree after normalization up to `SO(2)`.
pub fn boost_normalize(q: &[AmbientPoint]) -> Vec<AmbientPoint> {
    let a: f64 = q.iter().map(|p| p.z() * p.w()).sum();
    let b: f64 = q.iter().map(|p| 0.5 * (p.z() * p.z() + p.w() * p.w())).sum();
    // Σ z'w' = a cosh 2s + b sinh 2s with b > |a|
    let s = -0.5 * (a / b).clamp(-1.0 + 1e-15, 1.0 - 1e-15).atanh();
    let (ch, sh) = (s.cosh(), s.sinh());
    q.iter()
        .map(|p| AmbientPoint::new(p.x(), p.y(), p.z() * ch + p.w() * sh, p.z() * sh + p.w() * ch))
        .collect()
}

const GAP_GRID: usize = 256;
const GAP_GRID_2D: usize = 48;

/// Quotient distance between two labelled configurations modulo the symmetry group.
///
/// Minimizes the largest pointwise geodesic distance `maxᵢ d(Aᵢ, χBᵢ)` over
/// `χ`. On `H³` both configurations are boost-normalized first and only the
/// rotation angle is searched; on `S³` both rotation angles are searched. The
/// search is a grid followed by golden-section refinement, first on the
/// smooth sum of squared chords and then on the max-distance objective.
pub fn class_gap(qa: &[AmbientPoint], qb: &[AmbientPoint], sigma: Curvature) -> Result<f64> {
    if qa.len() != qb.len() {
        return Err(CcError::InvalidInput(
            "class_gap needs configurations of equal size".into(),
        ));
    }
    match sigma {
        Curvature::Hyperbolic => {
            let a = boost_normalize(qa);
            let b = boost_normalize(qb);
            let smooth = |t: f64| chord_sum(&a, &b, t, 0.0, sigma);
            let maxd = |t: f64| max_dist(&a, &b, t, 0.0, sigma);
            let mut best = f64::INFINITY;
            for t0 in grid_candidates(smooth, GAP_GRID, 3) {
                let h = TAU / GAP_GRID as f64;
                let t1 = golden_min(&smooth, t0 - h, t0 + h, 1e-13);
                let t2 = golden_min(&maxd, t1 - 1e-3, t1 + 1e-3, 1e-14);
                best = best.min(maxd(t1)).min(maxd(t2));
            }
            Ok(best)
        }
        Curvature::Spherical => {
            let smooth = |u: f64, v: f64| chord_sum(qa, qb, u, v, sigma);
            let maxd = |u: f64, v: f64| max_dist(qa, qb, u, v, sigma);
            let h = TAU / GAP_GRID_2D as f64;
            let mut cands: Vec<(f64, f64, f64)> = Vec::with_capacity(GAP_GRID_2D * GAP_GRID_2D);
            for i in 0..GAP_GRID_2D {
                for j in 0..GAP_GRID_2D {
                    let (u, v) = (i as f64 * h, j as f64 * h);
                    cands.push((smooth(u, v), u, v));
                }
            }
            cands.sort_by(|x, y| x.0.total_cmp(&y.0));
            let mut best = f64::INFINITY;
            for &(_, u0, v0) in cands.iter().take(4) {
                let (mut u, mut v) = (u0, v0);
                let mut w = h;
                for _ in 0..40 {
                    u = golden_min(&|t| smooth(t, v), u - w, u + w, 1e-14);
                    v = golden_min(&|t| smooth(u, t), v - w, v + w, 1e-14);
                    w = (w * 0.5).max(1e-6);
                }
                best = best.min(maxd(u, v));
                for _ in 0..10 {
                    u = golden_min(&|t| maxd(t, v), u - 1e-4, u + 1e-4, 1e-15);
                    v = golden_min(&|t| maxd(u, t), v - 1e-4, v + 1e-4, 1e-15);
                }
                best = best.min(maxd(u, v));
            }
            Ok(best)
        }
    }
}

fn transformed(b: &AmbientPoint, u: f64, v: f64, sigma: Curvature) -> AmbientPoint {
    SymmetryElement::new(u, v).apply(b, sigma).expect("no τ")
}

fn chord_sum(a: &[AmbientPoint], b: &[AmbientPoint], u: f64, v: f64, sigma: Curvature) -> f64 {
    a.iter()
        .zip(b)
        .map(|(p, q)| {
            let t = transformed(q, u, v, sigma);
            (0..4).map(|k| (p.0[k] - t.0[k]).powi(2)).sum::<f64>()
        })
        .sum()
}

fn max_dist(a: &[AmbientPoint], b: &[AmbientPoint], u: f64, v: f64, sigma: Curvature) -> f64 {
    a.iter()
        .zip(b)
        .map(|(p, q)| distance(p, &transformed(q, u, v, sigma), sigma).unwrap_or(f64::INFINITY))
        .fold(0.0, f64::max)
}

fn grid_candidates(f: impl Fn(f64) -> f64, n: usize, keep: usize) -> Vec<f64> {
    let h = TAU / n as f64;
    let mut vals: Vec<(f64, f64)> = (0..n).map(|i| (f(i as f64 * h), i as f64 * h)).collect();
    vals.sort_by(|x, y| x.0.total_cmp(&y.0));
    vals.into_iter().take(keep).map(|(_, t)| t).collect()
}

/// Golden-section minimization of a unimodal function on `[a, b]`.
pub(crate) fn golden_min(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    let mut it = 0;
    while (b - a).abs() > tol && it < 200 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
        it += 1;
    }
    if fc < fd {
        c
    } else {
        d
    }
}
