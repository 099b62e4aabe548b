//! Singular-approach families and neighborhood-exclusion probes.
//!
//! Polygon families collapse onto a singular configuration while staying
//! exact OCCs, and their multipliers diverge like `d⁻³`. The exclusion probe
//! samples balls around a singular center `X` and reports how small the scaled
//! CC residual gets; around a center with `I(X) > 0` on `H³` it stays bounded
//! away from zero.

use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{CcError, Result};
use crate::linalg::orthonormal_complement;
use crate::manifold::{apply_symmetry, distance, dot4, AmbientPoint, Curvature, MassList, SymmetryElement};
use crate::parallel::Execution;
use crate::potentials::{inertia, multiplier_and_residual};
use crate::tol::EPS_CC;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    HPolygon,
    SPolygon,
    SCollisionAntipodal,
    Custom,
}

/// A one-parameter family of OCCs approaching a singular configuration as `θ → 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SingularFamily {
    pub kind: FamilyKind,
    pub parameter_grid: Vec<f64>,
    pub masses: MassList,
    pub sigma: Curvature,
    /// Apply `τ` to every member (`s_polygon` only).
    #[serde(default)]
    pub tau: bool,
    /// Members for `custom`, one per grid value.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub members: Vec<Vec<AmbientPoint>>,
}

impl SingularFamily {
    pub fn h_polygon(n: usize, m: f64, grid: Vec<f64>) -> Result<Self> {
        Ok(SingularFamily {
            kind: FamilyKind::HPolygon,
            parameter_grid: grid,
            masses: MassList::equal(n, m)?,
            sigma: Curvature::Hyperbolic,
            tau: false,
            members: Vec::new(),
        })
    }

    pub fn s_polygon(n: usize, m: f64, grid: Vec<f64>, tau: bool) -> Result<Self> {
        Ok(SingularFamily {
            kind: FamilyKind::SPolygon,
            parameter_grid: grid,
            masses: MassList::equal(n, m)?,
            sigma: Curvature::Spherical,
            tau,
            members: Vec::new(),
        })
    }

    /// Masses `(m, M, M)` at `(1,0,0,0)` and `(−cos θ, 0, ±sin θ, 0)`.
    pub fn s_collision_antipodal(m: f64, big_m: f64, grid: Vec<f64>) -> Result<Self> {
        Ok(SingularFamily {
            kind: FamilyKind::SCollisionAntipodal,
            parameter_grid: grid,
            masses: MassList::new(vec![m, big_m, big_m])?,
            sigma: Curvature::Spherical,
            tau: false,
            members: Vec::new(),
        })
    }

    pub fn custom(masses: MassList, sigma: Curvature, grid: Vec<f64>, members: Vec<Vec<AmbientPoint>>) -> Result<Self> {
        let fam = SingularFamily {
            kind: FamilyKind::Custom,
            parameter_grid: grid,
            masses,
            sigma,
            tau: false,
            members,
        };
        fam.validate()?;
        Ok(fam)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(CcError::InvalidInput(msg));
        if self.parameter_grid.is_empty() {
            return bad("empty parameter grid".into());
        }
        let n = self.masses.len();
        match self.kind {
            FamilyKind::HPolygon | FamilyKind::SPolygon => {
                let m0 = self.masses[0];
                if n < 2 || self.masses.as_slice().iter().any(|&m| m != m0) {
                    return bad("polygon families need n ≥ 2 equal masses".into());
                }
            }
            FamilyKind::SCollisionAntipodal => {
                if n != 3 || self.masses[1] != self.masses[2] {
                    return bad("collision-antipodal family needs masses (m, M, M)".into());
                }
            }
            FamilyKind::Custom => {
                if self.members.len() != self.parameter_grid.len() {
                    return bad(format!(
                        "{} members for {} grid values",
                        self.members.len(),
                        self.parameter_grid.len()
                    ));
                }
                if let Some(k) = self.members.iter().position(|q| q.len() != n) {
                    return bad(format!("member {k} has the wrong number of particles"));
                }
            }
        }
        let expected = match self.kind {
            FamilyKind::HPolygon => Some(Curvature::Hyperbolic),
            FamilyKind::SPolygon | FamilyKind::SCollisionAntipodal => Some(Curvature::Spherical),
            FamilyKind::Custom => None,
        };
        if expected.is_some_and(|s| s != self.sigma) {
            return bad(format!("{:?} lives on the other curvature", self.kind));
        }
        if self.tau && self.kind != FamilyKind::SPolygon {
            return bad("τ applies to s_polygon only".into());
        }
        for &t in &self.parameter_grid {
            let ok = match self.kind {
                FamilyKind::HPolygon => t > 0.0,
                FamilyKind::SPolygon | FamilyKind::SCollisionAntipodal => t > 0.0 && t < std::f64::consts::FRAC_PI_2,
                FamilyKind::Custom => t.is_finite(),
            };
            if !ok {
                return bad(format!("parameter {t} outside the family's range"));
            }
        }
        Ok(())
    }

    /// Member at grid index `k`.
    pub fn member(&self, k: usize) -> Result<Vec<AmbientPoint>> {
        let theta = *self
            .parameter_grid
            .get(k)
            .ok_or_else(|| CcError::InvalidInput(format!("grid index {k} out of range")))?;
        match self.kind {
            FamilyKind::HPolygon | FamilyKind::SPolygon => {
                let q = polygon_points(self.masses.len(), theta, self.sigma);
                if self.tau {
                    apply_symmetry(&SymmetryElement::tau(), &q, self.sigma)
                } else {
                    Ok(q)
                }
            }
            FamilyKind::SCollisionAntipodal => Ok(vec![
                AmbientPoint::new(1.0, 0.0, 0.0, 0.0),
                AmbientPoint::new(-theta.cos(), 0.0, theta.sin(), 0.0),
                AmbientPoint::new(-theta.cos(), 0.0, -theta.sin(), 0.0),
            ]),
            FamilyKind::Custom => Ok(self.members[k].clone()),
        }
    }

    /// Limit configuration as `θ → 0` (polygons and the collision-antipodal family).
    pub fn singular_limit(&self) -> Result<Vec<AmbientPoint>> {
        let n = self.masses.len();
        let q = match self.kind {
            FamilyKind::HPolygon => vec![AmbientPoint::new(0.0, 0.0, 0.0, 1.0); n],
            FamilyKind::SPolygon => vec![AmbientPoint::new(0.0, 0.0, 1.0, 0.0); n],
            FamilyKind::SCollisionAntipodal => vec![
                AmbientPoint::new(1.0, 0.0, 0.0, 0.0),
                AmbientPoint::new(-1.0, 0.0, 0.0, 0.0),
                AmbientPoint::new(-1.0, 0.0, 0.0, 0.0),
            ],
            FamilyKind::Custom => return Err(CcError::InvalidInput("custom families carry no limit".into())),
        };
        if self.tau {
            apply_symmetry(&SymmetryElement::tau(), &q, self.sigma)
        } else {
            Ok(q)
        }
    }
}

fn polygon_points(n: usize, theta: f64, sigma: Curvature) -> Vec<AmbientPoint> {
    (0..n)
        .map(|i| {
            let a = TAU * i as f64 / n as f64;
            let r = sigma.s(theta);
            match sigma {
                Curvature::Hyperbolic => AmbientPoint::new(r * a.cos(), r * a.sin(), 0.0, theta.cosh()),
                Curvature::Spherical => AmbientPoint::new(r * a.cos(), r * a.sin(), theta.cos(), 0.0),
            }
        })
        .collect()
}

/// One evaluated family member.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyMember {
    pub theta: f64,
    pub lambda: f64,
    pub inertia: f64,
    /// Smallest distance to a collision, or on `S³` to an antipodal pair.
    pub d_min: f64,
    pub residual: f64,
    pub positions: Vec<AmbientPoint>,
}

/// Distance to the singular set: `min_{i<j} d_ij` on `H³`, `min(d_ij, π − d_ij)` on `S³`.
pub fn singular_distance(q: &[AmbientPoint], sigma: Curvature) -> Result<f64> {
    let mut best = f64::INFINITY;
    for i in 0..q.len() {
        for j in i + 1..q.len() {
            let d = distance(&q[i], &q[j], sigma)?;
            let d = match sigma {
                Curvature::Hyperbolic => d,
                Curvature::Spherical => d.min(std::f64::consts::PI - d),
            };
            best = best.min(d);
        }
    }
    Ok(best)
}

fn evaluate_member(q: Vec<AmbientPoint>, theta: f64, masses: &MassList, sigma: Curvature) -> Result<FamilyMember> {
    let r = multiplier_and_residual(&q, masses, sigma)?;
    Ok(FamilyMember {
        theta,
        lambda: r.lambda,
        inertia: inertia(&q, masses),
        d_min: singular_distance(&q, sigma)?,
        residual: r.residual_norm,
        positions: q,
    })
}

/// Regular `n`-gon of equal masses `m` at latitude `θ`, with its multiplier.
pub fn polygon_family(n: usize, m: f64, theta: f64, sigma: Curvature) -> Result<FamilyMember> {
    let fam = match sigma {
        Curvature::Hyperbolic => SingularFamily::h_polygon(n, m, vec![theta])?,
        Curvature::Spherical => SingularFamily::s_polygon(n, m, vec![theta], false)?,
    };
    fam.validate()?;
    evaluate_member(fam.member(0)?, theta, &fam.masses, sigma)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DivergenceScan {
    pub kind: FamilyKind,
    /// Rows sorted by increasing `θ`.
    pub rows: Vec<FamilyMember>,
    /// Least-squares slope of `log|λ|` against `log d_min` over the smallest decade of `d_min`.
    pub fitted_exponent: f64,
    /// `C` in `λ ≈ −C d⁻³`-style leading order, from the same fit.
    pub fitted_prefactor: f64,
    pub fit_points: usize,
    /// `λ` strictly increasing in `θ`, i.e. decreasing as `θ → 0`.
    pub monotone: bool,
    pub max_residual: f64,
    pub all_negative: bool,
}

impl DivergenceScan {
    pub fn all_exact(&self, eps_cc: f64) -> bool {
        self.max_residual < eps_cc
    }
}

/// Evaluates the family over its grid and fits the divergence exponent of `λ`.
pub fn multiplier_divergence_scan(fam: &SingularFamily) -> Result<DivergenceScan> {
    fam.validate()?;
    let mut rows = (0..fam.parameter_grid.len())
        .map(|k| evaluate_member(fam.member(k)?, fam.parameter_grid[k], &fam.masses, fam.sigma))
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| a.theta.total_cmp(&b.theta));
    let monotone = rows.windows(2).all(|w| w[0].lambda < w[1].lambda);
    let d_small = rows.iter().map(|r| r.d_min).fold(f64::INFINITY, f64::min);
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.d_min <= 10.0 * d_small * (1.0 + 1e-12) && r.lambda != 0.0)
        .map(|r| (r.d_min.ln(), r.lambda.abs().ln()))
        .collect();
    let (slope, intercept) = least_squares_line(&pts).unwrap_or((f64::NAN, f64::NAN));
    Ok(DivergenceScan {
        kind: fam.kind,
        fitted_exponent: slope,
        fitted_prefactor: intercept.exp(),
        fit_points: pts.len(),
        monotone,
        max_residual: rows.iter().map(|r| r.residual).fold(0.0, f64::max),
        all_negative: rows.iter().all(|r| r.lambda < 0.0),
        rows,
    })
}

fn least_squares_line(pts: &[(f64, f64)]) -> Option<(f64, f64)> {
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (sx / n, sy / n);
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExclusionProbe {
    pub center: Vec<AmbientPoint>,
    pub radius_grid: Vec<f64>,
    #[serde(default = "default_samples")]
    pub sample_count: usize,
    #[serde(default)]
    pub seed: u64,
    /// Number of best samples per radius polished by a ball-confined least-squares descent.
    #[serde(default = "default_refine")]
    pub refine: usize,
}

fn default_samples() -> usize {
    10_000
}

fn default_refine() -> usize {
    4
}

impl ExclusionProbe {
    pub fn new(center: Vec<AmbientPoint>, radius_grid: Vec<f64>, seed: u64) -> Self {
        ExclusionProbe {
            center,
            radius_grid,
            sample_count: default_samples(),
            seed,
            refine: default_refine(),
        }
    }

    /// Radii log-spaced over `decades` decades starting at `r_max`, `per_decade` per decade.
    pub fn log_radii(r_max: f64, decades: u32, per_decade: u32) -> Vec<f64> {
        let k = decades * per_decade;
        (0..=k)
            .map(|i| r_max * 10f64.powf(-(i as f64) / per_decade as f64))
            .collect()
    }
}

/// Where the center sits relative to the exclusion hypotheses.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CenterDiagnostic {
    pub singular: bool,
    pub collision: bool,
    pub antipodal: bool,
    pub inertia: f64,
    /// All particles on `S¹_{xy} ∪ S¹_{zw}` (`S³` only).
    pub on_circles: bool,
    /// `I(X) > 0` on `H³`; on `S³`, singular and not confined to the two circles.
    pub hypotheses_hold: bool,
}

pub fn center_diagnostic(x: &[AmbientPoint], sigma: Curvature, masses: &MassList) -> Result<CenterDiagnostic> {
    let (mut collision, mut antipodal) = (false, false);
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            let d = distance(&x[i], &x[j], sigma)?;
            collision |= d < 1e-12;
            antipodal |= sigma == Curvature::Spherical && std::f64::consts::PI - d < 1e-12;
        }
    }
    let i_x = inertia(x, masses);
    let on_circles = sigma == Curvature::Spherical
        && x.iter()
            .all(|p| (p.z().abs() < 1e-12 && p.w().abs() < 1e-12) || (p.x().abs() < 1e-12 && p.y().abs() < 1e-12));
    let singular = collision || antipodal;
    let hypotheses_hold = singular
        && match sigma {
            Curvature::Hyperbolic => i_x > 1e-12,
            Curvature::Spherical => !on_circles,
        };
    Ok(CenterDiagnostic {
        singular,
        collision,
        antipodal,
        inertia: i_x,
        on_circles,
        hypotheses_hold,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExclusionRow {
    pub radius: f64,
    pub samples_evaluated: usize,
    /// Samples that landed on a singular or degenerate configuration.
    pub samples_skipped: usize,
    pub min_residual: f64,
    pub median_residual: f64,
    /// Best residual after the ball-confined descent, if any refinement ran.
    pub refined_min_residual: Option<f64>,
    /// Family members inside the ball, and the largest residual among them.
    pub family_members_inside: usize,
    pub family_max_residual: Option<f64>,
    /// An OCC was exhibited inside the ball (by refinement below `10·ε_cc` or by a family member).
    pub occ_detected: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExclusionReport {
    pub sigma: Curvature,
    pub center: CenterDiagnostic,
    pub quotient_dimension: usize,
    pub rows: Vec<ExclusionRow>,
    pub min_residual_found: f64,
    /// Largest relative drop of the sampled minimum when moving to a smaller ball (0 if monotone).
    pub monotonicity_violation: f64,
}

impl ExclusionReport {
    /// The sampled minimum (and refined minimum) stays above `threshold` on every ball.
    pub fn excluded_above(&self, threshold: f64) -> bool {
        self.rows.iter().all(|r| {
            r.min_residual > threshold
                && r.refined_min_residual.is_none_or(|v| v > threshold)
                && r.family_members_inside == 0
        })
    }

    pub fn detected_everywhere(&self) -> bool {
        self.rows.iter().all(|r| r.occ_detected)
    }
}

/// Orthonormal (signed-metric) basis of the tangent space at `q`.
fn tangent_basis(q: &AmbientPoint, sigma: Curvature) -> [[f64; 4]; 3] {
    let sg = sigma.sigma();
    let mut cands: Vec<[f64; 4]> = (0..4)
        .map(|k| {
            let mut e = [0.0; 4];
            e[k] = 1.0;
            let eq = dot4(&e, &q.0, sigma);
            std::array::from_fn(|c| e[c] - sg * eq * q.0[c])
        })
        .collect();
    cands.sort_by(|a, b| dot4(b, b, sigma).total_cmp(&dot4(a, a, sigma)));
    let mut out: Vec<[f64; 4]> = Vec::with_capacity(3);
    for mut v in cands {
        for b in &out {
            let p = dot4(&v, b, sigma);
            v = std::array::from_fn(|c| v[c] - p * b[c]);
        }
        let nrm = dot4(&v, &v, sigma).max(0.0).sqrt();
        if nrm > 1e-6 && out.len() < 3 {
            out.push(v.map(|x| x / nrm));
        }
    }
    [out[0], out[1], out[2]]
}

fn exp_map(q: &AmbientPoint, v: &[f64; 4], sigma: Curvature) -> AmbientPoint {
    let nv = dot4(v, v, sigma).max(0.0).sqrt();
    if nv == 0.0 {
        return *q;
    }
    let (c, s) = (sigma.c(nv), sigma.s(nv) / nv);
    AmbientPoint(std::array::from_fn(|k| c * q.0[k] + s * v[k])).normalized(sigma)
}

/// Coordinates on the tangent space of `X` orthogonal to the symmetry orbit.
struct QuotientChart {
    sigma: Curvature,
    center: Vec<AmbientPoint>,
    frames: Vec<[[f64; 4]; 3]>,
    /// `3n × D`, orthonormal columns.
    basis: DMatrix<f64>,
}

impl QuotientChart {
    fn new(center: &[AmbientPoint], sigma: Curvature) -> Self {
        let n = center.len();
        let frames: Vec<_> = center.iter().map(|q| tangent_basis(q, sigma)).collect();
        let gens = [SymmetryElement::new(1.0, 0.0), SymmetryElement::new(0.0, 1.0)];
        let orbit: Vec<DVector<f64>> = gens
            .iter()
            .map(|g| {
                DVector::from_fn(3 * n, |r, _| {
                    let (i, k) = (r / 3, r % 3);
                    let xi = generator(g, &center[i], sigma);
                    dot4(&xi, &frames[i][k], sigma)
                })
            })
            .filter(|v| v.norm() > 1e-10)
            .collect();
        let basis = orthonormal_complement(&orbit, 3 * n);
        QuotientChart {
            sigma,
            center: center.to_vec(),
            frames,
            basis,
        }
    }

    fn dim(&self) -> usize {
        self.basis.ncols()
    }

    fn point(&self, u: &DVector<f64>) -> Vec<AmbientPoint> {
        let v = &self.basis * u;
        self.center
            .iter()
            .enumerate()
            .map(|(i, q)| {
                let t: [f64; 4] = std::array::from_fn(|c| (0..3).map(|k| v[3 * i + k] * self.frames[i][k][c]).sum());
                exp_map(q, &t, self.sigma)
            })
            .collect()
    }
}

fn generator(g: &SymmetryElement, q: &AmbientPoint, sigma: Curvature) -> [f64; 4] {
    let (a, b) = (g.angle1, g.param2);
    match sigma {
        Curvature::Spherical => [-a * q.y(), a * q.x(), -b * q.w(), b * q.z()],
        Curvature::Hyperbolic => [-a * q.y(), a * q.x(), b * q.w(), b * q.z()],
    }
}

fn scaled_residual_vector(q: &[AmbientPoint], masses: &MassList, sigma: Curvature) -> Option<DVector<f64>> {
    let r = multiplier_and_residual(q, masses, sigma).ok()?;
    let scale = r.grad_u_norm.max(1.0);
    Some(DVector::from_iterator(
        4 * q.len(),
        r.per_particle.iter().flatten().map(|v| v / scale),
    ))
}

fn sample_ball(dim: usize, radius: f64, rng: &mut ChaCha8Rng) -> DVector<f64> {
    let g = DVector::from_fn(dim, |_, _| StandardNormal.sample(rng));
    let rho = radius * rng.gen::<f64>().powf(1.0 / dim as f64);
    let n = g.norm();
    if n == 0.0 {
        g
    } else {
        g * (rho / n)
    }
}

/// Levenberg–Marquardt on the scaled residual in quotient coordinates, kept inside `‖u‖ ≤ r`.
fn refine_in_ball(chart: &QuotientChart, masses: &MassList, u0: DVector<f64>, radius: f64) -> Option<f64> {
    let eval = |u: &DVector<f64>| scaled_residual_vector(&chart.point(u), masses, chart.sigma);
    let clamp = |u: DVector<f64>| {
        let n = u.norm();
        if n > radius {
            u * (radius / n)
        } else {
            u
        }
    };
    let mut u = u0;
    let mut f = eval(&u)?;
    let mut mu = 1e-3;
    let h = 1e-7 * radius;
    for _ in 0..60 {
        let d = u.len();
        let mut j = DMatrix::zeros(f.len(), d);
        for k in 0..d {
            let mut up = u.clone();
            up[k] += h;
            let mut um = u.clone();
            um[k] -= h;
            let (fp, fm) = (eval(&up)?, eval(&um)?);
            j.set_column(k, &((fp - fm) / (2.0 * h)));
        }
        let jtj = j.transpose() * &j;
        let g = j.transpose() * &f;
        let mut improved = false;
        for _ in 0..12 {
            let lhs = &jtj + DMatrix::identity(d, d) * (mu * jtj.diagonal().max().max(1e-300));
            let Some(ch) = lhs.cholesky() else {
                mu *= 10.0;
                continue;
            };
            let trial = clamp(&u - ch.solve(&g));
            if let Some(ft) = eval(&trial) {
                if ft.norm() < f.norm() {
                    u = trial;
                    f = ft;
                    mu = (mu / 3.0).max(1e-12);
                    improved = true;
                    break;
                }
            }
            mu *= 10.0;
        }
        if !improved || f.norm() < 1e-14 {
            break;
        }
    }
    multiplier_and_residual(&chart.point(&u), masses, chart.sigma)
        .ok()
        .map(|r| r.residual_norm)
}

/// Samples each ball around the center and reports the smallest scaled CC residual.
///
/// When `family` is given, its members inside each ball are counted as well.
pub fn exclusion_scan(
    p: &ExclusionProbe,
    masses: &MassList,
    sigma: Curvature,
    family: Option<&SingularFamily>,
    exec: Execution,
) -> Result<ExclusionReport> {
    exclusion_scan_with(p, masses, sigma, family, exec, EPS_CC)
}

pub fn exclusion_scan_with(
    p: &ExclusionProbe,
    masses: &MassList,
    sigma: Curvature,
    family: Option<&SingularFamily>,
    exec: Execution,
    eps_cc: f64,
) -> Result<ExclusionReport> {
    if p.center.len() != masses.len() {
        return Err(CcError::InvalidInput("center and masses disagree in size".into()));
    }
    if p.radius_grid.iter().any(|&r| !(r > 0.0)) {
        return Err(CcError::InvalidInput("radii must be positive".into()));
    }
    for (i, q) in p.center.iter().enumerate() {
        q.check_on_manifold(sigma, 1e-9)
            .map_err(|e| CcError::InvalidInput(format!("center particle {i}: {e}")))?;
    }
    let diag = center_diagnostic(&p.center, sigma, masses)?;
    let chart = QuotientChart::new(&p.center, sigma);
    let dim = chart.dim();

    let family_members = match family {
        Some(f) => {
            f.validate()?;
            (0..f.parameter_grid.len())
                .map(|k| {
                    let q = f.member(k)?;
                    let d2 = q
                        .iter()
                        .zip(&p.center)
                        .map(|(a, b)| distance(a, b, sigma).map(|d| d * d))
                        .sum::<Result<f64>>()?;
                    let res = multiplier_and_residual(&q, masses, sigma)
                        .map(|r| r.residual_norm)
                        .unwrap_or(f64::INFINITY);
                    Ok((d2.sqrt(), res))
                })
                .collect::<Result<Vec<_>>>()?
        }
        None => Vec::new(),
    };

    let mut rows = Vec::with_capacity(p.radius_grid.len());
    for (ri, &radius) in p.radius_grid.iter().enumerate() {
        let samples: Vec<Option<(f64, DVector<f64>)>> = exec.map_range(p.sample_count, |k| {
            let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
            rng.set_stream(((ri as u64) << 32) | k as u64);
            let u = sample_ball(dim, radius, &mut rng);
            let q = chart.point(&u);
            multiplier_and_residual(&q, masses, sigma)
                .ok()
                .map(|r| (r.residual_norm, u))
        });
        let mut good: Vec<(f64, DVector<f64>)> = samples.into_iter().flatten().filter(|(r, _)| r.is_finite()).collect();
        let skipped = p.sample_count - good.len();
        good.sort_by(|a, b| a.0.total_cmp(&b.0));
        let min_residual = good.first().map_or(f64::INFINITY, |g| g.0);
        let median_residual = good.get(good.len() / 2).map_or(f64::NAN, |g| g.0);
        let starts: Vec<DVector<f64>> = good.iter().take(p.refine).map(|g| g.1.clone()).collect();
        let refined: Vec<Option<f64>> = exec.map(&starts, |u| refine_in_ball(&chart, masses, u.clone(), radius));
        let refined_min = refined.into_iter().flatten().reduce(f64::min);
        let inside: Vec<f64> = family_members
            .iter()
            .filter(|(d, _)| *d < radius)
            .map(|(_, r)| *r)
            .collect();
        let family_max = inside.iter().copied().reduce(f64::max);
        let occ_detected = refined_min.is_some_and(|r| r < 10.0 * eps_cc) || inside.iter().any(|&r| r < eps_cc);
        rows.push(ExclusionRow {
            radius,
            samples_evaluated: good.len(),
            samples_skipped: skipped,
            min_residual,
            median_residual,
            refined_min_residual: refined_min,
            family_members_inside: inside.len(),
            family_max_residual: family_max,
            occ_detected,
        });
    }

    let mut by_radius: Vec<&ExclusionRow> = rows.iter().collect();
    by_radius.sort_by(|a, b| b.radius.total_cmp(&a.radius));
    let monotonicity_violation = by_radius
        .windows(2)
        .map(|w| ((w[0].min_residual - w[1].min_residual) / w[0].min_residual).max(0.0))
        .fold(0.0, f64::max);
    let min_residual_found = rows
        .iter()
        .flat_map(|r| [Some(r.min_residual), r.refined_min_residual])
        .flatten()
        .fold(f64::INFINITY, f64::min);
    Ok(ExclusionReport {
        sigma,
        center: diag,
        quotient_dimension: dim,
        rows,
        min_residual_found,
        monotonicity_violation,
    })
}

/// `θ` values `10^{-a}` for `a` from `lo` to `hi` in `per_decade` steps per decade.
pub fn log_grid(lo_exp: f64, hi_exp: f64, per_decade: usize) -> Vec<f64> {
    let k = ((hi_exp - lo_exp) * per_decade as f64).round() as usize;
    (0..=k)
        .map(|i| 10f64.powf(-(lo_exp + i as f64 / per_decade as f64)))
        .collect()
}
