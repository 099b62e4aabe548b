//! Multistart search for OCC classes on `H²_{xyw}` and on `𝓜_c ⊂ S²_{xyz}`.
//!
//! Every start is refined by Levenberg–Marquardt on the augmented system
//! `F(θ, φ, λ) = (∇U − λ∇I, I − c)` in `2n + 1` unknowns, then polished with
//! SVD pseudo-inverse Newton steps (the rotation orbit makes the Jacobian
//! singular). Converged points are validated in ambient coordinates and
//! grouped into classes modulo rotation.

use std::f64::consts::{FRAC_PI_2, TAU};

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CcError, Result};
use crate::geodesic::{enumerate_geodesic_ccs_with, group_into_classes, GeodesicEnumeration};
use crate::linalg::{orthonormal_complement, pinv_solve, rank, restrict};
use crate::manifold::{
    chart_jet, class_gap, configuration_from_angles, configuration_to_angles, min_pair_distance, AmbientPoint,
    AnglePoint, Curvature, MassList,
};
use crate::parallel::Execution;
use crate::potentials::{grad_angle, hessian_angle, inertia, multiplier_and_residual};
use crate::spectral::{inertia as inertia_of, InertiaReport};
use crate::tol::{Tolerances, NEWTON_TOL, TOL_ZERO_REL};

/// Pairs closer than this in a converged solution are treated as a failed start.
const MIN_SEPARATION: f64 = 1e-6;
/// Hyperbolic iterates beyond this chart radius are abandoned.
const H_CHART_LIMIT: f64 = 25.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanarSearchConfig {
    pub masses: MassList,
    pub c: f64,
    pub sigma: Curvature,
    pub n_starts: usize,
    pub seed: u64,
    pub newton_tol: f64,
    /// Also report classes merged under the reflection `y ↦ −y`.
    pub reflection_merge: bool,
}

impl PlanarSearchConfig {
    pub fn new(masses: MassList, c: f64, sigma: Curvature, seed: u64) -> Self {
        let n_starts = 500 * masses.len();
        PlanarSearchConfig {
            masses,
            c,
            sigma,
            n_starts,
            seed,
            newton_tol: NEWTON_TOL,
            reflection_merge: true,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_starts == 0 {
            return Err(CcError::InvalidInput("n_starts must be at least 1".into()));
        }
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(CcError::InvalidInput(format!("c must be positive, got {}", self.c)));
        }
        if self.sigma == Curvature::Spherical && self.c >= self.masses.min() {
            return Err(CcError::InvalidInput(format!(
                "c = {} must lie below the smallest mass {} on the sphere",
                self.c,
                self.masses.min()
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StartKind {
    Random,
    PerturbedGeodesic,
    Polygon,
    Supplied,
}

/// A validated OCC with its class data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CcSolution {
    pub sigma: Curvature,
    pub angles: Vec<AnglePoint>,
    pub ambient: Vec<AmbientPoint>,
    pub lambda: f64,
    pub residual: f64,
    pub inertia_value: f64,
    pub geodesic: bool,
    pub class_id: usize,
    pub source: StartKind,
    /// Number of starts that converged into this class.
    pub hits: usize,
    /// Hessian of `U − λI` on the tangent of `{I = c}` modulo rotation.
    pub hessian_inertia: Option<InertiaReport>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CatalogCounts {
    pub total: usize,
    pub geodesic: usize,
    pub nongeodesic: usize,
    pub reflection_merged_total: usize,
    pub reflection_merged_nongeodesic: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeodesicMatch {
    pub enumerated_classes: usize,
    pub catalog_geodesic: usize,
    /// Catalog geodesic classes found among the enumerated ones.
    pub matched_catalog: usize,
    /// Enumerated classes found in the catalog.
    pub matched_enumerated: usize,
}

impl GeodesicMatch {
    pub fn complete(&self) -> bool {
        self.matched_catalog == self.catalog_geodesic
            && self.matched_enumerated == self.enumerated_classes
            && self.catalog_geodesic == self.enumerated_classes
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CcCatalog {
    pub config: PlanarSearchConfig,
    pub classes: Vec<CcSolution>,
    pub counts: CatalogCounts,
    pub converged_starts: usize,
    pub failed_starts: usize,
    /// `class_gap` lower bound between distinct representatives.
    pub min_class_separation: f64,
    pub geodesic_match: Option<GeodesicMatch>,
    /// Classes with a zero eigenvalue after the rotation quotient.
    pub degenerate_classes: Vec<usize>,
}

/// Options for a single refinement.
#[derive(Clone, Copy, Debug)]
pub struct RefineOptions {
    pub max_iter: usize,
    pub newton_tol: f64,
}

impl Default for RefineOptions {
    fn default() -> Self {
        RefineOptions {
            max_iter: 200,
            newton_tol: NEWTON_TOL,
        }
    }
}

fn in_chart(x: &[f64], sigma: Curvature) -> bool {
    let lim = match sigma {
        Curvature::Spherical => FRAC_PI_2 - 1e-9,
        Curvature::Hyperbolic => H_CHART_LIMIT,
    };
    x.iter().all(|v| v.is_finite() && v.abs() < lim)
}

fn unpack(x: &DVector<f64>, n: usize) -> Vec<AnglePoint> {
    (0..n).map(|k| AnglePoint::new(x[k], x[n + k])).collect()
}

fn residual_and_jacobian(
    x: &DVector<f64>,
    m: &MassList,
    sigma: Curvature,
    c: f64,
    with_jac: bool,
) -> Result<(DVector<f64>, Option<DMatrix<f64>>)> {
    let n = m.len();
    let angles = unpack(x, n);
    let lam = x[2 * n];
    let e = grad_angle(&angles, m, sigma)?;
    let mut f = DVector::zeros(2 * n + 1);
    for k in 0..2 * n {
        f[k] = e.grad_u[k] - lam * e.grad_i[k];
    }
    f[2 * n] = e.i - c;
    if !with_jac {
        return Ok((f, None));
    }
    let h = hessian_angle(&angles, m, sigma, lam)?;
    let mut j = DMatrix::zeros(2 * n + 1, 2 * n + 1);
    j.view_mut((0, 0), (2 * n, 2 * n)).copy_from(&h);
    for k in 0..2 * n {
        j[(k, 2 * n)] = -e.grad_i[k];
        j[(2 * n, k)] = e.grad_i[k];
    }
    Ok((f, Some(j)))
}

fn merit(f: &DVector<f64>) -> f64 {
    f.norm_squared()
}

/// Refines a start to a critical point of `U − λI` on `{I = c}` in chart coordinates.
pub fn refine(
    start: &[AnglePoint],
    m: &MassList,
    sigma: Curvature,
    c: f64,
    opts: RefineOptions,
) -> Result<Vec<AnglePoint>> {
    let n = m.len();
    if start.len() != n {
        return Err(CcError::InvalidInput("start has the wrong number of particles".into()));
    }
    let e0 = grad_angle(start, m, sigma)?;
    let gi2: f64 = e0.grad_i.iter().map(|v| v * v).sum();
    if gi2 == 0.0 {
        return Err(CcError::DegenerateInertiaGradient);
    }
    let lam0 = e0.grad_u.iter().zip(&e0.grad_i).map(|(a, b)| a * b).sum::<f64>() / gi2;
    let mut x = DVector::zeros(2 * n + 1);
    for k in 0..n {
        x[k] = start[k].theta;
        x[n + k] = start[k].phi;
    }
    x[2 * n] = lam0;

    let (mut f, mut j) = residual_and_jacobian(&x, m, sigma, c, true)?;
    let mut fm = merit(&f);
    let jtj0 = j.as_ref().map(|j| j.transpose() * j).expect("jacobian requested");
    let mut mu = 1e-3 * jtj0.diagonal().max().max(1e-12);
    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.max_iter {
        iterations += 1;
        let jac = j.as_ref().expect("jacobian present");
        let jtj = jac.transpose() * jac;
        let g = jac.transpose() * &f;
        let lhs = &jtj + DMatrix::identity(2 * n + 1, 2 * n + 1) * mu;
        let Some(chol) = lhs.cholesky() else {
            mu *= 10.0;
            continue;
        };
        let dx = chol.solve(&(-&g));
        let trial = &x + &dx;
        let ok = in_chart(&trial.as_slice()[..2 * n], sigma);
        let evaluated = if ok {
            residual_and_jacobian(&trial, m, sigma, c, true).ok()
        } else {
            None
        };
        match evaluated {
            Some((ft, jt)) if merit(&ft) < fm => {
                x = trial;
                f = ft;
                j = jt;
                fm = merit(&f);
                mu = (mu / 3.0).max(1e-30);
                if dx.norm() < opts.newton_tol * (1.0 + x.norm()) || fm < 1e-30 {
                    converged = true;
                    break;
                }
            }
            _ => {
                mu *= 4.0;
                if mu > 1e20 {
                    break;
                }
            }
        }
    }
    // pseudo-inverse Newton polish across the rank-deficient rotation direction
    for _ in 0..4 {
        let jac = j.as_ref().expect("jacobian present");
        let Ok(dx) = pinv_solve(jac, &(-&f), 1e-13) else { break };
        let trial = &x + &dx;
        if !in_chart(&trial.as_slice()[..2 * n], sigma) {
            break;
        }
        let Ok((ft, jt)) = residual_and_jacobian(&trial, m, sigma, c, true) else {
            break;
        };
        if merit(&ft) >= fm {
            break;
        }
        x = trial;
        f = ft;
        j = jt;
        fm = merit(&f);
        converged = true;
    }
    if !converged && fm.sqrt() > 1e-10 {
        return Err(CcError::NonConvergence {
            iterations,
            residual: fm.sqrt(),
        });
    }
    Ok(unpack(&x, n))
}

/// Geodesic test: the `n × 3` matrix of planar coordinates has rank ≤ 2.
pub fn is_geodesic(q: &[AmbientPoint], sigma: Curvature) -> bool {
    if q.len() <= 2 {
        return true;
    }
    let third = match sigma {
        Curvature::Hyperbolic => 3,
        Curvature::Spherical => 2,
    };
    let m = DMatrix::from_fn(q.len(), 3, |r, c| if c < 2 { q[r].0[c] } else { q[r].0[third] });
    rank(&m, 1e-8) <= 2
}

/// Chart vector of the `xy`-rotation orbit, `(δθ, δφ)`, from `ξq = (−y, x, 0, 0)`.
pub fn orbit_direction(angles: &[AnglePoint], sigma: Curvature) -> DVector<f64> {
    let n = angles.len();
    let mut v = DVector::zeros(2 * n);
    for (k, p) in angles.iter().enumerate() {
        let jet = chart_jet(p, sigma);
        let xi = [-jet.q[1], jet.q[0], 0.0, 0.0];
        let e = |a: &[f64; 4], b: &[f64; 4]| a.iter().zip(b).map(|(u, w)| u * w).sum::<f64>();
        let g = nalgebra::Matrix2::new(
            e(&jet.d1[0], &jet.d1[0]),
            e(&jet.d1[0], &jet.d1[1]),
            e(&jet.d1[1], &jet.d1[0]),
            e(&jet.d1[1], &jet.d1[1]),
        );
        let rhs = nalgebra::Vector2::new(e(&jet.d1[0], &xi), e(&jet.d1[1], &xi));
        let sol = g.lu().solve(&rhs).unwrap_or_else(nalgebra::Vector2::zeros);
        v[k] = sol[0];
        v[n + k] = sol[1];
    }
    v
}

/// Inertia of the Hessian of `U − λI` on `∇I^⊥ ∩ orbit^⊥` (the tangent of `{I = c}/S¹`).
pub fn quotient_hessian_inertia(
    angles: &[AnglePoint],
    m: &MassList,
    sigma: Curvature,
    lambda: f64,
    tol_zero_rel: f64,
) -> Result<InertiaReport> {
    let n = angles.len();
    let h = hessian_angle(angles, m, sigma, lambda)?;
    let e = grad_angle(angles, m, sigma)?;
    let gi = DVector::from_vec(e.grad_i);
    let q = orthonormal_complement(&[gi, orbit_direction(angles, sigma)], 2 * n);
    inertia_of(&restrict(&h, &q), tol_zero_rel)
}

/// Validates a refined point and packages it as a solution (class id unset).
pub fn validate_solution(
    angles: Vec<AnglePoint>,
    m: &MassList,
    sigma: Curvature,
    c: f64,
    tol: &Tolerances,
    source: StartKind,
) -> Result<CcSolution> {
    let ambient = configuration_from_angles(&angles, sigma)?;
    let dmin = min_pair_distance(&ambient, sigma)?;
    if dmin < MIN_SEPARATION {
        return Err(CcError::Singular {
            i: 0,
            j: 0,
            distance: dmin,
        });
    }
    let r = multiplier_and_residual(&ambient, m, sigma)?;
    if !r.is_cc(tol.cc) {
        return Err(CcError::NonConvergence {
            iterations: 0,
            residual: r.residual_norm,
        });
    }
    let i_val = inertia(&ambient, m);
    if (i_val - c).abs() / c.max(1.0) > tol.con {
        return Err(CcError::Constraint(format!("|I − c| = {:e}", (i_val - c).abs())));
    }
    Ok(CcSolution {
        sigma,
        geodesic: is_geodesic(&ambient, sigma),
        angles,
        ambient,
        lambda: r.lambda,
        residual: r.residual_norm,
        inertia_value: i_val,
        class_id: 0,
        source,
        hits: 1,
        hessian_inertia: None,
    })
}

/// Scales the planar part `(x, y)` so that `I = c`; `None` if this leaves the cap.
fn scale_to_level(xy: &[(f64, f64)], m: &MassList, sigma: Curvature, c: f64) -> Option<Vec<AnglePoint>> {
    let i0: f64 = xy
        .iter()
        .zip(m.as_slice())
        .map(|(p, mi)| mi * (p.0 * p.0 + p.1 * p.1))
        .sum();
    if i0 <= 0.0 {
        return None;
    }
    let t = (c / i0).sqrt();
    xy.iter()
        .map(|&(x, y)| {
            let (x, y) = (x * t, y * t);
            let q = match sigma {
                Curvature::Hyperbolic => AmbientPoint::new(x, y, 0.0, (1.0 + x * x + y * y).sqrt()),
                Curvature::Spherical => {
                    let z2 = 1.0 - x * x - y * y;
                    if z2 <= 1e-6 {
                        return None;
                    }
                    AmbientPoint::new(x, y, z2.sqrt(), 0.0)
                }
            };
            crate::manifold::point_to_angles(&q, sigma).ok()
        })
        .collect::<Option<Vec<_>>>()
        .filter(|a| a.iter().all(|p| in_chart(&[p.theta, p.phi], sigma)))
}

fn start_rng(seed: u64, k: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k as u64);
    rng
}

fn make_start(
    k: usize,
    cfg: &PlanarSearchConfig,
    geodesic: &GeodesicEnumeration,
) -> Option<(Vec<AnglePoint>, StartKind)> {
    let n = cfg.masses.len();
    let mut rng = start_rng(cfg.seed, k);
    let kind = match k % 5 {
        0 => StartKind::PerturbedGeodesic,
        1 => StartKind::Polygon,
        _ => StartKind::Random,
    };
    let xy: Vec<(f64, f64)> = match kind {
        StartKind::Random => {
            let strata = 16;
            let s = (k / 5) % strata;
            (0..n)
                .map(|i| {
                    let ang = if i == 0 {
                        TAU * (s as f64 + rng.gen::<f64>()) / strata as f64
                    } else {
                        rng.gen_range(0.0..TAU)
                    };
                    let r = rng.gen::<f64>().sqrt();
                    (r * ang.cos(), r * ang.sin())
                })
                .collect()
        }
        StartKind::Polygon => {
            let mut labels: Vec<usize> = (0..n).collect();
            labels.shuffle(&mut rng);
            let centered = n >= 4 && rng.gen_bool(0.3);
            let ring = if centered { n - 1 } else { n };
            let rot = rng.gen_range(0.0..TAU);
            let mut pts = vec![(0.0, 0.0); n];
            for (slot, &lab) in labels.iter().enumerate() {
                pts[lab] = if slot < ring {
                    let a = rot + TAU * slot as f64 / ring as f64 + 0.05 * rng.gen_range(-1.0..1.0);
                    let r = 1.0 + 0.05 * rng.gen_range(-1.0..1.0);
                    (r * a.cos(), r * a.sin())
                } else {
                    (0.02 * rng.gen_range(-1.0..1.0), 0.02 * rng.gen_range(-1.0..1.0))
                };
            }
            pts
        }
        StartKind::PerturbedGeodesic | StartKind::Supplied => {
            let s = geodesic.solutions.get((k / 5) % geodesic.solutions.len().max(1))?;
            let rot = rng.gen_range(0.0..TAU);
            let amp = rng.gen_range(0.0..0.5);
            s.ambient()
                .iter()
                .map(|p| {
                    let (x, y) = (p.x() + 0.05 * rng.gen_range(-1.0..1.0), amp * rng.gen_range(-1.0..1.0));
                    (x * rot.cos() - y * rot.sin(), x * rot.sin() + y * rot.cos())
                })
                .collect()
        }
    };
    scale_to_level(&xy, &cfg.masses, cfg.sigma, cfg.c).map(|a| (a, kind))
}

fn reflect(q: &[AmbientPoint]) -> Vec<AmbientPoint> {
    q.iter()
        .map(|p| AmbientPoint::new(p.x(), -p.y(), p.z(), p.w()))
        .collect()
}

/// Runs the multistart search and groups the results into classes.
pub fn multistart_solve(cfg: &PlanarSearchConfig, exec: Execution) -> Result<CcCatalog> {
    multistart_solve_with(cfg, exec, &Tolerances::default())
}

pub fn multistart_solve_with(cfg: &PlanarSearchConfig, exec: Execution, tol: &Tolerances) -> Result<CcCatalog> {
    cfg.validate()?;
    let (m, sigma, c) = (&cfg.masses, cfg.sigma, cfg.c);
    let geodesic = enumerate_geodesic_ccs_with(m, c, sigma, exec, tol).ok();
    let seed_geo = match &geodesic {
        Some(g) => g.clone(),
        None => GeodesicEnumeration {
            masses: m.clone(),
            c,
            sigma,
            solutions: Vec::new(),
            classes: Vec::new(),
            min_class_separation: f64::INFINITY,
            max_within_class_gap: 0.0,
        },
    };
    let opts = RefineOptions {
        max_iter: tol.max_iter,
        newton_tol: cfg.newton_tol,
    };
    let outcomes = exec.map_range(cfg.n_starts, |k| {
        let (start, kind) = make_start(k, cfg, &seed_geo)?;
        let refined = refine(&start, m, sigma, c, opts).ok()?;
        validate_solution(refined, m, sigma, c, tol, kind).ok()
    });
    let failed_starts = outcomes.iter().filter(|o| o.is_none()).count();
    let found: Vec<CcSolution> = outcomes.into_iter().flatten().collect();
    let configs: Vec<Vec<AmbientPoint>> = found.iter().map(|s| s.ambient.clone()).collect();
    let grouped = group_into_classes(&configs, sigma, tol.class)?;

    let reps: Vec<CcSolution> = grouped
        .iter()
        .enumerate()
        .map(|(id, members)| {
            // representative: smallest residual among the members
            let best = *members
                .iter()
                .min_by(|&&a, &&b| found[a].residual.total_cmp(&found[b].residual))
                .expect("class has members");
            let mut s = found[best].clone();
            s.class_id = id;
            s.hits = members.len();
            s.source = found[members[0]].source;
            s
        })
        .collect();
    let mut classes = exec.map(&reps, |s| {
        let mut s = s.clone();
        s.hessian_inertia = quotient_hessian_inertia(&s.angles, m, sigma, s.lambda, tol.tol_zero_rel).ok();
        s
    });
    classes.sort_by(|a, b| {
        a.geodesic
            .cmp(&b.geodesic)
            .reverse()
            .then(a.lambda.total_cmp(&b.lambda))
    });
    for (id, s) in classes.iter_mut().enumerate() {
        s.class_id = id;
    }

    let mut min_sep = f64::INFINITY;
    for a in 0..classes.len() {
        for b in a + 1..classes.len() {
            min_sep = min_sep.min(class_gap(&classes[a].ambient, &classes[b].ambient, sigma)?);
        }
    }

    // reflection y ↦ −y merges mirror-image classes
    let mut merged_of: Vec<usize> = (0..classes.len()).collect();
    if cfg.reflection_merge {
        for a in 0..classes.len() {
            if merged_of[a] != a {
                continue;
            }
            let mirror = reflect(&classes[a].ambient);
            for b in a + 1..classes.len() {
                if merged_of[b] == b && class_gap(&mirror, &classes[b].ambient, sigma)? < tol.class {
                    merged_of[b] = a;
                }
            }
        }
    }
    let geo_count = classes.iter().filter(|s| s.geodesic).count();
    let refl_total = (0..classes.len()).filter(|&k| merged_of[k] == k).count();
    let refl_nongeo = (0..classes.len())
        .filter(|&k| merged_of[k] == k && !classes[k].geodesic)
        .count();
    let counts = CatalogCounts {
        total: classes.len(),
        geodesic: geo_count,
        nongeodesic: classes.len() - geo_count,
        reflection_merged_total: refl_total,
        reflection_merged_nongeodesic: refl_nongeo,
    };

    let geodesic_match = match &geodesic {
        Some(g) => Some(match_geodesic(&classes, g, tol.class)?),
        None => None,
    };
    let degenerate_classes = classes
        .iter()
        .filter(|s| s.hessian_inertia.as_ref().map_or(true, |h| h.triple.n0 > 0))
        .map(|s| s.class_id)
        .collect();
    Ok(CcCatalog {
        config: cfg.clone(),
        converged_starts: found.len(),
        failed_starts,
        classes,
        counts,
        min_class_separation: min_sep,
        geodesic_match,
        degenerate_classes,
    })
}

fn match_geodesic(classes: &[CcSolution], g: &GeodesicEnumeration, eps_class: f64) -> Result<GeodesicMatch> {
    let sigma = g.sigma;
    let enumerated: Vec<Vec<AmbientPoint>> = g.representatives().map(|s| s.ambient()).collect();
    let catalog_geo: Vec<&CcSolution> = classes.iter().filter(|s| s.geodesic).collect();
    let mut matched_catalog = 0;
    for s in &catalog_geo {
        let mut hit = false;
        for e in &enumerated {
            if class_gap(&s.ambient, e, sigma)? < eps_class {
                hit = true;
                break;
            }
        }
        matched_catalog += usize::from(hit);
    }
    let mut matched_enumerated = 0;
    for e in &enumerated {
        let mut hit = false;
        for s in &catalog_geo {
            if class_gap(&s.ambient, e, sigma)? < eps_class {
                hit = true;
                break;
            }
        }
        matched_enumerated += usize::from(hit);
    }
    Ok(GeodesicMatch {
        enumerated_classes: enumerated.len(),
        catalog_geodesic: catalog_geo.len(),
        matched_catalog,
        matched_enumerated,
    })
}

/// Critical values `{Σ εᵢmᵢ : εᵢ ∈ {0, 1}}` of `I` on `(S³)ⁿ`, sorted and deduplicated.
pub fn critical_values_i(masses: &MassList) -> Vec<f64> {
    let n = masses.len();
    let mut v: Vec<f64> = (0u64..1 << n)
        .map(|mask| (0..n).filter(|&k| mask >> k & 1 == 1).map(|k| masses[k]).sum())
        .collect();
    v.sort_by(f64::total_cmp);
    v.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs().max(1.0));
    v
}

/// One point of the degenerate two-body family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegenerateSample {
    pub theta: [f64; 2],
    pub lambda: f64,
    pub residual: f64,
    pub inertia_value: f64,
    pub inertia: InertiaReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegenerateReport {
    pub mass: f64,
    pub samples: Vec<DegenerateSample>,
    /// `c = m − δ`: the symmetric OCC and its quotient inertia.
    pub perturbed_delta: f64,
    pub perturbed_inertia: Option<InertiaReport>,
    pub perturbed_residual: Option<f64>,
}

/// Equal masses `m` on `S²` at `c = m`: the family `θ₂ = θ₁ + π/2`, `θ₁ ∈ (−π/2, 0)`.
///
/// Each member has `d₁₂ = π/2`, `I = m` and `λ = m / sin 2θ₁`.
pub fn degenerate_two_body_probe(mass: f64, samples: usize) -> Result<DegenerateReport> {
    let m = MassList::equal(2, mass)?;
    let sigma = Curvature::Spherical;
    let mut out = Vec::with_capacity(samples);
    for k in 0..samples {
        let t1 = -FRAC_PI_2 * (k as f64 + 1.0) / (samples as f64 + 1.0);
        let theta = [t1, t1 + FRAC_PI_2];
        let angles = [AnglePoint::geodesic(theta[0]), AnglePoint::geodesic(theta[1])];
        let q = configuration_from_angles(&angles, sigma)?;
        let r = multiplier_and_residual(&q, &m, sigma)?;
        let inertia_rep = quotient_hessian_inertia(&angles, &m, sigma, r.lambda, TOL_ZERO_REL)?;
        out.push(DegenerateSample {
            theta,
            lambda: r.lambda,
            residual: r.residual_norm,
            inertia_value: inertia(&q, &m),
            inertia: inertia_rep,
        });
    }
    let delta = 1e-3 * mass;
    let t = ((mass - delta) / (2.0 * mass)).sqrt().asin();
    let sym = [AnglePoint::geodesic(-t), AnglePoint::geodesic(t)];
    let q = configuration_from_angles(&sym, sigma)?;
    let (pi, pr) = match multiplier_and_residual(&q, &m, sigma) {
        Ok(r) => (
            quotient_hessian_inertia(&sym, &m, sigma, r.lambda, TOL_ZERO_REL).ok(),
            Some(r.residual_norm),
        ),
        Err(_) => (None, None),
    };
    Ok(DegenerateReport {
        mass,
        samples: out,
        perturbed_delta: delta,
        perturbed_inertia: pi,
        perturbed_residual: pr,
    })
}

/// Three-body test on `S²_{xyz}`: `Σmzx = Σmzy = 0` and `z ∝ (sin³d₂₃, sin³d₁₃, sin³d₁₂)`.
pub fn three_body_s3_criterion(q: &[AmbientPoint], masses: &MassList, tol: f64) -> Result<bool> {
    if q.len() != 3 || masses.len() != 3 {
        return Err(CcError::InvalidInput("the criterion applies to three bodies".into()));
    }
    if q.iter().any(|p| p.w().abs() > crate::tol::EPS_MFLD) {
        return Err(CcError::InvalidInput("configuration must lie in S²_xyz".into()));
    }
    let sigma = Curvature::Spherical;
    let d = |i: usize, j: usize| crate::manifold::distance(&q[i], &q[j], sigma);
    let s = [d(1, 2)?.sin().powi(3), d(0, 2)?.sin().powi(3), d(0, 1)?.sin().powi(3)];
    let z = [q[0].z(), q[1].z(), q[2].z()];
    let mtot = masses.total();
    let zx: f64 = (0..3).map(|k| masses[k] * z[k] * q[k].x()).sum();
    let zy: f64 = (0..3).map(|k| masses[k] * z[k] * q[k].y()).sum();
    let ss: f64 = s.iter().map(|v| v * v).sum();
    let k = z.iter().zip(&s).map(|(a, b)| a * b).sum::<f64>() / ss;
    let perp = (0..3).map(|i| (z[i] - k * s[i]).powi(2)).sum::<f64>().sqrt();
    let znorm = z.iter().map(|v| v * v).sum::<f64>().sqrt();
    Ok(zx.abs() < tol * mtot && zy.abs() < tol * mtot && perp < tol * znorm.max(1e-300))
}

/// Equal-mass equilateral triangle centred on the pole at polar radius `r`.
pub fn equilateral_triangle(r: f64, sigma: Curvature, rotation: f64) -> Result<Vec<AmbientPoint>> {
    (0..3)
        .map(|k| {
            let a = rotation + TAU * k as f64 / 3.0;
            let (x, y) = (r * a.cos(), r * a.sin());
            match sigma {
                Curvature::Hyperbolic => Ok(AmbientPoint::new(x, y, 0.0, (1.0 + r * r).sqrt())),
                Curvature::Spherical if r < 1.0 => Ok(AmbientPoint::new(x, y, (1.0 - r * r).sqrt(), 0.0)),
                Curvature::Spherical => Err(CcError::Chart(format!("polar radius {r} leaves the cap"))),
            }
        })
        .collect()
}

/// Recovers angles of a planar configuration, e.g. to refine it again.
pub fn angles_of(q: &[AmbientPoint], sigma: Curvature) -> Result<Vec<AnglePoint>> {
    configuration_to_angles(q, sigma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn critical_values_examples() {
        let v = critical_values_i(&MassList::new(vec![1.0, 2.0]).unwrap());
        assert_eq!(v, vec![0.0, 1.0, 2.0, 3.0]);
        let v = critical_values_i(&MassList::new(vec![1.0, 1.0, 1.0]).unwrap());
        assert_eq!(v, vec![0.0, 1.0, 2.0, 3.0]);
        let v = critical_values_i(&MassList::new(vec![0.5, 1.25]).unwrap());
        assert_eq!(v, vec![0.0, 0.5, 1.25, 1.75]);
    }

    #[test]
    fn equilateral_is_cc_at_any_level() {
        let m = MassList::equal(3, 1.0).unwrap();
        for r in [0.1, 0.7, 2.5] {
            let q = equilateral_triangle(r, Curvature::Hyperbolic, 0.3).unwrap();
            let res = multiplier_and_residual(&q, &m, Curvature::Hyperbolic).unwrap();
            assert!(res.residual_norm < 1e-12);
            assert!(res.lambda < 0.0);
        }
    }

    #[test]
    fn refine_recovers_rotated_geodesic() {
        let m = MassList::new(vec![1.0, 1.3, 0.8]).unwrap();
        let sigma = Curvature::Hyperbolic;
        let g = crate::geodesic::solve_ordering(&crate::geodesic::OrderingProblem {
            masses: m.clone(),
            c: 1.0,
            sigma,
            ordering: vec![0, 1, 2],
        })
        .unwrap();
        let rotated =
            crate::manifold::apply_symmetry(&crate::SymmetryElement::new(0.9, 0.0), &g.ambient(), sigma).unwrap();
        let start: Vec<AnglePoint> = angles_of(&rotated, sigma)
            .unwrap()
            .iter()
            .map(|p| AnglePoint::new(p.theta + 0.01, p.phi - 0.02))
            .collect();
        let a = refine(&start, &m, sigma, 1.0, RefineOptions::default()).unwrap();
        let s = validate_solution(a, &m, sigma, 1.0, &Tolerances::default(), StartKind::Supplied).unwrap();
        assert!(s.geodesic);
        assert!(class_gap(&s.ambient, &g.ambient(), sigma).unwrap() < 1e-6);
        assert_abs_diff_eq!(s.lambda, g.lambda, epsilon = 1e-8);
    }

    #[test]
    fn three_body_criterion_cases() {
        let m = MassList::equal(3, 1.0).unwrap();
        let q = equilateral_triangle(0.4, Curvature::Spherical, 0.2).unwrap();
        assert!(three_body_s3_criterion(&q, &m, 1e-8).unwrap());
        let unequal = MassList::new(vec![1.0, 1.5, 0.7]).unwrap();
        assert!(!three_body_s3_criterion(&q, &unequal, 1e-8).unwrap());
        let mut p = q.clone();
        p[0] = AmbientPoint::new(p[0].x() + 1e-3, p[0].y(), p[0].z(), 0.0).normalized(Curvature::Spherical);
        assert!(!three_body_s3_criterion(&p, &m, 1e-8).unwrap());
    }

    #[test]
    fn degenerate_family() {
        let r = degenerate_two_body_probe(1.0, 20).unwrap();
        assert_eq!(r.samples.len(), 20);
        for s in &r.samples {
            assert!(s.residual < 1e-8, "{s:?}");
            assert_eq!(s.inertia.triple, crate::linalg::InertiaTriple::new(1, 1, 0), "{s:?}");
            assert_abs_diff_eq!(s.inertia_value, 1.0, epsilon = 1e-12);
        }
        assert_eq!(r.perturbed_inertia.unwrap().triple.n0, 0);
    }
}
