//! Geodesic ordinary central configurations on `H¹_{xw}` and on the arc
//! `S¹_{xz} ∩ 𝓜_c`.
//!
//! On each ordered component of `{I = c}` the potential has a unique,
//! nondegenerate minimum, which is the OCC for that ordering. The solver is a
//! projected Newton method on the level set with a radial retraction
//! `θ ↦ tθ`, followed by an augmented Newton polish in `(θ, λ)`.

use std::f64::consts::FRAC_PI_2;

use itertools::Itertools;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{CcError, Result};
use crate::linalg::{orthonormal_complement, restrict, symmetric_eigen};
use crate::manifold::{class_gap, distance, AmbientPoint, AnglePoint, Curvature, MassList};
use crate::parallel::Execution;
use crate::potentials::multiplier_and_residual;
use crate::tol::Tolerances;

/// Keep spherical iterates this far inside the chart boundary `|θ| = π/2`.
const CHART_MARGIN: f64 = 1e-9;

/// One ordering of the masses along the geodesic.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrderingProblem {
    pub masses: MassList,
    pub c: f64,
    pub sigma: Curvature,
    /// `ordering[k]` is the particle in position `k`, left to right.
    pub ordering: Vec<usize>,
}

/// A solved geodesic OCC. `theta` is indexed by particle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeodesicCC {
    pub sigma: Curvature,
    pub theta: Vec<f64>,
    pub lambda: f64,
    pub residual: f64,
    pub ordering: Vec<usize>,
    pub c_achieved: f64,
    pub iterations: usize,
}

impl GeodesicCC {
    pub fn angles(&self) -> Vec<AnglePoint> {
        self.theta.iter().map(|&t| AnglePoint::geodesic(t)).collect()
    }

    /// Embedding `(sin/sinh θ, 0, cos θ, 0)` resp. `(sinh θ, 0, 0, cosh θ)`.
    pub fn ambient(&self) -> Vec<AmbientPoint> {
        self.theta
            .iter()
            .map(|&t| match self.sigma {
                Curvature::Spherical => AmbientPoint::new(t.sin(), 0.0, t.cos(), 0.0),
                Curvature::Hyperbolic => AmbientPoint::new(t.sinh(), 0.0, 0.0, t.cosh()),
            })
            .collect()
    }

    pub fn max_abs_theta(&self) -> f64 {
        self.theta.iter().fold(0.0, |a, t| a.max(t.abs()))
    }
}

struct Eval1d {
    u: f64,
    grad_u: DVector<f64>,
    hess_u: DMatrix<f64>,
    i: f64,
    grad_i: DVector<f64>,
    hess_i: DVector<f64>,
}

fn inertia_1d(theta: &[f64], m: &MassList, sigma: Curvature) -> f64 {
    theta
        .iter()
        .zip(m.as_slice())
        .map(|(&t, mi)| mi * sigma.s(t).powi(2))
        .sum()
}

fn eval_1d(theta: &[f64], m: &MassList, sigma: Curvature, d_min: f64) -> Result<Eval1d> {
    let n = theta.len();
    let mut u = 0.0;
    let mut grad_u = DVector::zeros(n);
    let mut hess_u = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            let delta = theta[j] - theta[i];
            let d = delta.abs();
            if d < d_min {
                return Err(CcError::Singular { i, j, distance: d });
            }
            let (c, s, sd) = (sigma.c(d), sigma.s(d), sigma.s(delta));
            let mm = m[i] * m[j];
            u += mm * c / s;
            let s3 = s.powi(3);
            grad_u[i] += mm * sd / s3;
            grad_u[j] -= mm * sd / s3;
            let h = 2.0 * mm * c / s3;
            hess_u[(i, i)] += h;
            hess_u[(j, j)] += h;
            hess_u[(i, j)] -= h;
            hess_u[(j, i)] -= h;
        }
    }
    let i_val = inertia_1d(theta, m, sigma);
    let grad_i = DVector::from_fn(n, |k, _| m[k] * sigma.s(2.0 * theta[k]));
    let hess_i = DVector::from_fn(n, |k, _| 2.0 * m[k] * sigma.c(2.0 * theta[k]));
    Ok(Eval1d {
        u,
        grad_u,
        hess_u,
        i: i_val,
        grad_i,
        hess_i,
    })
}

fn is_ordered(theta: &[f64], ordering: &[usize], d_min: f64) -> bool {
    ordering.windows(2).all(|w| theta[w[1]] - theta[w[0]] > d_min)
}

fn chart_max(sigma: Curvature) -> f64 {
    match sigma {
        Curvature::Spherical => FRAC_PI_2 - CHART_MARGIN,
        Curvature::Hyperbolic => f64::INFINITY,
    }
}

/// Scales `θ ↦ tθ` so that `I(tθ) = c`. `None` if the level is unreachable inside the chart.
fn retract(theta: &[f64], m: &MassList, sigma: Curvature, c: f64) -> Option<Vec<f64>> {
    let tmax_abs = theta.iter().fold(0.0, |a: f64, t| a.max(t.abs()));
    if tmax_abs == 0.0 || !tmax_abs.is_finite() {
        return None;
    }
    let f = |t: f64| inertia_1d(&theta.iter().map(|x| x * t).collect::<Vec<_>>(), m, sigma) - c;
    let (mut lo, mut hi) = (0.0, 1.0);
    let cap = chart_max(sigma) / tmax_abs;
    if cap.is_finite() {
        hi = cap;
        if f(hi) < 0.0 {
            return None;
        }
    } else {
        while f(hi) < 0.0 {
            lo = hi;
            hi *= 2.0;
            if hi > 1e6 {
                return None;
            }
        }
    }
    // f is increasing in t on [0, hi]
    let mut t = 0.5 * (lo + hi);
    for _ in 0..200 {
        let ft = f(t);
        if ft > 0.0 {
            hi = t;
        } else {
            lo = t;
        }
        let df: f64 = theta
            .iter()
            .zip(m.as_slice())
            .map(|(&x, mi)| mi * x * sigma.s(2.0 * t * x))
            .sum();
        let newton = t - ft / df;
        t = if df > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (hi - lo) <= 4.0 * f64::EPSILON * hi || ft == 0.0 {
            break;
        }
    }
    Some(theta.iter().map(|x| x * t).collect())
}

fn scaled_residual(e: &Eval1d) -> (f64, f64) {
    let lambda = e.grad_u.dot(&e.grad_i) / e.grad_i.norm_squared();
    let r = &e.grad_u - &e.grad_i * lambda;
    (lambda, r.norm() / e.grad_u.norm().max(1.0))
}

fn validate(p: &OrderingProblem) -> Result<()> {
    let n = p.masses.len();
    let mut sorted = p.ordering.clone();
    sorted.sort_unstable();
    if sorted != (0..n).collect::<Vec<_>>() {
        return Err(CcError::InvalidInput(format!(
            "ordering {:?} is not a permutation of 0..{n}",
            p.ordering
        )));
    }
    if !(p.c > 0.0 && p.c.is_finite()) {
        return Err(CcError::InvalidInput(format!(
            "target inertia must be positive, got {}",
            p.c
        )));
    }
    if p.sigma == Curvature::Spherical && p.c >= p.masses.total() {
        return Err(CcError::InvalidInput(format!(
            "c = {} is not below the total mass",
            p.c
        )));
    }
    Ok(())
}

fn initial_guess(p: &OrderingProblem) -> Vec<f64> {
    let n = p.masses.len();
    let mtot = p.masses.total();
    let center: f64 = p
        .ordering
        .iter()
        .enumerate()
        .map(|(k, &i)| k as f64 * p.masses[i])
        .sum::<f64>()
        / mtot;
    let mut theta = vec![0.0; n];
    for (k, &i) in p.ordering.iter().enumerate() {
        theta[i] = (k as f64 - center) / n as f64;
    }
    // a particle sitting exactly at the center would make the retraction ignore it; harmless
    theta
}

/// Minimizes `U` on the ordered component of `{I = c}` and returns the OCC.
pub fn solve_ordering(p: &OrderingProblem) -> Result<GeodesicCC> {
    solve_ordering_with(p, &Tolerances::default())
}

pub fn solve_ordering_with(p: &OrderingProblem, tol: &Tolerances) -> Result<GeodesicCC> {
    validate(p)?;
    let (m, sigma, c) = (&p.masses, p.sigma, p.c);
    let n = m.len();
    let mut theta = retract(&initial_guess(p), m, sigma, c)
        .ok_or_else(|| CcError::Constraint(format!("level I = {c} unreachable from the initial guess")))?;
    let mut e = eval_1d(&theta, m, sigma, tol.d_min)?;
    let mut iterations = 0;
    let mut stalled = 0;
    while iterations < tol.max_iter {
        iterations += 1;
        let (lambda, res) = scaled_residual(&e);
        if res < 1e-14 {
            break;
        }
        let q = orthonormal_complement(&[e.grad_i.clone()], n);
        let hl = &e.hess_u - DMatrix::from_diagonal(&(&e.hess_i * lambda));
        let hr = restrict(&hl, &q);
        let (vals, vecs) = symmetric_eigen(&hr)?;
        let scale = vals.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1e-300);
        let rt = q.transpose() * (&e.grad_u - &e.grad_i * lambda);
        let coeff = vecs.transpose() * &rt;
        let mut step_r = DVector::zeros(n - 1);
        for k in 0..n - 1 {
            let ev = vals[k].abs().max(1e-12 * scale);
            step_r += vecs.column(k) * (-coeff[k] / ev);
        }
        let step = &q * step_r;
        let slope = rt.dot(&(q.transpose() * &step));
        let mut alpha = 1.0;
        let mut accepted = None;
        while alpha > 1e-12 {
            let trial: Vec<f64> = theta.iter().zip(step.iter()).map(|(t, s)| t + alpha * s).collect();
            if let Some(tr) = retract(&trial, m, sigma, c) {
                if is_ordered(&tr, &p.ordering, tol.d_min) && tr.iter().all(|t| t.abs() < chart_max(sigma)) {
                    if let Ok(et) = eval_1d(&tr, m, sigma, tol.d_min) {
                        let near = res < 1e-6 || scaled_residual(&et).1 < res;
                        if near || et.u <= e.u + 1e-4 * alpha * slope {
                            accepted = Some((tr, et));
                            break;
                        }
                    }
                }
            }
            alpha *= 0.5;
        }
        match accepted {
            Some((tr, et)) => {
                let (_, new_res) = scaled_residual(&et);
                if new_res >= res && res < 1e-10 {
                    stalled += 1;
                    if stalled > 3 {
                        break;
                    }
                }
                theta = tr;
                e = et;
            }
            None => {
                if res < tol.cc * 1e-2 {
                    break;
                }
                return Err(CcError::NonConvergence {
                    iterations,
                    residual: res,
                });
            }
        }
    }
    polish(&mut theta, &mut e, p, tol)?;

    if sigma == Curvature::Spherical {
        if let Some(t) = theta.iter().find(|t| t.abs() >= chart_max(sigma)) {
            return Err(CcError::Chart(format!("θ = {t} reached the chart boundary")));
        }
    }
    if !is_ordered(&theta, &p.ordering, tol.d_min) {
        return Err(CcError::Constraint("solution left the ordered component".into()));
    }
    let c_achieved = e.i;
    if (c_achieved - c).abs() / c.max(1.0) > tol.con {
        return Err(CcError::Constraint(format!("|I − c| = {:e}", (c_achieved - c).abs())));
    }
    let cc = GeodesicCC {
        sigma,
        theta,
        lambda: 0.0,
        residual: 0.0,
        ordering: p.ordering.clone(),
        c_achieved,
        iterations,
    };
    let r = multiplier_and_residual(&cc.ambient(), m, sigma)?;
    if !r.is_cc(tol.cc) {
        return Err(CcError::NonConvergence {
            iterations,
            residual: r.residual_norm,
        });
    }
    Ok(GeodesicCC {
        lambda: r.lambda,
        residual: r.residual_norm,
        ..cc
    })
}

/// Newton on `(∇U − λ∇I, I − c) = 0`; keeps an iterate only if it lowers the residual.
fn polish(theta: &mut Vec<f64>, e: &mut Eval1d, p: &OrderingProblem, tol: &Tolerances) -> Result<()> {
    let (m, sigma, c) = (&p.masses, p.sigma, p.c);
    let n = theta.len();
    let merit = |e: &Eval1d, lambda: f64| {
        let r = &e.grad_u - &e.grad_i * lambda;
        (r.norm() / e.grad_u.norm().max(1.0)).max((e.i - c).abs() / c.max(1.0))
    };
    let (mut lambda, _) = scaled_residual(e);
    let mut best = merit(e, lambda);
    for _ in 0..4 {
        let mut j = DMatrix::zeros(n + 1, n + 1);
        j.view_mut((0, 0), (n, n))
            .copy_from(&(&e.hess_u - DMatrix::from_diagonal(&(&e.hess_i * lambda))));
        for k in 0..n {
            j[(k, n)] = -e.grad_i[k];
            j[(n, k)] = e.grad_i[k];
        }
        let mut f = DVector::zeros(n + 1);
        f.rows_mut(0, n).copy_from(&(&e.grad_u - &e.grad_i * lambda));
        f[n] = e.i - c;
        let Some(dx) = j.lu().solve(&(-f)) else { break };
        let trial: Vec<f64> = (0..n).map(|k| theta[k] + dx[k]).collect();
        if !is_ordered(&trial, &p.ordering, tol.d_min) {
            break;
        }
        let Ok(et) = eval_1d(&trial, m, sigma, tol.d_min) else {
            break;
        };
        let lt = lambda + dx[n];
        let mt = merit(&et, lt);
        if mt < best {
            best = mt;
            *theta = trial;
            *e = et;
            lambda = lt;
        } else {
            break;
        }
        if dx.norm() < tol.newton {
            break;
        }
    }
    Ok(())
}

/// A class of geodesic OCCs: orderings related by the half-turn `θ ↦ −θ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeodesicClass {
    pub representative: usize,
    pub members: Vec<usize>,
}

/// All `n!` ordering solutions and their `n!/2` classes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeodesicEnumeration {
    pub masses: MassList,
    pub c: f64,
    pub sigma: Curvature,
    pub solutions: Vec<GeodesicCC>,
    pub classes: Vec<GeodesicClass>,
    /// Smallest `class_gap` between representatives of different classes.
    pub min_class_separation: f64,
    /// Largest `class_gap` between members of one class.
    pub max_within_class_gap: f64,
}

impl GeodesicEnumeration {
    pub fn representatives(&self) -> impl Iterator<Item = &GeodesicCC> {
        self.classes.iter().map(|c| &self.solutions[c.representative])
    }
}

fn labelled_distances(q: &[AmbientPoint], sigma: Curvature) -> Vec<f64> {
    let mut out = Vec::new();
    for i in 0..q.len() {
        for j in i + 1..q.len() {
            out.push(distance(&q[i], &q[j], sigma).unwrap_or(f64::NAN));
        }
    }
    out
}

/// Groups labelled configurations into classes modulo the symmetry group.
///
/// Returns the class member lists (first member is the representative).
pub(crate) fn group_into_classes(
    configs: &[Vec<AmbientPoint>],
    sigma: Curvature,
    eps_class: f64,
) -> Result<Vec<Vec<usize>>> {
    let dists: Vec<Vec<f64>> = configs.iter().map(|q| labelled_distances(q, sigma)).collect();
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for (k, q) in configs.iter().enumerate() {
        let mut home = None;
        for (ci, members) in classes.iter().enumerate() {
            let rep = members[0];
            // invariant prefilter: labelled distances agree up to the class tolerance
            let close = dists[k]
                .iter()
                .zip(&dists[rep])
                .all(|(a, b)| (a - b).abs() <= 2.0 * eps_class);
            if close && class_gap(q, &configs[rep], sigma)? < eps_class {
                home = Some(ci);
                break;
            }
        }
        match home {
            Some(ci) => classes[ci].push(k),
            None => classes.push(vec![k]),
        }
    }
    Ok(classes)
}

/// Solves every ordering and groups the solutions into classes.
pub fn enumerate_geodesic_ccs(
    masses: &MassList,
    c: f64,
    sigma: Curvature,
    exec: Execution,
) -> Result<GeodesicEnumeration> {
    enumerate_geodesic_ccs_with(masses, c, sigma, exec, &Tolerances::default())
}

pub fn enumerate_geodesic_ccs_with(
    masses: &MassList,
    c: f64,
    sigma: Curvature,
    exec: Execution,
    tol: &Tolerances,
) -> Result<GeodesicEnumeration> {
    let n = masses.len();
    let orderings: Vec<Vec<usize>> = (0..n).permutations(n).collect();
    let solved = exec.map(&orderings, |ord| {
        solve_ordering_with(
            &OrderingProblem {
                masses: masses.clone(),
                c,
                sigma,
                ordering: ord.clone(),
            },
            tol,
        )
    });
    let solutions: Vec<GeodesicCC> = solved.into_iter().collect::<Result<_>>()?;
    let configs: Vec<Vec<AmbientPoint>> = solutions.iter().map(|s| s.ambient()).collect();
    let grouped = group_into_classes(&configs, sigma, tol.class)?;
    let mut min_sep = f64::INFINITY;
    for a in 0..grouped.len() {
        for b in a + 1..grouped.len() {
            min_sep = min_sep.min(class_gap(&configs[grouped[a][0]], &configs[grouped[b][0]], sigma)?);
        }
    }
    let mut max_within: f64 = 0.0;
    for g in &grouped {
        for &k in &g[1..] {
            max_within = max_within.max(class_gap(&configs[g[0]], &configs[k], sigma)?);
        }
    }
    let classes = grouped
        .into_iter()
        .map(|members| GeodesicClass {
            representative: members[0],
            members,
        })
        .collect();
    Ok(GeodesicEnumeration {
        masses: masses.clone(),
        c,
        sigma,
        solutions,
        classes,
        min_class_separation: min_sep,
        max_within_class_gap: max_within,
    })
}

/// Chart-bound diagnostic for spherical solutions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegimeDiagnostic {
    pub c: f64,
    pub m_min: f64,
    /// `π/6` for `c < m₁/4`, `π/4` for `c < m₁/2`, none above.
    pub bound: Option<f64>,
    pub max_abs_theta: f64,
    /// `(solution index, particle, θ)` outside the bound.
    pub violations: Vec<(usize, usize, f64)>,
}

impl RegimeDiagnostic {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks `|θᵢ| < π/4` (`c < m₁/2`) or `|θᵢ| < π/6` (`c < m₁/4`), `m₁` the smallest mass.
pub fn spherical_regime_check(masses: &MassList, c: f64, solutions: &[GeodesicCC]) -> RegimeDiagnostic {
    use std::f64::consts::{FRAC_PI_4, FRAC_PI_6};
    let m_min = masses.min();
    let bound = if c < m_min / 4.0 {
        Some(FRAC_PI_6)
    } else if c < m_min / 2.0 {
        Some(FRAC_PI_4)
    } else {
        None
    };
    let mut violations = Vec::new();
    let mut max_abs_theta: f64 = 0.0;
    for (k, s) in solutions.iter().enumerate() {
        for (i, &t) in s.theta.iter().enumerate() {
            max_abs_theta = max_abs_theta.max(t.abs());
            if let Some(b) = bound {
                if t.abs() >= b {
                    violations.push((k, i, t));
                }
            }
        }
    }
    RegimeDiagnostic {
        c,
        m_min,
        bound,
        max_abs_theta,
        violations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    const H: Curvature = Curvature::Hyperbolic;
    const S: Curvature = Curvature::Spherical;

    fn problem(m: &[f64], c: f64, sigma: Curvature, ordering: &[usize]) -> OrderingProblem {
        OrderingProblem {
            masses: MassList::new(m.to_vec()).unwrap(),
            c,
            sigma,
            ordering: ordering.to_vec(),
        }
    }

    #[test]
    fn symmetric_two_body() {
        let s = solve_ordering(&problem(&[1.0, 1.0], 1.0, H, &[0, 1])).unwrap();
        let t = 0.5f64.sqrt().asinh();
        assert_abs_diff_eq!(s.theta[0], -t, epsilon = 1e-12);
        assert_abs_diff_eq!(s.theta[1], t, epsilon = 1e-12);
        // CC equation for particle 0: m₀m₁ sinh(θ₁−θ₀)/sinh³d = λ m₀ sinh 2θ₀
        let d: f64 = 2.0 * t;
        let lam = d.sinh() / d.sinh().powi(3) / (-2.0 * t).sinh();
        assert_abs_diff_eq!(s.lambda, lam, epsilon = 1e-10);
        assert!(s.lambda < 0.0);
    }

    #[test]
    fn unequal_two_body_balances_mass_moment() {
        let s = solve_ordering(&problem(&[1.0, 2.0], 1.0, H, &[0, 1])).unwrap();
        let r = (2.0 * s.theta[0]).sinh() + 2.0 * (2.0 * s.theta[1]).sinh();
        assert!(r.abs() < 1e-9);
        assert_abs_diff_eq!(s.c_achieved, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn equal_three_body_centered() {
        let s = solve_ordering(&problem(&[1.0, 1.0, 1.0], 1.0, H, &[0, 1, 2])).unwrap();
        assert!(s.theta[1].abs() < 1e-10);
        assert!(s.residual < 1e-8);
    }

    #[test]
    fn homogeneity_and_reversal() {
        let base = solve_ordering(&problem(&[0.7, 1.3, 1.1], 0.8, H, &[2, 0, 1])).unwrap();
        let scaled = solve_ordering(&problem(&[1.4, 2.6, 2.2], 1.6, H, &[2, 0, 1])).unwrap();
        for (a, b) in base.theta.iter().zip(&scaled.theta) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-9);
        }
        assert_abs_diff_eq!(scaled.lambda, 2.0 * base.lambda, epsilon = 1e-9 * base.lambda.abs());
        let rev = solve_ordering(&problem(&[0.7, 1.3, 1.1], 0.8, H, &[1, 0, 2])).unwrap();
        for (a, b) in base.theta.iter().zip(&rev.theta) {
            assert_abs_diff_eq!(*a, -b, epsilon = 1e-9);
        }
        assert_abs_diff_eq!(rev.lambda, base.lambda, epsilon = 1e-9 * base.lambda.abs());
    }

    #[test]
    fn spherical_regime_holds() {
        let m = MassList::new(vec![1.0, 1.5, 0.8]).unwrap();
        for (frac, bound) in [(0.49, std::f64::consts::FRAC_PI_4), (0.24, std::f64::consts::FRAC_PI_6)] {
            let c = frac * m.min();
            let e = enumerate_geodesic_ccs(&m, c, S, Execution::Sequential).unwrap();
            let d = spherical_regime_check(&m, c, &e.solutions);
            assert_eq!(d.bound, Some(bound));
            assert!(d.ok(), "{d:?}");
        }
    }

    #[test]
    fn no_spherical_two_body_between_masses() {
        for c in [1.0, 1.5, 2.0] {
            assert!(solve_ordering(&problem(&[1.0, 2.0], c, S, &[0, 1])).is_err(), "c = {c}");
            assert!(solve_ordering(&problem(&[1.0, 2.0], c, S, &[1, 0])).is_err(), "c = {c}");
        }
    }

    #[test]
    fn enumeration_counts() {
        let m = MassList::new(vec![0.9, 1.2, 1.7]).unwrap();
        let e = enumerate_geodesic_ccs(&m, 1.0, H, Execution::Sequential).unwrap();
        assert_eq!(e.solutions.len(), 6);
        assert_eq!(e.classes.len(), 3);
        assert!(e.min_class_separation > 1e-6);
        assert!(e.max_within_class_gap < 1e-6);
    }

    #[test]
    fn bad_ordering_rejected() {
        assert!(matches!(
            solve_ordering(&problem(&[1.0, 1.0], 1.0, H, &[0, 0])),
            Err(CcError::InvalidInput(_))
        ));
    }
}
