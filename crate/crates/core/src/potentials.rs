//! Cotangent potential, moment of inertia, and their derivatives.
//!
//! With `C = cos d` (`cosh d`) and `S = sin d` (`sinh d`) the pair term is
//! `g = C/S`. Regarded as a function of `C = σ qᵢ·qⱼ` it satisfies
//! `g′ = σ/S³` and `g″ = 3C/S⁵` for both signs of the curvature, which is how
//! the chart derivatives below are assembled.
//!
//! Angle-coordinate vectors are laid out as `(θ₁, …, θₙ, φ₁, …, φₙ)`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{CcError, Result};
use crate::manifold::{chart_jet, dot4, pair_trig, AmbientPoint, AnglePoint, ChartJet, Curvature, MassList};

/// Values and chart gradients of `U` and `I`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PotentialEval {
    pub u: f64,
    pub i: f64,
    pub grad_u: Vec<f64>,
    pub grad_i: Vec<f64>,
}

/// Least-squares multiplier and the residual of `∇U = λ∇I`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CcResidual {
    pub lambda: f64,
    /// `‖∇U − λ∇I‖ / max(1, ‖∇U‖)`.
    pub residual_norm: f64,
    /// Unscaled `‖∇U − λ∇I‖`.
    pub raw_norm: f64,
    pub grad_u_norm: f64,
    /// Ambient tangent vectors `∇ᵢU − λ∇ᵢI`.
    pub per_particle: Vec<[f64; 4]>,
}

impl CcResidual {
    pub fn is_cc(&self, eps_cc: f64) -> bool {
        self.residual_norm < eps_cc
    }
}

fn check_sizes(n: usize, m: &MassList) -> Result<()> {
    if n != m.len() {
        return Err(CcError::InvalidInput(format!("{n} positions but {} masses", m.len())));
    }
    Ok(())
}

/// `U = Σ_{i<j} mᵢmⱼ cot d_ij` (`coth` on `H³`).
pub fn potential(q: &[AmbientPoint], m: &MassList, sigma: Curvature) -> Result<f64> {
    check_sizes(q.len(), m)?;
    let mut u = 0.0;
    for i in 0..q.len() {
        for j in i + 1..q.len() {
            let t = pair_trig(&q[i], &q[j], sigma, i, j)?;
            u += m[i] * m[j] * t.c / t.s;
        }
    }
    Ok(u)
}

/// `I = Σ mᵢ(xᵢ² + yᵢ²)`.
pub fn inertia(q: &[AmbientPoint], m: &MassList) -> f64 {
    q.iter()
        .zip(m.as_slice())
        .map(|(p, mi)| mi * (p.x() * p.x() + p.y() * p.y()))
        .sum()
}

fn jets(angles: &[AnglePoint], sigma: Curvature) -> Result<Vec<ChartJet>> {
    if sigma == Curvature::Spherical {
        // validates the open cap
        for p in angles {
            crate::manifold::angles_to_point(p, sigma)?;
        }
    }
    Ok(angles.iter().map(|p| chart_jet(p, sigma)).collect())
}

/// `U`, `I` and their gradients in angle coordinates.
pub fn grad_angle(angles: &[AnglePoint], m: &MassList, sigma: Curvature) -> Result<PotentialEval> {
    let n = angles.len();
    check_sizes(n, m)?;
    let js = jets(angles, sigma)?;
    let sg = sigma.sigma();
    let mut u = 0.0;
    let mut grad_u = vec![0.0; 2 * n];
    for i in 0..n {
        for j in i + 1..n {
            let t = pair_trig(&AmbientPoint(js[i].q), &AmbientPoint(js[j].q), sigma, i, j)?;
            let mm = m[i] * m[j];
            u += mm * t.c / t.s;
            let g1 = sg / t.s.powi(3);
            for a in 0..2 {
                grad_u[a * n + i] += mm * g1 * sg * dot4(&js[i].d1[a], &js[j].q, sigma);
                grad_u[a * n + j] += mm * g1 * sg * dot4(&js[i].q, &js[j].d1[a], sigma);
            }
        }
    }
    let mut i_val = 0.0;
    let mut grad_i = vec![0.0; 2 * n];
    for (k, jet) in js.iter().enumerate() {
        let (x, y) = (jet.q[0], jet.q[1]);
        i_val += m[k] * (x * x + y * y);
        for a in 0..2 {
            grad_i[a * n + k] = 2.0 * m[k] * (x * jet.d1[a][0] + y * jet.d1[a][1]);
        }
    }
    Ok(PotentialEval {
        u,
        i: i_val,
        grad_u,
        grad_i,
    })
}

/// Analytic Hessian of `U` in angle coordinates.
pub fn hessian_u(angles: &[AnglePoint], m: &MassList, sigma: Curvature) -> Result<DMatrix<f64>> {
    let n = angles.len();
    check_sizes(n, m)?;
    let js = jets(angles, sigma)?;
    let sg = sigma.sigma();
    let mut h = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in i + 1..n {
            let (ji, jj) = (&js[i], &js[j]);
            let t = pair_trig(&AmbientPoint(ji.q), &AmbientPoint(jj.q), sigma, i, j)?;
            let mm = m[i] * m[j];
            let g1 = sg / t.s.powi(3);
            let g2 = 3.0 * t.c / t.s.powi(5);
            let di = [sg * dot4(&ji.d1[0], &jj.q, sigma), sg * dot4(&ji.d1[1], &jj.q, sigma)];
            let dj = [sg * dot4(&ji.q, &jj.d1[0], sigma), sg * dot4(&ji.q, &jj.d1[1], sigma)];
            for a in 0..2 {
                for b in 0..2 {
                    let (ia, ib, ja, jb) = (a * n + i, b * n + i, a * n + j, b * n + j);
                    h[(ia, ib)] += mm * (g2 * di[a] * di[b] + g1 * sg * dot4(&ji.d2[a][b], &jj.q, sigma));
                    h[(ja, jb)] += mm * (g2 * dj[a] * dj[b] + g1 * sg * dot4(&ji.q, &jj.d2[a][b], sigma));
                    let cross = mm * (g2 * di[a] * dj[b] + g1 * sg * dot4(&ji.d1[a], &jj.d1[b], sigma));
                    h[(ia, jb)] += cross;
                    h[(jb, ia)] += cross;
                }
            }
        }
    }
    Ok(h)
}

/// Analytic Hessian of `I` in angle coordinates (block diagonal per particle).
pub fn hessian_i(angles: &[AnglePoint], m: &MassList, sigma: Curvature) -> Result<DMatrix<f64>> {
    let n = angles.len();
    check_sizes(n, m)?;
    let js = jets(angles, sigma)?;
    let mut h = DMatrix::zeros(2 * n, 2 * n);
    for (k, jet) in js.iter().enumerate() {
        let (x, y) = (jet.q[0], jet.q[1]);
        for a in 0..2 {
            for b in 0..2 {
                let (pa, pb, pab) = (&jet.d1[a], &jet.d1[b], &jet.d2[a][b]);
                h[(a * n + k, b * n + k)] = 2.0 * m[k] * (pa[0] * pb[0] + pa[1] * pb[1] + x * pab[0] + y * pab[1]);
            }
        }
    }
    Ok(h)
}

/// Hessian of `U − λI` in angle coordinates.
pub fn hessian_angle(angles: &[AnglePoint], m: &MassList, sigma: Curvature, lambda: f64) -> Result<DMatrix<f64>> {
    Ok(hessian_u(angles, m, sigma)? - hessian_i(angles, m, sigma)? * lambda)
}

/// Riemannian gradients `(∇U, ∇I)` as ambient tangent vectors per particle.
pub fn ambient_gradients(q: &[AmbientPoint], m: &MassList, sigma: Curvature) -> Result<(Vec<[f64; 4]>, Vec<[f64; 4]>)> {
    let n = q.len();
    check_sizes(n, m)?;
    let mut gu = vec![[0.0; 4]; n];
    for i in 0..n {
        for j in i + 1..n {
            let t = pair_trig(&q[i], &q[j], sigma, i, j)?;
            let f = m[i] * m[j] / t.s.powi(3);
            for k in 0..4 {
                gu[i][k] += f * (q[j].0[k] - t.c * q[i].0[k]);
                gu[j][k] += f * (q[i].0[k] - t.c * q[j].0[k]);
            }
        }
    }
    let sg = sigma.sigma();
    let gi = q
        .iter()
        .zip(m.as_slice())
        .map(|(p, mi)| {
            let r2 = p.x() * p.x() + p.y() * p.y();
            let mut v = [0.0; 4];
            for (k, vk) in v.iter_mut().enumerate() {
                let planar = if k < 2 { p.0[k] } else { 0.0 };
                *vk = 2.0 * mi * (planar - sg * r2 * p.0[k]);
            }
            v
        })
        .collect();
    Ok((gu, gi))
}

fn tangent_dot(a: &[[f64; 4]], b: &[[f64; 4]], sigma: Curvature) -> f64 {
    a.iter().zip(b).map(|(u, v)| dot4(u, v, sigma)).sum()
}

/// Least-squares multiplier `λ = ⟨∇U, ∇I⟩/⟨∇I, ∇I⟩` and the residual of `∇U = λ∇I`.
///
/// Gradients and norms are taken in the induced Riemannian metric of the
/// ambient manifold, so the result does not depend on a chart and applies to
/// configurations anywhere in `(S³)ⁿ` or `(H³)ⁿ`.
pub fn multiplier_and_residual(q: &[AmbientPoint], m: &MassList, sigma: Curvature) -> Result<CcResidual> {
    let (gu, gi) = ambient_gradients(q, m, sigma)?;
    let ii = tangent_dot(&gi, &gi, sigma);
    let uu = tangent_dot(&gu, &gu, sigma).max(0.0);
    if ii <= 1e-28 * uu.max(1.0) {
        return Err(CcError::DegenerateInertiaGradient);
    }
    let lambda = tangent_dot(&gu, &gi, sigma) / ii;
    let per_particle: Vec<[f64; 4]> = gu
        .iter()
        .zip(&gi)
        .map(|(u, v)| {
            [
                u[0] - lambda * v[0],
                u[1] - lambda * v[1],
                u[2] - lambda * v[2],
                u[3] - lambda * v[3],
            ]
        })
        .collect();
    let raw_norm = tangent_dot(&per_particle, &per_particle, sigma).max(0.0).sqrt();
    let grad_u_norm = uu.sqrt();
    Ok(CcResidual {
        lambda,
        residual_norm: raw_norm / grad_u_norm.max(1.0),
        raw_norm,
        grad_u_norm,
        per_particle,
    })
}

/// `(Σ mxz, Σ mxw, Σ myz, Σ myw)`, all of which vanish at an OCC.
pub fn mc_identities(q: &[AmbientPoint], m: &MassList) -> [f64; 4] {
    let mut out = [0.0; 4];
    for (p, mi) in q.iter().zip(m.as_slice()) {
        out[0] += mi * p.x() * p.z();
        out[1] += mi * p.x() * p.w();
        out[2] += mi * p.y() * p.z();
        out[3] += mi * p.y() * p.w();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::{angles_to_point, apply_symmetry, configuration_from_angles, SymmetryElement};
    use approx::assert_abs_diff_eq;

    const H: Curvature = Curvature::Hyperbolic;
    const S: Curvature = Curvature::Spherical;

    fn geo(thetas: &[f64], sigma: Curvature) -> Vec<AmbientPoint> {
        thetas
            .iter()
            .map(|&t| angles_to_point(&AnglePoint::geodesic(t), sigma).unwrap())
            .collect()
    }

    fn masses(v: &[f64]) -> MassList {
        MassList::new(v.to_vec()).unwrap()
    }

    #[test]
    fn potential_examples() {
        let m = masses(&[1.0, 1.0]);
        let q = geo(&[-std::f64::consts::FRAC_PI_4, std::f64::consts::FRAC_PI_4], S);
        assert_abs_diff_eq!(potential(&q, &m, S).unwrap(), 0.0, epsilon = 1e-15);
        let q = geo(&[0.0, 1.0], H);
        assert_abs_diff_eq!(potential(&q, &m, H).unwrap(), 1.0 / 1f64.tanh(), epsilon = 1e-14);
        let q = geo(&[0.0, 1e-9], H);
        assert!(matches!(potential(&q, &m, H), Err(CcError::Singular { .. })));
    }

    #[test]
    fn potential_blows_up_like_inverse_distance() {
        let m = masses(&[1.5, 2.0]);
        for d in [1e-2, 1e-3, 1e-4] {
            let u = potential(&geo(&[0.2, 0.2 + d], H), &m, H).unwrap();
            assert_abs_diff_eq!(u * d, 3.0, epsilon = 3.0 * d);
        }
    }

    #[test]
    fn inertia_examples() {
        let m = masses(&[1.0, 1.0]);
        assert_eq!(inertia(&geo(&[0.0, 0.0], H), &m), 0.0);
        let m1 = masses(&[1.0, 1e-300]);
        let q = geo(&[std::f64::consts::FRAC_PI_4, 0.0], S);
        assert_abs_diff_eq!(inertia(&q, &m1), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn symmetric_pair_gradient_antisymmetric() {
        let m = masses(&[1.0, 1.0]);
        let e = grad_angle(&[AnglePoint::geodesic(-0.4), AnglePoint::geodesic(0.4)], &m, H).unwrap();
        assert_abs_diff_eq!(e.grad_u[0] + e.grad_u[1], 0.0, epsilon = 1e-14);
        assert_eq!(e.grad_i[2], 0.0);
        assert_eq!(e.grad_i[3], 0.0);
    }

    #[test]
    fn geodesic_hessian_block_diagonal() {
        let m = masses(&[1.0, 2.0, 0.7]);
        let a: Vec<AnglePoint> = [-0.5, 0.1, 0.8].iter().map(|&t| AnglePoint::geodesic(t)).collect();
        for sigma in [H, S] {
            let h = hessian_angle(&a, &m, sigma, -0.3).unwrap();
            for r in 0..3 {
                for c in 3..6 {
                    assert!(h[(r, c)].abs() < 1e-12);
                }
            }
            assert_eq!(h.clone(), h.transpose());
        }
    }

    #[test]
    fn potential_and_inertia_invariant_under_symmetry() {
        let m = masses(&[1.0, 2.0, 0.7]);
        let a = [
            AnglePoint::new(-0.5, 0.3),
            AnglePoint::new(0.1, -0.2),
            AnglePoint::new(0.8, 0.6),
        ];
        for (sigma, g) in [(H, SymmetryElement::new(1.3, 0.7)), (S, SymmetryElement::new(1.3, 0.7))] {
            let q = configuration_from_angles(&a, sigma).unwrap();
            let gq = apply_symmetry(&g, &q, sigma).unwrap();
            assert_abs_diff_eq!(
                potential(&q, &m, sigma).unwrap(),
                potential(&gq, &m, sigma).unwrap(),
                epsilon = 1e-12
            );
            assert_abs_diff_eq!(inertia(&q, &m), inertia(&gq, &m), epsilon = 1e-12);
        }
    }

    #[test]
    fn chart_and_ambient_multipliers_agree() {
        let m = masses(&[1.0, 2.0, 0.7]);
        let a = [
            AnglePoint::new(-0.5, 0.3),
            AnglePoint::new(0.1, -0.2),
            AnglePoint::new(0.8, 0.6),
        ];
        for sigma in [H, S] {
            let q = configuration_from_angles(&a, sigma).unwrap();
            let (gu, gi) = ambient_gradients(&q, &m, sigma).unwrap();
            let e = grad_angle(&a, &m, sigma).unwrap();
            // chart gradient = pullback of the ambient gradient
            let js: Vec<_> = a.iter().map(|p| chart_jet(p, sigma)).collect();
            for k in 0..3 {
                for c in 0..2 {
                    assert_abs_diff_eq!(dot4(&gu[k], &js[k].d1[c], sigma), e.grad_u[c * 3 + k], epsilon = 1e-12);
                    assert_abs_diff_eq!(dot4(&gi[k], &js[k].d1[c], sigma), e.grad_i[c * 3 + k], epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn degenerate_inertia_gradient_flagged() {
        // all particles on the zw circle: the xy rotation fixes them
        let m = masses(&[1.0, 1.0]);
        let q = vec![
            AmbientPoint::new(0.0, 0.0, 1.0, 0.0),
            AmbientPoint::new(0.0, 0.0, 0.0, 1.0),
        ];
        assert!(matches!(
            multiplier_and_residual(&q, &m, S),
            Err(CcError::DegenerateInertiaGradient)
        ));
    }
}
