//! Morse inertia of geodesic OCCs.
//!
//! At a geodesic OCC the Hessian of `U − λ̄I` in `(θ, φ)` splits into a
//! `θθ`-block `H₁` and a `φφ`-block `H₂ = CM(A − 2λ̄)C`, where
//! `C = diag(cos θ̄ᵢ)` (`cosh` on `H¹`) and `M = diag(mᵢ)`. `A` is symmetric in
//! the inner product `(u, v) = uᵀMv` and has the explicit eigenvectors
//! `c₁ = (cos θ̄ᵢ)` with eigenvalue `0` and `c₂ = (sin θ̄ᵢ)` with eigenvalue `2λ̄`.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CcError, Result};
use crate::geodesic::GeodesicCC;
use crate::linalg::{orthonormal_complement, restrict, spectral_radius, symmetric_eigen, symmetric_eigenvalues};
use crate::manifold::{Curvature, MassList};
use crate::potentials::hessian_angle;
use crate::tol::{GAP_MIN, TOL_ZERO_REL};

pub use crate::linalg::InertiaTriple;

/// Inertia together with the eigenvalues and the zero threshold used.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InertiaReport {
    pub triple: InertiaTriple,
    pub eigenvalues: Vec<f64>,
    pub tol_zero: f64,
    /// `min(smallest nonzero |μ| / tol_zero, tol_zero / largest zero |μ|)`.
    pub margin: f64,
}

/// Inertia with the threshold `tol_zero = tol_zero_rel · ρ(m)`.
pub fn inertia(m: &DMatrix<f64>, tol_zero_rel: f64) -> Result<InertiaReport> {
    let eigs = symmetric_eigenvalues(m)?;
    Ok(inertia_from_eigs(eigs, tol_zero_rel * spectral_radius_of(m)?))
}

fn spectral_radius_of(m: &DMatrix<f64>) -> Result<f64> {
    Ok(spectral_radius(&symmetric_eigenvalues(m)?))
}

pub(crate) fn inertia_from_eigs(eigs: Vec<f64>, tol_zero: f64) -> InertiaReport {
    let triple = InertiaTriple::from_eigenvalues(&eigs, tol_zero);
    let mut margin = f64::INFINITY;
    for &e in &eigs {
        let r = if e.abs() < tol_zero {
            tol_zero / e.abs().max(f64::MIN_POSITIVE)
        } else {
            e.abs() / tol_zero
        };
        margin = margin.min(r);
    }
    InertiaReport {
        triple,
        eigenvalues: eigs,
        tol_zero,
        margin,
    }
}

/// The `θθ` and `φφ` blocks of `D²(U − λ̄I)` at a geodesic OCC.
#[derive(Clone, Debug)]
pub struct HessianBlocks {
    /// Full `θθ` block.
    pub h1: DMatrix<f64>,
    /// `H₁` restricted to the orthogonal complement of `∇I` (the tangent of `{I = c}`).
    pub h1_tangent: DMatrix<f64>,
    pub h2: DMatrix<f64>,
    /// Largest `|θφ|` entry; zero at geodesic points.
    pub cross_max: f64,
    pub full: DMatrix<f64>,
}

fn check_cc(cc: &GeodesicCC, masses: &MassList, sigma: Curvature) -> Result<()> {
    if cc.sigma != sigma || cc.theta.len() != masses.len() {
        return Err(CcError::InvalidInput(
            "solution does not match masses / curvature".into(),
        ));
    }
    Ok(())
}

pub fn build_blocks(cc: &GeodesicCC, masses: &MassList, sigma: Curvature) -> Result<HessianBlocks> {
    check_cc(cc, masses, sigma)?;
    let n = masses.len();
    let full = hessian_angle(&cc.angles(), masses, sigma, cc.lambda)?;
    let h1 = full.view((0, 0), (n, n)).into_owned();
    let h2 = full.view((n, n), (n, n)).into_owned();
    let cross_max = full.view((0, n), (n, n)).iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let grad_i = DVector::from_fn(n, |k, _| masses[k] * sigma.s(2.0 * cc.theta[k]));
    let q = orthonormal_complement(&[grad_i], n);
    Ok(HessianBlocks {
        h1_tangent: restrict(&h1, &q),
        h1,
        h2,
        cross_max,
        full,
    })
}

/// The mass-distance matrix `A`.
pub fn build_a(cc: &GeodesicCC, masses: &MassList, sigma: Curvature) -> Result<DMatrix<f64>> {
    check_cc(cc, masses, sigma)?;
    let n = masses.len();
    let th = &cc.theta;
    let mut a = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let d = (th[i] - th[j]).abs();
            if d < crate::tol::D_MIN {
                return Err(CcError::Singular { i, j, distance: d });
            }
            let s3 = sigma.s(d).powi(3);
            a[(i, j)] = masses[j] / s3;
            a[(i, i)] -= masses[j] * sigma.c(th[j]) / (sigma.c(th[i]) * s3);
        }
    }
    Ok(a)
}

/// Rotation-orbit direction in `φ` at a geodesic point: `δφᵢ = tan θ̄ᵢ` (`tanh` on `H¹`).
pub fn orbit_direction_phi(cc: &GeodesicCC) -> DVector<f64> {
    DVector::from_fn(cc.theta.len(), |k, _| cc.sigma.s(cc.theta[k]) / cc.sigma.c(cc.theta[k]))
}

/// Result of the cone and distance-inequality verification.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConeReport {
    /// `c₂ᵢ / c₁ᵢ` nondecreasing along the ordering.
    pub ratios_monotone: bool,
    /// `(c₁, c₂)_M = Σ mᵢ c₁ᵢ c₂ᵢ`.
    pub c1_c2_inner: f64,
    pub inequality_count: usize,
    pub inequality_failures: usize,
    pub inequality_min: f64,
    pub boundary_samples: usize,
    pub boundary_failures: usize,
    pub boundary_min_flow: f64,
}

impl ConeReport {
    pub fn ok(&self) -> bool {
        self.ratios_monotone && self.inequality_failures == 0 && self.boundary_failures == 0
    }
}

/// Verifies `c₂ ∈ K`, the two distance-inequality families and the inward
/// flow `L_Y g > 0` of `Y = Au` on sampled boundary points of the cone
/// `K = {u : (u, c₁)_M = 0, u₁/c₁₁ ≤ … ≤ uₙ/c₁ₙ}` (indices in ordering order).
pub fn cone_and_inequality_checks(
    cc: &GeodesicCC,
    masses: &MassList,
    sigma: Curvature,
    samples: usize,
    seed: u64,
) -> Result<ConeReport> {
    let a = build_a(cc, masses, sigma)?;
    let n = masses.len();
    let ord = &cc.ordering;
    let th: Vec<f64> = ord.iter().map(|&p| cc.theta[p]).collect();
    let c1: Vec<f64> = ord.iter().map(|&p| sigma.c(cc.theta[p])).collect();
    let c2: Vec<f64> = ord.iter().map(|&p| sigma.s(cc.theta[p])).collect();
    let ms: Vec<f64> = ord.iter().map(|&p| masses[p]).collect();

    let ratios_monotone = (1..n).all(|k| c2[k] / c1[k] > c2[k - 1] / c1[k - 1]);
    let c1_c2_inner: f64 = (0..n).map(|k| ms[k] * c1[k] * c2[k]).sum();

    let f = |x: f64, y: f64| sigma.s(x).powi(3) * sigma.c(y);
    let (mut count, mut fails, mut minv) = (0, 0, f64::INFINITY);
    for k in 0..n {
        for i in 0..n {
            for j in i + 1..n {
                let v = if k < i {
                    f(th[j] - th[k], th[j]) - f(th[i] - th[k], th[i])
                } else if j < k {
                    f(th[k] - th[i], th[i]) - f(th[k] - th[j], th[j])
                } else {
                    continue;
                };
                count += 1;
                minv = minv.min(v);
                if v <= 0.0 {
                    fails += 1;
                }
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut bfails, mut bmin, mut drawn) = (0, f64::INFINITY, 0);
    if n >= 3 {
        while drawn < samples {
            let i = rng.gen_range(0..n - 1);
            let j = rng.gen_range(i + 1..n);
            if i == 0 && j == n - 1 {
                continue;
            }
            let mut r: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
            r.sort_by(f64::total_cmp);
            for k in i + 1..=j {
                r[k] = r[i];
            }
            let shift: f64 = (0..n).map(|k| ms[k] * c1[k] * c1[k] * r[k]).sum::<f64>()
                / (0..n).map(|k| ms[k] * c1[k] * c1[k]).sum::<f64>();
            let mut u = DVector::zeros(n);
            for k in 0..n {
                u[ord[k]] = c1[k] * (r[k] - shift);
            }
            let y = &a * u;
            let flow = y[ord[j]] / c1[j] - y[ord[i]] / c1[i];
            bmin = bmin.min(flow);
            if flow <= 0.0 {
                bfails += 1;
            }
            drawn += 1;
        }
    }
    Ok(ConeReport {
        ratios_monotone,
        c1_c2_inner,
        inequality_count: count,
        inequality_failures: fails,
        inequality_min: if count > 0 { minv } else { 0.0 },
        boundary_samples: drawn,
        boundary_failures: bfails,
        boundary_min_flow: if drawn > 0 { bmin } else { 0.0 },
    })
}

fn to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

/// Inertia, eigenstructure and cone checks at one geodesic OCC.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    pub sigma: Curvature,
    pub n: usize,
    pub lambda: f64,
    pub theta: Vec<f64>,
    pub h1_tangent_eigs: Vec<f64>,
    pub h2: Vec<Vec<f64>>,
    pub a: Vec<Vec<f64>>,
    /// Eigenvalues of `A` in descending order.
    pub eigs_a: Vec<f64>,
    pub inertia_h1: InertiaReport,
    pub inertia_h2: InertiaReport,
    pub inertia_h2_quotient: InertiaReport,
    pub inertia_a_shift: InertiaReport,
    pub inertia_total: InertiaReport,
    pub cross_block_max: f64,
    pub c1_residual: f64,
    pub c2_residual: f64,
    /// `max |H₂ − CM(A − 2λ̄)C| / max(1, max |H₂|)`.
    pub congruence_residual: f64,
    /// Largest row sum of `CMAC`, relative to its largest entry.
    pub row_sum_residual: f64,
    /// Largest `|(vᵢ, vⱼ)_M|` over distinct unit eigenvectors of `A`.
    pub m_orthogonality: f64,
    pub c1_c2_inner: f64,
    /// `2λ̄ − μ₃`; positive when the spectral ordering holds.
    pub ordering_gap: f64,
    pub ordering_ok: bool,
    /// An eigenvalue other than the `c₂` one lies within `tol_zero` of `2λ̄`.
    pub degenerate: bool,
    /// `δφ` spanning the rotation orbit (removed before the quotient counts).
    pub orbit_direction: Vec<f64>,
    pub cone: ConeReport,
}

impl SpectralReport {
    /// `(0, n, n−2)` on `S_c/S¹` and the block counts behind it.
    pub fn matches_expected_inertia(&self) -> bool {
        let n = self.n;
        self.inertia_total.triple == InertiaTriple::new(0, n, n - 2)
            && self.inertia_h1.triple == InertiaTriple::new(0, n - 1, 0)
            && self.inertia_h2.triple == InertiaTriple::new(1, 1, n - 2)
            && self.inertia_h2_quotient.triple == InertiaTriple::new(0, 1, n - 2)
            && self.inertia_a_shift.triple == InertiaTriple::new(1, 1, n - 2)
    }
}

pub fn spectral_ordering_check(cc: &GeodesicCC, masses: &MassList, sigma: Curvature) -> Result<SpectralReport> {
    spectral_ordering_check_with(cc, masses, sigma, TOL_ZERO_REL, GAP_MIN, 200, 0)
}

pub fn spectral_ordering_check_with(
    cc: &GeodesicCC,
    masses: &MassList,
    sigma: Curvature,
    tol_zero_rel: f64,
    gap_min: f64,
    cone_samples: usize,
    seed: u64,
) -> Result<SpectralReport> {
    let n = masses.len();
    let blocks = build_blocks(cc, masses, sigma)?;
    let a = build_a(cc, masses, sigma)?;
    let lam = cc.lambda;
    let cdiag = DVector::from_fn(n, |k, _| sigma.c(cc.theta[k]));
    let c1 = cdiag.clone();
    let c2 = DVector::from_fn(n, |k, _| sigma.s(cc.theta[k]));
    let mvec = DVector::from_fn(n, |k, _| masses[k]);

    let c1_residual = (&a * &c1).norm();
    let c2_residual = (&a * &c2 - &c2 * (2.0 * lam)).norm();

    let cm = DMatrix::from_diagonal(&cdiag.component_mul(&mvec));
    let cmat = DMatrix::from_diagonal(&cdiag);
    let shifted = &a - DMatrix::identity(n, n) * (2.0 * lam);
    let predicted = &cm * &shifted * &cmat;
    let h2_scale = blocks.h2.amax().max(1.0);
    let congruence_residual = (&blocks.h2 - &predicted).amax() / h2_scale;
    let cmac = &cm * &a * &cmat;
    let row_sum_residual = cmac.row_iter().map(|r| r.sum().abs()).fold(0.0, f64::max) / cmac.amax().max(1.0);

    // M^{1/2} A M^{-1/2} is symmetric
    let msq = mvec.map(f64::sqrt);
    let a_sym = DMatrix::from_fn(n, n, |i, j| msq[i] * a[(i, j)] / msq[j]);
    let (eigs_asc, vecs) = symmetric_eigen(&a_sym)?;
    let eigs_a: Vec<f64> = eigs_asc.iter().rev().copied().collect();
    let mut m_orth: f64 = 0.0;
    let back: Vec<DVector<f64>> = (0..n)
        .map(|k| {
            let v = DVector::from_fn(n, |r, _| vecs[(r, k)] / msq[r]);
            let nrm = v.dot(&v.component_mul(&mvec)).sqrt();
            v / nrm
        })
        .collect();
    for i in 0..n {
        for j in i + 1..n {
            m_orth = m_orth.max(back[i].dot(&back[j].component_mul(&mvec)).abs());
        }
    }

    let tol_a = tol_zero_rel * spectral_radius(&eigs_a);
    let shifted_eigs: Vec<f64> = eigs_asc.iter().map(|e| e - 2.0 * lam).collect();
    let tol_shift = tol_zero_rel * spectral_radius(&shifted_eigs);
    let inertia_a_shift = inertia_from_eigs(shifted_eigs, tol_shift);

    let mu3 = if n >= 3 { eigs_a[2] } else { f64::NEG_INFINITY };
    let ordering_gap = 2.0 * lam - mu3;
    let ordering_ok = eigs_a[0].abs() < tol_a
        && (eigs_a[1] - 2.0 * lam).abs() < tol_a.max(1e-12)
        && (n < 3 || ordering_gap > gap_min);
    let degenerate = eigs_a.iter().skip(2).any(|e| (e - 2.0 * lam).abs() < tol_a);

    let inertia_h1 = inertia(&blocks.h1_tangent, tol_zero_rel)?;
    let inertia_h2 = inertia(&blocks.h2, tol_zero_rel)?;
    let orbit = orbit_direction_phi(cc);
    let q2 = orthonormal_complement(&[orbit.clone()], n);
    let inertia_h2_quotient = inertia(&restrict(&blocks.h2, &q2), tol_zero_rel)?;

    let mut grad_i = DVector::zeros(2 * n);
    let mut orbit_full = DVector::zeros(2 * n);
    for k in 0..n {
        grad_i[k] = masses[k] * sigma.s(2.0 * cc.theta[k]);
        orbit_full[n + k] = orbit[k];
    }
    let qt = orthonormal_complement(&[grad_i, orbit_full], 2 * n);
    let inertia_total = inertia(&restrict(&blocks.full, &qt), tol_zero_rel)?;

    let cone = cone_and_inequality_checks(cc, masses, sigma, cone_samples, seed)?;
    Ok(SpectralReport {
        sigma,
        n,
        lambda: lam,
        theta: cc.theta.clone(),
        h1_tangent_eigs: inertia_h1.eigenvalues.clone(),
        h2: to_rows(&blocks.h2),
        a: to_rows(&a),
        eigs_a,
        inertia_h1,
        inertia_h2,
        inertia_h2_quotient,
        inertia_a_shift,
        inertia_total,
        cross_block_max: blocks.cross_max,
        c1_residual,
        c2_residual,
        congruence_residual,
        row_sum_residual,
        m_orthogonality: m_orth,
        c1_c2_inner: cone.c1_c2_inner,
        ordering_gap,
        ordering_ok,
        degenerate,
        orbit_direction: orbit.iter().copied().collect(),
        cone,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geodesic::{solve_ordering, OrderingProblem};
    use approx::assert_abs_diff_eq;

    fn solve(m: &[f64], c: f64, sigma: Curvature, ord: &[usize]) -> (GeodesicCC, MassList) {
        let masses = MassList::new(m.to_vec()).unwrap();
        let cc = solve_ordering(&OrderingProblem {
            masses: masses.clone(),
            c,
            sigma,
            ordering: ord.to_vec(),
        })
        .unwrap();
        (cc, masses)
    }

    #[test]
    fn identity_inertia() {
        let r = inertia(&DMatrix::identity(3, 3), 1e-7).unwrap();
        assert_eq!(r.triple, InertiaTriple::new(0, 3, 0));
    }

    #[test]
    fn two_body_h2_closed_form() {
        // θ = (−t, t), equal unit masses: H₂ = λ-shifted 2×2 from the φφ second derivatives
        let (cc, m) = solve(&[1.0, 1.0], 1.0, Curvature::Hyperbolic, &[0, 1]);
        let b = build_blocks(&cc, &m, Curvature::Hyperbolic).unwrap();
        let t = cc.theta[1];
        let d: f64 = 2.0 * t;
        let off = t.cosh().powi(2) / d.sinh().powi(3);
        let diag = -off - 2.0 * cc.lambda * t.cosh().powi(2);
        assert_abs_diff_eq!(b.h2[(0, 1)], off, epsilon = 1e-10);
        assert_abs_diff_eq!(b.h2[(0, 0)], diag, epsilon = 1e-10);
        assert_abs_diff_eq!(b.h2[(1, 1)], diag, epsilon = 1e-10);
    }

    #[test]
    fn h2_matches_finite_differences() {
        let (cc, m) = solve(&[0.8, 1.3, 1.1, 0.6], 1.2, Curvature::Hyperbolic, &[2, 0, 3, 1]);
        let b = build_blocks(&cc, &m, Curvature::Hyperbolic).unwrap();
        let n = 4;
        let h = 1e-4;
        let grad_phi = |phi: &[f64]| {
            let a: Vec<_> = (0..n).map(|k| crate::AnglePoint::new(cc.theta[k], phi[k])).collect();
            let e = crate::potentials::grad_angle(&a, &m, Curvature::Hyperbolic).unwrap();
            (0..n)
                .map(|k| e.grad_u[n + k] - cc.lambda * e.grad_i[n + k])
                .collect::<Vec<_>>()
        };
        for j in 0..n {
            let mut p = vec![0.0; n];
            p[j] = h;
            let gp = grad_phi(&p);
            p[j] = -h;
            let gm = grad_phi(&p);
            for i in 0..n {
                assert_abs_diff_eq!(b.h2[(i, j)], (gp[i] - gm[i]) / (2.0 * h), epsilon = 1e-5);
            }
        }
    }

    #[test]
    fn expected_inertia_on_both_branches() {
        for (sigma, c) in [(Curvature::Hyperbolic, 1.0), (Curvature::Spherical, 0.15)] {
            let (cc, m) = solve(&[0.8, 1.3, 1.1, 0.6], c, sigma, &[2, 0, 3, 1]);
            let r = spectral_ordering_check(&cc, &m, sigma).unwrap();
            assert!(r.matches_expected_inertia(), "{sigma}: {r:#?}");
            assert!(
                r.c1_residual < 1e-9 && r.c2_residual < 1e-9,
                "{} {}",
                r.c1_residual,
                r.c2_residual
            );
            assert!(r.congruence_residual < 1e-10);
            assert!(r.row_sum_residual < 1e-10);
            assert!(r.ordering_ok);
            assert!(r.cone.ok(), "{:?}", r.cone);
            assert!(r.cross_block_max < 1e-10);
            assert!(r.m_orthogonality < 1e-10);
        }
    }
}
