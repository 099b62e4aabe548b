//! Equations of motion on `(S³)ⁿ` / `(H³)ⁿ` and relative-equilibrium checks.
//!
//! `q̈ᵢ = Σⱼ mⱼ (qⱼ − cos dᵢⱼ qᵢ)/sin³dᵢⱼ − σ(q̇ᵢ·q̇ᵢ) qᵢ` (hyperbolic functions on
//! `H³`), with conserved energy `E = K − U`. Relative equilibria are the orbits
//! `Q(t)q` of the one-parameter subgroups `A_{α,β}` (rotations of the `xy`- and
//! `zw`-planes on `S³`) and `B_{α,β}` (`xy`-rotation and `zw`-boost on `H³`).

use std::f64::consts::TAU;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{CcError, Result};
use crate::manifold::{
    apply_matrix, apply_symmetry, distance, dot4, min_pair_distance, pair_trig, AmbientPoint, Curvature, MassList,
    SymmetryElement,
};
use crate::parallel::Execution;
use crate::potentials::potential;
use crate::tol::D_MIN;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub positions: Vec<AmbientPoint>,
    pub velocities: Vec<[f64; 4]>,
    pub time: f64,
}

impl State {
    /// Largest `|qᵢ·qᵢ − σ|` and `|qᵢ·q̇ᵢ|`.
    pub fn constraint_drift(&self, sigma: Curvature) -> f64 {
        self.positions
            .iter()
            .zip(&self.velocities)
            .map(|(q, v)| {
                (dot4(&q.0, &q.0, sigma) - sigma.sigma())
                    .abs()
                    .max(dot4(&q.0, v, sigma).abs())
            })
            .fold(0.0, f64::max)
    }

    pub fn check(&self, sigma: Curvature, tol: f64) -> Result<()> {
        for (i, q) in self.positions.iter().enumerate() {
            q.check_on_manifold(sigma, tol)
                .map_err(|e| CcError::InvalidInput(format!("particle {i}: {e}")))?;
            if dot4(&q.0, &self.velocities[i], sigma).abs() > tol {
                return Err(CcError::InvalidInput(format!("particle {i}: velocity not tangent")));
            }
        }
        Ok(())
    }

    /// Projects positions onto the manifold and velocities onto the tangent spaces.
    pub fn project(&mut self, sigma: Curvature) {
        let s = sigma.sigma();
        for (q, v) in self.positions.iter_mut().zip(self.velocities.iter_mut()) {
            *q = q.normalized(sigma);
            let qv = dot4(&q.0, v, sigma);
            for k in 0..4 {
                v[k] -= s * qv * q.0[k];
            }
        }
    }
}

/// Accelerations `q̈ᵢ`.
pub fn eom_rhs(s: &State, masses: &MassList, sigma: Curvature) -> Result<Vec<[f64; 4]>> {
    let (q, v) = (&s.positions, &s.velocities);
    let n = q.len();
    if n != masses.len() || v.len() != n {
        return Err(CcError::InvalidInput("state and masses disagree in size".into()));
    }
    // RK stages leave the manifold slightly; pair geometry uses the projected points
    let qn: Vec<AmbientPoint> = q.iter().map(|p| p.normalized(sigma)).collect();
    let mut acc = vec![[0.0; 4]; n];
    for i in 0..n {
        for j in i + 1..n {
            let t = pair_trig(&qn[i], &qn[j], sigma, i, j)?;
            let s3 = t.s.powi(3);
            for k in 0..4 {
                acc[i][k] += masses[j] * (q[j].0[k] - t.c * q[i].0[k]) / s3;
                acc[j][k] += masses[i] * (q[i].0[k] - t.c * q[j].0[k]) / s3;
            }
        }
    }
    let sg = sigma.sigma();
    for i in 0..n {
        let vv = dot4(&v[i], &v[i], sigma);
        for k in 0..4 {
            acc[i][k] -= sg * vv * q[i].0[k];
        }
    }
    Ok(acc)
}

/// `E = ½Σ mᵢ q̇ᵢ·q̇ᵢ − U`.
pub fn energy(s: &State, masses: &MassList, sigma: Curvature) -> Result<f64> {
    let k: f64 = s
        .velocities
        .iter()
        .zip(masses.as_slice())
        .map(|(v, m)| 0.5 * m * dot4(v, v, sigma))
        .sum();
    Ok(k - potential(&s.positions, masses, sigma)?)
}

/// Momenta of the `xy`-rotation and of the `zw`-rotation (boost on `H³`).
pub fn momenta(s: &State, masses: &MassList) -> [f64; 2] {
    let mut out = [0.0; 2];
    for ((q, v), m) in s.positions.iter().zip(&s.velocities).zip(masses.as_slice()) {
        out[0] += m * (q.x() * v[1] - q.y() * v[0]);
        out[1] += m * (q.z() * v[3] - q.w() * v[2]);
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySample {
    pub t: f64,
    pub positions: Vec<AmbientPoint>,
    pub velocities: Vec<[f64; 4]>,
    pub energy: f64,
    /// Constraint drift accumulated over the last step, before projection.
    pub constraint_drift: f64,
    /// `zw`-boost taking the stored (re-centered) state to the original frame.
    pub frame_boost: f64,
}

impl TrajectorySample {
    pub fn absolute_positions(&self, sigma: Curvature) -> Vec<AmbientPoint> {
        if self.frame_boost == 0.0 {
            return self.positions.clone();
        }
        apply_symmetry(&SymmetryElement::new(0.0, self.frame_boost), &self.positions, sigma).expect("no τ")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub samples: Vec<TrajectorySample>,
    pub max_constraint_drift: f64,
    /// `max |E(t) − E(0)| / max(1, |E(0)|)`.
    pub energy_drift: f64,
    pub momentum_drift: f64,
    /// Set when a near-collision stopped the integration.
    pub terminated: Option<String>,
}

fn axpy(state: &State, dq: &[[f64; 4]], dv: &[[f64; 4]], h: f64) -> State {
    State {
        positions: state
            .positions
            .iter()
            .zip(dq)
            .map(|(q, d)| {
                AmbientPoint([
                    q.0[0] + h * d[0],
                    q.0[1] + h * d[1],
                    q.0[2] + h * d[2],
                    q.0[3] + h * d[3],
                ])
            })
            .collect(),
        velocities: state
            .velocities
            .iter()
            .zip(dv)
            .map(|(v, d)| [v[0] + h * d[0], v[1] + h * d[1], v[2] + h * d[2], v[3] + h * d[3]])
            .collect(),
        time: state.time + h,
    }
}

fn rk4_step(s: &State, masses: &MassList, sigma: Curvature, dt: f64) -> Result<State> {
    let k1v = eom_rhs(s, masses, sigma)?;
    let k1q = s.velocities.clone();
    let s2 = axpy(s, &k1q, &k1v, dt / 2.0);
    let k2v = eom_rhs(&s2, masses, sigma)?;
    let k2q = s2.velocities.clone();
    let s3 = axpy(s, &k2q, &k2v, dt / 2.0);
    let k3v = eom_rhs(&s3, masses, sigma)?;
    let k3q = s3.velocities.clone();
    let s4 = axpy(s, &k3q, &k3v, dt);
    let k4v = eom_rhs(&s4, masses, sigma)?;
    let k4q = s4.velocities.clone();
    let comb = |a: &[[f64; 4]], b: &[[f64; 4]], c: &[[f64; 4]], d: &[[f64; 4]]| -> Vec<[f64; 4]> {
        (0..a.len())
            .map(|i| std::array::from_fn(|k| (a[i][k] + 2.0 * b[i][k] + 2.0 * c[i][k] + d[i][k]) / 6.0))
            .collect()
    };
    let dq = comb(&k1q, &k2q, &k3q, &k4q);
    let dv = comb(&k1v, &k2v, &k3v, &k4v);
    let mut next = axpy(s, &dq, &dv, dt);
    next.time = s.time + dt;
    Ok(next)
}

/// Fixed-step RK4 with projection back to the constraint manifold after every step.
///
/// `sample_every` controls how many steps separate stored samples (the first
/// and last states are always stored).
pub fn integrate(
    s0: &State,
    masses: &MassList,
    sigma: Curvature,
    t_end: f64,
    dt: f64,
    sample_every: usize,
) -> Result<Trajectory> {
    if !(dt > 0.0 && t_end >= 0.0) {
        return Err(CcError::InvalidInput(format!(
            "need dt > 0 and T ≥ 0, got dt = {dt}, T = {t_end}"
        )));
    }
    s0.check(sigma, 1e-9)?;
    let steps = (t_end / dt).round() as usize;
    let every = sample_every.max(1);
    let e0 = energy(s0, masses, sigma)?;
    let p0 = momenta(s0, masses);
    let mut samples = vec![TrajectorySample {
        t: s0.time,
        positions: s0.positions.clone(),
        velocities: s0.velocities.clone(),
        energy: e0,
        constraint_drift: 0.0,
        frame_boost: 0.0,
    }];
    let mut frame_boost = 0.0;
    let (mut max_drift, mut e_drift, mut p_drift): (f64, f64, f64) = (0.0, 0.0, 0.0);
    let mut s = s0.clone();
    let mut terminated = None;
    for step in 1..=steps {
        let mut next = match rk4_step(&s, masses, sigma, dt) {
            Ok(n) => n,
            Err(e @ CcError::Singular { .. }) => {
                terminated = Some(e.to_string());
                break;
            }
            Err(e) => return Err(e),
        };
        next.time = s0.time + step as f64 * dt;
        let drift = next.constraint_drift(sigma);
        max_drift = max_drift.max(drift);
        next.project(sigma);
        if sigma == Curvature::Hyperbolic {
            frame_boost += recenter(&mut next, masses);
        }
        if min_pair_distance(&next.positions, sigma)? < D_MIN {
            terminated = Some(format!("near collision at t = {}", next.time));
            s = next;
            break;
        }
        let e = energy(&next, masses, sigma)?;
        e_drift = e_drift.max((e - e0).abs() / e0.abs().max(1.0));
        let p = momenta(&next, masses);
        p_drift = p_drift.max((p[0] - p0[0]).abs().max((p[1] - p0[1]).abs()));
        if step % every == 0 || step == steps {
            samples.push(TrajectorySample {
                t: next.time,
                positions: next.positions.clone(),
                velocities: next.velocities.clone(),
                energy: e,
                constraint_drift: drift,
                frame_boost,
            });
        }
        s = next;
    }
    if terminated.is_some() && samples.last().map(|x| x.t) != Some(s.time) {
        samples.push(TrajectorySample {
            t: s.time,
            positions: s.positions.clone(),
            velocities: s.velocities.clone(),
            energy: energy(&s, masses, sigma).unwrap_or(f64::NAN),
            constraint_drift: 0.0,
            frame_boost,
        });
    }
    Ok(Trajectory {
        samples,
        max_constraint_drift: max_drift,
        energy_drift: e_drift,
        momentum_drift: p_drift,
        terminated,
    })
}

/// Boosts an `H³` state along `zw` so that `Σ mᵢzᵢ = 0` once some `|zᵢ|` exceeds 1.
///
/// Returns the boost taking the new state back to the old one. Motion along the
/// `zw`-boost otherwise drives coordinates up like `e^{|β|t}` and pair inner
/// products lose all precision.
fn recenter(s: &mut State, masses: &MassList) -> f64 {
    if s.positions.iter().all(|q| q.z().abs() <= 1.0) {
        return 0.0;
    }
    let (mz, mw) = s
        .positions
        .iter()
        .zip(masses.as_slice())
        .fold((0.0, 0.0), |(a, b), (q, m)| (a + m * q.z(), b + m * q.w()));
    let b = -(mz / mw).atanh();
    let m = SymmetryElement::new(0.0, b)
        .matrix(Curvature::Hyperbolic)
        .expect("no τ");
    for q in s.positions.iter_mut() {
        *q = AmbientPoint(apply_matrix(&m, &q.0)).normalized(Curvature::Hyperbolic);
    }
    for v in s.velocities.iter_mut() {
        *v = apply_matrix(&m, v);
    }
    -b
}

/// Writes `t, q{i}_{x,y,z,w}, v{i}_{x,y,z,w}, energy, constraint_drift, frame_boost`.
///
/// Positions and velocities are in the re-centered frame; see [`TrajectorySample::absolute_positions`].
pub fn write_trajectory_csv(traj: &Trajectory, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| CcError::Io(std::io::Error::other(e)))?;
    let n = traj.samples.first().map_or(0, |s| s.positions.len());
    let mut header = vec!["t".to_string()];
    for prefix in ["q", "v"] {
        for i in 0..n {
            for c in ["x", "y", "z", "w"] {
                header.push(format!("{prefix}{i}_{c}"));
            }
        }
    }
    header.push("energy".into());
    header.push("constraint_drift".into());
    header.push("frame_boost".into());
    w.write_record(&header)
        .map_err(|e| CcError::Io(std::io::Error::other(e)))?;
    for s in &traj.samples {
        let mut row = vec![s.t.to_string()];
        row.extend(s.positions.iter().flat_map(|p| p.0).map(|v| v.to_string()));
        row.extend(s.velocities.iter().flatten().map(|v| v.to_string()));
        row.push(s.energy.to_string());
        row.push(s.constraint_drift.to_string());
        row.push(s.frame_boost.to_string());
        w.write_record(&row)
            .map_err(|e| CcError::Io(std::io::Error::other(e)))?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReKind {
    Elliptic,
    Hyperbolic,
    EllipticElliptic,
    EllipticHyperbolic,
    Equilibrium,
}

impl ReKind {
    pub fn classify(alpha: f64, beta: f64, sigma: Curvature) -> ReKind {
        let (a0, b0) = (alpha.abs() < 1e-14, beta.abs() < 1e-14);
        match (a0, b0, sigma) {
            (true, true, _) => ReKind::Equilibrium,
            (_, true, _) => ReKind::Elliptic,
            (true, false, Curvature::Hyperbolic) => ReKind::Hyperbolic,
            (true, false, Curvature::Spherical) => ReKind::Elliptic,
            (false, false, Curvature::Spherical) => ReKind::EllipticElliptic,
            (false, false, Curvature::Hyperbolic) => ReKind::EllipticHyperbolic,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReFamily {
    pub sigma: Curvature,
    pub alpha: f64,
    pub beta: f64,
    pub kind: ReKind,
    pub s: f64,
    pub lambda: f64,
    pub base: Vec<AmbientPoint>,
}

impl ReFamily {
    /// `Q(t) q₀`.
    pub fn position(&self, t: f64) -> Vec<AmbientPoint> {
        apply_symmetry(
            &SymmetryElement::new(self.alpha * t, self.beta * t),
            &self.base,
            self.sigma,
        )
        .expect("no τ")
    }

    /// `ξ q` for the generator `ξ` of the subgroup.
    pub fn generator(&self, q: &AmbientPoint) -> [f64; 4] {
        let (a, b) = (self.alpha, self.beta);
        match self.sigma {
            Curvature::Spherical => [-a * q.y(), a * q.x(), -b * q.w(), b * q.z()],
            Curvature::Hyperbolic => [-a * q.y(), a * q.x(), b * q.w(), b * q.z()],
        }
    }

    pub fn state(&self, t: f64) -> State {
        let positions = self.position(t);
        let velocities = positions.iter().map(|q| self.generator(q)).collect();
        State {
            positions,
            velocities,
            time: t,
        }
    }

    /// Periodicity label: rational `α/β` (continued fractions, denominators ≤ 50) on `S³`, `β = 0` on `H³`.
    pub fn periodicity(&self) -> Periodicity {
        periodicity(self.alpha, self.beta, self.sigma)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "label", rename_all = "kebab-case")]
pub enum Periodicity {
    Equilibrium,
    Periodic { period: f64 },
    QuasiPeriodic,
    Aperiodic,
}

pub fn periodicity(alpha: f64, beta: f64, sigma: Curvature) -> Periodicity {
    let (a, b) = (alpha.abs(), beta.abs());
    if a < 1e-14 && b < 1e-14 {
        return Periodicity::Equilibrium;
    }
    match sigma {
        Curvature::Hyperbolic => {
            if b < 1e-14 {
                Periodicity::Periodic { period: TAU / a }
            } else {
                Periodicity::Aperiodic
            }
        }
        Curvature::Spherical => {
            if a < 1e-14 {
                return Periodicity::Periodic { period: TAU / b };
            }
            if b < 1e-14 {
                return Periodicity::Periodic { period: TAU / a };
            }
            match rational_approx(a / b, 50, 1e-9) {
                Some((_, q)) => Periodicity::Periodic {
                    period: TAU * q as f64 / b,
                },
                None => Periodicity::QuasiPeriodic,
            }
        }
    }
}

/// Best convergent `p/q` of `x` with `q ≤ max_den` and `|x − p/q| < tol`.
pub fn rational_approx(x: f64, max_den: u64, tol: f64) -> Option<(u64, u64)> {
    let (mut h0, mut h1) = (0u64, 1u64);
    let (mut k0, mut k1) = (1u64, 0u64);
    let mut r = x;
    for _ in 0..64 {
        let a = r.floor();
        if a > 1e12 {
            break;
        }
        let a = a as u64;
        let (h2, k2) = (a * h1 + h0, a * k1 + k0);
        if k2 > max_den {
            break;
        }
        if (x - h2 as f64 / k2 as f64).abs() < tol {
            return Some((h2, k2));
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let frac = r - a as f64;
        if frac < 1e-15 {
            break;
        }
        r = 1.0 / frac;
    }
    None
}

/// Families `(α, β)` associated with an OCC of multiplier `λ` at the given `s`.
///
/// Any OCC carries the elliptic `β = 0` family. The others need the configuration
/// on the geodesic `H¹_{xw}` (resp. the great circle of the `xz`-plane).
pub fn re_families_from_cc(
    base: &[AmbientPoint],
    lambda: f64,
    sigma: Curvature,
    s_grid: &[f64],
) -> Result<Vec<ReFamily>> {
    if lambda == 0.0 {
        return Err(CcError::ZeroMultiplier);
    }
    let on_geodesic = base.iter().all(|q| {
        let off = match sigma {
            Curvature::Hyperbolic => q.z(),
            Curvature::Spherical => q.w(),
        };
        q.y().abs() < 1e-12 && off.abs() < 1e-12
    });
    s_grid
        .iter()
        .map(|&s| {
            let (alpha, beta) = family_parameters(lambda, sigma, s);
            if beta != 0.0 && !on_geodesic {
                let plane = if sigma == Curvature::Hyperbolic { "x-w" } else { "x-z" };
                return Err(CcError::InvalidInput(format!(
                    "β ≠ 0 at s = {s} needs a configuration on the {plane} geodesic"
                )));
            }
            Ok(ReFamily {
                sigma,
                alpha,
                beta,
                kind: ReKind::classify(alpha, beta, sigma),
                s,
                lambda,
                base: base.to_vec(),
            })
        })
        .collect()
}

/// `(α, β)` with `α² + β² = −2λ` on `H³` and `α² − β² = −2λ` on `S³`.
pub fn family_parameters(lambda: f64, sigma: Curvature, s: f64) -> (f64, f64) {
    let snap = |v: f64| if v.abs() < 1e-15 { 0.0 } else { v };
    match sigma {
        Curvature::Hyperbolic => {
            let r = (-2.0 * lambda).sqrt();
            (snap(r * s.cos()), snap(r * s.sin()))
        }
        Curvature::Spherical if lambda > 0.0 => {
            let r = (2.0 * lambda).sqrt();
            (r * s.sinh(), r * s.cosh())
        }
        Curvature::Spherical => {
            let r = (-2.0 * lambda).sqrt();
            (r * s.cosh(), r * s.sinh())
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReReport {
    pub kind: ReKind,
    pub alpha: f64,
    pub beta: f64,
    pub s: f64,
    /// `max_t max_i d(Q(t)qᵢ, qᵢ(t))` against the integrator, in geodesic distance.
    pub max_deviation: f64,
    /// Largest `|q̈ − rhs(q, q̇)|` of the closed form at sampled times.
    pub max_eom_residual: f64,
    pub energy_drift: f64,
    pub max_constraint_drift: f64,
    pub periodicity: Periodicity,
    /// Why the integration stopped early, if it did.
    pub terminated: Option<String>,
    pub passed: bool,
}

/// Compares the closed-form orbit with numerical integration over `[0, T]`.
pub fn verify_re(fam: &ReFamily, masses: &MassList, t_end: f64, dt: f64, eps_dyn: f64) -> Result<ReReport> {
    let sigma = fam.sigma;
    let s0 = fam.state(0.0);
    let traj = integrate(&s0, masses, sigma, t_end, dt, 10)?;
    let mut dev: f64 = if traj.terminated.is_some() { f64::INFINITY } else { 0.0 };
    for smp in &traj.samples {
        // pulled back by Q(−t); boosts make raw coordinates grow like e^{|β|t}
        let back = apply_symmetry(
            &SymmetryElement::new(-fam.alpha * smp.t, smp.frame_boost - fam.beta * smp.t),
            &smp.positions,
            sigma,
        )?;
        for (a, b) in fam.base.iter().zip(&back) {
            dev = dev.max(distance(a, &b.normalized(sigma), sigma)?);
        }
    }
    let mut eom: f64 = 0.0;
    let checks = 50;
    for k in 0..=checks {
        let t = t_end * k as f64 / checks as f64;
        let mut st = fam.state(t);
        if sigma == Curvature::Hyperbolic {
            // the boost factor commutes with ξ and is an isometry; drop it to keep coordinates O(1)
            st.positions = apply_symmetry(&SymmetryElement::new(fam.alpha * t, 0.0), &fam.base, sigma)?;
            st.velocities = st.positions.iter().map(|q| fam.generator(q)).collect();
        }
        let acc = eom_rhs(&st, masses, sigma)?;
        for (q, a) in st.positions.iter().zip(&acc) {
            // ξ²q for the closed form
            let v = fam.generator(q);
            let xi2 = fam.generator(&AmbientPoint(v));
            let r = (0..4).map(|c| (xi2[c] - a[c]).powi(2)).sum::<f64>().sqrt();
            eom = eom.max(r);
        }
    }
    Ok(ReReport {
        kind: fam.kind,
        alpha: fam.alpha,
        beta: fam.beta,
        s: fam.s,
        max_deviation: dev,
        max_eom_residual: eom,
        energy_drift: traj.energy_drift,
        max_constraint_drift: traj.max_constraint_drift,
        periodicity: fam.periodicity(),
        passed: dev < eps_dyn && eom < eps_dyn,
        terminated: traj.terminated,
    })
}

/// Verifies a batch of families in parallel, keeping input order.
pub fn verify_families(
    fams: &[ReFamily],
    masses: &MassList,
    t_end: f64,
    dt: f64,
    eps_dyn: f64,
    exec: Execution,
) -> Vec<Result<ReReport>> {
    exec.map(fams, |f| verify_re(f, masses, t_end, dt, eps_dyn))
}

/// `max_t |A_{β,α}(t)τq − τA_{α,β}(t)q|` on `S³`.
pub fn tau_conjugation_residual(fam: &ReFamily, times: &[f64]) -> Result<f64> {
    if fam.sigma != Curvature::Spherical {
        return Err(CcError::InvalidInput("τ is only an isometry of S³".into()));
    }
    let sigma = fam.sigma;
    let tau = SymmetryElement::tau();
    let tq = apply_symmetry(&tau, &fam.base, sigma)?;
    let mut worst: f64 = 0.0;
    for &t in times {
        let lhs = apply_symmetry(&SymmetryElement::new(fam.beta * t, fam.alpha * t), &tq, sigma)?;
        let rhs = apply_symmetry(&tau, &fam.position(t), sigma)?;
        for (a, b) in lhs.iter().zip(&rhs) {
            worst = worst.max((0..4).map(|k| (a.0[k] - b.0[k]).abs()).fold(0.0, f64::max));
        }
    }
    Ok(worst)
}

/// Whether each initial velocity is orthogonal to the geodesic through the configuration.
pub fn geodesic_velocity_orthogonality(fam: &ReFamily) -> Result<bool> {
    let sigma = fam.sigma;
    let q = &fam.base;
    let n = q.len();
    // a second point spanning the geodesic plane with q[0]
    let far = (1..n)
        .max_by(|&a, &b| {
            let da = (0..4).map(|k| (q[a].0[k] - q[0].0[k]).powi(2)).sum::<f64>();
            let db = (0..4).map(|k| (q[b].0[k] - q[0].0[k]).powi(2)).sum::<f64>();
            da.total_cmp(&db)
        })
        .ok_or_else(|| CcError::InvalidInput("need at least two particles".into()))?;
    let (e1, e2) = (q[0].0, q[far].0);
    let in_plane = |p: &[f64; 4]| {
        let m = nalgebra::Matrix4x3::from_columns(&[
            nalgebra::Vector4::from(e1),
            nalgebra::Vector4::from(e2),
            nalgebra::Vector4::from(*p),
        ]);
        let sv = m.singular_values();
        sv[2] <= 1e-9 * sv[0]
    };
    if !q.iter().all(|p| in_plane(&p.0)) {
        return Err(CcError::InvalidInput("configuration is not geodesic".into()));
    }
    let sg = sigma.sigma();
    for qi in q {
        let v = fam.generator(qi);
        let vn = dot4(&v, &v, sigma).abs().sqrt();
        if vn < 1e-14 {
            continue;
        }
        let u = if (0..4).map(|k| (e1[k] - qi.0[k]).abs()).sum::<f64>() > 1e-12 {
            e1
        } else {
            e2
        };
        let uq = dot4(&u, &qi.0, sigma);
        let mut t = [0.0; 4];
        for k in 0..4 {
            t[k] = u[k] - sg * uq * qi.0[k];
        }
        let tn = dot4(&t, &t, sigma).abs().sqrt();
        if dot4(&v, &t, sigma).abs() > 1e-9 * vn * tn {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Regular `n`-gon of equal masses on the great circle `S¹_{xy}`: a special central configuration.
pub fn special_polygon_s1xy(n: usize) -> Vec<AmbientPoint> {
    (0..n)
        .map(|k| {
            let a = TAU * k as f64 / n as f64;
            AmbientPoint::new(a.cos(), a.sin(), 0.0, 0.0)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const H: Curvature = Curvature::Hyperbolic;
    const S: Curvature = Curvature::Spherical;

    fn random_state(n: usize, sigma: Curvature, seed: u64) -> State {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut st = State {
            positions: (0..n)
                .map(|_| {
                    let mut p = [0.0f64; 4];
                    for v in p.iter_mut() {
                        *v = rng.gen_range(-1.0..1.0);
                    }
                    p[3] = p[3].abs() + 2.5;
                    AmbientPoint(p)
                })
                .collect(),
            velocities: (0..n)
                .map(|_| std::array::from_fn(|_| rng.gen_range(-0.3..0.3)))
                .collect(),
            time: 0.0,
        };
        st.project(sigma);
        st
    }

    #[test]
    fn constraint_identity() {
        let m = MassList::new(vec![1.0, 0.7, 1.4]).unwrap();
        for sigma in [S, H] {
            let st = random_state(3, sigma, 4);
            let acc = eom_rhs(&st, &m, sigma).unwrap();
            for i in 0..3 {
                let lhs = dot4(&st.positions[i].0, &acc[i], sigma);
                let rhs = -dot4(&st.velocities[i], &st.velocities[i], sigma);
                assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-10 * (1.0 + rhs.abs()));
            }
        }
    }

    #[test]
    fn special_polygon_is_equilibrium() {
        let m = MassList::equal(3, 1.0).unwrap();
        let st = State {
            positions: special_polygon_s1xy(3),
            velocities: vec![[0.0; 4]; 3],
            time: 0.0,
        };
        let acc = eom_rhs(&st, &m, S).unwrap();
        for a in acc {
            assert!(a.iter().all(|v| v.abs() < 1e-12));
        }
        let traj = integrate(&st, &m, S, 10.0, 1e-3, 1000).unwrap();
        let last = traj.samples.last().unwrap();
        for (a, b) in last.positions.iter().zip(&st.positions) {
            assert!((0..4).all(|k| (a.0[k] - b.0[k]).abs() < 1e-8));
        }
    }

    #[test]
    fn bodies_at_rest_attract() {
        let m = MassList::equal(2, 1.0).unwrap();
        let q0 = AmbientPoint::new(0.3f64.sinh(), 0.0, 0.0, 0.3f64.cosh());
        let q1 = AmbientPoint::new(-(0.4f64.sinh()), 0.0, 0.0, 0.4f64.cosh());
        let st = State {
            positions: vec![q0, q1],
            velocities: vec![[0.0; 4]; 2],
            time: 0.0,
        };
        let acc = eom_rhs(&st, &m, H).unwrap();
        assert!(acc[0][0] < 0.0 && acc[1][0] > 0.0);
    }

    #[test]
    fn energy_conserved() {
        let m = MassList::new(vec![1.0, 0.7, 1.4]).unwrap();
        let pts = [(0.5, 0.0), (0.6, 2.1), (0.4, 4.2)];
        let mut st = State {
            positions: pts
                .iter()
                .map(|&(t, f): &(f64, f64)| AmbientPoint::new(t.sinh() * f.cos(), t.sinh() * f.sin(), 0.0, t.cosh()))
                .collect(),
            velocities: vec![[0.0, 0.3, 0.05, 0.0], [-0.2, 0.0, 0.0, 0.0], [0.1, -0.1, -0.05, 0.0]],
            time: 0.0,
        };
        st.project(H);
        let traj = integrate(&st, &m, H, 0.4, 1e-3, 100).unwrap();
        assert!(traj.terminated.is_none(), "{:?}", traj.terminated);
        assert!(
            traj.energy_drift < 1e-10 && traj.momentum_drift < 1e-10,
            "{}",
            traj.energy_drift
        );
    }

    #[test]
    fn family_parameter_examples() {
        assert_eq!(family_parameters(-2.0, H, 0.0), (2.0, 0.0));
        let (a, b) = family_parameters(-2.0, H, std::f64::consts::FRAC_PI_2);
        assert_abs_diff_eq!(a, 0.0);
        assert_abs_diff_eq!(b, 2.0, epsilon = 1e-15);
        assert_eq!(ReKind::classify(a, b, H), ReKind::Hyperbolic);
        assert_eq!(family_parameters(-0.5, S, 0.0), (1.0, 0.0));
        assert_eq!(ReKind::classify(1.0, 0.0, S), ReKind::Elliptic);
        assert_eq!(ReKind::classify(1.0, 0.5, S), ReKind::EllipticElliptic);
        assert_eq!(ReKind::classify(1.0, 0.5, H), ReKind::EllipticHyperbolic);
        let q = special_polygon_s1xy(3);
        assert!(matches!(
            re_families_from_cc(&q, 0.0, S, &[0.0]),
            Err(CcError::ZeroMultiplier)
        ));
    }

    #[test]
    fn rational_detection() {
        assert_eq!(rational_approx(1.5, 50, 1e-9), Some((3, 2)));
        assert_eq!(rational_approx(2f64.sqrt(), 50, 1e-9), None);
        assert!(matches!(periodicity(2.0, 0.0, H), Periodicity::Periodic { .. }));
        assert_eq!(periodicity(2.0, 1.0, H), Periodicity::Aperiodic);
        assert_eq!(periodicity(2f64.sqrt(), 1.0, S), Periodicity::QuasiPeriodic);
    }

    #[test]
    fn special_polygon_velocity_along_geodesic() {
        let fam = ReFamily {
            sigma: S,
            alpha: 1.0,
            beta: 0.0,
            kind: ReKind::Elliptic,
            s: 0.0,
            lambda: 0.0,
            base: special_polygon_s1xy(3),
        };
        assert!(!geodesic_velocity_orthogonality(&fam).unwrap());
        let rest = ReFamily { alpha: 0.0, ..fam };
        assert!(geodesic_velocity_orthogonality(&rest).unwrap());
    }

    #[test]
    fn triangle_elliptic_only() {
        let m = MassList::equal(3, 1.0).unwrap();
        for sigma in [H, S] {
            let q = crate::planar::equilateral_triangle(0.4, sigma, 0.0).unwrap();
            let lambda = crate::potentials::multiplier_and_residual(&q, &m, sigma)
                .unwrap()
                .lambda;
            assert!(lambda < 0.0);
            let fam = re_families_from_cc(&q, lambda, sigma, &[0.0]).unwrap().remove(0);
            assert_eq!(fam.kind, ReKind::Elliptic);
            let rep = verify_re(&fam, &m, 5.0, 1e-3, 1e-6).unwrap();
            assert!(rep.passed, "{sigma} {rep:?}");
            assert!(re_families_from_cc(&q, lambda, sigma, &[0.7]).is_err());
        }
    }

    #[test]
    fn geodesic_families_all_kinds() {
        use crate::geodesic::{solve_ordering, OrderingProblem};
        let m = MassList::new(vec![1.0, 1.3, 0.8]).unwrap();
        for (sigma, c) in [(H, 2.0), (S, 0.6)] {
            let cc = solve_ordering(&OrderingProblem {
                masses: m.clone(),
                c,
                sigma,
                ordering: vec![0, 1, 2],
            })
            .unwrap();
            let grid = [0.0, 0.5, std::f64::consts::FRAC_PI_2];
            let fams = re_families_from_cc(&cc.ambient(), cc.lambda, sigma, &grid).unwrap();
            for fam in &fams {
                let rep = verify_re(fam, &m, 2.0, 5e-4, 1e-6).unwrap();
                assert!(rep.passed, "{sigma} {rep:?}");
                assert!(geodesic_velocity_orthogonality(fam).unwrap());
                if sigma == S {
                    assert!(tau_conjugation_residual(fam, &[0.0, 1.3, 4.0]).unwrap() < 1e-12);
                }
            }
        }
    }
}
