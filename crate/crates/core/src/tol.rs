//! Default numerical tolerances shared across modules.

use serde::{Deserialize, Serialize};

use crate::error::{CcError, Result};

/// Allowed deviation of `q·q` from `σ` after every projection.
pub const EPS_MFLD: f64 = 1e-9;
/// Two configurations closer than this modulo symmetry belong to one class.
pub const EPS_CLASS: f64 = 1e-6;
/// Pair separations below this are treated as collisions.
pub const D_MIN: f64 = 1e-8;
/// Central-difference step for gradient checks.
pub const H_FD_GRAD: f64 = 1e-5;
/// Central-difference step for Hessian checks.
pub const H_FD_HESS: f64 = 1e-4;
/// Relative agreement between analytic and finite-difference derivatives.
pub const EPS_FD: f64 = 1e-6;
/// Absolute floor for the finite-difference comparison.
pub const EPS_FD_ABS: f64 = 1e-9;
/// Scaled residual below which a configuration is a central configuration.
pub const EPS_CC: f64 = 1e-8;
/// Allowed `|I − c| / max(1, c)`.
pub const EPS_CON: f64 = 1e-10;
/// Iteration cap for the Newton-type solvers.
pub const MAX_ITER: usize = 200;
/// Zero eigenvalues are those below this fraction of the spectral radius.
pub const TOL_ZERO_REL: f64 = 1e-7;
/// Minimum gap for strict eigenvalue-ordering assertions.
pub const GAP_MIN: f64 = 1e-9;
/// Closed-form vs integrated relative-equilibrium deviation.
pub const EPS_DYN: f64 = 1e-6;
/// Step-norm termination of the augmented Newton iteration.
pub const NEWTON_TOL: f64 = 1e-12;

/// Tolerance set with per-run overrides.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub mfld: f64,
    pub class: f64,
    pub d_min: f64,
    pub cc: f64,
    pub con: f64,
    pub tol_zero_rel: f64,
    pub gap_min: f64,
    pub dynamics: f64,
    pub newton: f64,
    pub max_iter: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            mfld: EPS_MFLD,
            class: EPS_CLASS,
            d_min: D_MIN,
            cc: EPS_CC,
            con: EPS_CON,
            tol_zero_rel: TOL_ZERO_REL,
            gap_min: GAP_MIN,
            dynamics: EPS_DYN,
            newton: NEWTON_TOL,
            max_iter: MAX_ITER,
        }
    }
}

impl Tolerances {
    /// Every override must stay within a factor 10³ of its default.
    pub fn validate(&self) -> Result<()> {
        let d = Tolerances::default();
        let pairs = [
            ("mfld", self.mfld, d.mfld),
            ("class", self.class, d.class),
            ("d_min", self.d_min, d.d_min),
            ("cc", self.cc, d.cc),
            ("con", self.con, d.con),
            ("tol_zero_rel", self.tol_zero_rel, d.tol_zero_rel),
            ("gap_min", self.gap_min, d.gap_min),
            ("dynamics", self.dynamics, d.dynamics),
            ("newton", self.newton, d.newton),
            ("max_iter", self.max_iter as f64, d.max_iter as f64),
        ];
        for (name, value, default) in pairs {
            if !(value.is_finite() && value > 0.0) {
                return Err(CcError::Config(format!(
                    "tolerance `{name}` must be positive, got {value}"
                )));
            }
            let ratio = value / default;
            if !(1e-3..=1e3).contains(&ratio) {
                return Err(CcError::Config(format!(
                    "tolerance `{name}` = {value:e} is more than 10^3 away from its default {default:e}"
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        Tolerances::default().validate().unwrap();
    }

    #[test]
    fn far_override_rejected() {
        let t = Tolerances {
            cc: 1e-2,
            ..Default::default()
        };
        assert!(t.validate().is_err());
        let t = Tolerances {
            cc: 1e-10,
            ..Default::default()
        };
        assert!(t.validate().is_ok());
    }
}
