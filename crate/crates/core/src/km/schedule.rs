use crate::error::{Error, Result};

/// Validated inertial/relaxation parameters (alpha, theta, delta_hat, rho).
///
/// The extrapolation weight follows the simplest admissible schedule:
/// alpha_k = 0 at k = 1 and the constant cap alpha afterwards. The
/// relaxation rho is constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InertialSchedule {
    alpha: f64,
    theta: f64,
    delta_hat: f64,
    rho: f64,
}

impl InertialSchedule {
    /// Check both admissibility inequalities and construct the schedule.
    pub fn validate(alpha: f64, theta: f64, delta_hat: f64, rho: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&alpha) || !alpha.is_finite() {
            return Err(Error::InvalidParameter {
                name: "alpha",
                reason: format!("must lie in [0, 1), got {alpha}"),
            });
        }
        if !(theta > 0.0 && theta.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "theta",
                reason: format!("must be positive, got {theta}"),
            });
        }
        if !(delta_hat > 0.0 && delta_hat.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "delta_hat",
                reason: format!("must be positive, got {delta_hat}"),
            });
        }
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "rho",
                reason: format!("must be positive, got {rho}"),
            });
        }
        let lower = Self::delta_hat_lower_bound(alpha, theta);
        if delta_hat <= lower {
            return Err(Error::ScheduleViolation {
                condition: format!(
                    "delta_hat must exceed (alpha^2(1+alpha)+alpha*theta)/(1-alpha^2) = {lower}"
                ),
                rho_max: 0.0,
            });
        }
        let rho_max = Self::rho_upper_bound(alpha, theta, delta_hat);
        if rho >= rho_max {
            return Err(Error::ScheduleViolation {
                condition: format!("rho = {rho} must lie strictly below the relaxation cap"),
                rho_max,
            });
        }
        Ok(InertialSchedule {
            alpha,
            theta,
            delta_hat,
            rho,
        })
    }

    /// Lower admissibility bound on delta_hat for a given alpha, theta.
    pub fn delta_hat_lower_bound(alpha: f64, theta: f64) -> f64 {
        (alpha * alpha * (1.0 + alpha) + alpha * theta) / (1.0 - alpha * alpha)
    }

    /// Supremum of admissible constant relaxationsial for these parameters.
    pub fn rho_upper_bound(alpha: f64, theta: f64, delta_hat: f64) -> f64 {
        let bracket = alpha * (1.0 + alpha) + alpha * delta_hat + theta;
        (delta_hat - alpha * bracket) / (delta_hat * (1.0 + bracket))
    }

    /// Relaxation cap when the operator is known to be a-averaged: the
    /// non-inertial theory admits rho < 1/a, so both bounds apply and the
    /// smaller one governs.
    pub fn averaged_rho_cap(a_averaged: f64) -> f64 {
        1.0 / a_averaged
    }

    /// Validate against the inertial bound and, additionally, the
    /// averagedness bound rho < 1/a.
    pub fn validate_for_averaged(
        alpha: f64,
        theta: f64,
        delta_hat: f64,
        rho: f64,
        a_averaged: f64,
    ) -> Result<Self> {
        if !a_averaged.is_finite() || a_averaged <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "a_averaged",
                reason: format!("must be positive and finite, got {a_averaged}"),
            });
        }
        let sched = Self::validate(alpha, theta, delta_hat, rho)?;
        let cap = Self::averaged_rho_cap(a_averaged);
        if rho >= cap {
            return Err(Error::ScheduleViolation {
                condition: format!(
                    "rho = {rho} must lie below 1/a for the {a_averaged}-averaged operator"
                ),
                rho_max: cap,
            });
        }
        Ok(sched)
    }

    /// Unchecked construction for degenerate settings (Picard iteration,
    /// reduction identities in tests). Theta and delta_hat are nominal.
    pub fn unvalidated(alpha: f64, rho: f64) -> Self {
        InertialSchedule {
            alpha,
            theta: 0.01,
            delta_hat: 1.0,
            rho,
        }
    }

    /// alpha_k: zero on the first step, the cap afterwards.
    pub fn alpha_at(&self, k: u64) -> f64 {
        if k <= 1 {
            0.0
        } else {
            self.alpha
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn delta_hat(&self) -> f64 {
        self.delta_hat
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }
}

/// Free-function form of [`InertialSchedule::validate`].
pub fn validate_schedule(
    alpha: f64,
    theta: f64,
    delta_hat: f64,
    rho: f64,
) -> Result<InertialSchedule> {
    InertialSchedule::validate(alpha, theta, delta_hat, rho)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_alpha_cap_is_half_for_unit_theta() {
        // alpha = 0, theta = 1: cap = delta/(delta * 2) = 1/2
        for delta_hat in [0.1, 1.0, 7.5] {
            let cap = InertialSchedule::rho_upper_bound(0.0, 1.0, delta_hat);
            assert!((cap - 0.5).abs() < 1e-15);
            assert!(validate_schedule(0.0, 1.0, delta_hat, 0.4).is_ok());
            assert!(validate_schedule(0.0, 1.0, delta_hat, 0.5).is_err());
        }
    }

    #[test]
    fn large_alpha_fails_first_condition() {
        // alpha = 0.9, theta = 1: lower bound on delta_hat is about 12.8
        let lower = InertialSchedule::delta_hat_lower_bound(0.9, 1.0);
        assert!(lower > 12.0 && lower < 13.0);
        let err = validate_schedule(0.9, 1.0, 1.0, 0.1).unwrap_err();
        match err {
            Error::ScheduleViolation { condition, .. } => {
                assert!(condition.contains("delta_hat"));
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn moderate_alpha_admits_large_rho() {
        // alpha = 0.1, theta = 0.01, delta_hat = 1:
        // the delta_hat bound holds and the cap evaluates to 0.978/1.22
        let lower = InertialSchedule::delta_hat_lower_bound(0.1, 0.01);
        assert!((lower - 0.0121212121212121_f64).abs() < 1e-12);
        let cap = InertialSchedule::rho_upper_bound(0.1, 0.01, 1.0);
        assert!((cap - 0.978 / 1.22).abs() < 1e-12);
        assert!(validate_schedule(0.1, 0.01, 1.0, 0.5).is_ok());
        assert!(validate_schedule(0.1, 0.01, 1.0, 0.81).is_err());
    }

    #[test]
    fn alpha_schedule_starts_at_zero() {
        let s = validate_schedule(0.3, 0.01, 1.0, 0.4).unwrap();
        assert_eq!(s.alpha_at(1), 0.0);
        assert_eq!(s.alpha_at(2), 0.3);
        assert_eq!(s.alpha_at(1000), 0.3);
    }

    #[test]
    fn averaged_cap_is_enforced() {
        // alpha = 0, theta small: inertial cap near 1, averaged cap tighter
        // for a > 1/0.9
        let r = InertialSchedule::validate_for_averaged(0.0, 1e-6, 1.0, 0.9, 1.2);
        assert!(r.is_err());
        let ok = InertialSchedule::validate_for_averaged(0.0, 1e-6, 1.0, 0.8, 1.2);
        assert!(ok.is_ok());
    }

    #[test]
    fn rejects_out_of_range_preconditions() {
        assert!(validate_schedule(1.0, 1.0, 1.0, 0.1).is_err());
        assert!(validate_schedule(-0.1, 1.0, 1.0, 0.1).is_err());
        assert!(validate_schedule(0.1, 0.0, 1.0, 0.1).is_err());
        assert!(validate_schedule(0.1, 1.0, 0.0, 0.1).is_err());
        assert!(validate_schedule(0.1, 1.0, 1.0, 0.0).is_err());
    }
}
