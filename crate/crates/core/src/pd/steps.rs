use crate::error::{Error, Result};
use crate::linops::{operator_norm_sq, DiagSandwich, DiagonalMap, LinearMap};
use crate::prox::SmoothOracle;

/// Step-size parameterizations for the two solver families.
///
/// The primal-dual family couples through D with dual step sigma; the
/// ADMM-style family reformulates over the image of D and couples through
/// the identity with dual step psi^{-1} (scalar case: mu^{-1}).
#[derive(Debug, Clone)]
pub enum StepSizes {
    PdScalar { tau: f64, sigma: f64 },
    PdDiagonal { t: DiagonalMap, sigma: DiagonalMap },
    AdmmScalar { tau: f64, mu: f64 },
    AdmmDiagonal { t: DiagonalMap, psi: DiagonalMap },
}

/// Positive-definiteness certificate for the solver metric.
#[derive(Debug, Clone, Copy)]
pub struct StepCertificate {
    /// min_j (1/tau_j - e_j/2); must be positive.
    pub positivity_margin: f64,
    /// 1 - ||A2^{-1/2} M A1^{-1/2}||^2 for the metric off-diagonal block;
    /// must be positive.
    pub coupling_margin: f64,
    /// (1/tau - sigma ||D||^2) - ||E||/2 in the scalar primal-dual case.
    pub scalar_margin: Option<f64>,
}

fn positivity_margins(t_inv_minus_half_e: &[f64]) -> Result<f64> {
    let margin = t_inv_minus_half_e.iter().cloned().fold(f64::MAX, f64::min);
    if margin <= 0.0 {
        return Err(Error::StepSizeViolation {
            condition: "T^{-1} - E/2 must be positive definite".into(),
            margin,
        });
    }
    Ok(margin)
}

/// Check the metric positive-definiteness conditions for the given
/// problem data and steps, returning the margins.
///
/// The coupling check is the matrix condition
/// ||A2^{-1/2} M A1^{-1/2}|| < 1 (A1 = T^{-1} - E/2, A2 the inverse dual
/// step), evaluated by power iteration; the looser scalar norm inequality
/// is only reported for diagnostics.
pub fn validate_step_sizes(
    e: &DiagonalMap,
    d: &dyn LinearMap,
    steps: &StepSizes,
) -> Result<StepCertificate> {
    match steps {
        StepSizes::PdScalar { tau, sigma } => {
            check_positive("tau", *tau)?;
            check_positive("sigma", *sigma)?;
            let a1: Vec<f64> = e.entries().iter().map(|ej| 1.0 / tau - ej / 2.0).collect();
            let positivity_margin = positivity_margins(&a1)?;
            let d_norm_sq = operator_norm_sq(d, 1e-9)?;
            let scalar_margin = (1.0 / tau - sigma * d_norm_sq) - e.max_entry() / 2.0;
            let coupling_margin =
                coupling_margin_via_norm(&DiagonalMap::uniform(d.out_dim(), *sigma)?, d, &a1)?;
            if coupling_margin <= 0.0 {
                return Err(Error::StepSizeViolation {
                    condition: format!(
                        "1/tau - sigma ||D||^2 > ||E||/2 fails (1/tau = {}, sigma ||D||^2 = {})",
                        1.0 / tau,
                        sigma * d_norm_sq
                    ),
                    margin: scalar_margin,
                });
            }
            Ok(StepCertificate {
                positivity_margin,
                coupling_margin,
                scalar_margin: Some(scalar_margin),
            })
        }
        StepSizes::PdDiagonal { t, sigma } => {
            expect_dim("t", t.dim(), d.in_dim())?;
            expect_dim("sigma", sigma.dim(), d.out_dim())?;
            let a1: Vec<f64> = e
                .entries()
                .iter()
                .zip(t.entries().iter())
                .map(|(ej, tj)| 1.0 / tj - ej / 2.0)
                .collect();
            let positivity_margin = positivity_margins(&a1)?;
            let coupling_margin = coupling_margin_via_norm(sigma, d, &a1)?;
            if coupling_margin <= 0.0 {
                return Err(Error::StepSizeViolation {
                    condition: "||Sigma^{1/2} D (T^{-1} - E/2)^{-1/2}|| < 1 fails".into(),
                    margin: coupling_margin,
                });
            }
            Ok(StepCertificate {
                positivity_margin,
                coupling_margin,
                scalar_margin: None,
            })
        }
        StepSizes::AdmmScalar { tau, mu } => {
            check_positive("tau", *tau)?;
            check_positive("mu", *mu)?;
            let a1: Vec<f64> = e.entries().iter().map(|ej| 1.0 / tau - ej / 2.0).collect();
            let positivity_margin = positivity_margins(&a1)?;
            // coupling through the identity: 1/(mu * min_j a1_j) < 1
            let coupling_margin = 1.0 - 1.0 / (mu * positivity_margin);
            if coupling_margin <= 0.0 {
                return Err(Error::StepSizeViolation {
                    condition: format!(
                        "1/tau - 1/mu > ||E||/2 fails (1/tau = {}, 1/mu = {})",
                        1.0 / tau,
                        1.0 / mu
                    ),
                    margin: coupling_margin,
                });
            }
            Ok(StepCertificate {
                positivity_margin,
                coupling_margin,
                scalar_margin: Some((1.0 / tau - 1.0 / mu) - e.max_entry() / 2.0),
            })
        }
        StepSizes::AdmmDiagonal { t, psi } => {
            expect_dim("t", t.dim(), e.dim())?;
            expect_dim("psi", psi.dim(), e.dim())?;
            let a1: Vec<f64> = e
                .entries()
                .iter()
                .zip(t.entries().iter())
                .map(|(ej, tj)| 1.0 / tj - ej / 2.0)
                .collect();
            let positivity_margin = positivity_margins(&a1)?;
            let worst = a1
                .iter()
                .zip(psi.entries().iter())
                .map(|(a, p)| 1.0 / (p * a))
                .fold(f64::MIN, f64::max);
            let coupling_margin = 1.0 - worst;
            if coupling_margin <= 0.0 {
                return Err(Error::StepSizeViolation {
                    condition: "1/tau_j - e_j/2 > 1/psi_j must hold for every coordinate".into(),
                    margin: coupling_margin,
                });
            }
            Ok(StepCertificate {
                positivity_margin,
                coupling_margin,
                scalar_margin: None,
            })
        }
    }
}

fn coupling_margin_via_norm(dual_step: &DiagonalMap, d: &dyn LinearMap, a1: &[f64]) -> Result<f64> {
    // ||S^{1/2} D A1^{-1/2}||^2 where S is the dual step map. The scaled
    // spectrum can cluster just under 1, so the validator gets a larger
    // iteration budget than the default estimator.
    let left = dual_step.sqrt();
    let right = DiagonalMap::new(a1.iter().map(|a| 1.0 / a.sqrt()).collect())?;
    let sandwich = DiagSandwich::new(left, d, right);
    let norm_sq = crate::linops::operator_norm_sq_capped(&sandwich, 1e-9, 200_000)?;
    Ok(1.0 - norm_sq)
}

fn check_positive(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: format!("must be positive and finite, got {v}"),
        })
    }
}

fn expect_dim(name: &'static str, got: usize, expected: usize) -> Result<()> {
    if got == expected {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            context: name,
            expected,
            got,
        })
    }
}

/// Validate steps against a problem's cocoercivity diagonal and coupling map.
pub fn validate_for_problem(
    f: &dyn SmoothOracle,
    d: &dyn LinearMap,
    steps: &StepSizes,
) -> Result<StepCertificate> {
    validate_step_sizes(f.cocoercivity_diag(), d, steps)
}

/// Diagonal preconditioner from the absolute-power row/column sums:
/// tau_j = 1 / (e_j/gamma + r * sum_i |D_ij|^{2-s}),
/// phi_i = (1/r) * sum_j |D_ij|^s.
///
/// The factor r multiplies the column sums so that the two r-scalings
/// cancel in the metric bound for every r > 0. A zero column falls back
/// to tau_j = gamma/e_j; a zero row leaves the dual coordinate unused and
/// is rejected.
pub fn build_diag_preconditioner(
    d: &dyn LinearMap,
    e: &DiagonalMap,
    gamma: f64,
    r: f64,
    s: f64,
) -> Result<(DiagonalMap, DiagonalMap)> {
    if !(gamma > 0.0 && gamma < 2.0) {
        return Err(Error::InvalidParameter {
            name: "gamma",
            reason: format!("must lie in (0, 2), got {gamma}"),
        });
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "r",
            reason: format!("must be positive, got {r}"),
        });
    }
    if e.dim() != d.in_dim() {
        return Err(Error::DimensionMismatch {
            context: "build_diag_preconditioner",
            expected: d.in_dim(),
            got: e.dim(),
        });
    }
    let (row_sums, col_sums) = crate::linops::power_sums(d, s)?;
    let mut tau = Vec::with_capacity(col_sums.len());
    for (j, cs) in col_sums.iter().enumerate() {
        tau.push(1.0 / (e.get(j) / gamma + r * cs));
    }
    let mut phi = Vec::with_capacity(row_sums.len());
    for (i, rs) in row_sums.iter().enumerate() {
        if *rs == 0.0 {
            return Err(Error::InvalidParameter {
                name: "d",
                reason: format!("row {i} of D is zero: dual coordinate unused"),
            });
        }
        phi.push(rs / r);
    }
    Ok((DiagonalMap::new(tau)?, DiagonalMap::new(phi)?))
}
