//! Small dense linear algebra: pivoted solves with a condition estimate,
//! Levinson-Durbin recursions and characteristic-root moduli.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Systems with a 1-norm condition number above this are rejected.
pub const MAX_CONDITION: f64 = 1e12;

/// Solution of a dense linear system together with its 1-norm condition number.
#[derive(Debug, Clone, PartialEq)]
pub struct Solved {
    pub x: Vec<f64>,
    pub condition: f64,
}

fn norm1(m: &DMatrix<f64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Solve `a x = b` by LU with partial pivoting.
pub fn solve(a: &DMatrix<f64>, b: &DVector<f64>, context: &str) -> Result<Solved> {
    if !a.is_square() || a.nrows() != b.len() {
        return Err(Error::invalid_input(format!(
            "{context}: system shape {}x{} with rhs of length {}",
            a.nrows(),
            a.ncols(),
            b.len()
        )));
    }
    let lu = a.clone().lu();
    let inverse = lu.try_inverse().ok_or_else(|| Error::NumericalDegeneracy {
        condition: f64::INFINITY,
        context: format!("{context}: singular matrix"),
    })?;
    let condition = norm1(a) * norm1(&inverse);
    if !condition.is_finite() || condition > MAX_CONDITION {
        return Err(Error::NumericalDegeneracy {
            condition,
            context: context.to_string(),
        });
    }
    let x = lu.solve(b).ok_or_else(|| Error::NumericalDegeneracy {
        condition,
        context: format!("{context}: singular matrix"),
    })?;
    Ok(Solved {
        x: x.iter().copied().collect(),
        condition,
    })
}

/// Result of the Levinson-Durbin recursion on an autocovariance sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct Levinson {
    pub coeffs: Vec<f64>,
    pub reflection: Vec<f64>,
    /// Final one-step prediction error variance.
    pub error_variance: f64,
}

/// Solve the Toeplitz Yule-Walker system `Γ φ = γ(1..=p)` for `acvf = γ(0..=p)`.
pub fn levinson_durbin(acvf: &[f64], p: usize) -> Result<Levinson> {
    if acvf.len() < p + 1 {
        return Err(Error::invalid_input(format!(
            "levinson-durbin needs {} autocovariances, got {}",
            p + 1,
            acvf.len()
        )));
    }
    if !(acvf[0] > 0.0) {
        return Err(Error::degenerate("zero lag autocovariance is not positive"));
    }
    let mut coeffs = vec![0.0; p];
    let mut reflection = Vec::with_capacity(p);
    let mut err = acvf[0];
    for k in 0..p {
        let acc: f64 = (0..k).map(|j| coeffs[j] * acvf[k - j]).sum();
        let kappa = (acvf[k + 1] - acc) / err;
        let prev = coeffs.clone();
        coeffs[k] = kappa;
        for j in 0..k {
            coeffs[j] = prev[j] - kappa * prev[k - 1 - j];
        }
        err *= 1.0 - kappa * kappa;
        reflection.push(kappa);
        if !(err > 0.0) {
            return Err(Error::degenerate(format!(
                "prediction error vanished at order {}",
                k + 1
            )));
        }
    }
    Ok(Levinson {
        coeffs,
        reflection,
        error_variance: err,
    })
}

/// Map partial autocorrelations to AR coefficients (step-up recursion).
pub fn reflection_to_coeffs(reflection: &[f64]) -> Vec<f64> {
    let mut coeffs: Vec<f64> = Vec::with_capacity(reflection.len());
    for (k, &kappa) in reflection.iter().enumerate() {
        let prev = coeffs.clone();
        coeffs.push(kappa);
        for j in 0..k {
            coeffs[j] = prev[j] - kappa * prev[k - 1 - j];
        }
    }
    coeffs
}

/// Map AR coefficients back to partial autocorrelations (step-down recursion).
///
/// Returns `None` when some intermediate reflection coefficient has unit
/// magnitude, in which case the model is certainly not causal.
pub fn coeffs_to_reflection(coeffs: &[f64]) -> Option<Vec<f64>> {
    let mut a = coeffs.to_vec();
    let mut out = vec![0.0; coeffs.len()];
    for k in (0..coeffs.len()).rev() {
        let kappa = a[k];
        out[k] = kappa;
        let denom = 1.0 - kappa * kappa;
        if denom.abs() < f64::EPSILON {
            return None;
        }
        let prev = a.clone();
        for j in 0..k {
            a[j] = (prev[j] + kappa * prev[k - 1 - j]) / denom;
        }
        a.truncate(k);
    }
    Some(out)
}

/// Moduli of the inverse characteristic roots of `1 - φ₁z - … - φ_p z^p`,
/// i.e. the eigenvalue moduli of the companion matrix, sorted descending.
pub fn inverse_root_moduli(coeffs: &[f64]) -> Vec<f64> {
    let p = coeffs.len();
    let mut companion = DMatrix::<f64>::zeros(p, p);
    for (j, &c) in coeffs.iter().enumerate() {
        companion[(0, j)] = c;
    }
    for i in 1..p {
        companion[(i, i - 1)] = 1.0;
    }
    let mut moduli: Vec<f64> = companion
        .complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .collect();
    moduli.sort_by(|a, b| b.total_cmp(a));
    moduli
}
