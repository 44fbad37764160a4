use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Numerical thresholds shared by every operation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Relative tolerance for equalities of matrices and scalars.
    pub tol_eq: f64,
    /// Spectral floor for positivity tests.
    pub tol_psd: f64,
    /// Threshold below which a kernel entry counts as zero.
    pub tol_zero: f64,
    /// Rank threshold for span and conditioning decisions.
    pub tol_rank: f64,
    /// Threshold on classification residuals.
    pub tol_class: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            tol_eq: 1e-8,
            tol_psd: 1e-10,
            tol_zero: 1e-12,
            tol_rank: 1e-10,
            tol_class: 1e-7,
        }
    }
}

impl Tolerances {
    pub fn with_eq(mut self, tol_eq: f64) -> Self {
        self.tol_eq = tol_eq;
        self
    }

    pub fn with_psd(mut self, tol_psd: f64) -> Self {
        self.tol_psd = tol_psd;
        self
    }

    /// Checks that every threshold lies in `(0, 1e-2)`.
    pub fn validated(self) -> Result<Self> {
        let fields = [
            ("tol_eq", self.tol_eq),
            ("tol_psd", self.tol_psd),
            ("tol_zero", self.tol_zero),
            ("tol_rank", self.tol_rank),
            ("tol_class", self.tol_class),
        ];
        for (name, v) in fields {
            if !(v > 0.0 && v < 1e-2) {
                return Err(Error::BadTolerance { name, value: v });
            }
        }
        Ok(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        assert!(Tolerances::default().validated().is_ok());
    }

    #[test]
    fn rejects_large_or_nonpositive() {
        assert!(Tolerances::default().with_eq(0.5).validated().is_err());
        assert!(Tolerances::default().with_psd(0.0).validated().is_err());
        assert!(Tolerances::default().with_eq(f64::NAN).validated().is_err());
    }
}
