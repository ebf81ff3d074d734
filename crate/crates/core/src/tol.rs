/// Numerical thresholds shared by every check.
///
/// `eq` bounds absolute Frobenius residuals of identities; `rank` is the
/// relative singular-value cutoff used for every rank and kernel decision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tol {
    pub eq: f64,
    pub rank: f64,
}

impl Default for Tol {
    fn default() -> Self {
        Tol {
            eq: 1e-9,
            rank: 1e-8,
        }
    }
}

impl Tol {
    pub fn with_eq(eq: f64) -> Self {
        Tol {
            eq,
            ..Tol::default()
        }
    }

    pub fn ok(&self, residual: f64) -> bool {
        residual.is_finite() && residual <= self.eq
    }
}
