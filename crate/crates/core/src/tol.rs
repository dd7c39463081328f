/// Tolerance policy shared by every stage.
///
/// * `abs_residual` — absolute bound for identity residuals (Frobenius / max
///   norms of differences).
/// * `pd_ratio` — a Hermitian matrix counts as positive definite when its
///   smallest eigenvalue exceeds `pd_ratio` times its largest.
/// * `rank_ratio` — singular values below `rank_ratio` times the largest are
///   treated as zero in rank decisions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs_residual: f64,
    pub pd_ratio: f64,
    pub rank_ratio: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            abs_residual: 1e-9,
            pd_ratio: 1e-10,
            rank_ratio: 1e-10,
        }
    }
}

impl Tolerance {
    /// Tolerance with a custom absolute residual bound and default ratios.
    pub fn with_abs(abs_residual: f64) -> Self {
        assert!(abs_residual > 0.0, "tolerances must be strictly positive");
        Tolerance {
            abs_residual,
            ..Tolerance::default()
        }
    }
}
