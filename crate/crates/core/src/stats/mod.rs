//! Rank correlations, length-controlled partial correlation, OLS with
//! variance inflation factors, and nonparametric tests.
//!
//! Ties get mid-ranks everywhere. p-values use asymptotic t, chi-square and
//! normal approximations.

mod correlation;
mod hypothesis;
mod ols;
mod rank;

use serde::Serialize;

pub use correlation::{partial_spearman, pearson, spearman, Correlation};
pub use hypothesis::{chi_square_independence, kruskal_wallis, mann_whitney_u};
pub use ols::{ols_fit, OlsFit};
pub use rank::{midranks, tie_sizes};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
    pub dof: Option<usize>,
    /// +1 when the first sample tends larger, -1 when smaller.
    pub effect_direction: Option<i8>,
}
