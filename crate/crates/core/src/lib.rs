//! Gaussian "summation" rules for half-weighted, exponentially decaying
//! lattice sums
//!
//! ```text
//! sum'_{n>=0} f(n h) e^{-n h s} h  ~=  sum_k w_k f(x_k)
//! ```
//!
//! where the prime halves the `n = 0` term. The rules come from the
//! modified discrete Laguerre polynomials, orthogonal under exactly that
//! half-weighted measure, via their closed-form three-term recurrence and
//! the Golub-Welsch eigenproblem. As `h -> 0` they reduce to Gauss-Laguerre
//! rules for `int_0^inf f(x) e^{-s x} dx`.
//!
//! ```
//! use mdlquad::{build_rule, MeasureSpec};
//!
//! let measure = MeasureSpec::bosonic(0.01, 1.0).unwrap();
//! let rule = build_rule(8, &measure).unwrap();
//! // sum' cos(n h) e^{-n h} h with eight evaluations of cos.
//! let estimate = rule.apply(f64::cos);
//! assert!((estimate - 0.5).abs() < 1e-2);
//! ```

pub mod cli;
pub mod compensated;
pub mod error;
pub mod measure;
pub mod oracle;
pub mod quadrature;
pub mod recurrence;
pub mod summation;

pub use error::{Error, Result};
pub use measure::{Flavor, MeasureSpec, Tau};
pub use quadrature::{
    build_rule, gauss_laguerre_rule, tridiag_eigen, QuadratureRule, RuleSource, TridiagEigen,
};
pub use recurrence::{
    build_recurrence_table, dl_eval, mdl_eval, mdl_orthonormal_lattice_values, mdl_scalar_props,
    normalized_coeffs, MdlScalarProps, RecurrenceTable,
};
pub use summation::{
    convergence_study, mdl_sum, naive_partial_sum, root_trajectory, ConvergenceReport,
    ConvergenceRow, Execution, RootRow, Strategy, Summand,
};
