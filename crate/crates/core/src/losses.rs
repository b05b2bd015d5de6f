//! Per-sample convex losses and their Fenchel conjugates.
//!
//! A loss enters the solvers only through a handful of scalar maps: the
//! loss itself, its derivative, the conjugate `l*(a) = sup_u { a u - l(u) }`
//! with its derivative, the strong-convexity constant `mu` of the conjugate,
//! and the projection onto the conjugate's domain. Vector loops live in
//! [`crate::model`].

/// Scalar loss `l(u; y)` together with the dual-side quantities the
/// primal-dual solvers need.
///
/// Implementations must not assume the dual feasible set is the whole real
/// line; [`LossModel::project_feasible`] and [`LossModel::is_feasible`] are the
/// only places the solvers learn about it.
pub trait LossModel: Send + Sync {
    /// `l(u; y)`.
    fn eval(&self, u: f64, y: f64) -> f64;

    /// `l'(u; y)`.
    fn deriv(&self, u: f64, y: f64) -> f64;

    /// Fenchel conjugate `l*(a; y)`.
    fn conj(&self, a: f64, y: f64) -> f64;

    /// Derivative of the conjugate, `l*'(a; y)`.
    fn conj_deriv(&self, a: f64, y: f64) -> f64;

    /// Strong-convexity constant of `l*` (equivalently `1 / smoothness` of `l`).
    fn mu(&self) -> f64;

    /// Euclidean projection of a dual coordinate onto the feasible set.
    fn project_feasible(&self, a: f64) -> f64;

    fn is_feasible(&self, a: f64) -> bool;

    /// A point of `(l*')^{-1}(u)` inside the feasible set: the dual value
    /// matching fitted value `u`.
    fn dual_from_fit(&self, u: f64, y: f64) -> f64;
}

/// `l(u; y) = (y - u)^2 / 2`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SquaredLoss;

impl LossModel for SquaredLoss {
    #[inline]
    fn eval(&self, u: f64, y: f64) -> f64 {
        let r = y - u;
        0.5 * r * r
    }

    #[inline]
    fn deriv(&self, u: f64, y: f64) -> f64 {
        u - y
    }

    #[inline]
    fn conj(&self, a: f64, y: f64) -> f64 {
        squared_conj(a, y)
    }

    #[inline]
    fn conj_deriv(&self, a: f64, y: f64) -> f64 {
        a + y
    }

    #[inline]
    fn mu(&self) -> f64 {
        1.0
    }

    #[inline]
    fn project_feasible(&self, a: f64) -> f64 {
        a
    }

    #[inline]
    fn is_feasible(&self, a: f64) -> bool {
        a.is_finite()
    }

    #[inline]
    fn dual_from_fit(&self, u: f64, y: f64) -> f64 {
        squared_dual_from_fit(u, y)
    }
}

/// Conjugate of the squared loss: `a^2 / 2 + y a`.
#[inline]
pub fn squared_conj(a: f64, y: f64) -> f64 {
    0.5 * a * a + y * a
}

/// Dual point matching fitted value `u` under the squared loss: `u - y`.
#[inline]
pub fn squared_dual_from_fit(u: f64, y: f64) -> f64 {
    u - y
}
