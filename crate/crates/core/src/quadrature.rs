//! Double-exponential (tanh-sinh) quadrature.
//!
//! The node distribution clusters doubly-exponentially at both ends of the
//! interval, so algebraic endpoint singularities like `t^{-5/6}` at `t = 0`
//! are integrated to near machine precision without special treatment. The
//! step is halved until two successive levels agree.

use std::cell::Cell;

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature<T> {
    pub value: T,
    pub error: T,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct TanhSinh<T> {
    pub abs_tol: T,
    pub rel_tol: T,
    pub max_level: usize,
}

impl<T: Real> Default for TanhSinh<T> {
    fn default() -> Self {
        Self {
            abs_tol: lit(1e-12),
            rel_tol: T::epsilon() * lit(64.0),
            max_level: 12,
        }
    }
}

impl<T: Real> TanhSinh<T> {
    pub fn with_abs_tol(abs_tol: T) -> Self {
        Self {
            abs_tol,
            ..Self::default()
        }
    }

    /// Integrates `f` over `[a, b]`. `f` is never evaluated at the endpoints.
    pub fn integrate<F>(&self, f: F, a: T, b: T) -> Result<Quadrature<T>>
    where
        F: Fn(T) -> T,
    {
        if a == b {
            return Ok(Quadrature {
                value: T::zero(),
                error: T::zero(),
                evaluations: 0,
            });
        }
        if b < a {
            let q = self.integrate(f, b, a)?;
            return Ok(Quadrature { value: -q.value, ..q });
        }
        let width = b - a;
        let half_pi = T::FRAC_PI_2();
        let evaluations = Cell::new(0usize);

        // Weighted sample at abscissa parameter tau; None once the node has
        // collapsed onto an endpoint.
        let node = |tau: T| -> Result<Option<T>> {
            let u = half_pi * tau.sinh();
            let (x, s_times_c) = if tau < T::zero() {
                let e = (-(u + u)).exp();
                let s = T::one() / (T::one() + e);
                (a + width * s, s * (T::one() - s))
            } else {
                let e = (u + u).exp();
                let c = T::one() / (T::one() + e);
                (b - width * c, c * (T::one() - c))
            };
            if !(x > a && x < b) || s_times_c == T::zero() {
                return Ok(None);
            }
            let w = width * T::PI() * tau.cosh() * s_times_c;
            let fx = f(x);
            evaluations.set(evaluations.get() + 1);
            if !fx.is_finite() {
                return Err(Error::Divergence(format!(
                    "integrand not finite at x = {x:e}"
                )));
            }
            Ok(Some(w * fx))
        };

        let mut h = lit::<T>(0.5);
        // level 0: all multiples of h
        let mut sum = node(T::zero())?.unwrap_or_else(T::zero);
        for sign in [T::one(), -T::one()] {
            let mut j = 1usize;
            while let Some(v) = node(sign * h * T::of_usize(j))? {
                sum = sum + v;
                j += 1;
                if j > 100_000 {
                    break;
                }
            }
        }
        let mut estimate = sum * h;
        let mut error = T::infinity();
        for level in 1..=self.max_level {
            h = h * lit(0.5);
            let mut add = T::zero();
            for sign in [T::one(), -T::one()] {
                let mut j = 1usize;
                while let Some(v) = node(sign * h * T::of_usize(j))? {
                    add = add + v;
                    j += 2;
                    if j > 1_000_000 {
                        break;
                    }
                }
            }
            sum = sum + add;
            let next = sum * h;
            error = (next - estimate).abs();
            estimate = next;
            let tol = self.abs_tol.max(self.rel_tol * estimate.abs());
            if level >= 3 && error <= tol {
                return Ok(Quadrature {
                    value: estimate,
                    error,
                    evaluations: evaluations.get(),
                });
            }
        }
        let tol = self.abs_tol.max(self.rel_tol * estimate.abs());
        if error <= tol * lit(1e3) {
            // accept a result that stalled just above the requested tolerance
            return Ok(Quadrature {
                value: estimate,
                error,
                evaluations: evaluations.get(),
            });
        }
        Err(Error::NoConvergence(format!(
            "tanh-sinh on [{a:e}, {b:e}] stalled at error {error:e}"
        )))
    }

    /// Integrates over consecutive sub-intervals given by `breaks`, which
    /// must be sorted. Use this for integrands with interior kinks.
    pub fn integrate_pieces<F>(&self, f: F, breaks: &[T]) -> Result<Quadrature<T>>
    where
        F: Fn(T) -> T,
    {
        let mut total = Quadrature {
            value: T::zero(),
            error: T::zero(),
            evaluations: 0,
        };
        for w in breaks.windows(2) {
            let q = self.integrate(&f, w[0], w[1])?;
            total.value = total.value + q.value;
            total.error = total.error + q.error;
            total.evaluations += q.evaluations;
        }
        Ok(total)
    }
}

/// Convenience wrapper with default tolerances.
pub fn integrate<T: Real, F: Fn(T) -> T>(f: F, a: T, b: T) -> Result<T> {
    TanhSinh::default().integrate(f, a, b).map(|q| q.value)
}
