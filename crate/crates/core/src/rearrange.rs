//! Distribution functions, decreasing rearrangements, maximal functions and
//! Schwarz symmetrization.

use std::sync::Arc;

use crate::error::{domain, Error, Result};
use crate::green::BallGeometry;
use crate::profile::{Analytic, Form, MonotoneProfile, Piece};
use crate::radial::{RadialForm, RadialProfile, RadialSegment};
use crate::scalar::{lit, Real};

/// Value of `|u|` on a cell together with the cell's measure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellSample<T = f64> {
    pub value: T,
    pub measure: T,
}

impl<T: Real> CellSample<T> {
    pub fn new(value: T, measure: T) -> Self {
        Self { value, measure }
    }
}

fn check_samples<T: Real>(samples: &[CellSample<T>]) -> Result<()> {
    for (i, c) in samples.iter().enumerate() {
        if !c.value.is_finite() {
            return Err(domain!("cell {i} has a non-finite value"));
        }
        if !(c.measure >= T::zero()) || !c.measure.is_finite() {
            return Err(domain!("cell {i} has invalid measure {:e}", c.measure));
        }
    }
    Ok(())
}

/// `|{x : |u(x)| > s}|` for sampled data.
pub fn distribution_function<T: Real>(samples: &[CellSample<T>], s: T) -> Result<T> {
    if !(s >= T::zero()) {
        return Err(domain!("level must be non-negative, got {s:e}"));
    }
    check_samples(samples)?;
    Ok(samples
        .iter()
        .filter(|c| c.value.abs() > s)
        .fold(T::zero(), |acc, c| acc + c.measure))
}

/// Step profile of `|u|`: cells sorted by value, equal values merged.
pub fn decreasing_rearrangement<T: Real>(samples: &[CellSample<T>]) -> Result<MonotoneProfile<T>> {
    check_samples(samples)?;
    let mut cells: Vec<(T, T)> = samples
        .iter()
        .filter(|c| c.measure > T::zero())
        .map(|c| (c.value.abs(), c.measure))
        .collect();
    if cells.is_empty() {
        return Err(domain!("no cell of positive measure"));
    }
    cells.sort_unstable_by(|a, b| b.0.partial_cmp(&a.0).expect("finite values"));
    let mut steps: Vec<(T, T)> = Vec::with_capacity(cells.len());
    for (value, measure) in cells {
        match steps.last_mut() {
            Some(last) if last.0 == value => last.1 = last.1 + measure,
            _ => steps.push((value, measure)),
        }
    }
    MonotoneProfile::from_steps(&steps)
}

/// `u^{**}(t) = (1/t) ∫_0^t u^*`, piece by piece.
pub fn maximal_function<T: Real>(u_star: &MonotoneProfile<T>) -> Result<MonotoneProfile<T>> {
    let mut base = T::zero();
    let mut pieces = Vec::with_capacity(u_star.pieces().len());
    for p in u_star.pieces() {
        let form = match &p.form {
            Form::Constant(c) if p.lo == T::zero() => Form::Constant(*c),
            Form::Constant(c) => Form::Power {
                a: base - *c * p.lo,
                e: T::one(),
                b: *c,
            },
            other => Form::Average {
                inner: Arc::new(other.clone()),
                lo: p.lo,
                base,
            },
        };
        let part = p.form.integral(p.lo, p.hi).map_err(|e| match e {
            Error::Divergence(msg) => Error::Divergence(format!("maximal function undefined: {msg}")),
            other => other,
        })?;
        base = base + part;
        pieces.push(Piece {
            lo: p.lo,
            hi: p.hi,
            form,
        });
    }
    MonotoneProfile::new(pieces, u_star.tail())
}

/// Radial function `r ↦ u^*(|B_r|)` on the ball.
pub fn schwarz_profile<T: Real>(u_star: &MonotoneProfile<T>, geom: &BallGeometry<T>) -> Result<RadialProfile<T>> {
    let total = u_star.total_measure();
    if (total - geom.volume).abs() > lit::<T>(1e-12) * geom.volume {
        return Err(domain!(
            "profile measure {total:e} differs from the ball volume {:e}",
            geom.volume
        ));
    }
    let nf = geom.dim();
    let to_r2 = (geom.omega / nf).powf(lit::<T>(2.0) / nf);
    let pieces = u_star.pieces();
    let mut segments = Vec::with_capacity(pieces.len());
    for (i, p) in pieces.iter().enumerate() {
        let lo = geom.radius_of(p.lo);
        let hi = if i + 1 == pieces.len() { geom.radius } else { geom.radius_of(p.hi) };
        let same_ball = |n: u32, v: T| n == geom.n && (v - geom.volume).abs() <= lit::<T>(1e-12) * geom.volume;
        let form = match &p.form {
            Form::Constant(c) => RadialForm::Constant(*c),
            Form::Kernel { n, v, a, b, q } if same_ball(*n, *v) => RadialForm::Kernel {
                a: *a,
                b: *b,
                q: *q * to_r2,
            },
            other => {
                let inner = other.clone();
                let g = *geom;
                RadialForm::Analytic(Analytic::new(move |r| inner.eval(g.volume_of(r))))
            }
        };
        segments.push(RadialSegment { lo, hi, form });
    }
    RadialProfile::new(*geom, segments)
}
