//! Non-increasing functions on the measure axis `(0, V]`.
//!
//! A [`MonotoneProfile`] is a contiguous list of pieces `[lo, hi)`, each
//! carrying a [`Form`]. Step data use [`Form::Constant`]; rearranged Green
//! potentials keep their closed form so that values near `t = 0` are never
//! re-derived from samples.

use std::fmt;
use std::sync::Arc;

use crate::error::{domain, Error, Result};
use crate::green::{green_rearranged_scaled, green_rearranged_unchecked, kernel_constant, kernel_exponent, Scaled};
use crate::quadrature::TanhSinh;
use crate::scalar::{lit, Real};
use crate::special::{binomial, upper_gamma_scaled};

/// Evaluator used when no closed form is available.
#[derive(Clone)]
pub struct Analytic<T>(pub Arc<dyn Fn(T) -> T + Send + Sync>);

impl<T> Analytic<T> {
    pub fn new(f: impl Fn(T) -> T + Send + Sync + 'static) -> Self {
        Self(Arc::new(f))
    }
}

impl<T> fmt::Debug for Analytic<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Analytic(..)")
    }
}

/// Closed-form expression of one piece, as a function of the measure `t`.
#[derive(Debug, Clone)]
pub enum Form<T> {
    Constant(T),
    /// `a t^{-e} + b`
    Power { a: T, e: T, b: T },
    /// `a N_v^*(t) + b + q t^{2/n}`; the pull-back of a radial potential.
    Kernel { n: u32, v: T, a: T, b: T, q: T },
    /// `coef (N_v^*(t))^gamma + offset`
    KernelPower { n: u32, v: T, coef: T, gamma: T, offset: T },
    /// `(base + ∫_lo^t inner) / t`, the running average of `inner`.
    Average { inner: Arc<Form<T>>, lo: T, base: T },
    /// Linear interpolation through `(t, value)` nodes sorted by `t`.
    Sampled(Arc<[(T, T)]>),
    Analytic(Analytic<T>),
}

/// `hi^k - lo^k` for `k > 0`, accurate when `lo` is close to `hi`.
fn pow_diff<T: Real>(hi: T, lo: T, k: T) -> T {
    if lo <= T::zero() {
        return hi.powf(k);
    }
    -hi.powf(k) * (k * (lo / hi).ln()).exp_m1()
}

fn kernel_term_integral<T: Real>(n: u32, v: T, lo: T, hi: T) -> T {
    // ∫ N_v^* over [lo, hi]
    if n == 2 {
        let part = |t: T| if t <= T::zero() { T::zero() } else { t * ((v / t).ln() + T::one()) };
        return (part(hi) - part(lo)) / (lit::<T>(4.0) * T::PI());
    }
    let p: T = kernel_exponent(n);
    let half_n = T::of_usize(n as usize) / lit(2.0);
    kernel_constant::<T>(n) * (half_n * pow_diff(hi, lo, T::one() - p) - (hi - lo) * v.powf(-p))
}

fn quadratic_term_integral<T: Real>(n: u32, lo: T, hi: T) -> T {
    // ∫ t^{2/n} over [lo, hi]
    let k = T::one() + lit::<T>(2.0) / T::of_usize(n as usize);
    pow_diff(hi, lo, k) / k
}

/// `∫_0^τ (y^{-p} - 1)^γ dy`.
fn reduced_kernel_power_integral<T: Real>(p: T, gamma: T, tau: T) -> Result<T> {
    if p * gamma >= T::one() {
        return Err(Error::Divergence(format!(
            "kernel power {gamma:e} is not integrable at the origin"
        )));
    }
    if tau <= T::zero() {
        return Ok(T::zero());
    }
    let half: T = lit(0.5);
    let split = half.powf(T::one() / p);
    let series = |tau: T| {
        let x = tau.powf(p);
        let mut sum = T::zero();
        let mut xk = T::one();
        for k in 0..200 {
            let expo = T::one() - p * gamma + p * T::of_usize(k);
            let term = binomial(gamma, k) * xk / expo;
            let term = if k % 2 == 1 { -term } else { term };
            sum = sum + term;
            if term.abs() <= T::epsilon() * sum.abs() * lit(0.01) && k > 2 {
                break;
            }
            xk = xk * x;
        }
        sum * tau.powf(T::one() - p * gamma)
    };
    if tau <= split {
        return Ok(series(tau));
    }
    let head = series(split);
    let rest = TanhSinh::default().integrate(|y: T| (y.powf(-p) - T::one()).max(T::zero()).powf(gamma), split, tau)?;
    Ok(head + rest.value)
}

impl<T: Real> Form<T> {
    pub fn eval(&self, t: T) -> T {
        match self {
            Form::Constant(c) => *c,
            Form::Power { a, e, b } => *a * t.powf(-*e) + *b,
            Form::Kernel { n, v, a, b, q } => {
                let mut x = *b;
                if *a != T::zero() {
                    x = x + *a * green_rearranged_unchecked(*n, *v, t.min(*v));
                }
                if *q != T::zero() {
                    x = x + *q * t.powf(lit::<T>(2.0) / T::of_usize(*n as usize));
                }
                x
            }
            Form::KernelPower {
                n,
                v,
                coef,
                gamma,
                offset,
            } => {
                let k = green_rearranged_unchecked(*n, *v, t.min(*v)).max(T::zero());
                *coef * k.powf(*gamma) + *offset
            }
            Form::Average { inner, lo, base } => {
                if t <= *lo {
                    return if *lo > T::zero() { *base / *lo } else { inner.eval(t) };
                }
                let part = inner.integral(*lo, t).unwrap_or(T::nan());
                (*base + part) / t
            }
            Form::Sampled(nodes) => interpolate(nodes, t),
            Form::Analytic(f) => (f.0)(t),
        }
    }

    /// `∫_lo^hi form(t) dt`, in closed form whenever the form allows it.
    pub fn integral(&self, lo: T, hi: T) -> Result<T> {
        if hi <= lo {
            return Ok(T::zero());
        }
        match self {
            Form::Constant(c) => Ok(*c * (hi - lo)),
            Form::Power { a, e, b } => {
                let lin = *b * (hi - lo);
                if *a == T::zero() {
                    return Ok(lin);
                }
                let k = T::one() - *e;
                if lo == T::zero() && k <= T::zero() {
                    return Err(Error::Divergence(format!("t^-{e:e} is not integrable at 0")));
                }
                let main = if k == T::zero() {
                    (hi / lo).ln()
                } else if k > T::zero() {
                    pow_diff(hi, lo, k) / k
                } else {
                    (hi.powf(k) - lo.powf(k)) / k
                };
                Ok(*a * main + lin)
            }
            Form::Kernel { n, v, a, b, q } => {
                let mut x = *b * (hi - lo);
                if *a != T::zero() {
                    x = x + *a * kernel_term_integral(*n, *v, lo, hi.min(*v));
                }
                if *q != T::zero() {
                    x = x + *q * quadratic_term_integral(*n, lo, hi);
                }
                Ok(x)
            }
            Form::KernelPower {
                n,
                v,
                coef,
                gamma,
                offset,
            } => {
                let lin = *offset * (hi - lo);
                let hi_c = hi.min(*v);
                if *coef == T::zero() || lo >= hi_c {
                    return Ok(lin);
                }
                if *gamma == T::one() {
                    return Ok(*coef * kernel_term_integral(*n, *v, lo, hi_c) + lin);
                }
                let from_zero = |t: T| -> Result<T> {
                    if t <= T::zero() {
                        return Ok(T::zero());
                    }
                    if *n == 2 {
                        let four_pi = lit::<T>(4.0) * T::PI();
                        let ell = (*v / t).ln().max(T::zero());
                        return Ok(four_pi.powf(-*gamma) * t * upper_gamma_scaled(*gamma + T::one(), ell));
                    }
                    let p: T = kernel_exponent(*n);
                    let k: T = kernel_constant(*n);
                    Ok(k.powf(*gamma)
                        * v.powf(T::one() - p * *gamma)
                        * reduced_kernel_power_integral(p, *gamma, t / *v)?)
                };
                let main = if lo > hi_c * lit(0.5) {
                    let f = |t: T| green_rearranged_unchecked(*n, *v, t).max(T::zero()).powf(*gamma);
                    TanhSinh::default().integrate(f, lo, hi_c)?.value
                } else {
                    from_zero(hi_c)? - from_zero(lo)?
                };
                Ok(*coef * main + lin)
            }
            Form::Sampled(nodes) => Ok(sampled_integral(nodes, lo, hi)),
            Form::Average { .. } | Form::Analytic(_) => {
                let q = TanhSinh::default().integrate(|t| self.eval(t), lo, hi)?;
                Ok(q.value)
            }
        }
    }

    /// Subtracts a constant, keeping the closed form when possible.
    pub fn shifted(&self, delta: T) -> Form<T> {
        match self {
            Form::Constant(c) => Form::Constant(*c - delta),
            Form::Power { a, e, b } => Form::Power {
                a: *a,
                e: *e,
                b: *b - delta,
            },
            Form::Kernel { n, v, a, b, q } => Form::Kernel {
                n: *n,
                v: *v,
                a: *a,
                b: *b - delta,
                q: *q,
            },
            Form::KernelPower {
                n,
                v,
                coef,
                gamma,
                offset,
            } => Form::KernelPower {
                n: *n,
                v: *v,
                coef: *coef,
                gamma: *gamma,
                offset: *offset - delta,
            },
            Form::Sampled(nodes) => Form::Sampled(nodes.iter().map(|&(t, x)| (t, x - delta)).collect()),
            other => {
                let inner = other.clone();
                Form::Analytic(Analytic::new(move |t| inner.eval(t) - delta))
            }
        }
    }

    /// Multiplies by a constant.
    pub fn scaled(&self, c: T) -> Form<T> {
        match self {
            Form::Constant(x) => Form::Constant(*x * c),
            Form::Power { a, e, b } => Form::Power {
                a: *a * c,
                e: *e,
                b: *b * c,
            },
            Form::Kernel { n, v, a, b, q } => Form::Kernel {
                n: *n,
                v: *v,
                a: *a * c,
                b: *b * c,
                q: *q * c,
            },
            Form::KernelPower {
                n,
                v,
                coef,
                gamma,
                offset,
            } => Form::KernelPower {
                n: *n,
                v: *v,
                coef: *coef * c,
                gamma: *gamma,
                offset: *offset * c,
            },
            Form::Sampled(nodes) => Form::Sampled(nodes.iter().map(|&(t, x)| (t, x * c)).collect()),
            other => {
                let inner = other.clone();
                Form::Analytic(Analytic::new(move |t| inner.eval(t) * c))
            }
        }
    }

    /// Value at `t = V e^{-ell}` in split form, for head pieces starting at
    /// the origin. `None` when the form has no such representation.
    pub fn scaled_at(&self, total: T, ell: T) -> Option<Scaled<T>> {
        match self {
            Form::Constant(c) => Some(Scaled::plain(*c)),
            Form::Power { a, e, b } => {
                if *e > T::zero() {
                    Some(Scaled {
                        mantissa: *a * total.powf(-*e) + *b * (-*e * ell).exp(),
                        log_scale: *e * ell,
                    })
                } else {
                    Some(Scaled::plain(*a * total.powf(-*e) * (*e * ell).exp() + *b))
                }
            }
            Form::Kernel { n, v, a, b, q } => {
                let ell0 = ell + (*v / total).ln();
                let k = green_rearranged_scaled(*n, *v, ell0);
                let s = k.log_scale;
                let quad = *q * total.powf(lit::<T>(2.0) / T::of_usize(*n as usize));
                Some(Scaled {
                    mantissa: *a * k.mantissa
                        + *b * (-s).exp()
                        + quad * (-lit::<T>(2.0) / T::of_usize(*n as usize) * ell - s).exp(),
                    log_scale: s,
                })
            }
            Form::KernelPower {
                n,
                v,
                coef,
                gamma,
                offset,
            } => {
                let ell0 = ell + (*v / total).ln();
                let k = green_rearranged_scaled(*n, *v, ell0);
                let s = *gamma * k.log_scale;
                Some(Scaled {
                    mantissa: *coef * k.mantissa.max(T::zero()).powf(*gamma) + *offset * (-s).exp(),
                    log_scale: s,
                })
            }
            Form::Average { inner, lo, base } if *lo == T::zero() && *base == T::zero() => {
                inner.average_scaled_at(total, ell)
            }
            _ => None,
        }
    }

    /// `(1/t) ∫_0^t form` at `t = V e^{-ell}` in split form.
    pub fn average_scaled_at(&self, total: T, ell: T) -> Option<Scaled<T>> {
        match self {
            Form::Constant(c) => Some(Scaled::plain(*c)),
            Form::Power { a, e, b } => {
                if *e >= T::one() && *a != T::zero() {
                    return None;
                }
                let c = *a / (T::one() - *e);
                if *e > T::zero() {
                    Some(Scaled {
                        mantissa: c * total.powf(-*e) + *b * (-*e * ell).exp(),
                        log_scale: *e * ell,
                    })
                } else {
                    Some(Scaled::plain(c * total.powf(-*e) * (*e * ell).exp() + *b))
                }
            }
            Form::Kernel { n, v, a, b, q } => {
                let ell0 = ell + (*v / total).ln();
                let nf = T::of_usize(*n as usize);
                let two = lit::<T>(2.0);
                let (m, s) = if *n == 2 {
                    ((T::one() + ell0) / (lit::<T>(4.0) * T::PI()), T::zero())
                } else {
                    let p: T = kernel_exponent(*n);
                    let km = kernel_constant::<T>(*n) * v.powf(-p) * (nf / two - (-p * ell0).exp());
                    (km, p * ell0)
                };
                let quad = *q * nf / (nf + two) * total.powf(two / nf);
                Some(Scaled {
                    mantissa: *a * m + *b * (-s).exp() + quad * (-two / nf * ell - s).exp(),
                    log_scale: s,
                })
            }
            Form::KernelPower {
                n,
                v,
                coef,
                gamma,
                offset,
            } => {
                let ell0 = ell + (*v / total).ln();
                if *n == 2 {
                    let four_pi = lit::<T>(4.0) * T::PI();
                    return Some(Scaled::plain(
                        *coef * four_pi.powf(-*gamma) * upper_gamma_scaled(*gamma + T::one(), ell0) + *offset,
                    ));
                }
                let p: T = kernel_exponent(*n);
                if p * *gamma >= T::one() {
                    return None;
                }
                let x = (-p * ell0).exp();
                if x > lit(0.5) {
                    return None;
                }
                let mut sum = T::zero();
                let mut xk = T::one();
                for k in 0..200 {
                    let expo = T::one() - p * *gamma + p * T::of_usize(k);
                    let term = binomial(*gamma, k) * xk / expo;
                    let term = if k % 2 == 1 { -term } else { term };
                    sum = sum + term;
                    if term.abs() <= T::epsilon() * sum.abs() * lit(0.01) && k > 2 {
                        break;
                    }
                    xk = xk * x;
                }
                let k: T = kernel_constant(*n);
                let s = p * *gamma * ell0;
                Some(Scaled {
                    mantissa: *coef * k.powf(*gamma) * v.powf(-p * *gamma) * sum + *offset * (-s).exp(),
                    log_scale: s,
                })
            }
            _ => None,
        }
    }

    /// Measure of `{t in [lo, hi) : form(t) > s}` for a non-increasing form.
    pub fn superlevel_width(&self, lo: T, hi: T, s: T) -> T {
        if hi <= lo {
            return T::zero();
        }
        if let Form::Constant(c) = self {
            return if *c > s { hi - lo } else { T::zero() };
        }
        let probe_lo = if lo > T::zero() { lo } else { hi * T::min_positive_value().sqrt() };
        if self.eval(probe_lo) <= s {
            return T::zero();
        }
        if self.eval(hi) > s {
            return hi - lo;
        }
        let geometric = lo == T::zero() || hi / lo > lit(4.0);
        let (mut a, mut b) = (probe_lo, hi);
        for _ in 0..400 {
            let mid = if geometric { (a * b).sqrt() } else { a + (b - a) / lit(2.0) };
            if mid <= a || mid >= b {
                break;
            }
            if self.eval(mid) > s {
                a = mid;
            } else {
                b = mid;
            }
        }
        b - lo
    }
}

fn interpolate<T: Real>(nodes: &[(T, T)], t: T) -> T {
    match nodes.len() {
        0 => T::nan(),
        1 => nodes[0].1,
        len => {
            if t <= nodes[0].0 {
                return nodes[0].1;
            }
            if t >= nodes[len - 1].0 {
                return nodes[len - 1].1;
            }
            let j = nodes.partition_point(|&(x, _)| x <= t);
            let (t0, y0) = nodes[j - 1];
            let (t1, y1) = nodes[j];
            y0 + (y1 - y0) * (t - t0) / (t1 - t0)
        }
    }
}

fn sampled_integral<T: Real>(nodes: &[(T, T)], lo: T, hi: T) -> T {
    let mut pts = vec![(lo, interpolate(nodes, lo))];
    pts.extend(nodes.iter().copied().filter(|&(t, _)| t > lo && t < hi));
    pts.push((hi, interpolate(nodes, hi)));
    pts.windows(2)
        .map(|w| (w[1].0 - w[0].0) * (w[0].1 + w[1].1) / lit(2.0))
        .fold(T::zero(), |acc, x| acc + x)
}

/// What a profile is worth beyond its total measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailBehavior {
    ZeroBeyond,
    AnalyticExtension,
}

#[derive(Debug, Clone)]
pub struct Piece<T> {
    pub lo: T,
    pub hi: T,
    pub form: Form<T>,
}

/// Non-increasing, right-continuous function on `(0, V]`.
#[derive(Debug, Clone)]
pub struct MonotoneProfile<T = f64> {
    pieces: Vec<Piece<T>>,
    total: T,
    tail: TailBehavior,
}

impl<T: Real> MonotoneProfile<T> {
    /// Builds a profile from contiguous pieces covering `(0, total]`.
    pub fn new(pieces: Vec<Piece<T>>, tail: TailBehavior) -> Result<Self> {
        let Some(last) = pieces.last() else {
            return Err(domain!("a profile needs at least one piece"));
        };
        let total = last.hi;
        if pieces[0].lo != T::zero() {
            return Err(domain!("first piece must start at 0"));
        }
        for w in pieces.windows(2) {
            if w[0].hi != w[1].lo {
                return Err(domain!("pieces are not contiguous at {:e}", w[0].hi));
            }
        }
        if pieces.iter().any(|p| !(p.hi > p.lo)) {
            return Err(domain!("empty piece"));
        }
        Ok(Self { pieces, total, tail })
    }

    /// Step function from `(value, width)` pairs in order of increasing `t`.
    pub fn from_steps(steps: &[(T, T)]) -> Result<Self> {
        let mut pieces = Vec::with_capacity(steps.len());
        let mut acc = T::zero();
        for &(value, width) in steps {
            if width <= T::zero() {
                continue;
            }
            let hi = acc + width;
            pieces.push(Piece {
                lo: acc,
                hi,
                form: Form::Constant(value),
            });
            acc = hi;
        }
        Self::new(pieces, TailBehavior::ZeroBeyond)
    }

    /// Single closed-form piece on `(0, total]`.
    pub fn single(form: Form<T>, total: T) -> Result<Self> {
        if !(total > T::zero()) {
            return Err(domain!("total measure must be positive, got {total:e}"));
        }
        Self::new(
            vec![Piece {
                lo: T::zero(),
                hi: total,
                form,
            }],
            TailBehavior::ZeroBeyond,
        )
    }

    pub fn constant(c: T, total: T) -> Result<Self> {
        Self::single(Form::Constant(c), total)
    }

    /// The rearranged Green kernel `N_V^*` on `(0, V]`.
    pub fn green(n: u32, v: T) -> Result<Self> {
        Self::single(
            Form::Kernel {
                n,
                v,
                a: T::one(),
                b: T::zero(),
                q: T::zero(),
            },
            v,
        )
    }

    pub fn pieces(&self) -> &[Piece<T>] {
        &self.pieces
    }

    pub fn total_measure(&self) -> T {
        self.total
    }

    pub fn tail(&self) -> TailBehavior {
        self.tail
    }

    pub fn with_tail(mut self, tail: TailBehavior) -> Self {
        self.tail = tail;
        self
    }

    pub fn is_step(&self) -> bool {
        self.pieces.iter().all(|p| matches!(p.form, Form::Constant(_)))
    }

    /// `(t, value)` at the left end of every piece, plus the right end.
    pub fn breakpoints(&self) -> Vec<(T, T)> {
        let mut out: Vec<(T, T)> = self.pieces.iter().map(|p| (p.lo, p.form.eval(p.lo))).collect();
        if let Some(p) = self.pieces.last() {
            out.push((p.hi, p.form.eval(p.hi)));
        }
        out
    }

    fn locate(&self, t: T) -> usize {
        let j = self.pieces.partition_point(|p| p.hi <= t);
        j.min(self.pieces.len() - 1)
    }

    /// `u(t)`; beyond the total measure the tail behaviour decides.
    pub fn eval(&self, t: T) -> T {
        if t > self.total {
            return match self.tail {
                TailBehavior::ZeroBeyond => T::zero(),
                TailBehavior::AnalyticExtension => self.pieces[self.pieces.len() - 1].form.eval(t),
            };
        }
        let p = &self.pieces[self.locate(t)];
        p.form.eval(t)
    }

    /// `∫_0^t u`.
    pub fn integral_to(&self, t: T) -> Result<T> {
        let t = t.min(self.total);
        let mut acc = T::zero();
        for p in &self.pieces {
            if p.lo >= t {
                break;
            }
            acc = acc + p.form.integral(p.lo, p.hi.min(t))?;
        }
        Ok(acc)
    }

    /// `|{t : u(t) > s}|`.
    pub fn superlevel_measure(&self, s: T) -> T {
        if self.is_step() {
            // prefix of a non-increasing step function
            let j = self.pieces.partition_point(|p| matches!(p.form, Form::Constant(c) if c > s));
            return if j == 0 { T::zero() } else { self.pieces[j - 1].hi };
        }
        self.pieces
            .iter()
            .map(|p| p.form.superlevel_width(p.lo, p.hi, s))
            .fold(T::zero(), |a, b| a + b)
    }

    /// Value at `t = V e^{-ell}` in split form. Falls back to plain
    /// evaluation while `t` is representable and lies past the head piece.
    pub fn scaled_at(&self, ell: T) -> Option<Scaled<T>> {
        let t = self.total * (-ell).exp();
        let head = &self.pieces[0];
        if t >= head.hi || (t > T::zero() && t.is_normal() && ell < lit(500.0)) {
            return Some(Scaled::plain(self.eval(t)));
        }
        head.form.scaled_at(self.total, ell)
    }

    /// Maps every piece through `f`, keeping the breakpoints.
    pub fn map_forms(&self, f: impl Fn(&Form<T>) -> Form<T>) -> Self {
        Self {
            pieces: self
                .pieces
                .iter()
                .map(|p| Piece {
                    lo: p.lo,
                    hi: p.hi,
                    form: f(&p.form),
                })
                .collect(),
            total: self.total,
            tail: self.tail,
        }
    }

    /// `c u` for `c ≥ 0`.
    pub fn scaled(&self, c: T) -> Self {
        self.map_forms(|f| f.scaled(c))
    }

    /// Geometric evaluation grid from `ratio · V` to `V`.
    pub fn log_grid(&self, ratio: T, points: usize) -> Vec<T> {
        log_grid(self.total * ratio, self.total, points)
    }
}

/// `points` geometrically spaced values from `lo` to `hi` inclusive.
pub fn log_grid<T: Real>(lo: T, hi: T, points: usize) -> Vec<T> {
    if points < 2 {
        return vec![hi];
    }
    let span = (hi / lo).ln();
    let last = T::of_usize(points - 1);
    (0..points)
        .map(|i| {
            if i == points - 1 {
                hi
            } else {
                lo * (span * T::of_usize(i) / last).exp()
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::green::{green_maximal, green_rearranged};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn quad(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
        TanhSinh::with_abs_tol(1e-14).integrate(f, a, b).unwrap().value
    }

    #[test]
    fn power_integrals() {
        let f = Form::Power { a: 2.0, e: 1.0 / 3.0, b: 0.5 };
        assert_relative_eq!(f.integral(0.0, 1.0).unwrap(), 3.0 + 0.5, max_relative = 1e-14);
        assert_relative_eq!(
            f.integral(0.2, 0.7).unwrap(),
            quad(|t| f.eval(t), 0.2, 0.7),
            max_relative = 1e-12
        );
        let g = Form::Power { a: 1.0, e: 1.0, b: 0.0 };
        assert!(matches!(g.integral(0.0, 1.0), Err(Error::Divergence(_))));
        assert_relative_eq!(g.integral(1.0, 2.0).unwrap(), 2f64.ln(), max_relative = 1e-14);
        let h = Form::Power { a: 1.0, e: 2.0, b: 0.0 };
        assert_relative_eq!(h.integral(1.0, 2.0).unwrap(), 0.5, max_relative = 1e-14);
    }

    #[test]
    fn kernel_integrals_match_quadrature() {
        for n in 2..=5 {
            let v = 2.3;
            let f = Form::Kernel { n, v, a: 1.3, b: -0.2, q: 0.7 };
            for &(lo, hi) in &[(0.0, 1.0), (0.1, 0.2), (1.0, 2.3), (1e-9, 1e-3)] {
                assert_relative_eq!(
                    f.integral(lo, hi).unwrap(),
                    quad(|t| f.eval(t), lo, hi),
                    max_relative = 1e-10
                );
            }
        }
    }

    #[test]
    fn kernel_power_integrals_match_quadrature() {
        for n in 2..=4 {
            for &gamma in &[0.5, 1.0, 1.4] {
                let v = 1.7;
                let f = Form::KernelPower { n, v, coef: 0.9, gamma, offset: 0.1 };
                for &(lo, hi) in &[(0.0, 1.7), (0.0, 0.01), (0.3, 0.9), (1.0, 1.7)] {
                    assert_relative_eq!(
                        f.integral(lo, hi).unwrap(),
                        quad(|t| f.eval(t), lo, hi),
                        max_relative = 1e-9
                    );
                }
            }
        }
        let f = Form::KernelPower { n: 3, v: 1.0, coef: 1.0, gamma: 3.0, offset: 0.0 };
        assert!(matches!(f.integral(0.0, 0.5), Err(Error::Divergence(_))));
    }

    #[test]
    fn green_profile_average_matches_closed_form() {
        for n in 2..=5 {
            let v = 3.0;
            let u = MonotoneProfile::green(n, v).unwrap();
            for &t in &[1e-10, 1e-4, 0.5, 3.0] {
                let avg = u.integral_to(t).unwrap() / t;
                assert_relative_eq!(avg, green_maximal(n, v, t).unwrap(), max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn scaled_forms_agree_with_direct_evaluation() {
        let total = 2.0;
        let forms = vec![
            Form::Constant(1.5),
            Form::Power { a: 0.3, e: 0.4, b: 0.1 },
            Form::Kernel { n: 2, v: total, a: 1.0, b: 0.2, q: 0.3 },
            Form::Kernel { n: 3, v: total, a: 1.0, b: 0.2, q: 0.3 },
            Form::KernelPower { n: 2, v: total, coef: 1.0, gamma: 0.5, offset: 0.0 },
            Form::KernelPower { n: 3, v: total, coef: 2.0, gamma: 0.5, offset: 0.1 },
        ];
        for f in &forms {
            for &ell in &[5.0f64, 20.0, 40.0] {
                let t = total * (-ell).exp();
                let direct = f.eval(t);
                assert_relative_eq!(f.scaled_at(total, ell).unwrap().value(), direct, max_relative = 1e-9);
                let avg = f.integral(0.0, t).unwrap() / t;
                assert_relative_eq!(
                    f.average_scaled_at(total, ell).unwrap().value(),
                    avg,
                    max_relative = 1e-8
                );
            }
        }
    }

    #[test]
    fn scaled_kernel_far_below_float_range() {
        let f = Form::Kernel { n: 2, v: 1.0, a: 1.0, b: 0.0, q: 0.0 };
        let s = f.scaled_at(1.0, 1e9).unwrap();
        assert_relative_eq!(s.value(), 1e9 / (4.0 * PI), max_relative = 1e-12);
        let avg = f.average_scaled_at(1.0, 1e9).unwrap();
        assert_relative_eq!(avg.ratio(&s), 1.0 + 1e-9, max_relative = 1e-12);
    }

    #[test]
    fn step_profile_evaluation_is_right_continuous() {
        let u = MonotoneProfile::from_steps(&[(3.0, 1.0), (1.0, 2.0)]).unwrap();
        assert_eq!(u.eval(0.5), 3.0);
        assert_eq!(u.eval(1.0), 1.0);
        assert_eq!(u.eval(3.0), 1.0);
        assert_eq!(u.eval(4.0), 0.0);
        assert_eq!(u.superlevel_measure(2.0), 1.0);
        assert_eq!(u.superlevel_measure(0.5), 3.0);
        assert_eq!(u.superlevel_measure(3.0), 0.0);
        assert_relative_eq!(u.integral_to(3.0).unwrap(), 5.0);
    }

    #[test]
    fn superlevel_measure_inverts_the_kernel() {
        for n in 2..=4 {
            let v = 1.0;
            let u = MonotoneProfile::green(n, v).unwrap();
            for &t in &[1e-9, 1e-3, 0.3] {
                let s = green_rearranged(n, v, t).unwrap();
                assert_relative_eq!(u.superlevel_measure(s), t, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn sampled_form_interpolates_and_integrates_exactly() {
        let f = Form::Sampled(vec![(0.0, 2.0), (1.0, 1.0), (3.0, 0.0)].into());
        assert_eq!(f.eval(0.5), 1.5);
        assert_eq!(f.eval(2.0), 0.5);
        assert_relative_eq!(f.integral(0.0, 3.0).unwrap(), 1.5 + 1.0);
        assert_relative_eq!(f.integral(0.5, 2.0).unwrap(), 0.5 * 1.25 + 1.0 * 0.75);
    }

    #[test]
    fn shifting_and_scaling_keep_closed_forms() {
        let f = Form::Kernel { n: 3, v: 1.0, a: 1.0, b: 0.0, q: 0.0 };
        assert!(matches!(f.shifted(0.5), Form::Kernel { .. }));
        assert_relative_eq!(f.shifted(0.5).eval(0.1), f.eval(0.1) - 0.5);
        assert_relative_eq!(f.scaled(2.0).eval(0.1), 2.0 * f.eval(0.1));
    }

    #[test]
    fn log_grid_endpoints() {
        let g = log_grid(1e-12, 1.0f64, 13);
        assert_eq!(g.len(), 13);
        assert_relative_eq!(g[0], 1e-12);
        assert_eq!(g[12], 1.0);
        assert_relative_eq!(g[6], 1e-6, max_relative = 1e-12);
    }
}
