//! Zygmund and weak-Lebesgue (quasi-)norms, `L^q` norms, exponential
//! integrals and the sharp `L^q` constants of the Green kernel.

use crate::error::{domain, Error, Result};
use crate::green::{kernel_constant, kernel_exponent, Scaled};
use crate::profile::{Form, MonotoneProfile, Piece};
use crate::quadrature::TanhSinh;
use crate::rearrange::maximal_function;
use crate::scalar::{lit, Real};
use crate::special::ln_gamma;

/// Largest `ℓ = log(V/t)` probed when a supremum is only reached as `t → 0`.
pub const ELL_MAX: f64 = 1e9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NormKind {
    LexpQuasi,
    Lexp,
    WeakQuasi,
    Weak,
    Lq,
    ExpIntegral,
}

impl NormKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            NormKind::LexpQuasi => "lexp_quasi",
            NormKind::Lexp => "lexp",
            NormKind::WeakQuasi => "weak_quasi",
            NormKind::Weak => "weak",
            NormKind::Lq => "lq",
            NormKind::ExpIntegral => "exp_integral",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormResult<T = f64> {
    pub kind: NormKind,
    pub value: T,
    pub volume: T,
    /// `q` for `L^q`, `α` for the exponential integral.
    pub param: Option<T>,
}

/// `w(ℓ) · u(V e^{-ℓ})` with the value in split form.
fn weighted<T: Real>(u: Scaled<T>, ell: T, weight: &impl Fn(T) -> Scaled<T>) -> T {
    let w = weight(ell);
    let m = u.mantissa * w.mantissa;
    if m == T::zero() {
        return T::zero();
    }
    m * (u.log_scale + w.log_scale).exp()
}

fn golden_max<T: Real>(f: impl Fn(T) -> T, mut a: T, mut b: T) -> T {
    let r: T = lit(0.618_033_988_749_894_9);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    let mut best = fc.max(fd);
    for _ in 0..80 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
        best = best.max(fc).max(fd);
    }
    best
}

/// `sup_{0<t≤V} w(t) u(t)` with the weight written in `ℓ = log(V/t)`.
fn weighted_sup<T: Real>(u: &MonotoneProfile<T>, weight: impl Fn(T) -> Scaled<T>) -> T {
    let v = u.total_measure();
    let ell_of = |t: T| (v / t).ln();
    let mut best = T::zero();
    let mut consider = |x: T| {
        if x.is_nan() {
            return;
        }
        if x > best {
            best = x;
        }
    };
    let ell_max: T = lit(ELL_MAX);
    for (i, p) in u.pieces().iter().enumerate() {
        let at_t = |t: T| weighted(Scaled::plain(p.form.eval(t)), ell_of(t), &weight);
        consider(at_t(p.hi));
        if i == 0 {
            // head: probe down to ℓ_max through split values
            let ell_hi_t = ell_of(p.hi);
            let probes: Vec<T> = crate::profile::log_grid(ell_hi_t.max(lit(1e-3)) + lit(1e-12), ell_max, 400);
            let f = |ell: T| match p.form.scaled_at(v, ell) {
                Some(s) => weighted(s, ell, &weight),
                None => {
                    let t = v * (-ell).exp();
                    if t > T::zero() {
                        at_t(t)
                    } else {
                        T::nan()
                    }
                }
            };
            let vals: Vec<T> = probes.iter().map(|&e| f(e)).collect();
            refine(&probes, &vals, &f, &mut consider);
            if !matches!(p.form, Form::Constant(_)) {
                let probes = crate::profile::log_grid(p.hi * lit(1e-6), p.hi, 64);
                let g = |lt: T| at_t(lt.exp());
                let lts: Vec<T> = probes.iter().map(|t| t.ln()).collect();
                let vals: Vec<T> = lts.iter().map(|&x| g(x)).collect();
                refine(&lts, &vals, &g, &mut consider);
            }
        } else {
            consider(at_t(p.lo));
            if !matches!(p.form, Form::Constant(_)) {
                let lts: Vec<T> = crate::profile::log_grid(p.lo, p.hi, 64).iter().map(|t| t.ln()).collect();
                let g = |lt: T| at_t(lt.exp().max(p.lo).min(p.hi));
                let vals: Vec<T> = lts.iter().map(|&x| g(x)).collect();
                refine(&lts, &vals, &g, &mut consider);
            }
        }
    }
    best
}

fn refine<T: Real>(xs: &[T], vals: &[T], f: &impl Fn(T) -> T, consider: &mut impl FnMut(T)) {
    let mut k = 0;
    for (i, &x) in vals.iter().enumerate() {
        consider(x);
        if !x.is_nan() && (vals[k].is_nan() || x > vals[k]) {
            k = i;
        }
    }
    if xs.len() >= 3 {
        let a = xs[k.saturating_sub(1)];
        let b = xs[(k + 1).min(xs.len() - 1)];
        consider(golden_max(f, a, b));
    }
}

fn lexp_weight<T: Real>(ell: T) -> Scaled<T> {
    Scaled::plain(T::one() / (T::one() + ell.max(T::zero())))
}

fn weak_weight<T: Real>(n: u32, v: T) -> impl Fn(T) -> Scaled<T> {
    let p: T = kernel_exponent(n);
    move |ell: T| Scaled {
        mantissa: v.powf(p),
        log_scale: -p * ell,
    }
}

fn check_weak_dim(n: u32) -> Result<()> {
    if n < 3 {
        return Err(domain!("weak norms need n ≥ 3, got {n}"));
    }
    Ok(())
}

/// `sup u^*(t) / (1 + log(V/t))`.
pub fn lexp_quasi_norm<T: Real>(u_star: &MonotoneProfile<T>) -> NormResult<T> {
    NormResult {
        kind: NormKind::LexpQuasi,
        value: weighted_sup(u_star, lexp_weight),
        volume: u_star.total_measure(),
        param: None,
    }
}

/// `sup u^{**}(t) / (1 + log(V/t))`.
pub fn lexp_norm<T: Real>(u_star: &MonotoneProfile<T>) -> Result<NormResult<T>> {
    let m = maximal_function(u_star)?;
    Ok(NormResult {
        kind: NormKind::Lexp,
        value: weighted_sup(&m, lexp_weight),
        volume: u_star.total_measure(),
        param: None,
    })
}

/// `sup t^{(n-2)/n} u^*(t)`.
pub fn weak_quasi_norm<T: Real>(u_star: &MonotoneProfile<T>, n: u32) -> Result<NormResult<T>> {
    check_weak_dim(n)?;
    let v = u_star.total_measure();
    Ok(NormResult {
        kind: NormKind::WeakQuasi,
        value: weighted_sup(u_star, weak_weight(n, v)),
        volume: v,
        param: None,
    })
}

/// `sup t^{(n-2)/n} u^{**}(t)`.
pub fn weak_norm<T: Real>(u_star: &MonotoneProfile<T>, n: u32) -> Result<NormResult<T>> {
    check_weak_dim(n)?;
    let v = u_star.total_measure();
    let m = maximal_function(u_star)?;
    Ok(NormResult {
        kind: NormKind::Weak,
        value: weighted_sup(&m, weak_weight(n, v)),
        volume: v,
        param: None,
    })
}

fn piece_power_integral<T: Real>(p: &Piece<T>, q: T) -> Result<T> {
    match &p.form {
        Form::Constant(c) => Ok(c.abs().powf(q) * (p.hi - p.lo)),
        Form::Kernel { n, v, a, b, q: quad } if *b == T::zero() && *quad == T::zero() && *a >= T::zero() => Form::KernelPower {
            n: *n,
            v: *v,
            coef: a.powf(q),
            gamma: q,
            offset: T::zero(),
        }
        .integral(p.lo, p.hi),
        Form::KernelPower {
            n,
            v,
            coef,
            gamma,
            offset,
        } if *offset == T::zero() && *coef >= T::zero() => Form::KernelPower {
            n: *n,
            v: *v,
            coef: coef.powf(q),
            gamma: *gamma * q,
            offset: T::zero(),
        }
        .integral(p.lo, p.hi),
        Form::Power { a, e, b } if *b == T::zero() && *a >= T::zero() => Form::Power {
            a: a.powf(q),
            e: *e * q,
            b: T::zero(),
        }
        .integral(p.lo, p.hi),
        form => {
            if p.lo == T::zero() {
                let probe = form.eval(p.hi * lit(1e-300));
                if !probe.is_finite() {
                    return Err(Error::Divergence("unbounded piece without closed form".into()));
                }
            }
            let f = |t: T| form.eval(t).abs().powf(q);
            Ok(TanhSinh::with_abs_tol(lit(1e-13)).integrate(f, p.lo, p.hi)?.value)
        }
    }
}

/// `(∫_0^V (u^*)^q)^{1/q}`.
pub fn lq_norm<T: Real>(u_star: &MonotoneProfile<T>, q: T) -> Result<NormResult<T>> {
    if !(q >= T::one()) {
        return Err(domain!("q must be at least 1, got {q:e}"));
    }
    let mut acc = T::zero();
    for p in u_star.pieces() {
        acc = acc + piece_power_integral(p, q)?;
    }
    Ok(NormResult {
        kind: NormKind::Lq,
        value: acc.powf(T::one() / q),
        volume: u_star.total_measure(),
        param: Some(q),
    })
}

/// `∫_lo^hi t^{-κ}`, or a divergence when `lo = 0` and `κ ≥ 1`.
fn power_integral<T: Real>(kappa: T, lo: T, hi: T) -> Result<T> {
    if lo == T::zero() && kappa >= T::one() {
        return Err(Error::Divergence(format!("t^-{kappa:e} is not integrable at the origin")));
    }
    let k = T::one() - kappa;
    if k.abs() < lit(1e-14) {
        return Ok((hi / lo).ln());
    }
    if lo == T::zero() {
        return Ok(hi.powf(k) / k);
    }
    Ok(-hi.powf(k) * (k * (lo / hi).ln()).exp_m1() / k)
}

fn piece_exp_integral<T: Real>(p: &Piece<T>, beta: T) -> Result<T> {
    let (lo, hi) = (p.lo, p.hi);
    match &p.form {
        Form::Constant(c) => Ok((beta * *c).exp() * (hi - lo)),
        Form::Kernel { n: 2, v, a, b, q } if *q == T::zero() || *a == T::zero() => {
            if *a == T::zero() {
                // bounded: e^{β(b + q t)}
                let c = beta * *q;
                let lin = if c == T::zero() {
                    hi - lo
                } else {
                    ((c * hi).exp() - (c * lo).exp()) / c
                };
                return Ok((beta * *b).exp() * lin);
            }
            let kappa = beta * *a / (lit::<T>(4.0) * T::PI());
            let top = hi.min(*v);
            let head = (beta * *b).exp() * v.powf(kappa) * power_integral(kappa, lo, top)?;
            let tail = if hi > top { (beta * *b).exp() * (hi - top) } else { T::zero() };
            Ok(head + tail)
        }
        form => {
            if lo == T::zero() {
                let probe = form.eval(hi * lit(1e-300));
                if !probe.is_finite() {
                    return Err(Error::Divergence("unbounded piece without closed form".into()));
                }
                if let Form::Kernel { n: 2, a, .. } = form {
                    let kappa = beta * *a / (lit::<T>(4.0) * T::PI());
                    if kappa >= T::one() {
                        return Err(Error::Divergence(format!("exponent {kappa:e} ≥ 1 at the origin")));
                    }
                }
            }
            let f = |t: T| (beta * form.eval(t)).exp();
            Ok(TanhSinh::with_abs_tol(lit(1e-13)).integrate(f, lo, hi)?.value)
        }
    }
}

/// `∫_0^V exp(α u^*(t) / l1) dt`.
pub fn exp_integral<T: Real>(u_star: &MonotoneProfile<T>, alpha: T, l1: T) -> Result<NormResult<T>> {
    if !(alpha > T::zero()) {
        return Err(domain!("α must be positive, got {alpha:e}"));
    }
    if !(l1 > T::zero()) {
        return Err(domain!("l1 must be positive, got {l1:e}"));
    }
    let beta = alpha / l1;
    let mut acc = T::zero();
    for p in u_star.pieces() {
        acc = acc + piece_exp_integral(p, beta)?;
    }
    Ok(NormResult {
        kind: NormKind::ExpIntegral,
        value: acc,
        volume: u_star.total_measure(),
        param: Some(alpha),
    })
}

/// `‖N_V^*‖_q` in closed form through the Γ bracket
/// `Γ(n/(n-2) - q) Γ(q+1) / Γ(n/(n-2))`.
pub fn mazya_constant<T: Real>(n: u32, q: T, v: T) -> Result<T> {
    if n < 3 {
        return Err(domain!("need n ≥ 3, got {n}"));
    }
    let p: T = kernel_exponent(n);
    let crit = T::one() / p;
    if !(q >= T::one() && q < crit) {
        return Err(domain!("q = {q:e} outside [1, {crit:e})"));
    }
    if !(v > T::zero()) {
        return Err(domain!("volume must be positive"));
    }
    let bracket = (ln_gamma(crit - q) + ln_gamma(q + T::one()) - ln_gamma(crit)) / q;
    Ok(kernel_constant::<T>(n) * bracket.exp() * v.powf(T::one() / q - p))
}

/// The compactly supported variant `2^{-2/(qn)}` times [`mazya_constant`].
pub fn mazya_constant_compact<T: Real>(n: u32, q: T, v: T) -> Result<T> {
    let nf = T::of_usize(n as usize);
    Ok(lit::<T>(2.0).powf(-lit::<T>(2.0) / (q * nf)) * mazya_constant(n, q, v)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::green::{green_rearranged, BallGeometry};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn lexp_examples() {
        let c = MonotoneProfile::constant(2.5, 3.0).unwrap();
        assert_relative_eq!(lexp_quasi_norm(&c).value, 2.5, max_relative = 1e-14);
        assert_relative_eq!(lexp_norm(&c).unwrap().value, 2.5, max_relative = 1e-14);
        let g = MonotoneProfile::green(2, 1.7).unwrap();
        assert_relative_eq!(lexp_quasi_norm(&g).value, 1.0 / (4.0 * PI), max_relative = 1e-8);
        assert_relative_eq!(lexp_norm(&g).unwrap().value, 1.0 / (4.0 * PI), max_relative = 1e-12);
    }

    #[test]
    fn weak_examples() {
        let n = 3;
        let v = 2.0;
        let k = kernel_constant::<f64>(n);
        let inf = MonotoneProfile::single(Form::Power { a: k, e: 1.0 / 3.0, b: 0.0 }, v).unwrap();
        assert_relative_eq!(weak_quasi_norm(&inf, n).unwrap().value, k, max_relative = 1e-12);
        let c = MonotoneProfile::constant(0.7, v).unwrap();
        assert_relative_eq!(weak_quasi_norm(&c, n).unwrap().value, 0.7 * v.powf(1.0 / 3.0), max_relative = 1e-12);
        assert!(weak_norm(&c, 2).is_err());
        let g = MonotoneProfile::green(n, v).unwrap();
        let r = weak_norm(&g, n).unwrap().value / weak_quasi_norm(&g, n).unwrap().value;
        assert_relative_eq!(r, 1.5, max_relative = 1e-6);
    }

    #[test]
    fn lq_examples() {
        let c = MonotoneProfile::constant(3.0, 4.0).unwrap();
        assert_relative_eq!(lq_norm(&c, 2.0).unwrap().value, 6.0, max_relative = 1e-14);
        let g = MonotoneProfile::green(3, 1.0).unwrap();
        let k = kernel_constant::<f64>(3);
        assert_relative_eq!(lq_norm(&g, 1.0).unwrap().value, k / 2.0, max_relative = 1e-13);
        assert_relative_eq!(mazya_constant(3, 1.0, 1.0).unwrap(), k / 2.0, max_relative = 1e-13);
        assert!(matches!(lq_norm(&g, 3.0), Err(Error::Divergence(_))));
        assert!(mazya_constant(3, 3.0, 1.0).is_err());
        assert!(mazya_constant(3, 2.99999999, 1.0).unwrap() > 100.0 * mazya_constant(3, 2.0, 1.0).unwrap());
    }

    #[test]
    fn mazya_matches_direct_quadrature() {
        for &(n, q) in &[(3, 1.5), (3, 2.5), (4, 1.5), (5, 1.2)] {
            let v = 1.3;
            let direct = TanhSinh::with_abs_tol(1e-15)
                .integrate(|t: f64| green_rearranged(n, v, t).unwrap().powf(q), 0.0, v)
                .unwrap()
                .value
                .powf(1.0 / q);
            assert_relative_eq!(mazya_constant(n, q, v).unwrap(), direct, max_relative = 1e-9);
        }
        assert_relative_eq!(
            mazya_constant_compact(3, 2.0, 1.0).unwrap(),
            2f64.powf(-1.0 / 3.0) * mazya_constant(3, 2.0, 1.0).unwrap(),
            max_relative = 1e-15
        );
    }

    #[test]
    fn exp_integral_examples() {
        let z = MonotoneProfile::constant(0.0, 2.0).unwrap();
        assert_relative_eq!(exp_integral(&z, 1.0, 1.0).unwrap().value, 2.0);
        let v = 1.5;
        let g = MonotoneProfile::green(2, v).unwrap();
        for &a in &[PI, 2.0 * PI, 3.0 * PI] {
            assert_relative_eq!(
                exp_integral(&g, a, 1.0).unwrap().value,
                4.0 * PI * v / (4.0 * PI - a),
                max_relative = 1e-12
            );
        }
        assert!(matches!(exp_integral(&g, 4.0 * PI, 1.0), Err(Error::Divergence(_))));
        assert!(exp_integral(&g, 0.0, 1.0).is_err());
    }

    #[test]
    fn quasi_norm_below_norm_on_steps() {
        let u = MonotoneProfile::from_steps(&[(5.0, 0.01), (2.0, 0.3), (1.0, 1.0)]).unwrap();
        assert!(lexp_norm(&u).unwrap().value >= lexp_quasi_norm(&u).value);
        let g = BallGeometry::new(3, 1.0).unwrap();
        let u = u.scaled(1.0 / g.volume);
        assert!(weak_norm(&u, 3).unwrap().value >= weak_quasi_norm(&u, 3).unwrap().value);
    }
}
