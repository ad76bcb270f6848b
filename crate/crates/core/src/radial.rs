//! Radial functions on a ball and the radial Dirichlet problem `-Δv = f`.
//!
//! For radial data the solution is
//! `v(ρ) = N(ρ) M(ρ) + ω ∫_ρ^R N(r) f(r) r^{n-1} dr`, with `M(ρ)` the mass of
//! `f` in `B_ρ`. On a shell where `f ≡ f_j` this collapses to
//! `A_j N(ρ) + B_j - f_j ρ²/(2n)`, which is what [`solve_radial`] emits.

use crate::error::{domain, Error, Result};
use crate::green::BallGeometry;
use crate::profile::{Analytic, Form, MonotoneProfile, Piece, TailBehavior};
use crate::quadrature::TanhSinh;
use crate::scalar::{lit, Real};

/// Closed-form expression of a radial segment, as a function of `r`.
#[derive(Debug, Clone)]
pub enum RadialForm<T> {
    Constant(T),
    /// `a r^k`
    Power { a: T, k: T },
    /// `a N_{B_R}(r) + b + q r²`
    Kernel { a: T, b: T, q: T },
    Analytic(Analytic<T>),
}

#[derive(Debug, Clone)]
pub struct RadialSegment<T> {
    pub lo: T,
    pub hi: T,
    pub form: RadialForm<T>,
}

/// Radial function on `B_R`, piecewise analytic in the radius.
#[derive(Debug, Clone)]
pub struct RadialProfile<T = f64> {
    geom: BallGeometry<T>,
    segments: Vec<RadialSegment<T>>,
}

impl<T: Real> RadialForm<T> {
    fn eval(&self, geom: &BallGeometry<T>, r: T) -> T {
        match self {
            RadialForm::Constant(c) => *c,
            RadialForm::Power { a, k } => *a * r.powf(*k),
            RadialForm::Kernel { a, b, q } => {
                let mut x = *b + *q * r * r;
                if *a != T::zero() {
                    x = x + *a * geom.green_unchecked(r);
                }
                x
            }
            RadialForm::Analytic(f) => (f.0)(r),
        }
    }

    fn limit_at_zero(&self, geom: &BallGeometry<T>, hi: T) -> T {
        match self {
            RadialForm::Constant(c) => *c,
            RadialForm::Power { a, k } => {
                if *k > T::zero() || *a == T::zero() {
                    T::zero()
                } else if *k == T::zero() {
                    *a
                } else {
                    *a * T::infinity()
                }
            }
            RadialForm::Kernel { a, b, .. } => {
                if *a == T::zero() {
                    *b
                } else {
                    *a * T::infinity()
                }
            }
            RadialForm::Analytic(_) => self.eval(geom, hi * lit(1e-100)),
        }
    }

    /// `∫_{lo<|x|<hi} form dx`.
    fn mass(&self, geom: &BallGeometry<T>, lo: T, hi: T) -> Result<T> {
        let nf = geom.dim();
        match self {
            RadialForm::Constant(c) => Ok(*c * (geom.volume_of(hi) - geom.volume_of(lo))),
            RadialForm::Power { a, k } => {
                let e = *k + nf;
                if e <= T::zero() && lo == T::zero() {
                    return Err(Error::Divergence(format!("r^{k:e} is not integrable at the origin")));
                }
                if e == T::zero() {
                    return Ok(*a * geom.omega * (hi / lo).ln());
                }
                Ok(*a * geom.omega * (hi.powf(e) - lo.powf(e)) / e)
            }
            RadialForm::Kernel { a, b, q } => {
                let n2 = nf + lit(2.0);
                let mut x = *b * (geom.volume_of(hi) - geom.volume_of(lo))
                    + *q * geom.omega * (hi.powf(n2) - lo.powf(n2)) / n2;
                if *a != T::zero() {
                    x = x + *a * (geom.green_moment(hi) - geom.green_moment(lo));
                }
                Ok(x)
            }
            RadialForm::Analytic(f) => {
                let w = |r: T| (f.0)(r) * geom.omega * r.powf(nf - T::one());
                Ok(TanhSinh::with_abs_tol(lit(1e-11)).integrate(w, lo, hi)?.value)
            }
        }
    }

    /// Interior points of `(lo, hi)` where the derivative may change sign.
    fn critical_points(&self, geom: &BallGeometry<T>, lo: T, hi: T) -> Vec<T> {
        match self {
            RadialForm::Kernel { a, q, .. } => {
                // v' = -a r^{1-n}/ω + 2 q r vanishes where 2 q ω r^n = a
                if *q == T::zero() || *a == T::zero() {
                    return vec![];
                }
                let x = *a / (lit::<T>(2.0) * *q * geom.omega);
                if x <= T::zero() {
                    return vec![];
                }
                let r = x.powf(T::one() / geom.dim());
                if r > lo && r < hi {
                    vec![r]
                } else {
                    vec![]
                }
            }
            RadialForm::Analytic(f) => {
                let k = 256;
                let mut out = vec![];
                let mut prev = None;
                for i in 0..=k {
                    let r = lo + (hi - lo) * T::of_usize(i) / T::of_usize(k);
                    let r = if r == T::zero() { hi * lit(1e-12) } else { r };
                    let val = (f.0)(r);
                    if let Some((pr, pv, pd)) = prev {
                        let d: T = val - pv;
                        if let Some(pd) = pd {
                            if (pd > T::zero()) != (d > T::zero()) && d != T::zero() {
                                out.push(pr);
                            }
                        }
                        prev = Some((r, val, if d != T::zero() { Some(d) } else { pd }));
                    } else {
                        prev = Some((r, val, None));
                    }
                }
                out
            }
            _ => vec![],
        }
    }

    fn non_increasing_on(&self, geom: &BallGeometry<T>, lo: T, hi: T, tol: T) -> bool {
        match self {
            RadialForm::Constant(_) => true,
            RadialForm::Power { a, k } => *a * *k <= T::zero(),
            RadialForm::Kernel { a, q, .. } => {
                // 2 q ω r^n ≤ a at both ends (r^n is monotone)
                let check = |r: T| {
                    let lhs = lit::<T>(2.0) * *q * geom.omega * r.powf(geom.dim());
                    lhs <= *a + tol * (a.abs() + lhs.abs())
                };
                check(lo) && check(hi)
            }
            RadialForm::Analytic(f) => {
                let k = 256;
                let mut prev = (f.0)(if lo == T::zero() { hi * lit(1e-12) } else { lo });
                for i in 1..=k {
                    let r = lo + (hi - lo) * T::of_usize(i) / T::of_usize(k);
                    let x = (f.0)(r);
                    if x > prev + tol * prev.abs().max(x.abs()) {
                        return false;
                    }
                    prev = x;
                }
                true
            }
        }
    }
}

impl<T: Real> RadialProfile<T> {
    /// Segments must partition `(0, R]`.
    pub fn new(geom: BallGeometry<T>, mut segments: Vec<RadialSegment<T>>) -> Result<Self> {
        let Some(last) = segments.last_mut() else {
            return Err(domain!("a radial profile needs at least one segment"));
        };
        if (last.hi - geom.radius).abs() > lit::<T>(1e-12) * geom.radius {
            return Err(domain!("segments end at {:e}, not at the radius {:e}", last.hi, geom.radius));
        }
        last.hi = geom.radius;
        if segments[0].lo != T::zero() {
            return Err(domain!("first segment must start at 0"));
        }
        for w in segments.windows(2) {
            if w[0].hi != w[1].lo {
                return Err(domain!("segments are not contiguous at {:e}", w[0].hi));
            }
        }
        if segments.iter().any(|s| !(s.hi > s.lo)) {
            return Err(domain!("empty segment"));
        }
        Ok(Self { geom, segments })
    }

    /// Piecewise constant data from `(outer radius, value)` pairs; the last
    /// outer radius is taken to be `R`.
    pub fn piecewise_constant(geom: BallGeometry<T>, shells: &[(T, T)]) -> Result<Self> {
        let mut lo = T::zero();
        let mut segments = Vec::with_capacity(shells.len());
        for (i, &(hi, value)) in shells.iter().enumerate() {
            let hi = if i + 1 == shells.len() { geom.radius } else { hi };
            if !(hi > lo) || hi > geom.radius {
                return Err(domain!("shell radii must increase within (0, R], got {hi:e}"));
            }
            if !value.is_finite() {
                return Err(domain!("shell value must be finite"));
            }
            segments.push(RadialSegment {
                lo,
                hi,
                form: RadialForm::Constant(value),
            });
            lo = hi;
        }
        Self::new(geom, segments)
    }

    pub fn constant(geom: BallGeometry<T>, c: T) -> Result<Self> {
        Self::piecewise_constant(geom, &[(geom.radius, c)])
    }

    pub fn zero(geom: BallGeometry<T>) -> Self {
        Self::constant(geom, T::zero()).expect("zero profile")
    }

    pub fn geom(&self) -> &BallGeometry<T> {
        &self.geom
    }

    pub fn segments(&self) -> &[RadialSegment<T>] {
        &self.segments
    }

    pub fn is_piecewise_constant(&self) -> bool {
        self.segments.iter().all(|s| matches!(s.form, RadialForm::Constant(_)))
    }

    fn locate(&self, r: T) -> usize {
        let j = self.segments.partition_point(|s| s.hi < r);
        j.min(self.segments.len() - 1)
    }

    /// Value at radius `r`; zero outside the ball. Segment ends belong to
    /// the inner segment.
    pub fn eval(&self, r: T) -> T {
        if r > self.geom.radius {
            return T::zero();
        }
        let s = &self.segments[self.locate(r)];
        s.form.eval(&self.geom, r)
    }

    /// Value just outside segment boundary `r`, from the outer side.
    pub fn eval_outer(&self, r: T) -> T {
        let j = self.segments.partition_point(|s| s.hi <= r);
        if j >= self.segments.len() {
            return self.eval(r);
        }
        self.segments[j].form.eval(&self.geom, r)
    }

    /// `∫_B f`.
    pub fn total_mass(&self) -> Result<T> {
        let (p, m) = self.signed_mass_split()?;
        Ok(p - m)
    }

    /// `(∫ f⁺, ∫ f⁻)`.
    pub fn signed_mass_split(&self) -> Result<(T, T)> {
        let mut plus = T::zero();
        let mut minus = T::zero();
        for seg in &self.segments {
            for (lo, hi) in self.sign_pieces(seg)? {
                let m = seg.form.mass(&self.geom, lo, hi)?;
                if m >= T::zero() {
                    plus = plus + m;
                } else {
                    minus = minus - m;
                }
            }
        }
        Ok((plus, minus))
    }

    /// `∫_B |f|`.
    pub fn l1_norm(&self) -> Result<T> {
        let (p, m) = self.signed_mass_split()?;
        Ok(p + m)
    }

    /// Splits a segment into sub-intervals on which the form has one sign.
    fn sign_pieces(&self, seg: &RadialSegment<T>) -> Result<Vec<(T, T)>> {
        let mut cuts = vec![seg.lo];
        cuts.extend(seg.form.critical_points(&self.geom, seg.lo, seg.hi));
        cuts.push(seg.hi);
        let mut out = vec![];
        for w in cuts.windows(2) {
            let (a, b) = (w[0], w[1]);
            let fa = if a == T::zero() {
                seg.form.limit_at_zero(&self.geom, b)
            } else {
                seg.form.eval(&self.geom, a)
            };
            let fb = seg.form.eval(&self.geom, b);
            if (fa > T::zero() && fb < T::zero()) || (fa < T::zero() && fb > T::zero()) {
                let root = bisect_sign(|r| seg.form.eval(&self.geom, r), a, b, fa > T::zero());
                out.push((a, root));
                out.push((root, b));
            } else {
                out.push((a, b));
            }
        }
        Ok(out)
    }

    /// True if the function never increases with `r` (relative slack `tol`
    /// absorbs rounding at stationary points).
    pub fn is_non_increasing(&self, tol: T) -> bool {
        let scale = self
            .segments
            .iter()
            .map(|s| s.form.eval(&self.geom, s.hi).abs())
            .fold(T::min_positive_value(), |a, b| a.max(b));
        for (i, seg) in self.segments.iter().enumerate() {
            if !seg.form.non_increasing_on(&self.geom, seg.lo, seg.hi, tol) {
                return false;
            }
            if let Some(next) = self.segments.get(i + 1) {
                let left = seg.form.eval(&self.geom, seg.hi);
                let right = next.form.eval(&self.geom, seg.hi);
                if right > left + tol * scale {
                    return false;
                }
            }
        }
        true
    }

    /// `|{x ∈ B : |v(x)| > s}|`, exact up to bisection of the level-set
    /// radii.
    pub fn superlevel_measure_abs(&self, s: T) -> T {
        let g = &self.geom;
        let mut acc = T::zero();
        for seg in &self.segments {
            let mut cuts = vec![seg.lo];
            cuts.extend(seg.form.critical_points(g, seg.lo, seg.hi));
            cuts.push(seg.hi);
            for w in cuts.windows(2) {
                let (a, b) = (w[0], w[1]);
                let f = |r: T| seg.form.eval(g, r);
                let fa = if a == T::zero() { seg.form.limit_at_zero(g, b) } else { f(a) };
                let fb = f(b);
                for sign in [T::one(), -T::one()] {
                    let ga = sign * fa - s;
                    let gb = sign * fb - s;
                    let (x0, x1) = match (ga > T::zero(), gb > T::zero()) {
                        (true, true) => (a, b),
                        (false, false) => continue,
                        (true, false) => (a, bisect_sign(|r| sign * f(r) - s, a, b, true)),
                        (false, true) => (bisect_sign(|r| sign * f(r) - s, a, b, false), b),
                    };
                    acc = acc + (g.volume_of(x1) - g.volume_of(x0));
                }
            }
        }
        acc
    }

    /// Largest `|v|` over the ball (may be infinite).
    pub fn sup_abs(&self) -> T {
        let g = &self.geom;
        let mut best = T::zero();
        for seg in &self.segments {
            let mut pts = vec![seg.hi];
            pts.extend(seg.form.critical_points(g, seg.lo, seg.hi));
            for r in pts {
                best = best.max(seg.form.eval(g, r).abs());
            }
            let at_lo = if seg.lo == T::zero() {
                seg.form.limit_at_zero(g, seg.hi)
            } else {
                seg.form.eval(g, seg.lo)
            };
            best = best.max(at_lo.abs());
        }
        best
    }
}

/// Root of a function changing sign on `[a, b]`; `positive_at_a` says which
/// side is positive. Bisects geometrically when `a = 0`.
fn bisect_sign<T: Real>(f: impl Fn(T) -> T, a: T, b: T, positive_at_a: bool) -> T {
    let (mut lo, mut hi) = (a, b);
    if lo == T::zero() {
        lo = hi * lit(1e-150);
        if (f(lo) > T::zero()) != positive_at_a {
            return lo;
        }
    }
    for _ in 0..400 {
        let mid = if hi / lo > lit(4.0) { (lo * hi).sqrt() } else { lo + (hi - lo) / lit(2.0) };
        if mid <= lo || mid >= hi {
            break;
        }
        if (f(mid) > T::zero()) == positive_at_a {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if positive_at_a {
        hi
    } else {
        lo
    }
}

/// `∫_{a ≤ |y| ≤ b} N_{B_R}(|y|) dy`.
pub fn integrate_green_shell<T: Real>(geom: &BallGeometry<T>, a: T, b: T) -> Result<T> {
    if !(a >= T::zero()) || b < a || b > geom.radius * (T::one() + lit(1e-12)) {
        return Err(domain!("shell [{a:e}, {b:e}] outside [0, {:e}]", geom.radius));
    }
    Ok(geom.green_moment(b.min(geom.radius)) - geom.green_moment(a))
}

/// Solves `-Δv = f` on the ball with `v = 0` on the boundary.
pub fn solve_radial<T: Real>(geom: &BallGeometry<T>, f: &RadialProfile<T>) -> Result<RadialProfile<T>> {
    if f.geom.n != geom.n || (f.geom.radius - geom.radius).abs() > lit::<T>(1e-12) * geom.radius {
        return Err(domain!("data live on a different ball"));
    }
    if f.is_piecewise_constant() {
        return Ok(solve_piecewise_constant(geom, f));
    }
    solve_general(geom, f)
}

fn solve_piecewise_constant<T: Real>(geom: &BallGeometry<T>, f: &RadialProfile<T>) -> RadialProfile<T> {
    let segs = f.segments();
    let values: Vec<T> = segs
        .iter()
        .map(|s| match s.form {
            RadialForm::Constant(c) => c,
            _ => unreachable!(),
        })
        .collect();
    let k = segs.len();
    // outer[j] = Σ_{i ≥ j} f_i (G(b_i) - G(a_i))
    let mut outer = vec![T::zero(); k + 1];
    for j in (0..k).rev() {
        let shell = if values[j] == T::zero() {
            T::zero()
        } else {
            values[j] * (geom.green_moment(segs[j].hi) - geom.green_moment(segs[j].lo))
        };
        outer[j] = outer[j + 1] + shell;
    }
    let two_n = lit::<T>(2.0) * geom.dim();
    let mut mass = T::zero();
    let mut abs_mass = T::zero();
    let mut out = Vec::with_capacity(k);
    for j in 0..k {
        let (lo, hi) = (segs[j].lo, segs[j].hi);
        let fj = values[j];
        let vol_lo = geom.volume_of(lo);
        let mut a = mass - fj * vol_lo;
        if a.abs() <= lit::<T>(64.0) * T::epsilon() * abs_mass {
            a = T::zero();
        }
        let b = if fj == T::zero() {
            outer[j + 1]
        } else {
            fj * geom.green_moment(hi) + outer[j + 1]
        };
        out.push(RadialSegment {
            lo,
            hi,
            form: RadialForm::Kernel { a, b, q: -fj / two_n },
        });
        let shell_mass = fj * (geom.volume_of(hi) - vol_lo);
        mass = mass + shell_mass;
        abs_mass = abs_mass + shell_mass.abs();
    }
    RadialProfile {
        geom: *geom,
        segments: out,
    }
}

fn solve_general<T: Real>(geom: &BallGeometry<T>, f: &RadialProfile<T>) -> Result<RadialProfile<T>> {
    // integrability of the data
    f.l1_norm()?;
    let quad = TanhSinh::with_abs_tol(lit::<T>(1e-11));
    let nf = geom.dim();
    let segs = f.segments().to_vec();
    let k = segs.len();
    let mut inner_mass = vec![T::zero(); k + 1];
    for j in 0..k {
        inner_mass[j + 1] = inner_mass[j] + segs[j].form.mass(geom, segs[j].lo, segs[j].hi)?;
    }
    let mut outer = vec![T::zero(); k + 1];
    for j in (0..k).rev() {
        let form = segs[j].form.clone();
        let g = *geom;
        let w = move |r: T| g.green_unchecked(r) * form.eval(&g, r) * g.omega * r.powf(nf - T::one());
        outer[j] = outer[j + 1] + quad.integrate(w, segs[j].lo, segs[j].hi)?.value;
    }
    let mut out = Vec::with_capacity(k);
    for j in 0..k {
        let seg = segs[j].clone();
        let g = *geom;
        let (m0, q_next) = (inner_mass[j], outer[j + 1]);
        let eval = move |rho: T| {
            let quad = TanhSinh::with_abs_tol(lit::<T>(1e-11));
            let m = m0 + seg.form.mass(&g, seg.lo, rho).unwrap_or(T::nan());
            let w = |r: T| g.green_unchecked(r) * seg.form.eval(&g, r) * g.omega * r.powf(g.dim() - T::one());
            let tail = quad.integrate(w, rho, seg.hi).map(|q| q.value).unwrap_or(T::nan());
            let head = if m == T::zero() { T::zero() } else { g.green_unchecked(rho) * m };
            head + tail + q_next
        };
        out.push(RadialSegment {
            lo: segs[j].lo,
            hi: segs[j].hi,
            form: RadialForm::Analytic(Analytic::new(eval)),
        });
    }
    RadialProfile::new(*geom, out)
}

/// Decreasing rearrangement of `|v|` for a radial function.
///
/// Non-increasing, non-negative functions are pulled back piece by piece
/// and keep their closed forms; anything else is rearranged through its
/// distribution function.
pub fn rearrange_radial<T: Real>(v: &RadialProfile<T>) -> Result<MonotoneProfile<T>> {
    let g = v.geom;
    let tol = lit::<T>(1e-10);
    let end = v.eval(g.radius);
    if v.is_non_increasing(tol) && end >= -tol * v.sup_abs().min(T::max_value()) {
        let nf = g.dim();
        let from_r2 = (nf / g.omega).powf(lit::<T>(2.0) / nf);
        let segs = v.segments();
        let mut pieces = Vec::with_capacity(segs.len());
        for (i, s) in segs.iter().enumerate() {
            let lo = if s.lo == T::zero() { T::zero() } else { g.volume_of(s.lo) };
            let hi = if i + 1 == segs.len() { g.volume } else { g.volume_of(s.hi) };
            let form = match &s.form {
                RadialForm::Constant(c) => Form::Constant(c.max(T::zero())),
                RadialForm::Kernel { a, b, q } => Form::Kernel {
                    n: g.n,
                    v: g.volume,
                    a: *a,
                    b: *b,
                    q: *q * from_r2,
                },
                RadialForm::Power { a, k } => Form::Power {
                    a: *a * (nf / g.omega).powf(*k / nf),
                    e: -*k / nf,
                    b: T::zero(),
                },
                RadialForm::Analytic(f) => {
                    let f = f.clone();
                    Form::Analytic(Analytic::new(move |t| (f.0)(g.radius_of(t)).max(T::zero())))
                }
            };
            pieces.push(Piece { lo, hi, form });
        }
        return MonotoneProfile::new(pieces, TailBehavior::ZeroBeyond);
    }
    let v = v.clone();
    let eval = move |t: T| radial_rearranged_value(&v, t);
    MonotoneProfile::single(Form::Analytic(Analytic::new(eval)), g.volume)
}

/// `v^*(t) = inf {s ≥ 0 : |{|v| > s}| ≤ t}` by bisection on the level.
pub fn radial_rearranged_value<T: Real>(v: &RadialProfile<T>, t: T) -> T {
    if v.superlevel_measure_abs(T::zero()) <= t {
        return T::zero();
    }
    let mut hi = v.sup_abs();
    if !hi.is_finite() {
        hi = T::one();
        while v.superlevel_measure_abs(hi) > t {
            hi = hi * lit(4.0);
        }
    }
    let mut lo = T::zero();
    for _ in 0..200 {
        let mid = lo + (hi - lo) / lit(2.0);
        if mid <= lo || mid >= hi {
            break;
        }
        if v.superlevel_measure_abs(mid) <= t {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Outcome of checking `v^*(t) ≤ factor · N_V^*(t) · l1` on a grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundCheck<T> {
    pub points: usize,
    pub violations: usize,
    /// Largest `|{|v| > bound(t)}| / t` seen; at most 1 when the bound holds.
    pub worst_measure_ratio: T,
}

/// Checks the pointwise rearrangement bound without forming `v^*`:
/// `v^*(t) ≤ s` iff `|{|v| > s}| ≤ t`.
pub fn check_pointwise_bound<T: Real>(
    v: &RadialProfile<T>,
    l1: T,
    factor: T,
    grid: &[T],
    rel_tol: T,
) -> Result<BoundCheck<T>> {
    let g = v.geom;
    let mut violations = 0;
    let mut worst = T::zero();
    for &t in grid {
        let s = factor * g.green_rearranged(t)? * l1 * (T::one() + rel_tol);
        let mu = v.superlevel_measure_abs(s);
        let ratio = mu / t;
        worst = worst.max(ratio);
        if mu > t * (T::one() + lit::<T>(1e-12)) {
            violations += 1;
        }
    }
    Ok(BoundCheck {
        points: grid.len(),
        violations,
        worst_measure_ratio: worst,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn laplacian(v: &RadialProfile<f64>, r: f64) -> f64 {
        let h = 1e-4 * r;
        let d2 = (v.eval(r + h) - 2.0 * v.eval(r) + v.eval(r - h)) / (h * h);
        let d1 = (v.eval(r + h) - v.eval(r - h)) / (2.0 * h);
        d2 + (v.geom().dim() - 1.0) * d1 / r
    }

    #[test]
    fn zero_data_give_zero_potential() {
        let g = BallGeometry::new(3, 1.0).unwrap();
        let v = solve_radial(&g, &RadialProfile::zero(g)).unwrap();
        for &r in &[0.0, 0.3, 1.0] {
            assert_eq!(v.eval(r), 0.0);
        }
    }

    #[test]
    fn unit_data_in_three_dimensions() {
        let r_big = 1.7;
        let g = BallGeometry::new(3, r_big).unwrap();
        let v = solve_radial(&g, &RadialProfile::constant(g, 1.0).unwrap()).unwrap();
        for &r in &[0.0, 0.2, 0.9, 1.7] {
            assert_relative_eq!(v.eval(r), (r_big * r_big - r * r) / 6.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn normalised_ball_data_reproduce_the_kernel() {
        for n in 2..=4 {
            let g = BallGeometry::new(n, 1.0).unwrap();
            let d = 0.1;
            let f = RadialProfile::piecewise_constant(g, &[(d, 1.0 / g.volume_of(d)), (1.0, 0.0)]).unwrap();
            let v = solve_radial(&g, &f).unwrap();
            for &r in &[0.1, 0.3, 0.99] {
                assert_relative_eq!(v.eval(r), g.green_radial(r).unwrap(), max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn shell_integrals() {
        let g2 = BallGeometry::new(2, 1.3).unwrap();
        assert_eq!(integrate_green_shell(&g2, 0.4, 0.4).unwrap(), 0.0);
        assert_relative_eq!(integrate_green_shell(&g2, 0.0, 1.3).unwrap(), 1.3 * 1.3 / 4.0, max_relative = 1e-14);
        let g3 = BallGeometry::new(3, 0.8).unwrap();
        assert_relative_eq!(integrate_green_shell(&g3, 0.0, 0.8).unwrap(), 0.64 / 6.0, max_relative = 1e-14);
        for n in 2..=5 {
            let g = BallGeometry::new(n, 1.1).unwrap();
            let (a, b) = (0.2, 0.9);
            let q = TanhSinh::with_abs_tol(1e-14)
                .integrate(
                    |r: f64| g.green_radial(r).unwrap() * g.omega * r.powi(n as i32 - 1),
                    a,
                    b,
                )
                .unwrap()
                .value;
            assert_relative_eq!(integrate_green_shell(&g, a, b).unwrap(), q, max_relative = 1e-12);
        }
    }

    #[test]
    fn piecewise_constant_residual_and_continuity() {
        for n in 2..=4 {
            let g = BallGeometry::new(n, 1.0).unwrap();
            let f = RadialProfile::piecewise_constant(g, &[(0.2, 3.0), (0.5, -1.0), (0.8, 0.5), (1.0, 0.0)]).unwrap();
            let v = solve_radial(&g, &f).unwrap();
            for &r in &[0.1, 0.35, 0.6, 0.9] {
                assert_relative_eq!(-laplacian(&v, r), f.eval(r), epsilon = 1e-5, max_relative = 1e-5);
            }
            for s in &v.segments()[..3] {
                assert_relative_eq!(v.eval(s.hi), v.eval_outer(s.hi), max_relative = 1e-12, epsilon = 1e-15);
            }
            assert!(v.eval(1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn general_data_fall_back_to_quadrature() {
        let g = BallGeometry::new(3, 1.0).unwrap();
        let f = RadialProfile::new(
            g,
            vec![RadialSegment {
                lo: 0.0,
                hi: 1.0,
                form: RadialForm::Power { a: 1.0, k: 1.0 },
            }],
        )
        .unwrap();
        let v = solve_radial(&g, &f).unwrap();
        // -Δv = r gives v = (1 - r³)/12
        for &r in &[0.1, 0.5, 0.9] {
            assert_relative_eq!(v.eval(r), (1.0 - r * r * r) / 12.0, max_relative = 1e-9);
        }
        let bad = RadialProfile::new(
            g,
            vec![RadialSegment {
                lo: 0.0,
                hi: 1.0,
                form: RadialForm::Power { a: 1.0, k: -3.5 },
            }],
        )
        .unwrap();
        assert!(matches!(solve_radial(&g, &bad), Err(Error::Divergence(_))));
    }

    #[test]
    fn masses_and_norms() {
        let g = BallGeometry::new(3, 1.0).unwrap();
        let one = RadialProfile::constant(g, 1.0).unwrap();
        assert_relative_eq!(one.l1_norm().unwrap(), 4.0 / 3.0 * PI, max_relative = 1e-14);
        assert_eq!(RadialProfile::zero(g).signed_mass_split().unwrap(), (0.0, 0.0));
        let f = RadialProfile::piecewise_constant(g, &[(0.5, 1.0), (1.0, -1.0)]).unwrap();
        let (p, m) = f.signed_mass_split().unwrap();
        assert_relative_eq!(p, g.volume_of(0.5), max_relative = 1e-14);
        assert_relative_eq!(m, g.volume - g.volume_of(0.5), max_relative = 1e-14);
    }

    #[test]
    fn kernel_segment_split_by_sign() {
        let g = BallGeometry::new(3, 1.0).unwrap();
        let v = RadialProfile::new(
            g,
            vec![RadialSegment {
                lo: 0.0,
                hi: 1.0,
                form: RadialForm::Kernel { a: 0.0, b: 1.0, q: -4.0 },
            }],
        )
        .unwrap();
        // 1 - 4r² changes sign at r = 1/2
        let (p, m) = v.signed_mass_split().unwrap();
        let w = |a: f64, b: f64| 4.0 * PI * ((b.powi(3) - a.powi(3)) / 3.0 - 4.0 * (b.powi(5) - a.powi(5)) / 5.0);
        assert_relative_eq!(p, w(0.0, 0.5), max_relative = 1e-12);
        assert_relative_eq!(m, -w(0.5, 1.0), max_relative = 1e-12);
    }

    #[test]
    fn monotone_potentials_pull_back_in_closed_form() {
        let g = BallGeometry::new(3, 1.0).unwrap();
        let f = RadialProfile::piecewise_constant(g, &[(0.3, 2.0), (1.0, 0.5)]).unwrap();
        let v = solve_radial(&g, &f).unwrap();
        assert!(v.is_non_increasing(1e-12));
        let u = rearrange_radial(&v).unwrap();
        assert!(u.pieces().iter().all(|p| matches!(p.form, Form::Kernel { .. })));
        for &r in &[0.05, 0.3, 0.7] {
            assert_relative_eq!(u.eval(g.volume_of(r)), v.eval(r), max_relative = 1e-12);
        }
    }

    #[test]
    fn sign_changing_potential_rearranges_through_levels() {
        let g = BallGeometry::new(2, 1.0).unwrap();
        let f = RadialProfile::piecewise_constant(g, &[(0.3, 1.0), (0.6, -2.0), (1.0, 0.3)]).unwrap();
        let v = solve_radial(&g, &f).unwrap();
        let u = rearrange_radial(&v).unwrap();
        // compare with a fine brute-force sample
        let cells: Vec<_> = (0..200_000)
            .map(|i| {
                let (a, b) = (i as f64 / 200_000.0, (i + 1) as f64 / 200_000.0);
                crate::rearrange::CellSample::new(v.eval(0.5 * (a + b)).abs(), g.volume_of(b) - g.volume_of(a))
            })
            .collect();
        let brute = crate::rearrange::decreasing_rearrangement(&cells).unwrap();
        for &t in &[0.01, 0.3, 1.0, 2.5] {
            assert_relative_eq!(u.eval(t), brute.eval(t), max_relative = 1e-3, epsilon = 1e-6);
        }
    }

    #[test]
    fn pointwise_bound_checker() {
        let g = BallGeometry::new(3, 1.0).unwrap();
        let f = RadialProfile::piecewise_constant(g, &[(0.3, 2.0), (0.7, -1.0), (1.0, 0.5)]).unwrap();
        let v = solve_radial(&g, &f).unwrap();
        let l1 = f.l1_norm().unwrap();
        let grid = crate::profile::log_grid(1e-12 * g.volume, g.volume * (1.0 - 1e-9), 40);
        let ok = check_pointwise_bound(&v, l1, 1.0, &grid, 1e-9).unwrap();
        assert_eq!(ok.violations, 0);
        let bad = check_pointwise_bound(&v, l1, 0.05, &grid, 1e-9).unwrap();
        assert!(bad.violations > 0);
    }
}
