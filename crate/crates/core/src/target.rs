//! Membership in the optimal target spaces and the majorant construction
//! behind the bound `u^* ≤ v^* + C + λ`.
//!
//! The measure axis is parametrised by `ℓ = log(V/t)` throughout, so that
//! limits `t → 0` can be probed far below the smallest positive double.

use std::sync::Arc;

use crate::error::{domain, Error, Result};
use crate::green::{green_distribution, green_rearranged, green_rearranged_scaled, BallGeometry};
use crate::profile::{log_grid, Analytic, Form, MonotoneProfile, Piece};
use crate::quadrature::TanhSinh;
use crate::radial::{solve_radial, RadialForm, RadialProfile, RadialSegment};
use crate::rearrange::maximal_function;
use crate::scalar::{lit, Real};

/// Default deepest probe `ℓ = log(V/t)`.
pub const ELL_MAX: f64 = 1e9;
/// Default membership threshold on the defect at the deepest probe.
pub const MEMBER_THRESHOLD: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DefectPoint<T> {
    /// `log(V/t)`
    pub ell: T,
    /// `V e^{-ell}`, zero once it underflows.
    pub t: T,
    /// `u^{**}(t) / N_V^*(t)`
    pub ratio: T,
}

#[derive(Debug, Clone)]
pub struct MembershipVerdict<T = f64> {
    pub curve: Vec<DefectPoint<T>>,
    /// Supremum of the curve on `(0, t0]`.
    pub limit_defect: T,
    /// Defect at the deepest probe.
    pub tail_defect: T,
    pub member: bool,
}

/// `u^{**}(t) / N_V^*(t)` on a grid `ℓ ∈ [log(V/t0), ELL_MAX]`, with the
/// trend verdict: member iff the final defect is below `threshold` and did
/// not grow over the last two decades of `ℓ`.
pub fn target_defect<T: Real>(u_star: &MonotoneProfile<T>, n: u32, t0: T, threshold: T) -> Result<MembershipVerdict<T>> {
    let v = u_star.total_measure();
    if !(t0 > T::zero() && t0 <= v) {
        return Err(domain!("t0 = {t0:e} outside (0, {v:e}]"));
    }
    let m = maximal_function(u_star)?;
    let ell_max: T = lit(ELL_MAX);
    let ell0 = (v / t0).ln().max(lit(1e-6));
    let mut curve = Vec::with_capacity(400);
    for ell in log_grid(ell0, ell_max, 400) {
        let num = m
            .scaled_at(ell)
            .ok_or_else(|| Error::Unsupported("profile has no closed form near the origin".into()))?;
        let den = green_rearranged_scaled(n, v, ell);
        let ratio = if num.mantissa == T::zero() { T::zero() } else { num.ratio(&den) };
        curve.push(DefectPoint {
            ell,
            t: v * (-ell).exp(),
            ratio,
        });
    }
    let limit_defect = curve.iter().map(|p| p.ratio).fold(T::zero(), |a, b| a.max(b));
    let tail_defect = curve.last().expect("non-empty").ratio;
    let earlier = curve
        .iter()
        .rev()
        .find(|p| p.ell <= ell_max / lit(100.0))
        .map(|p| p.ratio)
        .unwrap_or(tail_defect);
    let member = tail_defect < threshold && (tail_defect == T::zero() || tail_defect < earlier);
    Ok(MembershipVerdict {
        curve,
        limit_defect,
        tail_defect,
        member,
    })
}

/// `(u - level)^+` rearranged: `u^*(t) - level` where positive, zero beyond.
pub fn truncate_above<T: Real>(u_star: &MonotoneProfile<T>, level: T) -> Result<MonotoneProfile<T>> {
    if !(level >= T::zero()) {
        return Err(domain!("truncation level must be nonnegative, got {level:e}"));
    }
    let total = u_star.total_measure();
    let cut = u_star.superlevel_measure(level);
    let mut pieces = Vec::new();
    for p in u_star.pieces() {
        if p.lo >= cut {
            break;
        }
        pieces.push(Piece {
            lo: p.lo,
            hi: p.hi.min(cut),
            form: p.form.shifted(level),
        });
    }
    if cut < total {
        pieces.push(Piece {
            lo: cut,
            hi: total,
            form: Form::Constant(T::zero()),
        });
    }
    MonotoneProfile::new(pieces, u_star.tail())
}

/// `min(N_V^*, m)`.
pub fn truncated_kernel<T: Real>(n: u32, v: T, m: T) -> Result<MonotoneProfile<T>> {
    if !(m > T::zero()) {
        return Err(domain!("truncation height must be positive"));
    }
    let t = green_distribution(n, v, m)?;
    let kernel = Form::Kernel {
        n,
        v,
        a: T::one(),
        b: T::zero(),
        q: T::zero(),
    };
    if t <= T::zero() {
        return MonotoneProfile::single(kernel, v);
    }
    if t >= v {
        return MonotoneProfile::constant(m, v);
    }
    MonotoneProfile::new(
        vec![
            Piece {
                lo: T::zero(),
                hi: t,
                form: Form::Constant(m),
            },
            Piece { lo: t, hi: v, form: kernel },
        ],
        crate::profile::TailBehavior::ZeroBeyond,
    )
}

/// The envelope `f`, weighted average `k` and density `h = k'` built from
/// a truncated profile supported in `(0, V_R]`, all on a node grid in
/// `ℓ = log(V_R/t)`.
#[derive(Debug, Clone)]
pub struct Majorant<T = f64> {
    pub n: u32,
    pub v_r: T,
    /// Nodes `ℓ_0 > ℓ_1 > … > ℓ_M = 0`.
    ell: Vec<T>,
    /// Envelope value on `(ℓ_{i+1}, ℓ_i]`.
    env: Vec<T>,
    /// `I_i = Σ_{j≥i} F_j (ℓ_j - ℓ_{j+1})`.
    tail: Vec<T>,
    /// `∫_{t_i}^{V_R} N^* h`, where `t_i` is representable.
    kernel_tail: Vec<T>,
    /// Constant subtracted from `g` before the envelope.
    pub shift: T,
}

/// Number of envelope nodes.
pub const ENVELOPE_NODES: usize = 4000;

impl<T: Real> Majorant<T> {
    fn locate(&self, ell: T) -> usize {
        // interval i holds ℓ ∈ (ℓ_{i+1}, ℓ_i]
        let m = self.ell.len() - 1;
        let j = self.ell.partition_point(|&x| x >= ell);
        j.saturating_sub(1).min(m - 1)
    }

    /// `f` at `ℓ`, extended as `F_0 ℓ_0/ℓ` beyond the grid.
    pub fn envelope_at(&self, ell: T) -> T {
        if ell > self.ell[0] {
            return self.env[0] * self.ell[0] / ell;
        }
        self.env[self.locate(ell)]
    }

    /// `k` at `ℓ`.
    pub fn k_at(&self, ell: T) -> T {
        if ell <= T::zero() {
            return *self.env.last().expect("non-empty");
        }
        if ell > self.ell[0] {
            let l0 = self.ell[0];
            return (self.env[0] * l0 * (ell / l0).ln() + self.tail[0]) / ell;
        }
        let i = self.locate(ell);
        (self.env[i] * (ell - self.ell[i + 1]) + self.tail[i + 1]) / ell
    }

    fn h_times_t(&self, ell: T) -> T {
        if ell <= T::zero() {
            return T::zero();
        }
        let f = if ell > self.ell[0] {
            self.envelope_at(ell)
        } else {
            self.env[self.locate(ell)]
        };
        ((self.k_at(ell) - f) / ell).max(T::zero())
    }

    fn ell_of(&self, t: T) -> T {
        (self.v_r / t).ln().max(T::zero())
    }

    /// `k(t)`, increasing from `k(0) = 0` to `k(V_R) = f(V_R)`.
    pub fn k(&self, t: T) -> T {
        self.k_at(self.ell_of(t))
    }

    pub fn envelope(&self, t: T) -> T {
        self.envelope_at(self.ell_of(t))
    }

    /// `h = k'`.
    pub fn h(&self, t: T) -> T {
        if t >= self.v_r {
            return T::zero();
        }
        self.h_times_t(self.ell_of(t)) / t
    }

    /// `∫_0^{V_R} h = k(V_R)`.
    pub fn mass(&self) -> T {
        *self.env.last().expect("non-empty")
    }

    /// `N_{V_R}^*(t) ∫_0^t h`.
    pub fn dominating(&self, t: T) -> Result<T> {
        Ok(green_rearranged(self.n, self.v_r, t.min(self.v_r))? * self.k(t))
    }

    fn kernel_piece(&self, i: usize, ell_lo: T, ell_hi: T) -> Result<T> {
        if ell_hi <= ell_lo {
            return Ok(T::zero());
        }
        let f = |ell: T| {
            let k = green_rearranged_scaled(self.n, self.v_r, ell).value();
            k * ((self.env[i] * (ell - self.ell[i + 1]) + self.tail[i + 1]) / ell - self.env[i]).max(T::zero()) / ell
        };
        let big = green_rearranged_scaled(self.n, self.v_r, ell_hi).value() * (ell_hi - ell_lo) / ell_lo.max(lit(1e-300));
        let scale = ((self.k_at(ell_hi) + self.env[i]) * big.max(T::one())).max(T::min_positive_value());
        Ok(TanhSinh::with_abs_tol(lit::<T>(1e-15) * scale).integrate(f, ell_lo, ell_hi)?.value)
    }

    /// `v_0^*(t) = N^*(t) k(t) + ∫_t^{V_R} N^* h`, the rearrangement of the
    /// solution on `B_R` with data `h(|B_{|x|}|)`.
    pub fn v0_star(&self, t: T) -> Result<T> {
        if t >= self.v_r {
            return Ok(T::zero());
        }
        let ell = self.ell_of(t);
        if ell > self.ell[0] || !(t > T::zero()) {
            return Err(domain!("t = {t:e} below the envelope grid"));
        }
        let i = self.locate(ell);
        let rest = self.kernel_tail[i + 1];
        if !rest.is_finite() {
            return Err(domain!("t = {t:e} below the representable range"));
        }
        Ok(self.dominating(t)? + rest + self.kernel_piece(i, self.ell[i + 1], ell)?)
    }
}

fn envelope_inputs<T: Real>(u0: &MonotoneProfile<T>, n: u32, v_r: T, nodes: &[T], shift: T) -> Vec<T> {
    let total = u0.total_measure();
    let offset = (total / v_r).ln();
    let m = nodes.len() - 1;
    let g = |ell: T| -> T {
        let den = green_rearranged_scaled(n, v_r, ell);
        match u0.scaled_at(ell + offset) {
            Some(u) if u.mantissa > T::zero() => u.ratio(&den),
            _ => T::zero(),
        }
    };
    let mut out = Vec::with_capacity(m);
    for i in 0..m {
        let raw = if i + 1 < m {
            let (a, b) = (nodes[i + 1], nodes[i]);
            let spread = green_rearranged_scaled(n, v_r, b).ratio(&green_rearranged_scaled(n, v_r, a));
            let pieces = if spread > lit(1.01) {
                (spread.ln() / lit::<T>(1.01).ln()).ceil().to_usize().unwrap_or(usize::MAX)
            } else {
                1
            };
            if pieces <= 64 {
                // on each piece u0^* is largest at the left end and N^* smallest at the right
                let at = |k: usize| a + (b - a) * lit::<T>(k as f64 / pieces as f64);
                (0..pieces).fold(T::zero(), |best, k| {
                    let den = green_rearranged_scaled(n, v_r, at(k));
                    let bound = match u0.scaled_at(at(k + 1) + offset) {
                        Some(u) if u.mantissa > T::zero() => u.ratio(&den),
                        _ => T::zero(),
                    };
                    best.max(bound)
                })
            } else {
                // the kernel varies too much across the cell for an interval bound
                (0..=64).fold(T::zero(), |best, k| best.max(g(a + (b - a) * lit::<T>(k as f64 / 64.0))))
            }
        } else {
            let mut best = g(nodes[i]);
            for s in log_grid(nodes[i] * lit(1e-4), nodes[i], 64) {
                best = best.max(g(s));
            }
            best
        };
        out.push((raw - shift).max(T::zero()));
    }
    out
}

fn build_majorant<T: Real>(u0: &MonotoneProfile<T>, n: u32, v_r: T, shift: T) -> Result<Majorant<T>> {
    if !(v_r > T::zero() && v_r <= u0.total_measure()) {
        return Err(domain!("V_R = {v_r:e} must lie in (0, {:e}]", u0.total_measure()));
    }
    if u0.superlevel_measure(T::zero()) > v_r * (T::one() + lit(1e-12)) {
        return Err(Error::Precondition("truncated profile is not supported in (0, V_R]".into()));
    }
    let mut nodes = log_grid(lit::<T>(1e-8), lit(ELL_MAX), ENVELOPE_NODES);
    nodes.reverse();
    nodes.push(T::zero());
    let raw = envelope_inputs(u0, n, v_r, &nodes, shift);
    let m = nodes.len() - 1;
    let mut env = Vec::with_capacity(m);
    let mut run = T::zero();
    for &g in &raw {
        if !g.is_finite() {
            return Err(Error::Divergence("envelope is unbounded".into()));
        }
        run = run.max(g);
        env.push(run);
    }
    let mut tail = vec![T::zero(); m + 1];
    for i in (0..m).rev() {
        tail[i] = tail[i + 1] + env[i] * (nodes[i] - nodes[i + 1]);
    }
    let mut maj = Majorant {
        n,
        v_r,
        ell: nodes,
        env,
        tail,
        kernel_tail: vec![],
        shift,
    };
    let mut kt = vec![T::infinity(); m + 1];
    kt[m] = T::zero();
    for i in (0..m).rev() {
        if maj.ell[i] > lit(700.0) {
            break;
        }
        kt[i] = kt[i + 1] + maj.kernel_piece(i, maj.ell[i + 1], maj.ell[i])?;
    }
    maj.kernel_tail = kt;
    Ok(maj)
}

/// Envelope, `k` and `h` for a member `u_0^*` supported in `(0, V_R]`.
pub fn majorant_density<T: Real>(u0: &MonotoneProfile<T>, n: u32, v_r: T) -> Result<Majorant<T>> {
    let maj = build_majorant(u0, n, v_r, T::zero())?;
    let deep = maj.env[0];
    let mid = maj.envelope_at(lit::<T>(ELL_MAX) / lit(100.0));
    if !(deep < lit(MEMBER_THRESHOLD) && (deep == T::zero() || deep <= mid)) {
        return Err(Error::Precondition(format!(
            "profile is not a member: envelope {deep:e} at the deepest probe"
        )));
    }
    Ok(maj)
}

/// The balanced majorant on `B_{2R}`: data `h` on `B_R`, a compensating
/// constant on `{4R/3 < |x| < 5R/3}`.
#[derive(Debug, Clone)]
pub struct MajorantPotential<T = f64> {
    pub inner: BallGeometry<T>,
    pub outer: BallGeometry<T>,
    /// `∫ h = ∫_{B_R} F`.
    pub mass: T,
    /// `v(R)` for the balanced data.
    pub v_at_r: T,
    /// `v_1 - v` on `B_R`.
    pub constant: T,
    /// Solution outside `B_R` (and on it, for the equivalent uniform mass).
    pub shell_solution: RadialProfile<T>,
    /// `∫ F`, zero up to rounding.
    pub net_integral: T,
    majorant: Arc<Majorant<T>>,
}

pub fn majorant_potential<T: Real>(maj: &Majorant<T>) -> Result<MajorantPotential<T>> {
    let inner = BallGeometry::with_volume(maj.n, maj.v_r)?;
    let r = inner.radius;
    let outer = BallGeometry::new(maj.n, lit::<T>(2.0) * r)?;
    let mass = maj.mass();
    let (a, b) = (lit::<T>(4.0) / lit(3.0) * r, lit::<T>(5.0) / lit(3.0) * r);
    let ann = outer.volume_of(b) - outer.volume_of(a);
    let neg = mass / ann;
    let data = RadialProfile::piecewise_constant(
        outer,
        &[(r, mass / inner.volume), (a, T::zero()), (b, -neg), (outer.radius, T::zero())],
    )?;
    let net_integral = mass - neg * ann;
    let shell_solution = solve_radial(&outer, &data)?;
    let constant = neg * (outer.green_moment(b) - outer.green_moment(a));
    let v_at_r = mass * outer.green_radial(r)? - constant;
    Ok(MajorantPotential {
        inner,
        outer,
        mass,
        v_at_r,
        constant,
        shell_solution,
        net_integral,
        majorant: Arc::new(maj.clone()),
    })
}

impl<T: Real> MajorantPotential<T> {
    pub fn v0_star(&self, t: T) -> Result<T> {
        self.majorant.v0_star(t)
    }

    /// `v_0^* + M N_{B_{2R}}(R)`.
    pub fn v1_star(&self, t: T) -> Result<T> {
        Ok(self.v0_star(t)? + self.mass * self.outer.green_radial(self.inner.radius)?)
    }

    /// `v^*` on `(0, V_R]`.
    pub fn v_star(&self, t: T) -> Result<T> {
        Ok(self.v0_star(t)? + self.v_at_r)
    }

    /// The radial potential on `B_{2R}`.
    pub fn potential(&self) -> Result<RadialProfile<T>> {
        let maj = Arc::clone(&self.majorant);
        let inner = self.inner;
        let shift = self.v_at_r;
        let floor = inner.volume * (-lit::<T>(700.0)).exp();
        let head = RadialForm::Analytic(Analytic::new(move |rho: T| {
            let t = inner.volume_of(rho).max(floor);
            maj.v0_star(t).unwrap_or(T::nan()) + shift
        }));
        let mut segments = vec![RadialSegment {
            lo: T::zero(),
            hi: inner.radius,
            form: head,
        }];
        segments.extend(self.shell_solution.segments().iter().filter(|s| s.lo >= inner.radius).cloned());
        RadialProfile::new(self.outer, segments)
    }
}

/// One comparison of the chain, evaluated on a grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainLink<T> {
    pub points: usize,
    pub violations: usize,
    /// Largest `(lhs - rhs)/scale`; nonpositive when the link holds.
    pub worst: T,
}

#[derive(Debug, Clone)]
pub struct DominationReport<T = f64> {
    pub level: T,
    pub v_r: T,
    pub mass: T,
    pub constant: T,
    /// `N^* ∫_0^t h ≥ u_0^*`
    pub density: ChainLink<T>,
    /// `u^* ≤ u_0^* + λ ≤ v_0^* + λ ≤ v_1^* + λ ≤ v^* + C + λ`
    pub chain: [ChainLink<T>; 4],
    /// `v ≥ 0`, non-increasing, zero on the outer shell.
    pub potential_ok: bool,
    pub net_integral: T,
    /// Limsup term added in the extended bound, zero for members.
    pub limsup: T,
}

impl<T: Real> DominationReport<T> {
    pub fn holds(&self) -> bool {
        self.density.violations == 0 && self.chain.iter().all(|c| c.violations == 0) && self.potential_ok
    }
}

fn link<T: Real>(pairs: &[(T, T)], rel_tol: T) -> ChainLink<T> {
    let mut violations = 0;
    let mut worst = -T::infinity();
    for &(lhs, rhs) in pairs {
        let scale = lhs.abs().max(rhs.abs()).max(T::min_positive_value());
        let excess = (lhs - rhs) / scale;
        worst = worst.max(excess);
        if excess > rel_tol {
            violations += 1;
        }
    }
    ChainLink {
        points: pairs.len(),
        violations,
        worst,
    }
}

fn run_chain<T: Real>(u_star: &MonotoneProfile<T>, n: u32, v_r: T, points: usize, rel_tol: T, shift: Option<T>) -> Result<DominationReport<T>> {
    let level = u_star.eval(v_r);
    let u0 = truncate_above(u_star, level)?;
    let maj = match shift {
        None => majorant_density(&u0, n, v_r)?,
        Some(s) => build_majorant(&u0, n, v_r, s)?,
    };
    let limsup = shift.unwrap_or(T::zero());
    let pot = majorant_potential(&maj)?;
    let grid = log_grid(v_r * lit(1e-12), v_r, points);
    let mut density = Vec::with_capacity(points);
    let mut c = [vec![], vec![], vec![], vec![]];
    for &t in &grid {
        let kstar = green_rearranged(n, v_r, t)?;
        let extra = kstar * limsup;
        let u = u_star.eval(t);
        let u0t = u0.eval(t);
        let v0 = pot.v0_star(t)?;
        let v1 = pot.v1_star(t)?;
        let v = pot.v_star(t)?;
        density.push((u0t, maj.dominating(t)? + extra));
        c[0].push((u, u0t + level));
        c[1].push((u0t + level, v0 + extra + level));
        c[2].push((v0 + extra + level, v1 + extra + level));
        c[3].push((v1 + extra + level, v + pot.constant + extra + level));
    }
    // beyond V_R the truncation level alone dominates
    for t in log_grid(v_r, u_star.total_measure(), 16) {
        c[0].push((u_star.eval(t), level));
    }
    let v = pot.potential()?;
    let out = &pot.outer;
    let mut potential_ok = true;
    let mut prev = T::infinity();
    let probe = |rho: T| v.eval(rho);
    for rho in log_grid(pot.inner.radius * lit(1e-3), out.radius, 200) {
        let x = probe(rho);
        let scale = pot.v_at_r.abs().max(pot.mass * out.green_radial(pot.inner.radius)?).max(T::min_positive_value());
        if x < -lit::<T>(1e-9) * scale || x > prev + lit::<T>(1e-9) * scale {
            potential_ok = false;
        }
        if rho >= lit::<T>(5.0) / lit(3.0) * pot.inner.radius && x.abs() > lit::<T>(1e-9) * scale {
            potential_ok = false;
        }
        prev = x;
    }
    let inner_r = pot.inner.radius;
    if (v.eval_outer(inner_r) - pot.v_at_r).abs() > lit::<T>(1e-9) * pot.v_at_r.abs().max(T::min_positive_value()) {
        potential_ok = false;
    }
    Ok(DominationReport {
        level,
        v_r,
        mass: pot.mass,
        constant: pot.constant,
        density: link(&density, rel_tol),
        chain: [link(&c[0], rel_tol), link(&c[1], rel_tol), link(&c[2], rel_tol), link(&c[3], rel_tol)],
        potential_ok,
        net_integral: pot.net_integral,
        limsup,
    })
}

/// Builds the majorant for a member profile on `(0, V]`, with `V_R = V/2^n`
/// unless given, and checks every link of the domination chain on a
/// `points`-point log grid of `[10^{-12} V_R, V_R]`.
pub fn domination_chain<T: Real>(u_star: &MonotoneProfile<T>, n: u32, v_r: Option<T>, points: usize, rel_tol: T) -> Result<DominationReport<T>> {
    let v_r = v_r.unwrap_or_else(|| u_star.total_measure() / lit::<T>(2.0).powi(n as i32));
    run_chain(u_star, n, v_r, points, rel_tol, None)
}

/// The bound `u^* ≤ v^* + C + N^* L + λ` for profiles that need not be
/// members, with `L` the tail defect of `u^{**}/N^*`.
pub fn extended_domination<T: Real>(u_star: &MonotoneProfile<T>, n: u32, v_r: Option<T>, points: usize, rel_tol: T) -> Result<DominationReport<T>> {
    let v_r = v_r.unwrap_or_else(|| u_star.total_measure() / lit::<T>(2.0).powi(n as i32));
    let verdict = target_defect(u_star, n, u_star.total_measure(), lit(MEMBER_THRESHOLD))?;
    let l = if verdict.member { T::zero() } else { verdict.tail_defect };
    run_chain(u_star, n, v_r, points, rel_tol, Some(l))
}
