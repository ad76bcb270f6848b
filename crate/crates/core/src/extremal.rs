//! The three extremal families and their sharpness ratios.
//!
//! * bump: `-ΔU = χ_{B_δ}/|B_δ|`, saturating `u^* ≤ N^* ‖Δu‖₁`;
//! * balanced: half the mass on `B_δ`, the other half removed on a thin
//!   shell at the boundary, saturating the factor `1/2`;
//! * translated pair: two balanced potentials of opposite sign a distance
//!   `λ` apart, saturating `2^{-2/n}` in the whole space.

use crate::error::{domain, Result};
use crate::green::{green_rearranged, green_rearranged_infinite, sphere_measure, BallGeometry};
use crate::profile::MonotoneProfile;
use crate::quadrature::TanhSinh;
use crate::radial::{integrate_green_shell, rearrange_radial, solve_radial, RadialProfile};
use crate::rearrange::{decreasing_rearrangement, CellSample};
use crate::scalar::{lit, Real};

/// Data `χ_{B_δ}/|B_δ|`.
pub fn bump_data<T: Real>(geom: &BallGeometry<T>, delta: T) -> Result<RadialProfile<T>> {
    if !(delta > T::zero()) || delta >= geom.radius {
        return Err(domain!("bump radius {delta:e} outside (0, {:e})", geom.radius));
    }
    RadialProfile::piecewise_constant(*geom, &[(delta, T::one() / geom.volume_of(delta)), (geom.radius, T::zero())])
}

/// `U_δ^R`, the potential of [`bump_data`].
pub fn bump_potential<T: Real>(geom: &BallGeometry<T>, delta: T) -> Result<RadialProfile<T>> {
    solve_radial(geom, &bump_data(geom, delta)?)
}

fn shell_volume<T: Real>(geom: &BallGeometry<T>, a: T, b: T) -> T {
    geom.volume_of(b) - geom.volume_of(a)
}

/// Data `χ_{B_δ}/(2|B_δ|) - χ_A/(2|A|)` with `A = {R-2ε < |x| < R-ε}`.
pub fn balanced_data<T: Real>(geom: &BallGeometry<T>, delta: T, eps: T) -> Result<RadialProfile<T>> {
    let r = geom.radius;
    let two = lit::<T>(2.0);
    if !(delta > T::zero() && eps > T::zero() && delta < r - two * eps) {
        return Err(domain!("need 0 < δ < R - 2ε, got δ = {delta:e}, ε = {eps:e}, R = {r:e}"));
    }
    let ann = shell_volume(geom, r - two * eps, r - eps);
    RadialProfile::piecewise_constant(
        *geom,
        &[
            (delta, T::one() / (two * geom.volume_of(delta))),
            (r - two * eps, T::zero()),
            (r - eps, -T::one() / (two * ann)),
            (r, T::zero()),
        ],
    )
}

/// `U_{δ,ε}^R`, the compactly supported potential of [`balanced_data`].
pub fn balanced_potential<T: Real>(geom: &BallGeometry<T>, delta: T, eps: T) -> Result<RadialProfile<T>> {
    solve_radial(geom, &balanced_data(geom, delta, eps)?)
}

/// `(1/(2|A_{ε,R}|)) ∫_{A_{ε,R}} N_{B_R}`: the constant the balanced
/// potential loses against `N/2` on `[δ, R-2ε]`.
pub fn balanced_shell_constant<T: Real>(geom: &BallGeometry<T>, eps: T) -> Result<T> {
    let r = geom.radius;
    let two = lit::<T>(2.0);
    let ann = shell_volume(geom, r - two * eps, r - eps);
    Ok(integrate_green_shell(geom, r - two * eps, r - eps)? / (two * ann))
}

/// The constant `d_n` in `U_{δ,R/4}^R = c_n |x|^{2-n}/2 - d_n R^{2-n}` on
/// `[δ, R/2]`; independent of `R` and `δ`.
pub fn pair_constant_dn<T: Real>(n: u32) -> Result<T> {
    if n < 3 {
        return Err(domain!("d_n is defined for n ≥ 3"));
    }
    let geom = BallGeometry::new(n, T::one())?;
    let c = geom.c_n().expect("n ≥ 3");
    Ok(c / lit(2.0) + balanced_shell_constant(&geom, lit(0.25))?)
}

/// `|B_{r1} ∩ (B_{r2} + d e_1)|` in `R^n`.
pub fn lens_volume<T: Real>(n: u32, r1: T, r2: T, d: T) -> Result<T> {
    let geom1 = BallGeometry::new(n, r1)?;
    let d = d.abs();
    if d >= r1 + r2 {
        return Ok(T::zero());
    }
    if d <= (r1 - r2).abs() {
        let small = r1.min(r2);
        return Ok(geom1.volume_of(small));
    }
    let x0 = (d * d + r1 * r1 - r2 * r2) / (lit::<T>(2.0) * d);
    Ok(cap_volume(n, r1, x0)? + cap_volume(n, r2, d - x0)?)
}

/// Volume of `{x ∈ B_r : x_1 > c}`.
pub fn cap_volume<T: Real>(n: u32, r: T, c: T) -> Result<T> {
    let c = c.max(-r).min(r);
    let pi = T::PI();
    match n {
        2 => {
            let h = (r * r - c * c).max(T::zero()).sqrt();
            Ok(r * r * (c / r).acos() - c * h)
        }
        3 => Ok(pi * (r - c) * (r - c) * (lit::<T>(2.0) * r + c) / lit(3.0)),
        _ => {
            let nf = T::of_usize(n as usize);
            let w: T = sphere_measure(n - 1);
            let half_pow = (nf - T::one()) / lit(2.0);
            let f = |s: T| (r * r - s * s).max(T::zero()).powf(half_pow);
            let q = TanhSinh::with_abs_tol(lit::<T>(1e-15) * r.powf(nf)).integrate(f, c, r)?;
            Ok(w / (nf - T::one()) * q.value)
        }
    }
}

/// `‖h_λ^R‖₁ = |A Δ (A + x_λ)| / |A|` with `A = {R/2 < |x| < 3R/4}`.
pub fn defect_l1<T: Real>(n: u32, lambda: T, radius: T) -> Result<T> {
    if !(lambda >= T::zero()) || !(radius > T::zero()) {
        return Err(domain!("need λ ≥ 0 and R > 0"));
    }
    if lambda == T::zero() {
        return Ok(T::zero());
    }
    let a = lit::<T>(0.75) * radius;
    let b = lit::<T>(0.5) * radius;
    let geom = BallGeometry::new(n, radius)?;
    let ann = geom.volume_of(a) - geom.volume_of(b);
    let inter = lens_volume(n, a, a, lambda)? - lens_volume(n, a, b, lambda)? - lens_volume(n, b, a, lambda)?
        + lens_volume(n, b, b, lambda)?;
    let sym = (lit::<T>(2.0) * (ann - inter)).max(T::zero());
    Ok(sym / ann)
}

/// `defect_l1 / (λ/R)`: the constant implied by the linear defect bound.
pub fn implied_defect_constant<T: Real>(n: u32, lambda: T, radius: T) -> Result<T> {
    Ok(defect_l1(n, lambda, radius)? * radius / lambda)
}

/// `V(x) = U(x) - U(x - x_λ)` with `U = U_{δ,R/4}^R`, written in the
/// axial coordinate `x_1` and the distance `ρ` to the axis.
#[derive(Debug, Clone)]
pub struct AxisymmetricField<T = f64> {
    pub geom: BallGeometry<T>,
    pub delta: T,
    pub lambda: T,
    pub bump: RadialProfile<T>,
}

/// Builds the translated pair; requires `2δ < λ < R` and `δ < R/2`.
pub fn translated_pair<T: Real>(geom: &BallGeometry<T>, delta: T, lambda: T) -> Result<AxisymmetricField<T>> {
    let r = geom.radius;
    let two = lit::<T>(2.0);
    if !(delta > T::zero() && two * delta < lambda && lambda < r && two * delta < r) {
        return Err(domain!(
            "translated pair needs 0 < 2δ < λ < R and 2δ < R, got δ = {delta:e}, λ = {lambda:e}, R = {r:e}"
        ));
    }
    let bump = balanced_potential(geom, delta, r / lit(4.0))?;
    Ok(AxisymmetricField {
        geom: *geom,
        delta,
        lambda,
        bump,
    })
}

impl<T: Real> AxisymmetricField<T> {
    pub fn eval(&self, x1: T, rho: T) -> T {
        let a = x1.hypot(rho);
        let b = (x1 - self.lambda).hypot(rho);
        self.bump.eval(a) - self.bump.eval(b)
    }

    /// `‖ΔV‖₁ = 1 + defect_l1/2`, valid while the small balls avoid the
    /// other annulus.
    pub fn laplacian_l1(&self) -> Result<T> {
        let r = self.geom.radius;
        let (d, l) = (self.delta, self.lambda);
        if !(l + d <= r / lit(2.0) || l - d >= lit::<T>(0.75) * r) {
            return Err(domain!("small balls overlap the annuli"));
        }
        Ok(T::one() + defect_l1(self.geom.n, l, r)? / lit(2.0))
    }
}

/// Cell layout for [`field_rearrangement`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec<T> {
    pub x1_lo: T,
    pub x1_hi: T,
    pub rho_hi: T,
    /// Axial positions around which the grid is refined.
    pub poles: Vec<T>,
    /// Cell size near a pole.
    pub fine: T,
    /// Distance from a pole covered with uniform cells.
    pub fine_radius: T,
    /// Geometric growth of the cell size beyond `fine_radius`.
    pub growth: T,
    /// Minimum number of cells across the window along each axis.
    pub min_window_cells: usize,
    /// Count each cell twice: the window is the half-space `x_1 < λ/2` and
    /// the other half is its odd reflection.
    pub mirror: bool,
    /// Levels above which the rearrangement is exact up to the grid.
    pub valid_above: T,
}

impl<T: Real> GridSpec<T> {
    /// Half-space window `[-λ/2, λ/2] × [0, λ/2]`, mirrored.
    pub fn pair(field: &AxisymmetricField<T>, cells_per_delta: usize) -> Self {
        let half = field.lambda / lit(2.0);
        Self {
            x1_lo: -half,
            x1_hi: half,
            rho_hi: half,
            poles: vec![T::zero()],
            fine: field.delta / T::of_usize(cells_per_delta),
            fine_radius: field.delta * lit(2.0),
            growth: lit(1.04),
            min_window_cells: 64,
            mirror: true,
            valid_above: field.bump.eval(half),
        }
    }

    /// Window `[-w, w] × [0, w]` around the first bump, unmirrored.
    pub fn isolated(field: &AxisymmetricField<T>, w: T, cells_per_delta: usize) -> Self {
        Self {
            x1_lo: -w,
            x1_hi: w,
            rho_hi: w,
            poles: vec![T::zero()],
            fine: field.delta / T::of_usize(cells_per_delta),
            fine_radius: field.delta * lit(2.0),
            growth: lit(1.04),
            min_window_cells: 64,
            mirror: false,
            valid_above: field.bump.eval(w),
        }
    }

    /// Window symmetric about `λ/2` covering both bumps, unmirrored.
    pub fn symmetric_pair(field: &AxisymmetricField<T>, margin: T, cells_per_delta: usize) -> Self {
        Self {
            x1_lo: -margin,
            x1_hi: field.lambda + margin,
            rho_hi: margin,
            poles: vec![T::zero(), field.lambda],
            fine: field.delta / T::of_usize(cells_per_delta),
            fine_radius: field.delta * lit(2.0),
            growth: lit(1.04),
            min_window_cells: 64,
            mirror: false,
            valid_above: field.bump.eval(margin.min(field.lambda / lit(2.0))),
        }
    }

    fn offsets(&self, reach: T, window: T) -> Vec<T> {
        let cap = window / T::of_usize(self.min_window_cells.max(1));
        let mut out = vec![T::zero()];
        let mut x = T::zero();
        let mut h = self.fine.min(cap);
        while x < reach {
            if x >= self.fine_radius {
                h = (h * self.growth).min(cap).max(self.fine.min(cap));
            }
            x = x + h;
            out.push(x);
        }
        out
    }

    /// Axial nodes, refined around each pole and symmetric about it.
    pub fn x1_nodes(&self) -> Vec<T> {
        let (lo, hi) = (self.x1_lo, self.x1_hi);
        let mut nodes = vec![lo, hi];
        for &p in &self.poles {
            let reach = (p - lo).max(hi - p);
            for o in self.offsets(reach, hi - lo) {
                for x in [p - o, p + o] {
                    if x > lo && x < hi {
                        nodes.push(x);
                    }
                }
            }
        }
        tidy(nodes, self.fine * lit(1e-6))
    }

    pub fn rho_nodes(&self) -> Vec<T> {
        let mut nodes: Vec<T> = self.offsets(self.rho_hi, self.rho_hi).into_iter().filter(|&x| x < self.rho_hi).collect();
        nodes.push(self.rho_hi);
        tidy(nodes, self.fine * lit(1e-6))
    }
}

fn tidy<T: Real>(mut nodes: Vec<T>, min_gap: T) -> Vec<T> {
    nodes.sort_by(|a, b| a.partial_cmp(b).expect("finite nodes"));
    let mut out: Vec<T> = Vec::with_capacity(nodes.len());
    let last = *nodes.last().expect("non-empty");
    for x in nodes {
        match out.last() {
            Some(&y) if x - y < min_gap => {}
            _ => out.push(x),
        }
    }
    if *out.last().expect("non-empty") != last {
        let k = out.len() - 1;
        out[k] = last;
    }
    out
}

/// Rearrangement of `|V|` over a grid window, with lower and upper
/// companions bracketing the grid error.
#[derive(Debug, Clone)]
pub struct FieldRearrangement<T> {
    /// Built from cell-centre values.
    pub profile: MonotoneProfile<T>,
    /// Built from the smallest `|V|` among centre and corners.
    pub lower: MonotoneProfile<T>,
    /// Built from the largest `|V|` among centre and corners.
    pub upper: MonotoneProfile<T>,
    pub valid_above: T,
    pub cells: usize,
    pub cells_across_delta: usize,
    pub warning: Option<String>,
}

impl<T: Real> FieldRearrangement<T> {
    /// Grid tolerance at `t`.
    pub fn res_tol(&self, t: T) -> T {
        let c = self.profile.eval(t);
        (self.upper.eval(t) - c).max(c - self.lower.eval(t))
    }
}

/// `|V|^*` over the window of `spec`, from cylindrical cells of measure
/// `ω_{n-2}/(n-1) (ρ_hi^{n-1} - ρ_lo^{n-1}) Δx_1`.
pub fn field_rearrangement<T: Real>(field: &AxisymmetricField<T>, spec: &GridSpec<T>) -> Result<FieldRearrangement<T>> {
    let n = field.geom.n;
    let xs = spec.x1_nodes();
    let rs = spec.rho_nodes();
    if xs.len() < 2 || rs.len() < 2 {
        return Err(domain!("empty grid"));
    }
    let nf = T::of_usize(n as usize);
    let weight = sphere_measure::<T>(n - 1) / (nf - T::one()) * if spec.mirror { lit(2.0) } else { T::one() };
    let pw: Vec<T> = rs.iter().map(|&r| r.powf(nf - T::one())).collect();
    let nodes: Vec<T> = xs.iter().flat_map(|&x| rs.iter().map(move |&r| (x, r))).map(|(x, r)| field.eval(x, r)).collect();
    let nr = rs.len();
    let cells = (xs.len() - 1) * (nr - 1);
    let mut centre = Vec::with_capacity(cells);
    let mut lower = Vec::with_capacity(cells);
    let mut upper = Vec::with_capacity(cells);
    for i in 0..xs.len() - 1 {
        let dx = xs[i + 1] - xs[i];
        let xc = (xs[i] + xs[i + 1]) / lit(2.0);
        for j in 0..nr - 1 {
            let measure = weight * (pw[j + 1] - pw[j]) * dx;
            let rc = (rs[j] + rs[j + 1]) / lit(2.0);
            let c = field.eval(xc, rc);
            let vals = [c, nodes[i * nr + j], nodes[i * nr + j + 1], nodes[(i + 1) * nr + j], nodes[(i + 1) * nr + j + 1]];
            let mut lo = vals[0].abs();
            let mut hi = vals[0].abs();
            let mut pos = false;
            let mut neg = false;
            for &x in &vals {
                lo = lo.min(x.abs());
                hi = hi.max(x.abs());
                pos |= x > T::zero();
                neg |= x < T::zero();
            }
            if pos && neg {
                lo = T::zero();
            }
            centre.push(CellSample::new(c.abs(), measure));
            lower.push(CellSample::new(lo, measure));
            upper.push(CellSample::new(hi, measure));
        }
    }
    let across = (field.delta / spec.fine).floor().to_usize().unwrap_or(0);
    let mut warnings = vec![];
    if across < 32 {
        warnings.push(format!("only {across} cells across the bump radius"));
    }
    if xs.len() - 1 < spec.min_window_cells.min(64) || nr - 1 < spec.min_window_cells.min(64) {
        warnings.push(format!("window resolved by {}x{} cells", xs.len() - 1, nr - 1));
    }
    Ok(FieldRearrangement {
        profile: decreasing_rearrangement(&centre)?,
        lower: decreasing_rearrangement(&lower)?,
        upper: decreasing_rearrangement(&upper)?,
        valid_above: spec.valid_above,
        cells,
        cells_across_delta: across,
        warning: (!warnings.is_empty()).then(|| warnings.join("; ")),
    })
}

/// `u^*(t) / (N_V^*(t) l1)`.
pub fn sharpness_ratio<T: Real>(u_star: &MonotoneProfile<T>, n: u32, t: T, v_domain: T, l1: T) -> Result<T> {
    if !(l1 > T::zero()) {
        return Err(domain!("l1 must be positive"));
    }
    let k = green_rearranged(n, v_domain, t)?;
    if k == T::zero() {
        return Err(domain!("the kernel vanishes at t = {t:e}"));
    }
    Ok(u_star.eval(t) / (k * l1))
}

/// `u^*(t) / (N_∞^*(t) l1)`.
pub fn sharpness_ratio_infinite<T: Real>(u_star: &MonotoneProfile<T>, n: u32, t: T, l1: T) -> Result<T> {
    if !(l1 > T::zero()) {
        return Err(domain!("l1 must be positive"));
    }
    Ok(u_star.eval(t) / (green_rearranged_infinite(n, t)? * l1))
}

/// Which family a sweep row belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Family {
    Bump,
    Balanced,
    Translated,
}

impl Family {
    pub fn as_str(&self) -> &'static str {
        match self {
            Family::Bump => "bump",
            Family::Balanced => "balanced",
            Family::Translated => "translated",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "bump" => Some(Family::Bump),
            "balanced" => Some(Family::Balanced),
            "translated" => Some(Family::Translated),
            _ => None,
        }
    }
}

/// One evaluated member of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SharpnessRow<T = f64> {
    pub family: Family,
    pub n: u32,
    pub t: T,
    pub delta: T,
    pub epsilon: T,
    pub lambda: T,
    pub radius: T,
    pub l1: T,
    pub ratio: T,
    pub target: T,
    pub gap: T,
    pub res_tol: T,
}

/// Rows of a sweep plus run metadata.
#[derive(Debug, Clone, Default)]
pub struct SweepReport<T = f64> {
    pub suite: String,
    pub config_hash: u64,
    pub wall_time_secs: f64,
    pub rows: Vec<SharpnessRow<T>>,
    pub warnings: Vec<String>,
}

impl<T: Real> SweepReport<T> {
    /// Orders rows by family, dimension, then the sweep parameters.
    pub fn sort_rows(&mut self) {
        self.rows.sort_by(|a, b| {
            let key = |r: &SharpnessRow<T>| [r.radius, r.lambda, r.epsilon, r.delta, r.t];
            (a.family, a.n).cmp(&(b.family, b.n)).then_with(|| {
                key(a)
                    .iter()
                    .zip(key(b).iter())
                    .map(|(x, y)| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal))
                    .find(|o| o.is_ne())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
        });
    }

    pub fn max_gap(&self) -> T {
        self.rows.iter().map(|r| r.gap).fold(T::zero(), |a, b| a.max(b))
    }
}

/// Bump on its own ball at every `t` of `grid` inside `[|B_δ|, |B_R|)`.
pub fn sweep_bump<T: Real>(geom: &BallGeometry<T>, delta: T, grid: &[T]) -> Result<Vec<SharpnessRow<T>>> {
    let data = bump_data(geom, delta)?;
    let l1 = data.l1_norm()?;
    let u = rearrange_radial(&solve_radial(geom, &data)?)?;
    let t_lo = geom.volume_of(delta);
    let mut rows = vec![];
    for &t in grid.iter().filter(|&&t| t >= t_lo && t < geom.volume) {
        let ratio = sharpness_ratio(&u, geom.n, t, geom.volume, l1)?;
        rows.push(SharpnessRow {
            family: Family::Bump,
            n: geom.n,
            t,
            delta,
            epsilon: T::zero(),
            lambda: T::zero(),
            radius: geom.radius,
            l1,
            ratio,
            target: T::one(),
            gap: (T::one() - ratio).abs(),
            res_tol: T::zero(),
        });
    }
    Ok(rows)
}

/// Balanced family at fixed `t` along an `ε` schedule.
pub fn sweep_balanced<T: Real>(geom: &BallGeometry<T>, delta: T, t: T, eps: &[T]) -> Result<Vec<SharpnessRow<T>>> {
    let half = lit::<T>(0.5);
    let mut rows = vec![];
    for &e in eps {
        let data = balanced_data(geom, delta, e)?;
        let l1 = data.l1_norm()?;
        let u = rearrange_radial(&solve_radial(geom, &data)?)?;
        let ratio = sharpness_ratio(&u, geom.n, t, geom.volume, l1)?;
        rows.push(SharpnessRow {
            family: Family::Balanced,
            n: geom.n,
            t,
            delta,
            epsilon: e,
            lambda: T::zero(),
            radius: geom.radius,
            l1,
            ratio,
            target: half,
            gap: (half - ratio).abs(),
            res_tol: T::zero(),
        });
    }
    Ok(rows)
}

/// Translated pair in the whole space: fixed `δ_0`, `t_0 = 2|B_{δ_0}|`,
/// `λ = R^σ`, ratio against `N_∞^*(t_0)`.
pub fn translated_row<T: Real>(n: u32, delta: T, radius: T, sigma: T, cells_per_delta: usize) -> Result<(SharpnessRow<T>, Option<String>)> {
    let geom = BallGeometry::new(n, radius)?;
    let lambda = radius.powf(sigma);
    let field = translated_pair(&geom, delta, lambda)?;
    let l1 = field.laplacian_l1()?;
    let t = lit::<T>(2.0) * geom.volume_of(delta);
    let spec = GridSpec::pair(&field, cells_per_delta);
    let fr = field_rearrangement(&field, &spec)?;
    let value = fr.profile.eval(t);
    let mut warning = fr.warning.clone();
    if value <= fr.valid_above {
        warning = Some(format!("level {value:e} below the window bound {:e}", fr.valid_above));
    }
    let ratio = sharpness_ratio_infinite(&fr.profile, n, t, l1)?;
    let target = lit::<T>(2.0).powf(-lit::<T>(2.0) / T::of_usize(n as usize));
    let scale = green_rearranged_infinite(n, t)? * l1;
    Ok((
        SharpnessRow {
            family: Family::Translated,
            n,
            t,
            delta,
            epsilon: radius / lit(4.0),
            lambda,
            radius,
            l1,
            ratio,
            target,
            gap: (target - ratio).abs(),
            res_tol: fr.res_tol(t) / scale,
        },
        warning,
    ))
}
