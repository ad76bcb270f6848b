//! Closed forms for the Dirichlet Green kernel of a ball with pole at the
//! centre, its decreasing rearrangement and the quantities derived from it.
//!
//! With `p = (n-2)/n` and `K = c_n (ω_{n-1}/n)^p = 1/α_n` the rearranged
//! kernel is `K (t^{-p} - V^{-p})` for `n ≥ 3` and `ln(V/t)/(4π)` for
//! `n = 2`. Differences of powers are evaluated through `expm1` so values
//! stay accurate right up to the boundary `t = V`.

use crate::error::{domain, Error, Result};
use crate::scalar::{lit, Real};
use crate::special::gamma;

/// Surface measure `ω_{n-1} = 2π^{n/2}/Γ(n/2)` of the unit sphere in `R^n`.
pub fn sphere_measure<T: Real>(n: u32) -> T {
    let half_n = T::of_usize(n as usize) / lit(2.0);
    lit::<T>(2.0) * T::PI().powf(half_n) / gamma(half_n)
}

fn check_dim(n: u32) -> Result<()> {
    if n < 2 {
        return Err(domain!("dimension must be at least 2, got {n}"));
    }
    Ok(())
}

/// Exponent `(n-2)/n` of the kernel power law.
pub fn kernel_exponent<T: Real>(n: u32) -> T {
    T::of_usize(n as usize - 2) / T::of_usize(n as usize)
}

/// The constant in front of the rearranged kernel: `1/(4π)` for `n = 2`,
/// `c_n (ω_{n-1}/n)^{(n-2)/n}` otherwise.
pub fn kernel_constant<T: Real>(n: u32) -> T {
    if n == 2 {
        return T::one() / (lit::<T>(4.0) * T::PI());
    }
    T::one() / alpha(n)
}

/// `α_n = (n-2) n^{(n-2)/n} ω_{n-1}^{2/n}` for `n ≥ 3`.
pub fn alpha<T: Real>(n: u32) -> T {
    let nf = T::of_usize(n as usize);
    let omega: T = sphere_measure(n);
    (nf - lit(2.0)) * nf.powf(kernel_exponent(n)) * omega.powf(lit::<T>(2.0) / nf)
}

/// Ball `B(0, R)` in `R^n` together with its derived constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BallGeometry<T = f64> {
    pub n: u32,
    pub radius: T,
    pub volume: T,
    pub omega: T,
}

impl<T: Real> BallGeometry<T> {
    pub fn new(n: u32, radius: T) -> Result<Self> {
        check_dim(n)?;
        if !(radius > T::zero()) || !radius.is_finite() {
            return Err(domain!("radius must be positive and finite, got {radius:e}"));
        }
        let omega = sphere_measure(n);
        let volume = omega * radius.powi(n as i32) / T::of_usize(n as usize);
        Ok(Self {
            n,
            radius,
            volume,
            omega,
        })
    }

    /// Ball of prescribed volume.
    pub fn with_volume(n: u32, volume: T) -> Result<Self> {
        check_dim(n)?;
        if !(volume > T::zero()) || !volume.is_finite() {
            return Err(domain!("volume must be positive and finite, got {volume:e}"));
        }
        let omega: T = sphere_measure(n);
        let radius = (T::of_usize(n as usize) * volume / omega).powf(T::one() / T::of_usize(n as usize));
        Ok(Self {
            n,
            radius,
            volume,
            omega,
        })
    }

    pub fn dim(&self) -> T {
        T::of_usize(self.n as usize)
    }

    /// `c_n = 1/((n-2) ω_{n-1})`; undefined for `n = 2`.
    pub fn c_n(&self) -> Option<T> {
        (self.n >= 3).then(|| T::one() / ((self.dim() - lit(2.0)) * self.omega))
    }

    pub fn alpha_n(&self) -> Option<T> {
        (self.n >= 3).then(|| alpha(self.n))
    }

    /// Volume of the concentric ball of radius `r`.
    pub fn volume_of(&self, r: T) -> T {
        self.omega * r.powi(self.n as i32) / self.dim()
    }

    /// Radius of the concentric ball of volume `t`.
    pub fn radius_of(&self, t: T) -> T {
        (self.dim() * t / self.omega).powf(T::one() / self.dim())
    }

    /// Same dimension, different radius.
    pub fn rescaled(&self, radius: T) -> Result<Self> {
        Self::new(self.n, radius)
    }

    /// `N_{B_R}(r)`; `+∞` at the pole.
    pub fn green_radial(&self, r: T) -> Result<T> {
        if r < T::zero() || r > self.radius * (T::one() + T::epsilon() * lit(4.0)) || r.is_nan() {
            return Err(domain!("radius {r:e} outside (0, {:e}]", self.radius));
        }
        Ok(self.green_unchecked(r.min(self.radius)))
    }

    pub(crate) fn green_unchecked(&self, r: T) -> T {
        if r == T::zero() {
            return T::infinity();
        }
        let log_ratio = (r / self.radius).ln();
        if self.n == 2 {
            return -log_ratio / T::TAU();
        }
        let c = T::one() / ((self.dim() - lit(2.0)) * self.omega);
        let k = lit::<T>(2.0) - self.dim();
        c * self.radius.powf(k) * (k * log_ratio).exp_m1()
    }

    /// `dN/dr = -r^{1-n}/ω_{n-1}` for every `n ≥ 2`.
    pub fn green_derivative(&self, r: T) -> T {
        -r.powf(T::one() - self.dim()) / self.omega
    }

    /// `N_V^*(t)` for the volume of this ball.
    pub fn green_rearranged(&self, t: T) -> Result<T> {
        green_rearranged(self.n, self.volume, t)
    }

    pub fn green_maximal(&self, t: T) -> Result<T> {
        green_maximal(self.n, self.volume, t)
    }

    pub fn green_distribution(&self, s: T) -> Result<T> {
        green_distribution(self.n, self.volume, s)
    }

    /// `∫_{B_r} N_{B_R}(|y|) dy` closed form antiderivative in the radius:
    /// returns `G(r) = ω ∫_0^r N(ρ) ρ^{n-1} dρ`.
    pub(crate) fn green_moment(&self, r: T) -> T {
        if r == T::zero() {
            return T::zero();
        }
        let nf = self.dim();
        let r2 = r * r;
        if self.n == 2 {
            // (1/2π) ∫ ln(R/ρ) ρ dρ = (1/2π)(r²/2 ln(R/r) + r²/4), times 2π
            return r2 / lit(2.0) * (self.radius / r).ln() + r2 / lit(4.0);
        }
        // ω c [ρ²/2 - R^{2-n} ρ^n/n]
        let c = T::one() / ((nf - lit(2.0)) * self.omega);
        let ratio_pow = (r / self.radius).powf(nf - lit(2.0));
        self.omega * c * r2 * (T::one() / lit(2.0) - ratio_pow / nf)
    }
}

fn check_measure<T: Real>(v: T, t: T) -> Result<()> {
    if !(v > T::zero()) {
        return Err(domain!("volume must be positive, got {v:e}"));
    }
    if !(t > T::zero()) || t > v * (T::one() + T::epsilon() * lit(4.0)) {
        return Err(domain!("measure {t:e} outside (0, {v:e}]"));
    }
    Ok(())
}

/// `N_V^*(t)`, the decreasing rearrangement of the Green kernel of the ball
/// of volume `V`.
pub fn green_rearranged<T: Real>(n: u32, v: T, t: T) -> Result<T> {
    check_dim(n)?;
    check_measure(v, t)?;
    Ok(green_rearranged_unchecked(n, v, t.min(v)))
}

pub(crate) fn green_rearranged_unchecked<T: Real>(n: u32, v: T, t: T) -> T {
    let log_ratio = (t / v).ln();
    if n == 2 {
        return -log_ratio / (lit::<T>(4.0) * T::PI());
    }
    let p: T = kernel_exponent(n);
    kernel_constant::<T>(n) * v.powf(-p) * (-p * log_ratio).exp_m1()
}

/// `N_∞^*(t) = K t^{-(n-2)/n}`, only for `n ≥ 3`.
pub fn green_rearranged_infinite<T: Real>(n: u32, t: T) -> Result<T> {
    check_dim(n)?;
    if n == 2 {
        return Err(Error::Unsupported(
            "the planar kernel has no infinite-volume limit".into(),
        ));
    }
    if !(t > T::zero()) {
        return Err(domain!("measure must be positive, got {t:e}"));
    }
    Ok(kernel_constant::<T>(n) * t.powf(-kernel_exponent::<T>(n)))
}

/// `N_V^{**}(t) = (1/t) ∫_0^t N_V^*`, in closed form.
pub fn green_maximal<T: Real>(n: u32, v: T, t: T) -> Result<T> {
    check_dim(n)?;
    check_measure(v, t)?;
    let t = t.min(v);
    if n == 2 {
        return Ok((T::one() + (v / t).ln()) / (lit::<T>(4.0) * T::PI()));
    }
    let p: T = kernel_exponent(n);
    let half_n = T::of_usize(n as usize) / lit(2.0);
    Ok(kernel_constant::<T>(n) * (half_n * t.powf(-p) - v.powf(-p)))
}

/// `λ_V(s) = |{t : N_V^*(t) > s}|`.
pub fn green_distribution<T: Real>(n: u32, v: T, s: T) -> Result<T> {
    check_dim(n)?;
    if !(s >= T::zero()) {
        return Err(domain!("level must be non-negative, got {s:e}"));
    }
    if !(v >= T::zero()) {
        return Err(domain!("volume must be non-negative, got {v:e}"));
    }
    if v == T::zero() {
        return Ok(T::zero());
    }
    if n == 2 {
        return Ok(v * (-lit::<T>(4.0) * T::PI() * s).exp());
    }
    let p: T = kernel_exponent(n);
    let inner = alpha::<T>(n) * s + v.powf(-p);
    Ok(inner.powf(-T::one() / p).min(v))
}

/// `λ_{V_1}(s) + λ_{V - V_1}(s)`: the combined distribution bound for a
/// function whose positive and negative parts live on sets of measure `V_1`
/// and `V - V_1`.
pub fn split_distribution_sum<T: Real>(n: u32, v: T, s: T, v1: T) -> Result<T> {
    if !(v1 >= T::zero()) || v1 > v {
        return Err(domain!("split measure {v1:e} outside [0, {v:e}]"));
    }
    Ok(green_distribution(n, v1, s)? + green_distribution(n, (v - v1).max(T::zero()), s)?)
}

/// The maximum over the split of [`split_distribution_sum`], attained at
/// `V_1 = V/2`: `V e^{-4πs}` for `n = 2`, `(2^{-p} α_n s + V^{-p})^{-1/p}`
/// otherwise.
pub fn split_distribution_bound<T: Real>(n: u32, v: T, s: T) -> Result<T> {
    check_dim(n)?;
    if !(s >= T::zero()) {
        return Err(domain!("level must be non-negative, got {s:e}"));
    }
    if n == 2 {
        return Ok(v * (-lit::<T>(4.0) * T::PI() * s).exp());
    }
    let p: T = kernel_exponent(n);
    let two = lit::<T>(2.0);
    Ok((two.powf(-p) * alpha::<T>(n) * s + v.powf(-p)).powf(-T::one() / p))
}

/// Value `m · e^{s}` kept in split form so that kernel values at
/// astronomically small measures (`t = V e^{-ℓ}` with `ℓ` in the millions)
/// can still be compared.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scaled<T> {
    pub mantissa: T,
    pub log_scale: T,
}

impl<T: Real> Scaled<T> {
    pub fn plain(x: T) -> Self {
        Self {
            mantissa: x,
            log_scale: T::zero(),
        }
    }

    pub fn value(&self) -> T {
        self.mantissa * self.log_scale.exp()
    }

    /// `self / other` evaluated without forming either value.
    pub fn ratio(&self, other: &Self) -> T {
        (self.mantissa / other.mantissa) * (self.log_scale - other.log_scale).exp()
    }
}

/// `N_V^*(V e^{-ℓ})` in scaled form.
pub fn green_rearranged_scaled<T: Real>(n: u32, v: T, ell: T) -> Scaled<T> {
    if n == 2 {
        return Scaled::plain(ell / (lit::<T>(4.0) * T::PI()));
    }
    let p: T = kernel_exponent(n);
    Scaled {
        mantissa: kernel_constant::<T>(n) * v.powf(-p) * (-(-p * ell).exp_m1()),
        log_scale: p * ell,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::{E, PI};

    #[test]
    fn sphere_measures_are_rational_multiples_of_pi_powers() {
        assert_relative_eq!(sphere_measure::<f64>(2), 2.0 * PI, max_relative = 1e-14);
        assert_relative_eq!(sphere_measure::<f64>(3), 4.0 * PI, max_relative = 1e-14);
        assert_relative_eq!(sphere_measure::<f64>(4), 2.0 * PI * PI, max_relative = 1e-14);
        assert_relative_eq!(sphere_measure::<f64>(5), 8.0 * PI * PI / 3.0, max_relative = 1e-14);
        assert_relative_eq!(sphere_measure::<f64>(6), PI * PI * PI, max_relative = 1e-14);
    }

    #[test]
    fn geometry_volume_radius_roundtrip() {
        let g = BallGeometry::new(3, 2.0f64).unwrap();
        assert_relative_eq!(g.volume, 4.0 / 3.0 * PI * 8.0, max_relative = 1e-14);
        assert_relative_eq!(g.radius_of(g.volume_of(0.7)), 0.7, max_relative = 1e-14);
        let h = BallGeometry::with_volume(4, g.volume).unwrap();
        assert_relative_eq!(h.volume_of(h.radius), g.volume, max_relative = 1e-14);
        assert!(BallGeometry::new(1, 1.0f64).is_err());
        assert!(BallGeometry::new(3, -1.0f64).is_err());
    }

    #[test]
    fn green_radial_examples() {
        let g2 = BallGeometry::new(2, 1.0f64).unwrap();
        assert_eq!(g2.green_radial(1.0).unwrap(), 0.0);
        let g3 = BallGeometry::new(3, 1.0f64).unwrap();
        assert_relative_eq!(g3.green_radial(0.5).unwrap(), 1.0 / (4.0 * PI), max_relative = 1e-14);
        let ge = BallGeometry::new(2, E).unwrap();
        assert_relative_eq!(ge.green_radial(1.0).unwrap(), 1.0 / (2.0 * PI), max_relative = 1e-14);
        assert!(g3.green_radial(0.0).unwrap().is_infinite());
        assert!(g3.green_radial(1.5).is_err());
    }

    #[test]
    fn green_radial_strictly_decreasing_and_vanishing_at_boundary() {
        for n in 2..=5 {
            let g = BallGeometry::new(n, 1.3f64).unwrap();
            let mut prev = f64::INFINITY;
            for i in 1..=200 {
                let r = 1.3 * i as f64 / 200.0;
                let v = g.green_radial(r).unwrap();
                assert!(v < prev && v >= 0.0);
                prev = v;
            }
            assert_eq!(prev, 0.0);
        }
    }

    #[test]
    fn rearranged_kernel_examples() {
        assert_eq!(green_rearranged(2, 3.0f64, 3.0).unwrap(), 0.0);
        assert_relative_eq!(
            green_rearranged(2, 1.0f64, (-4.0 * PI).exp()).unwrap(),
            1.0,
            max_relative = 1e-14
        );
        for n in 2..=5 {
            let g = BallGeometry::new(n, 2.0f64).unwrap();
            for &r in &[0.01, 0.3, 1.0, 1.9] {
                assert_relative_eq!(
                    g.green_rearranged(g.volume_of(r)).unwrap(),
                    g.green_radial(r).unwrap(),
                    max_relative = 1e-12
                );
            }
        }
        assert!(green_rearranged(3, 1.0f64, 0.0).is_err());
        assert!(green_rearranged(3, 1.0f64, 1.5).is_err());
    }

    #[test]
    fn infinite_volume_kernel() {
        let omega = 4.0 * PI;
        let c3 = 1.0 / omega;
        let t = 0.37f64;
        assert_relative_eq!(
            green_rearranged_infinite(3, t).unwrap(),
            c3 * (omega / 3.0).powf(1.0 / 3.0) * t.powf(-1.0 / 3.0),
            max_relative = 1e-14
        );
        // unit ball volume gives c_3
        assert_relative_eq!(
            green_rearranged_infinite(3, omega / 3.0).unwrap(),
            1.0 / (4.0 * PI),
            max_relative = 1e-14
        );
        assert!(green_rearranged_infinite(2, 1.0f64).is_err());
        // the finite-volume kernel differs by a t-independent constant
        let v = 5.0f64;
        let shift = -c3 * (omega / 3.0).powf(1.0 / 3.0) * v.powf(-1.0 / 3.0);
        for &t in &[1e-6, 0.1, 2.0, 4.9] {
            let d = green_rearranged(3, v, t).unwrap() - green_rearranged_infinite(3, t).unwrap();
            assert_relative_eq!(d, shift, max_relative = 1e-9);
        }
    }

    #[test]
    fn finite_volume_increases_to_infinite_limit() {
        for n in 3..=5 {
            let t = 0.5f64;
            let inf = green_rearranged_infinite(n, t).unwrap();
            let mut prev = 0.0;
            for k in 0..12 {
                let v = 1.0 * 10f64.powi(k);
                let x = green_rearranged(n, v, t).unwrap();
                assert!(x > prev && x < inf);
                prev = x;
            }
            assert_relative_eq!(prev, inf, max_relative = 1e-3);
        }
    }

    #[test]
    fn maximal_kernel_closed_forms() {
        assert_relative_eq!(green_maximal(2, 2.5f64, 2.5).unwrap(), 1.0 / (4.0 * PI), max_relative = 1e-15);
        let v = 1.0f64;
        let t = 1e-8 * v;
        let ratio = green_maximal(3, v, t).unwrap() / green_rearranged(3, v, t).unwrap();
        assert!((ratio - 1.5).abs() < 1e-2);
    }

    #[test]
    fn distribution_examples_and_inversion() {
        assert_eq!(green_distribution(2, 2.0f64, 0.0).unwrap(), 2.0);
        assert_relative_eq!(
            green_distribution(2, 1.0f64, 1.0 / (4.0 * PI)).unwrap(),
            (-1.0f64).exp(),
            max_relative = 1e-14
        );
        for n in 2..=6 {
            let v = 3.0f64;
            assert_relative_eq!(green_distribution(n, v, 0.0).unwrap(), v, max_relative = 1e-15);
            for &s in &[0.1, 1.0, 10.0] {
                let lam = green_distribution(n, v, s).unwrap();
                assert!(lam > 0.0 && lam < v);
                assert_relative_eq!(green_rearranged(n, v, lam).unwrap(), s, max_relative = 1e-12);
            }
        }
        assert!(green_distribution(3, 1.0f64, -1.0).is_err());
    }

    #[test]
    fn alpha_uses_the_lower_sphere_measure() {
        // the inversion identity pins α_n; a variant built on ω_n fails it
        let n = 3;
        let v = 1.0f64;
        let s = 1.0;
        let wrong_alpha = 1.0 * 3f64.powf(1.0 / 3.0) * sphere_measure::<f64>(4).powf(2.0 / 3.0);
        let wrong = (wrong_alpha * s + v.powf(-1.0 / 3.0)).powf(-3.0);
        assert!((green_rearranged(n, v, wrong).unwrap() - s).abs() > 1e-3);
    }

    #[test]
    fn split_sum_examples() {
        let v = 1.0f64;
        for &v1 in &[0.0, 0.2, 0.5, 0.9] {
            assert_relative_eq!(
                split_distribution_sum(2, v, 0.3, v1).unwrap(),
                v * (-4.0 * PI * 0.3f64).exp(),
                max_relative = 1e-14
            );
        }
        let half = split_distribution_sum(3, 1.0f64, 1.0, 0.5).unwrap();
        assert!(half >= split_distribution_sum(3, 1.0f64, 1.0, 0.3).unwrap());
        assert_relative_eq!(half, split_distribution_bound(3, 1.0f64, 1.0).unwrap(), max_relative = 1e-13);
        assert!(split_distribution_sum(3, 1.0f64, 1.0, 1.5).is_err());
    }

    #[test]
    fn split_bound_matches_normalised_display() {
        // with ||Δu||_1 = L and argument s' = 2s/L the bound reads
        // (2^{2/n} α s / L + V^{-p})^{-1/p}
        for n in 3..=5u32 {
            let (v, s, l1) = (2.0f64, 0.7, 1.3);
            let p = (n as f64 - 2.0) / n as f64;
            let display = (2f64.powf(2.0 / n as f64) * alpha::<f64>(n) * s / l1 + v.powf(-p)).powf(-1.0 / p);
            assert_relative_eq!(
                split_distribution_bound(n, v, 2.0 * s / l1).unwrap(),
                display,
                max_relative = 1e-13
            );
        }
    }

    #[test]
    fn scaled_kernel_matches_direct_evaluation() {
        for n in 2..=4 {
            let v = 1.7f64;
            for &ell in &[0.5f64, 3.0, 20.0] {
                let t = v * (-ell).exp();
                let direct = green_rearranged(n, v, t).unwrap();
                assert_relative_eq!(green_rearranged_scaled(n, v, ell).value(), direct, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn single_precision_kernel() {
        let g = BallGeometry::new(3, 1.0f32).unwrap();
        assert!((g.green_radial(0.5).unwrap() - 0.079_577_47).abs() < 1e-6);
    }
}
