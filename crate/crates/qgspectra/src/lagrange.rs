//! Lagrange inversion for implicit spectral equations `x = a + w*phi(x)`.
//!
//! The root is the explicit series
//!
//! ```text
//! x* = a + sum_{v>=1} (w^v / v!) * d^{v-1}/dx^{v-1} [phi^v](a),
//! ```
//!
//! whose terms are read off Taylor coefficients: the `(v-1)`-th derivative
//! of `phi^v` at `a` is `(v-1)!` times coefficient `v-1` of the truncated
//! power `phi^v`. High-order numeric differentiation is catastrophically
//! ill-conditioned, so coefficients come from closed-form series
//! composition instead.

use crate::error::{Error, Result};
use crate::num::{count, lit, to_f64, Real};

/// An analytic function that can report its value and the Taylor
/// coefficients of its expansion about a point.
pub trait Analytic<T> {
    fn value(&self, x: T) -> T;
    /// Coefficients `c_0..c_order` of `sum_j c_j (x - x0)^j`.
    fn taylor(&self, x0: T, order: usize) -> Vec<T>;
}

/// `phi(x) = sign * arcsin(r * sin(rho * x))`: the implicit form of the
/// two-bond spectral equation.
#[derive(Debug, Clone, Copy)]
pub struct ArcsinSine<T> {
    pub r: T,
    pub rho: T,
    pub sign: T,
}

impl<T: Real> Analytic<T> for ArcsinSine<T> {
    fn value(&self, x: T) -> T {
        self.sign * (self.r * (self.rho * x).sin()).asin()
    }

    fn taylor(&self, x0: T, order: usize) -> Vec<T> {
        // u = r * sin(rho x): u_j = r * rho^j / j! * sin(rho x0 + j pi/2).
        let mut u = Vec::with_capacity(order + 1);
        let mut factor = T::one();
        for j in 0..=order {
            if j > 0 {
                factor *= self.rho / count::<T>(j);
            }
            let phase = self.rho * x0 + T::frac_pi_2() * count::<T>(j);
            u.push(self.r * factor * phase.sin());
        }
        // g = arcsin(u) via g' = u' / sqrt(1 - u^2), integrated termwise.
        let one_minus_u2 = {
            let mut w = series_mul(&u, &u, order);
            for c in &mut w {
                *c = -*c;
            }
            w[0] += T::one();
            w
        };
        let inv_root = series_inv_sqrt(&one_minus_u2, order);
        let du = series_derivative(&u);
        let integrand = series_mul(&du, &inv_root, order.saturating_sub(1));
        let mut g = series_integrate(&integrand, u[0].asin());
        g.truncate(order + 1);
        for c in &mut g {
            *c *= self.sign;
        }
        g
    }
}

/// `phi(x) = cos(x)`; handy for classic Kepler-style test equations.
#[derive(Debug, Clone, Copy)]
pub struct Cosine;

impl<T: Real> Analytic<T> for Cosine {
    fn value(&self, x: T) -> T {
        x.cos()
    }

    fn taylor(&self, x0: T, order: usize) -> Vec<T> {
        let mut out = Vec::with_capacity(order + 1);
        let mut factor = T::one();
        for j in 0..=order {
            if j > 0 {
                factor /= count::<T>(j);
            }
            out.push(factor * (x0 + T::frac_pi_2() * count::<T>(j)).cos());
        }
        out
    }
}

/// Truncated product of two Taylor series.
pub fn series_mul<T: Real>(a: &[T], b: &[T], order: usize) -> Vec<T> {
    let mut out = vec![T::zero(); order + 1];
    for (i, &ai) in a.iter().enumerate().take(order + 1) {
        if ai == T::zero() {
            continue;
        }
        for (j, &bj) in b.iter().enumerate().take(order + 1 - i) {
            out[i + j] += ai * bj;
        }
    }
    out
}

/// Termwise derivative.
fn series_derivative<T: Real>(a: &[T]) -> Vec<T> {
    a.iter()
        .enumerate()
        .skip(1)
        .map(|(j, &c)| c * count::<T>(j))
        .collect()
}

/// Termwise antiderivative with constant term `c0`.
fn series_integrate<T: Real>(a: &[T], c0: T) -> Vec<T> {
    let mut out = Vec::with_capacity(a.len() + 1);
    out.push(c0);
    for (j, &c) in a.iter().enumerate() {
        out.push(c / count::<T>(j + 1));
    }
    out
}

/// `w^{-1/2}` by Newton iteration on series: `s <- s (3 - w s^2) / 2`.
fn series_inv_sqrt<T: Real>(w: &[T], order: usize) -> Vec<T> {
    let mut s = vec![T::zero(); order + 1];
    s[0] = T::one() / w[0].sqrt();
    let mut iters = 1usize;
    while (1 << iters) < order + 1 {
        iters += 1;
    }
    for _ in 0..=iters {
        let s2 = series_mul(&s, &s, order);
        let t = series_mul(w, &s2, order);
        let mut three_minus = t;
        for c in &mut three_minus {
            *c = -*c;
        }
        three_minus[0] += lit::<T>(3.0);
        s = series_mul(&s, &three_minus, order);
        for c in &mut s {
            *c /= lit::<T>(2.0);
        }
    }
    s
}

/// An implicit root problem `x = a + w * phi(x)`.
pub struct LagrangeProblem<'f, T> {
    pub a: T,
    pub w: T,
    pub phi: &'f dyn Analytic<T>,
    pub order: usize,
}

/// Half-width of the working interval used for validity sampling.
pub const VALIDITY_RADIUS: f64 = std::f64::consts::FRAC_PI_2;

/// Number of validity sample points.
pub const VALIDITY_SAMPLES: usize = 100;

/// Sample the root-isolation condition `|w * phi(x)| < |x - a|`.
///
/// The condition is a boundary (Rouche-type) bound, so samples are placed
/// on the outer ring `|x - a|` in `[R/2, R]` of the working interval;
/// sampling the real slice is necessary-only — it cannot certify analytic
/// validity, merely reject clear violations. (Uniform sampling across the
/// whole interval would spuriously reject every problem with
/// `phi(a) != 0`, since the right-hand side vanishes at `x = a`.)
pub fn validity_check<T: Real>(problem: &LagrangeProblem<'_, T>) -> Result<()> {
    let radius = lit::<T>(VALIDITY_RADIUS);
    let half = radius / lit(2.0);
    let n = VALIDITY_SAMPLES / 2;
    for side in [-T::one(), T::one()] {
        for i in 0..n {
            let offset = half + (radius - half) * count::<T>(i) / count::<T>(n - 1);
            let x = problem.a + side * offset;
            let lhs = (problem.w * problem.phi.value(x)).abs();
            if lhs >= offset {
                return Err(Error::LagrangeValidity { x: to_f64(x) });
            }
        }
    }
    Ok(())
}

/// Explicit root of `x = a + w*phi(x)` by Lagrange inversion, with the
/// partial sums after each order.
pub fn lagrange_root<T: Real>(problem: &LagrangeProblem<'_, T>) -> Result<(T, Vec<T>)> {
    validity_check(problem)?;
    let order = problem.order;
    let mut partials = Vec::with_capacity(order);
    let mut x = problem.a;
    if order == 0 {
        return Ok((x, partials));
    }
    let phi = problem.phi.taylor(problem.a, order.saturating_sub(1));
    // Running truncated power phi^v and w^v.
    let mut power = phi.clone();
    let mut w_pow = problem.w;
    for v in 1..=order {
        if v > 1 {
            power = series_mul(&power, &phi, order - 1);
            w_pow *= problem.w;
        }
        // (w^v / v!) d^{v-1}[phi^v](a) = w^v * coeff_{v-1}[phi^v] / v.
        x += w_pow * power[v - 1] / count::<T>(v);
        partials.push(x);
    }
    Ok((x, partials))
}

/// Root `x_n` of the two-bond spectral equation
/// `sin(S0 k) - r sin(S1 k) = 0` in the scaled variable `x = S0 * k`:
/// the `n`-th root solves `x = pi*n + (-1)^n arcsin(r sin(rho x))` with
/// `rho = S1/S0`.
pub fn two_bond_root<T: Real>(s0: T, s1: T, r: T, n: i64, order: usize) -> Result<T> {
    Ok(two_bond_partials(s0, s1, r, n, order)?.0)
}

/// [`two_bond_root`] with the order-by-order partial sums.
pub fn two_bond_partials<T: Real>(
    s0: T,
    s1: T,
    r: T,
    n: i64,
    order: usize,
) -> Result<(T, Vec<T>)> {
    if r.abs() >= T::one() {
        return Err(Error::ReflectionOutOfRange { r: to_f64(r) });
    }
    let rho = s1 / s0;
    if rho.abs() >= T::one() {
        return Err(Error::ConfigSchema {
            reason: "|S1/S0| must be below 1".into(),
        });
    }
    let sign = if n.rem_euclid(2) == 0 { T::one() } else { -T::one() };
    let phi = ArcsinSine { r, rho, sign };
    let problem = LagrangeProblem {
        a: T::pi() * crate::num::index::<T>(n),
        w: T::one(),
        phi: &phi,
        order,
    };
    lagrange_root(&problem)
}

/// Closed two-term fast path for the two-bond root:
///
/// ```text
/// x_n^(2) = pi n + arcsin(r sin(rho pi n)) *
///           { (-1)^n + r rho cos(rho pi n) / sqrt(1 - r^2 sin^2(rho pi n)) }
/// ```
pub fn two_bond_root_order2<T: Real>(s0: T, s1: T, r: T, n: i64) -> Result<T> {
    if r.abs() >= T::one() {
        return Err(Error::ReflectionOutOfRange { r: to_f64(r) });
    }
    let rho = s1 / s0;
    let a = T::pi() * crate::num::index::<T>(n);
    let sign = if n.rem_euclid(2) == 0 { T::one() } else { -T::one() };
    let s = (rho * a).sin();
    let c = (rho * a).cos();
    let asin = (r * s).asin();
    Ok(a + asin * (sign + r * rho * c / (T::one() - r * r * s * s).sqrt()))
}
