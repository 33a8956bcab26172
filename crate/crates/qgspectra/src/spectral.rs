//! Staircase and periodic-orbit spectral formulas.
//!
//! The counting function is evaluated in closed form from the eigenphases
//! of the unitary scattering matrix: the Fourier sums
//! `sum_l sin(l*sigma)/l` telescope to `(pi - sigma)/2` (mod 2pi), so
//!
//! ```text
//! N(k) = S0*k/pi - offset + sum_j (pi - sigma_j(k)) / (2*pi)
//! ```
//!
//! with `sigma_j` in `[0, 2pi)`. No phase tracking across `k` is needed
//! because only the mod-reduced sum enters. Individual roots then follow
//! either from the staircase integral over one separator cell, or from the
//! convergent orbit expansions around the cell midpoint; those series are
//! conditionally convergent and must be summed by symbolic length.

use nalgebra::{Complex, DMatrix};

use crate::bootstrap::{determine_mu, oracle_scan, SeparatorLevel};
use crate::detpoly::graph_trigpoly;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::num::{carg, count, fmod_pos, index, lit, to_f64, Real};
use crate::orbits::{enumerate_orbits, OrbitCatalog};
use crate::trigpoly::TrigPoly;

/// Staircase value at one momentum.
#[derive(Debug, Clone)]
pub struct StaircaseEval<T> {
    pub k: T,
    /// Exact counting function (integer away from roots, half-integers on
    /// them per the midpoint convention of the step function).
    pub n: T,
    /// Weyl average `S0*k/pi - offset`.
    pub nbar: T,
    /// Eigenphases of `S(k)` in `[0, 2pi)`.
    pub eigenphases: Vec<T>,
}

/// Eigenphases of the unitary matrix `S(k)`, each reduced to `[0, 2pi)`.
pub fn eigenphases_of<T: Real>(m: &DMatrix<Complex<T>>) -> Result<Vec<T>> {
    let dim = m.nrows();
    let eps = crate::num::machine_epsilon::<T>() * lit(16.0);
    let schur = m
        .clone()
        .try_schur(eps, 10_000)
        .ok_or(Error::EigenphaseFailure { dim })?;
    let eigs = schur
        .eigenvalues()
        .ok_or(Error::EigenphaseFailure { dim })?;
    Ok(eigs
        .iter()
        .map(|&z| fmod_pos(carg(z), T::two_pi()))
        .collect())
}

/// Eigenphases of `S(k)` for a graph.
pub fn eigenphases<T: Real>(graph: &Graph<T>, k: T) -> Result<Vec<T>> {
    eigenphases_of(&graph.s_matrix(k)?)
}

/// Reusable staircase evaluator: the constant offset is calibrated once so
/// that `N(0+) = 0`.
#[derive(Debug, Clone)]
pub struct Staircase<'g, T: Real> {
    graph: &'g Graph<T>,
    offset: T,
}

impl<'g, T: Real> Staircase<'g, T> {
    pub fn new(graph: &'g Graph<T>) -> Result<Self> {
        // Just above zero there are no eigenvalues yet; the raw value there
        // is exactly the constant `mu + 1 + g0` of the Weyl average.
        let probe = T::pi() / graph.s0() * lit(1e-6);
        let offset = Self::raw(graph, probe)?;
        Ok(Self { graph, offset })
    }

    /// `S0*k/pi + sum_j (pi - sigma_j)/(2*pi)`, before offset subtraction.
    fn raw(graph: &Graph<T>, k: T) -> Result<T> {
        let phases = eigenphases(graph, k)?;
        let fluct = phases
            .iter()
            .fold(T::zero(), |acc, &s| acc + (T::pi() - s) / T::two_pi());
        Ok(graph.s0() * k / T::pi() + fluct)
    }

    /// Calibrated offset (the `mu + 1 + g0` constant of the Weyl average).
    pub fn offset(&self) -> T {
        self.offset
    }

    /// Counting function `N(k)`.
    pub fn count(&self, k: T) -> Result<T> {
        Ok(Self::raw(self.graph, k)? - self.offset)
    }

    /// Full evaluation with the eigenphases attached.
    pub fn eval(&self, k: T) -> Result<StaircaseEval<T>> {
        let phases = eigenphases(self.graph, k)?;
        let fluct = phases
            .iter()
            .fold(T::zero(), |acc, &s| acc + (T::pi() - s) / T::two_pi());
        let nbar = self.graph.s0() * k / T::pi() - self.offset;
        Ok(StaircaseEval {
            k,
            n: nbar + fluct,
            nbar,
            eigenphases: phases,
        })
    }
}

/// One-shot staircase evaluation.
pub fn staircase<T: Real>(graph: &Graph<T>, k: T) -> Result<StaircaseEval<T>> {
    Staircase::new(graph)?.eval(k)
}

/// Root `k_n` from the staircase integral over its separator cell:
/// `k_n = n*hi - (n-1)*lo - int_lo^hi N(k) dk`.
///
/// `N` is integer-valued on the cell except for the single unit jump at the
/// root, so the integral is assembled exactly from the plateau values once
/// the jump is localized; plain midpoint panels only bracket the jump (its
/// O(h) error near a discontinuity cannot reach 1e-9 by doubling alone).
pub fn root_by_staircase_integral<T: Real>(graph: &Graph<T>, n: i64, cell: (T, T)) -> Result<T> {
    let stair = Staircase::new(graph)?;
    root_by_staircase_integral_with(&stair, n, cell)
}

/// [`root_by_staircase_integral`] against a prebuilt evaluator.
pub fn root_by_staircase_integral_with<T: Real>(
    stair: &Staircase<'_, T>,
    n: i64,
    cell: (T, T),
) -> Result<T> {
    let (lo, hi) = cell;
    let n_t = index::<T>(n);
    let n_lo = stair.count(lo)?;
    let n_hi = stair.count(hi)?;
    let check = |what: &str, got: T, want: T| -> Result<()> {
        if (got - want).abs() > lit(1e-6) {
            return Err(Error::QuadratureFailure {
                what: format!(
                    "staircase is not integer-calibrated at the {what} separator: N = {}, expected {}",
                    to_f64(got),
                    to_f64(want)
                ),
            });
        }
        Ok(())
    };
    check("lower", n_lo, n_t - T::one())?;
    check("upper", n_hi, n_t)?;

    // Locate the unit jump with a midpoint scan, then bisect inside the
    // bracketing panel.
    let panels = 64usize;
    let width = hi - lo;
    let step = width / count::<T>(panels);
    let threshold = n_t - lit(0.5);
    let mut bracket_lo = lo;
    let mut bracket_hi = hi;
    let mut prev = lo;
    for i in 1..=panels {
        let x = if i == panels { hi } else { lo + step * count::<T>(i) };
        let value = stair.count(x)?;
        if value >= threshold {
            bracket_lo = prev;
            bracket_hi = x;
            break;
        }
        prev = x;
    }
    for _ in 0..60 {
        let mid = (bracket_lo + bracket_hi) / lit(2.0);
        if mid <= bracket_lo || mid >= bracket_hi {
            break;
        }
        if stair.count(mid)? >= threshold {
            bracket_hi = mid;
        } else {
            bracket_lo = mid;
        }
    }
    let jump = (bracket_lo + bracket_hi) / lit(2.0);
    let integral = (n_t - T::one()) * (jump - lo) + n_t * (hi - jump);
    Ok(n_t * hi - (n_t - T::one()) * lo - integral)
}

/// Result of a truncated expansion with its per-length partial sums.
#[derive(Debug, Clone)]
pub struct ExpansionResult<T> {
    pub n: i64,
    pub estimate: T,
    pub l_max: usize,
    /// Estimate after including each symbolic length `l = 1..=l_max`.
    pub partials: Vec<T>,
}

/// The regular-graph reduced polynomial and separator offset, shared by
/// the expansion formulas.
fn regular_poly_and_mu<T: Real>(graph: &Graph<T>) -> Result<(TrigPoly<T>, i64)> {
    let poly = graph_trigpoly(graph)?.poly;
    let (m, _) = poly.irregularity_degree()?;
    if m != 0 {
        return Err(Error::ExpansionNeedsRegular { m });
    }
    let mu = determine_mu(&poly)?;
    Ok((poly, mu))
}

/// Midpoint of cell `n` between periodic separators:
/// `pi*(n + mu + 1/2 + g0)/S0`.
fn cell_center<T: Real>(poly: &TrigPoly<T>, mu: i64, n: i64) -> T {
    T::pi() * (index::<T>(n) + index::<T>(mu) + lit::<T>(0.5) + poly.gamma0()) / poly.s0()
}

/// Root estimate from the direct orbit expansion at symbolic-length cutoff
/// `l_max` (regular graphs):
///
/// ```text
/// k_n ~ kbar_n - (2/pi) Im sum_{l<=l_max} (1/l) sum_{m in P[l]}
///         A_m[l] e^{i L0 kbar_n} sin(pi L0/(2 S0)) / L0
/// ```
pub fn root_by_orbit_expansion<T: Real>(
    graph: &Graph<T>,
    n: i64,
    l_max: usize,
) -> Result<ExpansionResult<T>> {
    let catalog = enumerate_orbits(graph, l_max)?;
    root_by_orbit_expansion_with(graph, &catalog, n, l_max)
}

/// [`root_by_orbit_expansion`] against a prebuilt catalog.
pub fn root_by_orbit_expansion_with<T: Real>(
    graph: &Graph<T>,
    catalog: &OrbitCatalog<T>,
    n: i64,
    l_max: usize,
) -> Result<ExpansionResult<T>> {
    let (poly, mu) = regular_poly_and_mu(graph)?;
    let s0 = poly.s0();
    let kbar = cell_center(&poly, mu, n);
    let two_over_pi = lit::<T>(2.0) / T::pi();
    let mut acc = T::zero();
    let mut partials = Vec::with_capacity(l_max);
    for l in 1..=l_max {
        let mut sum_l = Complex::new(T::zero(), T::zero());
        for class in catalog.classes(l) {
            let phase = crate::num::unit_phasor(class.action * kbar);
            let osc = (T::pi() * class.action / (lit::<T>(2.0) * s0)).sin();
            sum_l += class.trace_weight() * phase * Complex::new(osc / class.action, T::zero());
        }
        acc += sum_l.im / count::<T>(l);
        partials.push(kbar - two_over_pi * acc);
    }
    Ok(ExpansionResult {
        n,
        estimate: *partials.last().unwrap_or(&kbar),
        l_max,
        partials,
    })
}

/// Root estimate resummed over prime orbits and repetitions,
///
/// ```text
/// k_n ~ kbar_n - (2/pi) Im sum_P (1/L0_P) sum_nu (1/nu^2)
///         A_P^nu e^{i nu L0_P kbar_n} sin(nu pi L0_P/(2 S0))
/// ```
///
/// still summed by symbolic length `nu * l_P`; a pure regrouping of the
/// direct expansion, so matched cutoffs agree to rounding.
pub fn root_by_prime_expansion<T: Real>(
    graph: &Graph<T>,
    n: i64,
    l_max: usize,
) -> Result<ExpansionResult<T>> {
    let catalog = enumerate_orbits(graph, l_max)?;
    root_by_prime_expansion_with(graph, &catalog, n, l_max)
}

/// [`root_by_prime_expansion`] against a prebuilt catalog.
pub fn root_by_prime_expansion_with<T: Real>(
    graph: &Graph<T>,
    catalog: &OrbitCatalog<T>,
    n: i64,
    l_max: usize,
) -> Result<ExpansionResult<T>> {
    let (poly, mu) = regular_poly_and_mu(graph)?;
    let s0 = poly.s0();
    let kbar = cell_center(&poly, mu, n);
    let two_over_pi = lit::<T>(2.0) / T::pi();
    let primes: Vec<_> = catalog.primes().collect();
    let mut acc = T::zero();
    let mut partials = Vec::with_capacity(l_max);
    for l in 1..=l_max {
        let mut sum_l = T::zero();
        for prime in &primes {
            if l % prime.l_prime != 0 {
                continue;
            }
            let nu = l / prime.l_prime;
            let mut a_pow = Complex::new(T::one(), T::zero());
            for _ in 0..nu {
                a_pow *= prime.prime_amplitude;
            }
            let action = prime.prime_action * count::<T>(nu);
            let phase = crate::num::unit_phasor(action * kbar);
            let osc = (T::pi() * action / (lit::<T>(2.0) * s0)).sin();
            let nu_t = count::<T>(nu);
            sum_l += (a_pow * phase).im * osc / (nu_t * nu_t * prime.prime_action);
        }
        acc += sum_l;
        partials.push(kbar - two_over_pi * acc);
    }
    Ok(ExpansionResult {
        n,
        estimate: *partials.last().unwrap_or(&kbar),
        l_max,
        partials,
    })
}

/// Individual energy level from the three-term prime-orbit expansion
/// (valid for regular graphs whose separators sit at half-integer offsets,
/// `g0 = 1/2`, with real orbit amplitudes):
///
/// ```text
/// E_n = (pi^2/S0^2)(n^2 + 1/12)
///     - (4 pi n/S0^2) Im sum_{P,nu} A_P^nu/(w_P nu^2) sin(w_P nu/2) e^{i n w_P nu}
///     - (4 pi/S0^2)  Re sum_{P,nu} A_P^nu/(nu^3 w_P^2)
///         [sin(w_P nu/2) - (w_P nu/2) cos(w_P nu/2)] e^{i n w_P nu}
/// ```
///
/// with `w_P = pi * L0_P / S0`, summed by symbolic length `nu * l_P`.
pub fn regular_energy_expansion<T: Real>(
    graph: &Graph<T>,
    n: i64,
    cutoff: usize,
) -> Result<ExpansionResult<T>> {
    let catalog = enumerate_orbits(graph, cutoff)?;
    regular_energy_expansion_with(graph, &catalog, n, cutoff)
}

/// [`regular_energy_expansion`] against a prebuilt catalog.
pub fn regular_energy_expansion_with<T: Real>(
    graph: &Graph<T>,
    catalog: &OrbitCatalog<T>,
    n: i64,
    cutoff: usize,
) -> Result<ExpansionResult<T>> {
    let (poly, mu) = regular_poly_and_mu(graph)?;
    let s0 = poly.s0();
    let half = lit::<T>(0.5);
    // Half-integer separator offset: n + mu + 1 + g0 = n + 1/2 needs
    // g0 = 1/2 (the integer part is absorbed in the index).
    if crate::num::cyclic_distance(poly.gamma0(), half, T::one()) > lit(1e-9) {
        return Err(Error::AssumptionViolated {
            which: format!(
                "separator offset: gamma0 = {} but the energy expansion needs 1/2",
                to_f64(poly.gamma0())
            ),
        });
    }
    // Empirical check on the same assumption: the mean fractional position
    // of the first 50 roots inside their cells must sit near 1/2.
    let spacing = poly.mean_spacing();
    let roots = oracle_scan(&poly, spacing * lit(1e-9), spacing * lit(52.5), 256);
    if roots.len() >= 50 {
        let mut mean = T::zero();
        for (i, &r) in roots.iter().take(50).enumerate() {
            let low = T::pi() * (index::<T>(i as i64) + poly.gamma0() + index::<T>(mu) + T::one()) / s0;
            mean += (r - low) / spacing;
        }
        mean /= lit(50.0);
        if (mean - half).abs() > lit(0.05) {
            return Err(Error::AssumptionViolated {
                which: format!(
                    "empirical cell offset {} differs from 1/2 by more than 0.05",
                    to_f64(mean)
                ),
            });
        }
    }
    for prime in catalog.primes() {
        if prime.prime_amplitude.im.abs() > lit(1e-12) {
            return Err(Error::AssumptionViolated {
                which: "orbit amplitudes must be real".into(),
            });
        }
    }

    let pi = T::pi();
    let s0_sq = s0 * s0;
    let lead = pi * pi / s0_sq * (index::<T>(n) * index::<T>(n) + T::one() / lit(12.0));
    let n_t = index::<T>(n);
    let mut sum1 = T::zero();
    let mut sum2 = T::zero();
    let mut partials = Vec::with_capacity(cutoff);
    let primes: Vec<_> = catalog.primes().collect();
    for l in 1..=cutoff {
        for prime in &primes {
            if l % prime.l_prime != 0 {
                continue;
            }
            let nu = l / prime.l_prime;
            let nu_t = count::<T>(nu);
            let omega = pi * prime.prime_action / s0;
            let mut a_pow = T::one();
            for _ in 0..nu {
                a_pow *= prime.prime_amplitude.re;
            }
            let half_arg = omega * nu_t / lit(2.0);
            let rot = crate::num::unit_phasor(n_t * omega * nu_t);
            sum1 += a_pow / (omega * nu_t * nu_t) * half_arg.sin() * rot.im;
            sum2 += a_pow / (nu_t * nu_t * nu_t * omega * omega)
                * (half_arg.sin() - half_arg * half_arg.cos())
                * rot.re;
        }
        let four_pi = lit::<T>(4.0) * pi;
        partials.push(lead - four_pi * n_t / s0_sq * sum1 - four_pi / s0_sq * sum2);
    }
    Ok(ExpansionResult {
        n,
        estimate: *partials.last().unwrap_or(&lead),
        l_max: cutoff,
        partials,
    })
}

/// Evaluate `f(k_n)` directly from the staircase identity
///
/// ```text
/// f(k_n) = n f(khat_n) - (n-1) f(khat_{n-1})
///        - int f'(k) Nbar(k) dk
///        - (1/pi) Im sum_l (1/l) sum_m A_m[l] G_n(L0_m),
/// G_n(x) = int_cell f'(k) e^{i x k} dk
/// ```
///
/// for any differentiable `f` (regular graphs). With `f = id` this reduces
/// term by term to the direct orbit expansion.
pub fn function_of_root<T: Real>(
    graph: &Graph<T>,
    n: i64,
    f: &dyn Fn(T) -> T,
    f_prime: &dyn Fn(T) -> T,
    l_max: usize,
) -> Result<T> {
    let catalog = enumerate_orbits(graph, l_max)?;
    let (poly, mu) = regular_poly_and_mu(graph)?;
    let s0 = poly.s0();
    let lo = T::pi() * (index::<T>(n - 1) + poly.gamma0() + index::<T>(mu) + T::one()) / s0;
    let hi = lo + poly.mean_spacing();
    let n_t = index::<T>(n);

    // Weyl part: int f'(k) * (S0 k/pi - (mu + 1 + g0)) dk.
    let offset = index::<T>(mu) + T::one() + poly.gamma0();
    let nbar_term = quadrature(
        &|k| f_prime(k) * (s0 * k / T::pi() - offset),
        lo,
        hi,
        lit(1e-11),
    )?;

    let mut orbit_term = T::zero();
    for l in 1..=l_max {
        let mut sum_l = T::zero();
        for class in catalog.classes(l) {
            let action = class.action;
            let g_re = quadrature(&|k| f_prime(k) * (action * k).cos(), lo, hi, lit(1e-11))?;
            let g_im = quadrature(&|k| f_prime(k) * (action * k).sin(), lo, hi, lit(1e-11))?;
            let g = Complex::new(g_re, g_im);
            sum_l += (class.trace_weight() * g).im;
        }
        orbit_term += sum_l / count::<T>(l);
    }
    Ok(n_t * f(hi) - (n_t - T::one()) * f(lo) - nbar_term - orbit_term / T::pi())
}

/// Composite Simpson quadrature with doubling until the change drops below
/// `tol` (relative to the accumulated magnitude).
fn quadrature<T: Real>(g: &dyn Fn(T) -> T, lo: T, hi: T, tol: T) -> Result<T> {
    let mut panels = 64usize;
    let mut prev = simpson(g, lo, hi, panels);
    loop {
        panels *= 2;
        let next = simpson(g, lo, hi, panels);
        if (next - prev).abs() <= tol * (T::one() + next.abs()) {
            return Ok(next);
        }
        if panels > (1 << 22) {
            return Err(Error::QuadratureFailure {
                what: format!("Simpson refinement stalled at {panels} panels"),
            });
        }
        prev = next;
    }
}

fn simpson<T: Real>(g: &dyn Fn(T) -> T, lo: T, hi: T, panels: usize) -> T {
    let h = (hi - lo) / count::<T>(panels);
    let mut acc = g(lo) + g(hi);
    for i in 1..panels {
        let x = lo + h * count::<T>(i);
        let w = if i % 2 == 1 { lit::<T>(4.0) } else { lit::<T>(2.0) };
        acc += w * g(x);
    }
    acc * h / lit(3.0)
}

/// Trailing-window means of an error sequence; used to assert decrease of
/// conditionally convergent partial sums.
pub fn trailing_mean<T: Real>(errors: &[T], window: usize) -> Vec<T> {
    errors
        .windows(window)
        .map(|w| w.iter().fold(T::zero(), |a, &b| a + b) / count::<T>(window))
        .collect()
}

/// Separator cell `(khat_{n-1}, khat_n)` looked up from a separator level.
pub fn cell_of<T: Real>(level: &SeparatorLevel<T>, n: i64) -> Option<(T, T)> {
    let i = usize::try_from(n - 1 - level.first_index).ok()?;
    let lo = *level.positions.get(i)?;
    let hi = *level.positions.get(i + 1)?;
    Some((lo, hi))
}
