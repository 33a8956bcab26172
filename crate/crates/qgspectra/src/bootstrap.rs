//! Separator hierarchy: every root of the reduced polynomial from the
//! regular level down.
//!
//! For a regular polynomial (`alpha < 1`) the roots are separated by the
//! periodic points `k_n = (pi/S0)(n + g0 + mu + 1)`, one root per cell.
//! An irregular polynomial of degree `m` is handled by differentiating `m`
//! times: the level-`m` equation is regular, its roots are the extrema of
//! level `m-1` and hence separate the level-`(m-1)` roots, and so on down
//! to level 0. Zeros and extrema of these almost-periodic determinants
//! interlace with no extra wiggles, so each descent step solves exactly one
//! bracketed root per cell; the per-cell density integrals this replaces
//! are equivalent by the one-root-per-cell property.

use rayon::prelude::*;

use crate::error::{Error, Result};
pub use crate::num::machine_epsilon;
use crate::num::{count, index, lit, to_f64, Real};
use crate::trigpoly::TrigPoly;

/// Endpoint values below this are treated as degenerate roots (separator
/// and root coincide); such roots are flagged, not failed.
pub const DEGENERACY_TOL: f64 = 1e-11;

/// Minimum oracle sampling density (samples per mean spacing).
pub const MIN_ORACLE_SAMPLES: usize = 100;

/// Roots below this fraction of a mean spacing are not counted as positive.
const POSITIVE_EPS_REL: f64 = 1e-9;

/// Root-finding method tags carried in results and CSV output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Bootstrap,
    Oracle,
    FixedPoint,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Method::Bootstrap => write!(f, "bootstrap"),
            Method::Oracle => write!(f, "oracle"),
            Method::FixedPoint => write!(f, "fixed-point"),
        }
    }
}

/// One level of the separator hierarchy.
#[derive(Debug, Clone)]
pub struct SeparatorLevel<T> {
    /// Derivative order of the polynomial whose roots these points separate.
    pub level: u32,
    /// Integer offset of the periodic top level (shared by all levels).
    pub mu: i64,
    /// Chain index of the first separator (top level: the periodic index).
    pub first_index: i64,
    /// Strictly increasing separator positions.
    pub positions: Vec<T>,
}

/// One computed root with its metadata.
#[derive(Debug, Clone, Copy)]
pub struct RootRecord<T> {
    /// Physical index: `n = 1` is the smallest positive root.
    pub n: u64,
    /// Momentum eigenvalue.
    pub k: T,
    /// `|D(k)|` at the returned root.
    pub residual: T,
    /// Root coincided with a separator (within [`DEGENERACY_TOL`]).
    pub degenerate: bool,
    /// Bracketing cell at level 0.
    pub cell: (T, T),
}

/// The full hierarchy from the regular level down, plus the indexed roots.
#[derive(Debug, Clone)]
pub struct SeparatorHierarchy<T> {
    /// Irregularity degree of the level-0 polynomial.
    pub m: u32,
    /// A-priori bound on `m`.
    pub m_bound: u32,
    /// Periodic offset at the regular level.
    pub mu: i64,
    /// Levels from `m` down to `0`.
    pub levels: Vec<SeparatorLevel<T>>,
    /// Roots covering the requested index range.
    pub roots: Vec<RootRecord<T>>,
}

/// A solved spectrum slice with provenance.
#[derive(Debug, Clone)]
pub struct SpectrumResult<T> {
    pub roots: Vec<RootRecord<T>>,
    pub method: Method,
    pub level_m: u32,
    pub s0: T,
    pub gamma0: T,
    pub mu: i64,
}

/// Position of the periodic separator with index `n` for a regular-level
/// polynomial: `(pi/S0)(n + g0_eff + mu + 1)`.
fn periodic_separator<T: Real>(p: &TrigPoly<T>, mu: i64, n: i64) -> T {
    (T::pi() / p.s0()) * (index::<T>(n) + p.gamma0_effective() + index::<T>(mu) + T::one())
}

/// Determine the integer offset `mu` so that the first positive root falls
/// into cell 1: `k_1 < separator(1) < k_2`.
///
/// The offset is pinned by an oracle scan of the first few mean spacings.
pub fn determine_mu<T: Real>(p: &TrigPoly<T>) -> Result<i64> {
    let alpha = p.characteristic_sum();
    if alpha >= T::one() {
        return Err(Error::NotRegular { alpha: to_f64(alpha) });
    }
    let spacing = p.mean_spacing();
    let mut hi = spacing * lit(3.0);
    let k1 = loop {
        let roots = oracle_scan(p, spacing * lit(POSITIVE_EPS_REL), hi, 256);
        if let Some(&k1) = roots.first() {
            break k1;
        }
        hi += spacing * lit(3.0);
        if hi > spacing * lit(40.0) {
            // A regular polynomial has one root per spacing; unreachable.
            return Err(Error::WindowExhausted);
        }
    };
    // x(k) = S0*k - pi*g0_eff lies in (pi*(1 + mu), pi*(2 + mu)) for cell 1.
    let x1 = (p.s0() * k1 - T::pi() * p.gamma0_effective()) / T::pi();
    Ok(to_f64(x1.floor()) as i64 - 1)
}

/// Periodic separators of a regular polynomial for cells `n_lo..=n_hi`
/// (the separator list spans indices `n_lo - 1 ..= n_hi` so every requested
/// cell is bracketed).
pub fn regular_separators<T: Real>(
    p: &TrigPoly<T>,
    n_lo: i64,
    n_hi: i64,
) -> Result<SeparatorLevel<T>> {
    if n_hi < n_lo {
        return Err(Error::BadRange { lo: n_lo, hi: n_hi });
    }
    let mu = determine_mu(p)?;
    let positions = ((n_lo - 1)..=n_hi)
        .map(|n| periodic_separator(p, mu, n))
        .collect();
    Ok(SeparatorLevel {
        level: p.level(),
        mu,
        first_index: n_lo - 1,
        positions,
    })
}

/// Solve the single root of `p` inside `[lo, hi]`.
///
/// Contract: exactly one sign change on the cell (guaranteed for separator
/// cells by interlacing). Endpoints with `|p| <` [`DEGENERACY_TOL`] are
/// returned as degenerate roots. Bisection narrows the bracket, then a
/// bracket-safeguarded Newton step (the derivative is exact: `S0` times the
/// next level) polishes to machine accuracy.
pub fn root_in_cell<T: Real>(p: &TrigPoly<T>, lo: T, hi: T) -> Result<RootSolve<T>> {
    root_in_cell_tagged(p, lo, hi, 0, 0)
}

/// Root value, residual, and degeneracy flag from one cell solve.
#[derive(Debug, Clone, Copy)]
pub struct RootSolve<T> {
    pub k: T,
    pub residual: T,
    pub degenerate: bool,
}

fn root_in_cell_tagged<T: Real>(
    p: &TrigPoly<T>,
    lo: T,
    hi: T,
    level: u32,
    cell: i64,
) -> Result<RootSolve<T>> {
    let degen = lit::<T>(DEGENERACY_TOL);
    let f_lo = p.eval(lo);
    let f_hi = p.eval(hi);
    // Zero-width cells arise between coinciding degenerate separators.
    if hi - lo <= T::zero() {
        return Ok(RootSolve { k: lo, residual: f_lo.abs(), degenerate: true });
    }
    if f_lo.abs() < degen || f_hi.abs() < degen {
        // Separator and root coincide; no further computation is needed.
        let (k, residual) = if f_lo.abs() <= f_hi.abs() {
            (lo, f_lo.abs())
        } else {
            (hi, f_hi.abs())
        };
        return Ok(RootSolve { k, residual, degenerate: true });
    }
    if (f_lo > T::zero()) == (f_hi > T::zero()) {
        return Err(Error::CellContract {
            level,
            cell,
            lo: to_f64(lo),
            hi: to_f64(hi),
            f_lo: to_f64(f_lo),
            f_hi: to_f64(f_hi),
        });
    }
    Ok(refine_bracketed(p, lo, hi, f_lo))
}

/// Bisection + Newton run to its machine fixed point inside a
/// sign-changing bracket.
fn refine_bracketed<T: Real>(p: &TrigPoly<T>, mut lo: T, mut hi: T, mut f_lo: T) -> RootSolve<T> {
    let two = lit::<T>(2.0);
    let lo_positive = f_lo > T::zero();
    let (cell_lo, cell_hi) = (lo, hi);

    // Bisection to ~1e-8 of the cell width: well inside the Newton basin.
    for _ in 0..28 {
        let mid = (lo + hi) / two;
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = p.eval(mid);
        if f_mid == T::zero() {
            return RootSolve { k: mid, residual: T::zero(), degenerate: false };
        }
        if (f_mid > T::zero()) == lo_positive {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    let _ = f_lo;
    // Bound the Newton tail by the original cell: the root may sit within
    // one float of the shrunken bracket's edge.
    let (k, residual) = newton_limit(p, (lo + hi) / two, cell_lo, cell_hi);
    RootSolve { k, residual, degenerate: false }
}

/// Newton iteration driven to its floating-point fixed point, then
/// canonicalized to the minimum-residual float in a few-ulp window.
///
/// Rounding noise in the trig evaluations opens a small well around the
/// true root in which Newton stalls wherever it entered; scanning the well
/// and picking the deterministic minimum (ties toward smaller `k`) makes
/// every solver that reaches the same basin report the identical machine
/// root.
fn newton_limit<T: Real>(p: &TrigPoly<T>, mut x: T, lo: T, hi: T) -> (T, T) {
    let mut prev = x;
    for _ in 0..40 {
        let (f, df) = p.eval_with_derivative(x);
        if f == T::zero() || df == T::zero() {
            break;
        }
        let next = x - f / df;
        if next <= lo || next >= hi || next == x || next == prev {
            break;
        }
        prev = x;
        x = next;
    }
    let eps = machine_epsilon::<T>();
    // One unit in the last place of x: eps * 2^floor(log2 |x|).
    let step = if x == T::zero() {
        p.mean_spacing() * eps
    } else {
        eps * x.abs().log2().floor().exp2()
    };
    let mut best_x = x;
    let mut best_f = p.eval(x).abs();
    for j in -8i32..=8 {
        if j == 0 {
            continue;
        }
        let c = x + step * lit::<T>(f64::from(j));
        if c <= lo || c >= hi {
            continue;
        }
        let f = p.eval(c).abs();
        if f < best_f || (f == best_f && c < best_x) {
            best_x = c;
            best_f = f;
        }
    }
    (best_x, best_f)
}

/// Contraction fixed-point solver for the root of a regular polynomial in
/// cell `n` (with offset `mu` as produced by [`determine_mu`]).
///
/// In the scaled variable `x = S0*k - pi*g0_eff`, the cell is
/// `(c*pi, (c+1)*pi)` with `c = n + mu`; writing `x = c*pi + xi` the root
/// solves `xi = arccos((-1)^c * Phi(x))`, a contraction with derivative
/// magnitude below one whenever `alpha < 1`, so iteration from `xi = pi/2`
/// converges to the unique fixed point.
pub fn fixed_point_root_with_mu<T: Real>(p: &TrigPoly<T>, n: i64, mu: i64) -> Result<T> {
    let alpha = p.characteristic_sum();
    if alpha >= T::one() {
        return Err(Error::NotRegular { alpha: to_f64(alpha) });
    }
    let pi = T::pi();
    let c = n + mu;
    let odd = c.rem_euclid(2) != 0;
    let x_base = pi * index::<T>(c);
    let to_k = |x: T| (x + pi * p.gamma0_effective()) / p.s0();
    let eps = machine_epsilon::<T>();
    // Trigonometric evaluations at argument x carry ~x*eps absolute error,
    // so far cells cannot reach 1e-14 displacements; the floor scales with
    // the cell position.
    let x_scale = x_base.abs() + pi;
    let tol = lit::<T>(1e-14).max(eps * lit(4.0) * x_scale);
    // |h'| <= alpha, so pi * alpha^n < tol needs ~34/(1 - alpha) steps;
    // rounding can also plateau the displacement above the tolerance,
    // which counts as converged once it stops improving near the floor.
    let max_iters = 64 + (40.0 / (1.0 - to_f64(alpha))).ceil() as usize;
    let mut xi = pi / lit(2.0);
    let mut best = lit::<T>(f64::MAX);
    let mut stalled = 0usize;
    let mut converged = false;
    for _ in 0..max_iters {
        let phi = p.phi(to_k(x_base + xi));
        let signed = if odd { -phi } else { phi };
        // |Phi| <= alpha < 1; the clamp only absorbs rounding.
        let clamped = signed.min(T::one()).max(-T::one());
        let next = clamped.acos();
        let delta = (next - xi).abs();
        xi = next;
        if delta < tol {
            converged = true;
            break;
        }
        if delta < best {
            best = delta;
            stalled = 0;
        } else {
            stalled += 1;
            if stalled >= 3 && best < eps * lit(256.0) * x_scale {
                converged = true;
                break;
            }
        }
    }
    if !converged {
        return Err(Error::FixedPointDiverged { max_iters, alpha: to_f64(alpha) });
    }
    // The fixed point is the cell root; running Newton to its stationary
    // float removes the contraction-rate tail and lands on the same
    // machine root as the bracketed cell solver.
    let (cell_lo, cell_hi) = (to_k(x_base), to_k(x_base + pi));
    let (k, _residual) = newton_limit(p, to_k(x_base + xi), cell_lo, cell_hi);
    Ok(k)
}

/// [`fixed_point_root_with_mu`] with the offset determined internally.
pub fn fixed_point_root<T: Real>(p: &TrigPoly<T>, n: i64) -> Result<T> {
    let mu = determine_mu(p)?;
    fixed_point_root_with_mu(p, n, mu)
}

/// Brute-force reference: scan `[k_lo, k_hi]` on a uniform grid of at least
/// [`MIN_ORACLE_SAMPLES`] points per mean spacing and refine every sign
/// change. Ground truth for every other method; misses nothing as long as
/// neighboring roots are farther apart than one grid step.
pub fn oracle_scan<T: Real>(
    p: &TrigPoly<T>,
    k_lo: T,
    k_hi: T,
    samples_per_mean_spacing: usize,
) -> Vec<T> {
    if k_hi <= k_lo {
        return Vec::new();
    }
    let samples = samples_per_mean_spacing.max(MIN_ORACLE_SAMPLES);
    let step = p.mean_spacing() / count::<T>(samples);
    let n_steps = to_f64(((k_hi - k_lo) / step).ceil()) as usize;
    // Evaluate the grid in parallel chunks, then refine sign changes.
    let values: Vec<T> = (0..=n_steps)
        .into_par_iter()
        .map(|i| p.eval(k_lo + step * count::<T>(i)))
        .collect();
    let mut roots = Vec::new();
    for i in 0..n_steps {
        let x0 = k_lo + step * count::<T>(i);
        let x1 = (k_lo + step * count::<T>(i + 1)).min(k_hi);
        let (f0, f1) = (values[i], values[i + 1]);
        if f0 == T::zero() {
            if i == 0 {
                roots.push(x0);
            }
            continue;
        }
        if f1 == T::zero() {
            roots.push(x1);
            continue;
        }
        if (f0 > T::zero()) != (f1 > T::zero()) {
            let solve = refine_bracketed(p, x0, x1, f0);
            roots.push(solve.k);
        }
    }
    roots
}

/// Double the oracle sampling until the root count stabilizes; used when a
/// configuration may hide close root pairs.
pub fn oracle_scan_adaptive<T: Real>(
    p: &TrigPoly<T>,
    k_lo: T,
    k_hi: T,
    samples_per_mean_spacing: usize,
) -> Vec<T> {
    let mut samples = samples_per_mean_spacing.max(MIN_ORACLE_SAMPLES);
    let mut roots = oracle_scan(p, k_lo, k_hi, samples);
    for _ in 0..3 {
        samples *= 2;
        let denser = oracle_scan(p, k_lo, k_hi, samples);
        if denser.len() == roots.len() {
            return denser;
        }
        roots = denser;
    }
    roots
}

/// Build the separator hierarchy of `p` (level 0) and extract the roots
/// with physical indices in `n_lo..=n_hi` (`n = 1` is the first positive
/// root).
///
/// The hierarchy is computed on an index window padded by `m + 2` cells on
/// each side; if interlacing erosion eats into the requested window (it can,
/// for extreme parameter corners) the padding is doubled and the descent
/// repeated.
pub fn descend_hierarchy<T: Real>(
    p: &TrigPoly<T>,
    n_lo: i64,
    n_hi: i64,
) -> Result<SeparatorHierarchy<T>> {
    if n_lo < 1 || n_hi < n_lo {
        return Err(Error::BadRange { lo: n_lo, hi: n_hi });
    }
    let (m, m_bound) = p.irregularity_degree()?;
    let polys: Vec<TrigPoly<T>> = (0..=m).map(|l| p.differentiate(l)).collect();
    let top = &polys[m as usize];
    let mu = determine_mu(top)?;

    let mut pad = (m as i64) + 2;
    for _attempt in 0..6 {
        match try_descend(&polys, m, mu, n_hi, pad)? {
            Some(mut hierarchy) => {
                hierarchy.m_bound = m_bound;
                hierarchy
                    .roots
                    .retain(|r| (r.n as i64) >= n_lo && (r.n as i64) <= n_hi);
                return Ok(hierarchy);
            }
            None => pad *= 2,
        }
    }
    Err(Error::WindowExhausted)
}

/// One descent attempt at a fixed padding. Returns `None` when the level-0
/// window fails to bracket all requested roots.
fn try_descend<T: Real>(
    polys: &[TrigPoly<T>],
    m: u32,
    mu: i64,
    n_hi: i64,
    pad: i64,
) -> Result<Option<SeparatorHierarchy<T>>> {
    let top = &polys[m as usize];
    let spacing = top.mean_spacing();
    let pos_eps = spacing * lit(POSITIVE_EPS_REL);

    // Top-level index window: start below -pad spacings, end above
    // (n_hi + pad) spacings.
    let x_of = |j: i64| to_f64(periodic_separator(top, mu, j));
    let lo_target = -to_f64(spacing) * pad as f64;
    let hi_target = to_f64(spacing) * (n_hi + pad) as f64;
    let mut j_lo = 0i64;
    while x_of(j_lo) > lo_target {
        j_lo -= 1;
    }
    let mut j_hi = n_hi;
    while x_of(j_hi) < hi_target {
        j_hi += 1;
    }

    let mut levels: Vec<SeparatorLevel<T>> = Vec::with_capacity(m as usize + 1);
    let mut positions: Vec<T> = (j_lo..=j_hi)
        .map(|j| periodic_separator(top, mu, j))
        .collect();
    let mut first_index = j_lo;
    levels.push(SeparatorLevel {
        level: m,
        mu,
        first_index,
        positions: positions.clone(),
    });

    // Descend: the roots of level l inside the level-l cells are the
    // separators of level l-1.
    for l in (0..m).rev() {
        let q = &polys[(l + 1) as usize];
        let solved: Result<Vec<RootSolve<T>>> = positions
            .par_windows(2)
            .enumerate()
            .map(|(i, w)| root_in_cell_tagged(q, w[0], w[1], l + 1, first_index + 1 + i as i64))
            .collect();
        let solved = solved?;
        positions = solved.iter().map(|s| s.k).collect();
        first_index += 1;
        levels.push(SeparatorLevel {
            level: l,
            mu,
            first_index,
            positions: positions.clone(),
        });
    }

    // The level-0 window must start at or below zero, otherwise positive
    // roots may be missing below the first separator.
    if positions.first().map(|&s| s > pos_eps).unwrap_or(true) {
        return Ok(None);
    }

    let base = &polys[0];
    let cells: Result<Vec<RootSolve<T>>> = positions
        .par_windows(2)
        .enumerate()
        .map(|(i, w)| root_in_cell_tagged(base, w[0], w[1], 0, first_index + 1 + i as i64))
        .collect();
    let cells = cells?;

    let mut roots = Vec::new();
    let mut n = 0u64;
    for (i, solve) in cells.iter().enumerate() {
        if solve.k <= pos_eps {
            continue;
        }
        n += 1;
        roots.push(RootRecord {
            n,
            k: solve.k,
            residual: solve.residual,
            degenerate: solve.degenerate,
            cell: (positions[i], positions[i + 1]),
        });
    }
    if (roots.len() as i64) < n_hi {
        return Ok(None);
    }
    Ok(Some(SeparatorHierarchy {
        m,
        m_bound: 0,
        mu,
        levels,
        roots,
    }))
}

/// Solve roots `n_lo..=n_hi` with the selected method.
pub fn solve_range<T: Real>(
    p: &TrigPoly<T>,
    n_lo: i64,
    n_hi: i64,
    method: Method,
) -> Result<SpectrumResult<T>> {
    if n_lo < 1 || n_hi < n_lo {
        return Err(Error::BadRange { lo: n_lo, hi: n_hi });
    }
    let (m, _) = p.irregularity_degree()?;
    let roots = match method {
        Method::Bootstrap => descend_hierarchy(p, n_lo, n_hi)?.roots,
        Method::Oracle => {
            let spacing = p.mean_spacing();
            let pos_eps = spacing * lit(POSITIVE_EPS_REL);
            let mut hi = spacing * count::<T>((n_hi + (m as i64) + 4) as usize);
            let mut found = loop {
                let found = oracle_scan_adaptive(p, pos_eps, hi, 256);
                if found.len() >= n_hi as usize {
                    break found;
                }
                hi += spacing * count::<T>((m as usize + 4).max(8));
            };
            found.truncate(n_hi as usize);
            found
                .iter()
                .enumerate()
                .filter(|&(i, _)| (i as i64) + 1 >= n_lo)
                .map(|(i, &k)| RootRecord {
                    n: (i + 1) as u64,
                    k,
                    residual: p.eval(k).abs(),
                    degenerate: false,
                    cell: (k, k),
                })
                .collect()
        }
        Method::FixedPoint => {
            let mu = determine_mu(p)?;
            let sep = |n: i64| periodic_separator(p, mu, n);
            (n_lo..=n_hi)
                .map(|n| {
                    fixed_point_root_with_mu(p, n, mu).map(|k| RootRecord {
                        n: n as u64,
                        k,
                        residual: p.eval(k).abs(),
                        degenerate: false,
                        cell: (sep(n - 1), sep(n)),
                    })
                })
                .collect::<Result<Vec<_>>>()?
        }
    };
    Ok(SpectrumResult {
        roots,
        method,
        level_m: m,
        s0: p.s0(),
        gamma0: p.gamma0(),
        mu: determine_mu(&p.differentiate(m)).unwrap_or(0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families;
    use crate::trigpoly::TrigTerm;

    fn bench_poly() -> TrigPoly<f64> {
        families::reference_two_bond_poly()
    }

    #[test]
    fn cos_root_on_half_cell() {
        // cos(x) on [0, pi] -> pi/2.
        let p = TrigPoly::<f64>::new(1.0, 0.0, vec![]).unwrap();
        let s = root_in_cell(&p, 0.0, std::f64::consts::PI).unwrap();
        assert!((s.k - std::f64::consts::FRAC_PI_2).abs() < 1e-14);
        assert!(!s.degenerate);
    }

    #[test]
    fn empty_phi_separators_and_midpoint_roots() {
        let p = TrigPoly::<f64>::new(std::f64::consts::PI, 0.5, vec![]).unwrap();
        let lev = regular_separators(&p, 1, 8).unwrap();
        // Spacing pi/S0 = 1, constant to 1e-14.
        for w in lev.positions.windows(2) {
            assert!((w[1] - w[0] - 1.0).abs() < 1e-14);
        }
        // Roots at cell midpoints.
        let mu = lev.mu;
        for n in 1..=8 {
            let k = fixed_point_root_with_mu(&p, n, mu).unwrap();
            let lo = lev.positions[(n - 1) as usize];
            let hi = lev.positions[n as usize];
            assert!((k - 0.5 * (lo + hi)).abs() < 1e-13);
        }
    }

    #[test]
    fn benchmark_first_root() {
        let p = bench_poly();
        let x1 = 3.26507;
        // |D| is small at the quoted root.
        assert!(p.eval(x1 / p.s0()).abs() < 1e-4);
        let h = descend_hierarchy(&p, 1, 3).unwrap();
        assert_eq!(h.m, 0);
        let got = h.roots[0].k * p.s0();
        assert!((got - x1).abs() < 1e-4, "got {got}");
    }

    #[test]
    fn benchmark_separator_spacing() {
        let p = bench_poly();
        let lev = regular_separators(&p, 1, 20).unwrap();
        let expect = std::f64::consts::PI / p.s0();
        for w in lev.positions.windows(2) {
            assert!((w[1] - w[0] - expect).abs() < 1e-13);
        }
    }

    #[test]
    fn fixed_point_matches_cell_root() {
        let p = bench_poly();
        let lev = regular_separators(&p, 1, 100).unwrap();
        for n in 1..=100usize {
            let fp = fixed_point_root_with_mu(&p, n as i64, lev.mu).unwrap();
            let rc = root_in_cell(&p, lev.positions[n - 1], lev.positions[n]).unwrap();
            assert!((fp - rc.k).abs() < 1e-12, "n = {n}: {fp} vs {}", rc.k);
        }
    }

    #[test]
    fn oracle_finds_simple_sine_roots() {
        // sin(S0 k) on (0.1, 3.5*pi/S0): roots at pi/S0, 2pi/S0, 3pi/S0.
        let s0 = 0.77;
        let p = TrigPoly::<f64>::new(s0, 0.5, vec![]).unwrap();
        let roots = oracle_scan(&p, 0.1, 3.5 * std::f64::consts::PI / s0, 128);
        assert_eq!(roots.len(), 3);
        for (i, &r) in roots.iter().enumerate() {
            let expect = (i + 1) as f64 * std::f64::consts::PI / s0;
            assert!((r - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn oracle_benchmark_root_100() {
        let p = bench_poly();
        let roots = oracle_scan(&p, 1e-9, 400.0 / p.s0(), 256);
        assert!(roots.len() >= 100);
        assert!((roots[99] * p.s0() - 313.98697).abs() < 1e-4);
    }

    #[test]
    fn oracle_self_consistent_under_doubling() {
        let p: TrigPoly<f64> = families::four_vertex_chain_poly([0.1, 0.8565, 0.0435], 0.98, 0.98).unwrap();
        let hi = 50.0 * p.mean_spacing();
        let a = oracle_scan(&p, 1e-9, hi, 1000);
        let b = oracle_scan(&p, 1e-9, hi, 2000);
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn hierarchy_collapses_to_regular_scheme_for_m0() {
        let p = bench_poly();
        let h = descend_hierarchy(&p, 1, 50).unwrap();
        assert_eq!(h.m, 0);
        assert_eq!(h.levels.len(), 1);
        let direct = oracle_scan(&p, 1e-9, 52.0 * p.mean_spacing(), 256);
        for r in &h.roots {
            let o = direct[(r.n - 1) as usize];
            assert!((r.k - o).abs() < 1e-10);
        }
    }

    #[test]
    fn hierarchy_matches_oracle_for_m2() {
        let p: TrigPoly<f64> = families::four_vertex_chain_poly([0.2, 0.6565, 0.1435], 0.95, 0.95).unwrap();
        let (m, _) = p.irregularity_degree().unwrap();
        assert_eq!(m, 2);
        let h = descend_hierarchy(&p, 1, 200).unwrap();
        let oracle = oracle_scan(&p, 1e-12, h.roots.last().unwrap().k + 0.5, 1000);
        assert!(oracle.len() >= 200);
        for r in &h.roots {
            let o = oracle[(r.n - 1) as usize];
            assert!((r.k - o).abs() < 1e-10, "n = {}: {} vs {o}", r.n, r.k);
        }
    }

    #[test]
    fn interlacing_between_levels() {
        // Between consecutive level-l roots lies exactly one level-(l-1) root.
        let p: TrigPoly<f64> = families::four_vertex_chain_poly([0.2, 0.6565, 0.1435], 0.95, 0.95).unwrap();
        let h = descend_hierarchy(&p, 1, 60).unwrap();
        for pair in h.levels.windows(2) {
            let upper = &pair[0].positions;
            let lower = &pair[1].positions;
            for (i, w) in upper.windows(2).enumerate() {
                assert!(lower[i] > w[0] - 1e-12 && lower[i] < w[1] + 1e-12);
            }
        }
    }

    #[test]
    fn sign_alternates_at_regular_level_separators() {
        let p: TrigPoly<f64> = families::four_vertex_chain_poly([0.2, 0.6565, 0.1435], 0.95, 0.95).unwrap();
        let (m, _) = p.irregularity_degree().unwrap();
        let top = p.differentiate(m);
        let h = descend_hierarchy(&p, 1, 40).unwrap();
        let level_m = &h.levels[0];
        let mut sign = 0.0;
        for (i, &pos) in level_m.positions.iter().enumerate() {
            let v = top.eval(pos);
            assert!(v.abs() > 1e-3, "regular-level separator value too small");
            if i == 0 {
                sign = v.signum();
            } else {
                assert_eq!(v.signum(), sign * if i % 2 == 0 { 1.0 } else { -1.0 });
            }
        }
    }

    #[test]
    fn degenerate_cell_is_flagged_not_failed() {
        // Force a root exactly at a cell endpoint.
        let p = TrigPoly::<f64>::new(1.0, 0.5, vec![]).unwrap();
        // sin(k): root at pi; pass a cell ending exactly there.
        let s = root_in_cell(&p, std::f64::consts::PI - 0.5, std::f64::consts::PI).unwrap();
        assert!(s.degenerate);
        assert!((s.k - std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn contract_violation_is_reported() {
        let p = TrigPoly::<f64>::new(1.0, 0.5, vec![]).unwrap();
        // sin(k) on (0.2, 0.4): no sign change, no degeneracy.
        match root_in_cell(&p, 0.2, 0.4) {
            Err(Error::CellContract { .. }) => {}
            other => panic!("expected contract violation, got {other:?}"),
        }
    }

    #[test]
    fn perturbing_a_degenerate_configuration_splits_the_root() {
        // r2 = r3 = 1 decouples the chain; with these actions the reduced
        // form is sin(k) + sin(0.6k) = 2 sin(0.8k) cos(0.2k), which has
        // exact double roots at k = 2.5*pi*(2j+1). Nudging one reflection
        // splits them into close simple pairs.
        let acts = [0.2, 0.4, 0.4];
        let exact: TrigPoly<f64> = families::four_vertex_chain_poly(acts, 1.0, 1.0).unwrap();
        let h = descend_hierarchy(&exact, 1, 12).unwrap();
        assert!(h.roots.iter().any(|r| r.degenerate));
        let nudged = families::four_vertex_chain_poly(acts, 1.0 - 1e-8, 1.0).unwrap();
        let h2 = descend_hierarchy(&nudged, 1, 12).unwrap();
        assert_eq!(h.roots.len(), h2.roots.len());
        for (a, b) in h.roots.iter().zip(&h2.roots) {
            assert!((a.k - b.k).abs() < 1e-3);
        }
        assert!(h2.roots.iter().all(|r| !r.degenerate || r.residual < 1e-11));
    }

    #[test]
    fn solve_range_methods_agree() {
        let p = bench_poly();
        let a = solve_range(&p, 1, 40, Method::Bootstrap).unwrap();
        let b = solve_range(&p, 1, 40, Method::Oracle).unwrap();
        let c = solve_range(&p, 1, 40, Method::FixedPoint).unwrap();
        assert_eq!(a.roots.len(), 40);
        assert_eq!(b.roots.len(), 40);
        assert_eq!(c.roots.len(), 40);
        for ((x, y), z) in a.roots.iter().zip(&b.roots).zip(&c.roots) {
            assert!((x.k - y.k).abs() < 1e-10);
            assert!((x.k - z.k).abs() < 1e-12);
        }
    }

    #[test]
    fn fixed_point_rejects_irregular_input() {
        let p = TrigPoly::<f64>::new(1.0, 0.0, vec![TrigTerm { a: 1.5, s: 0.5, gamma: 0.0 }]).unwrap();
        assert!(matches!(fixed_point_root(&p, 1), Err(Error::NotRegular { .. })));
    }
}
