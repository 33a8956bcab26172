//! Symbolic expansion of the spectral determinant `det(1 - S(k))` into an
//! exponential polynomial and its reduction to the real trigonometric form.
//!
//! Since `S(k) = diag(e^{i s_I k}) * t` with constant `t`, the determinant
//! is a finite sum `sum_j c_j e^{i S_j k}` whose frequencies are subset sums
//! of the directed-bond actions. The expansion walks vertex-disjoint cycle
//! covers of the transition digraph with a subset DP (one complex
//! coefficient per directed-bond subset), which exploits the sparsity of
//! `t` instead of enumerating permutations.

use nalgebra::Complex;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::num::{carg, cmod, lit, machine_epsilon, unit_phasor, Real};
use crate::trigpoly::{TrigPoly, TrigTerm, FREQ_MERGE_REL_TOL};

/// Default cap on directed bonds for the symbolic expansion.
pub const DEFAULT_EXPANSION_CAP: usize = 16;

/// Tolerance for the reducibility (modulus symmetry) checks.
pub const REDUCIBILITY_TOL: f64 = 1e-9;

/// A finite exponential polynomial `sum_j c_j * exp(i * S_j * k)` with
/// `S_j >= 0` strictly increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpPoly<T> {
    terms: Vec<(Complex<T>, T)>,
}

impl<T: Real> ExpPoly<T> {
    /// Build from raw `(coefficient, frequency)` pairs: sorts, merges
    /// frequencies closer than `FREQ_MERGE_REL_TOL` times the top
    /// frequency, and drops coefficients below the noise floor.
    pub fn new(mut raw: Vec<(Complex<T>, T)>) -> Self {
        raw.sort_by(|a, b| a.1.partial_cmp(&b.1).expect("finite frequencies"));
        let top = raw.last().map(|&(_, s)| s).unwrap_or_else(T::zero);
        let tol = top * lit(FREQ_MERGE_REL_TOL);
        let mut terms: Vec<(Complex<T>, T)> = Vec::with_capacity(raw.len());
        for (c, s) in raw {
            match terms.last_mut() {
                Some(last) if (s - last.1).abs() <= tol => last.0 += c,
                _ => terms.push((c, s)),
            }
        }
        terms.retain(|&(c, _)| cmod(c) > lit(1e-12));
        Self { terms }
    }

    /// Terms as `(coefficient, frequency)`, frequencies increasing.
    pub fn terms(&self) -> &[(Complex<T>, T)] {
        &self.terms
    }

    /// Highest frequency (zero for the empty polynomial).
    pub fn top_frequency(&self) -> T {
        self.terms.last().map(|&(_, s)| s).unwrap_or_else(T::zero)
    }

    /// Evaluate `sum_j c_j e^{i S_j k}`.
    pub fn eval(&self, k: T) -> Complex<T> {
        let mut acc = Complex::new(T::zero(), T::zero());
        for &(c, s) in &self.terms {
            acc += c * unit_phasor(s * k);
        }
        acc
    }
}

/// Symbolically expand `det(1 - S(k))` with the default size cap.
pub fn expand_determinant<T: Real>(graph: &Graph<T>) -> Result<ExpPoly<T>> {
    expand_determinant_with_cap(graph, DEFAULT_EXPANSION_CAP)
}

/// Symbolically expand `det(1 - S(k))`.
///
/// `det(1 - S) = sum over sets of vertex-disjoint cycles of
/// (-1)^{#cycles} * prod(amplitudes) * e^{i k * sum(actions)}`, organized as
/// a DP over directed-bond subsets: `f(V)` is the signed sum over cycle
/// packings covering exactly `V`, computed by detaching the cycle through
/// the lowest directed bond of `V`.
pub fn expand_determinant_with_cap<T: Real>(graph: &Graph<T>, cap: usize) -> Result<ExpPoly<T>> {
    let n = graph.n_directed();
    if n > cap {
        return Err(Error::ExpansionCapExceeded { directed: n, cap });
    }
    let zero = Complex::new(T::zero(), T::zero());
    let one = Complex::new(T::one(), T::zero());
    let size = 1usize << n;
    let mut f = vec![zero; size];
    f[0] = one;

    // DFS scratch: enumerate simple cycles through `low` inside `mask`.
    let mut stack: Vec<(usize, Complex<T>, usize, usize)> = Vec::new();
    for mask in 1..size {
        let low = mask.trailing_zeros() as usize;
        let mut acc = zero;
        // (node, amplitude so far, visited set, next transition index)
        stack.clear();
        stack.push((low, one, 1usize << low, 0));
        while let Some(&mut (node, amp, visited, ref mut next)) = stack.last_mut() {
            let transitions = graph.transitions_from(node);
            let mut advanced = false;
            while *next < transitions.len() {
                let (j, t) = transitions[*next];
                *next += 1;
                if mask & (1 << j) == 0 {
                    continue;
                }
                if j == low {
                    // Closed a cycle: one factor (-1) per cycle.
                    acc -= amp * t * f[mask & !visited];
                    continue;
                }
                if visited & (1 << j) != 0 {
                    continue;
                }
                stack.push((j, amp * t, visited | (1 << j), 0));
                advanced = true;
                break;
            }
            if !advanced {
                stack.pop();
            }
        }
        f[mask] = acc;
    }

    let actions: Vec<T> = (0..n).map(|i| graph.directed_action(i)).collect();
    let mut raw = Vec::new();
    for (mask, &c) in f.iter().enumerate() {
        if cmod(c) == T::zero() {
            continue;
        }
        let mut freq = T::zero();
        for (i, &a) in actions.iter().enumerate() {
            if mask & (1 << i) != 0 {
                freq += a;
            }
        }
        raw.push((c, freq));
    }
    Ok(ExpPoly::new(raw))
}

/// Result of reducing an exponential polynomial to the real form
/// `Delta(k) = scale * e^{i(S0*k - pi*g0)} * [cos(S0*k - pi*g0) - Phi(k)]`.
#[derive(Debug, Clone)]
pub struct Reduction<T> {
    /// The real reduced polynomial (level 0, unit leading coefficient).
    pub poly: TrigPoly<T>,
    /// Complex normalization: `Delta = scale * e^{i Theta0} * poly`.
    pub scale: Complex<T>,
}

/// Reduce an exponential polynomial to the real trigonometric form.
///
/// The overall phase is `Theta0(k) = S0*k - pi*g0` with `S0` half the top
/// frequency; `g0` comes from the symmetry of the coefficient list
/// (`e^{-2 pi i g0} = c_top / c_0`). Fails, without guessing, when the
/// coefficients are not mirror-symmetric to [`REDUCIBILITY_TOL`].
pub fn to_real_form<T: Real>(p: &ExpPoly<T>) -> Result<Reduction<T>> {
    // Sized for f64; a few hundred ulps for lower-precision scalars.
    let reduc_tol = lit::<T>(REDUCIBILITY_TOL).max(machine_epsilon::<T>() * lit(512.0));
    let terms = p.terms();
    if terms.len() < 2 {
        return Err(Error::NotReducible {
            reason: "need at least the constant and top-frequency terms".into(),
            residual: 0.0,
        });
    }
    let s_max = p.top_frequency();
    let freq_tol = s_max * lit(FREQ_MERGE_REL_TOL * 10.0);
    if terms[0].1.abs() > freq_tol {
        return Err(Error::NotReducible {
            reason: "lowest frequency must vanish".into(),
            residual: as_f64(terms[0].1.abs()),
        });
    }
    let c0 = terms[0].0;
    let c_top = terms.last().unwrap().0;
    let mod_asym = (cmod(c_top) - cmod(c0)).abs() / cmod(c0);
    if mod_asym > reduc_tol {
        return Err(Error::NotReducible {
            reason: "extreme coefficients differ in modulus".into(),
            residual: as_f64(mod_asym),
        });
    }
    let s0 = s_max / lit(2.0);
    // e^{-2 pi i g0} = c_top / c0.
    let ratio = c_top / c0;
    let two_pi = T::two_pi();
    let gamma0 = crate::num::fmod_pos(-carg(ratio) / two_pi, T::one());
    let scale = c0 * lit::<T>(2.0);
    let phase0 = unit_phasor(T::pi() * gamma0);

    // Pair every interior frequency S with its mirror s_max - S.
    let last = terms.len() - 1;
    let mut used = vec![false; terms.len()];
    used[0] = true;
    used[last] = true;
    let mut out: Vec<TrigTerm<T>> = Vec::new();
    for i in 1..last {
        if used[i] {
            continue;
        }
        used[i] = true;
        let (c_lo, s_lo) = terms[i];
        // a_i e^{i pi g_i} = -(c / c0) e^{i pi g0} for the lower partner.
        let w = -(c_lo / c0) * phase0;
        if (s_lo - s0).abs() <= freq_tol {
            // Self-paired mid-frequency term: a constant in Phi.
            if w.im.abs() > reduc_tol * cmod(w).max(T::one()) {
                return Err(Error::NotReducible {
                    reason: "mid-frequency coefficient is not real after phase rotation".into(),
                    residual: as_f64(w.im.abs()),
                });
            }
            out.push(TrigTerm { a: w.re, s: T::zero(), gamma: T::zero() });
            continue;
        }
        if s_lo > s0 {
            return Err(Error::NotReducible {
                reason: format!("frequency {} above the midpoint has no partner", as_f64(s_lo)),
                residual: 0.0,
            });
        }
        let target = s_max - s_lo;
        let start = terms.partition_point(|&(_, s)| s < target - freq_tol);
        let j = (start..terms.len())
            .take_while(|&j| terms[j].1 <= target + freq_tol)
            .find(|&j| !used[j]);
        let Some(j) = j else {
            return Err(Error::NotReducible {
                reason: format!(
                    "frequency {} has no mirror partner at {}",
                    as_f64(s_lo),
                    as_f64(target)
                ),
                residual: 0.0,
            });
        };
        used[j] = true;
        // The mirror coefficient must carry the conjugate phasor.
        let w_mirror = -(terms[j].0 / c0) * phase0;
        let defect = cmod(w_mirror - w.conj());
        if defect > reduc_tol * cmod(w).max(T::one()) {
            return Err(Error::NotReducible {
                reason: format!(
                    "mirror coefficients at frequency {} are not conjugate",
                    as_f64(s_lo)
                ),
                residual: as_f64(defect),
            });
        }
        out.push(TrigTerm {
            a: cmod(w),
            s: s0 - s_lo,
            gamma: carg(w) / T::pi(),
        });
    }

    let poly = TrigPoly::new(s0, gamma0, out)?;
    Ok(Reduction { poly, scale })
}

/// Leading phase of a graph from the determinant of its amplitude matrix:
/// `g0 = -arg(det t) / (2 pi)`, reduced to `[0, 1)`. Cross-check reference
/// for the coefficient-symmetry extraction.
pub fn graph_gamma0<T: Real>(graph: &Graph<T>) -> T {
    let det = graph.t_matrix().clone().determinant();
    crate::num::fmod_pos(-carg(det) / T::two_pi(), T::one())
}

/// Expand and reduce a graph's spectral determinant, cross-checking the
/// phase extracted from the coefficient symmetry against the phase of
/// `det t`. A discrepancy above `1e-9` (mod 1) is an error, not patched.
pub fn graph_trigpoly<T: Real>(graph: &Graph<T>) -> Result<Reduction<T>> {
    let exp = expand_determinant(graph)?;
    let red = to_real_form(&exp)?;
    let reference = graph_gamma0(graph);
    let dist = crate::num::cyclic_distance(red.poly.gamma0(), reference, T::one());
    if dist > lit::<T>(1e-9).max(machine_epsilon::<T>() * lit(512.0)) {
        return Err(Error::NotReducible {
            reason: "coefficient-symmetry phase disagrees with det S phase".into(),
            residual: as_f64(dist),
        });
    }
    Ok(red)
}

/// Reconstruction residual `|scale * e^{i Theta0} * poly(k) - exp(k)|`
/// at one momentum; used by the validation suites.
pub fn reconstruction_residual<T: Real>(exp: &ExpPoly<T>, red: &Reduction<T>, k: T) -> T {
    let theta0 = red.poly.s0() * k - T::pi() * red.poly.gamma0();
    let lhs = red.scale * unit_phasor(theta0) * Complex::new(red.poly.eval(k), T::zero());
    cmod(lhs - exp.eval(k))
}

fn as_f64<T: Real>(x: T) -> f64 {
    crate::num::to_f64(x)
}
