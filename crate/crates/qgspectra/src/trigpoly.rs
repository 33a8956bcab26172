//! Reduced real form of the spectral determinant and its derivative
//! hierarchy.
//!
//! A level-`l` polynomial evaluates as
//!
//! ```text
//! D(k) = cos(S0*k - pi*g0 + pi*l/2) - sum_i a_i * cos(S_i*k - pi*g_i + pi*l/2)
//! ```
//!
//! where the amplitudes `a_i` are already scaled for the level (each
//! derivative multiplies a term by its frequency ratio `eps_i = S_i/S0` and
//! the whole equation is renormalized by `S0` so the leading term keeps unit
//! amplitude). The sum over the `a_i` terms is the characteristic function;
//! its absolute sum `alpha` decides regularity.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::{count, lit, Real};
use crate::SCHEMA_VERSION;

/// Relative tolerance under which two frequencies are considered identical
/// and merged (action sums of rationally related lengths collide exactly;
/// the tolerance absorbs floating error).
pub const FREQ_MERGE_REL_TOL: f64 = 1e-9;

/// Amplitudes below this are numerical noise and dropped.
pub const AMPLITUDE_FLOOR: f64 = 1e-12;

/// One harmonic of the characteristic function: `a * cos(S*k - pi*gamma)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrigTerm<T> {
    /// Amplitude, canonicalized to `a >= 0`.
    pub a: T,
    /// Frequency, `0 <= S < S0`.
    #[serde(rename = "S")]
    pub s: T,
    /// Phase in units of pi, canonicalized to `[0, 2)`.
    pub gamma: T,
}

/// Real reduced spectral polynomial at derivative level `l`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigPoly<T> {
    s0: T,
    gamma0: T,
    level: u32,
    terms: Vec<TrigTerm<T>>,
}

impl<T: Real> TrigPoly<T> {
    /// Build a level-0 polynomial, canonicalizing and merging terms.
    ///
    /// Terms with negative amplitude are folded into a phase shift of pi;
    /// terms sharing a frequency (within [`FREQ_MERGE_REL_TOL`] relative to
    /// `S0`) are combined by phasor addition; amplitudes below
    /// [`AMPLITUDE_FLOOR`] are dropped.
    pub fn new(s0: T, gamma0: T, terms: Vec<TrigTerm<T>>) -> Result<Self> {
        Self::with_level(s0, gamma0, 0, terms)
    }

    /// Build a polynomial at an explicit derivative level.
    pub fn with_level(s0: T, gamma0: T, level: u32, terms: Vec<TrigTerm<T>>) -> Result<Self> {
        if s0 <= T::zero() {
            return Err(Error::ConfigSchema {
                reason: "leading frequency S0 must be positive".into(),
            });
        }
        let merged = merge_terms(s0, terms)?;
        Ok(Self {
            s0,
            gamma0: crate::num::fmod_pos(gamma0, lit(2.0)),
            level,
            terms: merged,
        })
    }

    /// Leading frequency `S0`.
    pub fn s0(&self) -> T {
        self.s0
    }

    /// Leading phase `gamma0` (units of pi, level-0 convention).
    pub fn gamma0(&self) -> T {
        self.gamma0
    }

    /// Effective leading phase at this level: `gamma0 - level/2`.
    ///
    /// Each derivative shifts every cosine by pi/2, which is a shift of the
    /// leading phase by -1/2 in units of pi.
    pub fn gamma0_effective(&self) -> T {
        self.gamma0 - count::<T>(self.level as usize) / lit(2.0)
    }

    /// Derivative level.
    pub fn level(&self) -> u32 {
        self.level
    }

    /// Harmonic terms of the characteristic function (amplitudes at this
    /// level).
    pub fn terms(&self) -> &[TrigTerm<T>] {
        &self.terms
    }

    /// Number of harmonic terms.
    pub fn n_gamma(&self) -> usize {
        self.terms.len()
    }

    /// Mean root spacing `pi/S0`.
    pub fn mean_spacing(&self) -> T {
        T::pi() / self.s0
    }

    /// Characteristic sum `alpha = sum |a_i|` at this level; the polynomial
    /// is regular when `alpha < 1` (exactly one root per separator cell).
    pub fn characteristic_sum(&self) -> T {
        self.terms
            .iter()
            .fold(T::zero(), |acc, t| acc + t.a.abs())
    }

    /// Whether the regularity condition `alpha < 1` holds.
    pub fn is_regular(&self) -> bool {
        self.characteristic_sum() < T::one()
    }

    /// Evaluate the polynomial at momentum `k`.
    pub fn eval(&self, k: T) -> T {
        let pi = T::pi();
        let off = pi * count::<T>(self.level as usize) / lit(2.0);
        let mut v = (self.s0 * k - pi * self.gamma0 + off).cos();
        for t in &self.terms {
            v -= t.a * (t.s * k - pi * t.gamma + off).cos();
        }
        v
    }

    /// Characteristic function `Phi(k)` at this level (so that
    /// `eval(k) = cos(S0*k - pi*g0 + pi*l/2) - phi(k)`).
    pub fn phi(&self, k: T) -> T {
        let pi = T::pi();
        let off = pi * count::<T>(self.level as usize) / lit(2.0);
        self.terms
            .iter()
            .fold(T::zero(), |acc, t| acc + t.a * (t.s * k - pi * t.gamma + off).cos())
    }

    /// Evaluate the polynomial and its k-derivative in one pass.
    ///
    /// The derivative of a level-`l` polynomial is `S0` times the level-
    /// `(l+1)` polynomial, so this avoids allocating the differentiated
    /// form in root-polishing loops.
    pub fn eval_with_derivative(&self, k: T) -> (T, T) {
        let pi = T::pi();
        let off = pi * count::<T>(self.level as usize) / lit(2.0);
        let x0 = self.s0 * k - pi * self.gamma0 + off;
        let mut v = x0.cos();
        let mut d = -self.s0 * x0.sin();
        for t in &self.terms {
            let x = t.s * k - pi * t.gamma + off;
            v -= t.a * x.cos();
            d += t.a * t.s * x.sin();
        }
        (v, d)
    }

    /// Frequency ratios `eps_i = S_i/S0 < 1`.
    pub fn epsilons(&self) -> impl Iterator<Item = T> + '_ {
        self.terms.iter().map(move |t| t.s / self.s0)
    }

    /// `l`-th derivative, renormalized so the leading term keeps unit
    /// amplitude: amplitudes scale by `eps_i^l`, phases shift by `pi*l/2`
    /// (recorded in the level).
    ///
    /// Scaling is applied one factor at a time so that
    /// `differentiate(a + b)` performs bit-for-bit the same arithmetic as
    /// `differentiate(a)` followed by `differentiate(b)`.
    pub fn differentiate(&self, l: u32) -> Self {
        let mut terms = self.terms.clone();
        for _ in 0..l {
            for t in &mut terms {
                t.a *= t.s / self.s0;
            }
        }
        Self {
            s0: self.s0,
            gamma0: self.gamma0,
            level: self.level + l,
            terms,
        }
    }

    /// Irregularity degree: the smallest number `m` of additional
    /// derivatives after which the characteristic sum drops below one,
    /// together with the a-priori upper bound
    /// `ceil(-ln(alpha) / ln(max eps_i))` (zero when already regular).
    ///
    /// Terms with zero amplitude are ignored. Errors when some `eps_i = 1`
    /// while `alpha >= 1`: the hierarchy cannot terminate.
    pub fn irregularity_degree(&self) -> Result<(u32, u32)> {
        let one = T::one();
        let active: Vec<(T, T)> = self
            .terms
            .iter()
            .filter(|t| t.a.abs() > T::zero())
            .map(|t| (t.a.abs(), t.s / self.s0))
            .collect();
        let alpha0: T = active.iter().fold(T::zero(), |acc, &(a, _)| acc + a);
        if alpha0 < one {
            return Ok((0, 0));
        }
        let eps_max = active
            .iter()
            .map(|&(_, e)| e)
            .fold(T::zero(), |m, e| if e > m { e } else { m });
        if eps_max >= one {
            return Err(Error::NoFiniteDegree);
        }
        // At alpha = 1 exactly the logarithm bound degenerates to zero while
        // one derivative always suffices; clamp from below.
        let bound_f = (-alpha0.ln() / eps_max.ln()).ceil();
        let bound = (crate::num::to_f64(bound_f) as u32).max(1);
        let mut amps: Vec<(T, T)> = active;
        let mut m = 0u32;
        loop {
            let alpha: T = amps.iter().fold(T::zero(), |acc, &(a, _)| acc + a);
            if alpha < one {
                break;
            }
            m += 1;
            if m > bound {
                // The analytic bound is exact; exceeding it means eps_max
                // rounded to 1.
                return Err(Error::NoFiniteDegree);
            }
            for t in &mut amps {
                t.0 *= t.1;
            }
        }
        debug_assert!(m <= bound);
        Ok((m, bound))
    }

    /// Serializable form of this polynomial.
    pub fn to_file(&self) -> TrigPolyFile
    where
        T: serde::Serialize,
    {
        TrigPolyFile {
            schema_version: SCHEMA_VERSION,
            s0: as_f64(self.s0),
            gamma0: as_f64(self.gamma0),
            level: self.level,
            terms: self
                .terms
                .iter()
                .map(|t| TrigTermFile {
                    a: as_f64(t.a),
                    s: as_f64(t.s),
                    gamma: as_f64(t.gamma),
                })
                .collect(),
        }
    }
}

fn as_f64<T: Real>(x: T) -> f64 {
    crate::num::to_f64(x)
}

/// Canonicalize sign/phase, merge equal frequencies, drop noise terms,
/// validate `0 <= S_i < S0`, and sort by frequency.
fn merge_terms<T: Real>(s0: T, terms: Vec<TrigTerm<T>>) -> Result<Vec<TrigTerm<T>>> {
    // The relative tolerance is sized for f64; widen to a few ulps for
    // lower-precision scalars.
    let tol = s0 * lit::<T>(FREQ_MERGE_REL_TOL).max(crate::num::machine_epsilon::<T>() * lit(8.0));
    let mut canon: Vec<TrigTerm<T>> = Vec::with_capacity(terms.len());
    for t in terms {
        let mut a = t.a;
        let mut gamma = t.gamma;
        let mut s = t.s;
        if s < T::zero() {
            // cos(-S*k - pi*g) = cos(S*k + pi*g): fold negative frequencies.
            s = -s;
            gamma = -gamma;
        }
        if s < tol {
            // A zero-frequency term is the constant a*cos(pi*g); store its
            // actual value so the characteristic sum sees no phantom weight.
            a *= (T::pi() * gamma).cos();
            s = T::zero();
            gamma = T::zero();
        }
        if a < T::zero() {
            a = -a;
            gamma += T::one();
        }
        if s >= s0 - tol {
            return Err(Error::ConfigSchema {
                reason: format!(
                    "term frequency S = {} is not strictly below S0 = {}",
                    as_f64(s),
                    as_f64(s0)
                ),
            });
        }
        canon.push(TrigTerm {
            a,
            s,
            gamma: crate::num::fmod_pos(gamma, lit(2.0)),
        });
    }
    canon.sort_by(|x, y| x.s.partial_cmp(&y.s).expect("frequencies are finite"));

    let mut merged: Vec<TrigTerm<T>> = Vec::with_capacity(canon.len());
    for t in canon {
        match merged.last_mut() {
            Some(last) if (t.s - last.s).abs() < tol => {
                // Phasor addition: a1*cos(x - pi*g1) + a2*cos(x - pi*g2).
                let pi = T::pi();
                let re = last.a * (pi * last.gamma).cos() + t.a * (pi * t.gamma).cos();
                let im = last.a * (pi * last.gamma).sin() + t.a * (pi * t.gamma).sin();
                let a = (re * re + im * im).sqrt();
                last.a = a;
                last.gamma = if a > T::zero() {
                    crate::num::fmod_pos(im.atan2(re), lit::<T>(2.0) * pi) / pi
                } else {
                    T::zero()
                };
            }
            _ => merged.push(t),
        }
    }
    merged.retain(|t| t.a > lit(AMPLITUDE_FLOOR));
    Ok(merged)
}

/// JSON interchange form: `{schema_version, S0, gamma0, level, terms: [{a, S, gamma}]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrigPolyFile {
    #[serde(default = "default_schema_version")]
    pub schema_version: u32,
    #[serde(rename = "S0")]
    pub s0: f64,
    pub gamma0: f64,
    #[serde(default)]
    pub level: u32,
    pub terms: Vec<TrigTermFile>,
}

fn default_schema_version() -> u32 {
    SCHEMA_VERSION
}

/// JSON form of one harmonic term.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrigTermFile {
    pub a: f64,
    #[serde(rename = "S")]
    pub s: f64,
    pub gamma: f64,
}

impl TrigPolyFile {
    /// Validate and convert into a working polynomial.
    pub fn into_poly<T: Real>(self) -> Result<TrigPoly<T>> {
        TrigPoly::with_level(
            lit(self.s0),
            lit(self.gamma0),
            self.level,
            self.terms
                .into_iter()
                .map(|t| TrigTerm {
                    a: lit(t.a),
                    s: lit(t.s),
                    gamma: lit(t.gamma),
                })
                .collect(),
        )
    }

    /// Read from a JSON file.
    pub fn read(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Write as pretty JSON.
    pub fn write(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }
}
