//! Nearest-neighbor spacing statistics and irregularity-regime diagrams.
//!
//! Spectra of finite graphs are almost periodic: spacings have compact
//! support, cut off by the separator geometry. A degree-`m` polynomial has
//! periodic separators at the regular level and loses at most one unit of
//! mean spacing per descent level, so the root spacing is bounded by
//! `pi*(m+2)/S0` — two mean spacings for a regular spectrum. The classical
//! one-mean-spacing-per-level count, `pi*(m+1)/S0`, is the bound on the
//! *separator* spacing one level up; both are reported. Wigner surmise
//! densities are provided as reference curves only: a finite chain never
//! develops their tails.

use rayon::prelude::*;

use crate::bootstrap::descend_hierarchy;
use crate::error::{Error, Result};
use crate::num::{count, index, lit, to_f64, Real};
use crate::trigpoly::TrigPoly;

/// Spacing normalization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    /// Momentum units.
    Raw,
    /// Divided by the empirical mean spacing.
    UnitMean,
}

/// Nearest-neighbor spacings of a sorted root list.
#[derive(Debug, Clone)]
pub struct SpacingSample<T> {
    pub mode: Normalization,
    /// Positive spacings, in the mode's units.
    pub spacings: Vec<T>,
    /// Number of (near-)zero spacings from degenerate roots, excluded from
    /// `spacings` and histograms.
    pub zero_spacings: usize,
    /// Empirical mean of the positive raw spacings.
    pub mean_raw: T,
    /// Extremes in raw momentum units.
    pub s_min: T,
    pub s_max: T,
}

impl<T: Real> SpacingSample<T> {
    /// Compute spacings `s_n = k_n - k_{n-1}` from sorted roots.
    ///
    /// Spacings below `1e-9` of the mean are counted as degenerate zeros;
    /// decreasing roots are an error.
    pub fn from_roots(roots: &[T], mode: Normalization) -> Result<Self> {
        if roots.len() < 2 {
            return Err(Error::BadRange { lo: 0, hi: roots.len() as i64 });
        }
        let mut raw = Vec::with_capacity(roots.len() - 1);
        for (i, w) in roots.windows(2).enumerate() {
            let s = w[1] - w[0];
            if s < T::zero() {
                return Err(Error::UnsortedRoots { index: i + 1 });
            }
            raw.push(s);
        }
        let span_mean = (*roots.last().unwrap() - roots[0]) / count::<T>(raw.len());
        let zero_tol = span_mean * lit(1e-9);
        let zero_spacings = raw.iter().filter(|&&s| s <= zero_tol).count();
        let positive: Vec<T> = raw.into_iter().filter(|&s| s > zero_tol).collect();
        if positive.is_empty() {
            return Err(Error::BadRange { lo: 0, hi: 0 });
        }
        let mean_raw =
            positive.iter().fold(T::zero(), |a, &b| a + b) / count::<T>(positive.len());
        let s_min = positive.iter().fold(positive[0], |a, &b| a.min(b));
        let s_max = positive.iter().fold(T::zero(), |a, &b| a.max(b));
        let spacings = match mode {
            Normalization::Raw => positive,
            Normalization::UnitMean => positive.into_iter().map(|s| s / mean_raw).collect(),
        };
        Ok(Self {
            mode,
            spacings,
            zero_spacings,
            mean_raw,
            s_min,
            s_max,
        })
    }

    /// Histogram over `[0, upper]` with `bins` uniform bins. Returns bin
    /// edges, raw counts, and the density normalization (counts divided by
    /// `N * bin_width`). Out-of-range spacings land in the last bin.
    pub fn histogram(&self, upper: T, bins: usize) -> Histogram<T> {
        let width = upper / count::<T>(bins);
        let mut counts = vec![0u64; bins];
        for &s in &self.spacings {
            let mut idx = to_f64(s / width) as usize;
            if idx >= bins {
                idx = bins - 1;
            }
            counts[idx] += 1;
        }
        let total = count::<T>(self.spacings.len());
        let density = counts
            .iter()
            .map(|&c| count::<T>(c as usize) / (total * width))
            .collect();
        let edges = (0..=bins).map(|i| width * count::<T>(i)).collect();
        Histogram { edges, counts, density }
    }
}

/// Plot-ready histogram.
#[derive(Debug, Clone)]
pub struct Histogram<T> {
    /// `bins + 1` edges.
    pub edges: Vec<T>,
    pub counts: Vec<u64>,
    pub density: Vec<T>,
}

/// Result of checking a sample against the separator spacing bounds.
#[derive(Debug, Clone, Copy)]
pub struct BoundReport<T> {
    pub m: u32,
    pub s_max: T,
    /// `pi*(m+1)/S0`: maximal separator spacing at the level above.
    pub separator_bound: T,
    /// `pi*(m+2)/S0`: maximal root spacing (two mean spacings at `m = 0`).
    pub root_bound: T,
    /// `root_bound - s_max`; positive margin means the observed growth is
    /// slower than the linear estimate.
    pub margin: T,
    pub pass: bool,
}

/// Check the observed maximal spacing against the degree-`m` bounds.
pub fn spacing_bound_check<T: Real>(sample: &SpacingSample<T>, m: u32, s0: T) -> BoundReport<T> {
    let unit = T::pi() / s0;
    let separator_bound = unit * count::<T>(m as usize + 1);
    let root_bound = unit * count::<T>(m as usize + 2);
    BoundReport {
        m,
        s_max: sample.s_max,
        separator_bound,
        root_bound,
        margin: root_bound - sample.s_max,
        pass: sample.s_max <= root_bound,
    }
}

/// Random-matrix reference ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Ensemble {
    Goe,
    Gue,
}

/// Wigner surmise densities (unit mean spacing):
/// GOE `(pi/2) s exp(-pi s^2/4)`, GUE `(32/pi^2) s^2 exp(-4 s^2/pi)`.
pub fn wigner_reference<T: Real>(s: T, ensemble: Ensemble) -> Result<T> {
    if s < T::zero() {
        return Err(Error::NegativeSpacing);
    }
    let pi = T::pi();
    Ok(match ensemble {
        Ensemble::Goe => pi / lit::<T>(2.0) * s * (-pi * s * s / lit::<T>(4.0)).exp(),
        Ensemble::Gue => {
            lit::<T>(32.0) / (pi * pi) * s * s * (-lit::<T>(4.0) * s * s / pi).exp()
        }
    })
}

/// Irregularity-degree map over a two-parameter family.
#[derive(Debug, Clone)]
pub struct RegimeDiagram<T> {
    pub family: String,
    /// Grid coordinates along each axis.
    pub p1: Vec<T>,
    pub p2: Vec<T>,
    /// `m[i][j]` is the degree at `(p1[i], p2[j])`.
    pub m: Vec<Vec<u32>>,
}

impl<T: Real> RegimeDiagram<T> {
    /// Largest degree on the grid.
    pub fn max_m(&self) -> u32 {
        self.m.iter().flatten().copied().max().unwrap_or(0)
    }
}

/// Scan a polynomial family over `[-1, 1]^2` with `grid` points per axis
/// (at least 32) and classify each point by its irregularity degree.
pub fn regime_diagram<T, F>(family_name: &str, family: F, grid: usize) -> Result<RegimeDiagram<T>>
where
    T: Real,
    F: Fn(T, T) -> Result<TrigPoly<T>> + Sync,
{
    if grid < 32 {
        return Err(Error::ConfigSchema {
            reason: format!("grid resolution {grid} is below the 32x32 minimum"),
        });
    }
    let coord = |i: usize| -T::one() + lit::<T>(2.0) * count::<T>(i) / count::<T>(grid - 1);
    let axis: Vec<T> = (0..grid).map(coord).collect();
    let m: Result<Vec<Vec<u32>>> = axis
        .par_iter()
        .map(|&p1| {
            axis.iter()
                .map(|&p2| {
                    let poly = family(p1, p2).map_err(|e| Error::FamilyConstruction {
                        p1: to_f64(p1),
                        p2: to_f64(p2),
                        reason: e.to_string(),
                    })?;
                    let (m, _) = poly.irregularity_degree()?;
                    Ok(m)
                })
                .collect()
        })
        .collect();
    Ok(RegimeDiagram {
        family: family_name.to_string(),
        p1: axis.clone(),
        p2: axis,
        m: m?,
    })
}

/// One point of a diagonal sweep.
#[derive(Debug, Clone, Copy)]
pub struct SweepPoint<T> {
    pub r: T,
    pub m: u32,
    pub s_min: T,
    pub s_max: T,
    pub zero_spacings: usize,
    pub report: BoundReport<T>,
}

/// Sweep a family along `p1 = p2 = r`, solving the first `n_roots` roots
/// per point via the separator hierarchy (the oracle can miss merged sign
/// changes at exact degeneracies) and measuring the spacing range.
pub fn diagonal_sweep<T, F>(family: F, rs: &[T], n_roots: i64) -> Result<Vec<SweepPoint<T>>>
where
    T: Real,
    F: Fn(T, T) -> Result<TrigPoly<T>> + Sync,
{
    rs.iter()
        .map(|&r| {
            let poly = family(r, r)?;
            let (m, _) = poly.irregularity_degree()?;
            let h = descend_hierarchy(&poly, 1, n_roots)?;
            let roots: Vec<T> = h.roots.iter().map(|rec| rec.k).collect();
            let sample = SpacingSample::from_roots(&roots, Normalization::Raw)?;
            let report = spacing_bound_check(&sample, m, poly.s0());
            Ok(SweepPoint {
                r,
                m,
                s_min: sample.s_min,
                s_max: sample.s_max,
                zero_spacings: sample.zero_spacings,
                report,
            })
        })
        .collect()
}

/// Integral of a density over `[0, hi]` by composite Simpson; used to
/// validate the references' normalization and mean.
pub fn density_moment<T: Real>(
    f: &dyn Fn(T) -> T,
    hi: T,
    moment: u32,
    panels: usize,
) -> T {
    let h = hi / count::<T>(panels);
    let g = |x: T| {
        let mut w = f(x);
        for _ in 0..moment {
            w *= x;
        }
        w
    };
    let mut acc = g(T::zero()) + g(hi);
    for i in 1..panels {
        let x = h * count::<T>(i);
        let w = if i % 2 == 1 { lit::<T>(4.0) } else { lit::<T>(2.0) };
        acc += w * g(x);
    }
    acc * h / lit::<T>(3.0)
}

/// `m` is even in each reflection coordinate: coefficients enter through
/// their absolute values.
pub fn check_diagram_symmetry<T: Real>(diagram: &RegimeDiagram<T>) -> bool {
    let n = diagram.p1.len();
    for i in 0..n {
        for j in 0..n {
            // Mirrors exist exactly on the symmetric grid.
            let mi = n - 1 - i;
            let mj = n - 1 - j;
            if diagram.m[i][j] != diagram.m[mi][j] || diagram.m[i][j] != diagram.m[i][mj] {
                return false;
            }
        }
    }
    true
}

/// The `m = 0` region of the four-vertex chain family is the diamond
/// `|r3| + |r2 r3| + |r2| < 1` independent of the actions.
pub fn four_vertex_diamond<T: Real>(r2: T, r3: T) -> bool {
    r3.abs() + (r2 * r3).abs() + r2.abs() < T::one()
}

/// Convenience alias used by the sweep protocol: `r = 0, 0.02, ..., 1`.
pub fn default_diagonal<T: Real>() -> Vec<T> {
    (0..=50).map(|i| index::<T>(i) * lit(0.02)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families;

    #[test]
    fn equal_spacing_single_bin() {
        // 0.75 is exactly representable, so every spacing is bit-identical.
        let roots: Vec<f64> = (0..50).map(|i| i as f64 * 0.75).collect();
        let sample = SpacingSample::from_roots(&roots, Normalization::Raw).unwrap();
        assert_eq!(sample.spacings.len(), 49);
        assert!((sample.s_min - 0.75).abs() < 1e-12);
        assert!((sample.s_max - 0.75).abs() < 1e-12);
        let hist = sample.histogram(1.5, 100);
        assert_eq!(hist.counts.iter().sum::<u64>(), 49);
        assert_eq!(hist.counts.iter().filter(|&&c| c > 0).count(), 1);
    }

    #[test]
    fn unit_mean_mode_normalizes() {
        let roots: Vec<f64> = vec![0.0, 1.0, 2.5, 3.1, 5.0];
        let s = SpacingSample::from_roots(&roots, Normalization::UnitMean).unwrap();
        let mean: f64 = s.spacings.iter().sum::<f64>() / s.spacings.len() as f64;
        assert!((mean - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unsorted_roots_rejected() {
        let roots = vec![0.0, 2.0, 1.0];
        assert!(matches!(
            SpacingSample::from_roots(&roots, Normalization::Raw),
            Err(Error::UnsortedRoots { index: 2 })
        ));
    }

    #[test]
    fn zero_spacings_counted_separately() {
        let roots = vec![0.0, 1.0, 1.0, 2.0];
        let s = SpacingSample::from_roots(&roots, Normalization::Raw).unwrap();
        assert_eq!(s.zero_spacings, 1);
        assert_eq!(s.spacings.len(), 2);
    }

    #[test]
    fn benchmark_spacings_below_two_mean_spacings() {
        let poly = families::reference_two_bond_poly::<f64>();
        let h = descend_hierarchy(&poly, 1, 2000).unwrap();
        let roots: Vec<f64> = h.roots.iter().map(|r| r.k).collect();
        let sample = SpacingSample::from_roots(&roots, Normalization::Raw).unwrap();
        let report = spacing_bound_check(&sample, 0, poly.s0());
        assert!(report.pass, "s_max = {} vs {}", report.s_max, report.root_bound);
        // Regular spectra exceed one mean spacing whenever they fluctuate.
        assert!(sample.s_max > poly.mean_spacing());
        assert!(sample.s_max < 2.0 * poly.mean_spacing());
    }

    #[test]
    fn wigner_references_normalized_with_unit_mean() {
        for ens in [Ensemble::Goe, Ensemble::Gue] {
            assert_eq!(wigner_reference(0.0, ens).unwrap(), 0.0);
            let f = move |s: f64| wigner_reference(s, ens).unwrap();
            let norm = density_moment(&f, 10.0, 0, 20_000);
            let mean = density_moment(&f, 10.0, 1, 20_000);
            assert!((norm - 1.0).abs() < 1e-6, "{ens:?} norm = {norm}");
            assert!((mean - 1.0).abs() < 1e-6, "{ens:?} mean = {mean}");
        }
        assert!(matches!(
            wigner_reference(-0.1, Ensemble::Goe),
            Err(Error::NegativeSpacing)
        ));
    }

    #[test]
    fn synthetic_bound_violation_fails() {
        let roots = vec![0.0, 5.0, 6.0];
        let sample = SpacingSample::from_roots(&roots, Normalization::Raw).unwrap();
        let report = spacing_bound_check(&sample, 0, std::f64::consts::PI);
        assert!(!report.pass);
        assert!(report.margin < 0.0);
    }

    #[test]
    fn diagram_center_is_regular_and_symmetric() {
        let family = families::FourVertexChain::new([0.2, 0.6565, 0.1435]);
        let d = regime_diagram("four-vertex-chain", |a, b| family.poly(a, b), 33).unwrap();
        let mid = 16;
        assert_eq!(d.m[mid][mid], 0);
        assert!(check_diagram_symmetry(&d));
        // The regular region is exactly the diamond.
        for (i, &r2) in d.p1.iter().enumerate() {
            for (j, &r3) in d.p2.iter().enumerate() {
                assert_eq!(d.m[i][j] == 0, four_vertex_diamond(r2, r3), "({r2}, {r3})");
            }
        }
        assert_eq!(d.max_m(), 2);
    }

    #[test]
    fn grid_resolution_minimum_enforced() {
        let family = families::FourVertexChain::new([0.2, 0.6565, 0.1435]);
        assert!(regime_diagram::<f64, _>("x", |a, b| family.poly(a, b), 16).is_err());
    }

    #[test]
    fn s_max_stabilizes_under_window_doubling() {
        // Almost-periodic spectra explore their full spacing range within
        // ~1e4 mean spacings; doubling the window moves s_max by < 1%.
        let poly = families::reference_two_bond_poly::<f64>();
        let h = descend_hierarchy(&poly, 1, 20_000).unwrap();
        let roots: Vec<f64> = h.roots.iter().map(|r| r.k).collect();
        let half = SpacingSample::from_roots(&roots[..10_000], Normalization::Raw).unwrap();
        let full = SpacingSample::from_roots(&roots, Normalization::Raw).unwrap();
        let change = (full.s_max - half.s_max).abs() / half.s_max;
        assert!(change < 0.01, "s_max moved by {change} when doubling the window");
    }

    #[test]
    fn sweep_reports_monotone_bound_margins() {
        let family = families::FourVertexChain::new([0.2, 0.6565, 0.1435]);
        let rs: Vec<f64> = vec![0.0, 0.3, 0.6, 0.95];
        let points = diagonal_sweep(|a, b| family.poly(a, b), &rs, 300).unwrap();
        assert_eq!(points[0].m, 0);
        assert!((points[0].s_max - std::f64::consts::PI).abs() < 1e-9);
        for p in &points {
            assert!(p.report.pass, "r = {}: s_max = {}", p.r, p.s_max);
        }
        assert!(points.last().unwrap().m >= 2);
    }
}
