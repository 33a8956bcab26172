//! Periodic orbits: closed walks on the directed-bond transition digraph.
//!
//! `Tr S(k)^l` is a finite sum over closed `l`-step walks; each walk
//! carries the amplitude product of its vertex transitions and the phase of
//! its accumulated reduced action. Walks are grouped into cyclic classes
//! (canonical rotation) with trace weight `l_P * A_P^nu`, where the class is
//! the `nu`-fold repetition of a prime of symbolic length `l_P`: rotating a
//! period-`l_P` word yields `l_P` distinct marked walks.

use nalgebra::Complex;
use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::num::{cmod, count, to_f64, unit_phasor, Real};

/// Default cap on the estimated number of marked closed walks.
pub const DEFAULT_ORBIT_CAP: f64 = 1e7;

/// Environment variable naming the orbit-catalog cache directory.
pub const CACHE_DIR_ENV: &str = "QGSPECTRA_CACHE_DIR";

/// A cyclic class of closed walks: one canonical representative plus its
/// prime decomposition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitClass<T> {
    /// Lexicographically smallest rotation of the directed-bond word.
    pub word: Vec<usize>,
    /// Symbolic length `l = nu * l_prime`.
    pub l: usize,
    /// Symbolic length of the underlying prime orbit.
    pub l_prime: usize,
    /// Repetition count.
    pub nu: usize,
    /// Per-representative amplitude `A = A_P^nu`.
    pub amplitude: Complex<T>,
    /// Amplitude of one traversal of the prime word.
    pub prime_amplitude: Complex<T>,
    /// Reduced action of the full word, `L0 = nu * L0_P`.
    pub action: T,
    /// Reduced action of the prime word.
    pub prime_action: T,
}

impl<T: Real> OrbitClass<T> {
    /// Aggregate weight of the class inside `Tr S^l`: `l_P * A_P^nu`.
    pub fn trace_weight(&self) -> Complex<T> {
        self.amplitude * Complex::new(count::<T>(self.l_prime), T::zero())
    }

    /// Whether this class is itself prime.
    pub fn is_prime(&self) -> bool {
        self.nu == 1
    }
}

/// All orbit classes up to a symbolic-length cutoff, grouped by length.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OrbitCatalog<T> {
    /// Digest of the generating graph.
    pub graph_digest: String,
    pub l_max: usize,
    /// `by_length[l - 1]` holds the classes of symbolic length `l`, sorted
    /// by canonical word.
    pub by_length: Vec<Vec<OrbitClass<T>>>,
}

impl<T: Real> OrbitCatalog<T> {
    /// Classes of symbolic length `l`.
    pub fn classes(&self, l: usize) -> &[OrbitClass<T>] {
        &self.by_length[l - 1]
    }

    /// All classes in (length, word) order.
    pub fn iter(&self) -> impl Iterator<Item = &OrbitClass<T>> {
        self.by_length.iter().flatten()
    }

    /// Prime classes only.
    pub fn primes(&self) -> impl Iterator<Item = &OrbitClass<T>> {
        self.iter().filter(|c| c.is_prime())
    }

    /// Orbit-sum value of `Tr S(k)^l`.
    pub fn trace_sum(&self, l: usize, k: T) -> Complex<T> {
        let mut acc = Complex::new(T::zero(), T::zero());
        for class in self.classes(l) {
            acc += class.trace_weight() * unit_phasor(class.action * k);
        }
        acc
    }
}

/// Smallest cyclic period of a word via the KMP failure function, plus the
/// repetition count: `(l_prime, nu)` with `len = nu * l_prime`.
pub fn word_period(word: &[usize]) -> (usize, usize) {
    let l = word.len();
    if l == 0 {
        return (0, 0);
    }
    let mut fail = vec![0usize; l];
    let mut k = 0;
    for i in 1..l {
        while k > 0 && word[i] != word[k] {
            k = fail[k - 1];
        }
        if word[i] == word[k] {
            k += 1;
        }
        fail[i] = k;
    }
    let p = l - fail[l - 1];
    if l.is_multiple_of(p) {
        (p, l / p)
    } else {
        (l, 1)
    }
}

/// Canonical (lexicographically smallest) rotation of a cyclic word.
pub fn canonical_rotation(word: &[usize]) -> Vec<usize> {
    let l = word.len();
    let mut best = 0usize;
    for start in 1..l {
        for i in 0..l {
            let a = word[(start + i) % l];
            let b = word[(best + i) % l];
            if a < b {
                best = start;
                break;
            }
            if a > b {
                break;
            }
        }
    }
    (0..l).map(|i| word[(best + i) % l]).collect()
}

/// Estimated number of marked closed walks up to `l_max` (trace of powers
/// of the 0/1 adjacency) — the enumeration cost bound.
pub fn walk_count_estimate<T: Real>(graph: &Graph<T>, l_max: usize) -> f64 {
    let n = graph.n_directed();
    let adj: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut row = vec![0.0; n];
            for &(j, _) in graph.transitions_from(i) {
                row[j] = 1.0;
            }
            row
        })
        .collect();
    let mut power = adj.clone();
    let mut total = 0.0;
    for l in 1..=l_max {
        if l > 1 {
            let mut next = vec![vec![0.0; n]; n];
            for i in 0..n {
                for m in 0..n {
                    let p = power[i][m];
                    if p == 0.0 {
                        continue;
                    }
                    for j in 0..n {
                        next[i][j] += p * adj[m][j];
                    }
                }
            }
            power = next;
        }
        total += (0..n).map(|i| power[i][i]).sum::<f64>();
    }
    total
}

/// Enumerate all orbit classes of symbolic length up to `l_max` with the
/// default cap.
pub fn enumerate_orbits<T: Real>(graph: &Graph<T>, l_max: usize) -> Result<OrbitCatalog<T>> {
    enumerate_orbits_with_cap(graph, l_max, DEFAULT_ORBIT_CAP)
}

/// Enumerate all orbit classes of symbolic length up to `l_max`.
///
/// Depth-first walk over the transition digraph, starting from each
/// directed bond and never descending below the start index, so each class
/// is generated from its minimal element; duplicates from repeated minimal
/// elements are merged by canonical rotation. Zero-amplitude branches never
/// appear because only nonzero transitions are stored.
pub fn enumerate_orbits_with_cap<T: Real>(
    graph: &Graph<T>,
    l_max: usize,
    cap: f64,
) -> Result<OrbitCatalog<T>> {
    let estimate = walk_count_estimate(graph, l_max);
    if estimate > cap {
        return Err(Error::OrbitCapExceeded {
            estimate: estimate as u128,
            cap: cap as u128,
        });
    }
    let mut seen: std::collections::HashSet<Vec<usize>> = std::collections::HashSet::new();
    let mut by_length: Vec<Vec<OrbitClass<T>>> = vec![Vec::new(); l_max];
    let n = graph.n_directed();
    let mut word: Vec<usize> = Vec::with_capacity(l_max);
    for start in 0..n {
        word.clear();
        word.push(start);
        dfs_walks(graph, start, start, l_max, &mut word, &mut seen, &mut by_length);
    }
    for classes in &mut by_length {
        classes.sort_by(|a, b| a.word.cmp(&b.word));
    }
    Ok(OrbitCatalog {
        graph_digest: graph.digest(),
        l_max,
        by_length,
    })
}

fn dfs_walks<T: Real>(
    graph: &Graph<T>,
    start: usize,
    node: usize,
    l_max: usize,
    word: &mut Vec<usize>,
    seen: &mut std::collections::HashSet<Vec<usize>>,
    by_length: &mut [Vec<OrbitClass<T>>],
) {
    for &(next, _) in graph.transitions_from(node) {
        if next == start {
            let canon = canonical_rotation(word);
            if seen.insert(canon.clone()) {
                let class = build_class(graph, canon);
                by_length[class.l - 1].push(class);
            }
        }
        // Walks may revisit bonds (including the start); restricting the
        // support to indices >= start generates each class from its
        // minimal element only.
        if word.len() < l_max && next >= start {
            word.push(next);
            dfs_walks(graph, start, next, l_max, word, seen, by_length);
            word.pop();
        }
    }
}

fn build_class<T: Real>(graph: &Graph<T>, word: Vec<usize>) -> OrbitClass<T> {
    let l = word.len();
    let (l_prime, nu) = word_period(&word);
    let one = Complex::new(T::one(), T::zero());
    let mut prime_amplitude = one;
    let mut prime_action = T::zero();
    for i in 0..l_prime {
        let from = word[i];
        let to = word[(i + 1) % l];
        let t = graph
            .transitions_from(from)
            .iter()
            .find(|&&(j, _)| j == to)
            .map(|&(_, t)| t)
            .expect("walk steps follow stored transitions");
        prime_amplitude *= t;
        prime_action += graph.directed_action(from);
    }
    let mut amplitude = one;
    let mut action = T::zero();
    for _ in 0..nu {
        amplitude *= prime_amplitude;
        action += prime_action;
    }
    OrbitClass {
        word,
        l,
        l_prime,
        nu,
        amplitude,
        prime_amplitude,
        action,
        prime_action,
    }
}

/// Decompose one class into its prime and the repetition count; the
/// recomposition identities `l = nu*l_P`, `A = A_P^nu`, `L0 = nu*L0_P` hold
/// by construction.
pub fn prime_decompose<T: Real>(class: &OrbitClass<T>) -> (OrbitClass<T>, usize) {
    let prime_word: Vec<usize> = class.word[..class.l_prime].to_vec();
    let prime = OrbitClass {
        word: canonical_rotation(&prime_word),
        l: class.l_prime,
        l_prime: class.l_prime,
        nu: 1,
        amplitude: class.prime_amplitude,
        prime_amplitude: class.prime_amplitude,
        action: class.prime_action,
        prime_action: class.prime_action,
    };
    (prime, class.nu)
}

/// `Tr S(k)^l` by dense matrix powers.
pub fn matrix_trace_power<T: Real>(graph: &Graph<T>, l: usize, k: T) -> Result<Complex<T>> {
    let s = graph.s_matrix(k)?;
    let mut power = s.clone();
    for _ in 1..l {
        power *= &s;
    }
    Ok(power.trace())
}

/// `Tr S(k)^l` computed both as a matrix power and as the orbit sum.
///
/// Returns the matrix value; a discrepancy above `1e-9` signals an
/// enumeration bug and is an internal consistency error.
pub fn trace_power<T: Real>(
    graph: &Graph<T>,
    catalog: &OrbitCatalog<T>,
    l: usize,
    k: T,
) -> Result<Complex<T>> {
    let matrix = matrix_trace_power(graph, l, k)?;
    let orbit = catalog.trace_sum(l, k);
    let deviation = cmod(matrix - orbit);
    if to_f64(deviation) > 1e-9 {
        return Err(Error::TraceMismatch {
            l,
            deviation: to_f64(deviation),
        });
    }
    Ok(matrix)
}

/// Enumerate with a disk cache keyed by `(graph digest, l_max)` under the
/// directory named by [`CACHE_DIR_ENV`]; falls back to plain enumeration
/// when the variable is unset or the cache entry is unusable.
pub fn enumerate_orbits_cached<T>(graph: &Graph<T>, l_max: usize) -> Result<OrbitCatalog<T>>
where
    T: Real + Serialize + DeserializeOwned,
{
    let Some(dir) = std::env::var_os(CACHE_DIR_ENV) else {
        return enumerate_orbits(graph, l_max);
    };
    let dir = std::path::PathBuf::from(dir);
    let path = dir.join(format!("orbits-{}-l{}.json", graph.digest(), l_max));
    if let Ok(text) = std::fs::read_to_string(&path) {
        if let Ok(catalog) = serde_json::from_str::<OrbitCatalog<T>>(&text) {
            if catalog.graph_digest == graph.digest() && catalog.l_max == l_max {
                return Ok(catalog);
            }
        }
    }
    let catalog = enumerate_orbits(graph, l_max)?;
    if std::fs::create_dir_all(&dir).is_ok() {
        let _ = std::fs::write(&path, serde_json::to_string(&catalog)?);
    }
    Ok(catalog)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families;
    use rand::{Rng, SeedableRng};

    #[test]
    fn two_bond_shortest_walks_are_bounces() {
        let g: Graph<f64> = families::two_bond_graph(0.3, 0.5, 0.4).unwrap();
        let cat = enumerate_orbits(&g, 2).unwrap();
        assert!(cat.classes(1).is_empty());
        let l2 = cat.classes(2);
        assert_eq!(l2.len(), 2);
        assert_eq!(l2[0].word, vec![0, 1]);
        assert_eq!(l2[1].word, vec![2, 3]);
        // Bounce on bond 1: reflection r at the middle, -1 at the end.
        assert!((l2[0].amplitude.re - (-0.4)).abs() < 1e-15);
        assert!(l2[0].amplitude.im.abs() < 1e-15);
        assert!((l2[0].action - 0.6).abs() < 1e-14);
    }

    #[test]
    fn zero_reflection_kills_bounce_orbits() {
        let g: Graph<f64> = families::two_bond_graph(0.3, 0.5, 0.0).unwrap();
        let cat = enumerate_orbits(&g, 4).unwrap();
        assert!(cat.classes(2).is_empty(), "middle reflections vanish");
        // The full traversal survives with |A| = 1.
        let l4 = cat.classes(4);
        assert_eq!(l4.len(), 1);
        assert!((cmod(l4[0].amplitude) - 1.0).abs() < 1e-14);
        assert!((l4[0].action - 1.6).abs() < 1e-14);
    }

    #[test]
    fn repeated_bounce_decomposes() {
        let g: Graph<f64> = families::two_bond_graph(0.3, 0.5, 0.4).unwrap();
        let cat = enumerate_orbits(&g, 6).unwrap();
        let six: Vec<_> = cat.classes(6).iter().filter(|c| c.nu == 3).collect();
        assert!(!six.is_empty());
        for class in six {
            let (prime, nu) = prime_decompose(class);
            assert_eq!(nu, 3);
            assert_eq!(prime.l, 2);
            let expected = prime.amplitude * prime.amplitude * prime.amplitude;
            assert!(cmod(class.amplitude - expected) < 1e-14);
            assert!((class.action - 3.0 * prime.action).abs() < 1e-13);
        }
    }

    #[test]
    fn random_words_decompose_exactly() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let l_p = rng.gen_range(1..5usize);
            let nu = rng.gen_range(1..4usize);
            let base: Vec<usize> = (0..l_p).map(|_| rng.gen_range(0..6usize)).collect();
            let word: Vec<usize> = base.iter().cycle().take(l_p * nu).copied().collect();
            let (p, n) = word_period(&word);
            // The true period may divide l_p if base is itself periodic.
            assert_eq!(word.len(), p * n);
            assert!(l_p % p == 0 || nu == 1);
            let rebuilt: Vec<usize> = word[..p].iter().cycle().take(word.len()).copied().collect();
            assert_eq!(rebuilt, word);
        }
    }

    #[test]
    fn trace_identity_on_chain_graphs() {
        let graphs: Vec<Graph<f64>> = vec![
            families::reference_two_bond_graph(),
            families::four_vertex_chain_graph([0.25, 0.45, 0.30], 0.5, -0.7).unwrap(),
        ];
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for g in &graphs {
            let cat = enumerate_orbits(g, 8).unwrap();
            for l in 1..=8 {
                for _ in 0..20 {
                    let k = rng.gen_range(0.1..40.0);
                    // trace_power errs when the two routes disagree.
                    trace_power(g, &cat, l, k).unwrap();
                }
            }
        }
    }

    #[test]
    fn amplitudes_bounded_by_one() {
        let g: Graph<f64> =
            families::four_vertex_chain_graph([0.25, 0.45, 0.30], 0.8, 0.6).unwrap();
        let cat = enumerate_orbits(&g, 8).unwrap();
        for class in cat.iter() {
            assert!(cmod(class.amplitude) <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn counts_nondecreasing_at_fixed_parity() {
        // Chain transition digraphs are bipartite: odd lengths are empty,
        // even lengths proliferate.
        let g: Graph<f64> =
            families::four_vertex_chain_graph([0.25, 0.45, 0.30], 0.8, 0.6).unwrap();
        let cat = enumerate_orbits(&g, 10).unwrap();
        let marked = |l: usize| -> usize {
            cat.classes(l).iter().map(|c| c.l_prime).sum()
        };
        for l in (2..=8).step_by(2) {
            assert!(marked(l + 2) >= marked(l), "l = {l}");
        }
        for l in (1..=9).step_by(2) {
            assert!(cat.classes(l).is_empty());
        }
    }

    #[test]
    fn cap_is_enforced() {
        let g: Graph<f64> =
            families::four_vertex_chain_graph([0.25, 0.45, 0.30], 0.8, 0.6).unwrap();
        assert!(matches!(
            enumerate_orbits_with_cap(&g, 12, 10.0),
            Err(Error::OrbitCapExceeded { .. })
        ));
    }

    #[test]
    fn cache_roundtrip() {
        let dir = std::env::temp_dir().join(format!("qgspectra-cache-{}", std::process::id()));
        std::env::set_var(CACHE_DIR_ENV, &dir);
        let g: Graph<f64> = families::reference_two_bond_graph();
        let a = enumerate_orbits_cached(&g, 6).unwrap();
        let b = enumerate_orbits_cached(&g, 6).unwrap();
        assert_eq!(a.by_length.len(), b.by_length.len());
        for (x, y) in a.iter().zip(b.iter()) {
            assert_eq!(x.word, y.word);
            assert_eq!(x.amplitude, y.amplitude);
            assert_eq!(x.action.to_bits(), y.action.to_bits());
        }
        std::env::remove_var(CACHE_DIR_ENV);
        let _ = std::fs::remove_dir_all(&dir);
    }
}
