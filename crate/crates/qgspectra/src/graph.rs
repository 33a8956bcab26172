//! Scaling quantum graphs and their bond-scattering matrices.
//!
//! Bonds carry scaling potentials `U = lambda * E`, so the wavenumber on a
//! bond is `beta * k` with `beta = sqrt(1 - lambda)` and the vertex
//! amplitudes are k-independent. The directed-bond scattering matrix is
//!
//! ```text
//! S_IJ(k) = t_IJ * exp(i * beta_I * L_I * k)
//! ```
//!
//! where `t_IJ` is the amplitude for the transition from directed bond `I`
//! into directed bond `J` (nonzero only when `I` terminates where `J`
//! starts). `det(1 - S(k)) = 0` is the spectral condition; determinants and
//! traces are invariant under the row/column convention chosen here.

use nalgebra::{Complex, DMatrix};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::num::{lit, to_f64, unit_phasor, Real};

/// Unitarity tolerance for user-supplied vertex matrices.
pub const USER_UNITARITY_TOL: f64 = 1e-10;

/// Unitarity tolerance for assembled matrices (invariant check).
pub const ASSEMBLED_UNITARITY_TOL: f64 = 1e-12;

/// An undirected bond with its scaling dressing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bond<T> {
    /// Index of the originating vertex (for the forward direction).
    pub from: usize,
    /// Index of the terminating vertex.
    pub to: usize,
    /// Bond length `L > 0` (dimensionless units).
    pub length: T,
    /// Scaling factor of the bond potential `U = lambda * E`; `lambda < 1`.
    pub lambda: T,
    /// `beta = sqrt(1 - lambda) > 0`.
    pub beta: T,
}

impl<T: Real> Bond<T> {
    /// Reduced action of one traversal, `beta * L`.
    pub fn action(&self) -> T {
        self.beta * self.length
    }
}

/// A directed copy of a bond. Bond `b` owns directed indices `2b` (forward:
/// `from -> to`) and `2b + 1` (backward). The time-reverse flips the last
/// bit, so `reversed(reversed(i)) == i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DirectedBond(pub usize);

impl DirectedBond {
    /// Underlying undirected bond index.
    pub fn bond(self) -> usize {
        self.0 / 2
    }

    /// Whether this is the forward copy.
    pub fn is_forward(self) -> bool {
        self.0.is_multiple_of(2)
    }

    /// The time-reversed directed bond.
    pub fn reversed(self) -> DirectedBond {
        DirectedBond(self.0 ^ 1)
    }
}

/// Vertex scattering amplitudes restricted to the incident directed bonds.
///
/// `amps[(i, j)]` is the amplitude for the transition from `incoming[i]`
/// into `outgoing[j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexScattering<T> {
    pub vertex: usize,
    pub incoming: Vec<usize>,
    pub outgoing: Vec<usize>,
    pub amps: DMatrix<Complex<T>>,
}

/// Mapping of a taut-string network onto the graph's eigenproblem:
/// `E = omega^2 * mu0 / T` with `mu0 = 1` in dimensionless units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StringMapping<T> {
    pub tension: T,
}

impl<T: Real> StringMapping<T> {
    /// Angular frequency corresponding to momentum `k`.
    pub fn omega(&self, k: T) -> T {
        k * self.tension.sqrt()
    }
}

/// An immutable scaling quantum graph.
///
/// All spectral operations are pure functions of `(Graph, k)` and safe to
/// evaluate concurrently.
#[derive(Debug, Clone)]
pub struct Graph<T> {
    vertex_names: Vec<String>,
    bonds: Vec<Bond<T>>,
    scattering: Vec<VertexScattering<T>>,
    /// Dense 2N_B x 2N_B transition-amplitude matrix (row = from, col = to).
    t: DMatrix<Complex<T>>,
    /// Out-adjacency: for each directed bond, its nonzero transitions.
    transitions: Vec<Vec<(usize, Complex<T>)>>,
    s0: T,
    string_map: Option<StringMapping<T>>,
}

/// How vertex amplitudes are specified.
#[derive(Debug, Clone)]
pub enum ScatteringSpec<T> {
    /// Current-conserving default: `t_IJ = 2*sqrt(b_I*b_J)/sum(b) - delta_{J,I'}`,
    /// with optional per-vertex boundary overrides.
    Kirchhoff { overrides: Vec<(String, VertexOverride)> },
    /// Linear chain given by interior reflection coefficients; ends are
    /// hard walls (reflection -1).
    ChainReflections { reflections: Vec<(String, T)> },
    /// Explicit per-vertex unitary blocks. Rows are incoming directed
    /// bonds, columns outgoing, both ordered by bond declaration order.
    Explicit { blocks: Vec<(String, DMatrix<Complex<T>>)> },
}

/// Boundary condition override for a degree-1 vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VertexOverride {
    /// Reflection -1.
    Dirichlet,
    /// Reflection +1.
    Neumann,
}

/// Bond description inside a [`GraphSpec`].
#[derive(Debug, Clone)]
pub struct BondSpec<T> {
    pub from: String,
    pub to: String,
    pub length: T,
    pub lambda: T,
}

/// Validated-on-build description of a graph.
#[derive(Debug, Clone)]
pub struct GraphSpec<T> {
    pub vertices: Vec<String>,
    pub bonds: Vec<BondSpec<T>>,
    pub scattering: ScatteringSpec<T>,
}

/// Build and validate a graph from its specification.
pub fn build_graph<T: Real>(spec: &GraphSpec<T>) -> Result<Graph<T>> {
    let vertex_names = spec.vertices.clone();
    let vertex_index = |name: &str| -> Result<usize> {
        vertex_names
            .iter()
            .position(|v| v == name)
            .ok_or_else(|| Error::DanglingBond { vertex: name.to_string() })
    };

    let mut bonds = Vec::with_capacity(spec.bonds.len());
    for (i, b) in spec.bonds.iter().enumerate() {
        if b.length <= T::zero() {
            return Err(Error::NonPositiveLength {
                bond: i,
                value: to_f64(b.length),
            });
        }
        if b.lambda >= T::one() {
            return Err(Error::TunnelingExcluded {
                bond: i,
                value: to_f64(b.lambda),
            });
        }
        bonds.push(Bond {
            from: vertex_index(&b.from)?,
            to: vertex_index(&b.to)?,
            length: b.length,
            lambda: b.lambda,
            beta: (T::one() - b.lambda).sqrt(),
        });
    }

    let n_vertices = vertex_names.len();
    let mut incoming: Vec<Vec<usize>> = vec![Vec::new(); n_vertices];
    let mut outgoing: Vec<Vec<usize>> = vec![Vec::new(); n_vertices];
    for (b, bond) in bonds.iter().enumerate() {
        // Forward copy 2b runs from -> to; backward 2b+1 runs to -> from.
        outgoing[bond.from].push(2 * b);
        incoming[bond.to].push(2 * b);
        outgoing[bond.to].push(2 * b + 1);
        incoming[bond.from].push(2 * b + 1);
    }

    let mut scattering = Vec::new();
    match &spec.scattering {
        ScatteringSpec::Kirchhoff { overrides } => {
            let mut override_map = std::collections::HashMap::new();
            for (name, ov) in overrides {
                override_map.insert(vertex_index(name)?, *ov);
            }
            for v in 0..n_vertices {
                if incoming[v].is_empty() {
                    continue;
                }
                let block = match override_map.get(&v) {
                    Some(ov) => {
                        if incoming[v].len() != 1 {
                            return Err(Error::ConfigSchema {
                                reason: format!(
                                    "boundary override on vertex {} of degree {}",
                                    vertex_names[v],
                                    incoming[v].len()
                                ),
                            });
                        }
                        let r = match ov {
                            VertexOverride::Dirichlet => -T::one(),
                            VertexOverride::Neumann => T::one(),
                        };
                        DMatrix::from_element(1, 1, Complex::new(r, T::zero()))
                    }
                    None => kirchhoff_block(&bonds, &incoming[v], &outgoing[v]),
                };
                scattering.push(VertexScattering {
                    vertex: v,
                    incoming: incoming[v].clone(),
                    outgoing: outgoing[v].clone(),
                    amps: block,
                });
            }
        }
        ScatteringSpec::ChainReflections { reflections } => {
            let order = chain_order(n_vertices, &bonds)?;
            let mut refl_map = std::collections::HashMap::new();
            for (name, r) in reflections {
                refl_map.insert(vertex_index(name)?, *r);
            }
            scattering = chain_scattering(&vertex_names, &bonds, &incoming, &outgoing, &order, &refl_map)?;
        }
        ScatteringSpec::Explicit { blocks } => {
            for (name, amps) in blocks {
                let v = vertex_index(name)?;
                let deg = incoming[v].len();
                if amps.nrows() != deg || amps.ncols() != deg {
                    return Err(Error::ConfigSchema {
                        reason: format!(
                            "scattering block for vertex {name} is {}x{}, expected {deg}x{deg}",
                            amps.nrows(),
                            amps.ncols()
                        ),
                    });
                }
                check_unitary(amps, USER_UNITARITY_TOL).map_err(|deviation| {
                    Error::NonUnitaryScattering {
                        vertex: name.clone(),
                        deviation,
                        tolerance: USER_UNITARITY_TOL,
                    }
                })?;
                scattering.push(VertexScattering {
                    vertex: v,
                    incoming: incoming[v].clone(),
                    outgoing: outgoing[v].clone(),
                    amps: amps.clone(),
                });
            }
            let covered: std::collections::HashSet<usize> =
                scattering.iter().map(|s| s.vertex).collect();
            for v in 0..n_vertices {
                if !incoming[v].is_empty() && !covered.contains(&v) {
                    return Err(Error::ConfigSchema {
                        reason: format!("vertex {} has no scattering block", vertex_names[v]),
                    });
                }
            }
        }
    }

    Graph::assemble(vertex_names, bonds, scattering, None)
}

/// Ingest a clamped taut string with piecewise-constant density.
///
/// Each segment `(length, eps)` becomes a bond with `beta = sqrt(eps)`
/// (equivalently `lambda = 1 - eps`); interior vertices scatter by the
/// current-conserving default, which reduces to the Fresnel amplitudes of
/// an impedance step, and the clamped ends reflect with -1. The eigenvalue
/// map `E = omega^2 * mu0 / T` (with `mu0 = 1`) is recorded on the graph.
pub fn from_string_network<T: Real>(segments: &[(T, T)], tension: T) -> Result<Graph<T>> {
    if tension <= T::zero() {
        return Err(Error::NonPositiveStringParameter {
            what: "tension",
            value: to_f64(tension),
        });
    }
    for &(length, eps) in segments {
        if eps <= T::zero() {
            return Err(Error::NonPositiveStringParameter {
                what: "density",
                value: to_f64(eps),
            });
        }
        if length <= T::zero() {
            return Err(Error::NonPositiveStringParameter {
                what: "segment length",
                value: to_f64(length),
            });
        }
    }
    let n = segments.len();
    let vertices: Vec<String> = (0..=n).map(|i| format!("v{i}")).collect();
    let bonds: Vec<BondSpec<T>> = segments
        .iter()
        .enumerate()
        .map(|(i, &(length, eps))| BondSpec {
            from: vertices[i].clone(),
            to: vertices[i + 1].clone(),
            length,
            lambda: T::one() - eps,
        })
        .collect();
    let overrides = vec![
        (vertices[0].clone(), VertexOverride::Dirichlet),
        (vertices[n].clone(), VertexOverride::Dirichlet),
    ];
    let spec = GraphSpec {
        vertices,
        bonds,
        scattering: ScatteringSpec::Kirchhoff { overrides },
    };
    let mut graph = build_graph(&spec)?;
    graph.string_map = Some(StringMapping { tension });
    Ok(graph)
}

impl<T: Real> Graph<T> {
    fn assemble(
        vertex_names: Vec<String>,
        bonds: Vec<Bond<T>>,
        scattering: Vec<VertexScattering<T>>,
        string_map: Option<StringMapping<T>>,
    ) -> Result<Self> {
        let n_dir = 2 * bonds.len();
        let mut t = DMatrix::from_element(n_dir, n_dir, Complex::new(T::zero(), T::zero()));
        for block in &scattering {
            for (i, &inc) in block.incoming.iter().enumerate() {
                for (j, &out) in block.outgoing.iter().enumerate() {
                    t[(inc, out)] += block.amps[(i, j)];
                }
            }
        }
        check_unitary(&t, ASSEMBLED_UNITARITY_TOL).map_err(|deviation| {
            Error::NonUnitaryScattering {
                vertex: "<assembled>".into(),
                deviation,
                tolerance: ASSEMBLED_UNITARITY_TOL,
            }
        })?;
        let transitions = (0..n_dir)
            .map(|i| {
                (0..n_dir)
                    .filter(|&j| {
                        let z = t[(i, j)];
                        z.re != T::zero() || z.im != T::zero()
                    })
                    .map(|j| (j, t[(i, j)]))
                    .collect()
            })
            .collect();
        let two = lit::<T>(2.0);
        let s0 = bonds.iter().fold(T::zero(), |acc, b| acc + b.action() * two) / two;
        Ok(Self {
            vertex_names,
            bonds,
            scattering,
            t,
            transitions,
            s0,
            string_map,
        })
    }

    /// Number of undirected bonds `N_B`.
    pub fn n_bonds(&self) -> usize {
        self.bonds.len()
    }

    /// Number of directed bonds `2 N_B`.
    pub fn n_directed(&self) -> usize {
        2 * self.bonds.len()
    }

    /// Number of vertices `N_V`.
    pub fn n_vertices(&self) -> usize {
        self.vertex_names.len()
    }

    /// Vertex names in declaration order.
    pub fn vertex_names(&self) -> &[String] {
        &self.vertex_names
    }

    /// Bonds in declaration order.
    pub fn bonds(&self) -> &[Bond<T>] {
        &self.bonds
    }

    /// Per-vertex scattering blocks.
    pub fn scattering(&self) -> &[VertexScattering<T>] {
        &self.scattering
    }

    /// Total reduced action `S0 = (1/2) * sum_I L_I * beta_I` over directed
    /// bonds (each undirected bond counted twice, halved).
    pub fn s0(&self) -> T {
        self.s0
    }

    /// The recorded string-network eigenvalue map, if any.
    pub fn string_map(&self) -> Option<StringMapping<T>> {
        self.string_map
    }

    /// Reduced action `beta_I * L_I` of a directed bond.
    pub fn directed_action(&self, i: usize) -> T {
        self.bonds[i / 2].action()
    }

    /// Dense transition-amplitude matrix (row = from, column = to).
    pub fn t_matrix(&self) -> &DMatrix<Complex<T>> {
        &self.t
    }

    /// Nonzero transitions out of directed bond `i`.
    pub fn transitions_from(&self, i: usize) -> &[(usize, Complex<T>)] {
        &self.transitions[i]
    }

    /// The unitary bond-scattering matrix `S(k)`.
    pub fn s_matrix(&self, k: T) -> Result<DMatrix<Complex<T>>> {
        if k <= T::zero() {
            return Err(Error::NonPositiveMomentum);
        }
        let n = self.n_directed();
        let mut s = self.t.clone();
        for i in 0..n {
            let phase = unit_phasor(self.directed_action(i) * k);
            for j in 0..n {
                s[(i, j)] *= phase;
            }
        }
        Ok(s)
    }

    /// Numeric spectral determinant `det(1 - S(k))`; reference value for
    /// the symbolic expansion.
    pub fn numeric_delta(&self, k: T) -> Result<Complex<T>> {
        let s = self.s_matrix(k)?;
        let n = self.n_directed();
        let mut m = -s;
        for i in 0..n {
            m[(i, i)] += Complex::new(T::one(), T::zero());
        }
        Ok(m.determinant())
    }

    /// Stable content digest for caching (bond data and amplitudes).
    pub fn digest(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update((self.vertex_names.len() as u64).to_le_bytes());
        for b in &self.bonds {
            hasher.update((b.from as u64).to_le_bytes());
            hasher.update((b.to as u64).to_le_bytes());
            hasher.update(to_f64(b.length).to_bits().to_le_bytes());
            hasher.update(to_f64(b.lambda).to_bits().to_le_bytes());
        }
        for i in 0..self.n_directed() {
            for j in 0..self.n_directed() {
                let z = self.t[(i, j)];
                hasher.update(to_f64(z.re).to_bits().to_le_bytes());
                hasher.update(to_f64(z.im).to_bits().to_le_bytes());
            }
        }
        format!("{:x}", hasher.finalize())
    }
}

/// `t_IJ = 2*sqrt(beta_I * beta_J) / sum(beta) - delta_{J, I'}` on the bonds
/// incident to one vertex. A rank-one update of a reflection, hence
/// unitary; reduces to the `2/v - delta` rule for equal betas, and to
/// reflection +1 at degree-1 vertices.
fn kirchhoff_block<T: Real>(
    bonds: &[Bond<T>],
    incoming: &[usize],
    outgoing: &[usize],
) -> DMatrix<Complex<T>> {
    let deg = incoming.len();
    let beta_sum: T = incoming
        .iter()
        .fold(T::zero(), |acc, &i| acc + bonds[i / 2].beta);
    let two = lit::<T>(2.0);
    DMatrix::from_fn(deg, deg, |i, j| {
        let bi = bonds[incoming[i] / 2].beta;
        let bj = bonds[outgoing[j] / 2].beta;
        let mut v = two * (bi * bj).sqrt() / beta_sum;
        if outgoing[j] == (incoming[i] ^ 1) {
            v -= T::one();
        }
        Complex::new(v, T::zero())
    })
}

/// Order the vertices of a linear chain, starting from the degree-1 end
/// that was declared first.
fn chain_order<T: Real>(n_vertices: usize, bonds: &[Bond<T>]) -> Result<Vec<usize>> {
    let mut adjacency: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n_vertices];
    for (b, bond) in bonds.iter().enumerate() {
        adjacency[bond.from].push((bond.to, b));
        adjacency[bond.to].push((bond.from, b));
    }
    let ends: Vec<usize> = (0..n_vertices)
        .filter(|&v| adjacency[v].len() == 1)
        .collect();
    let chain_ok = ends.len() == 2 && adjacency.iter().all(|a| a.len() <= 2) && !bonds.is_empty();
    if !chain_ok {
        return Err(Error::ConfigSchema {
            reason: "chain_reflections requires a linear chain (two degree-1 ends, interior degree 2)".into(),
        });
    }
    let mut order = vec![ends[0]];
    let mut prev = usize::MAX;
    let mut cur = ends[0];
    while order.len() < n_vertices {
        let next = adjacency[cur]
            .iter()
            .map(|&(v, _)| v)
            .find(|&v| v != prev)
            .ok_or(Error::ConfigSchema {
                reason: "disconnected chain".into(),
            })?;
        order.push(next);
        prev = cur;
        cur = next;
    }
    Ok(order)
}

/// Interior blocks `[[r, t], [t, -r]]` with `t = sqrt(1 - r^2)`; `+r` is the
/// reflection back toward the start of the chain. Ends reflect with -1.
fn chain_scattering<T: Real>(
    vertex_names: &[String],
    bonds: &[Bond<T>],
    incoming: &[Vec<usize>],
    outgoing: &[Vec<usize>],
    order: &[usize],
    reflections: &std::collections::HashMap<usize, T>,
) -> Result<Vec<VertexScattering<T>>> {
    let zero = Complex::new(T::zero(), T::zero());
    let position: std::collections::HashMap<usize, usize> =
        order.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut scattering = Vec::new();
    for (pos, &v) in order.iter().enumerate() {
        let deg = incoming[v].len();
        if pos == 0 || pos + 1 == order.len() {
            scattering.push(VertexScattering {
                vertex: v,
                incoming: incoming[v].clone(),
                outgoing: outgoing[v].clone(),
                amps: DMatrix::from_element(1, 1, Complex::new(-T::one(), T::zero())),
            });
            continue;
        }
        let r = *reflections.get(&v).ok_or_else(|| Error::ConfigSchema {
            reason: format!("missing reflection coefficient for interior vertex {}", vertex_names[v]),
        })?;
        if r.abs() > T::one() {
            return Err(Error::ReflectionOutOfRange { r: to_f64(r) });
        }
        let t = (T::one() - r * r).sqrt();
        // Identify which incident bond leads toward the chain start.
        let toward_start = |dir: usize| -> bool {
            let bond = &bonds[dir / 2];
            let other = if bond.from == v { bond.to } else { bond.from };
            position[&other] < pos
        };
        let mut amps = DMatrix::from_element(deg, deg, zero);
        for (i, &inc) in incoming[v].iter().enumerate() {
            // True when the particle arrived from the start side.
            let from_start = toward_start(inc);
            for (j, &out) in outgoing[v].iter().enumerate() {
                let to_start = toward_start(out);
                let amp = match (from_start, to_start) {
                    (true, true) => r,
                    (false, false) => -r,
                    _ => t,
                };
                amps[(i, j)] = Complex::new(amp, T::zero());
            }
        }
        scattering.push(VertexScattering {
            vertex: v,
            incoming: incoming[v].clone(),
            outgoing: outgoing[v].clone(),
            amps,
        });
    }
    Ok(scattering)
}

/// Max-norm deviation of `M^dagger * M` from the identity; `Err(deviation)`
/// when it exceeds `tol`.
fn check_unitary<T: Real>(m: &DMatrix<Complex<T>>, tol: f64) -> std::result::Result<(), f64> {
    let deviation = unitarity_deviation(m);
    if to_f64(deviation) > tol {
        Err(to_f64(deviation))
    } else {
        Ok(())
    }
}

/// Max-norm of `M^dagger M - 1`.
pub fn unitarity_deviation<T: Real>(m: &DMatrix<Complex<T>>) -> T {
    let n = m.nrows();
    let prod = m.adjoint() * m;
    let mut max = T::zero();
    for i in 0..n {
        for j in 0..n {
            let mut z = prod[(i, j)];
            if i == j {
                z -= Complex::new(T::one(), T::zero());
            }
            let mag = crate::num::cmod(z);
            if mag > max {
                max = mag;
            }
        }
    }
    max
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::families;

    #[test]
    fn single_bond_box() {
        let spec = GraphSpec::<f64> {
            vertices: vec!["a".into(), "b".into()],
            bonds: vec![BondSpec { from: "a".into(), to: "b".into(), length: 1.0, lambda: 0.0 }],
            scattering: ScatteringSpec::Kirchhoff {
                overrides: vec![
                    ("a".into(), VertexOverride::Dirichlet),
                    ("b".into(), VertexOverride::Dirichlet),
                ],
            },
        };
        let g = build_graph(&spec).unwrap();
        assert_eq!(g.n_directed(), 2);
        assert!((g.s0() - 1.0).abs() < 1e-15);
        // S off-diagonal entries are -exp(i*beta*L*k); at k = pi that is +1.
        let s = g.s_matrix(std::f64::consts::PI).unwrap();
        assert!((s[(0, 1)].re - 1.0).abs() < 1e-12 && s[(0, 1)].im.abs() < 1e-12);
        assert!((s[(1, 0)].re - 1.0).abs() < 1e-12 && s[(1, 0)].im.abs() < 1e-12);
        assert!(s[(0, 0)].norm_sqr() < 1e-24 && s[(1, 1)].norm_sqr() < 1e-24);
    }

    #[test]
    fn two_bond_total_action() {
        // Two unit bonds: S0 = L1*b1 + L2*b2 = 2.
        let g: Graph<f64> = families::two_bond_graph(1.0, 1.0, 0.0).unwrap();
        assert!((g.s0() - 2.0).abs() < 1e-15);
        // Section constants used throughout the test suites.
        let g: Graph<f64> = families::reference_two_bond_graph();
        assert!((g.s0() - 0.794_974_746_830_583_3).abs() < 1e-12);
    }

    #[test]
    fn s_matrix_unitary_for_random_k() {
        let g: Graph<f64> = families::four_vertex_chain_graph([0.25, 0.45, 0.30], 0.5, 0.5).unwrap();
        for &k in &[0.1, 1.0, 7.3, 55.5] {
            let s = g.s_matrix(k).unwrap();
            assert!(unitarity_deviation(&s) < 1e-12, "k = {k}");
        }
    }

    #[test]
    fn nonpositive_k_rejected() {
        let g: Graph<f64> = families::reference_two_bond_graph();
        assert!(matches!(g.s_matrix(0.0), Err(Error::NonPositiveMomentum)));
        assert!(matches!(g.s_matrix(-1.0), Err(Error::NonPositiveMomentum)));
    }

    #[test]
    fn invalid_bonds_rejected() {
        let mk = |length: f64, lambda: f64| GraphSpec::<f64> {
            vertices: vec!["a".into(), "b".into()],
            bonds: vec![BondSpec { from: "a".into(), to: "b".into(), length, lambda }],
            scattering: ScatteringSpec::Kirchhoff { overrides: vec![] },
        };
        assert!(matches!(build_graph(&mk(0.0, 0.0)), Err(Error::NonPositiveLength { .. })));
        assert!(matches!(build_graph(&mk(1.0, 1.0)), Err(Error::TunnelingExcluded { .. })));
        assert!(matches!(build_graph(&mk(1.0, 1.5)), Err(Error::TunnelingExcluded { .. })));
    }

    #[test]
    fn dangling_bond_rejected() {
        let spec = GraphSpec::<f64> {
            vertices: vec!["a".into()],
            bonds: vec![BondSpec { from: "a".into(), to: "zz".into(), length: 1.0, lambda: 0.0 }],
            scattering: ScatteringSpec::Kirchhoff { overrides: vec![] },
        };
        assert!(matches!(build_graph(&spec), Err(Error::DanglingBond { .. })));
    }

    #[test]
    fn non_unitary_user_matrix_rejected() {
        let spec = GraphSpec::<f64> {
            vertices: vec!["a".into(), "b".into()],
            bonds: vec![BondSpec { from: "a".into(), to: "b".into(), length: 1.0, lambda: 0.0 }],
            scattering: ScatteringSpec::Explicit {
                blocks: vec![
                    ("a".into(), DMatrix::from_element(1, 1, Complex::new(1.3, 0.0))),
                    ("b".into(), DMatrix::from_element(1, 1, Complex::new(-1.0, 0.0))),
                ],
            },
        };
        assert!(matches!(build_graph(&spec), Err(Error::NonUnitaryScattering { .. })));
    }

    #[test]
    fn kirchhoff_reduces_to_standard_rule_for_equal_betas() {
        // Degree-3 star with equal betas: t = 2/3 - delta.
        let spec = GraphSpec::<f64> {
            vertices: vec!["c".into(), "l1".into(), "l2".into(), "l3".into()],
            bonds: vec![
                BondSpec { from: "c".into(), to: "l1".into(), length: 0.7, lambda: 0.0 },
                BondSpec { from: "c".into(), to: "l2".into(), length: 0.9, lambda: 0.0 },
                BondSpec { from: "c".into(), to: "l3".into(), length: 1.3, lambda: 0.0 },
            ],
            scattering: ScatteringSpec::Kirchhoff { overrides: vec![] },
        };
        let g = build_graph(&spec).unwrap();
        let center = g.scattering().iter().find(|s| s.vertex == 0).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let expect = if center.outgoing[j] == (center.incoming[i] ^ 1) {
                    2.0 / 3.0 - 1.0
                } else {
                    2.0 / 3.0
                };
                assert!((center.amps[(i, j)].re - expect).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn string_network_uniform_density_is_transparent() {
        // One uniform segment vs the same string cut into four: identical S0
        // and identical spectral determinants (interior vertices transmit
        // perfectly).
        let one: Graph<f64> = from_string_network(&[(1.0, 1.0)], 1.0).unwrap();
        let four = from_string_network(
            &[(0.25, 1.0), (0.25, 1.0), (0.25, 1.0), (0.25, 1.0)],
            1.0,
        )
        .unwrap();
        assert!((one.s0() - four.s0()).abs() < 1e-15);
        for &k in &[0.9, 2.2, 7.7] {
            let d1 = one.numeric_delta(k).unwrap();
            let d4 = four.numeric_delta(k).unwrap();
            assert!((d1 - d4).norm_sqr().sqrt() < 1e-10, "k = {k}");
        }
    }

    #[test]
    fn det_s_phase_is_twice_the_total_action_phase() {
        // det S(k) = det(t) * e^{2i S0 k}, so its argument advances as
        // 2*(S0*k - pi*g0) up to multiples of 2pi.
        let g: Graph<f64> = families::reference_two_bond_graph();
        let gamma0 = crate::detpoly::graph_gamma0(&g);
        for &k in &[0.37, 1.0, 2.9] {
            let det = g.s_matrix(k).unwrap().determinant();
            let expect = 2.0 * (g.s0() * k - std::f64::consts::PI * gamma0);
            let diff = crate::num::cyclic_distance(
                crate::num::carg(det),
                expect,
                2.0 * std::f64::consts::PI,
            );
            assert!(diff < 1e-10, "k = {k}: {diff}");
        }
    }

    #[test]
    fn uniform_string_has_box_spectrum() {
        // One clamped uniform segment: k_n = n*pi.
        let g: Graph<f64> = from_string_network(&[(1.0, 1.0)], 1.0).unwrap();
        let poly = crate::detpoly::graph_trigpoly(&g).unwrap().poly;
        let h = crate::bootstrap::descend_hierarchy(&poly, 1, 5).unwrap();
        for r in &h.roots {
            let expect = r.n as f64 * std::f64::consts::PI;
            assert!((r.k - expect).abs() < 1e-12, "n = {}: {}", r.n, r.k);
        }
    }

    #[test]
    fn string_network_rejects_bad_parameters() {
        assert!(from_string_network::<f64>(&[(1.0, 0.0)], 1.0).is_err());
        assert!(from_string_network::<f64>(&[(1.0, 1.0)], 0.0).is_err());
        assert!(from_string_network::<f64>(&[(0.0, 1.0)], 1.0).is_err());
    }

    #[test]
    fn digest_is_stable_and_parameter_sensitive() {
        let a: Graph<f64> = families::reference_two_bond_graph();
        let b: Graph<f64> = families::reference_two_bond_graph();
        assert_eq!(a.digest(), b.digest());
        let c: Graph<f64> = families::two_bond_graph(0.3, 0.5, 0.17).unwrap();
        assert_ne!(a.digest(), c.digest());
    }
}
