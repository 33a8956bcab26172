//! Text format for graph configurations.
//!
//! ```text
//! # comment                       blank lines and #-comments are ignored
//! [vertices]
//! v1                              one vertex name per line
//! v2
//! v3
//!
//! [bonds]
//! # from  to  length  lambda
//! v1 v2 0.3 0.0
//! v2 v3 0.4949747468305833 0.0
//!
//! [scattering]
//! mode = chain_reflections        kirchhoff | chain_reflections | explicit
//! v2 0.17157                      payload, see below
//! ```
//!
//! Payloads by mode:
//!
//! * `kirchhoff` — optional boundary overrides, one `vertex dirichlet` or
//!   `vertex neumann` per line (degree-1 vertices only). All other
//!   vertices get the current-conserving beta-weighted amplitudes.
//! * `chain_reflections` — one `vertex r` per line for every interior
//!   vertex of a linear chain; the chain ends are hard walls. The chain is
//!   oriented starting from whichever degree-1 end was declared first, and
//!   `+r` reflects back toward that end.
//! * `explicit` — blocks introduced by `vertex NAME` followed by the rows
//!   of the unitary scattering matrix, one row per line as `re im` pairs.
//!   Rows are incoming directed bonds, columns outgoing, both ordered by
//!   bond declaration order.

use nalgebra::{Complex, DMatrix};

use crate::error::{Error, Result};
use crate::graph::{
    build_graph, BondSpec, Graph, GraphSpec, ScatteringSpec, VertexOverride,
};
use crate::num::{lit, Real};

/// Parse a graph specification from config text.
pub fn parse_graph_spec<T: Real>(text: &str) -> Result<GraphSpec<T>> {
    #[derive(PartialEq, Clone, Copy)]
    enum Section {
        None,
        Vertices,
        Bonds,
        Scattering,
    }

    let mut section = Section::None;
    let mut vertices: Vec<String> = Vec::new();
    let mut bonds: Vec<BondSpec<T>> = Vec::new();
    let mut mode: Option<String> = None;
    let mut payload: Vec<(usize, String)> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        match line {
            "[vertices]" => {
                section = Section::Vertices;
                continue;
            }
            "[bonds]" => {
                section = Section::Bonds;
                continue;
            }
            "[scattering]" => {
                section = Section::Scattering;
                continue;
            }
            _ => {}
        }
        match section {
            Section::None => {
                return Err(Error::ConfigParse {
                    line: line_no,
                    reason: "content before any [section] header".into(),
                })
            }
            Section::Vertices => {
                let mut toks = line.split_whitespace();
                let name = toks.next().unwrap().to_string();
                if toks.next().is_some() {
                    return Err(Error::ConfigParse {
                        line: line_no,
                        reason: "expected a single vertex name".into(),
                    });
                }
                if vertices.contains(&name) {
                    return Err(Error::ConfigParse {
                        line: line_no,
                        reason: format!("duplicate vertex {name}"),
                    });
                }
                vertices.push(name);
            }
            Section::Bonds => {
                let toks: Vec<&str> = line.split_whitespace().collect();
                if toks.len() != 4 {
                    return Err(Error::ConfigParse {
                        line: line_no,
                        reason: "bond lines are: from to length lambda".into(),
                    });
                }
                let length = parse_num::<T>(toks[2], line_no)?;
                let lambda = parse_num::<T>(toks[3], line_no)?;
                if toks[0] == toks[1] {
                    return Err(Error::ConfigParse {
                        line: line_no,
                        reason: "self-loop bonds are not supported".into(),
                    });
                }
                bonds.push(BondSpec {
                    from: toks[0].to_string(),
                    to: toks[1].to_string(),
                    length,
                    lambda,
                });
            }
            Section::Scattering => {
                if let Some(rest) = line.strip_prefix("mode") {
                    let rest = rest.trim_start();
                    let Some(value) = rest.strip_prefix('=') else {
                        return Err(Error::ConfigParse {
                            line: line_no,
                            reason: "expected mode = kirchhoff | chain_reflections | explicit"
                                .into(),
                        });
                    };
                    mode = Some(value.trim().to_string());
                } else {
                    payload.push((line_no, line.to_string()));
                }
            }
        }
    }

    if vertices.is_empty() {
        return Err(Error::ConfigSchema {
            reason: "missing [vertices] section".into(),
        });
    }
    if bonds.is_empty() {
        return Err(Error::ConfigSchema {
            reason: "missing [bonds] section".into(),
        });
    }
    let mode = mode.unwrap_or_else(|| "kirchhoff".to_string());
    let scattering = match mode.as_str() {
        "kirchhoff" => {
            let mut overrides = Vec::new();
            for (line_no, line) in &payload {
                let toks: Vec<&str> = line.split_whitespace().collect();
                if toks.len() != 2 {
                    return Err(Error::ConfigParse {
                        line: *line_no,
                        reason: "kirchhoff overrides are: vertex dirichlet|neumann".into(),
                    });
                }
                let ov = match toks[1] {
                    "dirichlet" => VertexOverride::Dirichlet,
                    "neumann" => VertexOverride::Neumann,
                    other => {
                        return Err(Error::ConfigParse {
                            line: *line_no,
                            reason: format!("unknown boundary condition {other}"),
                        })
                    }
                };
                overrides.push((toks[0].to_string(), ov));
            }
            ScatteringSpec::Kirchhoff { overrides }
        }
        "chain_reflections" => {
            let mut reflections = Vec::new();
            for (line_no, line) in &payload {
                let toks: Vec<&str> = line.split_whitespace().collect();
                if toks.len() != 2 {
                    return Err(Error::ConfigParse {
                        line: *line_no,
                        reason: "chain_reflections lines are: vertex r".into(),
                    });
                }
                reflections.push((toks[0].to_string(), parse_num::<T>(toks[1], *line_no)?));
            }
            ScatteringSpec::ChainReflections { reflections }
        }
        "explicit" => {
            let mut blocks: Vec<(String, Vec<Vec<Complex<T>>>)> = Vec::new();
            for (line_no, line) in &payload {
                if let Some(name) = line.strip_prefix("vertex ") {
                    blocks.push((name.trim().to_string(), Vec::new()));
                    continue;
                }
                let Some(block) = blocks.last_mut() else {
                    return Err(Error::ConfigParse {
                        line: *line_no,
                        reason: "matrix row before any `vertex NAME` line".into(),
                    });
                };
                let toks: Vec<&str> = line.split_whitespace().collect();
                if !toks.len().is_multiple_of(2) || toks.is_empty() {
                    return Err(Error::ConfigParse {
                        line: *line_no,
                        reason: "matrix rows are re im pairs".into(),
                    });
                }
                let mut row = Vec::with_capacity(toks.len() / 2);
                for pair in toks.chunks(2) {
                    row.push(Complex::new(
                        parse_num::<T>(pair[0], *line_no)?,
                        parse_num::<T>(pair[1], *line_no)?,
                    ));
                }
                block.1.push(row);
            }
            let blocks = blocks
                .into_iter()
                .map(|(name, rows)| {
                    let n = rows.len();
                    if rows.iter().any(|r| r.len() != n) {
                        return Err(Error::ConfigSchema {
                            reason: format!("scattering block for {name} is not square"),
                        });
                    }
                    let m = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
                    Ok((name, m))
                })
                .collect::<Result<Vec<_>>>()?;
            ScatteringSpec::Explicit { blocks }
        }
        other => {
            return Err(Error::ConfigSchema {
                reason: format!("unknown scattering mode {other}"),
            })
        }
    };

    Ok(GraphSpec {
        vertices,
        bonds,
        scattering,
    })
}

fn parse_num<T: Real>(tok: &str, line: usize) -> Result<T> {
    tok.parse::<f64>()
        .map(|v| lit(v))
        .map_err(|_| Error::ConfigParse {
            line,
            reason: format!("not a number: {tok}"),
        })
}

/// Read and build a graph from a config file.
pub fn load_graph<T: Real>(path: &std::path::Path) -> Result<Graph<T>> {
    let text = std::fs::read_to_string(path)?;
    build_graph(&parse_graph_spec(&text)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detpoly::graph_trigpoly;
    use crate::families;

    const BENCH_CONFIG: &str = "
# benchmark two-bond chain
[vertices]
v1
v2
v3

[bonds]
v1 v2 0.3                 0.0
v2 v3 0.4949747468305832  0.0

[scattering]
mode = chain_reflections
v2 0.17157287525380996
";

    #[test]
    fn chain_config_round_trips() {
        let g: Graph<f64> = build_graph(&parse_graph_spec(BENCH_CONFIG).unwrap()).unwrap();
        let reference: Graph<f64> = families::reference_two_bond_graph();
        assert_eq!(g.digest(), reference.digest());
    }

    #[test]
    fn kirchhoff_with_overrides() {
        let text = "
[vertices]
a
b
c
[bonds]
a b 1.0 0.0
b c 1.0 0.5
[scattering]
mode = kirchhoff
a dirichlet
c neumann
";
        let g: Graph<f64> = build_graph(&parse_graph_spec(text).unwrap()).unwrap();
        assert_eq!(g.n_bonds(), 2);
        let poly = graph_trigpoly(&g).unwrap().poly;
        assert!(poly.s0() > 0.0);
    }

    #[test]
    fn explicit_blocks_parse_and_validate() {
        let t = 0.985_171_431_009_416_f64; // sqrt(1 - r^2) for r = 0.17157...
        let text = format!(
            "
[vertices]
v1
v2
v3
[bonds]
v1 v2 0.3 0.0
v2 v3 0.4949747468305832 0.0
[scattering]
mode = explicit
vertex v1
-1.0 0.0
vertex v3
-1.0 0.0
vertex v2
0.17157287525380996 0.0 {t} 0.0
{t} 0.0 -0.17157287525380996 0.0
"
        );
        let g: Graph<f64> = build_graph(&parse_graph_spec(&text).unwrap()).unwrap();
        let red = graph_trigpoly(&g).unwrap();
        let reference = families::reference_two_bond_poly::<f64>();
        assert!((red.poly.terms()[0].a - reference.terms()[0].a).abs() < 1e-9);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let text = "
[vertices]
a
[bonds]
a b 1.0
";
        match parse_graph_spec::<f64>(text) {
            Err(Error::ConfigParse { line: 5, .. }) => {}
            other => panic!("expected line-5 parse error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_mode_rejected() {
        let text = "
[vertices]
a
b
[bonds]
a b 1.0 0.0
[scattering]
mode = magic
";
        assert!(matches!(
            parse_graph_spec::<f64>(text),
            Err(Error::ConfigSchema { .. })
        ));
    }

    #[test]
    fn self_loops_rejected() {
        let text = "
[vertices]
a
[bonds]
a a 1.0 0.0
";
        assert!(parse_graph_spec::<f64>(text).is_err());
    }
}
