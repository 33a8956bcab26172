//! Command-line front end: graph/polynomial ingestion, spectral solvers,
//! and CSV/JSON emission.
//!
//! Exit codes: 0 on success, 2 on validation errors (the message names the
//! violated invariant), 1 on unexpected failures. Data files contain no
//! timestamps; run metadata goes to a separate `.manifest.json` next to
//! the first output.

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use sha2::{Digest, Sha256};

use qgspectra::bootstrap::{
    descend_hierarchy, determine_mu, oracle_scan, solve_range, Method,
};
use qgspectra::detpoly::graph_trigpoly;
use qgspectra::families::FourVertexChain;
use qgspectra::lagrange::{two_bond_partials, two_bond_root_order2};
use qgspectra::orbits::enumerate_orbits_cached;
use qgspectra::spectral::{
    regular_energy_expansion_with, root_by_orbit_expansion_with, root_by_prime_expansion_with,
    root_by_staircase_integral_with, Staircase,
};
use qgspectra::stats::{
    regime_diagram, spacing_bound_check, Normalization, SpacingSample,
};
use qgspectra::trigpoly::TrigPolyFile;
use qgspectra::{Graph64, TrigPoly64, SCHEMA_VERSION};

#[derive(Parser)]
#[command(name = "qgspectra", version, about = "Exact spectra of scaling quantum graphs")]
struct Cli {
    /// Cap on worker threads (default: available cores). Output does not
    /// depend on the thread count.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Seed for randomized drivers (selftest).
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve roots n = a..b of the spectral equation.
    Solve(SolveArgs),
    /// Dense-scan oracle roots on a momentum window.
    Oracle(OracleArgs),
    /// Staircase-integral and periodic-orbit expansions per root.
    Expand(ExpandArgs),
    /// Lagrange-inversion roots of the two-bond implicit equation.
    Lagrange(LagrangeArgs),
    /// Enumerate periodic orbits.
    Orbits(OrbitsArgs),
    /// Nearest-neighbor spacing statistics.
    Stats(StatsArgs),
    /// Irregularity-degree regime diagram of a parameter family.
    Diagram(DiagramArgs),
    /// Print {S0, gamma0, N_Gamma, alpha, m, m_bound} for an input.
    Classify(ClassifyArgs),
    /// Randomized self-checks (seeded, deterministic).
    Selftest,
}

#[derive(Args)]
struct InputArgs {
    /// Graph config file.
    #[arg(long, value_name = "PATH", conflicts_with = "trigpoly")]
    graph: Option<PathBuf>,

    /// Reduced-polynomial JSON, bypassing graph expansion.
    #[arg(long, value_name = "PATH")]
    trigpoly: Option<PathBuf>,

    /// Write the reduced polynomial JSON alongside the main output.
    #[arg(long, value_name = "PATH")]
    dump_trigpoly: Option<PathBuf>,
}

impl InputArgs {
    fn load(&self) -> anyhow::Result<(TrigPoly64, Option<Graph64>)> {
        let (poly, graph) = match (&self.graph, &self.trigpoly) {
            (Some(path), None) => {
                let graph: Graph64 = qgspectra::config::load_graph(path)?;
                let poly = graph_trigpoly(&graph)?.poly;
                (poly, Some(graph))
            }
            (None, Some(path)) => (TrigPolyFile::read(path)?.into_poly()?, None),
            _ => bail!("provide exactly one of --graph or --trigpoly"),
        };
        if let Some(dump) = &self.dump_trigpoly {
            poly.to_file().write(dump)?;
        }
        Ok((poly, graph))
    }

    fn paths(&self) -> Vec<PathBuf> {
        self.graph.iter().chain(self.trigpoly.iter()).cloned().collect()
    }
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Inclusive root index range, e.g. 1..100.
    #[arg(long, value_name = "A..B")]
    n: String,
    #[arg(long, value_enum, default_value_t = MethodArg::Bootstrap)]
    method: MethodArg,
    #[arg(long, value_name = "CSV")]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Bootstrap,
    Oracle,
    #[value(name = "fixed-point")]
    FixedPoint,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Bootstrap => Method::Bootstrap,
            MethodArg::Oracle => Method::Oracle,
            MethodArg::FixedPoint => Method::FixedPoint,
        }
    }
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, default_value_t = 1e-9)]
    kmin: f64,
    #[arg(long)]
    kmax: f64,
    /// Samples per mean spacing (minimum 100).
    #[arg(long, default_value_t = 256)]
    samples: usize,
    #[arg(long, value_name = "CSV")]
    out: PathBuf,
}

#[derive(Args)]
struct ExpandArgs {
    /// Graph config file (the expansions need the scattering matrix).
    #[arg(long, value_name = "PATH")]
    graph: PathBuf,
    #[arg(long, value_name = "A..B")]
    n: String,
    #[arg(long, default_value_t = 12)]
    lmax: usize,
    #[arg(long, value_enum)]
    formula: FormulaArg,
    #[arg(long, value_name = "CSV")]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormulaArg {
    Staircase,
    Orbit,
    Prime,
    Energy,
}

#[derive(Args)]
struct LagrangeArgs {
    #[arg(long, allow_hyphen_values = true)]
    s0: f64,
    #[arg(long, allow_hyphen_values = true)]
    s1: f64,
    #[arg(long, allow_hyphen_values = true)]
    r: f64,
    #[arg(long, value_name = "A..B")]
    n: String,
    #[arg(long, default_value_t = 2)]
    order: usize,
    #[arg(long, value_name = "CSV")]
    out: PathBuf,
}

#[derive(Args)]
struct OrbitsArgs {
    #[arg(long, value_name = "PATH")]
    graph: PathBuf,
    #[arg(long)]
    lmax: usize,
    #[arg(long, value_name = "CSV")]
    out: PathBuf,
}

#[derive(Args)]
struct StatsArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Number of roots to solve (first N).
    #[arg(long, default_value_t = 10_000)]
    roots: i64,
    #[arg(long, value_enum, default_value_t = ModeArg::Raw)]
    mode: ModeArg,
    #[arg(long, default_value_t = 100)]
    bins: usize,
    /// Spacing CSV.
    #[arg(long, value_name = "CSV")]
    out: PathBuf,
    /// Histogram CSV (defaults to OUT with a .hist.csv suffix).
    #[arg(long, value_name = "CSV")]
    hist_out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Raw,
    #[value(name = "unit-mean")]
    UnitMean,
}

#[derive(Args)]
struct DiagramArgs {
    /// Family name (four-vertex-chain).
    #[arg(long)]
    family: String,
    /// Bond reduced actions, comma separated: a,b,c.
    #[arg(long)]
    actions: String,
    #[arg(long, default_value_t = 64)]
    grid: usize,
    #[arg(long, value_name = "CSV")]
    out: PathBuf,
}

#[derive(Args)]
struct ClassifyArgs {
    #[command(flatten)]
    input: InputArgs,
}

fn main() -> std::process::ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    match run(cli) {
        Ok(()) => std::process::ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            let validation = err.downcast_ref::<qgspectra::Error>().is_some();
            if validation {
                std::process::ExitCode::from(2)
            } else {
                std::process::ExitCode::FAILURE
            }
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let started = Instant::now();
    match cli.command {
        Command::Solve(args) => {
            let (lo, hi) = parse_range(&args.n)?;
            let (poly, _graph) = args.input.load()?;
            let result = solve_range(&poly, lo, hi, args.method.into())?;
            let mut rows = vec!["n,k_n,E_n,method,level_m,residual,degenerate_flag".to_string()];
            for r in &result.roots {
                rows.push(format!(
                    "{},{},{},{},{},{},{}",
                    r.n,
                    r.k,
                    r.k * r.k,
                    result.method,
                    result.level_m,
                    r.residual,
                    u8::from(r.degenerate)
                ));
            }
            write_csv(&args.out, &rows)?;
            manifest(&args.out, "solve", &args.input.paths(), &[&args.out], started)?;
        }
        Command::Oracle(args) => {
            let (poly, _graph) = args.input.load()?;
            let roots = oracle_scan(&poly, args.kmin, args.kmax, args.samples);
            let mut rows = vec!["i,k,E,residual".to_string()];
            for (i, &k) in roots.iter().enumerate() {
                rows.push(format!("{},{},{},{}", i + 1, k, k * k, poly.eval(k).abs()));
            }
            write_csv(&args.out, &rows)?;
            manifest(&args.out, "oracle", &args.input.paths(), &[&args.out], started)?;
        }
        Command::Expand(args) => {
            let (lo, hi) = parse_range(&args.n)?;
            let graph: Graph64 = qgspectra::config::load_graph(&args.graph)?;
            let rows = expand_rows(&graph, lo, hi, args.lmax, args.formula)?;
            write_csv(&args.out, &rows)?;
            manifest(&args.out, "expand", std::slice::from_ref(&args.graph), &[&args.out], started)?;
        }
        Command::Lagrange(args) => {
            let (lo, hi) = parse_range(&args.n)?;
            let mut header = "n,x_n,k_n,order2_closed".to_string();
            for v in 1..=args.order {
                header.push_str(&format!(",partial_{v}"));
            }
            let mut rows = vec![header];
            for n in lo..=hi {
                let (x, partials) = two_bond_partials(args.s0, args.s1, args.r, n, args.order)?;
                let closed = two_bond_root_order2(args.s0, args.s1, args.r, n)?;
                let mut row = format!("{n},{x},{},{closed}", x / args.s0);
                for p in &partials {
                    row.push_str(&format!(",{p}"));
                }
                rows.push(row);
            }
            write_csv(&args.out, &rows)?;
            manifest(&args.out, "lagrange", &[], &[&args.out], started)?;
        }
        Command::Orbits(args) => {
            let graph: Graph64 = qgspectra::config::load_graph(&args.graph)?;
            let catalog = enumerate_orbits_cached(&graph, args.lmax)?;
            let mut rows = vec!["canonical_word,l,l_P,nu,Re_A,Im_A,L0".to_string()];
            for class in catalog.iter() {
                let word = class
                    .word
                    .iter()
                    .map(|b| b.to_string())
                    .collect::<Vec<_>>()
                    .join("-");
                rows.push(format!(
                    "{word},{},{},{},{},{},{}",
                    class.l, class.l_prime, class.nu, class.amplitude.re, class.amplitude.im,
                    class.action
                ));
            }
            write_csv(&args.out, &rows)?;
            manifest(&args.out, "orbits", std::slice::from_ref(&args.graph), &[&args.out], started)?;
        }
        Command::Stats(args) => {
            let (poly, _graph) = args.input.load()?;
            let hierarchy = descend_hierarchy(&poly, 1, args.roots)?;
            let roots: Vec<f64> = hierarchy.roots.iter().map(|r| r.k).collect();
            let mode = match args.mode {
                ModeArg::Raw => Normalization::Raw,
                ModeArg::UnitMean => Normalization::UnitMean,
            };
            let sample = SpacingSample::from_roots(&roots, mode)?;
            let report = spacing_bound_check(&sample, hierarchy.m, poly.s0());
            let mut rows = vec!["i,spacing".to_string()];
            for (i, s) in sample.spacings.iter().enumerate() {
                rows.push(format!("{},{}", i + 1, s));
            }
            write_csv(&args.out, &rows)?;
            let hist_path = args
                .hist_out
                .clone()
                .unwrap_or_else(|| args.out.with_extension("hist.csv"));
            let upper = report.root_bound
                * match args.mode {
                    ModeArg::Raw => 1.0,
                    ModeArg::UnitMean => 1.0 / sample.mean_raw,
                };
            let hist = sample.histogram(upper, args.bins);
            let mut hrows = vec!["bin_lo,bin_hi,count,density".to_string()];
            for i in 0..hist.counts.len() {
                hrows.push(format!(
                    "{},{},{},{}",
                    hist.edges[i],
                    hist.edges[i + 1],
                    hist.counts[i],
                    hist.density[i]
                ));
            }
            write_csv(&hist_path, &hrows)?;
            println!(
                "{}",
                serde_json::to_string_pretty(&serde_json::json!({
                    "schema_version": SCHEMA_VERSION,
                    "roots": roots.len(),
                    "m": hierarchy.m,
                    "s_min": sample.s_min,
                    "s_max": sample.s_max,
                    "zero_spacings": sample.zero_spacings,
                    "mean_spacing": sample.mean_raw,
                    "separator_bound": report.separator_bound,
                    "root_bound": report.root_bound,
                    "bound_margin": report.margin,
                    "bound_pass": report.pass,
                }))?
            );
            manifest(&args.out, "stats", &args.input.paths(), &[&args.out, &hist_path], started)?;
        }
        Command::Diagram(args) => {
            if args.family != "four-vertex-chain" {
                bail!("unknown family {}; available: four-vertex-chain", args.family);
            }
            let actions = parse_actions(&args.actions)?;
            let family = FourVertexChain::new(actions);
            let diagram = regime_diagram("four-vertex-chain", |a, b| family.poly(a, b), args.grid)?;
            let mut rows = vec!["r2,r3,m".to_string()];
            for (i, &r2) in diagram.p1.iter().enumerate() {
                for (j, &r3) in diagram.p2.iter().enumerate() {
                    rows.push(format!("{r2},{r3},{}", diagram.m[i][j]));
                }
            }
            write_csv(&args.out, &rows)?;
            println!("max m over grid: {}", diagram.max_m());
            manifest(&args.out, "diagram", &[], &[&args.out], started)?;
        }
        Command::Classify(args) => {
            let (poly, _graph) = args.input.load()?;
            let (m, m_bound) = poly.irregularity_degree()?;
            println!(
                "{}",
                serde_json::to_string_pretty(&serde_json::json!({
                    "schema_version": SCHEMA_VERSION,
                    "S0": poly.s0(),
                    "gamma0": poly.gamma0(),
                    "N_Gamma": poly.n_gamma(),
                    "alpha": poly.characteristic_sum(),
                    "m": m,
                    "m_bound": m_bound,
                }))?
            );
        }
        Command::Selftest => {
            selftest(cli.seed)?;
        }
    }
    Ok(())
}

fn expand_rows(
    graph: &Graph64,
    lo: i64,
    hi: i64,
    l_max: usize,
    formula: FormulaArg,
) -> anyhow::Result<Vec<String>> {
    let mut rows = Vec::new();
    match formula {
        FormulaArg::Staircase => {
            let poly = graph_trigpoly(graph)?.poly;
            let hierarchy = descend_hierarchy(&poly, lo, hi)?;
            let stair = Staircase::new(graph)?;
            rows.push("n,k_n,E_n,cell_lo,cell_hi".to_string());
            for r in &hierarchy.roots {
                let k = root_by_staircase_integral_with(&stair, r.n as i64, r.cell)?;
                rows.push(format!(
                    "{},{},{},{},{}",
                    r.n,
                    k,
                    k * k,
                    r.cell.0,
                    r.cell.1
                ));
            }
        }
        FormulaArg::Orbit | FormulaArg::Prime | FormulaArg::Energy => {
            let catalog = enumerate_orbits_cached(graph, l_max)?;
            let mut header = "n,estimate".to_string();
            for l in 1..=l_max {
                header.push_str(&format!(",partial_{l}"));
            }
            rows.push(header);
            for n in lo..=hi {
                let result = match formula {
                    FormulaArg::Orbit => root_by_orbit_expansion_with(graph, &catalog, n, l_max)?,
                    FormulaArg::Prime => root_by_prime_expansion_with(graph, &catalog, n, l_max)?,
                    FormulaArg::Energy => {
                        regular_energy_expansion_with(graph, &catalog, n, l_max)?
                    }
                    FormulaArg::Staircase => unreachable!(),
                };
                let mut row = format!("{n},{}", result.estimate);
                for p in &result.partials {
                    row.push_str(&format!(",{p}"));
                }
                rows.push(row);
            }
        }
    }
    Ok(rows)
}

/// Deterministic randomized checks: one-root-per-cell, fixed-point vs cell
/// solver, and reduction residuals on random chains.
fn selftest(seed: u64) -> anyhow::Result<()> {
    use qgspectra::bootstrap::{fixed_point_root_with_mu, root_in_cell, regular_separators};
    use qgspectra::families::random_poly_with_alpha;
    use rand::{Rng, SeedableRng};

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut failures = 0usize;
    let mut check = |name: &str, ok: bool| {
        println!("{}: {}", name, if ok { "PASS" } else { "FAIL" });
        if !ok {
            failures += 1;
        }
    };

    let mut one_root_ok = true;
    let mut agree_ok = true;
    for _ in 0..25 {
        let alpha = rng.gen_range(0.05..0.95);
        let n_terms = rng.gen_range(1..5);
        let poly: TrigPoly64 = random_poly_with_alpha(&mut rng, 1.0, n_terms, alpha);
        let level = regular_separators(&poly, 1, 40)?;
        for n in 1..=40usize {
            let (lo, hi) = (level.positions[n - 1], level.positions[n]);
            let cell_roots = oracle_scan(&poly, lo, hi, 512);
            one_root_ok &= cell_roots.len() == 1;
            let solved = root_in_cell(&poly, lo, hi)?;
            let fixed = fixed_point_root_with_mu(&poly, n as i64, level.mu)?;
            agree_ok &= (solved.k - fixed).abs() < 1e-12;
        }
    }
    check("one root per separator cell (25 random regular polynomials)", one_root_ok);
    check("fixed-point agrees with bracketed solver to 1e-12", agree_ok);

    let mut recon_ok = true;
    for _ in 0..10 {
        let s1 = rng.gen_range(0.1..0.7);
        let s2 = rng.gen_range(0.1..0.7);
        let r = rng.gen_range(-0.9..0.9);
        let graph: Graph64 = qgspectra::families::two_bond_graph(s1, s2, r)?;
        let exp = qgspectra::detpoly::expand_determinant(&graph)?;
        let red = qgspectra::detpoly::to_real_form(&exp)?;
        for _ in 0..50 {
            let k = rng.gen_range(0.0..80.0);
            recon_ok &=
                qgspectra::detpoly::reconstruction_residual(&exp, &red, k) < 1e-9;
        }
    }
    check("determinant reduction reconstructs the expansion to 1e-9", recon_ok);

    let mut mu_ok = true;
    for _ in 0..10 {
        let alpha = rng.gen_range(0.05..0.9);
        let poly: TrigPoly64 = random_poly_with_alpha(&mut rng, 1.3, 3, alpha);
        let mu = determine_mu(&poly)?;
        let k1 = oracle_scan(&poly, 1e-9, 3.0 * poly.mean_spacing(), 512)[0];
        let sep1 = (std::f64::consts::PI / poly.s0())
            * (1.0 + poly.gamma0() + mu as f64 + 1.0);
        mu_ok &= k1 < sep1 && sep1 - k1 < 2.0 * poly.mean_spacing();
    }
    check("separator offset brackets the first root", mu_ok);

    if failures > 0 {
        bail!("selftest: {failures} check(s) failed");
    }
    Ok(())
}

fn parse_range(text: &str) -> anyhow::Result<(i64, i64)> {
    let (a, b) = text
        .split_once("..")
        .with_context(|| format!("range must look like A..B, got {text}"))?;
    let b = b.strip_prefix('=').unwrap_or(b);
    let lo: i64 = a.trim().parse().context("range start")?;
    let hi: i64 = b.trim().parse().context("range end")?;
    Ok((lo, hi))
}

fn parse_actions(text: &str) -> anyhow::Result<[f64; 3]> {
    let parts: Vec<f64> = text
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .context("actions must be three comma-separated numbers")?;
    if parts.len() != 3 {
        bail!("expected exactly three actions, got {}", parts.len());
    }
    Ok([parts[0], parts[1], parts[2]])
}

fn write_csv(path: &Path, rows: &[String]) -> anyhow::Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    std::fs::write(path, rows.join("\n") + "\n")?;
    Ok(())
}

#[derive(Serialize)]
struct Manifest {
    schema_version: u32,
    command: String,
    argv: Vec<String>,
    library_version: String,
    inputs: Vec<FileDigest>,
    outputs: Vec<FileDigest>,
    wall_time_secs: f64,
}

#[derive(Serialize)]
struct FileDigest {
    path: String,
    sha256: String,
}

fn file_digest(path: &Path) -> anyhow::Result<FileDigest> {
    let bytes = std::fs::read(path)?;
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    Ok(FileDigest {
        path: path.display().to_string(),
        sha256: format!("{:x}", hasher.finalize()),
    })
}

fn manifest(
    anchor: &Path,
    command: &str,
    inputs: &[PathBuf],
    outputs: &[&PathBuf],
    started: Instant,
) -> anyhow::Result<()> {
    let manifest = Manifest {
        schema_version: SCHEMA_VERSION,
        command: command.to_string(),
        argv: std::env::args().collect(),
        library_version: env!("CARGO_PKG_VERSION").to_string(),
        inputs: inputs
            .iter()
            .map(|p| file_digest(p))
            .collect::<anyhow::Result<_>>()?,
        outputs: outputs
            .iter()
            .map(|p| file_digest(p))
            .collect::<anyhow::Result<_>>()?,
        wall_time_secs: started.elapsed().as_secs_f64(),
    };
    let path = anchor.with_extension("manifest.json");
    std::fs::write(&path, serde_json::to_string_pretty(&manifest)?)?;
    Ok(())
}
