//! Command-line front end. Every analysis the library offers is
//! reachable from one binary, fixtures are embedded so the golden
//! reproductions need no input files, and structured output is
//! byte-stable under a fixed seed regardless of thread count.

use std::f64::consts::PI;
use std::fs;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::automorphism::{
    detect_exotic_with_group, find_automorphisms, ExoticVerdict, Permutation,
};
use crate::dynamics::{
    constant_sum_imbalance, find_equilibria, integrate, table1_report, EquilibriumRecord,
    SearchOptions, TableReport,
};
use crate::fields::{parse_system, AdditiveLaplacianSystem, VectorField};
use crate::fixtures::{exotic_expectation, fixture_graph, fixture_listing, fixture_system};
use crate::graph::{parse_graph, NetworkGraph};
use crate::partition::Partition;
use crate::spectra::{analyze_matrix, parse_matrix_document, SignedSpectrumReport};
use crate::synchrony::enumerate_synchrony;
use crate::verify::{run_all, VerifyOptions};

pub const SCHEMA_VERSION: u32 = 1;

const EXIT_OK: i32 = 0;
/// an analysis disagreed with stored golden expectations
const EXIT_MISMATCH: i32 = 1;
/// unreadable or invalid input (files, flags, documents)
const EXIT_INPUT: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    /// human-oriented tables, angles as multiples of pi
    Text,
    /// versioned machine-readable output, angles in raw radians
    Json,
}

fn default_seed() -> u64 {
    std::env::var("SYNCHRONY_LAB_SEED").ok().and_then(|s| s.parse().ok()).unwrap_or(0)
}

#[derive(Parser)]
#[command(
    name = "synchrony-lab",
    version,
    about = "Synchrony subspaces, signed-Laplacian spectra, and gradient-like \
             dynamics of coupled cell networks"
)]
struct Cli {
    /// output format
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// seed shared by every randomized check
    #[arg(long, global = true, default_value_t = default_seed())]
    seed: u64,
    /// cap worker threads; results are identical for any value
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// include the slow optional censuses
    #[arg(long, global = true)]
    slow: bool,
    /// list the embedded fixture graphs and systems, then exit
    #[arg(long)]
    fixtures: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate the synchrony lattice (balanced partitions) of a graph
    Synchrony {
        /// graph document path, or fixture:<name>
        #[arg(long)]
        graph: String,
        /// also emit the singleton and all-cells patterns
        #[arg(long)]
        include_trivial: bool,
    },
    /// Print a graph's automorphism group
    Automorphisms {
        /// graph document path, or fixture:<name>
        #[arg(long)]
        graph: String,
    },
    /// Classify each balanced pattern as symmetry-forced or exotic
    Exotic {
        /// graph document path, or fixture:<name>
        #[arg(long)]
        graph: String,
    },
    /// Validate a symmetric zero-row-sum matrix and bound its eigenvalue signature
    Bounds {
        /// matrix document path ({"n":6,"rows":[[...],...]})
        #[arg(long)]
        matrix: String,
        /// absolute threshold below which an eigenvalue counts as zero
        #[arg(long)]
        zero_tol: Option<f64>,
    },
    /// Search a synchrony chart for equilibria and classify their stability
    Equilibria {
        /// system document path, or fixture:<name>
        #[arg(long)]
        system: String,
        /// balanced pattern as classes of 1-based cells, e.g. "1,4|2,5|3,6";
        /// defaults to the singleton pattern (full gauge-fixed search)
        #[arg(long)]
        pattern: Option<String>,
        /// starting points per free coordinate
        #[arg(long)]
        grid: Option<usize>,
        /// half-width of the search box for non-periodic systems
        #[arg(long = "box")]
        box_radius: Option<f64>,
    },
    /// Integrate the flow from an initial state and emit the trajectory
    Simulate {
        /// system document path, or fixture:<name>
        #[arg(long)]
        system: String,
        /// comma-separated initial coordinates, one per cell
        #[arg(long)]
        x0: String,
        #[arg(long, default_value_t = 100.0)]
        t_end: f64,
        #[arg(long, default_value_t = 0.01)]
        dt: f64,
        /// write CSV here instead of stdout (columns t, x1..xn, potential)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recompute the golden classification table for the six-cell sine system
    Table1,
    /// Run the full verification suite
    Verify,
}

pub fn run() -> i32 {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be positive");
            return EXIT_INPUT;
        }
        // first rayon touch in the process; a failure here means a pool
        // already exists, which only affects speed, not results
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    if cli.fixtures {
        return cmd_fixtures(cli.format);
    }
    let Some(command) = cli.command else {
        eprintln!("error: a subcommand is required (see --help), or pass --fixtures");
        return EXIT_INPUT;
    };
    match command {
        Command::Synchrony { graph, include_trivial } => {
            cmd_synchrony(&graph, include_trivial, cli.format)
        }
        Command::Automorphisms { graph } => cmd_automorphisms(&graph, cli.format),
        Command::Exotic { graph } => cmd_exotic(&graph, cli.format),
        Command::Bounds { matrix, zero_tol } => cmd_bounds(&matrix, zero_tol, cli.format),
        Command::Equilibria { system, pattern, grid, box_radius } => {
            cmd_equilibria(&system, pattern.as_deref(), grid, box_radius, cli.format)
        }
        Command::Simulate { system, x0, t_end, dt, out } => {
            cmd_simulate(&system, &x0, t_end, dt, out.as_deref(), cli.format)
        }
        Command::Table1 => cmd_table1(cli.format),
        Command::Verify => cmd_verify(cli.seed, cli.slow, cli.format),
    }
}

// --- input loading -------------------------------------------------------

fn load_graph(arg: &str) -> Result<NetworkGraph, String> {
    if let Some(name) = arg.strip_prefix("fixture:") {
        fixture_graph(name).map_err(|e| format!("fixture {name}: {e}"))
    } else {
        let text = fs::read_to_string(arg).map_err(|e| format!("{arg}: {e}"))?;
        parse_graph(&text).map_err(|e| format!("{arg}: {e}"))
    }
}

fn load_system(arg: &str) -> Result<AdditiveLaplacianSystem, String> {
    if let Some(name) = arg.strip_prefix("fixture:") {
        fixture_system(name).map_err(|e| format!("fixture {name}: {e}"))
    } else {
        let text = fs::read_to_string(arg).map_err(|e| format!("{arg}: {e}"))?;
        parse_system(&text).map_err(|e| format!("{arg}: {e}"))
    }
}

fn input_error(msg: &str) -> i32 {
    eprintln!("error: {msg}");
    EXIT_INPUT
}

// --- output helpers ------------------------------------------------------

/// Render a coordinate as a multiple of pi with 4 decimals.
fn pi_multiple(v: f64) -> String {
    let mut m = (v / PI * 10_000.0).round() / 10_000.0;
    if m == 0.0 {
        m = 0.0; // normalize -0.0
    }
    format!("{m:.4}\u{3c0}")
}

fn pi_point(x: &[f64]) -> String {
    let parts: Vec<String> = x.iter().map(|&v| pi_multiple(v)).collect();
    format!("({})", parts.join(", "))
}

fn emit_json<T: Serialize>(value: &T) -> i32 {
    match serde_json::to_string_pretty(value) {
        Ok(s) => {
            println!("{s}");
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: serialization failed: {e}");
            EXIT_INPUT
        }
    }
}

// --- fixtures ------------------------------------------------------------

#[derive(Serialize)]
struct FixturesOut {
    schema_version: u32,
    command: &'static str,
    listing: Vec<String>,
}

fn cmd_fixtures(format: Format) -> i32 {
    let listing = fixture_listing();
    match format {
        Format::Text => {
            for line in &listing {
                println!("{line}");
            }
            EXIT_OK
        }
        Format::Json => {
            emit_json(&FixturesOut { schema_version: SCHEMA_VERSION, command: "fixtures", listing })
        }
    }
}

// --- synchrony -----------------------------------------------------------

#[derive(Serialize)]
struct PatternOut {
    classes: Vec<Vec<usize>>,
    balanced: bool,
    trivial: bool,
    total: bool,
}

#[derive(Serialize)]
struct SynchronyOut {
    schema_version: u32,
    command: &'static str,
    cells: usize,
    patterns: Vec<PatternOut>,
    /// (i, j) with pattern j strictly refining pattern i, indices into
    /// the emitted pattern list
    refinements: Vec<(usize, usize)>,
}

fn cmd_synchrony(graph_arg: &str, include_trivial: bool, format: Format) -> i32 {
    let g = match load_graph(graph_arg) {
        Ok(g) => g,
        Err(e) => return input_error(&e),
    };
    let lattice = match enumerate_synchrony(&g) {
        Ok(l) => l,
        Err(e) => return input_error(&e.to_string()),
    };
    let keep: Vec<usize> = lattice
        .patterns
        .iter()
        .enumerate()
        .filter(|(_, p)| include_trivial || (!p.trivial && !p.total))
        .map(|(i, _)| i)
        .collect();
    let remap: std::collections::BTreeMap<usize, usize> =
        keep.iter().enumerate().map(|(new, &old)| (old, new)).collect();
    let patterns: Vec<PatternOut> = keep
        .iter()
        .map(|&i| {
            let e = &lattice.patterns[i];
            PatternOut {
                classes: e.partition.classes_1based(),
                balanced: true,
                trivial: e.trivial,
                total: e.total,
            }
        })
        .collect();
    let refinements: Vec<(usize, usize)> = lattice
        .refinement_edges
        .iter()
        .filter_map(|&(i, j)| Some((*remap.get(&i)?, *remap.get(&j)?)))
        .collect();
    match format {
        Format::Text => {
            println!(
                "{} balanced patterns on {} cells ({} shown)",
                lattice.patterns.len(),
                g.n_cells(),
                patterns.len()
            );
            for (idx, &i) in keep.iter().enumerate() {
                let e = &lattice.patterns[i];
                let mark = if e.trivial {
                    "  [singletons]"
                } else if e.total {
                    "  [all cells]"
                } else {
                    ""
                };
                println!("{idx:>4}  {}{mark}", e.partition.display());
            }
            println!("refinements (coarser <- finer): {refinements:?}");
            EXIT_OK
        }
        Format::Json => emit_json(&SynchronyOut {
            schema_version: SCHEMA_VERSION,
            command: "synchrony",
            cells: g.n_cells(),
            patterns,
            refinements,
        }),
    }
}

// --- automorphisms -------------------------------------------------------

#[derive(Serialize)]
struct AutomorphismsOut {
    schema_version: u32,
    command: &'static str,
    order: usize,
    generators: Vec<String>,
    elements: Vec<String>,
}

fn cmd_automorphisms(graph_arg: &str, format: Format) -> i32 {
    let g = match load_graph(graph_arg) {
        Ok(g) => g,
        Err(e) => return input_error(&e),
    };
    let aut = match find_automorphisms(&g) {
        Ok(a) => a,
        Err(e) => return input_error(&e.to_string()),
    };
    let generators: Vec<String> = aut.generators.iter().map(|p| p.cycle_notation()).collect();
    let elements: Vec<String> = aut.elements.iter().map(|p| p.cycle_notation()).collect();
    match format {
        Format::Text => {
            println!("order {}", aut.order());
            println!("generators: {}", generators.join(", "));
            println!("elements {}", elements.len());
            EXIT_OK
        }
        Format::Json => emit_json(&AutomorphismsOut {
            schema_version: SCHEMA_VERSION,
            command: "automorphisms",
            order: aut.order(),
            generators,
            elements,
        }),
    }
}

// --- exotic --------------------------------------------------------------

/// Greedy small generating set for a subgroup given as an element list.
fn generating_set(elements: &[Permutation], n: usize) -> Vec<Permutation> {
    let mut generators: Vec<Permutation> = Vec::new();
    let mut closure: Vec<Permutation> = vec![Permutation::identity(n)];
    let mut sorted = elements.to_vec();
    sorted.sort();
    for e in sorted {
        if closure.contains(&e) {
            continue;
        }
        generators.push(e.clone());
        // rebuild the closure under composition
        loop {
            let mut grew = false;
            let current = closure.clone();
            for a in &current {
                for b in std::iter::once(&e).chain(&generators) {
                    let c = a.compose(b);
                    if !closure.contains(&c) {
                        closure.push(c);
                        grew = true;
                    }
                }
            }
            if !grew {
                break;
            }
        }
    }
    generators
}

#[derive(Serialize)]
struct ExoticPatternOut {
    classes: Vec<Vec<usize>>,
    verdict: &'static str,
    witness_generators: Vec<String>,
}

#[derive(Serialize)]
struct ExoticOut {
    schema_version: u32,
    command: &'static str,
    automorphism_order: usize,
    patterns: Vec<ExoticPatternOut>,
    exotic: usize,
    expected_exotic: Option<usize>,
}

fn cmd_exotic(graph_arg: &str, format: Format) -> i32 {
    let g = match load_graph(graph_arg) {
        Ok(g) => g,
        Err(e) => return input_error(&e),
    };
    let lattice = match enumerate_synchrony(&g) {
        Ok(l) => l,
        Err(e) => return input_error(&e.to_string()),
    };
    let aut = match find_automorphisms(&g) {
        Ok(a) => a,
        Err(e) => return input_error(&e.to_string()),
    };
    let mut patterns = Vec::new();
    let mut exotic = 0usize;
    for entry in lattice.nontrivial() {
        let verdict = match detect_exotic_with_group(&g, &entry.partition, &aut) {
            Ok(v) => v,
            Err(e) => return input_error(&e.to_string()),
        };
        let (name, witness) = match verdict {
            ExoticVerdict::Exotic => {
                exotic += 1;
                ("exotic", Vec::new())
            }
            ExoticVerdict::Symmetric { witness } => (
                "symmetric",
                generating_set(&witness, g.n_cells()).iter().map(|p| p.cycle_notation()).collect(),
            ),
        };
        patterns.push(ExoticPatternOut {
            classes: entry.partition.classes_1based(),
            verdict: name,
            witness_generators: witness,
        });
    }
    let expected = graph_arg.strip_prefix("fixture:").and_then(exotic_expectation);
    let mismatch = expected.is_some_and(|e| e != exotic);
    let code = if mismatch { EXIT_MISMATCH } else { EXIT_OK };
    match format {
        Format::Text => {
            for p in &patterns {
                let classes: Vec<String> = p
                    .classes
                    .iter()
                    .map(|c| {
                        let inner: Vec<String> = c.iter().map(|x| x.to_string()).collect();
                        format!("{{{}}}", inner.join(","))
                    })
                    .collect();
                let witness = if p.witness_generators.is_empty() {
                    String::new()
                } else {
                    format!("  witness {}", p.witness_generators.join(" "))
                };
                println!("{}  {}{witness}", classes.join(","), p.verdict);
            }
            println!("{exotic} exotic patterns");
            if mismatch {
                eprintln!("error: expected {} exotic patterns for this fixture", expected.unwrap());
            }
            code
        }
        Format::Json => {
            let out = ExoticOut {
                schema_version: SCHEMA_VERSION,
                command: "exotic",
                automorphism_order: aut.order(),
                patterns,
                exotic,
                expected_exotic: expected,
            };
            let emit = emit_json(&out);
            if emit != EXIT_OK {
                emit
            } else {
                code
            }
        }
    }
}

// --- bounds --------------------------------------------------------------

#[derive(Serialize)]
struct BoundsOut {
    schema_version: u32,
    command: &'static str,
    report: SignedSpectrumReport,
}

fn cmd_bounds(matrix_arg: &str, zero_tol: Option<f64>, format: Format) -> i32 {
    let text = match fs::read_to_string(matrix_arg) {
        Ok(t) => t,
        Err(e) => return input_error(&format!("{matrix_arg}: {e}")),
    };
    let report = match parse_matrix_document(&text).and_then(|m| analyze_matrix(&m, None, zero_tol))
    {
        Ok(r) => r,
        Err(e) => return input_error(&format!("{matrix_arg}: {e}")),
    };
    match format {
        Format::Text => {
            println!(
                "counts: c {} / c+ {} / c- {}",
                report.counts.c_g, report.counts.c_g_plus, report.counts.c_g_minus
            );
            println!(
                "intervals: n+ in [{}, {}], n0 in [{}, {}], n- in [{}, {}]",
                report.bounds.n_plus.0,
                report.bounds.n_plus.1,
                report.bounds.n_zero.0,
                report.bounds.n_zero.1,
                report.bounds.n_minus.0,
                report.bounds.n_minus.1
            );
            println!(
                "signature: (n+, n0, n-) = ({}, {}, {})",
                report.signature.0, report.signature.1, report.signature.2
            );
            println!("within bounds: {}", report.within_bounds);
            println!(
                "eigenvalue nearest the zero threshold {:.3e}: {:.6e}",
                report.zero_tol, report.nearest_to_zero_tol
            );
            EXIT_OK
        }
        Format::Json => {
            emit_json(&BoundsOut { schema_version: SCHEMA_VERSION, command: "bounds", report })
        }
    }
}

// --- equilibria ----------------------------------------------------------

#[derive(Serialize)]
struct EquilibriaOut {
    schema_version: u32,
    command: &'static str,
    pattern_classes: Vec<Vec<usize>>,
    periodic: bool,
    constant_sum_imbalance: Option<f64>,
    records: Vec<EquilibriumRecord>,
}

fn cmd_equilibria(
    system_arg: &str,
    pattern_arg: Option<&str>,
    grid: Option<usize>,
    box_radius: Option<f64>,
    format: Format,
) -> i32 {
    let sys = match load_system(system_arg) {
        Ok(s) => s,
        Err(e) => return input_error(&e),
    };
    let n = sys.dim();
    let pattern = match pattern_arg {
        None => Partition::singletons(n),
        Some(s) => match Partition::parse_classes(n, s) {
            Ok(p) => p,
            Err(e) => return input_error(&format!("--pattern: {e}")),
        },
    };
    let mut opts = SearchOptions { grid, ..SearchOptions::default() };
    if let Some(r) = box_radius {
        if r <= 0.0 {
            return input_error("--box must be positive");
        }
        opts.box_radius = r;
    }
    let imbalance = constant_sum_imbalance(&sys);
    if let Some(s) = imbalance {
        eprintln!(
            "warning: per-cell constants sum to {s:.6}; the component sum of the \
             field never vanishes, so no equilibria exist"
        );
    }
    let records = match find_equilibria(&sys, &pattern, &opts) {
        Ok(r) => r,
        Err(e) => return input_error(&e.to_string()),
    };
    match format {
        Format::Text => {
            println!(
                "{} equilibria in chart {} ({})",
                records.len(),
                pattern.display(),
                if sys.torus_reducible() { "periodic grid" } else { "box grid" }
            );
            for r in &records {
                println!(
                    "{}  finest {}  {}  signature ({}, {}, {})  n+ in [{}, {}]  residual {:.1e}{}",
                    pi_point(&r.point),
                    r.pattern.display(),
                    r.verdict,
                    r.spectrum.signature.0,
                    r.spectrum.signature.1,
                    r.spectrum.signature.2,
                    r.spectrum.bounds.n_plus.0,
                    r.spectrum.bounds.n_plus.1,
                    r.residual,
                    if r.family_hint { "  [family]" } else { "" }
                );
            }
            EXIT_OK
        }
        Format::Json => emit_json(&EquilibriaOut {
            schema_version: SCHEMA_VERSION,
            command: "equilibria",
            pattern_classes: pattern.classes_1based(),
            periodic: sys.torus_reducible(),
            constant_sum_imbalance: imbalance,
            records,
        }),
    }
}

// --- simulate ------------------------------------------------------------

#[derive(Serialize)]
struct SimulateOut {
    schema_version: u32,
    command: &'static str,
    times: Vec<f64>,
    states: Vec<Vec<f64>>,
    potentials: Option<Vec<f64>>,
}

fn cmd_simulate(
    system_arg: &str,
    x0_arg: &str,
    t_end: f64,
    dt: f64,
    out: Option<&std::path::Path>,
    format: Format,
) -> i32 {
    let sys = match load_system(system_arg) {
        Ok(s) => s,
        Err(e) => return input_error(&e),
    };
    let x0: Result<Vec<f64>, _> = x0_arg.split(',').map(|t| t.trim().parse::<f64>()).collect();
    let x0 = match x0 {
        Ok(v) => v,
        Err(e) => return input_error(&format!("--x0: {e}")),
    };
    if x0.len() != sys.dim() {
        return input_error(&format!(
            "--x0 has {} coordinates, system has {} cells",
            x0.len(),
            sys.dim()
        ));
    }
    if !dt.is_finite() || dt <= 0.0 || !t_end.is_finite() || t_end <= 0.0 {
        return input_error("--dt and --t-end must be positive");
    }
    let traj = match integrate(&sys, &x0, t_end, dt) {
        Ok(t) => t,
        Err(e) => return input_error(&e.to_string()),
    };
    match format {
        Format::Json => {
            let payload = SimulateOut {
                schema_version: SCHEMA_VERSION,
                command: "simulate",
                times: traj.times,
                states: traj.states,
                potentials: traj.potentials,
            };
            match out {
                None => emit_json(&payload),
                Some(path) => match serde_json::to_string_pretty(&payload) {
                    Ok(s) => match fs::write(path, s + "\n") {
                        Ok(()) => EXIT_OK,
                        Err(e) => input_error(&format!("{}: {e}", path.display())),
                    },
                    Err(e) => input_error(&format!("serialization failed: {e}")),
                },
            }
        }
        Format::Text => {
            let n = sys.dim();
            let mut csv = String::new();
            let headers: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
            csv.push_str(&format!("t,{},potential\n", headers.join(",")));
            for (i, t) in traj.times.iter().enumerate() {
                let coords: Vec<String> =
                    traj.states[i].iter().map(|v| format!("{v:.12}")).collect();
                let p =
                    traj.potentials.as_ref().map(|ps| format!("{:.12}", ps[i])).unwrap_or_default();
                csv.push_str(&format!("{t:.6},{},{p}\n", coords.join(",")));
            }
            match out {
                None => {
                    print!("{csv}");
                    EXIT_OK
                }
                Some(path) => match fs::write(path, csv) {
                    Ok(()) => EXIT_OK,
                    Err(e) => input_error(&format!("{}: {e}", path.display())),
                },
            }
        }
    }
}

// --- table1 --------------------------------------------------------------

#[derive(Serialize)]
struct Table1Out {
    schema_version: u32,
    command: &'static str,
    report: TableReport,
}

fn cmd_table1(format: Format) -> i32 {
    let report = match table1_report() {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_MISMATCH;
        }
    };
    let code = if report.pass { EXIT_OK } else { EXIT_MISMATCH };
    match format {
        Format::Text => {
            for row in &report.rows {
                println!("row {}  pattern {}", row.index, row.pattern.display());
                if !row.conjugacy_found {
                    println!("      MISSING from the lattice's conjugacy classes");
                }
                for note in &row.notes {
                    println!("      ({note})");
                }
                for e in &row.entries {
                    let status = if e.diffs.is_empty() && e.census_found {
                        "ok".to_string()
                    } else if !e.diffs.is_empty() {
                        format!("MISMATCH: {}", e.diffs.join("; "))
                    } else {
                        "CENSUS MISS".to_string()
                    };
                    println!(
                        "      {:<34} {}  (c+, c-, c) = ({}, {}, {})  n+ in [{}, {}]  \
                         signature ({}, {}, {})  {}",
                        e.label,
                        pi_point(&e.point),
                        e.counts.0,
                        e.counts.1,
                        e.counts.2,
                        e.interval.0,
                        e.interval.1,
                        e.signature.0,
                        e.signature.1,
                        e.signature.2,
                        status
                    );
                }
            }
            println!("{}", if report.pass { "table matches" } else { "TABLE MISMATCH" });
            code
        }
        Format::Json => {
            let emit =
                emit_json(&Table1Out { schema_version: SCHEMA_VERSION, command: "table1", report });
            if emit != EXIT_OK {
                emit
            } else {
                code
            }
        }
    }
}

// --- verify --------------------------------------------------------------

#[derive(Serialize)]
struct VerifyOut {
    schema_version: u32,
    command: &'static str,
    seed: u64,
    slow: bool,
    results: Vec<crate::verify::CriterionResult>,
    pass: bool,
}

fn cmd_verify(seed: u64, slow: bool, format: Format) -> i32 {
    let opts = VerifyOptions { seed, slow };
    let results = run_all(&opts);
    let pass = crate::verify::all_pass(&results);
    let code = if pass { EXIT_OK } else { EXIT_MISMATCH };
    match format {
        Format::Text => {
            for r in &results {
                println!(
                    "[{}] {:<24} {}  ({} ms)  {}",
                    r.index,
                    r.name,
                    if r.pass { "PASS" } else { "FAIL" },
                    r.elapsed_ms,
                    r.detail
                );
            }
            println!(
                "{}/{} criteria passed",
                results.iter().filter(|r| r.pass).count(),
                results.len()
            );
            code
        }
        Format::Json => {
            let emit = emit_json(&VerifyOut {
                schema_version: SCHEMA_VERSION,
                command: "verify",
                seed,
                slow,
                results,
                pass,
            });
            if emit != EXIT_OK {
                emit
            } else {
                code
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pi_formatting() {
        assert_eq!(pi_multiple(PI), "1.0000\u{3c0}");
        assert_eq!(pi_multiple(4.0 * PI / 3.0), "1.3333\u{3c0}");
        assert_eq!(pi_multiple(0.0), "0.0000\u{3c0}");
        assert_eq!(pi_multiple(-1e-17), "0.0000\u{3c0}");
        assert_eq!(pi_multiple(-PI / 2.0), "-0.5000\u{3c0}");
        assert_eq!(pi_point(&[0.0, PI]), "(0.0000\u{3c0}, 1.0000\u{3c0})");
    }

    #[test]
    fn generating_sets_are_small_and_generate() {
        let g = fixture_graph("g6").unwrap();
        let aut = find_automorphisms(&g).unwrap();
        let gens = generating_set(&aut.elements, 6);
        assert!(gens.len() <= 4, "{}", gens.len());
        // closure of the returned set recovers the whole group
        let mut closure = vec![Permutation::identity(6)];
        loop {
            let mut grew = false;
            let current = closure.clone();
            for a in &current {
                for b in &gens {
                    let c = a.compose(b);
                    if !closure.contains(&c) {
                        closure.push(c);
                        grew = true;
                    }
                }
            }
            if !grew {
                break;
            }
        }
        assert_eq!(closure.len(), aut.elements.len());
    }

    #[test]
    fn seed_default_reads_environment() {
        // avoid mutating process env: just exercise the parser default
        assert_eq!(default_seed(), 0);
    }
}
