//! Embedded example graphs, ready-made coupled systems, and the golden
//! reference table of critical points for the six-cell circulant system.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use crate::fields::{build_additive_system, AdditiveLaplacianSystem, FieldError, OddCoupling};
use crate::graph::{GraphError, NetworkGraph};
use crate::partition::Partition;

/// Look up an embedded graph: `ring<n>` (n >= 3), `g<n>` (n >= 5,
/// circulant with nearest and next-nearest couplings), or one of the
/// named six-cell examples `fig1`, `fig2`, `fig5`.
pub fn fixture_graph(name: &str) -> Result<NetworkGraph, GraphError> {
    if let Some(num) = name.strip_prefix("ring") {
        if let Ok(n) = num.parse::<usize>() {
            return NetworkGraph::make_ring(n);
        }
    }
    if let Some(num) = name.strip_prefix('g') {
        if let Ok(n) = num.parse::<usize>() {
            return NetworkGraph::make_gn(n);
        }
    }
    NetworkGraph::make_example(name)
}

/// Ready-made systems: `kuramoto-g6` (sine coupling on the six-cell
/// circulant, zero constants) and `g6-tilde` (the two-class six-cell
/// graph with sine and identity couplings).
pub fn fixture_system(name: &str) -> Result<AdditiveLaplacianSystem, FieldError> {
    match name {
        "kuramoto-g6" => {
            let g = NetworkGraph::make_gn(6)?;
            let couplings: BTreeMap<String, OddCoupling> =
                [("a".to_string(), OddCoupling::Sine { amplitude: 1.0 })].into();
            let constants: BTreeMap<String, f64> = [("a".to_string(), 0.0)].into();
            build_additive_system(&g, &couplings, &constants)
        }
        "g6-tilde" => {
            let g = NetworkGraph::make_example("fig5")?;
            let couplings: BTreeMap<String, OddCoupling> = [
                ("sin".to_string(), OddCoupling::Sine { amplitude: 1.0 }),
                ("id".to_string(), OddCoupling::Linear { slope: 1.0 }),
            ]
            .into();
            let constants: BTreeMap<String, f64> = [("a".to_string(), 0.0)].into();
            build_additive_system(&g, &couplings, &constants)
        }
        other => Err(FieldError::Graph(GraphError::UnknownName(other.to_string()))),
    }
}

/// Human-readable listing for `--fixtures`.
pub fn fixture_listing() -> Vec<String> {
    vec![
        "graphs:".to_string(),
        "  ring<n>      cycle on n cells (n >= 3), one edge class".to_string(),
        "  g<n>         circulant on n cells with distance-1 and distance-2 edges (n >= 5)"
            .to_string(),
        "  fig1         six cells, directed, two arrow classes; carries a synchrony pattern no automorphism forces"
            .to_string(),
        "  fig2         six cells, two cell classes {1,2,4,5} and {3,6}, edge classes theta and phi"
            .to_string(),
        "  fig5         six cells, homogeneous, edge classes sin and id, two inputs of each per cell"
            .to_string(),
        "systems:".to_string(),
        "  kuramoto-g6  sine coupling with unit amplitude on g6, zero constants".to_string(),
        "  g6-tilde     fig5 with sine coupling on the sin class and identity coupling on the id class"
            .to_string(),
    ]
}

/// Expected number of exotic (non-symmetry-forced) synchrony patterns
/// for embedded graphs, used by the `exotic` command's exit status.
pub fn exotic_expectation(name: &str) -> Option<usize> {
    match name {
        "ring3" | "ring4" | "ring5" | "ring6" | "ring7" | "ring8" => Some(0),
        "g5" | "g6" | "g7" | "g8" | "g9" => Some(0),
        "g10" => Some(45),
        "g11" => Some(0),
        "fig1" => Some(53),
        "fig2" => Some(0),
        "fig5" => Some(0),
        _ => None,
    }
}

/// Expected balanced-partition counts (including the two trivial ones)
/// for the embedded graphs whose censuses are pinned.
pub fn census_expectation(name: &str) -> Option<usize> {
    match name {
        "ring3" => Some(5),
        "ring4" => Some(7),
        "ring5" => Some(7),
        "ring6" => Some(13),
        "ring7" => Some(9),
        "ring8" => Some(16),
        "g5" => Some(52),
        "g6" => Some(31),
        "g7" => Some(9),
        "g8" => Some(16),
        "g9" => Some(15),
        "g10" => Some(64),
        "g11" => Some(13),
        "fig1" => Some(56),
        "fig2" => Some(5),
        "fig5" => Some(13),
        _ => None,
    }
}

/// One verified critical point (or sampled family representative) of
/// the kuramoto-g6 system, with its signed-Laplacian data.
#[derive(Debug, Clone)]
pub struct GoldenEntry {
    pub label: &'static str,
    pub point: Vec<f64>,
    /// sampled from a one-parameter family rather than isolated
    pub family: bool,
    /// (c(G+), c(G-), c(G)) of the Jacobian's signed graph
    pub counts: (usize, usize, usize),
    /// closed interval for n_plus from the component counts
    pub interval: (usize, usize),
    /// exact (n_plus, n_zero, n_minus)
    pub signature: (usize, usize, usize),
}

/// One row of the reference table: a synchrony pattern of g6 (up to
/// graph symmetry) and the critical points found inside it.
#[derive(Debug, Clone)]
pub struct GoldenRow {
    pub index: usize,
    pub pattern: Partition,
    pub entries: Vec<GoldenEntry>,
}

fn pat(classes: &[&[usize]]) -> Partition {
    Partition::from_classes(6, classes).expect("golden pattern is well formed")
}

/// The eight synchrony patterns of g6 (one per conjugacy class of
/// nontrivial balanced partitions) with every verified critical point.
/// Family rows sample the free angle at 2*pi/5. Row 1's chart contains
/// no critical point of its own: everything found there coincides on
/// more cells and lands in a finer row.
pub fn golden_table() -> Vec<GoldenRow> {
    let a = 2.0 * PI / 5.0;
    vec![
        GoldenRow { index: 1, pattern: pat(&[&[1, 4], &[2], &[3], &[5], &[6]]), entries: vec![] },
        GoldenRow {
            index: 2,
            pattern: pat(&[&[1, 2, 4, 5], &[3], &[6]]),
            entries: vec![GoldenEntry {
                label: "(0, 0, pi, 0, 0, 0)",
                point: vec![0.0, 0.0, PI, 0.0, 0.0, 0.0],
                family: false,
                counts: (2, 2, 1),
                interval: (1, 4),
                signature: (1, 1, 4),
            }],
        },
        GoldenRow {
            index: 3,
            pattern: pat(&[&[1, 2], &[3], &[4, 5], &[6]]),
            entries: vec![
                GoldenEntry {
                    label: "family (0, 0, a, pi, pi, -a)",
                    point: vec![0.0, 0.0, a, PI, PI, -a],
                    family: true,
                    counts: (2, 1, 1),
                    interval: (1, 5),
                    signature: (2, 2, 2),
                },
                GoldenEntry {
                    label: "family (0, 0, a, pi, pi, a+pi)",
                    point: vec![0.0, 0.0, a, PI, PI, a + PI],
                    family: true,
                    counts: (2, 1, 1),
                    interval: (1, 5),
                    signature: (1, 3, 2),
                },
                GoldenEntry {
                    label: "(0, 0, pi/2, pi, pi, -pi/2)",
                    point: vec![0.0, 0.0, PI / 2.0, PI, PI, -PI / 2.0],
                    family: false,
                    counts: (4, 4, 3),
                    interval: (1, 2),
                    signature: (1, 4, 1),
                },
                GoldenEntry {
                    label: "(0, 0, pi/2, pi, pi, 3pi/2)",
                    point: vec![0.0, 0.0, PI / 2.0, PI, PI, 1.5 * PI],
                    family: false,
                    counts: (4, 4, 3),
                    interval: (1, 2),
                    signature: (1, 4, 1),
                },
            ],
        },
        GoldenRow {
            index: 4,
            pattern: pat(&[&[1, 4], &[2, 5], &[3], &[6]]),
            entries: vec![
                // this family's positive subgraph is connected on
                // {1,3,4,6}, so c+ = 3, unlike its sibling below
                GoldenEntry {
                    label: "family (0, pi, a, 0, pi, -a)",
                    point: vec![0.0, PI, a, 0.0, PI, -a],
                    family: true,
                    counts: (3, 1, 1),
                    interval: (2, 5),
                    signature: (3, 2, 1),
                },
                GoldenEntry {
                    label: "family (0, pi, a, 0, pi, a+pi)",
                    point: vec![0.0, PI, a, 0.0, PI, a + PI],
                    family: true,
                    counts: (2, 1, 1),
                    interval: (1, 5),
                    signature: (3, 2, 1),
                },
                GoldenEntry {
                    label: "(0, pi, pi/2, 0, pi, -pi/2)",
                    point: vec![0.0, PI, PI / 2.0, 0.0, PI, -PI / 2.0],
                    family: false,
                    counts: (6, 3, 3),
                    interval: (3, 3),
                    signature: (3, 3, 0),
                },
                GoldenEntry {
                    label: "(0, pi, pi/2, 0, pi, 3pi/2)",
                    point: vec![0.0, PI, PI / 2.0, 0.0, PI, 1.5 * PI],
                    family: false,
                    counts: (6, 3, 3),
                    interval: (3, 3),
                    signature: (3, 3, 0),
                },
                // the negative subgraph here is connected, so the
                // counts are (2,1,1) rather than (2,2,1)
                GoldenEntry {
                    label: "(0, pi, pi, 0, pi, 0)",
                    point: vec![0.0, PI, PI, 0.0, PI, 0.0],
                    family: false,
                    counts: (2, 1, 1),
                    interval: (1, 5),
                    signature: (3, 2, 1),
                },
            ],
        },
        GoldenRow {
            index: 5,
            pattern: pat(&[&[1, 3, 4, 6], &[2, 5]]),
            entries: vec![GoldenEntry {
                label: "(0, pi, 0, 0, pi, 0)",
                point: vec![0.0, PI, 0.0, 0.0, PI, 0.0],
                family: false,
                counts: (3, 1, 1),
                interval: (2, 5),
                signature: (2, 3, 1),
            }],
        },
        GoldenRow {
            index: 6,
            pattern: pat(&[&[1, 2, 3], &[4, 5, 6]]),
            entries: vec![GoldenEntry {
                label: "(0, 0, 0, pi, pi, pi)",
                point: vec![0.0, 0.0, 0.0, PI, PI, PI],
                family: false,
                counts: (2, 1, 1),
                interval: (1, 5),
                signature: (1, 3, 2),
            }],
        },
        GoldenRow {
            index: 7,
            pattern: pat(&[&[1, 2], &[3, 6], &[4, 5]]),
            entries: vec![GoldenEntry {
                label: "(0, 0, 0, pi, pi, 0)",
                point: vec![0.0, 0.0, 0.0, PI, PI, 0.0],
                family: false,
                counts: (2, 1, 1),
                interval: (1, 5),
                signature: (2, 2, 2),
            }],
        },
        GoldenRow {
            index: 8,
            pattern: pat(&[&[1, 4], &[2, 5], &[3, 6]]),
            entries: vec![GoldenEntry {
                label: "(0, 4pi/3, 2pi/3, 0, 4pi/3, 2pi/3)",
                point: vec![
                    0.0,
                    4.0 * PI / 3.0,
                    2.0 * PI / 3.0,
                    0.0,
                    4.0 * PI / 3.0,
                    2.0 * PI / 3.0,
                ],
                family: false,
                counts: (6, 1, 1),
                interval: (5, 5),
                signature: (5, 1, 0),
            }],
        },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::VectorField;
    use crate::synchrony::is_balanced;

    #[test]
    fn fixture_names_resolve() {
        for name in ["ring3", "ring13", "g5", "g12", "fig1", "fig2", "fig5"] {
            assert!(fixture_graph(name).is_ok(), "{name}");
        }
        assert!(fixture_graph("ring2").is_err());
        assert!(fixture_graph("g4").is_err());
        assert!(fixture_graph("nope").is_err());
        assert!(fixture_system("kuramoto-g6").is_ok());
        assert!(fixture_system("g6-tilde").is_ok());
        assert!(fixture_system("nope").is_err());
    }

    #[test]
    fn kuramoto_g6_field_values() {
        let sys = fixture_system("kuramoto-g6").unwrap();
        // total synchrony is an equilibrium
        let f = sys.evaluate(&[0.7; 6]);
        assert!(f.iter().all(|v| v.abs() < 1e-12));
        // cell 1 hears 2, 3, 5, 6
        let x = [0.0, 0.3, -0.4, 0.1, 0.9, 0.2];
        let f = sys.evaluate(&x);
        let expect: f64 = [1usize, 2, 4, 5].iter().map(|&d| (x[d] - x[0]).sin()).sum();
        assert!((f[0] - expect).abs() < 1e-12);
    }

    #[test]
    fn golden_rows_are_balanced_and_contain_their_points() {
        let g = NetworkGraph::make_gn(6).unwrap();
        let table = golden_table();
        assert_eq!(table.len(), 8);
        for row in &table {
            assert_eq!(is_balanced(&g, &row.pattern), Ok(true), "row {}", row.index);
            for e in &row.entries {
                // the pattern's identifications hold at the point
                for c in 0..6 {
                    for d in 0..6 {
                        if row.pattern.same_class(c, d) {
                            let diff = (e.point[c] - e.point[d]).rem_euclid(2.0 * PI);
                            let dist = diff.min(2.0 * PI - diff);
                            assert!(dist < 1e-9, "row {} {}", row.index, e.label);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn golden_points_are_equilibria() {
        let sys = fixture_system("kuramoto-g6").unwrap();
        for row in &golden_table() {
            for e in &row.entries {
                let f = sys.evaluate(&e.point);
                let res = f.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                assert!(res < 1e-9, "row {} {}: residual {res}", row.index, e.label);
                let (lo, hi) = e.interval;
                assert!(e.signature.0 >= lo && e.signature.0 <= hi);
                assert_eq!(e.signature.0 + e.signature.1 + e.signature.2, 6);
            }
        }
    }

    #[test]
    fn expectations_cover_embedded_graphs() {
        assert_eq!(exotic_expectation("g6"), Some(0));
        assert_eq!(exotic_expectation("fig1"), Some(53));
        assert_eq!(exotic_expectation("somewhere-else"), None);
        assert_eq!(census_expectation("g6"), Some(31));
        assert_eq!(census_expectation("fig5"), Some(13));
    }
}
