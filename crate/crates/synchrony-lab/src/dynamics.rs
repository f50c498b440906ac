//! Trajectory integration, equilibrium search inside synchrony
//! subspaces, and stability classification through the signed-Laplacian
//! spectrum of the Jacobian.

use std::f64::consts::PI;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::fields::{check_coupling_sign, AdditiveLaplacianSystem, VectorField};
use crate::graph::NetworkClass;
use crate::linalg::{Matrix, UnionFind};
use crate::partition::Partition;
use crate::spectra::{analyze_matrix, SignedSpectrumReport, SpectraError};
use crate::synchrony::{enumerate_synchrony, is_balanced, SynchronyError, SynchronyLattice};

#[derive(Debug, Error, PartialEq)]
pub enum DynamicsError {
    #[error("pattern is not balanced; its subspace is not flow invariant")]
    NotBalanced,
    #[error("point is not an equilibrium (residual {residual:.3e} > tol {tol:.3e})")]
    NotEquilibrium { residual: f64, tol: f64 },
    #[error("potential rose by {increase:.3e} in one step at t = {t:.4}; reduce dt")]
    StepTooLarge { t: f64, increase: f64 },
    #[error("check requires a regular graph (one edge class, equal input counts)")]
    GraphNotRegular,
    #[error(transparent)]
    Synchrony(#[from] SynchronyError),
    #[error(transparent)]
    Spectra(#[from] SpectraError),
    #[error(transparent)]
    Automorphism(#[from] crate::automorphism::AutomorphismError),
}

pub const NEWTON_RESIDUAL_TOL: f64 = 1e-12;
pub const NEWTON_STEP_TOL: f64 = 1e-9;
pub const NEWTON_MAX_HALVINGS: usize = 30;
pub const DEDUP_RADIUS: f64 = 1e-6;
/// clusters this close are merged when the segment between them stays
/// at equilibrium residual throughout (degenerate root directions)
pub const DEDUP_SEGMENT_RADIUS: f64 = 1e-3;
pub const DEDUP_SEGMENT_RESIDUAL: f64 = 1e-10;
pub const EQUILIBRIUM_TOL: f64 = 1e-8;
pub const COINCIDENCE_TOL: f64 = 1e-5;

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Largest pairwise coordinate difference; zero exactly on the diagonal.
pub fn pairwise_spread(x: &[f64]) -> f64 {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in x {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if x.is_empty() {
        0.0
    } else {
        hi - lo
    }
}

fn torus_dist(a: f64, b: f64) -> f64 {
    let r = (a - b).rem_euclid(2.0 * PI);
    r.min(2.0 * PI - r)
}

/// Parametrization of a balanced pattern's subspace by one value per
/// class, with the class containing cell 1 pinned to 0 (gauge).
#[derive(Debug, Clone)]
pub struct SynchronyChart {
    pattern: Partition,
    /// smallest cell of each class; class 0 contains cell 1
    reps: Vec<usize>,
}

impl SynchronyChart {
    pub fn new(pattern: &Partition) -> SynchronyChart {
        let mut reps = vec![usize::MAX; pattern.n_classes()];
        for c in (0..pattern.n_cells()).rev() {
            reps[pattern.class_of(c)] = c;
        }
        SynchronyChart { pattern: pattern.clone(), reps }
    }

    pub fn pattern(&self) -> &Partition {
        &self.pattern
    }

    /// Free coordinates left after pinning the gauge class.
    pub fn dof(&self) -> usize {
        self.pattern.n_classes() - 1
    }

    pub fn representatives(&self) -> &[usize] {
        &self.reps
    }

    /// Full state with class values (0, free[0], free[1], ...).
    pub fn embed(&self, free: &[f64]) -> Vec<f64> {
        assert_eq!(free.len(), self.dof());
        (0..self.pattern.n_cells())
            .map(|c| match self.pattern.class_of(c) {
                0 => 0.0,
                k => free[k - 1],
            })
            .collect()
    }

    /// Class values of a point in the subspace, shifted to the gauge.
    pub fn restrict(&self, x: &[f64]) -> Vec<f64> {
        let base = x[self.reps[0]];
        self.reps[1..].iter().map(|&r| x[r] - base).collect()
    }

    /// Residual components at the non-gauge class representatives.
    fn reduced_residual(&self, full_f: &[f64]) -> Vec<f64> {
        self.reps[1..].iter().map(|&r| full_f[r]).collect()
    }

    /// Derivative of the reduced residual in the free coordinates:
    /// column b sums the full Jacobian over the cells of class b+1.
    fn reduced_jacobian(&self, sys: &AdditiveLaplacianSystem, free: &[f64]) -> Matrix {
        let x = self.embed(free);
        let jf = sys.jacobian(&x);
        let m = self.dof();
        let mut out = Matrix::zeros(m);
        for (i, &r) in self.reps[1..].iter().enumerate() {
            for d in 0..self.pattern.n_cells() {
                let k = self.pattern.class_of(d);
                if k > 0 {
                    out.add_to(i, k - 1, jf.get(r, d));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    /// descent potential along the run, when the field has one
    pub potentials: Option<Vec<f64>>,
}

impl Trajectory {
    pub fn final_state(&self) -> &[f64] {
        self.states.last().expect("trajectory has at least the initial state")
    }
}

/// Classical fourth-order Runge-Kutta with fixed step. Fails when the
/// descent potential rises by more than 1e-8 in one step, which signals
/// a step size too large for the stiffness at hand.
pub fn integrate(
    field: &dyn VectorField,
    x0: &[f64],
    t_end: f64,
    dt: f64,
) -> Result<Trajectory, DynamicsError> {
    assert!(dt > 0.0, "dt must be positive");
    let n = field.dim();
    assert_eq!(x0.len(), n);
    let has_potential = field.descent_potential(x0).is_some();
    let mut times = vec![0.0];
    let mut states = vec![x0.to_vec()];
    let mut potentials = has_potential.then(|| vec![field.descent_potential(x0).unwrap()]);
    let mut x = x0.to_vec();
    let mut t = 0.0;
    while t < t_end - 1e-12 {
        let h = dt.min(t_end - t);
        let k1 = field.evaluate(&x);
        let mid1: Vec<f64> = x.iter().zip(&k1).map(|(a, k)| a + 0.5 * h * k).collect();
        let k2 = field.evaluate(&mid1);
        let mid2: Vec<f64> = x.iter().zip(&k2).map(|(a, k)| a + 0.5 * h * k).collect();
        let k3 = field.evaluate(&mid2);
        let end: Vec<f64> = x.iter().zip(&k3).map(|(a, k)| a + h * k).collect();
        let k4 = field.evaluate(&end);
        for i in 0..n {
            x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        t += h;
        if let Some(ps) = &mut potentials {
            let p = field.descent_potential(&x).unwrap();
            let prev = *ps.last().unwrap();
            if p > prev + 1e-8 {
                return Err(DynamicsError::StepTooLarge { t, increase: p - prev });
            }
            ps.push(p);
        }
        times.push(t);
        states.push(x.clone());
    }
    Ok(Trajectory { times, states, potentials })
}

#[derive(Debug, Clone, Serialize)]
pub struct TubeReport {
    pub trials: usize,
    pub epsilon: f64,
    /// coupling sign condition held on (-epsilon, epsilon)
    pub sign_condition_ok: bool,
    /// off-diagonal samples where f . (x - mean) failed to be negative
    pub dissipation_failures: usize,
    /// diagonal samples where f failed to vanish
    pub diagonal_failures: usize,
    pub pass: bool,
}

/// Sample points whose coordinates stay within epsilon of each other
/// and check the two defining properties of the invariant tube: strict
/// dissipation off the diagonal, equilibrium exactly on it.
pub fn lyapunov_tube_check<R: Rng>(
    sys: &AdditiveLaplacianSystem,
    epsilon: f64,
    n_trials: usize,
    rng: &mut R,
) -> TubeReport {
    let n = sys.dim();
    let sign = check_coupling_sign(sys, epsilon);
    let mut dissipation_failures = 0;
    let mut diagonal_failures = 0;
    for _ in 0..n_trials {
        let base = rng.gen_range(-PI..PI);
        let x: Vec<f64> =
            (0..n).map(|_| base + rng.gen_range(-epsilon / 2.0..epsilon / 2.0)).collect();
        if pairwise_spread(&x) < 1e-9 {
            continue;
        }
        let f = sys.evaluate(&x);
        let mean = x.iter().sum::<f64>() / n as f64;
        let product: f64 = f.iter().zip(&x).map(|(fi, xi)| fi * (xi - mean)).sum();
        if product >= 0.0 {
            dissipation_failures += 1;
        }
    }
    for _ in 0..n_trials.div_ceil(10) {
        let base = rng.gen_range(-PI..PI);
        let x = vec![base; n];
        let f = sys.evaluate(&x);
        if inf_norm(&f) > 1e-12 {
            diagonal_failures += 1;
        }
    }
    TubeReport {
        trials: n_trials,
        epsilon,
        sign_condition_ok: sign.sampled_holds,
        dissipation_failures,
        diagonal_failures,
        pass: sign.sampled_holds && dissipation_failures == 0 && diagonal_failures == 0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StabilityVerdict {
    /// no positive eigenvalue, only the structural kernel direction
    StableModuloDiagonal,
    Unstable,
    /// no positive eigenvalue but extra kernel directions
    Degenerate,
}

impl std::fmt::Display for StabilityVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            StabilityVerdict::StableModuloDiagonal => "stable_modulo_diagonal",
            StabilityVerdict::Unstable => "unstable",
            StabilityVerdict::Degenerate => "degenerate",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EquilibriumRecord {
    /// gauge-normalized state (first coordinate 0; coordinates reduced
    /// mod 2 pi when the system closes on the torus)
    pub point: Vec<f64>,
    /// balanced pattern with the most identifications holding at the point
    pub pattern: Partition,
    pub residual: f64,
    pub spectrum: SignedSpectrumReport,
    pub verdict: StabilityVerdict,
    /// kernel dimension at least 2: likely part of a continuum
    pub family_hint: bool,
}

fn verdict_from_signature(sig: (usize, usize, usize)) -> StabilityVerdict {
    match sig {
        (0, z, _) if z <= 1 => StabilityVerdict::StableModuloDiagonal,
        (0, _, _) => StabilityVerdict::Degenerate,
        _ => StabilityVerdict::Unstable,
    }
}

/// Partition grouping coordinates equal within tol (mod 2 pi on tori).
pub fn coincidence_partition(x: &[f64], tol: f64, torus: bool) -> Partition {
    let n = x.len();
    let mut uf = UnionFind::new(n);
    for i in 0..n {
        for j in (i + 1)..n {
            let d = if torus { torus_dist(x[i], x[j]) } else { (x[i] - x[j]).abs() };
            if d <= tol {
                uf.union(i, j);
            }
        }
    }
    let mut labels = vec![0usize; n];
    for (k, group) in uf.groups().iter().enumerate() {
        for &c in group {
            labels[c] = k;
        }
    }
    Partition::from_labels(&labels)
}

fn finest_pattern_containing(lattice: &SynchronyLattice, x: &[f64], torus: bool) -> Partition {
    let q = coincidence_partition(x, COINCIDENCE_TOL, torus);
    for entry in &lattice.patterns {
        if entry.partition.refines(&q) {
            return entry.partition.clone();
        }
    }
    // the singleton partition is always balanced and refines everything
    Partition::singletons(x.len())
}

fn normalize_point(sys: &AdditiveLaplacianSystem, x: &[f64]) -> Vec<f64> {
    let base = x[0];
    let torus = sys.torus_reducible();
    x.iter()
        .map(|v| {
            let shifted = v - base;
            if torus {
                shifted.rem_euclid(2.0 * PI)
            } else {
                shifted
            }
        })
        .collect()
}

fn classify_with_lattice(
    sys: &AdditiveLaplacianSystem,
    point: &[f64],
    tol: f64,
    lattice: &SynchronyLattice,
) -> Result<EquilibriumRecord, DynamicsError> {
    let f = sys.evaluate(point);
    let residual = inf_norm(&f);
    if residual > tol {
        return Err(DynamicsError::NotEquilibrium { residual, tol });
    }
    let point = normalize_point(sys, point);
    let jac = sys.jacobian(&point);
    let spectrum = analyze_matrix(&jac, None, None)?;
    let verdict = verdict_from_signature(spectrum.signature);
    let family_hint = spectrum.signature.1 >= 2;
    let pattern = finest_pattern_containing(lattice, &point, sys.torus_reducible());
    Ok(EquilibriumRecord { point, pattern, residual, spectrum, verdict, family_hint })
}

/// Classify an equilibrium: exact Jacobian, signed-graph component
/// counts with their n_plus interval, and the eigenvalue signature.
pub fn classify_stability(
    sys: &AdditiveLaplacianSystem,
    point: &[f64],
    tol: Option<f64>,
) -> Result<EquilibriumRecord, DynamicsError> {
    let lattice = enumerate_synchrony(sys.graph())?;
    classify_with_lattice(sys, point, tol.unwrap_or(EQUILIBRIUM_TOL), &lattice)
}

#[derive(Debug, Clone)]
pub struct SearchOptions {
    /// starting points per free coordinate; defaults to 8 on the torus
    /// and 9 on a box (an odd count puts multiples of pi/2 on the grid)
    pub grid: Option<usize>,
    /// half-width of the search box for non-torus systems
    pub box_radius: f64,
    pub max_iters: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions { grid: None, box_radius: 2.0 * PI, max_iters: 100 }
    }
}

/// Sum of the per-cell constants; nonzero means the field's component
/// sum never vanishes and no equilibria exist anywhere.
pub fn constant_sum_imbalance(sys: &AdditiveLaplacianSystem) -> Option<f64> {
    let s = sys.constant_sum();
    (s.abs() > 1e-12).then_some(s)
}

fn newton_from(
    sys: &AdditiveLaplacianSystem,
    chart: &SynchronyChart,
    start: &[f64],
    max_iters: usize,
) -> Option<(Vec<f64>, f64)> {
    let mut free = start.to_vec();
    let mut prev_step = f64::INFINITY;
    for _ in 0..max_iters {
        let x = chart.embed(&free);
        let f = sys.evaluate(&x);
        let fnorm = inf_norm(&f);
        if fnorm <= NEWTON_RESIDUAL_TOL && prev_step <= NEWTON_STEP_TOL {
            return Some((free, fnorm));
        }
        let r = chart.reduced_residual(&f);
        let jr = chart.reduced_jacobian(sys, &free);
        let rhs: Vec<f64> = r.iter().map(|v| -v).collect();
        let delta = match jr.solve(&rhs) {
            Some(d) => d,
            // singular reduced Jacobian: keep the point only if it is
            // already converged (grid points can land on degenerate roots)
            None => return (fnorm <= NEWTON_RESIDUAL_TOL).then_some((free, fnorm)),
        };
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..=NEWTON_MAX_HALVINGS {
            let trial: Vec<f64> = free.iter().zip(&delta).map(|(v, d)| v + lambda * d).collect();
            let tf = sys.evaluate(&chart.embed(&trial));
            if inf_norm(&tf) <= fnorm {
                prev_step = lambda * inf_norm(&delta);
                free = trial;
                accepted = true;
                break;
            }
            lambda /= 2.0;
        }
        if !accepted {
            return None;
        }
    }
    None
}

fn free_distance(a: &[f64], b: &[f64], torus: bool) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| if torus { torus_dist(*x, *y) } else { (x - y).abs() })
        .fold(0.0f64, f64::max)
}

/// Shift each coordinate of b by a multiple of 2 pi to the lift nearest a.
fn nearest_lift(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + ((y - x + PI).rem_euclid(2.0 * PI) - PI)).collect()
}

fn segment_stays_at_equilibrium(
    sys: &AdditiveLaplacianSystem,
    chart: &SynchronyChart,
    a: &[f64],
    b: &[f64],
    torus: bool,
) -> bool {
    let b = if torus { nearest_lift(a, b) } else { b.to_vec() };
    for s in 1..=10 {
        let t = s as f64 / 11.0;
        let p: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + t * (y - x)).collect();
        let f = sys.evaluate(&chart.embed(&p));
        if inf_norm(&f) > DEDUP_SEGMENT_RESIDUAL {
            return false;
        }
    }
    true
}

/// Multistart damped Newton inside a balanced pattern's chart.
///
/// Non-converged starts are dropped. Converged roots are deduplicated
/// at radius 1e-6; roots within 1e-3 are also merged when the straight
/// segment between them stays at equilibrium residual, which collapses
/// the numerically indistinguishable swarms that appear around roots
/// degenerate in some chart direction. Each cluster reports its member
/// with the smallest residual.
pub fn find_equilibria(
    sys: &AdditiveLaplacianSystem,
    pattern: &Partition,
    opts: &SearchOptions,
) -> Result<Vec<EquilibriumRecord>, DynamicsError> {
    if !is_balanced(sys.graph(), pattern)? {
        return Err(DynamicsError::NotBalanced);
    }
    let lattice = enumerate_synchrony(sys.graph())?;
    let chart = SynchronyChart::new(pattern);
    let torus = sys.torus_reducible();
    let dof = chart.dof();

    if dof == 0 {
        let x = chart.embed(&[]);
        let mut out = Vec::new();
        if inf_norm(&sys.evaluate(&x)) <= NEWTON_RESIDUAL_TOL {
            out.push(classify_with_lattice(sys, &x, EQUILIBRIUM_TOL, &lattice)?);
        }
        return Ok(out);
    }

    let m = opts.grid.unwrap_or(if torus { 8 } else { 9 });
    assert!(m >= 2, "need at least two grid points per coordinate");
    let axis: Vec<f64> = if torus {
        (0..m).map(|i| 2.0 * PI * i as f64 / m as f64).collect()
    } else {
        let r = opts.box_radius;
        (0..m).map(|i| -r + 2.0 * r * i as f64 / (m - 1) as f64).collect()
    };
    let n_starts = axis.len().pow(dof as u32);
    let starts: Vec<Vec<f64>> = (0..n_starts)
        .map(|mut idx| {
            (0..dof)
                .map(|_| {
                    let v = axis[idx % m];
                    idx /= m;
                    v
                })
                .collect()
        })
        .collect();

    let mut roots: Vec<(Vec<f64>, f64)> =
        starts.par_iter().filter_map(|s| newton_from(sys, &chart, s, opts.max_iters)).collect();
    if torus {
        for (root, _) in &mut roots {
            for v in root.iter_mut() {
                *v = v.rem_euclid(2.0 * PI);
            }
        }
    } else {
        // keep only roots inside the search box (Newton may wander out)
        roots.retain(|(root, _)| root.iter().all(|v| v.abs() <= opts.box_radius + 1e-6));
    }
    roots.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

    let mut uf = UnionFind::new(roots.len());
    for i in 0..roots.len() {
        for j in (i + 1)..roots.len() {
            let d = free_distance(&roots[i].0, &roots[j].0, torus);
            if d <= DEDUP_RADIUS
                || (d <= DEDUP_SEGMENT_RADIUS
                    && segment_stays_at_equilibrium(sys, &chart, &roots[i].0, &roots[j].0, torus))
            {
                uf.union(i, j);
            }
        }
    }
    let mut records = Vec::new();
    for cluster in uf.groups() {
        let best = cluster
            .iter()
            .map(|&i| &roots[i])
            .min_by(|a, b| (a.1, &a.0).partial_cmp(&(b.1, &b.0)).unwrap())
            .unwrap();
        let x = chart.embed(&best.0);
        records.push(classify_with_lattice(sys, &x, EQUILIBRIUM_TOL, &lattice)?);
    }
    records.sort_by(|a, b| a.point.partial_cmp(&b.point).unwrap());
    Ok(records)
}

#[derive(Debug, Clone, Serialize)]
pub struct GenericJacobianEntry {
    pub t: f64,
    pub alpha: f64,
    pub beta: f64,
    pub residual: f64,
    /// |beta| below 1e-10: the pattern-selection coefficient vanishes
    pub degenerate: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct GenericJacobianReport {
    pub entries: Vec<GenericJacobianEntry>,
    pub max_residual: f64,
    pub pass: bool,
}

/// At total-synchrony points of a regular graph the Jacobian collapses
/// to alpha I + beta A; recover the scalars by least squares and check
/// the fit is exact.
pub fn generic_jacobian_check<R: Rng>(
    sys: &AdditiveLaplacianSystem,
    n_points: usize,
    rng: &mut R,
) -> Result<GenericJacobianReport, DynamicsError> {
    if sys.graph().classify() != NetworkClass::Regular {
        return Err(DynamicsError::GraphNotRegular);
    }
    let n = sys.dim();
    let mats = sys.graph().adjacency_matrices();
    let a = &mats[0].entries;
    let a_dot_a: f64 = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| a.get(i, j) * a.get(i, j))
        .sum();
    let mut entries = Vec::with_capacity(n_points);
    let mut max_residual = 0.0f64;
    for _ in 0..n_points {
        let t = rng.gen_range(-PI..PI);
        let nu = vec![t; n];
        let jac = sys.jacobian(&nu);
        let alpha = jac.trace() / n as f64;
        let j_dot_a: f64 = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| jac.get(i, j) * a.get(i, j))
            .sum();
        let beta = if a_dot_a > 0.0 { j_dot_a / a_dot_a } else { 0.0 };
        let mut residual = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let fit = if i == j { alpha } else { 0.0 } + beta * a.get(i, j);
                residual = residual.max((jac.get(i, j) - fit).abs());
            }
        }
        max_residual = max_residual.max(residual);
        entries.push(GenericJacobianEntry {
            t,
            alpha,
            beta,
            residual,
            degenerate: beta.abs() < 1e-10,
        });
    }
    let pass = max_residual <= 1e-10;
    Ok(GenericJacobianReport { entries, max_residual, pass })
}

/// Tolerance for matching a census record against a tabulated point.
pub const TABLE_MATCH_TOL: f64 = 1e-4;

#[derive(Debug, Clone, Serialize)]
pub struct TableEntryResult {
    pub label: String,
    pub point: Vec<f64>,
    pub family: bool,
    /// (c(G+), c(G-), c(G)) computed at the point
    pub counts: (usize, usize, usize),
    pub interval: (usize, usize),
    pub signature: (usize, usize, usize),
    /// mismatches against the stored expectations; empty when clean
    pub diffs: Vec<String>,
    /// the chart census rediscovered this point (or, for points on a
    /// continuum, found a kernel-degenerate representative)
    pub census_found: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct TableRowResult {
    pub index: usize,
    pub pattern: Partition,
    /// the pattern's orbit appears among the group-conjugacy classes
    /// of the synchrony lattice
    pub conjugacy_found: bool,
    pub entries: Vec<TableEntryResult>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TableReport {
    pub rows: Vec<TableRowResult>,
    pub pass: bool,
}

/// Recompute the classification table for the six-cell sine system:
/// one row per group-conjugacy class of balanced patterns, and for
/// each tabulated critical point the component counts, the n_plus
/// interval, and the exact signature.
///
/// Every point is re-derived rather than echoed: the exact spectrum is
/// the authority, the stored values are expectations to diff against,
/// and an independent grid census of each row's chart must rediscover
/// the tabulated equilibria.
pub fn table1_report() -> Result<TableReport, DynamicsError> {
    let sys =
        crate::fixtures::fixture_system("kuramoto-g6").expect("built-in system is well formed");
    let lattice = enumerate_synchrony(sys.graph())?;
    let classes = crate::automorphism::conjugacy_group_patterns(sys.graph(), &lattice)?;
    let golden = crate::fixtures::golden_table();
    let mut rows = Vec::new();
    let mut pass = true;
    for row in &golden {
        let position = lattice.position_of(&row.pattern);
        let conjugacy_found =
            position.is_some_and(|idx| classes.iter().any(|c| c.members.contains(&idx)));
        if !conjugacy_found {
            pass = false;
        }
        let records = find_equilibria(&sys, &row.pattern, &SearchOptions::default())?;
        let mut notes = Vec::new();
        if row.entries.is_empty() {
            // this class's chart holds no equilibria of its own: every
            // critical point found there satisfies extra coincidences
            // and is tabulated under a finer class
            let own = records.iter().filter(|r| r.pattern == row.pattern).count();
            if own == 0 {
                notes.push("all census equilibria in this chart lie in finer patterns".to_string());
            } else {
                notes.push(format!(
                    "{own} census equilibria have this pattern as their finest; \
                     the table expects none"
                ));
                pass = false;
            }
        }
        let mut entries = Vec::new();
        for e in &row.entries {
            let rec = classify_with_lattice(&sys, &e.point, EQUILIBRIUM_TOL, &lattice)?;
            let counts = (
                rec.spectrum.counts.c_g_plus,
                rec.spectrum.counts.c_g_minus,
                rec.spectrum.counts.c_g,
            );
            let interval = rec.spectrum.bounds.n_plus;
            let signature = rec.spectrum.signature;
            let mut diffs = Vec::new();
            if counts != e.counts {
                diffs.push(format!("counts {counts:?}, expected {:?}", e.counts));
            }
            if interval != e.interval {
                diffs.push(format!("interval {interval:?}, expected {:?}", e.interval));
            }
            if signature != e.signature {
                diffs.push(format!("signature {signature:?}, expected {:?}", e.signature));
            }
            let target = normalize_point(&sys, &e.point);
            let point_found = records.iter().any(|r| {
                r.point.iter().zip(&target).all(|(x, y)| torus_dist(*x, *y) <= TABLE_MATCH_TOL)
            });
            let on_continuum = e.family || e.signature.1 >= 2;
            let census_found =
                point_found || (on_continuum && records.iter().any(|r| r.family_hint));
            if !diffs.is_empty() || !census_found {
                pass = false;
            }
            entries.push(TableEntryResult {
                label: e.label.to_string(),
                point: target,
                family: e.family,
                counts,
                interval,
                signature,
                diffs,
                census_found,
            });
        }
        rows.push(TableRowResult {
            index: row.index,
            pattern: row.pattern.clone(),
            conjugacy_found,
            entries,
            notes,
        });
    }
    Ok(TableReport { rows, pass })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::fixture_system;
    use crate::graph::NetworkGraph;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::BTreeMap;

    fn kuramoto() -> AdditiveLaplacianSystem {
        fixture_system("kuramoto-g6").unwrap()
    }

    fn tilde() -> AdditiveLaplacianSystem {
        fixture_system("g6-tilde").unwrap()
    }

    #[test]
    fn chart_embed_restrict_roundtrip() {
        let p = Partition::from_classes(6, &[&[1, 5], &[2, 4], &[3], &[6]]).unwrap();
        let chart = SynchronyChart::new(&p);
        assert_eq!(chart.dof(), 3);
        let free = [0.4, -1.1, 2.2];
        let x = chart.embed(&free);
        assert_eq!(x, vec![0.0, 0.4, -1.1, 0.4, 0.0, 2.2]);
        assert_eq!(chart.restrict(&x), free.to_vec());
        // restrict composes with a diagonal shift
        let shifted: Vec<f64> = x.iter().map(|v| v + 3.3).collect();
        let back = chart.restrict(&shifted);
        for (u, v) in back.iter().zip(&free) {
            assert!((u - v).abs() < 1e-12);
        }
    }

    #[test]
    fn field_preserves_balanced_subspaces() {
        let sys = kuramoto();
        let p = Partition::from_classes(6, &[&[1, 4], &[2, 5], &[3], &[6]]).unwrap();
        let chart = SynchronyChart::new(&p);
        let f = sys.evaluate(&chart.embed(&[1.1, 0.7, -0.3]));
        // components agree within classes
        assert!((f[0] - f[3]).abs() < 1e-12);
        assert!((f[1] - f[4]).abs() < 1e-12);
    }

    #[test]
    fn integration_basics() {
        let sys = kuramoto();
        // constant on the diagonal
        let traj = integrate(&sys, &[0.3; 6], 1.0, 0.01).unwrap();
        for s in &traj.states {
            for v in s {
                assert!((v - 0.3).abs() < 1e-12);
            }
        }
        // perturbations fall back to the diagonal, potential never rises
        let x0 = [0.31, 0.28, 0.33, 0.30, 0.27, 0.32];
        let traj = integrate(&sys, &x0, 20.0, 0.02).unwrap();
        assert!(pairwise_spread(traj.final_state()) < 1e-6);
        let ps = traj.potentials.as_ref().unwrap();
        for w in ps.windows(2) {
            assert!(w[1] <= w[0] + 1e-8);
        }
        // coordinate sum is preserved (zero constants)
        let s0: f64 = x0.iter().sum();
        let s1: f64 = traj.final_state().iter().sum();
        assert!((s1 - s0).abs() < 1e-8);
    }

    #[test]
    fn oversized_step_is_reported() {
        let sys = kuramoto();
        let x0 = [0.0, 3.0, 1.0, 4.0, 2.0, 5.0];
        match integrate(&sys, &x0, 50.0, 2.5) {
            Err(DynamicsError::StepTooLarge { .. }) => {}
            other => panic!("expected step failure, got {other:?}"),
        }
    }

    #[test]
    fn tube_dissipation_holds() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let rep = lyapunov_tube_check(&kuramoto(), 1.0, 1000, &mut rng);
        assert!(rep.pass, "{rep:?}");
        let rep = lyapunov_tube_check(&tilde(), 1.0, 1000, &mut rng);
        assert!(rep.pass, "{rep:?}");
    }

    #[test]
    fn total_sync_spectrum_and_verdict() {
        let sys = kuramoto();
        let rec = classify_stability(&sys, &[0.0; 6], None).unwrap();
        assert_eq!(rec.verdict, StabilityVerdict::StableModuloDiagonal);
        assert_eq!(rec.spectrum.signature, (0, 1, 5));
        assert!(rec.pattern.is_total());
        let expect = [-6.0, -6.0, -4.0, -4.0, -4.0, 0.0];
        for (ev, ex) in rec.spectrum.eigenvalues.iter().zip(expect) {
            assert!((ev - ex).abs() < 1e-9, "{ev} vs {ex}");
        }
    }

    #[test]
    fn quarter_turn_point_classification() {
        let sys = kuramoto();
        let x = [0.0, 0.0, PI / 2.0, PI, PI, 1.5 * PI];
        let rec = classify_stability(&sys, &x, None).unwrap();
        let c = rec.spectrum.counts;
        assert_eq!((c.c_g, c.c_g_plus, c.c_g_minus), (3, 4, 4));
        assert_eq!(rec.spectrum.bounds.n_plus, (1, 2));
        assert_eq!(rec.spectrum.signature, (1, 4, 1));
        assert_eq!(rec.verdict, StabilityVerdict::Unstable);
        assert!(rec.spectrum.within_bounds);
        // an off-equilibrium point is rejected
        assert!(matches!(
            classify_stability(&sys, &[0.0, 0.1, 0.5, 1.0, 2.0, 3.0], None),
            Err(DynamicsError::NotEquilibrium { .. })
        ));
    }

    #[test]
    fn total_pattern_search_returns_origin() {
        let sys = kuramoto();
        let recs = find_equilibria(&sys, &Partition::total(6), &SearchOptions::default()).unwrap();
        assert_eq!(recs.len(), 1);
        assert!(inf_norm(&recs[0].point) < 1e-12);
        assert_eq!(recs[0].verdict, StabilityVerdict::StableModuloDiagonal);
    }

    #[test]
    fn unbalanced_pattern_is_rejected() {
        let sys = kuramoto();
        let p = Partition::from_classes(6, &[&[1, 2], &[3, 4, 5, 6]]).unwrap();
        assert_eq!(
            find_equilibria(&sys, &p, &SearchOptions::default()).unwrap_err(),
            DynamicsError::NotBalanced
        );
    }

    #[test]
    fn two_class_chart_census_is_grid_stable() {
        let sys = tilde();
        let p = Partition::from_classes(6, &[&[1, 5], &[2, 4], &[3], &[6]]).unwrap();
        for m in [8, 10, 12] {
            let opts = SearchOptions { grid: Some(m), ..SearchOptions::default() };
            let recs = find_equilibria(&sys, &p, &opts).unwrap();
            assert_eq!(
                recs.len(),
                5,
                "grid {m}: {:?}",
                recs.iter().map(|r| r.point.clone()).collect::<Vec<_>>()
            );
            for k in -2i32..=2 {
                let v = k as f64 * PI;
                let expect = [0.0, v, v, v, 0.0, 0.0];
                let rec = recs
                    .iter()
                    .find(|r| r.point.iter().zip(&expect).all(|(a, b)| (a - b).abs() <= 1e-4));
                let rec = rec.unwrap_or_else(|| panic!("grid {m}: missing k = {k}"));
                let want = if k % 2 == 0 {
                    StabilityVerdict::StableModuloDiagonal
                } else {
                    StabilityVerdict::Unstable
                };
                assert_eq!(rec.verdict, want, "grid {m}, k = {k}");
            }
        }
    }

    #[test]
    fn two_class_verdicts_alternate_with_parity() {
        let sys = tilde();
        for k in -2i32..=2 {
            let v = k as f64 * PI;
            let rec = classify_stability(&sys, &[0.0, v, v, v, 0.0, 0.0], None).unwrap();
            if k % 2 == 0 {
                assert_eq!(rec.verdict, StabilityVerdict::StableModuloDiagonal, "k={k}");
            } else {
                assert_eq!(rec.verdict, StabilityVerdict::Unstable, "k={k}");
                assert!(rec.family_hint);
                let expect = [-2.0, -2.0, 0.0, 0.0, 0.0, 4.0];
                for (ev, ex) in rec.spectrum.eigenvalues.iter().zip(expect) {
                    assert!((ev - ex).abs() < 1e-9);
                }
                let coarse = Partition::from_classes(6, &[&[1, 5, 6], &[2, 3, 4]]).unwrap();
                assert_eq!(rec.pattern, coarse, "k={k}");
            }
        }
    }

    #[test]
    fn pair_chart_census_on_torus() {
        let sys = kuramoto();
        let p = Partition::from_classes(6, &[&[1, 3, 4, 6], &[2, 5]]).unwrap();
        let recs = find_equilibria(&sys, &p, &SearchOptions::default()).unwrap();
        // a = 0 (diagonal) and a = pi
        assert_eq!(recs.len(), 2);
        let half_turn =
            recs.iter().find(|r| (r.point[1] - PI).abs() < 1e-9).expect("half-turn root");
        assert_eq!(half_turn.spectrum.signature, (2, 3, 1));
        assert_eq!(half_turn.verdict, StabilityVerdict::Unstable);
    }

    #[test]
    fn free_chart_families_and_isolated_points() {
        let sys = kuramoto();
        let p = Partition::from_classes(6, &[&[1, 4], &[2], &[3], &[5], &[6]]).unwrap();
        let recs = find_equilibria(&sys, &p, &SearchOptions::default()).unwrap();
        let near = |r: &EquilibriumRecord, q: &[f64]| {
            r.point.iter().zip(q).all(|(a, b)| torus_dist(*a, *b) <= 1e-4)
        };
        // isolated points
        let isolated = [
            [0.0, PI, 0.0, 0.0, PI, 0.0],
            [0.0, 4.0 * PI / 3.0, 2.0 * PI / 3.0, 0.0, 4.0 * PI / 3.0, 2.0 * PI / 3.0],
            [0.0, 0.0, PI, 0.0, 0.0, 0.0],
        ];
        for q in &isolated {
            assert!(recs.iter().any(|r| near(r, q)), "missing {q:?}");
        }
        // one-parameter families: x3 = x6 = pi with x5 = -x2 or x2 + pi
        let fam = |r: &EquilibriumRecord, flip: bool| {
            torus_dist(r.point[2], PI) < 1e-6
                && torus_dist(r.point[5], PI) < 1e-6
                && if flip {
                    torus_dist(r.point[4], 2.0 * PI - r.point[1]) < 1e-6
                } else {
                    torus_dist(r.point[4], r.point[1] + PI) < 1e-6
                }
        };
        assert!(recs.iter().any(|r| fam(r, true) && r.family_hint));
        assert!(recs.iter().any(|r| fam(r, false) && r.family_hint));
        // and the mirrored families with x2 = x5 = pi
        let fam2 = |r: &EquilibriumRecord, flip: bool| {
            torus_dist(r.point[1], PI) < 1e-6
                && torus_dist(r.point[4], PI) < 1e-6
                && if flip {
                    torus_dist(r.point[5], 2.0 * PI - r.point[2]) < 1e-6
                } else {
                    torus_dist(r.point[5], r.point[2] + PI) < 1e-6
                }
        };
        assert!(recs.iter().any(|r| fam2(r, true) && r.family_hint));
        assert!(recs.iter().any(|r| fam2(r, false) && r.family_hint));
    }

    #[test]
    fn generic_jacobian_fit() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let rep = generic_jacobian_check(&kuramoto(), 20, &mut rng).unwrap();
        assert!(rep.pass);
        for e in &rep.entries {
            assert!((e.alpha + 4.0).abs() < 1e-10);
            assert!((e.beta - 1.0).abs() < 1e-10);
            assert!(!e.degenerate);
        }

        let ring = NetworkGraph::make_ring(5).unwrap();
        let couplings: BTreeMap<String, crate::fields::OddCoupling> =
            [("a".to_string(), crate::fields::OddCoupling::Sine { amplitude: 2.0 })].into();
        let constants: BTreeMap<String, f64> = [("a".to_string(), 0.0)].into();
        let sys = crate::fields::build_additive_system(&ring, &couplings, &constants).unwrap();
        let rep = generic_jacobian_check(&sys, 5, &mut rng).unwrap();
        for e in &rep.entries {
            assert!((e.alpha + 4.0).abs() < 1e-10);
            assert!((e.beta - 2.0).abs() < 1e-10);
        }

        let zero: BTreeMap<String, crate::fields::OddCoupling> =
            [("a".to_string(), crate::fields::OddCoupling::Linear { slope: 0.0 })].into();
        let sys = crate::fields::build_additive_system(&ring, &zero, &constants).unwrap();
        let rep = generic_jacobian_check(&sys, 3, &mut rng).unwrap();
        assert!(rep.entries.iter().all(|e| e.degenerate && e.alpha.abs() < 1e-12));

        let fig2 = NetworkGraph::make_example("fig2").unwrap();
        let couplings2: BTreeMap<String, crate::fields::OddCoupling> = [
            ("theta".to_string(), crate::fields::OddCoupling::Sine { amplitude: 1.0 }),
            ("phi".to_string(), crate::fields::OddCoupling::Linear { slope: 1.0 }),
        ]
        .into();
        let constants2: BTreeMap<String, f64> =
            [("p".to_string(), 0.0), ("q".to_string(), 0.0)].into();
        let sys2 = crate::fields::build_additive_system(&fig2, &couplings2, &constants2).unwrap();
        assert_eq!(
            generic_jacobian_check(&sys2, 1, &mut rng).unwrap_err(),
            DynamicsError::GraphNotRegular
        );
    }

    #[test]
    fn classification_table_recomputes_clean() {
        let report = table1_report().unwrap();
        assert_eq!(report.rows.len(), 8);
        for row in &report.rows {
            assert!(row.conjugacy_found, "row {}", row.index);
            for e in &row.entries {
                assert!(e.diffs.is_empty(), "row {} {}: {:?}", row.index, e.label, e.diffs);
                assert!(e.census_found, "row {} {}", row.index, e.label);
            }
        }
        assert!(report.pass);
        // the first row tabulates nothing; the census confirms why
        assert!(report.rows[0].entries.is_empty());
        assert_eq!(
            report.rows[0].notes,
            vec!["all census equilibria in this chart lie in finer patterns".to_string()]
        );
        // spot-check the splay point: all comparisons are exact
        let last = report.rows.last().unwrap();
        assert_eq!(last.index, 8);
        let e = &last.entries[0];
        assert_eq!(e.counts, (6, 1, 1));
        assert_eq!(e.interval, (5, 5));
        assert_eq!(e.signature, (5, 1, 0));
    }

    #[test]
    fn imbalanced_constants_are_flagged() {
        let ring = NetworkGraph::make_ring(4).unwrap();
        let couplings: BTreeMap<String, crate::fields::OddCoupling> =
            [("a".to_string(), crate::fields::OddCoupling::Sine { amplitude: 1.0 })].into();
        let constants: BTreeMap<String, f64> = [("a".to_string(), 0.25)].into();
        let sys = crate::fields::build_additive_system(&ring, &couplings, &constants).unwrap();
        assert_eq!(constant_sum_imbalance(&sys), Some(1.0));
        assert_eq!(constant_sum_imbalance(&kuramoto()), None);
    }
}
