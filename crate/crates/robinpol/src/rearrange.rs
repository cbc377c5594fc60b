//! Rearrangements of grid functions: the decreasing rearrangement f*, the
//! symmetric-decreasing rearrangement f#, polarization toward zero, the
//! associated equality sets, and iterated polarization driving a source to
//! its symmetric-decreasing shape.
//!
//! All rearrangements here are exact cell permutations, so equidistribution
//! and the equality diagnostics are decided bitwise, with no tolerance.
//!
//! Placement convention for f#: sort the values in non-increasing order,
//! then place the k-th largest (k = 0, 1, 2, ...) at cell n/2 - 1 - k/2 for
//! even k and at cell n/2 + (k-1)/2 for odd k. The result is non-increasing
//! in cell distance from 0 and idempotent. Any per-pair mirror image of this
//! arrangement is equally symmetric decreasing at cell resolution; the class
//! of all of them is what polarization can reach, and `sdr_class_distance`
//! measures the L1 gap to that class (see `iterate_to_sdr`).
//!
//! Polarization centers live on the half-grid: cell boundaries and cell
//! midpoints. Reflection about either kind is still an exact cell
//! permutation (midpoint centers fix their own cell), and midpoint centers
//! are what make "no polarization changes f" equivalent to "f is symmetric
//! decreasing at cell resolution": with boundary centers alone, arrays such
//! as [1, 3, 10, 5] on four cells are fixed by every admissible center
//! without being symmetric decreasing.

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction, DOMAIN_HALF_WIDTH};
use crate::rng::SplitMix64;

/// A polarization center b in (-pi, 0) union (0, pi), restricted to the
/// half-grid (cell boundaries and cell midpoints). The reflection is
/// x -> 2b - x and the half-line H is the side of b containing 0.
///
/// Internally b is the half-grid index q in 1..=2n-1, q != n, with
/// b = -pi + q * pi / n. Even q is the cell boundary q/2; odd q is the
/// midpoint of cell (q-1)/2.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PolarizationCenter {
    n_cells: usize,
    q: usize,
}

impl PolarizationCenter {
    fn new(n_cells: usize, q: usize) -> Self {
        debug_assert!(q >= 1 && q < 2 * n_cells && q != n_cells);
        Self { n_cells, q }
    }

    /// Center at the interior cell boundary j (1 <= j <= n-1, j != n/2).
    pub fn at_boundary(grid: &Grid, j: usize) -> Result<Self> {
        let n = grid.n_cells();
        if j == 0 || j >= n || j == n / 2 {
            return Err(Error::CenterOutOfRange(grid.boundary(j.min(n))));
        }
        Ok(Self::new(n, 2 * j))
    }

    /// Center at the midpoint of cell i.
    pub fn at_cell_midpoint(grid: &Grid, i: usize) -> Result<Self> {
        let n = grid.n_cells();
        if i >= n {
            return Err(Error::CenterOutOfRange(f64::NAN));
        }
        Ok(Self::new(n, 2 * i + 1))
    }

    /// Snap a real center to the half-grid; rejects b = 0, b = +-pi,
    /// points outside (-pi, pi), and points farther than 1e-9 from the
    /// half-grid.
    pub fn from_b(grid: &Grid, b: f64) -> Result<Self> {
        if !b.is_finite() || b <= -DOMAIN_HALF_WIDTH || b >= DOMAIN_HALF_WIDTH {
            return Err(Error::CenterOutOfRange(b));
        }
        let n = grid.n_cells();
        let half_h = 0.5 * grid.cell_width();
        let q = ((b + DOMAIN_HALF_WIDTH) / half_h).round() as i64;
        if q < 1 || q as usize >= 2 * n {
            return Err(Error::CenterOffGrid(b));
        }
        let q = q as usize;
        let snapped = -DOMAIN_HALF_WIDTH + q as f64 * half_h;
        if (snapped - b).abs() > 1e-9 {
            return Err(Error::CenterOffGrid(b));
        }
        if q == n {
            return Err(Error::CenterOutOfRange(b));
        }
        Ok(Self::new(n, q))
    }

    /// Every admissible center on the half-grid, ordered by increasing
    /// distance from 0 with the positive one first at each distance.
    pub fn admissible_centers(grid: &Grid) -> Vec<Self> {
        let n = grid.n_cells();
        let mut centers: Vec<Self> = (1..2 * n).filter(|&q| q != n).map(|q| Self::new(n, q)).collect();
        centers.sort_by_key(|c| (c.q.abs_diff(n), usize::from(c.q < n)));
        centers
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    /// The center as a point of (-pi, 0) union (0, pi).
    pub fn b(&self) -> f64 {
        -DOMAIN_HALF_WIDTH + self.q as f64 * DOMAIN_HALF_WIDTH / self.n_cells as f64
    }

    pub fn is_boundary(&self) -> bool {
        self.q % 2 == 0
    }

    /// True when H (the side containing 0) is the left half-line, i.e.
    /// b > 0.
    pub fn h_side_is_left(&self) -> bool {
        self.q > self.n_cells
    }

    /// Cell pairs (i, j) with i < j swapped by the reflection; cells whose
    /// mirror image leaves [-pi, pi] are absent (the zero extension never
    /// changes a non-negative function there), and an odd-q center also
    /// fixes its own straddled cell.
    pub fn reflected_pairs(&self) -> Vec<(usize, usize)> {
        let lo = self.q.saturating_sub(self.n_cells);
        (lo..self.q / 2).map(|i| (i, self.q - 1 - i)).collect()
    }

    /// Cells lying entirely inside H, paired with their mirror cell when it
    /// exists (`None` means the mirror leaves the interval and the zero
    /// extension applies).
    fn h_cells_with_mirrors(&self) -> Vec<(usize, Option<usize>)> {
        let n = self.n_cells;
        let q = self.q;
        let mut out = Vec::new();
        if q > n {
            // H = (-inf, b): cells 0 .. ceil(q/2) - 1, excluding a straddled cell.
            for i in 0..q / 2 {
                let m = q - 1 - i;
                out.push((i, (m < n).then_some(m)));
            }
        } else {
            // H = (b, +inf): cells with left edge at or right of b.
            for i in q.div_ceil(2)..n {
                let m = (q as i64 - 1 - i as i64 >= 0).then(|| q - 1 - i);
                out.push((i, m));
            }
        }
        out
    }
}

impl std::fmt::Display for PolarizationCenter {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.b())
    }
}

/// Values sorted in non-increasing order left-to-right: the decreasing
/// rearrangement transported to [-pi, pi].
pub fn decreasing_rearrangement(f: &GridFunction) -> GridFunction {
    let mut values = f.values().to_vec();
    values.sort_by(|a, b| b.total_cmp(a));
    GridFunction::new(f.grid().clone(), values).expect("permutation of valid values")
}

/// Symmetric-decreasing rearrangement at cell resolution, under the
/// documented center-out placement convention.
pub fn sdr(f: &GridFunction) -> GridFunction {
    let n = f.grid().n_cells();
    let mut sorted = f.values().to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut values = vec![0.0; n];
    for (k, v) in sorted.into_iter().enumerate() {
        let cell = if k % 2 == 0 { n / 2 - 1 - k / 2 } else { n / 2 + (k - 1) / 2 };
        values[cell] = v;
    }
    GridFunction::new(f.grid().clone(), values).expect("permutation of valid values")
}

/// Polarization of f toward zero with respect to the center: on the H side
/// each cell keeps the larger of its own and its mirror value, on the far
/// side the smaller. An exact cell permutation of f.
pub fn polarize(f: &GridFunction, center: &PolarizationCenter) -> GridFunction {
    assert_eq!(
        f.grid().n_cells(),
        center.n_cells,
        "polarization center belongs to a different grid"
    );
    let mut values = f.values().to_vec();
    let left_is_h = center.h_side_is_left();
    for (i, j) in center.reflected_pairs() {
        let (a, b) = (values[i], values[j]);
        let (hi, lo) = if left_is_h { (i, j) } else { (j, i) };
        values[hi] = a.max(b);
        values[lo] = a.min(b);
    }
    GridFunction::new(f.grid().clone(), values).expect("permutation of valid values")
}

/// True iff the two functions share a grid and their sorted value multisets
/// agree exactly.
pub fn is_equidistributed(f: &GridFunction, g: &GridFunction) -> bool {
    if f.grid() != g.grid() {
        return false;
    }
    let mut a = f.values().to_vec();
    let mut b = g.values().to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    a == b
}

/// Discrete equality-violation set for an inequality diagnostic: its
/// measure, the H-side cells realizing it (one-dimensional sets), and the
/// ordered cell pairs realizing it (two-dimensional sets).
#[derive(Debug, Clone, PartialEq)]
pub struct EqualitySetReport {
    pub measure: f64,
    pub witness_cells: Vec<usize>,
    pub witness_pairs: Vec<(usize, usize)>,
}

/// The set deciding equality in the polarization product inequality: cells
/// y in H whose mirror ybar satisfies either f(y) < f(ybar), g(y) > g(ybar)
/// or f(y) > f(ybar), g(y) < g(ybar). Mirrors outside [-pi, pi] read the
/// zero extension. Measure = cell_width x (number of flagged cells).
pub fn polarization_equality_set(
    f: &GridFunction,
    g: &GridFunction,
    center: &PolarizationCenter,
) -> EqualitySetReport {
    assert_eq!(f.grid(), g.grid(), "equality set needs a common grid");
    assert_eq!(f.grid().n_cells(), center.n_cells);
    let fv = f.values();
    let gv = g.values();
    let mut witness_cells = Vec::new();
    for (i, mirror) in center.h_cells_with_mirrors() {
        let (f_m, g_m) = match mirror {
            Some(m) => (fv[m], gv[m]),
            None => (0.0, 0.0),
        };
        let b_side = fv[i] < f_m && gv[i] > g_m;
        let c_side = fv[i] > f_m && gv[i] < g_m;
        if b_side || c_side {
            witness_cells.push(i);
        }
    }
    EqualitySetReport {
        measure: f.grid().cell_width() * witness_cells.len() as f64,
        witness_cells,
        witness_pairs: Vec::new(),
    }
}

/// The two-dimensional set deciding equality in the rearrangement product
/// inequality: ordered cell pairs (x, y) with f(x) < f(y) and g(x) > g(y).
/// Measure = cell_width^2 x (number of pairs).
pub fn sdr_equality_set(f: &GridFunction, g: &GridFunction) -> EqualitySetReport {
    assert_eq!(f.grid(), g.grid(), "equality set needs a common grid");
    let fv = f.values();
    let gv = g.values();
    let mut witness_pairs = Vec::new();
    for x in 0..fv.len() {
        for y in 0..fv.len() {
            if fv[x] < fv[y] && gv[x] > gv[y] {
                witness_pairs.push((x, y));
            }
        }
    }
    let h = f.grid().cell_width();
    EqualitySetReport {
        measure: h * h * witness_pairs.len() as f64,
        witness_cells: Vec::new(),
        witness_pairs,
    }
}

/// True iff f is symmetric decreasing at cell resolution: taking the cell
/// pairs center-out, every value in a pair is >= every value in the next
/// pair out. Exactly the functions fixed by all admissible polarizations.
pub fn is_cell_sdr(f: &GridFunction) -> bool {
    let v = f.values();
    let half = v.len() / 2;
    for d in 0..half.saturating_sub(1) {
        let inner = v[half - 1 - d].min(v[half + d]);
        let outer = v[half - 2 - d].max(v[half + 1 + d]);
        if inner < outer {
            return false;
        }
    }
    true
}

/// L1 distance from f to the nearest symmetric-decreasing arrangement of
/// f#'s values (the placement convention and all its per-pair mirror
/// images). Zero exactly when f is symmetric decreasing at cell
/// resolution.
pub fn sdr_class_distance(f: &GridFunction) -> f64 {
    let target = sdr(f);
    let v = f.values();
    let t = target.values();
    let half = v.len() / 2;
    let mut sum = 0.0;
    for d in 0..half {
        let (a, b) = (v[half - 1 - d], v[half + d]);
        let (hi, lo) = (a.max(b), a.min(b));
        // Convention puts the larger value of the pair on the left cell.
        sum += (hi - t[half - 1 - d]).abs() + (lo - t[half + d]).abs();
    }
    f.grid().cell_width() * sum
}

/// Deterministic scan for a center whose polarization changes f; none is
/// returned exactly when f is symmetric decreasing at cell resolution.
/// Scans by increasing |b| with the positive center first at each distance.
pub fn find_nontrivial_polarization(f: &GridFunction) -> Option<PolarizationCenter> {
    PolarizationCenter::admissible_centers(f.grid())
        .into_iter()
        .find(|c| polarize(f, c).values() != f.values())
}

/// Among centers whose polarization changes `current`, the one minimizing
/// the L1 distance of the result to `target`; ties resolve to the earliest
/// center in the pre-sorted list (smallest |b|, positive first).
fn best_greedy_move(
    current: &GridFunction,
    target: &GridFunction,
    centers: &[PolarizationCenter],
) -> Option<(PolarizationCenter, GridFunction)> {
    let mut best: Option<(PolarizationCenter, GridFunction, f64)> = None;
    for c in centers {
        let cand = polarize(current, c);
        if cand.values() == current.values() {
            continue;
        }
        let d = cand.l1_distance(target);
        if best.as_ref().map(|(_, _, bd)| d < *bd).unwrap_or(true) {
            best = Some((*c, cand, d));
        }
    }
    best.map(|(c, cand, _)| (c, cand))
}

/// The single polarization step the greedy strategy would take from f:
/// among centers that change f, minimize the L1 distance to the
/// placement-convention f# (ties: smallest |b|, then b > 0). None exactly
/// when f is symmetric decreasing at cell resolution.
pub fn greedy_polarization(f: &GridFunction) -> Option<(PolarizationCenter, GridFunction)> {
    let target = sdr(f);
    let centers = PolarizationCenter::admissible_centers(f.grid());
    best_greedy_move(f, &target, &centers)
}

/// How `iterate_to_sdr` picks its next center.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    /// Among centers that change f, minimize the L1 distance of the result
    /// to the placement-convention f#; ties go to the smallest |b|, then to
    /// b > 0.
    Greedy,
    /// Uniformly among centers that change f, with a private seeded RNG.
    Random { seed: u64 },
}

/// One polarization step of the iteration: the center used, the function
/// after the step, and its distances to the symmetric-decreasing target.
#[derive(Debug, Clone)]
pub struct IterationStep {
    pub center: PolarizationCenter,
    pub f: GridFunction,
    pub l1_to_sdr: f64,
    pub class_distance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConvergenceOutcome {
    /// No admissible polarization changes the function any more (it is
    /// symmetric decreasing at cell resolution), or the L1 distance to the
    /// placement-convention f# dropped to the tolerance.
    Converged,
    /// max_iters steps were taken without reaching either condition.
    MaxItersReached,
}

/// Full record of an iterated-polarization run.
#[derive(Debug, Clone)]
pub struct ConvergenceRun {
    pub initial: GridFunction,
    pub target: GridFunction,
    pub steps: Vec<IterationStep>,
    pub outcome: ConvergenceOutcome,
}

impl ConvergenceRun {
    pub fn final_function(&self) -> &GridFunction {
        self.steps.last().map(|s| &s.f).unwrap_or(&self.initial)
    }

    pub fn final_l1_to_sdr(&self) -> f64 {
        self.steps
            .last()
            .map(|s| s.l1_to_sdr)
            .unwrap_or_else(|| self.initial.l1_distance(&self.target))
    }

    pub fn final_class_distance(&self) -> f64 {
        self.steps
            .last()
            .map(|s| s.class_distance)
            .unwrap_or_else(|| sdr_class_distance(&self.initial))
    }

    /// Per-step trace as CSV with columns step,b,l1_distance.
    pub fn trace_csv(&self) -> String {
        let mut out = String::from("step,b,l1_distance\n");
        for (k, s) in self.steps.iter().enumerate() {
            out.push_str(&format!("{},{},{}\n", k + 1, s.center.b(), s.l1_to_sdr));
        }
        out
    }

    /// Parse the step,b,l1_distance CSV written by `trace_csv`.
    pub fn parse_trace_csv(text: &str, path: &str) -> Result<Vec<(usize, f64, f64)>> {
        let mut rows = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || (idx == 0 && line.starts_with("step,")) {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            let err = |msg: String| Error::Parse {
                path: path.to_string(),
                line: idx + 1,
                msg,
            };
            if fields.len() != 3 {
                return Err(err(format!("expected 3 fields, got {}", fields.len())));
            }
            let step = fields[0].trim().parse().map_err(|e| err(format!("bad step: {e}")))?;
            let b = fields[1].trim().parse().map_err(|e| err(format!("bad b: {e}")))?;
            let d = fields[2].trim().parse().map_err(|e| err(format!("bad distance: {e}")))?;
            rows.push((step, b, d));
        }
        Ok(rows)
    }
}

/// Drive f to its symmetric-decreasing rearrangement by iterated
/// polarization. Every step is a genuine change (no-op centers are never
/// chosen) and moves a larger value strictly closer to 0, so the greedy
/// strategy terminates; the L1 distance to the placement-convention f#
/// never increases along the way. Termination with no changing center left
/// means the function reached the symmetric-decreasing class exactly
/// (class distance 0); the remaining distance to the convention array is
/// whatever per-pair mirror freedom remains.
pub fn iterate_to_sdr(
    f: &GridFunction,
    strategy: Strategy,
    tol: f64,
    max_iters: usize,
) -> Result<ConvergenceRun> {
    // tol = 0 is meaningful: stop only at a polarization fixed point (or
    // an exact hit on the convention array).
    if !tol.is_finite() || tol < 0.0 {
        return Err(Error::OutsideInterval {
            name: "tol",
            value: tol,
            lo: 0.0,
            hi: f64::INFINITY,
        });
    }
    if max_iters < 1 {
        return Err(Error::OutsideInterval {
            name: "max_iters",
            value: 0.0,
            lo: 1.0,
            hi: f64::INFINITY,
        });
    }
    let target = sdr(f);
    let centers = PolarizationCenter::admissible_centers(f.grid());
    let mut rng = match strategy {
        Strategy::Random { seed } => Some(SplitMix64::new(seed)),
        Strategy::Greedy => None,
    };
    let mut current = f.clone();
    let mut steps: Vec<IterationStep> = Vec::new();
    let mut outcome = ConvergenceOutcome::MaxItersReached;
    for _ in 0..max_iters {
        if current.l1_distance(&target) <= tol {
            outcome = ConvergenceOutcome::Converged;
            break;
        }
        let chosen = match &mut rng {
            // Greedy: centers are pre-sorted by (|b|, positive first), and
            // best_greedy_move's strict comparison implements the
            // tie-breaking rule.
            None => best_greedy_move(&current, &target, &centers),
            Some(rng) => {
                let moves: Vec<(PolarizationCenter, GridFunction)> = centers
                    .iter()
                    .filter_map(|c| {
                        let cand = polarize(&current, c);
                        (cand.values() != current.values()).then_some((*c, cand))
                    })
                    .collect();
                if moves.is_empty() {
                    None
                } else {
                    let k = rng.next_below(moves.len() as u64) as usize;
                    Some(moves[k].clone())
                }
            }
        };
        let Some((center, next)) = chosen else {
            // Fixed point of every polarization: symmetric decreasing at
            // cell resolution.
            outcome = ConvergenceOutcome::Converged;
            break;
        };
        let l1 = next.l1_distance(&target);
        let class = sdr_class_distance(&next);
        steps.push(IterationStep {
            center,
            f: next.clone(),
            l1_to_sdr: l1,
            class_distance: class,
        });
        current = next;
    }
    // A zero class distance reached on the very last permitted step still
    // counts as convergence.
    if outcome == ConvergenceOutcome::MaxItersReached {
        let done = steps
            .last()
            .map(|s| s.class_distance == 0.0 || s.l1_to_sdr <= tol)
            .unwrap_or(false);
        if done {
            outcome = ConvergenceOutcome::Converged;
        }
    }
    Ok(ConvergenceRun {
        initial: f.clone(),
        target,
        steps,
        outcome,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const PI: f64 = std::f64::consts::PI;

    fn gf(n: usize, values: &[f64]) -> GridFunction {
        GridFunction::new(Grid::new(n).unwrap(), values.to_vec()).unwrap()
    }

    fn random_source(n: usize, rng: &mut SplitMix64) -> GridFunction {
        let values = (0..n).map(|_| (rng.next_below(8)) as f64 / 2.0).collect();
        GridFunction::new(Grid::new(n).unwrap(), values).unwrap()
    }

    #[test]
    fn decreasing_rearrangement_sorts_descending() {
        let f = gf(4, &[1.0, 3.0, 2.0, 0.0]);
        assert_eq!(decreasing_rearrangement(&f).values(), &[3.0, 2.0, 1.0, 0.0]);
        let c = gf(4, &[2.0; 4]);
        assert_eq!(decreasing_rearrangement(&c).values(), c.values());
        let mut rng = SplitMix64::new(9);
        for _ in 0..50 {
            let f = random_source(16, &mut rng);
            let star = decreasing_rearrangement(&f);
            assert!(is_equidistributed(&f, &star));
            assert!(star.values().windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn sdr_worked_example_and_idempotence() {
        let f = gf(4, &[0.0, 4.0, 1.0, 3.0]);
        let s = sdr(&f);
        assert_eq!(s.values(), &[1.0, 4.0, 3.0, 0.0]);
        assert_eq!(sdr(&s).values(), s.values(), "idempotence");
        assert!(is_equidistributed(&f, &s));
        assert!(is_cell_sdr(&s));
    }

    #[test]
    fn sdr_of_indicator_occupies_cells_nearest_zero() {
        let n = 8;
        for m in 1..=n {
            let mut values = vec![0.0; n];
            for v in values.iter_mut().take(m) {
                *v = 1.0;
            }
            let f = gf(n, &values);
            let s = sdr(&f);
            let support: Vec<usize> = (0..n).filter(|&i| s.values()[i] == 1.0).collect();
            let lo = n / 2 - m.div_ceil(2);
            let hi = n / 2 + m / 2;
            let expected: Vec<usize> = (lo..hi).collect();
            assert_eq!(support, expected, "m={m}");
        }
    }

    #[test]
    fn sdr_is_monotone_in_cell_distance() {
        let mut rng = SplitMix64::new(77);
        for _ in 0..100 {
            let f = random_source(16, &mut rng);
            let s = sdr(&f);
            assert!(is_cell_sdr(&s));
            // Convention detail: the larger value of each pair sits left.
            let v = s.values();
            for d in 0..8 {
                assert!(v[8 - 1 - d] >= v[8 + d], "pair {d} not left-heavy");
            }
        }
    }

    #[test]
    fn polarize_moves_far_indicator_next_to_zero() {
        // f = indicator of [3pi/4, pi], b = pi/2: reflection sends the
        // support to [0, pi/4].
        let n = 8;
        let mut values = vec![0.0; n];
        values[7] = 1.0;
        let f = gf(n, &values);
        let grid = f.grid().clone();
        let center = PolarizationCenter::from_b(&grid, PI / 2.0).unwrap();
        assert!(center.is_boundary());
        let p = polarize(&f, &center);
        let mut expected = vec![0.0; n];
        expected[4] = 1.0;
        assert_eq!(p.values(), &expected[..]);
    }

    #[test]
    fn polarize_fixes_symmetric_decreasing_functions() {
        let mut rng = SplitMix64::new(5150);
        for _ in 0..20 {
            let f = random_source(12, &mut rng);
            let s = sdr(&f);
            for c in PolarizationCenter::admissible_centers(s.grid()) {
                assert_eq!(polarize(&s, &c).values(), s.values(), "center b={}", c.b());
            }
        }
    }

    #[test]
    fn polarize_is_idempotent_and_equidistributes() {
        let mut rng = SplitMix64::new(31);
        for _ in 0..50 {
            let f = random_source(10, &mut rng);
            for c in PolarizationCenter::admissible_centers(f.grid()) {
                let once = polarize(&f, &c);
                assert!(is_equidistributed(&f, &once), "not a rearrangement");
                let twice = polarize(&once, &c);
                assert_eq!(once.values(), twice.values(), "idempotence at b={}", c.b());
            }
        }
    }

    #[test]
    fn equidistribution_detects_multiset_mismatch() {
        let f = gf(2, &[1.0, 2.0]);
        let g = gf(2, &[1.0, 3.0]);
        assert!(!is_equidistributed(&f, &g));
        assert!(is_equidistributed(&f, &sdr(&f)));
        let different_grid = gf(4, &[1.0, 2.0, 0.0, 0.0]);
        assert!(!is_equidistributed(&f, &different_grid));
    }

    #[test]
    fn polarization_center_validation() {
        let grid = Grid::new(4).unwrap();
        assert!(PolarizationCenter::from_b(&grid, 0.0).is_err());
        assert!(PolarizationCenter::from_b(&grid, PI).is_err());
        assert!(PolarizationCenter::from_b(&grid, -PI).is_err());
        assert!(PolarizationCenter::from_b(&grid, 0.3).is_err(), "off the half-grid");
        let c = PolarizationCenter::from_b(&grid, PI / 2.0).unwrap();
        assert!(c.is_boundary());
        assert!((c.b() - PI / 2.0).abs() < 1e-15);
        let m = PolarizationCenter::from_b(&grid, PI / 4.0).unwrap();
        assert!(!m.is_boundary(), "pi/4 is a cell midpoint on n=4");
        // Snapping absorbs tiny noise.
        let s = PolarizationCenter::from_b(&grid, PI / 2.0 + 1e-12).unwrap();
        assert_eq!(s, c);
        assert_eq!(PolarizationCenter::admissible_centers(&grid).len(), 2 * 4 - 2);
        assert!(PolarizationCenter::at_boundary(&grid, 2).is_err(), "b=0 excluded");
        assert!(PolarizationCenter::at_boundary(&grid, 0).is_err());
        assert!(PolarizationCenter::at_cell_midpoint(&grid, 1).is_ok());
    }

    #[test]
    fn equality_set_empty_for_trivial_cases() {
        let mut rng = SplitMix64::new(404);
        let f = random_source(8, &mut rng);
        let g = GridFunction::constant(f.grid().clone(), 1.5).unwrap();
        for c in PolarizationCenter::admissible_centers(f.grid()) {
            let same = polarization_equality_set(&f, &f, &c);
            assert_eq!(same.measure, 0.0, "f against itself");
            let constant = polarization_equality_set(&f, &g, &c);
            assert_eq!(constant.measure, 0.0, "constant second factor");
        }
        assert_eq!(sdr_equality_set(&f, &f).measure, 0.0);
    }

    #[test]
    fn polarization_equality_set_flags_the_far_indicator() {
        // f = indicator of [3pi/4, pi], g = the kernel slice at 0 sampled on
        // the grid, b = pi/2: exactly one H-cell (the mirror of the support)
        // has f(y) < f(ybar) while g(y) > g(ybar).
        let n = 8;
        let grid = Grid::new(n).unwrap();
        let mut values = vec![0.0; n];
        values[7] = 1.0;
        let f = GridFunction::new(grid.clone(), values).unwrap();
        let g = GridFunction::sample(grid.clone(), |y| PI - 0.5 * y.abs()).unwrap();
        let c = PolarizationCenter::from_b(&grid, PI / 2.0).unwrap();
        let report = polarization_equality_set(&f, &g, &c);
        assert_eq!(report.witness_cells, vec![4]);
        assert!((report.measure - PI / 4.0).abs() < 1e-15);
    }

    #[test]
    fn sdr_equality_set_counts_discordant_pairs() {
        let f = gf(2, &[0.0, 1.0]);
        let g = gf(2, &[1.0, 0.0]);
        let report = sdr_equality_set(&f, &g);
        assert_eq!(report.witness_pairs, vec![(0, 1)]);
        assert!((report.measure - PI * PI).abs() < 1e-12);
        // Comonotone pair: no violations.
        let a = gf(4, &[3.0, 2.0, 1.0, 0.0]);
        let b = gf(4, &[9.0, 4.0, 4.0, 1.0]);
        assert_eq!(sdr_equality_set(&a, &b).measure, 0.0);
    }

    #[test]
    fn find_nontrivial_polarization_contract() {
        let mut rng = SplitMix64::new(606);
        for _ in 0..30 {
            let f = random_source(12, &mut rng);
            let s = sdr(&f);
            assert!(find_nontrivial_polarization(&s).is_none());
        }
        let zero = gf(8, &[0.0; 8]);
        assert!(find_nontrivial_polarization(&zero).is_none());
        // Indicator of [pi/2, pi] moves toward 0.
        let mut values = vec![0.0; 8];
        values[6] = 1.0;
        values[7] = 1.0;
        let f = gf(8, &values);
        assert!(find_nontrivial_polarization(&f).is_some());
    }

    #[test]
    fn boundary_centers_alone_would_miss_this_fixed_point() {
        // Regression for the half-grid design: [1, 3, 10, 5] is fixed by
        // both admissible boundary centers yet is not symmetric decreasing;
        // a midpoint center must catch it.
        let f = gf(4, &[1.0, 3.0, 10.0, 5.0]);
        let grid = f.grid().clone();
        for j in [1usize, 3] {
            let c = PolarizationCenter::at_boundary(&grid, j).unwrap();
            assert_eq!(polarize(&f, &c).values(), f.values(), "boundary j={j} is a no-op");
        }
        assert!(!is_cell_sdr(&f));
        let c = find_nontrivial_polarization(&f).expect("midpoint center must act");
        assert!(!c.is_boundary());
        assert!((c.b() - PI / 4.0).abs() < 1e-15, "found b={}", c.b());
    }

    #[test]
    fn fixed_points_of_all_polarizations_are_exactly_cell_sdr() {
        // Exhaustive over small value alphabets.
        for n in [4usize, 6] {
            let levels = [0.0, 1.0, 2.0];
            let total = levels.len().pow(n as u32);
            let mut fixed = 0;
            for code in 0..total {
                let mut c = code;
                let values: Vec<f64> = (0..n)
                    .map(|_| {
                        let v = levels[c % levels.len()];
                        c /= levels.len();
                        v
                    })
                    .collect();
                let f = gf(n, &values);
                let none_found = find_nontrivial_polarization(&f).is_none();
                let monotone = is_cell_sdr(&f);
                let class_zero = sdr_class_distance(&f) == 0.0;
                assert_eq!(none_found, monotone, "mismatch at {values:?}");
                assert_eq!(monotone, class_zero, "class distance off at {values:?}");
                fixed += usize::from(none_found);
            }
            println!("n={n}: {fixed}/{total} arrays are cell-resolution symmetric decreasing");
            assert!(fixed > 0 && fixed < total);
        }
    }

    #[test]
    fn class_distance_matches_brute_force_over_mirror_images() {
        let mut rng = SplitMix64::new(2718);
        for _ in 0..40 {
            let f = random_source(8, &mut rng);
            let target = sdr(&f);
            let t = target.values();
            let mut best = f64::INFINITY;
            for mask in 0u32..(1 << 4) {
                let mut arrangement = t.to_vec();
                for d in 0..4 {
                    if mask & (1 << d) != 0 {
                        arrangement.swap(4 - 1 - d, 4 + d);
                    }
                }
                let g = gf(8, &arrangement);
                best = best.min(f.l1_distance(&g));
            }
            let got = sdr_class_distance(&f);
            assert!(
                (got - best).abs() <= 1e-12,
                "class distance {got} vs brute force {best}"
            );
        }
    }

    #[test]
    fn greedy_iteration_reaches_the_indicator_target_exactly() {
        let n = 8;
        let mut values = vec![0.0; n];
        values[6] = 1.0;
        values[7] = 1.0;
        let f = gf(n, &values);
        let run = iterate_to_sdr(&f, Strategy::Greedy, 1e-12, 100).unwrap();
        assert_eq!(run.outcome, ConvergenceOutcome::Converged);
        assert_eq!(run.final_function().values(), sdr(&f).values());
        assert_eq!(run.final_l1_to_sdr(), 0.0);
        println!("indicator converged in {} steps", run.steps.len());
        for w in run.steps.windows(2) {
            assert!(w[1].l1_to_sdr <= w[0].l1_to_sdr + 1e-15, "distance increased");
        }
    }

    #[test]
    fn greedy_iteration_always_lands_in_the_sdr_class() {
        let mut rng = SplitMix64::new(123456);
        for trial in 0..25 {
            let f = random_source(16, &mut rng);
            let run = iterate_to_sdr(&f, Strategy::Greedy, 1e-12, 10_000).unwrap();
            assert_eq!(run.outcome, ConvergenceOutcome::Converged, "trial {trial}");
            assert_eq!(run.final_class_distance(), 0.0, "trial {trial}");
            assert!(is_equidistributed(run.final_function(), &f));
            assert!(is_cell_sdr(run.final_function()));
            let mut prev = f.l1_distance(&run.target);
            for s in &run.steps {
                assert!(s.l1_to_sdr <= prev + 1e-15, "array distance increased");
                prev = s.l1_to_sdr;
            }
        }
    }

    #[test]
    fn already_symmetric_decreasing_input_converges_with_no_steps() {
        let f = sdr(&gf(8, &[0.0, 2.0, 1.0, 4.0, 3.0, 0.5, 1.5, 2.5]));
        let run = iterate_to_sdr(&f, Strategy::Greedy, 1e-12, 10).unwrap();
        assert_eq!(run.outcome, ConvergenceOutcome::Converged);
        assert!(run.steps.is_empty());
    }

    #[test]
    fn random_strategy_is_reproducible_and_converges() {
        let mut rng = SplitMix64::new(9001);
        let f = random_source(16, &mut rng);
        let a = iterate_to_sdr(&f, Strategy::Random { seed: 42 }, 1e-12, 10_000).unwrap();
        let b = iterate_to_sdr(&f, Strategy::Random { seed: 42 }, 1e-12, 10_000).unwrap();
        assert_eq!(a.outcome, ConvergenceOutcome::Converged);
        assert_eq!(a.steps.len(), b.steps.len());
        for (x, y) in a.steps.iter().zip(&b.steps) {
            assert_eq!(x.center, y.center);
        }
        assert_eq!(a.final_class_distance(), 0.0);
        let c = iterate_to_sdr(&f, Strategy::Random { seed: 43 }, 1e-12, 10_000).unwrap();
        assert_eq!(c.outcome, ConvergenceOutcome::Converged);
        println!(
            "random strategy: seed 42 took {} steps, seed 43 took {}",
            a.steps.len(),
            c.steps.len()
        );
    }

    #[test]
    fn max_iters_is_reported_not_crashed() {
        // The two masses need different centers (pair sums 8 and 23), so no
        // single polarization can finish this source.
        let mut values = vec![0.0; 16];
        values[15] = 3.0;
        values[0] = 1.0;
        let f = gf(16, &values);
        let run = iterate_to_sdr(&f, Strategy::Greedy, 1e-15, 1).unwrap();
        assert_eq!(run.outcome, ConvergenceOutcome::MaxItersReached);
        assert_eq!(run.steps.len(), 1);
        assert!(run.final_l1_to_sdr() > 0.0);
    }

    #[test]
    fn iteration_parameter_validation() {
        let f = gf(4, &[1.0, 0.0, 0.0, 0.0]);
        assert!(iterate_to_sdr(&f, Strategy::Greedy, -1.0, 10).is_err());
        assert!(iterate_to_sdr(&f, Strategy::Greedy, f64::NAN, 10).is_err());
        assert!(iterate_to_sdr(&f, Strategy::Greedy, 1e-9, 0).is_err());
        // tol = 0 is the pure fixed-point stop and must be accepted.
        assert!(iterate_to_sdr(&f, Strategy::Greedy, 0.0, 10).is_ok());
    }

    #[test]
    fn trace_csv_round_trips() {
        let mut values = vec![0.0; 8];
        values[7] = 2.0;
        values[6] = 1.0;
        let f = gf(8, &values);
        let run = iterate_to_sdr(&f, Strategy::Greedy, 1e-12, 100).unwrap();
        assert!(!run.steps.is_empty());
        let csv = run.trace_csv();
        let rows = ConvergenceRun::parse_trace_csv(&csv, "mem").unwrap();
        assert_eq!(rows.len(), run.steps.len());
        for (k, (step, b, d)) in rows.iter().enumerate() {
            assert_eq!(*step, k + 1);
            assert_eq!(*b, run.steps[k].center.b());
            assert_eq!(*d, run.steps[k].l1_to_sdr);
        }
        assert!(ConvergenceRun::parse_trace_csv("step,b,l1_distance\n1,o,3\n", "mem").is_err());
        assert!(ConvergenceRun::parse_trace_csv("1,2\n", "mem").is_err());
    }
}
