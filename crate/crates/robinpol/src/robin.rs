//! Solver for the one-dimensional Poisson problem -u'' = f on [-pi, pi]
//! under Robin boundary conditions
//!
//! ```text
//! -u'(-pi) + alpha * u(-pi) = 0,      u'(pi) + alpha * u(pi) = 0,
//! ```
//!
//! with alpha > 0. The solution operator has the explicit kernel
//!
//! ```text
//! G(x, y) = -1/2 * c * x * y - 1/2 * |x - y| + 1/(2c),
//! c = alpha / (1 + alpha * pi)  in (0, 1/pi),
//! ```
//!
//! and u_f(x) = integral of G(x, y) f(y) dy. For piecewise-constant sources
//! the integral is evaluated cell by cell in closed form (splitting the cell
//! containing the kink y = x), so `solve` is exact up to rounding.
//!
//! `solve_fd_oracle` is a deliberately independent route to the same
//! numbers: second-order central differences on a refined cell-centered
//! grid, ghost-free one-sided second-order Robin closures, and a tridiagonal
//! (Thomas) solve. It never touches the kernel, which makes it a genuine
//! cross-check with observable O(h^2) error.

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction, DOMAIN_HALF_WIDTH};

const PI: f64 = std::f64::consts::PI;

/// Robin boundary parameter alpha > 0 together with the derived kernel
/// constant c = alpha / (1 + alpha pi).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobinParams {
    alpha: f64,
    c: f64,
}

impl RobinParams {
    pub fn new(alpha: f64) -> Result<Self> {
        if !alpha.is_finite() || alpha <= 0.0 {
            return Err(Error::BadAlpha(alpha));
        }
        let c = alpha / (1.0 + alpha * PI);
        debug_assert!(c > 0.0 && c < 1.0 / PI);
        Ok(Self { alpha, c })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// The kernel constant c, always in (0, 1/pi).
    pub fn c(&self) -> f64 {
        self.c
    }
}

/// Kernel value G(x, y). Rejects arguments outside [-pi, pi].
pub fn green(params: &RobinParams, x: f64, y: f64) -> Result<f64> {
    for (name, v) in [("x", x), ("y", y)] {
        if !v.is_finite() || v.abs() > DOMAIN_HALF_WIDTH + 1e-12 {
            return Err(Error::OutsideDomain { name, value: v });
        }
    }
    Ok(green_raw(params, x, y))
}

#[inline]
fn green_raw(params: &RobinParams, x: f64, y: f64) -> f64 {
    -0.5 * params.c * x * y - 0.5 * (x - y).abs() + 0.5 / params.c
}

/// Integral of G(x, .) over the interval [a, b], in closed form. The kernel
/// is linear in y away from the kink at y = x, so the only case split is
/// whether x lies left of, inside, or right of [a, b].
fn green_cell_integral(params: &RobinParams, x: f64, a: f64, b: f64) -> f64 {
    debug_assert!(a <= b);
    let linear = -0.25 * params.c * x * (b * b - a * a) + (b - a) * 0.5 / params.c;
    let abs_part = if x <= a {
        0.25 * ((b - x) * (b - x) - (a - x) * (a - x))
    } else if x >= b {
        0.25 * ((x - a) * (x - a) - (x - b) * (x - b))
    } else {
        0.25 * ((x - a) * (x - a) + (b - x) * (b - x))
    };
    linear - abs_part
}

/// Evaluate u_f at an arbitrary point x in [-pi, pi], exactly (up to
/// rounding) for the piecewise-constant source f.
pub fn solve_at(params: &RobinParams, f: &GridFunction, x: f64) -> f64 {
    let grid = f.grid();
    let mut u = 0.0;
    for (i, &v) in f.values().iter().enumerate() {
        if v != 0.0 {
            u += v * green_cell_integral(params, x, grid.boundary(i), grid.boundary(i + 1));
        }
    }
    u
}

/// Temperature profile: u sampled at every cell boundary and every cell
/// midpoint. Within each cell u is a quadratic (the source is constant
/// there), so these samples determine it completely.
#[derive(Debug, Clone, PartialEq)]
pub struct TemperatureProfile {
    grid: Grid,
    boundary_values: Vec<f64>,
    midpoint_values: Vec<f64>,
    source_ref: String,
}

impl TemperatureProfile {
    pub fn new(
        grid: Grid,
        boundary_values: Vec<f64>,
        midpoint_values: Vec<f64>,
        source_ref: impl Into<String>,
    ) -> Self {
        assert_eq!(boundary_values.len(), grid.n_cells() + 1);
        assert_eq!(midpoint_values.len(), grid.n_cells());
        Self {
            grid,
            boundary_values,
            midpoint_values,
            source_ref: source_ref.into(),
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn boundary_values(&self) -> &[f64] {
        &self.boundary_values
    }

    pub fn midpoint_values(&self) -> &[f64] {
        &self.midpoint_values
    }

    /// Label describing where the profile came from (solver, oracle, ...).
    pub fn source_ref(&self) -> &str {
        &self.source_ref
    }

    pub fn max_boundary_value(&self) -> f64 {
        self.boundary_values.iter().cloned().fold(f64::MIN, f64::max)
    }

    pub fn min_boundary_value(&self) -> f64 {
        self.boundary_values.iter().cloned().fold(f64::MAX, f64::min)
    }

    /// Largest absolute difference against another profile over all sampled
    /// points (boundaries and midpoints).
    pub fn linf_gap(&self, other: &TemperatureProfile) -> f64 {
        assert_eq!(self.grid, other.grid, "linf_gap needs matching grids");
        let b = self
            .boundary_values
            .iter()
            .zip(&other.boundary_values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let m = self
            .midpoint_values
            .iter()
            .zip(&other.midpoint_values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        b.max(m)
    }

    /// Residuals of the two Robin conditions, computed from the sampled
    /// values with one-sided second-order differences on the half-spaced
    /// points (boundary, first midpoint, next boundary). For profiles
    /// produced by `solve` these are exact up to rounding because u is a
    /// single quadratic on the first and last cell.
    pub fn robin_residuals(&self, params: &RobinParams) -> (f64, f64) {
        let h = self.grid.cell_width();
        let n = self.grid.n_cells();
        let ub = &self.boundary_values;
        let um = &self.midpoint_values;
        let du_left = (-3.0 * ub[0] + 4.0 * um[0] - ub[1]) / h;
        let du_right = (3.0 * ub[n] - 4.0 * um[n - 1] + ub[n - 1]) / h;
        let left = -du_left + params.alpha * ub[0];
        let right = du_right + params.alpha * ub[n];
        (left.abs(), right.abs())
    }

    /// Largest centered second difference of the boundary samples; for a
    /// concave profile this should not exceed rounding noise.
    pub fn max_second_difference(&self) -> f64 {
        let ub = &self.boundary_values;
        let mut worst = f64::MIN;
        for j in 1..ub.len() - 1 {
            worst = worst.max(ub[j + 1] - 2.0 * ub[j] + ub[j - 1]);
        }
        worst
    }

    /// Export as CSV with columns x,u over the boundary points.
    pub fn to_xy_csv(&self) -> String {
        let mut out = String::from("x,u\n");
        for (j, &u) in self.boundary_values.iter().enumerate() {
            out.push_str(&format!("{},{}\n", self.grid.boundary(j), u));
        }
        out
    }

    /// Parse the x,u CSV emitted by `to_xy_csv`.
    pub fn parse_xy_csv(text: &str, path: &str) -> Result<Vec<(f64, f64)>> {
        let mut rows = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || (idx == 0 && line == "x,u") {
                continue;
            }
            let mut parts = line.split(',');
            let err = |msg: String| Error::Parse {
                path: path.to_string(),
                line: idx + 1,
                msg,
            };
            let x: f64 = parts
                .next()
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| err(format!("bad x field in {line:?}")))?;
            let u: f64 = parts
                .next()
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| err(format!("bad u field in {line:?}")))?;
            rows.push((x, u));
        }
        Ok(rows)
    }
}

/// Solve -u'' = f with the Robin conditions through the kernel
/// representation, sampling u at all cell boundaries and midpoints.
pub fn solve(params: &RobinParams, f: &GridFunction) -> TemperatureProfile {
    let grid = f.grid().clone();
    let n = grid.n_cells();
    let boundary_values = (0..=n)
        .map(|j| solve_at(params, f, grid.boundary(j)))
        .collect();
    let midpoint_values = (0..n)
        .map(|i| solve_at(params, f, grid.midpoint(i)))
        .collect();
    TemperatureProfile::new(grid, boundary_values, midpoint_values, "kernel")
}

/// Solve the tridiagonal system sub[i] u[i-1] + diag[i] u[i] + sup[i] u[i+1]
/// = rhs[i] by the Thomas algorithm. sub[0] and sup[n-1] are ignored.
fn thomas(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    assert!(sub.len() == n && sup.len() == n && rhs.len() == n);
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut pivot = diag[0];
    if pivot.abs() < 1e-300 {
        return Err(Error::SingularSystem(0));
    }
    c[0] = sup[0] / pivot;
    d[0] = rhs[0] / pivot;
    for i in 1..n {
        pivot = diag[i] - sub[i] * c[i - 1];
        if pivot.abs() < 1e-300 {
            return Err(Error::SingularSystem(i));
        }
        c[i] = sup[i] / pivot;
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / pivot;
    }
    let mut u = vec![0.0; n];
    u[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        u[i] = d[i] - c[i] * u[i + 1];
    }
    Ok(u)
}

/// Finite-difference oracle for `solve`, independent of the kernel.
///
/// Discretization: nodes at the centers of `refinement * n_cells` fine
/// cells, spacing h. Interior rows are the standard second difference
///
/// ```text
/// -u[i-1] + 2 u[i] - u[i+1] = h^2 f(z_i),
/// ```
///
/// where f is read off directly (nodes never sit on a source jump). The
/// Robin conditions are closed ghost-free with the quadratic through the
/// three nodes nearest each wall: with distances h/2, 3h/2, 5h/2 from the
/// wall,
///
/// ```text
/// u(wall)  ~ (15 u0 - 10 u1 + 3 u2) / 8,
/// u'(wall) ~ (-2 u0 + 3 u1 - u2) / h    (outward at the left wall),
/// ```
///
/// and the u2 term is eliminated with the first interior row, which leaves
/// the tridiagonal boundary row
///
/// ```text
/// (1 + 3 alpha h / 2) u0 - (1 + alpha h / 2) u1 = (1 + 3 alpha h / 8) h^2 f(z_1).
/// ```
///
/// The result is restricted back to the coarse profile points: coarse
/// boundaries take the mean of the two adjacent nodes (the wall points use
/// the quadratic extrapolation above), coarse midpoints take the aligned
/// node when the refinement is odd and the adjacent-node mean otherwise.
pub fn solve_fd_oracle(
    params: &RobinParams,
    f: &GridFunction,
    refinement: usize,
) -> Result<TemperatureProfile> {
    let grid = f.grid().clone();
    let n = grid.n_cells();
    let m = n.checked_mul(refinement).ok_or(Error::BadRefinement(refinement))?;
    if refinement < 1 || m < 4 {
        return Err(Error::BadRefinement(refinement));
    }
    let h = 2.0 * DOMAIN_HALF_WIDTH / m as f64;
    let alpha = params.alpha;

    // Source at fine nodes: node i lies strictly inside coarse cell i / refinement.
    let fv = f.values();
    let node_f = |i: usize| fv[i / refinement];

    let mut sub = vec![-1.0; m];
    let mut diag = vec![2.0; m];
    let mut sup = vec![-1.0; m];
    let mut rhs = vec![0.0; m];
    for (i, r) in rhs.iter_mut().enumerate() {
        *r = h * h * node_f(i);
    }
    diag[0] = 1.0 + 1.5 * alpha * h;
    sup[0] = -(1.0 + 0.5 * alpha * h);
    rhs[0] = (1.0 + 0.375 * alpha * h) * h * h * node_f(1);
    diag[m - 1] = 1.0 + 1.5 * alpha * h;
    sub[m - 1] = -(1.0 + 0.5 * alpha * h);
    rhs[m - 1] = (1.0 + 0.375 * alpha * h) * h * h * node_f(m - 2);

    let u = thomas(&sub, &diag, &sup, &rhs)?;

    let wall_left = (15.0 * u[0] - 10.0 * u[1] + 3.0 * u[2]) / 8.0;
    let wall_right = (15.0 * u[m - 1] - 10.0 * u[m - 2] + 3.0 * u[m - 3]) / 8.0;
    // Value at the fine-grid edge index e (0..=m), i.e. the point between
    // nodes e-1 and e.
    let at_edge = |e: usize| -> f64 {
        if e == 0 {
            wall_left
        } else if e == m {
            wall_right
        } else {
            0.5 * (u[e - 1] + u[e])
        }
    };

    let boundary_values = (0..=n).map(|j| at_edge(j * refinement)).collect();
    let midpoint_values = (0..n)
        .map(|i| {
            let twice = 2 * i * refinement + refinement; // midpoint position in half-node units
            if refinement % 2 == 1 {
                u[(twice - 1) / 2]
            } else {
                at_edge(twice / 2)
            }
        })
        .collect();
    Ok(TemperatureProfile::new(
        grid,
        boundary_values,
        midpoint_values,
        format!("fd-oracle:r{refinement}"),
    ))
}

/// Piecewise-linear function on [-pi, pi] given by breakpoints and values.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinear {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

impl PiecewiseLinear {
    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Slopes of the segments between consecutive breakpoints; zero-length
    /// segments (they occur in degenerate configurations) report slope 0.
    pub fn slopes(&self) -> Vec<f64> {
        self.breakpoints
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(x, v)| {
                let dx = x[1] - x[0];
                if dx.abs() < 1e-14 {
                    0.0
                } else {
                    (v[1] - v[0]) / dx
                }
            })
            .collect()
    }

    pub fn eval(&self, x: f64) -> f64 {
        let first = *self.breakpoints.first().unwrap();
        let last = *self.breakpoints.last().unwrap();
        debug_assert!(x >= first - 1e-12 && x <= last + 1e-12);
        let x = x.clamp(first, last);
        for k in 0..self.breakpoints.len() - 1 {
            let (a, b) = (self.breakpoints[k], self.breakpoints[k + 1]);
            if x <= b {
                if (b - a).abs() < 1e-14 {
                    return self.values[k + 1];
                }
                let t = (x - a) / (b - a);
                return self.values[k] + t * (self.values[k + 1] - self.values[k]);
            }
        }
        *self.values.last().unwrap()
    }
}

/// Closed form of the symmetric-decreasing rearrangement of the kernel
/// slice y -> G(x0, y).
///
/// For x0 in (0, pi] the slice increases on [-pi, x0] and decreases on
/// [x0, pi]; level-set accounting gives the even piecewise-linear result
/// with nodes
///
/// ```text
/// y0 = (c x0 pi + pi - 2 x0) / (c x0 - 1),   y1 = (y0 - pi) / 2,
/// G#(x0, -pi) = G(x0, -pi),  G#(x0, y1) = G(x0, pi),  G#(x0, 0) = G(x0, x0),
/// ```
///
/// mirrored onto [0, pi]. Negative x0 reduces to |x0| because G(-x, -y) =
/// G(x, y), and x0 = 0 returns the (already symmetric-decreasing) slice
/// itself. At x0 = +-pi the formula degenerates gracefully: y0 = pi, the
/// middle segment collapses, and the rearrangement is the tent through
/// G(pi, -pi) and G(pi, pi).
pub fn green_sdr_closed_form(params: &RobinParams, x0: f64) -> Result<PiecewiseLinear> {
    if !x0.is_finite() || x0.abs() > DOMAIN_HALF_WIDTH + 1e-12 {
        return Err(Error::OutsideDomain { name: "x0", value: x0 });
    }
    let s = x0.abs().min(DOMAIN_HALF_WIDTH);
    let c = params.c;
    if s == 0.0 {
        return Ok(PiecewiseLinear {
            breakpoints: vec![-PI, 0.0, PI],
            values: vec![
                green_raw(params, 0.0, -PI),
                green_raw(params, 0.0, 0.0),
                green_raw(params, 0.0, PI),
            ],
        });
    }
    let y0 = (c * s * PI + PI - 2.0 * s) / (c * s - 1.0);
    let y1 = 0.5 * (y0 - PI);
    let g_far = green_raw(params, s, -PI);
    let g_near = green_raw(params, s, PI);
    let g_peak = green_raw(params, s, s);
    Ok(PiecewiseLinear {
        breakpoints: vec![-PI, y1, 0.0, -y1, PI],
        values: vec![g_far, g_near, g_peak, g_near, g_far],
    })
}

/// Among the grid boundary points attaining the profile maximum (within
/// 1e-12), return the one of least absolute value; exact +-x ties resolve
/// to the positive point.
pub fn argmax_least_abs(profile: &TemperatureProfile) -> f64 {
    let grid = profile.grid();
    let max = profile.max_boundary_value();
    let mut best: Option<f64> = None;
    for (j, &u) in profile.boundary_values().iter().enumerate() {
        if u >= max - 1e-12 {
            let x = grid.boundary(j);
            best = match best {
                None => Some(x),
                Some(b) => {
                    if x.abs() < b.abs() - 1e-15 || (x.abs() - b.abs()).abs() <= 1e-15 && x > b {
                        Some(x)
                    } else {
                        Some(b)
                    }
                }
            };
        }
    }
    best.expect("profile has at least one boundary point")
}

/// The five kernel values whose ordering encodes how polarization acts on
/// the kernel: G(x0, -pi), G(0, pi), G(x0, pi), G(x0, x0), G(0, 0),
/// which for x0 in (0, pi) form a strictly increasing chain (the middle
/// comparison degenerates to equality exactly at x0 = pi).
#[derive(Debug, Clone, Copy)]
pub struct KernelChain {
    pub g_x0_far: f64,
    pub g_0_pi: f64,
    pub g_x0_pi: f64,
    pub g_x0_x0: f64,
    pub g_0_0: f64,
}

pub fn kernel_chain(params: &RobinParams, x0: f64) -> Result<KernelChain> {
    if !x0.is_finite() || x0 <= 0.0 || x0 > DOMAIN_HALF_WIDTH + 1e-12 {
        return Err(Error::OutsideDomain { name: "x0", value: x0 });
    }
    Ok(KernelChain {
        g_x0_far: green_raw(params, x0, -PI),
        g_0_pi: green_raw(params, 0.0, PI),
        g_x0_pi: green_raw(params, x0, PI),
        g_x0_x0: green_raw(params, x0, x0),
        g_0_0: green_raw(params, 0.0, 0.0),
    })
}
