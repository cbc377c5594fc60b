//! Uniform cell grid on [-pi, pi] and piecewise-constant functions on it.
//!
//! Sources live on an even number of equal cells so that 0 is a cell
//! boundary; rearrangements and polarizations are then exact permutations of
//! cell values and integrals reduce to exact sums.

use crate::error::{Error, Result};

pub const DOMAIN_HALF_WIDTH: f64 = std::f64::consts::PI;

/// Uniform partition of [-pi, pi] into an even number of cells.
#[derive(Debug, Clone)]
pub struct Grid {
    n_cells: usize,
    cell_width: f64,
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.n_cells == other.n_cells
    }
}

impl Grid {
    pub fn new(n_cells: usize) -> Result<Self> {
        if n_cells < 2 || n_cells % 2 != 0 {
            return Err(Error::BadCellCount(n_cells));
        }
        Ok(Self {
            n_cells,
            cell_width: 2.0 * DOMAIN_HALF_WIDTH / n_cells as f64,
        })
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn cell_width(&self) -> f64 {
        self.cell_width
    }

    /// j-th cell boundary, j = 0..=n_cells. The endpoints are exactly -pi
    /// and pi; interior boundaries are formed symmetrically about 0 so the
    /// middle boundary is exactly 0.
    pub fn boundary(&self, j: usize) -> f64 {
        debug_assert!(j <= self.n_cells);
        let half = self.n_cells / 2;
        if j == 0 {
            -DOMAIN_HALF_WIDTH
        } else if j == self.n_cells {
            DOMAIN_HALF_WIDTH
        } else if j == half {
            0.0
        } else if j < half {
            -((half - j) as f64) * self.cell_width
        } else {
            ((j - half) as f64) * self.cell_width
        }
    }

    /// Midpoint of cell i, i = 0..n_cells.
    pub fn midpoint(&self, i: usize) -> f64 {
        debug_assert!(i < self.n_cells);
        0.5 * (self.boundary(i) + self.boundary(i + 1))
    }

    /// All n_cells + 1 boundaries, left to right.
    pub fn boundaries(&self) -> Vec<f64> {
        (0..=self.n_cells).map(|j| self.boundary(j)).collect()
    }

    /// Distance of cell i from the centre boundary 0, in whole cells.
    /// The two innermost cells have distance 0.
    pub fn cell_distance(&self, i: usize) -> usize {
        let half = self.n_cells / 2;
        if i < half {
            half - 1 - i
        } else {
            i - half
        }
    }
}

/// Non-negative piecewise-constant function: one value per grid cell.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Grid,
    values: Vec<f64>,
    integral: f64,
}

impl GridFunction {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_cells() {
            return Err(Error::BadValueCount {
                expected: grid.n_cells(),
                got: values.len(),
            });
        }
        for (index, &value) in values.iter().enumerate() {
            if !value.is_finite() || value < 0.0 {
                return Err(Error::BadCellValue { index, value });
            }
        }
        let integral = grid.cell_width() * values.iter().sum::<f64>();
        Ok(Self {
            grid,
            values,
            integral,
        })
    }

    pub fn constant(grid: Grid, value: f64) -> Result<Self> {
        let n = grid.n_cells();
        Self::new(grid, vec![value; n])
    }

    /// Sample a pointwise function at cell midpoints. The sample must be
    /// non-negative on the midpoints.
    pub fn sample(grid: Grid, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = (0..grid.n_cells()).map(|i| f(grid.midpoint(i))).collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Exact integral over [-pi, pi]: cell width times the value sum.
    pub fn integrate(&self) -> f64 {
        self.integral
    }

    /// L^p norm for p >= 1, or the max cell value for p = infinity.
    /// The finite-p sum is evaluated with the max factored out so large
    /// exponents do not overflow.
    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        if p.is_infinite() && p > 0.0 {
            return Ok(self.values.iter().cloned().fold(0.0, f64::max));
        }
        if !(p >= 1.0) || p.is_nan() {
            return Err(Error::BadExponent(p));
        }
        let max = self.values.iter().cloned().fold(0.0, f64::max);
        if max == 0.0 {
            return Ok(0.0);
        }
        let sum: f64 = self.values.iter().map(|&v| (v / max).powf(p)).sum();
        Ok(max * (self.grid.cell_width() * sum).powf(1.0 / p))
    }

    /// Exact integral of the product f*g (both piecewise constant on the
    /// same grid).
    pub fn product_integral(&self, other: &GridFunction) -> f64 {
        assert_eq!(
            self.grid, other.grid,
            "product_integral needs matching grids"
        );
        let dot: f64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .sum();
        self.grid.cell_width() * dot
    }

    /// L1 distance between two functions on the same grid.
    pub fn l1_distance(&self, other: &GridFunction) -> f64 {
        assert_eq!(self.grid, other.grid, "l1_distance needs matching grids");
        let sum: f64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .sum();
        self.grid.cell_width() * sum
    }

    /// Serialize as CSV: a header comment recording the resolution, then one
    /// value per line, left cell to right cell.
    pub fn to_csv(&self) -> String {
        let mut out = format!("# n_cells={} domain=-pi:pi\n", self.grid.n_cells());
        for v in &self.values {
            out.push_str(&format!("{v}\n"));
        }
        out
    }

    /// Parse the CSV form produced by `to_csv`, validating the declared cell
    /// count and non-negativity of every value.
    pub fn from_csv(text: &str, path: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or_else(|| Error::Parse {
            path: path.to_string(),
            line: 1,
            msg: "empty input, expected `# n_cells=<N> domain=-pi:pi` header".into(),
        })?;
        let header = header.trim();
        let n_cells = parse_header(header).ok_or_else(|| Error::Parse {
            path: path.to_string(),
            line: 1,
            msg: format!("bad header {header:?}, expected `# n_cells=<N> domain=-pi:pi`"),
        })?;
        let grid = Grid::new(n_cells).map_err(|e| Error::Parse {
            path: path.to_string(),
            line: 1,
            msg: e.to_string(),
        })?;
        let mut values = Vec::with_capacity(n_cells);
        for (idx, line) in lines {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let v: f64 = line.parse().map_err(|_| Error::Parse {
                path: path.to_string(),
                line: idx + 1,
                msg: format!("expected a number, got {line:?}"),
            })?;
            values.push(v);
        }
        if values.len() != n_cells {
            return Err(Error::Parse {
                path: path.to_string(),
                line: values.len() + 1,
                msg: format!("expected {} values, found {}", n_cells, values.len()),
            });
        }
        Self::new(grid, values).map_err(|e| Error::Parse {
            path: path.to_string(),
            line: 0,
            msg: e.to_string(),
        })
    }
}

fn parse_header(header: &str) -> Option<usize> {
    let rest = header.strip_prefix('#')?.trim();
    let mut n_cells = None;
    let mut domain_ok = false;
    for tok in rest.split_whitespace() {
        if let Some(v) = tok.strip_prefix("n_cells=") {
            n_cells = v.parse().ok();
        } else if tok == "domain=-pi:pi" {
            domain_ok = true;
        }
    }
    if domain_ok {
        n_cells
    } else {
        None
    }
}
