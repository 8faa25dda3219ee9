//! Sparse random combinatorial matrices.
//!
//! An `m x n` binary matrix whose columns are independent uniform draws over
//! the `C(m, d)` supports of size `d`. Columns are stored as sorted row-index
//! lists, so a column correlation costs exactly `d` reads and `d - 1`
//! additions.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{param, Error, Result};

/// Machine-independent operation tally of a solver run.
///
/// `additions` and `comparisons` cover the identification step only;
/// `preprocessing_flops` is the `n`-flop charge for building the confined
/// set and `threshold_tests` the `m` tests `|y_i| <= eps` behind it.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OpCounter {
    pub additions: u64,
    pub comparisons: u64,
    pub inner_products: u64,
    pub preprocessing_flops: u64,
    pub threshold_tests: u64,
}

impl OpCounter {
    /// Identification work, additions plus comparisons.
    pub fn identification_flops(&self) -> u64 {
        self.additions + self.comparisons
    }

    /// Identification work plus the preprocessing charge.
    pub fn total_flops(&self) -> u64 {
        self.identification_flops() + self.preprocessing_flops
    }

    pub fn merge(&mut self, other: &OpCounter) {
        self.additions += other.additions;
        self.comparisons += other.comparisons;
        self.inner_products += other.inner_products;
        self.preprocessing_flops += other.preprocessing_flops;
        self.threshold_tests += other.threshold_tests;
    }
}

/// Binary `m x n` matrix with exactly `d` ones in every column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CombMatrix {
    m: usize,
    n: usize,
    d: usize,
    cols: Vec<Vec<usize>>,
    // row -> columns with a one in that row
    rows: Vec<Vec<usize>>,
}

impl CombMatrix {
    /// Builds a matrix from explicit column supports, checking every
    /// invariant. Supports are sorted on the way in.
    pub fn from_columns(m: usize, d: usize, cols: Vec<Vec<usize>>) -> Result<Self> {
        check_dims(m, cols.len(), d)?;
        let mut cols = cols;
        for (j, col) in cols.iter_mut().enumerate() {
            col.sort_unstable();
            if col.len() != d {
                return param(format!("column {j} has {} ones, expected {d}", col.len()));
            }
            if col.windows(2).any(|w| w[0] == w[1]) {
                return param(format!("column {j} repeats a row index"));
            }
            if col.last().is_some_and(|&r| r >= m) {
                return param(format!("column {j} has a row index >= m = {m}"));
            }
        }
        Ok(Self::assemble(m, d, cols))
    }

    /// Draws every column uniformly over the `C(m, d)` supports using a
    /// partial Fisher-Yates shuffle.
    pub fn random<R: Rng + ?Sized>(m: usize, n: usize, d: usize, rng: &mut R) -> Result<Self> {
        check_dims(m, n, d)?;
        let mut pool: Vec<usize> = (0..m).collect();
        let cols = (0..n)
            .map(|_| {
                for i in 0..d {
                    let j = rng.random_range(i..m);
                    pool.swap(i, j);
                }
                let mut col = pool[..d].to_vec();
                col.sort_unstable();
                col
            })
            .collect();
        Ok(Self::assemble(m, d, cols))
    }

    fn assemble(m: usize, d: usize, cols: Vec<Vec<usize>>) -> Self {
        let mut rows = vec![Vec::new(); m];
        for (j, col) in cols.iter().enumerate() {
            for &i in col {
                rows[i].push(j);
            }
        }
        Self {
            m,
            n: cols.len(),
            d,
            cols,
            rows,
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Sorted row support of column `j`.
    pub fn col(&self, j: usize) -> &[usize] {
        &self.cols[j]
    }

    pub fn cols(&self) -> &[Vec<usize>] {
        &self.cols
    }

    /// Columns with a one in row `i`, ascending.
    pub fn row(&self, i: usize) -> &[usize] {
        &self.rows[i]
    }

    /// True when `d > m / 2`, outside the sparse regime the analysis assumes.
    pub fn exceeds_half_density(&self) -> bool {
        2 * self.d > self.m
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.matvec_counted(x, &mut OpCounter::default())
    }

    /// `y = A x`. Charges `d - 1` additions per nonzero entry of `x`.
    pub fn matvec_counted(&self, x: &[f64], counter: &mut OpCounter) -> Result<Vec<f64>> {
        if x.len() != self.n {
            return param(format!("x has length {}, expected n = {}", x.len(), self.n));
        }
        let mut y = vec![0.0; self.m];
        for (col, &xj) in self.cols.iter().zip(x) {
            if xj == 0.0 {
                continue;
            }
            for &i in col {
                y[i] += xj;
            }
            counter.additions += (self.d - 1) as u64;
        }
        Ok(y)
    }

    pub fn col_correlation(&self, j: usize, r: &[f64]) -> Result<f64> {
        self.col_correlation_counted(j, r, &mut OpCounter::default())
    }

    /// `A_j^T r`, charging `d - 1` additions.
    pub fn col_correlation_counted(&self, j: usize, r: &[f64], counter: &mut OpCounter) -> Result<f64> {
        if j >= self.n {
            return param(format!("column index {j} out of range (n = {})", self.n));
        }
        if r.len() != self.m {
            return param(format!("r has length {}, expected m = {}", r.len(), self.m));
        }
        counter.additions += (self.d - 1) as u64;
        Ok(self.correlation_unchecked(j, r))
    }

    pub(crate) fn correlation_unchecked(&self, j: usize, r: &[f64]) -> f64 {
        self.cols[j].iter().map(|&i| r[i]).sum()
    }

    /// Dense column-major copy of the columns in `idx` (`m x idx.len()`).
    pub fn dense_columns(&self, idx: &[usize]) -> Vec<f64> {
        let mut out = vec![0.0; self.m * idx.len()];
        for (c, &j) in idx.iter().enumerate() {
            for &i in &self.cols[j] {
                out[c * self.m + i] = 1.0;
            }
        }
        out
    }

    /// Text form: a header line `m n d`, then one line of `d` row indices per
    /// column.
    pub fn to_text(&self) -> String {
        let mut s = format!("{} {} {}\n", self.m, self.n, self.d);
        for col in &self.cols {
            let mut first = true;
            for i in col {
                if !first {
                    s.push(' ');
                }
                first = false;
                let _ = write!(s, "{i}");
            }
            s.push('\n');
        }
        s
    }

    pub fn write_text<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(self.to_text().as_bytes())?;
        Ok(())
    }

    pub fn read_text<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines().enumerate();
        let (_, header) = lines.next().ok_or(Error::Format {
            line: 1,
            msg: "empty input".into(),
        })?;
        let header = parse_line(&header?, 1)?;
        let [m, n, d] = header[..] else {
            return Err(Error::Format {
                line: 1,
                msg: format!("expected `m n d`, found {} fields", header.len()),
            });
        };
        let mut cols = Vec::with_capacity(n);
        for (idx, line) in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            cols.push(parse_line(&line, idx + 1)?);
        }
        if cols.len() != n {
            return Err(Error::Format {
                line: 1,
                msg: format!("header declares {n} columns, found {}", cols.len()),
            });
        }
        Self::from_columns(m, d, cols)
    }
}

fn parse_line(line: &str, lineno: usize) -> Result<Vec<usize>> {
    line.split_whitespace()
        .map(|tok| {
            tok.parse::<usize>().map_err(|e| Error::Format {
                line: lineno,
                msg: format!("`{tok}`: {e}"),
            })
        })
        .collect()
}

fn check_dims(m: usize, n: usize, d: usize) -> Result<()> {
    if n == 0 {
        return param("n must be at least 1");
    }
    if d == 0 || d > m {
        return param(format!("column degree d = {d} must satisfy 1 <= d <= m = {m}"));
    }
    Ok(())
}

/// Seeded convenience wrapper around [`CombMatrix::random`].
pub fn gen_comb_matrix(m: usize, n: usize, d: usize, seed: u64) -> Result<CombMatrix> {
    CombMatrix::random(m, n, d, &mut ChaCha8Rng::seed_from_u64(seed))
}
