//! Dense exact linear algebra over rationals.
//!
//! Square systems are solved by fraction-free (Bareiss) elimination over big
//! integers. Over-determined pools are reduced to a full-rank square subsystem
//! by greedy row selection in pool order.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::scalar::ExactScalar;

pub type ExactVector = Vec<ExactScalar>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinalgError {
    #[error("matrix is singular")]
    SingularMatrix,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("equation pool has rank {rank}, need {unknowns}")]
    RankDeficientPool { rank: usize, unknowns: usize },
    #[error("solution violates pool row {row}")]
    InconsistentPool { row: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactMatrix {
    rows: usize,
    cols: usize,
    data: Vec<ExactScalar>,
}

impl ExactMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ExactMatrix { rows, cols, data: vec![ExactScalar::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ExactScalar::one();
        }
        m
    }

    /// Panics if the rows are ragged.
    pub fn from_rows(rows: Vec<Vec<ExactScalar>>) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        let n = rows.len();
        ExactMatrix { rows: n, cols, data: rows.into_iter().flatten().collect() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[ExactScalar] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }
}

impl std::ops::Index<(usize, usize)> for ExactMatrix {
    type Output = ExactScalar;

    fn index(&self, (i, j): (usize, usize)) -> &ExactScalar {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ExactMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut ExactScalar {
        &mut self.data[i * self.cols + j]
    }
}

pub fn matvec(a: &ExactMatrix, x: &[ExactScalar]) -> Result<ExactVector, LinalgError> {
    if a.cols != x.len() {
        return Err(LinalgError::DimensionMismatch(format!(
            "{}x{} matrix times vector of length {}",
            a.rows,
            a.cols,
            x.len()
        )));
    }
    Ok((0..a.rows).map(|i| dot(a.row(i), x)).collect())
}

pub fn dot(a: &[ExactScalar], b: &[ExactScalar]) -> ExactScalar {
    a.iter()
        .zip(b)
        .filter(|(u, v)| !u.is_zero() && !v.is_zero())
        .map(|(u, v)| u * v)
        .sum()
}

/// Solves `A x = b` exactly by Bareiss elimination.
///
/// Each row is scaled to integers by the lcm of its denominators, eliminated
/// fraction-free (every intermediate division is exact), and back-substituted
/// in rationals.
pub fn solve_exact(a: &ExactMatrix, b: &[ExactScalar]) -> Result<ExactVector, LinalgError> {
    if !a.is_square() || a.rows != b.len() {
        return Err(LinalgError::DimensionMismatch(format!(
            "{}x{} system with right-hand side of length {}",
            a.rows,
            a.cols,
            b.len()
        )));
    }
    let n = a.rows;
    let mut m: Vec<Vec<BigInt>> = (0..n)
        .map(|i| integer_row(a.row(i).iter().chain(std::iter::once(&b[i]))))
        .collect();

    let mut prev = BigInt::one();
    for k in 0..n {
        // Among the rows with a nonzero pivot, take the one with the smallest
        // pivot; it keeps the entries shorter.
        let pivot = (k..n)
            .filter(|&i| !m[i][k].is_zero())
            .min_by_key(|&i| m[i][k].bits())
            .ok_or(LinalgError::SingularMatrix)?;
        m.swap(k, pivot);
        let (upper, lower) = m.split_at_mut(k + 1);
        let pivot_row = &upper[k];
        for row in lower.iter_mut() {
            let factor = std::mem::take(&mut row[k]);
            for j in k + 1..=n {
                let v = &row[j] * &pivot_row[k] - &factor * &pivot_row[j];
                row[j] = v / &prev;
            }
        }
        prev = m[k][k].clone();
    }

    let mut x = vec![ExactScalar::zero(); n];
    for i in (0..n).rev() {
        let mut acc = BigRational::from_integer(m[i][n].clone());
        for j in i + 1..n {
            if !m[i][j].is_zero() {
                acc -= BigRational::from_integer(m[i][j].clone()) * &x[j];
            }
        }
        x[i] = acc / BigRational::from_integer(m[i][i].clone());
    }
    Ok(x)
}

fn integer_row<'a>(entries: impl Iterator<Item = &'a ExactScalar> + Clone) -> Vec<BigInt> {
    let lcm = entries.clone().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
    entries.map(|v| v.numer() * (&lcm / v.denom())).collect()
}

/// Gauss-Jordan elimination directly over rationals. Slower than
/// [`solve_exact`]; kept as an independent route for cross-checking it.
pub fn solve_rational_gauss(a: &ExactMatrix, b: &[ExactScalar]) -> Result<ExactVector, LinalgError> {
    if !a.is_square() || a.rows != b.len() {
        return Err(LinalgError::DimensionMismatch("non-square system".into()));
    }
    let n = a.rows;
    let mut m: Vec<Vec<ExactScalar>> =
        (0..n).map(|i| a.row(i).iter().cloned().chain([b[i].clone()]).collect()).collect();
    for k in 0..n {
        let p = (k..n).find(|&i| !m[i][k].is_zero()).ok_or(LinalgError::SingularMatrix)?;
        m.swap(k, p);
        let inv = m[k][k].recip();
        for v in &mut m[k] {
            *v *= &inv;
        }
        let pivot_row = m[k].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i == k || row[k].is_zero() {
                continue;
            }
            let f = row[k].clone();
            for (v, p) in row.iter_mut().zip(&pivot_row) {
                *v -= &f * p;
            }
        }
    }
    Ok(m.into_iter().map(|mut row| row.pop().unwrap()).collect())
}

/// Greedy row selection: walks `rows` in order and keeps every row that is
/// linearly independent of the rows kept so far, stopping at `unknowns` rows.
pub fn select_independent_rows(
    rows: &[&[ExactScalar]],
    unknowns: usize,
) -> Result<Vec<usize>, LinalgError> {
    // Each kept row is stored reduced against the earlier ones and scaled so its
    // pivot is 1; a later row therefore has zeros at all earlier pivots.
    let mut echelon: Vec<(usize, Vec<ExactScalar>)> = Vec::with_capacity(unknowns);
    let mut selected = Vec::with_capacity(unknowns);
    for (idx, row) in rows.iter().enumerate() {
        if selected.len() == unknowns {
            break;
        }
        if row.len() != unknowns {
            return Err(LinalgError::DimensionMismatch(format!(
                "pool row {idx} has {} coefficients for {unknowns} unknowns",
                row.len()
            )));
        }
        let mut v = row.to_vec();
        for (pc, basis_row) in &echelon {
            if v[*pc].is_zero() {
                continue;
            }
            let f = v[*pc].clone();
            for (x, y) in v.iter_mut().zip(basis_row) {
                if !y.is_zero() {
                    *x -= &f * y;
                }
            }
        }
        if let Some(pc) = v.iter().position(|x| !x.is_zero()) {
            let inv = v[pc].recip();
            for x in &mut v {
                *x *= &inv;
            }
            echelon.push((pc, v));
            selected.push(idx);
        }
    }
    if selected.len() < unknowns {
        return Err(LinalgError::RankDeficientPool { rank: selected.len(), unknowns });
    }
    Ok(selected)
}

/// A full-rank square subsystem picked out of an over-determined pool, with
/// its solution.
#[derive(Debug, Clone)]
pub struct SquareSubsystem {
    pub matrix: ExactMatrix,
    pub rhs: ExactVector,
    /// Pool indices of the selected rows, in pool order.
    pub rows: Vec<usize>,
    pub solution: ExactVector,
}

/// Reduces a pool of rows `(coefficients, rhs)` to a square nonsingular
/// system and solves it. The solution is then checked against every pool row.
pub fn select_square_subsystem(
    pool: &[(ExactVector, ExactScalar)],
    unknowns: usize,
) -> Result<SquareSubsystem, LinalgError> {
    let coeffs: Vec<&[ExactScalar]> = pool.iter().map(|(a, _)| a.as_slice()).collect();
    let rows = select_independent_rows(&coeffs, unknowns)?;
    let matrix = ExactMatrix::from_rows(rows.iter().map(|&i| pool[i].0.clone()).collect());
    let rhs: ExactVector = rows.iter().map(|&i| pool[i].1.clone()).collect();
    let solution = if unknowns == 0 { Vec::new() } else { solve_exact(&matrix, &rhs)? };
    if let Some(row) = pool.iter().position(|(a, b)| dot(a, &solution) != *b) {
        return Err(LinalgError::InconsistentPool { row });
    }
    Ok(SquareSubsystem { matrix, rhs, rows, solution })
}
