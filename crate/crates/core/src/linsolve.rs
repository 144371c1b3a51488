//! Gaussian elimination over [`Scalar`]. Exact entries pivot on the first
//! non-zero; float entries pivot on the largest magnitude and use the
//! scale-relative zero test.

use thiserror::Error;

use crate::algebra::Scalar;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum LinError {
    #[error("system is rank deficient ({rank} of {unknowns})")]
    Singular { rank: usize, unknowns: usize },
    #[error("system is inconsistent")]
    Inconsistent,
    #[error("matrix is not square ({rows} x {cols})")]
    NotSquare { rows: usize, cols: usize },
}

fn scale_of(rows: &[Vec<Scalar>]) -> f64 {
    rows.iter().flatten().map(|x| x.abs_f64()).fold(0.0, f64::max)
}

fn pick_pivot(m: &[Vec<Scalar>], col: usize, from: usize, scale: f64) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (r, row) in m.iter().enumerate().skip(from) {
        let x = &row[col];
        if x.is_negligible(scale) {
            continue;
        }
        if x.is_exact() {
            return Some(r);
        }
        let a = x.abs_f64();
        if best.is_none_or(|(_, b)| a > b) {
            best = Some((r, a));
        }
    }
    best.map(|(r, _)| r)
}

/// Reduces `m` in place to row echelon form over its first `cols` columns and
/// returns the pivot columns.
fn echelon(m: &mut [Vec<Scalar>], cols: usize) -> Vec<usize> {
    let scale = scale_of(m);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == m.len() {
            break;
        }
        let Some(p) = pick_pivot(m, c, r, scale) else { continue };
        m.swap(r, p);
        let inv = m[r][c].inv().expect("pivot is non-zero");
        for x in m[r].iter_mut() {
            *x = x.mul(&inv);
        }
        let pivot_row = m[r].clone();
        for (rr, row) in m.iter_mut().enumerate() {
            if rr == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (x, p) in row.iter_mut().zip(&pivot_row).skip(c) {
                if !p.is_zero() {
                    *x = x.sub(&f.mul(p));
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank(rows: &[Vec<Scalar>]) -> usize {
    let Some(cols) = rows.first().map(|r| r.len()) else { return 0 };
    let mut m = rows.to_vec();
    echelon(&mut m, cols).len()
}

/// Solves `a x = b` for a system with a unique solution. Extra rows must be
/// consistent.
pub fn solve_unique(a: &[Vec<Scalar>], b: &[Scalar]) -> Result<Vec<Scalar>, LinError> {
    let n = a.first().map_or(0, |r| r.len());
    let mut m: Vec<Vec<Scalar>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();
    let scale = scale_of(&m);
    let pivots = echelon(&mut m, n);
    if pivots.len() < n {
        return Err(LinError::Singular { rank: pivots.len(), unknowns: n });
    }
    for row in &m[n..] {
        if !row[n].is_negligible(scale) {
            return Err(LinError::Inconsistent);
        }
    }
    Ok(m[..n].iter().map(|row| row[n].clone()).collect())
}

/// Inverse of a square matrix.
pub fn inverse(a: &[Vec<Scalar>]) -> Result<Vec<Vec<Scalar>>, LinError> {
    let n = a.len();
    if let Some(row) = a.iter().find(|r| r.len() != n) {
        return Err(LinError::NotSquare { rows: n, cols: row.len() });
    }
    let mut m: Vec<Vec<Scalar>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { Scalar::one() } else { Scalar::zero() }));
            r
        })
        .collect();
    let pivots = echelon(&mut m, n);
    if pivots.len() < n {
        return Err(LinError::Singular { rank: pivots.len(), unknowns: n });
    }
    Ok(m.into_iter().map(|r| r[n..].to_vec()).collect())
}
