//! Exact row reduction over the rationals.

use num_traits::{One, Zero};

use crate::rational::{int, Rat};

/// Reduced row echelon form of `rows` (each of length `cols`). Returns the
/// non-zero rows and the pivot column of each.
pub fn rref(mut rows: Vec<Vec<Rat>>, cols: usize) -> (Vec<Vec<Rat>>, Vec<usize>) {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows.len() {
            break;
        }
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let lead = rows[r][c].clone();
        if !lead.is_one() {
            for x in rows[r].iter_mut() {
                *x /= &lead;
            }
        }
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (x, y) in row.iter_mut().zip(&pivot_row).skip(c) {
                if !y.is_zero() {
                    *x -= &f * y;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    rows.truncate(r);
    (rows, pivots)
}

pub fn integer_rows(entries: &[Vec<i64>]) -> Vec<Vec<Rat>> {
    entries
        .iter()
        .map(|row| row.iter().map(|&x| int(x)).collect())
        .collect()
}

pub fn rank(rows: &[Vec<Rat>], cols: usize) -> usize {
    rref(rows.to_vec(), cols).1.len()
}

/// Basis of `{v : rows . v = 0}`, one vector per free column, in the
/// canonical form read off the reduced echelon matrix.
pub fn kernel(rows: &[Vec<Rat>], cols: usize) -> Vec<Vec<Rat>> {
    let (reduced, pivots) = rref(rows.to_vec(), cols);
    let mut is_pivot = vec![false; cols];
    for &p in &pivots {
        is_pivot[p] = true;
    }
    (0..cols)
        .filter(|&f| !is_pivot[f])
        .map(|f| {
            let mut v = vec![Rat::zero(); cols];
            v[f] = Rat::one();
            for (row, &p) in reduced.iter().zip(&pivots) {
                v[p] = -row[f].clone();
            }
            v
        })
        .collect()
}
