//! Dense linear algebra over the rationals.

use num_rational::BigRational;
use num_traits::{One, Zero};

pub type Q = BigRational;
pub type QMatrix = Vec<Vec<Q>>;

pub fn qi(n: i64) -> Q {
    Q::from_integer(n.into())
}

pub fn zeros(rows: usize, cols: usize) -> QMatrix {
    vec![vec![Q::zero(); cols]; rows]
}

pub fn identity(n: usize) -> QMatrix {
    let mut m = zeros(n, n);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = Q::one();
    }
    m
}

pub fn from_i64(rows: &[&[i64]]) -> QMatrix {
    rows.iter().map(|r| r.iter().map(|&x| qi(x)).collect()).collect()
}

pub fn mul(a: &QMatrix, b: &QMatrix) -> QMatrix {
    let cols = b.first().map_or(0, Vec::len);
    let mut out = zeros(a.len(), cols);
    for (i, row) in a.iter().enumerate() {
        for (k, x) in row.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b[k].iter().enumerate() {
                if !y.is_zero() {
                    out[i][j] += x * y;
                }
            }
        }
    }
    out
}

pub fn apply(a: &QMatrix, v: &[Q]) -> Vec<Q> {
    a.iter().map(|row| row.iter().zip(v).map(|(x, y)| x * y).sum()).collect()
}

pub fn add(a: &QMatrix, b: &QMatrix) -> QMatrix {
    a.iter().zip(b).map(|(r, s)| r.iter().zip(s).map(|(x, y)| x + y).collect()).collect()
}

pub fn scale(a: &QMatrix, c: &Q) -> QMatrix {
    a.iter().map(|r| r.iter().map(|x| x * c).collect()).collect()
}

pub fn commutator(a: &QMatrix, b: &QMatrix) -> QMatrix {
    let (ab, ba) = (mul(a, b), mul(b, a));
    ab.iter().zip(&ba).map(|(r, s)| r.iter().zip(s).map(|(x, y)| x - y).collect()).collect()
}

pub fn is_zero_vec(v: &[Q]) -> bool {
    v.iter().all(Zero::is_zero)
}

/// Reduced row echelon form in place; returns the pivot columns. Zero rows
/// are dropped.
pub fn rref(m: &mut QMatrix) -> Vec<usize> {
    let ncols = m.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for x in m[r].iter_mut() {
            *x *= &inv;
        }
        let pivot_row = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
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
        if r == m.len() {
            break;
        }
    }
    m.truncate(r);
    pivots
}

pub fn rank(m: &QMatrix) -> usize {
    rref(&mut m.clone()).len()
}

/// Basis of `{x : m x = 0}`, one vector per free column.
pub fn kernel(m: &QMatrix, ncols: usize) -> Vec<Vec<Q>> {
    let mut r = m.clone();
    let pivots = rref(&mut r);
    (0..ncols)
        .filter(|c| !pivots.contains(c))
        .map(|free| {
            let mut v = vec![Q::zero(); ncols];
            v[free] = Q::one();
            for (row, &p) in r.iter().zip(&pivots) {
                v[p] = -row[free].clone();
            }
            v
        })
        .collect()
}

/// Canonical basis of the span of `vectors`.
pub fn span_basis(vectors: &[Vec<Q>]) -> Vec<Vec<Q>> {
    let mut m = vectors.to_vec();
    rref(&mut m);
    m
}

/// Some `x` with `a x = b`, if one exists.
pub fn solve(a: &QMatrix, b: &[Q], ncols: usize) -> Option<Vec<Q>> {
    let mut aug: QMatrix = a
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    let pivots = rref(&mut aug);
    if pivots.last() == Some(&ncols) {
        return None;
    }
    let mut x = vec![Q::zero(); ncols];
    for (row, &p) in aug.iter().zip(&pivots) {
        x[p] = row[ncols].clone();
    }
    Some(x)
}
