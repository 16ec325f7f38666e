//! Dense linear algebra over the expression field.

use std::sync::Arc;

use crate::exprfield::{Chart, Expr};

pub type Matrix = Vec<Vec<Expr>>;

pub fn zeros(chart: &Arc<Chart>, rows: usize, cols: usize) -> Matrix {
    vec![vec![Expr::zero(chart); cols]; rows]
}

pub fn identity(chart: &Arc<Chart>, n: usize) -> Matrix {
    let mut m = zeros(chart, n, n);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = Expr::one(chart);
    }
    m
}

pub fn mul(a: &Matrix, b: &Matrix) -> Matrix {
    let chart = a[0][0].chart();
    let (n, k, m) = (a.len(), b.len(), b[0].len());
    let mut out = zeros(chart, n, m);
    for i in 0..n {
        for j in 0..m {
            let mut acc = Expr::zero(chart);
            for l in 0..k {
                if a[i][l].is_zero() || b[l][j].is_zero() {
                    continue;
                }
                acc = acc.add(&a[i][l].mul(&b[l][j]));
            }
            out[i][j] = acc;
        }
    }
    out
}

pub fn add(a: &Matrix, b: &Matrix) -> Matrix {
    a.iter().zip(b).map(|(r, s)| r.iter().zip(s).map(|(x, y)| x.add(y)).collect()).collect()
}

pub fn scale(a: &Matrix, f: &Expr) -> Matrix {
    a.iter().map(|r| r.iter().map(|x| x.mul(f)).collect()).collect()
}

pub fn transpose(a: &Matrix) -> Matrix {
    (0..a[0].len()).map(|j| a.iter().map(|r| r[j].clone()).collect()).collect()
}

pub fn trace(a: &Matrix) -> Expr {
    let mut acc = Expr::zero(a[0][0].chart());
    for (i, row) in a.iter().enumerate() {
        acc = acc.add(&row[i]);
    }
    acc
}

pub fn is_zero(a: &Matrix) -> bool {
    a.iter().all(|r| r.iter().all(Expr::is_zero))
}

fn size(e: &Expr) -> usize {
    e.numerator().len() + e.denominator().len()
}

/// Picks the structurally nonzero entry of smallest size in column `c`
/// among rows `r..`.
fn pivot_row(m: &Matrix, r: usize, c: usize) -> Option<usize> {
    (r..m.len()).filter(|&i| !m[i][c].is_zero()).min_by_key(|&i| size(&m[i][c]))
}

/// Reduced row echelon form in place; returns the pivot columns.
pub fn rref(m: &mut Matrix) -> Vec<usize> {
    let mut pivots = Vec::new();
    if m.is_empty() {
        return pivots;
    }
    let cols = m[0].len();
    let mut r = 0;
    for c in 0..cols {
        if r == m.len() {
            break;
        }
        let Some(p) = pivot_row(m, r, c) else { continue };
        m.swap(r, p);
        let inv = m[r][c].inv().expect("pivot is nonzero");
        for x in m[r].iter_mut() {
            *x = x.mul(&inv);
        }
        for i in 0..m.len() {
            if i == r || m[i][c].is_zero() {
                continue;
            }
            let f = m[i][c].clone();
            for j in 0..cols {
                if m[r][j].is_zero() {
                    continue;
                }
                let t = m[i][j].sub(&f.mul(&m[r][j]));
                m[i][j] = t;
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank(m: &Matrix) -> usize {
    let mut m = m.clone();
    rref(&mut m).len()
}

/// Basis of the right kernel `{x : m x = 0}`.
pub fn kernel(m: &Matrix, cols: usize, chart: &Arc<Chart>) -> Vec<Vec<Expr>> {
    let mut a = m.clone();
    let pivots = rref(&mut a);
    let mut out = Vec::new();
    for free in (0..cols).filter(|c| !pivots.contains(c)) {
        let mut v = vec![Expr::zero(chart); cols];
        v[free] = Expr::one(chart);
        for (row, &pc) in pivots.iter().enumerate() {
            v[pc] = a[row][free].neg();
        }
        out.push(v);
    }
    out
}

/// Inverse by Gauss-Jordan elimination, `None` when singular.
pub fn inverse(a: &Matrix) -> Option<Matrix> {
    let n = a.len();
    let chart = a[0][0].chart().clone();
    let id = identity(&chart, n);
    let mut aug: Matrix = a.iter().zip(&id).map(|(r, e)| r.iter().chain(e).cloned().collect()).collect();
    let pivots = rref(&mut aug);
    if pivots.len() < n || pivots[n - 1] != n - 1 {
        return None;
    }
    Some(aug.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Determinant by elimination with exact division.
pub fn det(a: &Matrix) -> Expr {
    let n = a.len();
    let chart = a[0][0].chart().clone();
    let mut m = a.clone();
    let mut d = Expr::one(&chart);
    for c in 0..n {
        let Some(p) = pivot_row(&m, c, c) else { return Expr::zero(&chart) };
        if p != c {
            m.swap(p, c);
            d = d.neg();
        }
        d = d.mul(&m[c][c]);
        let inv = m[c][c].inv().expect("pivot is nonzero");
        for i in c + 1..n {
            if m[i][c].is_zero() {
                continue;
            }
            let f = m[i][c].mul(&inv);
            for j in c..n {
                let t = m[i][j].sub(&f.mul(&m[c][j]));
                m[i][j] = t;
            }
        }
    }
    d
}
