//! Exact echelon structure of sparse integer matrices.
//!
//! A word-size modular pass picks rows that are independent modulo a prime.
//! Those rows are reduced exactly, and the resulting pivot set is certified
//! for the whole matrix by checking exactly that every remaining row
//! annihilates the kernel vectors of the reduced block. If the certificate
//! fails the full matrix is reduced exactly.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub(crate) type Row = Vec<(usize, BigInt)>;

const PRIME: u64 = (1 << 61) - 1;

/// Clears denominators and removes the content; entries sorted by column.
pub(crate) fn integer_row(terms: Vec<(usize, BigRational)>) -> Row {
    let l = terms.iter().fold(BigInt::one(), |acc, (_, v)| acc.lcm(v.denom()));
    let mut row: Row = terms.into_iter().map(|(c, v)| (c, (v.numer() * (&l / v.denom())))).collect();
    row.sort_by_key(|(c, _)| *c);
    normalize_row(&mut row);
    row
}

fn normalize_row(row: &mut Row) {
    let mut g = BigInt::zero();
    for (_, v) in row.iter().rev() {
        g = g.gcd(v);
        if g.is_one() {
            return;
        }
    }
    if !g.is_zero() {
        for (_, v) in row.iter_mut() {
            *v /= &g;
        }
    }
}

/// `a·row − b·piv` with the leading entries cancelling.
fn eliminate(row: &Row, piv: &Row) -> Row {
    let (a, b) = (&piv[0].1, &row[0].1);
    let g = a.gcd(b);
    let (a, b) = (a / &g, b / &g);
    let mut out = Vec::with_capacity(row.len() + piv.len());
    let (mut i, mut j) = (1, 1);
    while i < row.len() || j < piv.len() {
        let ord = match (row.get(i), piv.get(j)) {
            (Some(x), Some(y)) => x.0.cmp(&y.0),
            (Some(_), None) => std::cmp::Ordering::Less,
            _ => std::cmp::Ordering::Greater,
        };
        match ord {
            std::cmp::Ordering::Less => {
                out.push((row[i].0, &a * &row[i].1));
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push((piv[j].0, -(&b * &piv[j].1)));
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                let v = &a * &row[i].1 - &b * &piv[j].1;
                if !v.is_zero() {
                    out.push((row[i].0, v));
                }
                i += 1;
                j += 1;
            }
        }
    }
    normalize_row(&mut out);
    out
}

/// Incremental exact echelon form; `pivots[c]` is the row with leading
/// column `c`.
fn exact_echelon(rows: Vec<Row>, ncols: usize) -> Vec<Option<Row>> {
    let mut pivots: Vec<Option<Row>> = vec![None; ncols];
    for mut row in rows {
        while let Some(&(c, _)) = row.first() {
            match &pivots[c] {
                Some(p) => row = eliminate(&row, p),
                None => {
                    if row[0].1.is_negative() {
                        for (_, v) in row.iter_mut() {
                            *v = -&*v;
                        }
                    }
                    pivots[c] = Some(row);
                    break;
                }
            }
        }
    }
    pivots
}

fn mulmod(a: u64, b: u64) -> u64 {
    ((a as u128 * b as u128) % PRIME as u128) as u64
}

fn powmod(mut a: u64, mut e: u64) -> u64 {
    let mut r = 1;
    while e > 0 {
        if e & 1 == 1 {
            r = mulmod(r, a);
        }
        a = mulmod(a, a);
        e >>= 1;
    }
    r
}

fn reduce_mod(v: &BigInt) -> u64 {
    let p = BigInt::from(PRIME);
    v.mod_floor(&p).to_u64().unwrap()
}

/// Indices of rows that become pivots under incremental elimination
/// modulo the prime, in processing order.
fn independent_mod_p(rows: &[Row], ncols: usize) -> Vec<usize> {
    let mut pivots: Vec<Option<Vec<(usize, u64)>>> = vec![None; ncols];
    let mut out = Vec::new();
    for (k, row) in rows.iter().enumerate() {
        let mut r: Vec<(usize, u64)> = row.iter().map(|(c, v)| (*c, reduce_mod(v))).filter(|(_, v)| *v != 0).collect();
        while let Some(&(c, lead)) = r.first() {
            match &pivots[c] {
                Some(p) => {
                    let mut next = Vec::with_capacity(r.len() + p.len());
                    let (mut i, mut j) = (1, 1);
                    while i < r.len() || j < p.len() {
                        let ord = match (r.get(i), p.get(j)) {
                            (Some(x), Some(y)) => x.0.cmp(&y.0),
                            (Some(_), None) => std::cmp::Ordering::Less,
                            _ => std::cmp::Ordering::Greater,
                        };
                        match ord {
                            std::cmp::Ordering::Less => {
                                next.push(r[i]);
                                i += 1;
                            }
                            std::cmp::Ordering::Greater => {
                                next.push((p[j].0, PRIME - mulmod(lead, p[j].1)));
                                j += 1;
                            }
                            std::cmp::Ordering::Equal => {
                                let v = (r[i].1 + PRIME - mulmod(lead, p[j].1)) % PRIME;
                                if v != 0 {
                                    next.push((r[i].0, v));
                                }
                                i += 1;
                                j += 1;
                            }
                        }
                    }
                    r = next;
                }
                None => {
                    let inv = powmod(lead, PRIME - 2);
                    for e in r.iter_mut() {
                        e.1 = mulmod(e.1, inv);
                    }
                    pivots[c] = Some(r);
                    out.push(k);
                    break;
                }
            }
        }
    }
    out
}

/// Integer kernel vector with entry at `free` nonzero, zero at every other
/// non-pivot column, and support below `free`.
fn kernel_vector(pivots: &[Option<Row>], free: usize) -> Vec<BigInt> {
    let mut w = vec![BigInt::zero(); free + 1];
    w[free] = BigInt::one();
    for p in (0..free).rev() {
        let Some(row) = &pivots[p] else { continue };
        let s: BigInt = row[1..].iter().filter(|(j, _)| *j <= free).map(|(j, v)| v * &w[*j]).sum();
        if s.is_zero() {
            continue;
        }
        let a = &row[0].1;
        let g = a.gcd(&s);
        let scale = a / &g;
        if !scale.is_one() {
            for x in w.iter_mut() {
                if !x.is_zero() {
                    *x *= &scale;
                }
            }
        }
        w[p] = -(s / g);
    }
    w
}

fn annihilates(row: &Row, w: &[BigInt]) -> bool {
    row.iter().filter(|(j, _)| *j < w.len()).map(|(j, v)| v * &w[*j]).sum::<BigInt>().is_zero()
}

/// Pivot columns of the exact row echelon form of `rows`.
pub(crate) fn pivot_columns(mut rows: Vec<Row>, ncols: usize) -> Vec<usize> {
    rows.sort_by_key(|r| (r.len(), r.first().map(|x| x.0)));
    let chosen = independent_mod_p(&rows, ncols);
    let mut picked = vec![false; rows.len()];
    for &k in &chosen {
        picked[k] = true;
    }
    let block: Vec<Row> = chosen.iter().map(|&k| rows[k].clone()).collect();
    let pivots = exact_echelon(block, ncols);
    let certified = (0..ncols).filter(|&c| pivots[c].is_none()).all(|c| {
        let w = kernel_vector(&pivots, c);
        rows.iter().zip(&picked).filter(|(_, p)| !**p).all(|(r, _)| annihilates(r, &w))
    });
    let pivots = if certified {
        pivots
    } else {
        log::warn!("modular pre-pass not certified, reducing all rows exactly");
        exact_echelon(rows, ncols)
    };
    (0..ncols).filter(|&c| pivots[c].is_some()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(v: &[(usize, i64)]) -> Row {
        v.iter().map(|&(c, x)| (c, BigInt::from(x))).collect()
    }

    #[test]
    fn rank_of_small_matrix() {
        let rows = vec![r(&[(0, 2), (1, 4)]), r(&[(0, 1), (1, 2)]), r(&[(1, 3), (2, 1)])];
        assert_eq!(pivot_columns(rows, 3), vec![0, 1]);
    }

    #[test]
    fn entries_divisible_by_the_prime() {
        let p = BigInt::from(PRIME);
        // row 2 is independent over Q but vanishes modulo the prime
        let rows = vec![vec![(0, BigInt::from(1)), (1, BigInt::from(1))], vec![(1, p.clone()), (2, p.clone() * 2)]];
        assert_eq!(pivot_columns(rows, 3), vec![0, 1]);
    }

    #[test]
    fn kernel_vectors_annihilate_pivot_rows() {
        let rows = vec![r(&[(0, 3), (1, 1), (2, 5)]), r(&[(1, 2), (2, -7), (3, 1)])];
        let piv = exact_echelon(rows.clone(), 4);
        for free in [2, 3] {
            let w = kernel_vector(&piv, free);
            assert!(rows.iter().all(|row| annihilates(row, &w)));
        }
    }
}
