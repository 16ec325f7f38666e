use std::sync::Arc;

use crate::exprfield::{Chart, Expr};

use super::matrix;
use super::tensor::{Slot, TensorField};
use super::GeometryError;

/// Affine connection given by Christoffel symbols `Γ^a_bc`, with
/// `∇_{∂b} ∂c = Γ^a_bc ∂a`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Connection {
    gamma: TensorField,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShiftClass {
    Projective,
    CProjective,
    Quaternionic,
}

impl Connection {
    /// Takes `Γ^a_bc` as a tensor with slots `[Up, Down, Down]`.
    pub fn new(gamma: TensorField) -> Result<Self, GeometryError> {
        if gamma.slots() != [Slot::Up, Slot::Down, Slot::Down] {
            return Err(GeometryError::Shape("Christoffel symbols need slots (up, down, down)".into()));
        }
        Ok(Connection { gamma })
    }

    pub fn flat(chart: &Arc<Chart>) -> Self {
        Connection { gamma: TensorField::zeros(chart, vec![Slot::Up, Slot::Down, Slot::Down]) }
    }

    pub fn chart(&self) -> &Arc<Chart> {
        self.gamma.chart()
    }

    pub fn dim(&self) -> usize {
        self.gamma.dim()
    }

    pub fn christoffel(&self) -> &TensorField {
        &self.gamma
    }

    pub fn symbol(&self, a: usize, b: usize, c: usize) -> &Expr {
        self.gamma.get(&[a, b, c])
    }

    /// `T^a_bc = Γ^a_bc − Γ^a_cb`.
    pub fn torsion(&self) -> TensorField {
        TensorField::from_fn(self.chart(), vec![Slot::Up, Slot::Down, Slot::Down], |i| {
            self.symbol(i[0], i[1], i[2]).sub(self.symbol(i[0], i[2], i[1]))
        })
    }

    pub fn is_torsion_free(&self) -> bool {
        self.torsion().is_zero()
    }

    /// Covariant derivative `∇T` with the derivative slot appended last:
    /// `(∇T)^{..}_{..c} = ∇_c T^{..}_{..}`.
    pub fn covariant_derivative(&self, t: &TensorField) -> TensorField {
        let n = self.dim();
        let chart = self.chart().clone();
        let mut slots = t.slots().to_vec();
        let r = slots.len();
        slots.push(Slot::Down);
        TensorField::from_fn(&chart, slots, |idx| {
            let c = idx[r];
            let base = &idx[..r];
            let mut acc = t.get(base).diff(c);
            let mut j = base.to_vec();
            for (s, slot) in t.slots().iter().enumerate() {
                for k in 0..n {
                    j[s] = k;
                    let tk = t.get(&j);
                    if tk.is_zero() {
                        continue;
                    }
                    let term = match slot {
                        Slot::Up => self.symbol(base[s], c, k).mul(tk),
                        Slot::Down => self.symbol(k, c, base[s]).mul(tk).neg(),
                    };
                    acc = acc.add(&term);
                }
                j[s] = base[s];
            }
            acc
        })
    }

    /// `R^a_bcd`, the `∂a` component of `R(∂c, ∂d)∂b`.
    pub fn curvature(&self) -> TensorField {
        let n = self.dim();
        let chart = self.chart().clone();
        TensorField::from_fn(&chart, vec![Slot::Up, Slot::Down, Slot::Down, Slot::Down], |i| {
            let (a, b, c, d) = (i[0], i[1], i[2], i[3]);
            if c == d {
                return Expr::zero(&chart);
            }
            let mut acc = self.symbol(a, d, b).diff(c).sub(&self.symbol(a, c, b).diff(d));
            for e in 0..n {
                let t1 = self.symbol(a, c, e).mul(self.symbol(e, d, b));
                let t2 = self.symbol(a, d, e).mul(self.symbol(e, c, b));
                acc = acc.add(&t1.sub(&t2));
            }
            acc
        })
    }

    /// Shifts the connection within its class by the 1-form `gamma`.
    /// `aux` is `[J]` for the c-projective class and a frame `[I1, I2, I3]`
    /// for the quaternionic class.
    pub fn shift(&self, gamma: &TensorField, class: ShiftClass, aux: &[TensorField]) -> Result<Self, GeometryError> {
        let pattern = shift_tensor(gamma, class, aux)?;
        Ok(Connection { gamma: self.gamma.add(&pattern) })
    }
}

/// The tensor `S^a_bc` with `D'_Y Z = D_Y Z + S(Y, Z)` for the given class.
pub fn shift_tensor(gamma: &TensorField, class: ShiftClass, aux: &[TensorField]) -> Result<TensorField, GeometryError> {
    if gamma.slots() != [Slot::Down] {
        return Err(GeometryError::Shape("shift needs a 1-form".into()));
    }
    let chart = gamma.chart().clone();
    let n = gamma.dim();
    let need = match class {
        ShiftClass::Projective => 0,
        ShiftClass::CProjective => 1,
        ShiftClass::Quaternionic => 3,
    };
    if aux.len() != need {
        return Err(GeometryError::MissingStructure(format!(
            "{:?} shift needs {} endomorphism field(s), got {}",
            class,
            need,
            aux.len()
        )));
    }
    if aux.iter().any(|a| !a.is_endomorphism()) {
        return Err(GeometryError::Shape("auxiliary structures must be (1,1) tensors".into()));
    }
    let delta = |a: usize, b: usize| if a == b { Expr::one(&chart) } else { Expr::zero(&chart) };
    // γ(A ∂b) = γ_k A^k_b
    let pulled: Vec<Vec<Expr>> = aux
        .iter()
        .map(|a| {
            (0..n)
                .map(|b| {
                    let mut acc = Expr::zero(&chart);
                    for k in 0..n {
                        acc = acc.add(&gamma.get(&[k]).mul(a.get(&[k, b])));
                    }
                    acc
                })
                .collect()
        })
        .collect();
    let half = Expr::rational(&chart, &crate::exprfield::q(1, 2));
    Ok(TensorField::from_fn(&chart, vec![Slot::Up, Slot::Down, Slot::Down], |i| {
        let (a, b, c) = (i[0], i[1], i[2]);
        let base = gamma.get(&[b]).mul(&delta(a, c)).add(&gamma.get(&[c]).mul(&delta(a, b)));
        if class == ShiftClass::Projective {
            return base;
        }
        let mut s = base;
        for (m, p) in aux.iter().zip(&pulled) {
            s = s.sub(&p[b].mul(m.get(&[a, c]))).sub(&p[c].mul(m.get(&[a, b])));
        }
        s.mul(&half)
    }))
}

/// Levi-Civita connection of a metric.
pub fn levi_civita(g: &TensorField) -> Result<Connection, GeometryError> {
    if g.slots() != [Slot::Down, Slot::Down] || !g.is_symmetric_in(0, 1) {
        return Err(GeometryError::NotSymmetric("metric must be a symmetric (0,2) tensor".into()));
    }
    let chart = g.chart().clone();
    let n = g.dim();
    let gm = g.matrix();
    let gi = matrix::inverse(&gm).ok_or(GeometryError::Degenerate("metric determinant vanishes identically".into()))?;
    let dg: Vec<Vec<Vec<Expr>>> =
        (0..n).map(|c| (0..n).map(|a| (0..n).map(|b| gm[a][b].diff(c)).collect()).collect()).collect();
    // first kind: Γ_dbc = ½(∂b g_dc + ∂c g_db − ∂d g_bc)
    let half = Expr::rational(&chart, &crate::exprfield::q(1, 2));
    let first: Vec<Expr> = (0..n * n * n)
        .map(|k| {
            let (d, b, c) = (k / (n * n), (k / n) % n, k % n);
            dg[b][d][c].add(&dg[c][d][b]).sub(&dg[d][b][c]).mul(&half)
        })
        .collect();
    let gamma = TensorField::from_fn(&chart, vec![Slot::Up, Slot::Down, Slot::Down], |i| {
        let (a, b, c) = (i[0], i[1], i[2]);
        if b > c {
            return Expr::zero(&chart);
        }
        let mut acc = Expr::zero(&chart);
        for d in 0..n {
            if !gi[a][d].is_zero() {
                acc = acc.add(&gi[a][d].mul(&first[d * n * n + b * n + c]));
            }
        }
        acc
    });
    let gamma = TensorField::from_fn(&chart, vec![Slot::Up, Slot::Down, Slot::Down], |i| {
        let (a, b, c) = (i[0], i[1].min(i[2]), i[1].max(i[2]));
        gamma.get(&[a, b, c]).clone()
    });
    Connection::new(gamma)
}

/// `Ric_bd = R^a_bad`.
pub fn ricci(riemann: &TensorField) -> TensorField {
    let n = riemann.dim();
    let chart = riemann.chart().clone();
    TensorField::from_fn(&chart, vec![Slot::Down, Slot::Down], |i| {
        let mut acc = Expr::zero(&chart);
        for a in 0..n {
            acc = acc.add(riemann.get(&[a, i[0], a, i[1]]));
        }
        acc
    })
}

/// Cyclic sum `R^a_bcd + R^a_cdb + R^a_dbc`, zero for torsion-free connections.
pub fn bianchi_defect(riemann: &TensorField) -> TensorField {
    let chart = riemann.chart().clone();
    TensorField::from_fn(&chart, vec![Slot::Up, Slot::Down, Slot::Down, Slot::Down], |i| {
        let (a, b, c, d) = (i[0], i[1], i[2], i[3]);
        riemann.get(&[a, b, c, d]).add(riemann.get(&[a, c, d, b])).add(riemann.get(&[a, d, b, c]))
    })
}
