use crate::exprfield::Expr;

use super::connection::Connection;
use super::tensor::{Slot, TensorField};
use super::GeometryError;

fn check_vector(x: &TensorField) -> Result<(), GeometryError> {
    if x.slots() != [Slot::Up] {
        return Err(GeometryError::Shape("expected a vector field".into()));
    }
    Ok(())
}

/// Lie derivative `L_X T` of an arbitrary tensor field.
pub fn lie_derivative(t: &TensorField, x: &TensorField) -> Result<TensorField, GeometryError> {
    check_vector(x)?;
    let n = t.dim();
    let chart = t.chart().clone();
    // dx[k][a] = ∂_k X^a
    let dx: Vec<Vec<Expr>> = (0..n).map(|k| (0..n).map(|a| x.get(&[a]).diff(k)).collect()).collect();
    Ok(TensorField::from_fn(&chart, t.slots().to_vec(), |idx| {
        let mut acc = x.derivative_of(t.get(idx));
        let mut j = idx.to_vec();
        for (s, slot) in t.slots().iter().enumerate() {
            for k in 0..n {
                j[s] = k;
                let tk = t.get(&j);
                if tk.is_zero() {
                    continue;
                }
                let term = match slot {
                    Slot::Up => tk.mul(&dx[k][idx[s]]).neg(),
                    Slot::Down => tk.mul(&dx[idx[s]][k]),
                };
                acc = acc.add(&term);
            }
            j[s] = idx[s];
        }
        acc
    }))
}

/// `[X, Y]^a = X(Y^a) − Y(X^a)`.
pub fn bracket(x: &TensorField, y: &TensorField) -> Result<TensorField, GeometryError> {
    check_vector(x)?;
    check_vector(y)?;
    let chart = x.chart().clone();
    Ok(TensorField::from_fn(&chart, vec![Slot::Up], |a| x.derivative_of(y.get(a)).sub(&y.derivative_of(x.get(a)))))
}

/// Lie derivative of a connection, a (1,2) tensor:
/// `(L_X D)^a_bc = ∂b∂c X^a + X(Γ^a_bc) − Γ^k_bc ∂k X^a + Γ^a_kc ∂b X^k + Γ^a_bk ∂c X^k`.
pub fn lie_derivative_connection(d: &Connection, x: &TensorField) -> Result<TensorField, GeometryError> {
    check_vector(x)?;
    let n = d.dim();
    let chart = d.chart().clone();
    let dx: Vec<Vec<Expr>> = (0..n).map(|k| (0..n).map(|a| x.get(&[a]).diff(k)).collect()).collect();
    Ok(TensorField::from_fn(&chart, vec![Slot::Up, Slot::Down, Slot::Down], |i| {
        let (a, b, c) = (i[0], i[1], i[2]);
        let mut acc = dx[c][a].diff(b).add(&x.derivative_of(d.symbol(a, b, c)));
        for k in 0..n {
            acc = acc
                .sub(&d.symbol(k, b, c).mul(&dx[k][a]))
                .add(&d.symbol(a, k, c).mul(&dx[b][k]))
                .add(&d.symbol(a, b, k).mul(&dx[c][k]));
        }
        acc
    }))
}
