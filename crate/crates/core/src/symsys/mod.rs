//! Linear PDE systems for infinitesimal symmetries.

mod system;

use std::sync::Arc;

use thiserror::Error;

use crate::exprfield::{Chart, Expr, ExprError};
use crate::geometry::connection::shift_tensor;
use crate::geometry::matrix::{self, Matrix};
use crate::geometry::structure::{annihilator_forms, check_hypercomplex_frame, Ambient};
use crate::geometry::{Connection, GeometryError, ShiftClass, Slot, TensorField};

pub use system::{Equation, Jet, LeibnizTerm, LinearForm, LinearPDESystem, MultiIndex};

#[derive(Debug, Error)]
pub enum SymsysError {
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("degenerate frame: {0}")]
    DegenerateFrame(String),
    #[error("inconsistent system: {0}")]
    Inconsistent(String),
    #[error("solution is not unique: {free} free parameters remain")]
    NotUnique { free: usize },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Expr(#[from] ExprError),
}

/// Components of `L_X T` as linear forms in the 1-jet of `X`, laid out
/// like the components of `T`.
pub fn lie_derivative_forms(t: &TensorField) -> Vec<LinearForm> {
    let n = t.dim();
    let r = t.slots().len();
    let comps = t.components().len();
    let mut out = Vec::with_capacity(comps);
    let mut idx = vec![0; r];
    for flat in 0..comps {
        let mut k = flat;
        for s in (0..r).rev() {
            idx[s] = k % n;
            k /= n;
        }
        let mut f = LinearForm::new();
        let tv = t.get(&idx);
        for k in 0..n {
            f.add_term(Jet::value(k), &tv.diff(k));
        }
        let mut j = idx.clone();
        for (s, slot) in t.slots().iter().enumerate() {
            for k in 0..n {
                j[s] = k;
                let tk = t.get(&j);
                match slot {
                    Slot::Up => f.add_term(Jet::first(idx[s], k), &tk.neg()),
                    Slot::Down => f.add_term(Jet::first(k, idx[s]), tk),
                }
            }
            j[s] = idx[s];
        }
        out.push(f);
    }
    out
}

/// `L_X T = 0` componentwise.
pub fn invariance_system(t: &TensorField) -> LinearPDESystem {
    LinearPDESystem::new(t.chart(), lie_derivative_forms(t))
}

/// `tr(ω L_X I_j) = 0` for every annihilator `ω` of the frame inside all
/// endomorphisms and every frame element `I_j`.
pub fn quaternionic_symmetry_system(frame: &[TensorField], g: &TensorField) -> Result<LinearPDESystem, SymsysError> {
    if frame.len() != 3 || frame.iter().any(|a| !a.is_endomorphism()) {
        return Err(SymsysError::DegenerateFrame("expected three endomorphism fields".into()));
    }
    let ann = annihilator_forms(frame, g, Ambient::Full).map_err(|e| match e {
        GeometryError::Degenerate(m) => SymsysError::DegenerateFrame(m),
        other => other.into(),
    })?;
    let n = g.dim();
    let mut forms = Vec::new();
    for a in frame {
        let lie = lie_derivative_forms(a);
        for w in &ann {
            let mut f = LinearForm::new();
            for p in 0..n {
                for q in 0..n {
                    // tr(ω A) = Σ ω^q_p A^p_q
                    f.add_scaled(&lie[p * n + q], w.get(&[q, p]));
                }
            }
            forms.push(f);
        }
    }
    Ok(LinearPDESystem::new(g.chart(), forms))
}

/// `(L_X D)^a_bc` as linear forms in the 2-jet of `X`, indexed `a n² + b n + c`.
pub fn connection_lie_forms(d: &Connection) -> Vec<LinearForm> {
    let n = d.dim();
    let mut out = Vec::with_capacity(n * n * n);
    let one = Expr::one(d.chart());
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                let mut f = LinearForm::new();
                f.add_term(Jet::new(a, MultiIndex::unit(b).plus(c)), &one);
                for k in 0..n {
                    f.add_term(Jet::value(k), &d.symbol(a, b, c).diff(k));
                    f.add_term(Jet::first(a, k), &d.symbol(k, b, c).neg());
                    f.add_term(Jet::first(k, b), d.symbol(a, k, c));
                    f.add_term(Jet::first(k, c), d.symbol(a, b, k));
                }
                out.push(f);
            }
        }
    }
    out
}

fn symmetric_triples(n: usize) -> Vec<(usize, usize, usize)> {
    let mut out = Vec::new();
    for a in 0..n {
        for b in 0..n {
            for c in b..n {
                out.push((a, b, c));
            }
        }
    }
    out
}

fn check_complex_structure(j: &TensorField) -> Result<(), SymsysError> {
    if !j.is_endomorphism() {
        return Err(SymsysError::Precondition("J must be an endomorphism field".into()));
    }
    let sq = j.compose(j).add(&TensorField::identity(j.chart()));
    if !sq.is_zero_checked()? {
        return Err(SymsysError::Precondition("J^2 != -1".into()));
    }
    Ok(())
}

/// `L_X J = 0` together with `L_X D` taking values in the c-projective
/// shift subspace, imposed through an exact annihilator of that subspace.
pub fn cprojective_symmetry_system(j: &TensorField, d: &Connection) -> Result<LinearPDESystem, SymsysError> {
    check_complex_structure(j)?;
    if !Arc::ptr_eq(j.chart(), d.chart()) {
        return Err(SymsysError::Precondition("J and D live on different charts".into()));
    }
    if !d.is_torsion_free() {
        return Err(SymsysError::Precondition("connection has torsion".into()));
    }
    if !d.covariant_derivative(j).is_zero_checked()? {
        return Err(SymsysError::Precondition("DJ != 0".into()));
    }
    let chart = d.chart().clone();
    let n = d.dim();
    let triples = symmetric_triples(n);
    let rows: Matrix = (0..n)
        .map(|k| -> Result<Vec<Expr>, SymsysError> {
            let gamma = TensorField::from_fn(&chart, vec![Slot::Down], |i| {
                if i[0] == k {
                    Expr::one(&chart)
                } else {
                    Expr::zero(&chart)
                }
            });
            let s = shift_tensor(&gamma, ShiftClass::CProjective, std::slice::from_ref(j))?;
            Ok(triples.iter().map(|&(a, b, c)| s.get(&[a, b, c]).clone()).collect())
        })
        .collect::<Result<_, _>>()?;
    let ann = matrix::kernel(&rows, triples.len(), &chart);
    let lie_d = connection_lie_forms(d);
    let mut forms = lie_derivative_forms(j);
    for phi in &ann {
        let mut f = LinearForm::new();
        for (w, &(a, b, c)) in phi.iter().zip(&triples) {
            f.add_scaled(&lie_d[a * n * n + b * n + c], w);
        }
        forms.push(f);
    }
    Ok(LinearPDESystem::new(&chart, forms))
}

/// The unique torsion-free connection with `DI = DJ = DK = 0`.
pub fn obata_solve(i: &TensorField, j: &TensorField, k: &TensorField) -> Result<Connection, SymsysError> {
    let report = check_hypercomplex_frame(i, j, k)?;
    if !report.all_pass() {
        let failed: Vec<&str> = report.checks.iter().filter(|(_, ok)| !ok).map(|(s, _)| s.as_str()).collect();
        return Err(SymsysError::Precondition(format!("not a hypercomplex frame: {}", failed.join(", "))));
    }
    let chart: Arc<Chart> = i.chart().clone();
    let n = i.dim();
    let triples = symmetric_triples(n);
    let unknown = |a: usize, b: usize, c: usize| {
        let (b, c) = if b <= c { (b, c) } else { (c, b) };
        triples.iter().position(|&t| t == (a, b, c)).unwrap()
    };
    let cols = triples.len();
    let mut m: Matrix = Vec::new();
    for t in [i, j, k] {
        // ∂c T^a_b + Γ^a_cp T^p_b − Γ^p_cb T^a_p = 0
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    let mut row = vec![Expr::zero(&chart); cols + 1];
                    row[cols] = t.get(&[a, b]).diff(c);
                    for p in 0..n {
                        let u = unknown(a, c, p);
                        row[u] = row[u].add(t.get(&[p, b]));
                        let u = unknown(p, c, b);
                        row[u] = row[u].sub(t.get(&[a, p]));
                    }
                    if row.iter().any(|e| !e.is_zero()) {
                        m.push(row);
                    }
                }
            }
        }
    }
    let pivots = matrix::rref(&mut m);
    if pivots.contains(&cols) {
        return Err(SymsysError::Inconsistent("no torsion-free connection preserves the frame".into()));
    }
    if pivots.len() < cols {
        return Err(SymsysError::NotUnique { free: cols - pivots.len() });
    }
    let mut sol = vec![Expr::zero(&chart); cols];
    for (r, &p) in pivots.iter().enumerate() {
        sol[p] = m[r][cols].neg();
    }
    let gamma = TensorField::from_fn(&chart, vec![Slot::Up, Slot::Down, Slot::Down], |x| {
        sol[unknown(x[0], x[1], x[2])].clone()
    });
    Ok(Connection::new(gamma)?)
}
