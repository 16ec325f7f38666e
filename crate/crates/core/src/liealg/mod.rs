//! Finite-dimensional Lie algebras over the rationals: closure of vector
//! fields, centralizers and normalizers, kernels of representations and
//! invariant tensors.

pub mod linalg;

use std::fmt;

use num_traits::{One, Signed, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::exprfield::{Chart, Expr, ExprError};
use crate::geometry::{bracket, GeometryError, Slot, TensorField};
use linalg::{QMatrix, Q};

#[derive(Debug, Error)]
pub enum LieError {
    #[error("structure constants are not antisymmetric at ({0}, {1})")]
    NotAntisymmetric(usize, usize),
    #[error("Jacobi identity fails for ({0}, {1}, {2})")]
    Jacobi(usize, usize, usize),
    #[error("bracket of fields {i} and {j} is not in their span: {bracket}")]
    NotClosed { i: usize, j: usize, bracket: String },
    #[error("fields are linearly dependent over the constants")]
    Dependent,
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("matrices do not represent the algebra at ({0}, {1})")]
    NotARepresentation(usize, usize),
    #[error("tensor space of dimension {0} exceeds the size guard")]
    TooLarge(usize),
    #[error("component {0} is not affine-linear in the coordinates")]
    Nonlinear(usize),
    #[error("field {0} does not vanish at the base point")]
    NotIsotropy(usize),
    #[error("no generic point found")]
    NoGenericPoint,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Expr(#[from] ExprError),
}

/// Largest tensor space `equivariant_tensors` will build.
pub const MAX_TENSOR_DIM: usize = 4096;

/// Structure constants `c[i][j][k]` with `[e_i, e_j] = Σ_k c[i][j][k] e_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct LieAlgebra {
    c: Vec<Vec<Vec<Q>>>,
    labels: Vec<String>,
}

impl LieAlgebra {
    pub fn new(c: Vec<Vec<Vec<Q>>>, labels: Option<Vec<String>>) -> Result<Self, LieError> {
        let d = c.len();
        if c.iter().any(|r| r.len() != d || r.iter().any(|v| v.len() != d)) {
            return Err(LieError::Shape(format!("structure constants must be {d}x{d}x{d}")));
        }
        let labels = labels.unwrap_or_else(|| (1..=d).map(|i| format!("e{i}")).collect());
        if labels.len() != d {
            return Err(LieError::Shape(format!("{} labels for dimension {d}", labels.len())));
        }
        for i in 0..d {
            for j in 0..d {
                if c[i][j].iter().zip(&c[j][i]).any(|(a, b)| !(a + b).is_zero()) {
                    return Err(LieError::NotAntisymmetric(i, j));
                }
            }
        }
        let a = LieAlgebra { c, labels };
        for i in 0..d {
            for j in i + 1..d {
                for k in j + 1..d {
                    let (ei, ej, ek) = (a.basis(i), a.basis(j), a.basis(k));
                    let s1 = a.bracket(&ei, &a.bracket(&ej, &ek));
                    let s2 = a.bracket(&ej, &a.bracket(&ek, &ei));
                    let s3 = a.bracket(&ek, &a.bracket(&ei, &ej));
                    if s1.iter().zip(&s2).zip(&s3).any(|((x, y), z)| !(x + y + z).is_zero()) {
                        return Err(LieError::Jacobi(i, j, k));
                    }
                }
            }
        }
        Ok(a)
    }

    pub fn abelian(d: usize) -> Self {
        LieAlgebra::new(vec![vec![vec![Q::zero(); d]; d]; d], None).unwrap()
    }

    /// Builds the constants from the nonzero brackets `[e_i, e_j]` with `i < j`.
    pub fn from_brackets(
        d: usize,
        brackets: &[(usize, usize, Vec<Q>)],
        labels: Option<Vec<String>>,
    ) -> Result<Self, LieError> {
        let mut c = vec![vec![vec![Q::zero(); d]; d]; d];
        for (i, j, v) in brackets {
            if *i >= d || *j >= d || v.len() != d {
                return Err(LieError::Shape(format!("bracket [{i}, {j}] out of range")));
            }
            c[*i][*j] = v.clone();
            c[*j][*i] = v.iter().map(|x| -x).collect();
        }
        LieAlgebra::new(c, labels)
    }

    pub fn dim(&self) -> usize {
        self.c.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn structure_constants(&self) -> &[Vec<Vec<Q>>] {
        &self.c
    }

    pub fn basis(&self, i: usize) -> Vec<Q> {
        let mut v = vec![Q::zero(); self.dim()];
        v[i] = Q::one();
        v
    }

    pub fn bracket(&self, x: &[Q], y: &[Q]) -> Vec<Q> {
        let d = self.dim();
        let mut out = vec![Q::zero(); d];
        for (i, xi) in x.iter().enumerate().filter(|(_, v)| !v.is_zero()) {
            for (j, yj) in y.iter().enumerate().filter(|(_, v)| !v.is_zero()) {
                let f = xi * yj;
                for (o, c) in out.iter_mut().zip(&self.c[i][j]) {
                    if !c.is_zero() {
                        *o += &f * c;
                    }
                }
            }
        }
        out
    }

    /// Matrix of `ad(x)` in the basis.
    pub fn ad(&self, x: &[Q]) -> QMatrix {
        let d = self.dim();
        let cols: Vec<Vec<Q>> = (0..d).map(|j| self.bracket(x, &self.basis(j))).collect();
        (0..d).map(|i| (0..d).map(|j| cols[j][i].clone()).collect()).collect()
    }

    pub fn center(&self) -> Subspace {
        let d = self.dim();
        let m: QMatrix = (0..d).flat_map(|i| self.ad(&self.basis(i))).collect();
        Subspace::from_spanning(d, &linalg::kernel(&m, d))
    }

    pub fn derived_algebra(&self) -> Subspace {
        let d = self.dim();
        let brackets: Vec<Vec<Q>> =
            (0..d).flat_map(|i| (i + 1..d).map(move |j| (i, j))).map(|(i, j)| self.c[i][j].clone()).collect();
        Subspace::from_spanning(d, &brackets)
    }

    pub fn is_subalgebra(&self, s: &Subspace) -> bool {
        s.basis.iter().all(|x| s.basis.iter().all(|y| s.contains(&self.bracket(x, y))))
    }

    /// Kernel of `ad(x)`.
    pub fn centralizer(&self, x: &[Q]) -> Subspace {
        let d = self.dim();
        let s = Subspace::from_spanning(d, &linalg::kernel(&self.ad(x), d));
        assert!(self.is_subalgebra(&s), "centralizer is not closed");
        s
    }

    /// `{y : [y, S] ⊆ S}`.
    pub fn normalizer_of_span(&self, span: &[Vec<Q>]) -> Subspace {
        let d = self.dim();
        let s = Subspace::from_spanning(d, span);
        let eqs = s.equations();
        let mut m = QMatrix::new();
        for v in &s.basis {
            m.extend(linalg::mul(&eqs, &self.ad(v)));
        }
        let n = Subspace::from_spanning(d, &linalg::kernel(&m, d));
        assert!(self.is_subalgebra(&n), "normalizer is not closed");
        n
    }

    /// `x` written in terms of the basis labels.
    pub fn element_label(&self, x: &[Q]) -> String {
        let mut out = String::new();
        for (c, l) in x.iter().zip(&self.labels).filter(|(c, _)| !c.is_zero()) {
            let sign = match (out.is_empty(), c.is_negative()) {
                (true, false) => "",
                (true, true) => "-",
                (false, false) => " + ",
                (false, true) => " - ",
            };
            let a = c.abs();
            let coef = if a.is_one() { String::new() } else { format!("{a} ") };
            out.push_str(&format!("{sign}{coef}{l}"));
        }
        if out.is_empty() {
            out.push('0');
        }
        out
    }
}

/// A linear subspace of `Q^ambient`, stored by its reduced echelon basis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subspace {
    pub ambient: usize,
    pub basis: Vec<Vec<Q>>,
}

impl Subspace {
    pub fn from_spanning(ambient: usize, vectors: &[Vec<Q>]) -> Self {
        Subspace { ambient, basis: linalg::span_basis(vectors) }
    }

    pub fn whole(ambient: usize) -> Self {
        Subspace { ambient, basis: linalg::identity(ambient) }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn contains(&self, v: &[Q]) -> bool {
        let mut m = self.basis.clone();
        m.push(v.to_vec());
        linalg::rank(&m) == self.dim()
    }

    /// Rows `W` with `S = ker W`.
    pub fn equations(&self) -> QMatrix {
        linalg::kernel(&self.basis, self.ambient)
    }
}

/// Matrices `ρ(e_i)` acting on a module of dimension `module_dim`.
#[derive(Debug, Clone)]
pub struct Representation {
    algebra: LieAlgebra,
    matrices: Vec<QMatrix>,
}

impl Representation {
    pub fn new(algebra: LieAlgebra, matrices: Vec<QMatrix>) -> Result<Self, LieError> {
        if matrices.len() != algebra.dim() {
            return Err(LieError::Shape(format!("{} matrices for dimension {}", matrices.len(), algebra.dim())));
        }
        let m = matrices.first().map_or(0, Vec::len);
        if matrices.iter().any(|a| a.len() != m || a.iter().any(|r| r.len() != m)) {
            return Err(LieError::Shape("matrices must be square of a common size".into()));
        }
        let r = Representation { algebra, matrices };
        let d = r.algebra.dim();
        for i in 0..d {
            for j in i + 1..d {
                let lhs = r.matrix(&r.algebra.bracket(&r.algebra.basis(i), &r.algebra.basis(j)));
                if lhs != linalg::commutator(&r.matrices[i], &r.matrices[j]) {
                    return Err(LieError::NotARepresentation(i, j));
                }
            }
        }
        Ok(r)
    }

    pub fn algebra(&self) -> &LieAlgebra {
        &self.algebra
    }

    pub fn module_dim(&self) -> usize {
        self.matrices.first().map_or(0, Vec::len)
    }

    pub fn generators(&self) -> &[QMatrix] {
        &self.matrices
    }

    /// `ρ(x)` for an element given in the basis.
    pub fn matrix(&self, x: &[Q]) -> QMatrix {
        let m = self.module_dim();
        let mut out = linalg::zeros(m, m);
        for (c, a) in x.iter().zip(&self.matrices) {
            if !c.is_zero() {
                out = linalg::add(&out, &linalg::scale(a, c));
            }
        }
        out
    }
}

/// Kernel of `ρ(x)`.
pub fn zero_eigenspace(r: &Representation, x: &[Q]) -> Subspace {
    kernel_of(&r.matrix(x))
}

/// Kernel of a single operator on `Q^n`.
pub fn kernel_of(a: &QMatrix) -> Subspace {
    let n = a.len();
    Subspace::from_spanning(n, &linalg::kernel(a, n))
}

/// Rational values `t` with `dim ker(x + t y) = target`, searched over
/// nonzero `p/q` with `|p|, q ≤ height`.
pub fn kernel_parameter_search(x: &QMatrix, y: &QMatrix, target: usize, height: i64) -> Vec<Q> {
    let mut candidates: Vec<Q> = (1..=height)
        .flat_map(|q| (-height..=height).map(move |p| Q::new(p.into(), q.into())))
        .filter(|t| !t.is_zero())
        .collect();
    candidates.sort();
    candidates.dedup();
    candidates.into_iter().filter(|t| kernel_of(&linalg::add(x, &linalg::scale(y, t))).dim() == target).collect()
}

/// Basis of the tensors with the given slots (over the module) annihilated by
/// every generator, acting by derivations with `−ρᵀ` on `Down` slots.
pub fn equivariant_tensors(r: &Representation, slots: &[Slot]) -> Result<Vec<Vec<Q>>, LieError> {
    let m = r.module_dim();
    let size = m.checked_pow(slots.len() as u32).filter(|s| *s <= MAX_TENSOR_DIM);
    let Some(size) = size else { return Err(LieError::TooLarge(m.saturating_pow(slots.len() as u32))) };
    let actions: Vec<QMatrix> = r.generators().iter().map(|a| tensor_action(a, slots, size)).collect();
    let stacked: QMatrix = actions.iter().flatten().cloned().collect();
    let basis = linalg::kernel(&stacked, size);
    for t in &basis {
        for a in &actions {
            assert!(linalg::is_zero_vec(&linalg::apply(a, t)), "invariant tensor check failed");
        }
    }
    Ok(basis)
}

fn tensor_action(a: &QMatrix, slots: &[Slot], size: usize) -> QMatrix {
    let m = a.len();
    let mut out = linalg::zeros(size, size);
    let digits = |mut flat: usize| {
        let mut idx = vec![0; slots.len()];
        for d in idx.iter_mut().rev() {
            *d = flat % m;
            flat /= m;
        }
        idx
    };
    let flat = |idx: &[usize]| idx.iter().fold(0, |acc, i| acc * m + i);
    for col in 0..size {
        let idx = digits(col);
        for (s, slot) in slots.iter().enumerate() {
            for k in 0..m {
                let mut target = idx.clone();
                target[s] = k;
                let coeff = match slot {
                    Slot::Up => a[k][idx[s]].clone(),
                    Slot::Down => -a[idx[s]][k].clone(),
                };
                if !coeff.is_zero() {
                    out[flat(&target)][col] += coeff;
                }
            }
        }
    }
    out
}

/// Values of every component of every field at `points`, as the columns of
/// a matrix with one row per (point, component).
fn evaluation_matrix(fields: &[TensorField], points: &[Vec<Q>]) -> Result<QMatrix, LieError> {
    let n = fields.first().map_or(0, TensorField::dim);
    let mut rows = Vec::new();
    for p in points {
        for a in 0..n {
            let row: Result<Vec<Q>, ExprError> = fields.iter().map(|f| f.get(&[a]).evaluate(p)).collect();
            rows.push(row?);
        }
    }
    Ok(rows)
}

fn generic_points(chart: &Chart, fields: &[TensorField], want: usize) -> Result<Vec<Vec<Q>>, LieError> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x11e);
    let mut points = Vec::new();
    for _ in 0..want * 16 {
        if points.len() == want {
            break;
        }
        let Some(p) = chart.sample_point_with_height(&mut rng, 10) else { continue };
        let ok = fields.iter().all(|f| f.components().iter().all(|e| e.evaluate(&p).is_ok()));
        if ok {
            points.push(p);
        }
    }
    if points.len() < want {
        return Err(LieError::NoGenericPoint);
    }
    Ok(points)
}

/// Structure constants of the span of `fields`, which must be closed under
/// the bracket with constant coefficients.
pub fn closure_from_fields(fields: &[TensorField]) -> Result<LieAlgebra, LieError> {
    let Some(first) = fields.first() else { return LieAlgebra::new(vec![], None) };
    let chart = first.chart().clone();
    for f in fields {
        if f.slots() != [Slot::Up] || !std::sync::Arc::ptr_eq(f.chart(), &chart) {
            return Err(LieError::Shape("closure needs vector fields on one chart".into()));
        }
    }
    let d = fields.len();
    let n = chart.n_coords();
    let points = generic_points(&chart, fields, d.div_ceil(n) + 2)?;
    let eval = evaluation_matrix(fields, &points)?;
    if linalg::rank(&eval) < d {
        return Err(LieError::Dependent);
    }
    let mut c = vec![vec![vec![Q::zero(); d]; d]; d];
    for i in 0..d {
        for j in i + 1..d {
            let b = bracket(&fields[i], &fields[j])?;
            let rhs: Vec<Q> = evaluation_matrix(std::slice::from_ref(&b), &points)?.into_iter().flatten().collect();
            let shown: Vec<String> = b.components().iter().map(Expr::to_string).collect();
            let not_closed = || LieError::NotClosed { i, j, bracket: format!("({})", shown.join(", ")) };
            let coeffs = linalg::solve(&eval, &rhs, d).ok_or_else(not_closed)?;
            let mut combo = TensorField::zeros(&chart, vec![Slot::Up]);
            for (k, f) in fields.iter().enumerate() {
                if !coeffs[k].is_zero() {
                    combo = combo.add(&f.scale(&Expr::rational(&chart, &coeffs[k])));
                }
            }
            if !b.sub(&combo).is_zero_checked()? {
                return Err(not_closed());
            }
            c[j][i] = coeffs.iter().map(|x| -x).collect();
            c[i][j] = coeffs;
        }
    }
    LieAlgebra::new(c, None)
}

/// Isotropy algebra of fields vanishing at `point`, acting on the tangent
/// space there by `X ↦ −DX(point)`.
pub fn isotropy_representation(fields: &[TensorField], point: &[Q]) -> Result<Representation, LieError> {
    let algebra = closure_from_fields(fields)?;
    let mut matrices = Vec::new();
    for (i, f) in fields.iter().enumerate() {
        let n = f.dim();
        if f.components().iter().any(|e| e.evaluate(point).map_or(true, |v| !v.is_zero())) {
            return Err(LieError::NotIsotropy(i));
        }
        let mut m = linalg::zeros(n, n);
        for (a, row) in m.iter_mut().enumerate() {
            for (b, x) in row.iter_mut().enumerate() {
                *x = -f.get(&[a]).diff(b).evaluate(point)?;
            }
        }
        matrices.push(m);
    }
    Representation::new(algebra, matrices)
}

/// Zero set of a vector field with affine-linear components.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Locus {
    Empty,
    Affine {
        point: Vec<Q>,
        directions: Vec<Vec<Q>>,
        /// Reduced equations `[a | b]` meaning `a·x = b`.
        equations: Vec<Vec<Q>>,
        names: Vec<String>,
    },
}

impl Locus {
    pub fn dim(&self) -> Option<usize> {
        match self {
            Locus::Empty => None,
            Locus::Affine { directions, .. } => Some(directions.len()),
        }
    }
}

impl fmt::Display for Locus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let Locus::Affine { equations, names, .. } = self else { return write!(f, "empty") };
        if equations.is_empty() {
            return write!(f, "everywhere");
        }
        let n = names.len();
        let eqs: Vec<String> = equations
            .iter()
            .map(|row| {
                let mut lhs = String::new();
                for (c, name) in row[..n].iter().zip(names).filter(|(c, _)| !c.is_zero()) {
                    let sign = if c.is_negative() {
                        " - "
                    } else if lhs.is_empty() {
                        ""
                    } else {
                        " + "
                    };
                    let lead = if lhs.is_empty() && c.is_negative() { "-" } else { sign };
                    let a = c.abs();
                    let coef = if a.is_one() { String::new() } else { format!("{a} ") };
                    lhs.push_str(&format!("{lead}{coef}{name}"));
                }
                format!("{lhs} = {}", row[n])
            })
            .collect();
        write!(f, "{}", eqs.join(", "))
    }
}

pub fn vanishing_locus(x: &TensorField) -> Result<Locus, LieError> {
    let chart = x.chart();
    let n = chart.n_coords();
    let mut rows = Vec::new();
    for (a, e) in x.components().iter().enumerate() {
        if !e.denominator().is_one() {
            return Err(LieError::Nonlinear(a));
        }
        let mut row = vec![Q::zero(); n + 1];
        for (mono, c) in e.numerator().terms() {
            match (0..chart.n_vars()).filter(|&v| mono.exp(v) > 0).collect::<Vec<_>>()[..] {
                [] => row[n] = -Q::from_integer(c.clone()),
                [v] if v < n && mono.exp(v) == 1 => row[v] = Q::from_integer(c.clone()),
                _ => return Err(LieError::Nonlinear(a)),
            }
        }
        rows.push(row);
    }
    let mut eqs = rows.clone();
    let pivots = linalg::rref(&mut eqs);
    if pivots.last() == Some(&n) {
        return Ok(Locus::Empty);
    }
    let a: QMatrix = rows.iter().map(|r| r[..n].to_vec()).collect();
    let b: Vec<Q> = rows.iter().map(|r| r[n].clone()).collect();
    let point = linalg::solve(&a, &b, n).expect("consistent system");
    Ok(Locus::Affine {
        point,
        directions: linalg::kernel(&a, n),
        equations: eqs,
        names: chart.coordinate_names().to_vec(),
    })
}
