use std::fmt;
use std::sync::Arc;

use crate::exprfield::{Chart, Expr};

use super::matrix::Matrix;
use super::GeometryError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Slot {
    Up,
    Down,
}

/// Dense tensor field; components are stored row-major with the first
/// slot most significant, so a (1,1) tensor `T^a_b` sits at `a * n + b`.
#[derive(Clone)]
pub struct TensorField {
    chart: Arc<Chart>,
    slots: Vec<Slot>,
    comps: Vec<Expr>,
}

impl TensorField {
    pub fn new(chart: &Arc<Chart>, slots: Vec<Slot>, comps: Vec<Expr>) -> Result<Self, GeometryError> {
        let n = chart.n_coords();
        let want = n.pow(slots.len() as u32);
        if comps.len() != want {
            return Err(GeometryError::Shape(format!("{} components given, {} expected", comps.len(), want)));
        }
        if comps.iter().any(|e| !Arc::ptr_eq(e.chart(), chart)) {
            return Err(GeometryError::Shape("component from another chart".into()));
        }
        Ok(TensorField { chart: chart.clone(), slots, comps })
    }

    pub fn zeros(chart: &Arc<Chart>, slots: Vec<Slot>) -> Self {
        let len = chart.n_coords().pow(slots.len() as u32);
        TensorField { chart: chart.clone(), slots, comps: vec![Expr::zero(chart); len] }
    }

    pub fn from_fn(chart: &Arc<Chart>, slots: Vec<Slot>, mut f: impl FnMut(&[usize]) -> Expr) -> Self {
        let n = chart.n_coords();
        let r = slots.len();
        let len = n.pow(r as u32);
        let mut idx = vec![0; r];
        let mut comps = Vec::with_capacity(len);
        for flat in 0..len {
            let mut k = flat;
            for s in (0..r).rev() {
                idx[s] = k % n;
                k /= n;
            }
            comps.push(f(&idx));
        }
        TensorField { chart: chart.clone(), slots, comps }
    }

    pub fn vector(chart: &Arc<Chart>, comps: Vec<Expr>) -> Result<Self, GeometryError> {
        TensorField::new(chart, vec![Slot::Up], comps)
    }

    /// Coordinate vector field `∂_i`.
    pub fn coordinate_vector(chart: &Arc<Chart>, i: usize) -> Self {
        TensorField::from_fn(chart, vec![Slot::Up], |a| if a[0] == i { Expr::one(chart) } else { Expr::zero(chart) })
    }

    pub fn covector(chart: &Arc<Chart>, comps: Vec<Expr>) -> Result<Self, GeometryError> {
        TensorField::new(chart, vec![Slot::Down], comps)
    }

    /// A (1,1) tensor from its matrix `m[a][b] = T^a_b`.
    pub fn endomorphism(chart: &Arc<Chart>, m: &Matrix) -> Result<Self, GeometryError> {
        TensorField::new(chart, vec![Slot::Up, Slot::Down], m.iter().flatten().cloned().collect())
    }

    /// A (0,2) tensor from its matrix `m[a][b] = T_ab`.
    pub fn bilinear(chart: &Arc<Chart>, m: &Matrix) -> Result<Self, GeometryError> {
        TensorField::new(chart, vec![Slot::Down, Slot::Down], m.iter().flatten().cloned().collect())
    }

    pub fn identity(chart: &Arc<Chart>) -> Self {
        TensorField::from_fn(chart, vec![Slot::Up, Slot::Down], |i| {
            if i[0] == i[1] {
                Expr::one(chart)
            } else {
                Expr::zero(chart)
            }
        })
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn dim(&self) -> usize {
        self.chart.n_coords()
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    pub fn components(&self) -> &[Expr] {
        &self.comps
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        let n = self.dim();
        idx.iter().fold(0, |acc, &i| acc * n + i)
    }

    pub fn get(&self, idx: &[usize]) -> &Expr {
        &self.comps[self.flat_index(idx)]
    }

    pub fn set(&mut self, idx: &[usize], e: Expr) {
        let k = self.flat_index(idx);
        self.comps[k] = e;
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(Expr::is_zero)
    }

    /// Zero test with the evaluation cross-check on every component.
    pub fn is_zero_checked(&self) -> Result<bool, GeometryError> {
        for c in &self.comps {
            if !c.is_zero_checked()? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Multi-indices of the nonzero components.
    pub fn nonzero_indices(&self) -> Vec<Vec<usize>> {
        let n = self.dim();
        let r = self.slots.len();
        (0..self.comps.len())
            .filter(|&k| !self.comps[k].is_zero())
            .map(|mut k| {
                let mut idx = vec![0; r];
                for s in (0..r).rev() {
                    idx[s] = k % n;
                    k /= n;
                }
                idx
            })
            .collect()
    }

    fn same_shape(&self, o: &TensorField) {
        assert!(Arc::ptr_eq(&self.chart, &o.chart) && self.slots == o.slots, "tensor shapes differ");
    }

    pub fn add(&self, o: &TensorField) -> TensorField {
        self.same_shape(o);
        let comps = self.comps.iter().zip(&o.comps).map(|(a, b)| a.add(b)).collect();
        TensorField { chart: self.chart.clone(), slots: self.slots.clone(), comps }
    }

    pub fn sub(&self, o: &TensorField) -> TensorField {
        self.add(&o.scale(&Expr::int(&self.chart, -1)))
    }

    pub fn scale(&self, f: &Expr) -> TensorField {
        let comps = self.comps.iter().map(|a| a.mul(f)).collect();
        TensorField { chart: self.chart.clone(), slots: self.slots.clone(), comps }
    }

    pub fn map(&self, f: impl Fn(&Expr) -> Expr) -> TensorField {
        TensorField { chart: self.chart.clone(), slots: self.slots.clone(), comps: self.comps.iter().map(f).collect() }
    }

    /// Components of a rank-2 tensor as a matrix indexed by its two slots.
    pub fn matrix(&self) -> Matrix {
        assert_eq!(self.slots.len(), 2, "matrix view needs two slots");
        let n = self.dim();
        (0..n).map(|a| self.comps[a * n..(a + 1) * n].to_vec()).collect()
    }

    pub fn is_endomorphism(&self) -> bool {
        self.slots == [Slot::Up, Slot::Down]
    }

    /// Whether slots `i` and `j` are symmetric componentwise.
    pub fn is_symmetric_in(&self, i: usize, j: usize) -> bool {
        let n = self.dim();
        let r = self.slots.len();
        let mut ok = true;
        let mut idx = vec![0; r];
        for k in 0..self.comps.len() {
            let mut t = k;
            for s in (0..r).rev() {
                idx[s] = t % n;
                t /= n;
            }
            let mut sw = idx.clone();
            sw.swap(i, j);
            ok &= self.comps[k] == *self.get(&sw);
        }
        ok
    }

    /// Applies an endomorphism field to a vector field.
    pub fn apply(&self, x: &TensorField) -> TensorField {
        assert!(self.is_endomorphism() && x.slots == [Slot::Up]);
        let n = self.dim();
        TensorField::from_fn(&self.chart, vec![Slot::Up], |a| {
            let mut acc = Expr::zero(&self.chart);
            for b in 0..n {
                acc = acc.add(&self.get(&[a[0], b]).mul(x.get(&[b])));
            }
            acc
        })
    }

    /// Composition `self ∘ o` of endomorphism fields.
    pub fn compose(&self, o: &TensorField) -> TensorField {
        assert!(self.is_endomorphism() && o.is_endomorphism());
        TensorField::endomorphism(&self.chart, &super::matrix::mul(&self.matrix(), &o.matrix())).unwrap()
    }

    /// Directional derivative `X(f)` of a scalar.
    pub fn derivative_of(&self, f: &Expr) -> Expr {
        assert_eq!(self.slots, [Slot::Up]);
        let mut acc = Expr::zero(&self.chart);
        for (k, xk) in self.comps.iter().enumerate() {
            if !xk.is_zero() {
                acc = acc.add(&xk.mul(&f.diff(k)));
            }
        }
        acc
    }
}

impl PartialEq for TensorField {
    fn eq(&self, o: &TensorField) -> bool {
        Arc::ptr_eq(&self.chart, &o.chart) && self.slots == o.slots && self.comps == o.comps
    }
}

impl Eq for TensorField {}

impl fmt::Debug for TensorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TensorField{:?}[", self.slots)?;
        for idx in self.nonzero_indices() {
            write!(f, " {:?}: {};", idx, self.get(&idx))?;
        }
        write!(f, " ]")
    }
}
