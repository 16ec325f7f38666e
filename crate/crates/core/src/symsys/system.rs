use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex};

use crate::exprfield::poly::MAX_VARS;
use crate::exprfield::{Chart, Expr};

/// Derivative multi-index over the chart coordinates.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct MultiIndex(pub [u8; MAX_VARS]);

impl MultiIndex {
    pub const ZERO: MultiIndex = MultiIndex([0; MAX_VARS]);

    pub fn unit(i: usize) -> Self {
        let mut m = [0; MAX_VARS];
        m[i] = 1;
        MultiIndex(m)
    }

    pub fn order(&self) -> usize {
        self.0.iter().map(|&e| e as usize).sum()
    }

    pub fn plus(&self, i: usize) -> Self {
        let mut m = *self;
        m.0[i] += 1;
        m
    }

    pub fn add(&self, o: &MultiIndex) -> Self {
        let mut m = *self;
        for (a, b) in m.0.iter_mut().zip(o.0.iter()) {
            *a += b;
        }
        m
    }

    /// All multi-indices of the given order in `n` variables, in
    /// descending lexicographic order.
    pub fn all_of_order(n: usize, order: usize) -> Vec<MultiIndex> {
        fn rec(n: usize, i: usize, left: usize, cur: &mut MultiIndex, out: &mut Vec<MultiIndex>) {
            if i + 1 == n {
                cur.0[i] = left as u8;
                out.push(*cur);
                cur.0[i] = 0;
                return;
            }
            for e in (0..=left).rev() {
                cur.0[i] = e as u8;
                rec(n, i + 1, left - e, cur, out);
            }
            cur.0[i] = 0;
        }
        let mut out = Vec::new();
        if n == 0 {
            if order == 0 {
                out.push(MultiIndex::ZERO);
            }
            return out;
        }
        let mut cur = MultiIndex::ZERO;
        rec(n, 0, order, &mut cur, &mut out);
        out
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let nz: Vec<String> = self
            .0
            .iter()
            .enumerate()
            .filter(|(_, &e)| e > 0)
            .map(|(i, e)| if *e == 1 { format!("{}", i) } else { format!("{}^{}", i, e) })
            .collect();
        write!(f, "[{}]", nz.join(","))
    }
}

/// Jet coordinate `∂^alpha X^unknown`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Jet {
    pub unknown: u8,
    pub alpha: MultiIndex,
}

impl Jet {
    pub fn new(unknown: usize, alpha: MultiIndex) -> Self {
        Jet { unknown: unknown as u8, alpha }
    }

    pub fn value(unknown: usize) -> Self {
        Jet::new(unknown, MultiIndex::ZERO)
    }

    pub fn first(unknown: usize, i: usize) -> Self {
        Jet::new(unknown, MultiIndex::unit(i))
    }

    pub fn order(&self) -> usize {
        self.alpha.order()
    }
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "X{}{:?}", self.unknown, self.alpha)
    }
}

/// Linear combination of jet coordinates with expression coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct LinearForm(pub BTreeMap<Jet, Expr>);

impl LinearForm {
    pub fn new() -> Self {
        LinearForm(BTreeMap::new())
    }

    pub fn add_term(&mut self, jet: Jet, c: &Expr) {
        if c.is_zero() {
            return;
        }
        match self.0.get_mut(&jet) {
            Some(v) => {
                *v = v.add(c);
                if v.is_zero() {
                    self.0.remove(&jet);
                }
            }
            None => {
                self.0.insert(jet, c.clone());
            }
        }
    }

    pub fn add_scaled(&mut self, o: &LinearForm, f: &Expr) {
        if f.is_zero() {
            return;
        }
        for (j, c) in &o.0 {
            self.add_term(*j, &c.mul(f));
        }
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn order(&self) -> usize {
        self.0.keys().map(Jet::order).max().unwrap_or(0)
    }
}

/// An equation of a prolonged system: the total derivative `D^derived`
/// of base equation `source`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Equation {
    pub source: usize,
    pub derived: MultiIndex,
}

/// Base equations with deduplicated coefficients and a shared cache of
/// their partial derivatives.
#[derive(Debug)]
struct Base {
    forms: Vec<Vec<(Jet, usize)>>,
    orders: Vec<usize>,
    coefs: Vec<Expr>,
    derivs: Mutex<HashMap<(usize, MultiIndex), Expr>>,
}

impl Base {
    fn derivative(&self, id: usize, beta: MultiIndex) -> Expr {
        let Some(i) = beta.0.iter().position(|&e| e > 0) else {
            return self.coefs[id].clone();
        };
        if let Some(e) = self.derivs.lock().unwrap().get(&(id, beta)) {
            return e.clone();
        }
        let mut lower = beta;
        lower.0[i] -= 1;
        let e = self.derivative(id, lower).diff(i);
        self.derivs.lock().unwrap().insert((id, beta), e.clone());
        e
    }
}

fn multinomial(alpha: &MultiIndex, beta: &MultiIndex) -> u64 {
    let mut out = 1u64;
    for (&a, &b) in alpha.0.iter().zip(beta.0.iter()) {
        for t in 0..b as u64 {
            out = out * (a as u64 - t) / (t + 1);
        }
    }
    out
}

/// Every `beta <= alpha` componentwise.
pub(crate) fn sub_indices(alpha: &MultiIndex) -> Vec<MultiIndex> {
    let mut out = vec![MultiIndex::ZERO];
    for (i, &a) in alpha.0.iter().enumerate() {
        if a == 0 {
            continue;
        }
        let prev = std::mem::take(&mut out);
        for b in prev {
            for e in 0..=a {
                let mut m = b;
                m.0[i] = e;
                out.push(m);
            }
        }
    }
    out
}

/// One Leibniz term of a prolonged equation: `mult · ∂^beta c_coef`
/// multiplying `jet`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LeibnizTerm {
    pub jet: Jet,
    pub coef: usize,
    pub beta: MultiIndex,
    pub mult: u64,
}

/// Linear homogeneous PDE system for the components of a vector field.
/// Prolongations share the base equations and expand total derivatives
/// by the Leibniz rule on demand.
#[derive(Clone, Debug)]
pub struct LinearPDESystem {
    chart: Arc<Chart>,
    base: Arc<Base>,
    equations: Vec<Equation>,
}

impl LinearPDESystem {
    /// Builds a base system, dropping identically vanishing equations.
    pub fn new(chart: &Arc<Chart>, forms: Vec<LinearForm>) -> Self {
        let mut ids: HashMap<Expr, usize> = HashMap::new();
        let mut coefs = Vec::new();
        let mut base_forms = Vec::new();
        let mut orders = Vec::new();
        for f in forms.into_iter().filter(|f| !f.is_zero()) {
            orders.push(f.order());
            let terms =
                f.0.into_iter()
                    .map(|(jet, c)| {
                        let id = *ids.entry(c.clone()).or_insert_with(|| {
                            coefs.push(c);
                            coefs.len() - 1
                        });
                        (jet, id)
                    })
                    .collect();
            base_forms.push(terms);
        }
        let equations = (0..base_forms.len()).map(|source| Equation { source, derived: MultiIndex::ZERO }).collect();
        let base = Base { forms: base_forms, orders, coefs, derivs: Mutex::new(HashMap::new()) };
        LinearPDESystem { chart: chart.clone(), base: Arc::new(base), equations }
    }

    pub(crate) fn with_equations(&self, equations: Vec<Equation>) -> Self {
        LinearPDESystem { chart: self.chart.clone(), base: self.base.clone(), equations }
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    /// Number of unknowns, one per coordinate.
    pub fn n_unknowns(&self) -> usize {
        self.chart.n_coords()
    }

    pub fn equations(&self) -> &[Equation] {
        &self.equations
    }

    pub fn len(&self) -> usize {
        self.equations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.equations.is_empty()
    }

    pub fn equation_order(&self, e: &Equation) -> usize {
        self.base.orders[e.source] + e.derived.order()
    }

    /// Highest jet order occurring in the system.
    pub fn order(&self) -> usize {
        self.equations.iter().map(|e| self.equation_order(e)).max().unwrap_or(0)
    }

    /// Largest total-derivative order already applied.
    pub fn prolongation_depth(&self) -> usize {
        self.equations.iter().map(|e| e.derived.order()).max().unwrap_or(0)
    }

    /// Distinct coefficients of the base equations.
    pub fn base_coefficients(&self) -> &[Expr] {
        &self.base.coefs
    }

    /// `∂^beta` of a base coefficient, memoized across prolongations.
    pub fn coefficient_derivative(&self, coef: usize, beta: MultiIndex) -> Expr {
        self.base.derivative(coef, beta)
    }

    /// Leibniz expansion of an equation; terms with the same jet are not
    /// merged.
    pub fn leibniz_terms(&self, e: &Equation) -> Vec<LeibnizTerm> {
        let subs = sub_indices(&e.derived);
        let mut out = Vec::new();
        for &(jet, coef) in &self.base.forms[e.source] {
            for beta in &subs {
                let mut alpha = jet.alpha;
                for (a, (d, b)) in alpha.0.iter_mut().zip(e.derived.0.iter().zip(beta.0.iter())) {
                    *a += d - b;
                }
                out.push(LeibnizTerm {
                    jet: Jet { unknown: jet.unknown, alpha },
                    coef,
                    beta: *beta,
                    mult: multinomial(&e.derived, beta),
                });
            }
        }
        out
    }

    /// The equation as an explicit linear form.
    pub fn form(&self, e: &Equation) -> LinearForm {
        let mut f = LinearForm::new();
        for t in self.leibniz_terms(e) {
            let c = self.coefficient_derivative(t.coef, t.beta).scale_int(t.mult as i64);
            f.add_term(t.jet, &c);
        }
        f
    }
}
