//! Prolongation and projection of linear PDE systems.

mod elim;

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::exprfield::{Chart, Expr, ExprError};
use crate::geometry::{Slot, TensorField};
use crate::symsys::{Equation, Jet, LinearForm, LinearPDESystem, MultiIndex};

pub const DEFAULT_MAX_STAGE: usize = 6;
pub const DEFAULT_SEED: u64 = 0x5eed;
const POINTS: usize = 3;
const SAMPLE_ATTEMPTS: usize = 64;
const SAMPLE_HEIGHT: i64 = 10;

#[derive(Debug, Error)]
pub enum ProlongError {
    #[error("max_stage must be at least 1")]
    BadStage,
    #[error("no admissible generic point found after {0} attempts")]
    NoGenericPoint(usize),
    #[error("coefficient has a pole at the point")]
    DegeneratePoint,
    #[error("expected a vector field on the system's chart")]
    NotAVector,
    #[error(transparent)]
    Expr(#[from] ExprError),
}

/// Total derivative `D_i` of a linear form.
pub fn total_derivative(f: &LinearForm, i: usize) -> LinearForm {
    let mut out = LinearForm::new();
    for (jet, c) in &f.0 {
        out.add_term(*jet, &c.diff(i));
        out.add_term(Jet::new(jet.unknown as usize, jet.alpha.plus(i)), c);
    }
    out
}

/// Appends the total derivatives of the equations in the highest
/// derivative layer with respect to every coordinate. Derivatives of
/// lower layers are already present, so the result spans all first
/// derivatives of all equations.
pub fn prolong(s: &LinearPDESystem) -> LinearPDESystem {
    let n = s.chart().n_coords();
    let depth = s.prolongation_depth();
    let mut seen: HashSet<Equation> = s.equations().iter().copied().collect();
    let mut eqs: Vec<Equation> = s.equations().to_vec();
    let mut fresh = Vec::new();
    for e in s.equations().iter().filter(|e| e.derived.order() == depth) {
        for i in 0..n {
            let d = Equation { source: e.source, derived: e.derived.plus(i) };
            if seen.insert(d) {
                fresh.push(d);
            }
        }
    }
    let out = s.with_equations({
        eqs.extend(&fresh);
        eqs
    });
    let mut needed: Vec<(usize, MultiIndex)> =
        fresh.iter().flat_map(|e| out.leibniz_terms(e)).map(|t| (t.coef, t.beta)).collect();
    needed.sort();
    needed.dedup();
    for (c, beta) in needed {
        out.coefficient_derivative(c, beta);
    }
    out
}

/// A chart point at which every relation holds exactly.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenericPoint {
    values: Vec<BigRational>,
}

impl GenericPoint {
    pub fn new(chart: &Chart, values: Vec<BigRational>) -> Result<Self, ProlongError> {
        chart.check_point(&values)?;
        Ok(GenericPoint { values })
    }

    pub fn values(&self) -> &[BigRational] {
        &self.values
    }

    /// Samples points until one makes every coefficient of `s` finite.
    pub fn sample(s: &LinearPDESystem, rng: &mut ChaCha8Rng) -> Result<Self, ProlongError> {
        for _ in 0..SAMPLE_ATTEMPTS {
            let Some(values) = s.chart().sample_point_with_height(rng, SAMPLE_HEIGHT) else { continue };
            if admissible(s, &values) {
                return Ok(GenericPoint { values });
            }
        }
        Err(ProlongError::NoGenericPoint(SAMPLE_ATTEMPTS))
    }
}

impl fmt::Display for GenericPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.values.iter().map(|v| v.to_string()).collect();
        write!(f, "({})", parts.join(", "))
    }
}

fn admissible(s: &LinearPDESystem, p: &[BigRational]) -> bool {
    s.base_coefficients().iter().all(|c| c.evaluate_unchecked(p).is_ok())
}

/// Symbol dimensions of one prolongation stage, `dims[k] = dim g_k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymbolStage {
    pub dims: Vec<usize>,
}

impl SymbolStage {
    pub fn order(&self) -> usize {
        self.dims.len() - 1
    }

    /// Dimensions listed from the top order down to order 0.
    pub fn descending(&self) -> Vec<usize> {
        self.dims.iter().rev().copied().collect()
    }

    pub fn total(&self) -> usize {
        self.dims.iter().sum()
    }

    /// The two highest symbols vanish.
    pub fn is_finite_type(&self) -> bool {
        let m = self.order();
        m >= 1 && self.dims[m] == 0 && self.dims[m - 1] == 0
    }
}

impl fmt::Display for SymbolStage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.descending().iter().map(|d| d.to_string()).collect();
        write!(f, "({})", parts.join(", "))
    }
}

pub type SymbolTable = Vec<SymbolStage>;

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// All jets up to `order`, ordered by order descending, then unknown,
/// then multi-index descending.
fn jet_columns(n_unknowns: usize, n: usize, order: usize) -> Vec<Jet> {
    let mut out = Vec::new();
    for k in (0..=order).rev() {
        let alphas = MultiIndex::all_of_order(n, k);
        for u in 0..n_unknowns {
            out.extend(alphas.iter().map(|&a| Jet::new(u, a)));
        }
    }
    out
}

/// Symbol dimensions of `s` at `p`: after graded elimination with the
/// highest jet order first, `dim g_k` counts the order-`k` jets left free.
pub fn symbol_dimensions(s: &LinearPDESystem, p: &GenericPoint) -> Result<SymbolStage, ProlongError> {
    let n = s.chart().n_coords();
    let m = s.order();
    let cols = jet_columns(s.n_unknowns(), n, m);
    let index: HashMap<Jet, usize> = cols.iter().enumerate().map(|(i, j)| (*j, i)).collect();
    let mut values: HashMap<(usize, MultiIndex), BigRational> = HashMap::new();
    let mut rows = Vec::with_capacity(s.len());
    for e in s.equations() {
        let mut acc: HashMap<usize, BigRational> = HashMap::new();
        for t in s.leibniz_terms(e) {
            let v = match values.get(&(t.coef, t.beta)) {
                Some(v) => v.clone(),
                None => {
                    let v =
                        s.coefficient_derivative(t.coef, t.beta).evaluate_unchecked(p.values()).map_err(
                            |err| match err {
                                ExprError::Pole | ExprError::DivisionByZero => ProlongError::DegeneratePoint,
                                other => other.into(),
                            },
                        )?;
                    values.insert((t.coef, t.beta), v.clone());
                    v
                }
            };
            if v.is_zero() {
                continue;
            }
            let v = v * BigInt::from(t.mult);
            let slot = acc.entry(index[&t.jet]).or_insert_with(BigRational::zero);
            *slot += v;
        }
        let terms: Vec<(usize, BigRational)> = acc.into_iter().filter(|(_, v)| !v.is_zero()).collect();
        if !terms.is_empty() {
            rows.push(elim::integer_row(terms));
        }
    }
    let pivots = elim::pivot_columns(rows, cols.len());
    let mut dims: Vec<usize> = (0..=m).map(|k| s.n_unknowns() * binomial(n + k - 1, k)).collect();
    for c in pivots {
        dims[cols[c].order()] -= 1;
    }
    Ok(SymbolStage { dims })
}

/// Outcome of the prolongation-projection loop.
#[derive(Clone, Debug)]
pub struct BoundReport {
    /// `Some(Σ dim g_k)` once finite type is reached.
    pub bound: Option<usize>,
    pub table: SymbolTable,
    pub points: Vec<GenericPoint>,
    pub warnings: Vec<String>,
}

/// Prolongs until the two top symbols vanish or `max_stage` is exhausted.
pub fn solution_bound(s: &LinearPDESystem, max_stage: usize) -> Result<BoundReport, ProlongError> {
    solution_bound_seeded(s, max_stage, DEFAULT_SEED)
}

pub fn solution_bound_seeded(s: &LinearPDESystem, max_stage: usize, seed: u64) -> Result<BoundReport, ProlongError> {
    if max_stage == 0 {
        return Err(ProlongError::BadStage);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(POINTS);
    for _ in 0..POINTS {
        points.push(GenericPoint::sample(s, &mut rng)?);
    }
    let mut warnings = Vec::new();
    let mut table = Vec::new();
    let mut sys = s.clone();
    for stage in 1..=max_stage {
        if stage > 1 {
            sys = prolong(&sys);
        }
        let st = stage_dimensions(&sys, &mut points, &mut rng, stage, &mut warnings)?;
        log::debug!("stage {}: {}", stage, st);
        let done = st.is_finite_type();
        let total = st.total();
        table.push(st);
        if done {
            return Ok(BoundReport { bound: Some(total), table, points, warnings });
        }
    }
    Ok(BoundReport { bound: None, table, points, warnings })
}

fn stage_dimensions(
    sys: &LinearPDESystem,
    points: &mut [GenericPoint],
    rng: &mut ChaCha8Rng,
    stage: usize,
    warnings: &mut Vec<String>,
) -> Result<SymbolStage, ProlongError> {
    let mut stages = Vec::with_capacity(points.len());
    for _ in 0..SAMPLE_ATTEMPTS {
        let results: Vec<Result<SymbolStage, ProlongError>> = std::thread::scope(|sc| {
            let handles: Vec<_> = points.iter().map(|p| sc.spawn(move || symbol_dimensions(sys, p))).collect();
            handles.into_iter().map(|h| h.join().expect("elimination thread panicked")).collect()
        });
        let mut retry = false;
        stages.clear();
        for (p, r) in points.iter_mut().zip(results) {
            match r {
                Ok(st) => stages.push(st),
                Err(ProlongError::DegeneratePoint) => {
                    warnings.push(format!("stage {}: point {} hit a pole and was resampled", stage, p));
                    *p = GenericPoint::sample(sys, rng)?;
                    retry = true;
                }
                Err(e) => return Err(e),
            }
        }
        if !retry {
            break;
        }
    }
    if stages.len() != points.len() {
        return Err(ProlongError::NoGenericPoint(SAMPLE_ATTEMPTS));
    }
    // smallest total means largest rank
    let best = stages.iter().min_by_key(|st| st.total()).unwrap().clone();
    for (p, st) in points.iter().zip(&stages) {
        if *st != best {
            warnings.push(format!("stage {}: point {} gives {} instead of {}, not generic", stage, p, st, best));
        }
    }
    Ok(best)
}

/// Residuals of a candidate solution substituted into every equation.
#[derive(Clone, Debug)]
pub struct VerifyReport {
    /// `(equation index, residual)` for each equation not satisfied.
    pub residuals: Vec<(usize, Expr)>,
}

impl VerifyReport {
    pub fn ok(&self) -> bool {
        self.residuals.is_empty()
    }
}

fn jet_value(x: &TensorField, jet: Jet, cache: &mut HashMap<Jet, Expr>) -> Expr {
    if let Some(v) = cache.get(&jet) {
        return v.clone();
    }
    let v = match jet.alpha.0.iter().position(|&e| e > 0) {
        None => x.get(&[jet.unknown as usize]).clone(),
        Some(i) => {
            let mut lower = jet.alpha;
            lower.0[i] -= 1;
            jet_value(x, Jet { unknown: jet.unknown, alpha: lower }, cache).diff(i)
        }
    };
    cache.insert(jet, v.clone());
    v
}

/// Substitutes `x` and its derivatives into every equation of `s`.
pub fn verify_solution(s: &LinearPDESystem, x: &TensorField) -> Result<VerifyReport, ProlongError> {
    if x.slots() != [Slot::Up] || !Arc::ptr_eq(x.chart(), s.chart()) {
        return Err(ProlongError::NotAVector);
    }
    let mut cache = HashMap::new();
    let mut residuals = Vec::new();
    for (k, e) in s.equations().iter().enumerate() {
        let mut acc = Expr::zero(s.chart());
        for (jet, c) in &s.form(e).0 {
            acc = acc.add(&c.mul(&jet_value(x, *jet, &mut cache)));
        }
        if !acc.is_zero_checked()? {
            residuals.push((k, acc));
        }
    }
    Ok(VerifyReport { residuals })
}
