//! Coordinate charts: coordinates plus auxiliary generators such as
//! `cos(phi)` and `sin(phi)`, with their algebraic relations and
//! derivative rules.

use std::sync::{Arc, OnceLock};

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::expr::{normalize_with, Expr, ExprError};
use super::gcd::gcd;
use super::parse::{parse_expr, parse_relation, Ast, BinOp, ParseError};
use super::poly::{Poly, MAX_VARS};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChartError {
    #[error("invalid name `{0}`")]
    InvalidName(String),
    #[error("duplicate name `{0}`")]
    DuplicateName(String),
    #[error("too many variables: {0} (at most {MAX_VARS})")]
    TooManyVariables(usize),
    #[error("relation of `{generator}`: {message}")]
    BadRelation { generator: String, message: String },
    #[error("derivative of `{generator}` along `{coordinate}`: {message}")]
    BadRule { generator: String, coordinate: String, message: String },
    #[error("relation of `{generator}` is not preserved by d/d{coordinate}")]
    RelationNotPreserved { generator: String, coordinate: String },
    #[error("derivative rules of `{generator}` do not commute in `{first}` and `{second}`")]
    NonCommutingRules { generator: String, first: String, second: String },
    #[error(
        "generators `{first}` and `{second}` rotate into each other under d/d{coordinate} \
         but no relation ties them; declare `{second}^2 = 1 - {first}^2`"
    )]
    MissingRelation { first: String, second: String, coordinate: String },
    #[error("`{context}`: {source}")]
    Parse { context: String, source: ParseError },
}

/// Declaration of one generator, written in infix syntax.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorDecl {
    pub name: String,
    /// `g^2 = q` (or an expression equal to zero), `None` for a free generator.
    pub relation: Option<String>,
    /// `(coordinate, derivative)` pairs; omitted coordinates differentiate to zero.
    pub derivatives: Vec<(String, String)>,
}

impl GeneratorDecl {
    pub fn free(name: &str) -> Self {
        GeneratorDecl { name: name.into(), relation: None, derivatives: Vec::new() }
    }

    pub fn root(name: &str, relation: &str) -> Self {
        GeneratorDecl { name: name.into(), relation: Some(relation.into()), derivatives: Vec::new() }
    }

    pub fn derivative(mut self, coordinate: &str, expr: &str) -> Self {
        self.derivatives.push((coordinate.into(), expr.into()));
        self
    }
}

#[derive(Debug, Clone)]
pub struct Generator {
    pub name: String,
    /// Radicand `q` with `g^2 = q`, stored as a normalized fraction.
    pub(crate) radicand: Option<(Poly, Poly)>,
    /// Normalized derivative along each coordinate.
    pub(crate) rules: Vec<(Poly, Poly)>,
}

impl Generator {
    pub fn is_root(&self) -> bool {
        self.radicand.is_some()
    }
}

/// A sine/cosine pair of one angle coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrigPair {
    pub sin: usize,
    pub cos: usize,
    pub angle: usize,
}

#[derive(Debug)]
pub struct Chart {
    coords: Vec<String>,
    gens: Vec<Generator>,
    trig: Vec<TrigPair>,
    /// Root generators whose radicand is `1 - f^2` for a free generator `f`.
    pythagorean: Vec<(usize, usize)>,
    check_points: OnceLock<Vec<Vec<BigRational>>>,
}

fn valid_name(s: &str) -> bool {
    let mut ch = s.chars();
    matches!(ch.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && ch.all(|c| c.is_ascii_alphanumeric() || c == '_')
        && s != "sin"
        && s != "cos"
}

impl Chart {
    /// A chart with coordinates only.
    pub fn coordinates(coords: &[&str]) -> Result<Arc<Chart>, ChartError> {
        Chart::new(coords, Vec::new())
    }

    /// A chart with a `cos_x`, `sin_x` pair for each listed angle.
    pub fn with_trig(coords: &[&str], angles: &[&str]) -> Result<Arc<Chart>, ChartError> {
        let mut gens = Vec::new();
        for a in angles {
            let (c, s) = (format!("cos_{}", a), format!("sin_{}", a));
            gens.push(GeneratorDecl::free(&c).derivative(a, &format!("-{}", s)));
            gens.push(GeneratorDecl::root(&s, &format!("{}^2 = 1 - {}^2", s, c)).derivative(a, &c));
        }
        Chart::new(coords, gens)
    }

    pub fn new(coords: &[&str], decls: Vec<GeneratorDecl>) -> Result<Arc<Chart>, ChartError> {
        let nc = coords.len();
        let total = nc + decls.len();
        if total > MAX_VARS {
            return Err(ChartError::TooManyVariables(total));
        }
        let mut names: Vec<String> = Vec::new();
        for n in coords.iter().copied().chain(decls.iter().map(|d| d.name.as_str())) {
            if !valid_name(n) {
                return Err(ChartError::InvalidName(n.into()));
            }
            if names.iter().any(|m| m == n) {
                return Err(ChartError::DuplicateName(n.into()));
            }
            names.push(n.into());
        }
        for n in &names {
            if let Some(rest) = n.strip_prefix('d') {
                if coords.contains(&rest) {
                    return Err(ChartError::InvalidName(format!(
                        "{} (clashes with the differential of `{}`)",
                        n, rest
                    )));
                }
            }
        }

        let mut gens: Vec<Generator> = Vec::with_capacity(decls.len());
        for (j, d) in decls.iter().enumerate() {
            let v = nc + j;
            let radicand = match &d.relation {
                None => None,
                Some(text) => {
                    let bad = |message: String| ChartError::BadRelation { generator: d.name.clone(), message };
                    let ast =
                        parse_relation(text).map_err(|source| ChartError::Parse { context: text.clone(), source })?;
                    let (num, _) = raw_fraction(&ast, &names[..=v], text)
                        .map_err(|source| ChartError::Parse { context: text.clone(), source })?;
                    let c = num.coefficients_in(v);
                    if c.len() != 3 || !c[1].is_zero() {
                        return Err(bad(format!("expected the form `{}^2 = q`", d.name)));
                    }
                    let (qn, qd) = (c[0].neg(), c[2].clone());
                    if qn.is_zero() {
                        return Err(bad("radicand is zero".into()));
                    }
                    let (qn, qd) = normalize_with(nc, &gens, qn, qd).map_err(|e| bad(e.to_string()))?;
                    if let (Some(a), Some(b)) = (qn.constant_value(), qd.constant_value()) {
                        if is_square(&BigRational::new(a, b)) {
                            return Err(bad("radicand is a rational square".into()));
                        }
                    }
                    Some((qn, qd))
                }
            };
            gens.push(Generator { name: d.name.clone(), radicand, rules: Vec::new() });
        }

        for (j, d) in decls.iter().enumerate() {
            let mut rules = vec![(Poly::zero(), Poly::one()); nc];
            for (coord, text) in &d.derivatives {
                let bad = |message: String| ChartError::BadRule {
                    generator: d.name.clone(),
                    coordinate: coord.clone(),
                    message,
                };
                let i = coords.iter().position(|c| c == coord).ok_or_else(|| bad("not a coordinate".into()))?;
                let ast = parse_expr(text).map_err(|source| ChartError::Parse { context: text.clone(), source })?;
                let (n, dn) = raw_fraction(&ast, &names, text)
                    .map_err(|source| ChartError::Parse { context: text.clone(), source })?;
                rules[i] = normalize_with(nc, &gens, n, dn).map_err(|e| bad(e.to_string()))?;
            }
            gens[j].rules = rules;
        }

        let mut chart = Chart {
            coords: coords.iter().map(|s| s.to_string()).collect(),
            gens,
            trig: Vec::new(),
            pythagorean: Vec::new(),
            check_points: OnceLock::new(),
        };
        chart.find_pythagorean();
        let chart = Arc::new(chart);
        chart.validate()?;
        let trig = chart.find_trig();
        let mut chart = Arc::try_unwrap(chart).expect("chart not yet shared");
        chart.trig = trig;
        Ok(Arc::new(chart))
    }

    fn find_pythagorean(&mut self) {
        let nc = self.coords.len();
        for (r, g) in self.gens.iter().enumerate() {
            let Some((qn, qd)) = &g.radicand else { continue };
            if !qd.is_one() {
                continue;
            }
            for (f, h) in self.gens.iter().enumerate() {
                if h.is_root() || f == r {
                    continue;
                }
                let fv = Poly::var(nc + f);
                if *qn == Poly::one().sub(&fv.mul(&fv)) {
                    self.pythagorean.push((r, f));
                }
            }
        }
    }

    fn validate(self: &Arc<Self>) -> Result<(), ChartError> {
        let nc = self.coords.len();
        let internal = |e: ExprError| ChartError::BadRelation { generator: String::new(), message: e.to_string() };
        for (j, g) in self.gens.iter().enumerate() {
            let gen = Expr::generator(self, j);
            if let Some((qn, qd)) = &g.radicand {
                let q = Expr::from_parts(self, qn.clone(), qd.clone()).map_err(internal)?;
                for i in 0..nc {
                    let lhs = gen.mul(&gen.diff(i)).scale_int(2);
                    if !lhs.sub(&q.diff(i)).is_zero() {
                        return Err(ChartError::RelationNotPreserved {
                            generator: g.name.clone(),
                            coordinate: self.coords[i].clone(),
                        });
                    }
                }
            }
            for a in 0..nc {
                for b in a + 1..nc {
                    if gen.diff(a).diff(b) != gen.diff(b).diff(a) {
                        return Err(ChartError::NonCommutingRules {
                            generator: g.name.clone(),
                            first: self.coords[a].clone(),
                            second: self.coords[b].clone(),
                        });
                    }
                }
            }
        }
        for a in 0..self.gens.len() {
            for b in 0..self.gens.len() {
                if a == b || self.gens[a].is_root() || self.gens[b].is_root() {
                    continue;
                }
                let (ea, eb) = (Expr::generator(self, a), Expr::generator(self, b));
                for i in 0..nc {
                    if ea.diff(i) == eb && eb.diff(i) == ea.neg() {
                        let (first, second) = if a < b { (a, b) } else { (b, a) };
                        return Err(ChartError::MissingRelation {
                            first: self.gens[first].name.clone(),
                            second: self.gens[second].name.clone(),
                            coordinate: self.coords[i].clone(),
                        });
                    }
                }
            }
        }
        Ok(())
    }

    fn find_trig(self: &Arc<Self>) -> Vec<TrigPair> {
        let mut out = Vec::new();
        for &(r, f) in &self.pythagorean {
            let (er, ef) = (Expr::generator(self, r), Expr::generator(self, f));
            for angle in 0..self.coords.len() {
                let (dr, df) = (er.diff(angle), ef.diff(angle));
                let others_zero = (0..self.coords.len())
                    .filter(|&i| i != angle)
                    .all(|i| er.diff(i).is_zero() && ef.diff(i).is_zero());
                if !others_zero {
                    continue;
                }
                if dr == ef && df == er.neg() {
                    out.push(TrigPair { sin: r, cos: f, angle });
                } else if dr == ef.neg() && df == er {
                    out.push(TrigPair { sin: f, cos: r, angle });
                }
            }
        }
        out
    }

    pub fn n_coords(&self) -> usize {
        self.coords.len()
    }

    pub fn n_generators(&self) -> usize {
        self.gens.len()
    }

    pub fn n_vars(&self) -> usize {
        self.coords.len() + self.gens.len()
    }

    pub fn coordinate_names(&self) -> &[String] {
        &self.coords
    }

    pub fn generators(&self) -> &[Generator] {
        &self.gens
    }

    pub fn trig_pairs(&self) -> &[TrigPair] {
        &self.trig
    }

    pub fn coordinate_index(&self, name: &str) -> Option<usize> {
        self.coords.iter().position(|c| c == name)
    }

    pub fn generator_index(&self, name: &str) -> Option<usize> {
        self.gens.iter().position(|g| g.name == name)
    }

    pub fn var_name(&self, v: usize) -> &str {
        if v < self.coords.len() {
            &self.coords[v]
        } else {
            &self.gens[v - self.coords.len()].name
        }
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.coordinate_index(name).or_else(|| self.generator_index(name).map(|j| j + self.coords.len()))
    }

    /// Checks that a full assignment satisfies every relation.
    pub fn check_point(&self, point: &[BigRational]) -> Result<(), ExprError> {
        if point.len() != self.n_vars() {
            return Err(ExprError::PointArity { expected: self.n_vars(), got: point.len() });
        }
        let nc = self.coords.len();
        for (j, g) in self.gens.iter().enumerate() {
            if let Some((qn, qd)) = &g.radicand {
                let d = qd.eval(point);
                if d.is_zero() {
                    return Err(ExprError::Pole);
                }
                let v = &point[nc + j];
                if v * v != qn.eval(point) / d {
                    return Err(ExprError::RelationViolated(g.name.clone()));
                }
            }
        }
        Ok(())
    }

    /// Builds a point from named values; every variable must be assigned.
    pub fn point(&self, values: &[(&str, BigRational)]) -> Result<Vec<BigRational>, ExprError> {
        let mut out: Vec<Option<BigRational>> = vec![None; self.n_vars()];
        for (name, q) in values {
            let v = self.var_index(name).ok_or_else(|| ExprError::UnknownName(name.to_string()))?;
            out[v] = Some(q.clone());
        }
        let out: Vec<BigRational> = out
            .into_iter()
            .enumerate()
            .map(|(v, q)| q.ok_or_else(|| ExprError::Unassigned(self.var_name(v).to_string())))
            .collect::<Result<_, _>>()?;
        self.check_point(&out)?;
        Ok(out)
    }

    /// Draws a random admissible rational point, or `None` if no candidate
    /// satisfied the relations within the attempt budget.
    pub fn sample_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<Vec<BigRational>> {
        self.sample_point_with_height(rng, 40)
    }

    /// Like [`Chart::sample_point`] with coordinate numerators bounded by
    /// `height`; denominators and circle parameters scale with it.
    pub fn sample_point_with_height<R: Rng + ?Sized>(&self, rng: &mut R, height: i64) -> Option<Vec<BigRational>> {
        let height = height.max(4);
        'attempt: for _ in 0..200 {
            let nc = self.coords.len();
            let mut p: Vec<Option<BigRational>> = vec![None; self.n_vars()];
            for slot in p.iter_mut().take(nc) {
                *slot = Some(random_rational(rng, height));
            }
            for &(r, f) in &self.pythagorean {
                if p[nc + r].is_some() || p[nc + f].is_some() {
                    continue;
                }
                let (s, c) = pythagorean_pair(rng, (height * 3 / 10).max(3));
                p[nc + r] = Some(s);
                p[nc + f] = Some(c);
            }
            for (j, g) in self.gens.iter().enumerate() {
                if p[nc + j].is_some() {
                    continue;
                }
                match &g.radicand {
                    None => p[nc + j] = Some(random_rational(rng, height)),
                    Some((qn, qd)) => {
                        let partial: Vec<BigRational> =
                            p.iter().map(|x| x.clone().unwrap_or_else(BigRational::zero)).collect();
                        let d = qd.eval(&partial);
                        if d.is_zero() {
                            continue 'attempt;
                        }
                        match rational_sqrt(&(qn.eval(&partial) / d)) {
                            Some(s) => p[nc + j] = Some(s),
                            None => continue 'attempt,
                        }
                    }
                }
            }
            let point: Vec<BigRational> = p.into_iter().map(Option::unwrap).collect();
            if self.check_point(&point).is_ok() {
                return Some(point);
            }
        }
        None
    }

    /// Fixed admissible points used to cross-check zero tests.
    pub(crate) fn check_points(&self) -> &[Vec<BigRational>] {
        self.check_points.get_or_init(|| {
            let mut rng = ChaCha8Rng::seed_from_u64(0x6765_6f73);
            (0..3).filter_map(|_| self.sample_point(&mut rng)).collect()
        })
    }
}

fn random_rational<R: Rng + ?Sized>(rng: &mut R, height: i64) -> BigRational {
    let n: i64 = rng.gen_range(1..=height);
    let d: i64 = rng.gen_range(1..=(height + 4) / 4);
    let n = if rng.gen_bool(0.5) { -n } else { n };
    BigRational::new(n.into(), d.into())
}

/// `(2t/(1+t^2), (1-t^2)/(1+t^2))` for a random rational `t` avoiding
/// the points where either entry vanishes.
fn pythagorean_pair<R: Rng + ?Sized>(rng: &mut R, bound: i64) -> (BigRational, BigRational) {
    loop {
        let n: i64 = rng.gen_range(1..=bound);
        let d: i64 = rng.gen_range(1..=bound);
        if n == d {
            continue;
        }
        let t = BigRational::new(n.into(), d.into());
        let t = if rng.gen_bool(0.5) { -t } else { t };
        let one = BigRational::one();
        let den = &one + &t * &t;
        let s = (&t + &t) / &den;
        let c = (&one - &t * &t) / &den;
        return (s, c);
    }
}

pub(crate) fn rational_sqrt(q: &BigRational) -> Option<BigRational> {
    if q.is_negative() {
        return None;
    }
    let n = q.numer().sqrt();
    let d = q.denom().sqrt();
    if &(&n * &n) == q.numer() && &(&d * &d) == q.denom() {
        Some(BigRational::new(n, d))
    } else {
        None
    }
}

fn is_square(q: &BigRational) -> bool {
    rational_sqrt(q).is_some()
}

/// Evaluates an AST to an unreduced fraction of polynomials over the
/// named variables. Used while the chart itself is being assembled.
fn raw_fraction(ast: &Ast, names: &[String], text: &str) -> Result<(Poly, Poly), ParseError> {
    let frac = |n: Poly, d: Poly| -> (Poly, Poly) {
        let g = gcd(&n, &d);
        let (mut n, mut d) = (n.exact_div(&g).unwrap(), d.exact_div(&g).unwrap());
        if d.leading_coeff().is_negative() {
            n = n.neg();
            d = d.neg();
        }
        (n, d)
    };
    Ok(match ast {
        Ast::Num(q) => (Poly::constant(q.numer().clone()), Poly::constant(q.denom().clone())),
        Ast::Ident { name, offset } => {
            let v = names
                .iter()
                .position(|n| n == name)
                .ok_or_else(|| ParseError::at(text, *offset, format!("unknown or later-declared name `{}`", name)))?;
            (Poly::var(v), Poly::one())
        }
        Ast::Neg(a) => {
            let (n, d) = raw_fraction(a, names, text)?;
            (n.neg(), d)
        }
        Ast::Bin(op, a, b) => {
            let (an, ad) = raw_fraction(a, names, text)?;
            let (bn, bd) = raw_fraction(b, names, text)?;
            match op {
                BinOp::Add => frac(an.mul(&bd).add(&bn.mul(&ad)), ad.mul(&bd)),
                BinOp::Sub => frac(an.mul(&bd).sub(&bn.mul(&ad)), ad.mul(&bd)),
                BinOp::Mul => frac(an.mul(&bn), ad.mul(&bd)),
                BinOp::Div => {
                    if bn.is_zero() {
                        return Err(ParseError::at(text, 0, "division by zero"));
                    }
                    frac(an.mul(&bd), ad.mul(&bn))
                }
                BinOp::Tensor => return Err(ParseError::at(text, 0, "`⊗` is only allowed in line elements")),
            }
        }
        Ast::Pow(a, e) => {
            let (n, d) = raw_fraction(a, names, text)?;
            let k = e.unsigned_abs() as u32;
            if *e < 0 {
                if n.is_zero() {
                    return Err(ParseError::at(text, 0, "division by zero"));
                }
                frac(d.pow(k), n.pow(k))
            } else {
                (n.pow(k), d.pow(k))
            }
        }
        Ast::Call { name, offset, .. } => {
            return Err(ParseError::at(
                text,
                *offset,
                format!("function `{}` cannot be used in a generator declaration", name),
            ))
        }
    })
}
