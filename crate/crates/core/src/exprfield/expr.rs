//! Elements of the function field of a chart, kept in canonical form.
//!
//! An expression is `num / den` where both are integer polynomials in the
//! chart variables, every root generator occurs in `num` with degree at
//! most one, `den` is free of root generators, `gcd(num, den) = 1` and the
//! leading coefficient of `den` is positive. Two expressions are equal as
//! functions exactly when their parts are equal.

use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use super::chart::{Chart, Generator};
use super::gcd::gcd;
use super::parse::{parse_expr, Ast, BinOp, ParseError};
use super::poly::Poly;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExprError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("pole: denominator vanishes at the point")]
    Pole,
    #[error("point violates the relation of `{0}`")]
    RelationViolated(String),
    #[error("point has {got} values but the chart has {expected} variables")]
    PointArity { expected: usize, got: usize },
    #[error("unknown name `{0}`")]
    UnknownName(String),
    #[error("no value given for `{0}`")]
    Unassigned(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("simplifier reported a nonzero result that vanishes at every check point: {0}")]
    Inconsistent(String),
}

#[derive(Clone)]
pub struct Expr {
    chart: Arc<Chart>,
    num: Poly,
    den: Poly,
}

/// Rewrites `g^2` as its radicand for root generator `j`.
fn reduce_root(nc: usize, gen: &Generator, j: usize, num: &mut Poly, den: &mut Poly) {
    let Some((qn, qd)) = &gen.radicand else { return };
    let v = nc + j;
    let k = (num.degree_in(v) / 2).max(den.degree_in(v) / 2) as usize;
    if k == 0 {
        return;
    }
    let mut qn_pow = vec![Poly::one()];
    let mut qd_pow = vec![Poly::one()];
    for i in 0..k {
        qn_pow.push(qn_pow[i].mul(qn));
        qd_pow.push(qd_pow[i].mul(qd));
    }
    let gv = Poly::var(v);
    let apply = |p: &Poly| -> Poly {
        let mut acc = Poly::zero();
        for (e, c) in p.coefficients_in(v).iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mut t = c.mul(&qn_pow[e / 2]).mul(&qd_pow[k - e / 2]);
            if e % 2 == 1 {
                t = t.mul(&gv);
            }
            acc = acc.add(&t);
        }
        acc
    };
    *num = apply(num);
    *den = apply(den);
}

/// Clears root generator `j` from the denominator by multiplying with the
/// conjugate. Expects degrees at most one in that generator.
fn rationalize(nc: usize, gen: &Generator, j: usize, num: &mut Poly, den: &mut Poly) {
    let Some((qn, qd)) = &gen.radicand else { return };
    let v = nc + j;
    if den.degree_in(v) == 0 {
        return;
    }
    let d = den.coefficients_in(v);
    let (d0, d1) = (&d[0], &d[1]);
    let conj = Poly::from_coefficients_in(v, &[d0.clone(), d1.neg()]);
    let a = num.mul(&conj).coefficients_in(v);
    let zero = Poly::zero();
    let a0 = a.first().unwrap_or(&zero);
    let a1 = a.get(1).unwrap_or(&zero);
    let a2 = a.get(2).unwrap_or(&zero);
    *num = Poly::from_coefficients_in(v, &[a0.mul(qd).add(&a2.mul(qn)), a1.mul(qd)]);
    *den = d0.mul(d0).mul(qd).sub(&d1.mul(d1).mul(qn));
}

/// Brings `num / den` to canonical form using the relations of `gens`.
pub(crate) fn normalize_with(
    nc: usize,
    gens: &[Generator],
    mut num: Poly,
    mut den: Poly,
) -> Result<(Poly, Poly), ExprError> {
    if den.is_zero() {
        return Err(ExprError::DivisionByZero);
    }
    for j in (0..gens.len()).rev() {
        if !gens[j].is_root() {
            continue;
        }
        reduce_root(nc, &gens[j], j, &mut num, &mut den);
        rationalize(nc, &gens[j], j, &mut num, &mut den);
        if den.is_zero() {
            return Err(ExprError::DivisionByZero);
        }
    }
    if num.is_zero() {
        return Ok((Poly::zero(), Poly::one()));
    }
    if den.is_constant() {
        let d = den.constant_value().unwrap();
        let g = num.content().gcd(&d);
        let g = if d.is_negative() { -g } else { g };
        return Ok((num.div_scalar_exact(&g), Poly::constant(d / g)));
    }
    let g = gcd(&num, &den);
    if !g.is_one() {
        num = num.exact_div(&g).expect("gcd divides numerator");
        den = den.exact_div(&g).expect("gcd divides denominator");
    }
    if den.leading_coeff().is_negative() {
        num = num.neg();
        den = den.neg();
    }
    Ok((num, den))
}

impl Expr {
    pub fn from_parts(chart: &Arc<Chart>, num: Poly, den: Poly) -> Result<Expr, ExprError> {
        let (num, den) = normalize_with(chart.n_coords(), chart.generators(), num, den)?;
        Ok(Expr { chart: chart.clone(), num, den })
    }

    pub fn from_poly(chart: &Arc<Chart>, p: Poly) -> Expr {
        Expr::from_parts(chart, p, Poly::one()).expect("unit denominator")
    }

    pub fn zero(chart: &Arc<Chart>) -> Expr {
        Expr { chart: chart.clone(), num: Poly::zero(), den: Poly::one() }
    }

    pub fn one(chart: &Arc<Chart>) -> Expr {
        Expr { chart: chart.clone(), num: Poly::one(), den: Poly::one() }
    }

    pub fn int(chart: &Arc<Chart>, n: i64) -> Expr {
        Expr::rational(chart, &BigRational::from_integer(n.into()))
    }

    pub fn rational(chart: &Arc<Chart>, q: &BigRational) -> Expr {
        Expr {
            chart: chart.clone(),
            num: Poly::constant(q.numer().clone()),
            den: if q.is_zero() { Poly::one() } else { Poly::constant(q.denom().clone()) },
        }
    }

    pub fn coordinate(chart: &Arc<Chart>, i: usize) -> Expr {
        assert!(i < chart.n_coords(), "coordinate index out of range");
        Expr { chart: chart.clone(), num: Poly::var(i), den: Poly::one() }
    }

    pub fn generator(chart: &Arc<Chart>, j: usize) -> Expr {
        assert!(j < chart.n_generators(), "generator index out of range");
        Expr { chart: chart.clone(), num: Poly::var(chart.n_coords() + j), den: Poly::one() }
    }

    /// Parses infix text. `sin(x)` and `cos(x)` resolve to the trig pair of
    /// angle `x` when the chart has one.
    pub fn parse(chart: &Arc<Chart>, text: &str) -> Result<Expr, ExprError> {
        let ast = parse_expr(text)?;
        Expr::from_ast(chart, &ast, text)
    }

    pub fn from_ast(chart: &Arc<Chart>, ast: &Ast, text: &str) -> Result<Expr, ExprError> {
        Ok(match ast {
            Ast::Num(q) => Expr::rational(chart, q),
            Ast::Ident { name, offset } => match chart.var_index(name) {
                Some(v) => Expr { chart: chart.clone(), num: Poly::var(v), den: Poly::one() },
                None => return Err(ParseError::at(text, *offset, format!("unknown name `{}`", name)).into()),
            },
            Ast::Neg(a) => Expr::from_ast(chart, a, text)?.neg(),
            Ast::Bin(op, a, b) => {
                let (a, b) = (Expr::from_ast(chart, a, text)?, Expr::from_ast(chart, b, text)?);
                match op {
                    BinOp::Add => a.add(&b),
                    BinOp::Sub => a.sub(&b),
                    BinOp::Mul => a.mul(&b),
                    BinOp::Div => a.div(&b)?,
                    BinOp::Tensor => return Err(ParseError::at(text, 0, "`⊗` is only allowed in line elements").into()),
                }
            }
            Ast::Pow(a, e) => {
                let e = i32::try_from(*e).map_err(|_| ParseError::at(text, 0, "exponent out of range"))?;
                Expr::from_ast(chart, a, text)?.pow(e)?
            }
            Ast::Call { name, args, offset } => {
                let fail = |m: String| -> ExprError { ParseError::at(text, *offset, m).into() };
                if name != "sin" && name != "cos" {
                    return Err(fail(format!("unknown function `{}`", name)));
                }
                let angle = match args.as_slice() {
                    [Ast::Ident { name, .. }] => chart.coordinate_index(name),
                    _ => None,
                }
                .ok_or_else(|| fail(format!("`{}` takes a single coordinate", name)))?;
                let pair = chart.trig_pairs().iter().find(|t| t.angle == angle).ok_or_else(|| {
                    fail(format!("no generator pair for sin/cos of `{}`", chart.coordinate_names()[angle]))
                })?;
                Expr::generator(chart, if name == "sin" { pair.sin } else { pair.cos })
            }
        })
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn numerator(&self) -> &Poly {
        &self.num
    }

    pub fn denominator(&self) -> &Poly {
        &self.den
    }

    /// Structural zero test on the canonical form.
    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// Zero test cross-checked by evaluation: a nonzero canonical form that
    /// vanishes at every admissible check point is reported as an error.
    pub fn is_zero_checked(&self) -> Result<bool, ExprError> {
        if self.num.is_zero() {
            return Ok(true);
        }
        let mut evaluated = 0;
        for p in self.chart.check_points() {
            match self.evaluate(p) {
                Ok(v) if !v.is_zero() => return Ok(false),
                Ok(_) => evaluated += 1,
                Err(_) => {}
            }
        }
        if evaluated > 0 {
            Err(ExprError::Inconsistent(self.to_string()))
        } else {
            log::debug!("no admissible check point for {}", self);
            Ok(false)
        }
    }

    pub fn is_one(&self) -> bool {
        self.num.is_one() && self.den.is_one()
    }

    pub fn constant_value(&self) -> Option<BigRational> {
        Some(BigRational::new(self.num.constant_value()?, self.den.constant_value()?))
    }

    fn same_chart(&self, o: &Expr) {
        assert!(Arc::ptr_eq(&self.chart, &o.chart), "expressions from different charts");
    }

    fn build(&self, num: Poly, den: Poly) -> Expr {
        Expr::from_parts(&self.chart, num, den).expect("nonzero denominator")
    }

    pub fn neg(&self) -> Expr {
        Expr { chart: self.chart.clone(), num: self.num.neg(), den: self.den.clone() }
    }

    pub fn add(&self, o: &Expr) -> Expr {
        self.same_chart(o);
        if o.is_zero() {
            return self.clone();
        }
        if self.is_zero() {
            return o.clone();
        }
        if self.den == o.den {
            return self.build(self.num.add(&o.num), self.den.clone());
        }
        self.build(self.num.mul(&o.den).add(&o.num.mul(&self.den)), self.den.mul(&o.den))
    }

    pub fn sub(&self, o: &Expr) -> Expr {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Expr) -> Expr {
        self.same_chart(o);
        if self.is_zero() || o.is_zero() {
            return Expr::zero(&self.chart);
        }
        if o.is_one() {
            return self.clone();
        }
        if self.is_one() {
            return o.clone();
        }
        self.build(self.num.mul(&o.num), self.den.mul(&o.den))
    }

    pub fn scale_int(&self, k: i64) -> Expr {
        self.mul(&Expr::int(&self.chart, k))
    }

    pub fn scale(&self, q: &BigRational) -> Expr {
        self.mul(&Expr::rational(&self.chart, q))
    }

    pub fn inv(&self) -> Result<Expr, ExprError> {
        if self.is_zero() {
            return Err(ExprError::DivisionByZero);
        }
        Expr::from_parts(&self.chart, self.den.clone(), self.num.clone())
    }

    pub fn div(&self, o: &Expr) -> Result<Expr, ExprError> {
        self.same_chart(o);
        if o.is_zero() {
            return Err(ExprError::DivisionByZero);
        }
        Expr::from_parts(&self.chart, self.num.mul(&o.den), self.den.mul(&o.num))
    }

    pub fn pow(&self, e: i32) -> Result<Expr, ExprError> {
        let base = if e < 0 { self.inv()? } else { self.clone() };
        let mut k = e.unsigned_abs();
        let mut acc = Expr::one(&self.chart);
        let mut sq = base;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&sq);
            }
            k >>= 1;
            if k > 0 {
                sq = sq.mul(&sq);
            }
        }
        Ok(acc)
    }

    /// Total derivative of a polynomial along coordinate `i`, as a fraction.
    fn total_derivative(&self, p: &Poly, i: usize) -> (Poly, Poly) {
        let nc = self.chart.n_coords();
        let mut num = p.derivative(i);
        let mut den = Poly::one();
        for (j, g) in self.chart.generators().iter().enumerate() {
            let (rn, rd) = &g.rules[i];
            if rn.is_zero() {
                continue;
            }
            let dp = p.derivative(nc + j);
            if dp.is_zero() {
                continue;
            }
            if rd == &den {
                num = num.add(&dp.mul(rn));
            } else if rd.is_one() {
                num = num.add(&dp.mul(rn).mul(&den));
            } else {
                num = num.mul(rd).add(&dp.mul(rn).mul(&den));
                den = den.mul(rd);
            }
        }
        (num, den)
    }

    /// Partial derivative along coordinate `i`.
    pub fn diff(&self, i: usize) -> Expr {
        assert!(i < self.chart.n_coords(), "coordinate index out of range");
        if self.is_zero() {
            return self.clone();
        }
        let (an, ad) = self.total_derivative(&self.num, i);
        if self.den.is_constant() {
            return self.build(an, ad.mul(&self.den));
        }
        let (bn, bd) = self.total_derivative(&self.den, i);
        // (a/ad) D - N (b/bd) over D^2
        let num = an.mul(&bd).mul(&self.den).sub(&self.num.mul(&bn).mul(&ad));
        let den = self.den.mul(&self.den).mul(&ad).mul(&bd);
        self.build(num, den)
    }

    /// Evaluates at a full admissible assignment of chart variables.
    pub fn evaluate(&self, point: &[BigRational]) -> Result<BigRational, ExprError> {
        self.chart.check_point(point)?;
        self.evaluate_unchecked(point)
    }

    /// Evaluates without re-checking the relations of the point.
    pub fn evaluate_unchecked(&self, point: &[BigRational]) -> Result<BigRational, ExprError> {
        let d = self.den.eval(point);
        if d.is_zero() {
            return Err(ExprError::Pole);
        }
        Ok(self.num.eval(point) / d)
    }

    /// Square root inside the field, found either directly or as a root
    /// generator times a square.
    pub fn sqrt(&self) -> Option<Expr> {
        if self.is_zero() {
            return Some(self.clone());
        }
        let direct = |e: &Expr| -> Option<Expr> {
            let (a, b) = (e.num.sqrt_exact()?, e.den.sqrt_exact()?);
            let r = Expr::from_parts(&e.chart, a, b).ok()?;
            (r.mul(&r) == *e).then_some(r)
        };
        if let Some(r) = direct(self) {
            return Some(r);
        }
        let nc = self.chart.n_coords();
        for (j, g) in self.chart.generators().iter().enumerate() {
            let Some((qn, qd)) = &g.radicand else { continue };
            let Ok(q) = Expr::from_parts(&self.chart, qn.clone(), qd.clone()) else { continue };
            let Ok(t) = self.div(&q) else { continue };
            if let Some(s) = direct(&t) {
                let gen = Expr { chart: self.chart.clone(), num: Poly::var(nc + j), den: Poly::one() };
                let r = gen.mul(&s);
                if r.mul(&r) == *self {
                    return Some(r);
                }
            }
        }
        None
    }

    /// Whether the expression depends on chart variable `v` syntactically.
    pub fn mentions(&self, v: usize) -> bool {
        self.num.degree_in(v) > 0 || self.den.degree_in(v) > 0
    }
}

impl PartialEq for Expr {
    fn eq(&self, o: &Expr) -> bool {
        Arc::ptr_eq(&self.chart, &o.chart) && self.num == o.num && self.den == o.den
    }
}

impl Eq for Expr {}

impl Hash for Expr {
    fn hash<H: Hasher>(&self, h: &mut H) {
        self.num.hash(h);
        self.den.hash(h);
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({})", self)
    }
}

fn write_poly(f: &mut fmt::Formatter<'_>, p: &Poly, chart: &Chart) -> fmt::Result {
    if p.is_zero() {
        return write!(f, "0");
    }
    for (k, (m, c)) in p.terms().iter().enumerate() {
        let neg = c.is_negative();
        let a = c.abs();
        match (k, neg) {
            (0, true) => write!(f, "-")?,
            (0, false) => {}
            (_, true) => write!(f, " - ")?,
            (_, false) => write!(f, " + ")?,
        }
        let mut first = true;
        if !a.is_one() || m.is_one() {
            write!(f, "{}", a)?;
            first = false;
        }
        for v in 0..chart.n_vars() {
            let e = m.exp(v);
            if e == 0 {
                continue;
            }
            if !first {
                write!(f, "*")?;
            }
            first = false;
            write!(f, "{}", chart.var_name(v))?;
            if e > 1 {
                write!(f, "^{}", e)?;
            }
        }
    }
    Ok(())
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            return write_poly(f, &self.num, &self.chart);
        }
        let wrap_num = self.num.len() > 1;
        if wrap_num {
            write!(f, "(")?;
        }
        write_poly(f, &self.num, &self.chart)?;
        if wrap_num {
            write!(f, ")")?;
        }
        write!(f, "/")?;
        let wrap_den = self.den.len() > 1 || !self.den.leading().is_none_or(|(m, _)| m.is_one());
        if wrap_den {
            write!(f, "(")?;
        }
        write_poly(f, &self.den, &self.chart)?;
        if wrap_den {
            write!(f, ")")?;
        }
        Ok(())
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident, $inner:ident) => {
        impl ops::$tr<&Expr> for &Expr {
            type Output = Expr;
            fn $method(self, o: &Expr) -> Expr {
                Expr::$inner(self, o)
            }
        }
        impl ops::$tr<Expr> for Expr {
            type Output = Expr;
            fn $method(self, o: Expr) -> Expr {
                Expr::$inner(&self, &o)
            }
        }
        impl ops::$tr<&Expr> for Expr {
            type Output = Expr;
            fn $method(self, o: &Expr) -> Expr {
                Expr::$inner(&self, o)
            }
        }
    };
}

forward_binop!(Add, add, add);
forward_binop!(Sub, sub, sub);
forward_binop!(Mul, mul, mul);

impl ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(self)
    }
}

impl ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(&self)
    }
}

/// Integer helper for tests and callers building constants.
pub fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exprfield::chart::GeneratorDecl;

    fn eh_chart() -> Arc<Chart> {
        Chart::with_trig(&["rho", "theta", "phi", "psi"], &["phi", "psi"]).unwrap()
    }

    #[test]
    fn pythagorean_identity_vanishes() {
        let c = eh_chart();
        let e = Expr::parse(&c, "sin(psi)^2 + cos(psi)^2 - 1").unwrap();
        assert!(e.is_zero());
        assert!(e.is_zero_checked().unwrap());
    }

    #[test]
    fn common_factors_cancel() {
        let c = eh_chart();
        let e = Expr::parse(&c, "(rho^2 - 1)/(rho - 1)").unwrap();
        assert_eq!(e, Expr::parse(&c, "rho + 1").unwrap());
    }

    #[test]
    fn derivative_of_rational_function() {
        let c = eh_chart();
        let e = Expr::parse(&c, "rho/(4(rho^2 - 1))").unwrap();
        let want = Expr::parse(&c, "-(rho^2 + 1)/(4 (rho^2 - 1)^2)").unwrap();
        assert_eq!(e.diff(0), want);
    }

    #[test]
    fn trig_derivatives() {
        let c = eh_chart();
        let s = Expr::parse(&c, "sin(psi)").unwrap();
        assert_eq!(s.diff(3), Expr::parse(&c, "cos(psi)").unwrap());
        assert_eq!(s.diff(3).diff(3), s.neg());
        assert!(s.diff(2).is_zero());
        let t = Expr::parse(&c, "sin(phi)/cos(phi)").unwrap();
        assert_eq!(t.diff(2), Expr::parse(&c, "1/cos(phi)^2").unwrap());
    }

    #[test]
    fn root_generator_leaves_denominator() {
        let c = eh_chart();
        let e = Expr::parse(&c, "1/sin(phi)").unwrap();
        assert!(e.denominator().degree_in(c.var_index("sin_phi").unwrap()) == 0);
        assert!(e.mul(&Expr::parse(&c, "sin(phi)").unwrap()).is_one());
        let f = Expr::parse(&c, "(1 - cos(phi))/sin(phi)").unwrap();
        assert_eq!(f, Expr::parse(&c, "sin(phi)/(1 + cos(phi))").unwrap());
    }

    #[test]
    fn evaluation() {
        let c = eh_chart();
        let e = Expr::parse(&c, "rho/(4(rho^2 - 1))").unwrap();
        let p = c
            .point(&[
                ("rho", q(2, 1)),
                ("theta", q(0, 1)),
                ("phi", q(0, 1)),
                ("psi", q(0, 1)),
                ("cos_phi", q(4, 5)),
                ("sin_phi", q(3, 5)),
                ("cos_psi", q(4, 5)),
                ("sin_psi", q(3, 5)),
            ])
            .unwrap();
        assert_eq!(e.evaluate(&p).unwrap(), q(1, 6));
        let sc = Expr::parse(&c, "sin(psi) cos(psi)").unwrap();
        assert_eq!(sc.evaluate(&p).unwrap(), q(12, 25));
        let pole = Expr::parse(&c, "1/(rho - 1)").unwrap();
        let mut at_one = p.clone();
        at_one[0] = q(1, 1);
        assert_eq!(pole.evaluate(&at_one), Err(ExprError::Pole));
        let mut bad = p.clone();
        bad[5] = q(1, 2);
        assert_eq!(sc.evaluate(&bad), Err(ExprError::RelationViolated("sin_phi".into())));
    }

    #[test]
    fn division_by_zero_is_an_error() {
        let c = eh_chart();
        assert_eq!(Expr::parse(&c, "1/(sin(psi)^2 + cos(psi)^2 - 1)"), Err(ExprError::DivisionByZero));
    }

    #[test]
    fn unknown_names_report_position() {
        let c = eh_chart();
        match Expr::parse(&c, "rho + tau") {
            Err(ExprError::Parse(e)) => assert_eq!(e.column, 7),
            other => panic!("unexpected {:?}", other),
        }
    }

    #[test]
    fn chart_rejects_rotation_without_relation() {
        let err = Chart::new(
            &["t"],
            vec![GeneratorDecl::free("c").derivative("t", "-s"), GeneratorDecl::free("s").derivative("t", "c")],
        )
        .unwrap_err();
        assert!(err.to_string().contains("s^2 = 1 - c^2"), "{}", err);
    }

    #[test]
    fn chart_rejects_inconsistent_rule() {
        let err = Chart::new(
            &["t"],
            vec![
                GeneratorDecl::free("c").derivative("t", "-s"),
                GeneratorDecl::root("s", "s^2 = 1 - c^2").derivative("t", "2c"),
            ],
        )
        .unwrap_err();
        assert!(matches!(err, ChartError::RelationNotPreserved { .. }), "{}", err);
    }

    #[test]
    fn square_root_generator() {
        let c = Chart::new(&["x"], vec![GeneratorDecl::root("w", "w^2 = x").derivative("x", "1/(2 w)")]).unwrap();
        let w = Expr::generator(&c, 0);
        assert_eq!(w.mul(&w), Expr::coordinate(&c, 0));
        assert_eq!(w.diff(0).diff(0), Expr::parse(&c, "-w/(4 x^2)").unwrap());
    }

    use crate::exprfield::chart::ChartError;

    #[test]
    fn square_roots() {
        let c = eh_chart();
        let e = Expr::parse(&c, "rho^2 sin(phi)^4 sin(psi)^2/4").unwrap();
        let r = e.sqrt().unwrap();
        assert_eq!(r.mul(&r), e);
        let s = Expr::parse(&c, "(1 - cos(phi)^2) rho^2").unwrap().sqrt().unwrap();
        assert_eq!(s.mul(&s), Expr::parse(&c, "(1 - cos(phi)^2) rho^2").unwrap());
        assert!(Expr::parse(&c, "rho").unwrap().sqrt().is_none());
        assert!(Expr::parse(&c, "-4").unwrap().sqrt().is_none());
    }
}
