//! Sparse multivariate polynomials with integer coefficients.
//!
//! Terms are kept sorted in descending lexicographic order of their
//! exponent vectors, with variable 0 most significant. Every coefficient
//! stored is nonzero.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Upper bound on the number of variables a polynomial ring may carry.
pub const MAX_VARS: usize = 16;

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Monomial(pub [u16; MAX_VARS]);

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let last = self.0.iter().rposition(|&e| e != 0).map_or(0, |i| i + 1);
        write!(f, "{:?}", &self.0[..last])
    }
}

impl Monomial {
    pub const ONE: Monomial = Monomial([0; MAX_VARS]);

    pub fn var(i: usize, e: u16) -> Self {
        let mut m = Self::ONE;
        m.0[i] = e;
        m
    }

    #[inline]
    pub fn exp(&self, i: usize) -> u16 {
        self.0[i]
    }

    #[inline]
    pub fn with_exp(mut self, i: usize, e: u16) -> Self {
        self.0[i] = e;
        self
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&e| e as u32).sum()
    }

    #[inline]
    pub fn mul(&self, o: &Monomial) -> Monomial {
        let mut r = [0u16; MAX_VARS];
        for i in 0..MAX_VARS {
            r[i] = self.0[i].checked_add(o.0[i]).expect("monomial exponent overflow");
        }
        Monomial(r)
    }

    #[inline]
    pub fn div(&self, o: &Monomial) -> Option<Monomial> {
        let mut r = [0u16; MAX_VARS];
        for i in 0..MAX_VARS {
            r[i] = self.0[i].checked_sub(o.0[i])?;
        }
        Some(Monomial(r))
    }

    pub fn divides(&self, o: &Monomial) -> bool {
        (0..MAX_VARS).all(|i| self.0[i] <= o.0[i])
    }

    pub fn gcd(&self, o: &Monomial) -> Monomial {
        let mut r = [0u16; MAX_VARS];
        for i in 0..MAX_VARS {
            r[i] = self.0[i].min(o.0[i]);
        }
        Monomial(r)
    }

    /// Bitmask of variables with nonzero exponent.
    pub fn support(&self) -> u32 {
        let mut s = 0u32;
        for i in 0..MAX_VARS {
            if self.0[i] != 0 {
                s |= 1 << i;
            }
        }
        s
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    terms: Vec<(Monomial, BigInt)>,
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{}*{:?}", c, m)?;
        }
        Ok(())
    }
}

impl Poly {
    pub fn zero() -> Self {
        Poly { terms: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(BigInt::one())
    }

    pub fn constant(c: BigInt) -> Self {
        if c.is_zero() {
            Self::zero()
        } else {
            Poly { terms: vec![(Monomial::ONE, c)] }
        }
    }

    pub fn from_i64(c: i64) -> Self {
        Self::constant(BigInt::from(c))
    }

    pub fn var(i: usize) -> Self {
        assert!(i < MAX_VARS, "variable index out of range");
        Poly { terms: vec![(Monomial::var(i, 1), BigInt::one())] }
    }

    pub fn monomial(m: Monomial, c: BigInt) -> Self {
        if c.is_zero() {
            Self::zero()
        } else {
            Poly { terms: vec![(m, c)] }
        }
    }

    /// Builds a polynomial from arbitrary terms, merging duplicates.
    pub fn from_terms(mut terms: Vec<(Monomial, BigInt)>) -> Self {
        terms.sort_unstable_by(|a, b| b.0.cmp(&a.0));
        let mut out: Vec<(Monomial, BigInt)> = Vec::with_capacity(terms.len());
        for (m, c) in terms {
            if let Some((lm, lc)) = out.last_mut() {
                if *lm == m {
                    *lc += c;
                    continue;
                }
            }
            out.push((m, c));
        }
        out.retain(|(_, c)| !c.is_zero());
        Poly { terms: out }
    }

    pub fn terms(&self) -> &[(Monomial, BigInt)] {
        &self.terms
    }

    pub fn into_terms(self) -> Vec<(Monomial, BigInt)> {
        self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms[0].0.is_one() && self.terms[0].1.is_one()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty() || (self.terms.len() == 1 && self.terms[0].0.is_one())
    }

    pub fn constant_value(&self) -> Option<BigInt> {
        match self.terms.as_slice() {
            [] => Some(BigInt::zero()),
            [(m, c)] if m.is_one() => Some(c.clone()),
            _ => None,
        }
    }

    pub fn leading(&self) -> Option<&(Monomial, BigInt)> {
        self.terms.first()
    }

    pub fn leading_coeff(&self) -> BigInt {
        self.terms.first().map(|t| t.1.clone()).unwrap_or_else(BigInt::zero)
    }

    pub fn leading_monomial(&self) -> Option<Monomial> {
        self.terms.first().map(|t| t.0)
    }

    /// Bitmask of variables occurring in the polynomial.
    pub fn support(&self) -> u32 {
        self.terms.iter().fold(0, |s, (m, _)| s | m.support())
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.iter().map(|(m, _)| m.degree()).max().unwrap_or(0)
    }

    pub fn degree_in(&self, v: usize) -> u16 {
        self.terms.iter().map(|(m, _)| m.exp(v)).max().unwrap_or(0)
    }

    /// Componentwise minimum exponent over all terms.
    pub fn monomial_content(&self) -> Monomial {
        let mut it = self.terms.iter();
        match it.next() {
            None => Monomial::ONE,
            Some((m0, _)) => it.fold(*m0, |acc, (m, _)| acc.gcd(m)),
        }
    }

    pub fn neg(&self) -> Poly {
        Poly { terms: self.terms.iter().map(|(m, c)| (*m, -c)).collect() }
    }

    pub fn add(&self, o: &Poly) -> Poly {
        merge(&self.terms, &o.terms, false)
    }

    pub fn sub(&self, o: &Poly) -> Poly {
        merge(&self.terms, &o.terms, true)
    }

    pub fn scale(&self, c: &BigInt) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly { terms: self.terms.iter().map(|(m, k)| (*m, k * c)).collect() }
    }

    pub fn mul_monomial(&self, mono: &Monomial, c: &BigInt) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly { terms: self.terms.iter().map(|(m, k)| (m.mul(mono), k * c)).collect() }
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        if self.is_zero() || o.is_zero() {
            return Poly::zero();
        }
        if o.terms.len() == 1 {
            return self.mul_monomial(&o.terms[0].0, &o.terms[0].1);
        }
        if self.terms.len() == 1 {
            return o.mul_monomial(&self.terms[0].0, &self.terms[0].1);
        }
        let mut prod = Vec::with_capacity(self.terms.len() * o.terms.len());
        for (m1, c1) in &self.terms {
            for (m2, c2) in &o.terms {
                prod.push((m1.mul(m2), c1 * c2));
            }
        }
        Poly::from_terms(prod)
    }

    pub fn pow(&self, mut e: u32) -> Poly {
        let mut base = self.clone();
        let mut acc = Poly::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Divides every coefficient by `c`; the caller guarantees exactness.
    pub fn div_scalar_exact(&self, c: &BigInt) -> Poly {
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(m, k)| {
                    debug_assert!((k % c).is_zero());
                    (*m, k / c)
                })
                .collect(),
        }
    }

    pub fn div_monomial_exact(&self, mono: &Monomial) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(m, k)| (m.div(mono).expect("monomial not divisible"), k.clone())).collect(),
        }
    }

    /// Integer content with the sign of the leading coefficient.
    pub fn content(&self) -> BigInt {
        let mut g = BigInt::zero();
        for (_, c) in &self.terms {
            g = g.gcd(c);
            if g.is_one() {
                break;
            }
        }
        if self.leading_coeff().is_negative() {
            -g
        } else {
            g
        }
    }

    pub fn primitive_part(&self) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        let c = self.content();
        if c.is_one() {
            self.clone()
        } else {
            self.div_scalar_exact(&c)
        }
    }

    /// Exact division in Z[x]; `None` when `d` does not divide `self`.
    pub fn exact_div(&self, d: &Poly) -> Option<Poly> {
        if d.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(Poly::zero());
        }
        if d.terms.len() == 1 {
            let (dm, dc) = &d.terms[0];
            let mut out = Vec::with_capacity(self.terms.len());
            for (m, c) in &self.terms {
                let q = m.div(dm)?;
                let (qc, r) = c.div_rem(dc);
                if !r.is_zero() {
                    return None;
                }
                out.push((q, qc));
            }
            return Some(Poly { terms: out });
        }
        let (dlm, dlc) = d.terms[0].clone();
        // cheap necessary conditions
        if !dlm.divides(&self.terms[0].0) {
            return None;
        }
        let mut rem: BTreeMap<Monomial, BigInt> = self.terms.iter().cloned().collect();
        let mut quot: Vec<(Monomial, BigInt)> = Vec::new();
        while let Some((m, c)) = rem.pop_last() {
            let qm = m.div(&dlm)?;
            let (qc, r) = c.div_rem(&dlc);
            if !r.is_zero() {
                return None;
            }
            for (tm, tc) in &d.terms[1..] {
                let key = tm.mul(&qm);
                let delta = tc * &qc;
                match rem.entry(key) {
                    std::collections::btree_map::Entry::Occupied(mut e) => {
                        *e.get_mut() -= delta;
                        if e.get().is_zero() {
                            e.remove();
                        }
                    }
                    std::collections::btree_map::Entry::Vacant(e) => {
                        e.insert(-delta);
                    }
                }
            }
            quot.push((qm, qc));
        }
        Some(Poly { terms: quot })
    }

    pub fn derivative(&self, v: usize) -> Poly {
        let mut out = Vec::with_capacity(self.terms.len());
        for (m, c) in &self.terms {
            let e = m.exp(v);
            if e > 0 {
                out.push((m.with_exp(v, e - 1), c * BigInt::from(e)));
            }
        }
        // lowering one exponent preserves relative lex order
        Poly { terms: out }
    }

    /// Coefficients with respect to variable `v`: `self = Σ_k out[k] * x_v^k`.
    pub fn coefficients_in(&self, v: usize) -> Vec<Poly> {
        let deg = self.degree_in(v) as usize;
        let mut buckets: Vec<Vec<(Monomial, BigInt)>> = vec![Vec::new(); deg + 1];
        for (m, c) in &self.terms {
            buckets[m.exp(v) as usize].push((m.with_exp(v, 0), c.clone()));
        }
        // removing one variable keeps the remaining order consistent
        buckets.into_iter().map(|t| Poly { terms: t }).collect()
    }

    /// Inverse of [`coefficients_in`].
    pub fn from_coefficients_in(v: usize, coeffs: &[Poly]) -> Poly {
        let mut all = Vec::new();
        for (k, p) in coeffs.iter().enumerate() {
            for (m, c) in &p.terms {
                debug_assert_eq!(m.exp(v), 0);
                all.push((m.with_exp(v, k as u16), c.clone()));
            }
        }
        Poly::from_terms(all)
    }

    /// Replaces `x_v` by `value` everywhere.
    pub fn substitute(&self, v: usize, value: &Poly) -> Poly {
        let coeffs = self.coefficients_in(v);
        let mut acc = Poly::zero();
        for c in coeffs.iter().rev() {
            acc = acc.mul(value).add(c);
        }
        acc
    }

    /// Evaluates at a rational point (one value per variable index used).
    pub fn eval(&self, point: &[BigRational]) -> BigRational {
        let mut powers: Vec<Vec<BigRational>> = vec![Vec::new(); MAX_VARS];
        let mut acc = BigRational::zero();
        for (m, c) in &self.terms {
            let mut t = BigRational::from_integer(c.clone());
            for v in 0..MAX_VARS {
                let e = m.exp(v) as usize;
                if e == 0 {
                    continue;
                }
                let pw = &mut powers[v];
                if pw.is_empty() {
                    pw.push(BigRational::one());
                }
                while pw.len() <= e {
                    let next = pw.last().unwrap() * &point[v];
                    pw.push(next);
                }
                t *= &pw[e];
            }
            acc += t;
        }
        acc
    }

    /// Evaluates every coefficient modulo a prime, dropping zeros.
    pub fn reduce_mod(&self, p: u64) -> Vec<(Monomial, u64)> {
        let pb = BigInt::from(p);
        self.terms
            .iter()
            .filter_map(|(m, c)| {
                let r = c.mod_floor(&pb);
                let r: u64 = r.try_into().expect("residue fits u64");
                if r == 0 {
                    None
                } else {
                    Some((*m, r))
                }
            })
            .collect()
    }

    pub fn max_coeff_bits(&self) -> u64 {
        self.terms.iter().map(|(_, c)| c.bits()).max().unwrap_or(0)
    }

    /// Exact square root with positive leading coefficient, if one exists.
    pub fn sqrt_exact(&self) -> Option<Poly> {
        let Some((lm, lc)) = self.leading() else { return Some(Poly::zero()) };
        if lc.is_negative() || (0..MAX_VARS).any(|v| lm.exp(v) % 2 == 1) {
            return None;
        }
        let c = lc.sqrt();
        if &(&c * &c) != lc {
            return None;
        }
        let mut head = Monomial::ONE;
        for v in 0..MAX_VARS {
            head = head.with_exp(v, lm.exp(v) / 2);
        }
        let two_lead = BigInt::from(2) * &c;
        let mut root = Poly::monomial(head, c);
        for _ in 0..2 * self.len() + 2 {
            let rem = self.sub(&root.mul(&root));
            let Some((rm, rc)) = rem.leading() else { return Some(root) };
            let m = rm.div(&head)?;
            if !rc.is_multiple_of(&two_lead) || m >= head {
                return None;
            }
            root = root.add(&Poly::monomial(m, rc / &two_lead));
        }
        None
    }
}

fn merge(a: &[(Monomial, BigInt)], b: &[(Monomial, BigInt)], negate_b: bool) -> Poly {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            Ordering::Greater => {
                out.push(a[i].clone());
                i += 1;
            }
            Ordering::Less => {
                let c = if negate_b { -&b[j].1 } else { b[j].1.clone() };
                out.push((b[j].0, c));
                j += 1;
            }
            Ordering::Equal => {
                let c = if negate_b { &a[i].1 - &b[j].1 } else { &a[i].1 + &b[j].1 };
                if !c.is_zero() {
                    out.push((a[i].0, c));
                }
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    for t in &b[j..] {
        let c = if negate_b { -&t.1 } else { t.1.clone() };
        out.push((t.0, c));
    }
    Poly { terms: out }
}
