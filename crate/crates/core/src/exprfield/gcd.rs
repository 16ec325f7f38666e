//! Multivariate polynomial GCD over the integers.
//!
//! Dense modular algorithm in the style of Brown: images modulo word-size
//! primes are computed by recursive evaluation/interpolation down to
//! univariate Euclid, lifted by Chinese remaindering, and accepted only
//! after exact trial division over Z. Unlucky primes and evaluation
//! points are detected by leading-monomial comparison; the trial division
//! makes the result unconditionally correct.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::poly::{Monomial, Poly};

type PP = Vec<(Monomial, u64)>;

// ---------------------------------------------------------------------------
// modular scalar helpers

#[inline]
fn mulmod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

#[inline]
fn addmod(a: u64, b: u64, p: u64) -> u64 {
    let s = a + b;
    if s >= p {
        s - p
    } else {
        s
    }
}

#[inline]
fn submod(a: u64, b: u64, p: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        a + p - b
    }
}

fn powmod(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1u64;
    a %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = mulmod(r, a, p);
        }
        a = mulmod(a, a, p);
        e >>= 1;
    }
    r
}

#[inline]
fn invmod(a: u64, p: u64) -> u64 {
    debug_assert!(!a.is_multiple_of(p));
    powmod(a, p - 2, p)
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for sp in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n.is_multiple_of(sp) {
            return n == sp;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = powmod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Large primes below 2^62, descending.
pub(crate) fn primes() -> &'static [u64] {
    static PRIMES: OnceLock<Vec<u64>> = OnceLock::new();
    PRIMES.get_or_init(|| {
        let mut out = Vec::new();
        let mut n = (1u64 << 62) - 1;
        while out.len() < 256 {
            if is_prime(n) {
                out.push(n);
            }
            n -= 2;
        }
        out
    })
}

// ---------------------------------------------------------------------------
// dense univariate polynomials over Z_p (coefficients low to high)

fn u_trim(a: &mut Vec<u64>) {
    while a.last() == Some(&0) {
        a.pop();
    }
}

fn u_eval(a: &[u64], x: u64, p: u64) -> u64 {
    a.iter().rev().fold(0, |acc, &c| addmod(mulmod(acc, x, p), c, p))
}

fn u_mul(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut r = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            r[i + j] = addmod(r[i + j], mulmod(x, y, p), p);
        }
    }
    u_trim(&mut r);
    r
}

fn u_scale(a: &[u64], c: u64, p: u64) -> Vec<u64> {
    let mut r: Vec<u64> = a.iter().map(|&x| mulmod(x, c, p)).collect();
    u_trim(&mut r);
    r
}

fn u_add(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let n = a.len().max(b.len());
    let mut r = vec![0u64; n];
    for (i, slot) in r.iter_mut().enumerate() {
        let x = a.get(i).copied().unwrap_or(0);
        let y = b.get(i).copied().unwrap_or(0);
        *slot = addmod(x, y, p);
    }
    u_trim(&mut r);
    r
}

/// Returns (quotient, remainder).
fn u_divrem(a: &[u64], b: &[u64], p: u64) -> (Vec<u64>, Vec<u64>) {
    assert!(!b.is_empty(), "division by zero polynomial");
    let mut r = a.to_vec();
    u_trim(&mut r);
    if r.len() < b.len() {
        return (Vec::new(), r);
    }
    let inv = invmod(*b.last().unwrap(), p);
    let mut q = vec![0u64; r.len() - b.len() + 1];
    while r.len() >= b.len() && !r.is_empty() {
        let shift = r.len() - b.len();
        let c = mulmod(*r.last().unwrap(), inv, p);
        q[shift] = c;
        for (j, &bj) in b.iter().enumerate() {
            r[shift + j] = submod(r[shift + j], mulmod(c, bj, p), p);
        }
        u_trim(&mut r);
    }
    u_trim(&mut q);
    (q, r)
}

fn u_monic(a: &[u64], p: u64) -> Vec<u64> {
    match a.last() {
        None => Vec::new(),
        Some(&lc) => u_scale(a, invmod(lc, p), p),
    }
}

fn u_gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    u_trim(&mut x);
    u_trim(&mut y);
    while !y.is_empty() {
        let (_, r) = u_divrem(&x, &y, p);
        x = y;
        y = r;
    }
    u_monic(&x, p)
}

// ---------------------------------------------------------------------------
// sparse multivariate polynomials over Z_p

fn pp_from_terms(t: PP, p: u64) -> PP {
    let mut t = t;
    t.sort_unstable_by(|a, b| b.0.cmp(&a.0));
    let mut out: PP = Vec::with_capacity(t.len());
    for (m, c) in t {
        if let Some((lm, lc)) = out.last_mut() {
            if *lm == m {
                *lc = addmod(*lc, c, p);
                continue;
            }
        }
        out.push((m, c));
    }
    out.retain(|(_, c)| *c != 0);
    out
}

fn pp_support(a: &PP) -> u32 {
    a.iter().fold(0, |s, (m, _)| s | m.support())
}

fn pp_is_constant(a: &PP) -> bool {
    a.len() == 1 && a[0].0.is_one()
}

fn pp_monic(a: &PP, p: u64) -> PP {
    if a.is_empty() {
        return Vec::new();
    }
    let inv = invmod(a[0].1, p);
    a.iter().map(|(m, c)| (*m, mulmod(*c, inv, p))).collect()
}

fn pp_one() -> PP {
    vec![(Monomial::ONE, 1)]
}

/// Exact division modulo p.
fn pp_exact_div(a: &PP, d: &PP, p: u64) -> Option<PP> {
    if d.is_empty() {
        return None;
    }
    if a.is_empty() {
        return Some(Vec::new());
    }
    let (dlm, dlc) = d[0];
    let inv = invmod(dlc, p);
    let mut rem: BTreeMap<Monomial, u64> = a.iter().cloned().collect();
    let mut quot: PP = Vec::new();
    while let Some((m, c)) = rem.pop_last() {
        let qm = m.div(&dlm)?;
        let qc = mulmod(c, inv, p);
        for (tm, tc) in &d[1..] {
            let key = tm.mul(&qm);
            let delta = mulmod(*tc, qc, p);
            let e = rem.entry(key).or_insert(0);
            *e = submod(*e, delta, p);
            if *e == 0 {
                rem.remove(&key);
            }
        }
        quot.push((qm, qc));
    }
    Some(quot)
}

/// Splits by powers of `v`: (monomial without v, dense coefficients in v).
fn pp_split(a: &PP, v: usize) -> Vec<(Monomial, Vec<u64>)> {
    let mut map: BTreeMap<Monomial, Vec<u64>> = BTreeMap::new();
    for (m, c) in a {
        let e = m.exp(v) as usize;
        let rest = m.with_exp(v, 0);
        let slot = map.entry(rest).or_default();
        if slot.len() <= e {
            slot.resize(e + 1, 0);
        }
        slot[e] = *c;
    }
    map.into_iter().rev().collect()
}

fn pp_join(parts: &[(Monomial, Vec<u64>)], v: usize, p: u64) -> PP {
    let mut t = Vec::new();
    for (rest, coeffs) in parts {
        for (e, &c) in coeffs.iter().enumerate() {
            if c != 0 {
                t.push((rest.with_exp(v, e as u16), c));
            }
        }
    }
    pp_from_terms(t, p)
}

fn pp_eval(a: &PP, v: usize, x: u64, p: u64) -> PP {
    let mut pw: Vec<u64> = vec![1];
    let mut t = Vec::with_capacity(a.len());
    for (m, c) in a {
        let e = m.exp(v) as usize;
        while pw.len() <= e {
            let nx = mulmod(*pw.last().unwrap(), x, p);
            pw.push(nx);
        }
        t.push((m.with_exp(v, 0), mulmod(*c, pw[e], p)));
    }
    pp_from_terms(t, p)
}

fn highest_var(support: u32) -> usize {
    31 - support.leading_zeros() as usize
}

/// Monic GCD of two nonzero polynomials over Z_p.
fn pgcd(a: &PP, b: &PP, p: u64) -> PP {
    debug_assert!(!a.is_empty() && !b.is_empty());
    if pp_is_constant(a) || pp_is_constant(b) {
        return pp_one();
    }
    let sa = pp_support(a);
    let sb = pp_support(b);
    if sa != sb {
        // a variable present in only one argument cannot divide the gcd
        let (x, y, only) = if sa & !sb != 0 { (a, b, sa & !sb) } else { (b, a, sb & !sa) };
        let v = highest_var(only);
        let mut g = pp_monic(y, p);
        for (_, coeffs) in pp_split_by_var(x, v) {
            g = pgcd(&g, &coeffs, p);
            if pp_is_constant(&g) {
                break;
            }
        }
        return g;
    }
    if sa.count_ones() == 1 {
        let v = highest_var(sa);
        let ua = to_dense(a, v);
        let ub = to_dense(b, v);
        return from_dense(&u_gcd(&ua, &ub, p), v);
    }
    let v = highest_var(sa);
    let sa_parts = pp_split(a, v);
    let sb_parts = pp_split(b, v);
    let ca = parts_content(&sa_parts, p);
    let cb = parts_content(&sb_parts, p);
    let cg = u_gcd(&ca, &cb, p);
    let a1 = parts_div(&sa_parts, &ca, p);
    let b1 = parts_div(&sb_parts, &cb, p);
    let lca = a1[0].1.clone();
    let lcb = b1[0].1.clone();
    let gam = u_gcd(&lca, &lcb, p);
    let deg_a = a1.iter().map(|x| x.1.len()).max().unwrap_or(1) - 1;
    let deg_b = b1.iter().map(|x| x.1.len()).max().unwrap_or(1) - 1;
    let bound = (gam.len() - 1) + deg_a.min(deg_b);
    let a1p = pp_join(&a1, v, p);
    let b1p = pp_join(&b1, v, p);

    let mut cur_lm: Option<Monomial> = None;
    let mut interp: Vec<(Monomial, Vec<u64>)> = Vec::new();
    let mut modulus: Vec<u64> = vec![1];
    let mut npts = 0usize;
    let mut alpha: u64 = 0x2545_F491_4F6C_DD1D % p;
    let mut attempts = 0usize;
    loop {
        attempts += 1;
        assert!(attempts < 100_000, "modular gcd failed to converge");
        alpha = addmod(mulmod(alpha, 6364136223846793005 % p, p), 1442695040888963407 % p, p);
        if u_eval(&lca, alpha, p) == 0 || u_eval(&lcb, alpha, p) == 0 {
            continue;
        }
        if u_eval(&modulus, alpha, p) == 0 {
            continue;
        }
        let ga = pgcd(&pp_eval(&a1p, v, alpha, p), &pp_eval(&b1p, v, alpha, p), p);
        if pp_is_constant(&ga) {
            return from_dense(&cg, v);
        }
        let lm = ga[0].0;
        let gam_a = u_eval(&gam, alpha, p);
        let scaled: PP = ga.iter().map(|(m, c)| (*m, mulmod(*c, gam_a, p))).collect();
        match cur_lm {
            Some(cur) if lm > cur => continue,
            Some(cur) if lm == cur => {
                // Newton step: H += (target - H(alpha)) / M(alpha) * M(v)
                let m_at = u_eval(&modulus, alpha, p);
                let inv_m = invmod(m_at, p);
                let mut target: BTreeMap<Monomial, u64> = scaled.into_iter().collect();
                let mut changed = false;
                for (rest, coeffs) in interp.iter_mut() {
                    let t = target.remove(rest).unwrap_or(0);
                    let h = u_eval(coeffs, alpha, p);
                    let delta = mulmod(submod(t, h, p), inv_m, p);
                    if delta != 0 {
                        changed = true;
                        *coeffs = u_add(coeffs, &u_scale(&modulus, delta, p), p);
                    }
                }
                for (rest, t) in target {
                    changed = true;
                    let delta = mulmod(t, inv_m, p);
                    interp.push((rest, u_scale(&modulus, delta, p)));
                }
                interp.retain(|(_, c)| !c.is_empty());
                interp.sort_by(|x, y| y.0.cmp(&x.0));
                modulus = u_mul(&modulus, &[submod(0, alpha, p), 1], p);
                npts += 1;
                if npts > bound || !changed {
                    if let Some(g) = try_candidate(&interp, &cg, &a1p, &b1p, v, p) {
                        return g;
                    }
                    if npts > bound {
                        cur_lm = None;
                    }
                }
            }
            _ => {
                cur_lm = Some(lm);
                interp = scaled.into_iter().map(|(m, c)| (m, vec![c])).collect();
                modulus = vec![submod(0, alpha, p), 1];
                npts = 1;
                if npts > bound {
                    if let Some(g) = try_candidate(&interp, &cg, &a1p, &b1p, v, p) {
                        return g;
                    }
                    cur_lm = None;
                }
            }
        }
    }
}

/// Removes the content in `v` from an interpolated image and accepts it
/// when it divides both inputs.
fn try_candidate(interp: &[(Monomial, Vec<u64>)], cg: &[u64], a: &PP, b: &PP, v: usize, p: u64) -> Option<PP> {
    let cont = parts_content(interp, p);
    let cand = pp_join(&parts_div(interp, &cont, p), v, p);
    pp_exact_div(a, &cand, p)?;
    pp_exact_div(b, &cand, p)?;
    let full: Vec<(Monomial, Vec<u64>)> = pp_split(&cand, v).into_iter().map(|(r, c)| (r, u_mul(&c, cg, p))).collect();
    Some(pp_monic(&pp_join(&full, v, p), p))
}

fn pp_split_by_var(a: &PP, v: usize) -> Vec<(u16, PP)> {
    let mut map: BTreeMap<u16, PP> = BTreeMap::new();
    for (m, c) in a {
        map.entry(m.exp(v)).or_default().push((m.with_exp(v, 0), *c));
    }
    map.into_iter().collect()
}

fn to_dense(a: &PP, v: usize) -> Vec<u64> {
    let deg = a.iter().map(|(m, _)| m.exp(v)).max().unwrap_or(0) as usize;
    let mut r = vec![0u64; deg + 1];
    for (m, c) in a {
        r[m.exp(v) as usize] = *c;
    }
    u_trim(&mut r);
    r
}

fn from_dense(a: &[u64], v: usize) -> PP {
    let mut t: PP =
        a.iter().enumerate().filter(|(_, &c)| c != 0).map(|(e, &c)| (Monomial::var(v, e as u16), c)).collect();
    t.sort_unstable_by(|x, y| y.0.cmp(&x.0));
    t
}

fn parts_content(parts: &[(Monomial, Vec<u64>)], p: u64) -> Vec<u64> {
    let mut g: Vec<u64> = Vec::new();
    for (_, c) in parts {
        g = if g.is_empty() { u_monic(c, p) } else { u_gcd(&g, c, p) };
        if g.len() == 1 {
            break;
        }
    }
    g
}

fn parts_div(parts: &[(Monomial, Vec<u64>)], d: &[u64], p: u64) -> Vec<(Monomial, Vec<u64>)> {
    if d.len() == 1 && d[0] == 1 {
        return parts.to_vec();
    }
    parts
        .iter()
        .map(|(m, c)| {
            let (q, r) = u_divrem(c, d, p);
            debug_assert!(r.is_empty());
            (*m, q)
        })
        .collect()
}

// ---------------------------------------------------------------------------
// integer level

fn symmetric_mod(x: &BigInt, m: &BigInt) -> BigInt {
    let r = x.mod_floor(m);
    let half: BigInt = m >> 1;
    if r > half {
        r - m
    } else {
        r
    }
}

/// Greatest common divisor in Z[x_1..x_n], normalized to a positive
/// leading coefficient. `gcd(0, 0) = 0`.
pub fn gcd(a: &Poly, b: &Poly) -> Poly {
    if a.is_zero() {
        return normalize_sign(b.clone());
    }
    if b.is_zero() {
        return normalize_sign(a.clone());
    }
    let ca = a.content().abs();
    let cb = b.content().abs();
    let c = ca.gcd(&cb);
    if a.is_constant() || b.is_constant() {
        return Poly::constant(c);
    }
    let ma = a.monomial_content();
    let mb = b.monomial_content();
    let m = ma.gcd(&mb);
    let a1 = strip(a, &ca, &ma);
    let b1 = strip(b, &cb, &mb);
    let g = gcd_primitive(&a1, &b1);
    normalize_sign(g.mul_monomial(&m, &c))
}

fn strip(a: &Poly, c: &BigInt, m: &Monomial) -> Poly {
    let mut r = if c.is_one() { a.clone() } else { a.div_scalar_exact(c) };
    if !m.is_one() {
        r = r.div_monomial_exact(m);
    }
    r
}

fn normalize_sign(p: Poly) -> Poly {
    if p.leading_coeff().is_negative() {
        p.neg()
    } else {
        p
    }
}

/// GCD of primitive polynomials free of monomial factors.
fn gcd_primitive(a: &Poly, b: &Poly) -> Poly {
    if a.is_constant() || b.is_constant() {
        return Poly::one();
    }
    if a == b {
        return normalize_sign(a.clone());
    }
    let sa = a.support();
    let sb = b.support();
    if sa != sb {
        let (x, y, only) = if sa & !sb != 0 { (a, b, sa & !sb) } else { (b, a, sb & !sa) };
        let v = highest_var(only);
        let mut g = y.clone();
        for c in x.coefficients_in(v) {
            if c.is_zero() {
                continue;
            }
            g = gcd(&g, &c);
            if g.is_constant() {
                return Poly::one();
            }
        }
        return normalize_sign(g.primitive_part());
    }
    // cheap divisibility shortcuts
    if a.len() <= b.len() {
        if b.exact_div(a).is_some() {
            return normalize_sign(a.clone());
        }
    } else if a.exact_div(b).is_some() {
        return normalize_sign(b.clone());
    }
    modular_gcd(a, b)
}

fn modular_gcd(a: &Poly, b: &Poly) -> Poly {
    let lca = a.leading_coeff();
    let lcb = b.leading_coeff();
    let gamma = lca.gcd(&lcb);
    let mut cur_lm: Option<Monomial> = None;
    let mut coeffs: BTreeMap<Monomial, BigInt> = BTreeMap::new();
    let mut modulus = BigInt::one();
    let mut last_candidate: Option<Poly> = None;
    for &p in primes() {
        let pb = BigInt::from(p);
        if (&lca % &pb).is_zero() || (&lcb % &pb).is_zero() {
            continue;
        }
        let ap = a.reduce_mod(p);
        let bp = b.reduce_mod(p);
        let gp = pgcd(&ap, &bp, p);
        if pp_is_constant(&gp) {
            return Poly::one();
        }
        let g_res: u64 = gamma.mod_floor(&pb).try_into().unwrap();
        let gp: PP = gp.into_iter().map(|(m, c)| (m, mulmod(c, g_res, p))).collect();
        let lm = gp[0].0;
        match cur_lm {
            Some(cur) if lm > cur => continue,
            Some(cur) if lm == cur => {
                let inv = invmod(u64::try_from(modulus.mod_floor(&pb)).unwrap(), p);
                let new_mod = &modulus * &pb;
                let mut residues: BTreeMap<Monomial, u64> = gp.into_iter().collect();
                let mut next: BTreeMap<Monomial, BigInt> = BTreeMap::new();
                for (m, g) in coeffs.iter() {
                    let r = residues.remove(m).unwrap_or(0);
                    next.insert(*m, crt(g, &modulus, r, p, inv, &new_mod));
                }
                for (m, r) in residues {
                    next.insert(m, crt(&BigInt::zero(), &modulus, r, p, inv, &new_mod));
                }
                next.retain(|_, c| !c.is_zero());
                coeffs = next;
                modulus = new_mod;
            }
            _ => {
                cur_lm = Some(lm);
                modulus = pb.clone();
                coeffs = gp.into_iter().map(|(m, c)| (m, symmetric_mod(&BigInt::from(c), &pb))).collect();
                last_candidate = None;
                continue;
            }
        }
        let cand = Poly::from_terms(coeffs.iter().map(|(m, c)| (*m, c.clone())).collect());
        let cand = normalize_sign(cand.primitive_part());
        if last_candidate.as_ref() == Some(&cand)
            && a.exact_div(&cand).is_some() && b.exact_div(&cand).is_some() {
                return cand;
            }
        last_candidate = Some(cand);
    }
    panic!("modular gcd exhausted the prime table");
}

fn crt(g: &BigInt, m: &BigInt, r: u64, p: u64, inv_m: u64, new_mod: &BigInt) -> BigInt {
    let pb = BigInt::from(p);
    let g_mod: u64 = g.mod_floor(&pb).try_into().unwrap();
    let t = mulmod(submod(r, g_mod, p), inv_m, p);
    symmetric_mod(&(g + m * BigInt::from(t)), new_mod)
}
