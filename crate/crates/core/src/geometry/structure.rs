use std::sync::Arc;

use crate::exprfield::{q, Chart, Expr};

use super::matrix::{self, Matrix};
use super::tensor::{Slot, TensorField};
use super::GeometryError;

/// Nijenhuis tensor `N^a_bc` of an endomorphism field.
pub fn nijenhuis(j: &TensorField) -> TensorField {
    let n = j.dim();
    let chart = j.chart().clone();
    TensorField::from_fn(&chart, vec![Slot::Up, Slot::Down, Slot::Down], |i| {
        let (a, b, c) = (i[0], i[1], i[2]);
        let mut acc = Expr::zero(&chart);
        for k in 0..n {
            acc = acc
                .add(&j.get(&[k, b]).mul(&j.get(&[a, c]).diff(k)))
                .sub(&j.get(&[k, c]).mul(&j.get(&[a, b]).diff(k)))
                .sub(&j.get(&[a, k]).mul(&j.get(&[k, c]).diff(b).sub(&j.get(&[k, b]).diff(c))));
        }
        acc
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameReport {
    pub checks: Vec<(String, bool)>,
}

impl FrameReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|(_, ok)| *ok)
    }

    pub fn passed(&self, name: &str) -> Option<bool> {
        self.checks.iter().find(|(n, _)| n == name).map(|(_, ok)| *ok)
    }

    /// Every check except the integrability ones.
    pub fn algebraic_pass(&self) -> bool {
        self.checks.iter().filter(|(n, _)| !n.starts_with('N')).all(|(_, ok)| *ok)
    }
}

/// Checks the quaternionic relations and integrability of a frame.
pub fn check_hypercomplex_frame(
    i: &TensorField,
    j: &TensorField,
    k: &TensorField,
) -> Result<FrameReport, GeometryError> {
    for t in [i, j, k] {
        if !t.is_endomorphism() {
            return Err(GeometryError::Shape("frame elements must be (1,1) tensors".into()));
        }
    }
    let chart = i.chart();
    let minus_id = TensorField::identity(chart).scale(&Expr::int(chart, -1));
    let anti = |a: &TensorField, b: &TensorField| a.compose(b).add(&b.compose(a)).is_zero();
    let checks = vec![
        ("I^2 = -1".to_string(), i.compose(i) == minus_id),
        ("J^2 = -1".to_string(), j.compose(j) == minus_id),
        ("K^2 = -1".to_string(), k.compose(k) == minus_id),
        ("IJ = K".to_string(), i.compose(j) == *k),
        ("IJ = -JI".to_string(), anti(i, j)),
        ("JK = -KJ".to_string(), anti(j, k)),
        ("KI = -IK".to_string(), anti(k, i)),
        ("N_I = 0".to_string(), nijenhuis(i).is_zero()),
        ("N_J = 0".to_string(), nijenhuis(j).is_zero()),
        ("N_K = 0".to_string(), nijenhuis(k).is_zero()),
    ];
    Ok(FrameReport { checks })
}

/// Curvature split by type in the form arguments.
#[derive(Debug, Clone)]
pub struct CurvatureSplit {
    pub r20: TensorField,
    pub r11: TensorField,
    pub r02: TensorField,
}

fn form_args_jj(r: &TensorField, j: &TensorField) -> TensorField {
    let n = r.dim();
    let chart = r.chart().clone();
    TensorField::from_fn(&chart, r.slots().to_vec(), |i| {
        let mut acc = Expr::zero(&chart);
        for p in 0..n {
            let jp = j.get(&[p, i[2]]);
            if jp.is_zero() {
                continue;
            }
            for s in 0..n {
                let js = j.get(&[s, i[3]]);
                if js.is_zero() {
                    continue;
                }
                acc = acc.add(&r.get(&[i[0], i[1], p, s]).mul(jp).mul(js));
            }
        }
        acc
    })
}

/// `(X, Y) ↦ J ∘ B(JX, Y)`.
fn value_j_first_j(b: &TensorField, j: &TensorField) -> TensorField {
    let n = b.dim();
    let chart = b.chart().clone();
    TensorField::from_fn(&chart, b.slots().to_vec(), |i| {
        let mut acc = Expr::zero(&chart);
        for e in 0..n {
            let je = j.get(&[i[0], e]);
            if je.is_zero() {
                continue;
            }
            for p in 0..n {
                let jp = j.get(&[p, i[2]]);
                if jp.is_zero() {
                    continue;
                }
                acc = acc.add(&b.get(&[e, i[1], p, i[3]]).mul(je).mul(jp));
            }
        }
        acc
    })
}

/// Splits `R^a_bcd` (form arguments `c, d`) into
/// `R11 = ½(R(X,Y) + R(JX,JY))`, and the remainder `B` into
/// `R20 = ½(B − J∘B(JX,·))`, `R02 = ½(B + J∘B(JX,·))`, so that
/// `R20(JX,Y) = J R20(X,Y)` and `R02(JX,Y) = −J R02(X,Y)`.
pub fn curvature_type_split(r: &TensorField, j: &TensorField) -> Result<CurvatureSplit, GeometryError> {
    if r.slots() != [Slot::Up, Slot::Down, Slot::Down, Slot::Down] {
        return Err(GeometryError::Shape("curvature needs slots (up, down, down, down)".into()));
    }
    let chart = r.chart().clone();
    if !j.is_endomorphism() || j.compose(j) != TensorField::identity(&chart).scale(&Expr::int(&chart, -1)) {
        return Err(GeometryError::NotAlmostComplex);
    }
    let half = Expr::rational(&chart, &q(1, 2));
    let r11 = r.add(&form_args_jj(r, j)).scale(&half);
    let b = r.sub(&r11);
    let jb = value_j_first_j(&b, j);
    let r20 = b.sub(&jb).scale(&half);
    let r02 = b.add(&jb).scale(&half);
    Ok(CurvatureSplit { r20, r11, r02 })
}

fn levi_civita_symbol(p: &[usize]) -> i64 {
    let mut sign = 1;
    for a in 0..p.len() {
        for b in a + 1..p.len() {
            if p[a] == p[b] {
                return 0;
            }
            if p[a] > p[b] {
                sign = -sign;
            }
        }
    }
    sign
}

/// Hodge star on 2-forms given as antisymmetric matrices, in dimension 4,
/// using the volume density `w = sqrt(det g)` and an orientation sign.
pub fn hodge_star(omega: &Matrix, g_inv: &Matrix, w: &Expr, orientation: i64) -> Matrix {
    let chart = w.chart().clone();
    let raised = matrix::mul(&matrix::mul(g_inv, omega), &matrix::transpose(g_inv));
    let half_w = w.mul(&Expr::rational(&chart, &q(orientation, 2)));
    let mut out = matrix::zeros(&chart, 4, 4);
    for a in 0..4 {
        for b in 0..4 {
            let mut acc = Expr::zero(&chart);
            for c in 0..4 {
                for d in 0..4 {
                    let e = levi_civita_symbol(&[a, b, c, d]);
                    if e != 0 && !raised[c][d].is_zero() {
                        acc = acc.add(&raised[c][d].scale_int(e));
                    }
                }
            }
            out[a][b] = acc.mul(&half_w);
        }
    }
    out
}

/// `⟨A, B⟩ = −¼ tr(AB)`.
fn pairing(a: &TensorField, b: &TensorField) -> Expr {
    let chart = a.chart().clone();
    matrix::trace(&matrix::mul(&a.matrix(), &b.matrix())).mul(&Expr::rational(&chart, &q(-1, 4)))
}

#[derive(Debug, Clone)]
pub struct AsdFrame {
    pub elements: [TensorField; 3],
    /// Whether `A_i^2 = −Id` holds; otherwise `A_i^2 = −norms[i] Id`.
    pub normalized: bool,
    pub norms: [Expr; 3],
}

/// Orthogonal frame of the anti-self-dual skew endomorphisms of a
/// 4-dimensional metric (self-dual when `orientation` is −1), normalized
/// when the needed square roots exist in the field.
pub fn asd_frame(g: &TensorField, volume: &Expr, orientation: i64) -> Result<AsdFrame, GeometryError> {
    let chart = g.chart().clone();
    if g.dim() != 4 {
        return Err(GeometryError::WrongDimension { expected: 4, got: g.dim() });
    }
    if orientation != 1 && orientation != -1 {
        return Err(GeometryError::Shape("orientation must be 1 or -1".into()));
    }
    let gm = g.matrix();
    if volume.mul(volume) != matrix::det(&gm) {
        return Err(GeometryError::Degenerate("volume density does not square to det g".into()));
    }
    let gi = matrix::inverse(&gm).ok_or(GeometryError::Degenerate("metric is degenerate".into()))?;
    let raw: Vec<TensorField> = (1..4)
        .map(|i| {
            let mut s = matrix::zeros(&chart, 4, 4);
            s[0][i] = Expr::one(&chart);
            s[i][0] = Expr::int(&chart, -1);
            let star = hodge_star(&s, &gi, volume, orientation);
            let omega: Matrix =
                s.iter().zip(&star).map(|(r, t)| r.iter().zip(t).map(|(x, y)| x.sub(y)).collect()).collect();
            TensorField::endomorphism(&chart, &matrix::mul(&gi, &omega)).unwrap()
        })
        .collect();
    let b1 = raw[0].clone();
    let n1 = pairing(&b1, &b1);
    if n1.is_zero() {
        return Err(GeometryError::Degenerate("anti-self-dual frame degenerates".into()));
    }
    let b2 = raw[1].sub(&b1.scale(&pairing(&raw[1], &b1).div(&n1)?));
    let n2 = pairing(&b2, &b2);
    if n2.is_zero() {
        return Err(GeometryError::Degenerate("anti-self-dual frame degenerates".into()));
    }
    let b3 = b1.compose(&b2);
    let n3 = n1.mul(&n2);
    if let (Some(r1), Some(r2)) = (n1.sqrt(), n2.sqrt()) {
        let a1 = b1.scale(&r1.inv()?);
        let a2 = b2.scale(&r2.inv()?);
        let a3 = a1.compose(&a2);
        let one = Expr::one(&chart);
        return Ok(AsdFrame { elements: [a1, a2, a3], normalized: true, norms: [one.clone(), one.clone(), one] });
    }
    Ok(AsdFrame { elements: [b1, b2, b3], normalized: false, norms: [n1, n2, n3] })
}

/// Ambient space in which annihilators are sought.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ambient {
    /// Endomorphisms skew with respect to the metric.
    Skew,
    /// All endomorphisms.
    Full,
}

fn skew_basis(chart: &Arc<Chart>, gi: &Matrix, n: usize) -> Vec<TensorField> {
    let mut out = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            let mut s = matrix::zeros(chart, n, n);
            s[a][b] = Expr::one(chart);
            s[b][a] = Expr::int(chart, -1);
            out.push(TensorField::endomorphism(chart, &matrix::mul(gi, &s)).unwrap());
        }
    }
    out
}

fn is_skew(a: &TensorField, gm: &Matrix) -> bool {
    let ga = matrix::mul(gm, &a.matrix());
    let t = matrix::transpose(&ga);
    matrix::is_zero(&matrix::add(&ga, &t))
}

/// Basis of endomorphism fields `ω` in the ambient space with
/// `tr(ω A) = 0` for every `A` in the frame.
pub fn annihilator_forms(
    frame: &[TensorField],
    g: &TensorField,
    ambient: Ambient,
) -> Result<Vec<TensorField>, GeometryError> {
    let chart = g.chart().clone();
    let n = g.dim();
    let gm = g.matrix();
    let gi = matrix::inverse(&gm).ok_or(GeometryError::Degenerate("metric is degenerate".into()))?;
    let all_skew = frame.iter().all(|a| is_skew(a, &gm));
    let (basis, mut extra) = match ambient {
        Ambient::Skew => (skew_basis(&chart, &gi, n), Vec::new()),
        Ambient::Full if all_skew => {
            // g-symmetric endomorphisms pair to zero with skew ones
            let mut sym = Vec::new();
            for a in 0..n {
                for b in a..n {
                    let mut s = matrix::zeros(&chart, n, n);
                    s[a][b] = Expr::one(&chart);
                    s[b][a] = Expr::one(&chart);
                    sym.push(TensorField::endomorphism(&chart, &matrix::mul(&gi, &s)).unwrap());
                }
            }
            (skew_basis(&chart, &gi, n), sym)
        }
        Ambient::Full => {
            let mut all = Vec::new();
            for a in 0..n {
                for b in 0..n {
                    let mut s = matrix::zeros(&chart, n, n);
                    s[a][b] = Expr::one(&chart);
                    all.push(TensorField::endomorphism(&chart, &s).unwrap());
                }
            }
            (all, Vec::new())
        }
    };
    let m: Matrix = frame
        .iter()
        .map(|a| basis.iter().map(|e| matrix::trace(&matrix::mul(&e.matrix(), &a.matrix()))).collect())
        .collect();
    if !frame.is_empty() && matrix::rank(&m) < frame.len() {
        return Err(GeometryError::Degenerate("frame elements are dependent on the ambient space".into()));
    }
    let ker = if frame.is_empty() {
        (0..basis.len())
            .map(|i| (0..basis.len()).map(|j| if i == j { Expr::one(&chart) } else { Expr::zero(&chart) }).collect())
            .collect()
    } else {
        matrix::kernel(&m, basis.len(), &chart)
    };
    let mut out: Vec<TensorField> = ker
        .iter()
        .map(|v| {
            let mut acc = TensorField::zeros(&chart, vec![Slot::Up, Slot::Down]);
            for (c, e) in v.iter().zip(&basis) {
                if !c.is_zero() {
                    acc = acc.add(&e.scale(c));
                }
            }
            acc
        })
        .collect();
    out.append(&mut extra);
    Ok(out)
}
