mod common;

use common::*;
use geosym_core::exprfield::{q, Chart, Expr};
use geosym_core::geometry::connection::{bianchi_defect, shift_tensor};
use geosym_core::geometry::*;
use num_rational::BigRational;
use num_traits::ToPrimitive;

fn to_f64(v: &BigRational) -> f64 {
    v.to_f64().unwrap()
}

#[test]
fn flat_metric_has_vanishing_christoffels() {
    let c = Chart::coordinates(&["x", "y", "z"]).unwrap();
    let d = levi_civita(&flat_metric(&c)).unwrap();
    assert!(d.christoffel().is_zero());
    assert!(d.curvature().is_zero());
}

#[test]
fn polar_christoffels() {
    let c = Chart::coordinates(&["r", "phi"]).unwrap();
    let (g, warnings) = parse_line_element(&c, "dr^2 + r^2 dphi^2").unwrap();
    assert!(warnings.is_empty());
    let d = levi_civita(&g).unwrap();
    assert_eq!(*d.symbol(0, 1, 1), expr(&c, "-r"));
    assert_eq!(*d.symbol(1, 0, 1), expr(&c, "1/r"));
    assert_eq!(*d.symbol(1, 1, 0), expr(&c, "1/r"));
    assert!(d.symbol(0, 0, 0).is_zero());
    assert!(d.curvature().is_zero());
}

#[test]
fn eh_radial_christoffel_matches_difference_quotient() {
    let c = eh_chart();
    let g = eh_metric(&c);
    let d = levi_civita(&g).unwrap();
    let sym = d.symbol(0, 0, 0);
    assert_eq!(*sym, expr(&c, "-(rho^2 + 1)/(2 rho*(rho^2 - 1))"));
    // Γ^ρ_ρρ = ½ ∂ρ log g_ρρ since g_ρρ is the only ρ-component
    let grr = g.get(&[0, 0]);
    let h = q(1, 1_000_000);
    for (num, den) in [(2, 1), (7, 3), (-5, 2)] {
        let base = c
            .point(&[
                ("rho", q(num, den)),
                ("phi", q(1, 1)),
                ("psi", q(1, 1)),
                ("theta", q(1, 1)),
                ("cos_phi", q(3, 5)),
                ("sin_phi", q(4, 5)),
                ("cos_psi", q(5, 13)),
                ("sin_psi", q(12, 13)),
                ("cos_theta", q(-4, 5)),
                ("sin_theta", q(3, 5)),
            ])
            .unwrap();
        let mut up = base.clone();
        let mut down = base.clone();
        up[0] += &h;
        down[0] -= &h;
        let lg = |p: &[BigRational]| to_f64(&grr.evaluate(p).unwrap()).abs().ln();
        let fd = (lg(&up) - lg(&down)) / (2.0 * to_f64(&h)) / 2.0;
        let exact = to_f64(&sym.evaluate(&base).unwrap());
        assert!((fd - exact).abs() <= 1e-6 * exact.abs().max(1.0), "{} vs {}", fd, exact);
    }
}

#[test]
fn eh_is_ricci_flat_and_fields_are_killing() {
    let c = eh_chart();
    let g = eh_metric(&c);
    let d = levi_civita(&g).unwrap();
    let r = d.curvature();
    assert!(!r.is_zero());
    assert!(ricci(&r).is_zero_checked().unwrap());
    assert!(bianchi_defect(&r).is_zero());
    let vs = eh_fields(&c);
    for v in &vs {
        assert!(lie_derivative(&g, v).unwrap().is_zero_checked().unwrap());
    }
    let w = bracket(&vs[1], &vs[2]).unwrap();
    assert!(lie_derivative(&g, &w).unwrap().is_zero());
}

#[test]
fn eh_radial_field_is_not_killing() {
    let c = eh_chart();
    let g = eh_metric(&c);
    let l = lie_derivative(&g, &TensorField::coordinate_vector(&c, 0)).unwrap();
    assert_eq!(*l.get(&[1, 1]), g.get(&[1, 1]).diff(0));
    assert!(!l.is_zero());
}

#[test]
fn first_bianchi_identity_for_submaximal_connection() {
    let c = submax_chart();
    let d = submax_connection(&c);
    assert!(d.is_torsion_free());
    let r = d.curvature();
    assert!(!r.is_zero());
    assert!(bianchi_defect(&r).is_zero());
}

#[test]
fn bracket_of_shears() {
    let c = Chart::coordinates(&["x", "y"]).unwrap();
    let a = vector(&c, &["0", "x"]);
    let b = vector(&c, &["y", "0"]);
    assert_eq!(bracket(&a, &b).unwrap(), vector(&c, &["x", "-y"]));
    assert_eq!(bracket(&b, &a).unwrap(), vector(&c, &["-x", "y"]));
}

#[test]
fn lie_derivative_satisfies_leibniz_rule() {
    let c = Chart::coordinates(&["x", "y", "z"]).unwrap();
    let t = endo(&c, &[&[1, 2, 0], &[0, -1, 3], &[4, 0, 1]]).map(|e| e.mul(&expr(&c, "x + y z")));
    let x = vector(&c, &["y^2", "x z", "1 + x"]);
    let f = expr(&c, "x/(1 + z^2)");
    let lhs = lie_derivative(&t.scale(&f), &x).unwrap();
    let rhs = t.scale(&x.derivative_of(&f)).add(&lie_derivative(&t, &x).unwrap().scale(&f));
    assert_eq!(lhs, rhs);
}

#[test]
fn lie_derivative_of_metric_matches_finite_differences() {
    let c = Chart::coordinates(&["x", "y", "z"]).unwrap();
    let (g, _) = parse_line_element(&c, "(1 + x^2) dx^2 + 2 y dx dz + dy^2 / (1 + z^2) + (2 + x y) dz^2").unwrap();
    let x = vector(&c, &["y z", "x^2 - z", "1 + x y"]);
    let l = lie_derivative(&g, &x).unwrap();
    let h = q(1, 100_000);
    let p = vec![q(1, 3), q(-2, 5), q(3, 2)];
    let at = |e: &Expr, p: &[BigRational]| to_f64(&e.evaluate(p).unwrap());
    let partial = |e: &Expr, k: usize| {
        let (mut up, mut down) = (p.clone(), p.clone());
        up[k] += &h;
        down[k] -= &h;
        (at(e, &up) - at(e, &down)) / (2.0 * to_f64(&h))
    };
    for a in 0..3 {
        for b in 0..3 {
            let mut oracle = 0.0;
            for k in 0..3 {
                oracle += at(x.get(&[k]), &p) * partial(g.get(&[a, b]), k);
                oracle += at(g.get(&[k, b]), &p) * partial(x.get(&[k]), a);
                oracle += at(g.get(&[a, k]), &p) * partial(x.get(&[k]), b);
            }
            let exact = at(l.get(&[a, b]), &p);
            assert!((oracle - exact).abs() <= 1e-6 * exact.abs().max(1.0), "({},{}) {} vs {}", a, b, oracle, exact);
        }
    }
}

#[test]
fn projective_shift_pattern() {
    let c = Chart::coordinates(&["x", "y"]).unwrap();
    let gamma = TensorField::covector(&c, vec![Expr::one(&c), Expr::zero(&c)]).unwrap();
    let d = Connection::flat(&c).shift(&gamma, ShiftClass::Projective, &[]).unwrap();
    assert_eq!(*d.symbol(0, 0, 0), Expr::int(&c, 2));
    assert_eq!(*d.symbol(1, 0, 1), Expr::one(&c));
    assert_eq!(*d.symbol(1, 1, 0), Expr::one(&c));
    assert!(d.symbol(0, 1, 1).is_zero());
    assert!(d.is_torsion_free());
}

#[test]
fn zero_shift_is_identity() {
    let c = submax_chart();
    let d = submax_connection(&c);
    let zero = TensorField::zeros(&c, vec![Slot::Down]);
    let j = complex_structure(&c);
    assert_eq!(d.shift(&zero, ShiftClass::Projective, &[]).unwrap(), d);
    assert_eq!(d.shift(&zero, ShiftClass::CProjective, std::slice::from_ref(&j)).unwrap(), d);
    let fr = standard_triple(&c);
    assert_eq!(d.shift(&zero, ShiftClass::Quaternionic, &fr).unwrap(), d);
}

#[test]
fn shift_requires_its_structures() {
    let c = submax_chart();
    let gamma = TensorField::zeros(&c, vec![Slot::Down]);
    assert!(matches!(shift_tensor(&gamma, ShiftClass::CProjective, &[]), Err(GeometryError::MissingStructure(_))));
}

#[test]
fn cprojective_shift_keeps_j_parallel() {
    let c = submax_chart();
    let j = complex_structure(&c);
    let d = submax_connection(&c);
    assert!(d.covariant_derivative(&j).is_zero());
    let gamma =
        TensorField::covector(&c, ["x2 y1", "1", "x1^2", "y2 - x1"].iter().map(|s| expr(&c, s)).collect()).unwrap();
    let shifted = d.shift(&gamma, ShiftClass::CProjective, std::slice::from_ref(&j)).unwrap();
    assert!(shifted.is_torsion_free());
    assert!(shifted.covariant_derivative(&j).is_zero());
    let proj = d.shift(&gamma, ShiftClass::Projective, &[]).unwrap();
    assert!(!proj.covariant_derivative(&j).is_zero());
}

#[test]
fn standard_quaternionic_triple_passes() {
    let c = Chart::coordinates(&["x", "y", "z", "w"]).unwrap();
    let [i, j, k] = standard_triple(&c);
    let report = check_hypercomplex_frame(&i, &j, &k).unwrap();
    assert!(report.all_pass(), "{:?}", report);
}

#[test]
fn involution_fails_the_square_check() {
    let c = Chart::coordinates(&["x", "y", "z", "w"]).unwrap();
    let [_, j, k] = standard_triple(&c);
    let swap = endo(&c, &[&[0, 1, 0, 0], &[1, 0, 0, 0], &[0, 0, 0, 1], &[0, 0, 1, 0]]);
    let report = check_hypercomplex_frame(&swap, &j, &k).unwrap();
    assert_eq!(report.passed("I^2 = -1"), Some(false));
    assert_eq!(report.passed("J^2 = -1"), Some(true));
    assert!(!report.all_pass());
}

#[test]
fn non_integrable_structure_is_flagged() {
    let c = Chart::coordinates(&["x", "y", "z", "w"]).unwrap();
    let [i, j, k] = standard_triple(&c);
    // conjugate by a non-constant matrix that is not a Jacobian
    let p = TensorField::endomorphism(
        &c,
        &vec![
            vec![Expr::one(&c), expr(&c, "z"), Expr::zero(&c), Expr::zero(&c)],
            vec![Expr::zero(&c), Expr::one(&c), Expr::zero(&c), Expr::zero(&c)],
            vec![Expr::zero(&c), Expr::zero(&c), Expr::one(&c), Expr::zero(&c)],
            vec![Expr::zero(&c), Expr::zero(&c), Expr::zero(&c), Expr::one(&c)],
        ],
    )
    .unwrap();
    let pinv = TensorField::endomorphism(&c, &matrix::inverse(&p.matrix()).unwrap()).unwrap();
    let conj = |a: &TensorField| p.compose(a).compose(&pinv);
    let report = check_hypercomplex_frame(&conj(&i), &conj(&j), &conj(&k)).unwrap();
    assert!(report.algebraic_pass());
    assert!(!report.all_pass());
}

#[test]
fn curvature_split_of_flat_connection_vanishes() {
    let c = submax_chart();
    let j = complex_structure(&c);
    let s = curvature_type_split(&Connection::flat(&c).curvature(), &j).unwrap();
    assert!(s.r20.is_zero() && s.r11.is_zero() && s.r02.is_zero());
}

#[test]
fn curvature_split_sums_back_and_has_the_right_types() {
    let c = submax_chart();
    let j = complex_structure(&c);
    let r = submax_connection(&c).curvature();
    let s = curvature_type_split(&r, &j).unwrap();
    assert_eq!(s.r20.add(&s.r11).add(&s.r02), r);
    let n = 4;
    for a in 0..n {
        for b in 0..n {
            for x in 0..n {
                for y in 0..n {
                    // R11(JX, JY) = R11(X, Y) on basis vectors, J∂x = Σ J^p_x ∂p
                    let mut jj = Expr::zero(&c);
                    for p in 0..n {
                        for t in 0..n {
                            jj = jj.add(&s.r11.get(&[a, b, p, t]).mul(j.get(&[p, x])).mul(j.get(&[t, y])));
                        }
                    }
                    assert_eq!(jj, *s.r11.get(&[a, b, x, y]));
                }
            }
        }
    }
    assert!(curvature_type_split(&r, &TensorField::identity(&c)).is_err());
}

#[test]
fn asd_frame_of_flat_metric() {
    let c = Chart::coordinates(&["x", "y", "z", "w"]).unwrap();
    let g = flat_metric(&c);
    let f = asd_frame(&g, &Expr::one(&c), 1).unwrap();
    assert!(f.normalized);
    let [i, j, k] = &f.elements;
    assert!(check_hypercomplex_frame(i, j, k).unwrap().all_pass());
    let sd = asd_frame(&g, &Expr::one(&c), -1).unwrap();
    for a in &f.elements {
        for b in &sd.elements {
            assert_eq!(a.compose(b), b.compose(a));
        }
    }
    assert!(asd_frame(&g, &Expr::int(&c, 2), 1).is_err());
}

#[test]
fn asd_frame_of_eh_is_skew_and_preserved_by_isometries() {
    let c = eh_chart();
    let g = eh_metric(&c);
    let w = expr(&c, "rho sin(phi)^2 sin(psi) / 2");
    let f = asd_frame(&g, &w, 1).unwrap();
    let gm = g.matrix();
    for a in &f.elements {
        let ga = matrix::mul(&gm, &a.matrix());
        assert!(matrix::is_zero(&matrix::add(&ga, &matrix::transpose(&ga))));
        let sq = a.compose(a);
        assert!(!sq.is_zero_checked().unwrap());
    }
    let ann = annihilator_forms(&f.elements, &g, Ambient::Full).unwrap();
    assert_eq!(ann.len(), 13);
    for v in eh_fields(&c) {
        for a in &f.elements {
            let l = lie_derivative(a, &v).unwrap();
            for om in &ann {
                let t = matrix::trace(&matrix::mul(&om.matrix(), &l.matrix()));
                assert!(t.is_zero());
            }
        }
    }
}

#[test]
fn annihilator_ranks() {
    let c = Chart::coordinates(&["x", "y", "z", "w"]).unwrap();
    let g = flat_metric(&c);
    let f = asd_frame(&g, &Expr::one(&c), 1).unwrap();
    assert_eq!(annihilator_forms(&f.elements, &g, Ambient::Skew).unwrap().len(), 3);
    assert_eq!(annihilator_forms(&f.elements, &g, Ambient::Full).unwrap().len(), 13);
    let sd = asd_frame(&g, &Expr::one(&c), -1).unwrap();
    let all: Vec<TensorField> = f.elements.iter().chain(sd.elements.iter()).cloned().collect();
    assert_eq!(annihilator_forms(&all, &g, Ambient::Skew).unwrap().len(), 0);
    let dup = [f.elements[0].clone(), f.elements[0].clone()];
    assert!(matches!(annihilator_forms(&dup, &g, Ambient::Skew), Err(GeometryError::Degenerate(_))));
}

#[test]
fn line_element_conventions() {
    let c = Chart::coordinates(&["x", "y"]).unwrap();
    let (g, w) = parse_line_element(&c, "dx dy").unwrap();
    assert!(w.is_empty());
    assert_eq!(*g.get(&[0, 1]), Expr::one(&c));
    let (g2, w2) = parse_line_element(&c, "dx ⊗ dy + dy ⊗ dx").unwrap();
    assert_eq!(w2.len(), 1);
    assert_eq!(g2, g);
    assert!(matches!(parse_line_element(&c, "dx ⊗ dy"), Err(GeometryError::NotSymmetric(_))));
    assert!(parse_line_element(&c, "dx dy dx").is_err());
    assert!(parse_line_element(&c, "dx + dy^2").is_err());
}
