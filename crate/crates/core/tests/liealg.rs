mod common;

use common::*;
use geosym_core::exprfield::{q, Chart};
use geosym_core::geometry::{Slot, TensorField};
use geosym_core::liealg::linalg::{self, qi, Q};
use geosym_core::liealg::*;
use proptest::prelude::*;

fn v(xs: &[i64]) -> Vec<Q> {
    xs.iter().map(|&x| qi(x)).collect()
}

fn so3() -> LieAlgebra {
    LieAlgebra::from_brackets(3, &[(0, 1, v(&[0, 0, 1])), (1, 2, v(&[1, 0, 0])), (0, 2, v(&[0, -1, 0]))], None).unwrap()
}

fn heisenberg() -> LieAlgebra {
    LieAlgebra::from_brackets(3, &[(0, 1, v(&[0, 0, 1]))], None).unwrap()
}

fn eh_algebra() -> LieAlgebra {
    let c = eh_chart();
    closure_from_fields(&eh_fields(&c)).unwrap()
}

fn rotation_block() -> linalg::QMatrix {
    linalg::from_i64(&[&[0, -1, 0, 0], &[1, 0, 0, 0], &[0, 0, 0, 1], &[0, 0, -1, 0]])
}

fn quaternion_block() -> linalg::QMatrix {
    linalg::from_i64(&[&[0, -1, 0, 0], &[1, 0, 0, 0], &[0, 0, 0, -1], &[0, 0, 1, 0]])
}

fn block_diag(b: &linalg::QMatrix, copies: usize) -> linalg::QMatrix {
    let k = b.len();
    let mut m = linalg::zeros(k * copies, k * copies);
    for c in 0..copies {
        for i in 0..k {
            for j in 0..k {
                m[c * k + i][c * k + j] = b[i][j].clone();
            }
        }
    }
    m
}

#[test]
fn closure_of_plane_fields() {
    let c = Chart::coordinates(&["x", "y"]).unwrap();
    let a = closure_from_fields(&[vector(&c, &["1", "0"]), vector(&c, &["0", "1"]), vector(&c, &["0", "x"])]).unwrap();
    assert_eq!(a.dim(), 3);
    assert_eq!(a.bracket(&a.basis(0), &a.basis(2)), v(&[0, 1, 0]));
    assert_eq!(a.bracket(&a.basis(1), &a.basis(2)), v(&[0, 0, 0]));
    assert_eq!(a.center().basis, vec![v(&[0, 1, 0])]);
}

#[test]
fn closure_failures() {
    let c = Chart::coordinates(&["x", "y"]).unwrap();
    let err = closure_from_fields(&[vector(&c, &["1", "0"]), vector(&c, &["0", "x^2"])]).unwrap_err();
    assert!(matches!(err, LieError::NotClosed { i: 0, j: 1, .. }));
    let err = closure_from_fields(&[vector(&c, &["1", "0"]), vector(&c, &["2", "0"])]).unwrap_err();
    assert!(matches!(err, LieError::Dependent));
    // pointwise dependent but independent over the constants
    let a = closure_from_fields(&[vector(&c, &["1", "0"]), vector(&c, &["x", "0"])]).unwrap();
    assert_eq!(a.bracket(&a.basis(0), &a.basis(1)), v(&[1, 0]));
}

#[test]
fn submaximal_fields_close() {
    let c = submax_chart();
    let fields: Vec<TensorField> = SUBMAX_FIELDS.iter().map(|f| vector(&c, f)).collect();
    let a = closure_from_fields(&fields).unwrap();
    assert_eq!(a.dim(), 8);
    assert_eq!(a.dim(), 2 * 2 * 2 - 2 * 2 + 4);
}

#[test]
fn eh_isometry_algebra() {
    let a = eh_algebra();
    assert_eq!(a.dim(), 4);
    assert_eq!(a.center().basis, vec![v(&[1, 0, 0, 0])]);
    let d = a.derived_algebra();
    assert_eq!(d.dim(), 3);
    assert!(!d.contains(&a.basis(0)));
    // the derived algebra is perfect, as for su(2)
    let dd: Vec<Vec<Q>> = d.basis.iter().flat_map(|x| d.basis.iter().map(|y| a.bracket(x, y))).collect();
    assert_eq!(Subspace::from_spanning(4, &dd), d);
}

#[test]
fn structure_constant_checks() {
    let bad = vec![vec![vec![qi(0)], vec![qi(0)]], vec![vec![qi(1)], vec![qi(0)]]];
    assert!(LieAlgebra::new(bad, None).is_err());
    let err =
        LieAlgebra::from_brackets(3, &[(0, 1, v(&[1, 0, 0])), (0, 2, v(&[1, 0, 0])), (1, 2, v(&[0, 1, 0]))], None);
    assert!(matches!(err, Err(LieError::Jacobi(0, 1, 2))));
}

#[test]
fn centralizers() {
    let ab = LieAlgebra::abelian(3);
    assert_eq!(ab.centralizer(&v(&[1, 2, 3])).dim(), 3);
    let s = so3();
    assert_eq!(s.centralizer(&v(&[1, 0, 0])).basis, vec![v(&[1, 0, 0])]);
    let eh = eh_algebra();
    assert_eq!(eh.centralizer(&eh.basis(1)), Subspace::from_spanning(4, &[eh.basis(0), eh.basis(1)]));
}

#[test]
fn normalizers() {
    let s = so3();
    assert_eq!(s.normalizer_of_span(&[s.basis(0), s.basis(1), s.basis(2)]).dim(), 3);
    let h = heisenberg();
    assert_eq!(h.normalizer_of_span(&[h.basis(2)]).dim(), 3);
    assert_eq!(h.normalizer_of_span(&[h.basis(0)]), Subspace::from_spanning(3, &[h.basis(0), h.basis(2)]));
    let eh = eh_algebra();
    assert_eq!(eh.normalizer_of_span(&[eh.basis(1)]), Subspace::from_spanning(4, &[eh.basis(0), eh.basis(1)]));
}

#[test]
fn representation_checks() {
    let s = so3();
    let gens = vec![
        linalg::from_i64(&[&[0, 0, 0], &[0, 0, -1], &[0, 1, 0]]),
        linalg::from_i64(&[&[0, 0, 1], &[0, 0, 0], &[-1, 0, 0]]),
        linalg::from_i64(&[&[0, -1, 0], &[1, 0, 0], &[0, 0, 0]]),
    ];
    let r = Representation::new(s.clone(), gens.clone()).unwrap();
    assert_eq!(r.module_dim(), 3);
    let swapped = vec![gens[1].clone(), gens[0].clone(), gens[2].clone()];
    assert!(matches!(Representation::new(s, swapped), Err(LieError::NotARepresentation(..))));
}

#[test]
fn zero_eigenspaces() {
    let ab = LieAlgebra::abelian(1);
    let r = Representation::new(ab, vec![rotation_block()]).unwrap();
    assert_eq!(zero_eigenspace(&r, &v(&[0])).dim(), 4);
    assert_eq!(zero_eigenspace(&r, &v(&[1])).dim(), 0);
    let sum = linalg::add(&rotation_block(), &quaternion_block());
    let k = kernel_of(&sum);
    assert_eq!(k.dim(), 2);
    assert_eq!(k.dim() + linalg::rank(&sum), 4);
    let n = 3;
    let big = linalg::add(&block_diag(&rotation_block(), n), &block_diag(&quaternion_block(), n));
    assert_eq!(kernel_of(&big).dim(), 2 * n);
}

#[test]
fn parameter_search_for_a_kernel_of_dimension_2n() {
    let n = 2;
    let zeta = block_diag(&rotation_block(), n);
    let xi = block_diag(&quaternion_block(), n);
    assert_eq!(kernel_parameter_search(&zeta, &xi, 2 * n, 6), vec![qi(-1), qi(1)]);
}

#[test]
fn invariant_tensors() {
    let triv = Representation::new(LieAlgebra::abelian(1), vec![linalg::zeros(3, 3)]).unwrap();
    assert_eq!(equivariant_tensors(&triv, &[Slot::Up, Slot::Down]).unwrap().len(), 9);

    let j = linalg::from_i64(&[&[0, -1], &[1, 0]]);
    let so2 = Representation::new(LieAlgebra::abelian(1), vec![j]).unwrap();
    let inv = equivariant_tensors(&so2, &[Slot::Up, Slot::Down]).unwrap();
    assert_eq!(inv.len(), 2);
    let expected = Subspace::from_spanning(4, &[v(&[1, 0, 0, 1]), v(&[0, -1, 1, 0])]);
    assert_eq!(Subspace::from_spanning(4, &inv), expected);
    // the rotation-invariant metric
    assert_eq!(equivariant_tensors(&so2, &[Slot::Down, Slot::Down]).unwrap().len(), 2);

    let c = submax_chart();
    let iso: Vec<TensorField> = SUBMAX_FIELDS[4..].iter().map(|f| vector(&c, f)).collect();
    let r = isotropy_representation(&iso, &[q(0, 1), q(0, 1), q(0, 1), q(0, 1)]).unwrap();
    assert_eq!(r.algebra().dim(), 4);
    assert!(equivariant_tensors(&r, &[Slot::Down, Slot::Down, Slot::Up]).unwrap().is_empty());

    let big = Representation::new(LieAlgebra::abelian(1), vec![linalg::zeros(9, 9)]).unwrap();
    assert!(matches!(equivariant_tensors(&big, &[Slot::Up; 4]), Err(LieError::TooLarge(6561))));
}

#[test]
fn isotropy_needs_vanishing_fields() {
    let c = submax_chart();
    let fields: Vec<TensorField> = SUBMAX_FIELDS.iter().map(|f| vector(&c, f)).collect();
    let err = isotropy_representation(&fields, &[q(0, 1), q(0, 1), q(0, 1), q(0, 1)]).unwrap_err();
    assert!(matches!(err, LieError::NotIsotropy(0)));
}

#[test]
fn vanishing_loci() {
    let names = ["h1", "h2", "h3", "h4", "h5", "h6", "h7", "h8"];
    let c = Chart::coordinates(&names).unwrap();
    let field = vector(&c, &["0", "0", "h4", "-h3", "0", "0", "h8", "-h7"]);
    let locus = vanishing_locus(&field).unwrap();
    assert_eq!(locus.dim(), Some(4));
    assert_eq!(locus.to_string(), "h3 = 0, h4 = 0, h7 = 0, h8 = 0");

    let p = Chart::coordinates(&["x", "y"]).unwrap();
    assert_eq!(vanishing_locus(&vector(&p, &["1", "0"])).unwrap(), Locus::Empty);
    let radial = vanishing_locus(&vector(&p, &["x", "y"])).unwrap();
    assert_eq!(radial.dim(), Some(0));
    let Locus::Affine { point, .. } = &radial else { unreachable!() };
    assert!(linalg::is_zero_vec(point));
    let shifted = vanishing_locus(&vector(&p, &["x - 1", "2 y + x - 3"])).unwrap();
    assert_eq!(shifted.to_string(), "x = 1, y = 1");
    assert!(matches!(vanishing_locus(&vector(&p, &["x y", "0"])), Err(LieError::Nonlinear(0))));
    assert!(matches!(vanishing_locus(&vector(&p, &["1/x", "0"])), Err(LieError::Nonlinear(0))));
}

proptest! {
    #[test]
    fn rank_plus_nullity(entries in proptest::collection::vec(-3i64..=3, 25)) {
        let m: linalg::QMatrix = entries.chunks(5).map(|r| r.iter().map(|&x| qi(x)).collect()).collect();
        let k = kernel_of(&m);
        prop_assert_eq!(k.dim() + linalg::rank(&m), 5);
        for w in &k.basis {
            prop_assert!(linalg::is_zero_vec(&linalg::apply(&m, w)));
        }
    }

    #[test]
    fn brackets_of_so3_satisfy_jacobi(a in proptest::collection::vec(-5i64..=5, 9)) {
        let s = so3();
        let (x, y, z) = (v(&a[0..3]), v(&a[3..6]), v(&a[6..9]));
        let j: Vec<Q> = (0..3).map(|i| {
            s.bracket(&x, &s.bracket(&y, &z))[i].clone()
                + s.bracket(&y, &s.bracket(&z, &x))[i].clone()
                + s.bracket(&z, &s.bracket(&x, &y))[i].clone()
        }).collect();
        prop_assert!(linalg::is_zero_vec(&j));
    }
}
