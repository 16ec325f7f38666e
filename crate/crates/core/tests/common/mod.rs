#![allow(dead_code)]

use std::sync::Arc;

use geosym_core::exprfield::{Chart, Expr};
use geosym_core::geometry::{parse_line_element, Connection, Slot, TensorField};

pub const EH_METRIC: &str = "rho/(4(rho^2-1)) drho^2 + 1/rho*((rho^2 - cos(psi)^2) dphi^2 \
    + cos(psi) cos(phi) sin(psi) sin(phi) dphi dpsi \
    - sin(psi)^2 sin(phi)^2 cos(psi) dphi dtheta \
    + sin(phi)^2 (cos(psi)^2 cos(phi)^2 + rho^2 - cos(phi)^2) dpsi^2 \
    + sin(phi)^3 sin(psi)^3 cos(phi) dpsi dtheta \
    - sin(psi)^2 sin(phi)^2 (cos(psi)^2 cos(phi)^2 - rho^2 + 1 - cos(psi)^2 - cos(phi)^2) dtheta^2)";

pub const EH_FIELDS: [[&str; 4]; 4] = [
    ["0", "cos(psi)", "-sin(psi) cos(phi)/sin(phi)", "1"],
    [
        "0",
        "sin(psi) cos(theta)",
        "sin(phi) sin(psi)^2 (cos(theta) cos(psi) cos(phi) + sin(phi) sin(theta)) \
         / (cos(psi)^2 cos(phi)^2 - cos(psi)^2 - cos(phi)^2 + 1)",
        "(sin(phi) cos(theta) cos(psi) - sin(theta) cos(phi))/(sin(phi) sin(psi))",
    ],
    [
        "0",
        "sin(psi) sin(theta)",
        "-sin(phi) sin(psi)^2 (sin(phi) cos(theta) - sin(theta) cos(phi) cos(psi)) \
         / (cos(psi)^2 cos(phi)^2 - cos(psi)^2 - cos(phi)^2 + 1)",
        "(sin(phi) sin(theta) cos(psi) + cos(theta) cos(phi))/(sin(phi) sin(psi))",
    ],
    [
        "0",
        "cos(psi)",
        "sin(psi) sin(phi) cos(phi)/(cos(phi)^2 - 1)",
        "-(cos(psi)^2 cos(phi)^2 - cos(psi)^2 - cos(phi)^2 + 1)/(sin(phi)^2 sin(psi)^2)",
    ],
];

pub fn eh_chart() -> Arc<Chart> {
    Chart::with_trig(&["rho", "phi", "psi", "theta"], &["phi", "psi", "theta"]).unwrap()
}

pub fn eh_metric(c: &Arc<Chart>) -> TensorField {
    parse_line_element(c, EH_METRIC).unwrap().0
}

pub fn eh_fields(c: &Arc<Chart>) -> Vec<TensorField> {
    EH_FIELDS
        .iter()
        .map(|f| TensorField::vector(c, f.iter().map(|s| Expr::parse(c, s).unwrap()).collect()).unwrap())
        .collect()
}

pub fn expr(c: &Arc<Chart>, s: &str) -> Expr {
    Expr::parse(c, s).unwrap()
}

pub fn endo(c: &Arc<Chart>, rows: &[&[i64]]) -> TensorField {
    let m: Vec<Vec<Expr>> = rows.iter().map(|r| r.iter().map(|&v| Expr::int(c, v)).collect()).collect();
    TensorField::endomorphism(c, &m).unwrap()
}

pub fn vector(c: &Arc<Chart>, comps: &[&str]) -> TensorField {
    TensorField::vector(c, comps.iter().map(|s| expr(c, s)).collect()).unwrap()
}

/// Left multiplication by i and j on ℝ⁴ = ℍ, and their product.
pub fn standard_triple(c: &Arc<Chart>) -> [TensorField; 3] {
    let i = endo(c, &[&[0, -1, 0, 0], &[1, 0, 0, 0], &[0, 0, 0, -1], &[0, 0, 1, 0]]);
    let j = endo(c, &[&[0, 0, -1, 0], &[0, 0, 0, 1], &[1, 0, 0, 0], &[0, -1, 0, 0]]);
    let k = i.compose(&j);
    [i, j, k]
}

/// Complex structure on ℝ⁴ with coordinates (x1, y1, x2, y2).
pub fn complex_structure(c: &Arc<Chart>) -> TensorField {
    endo(c, &[&[0, -1, 0, 0], &[1, 0, 0, 0], &[0, 0, 0, -1], &[0, 0, 1, 0]])
}

pub fn flat_metric(c: &Arc<Chart>) -> TensorField {
    let n = c.n_coords();
    let m: Vec<Vec<Expr>> = (0..n).map(|a| (0..n).map(|b| Expr::int(c, (a == b) as i64)).collect()).collect();
    TensorField::bilinear(c, &m).unwrap()
}

pub fn submax_chart() -> Arc<Chart> {
    Chart::coordinates(&["x1", "y1", "x2", "y2"]).unwrap()
}

/// The connection with `Γ²₁₁ = z̄¹` and its conjugate, in real coordinates.
pub fn submax_connection(c: &Arc<Chart>) -> Connection {
    let mut g = TensorField::zeros(c, vec![Slot::Up, Slot::Down, Slot::Down]);
    let set = |g: &mut TensorField, a: usize, b: usize, d: usize, s: &str| {
        g.set(&[a, b, d], expr(c, s));
        g.set(&[a, d, b], expr(c, s));
    };
    set(&mut g, 2, 0, 0, "x1");
    set(&mut g, 3, 0, 0, "-y1");
    set(&mut g, 2, 1, 1, "-x1");
    set(&mut g, 3, 1, 1, "y1");
    set(&mut g, 2, 0, 1, "y1");
    set(&mut g, 3, 0, 1, "x1");
    Connection::new(g).unwrap()
}

/// Real and imaginary parts of the four complex symmetry fields.
pub const SUBMAX_FIELDS: [[&str; 4]; 8] = [
    ["1", "0", "-(x1^2 - y1^2)/2", "-x1 y1"],
    ["0", "1", "-x1 y1", "(x1^2 - y1^2)/2"],
    ["0", "0", "1", "0"],
    ["0", "0", "0", "1"],
    ["x1", "y1", "3 x2", "3 y2"],
    ["-y1", "x1", "-y2", "x2"],
    ["0", "0", "x1", "y1"],
    ["0", "0", "-y1", "x1"],
];
