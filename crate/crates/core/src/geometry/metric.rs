//! Line-element literals such as `drho^2 + rho^2 dphi^2`.
//!
//! A juxtaposed or `*` product of two distinct differentials is the
//! symmetrized product `da db = da⊗db + db⊗da`, while `da^2 = da⊗da`.
//! An explicit `⊗` is taken literally and triggers a warning.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::exprfield::parse::{parse_expr, Ast, BinOp, ParseError};
use crate::exprfield::{Chart, Expr};

use super::matrix::zeros;
use super::tensor::TensorField;
use super::GeometryError;

/// Key: ordered list of differential indices and whether the product was
/// an explicit tensor product.
type Key = (Vec<usize>, bool);

#[derive(Clone)]
struct Form(BTreeMap<Key, Expr>);

pub const CONVENTION_WARNING: &str = "explicit `⊗` in line element: juxtaposed differentials are read as \
     `a b = a⊗b + b⊗a` (and `a^2 = a⊗a`); `⊗` terms are taken literally";

fn perr(text: &str, off: usize, msg: impl Into<String>) -> GeometryError {
    GeometryError::Parse(ParseError::at(text, off, msg))
}

fn scalar(e: Expr) -> Form {
    let mut m = BTreeMap::new();
    if !e.is_zero() {
        m.insert((Vec::new(), false), e);
    }
    Form(m)
}

fn insert(m: &mut BTreeMap<Key, Expr>, k: Key, e: Expr) {
    if e.is_zero() {
        return;
    }
    let v = match m.remove(&k) {
        Some(old) => old.add(&e),
        None => e,
    };
    if !v.is_zero() {
        m.insert(k, v);
    }
}

fn product(a: &Form, b: &Form, tensor: bool, text: &str) -> Result<Form, GeometryError> {
    let mut m = BTreeMap::new();
    for ((ka, ta), ca) in &a.0 {
        for ((kb, tb), cb) in &b.0 {
            let mut k: Vec<usize> = ka.iter().chain(kb).copied().collect();
            if k.len() > 2 {
                return Err(perr(text, 0, "product of more than two differentials"));
            }
            let ordered = tensor || *ta || *tb;
            if !ordered {
                k.sort_unstable();
            }
            insert(&mut m, (k, ordered), ca.mul(cb));
        }
    }
    Ok(Form(m))
}

fn degree_zero(f: &Form) -> Option<Expr> {
    match f.0.len() {
        0 => None,
        1 => f.0.get(&(Vec::new(), false)).cloned(),
        _ => None,
    }
}

fn eval(chart: &Arc<Chart>, ast: &Ast, text: &str) -> Result<Form, GeometryError> {
    Ok(match ast {
        Ast::Ident { name, offset } => {
            if let Some(i) = name.strip_prefix('d').and_then(|c| chart.coordinate_index(c)) {
                let mut m = BTreeMap::new();
                m.insert((vec![i], false), Expr::one(chart));
                return Ok(Form(m));
            }
            if chart.var_index(name).is_none() {
                return Err(perr(text, *offset, format!("unknown name `{}`", name)));
            }
            scalar(Expr::from_ast(chart, ast, text)?)
        }
        Ast::Num(_) | Ast::Call { .. } => scalar(Expr::from_ast(chart, ast, text)?),
        Ast::Neg(a) => {
            let f = eval(chart, a, text)?;
            Form(f.0.into_iter().map(|(k, v)| (k, v.neg())).collect())
        }
        Ast::Bin(op, a, b) => {
            let (fa, fb) = (eval(chart, a, text)?, eval(chart, b, text)?);
            match op {
                BinOp::Add | BinOp::Sub => {
                    let mut m = fa.0;
                    for (k, v) in fb.0 {
                        insert(&mut m, k, if *op == BinOp::Sub { v.neg() } else { v });
                    }
                    Form(m)
                }
                BinOp::Mul => product(&fa, &fb, false, text)?,
                BinOp::Tensor => product(&fa, &fb, true, text)?,
                BinOp::Div => {
                    if fb.0.keys().any(|(k, _)| !k.is_empty()) {
                        return Err(perr(text, 0, "division by a differential"));
                    }
                    let d = degree_zero(&fb).ok_or_else(|| perr(text, 0, "division by zero"))?;
                    let inv = d.inv()?;
                    Form(fa.0.into_iter().map(|(k, v)| (k, v.mul(&inv))).collect())
                }
            }
        }
        Ast::Pow(a, e) => {
            let f = eval(chart, a, text)?;
            if f.0.keys().all(|(k, _)| k.is_empty()) {
                let base = degree_zero(&f).unwrap_or_else(|| Expr::zero(chart));
                let e = i32::try_from(*e).map_err(|_| perr(text, 0, "exponent out of range"))?;
                return Ok(scalar(base.pow(e)?));
            }
            match e {
                1 => f,
                2 => product(&f, &f, false, text)?,
                _ => return Err(perr(text, 0, "differentials may only be squared")),
            }
        }
    })
}

/// Parses a line element into a symmetric (0,2) tensor, returning any
/// warnings about the product convention.
pub fn parse_line_element(chart: &Arc<Chart>, text: &str) -> Result<(TensorField, Vec<String>), GeometryError> {
    let ast = parse_expr(text)?;
    let form = eval(chart, &ast, text)?;
    let n = chart.n_coords();
    let mut g = zeros(chart, n, n);
    let mut warnings = Vec::new();
    if ast.has_tensor() {
        warnings.push(CONVENTION_WARNING.to_string());
    }
    for ((k, ordered), c) in &form.0 {
        if k.len() != 2 {
            return Err(perr(text, 0, format!("term `{}` is not quadratic in the differentials", c)));
        }
        let (a, b) = (k[0], k[1]);
        g[a][b] = g[a][b].add(c);
        if !ordered && a != b {
            g[b][a] = g[b][a].add(c);
        }
    }
    for a in 0..n {
        for b in a + 1..n {
            if g[a][b] != g[b][a] {
                return Err(GeometryError::NotSymmetric(format!(
                    "line element components ({},{}) and ({},{}) differ",
                    chart.coordinate_names()[a],
                    chart.coordinate_names()[b],
                    chart.coordinate_names()[b],
                    chart.coordinate_names()[a]
                )));
            }
        }
    }
    Ok((TensorField::bilinear(chart, &g)?, warnings))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetrized_products() {
        let c = Chart::coordinates(&["x", "y"]).unwrap();
        let (g, w) = parse_line_element(&c, "dx^2 + 3 dx dy + x dy^2").unwrap();
        assert!(w.is_empty());
        let m = g.matrix();
        assert_eq!(m[0][1], Expr::int(&c, 3));
        assert_eq!(m[1][0], Expr::int(&c, 3));
        assert_eq!(m[1][1], Expr::parse(&c, "x").unwrap());
        let (g2, _) = parse_line_element(&c, "dx dx + (3/2)(dx*dy + dy*dx) + x dy dy").unwrap();
        assert_eq!(g, g2);
    }

    #[test]
    fn tensor_products_warn() {
        let c = Chart::coordinates(&["x", "y"]).unwrap();
        let (g, w) = parse_line_element(&c, "dx⊗dx + dx⊗dy + dy⊗dx + dy⊗dy").unwrap();
        assert_eq!(w.len(), 1);
        assert_eq!(g.matrix()[0][1], Expr::one(&c));
        assert!(matches!(parse_line_element(&c, "dx⊗dy"), Err(GeometryError::NotSymmetric(_))));
    }

    #[test]
    fn rejects_non_quadratic() {
        let c = Chart::coordinates(&["x", "y"]).unwrap();
        assert!(parse_line_element(&c, "dx + dy^2").is_err());
        assert!(parse_line_element(&c, "dx dy dx").is_err());
        assert!(parse_line_element(&c, "1/dx").is_err());
        assert!(parse_line_element(&c, "dz^2").is_err());
    }
}
