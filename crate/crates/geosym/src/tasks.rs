//! Task execution.

use std::collections::BTreeSet;
use std::time::Instant;

use geosym_core::geometry::connection::bianchi_defect;
use geosym_core::geometry::structure::nijenhuis;
use geosym_core::geometry::{
    check_hypercomplex_frame, curvature_type_split, levi_civita, matrix, ricci, Connection, TensorField,
};
use geosym_core::liealg::linalg::{self, QMatrix};
use geosym_core::liealg::{equivariant_tensors, kernel_of, kernel_parameter_search, vanishing_locus, LieAlgebra};
use geosym_core::prolong::{solution_bound_seeded, verify_solution};
use geosym_core::symsys::{
    cprojective_symmetry_system, invariance_system, obata_solve, quaternionic_symmetry_system, LinearPDESystem,
};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::model::{hex, parse_tensor_type, Model, SystemKind, SystemSpec, TaskKind, TaskSpec};
use crate::report::{Outcome, TaskReport};

#[derive(Debug, Clone, Copy)]
pub struct RunOptions {
    pub seed: u64,
    pub max_stage: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { seed: geosym_core::prolong::DEFAULT_SEED, max_stage: geosym_core::prolong::DEFAULT_MAX_STAGE }
    }
}

/// Collected values and expectation mismatches of one task.
struct Run {
    report: TaskReport,
    expected: bool,
}

impl Run {
    fn set(&mut self, key: &str, v: Value) {
        self.report.values.insert(key.to_string(), v);
    }

    fn expect<T: PartialEq + std::fmt::Debug>(&mut self, what: &str, expected: Option<T>, got: T) {
        if let Some(e) = expected {
            self.expected = true;
            if e != got {
                self.report.mismatches.push(format!("{what}: expected {e:?}, got {got:?}"));
            }
        }
    }
}

pub fn run_task(model: &Model, task: &TaskSpec, opts: RunOptions) -> TaskReport {
    let start = Instant::now();
    let mut h = Sha256::new();
    h.update(model.digest.as_bytes());
    h.update(format!("\n{}\n{}\n{}", task.name, opts.seed, opts.max_stage).as_bytes());
    let mut run = Run { report: TaskReport::new(&task.name, task.kind.as_str(), hex(&h.finalize())), expected: false };
    let result = match task.kind {
        TaskKind::CheckStructure => check_structure(model, task, &mut run),
        TaskKind::SymmetryBound => symmetry_bound(model, task, opts, &mut run),
        TaskKind::VerifyFields => verify_fields(model, task, &mut run),
        TaskKind::Closure => closure(model, task, &mut run),
        TaskKind::InvariantConnections => invariant_connections(model, task, &mut run),
        TaskKind::CurvatureType => curvature_type(model, task, &mut run),
        TaskKind::VanishingLocus => locus(model, task, &mut run),
        TaskKind::Obata => obata(model, task, &mut run),
        TaskKind::ZeroEigenspace => zero_eigenspace(model, task, &mut run),
    };
    let mut report = run.report;
    report.outcome = match result {
        Err(e) => {
            report.error = Some(e);
            Outcome::Error
        }
        Ok(_) if !report.mismatches.is_empty() => Outcome::Fail,
        Ok(Some(o)) => o,
        Ok(None) if run.expected => Outcome::Pass,
        Ok(None) => Outcome::Value,
    };
    report.elapsed = start.elapsed();
    report
}

type TaskResult = Result<Option<Outcome>, String>;

fn named<'a, T>(map: &'a std::collections::BTreeMap<String, T>, name: &Option<String>) -> Result<&'a T, String> {
    let n = name.as_deref().ok_or("missing reference")?;
    map.get(n).ok_or_else(|| format!("unknown name `{n}`"))
}

fn build_system(model: &Model, s: &SystemSpec) -> Result<LinearPDESystem, String> {
    Ok(match s.kind {
        SystemKind::Killing => invariance_system(named(&model.metrics, &s.metric)?),
        SystemKind::Invariance => {
            let n = s.tensor.as_deref().unwrap_or_default();
            invariance_system(model.tensor(n).ok_or_else(|| format!("unknown tensor `{n}`"))?)
        }
        SystemKind::Quaternionic => {
            let frame = named(&model.frames, &s.frame)?;
            quaternionic_symmetry_system(&frame.elements, named(&model.metrics, &s.metric)?)
                .map_err(|e| e.to_string())?
        }
        SystemKind::CProjective => cprojective_symmetry_system(
            named(&model.endomorphisms, &s.complex)?,
            named(&model.connections, &s.connection)?,
        )
        .map_err(|e| e.to_string())?,
    })
}

fn record_checks(run: &mut Run, task: &TaskSpec, checks: Vec<(String, bool)>) {
    let failing: Vec<String> = checks.iter().filter(|(_, ok)| !ok).map(|(n, _)| n.clone()).collect();
    let map: serde_json::Map<String, Value> = checks.into_iter().map(|(n, ok)| (n, json!(ok))).collect();
    run.set("checks", Value::Object(map));
    let expected: BTreeSet<String> = task.expect.failing.iter().flatten().cloned().collect();
    run.expected = true;
    let got: BTreeSet<String> = failing.into_iter().collect();
    if got != expected {
        run.report.mismatches.push(format!("failing checks: expected {expected:?}, got {got:?}"));
    }
}

fn is_skew(a: &TensorField, g: &TensorField) -> bool {
    let ga = matrix::mul(&g.matrix(), &a.matrix());
    matrix::is_zero(&matrix::add(&ga, &matrix::transpose(&ga)))
}

fn check_structure(model: &Model, task: &TaskSpec, run: &mut Run) -> TaskResult {
    let mut checks = Vec::new();
    if let Some(name) = &task.metric {
        let g = &model.metrics[name];
        match levi_civita(g) {
            Ok(d) => {
                checks.push(("nondegenerate".to_string(), true));
                let r = d.curvature();
                checks.push(("Bianchi identity".to_string(), bianchi_defect(&r).is_zero()));
                checks.push(("Ricci = 0".to_string(), ricci(&r).is_zero_checked().map_err(|e| e.to_string())?));
            }
            Err(_) => checks.push(("nondegenerate".to_string(), false)),
        }
    }
    if let Some(name) = &task.frame {
        let frame = &model.frames[name];
        let [a, b, c] = &frame.elements;
        match &frame.metric {
            None => checks.extend(check_hypercomplex_frame(a, b, c).map_err(|e| e.to_string())?.checks),
            Some(g) => {
                let g = &model.metrics[g];
                let anti = |x: &TensorField, y: &TensorField| x.compose(y).add(&y.compose(x)).is_zero();
                checks.push(("elements are g-skew".to_string(), [a, b, c].iter().all(|x| is_skew(x, g))));
                checks.push(("A1 A2 = -A2 A1".to_string(), anti(a, b)));
                checks.push(("A2 A3 = -A3 A2".to_string(), anti(b, c)));
                checks.push(("A3 A1 = -A1 A3".to_string(), anti(c, a)));
                checks.push(("A1 A2 = A3".to_string(), a.compose(b) == *c));
            }
        }
    }
    if let Some(name) = &task.complex {
        let j = &model.endomorphisms[name];
        let minus_id = TensorField::identity(j.chart()).scale(&geosym_core::exprfield::Expr::int(j.chart(), -1));
        checks.push(("J^2 = -1".to_string(), j.compose(j) == minus_id));
        checks.push(("N_J = 0".to_string(), nijenhuis(j).is_zero()));
    }
    if let Some(name) = &task.connection {
        let d = &model.connections[name];
        checks.push(("torsion-free".to_string(), d.is_torsion_free()));
        if let Some(j) = &task.complex {
            checks.push(("DJ = 0".to_string(), d.covariant_derivative(&model.endomorphisms[j]).is_zero()));
        }
    }
    record_checks(run, task, checks);
    Ok(None)
}

fn symmetry_bound(model: &Model, task: &TaskSpec, opts: RunOptions, run: &mut Run) -> TaskResult {
    let s = build_system(model, task.system.as_ref().ok_or("missing system")?)?;
    run.set("equations", json!(s.len()));
    let r = solution_bound_seeded(&s, opts.max_stage, opts.seed).map_err(|e| e.to_string())?;
    let tables: Vec<Vec<usize>> = r.table.iter().map(|st| st.descending()).collect();
    run.set("bound", json!(r.bound));
    run.report.symbol_tables = tables.clone();
    run.report.points = r.points.iter().map(|p| p.to_string()).collect();
    run.report.warnings.extend(r.warnings);
    run.expect("symbol tables", task.expect.tables.clone(), tables);
    if task.expect.bound.is_some() {
        run.expect("bound", task.expect.bound.map(Some), r.bound);
    }
    Ok(r.bound.is_none().then_some(Outcome::Inconclusive))
}

fn verify_fields(model: &Model, task: &TaskSpec, run: &mut Run) -> TaskResult {
    let s = build_system(model, task.system.as_ref().ok_or("missing system")?)?;
    let mut checks = Vec::new();
    let mut residuals = serde_json::Map::new();
    for name in task.fields.iter().flatten() {
        let r = verify_solution(&s, &model.fields[name]).map_err(|e| e.to_string())?;
        residuals.insert(name.clone(), json!(r.residuals.len()));
        checks.push((name.clone(), r.ok()));
    }
    run.set("nonzero_residuals", Value::Object(residuals));
    record_checks(run, task, checks);
    Ok(None)
}

fn closure(model: &Model, task: &TaskSpec, run: &mut Run) -> TaskResult {
    let a: LieAlgebra = match (&task.algebra, &task.fields) {
        (Some(n), _) => model.algebras[n].clone(),
        (None, Some(fields)) => {
            let vs = model.lookup_fields(fields, "closure").map_err(|e| e.to_string())?;
            let a = geosym_core::liealg::closure_from_fields(&vs).map_err(|e| e.to_string())?;
            LieAlgebra::new(a.structure_constants().to_vec(), Some(fields.clone())).map_err(|e| e.to_string())?
        }
        (None, None) => return Err("closure needs `fields` or `algebra`".into()),
    };
    let d = a.dim();
    let mut brackets = Vec::new();
    for i in 0..d {
        for j in i + 1..d {
            let b = a.bracket(&a.basis(i), &a.basis(j));
            if !linalg::is_zero_vec(&b) {
                brackets.push(format!("[{}, {}] = {}", a.labels()[i], a.labels()[j], a.element_label(&b)));
            }
        }
    }
    let center: Vec<String> = a.center().basis.iter().map(|v| a.element_label(v)).collect();
    let derived = a.derived_algebra().dim();
    run.set("dimension", json!(d));
    run.set("brackets", json!(brackets));
    run.set("center", json!(center));
    run.set("derived_dimension", json!(derived));
    run.expect("dimension", task.expect.dimension, d);
    run.expect("center", task.expect.center.clone(), center);
    run.expect("derived dimension", task.expect.derived_dimension, derived);
    Ok(None)
}

fn invariant_connections(model: &Model, task: &TaskSpec, run: &mut Run) -> TaskResult {
    let r = named(&model.representations, &task.representation)?;
    let tt = task.tensor_type.clone().unwrap_or_else(|| "(2,1)".into());
    let slots = parse_tensor_type(&tt).ok_or("bad tensor type")?;
    let basis = equivariant_tensors(r, &slots).map_err(|e| e.to_string())?;
    run.set("tensor_type", json!(tt));
    run.set("module_dimension", json!(r.module_dim()));
    run.set("dimension", json!(basis.len()));
    run.expect("dimension", task.expect.dimension, basis.len());
    Ok(None)
}

fn curvature_type(model: &Model, task: &TaskSpec, run: &mut Run) -> TaskResult {
    let d: &Connection = named(&model.connections, &task.connection)?;
    let j = named(&model.endomorphisms, &task.complex)?;
    let split = curvature_type_split(&d.curvature(), j).map_err(|e| e.to_string())?;
    let parts = [("r20", &split.r20), ("r11", &split.r11), ("r02", &split.r02)];
    let mut vanishing = Vec::new();
    for (n, t) in parts {
        let zero = t.is_zero_checked().map_err(|e| e.to_string())?;
        run.set(&format!("{n}_zero"), json!(zero));
        if zero {
            vanishing.push(n.to_string());
        }
    }
    run.set("vanishing", json!(vanishing));
    let expected: Option<BTreeSet<String>> = task.expect.vanishing.as_ref().map(|v| v.iter().cloned().collect());
    run.expect("vanishing parts", expected, vanishing.into_iter().collect());
    Ok(None)
}

fn locus(model: &Model, task: &TaskSpec, run: &mut Run) -> TaskResult {
    let x = named(&model.fields, &task.field)?;
    let l = vanishing_locus(x).map_err(|e| e.to_string())?;
    run.set("locus", json!(l.to_string()));
    run.set("dimension", json!(l.dim()));
    run.expect("locus", task.expect.locus.clone(), l.to_string());
    if task.expect.dimension.is_some() {
        run.expect("dimension", task.expect.dimension.map(Some), l.dim());
    }
    Ok(None)
}

fn obata(model: &Model, task: &TaskSpec, run: &mut Run) -> TaskResult {
    let frame = named(&model.frames, &task.frame)?;
    let [i, j, k] = &frame.elements;
    let d = obata_solve(i, j, k).map_err(|e| e.to_string())?;
    let names = model.chart.coordinate_names();
    let symbols: Vec<String> = d
        .christoffel()
        .nonzero_indices()
        .iter()
        .map(|ix| format!("Γ^{}_{}{} = {}", names[ix[0]], names[ix[1]], names[ix[2]], d.christoffel().get(ix)))
        .collect();
    let flat = symbols.is_empty();
    run.set("christoffel", json!(symbols));
    run.set("flat", json!(flat));
    run.expect("flat", task.expect.flat, flat);
    Ok(None)
}

fn operator(model: &Model, names: &[String]) -> Result<QMatrix, String> {
    let mut it = names.iter().map(|n| model.matrices.get(n).ok_or_else(|| format!("unknown matrix `{n}`")));
    let first = it.next().ok_or("empty operator")??.clone();
    it.try_fold(first, |acc, m| {
        let m = m?;
        if m.len() != acc.len() {
            return Err("operator terms differ in size".to_string());
        }
        Ok(linalg::add(&acc, m))
    })
}

fn zero_eigenspace(model: &Model, task: &TaskSpec, run: &mut Run) -> TaskResult {
    if let Some(names) = &task.operator {
        let op = operator(model, names)?;
        let k = kernel_of(&op);
        run.set("dimension", json!(k.dim()));
        run.set("rank", json!(linalg::rank(&op)));
        let basis: Vec<Vec<String>> = k.basis.iter().map(|v| v.iter().map(|x| x.to_string()).collect()).collect();
        run.set("kernel", json!(basis));
        run.expect("dimension", task.expect.dimension, k.dim());
        if let Some(b) = task.block_size {
            if b == 0 || op.len() % b != 0 {
                return Err(format!("block size {b} does not divide {}", op.len()));
            }
            let per_block: Vec<usize> = (0..op.len() / b)
                .map(|c| {
                    let block: QMatrix =
                        op[c * b..(c + 1) * b].iter().map(|r| r[c * b..(c + 1) * b].to_vec()).collect();
                    kernel_of(&block).dim()
                })
                .collect();
            run.set("kernel_per_block", json!(per_block));
            if let Some(e) = task.expect.kernel_per_block {
                run.expect("kernel per block", Some(vec![e; per_block.len()]), per_block);
            }
        }
    }
    if let Some(s) = &task.search {
        let (x, y) = (&model.matrices[&s.base], &model.matrices[&s.direction]);
        if x.len() != y.len() {
            return Err("search matrices differ in size".into());
        }
        let found: Vec<String> =
            kernel_parameter_search(x, y, s.target, s.height).iter().map(|t| t.to_string()).collect();
        run.set("search_target", json!(s.target));
        run.set("parameters", json!(found));
    }
    Ok(None)
}
