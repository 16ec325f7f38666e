//! Declarative model files.
//!
//! A model is a TOML document with a chart, named geometric objects whose
//! entries are expression strings, and a list of tasks.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::sync::Arc;

use geosym_core::exprfield::{Chart, Expr, ExprError, GeneratorDecl, ParseError};
use geosym_core::geometry::{asd_frame, levi_civita, parse_line_element, Connection, GeometryError, Slot, TensorField};
use geosym_core::liealg::linalg::{self, QMatrix, Q};
use geosym_core::liealg::{closure_from_fields, isotropy_representation, LieAlgebra, Representation};
use serde::Deserialize;
use sha2::{Digest, Sha256};
use thiserror::Error;
use toml::Spanned;

pub type Src = Spanned<String>;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("{context}: {message}")]
    Invalid { context: String, message: String },
}

fn invalid(context: impl Into<String>, message: impl ToString) -> ModelError {
    ModelError::Invalid { context: context.into(), message: message.to_string() }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub description: Option<String>,
    pub chart: ChartSpec,
    #[serde(default)]
    pub metrics: BTreeMap<String, MetricSpec>,
    #[serde(default)]
    pub endomorphisms: BTreeMap<String, Vec<Vec<Src>>>,
    #[serde(default)]
    pub connections: BTreeMap<String, ConnectionSpec>,
    #[serde(default)]
    pub fields: BTreeMap<String, Vec<Src>>,
    #[serde(default)]
    pub frames: BTreeMap<String, FrameSpec>,
    #[serde(default)]
    pub matrices: BTreeMap<String, MatrixSpec>,
    #[serde(default)]
    pub algebras: BTreeMap<String, AlgebraSpec>,
    #[serde(default)]
    pub representations: BTreeMap<String, RepresentationSpec>,
    #[serde(default)]
    pub tasks: Vec<TaskSpec>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChartSpec {
    pub coordinates: Vec<String>,
    /// Coordinates that get a `sin`/`cos` generator pair.
    #[serde(default)]
    pub angles: Vec<String>,
    #[serde(default)]
    pub generators: Vec<GeneratorSpec>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSpec {
    pub name: String,
    pub relation: Option<String>,
    #[serde(default)]
    pub derivatives: BTreeMap<String, String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricSpec {
    /// Symmetrized products: `dx dy` means `dx⊗dy + dy⊗dx`.
    pub line_element: Option<Src>,
    pub matrix: Option<Vec<Vec<Src>>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConnectionSpec {
    pub flat: Option<bool>,
    pub levi_civita: Option<String>,
    /// `"a b c" = expr` sets `Γ^a_bc` and `Γ^a_cb`.
    pub christoffel: Option<BTreeMap<String, Src>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameSpec {
    pub elements: Option<Vec<String>>,
    pub asd: Option<AsdSpec>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AsdSpec {
    pub metric: String,
    pub volume: Src,
    #[serde(default = "one")]
    pub orientation: i64,
}

fn one() -> i64 {
    1
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixSpec {
    pub rows: Option<Vec<Vec<Src>>>,
    pub block_diagonal: Option<Vec<String>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraSpec {
    pub fields: Option<Vec<String>>,
    pub dimension: Option<usize>,
    /// Nonzero brackets `[e_i, e_j]` with 1-based indices.
    pub brackets: Option<Vec<BracketSpec>>,
    pub labels: Option<Vec<String>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BracketSpec {
    pub pair: [usize; 2],
    pub value: Vec<Src>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RepresentationSpec {
    pub isotropy: Option<IsotropySpec>,
    pub algebra: Option<String>,
    pub matrices: Option<Vec<String>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IsotropySpec {
    pub fields: Vec<String>,
    pub point: Vec<Src>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TaskKind {
    CheckStructure,
    SymmetryBound,
    VerifyFields,
    Closure,
    InvariantConnections,
    CurvatureType,
    VanishingLocus,
    Obata,
    ZeroEigenspace,
}

impl TaskKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TaskKind::CheckStructure => "check-structure",
            TaskKind::SymmetryBound => "symmetry-bound",
            TaskKind::VerifyFields => "verify-fields",
            TaskKind::Closure => "closure",
            TaskKind::InvariantConnections => "invariant-connections",
            TaskKind::CurvatureType => "curvature-type",
            TaskKind::VanishingLocus => "vanishing-locus",
            TaskKind::Obata => "obata",
            TaskKind::ZeroEigenspace => "zero-eigenspace",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SystemKind {
    Killing,
    Invariance,
    Quaternionic,
    CProjective,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSpec {
    #[serde(rename = "type")]
    pub kind: SystemKind,
    pub metric: Option<String>,
    pub frame: Option<String>,
    pub complex: Option<String>,
    pub connection: Option<String>,
    pub tensor: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchSpec {
    pub base: String,
    pub direction: String,
    pub target: usize,
    #[serde(default = "default_height")]
    pub height: i64,
}

fn default_height() -> i64 {
    6
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expect {
    pub bound: Option<usize>,
    pub tables: Option<Vec<Vec<usize>>>,
    pub failing: Option<Vec<String>>,
    pub dimension: Option<usize>,
    pub center: Option<Vec<String>>,
    pub derived_dimension: Option<usize>,
    pub vanishing: Option<Vec<String>>,
    pub locus: Option<String>,
    pub kernel_per_block: Option<usize>,
    pub flat: Option<bool>,
}

impl Expect {
    pub fn is_empty(&self) -> bool {
        self.bound.is_none()
            && self.tables.is_none()
            && self.failing.is_none()
            && self.dimension.is_none()
            && self.center.is_none()
            && self.derived_dimension.is_none()
            && self.vanishing.is_none()
            && self.locus.is_none()
            && self.kernel_per_block.is_none()
            && self.flat.is_none()
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskSpec {
    pub name: String,
    pub kind: TaskKind,
    pub system: Option<SystemSpec>,
    pub fields: Option<Vec<String>>,
    pub field: Option<String>,
    pub metric: Option<String>,
    pub frame: Option<String>,
    pub complex: Option<String>,
    pub connection: Option<String>,
    pub algebra: Option<String>,
    pub representation: Option<String>,
    /// Tensor type `(covariant, contravariant)`, e.g. `"(2,1)"`.
    pub tensor_type: Option<String>,
    pub operator: Option<Vec<String>>,
    pub block_size: Option<usize>,
    pub search: Option<SearchSpec>,
    #[serde(default)]
    pub expect: Expect,
}

/// A frame of three endomorphism fields.
#[derive(Debug, Clone)]
pub struct Frame {
    pub elements: [TensorField; 3],
    /// Metric of an anti-self-dual frame.
    pub metric: Option<String>,
}

/// A parsed and built model.
pub struct Model {
    pub name: String,
    pub text: String,
    pub digest: String,
    pub file: ModelFile,
    pub chart: Arc<Chart>,
    pub metrics: BTreeMap<String, TensorField>,
    pub endomorphisms: BTreeMap<String, TensorField>,
    pub connections: BTreeMap<String, Connection>,
    pub fields: BTreeMap<String, TensorField>,
    pub frames: BTreeMap<String, Frame>,
    pub matrices: BTreeMap<String, QMatrix>,
    pub algebras: BTreeMap<String, LieAlgebra>,
    pub representations: BTreeMap<String, Representation>,
    pub warnings: Vec<String>,
}

/// 1-based line and column of a byte offset.
pub fn locate(text: &str, offset: usize) -> (usize, usize) {
    let offset = offset.min(text.len());
    let before = &text[..offset];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

impl Model {
    pub fn load(path: &Path) -> Result<Model, ModelError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ModelError::Io { path: path.display().to_string(), message: e.to_string() })?;
        let name = path.file_name().map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned());
        Model::parse(&name, &text)
    }

    pub fn parse(name: &str, text: &str) -> Result<Model, ModelError> {
        let file: ModelFile = toml::from_str(text).map_err(|e| {
            let (line, column) = e.span().map_or((1, 1), |s| locate(text, s.start));
            ModelError::Syntax { line, column, message: e.message().trim().to_string() }
        })?;
        let digest = hex(&Sha256::digest(text.as_bytes()));
        let chart = build_chart(&file.chart)?;
        let mut m = Model {
            name: name.to_string(),
            text: text.to_string(),
            digest,
            chart,
            metrics: BTreeMap::new(),
            endomorphisms: BTreeMap::new(),
            connections: BTreeMap::new(),
            fields: BTreeMap::new(),
            frames: BTreeMap::new(),
            matrices: BTreeMap::new(),
            algebras: BTreeMap::new(),
            representations: BTreeMap::new(),
            warnings: Vec::new(),
            file: ModelFile::default(),
        };
        m.build(&file)?;
        m.file = file;
        m.check_tasks()?;
        Ok(m)
    }

    pub fn task(&self, name: &str) -> Vec<&TaskSpec> {
        let by_name: Vec<&TaskSpec> = self.file.tasks.iter().filter(|t| t.name == name).collect();
        if !by_name.is_empty() {
            return by_name;
        }
        self.file.tasks.iter().filter(|t| t.kind.as_str() == name).collect()
    }

    fn position(&self, s: &Src, inner: usize) -> (usize, usize) {
        let start = s.span().start;
        let raw = &self.text[start..];
        let skip = if raw.starts_with("\"\"\"") || raw.starts_with("'''") {
            3 + raw[3..].chars().take_while(|c| *c == '\n' || *c == '\r').count()
        } else {
            1
        };
        locate(&self.text, start + skip + inner)
    }

    fn expr_error(&self, s: &Src, context: &str, e: ExprError) -> ModelError {
        match e {
            ExprError::Parse(p) => self.parse_error(s, context, p),
            other => {
                let (line, column) = self.position(s, 0);
                ModelError::Syntax { line, column, message: format!("{context}: {other}") }
            }
        }
    }

    fn parse_error(&self, s: &Src, context: &str, p: ParseError) -> ModelError {
        let (line, column) = self.position(s, p.offset);
        ModelError::Syntax { line, column, message: format!("{context}: {}", p.message) }
    }

    fn expr(&self, s: &Src, context: &str) -> Result<Expr, ModelError> {
        Expr::parse(&self.chart, s.get_ref()).map_err(|e| self.expr_error(s, context, e))
    }

    fn rational(&self, s: &Src, context: &str) -> Result<Q, ModelError> {
        self.expr(s, context)?.constant_value().ok_or_else(|| {
            let (line, column) = self.position(s, 0);
            ModelError::Syntax {
                line,
                column,
                message: format!("{context}: `{}` is not a rational constant", s.get_ref()),
            }
        })
    }

    fn expr_matrix(&self, rows: &[Vec<Src>], context: &str) -> Result<Vec<Vec<Expr>>, ModelError> {
        let n = self.chart.n_coords();
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(invalid(context, format!("expected a {n}x{n} matrix")));
        }
        rows.iter()
            .enumerate()
            .map(|(a, r)| r.iter().enumerate().map(|(b, s)| self.expr(s, &format!("{context}[{a}][{b}]"))).collect())
            .collect()
    }

    fn vector(&self, comps: &[Src], context: &str) -> Result<TensorField, ModelError> {
        let n = self.chart.n_coords();
        if comps.len() != n {
            return Err(invalid(context, format!("expected {n} components, got {}", comps.len())));
        }
        let es = comps
            .iter()
            .enumerate()
            .map(|(a, s)| self.expr(s, &format!("{context}[{a}]")))
            .collect::<Result<_, _>>()?;
        TensorField::vector(&self.chart, es).map_err(|e| invalid(context, e))
    }

    fn build(&mut self, f: &ModelFile) -> Result<(), ModelError> {
        for (name, spec) in &f.metrics {
            let ctx = format!("metrics.{name}");
            let g = match (&spec.line_element, &spec.matrix) {
                (Some(le), None) => {
                    let (g, warnings) = parse_line_element(&self.chart, le.get_ref()).map_err(|e| match e {
                        GeometryError::Parse(p) | GeometryError::Expr(ExprError::Parse(p)) => {
                            self.parse_error(le, &format!("{ctx}.line_element"), p)
                        }
                        other => invalid(&ctx, other),
                    })?;
                    self.warnings.extend(warnings.into_iter().map(|w| format!("{ctx}: {w}")));
                    g
                }
                (None, Some(rows)) => {
                    let m = self.expr_matrix(rows, &format!("{ctx}.matrix"))?;
                    let g = TensorField::bilinear(&self.chart, &m).map_err(|e| invalid(&ctx, e))?;
                    if !g.is_symmetric_in(0, 1) {
                        return Err(invalid(&ctx, "metric matrix is not symmetric"));
                    }
                    g
                }
                _ => return Err(invalid(&ctx, "give exactly one of `line_element` and `matrix`")),
            };
            self.metrics.insert(name.clone(), g);
        }
        for (name, rows) in &f.endomorphisms {
            let ctx = format!("endomorphisms.{name}");
            let m = self.expr_matrix(rows, &ctx)?;
            let t = TensorField::endomorphism(&self.chart, &m).map_err(|e| invalid(&ctx, e))?;
            self.endomorphisms.insert(name.clone(), t);
        }
        for (name, spec) in &f.connections {
            let ctx = format!("connections.{name}");
            let d = match (spec.flat, &spec.levi_civita, &spec.christoffel) {
                (Some(true), None, None) => Connection::flat(&self.chart),
                (None, Some(g), None) => {
                    let g = self.metrics.get(g).ok_or_else(|| invalid(&ctx, format!("unknown metric `{g}`")))?;
                    levi_civita(g).map_err(|e| invalid(&ctx, e))?
                }
                (None, None, Some(entries)) => self.christoffel(entries, &ctx)?,
                _ => return Err(invalid(&ctx, "give exactly one of `flat = true`, `levi_civita` and `christoffel`")),
            };
            self.connections.insert(name.clone(), d);
        }
        for (name, comps) in &f.fields {
            let v = self.vector(comps, &format!("fields.{name}"))?;
            self.fields.insert(name.clone(), v);
        }
        for (name, spec) in &f.frames {
            let ctx = format!("frames.{name}");
            let frame = match (&spec.elements, &spec.asd) {
                (Some(names), None) => {
                    let [a, b, c] = names.as_slice() else {
                        return Err(invalid(&ctx, "a frame has three elements"));
                    };
                    let get = |n: &String| {
                        self.endomorphisms
                            .get(n)
                            .cloned()
                            .ok_or_else(|| invalid(&ctx, format!("unknown endomorphism `{n}`")))
                    };
                    Frame { elements: [get(a)?, get(b)?, get(c)?], metric: None }
                }
                (None, Some(asd)) => {
                    let g = self
                        .metrics
                        .get(&asd.metric)
                        .ok_or_else(|| invalid(&ctx, format!("unknown metric `{}`", asd.metric)))?;
                    let w = self.expr(&asd.volume, &format!("{ctx}.asd.volume"))?;
                    let fr = asd_frame(g, &w, asd.orientation).map_err(|e| invalid(&ctx, e))?;
                    Frame { elements: fr.elements, metric: Some(asd.metric.clone()) }
                }
                _ => return Err(invalid(&ctx, "give exactly one of `elements` and `asd`")),
            };
            self.frames.insert(name.clone(), frame);
        }
        for (name, spec) in f.matrices.iter().filter(|(_, s)| s.block_diagonal.is_none()) {
            let ctx = format!("matrices.{name}");
            let (Some(rows), None) = (&spec.rows, &spec.block_diagonal) else {
                return Err(invalid(&ctx, "give exactly one of `rows` and `block_diagonal`"));
            };
            let m = rows
                .iter()
                .enumerate()
                .map(|(a, r)| {
                    r.iter().enumerate().map(|(b, s)| self.rational(s, &format!("{ctx}[{a}][{b}]"))).collect()
                })
                .collect::<Result<QMatrix, _>>()?;
            if m.iter().any(|r| r.len() != m.len()) {
                return Err(invalid(&ctx, "matrix must be square"));
            }
            self.matrices.insert(name.clone(), m);
        }
        for (name, spec) in f.matrices.iter().filter(|(_, s)| s.block_diagonal.is_some()) {
            let ctx = format!("matrices.{name}");
            let (None, Some(blocks)) = (&spec.rows, &spec.block_diagonal) else {
                return Err(invalid(&ctx, "give exactly one of `rows` and `block_diagonal`"));
            };
            let blocks = blocks
                .iter()
                .map(|b| {
                    self.matrices
                        .get(b)
                        .ok_or_else(|| invalid(&ctx, format!("unknown matrix `{b}` (blocks must be given by rows)")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            self.matrices.insert(name.clone(), block_diagonal(&blocks));
        }
        for (name, spec) in &f.algebras {
            let ctx = format!("algebras.{name}");
            let a = match (&spec.fields, &spec.dimension, &spec.brackets) {
                (Some(fields), None, None) => {
                    let vs = self.lookup_fields(fields, &ctx)?;
                    let a = closure_from_fields(&vs).map_err(|e| invalid(&ctx, e))?;
                    let labels = spec.labels.clone().unwrap_or_else(|| fields.clone());
                    LieAlgebra::new(a.structure_constants().to_vec(), Some(labels)).map_err(|e| invalid(&ctx, e))?
                }
                (None, Some(d), brackets) => {
                    let mut list = Vec::new();
                    for (k, b) in brackets.iter().flatten().enumerate() {
                        let [i, j] = b.pair;
                        if i == 0 || j == 0 || i > *d || j > *d {
                            return Err(invalid(&ctx, format!("bracket {k}: indices are 1-based and at most {d}")));
                        }
                        let v = b
                            .value
                            .iter()
                            .map(|s| self.rational(s, &format!("{ctx}.brackets[{k}]")))
                            .collect::<Result<Vec<_>, _>>()?;
                        list.push((i - 1, j - 1, v));
                    }
                    LieAlgebra::from_brackets(*d, &list, spec.labels.clone()).map_err(|e| invalid(&ctx, e))?
                }
                _ => return Err(invalid(&ctx, "give either `fields` or `dimension` with `brackets`")),
            };
            self.algebras.insert(name.clone(), a);
        }
        for (name, spec) in &f.representations {
            let ctx = format!("representations.{name}");
            let r = match (&spec.isotropy, &spec.algebra, &spec.matrices) {
                (Some(iso), None, None) => {
                    let vs = self.lookup_fields(&iso.fields, &ctx)?;
                    let n = self.chart.n_coords();
                    if iso.point.len() != n {
                        return Err(invalid(&ctx, format!("point needs {n} coordinates")));
                    }
                    let mut point = iso
                        .point
                        .iter()
                        .map(|s| self.rational(s, &format!("{ctx}.point")))
                        .collect::<Result<Vec<_>, _>>()?;
                    if self.chart.n_vars() != n {
                        return Err(invalid(&ctx, "isotropy points are supported on charts without generators"));
                    }
                    point.truncate(n);
                    isotropy_representation(&vs, &point).map_err(|e| invalid(&ctx, e))?
                }
                (None, Some(a), Some(ms)) => {
                    let alg =
                        self.algebras.get(a).ok_or_else(|| invalid(&ctx, format!("unknown algebra `{a}`")))?.clone();
                    let mats = ms
                        .iter()
                        .map(|m| {
                            self.matrices.get(m).cloned().ok_or_else(|| invalid(&ctx, format!("unknown matrix `{m}`")))
                        })
                        .collect::<Result<Vec<_>, _>>()?;
                    Representation::new(alg, mats).map_err(|e| invalid(&ctx, e))?
                }
                _ => return Err(invalid(&ctx, "give either `isotropy` or `algebra` with `matrices`")),
            };
            self.representations.insert(name.clone(), r);
        }
        Ok(())
    }

    fn christoffel(&self, entries: &BTreeMap<String, Src>, ctx: &str) -> Result<Connection, ModelError> {
        let mut gamma = TensorField::zeros(&self.chart, vec![Slot::Up, Slot::Down, Slot::Down]);
        for (key, value) in entries {
            let idx: Vec<usize> = key
                .split_whitespace()
                .map(|c| {
                    self.chart
                        .coordinate_index(c)
                        .ok_or_else(|| invalid(ctx, format!("unknown coordinate `{c}` in `{key}`")))
                })
                .collect::<Result<_, _>>()?;
            let [a, b, c] = idx[..] else {
                return Err(invalid(ctx, format!("key `{key}` must name three coordinates")));
            };
            let e = self.expr(value, &format!("{ctx}.christoffel.\"{key}\""))?;
            gamma.set(&[a, b, c], e.clone());
            gamma.set(&[a, c, b], e);
        }
        Connection::new(gamma).map_err(|e| invalid(ctx, e))
    }

    pub fn lookup_fields(&self, names: &[String], ctx: &str) -> Result<Vec<TensorField>, ModelError> {
        names
            .iter()
            .map(|n| self.fields.get(n).cloned().ok_or_else(|| invalid(ctx, format!("unknown field `{n}`"))))
            .collect()
    }

    fn check_tasks(&self) -> Result<(), ModelError> {
        let mut seen = BTreeSet::new();
        for t in &self.file.tasks {
            let ctx = format!("task `{}`", t.name);
            if !seen.insert(t.name.as_str()) {
                return Err(invalid(ctx, "duplicate task name"));
            }
            let refs = [
                (&t.metric, "metric", self.metrics.contains_key(t.metric.as_deref().unwrap_or(""))),
                (&t.frame, "frame", self.frames.contains_key(t.frame.as_deref().unwrap_or(""))),
                (&t.complex, "endomorphism", self.endomorphisms.contains_key(t.complex.as_deref().unwrap_or(""))),
                (&t.connection, "connection", self.connections.contains_key(t.connection.as_deref().unwrap_or(""))),
                (&t.field, "field", self.fields.contains_key(t.field.as_deref().unwrap_or(""))),
                (&t.algebra, "algebra", self.algebras.contains_key(t.algebra.as_deref().unwrap_or(""))),
                (
                    &t.representation,
                    "representation",
                    self.representations.contains_key(t.representation.as_deref().unwrap_or("")),
                ),
            ];
            for (value, what, ok) in refs {
                if let (Some(v), false) = (value, ok) {
                    return Err(invalid(&ctx, format!("unknown {what} `{v}`")));
                }
            }
            if let Some(fs) = &t.fields {
                self.lookup_fields(fs, &ctx)?;
            }
            for m in t.operator.iter().flatten() {
                if !self.matrices.contains_key(m) {
                    return Err(invalid(&ctx, format!("unknown matrix `{m}`")));
                }
            }
            if let Some(s) = &t.search {
                for m in [&s.base, &s.direction] {
                    if !self.matrices.contains_key(m) {
                        return Err(invalid(&ctx, format!("unknown matrix `{m}`")));
                    }
                }
            }
            if let Some(tt) = &t.tensor_type {
                parse_tensor_type(tt)
                    .ok_or_else(|| invalid(&ctx, format!("tensor type `{tt}` is not of the form (r,s)")))?;
            }
            if let Some(s) = &t.system {
                self.check_system(s, &ctx)?;
            }
            let needs = |ok: bool, what: &str| {
                if ok {
                    Ok(())
                } else {
                    Err(invalid(&ctx, format!("{} needs {what}", t.kind.as_str())))
                }
            };
            match t.kind {
                TaskKind::SymmetryBound => needs(t.system.is_some(), "`system`")?,
                TaskKind::VerifyFields => needs(t.system.is_some() && t.fields.is_some(), "`system` and `fields`")?,
                TaskKind::Closure => needs(t.fields.is_some() || t.algebra.is_some(), "`fields` or `algebra`")?,
                TaskKind::InvariantConnections => needs(t.representation.is_some(), "`representation`")?,
                TaskKind::CurvatureType => {
                    needs(t.connection.is_some() && t.complex.is_some(), "`connection` and `complex`")?
                }
                TaskKind::VanishingLocus => needs(t.field.is_some(), "`field`")?,
                TaskKind::Obata => needs(t.frame.is_some(), "`frame`")?,
                TaskKind::ZeroEigenspace => {
                    needs(t.operator.is_some() || t.search.is_some(), "`operator` or `search`")?
                }
                TaskKind::CheckStructure => needs(
                    t.metric.is_some() || t.frame.is_some() || t.complex.is_some() || t.connection.is_some(),
                    "one of `metric`, `frame`, `complex`, `connection`",
                )?,
            }
        }
        Ok(())
    }

    fn check_system(&self, s: &SystemSpec, ctx: &str) -> Result<(), ModelError> {
        let need = |v: &Option<String>, what: &str, ok: &dyn Fn(&str) -> bool| match v {
            Some(n) if ok(n) => Ok(()),
            Some(n) => Err(invalid(ctx, format!("unknown {what} `{n}`"))),
            None => Err(invalid(ctx, format!("system needs `{what}`"))),
        };
        match s.kind {
            SystemKind::Killing => need(&s.metric, "metric", &|n| self.metrics.contains_key(n)),
            SystemKind::Invariance => need(&s.tensor, "tensor", &|n| self.tensor(n).is_some()),
            SystemKind::Quaternionic => {
                need(&s.frame, "frame", &|n| self.frames.contains_key(n))?;
                need(&s.metric, "metric", &|n| self.metrics.contains_key(n))
            }
            SystemKind::CProjective => {
                need(&s.complex, "complex", &|n| self.endomorphisms.contains_key(n))?;
                need(&s.connection, "connection", &|n| self.connections.contains_key(n))
            }
        }
    }

    /// A metric, endomorphism or vector field by name.
    pub fn tensor(&self, name: &str) -> Option<&TensorField> {
        self.metrics.get(name).or_else(|| self.endomorphisms.get(name)).or_else(|| self.fields.get(name))
    }
}

fn build_chart(spec: &ChartSpec) -> Result<Arc<Chart>, ModelError> {
    let mut decls = Vec::new();
    for a in &spec.angles {
        let (c, s) = (format!("cos_{a}"), format!("sin_{a}"));
        decls.push(GeneratorDecl::free(&c).derivative(a, &format!("-{s}")));
        decls.push(GeneratorDecl::root(&s, &format!("{s}^2 = 1 - {c}^2")).derivative(a, &c));
    }
    for g in &spec.generators {
        let mut d = match &g.relation {
            Some(r) => GeneratorDecl::root(&g.name, r),
            None => GeneratorDecl::free(&g.name),
        };
        for (coord, e) in &g.derivatives {
            d = d.derivative(coord, e);
        }
        decls.push(d);
    }
    let coords: Vec<&str> = spec.coordinates.iter().map(String::as_str).collect();
    Chart::new(&coords, decls).map_err(|e| invalid("chart", e))
}

pub fn block_diagonal(blocks: &[&QMatrix]) -> QMatrix {
    let n: usize = blocks.iter().map(|b| b.len()).sum();
    let mut m = linalg::zeros(n, n);
    let mut at = 0;
    for b in blocks {
        for (i, row) in b.iter().enumerate() {
            for (j, x) in row.iter().enumerate() {
                m[at + i][at + j] = x.clone();
            }
        }
        at += b.len();
    }
    m
}

/// Slots of a tensor type `(r,s)`: `r` covariant then `s` contravariant.
pub fn parse_tensor_type(s: &str) -> Option<Vec<Slot>> {
    let inner = s.trim().strip_prefix('(')?.strip_suffix(')')?;
    let (r, c) = inner.split_once(',')?;
    let (r, c): (usize, usize) = (r.trim().parse().ok()?, c.trim().parse().ok()?);
    Some(std::iter::repeat_n(Slot::Down, r).chain(std::iter::repeat_n(Slot::Up, c)).collect())
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
