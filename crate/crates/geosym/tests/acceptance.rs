//! Acceptance criteria, one line of output per criterion.
//!
//! Runs without the libtest harness so the summary lines are always shown.

use std::panic::{self, AssertUnwindSafe};
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

use geosym::model::Model;
use geosym::report::{Outcome, TaskReport};
use geosym::tasks::RunOptions;
use geosym_core::exprfield::{q, Chart, Expr};
use geosym_core::geometry::connection::{bianchi_defect, ricci};
use geosym_core::geometry::{levi_civita, lie_derivative, parse_line_element, TensorField};
use geosym_core::prolong::{prolong, solution_bound, symbol_dimensions, total_derivative, GenericPoint, SymbolStage};
use geosym_core::symsys::{
    cprojective_symmetry_system, invariance_system, quaternionic_symmetry_system, Jet, LinearForm, LinearPDESystem,
    MultiIndex,
};
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($msg)+));
        }
    };
}

fn model(name: &str) -> Model {
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "corpus", name].iter().collect();
    Model::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn task(m: &Model, name: &str) -> Result<TaskReport, String> {
    let report = geosym::run(m, Some(name), RunOptions::default()).map_err(|e| e.to_string())?;
    let t = report.tasks.into_iter().next().ok_or("no task ran")?;
    if let Some(e) = &t.error {
        return Err(format!("{name}: {e}"));
    }
    Ok(t)
}

fn value<'a>(t: &'a TaskReport, key: &str) -> Result<&'a Value, String> {
    t.values.get(key).ok_or_else(|| format!("{}: no value `{key}`", t.name))
}

fn symmetry_fields_certified(t: &TaskReport, names: &[&str]) -> Result<(), String> {
    let checks = value(t, "checks")?;
    for n in names {
        ensure!(checks[n] == json!(true), "{}: {n} is not certified", t.name);
    }
    Ok(())
}

fn eh_symbol_tables() -> Check {
    let start = Instant::now();
    let t = task(&model("eguchi_hanson.model"), "symmetry-bound")?;
    let elapsed = start.elapsed();
    let want: Vec<Vec<usize>> = vec![vec![7, 4], vec![4, 7, 4], vec![0, 4, 4, 4], vec![0, 0, 0, 1, 3]];
    ensure!(t.symbol_tables == want, "tables {:?}", t.symbol_tables);
    ensure!(*value(&t, "bound")? == json!(4), "bound {}", value(&t, "bound")?);
    ensure!(t.outcome == Outcome::Pass, "outcome {:?}", t.outcome);
    ensure!(elapsed.as_secs() < 300, "took {elapsed:?}");
    Ok(format!("tables {:?}, bound 4", t.symbol_tables))
}

fn eh_isometries() -> Check {
    let m = model("eguchi_hanson.model");
    let v = ["v1", "v2", "v3", "v4"];
    symmetry_fields_certified(&task(&m, "killing-fields")?, &v)?;
    symmetry_fields_certified(&task(&m, "quaternionic-fields")?, &v)?;
    let a = task(&m, "isometry-algebra")?;
    ensure!(*value(&a, "dimension")? == json!(4), "dimension {}", value(&a, "dimension")?);
    ensure!(*value(&a, "center")? == json!(["v1"]), "center {}", value(&a, "center")?);
    ensure!(*value(&a, "derived_dimension")? == json!(3), "derived {}", value(&a, "derived_dimension")?);
    Ok("v1..v4 Killing and quaternionic; algebra dim 4, center <v1>, derived dim 3".into())
}

fn flat_quaternionic_bound() -> Check {
    let t = task(&model("flat4.model"), "symmetry-bound")?;
    let n = 1;
    let want = 4 * (n + 1) * (n + 1) - 1;
    ensure!(*value(&t, "bound")? == json!(want), "bound {}", value(&t, "bound")?);
    Ok(format!("bound {want}"))
}

fn submaximal_cprojective() -> Check {
    let m = model("submax_cprojective_n2.model");
    let fields = ["t1", "t1i", "t2", "t2i", "h", "hi", "s", "si"];
    symmetry_fields_certified(&task(&m, "symmetry-fields")?, &fields)?;
    let n = 2;
    let c = task(&m, "closure")?;
    ensure!(*value(&c, "dimension")? == json!(2 * n * n - 2 * n + 4), "dimension {}", value(&c, "dimension")?);
    let e = task(&m, "invariant-connections")?;
    ensure!(*value(&e, "tensor_type")? == json!("(2,1)"), "tensor type {}", value(&e, "tensor_type")?);
    ensure!(*value(&e, "dimension")? == json!(0), "invariants {}", value(&e, "dimension")?);
    let k = task(&m, "curvature-type")?;
    ensure!(*value(&k, "r20_zero")? == json!(true), "(2,0) part is not zero");
    ensure!(*value(&k, "r02_zero")? == json!(true), "(0,2) part is not zero");
    ensure!(*value(&k, "r11_zero")? == json!(false), "curvature vanishes entirely");
    Ok("8 fields certified, algebra dim 8, no invariant (2,1) tensors, curvature of type (1,1)".into())
}

fn block_kernels_and_locus() -> Check {
    let m = model("blocks_v.model");
    let n = 2;
    let z = task(&m, "zero-eigenspace")?;
    ensure!(*value(&z, "kernel_per_block")? == json!(vec![2; n]), "per block {}", value(&z, "kernel_per_block")?);
    ensure!(*value(&z, "dimension")? == json!(2 * n), "dimension {}", value(&z, "dimension")?);
    let l = task(&m, "vanishing-locus")?;
    let want: Vec<String> = (1..=4 * n).filter(|j| j % 4 == 3 || j % 4 == 0).map(|j| format!("h{j} = 0")).collect();
    ensure!(*value(&l, "locus")? == json!(want.join(", ")), "locus {}", value(&l, "locus")?);
    Ok(format!("kernel 2 per block ({} total); locus {}", 2 * n, want.join(", ")))
}

fn eh_ricci_flat() -> Check {
    let m = model("eguchi_hanson.model");
    let g = m.metrics.get("g").ok_or("no metric g")?;
    let r = levi_civita(g).map_err(|e| e.to_string())?.curvature();
    ensure!(!r.is_zero(), "curvature vanishes, metric is flat");
    ensure!(ricci(&r).is_zero_checked().map_err(|e| e.to_string())?, "Ricci tensor is not zero");
    Ok("Ricci contraction of the Levi-Civita curvature is identically zero".into())
}

fn to_f64(v: &BigRational) -> f64 {
    v.to_f64().unwrap()
}

fn random_poly(rng: &mut ChaCha8Rng, vars: &[&str]) -> String {
    let mut terms = Vec::new();
    for _ in 0..rng.gen_range(1..=3) {
        let mut t = rng.gen_range(-4i64..=4).to_string();
        for v in vars {
            let e = rng.gen_range(0..=2);
            if e > 0 {
                t.push_str(&format!(" {v}^{e}"));
            }
        }
        terms.push(format!("({t})"));
    }
    terms.join(" + ")
}

/// A random rational function whose denominator has no real zeros.
fn random_expr(c: &Arc<Chart>, rng: &mut ChaCha8Rng, vars: &[&str]) -> Expr {
    let v = vars[rng.gen_range(0..vars.len())];
    let den = format!("1 + {} {v}^2", rng.gen_range(1..=5));
    Expr::parse(c, &format!("({})/({den})", random_poly(rng, vars))).unwrap()
}

fn random_point(rng: &mut ChaCha8Rng, n: usize) -> Vec<BigRational> {
    (0..n).map(|_| q(rng.gen_range(-9..=9), rng.gen_range(1..=7))).collect()
}

fn kernel_laws(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let vars = ["x", "y", "z"];
    let c = Chart::coordinates(&vars).unwrap();
    for _ in 0..50 {
        let [a, b, d] = [0; 3].map(|_| random_expr(&c, rng, &vars));
        ensure!(a.add(&b) == b.add(&a), "addition is not commutative");
        ensure!(a.mul(&b).mul(&d) == a.mul(&b.mul(&d)), "multiplication is not associative");
        ensure!(a.mul(&b.add(&d)) == a.mul(&b).add(&a.mul(&d)), "distributivity fails");
        ensure!(a.sub(&a).is_zero(), "a - a is not zero");
        if !a.is_zero() {
            ensure!(a.mul(&a.inv().unwrap()).is_one(), "a / a is not one");
        }
        for i in 0..3 {
            let lhs = a.mul(&b).diff(i);
            ensure!(lhs == a.diff(i).mul(&b).add(&a.mul(&b.diff(i))), "product rule fails");
            ensure!(a.diff(i).diff((i + 1) % 3) == a.diff((i + 1) % 3).diff(i), "partials do not commute");
        }
        let p = random_point(rng, 3);
        let ev = |e: &Expr| e.evaluate(&p).unwrap();
        ensure!(ev(&a.mul(&b).add(&d)) == ev(&a) * ev(&b) + ev(&d), "evaluation is not a homomorphism");
    }
    Ok(())
}

fn leibniz(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let vars = ["x", "y"];
    let c = Chart::coordinates(&vars).unwrap();
    for _ in 0..5 {
        let mut f = LinearForm::new();
        f.add_term(Jet::first(0, 1), &random_expr(&c, rng, &vars));
        f.add_term(Jet::first(1, 0), &random_expr(&c, rng, &vars));
        f.add_term(Jet::value(1), &random_expr(&c, rng, &vars));
        let s = LinearPDESystem::new(&c, vec![f.clone()]);
        let p = prolong(&prolong(&s));
        let e = p.equations().iter().find(|e| e.derived == MultiIndex::unit(0).plus(1)).ok_or("missing D_xy")?;
        ensure!(p.form(e) == total_derivative(&total_derivative(&f, 0), 1), "Leibniz expansion differs");
    }
    let vars = ["x", "y", "z"];
    let c = Chart::coordinates(&vars).unwrap();
    for _ in 0..5 {
        let g = TensorField::from_fn(&c, vec![geosym_core::geometry::Slot::Down; 2], |_| random_expr(&c, rng, &vars));
        let x = TensorField::vector(&c, (0..3).map(|_| random_expr(&c, rng, &vars)).collect()).unwrap();
        let f = random_expr(&c, rng, &vars);
        let lhs = lie_derivative(&g.scale(&f), &x).unwrap();
        let rhs = g.scale(&x.derivative_of(&f)).add(&lie_derivative(&g, &x).unwrap().scale(&f));
        ensure!(lhs == rhs, "L_X(f g) differs from X(f) g + f L_X g");
    }
    Ok(())
}

fn bianchi() -> Result<(), String> {
    let sub = model("submax_cprojective_n2.model");
    let eh = model("eguchi_hanson.model");
    let curvatures =
        [sub.connections["D"].curvature(), levi_civita(&eh.metrics["g"]).map_err(|e| e.to_string())?.curvature()];
    for r in &curvatures {
        ensure!(!r.is_zero(), "test curvature is zero");
        ensure!(bianchi_defect(r).is_zero(), "first Bianchi identity fails");
    }
    Ok(())
}

fn finite_differences(rng: &mut ChaCha8Rng) -> Result<f64, String> {
    let vars = ["x", "y", "z"];
    let c = Chart::coordinates(&vars).unwrap();
    let (g, _) = parse_line_element(&c, "(1 + x^2) dx^2 + 2 y dx dz + dy^2 / (1 + z^2) + (2 + x y) dz^2").unwrap();
    let h = q(1, 100_000);
    let mut worst: f64 = 0.0;
    for _ in 0..3 {
        let x = TensorField::vector(&c, (0..3).map(|_| random_expr(&c, rng, &vars)).collect()).unwrap();
        let l = lie_derivative(&g, &x).unwrap();
        let p = random_point(rng, 3);
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
                let err = (oracle - exact).abs() / exact.abs().max(1.0);
                ensure!(err <= 1e-6, "({a},{b}): difference quotient {oracle} vs {exact}");
                worst = worst.max(err);
            }
        }
    }
    Ok(worst)
}

fn test_systems() -> Vec<(&'static str, LinearPDESystem)> {
    let plane = Chart::coordinates(&["x", "y"]).unwrap();
    let (gp, _) = parse_line_element(&plane, "dx^2 + dy^2").unwrap();
    let sphere = Chart::with_trig(&["theta", "phi"], &["theta"]).unwrap();
    let (gs, _) = parse_line_element(&sphere, "dtheta^2 + sin(theta)^2 dphi^2").unwrap();
    let flat4 = model("flat4.model");
    let sub = model("submax_cprojective_n2.model");
    vec![
        ("plane", invariance_system(&gp)),
        ("sphere", invariance_system(&gs)),
        ("flat quaternionic", quaternionic_symmetry_system(&flat4.frames["Q"].elements, &flat4.metrics["g"]).unwrap()),
        (
            "submaximal c-projective",
            cprojective_symmetry_system(&sub.endomorphisms["J"], &sub.connections["D"]).unwrap(),
        ),
    ]
}

fn monotonicity() -> Result<(), String> {
    for (name, s) in test_systems() {
        let n = s.chart().n_coords();
        let r = solution_bound(&s, 6).map_err(|e| e.to_string())?;
        ensure!(r.bound.is_some(), "{name}: no bound");
        for pair in r.table.windows(2) {
            for (k, d) in pair[0].dims.iter().enumerate() {
                ensure!(pair[1].dims[k] <= *d, "{name}: g_{k} grew from {d} to {}", pair[1].dims[k]);
            }
        }
        for st in &r.table {
            for (k, d) in st.dims.iter().enumerate() {
                let binom: usize = (0..k).fold(1, |acc, i| acc * (n + k - 1 - i) / (i + 1));
                ensure!(*d <= n * binom, "{name}: g_{k} = {d} exceeds the jet space");
            }
        }
    }
    Ok(())
}

fn point_independence() -> Result<usize, String> {
    let eh = model("eguchi_hanson.model");
    let mut systems = test_systems();
    systems.push(("Eguchi-Hanson", quaternionic_symmetry_system(&eh.frames["Q"].elements, &eh.metrics["g"]).unwrap()));
    for (name, s) in &systems {
        let stages = [s.clone(), prolong(s)];
        for (i, st) in stages.iter().enumerate() {
            let mut seen: Vec<SymbolStage> = Vec::new();
            for seed in 1..=3u64 {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let p = GenericPoint::sample(st, &mut rng).map_err(|e| e.to_string())?;
                seen.push(symbol_dimensions(st, &p).map_err(|e| e.to_string())?);
            }
            ensure!(seen.windows(2).all(|w| w[0] == w[1]), "{name} stage {}: {:?}", i + 1, seen);
        }
    }
    Ok(systems.len())
}

fn timed<T>(what: &str, f: impl FnOnce() -> T) -> T {
    let start = Instant::now();
    let r = f();
    if std::env::var_os("ACCEPTANCE_TIMINGS").is_some() {
        eprintln!("  {what}: {:.1}s", start.elapsed().as_secs_f64());
    }
    r
}

fn property_suites() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    timed("algebra laws", || kernel_laws(&mut rng))?;
    timed("Leibniz", || leibniz(&mut rng))?;
    timed("Bianchi", bianchi)?;
    let err = timed("finite differences", || finite_differences(&mut rng))?;
    timed("monotonicity", monotonicity)?;
    let systems = timed("point independence", point_independence)?;
    Ok(format!(
        "algebra laws, Leibniz, Bianchi, finite differences (worst relative error {err:.1e}), monotone tables, \
         {systems} systems point independent"
    ))
}

fn main() {
    let only: Option<usize> = std::env::var("ACCEPTANCE_ONLY").ok().and_then(|v| v.parse().ok());
    let criteria: [Criterion; 7] = [
        ("Eguchi-Hanson symbol tables", eh_symbol_tables),
        ("Eguchi-Hanson isometries", eh_isometries),
        ("flat quaternionic bound", flat_quaternionic_bound),
        ("submaximal c-projective model", submaximal_cprojective),
        ("block operator kernels and vanishing locus", block_kernels_and_locus),
        ("Ricci-flatness", eh_ricci_flat),
        ("property suites", property_suites),
    ];
    let (mut ran, mut failed) = (0, 0);
    for (i, (name, f)) in criteria.iter().enumerate() {
        if only.is_some_and(|k| k != i + 1) {
            continue;
        }
        ran += 1;
        let start = Instant::now();
        let result = panic::catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        match result {
            Ok(detail) => {
                println!("criterion {}: pass  {name}: {detail} [{:.1}s]", i + 1, start.elapsed().as_secs_f64())
            }
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {why} [{:.1}s]", i + 1, start.elapsed().as_secs_f64());
            }
        }
    }
    println!("{} of {ran} criteria passed", ran - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
