use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::carleson::{
    carleson_constant_exact, carleson_constant_search, carleson_constant_via_unions,
    dual_estimate_check, dual_ratio, upper_envelope, CoefficientFamily, TestFamily,
};
use crate::dyadic::{gen_dyadic_cubes, gen_dyadic_rectangles};
use crate::error::{Error, Result};
use crate::flow;
use crate::instance::Instance;
use crate::measure::{DiscreteMeasure, Mode};
use crate::numeric::{approx_eq, extended_value};
use crate::set_system::SetSystem;
use crate::sparse::{
    minimal_sparse_witness, sparse_implies_carleson_check, sparse_witness_fractional_traced,
    sparse_witness_integral, verify_witness, FractionalOutcome, IntegralOutcome, SparseWitness,
    WitnessMode,
};

/// Process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    Success = 0,
    Input = 1,
    Infeasible = 2,
    Internal = 3,
}

/// What a command produced, before it is wrapped into a run report.
#[derive(Debug, Clone)]
pub struct CommandOutput {
    pub payload: Value,
    /// CSV header and rows for `--output csv`.
    pub table: Vec<Vec<String>>,
    pub exit: Exit,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Settings {
    pub seed: u64,
    pub tolerance: f64,
    pub budget: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstantMethod {
    Exact,
    Flow,
    Both,
}

fn fmt(v: f64) -> String {
    if v.is_infinite() && v > 0.0 {
        "inf".into()
    } else {
        v.to_string()
    }
}

pub fn cmd_constant(
    inst: &Instance,
    method: ConstantMethod,
    unions: bool,
    settings: &Settings,
) -> Result<CommandOutput> {
    let (sys, lam) = (&inst.system, &inst.lambda);
    let mut methods = serde_json::Map::new();
    let mut table = vec![vec!["method".to_string(), "constant".to_string()]];
    let mut record = |name: &str, v: f64, methods: &mut serde_json::Map<String, Value>| {
        methods.insert(name.into(), extended_value(v));
        table.push(vec![name.into(), fmt(v)]);
    };

    let mut values = Vec::new();
    let mut certificate = None;
    let mut iterations = None;
    if method != ConstantMethod::Exact {
        let search = carleson_constant_search(sys, lam)?;
        record("flow", search.constant, &mut methods);
        values.push(search.constant);
        iterations = Some(search.iterations);
        certificate = Some((search.constant, search.certificate));
    }
    if method != ConstantMethod::Flow {
        let (c, cert) = carleson_constant_exact(sys, lam, settings.budget)?;
        record("exact", c, &mut methods);
        values.push(c);
        certificate.get_or_insert((c, cert));
    }
    if unions {
        let c = carleson_constant_via_unions(sys, lam, settings.budget)?;
        record("unions", c, &mut methods);
        values.push(c);
    }
    let (constant, cert) = certificate.expect("at least one method runs");
    let agreement = values
        .iter()
        .all(|&v| approx_eq(v, constant, settings.tolerance));
    Ok(CommandOutput {
        payload: json!({
            "constant": extended_value(constant),
            "certificate": cert.to_doc(sys, constant),
            "methods": methods,
            "agreement": agreement,
            "iterations": iterations,
        }),
        table,
        exit: if agreement {
            Exit::Success
        } else {
            Exit::Internal
        },
    })
}

#[derive(Debug, Clone, Copy)]
pub enum WitnessConstant {
    Fixed(f64),
    Auto,
}

fn report_table(report: &crate::sparse::WitnessReport) -> Vec<Vec<String>> {
    let mut table = vec![["set", "lambda", "achieved_mass", "slack", "ok"]
        .map(String::from)
        .to_vec()];
    for r in &report.rows {
        table.push(vec![
            r.id.clone(),
            fmt(r.lambda),
            fmt(r.achieved_mass),
            fmt(r.slack),
            r.ok.to_string(),
        ]);
    }
    table
}

fn feasible_output(
    inst: &Instance,
    c: f64,
    witness: SparseWitness,
    settings: &Settings,
) -> Result<CommandOutput> {
    let report = verify_witness(&inst.system, &inst.lambda, c, &witness);
    let chain = if inst.system.len() <= settings.budget {
        Some(sparse_implies_carleson_check(
            &inst.system,
            &inst.lambda,
            c,
            &witness,
            settings.budget,
        )?)
    } else {
        None
    };
    let ok = report.feasible && chain.as_ref().is_none_or(|ch| ch.pass);
    Ok(CommandOutput {
        table: report_table(&report),
        payload: json!({
            "feasible": true,
            "C": c,
            "witness": witness,
            "report": report,
            "chain": chain,
        }),
        exit: if ok { Exit::Success } else { Exit::Internal },
    })
}

pub fn cmd_witness(
    inst: &Instance,
    constant: WitnessConstant,
    mode: WitnessMode,
    dump_flow: Option<&Path>,
    settings: &Settings,
) -> Result<CommandOutput> {
    let (sys, lam) = (&inst.system, &inst.lambda);
    match mode {
        WitnessMode::Fractional => {
            if sys.measure().mode() != Mode::Divisible {
                return Err(Error::IndivisibleMeasure);
            }
            let c = match constant {
                WitnessConstant::Fixed(c) => c,
                WitnessConstant::Auto => {
                    let minimal = minimal_sparse_witness(sys, lam)?;
                    match minimal.witness {
                        Some(w) if minimal.constant == 0.0 => {
                            return feasible_output(inst, 0.0, w, settings);
                        }
                        Some(_) => minimal.constant,
                        None => {
                            return Ok(infeasible_cert(
                                inst,
                                minimal.constant,
                                &minimal.certificate,
                            ))
                        }
                    }
                }
            };
            let (outcome, (net, result)) = sparse_witness_fractional_traced(sys, lam, c)?;
            if let Some(path) = dump_flow {
                std::fs::write(path, flow::dump(&net.network, &result)).map_err(|e| {
                    Error::InvalidParameter(format!("cannot write {}: {e}", path.display()))
                })?;
            }
            match outcome {
                FractionalOutcome::Feasible(w) => feasible_output(inst, c, w, settings),
                FractionalOutcome::Infeasible(cert) => Ok(infeasible_cert(inst, c, &cert)),
            }
        }
        WitnessMode::Integral => {
            let c = match constant {
                WitnessConstant::Fixed(c) => c,
                WitnessConstant::Auto => carleson_constant_search(sys, lam)?.constant,
            };
            if c == 0.0 && lam.is_zero() {
                return feasible_output(
                    inst,
                    0.0,
                    SparseWitness::empty(WitnessMode::Integral, 0.0),
                    settings,
                );
            }
            if !c.is_finite() {
                return Ok(CommandOutput {
                    payload: json!({"feasible": false, "C": extended_value(c),
                        "note": "the Carleson constant is infinite"}),
                    table: vec![vec!["feasible".into()], vec!["false".into()]],
                    exit: Exit::Infeasible,
                });
            }
            match sparse_witness_integral(sys, lam, c)? {
                IntegralOutcome::Feasible(w) => feasible_output(inst, c, w, settings),
                IntegralOutcome::Infeasible => Ok(CommandOutput {
                    payload: json!({
                        "feasible": false,
                        "C": c,
                        "note": "no assignment of whole atoms meets every demand",
                    }),
                    table: vec![vec!["feasible".into()], vec!["false".into()]],
                    exit: Exit::Infeasible,
                }),
            }
        }
    }
}

fn infeasible_cert(
    inst: &Instance,
    c: f64,
    cert: &crate::carleson::CutCertificate,
) -> CommandOutput {
    let doc = cert.to_doc(&inst.system, c);
    CommandOutput {
        table: vec![
            vec!["C".into(), "ratio".into(), "subcollection".into()],
            vec![fmt(c), fmt(cert.ratio), doc.subcollection.join(" ")],
        ],
        payload: json!({"feasible": false, "C": extended_value(c), "certificate": doc}),
        exit: Exit::Infeasible,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DualRow {
    pub label: String,
    pub lhs: f64,
    pub integral: f64,
    /// `∫ envelope` evaluated directly, for the layer-cake cross-check.
    pub integral_direct: f64,
    #[serde(with = "crate::numeric::extended")]
    pub rhs: f64,
    #[serde(with = "crate::numeric::extended")]
    pub ratio: f64,
    pub pass: bool,
}

/// Random test family: per-set uniform `[0,1)` scaled by one of 1, 10, 100.
pub fn random_test_family(system: &SetSystem, rng: &mut impl Rng) -> TestFamily {
    let magnitude = [1.0, 10.0, 100.0][rng.gen_range(0..3)];
    let values = (0..system.len())
        .map(|_| rng.gen::<f64>() * magnitude)
        .collect();
    TestFamily::new(system, values).expect("finite nonnegative samples")
}

fn dual_row(
    sys: &SetSystem,
    lam: &CoefficientFamily,
    a: &TestFamily,
    c: f64,
    label: String,
) -> Result<DualRow> {
    let check = dual_estimate_check(sys, lam, a, c)?;
    let integral_direct = sys.measure().direct_integral(&upper_envelope(sys, a))?;
    Ok(DualRow {
        label,
        lhs: check.lhs,
        integral: check.integral,
        integral_direct,
        rhs: check.rhs,
        ratio: dual_ratio(check.lhs, check.integral),
        pass: check.pass,
    })
}

pub fn cmd_dual_check(
    inst: &Instance,
    samples: usize,
    settings: &Settings,
) -> Result<CommandOutput> {
    let (sys, lam) = (&inst.system, &inst.lambda);
    let search = carleson_constant_search(sys, lam)?;
    let c = search.constant;
    let tol = settings.tolerance;

    let mut rows = vec![
        dual_row(sys, lam, &TestFamily::zero(sys), c, "zero".into())?,
        dual_row(
            sys,
            lam,
            &TestFamily::indicator(sys, &search.certificate.subcollection),
            c,
            "indicator".into(),
        )?,
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    for i in 0..samples {
        let a = random_test_family(sys, &mut rng);
        rows.push(dual_row(sys, lam, &a, c, format!("sample-{i}"))?);
    }

    let max_ratio = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    let exceeded: Vec<&str> = rows
        .iter()
        .filter(|r| !(r.pass && (c.is_infinite() || r.ratio <= c + tol * (1.0 + c))))
        .map(|r| r.label.as_str())
        .collect();
    let layer_cake_ok = rows
        .iter()
        .all(|r| (r.integral - r.integral_direct).abs() <= 1e-12 * (1.0 + r.integral_direct));
    let attained = approx_eq(max_ratio, c, tol);
    let ok = exceeded.is_empty() && layer_cake_ok && attained;

    let mut table = vec![["label", "lhs", "integral", "rhs", "ratio", "pass"]
        .map(String::from)
        .to_vec()];
    for r in &rows {
        table.push(vec![
            r.label.clone(),
            fmt(r.lhs),
            fmt(r.integral),
            fmt(r.rhs),
            fmt(r.ratio),
            r.pass.to_string(),
        ]);
    }
    Ok(CommandOutput {
        payload: json!({
            "constant": extended_value(c),
            "certificate": search.certificate.to_doc(sys, c),
            "max_ratio": extended_value(max_ratio),
            "attained": attained,
            "exceeded": exceeded,
            "layer_cake_agrees": layer_cake_ok,
            "rows": rows,
        }),
        table,
        exit: if ok { Exit::Success } else { Exit::Internal },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LambdaRule {
    Mass,
    Unit,
    Random(Option<u64>),
}

impl std::str::FromStr for LambdaRule {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "mass" => Ok(LambdaRule::Mass),
            "unit" => Ok(LambdaRule::Unit),
            "random" => Ok(LambdaRule::Random(None)),
            _ => s
                .strip_prefix("random(")
                .and_then(|r| r.strip_suffix(')'))
                .and_then(|n| n.parse().ok())
                .map(|n| LambdaRule::Random(Some(n)))
                .ok_or_else(|| {
                    format!("unknown lambda rule `{s}` (mass, unit, random, random(N))")
                }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GenSpec {
    Cubes { dimension: usize, depth: u32 },
    Rectangles { depth_x: u32, depth_y: u32 },
}

/// Applies a coefficient rule; `random` draws uniform `[0,1)` per set.
pub fn apply_lambda_rule(system: &SetSystem, rule: LambdaRule, seed: u64) -> CoefficientFamily {
    match rule {
        LambdaRule::Mass => CoefficientFamily::by_mass(system),
        LambdaRule::Unit => CoefficientFamily::unit(system),
        LambdaRule::Random(own) => {
            let mut rng = ChaCha8Rng::seed_from_u64(own.unwrap_or(seed));
            let values = (0..system.len()).map(|_| rng.gen::<f64>()).collect();
            CoefficientFamily::new(system, values).expect("uniform samples")
        }
    }
}

pub fn cmd_gen(spec: GenSpec, rule: LambdaRule, settings: &Settings) -> Result<Instance> {
    let system = match spec {
        GenSpec::Cubes { dimension, depth } => gen_dyadic_cubes(dimension, depth, None)?,
        GenSpec::Rectangles { depth_x, depth_y } => gen_dyadic_rectangles(depth_x, depth_y)?,
    };
    let lambda = apply_lambda_rule(&system, rule, settings.seed);
    Instance::new(system, lambda)
}

/// The single-point-mass example: one atom of mass 1 shared by two sets
/// with coefficient 1 each.
pub fn dirac_instance(mode: Mode) -> Instance {
    let m = DiscreteMeasure::from_masses(mode, &[1.0]).expect("valid measure");
    let system =
        SetSystem::from_lists(m, &[("S1", &["a0"]), ("S2", &["a0"])]).expect("valid system");
    let lambda = CoefficientFamily::unit(&system);
    Instance { system, lambda }
}

/// Candidate constants tried against the indivisible point mass.
pub const DEMO_CONSTANTS: [f64; 3] = [2.0, 10.0, 1000.0];

pub fn cmd_demo_pointmass(settings: &Settings) -> Result<CommandOutput> {
    let mut rows: Vec<Value> = Vec::new();
    let mut table = vec![["measure", "check", "C", "outcome"]
        .map(String::from)
        .to_vec()];
    let mut push = |measure: &str, check: &str, c: f64, outcome: String, rows: &mut Vec<Value>| {
        table.push(vec![measure.into(), check.into(), fmt(c), outcome.clone()]);
        rows.push(json!({"measure": measure, "check": check, "C": c, "outcome": outcome}));
    };

    let point = dirac_instance(Mode::Indivisible);
    let smooth = dirac_instance(Mode::Divisible);
    let mut expected = true;

    for (name, inst) in [("indivisible", &point), ("divisible", &smooth)] {
        let (c, _) = carleson_constant_exact(&inst.system, &inst.lambda, settings.budget)?;
        let flow_c = carleson_constant_search(&inst.system, &inst.lambda)?.constant;
        expected &= c == 2.0 && flow_c == 2.0;
        push(name, "carleson constant", c, fmt(flow_c), &mut rows);
    }

    for &c in &DEMO_CONSTANTS {
        let outcome = sparse_witness_integral(&point.system, &point.lambda, c)?;
        let infeasible = outcome == IntegralOutcome::Infeasible;
        expected &= infeasible;
        push(
            "indivisible",
            "integral witness",
            c,
            if infeasible { "infeasible" } else { "feasible" }.into(),
            &mut rows,
        );
    }

    let minimal = minimal_sparse_witness(&smooth.system, &smooth.lambda)?;
    let witness = minimal.witness.clone();
    let split = witness
        .as_ref()
        .is_some_and(|w| w.fraction("S1", "a0") == 0.5 && w.fraction("S2", "a0") == 0.5);
    expected &= minimal.constant == 2.0 && split;
    push(
        "divisible",
        "fractional witness",
        minimal.constant,
        if split {
            "feasible (0.5/0.5 split)"
        } else {
            "unexpected"
        }
        .into(),
        &mut rows,
    );

    Ok(CommandOutput {
        payload: json!({
            "rows": rows,
            "witness": witness,
            "expected_outcome": expected,
        }),
        table,
        exit: if expected {
            Exit::Success
        } else {
            Exit::Internal
        },
    })
}
