//! One function per subcommand. Each builds an [`Envelope`], writes it and
//! returns the exit code.

use std::collections::BTreeMap;

use qoslab_core::experiments::{
    approximate_deltas, bessel_audit, clt_functional, compare_rademacher_gaussian_on,
    compare_rademacher_steinhaus_on, degenerate_bound_check, estimate_constants, pisier_criterion,
    random_coeffs, transpose_map, verify_contraction_on, verify_riesz, CltFunctional,
    EstimateOptions, Method, EXACT_TOLERANCE,
};
use qoslab_core::matcore::{gaussian_matrix, RngStream};
use qoslab_core::systems::{
    build_gaussian, build_rademacher, build_steinhaus, uniform_bound, verify_orthonormality,
    QSystemInstance, SystemRecipe,
};
use qoslab_core::transforms::{
    forward, inverse, lp_omega_norm, lp_sigma_norm, SampledVectorFunction, VectorSpaceDesc,
};
use qoslab_core::{Complex64, ComplexMatrix, Exponent};
use serde_json::{json, Value};

use crate::formats::{
    clt_csv, coeffs_from_map, coeffs_to_map, function_to_points, to_value, write_output, Envelope,
};
use crate::systems::{build_system, parse_dims, parse_sigma};
use crate::{
    ApproxArgs, Cli, CltArgs, Command, Direction, EstimateArgs, Format, MapKind, ReportArgs,
    Target, TransformArgs, UsageError, VerifyArgs, EXIT_FAIL, EXIT_PASS,
};

/// Stream id for experiment draws; systems use [`crate::systems::SYSTEM_STREAM`].
const EXPERIMENT_STREAM: u64 = 2;
/// An empirical `S^∞` maximum above this marks a system as unbounded.
const UNBOUNDED_THRESHOLD: f64 = 3.0;

type Outcome = Result<i32, UsageError>;

pub fn dispatch(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::Verify(a) => verify(cli, a),
        Command::Estimate(a) => estimate(cli, a),
        Command::Clt(a) => clt(cli, a),
        Command::Approx(a) => approx(cli, a),
        Command::Transform(a) => transform(cli, a),
        Command::Report(a) => report(cli, a),
    }
}

fn finish(cli: &Cli, env: &Envelope) -> Outcome {
    if cli.format == Some(Format::Csv) {
        return Err(UsageError(format!("{} reports are JSON only", env.command)));
    }
    write_output(cli.out.as_deref(), &env.to_json())?;
    Ok(if env.pass { EXIT_PASS } else { EXIT_FAIL })
}

fn parse<T: std::str::FromStr<Err = qoslab_core::Error>>(s: &str) -> Result<T, UsageError> {
    Ok(s.parse::<T>()?)
}

fn experiment_rng(cli: &Cli) -> RngStream {
    RngStream::new(cli.seed, EXPERIMENT_STREAM)
}

fn system_json(recipe: &SystemRecipe, sys: &QSystemInstance) -> Value {
    json!({
        "label": recipe.label(),
        "recipe": to_value(recipe),
        "sigma_ids": sys.params().sigma_ids(),
        "dims": sys.params().dims(),
        "points": sys.point_count(),
        "exact_space": sys.space().is_exact(),
        "declared_bound": sys.declared_bound(),
        "complete": sys.is_complete(),
    })
}

// The given system when it already is the requested ensemble over the
// same indices, a fresh one of `n` points otherwise.
struct Ensembles {
    rademacher: QSystemInstance,
    steinhaus: Option<QSystemInstance>,
    gaussian: Option<QSystemInstance>,
}

fn ensembles(
    sys: &QSystemInstance,
    recipe: &SystemRecipe,
    n: usize,
    rng: &RngStream,
    checks: &[String],
) -> Result<Ensembles, UsageError> {
    let params = sys.params();
    let rademacher = match recipe {
        SystemRecipe::Rademacher { .. } => sys.clone(),
        _ => build_rademacher(params, n, &rng.fork(10))?,
    };
    let steinhaus = match (recipe, checks.iter().any(|c| c == "steinhaus")) {
        (_, false) => None,
        (SystemRecipe::Steinhaus { .. }, true) => Some(sys.clone()),
        (_, true) => Some(build_steinhaus(params, n, &rng.fork(11))?),
    };
    let gaussian = match (recipe, checks.iter().any(|c| c == "gaussian")) {
        (_, false) => None,
        (SystemRecipe::Gaussian { .. }, true) => Some(sys.clone()),
        (_, true) => Some(build_gaussian(params, n, &rng.fork(12))?),
    };
    Ok(Ensembles {
        rademacher,
        steinhaus,
        gaussian,
    })
}

const CHECKS: [&str; 7] = [
    "orthonormality",
    "uniform-bound",
    "parseval",
    "riesz",
    "contraction",
    "steinhaus",
    "gaussian",
];

fn verify(cli: &Cli, a: &VerifyArgs) -> Outcome {
    if a.check.is_empty() {
        return Err(UsageError(format!(
            "no checks selected; choose from {}",
            CHECKS.join(", ")
        )));
    }
    if let Some(c) = a.check.iter().find(|c| !CHECKS.contains(&c.as_str())) {
        return Err(UsageError(format!(
            "unknown check {c:?}; choose from {}",
            CHECKS.join(", ")
        )));
    }
    if a.trials == 0 {
        return Err(UsageError("--trials must be positive".into()));
    }
    let (recipe, sys) = build_system(&a.system, cli.seed)?;
    let p: Exponent = parse(&a.p)?;
    let q: Exponent = parse(&a.q)?;
    let desc: VectorSpaceDesc = parse(&a.e)?;
    let sigma = parse_sigma(&sys, a.sigma.as_deref())?;
    let rng = experiment_rng(cli);
    let needs_ensembles = a
        .check
        .iter()
        .any(|c| matches!(c.as_str(), "contraction" | "steinhaus" | "gaussian"));
    let ens = if needs_ensembles {
        Some(ensembles(&sys, &recipe, a.n, &rng, &a.check)?)
    } else {
        None
    };

    let mut env = Envelope::new("verify", a, cli.seed);
    let mut results = BTreeMap::new();
    for (idx, check) in a.check.iter().enumerate() {
        let rng = rng.fork(100 + idx as u64);
        let (value, pass, tol) = match check.as_str() {
            "orthonormality" => {
                let r = verify_orthonormality(&sys, Some(&sigma))?;
                let tol = sys.space().identity_tolerance();
                let pass = r.max_defect <= tol;
                (to_value(&r), pass, tol)
            }
            "uniform-bound" => {
                let estimate = uniform_bound(&sys);
                let declared = sys.declared_bound();
                let tol = EXACT_TOLERANCE;
                let pass = declared.map_or(true, |m| estimate <= m * (1.0 + tol));
                let unbounded = declared.is_none() && estimate > UNBOUNDED_THRESHOLD;
                (
                    json!({ "estimate": estimate, "declared": declared, "unbounded": unbounded }),
                    pass,
                    tol,
                )
            }
            "parseval" => parseval(&sys, desc, a.trials, &rng)?,
            "riesz" => {
                let r = verify_riesz(&sys, p, a.trials, a.level, &rng)?;
                let (pass, tol) = (r.pass, r.tolerance);
                (to_value(&r), pass, tol)
            }
            "contraction" => {
                let rad = &ens.as_ref().expect("built above").rademacher;
                let mut worst = 0.0f64;
                let mut all = true;
                let mut tol = 0.0;
                for t in 0..a.trials {
                    let mut r = rng.fork(t as u64);
                    let coeffs = random_coeffs(sys.params(), desc, &sigma, &mut r);
                    let d: Vec<ComplexMatrix> = sys
                        .params()
                        .dims()
                        .iter()
                        .map(|&d| gaussian_matrix(d, &mut r))
                        .collect::<Result<_, _>>()?;
                    let rep = verify_contraction_on(rad, &coeffs, &d, q)?;
                    worst = worst.max(rep.lhs / (rep.sup_d * rep.rhs));
                    all &= rep.pass;
                    tol = rep.tolerance;
                }
                (
                    json!({ "trials": a.trials, "max_normalized_lhs": worst }),
                    all,
                    tol,
                )
            }
            "steinhaus" => {
                let e = ens.as_ref().expect("built above");
                let stein = e.steinhaus.as_ref().expect("built above");
                let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
                let mut all = true;
                let mut tol = 0.0;
                for t in 0..a.trials {
                    let coeffs = random_coeffs(sys.params(), desc, &sigma, &mut rng.fork(t as u64));
                    let rep = compare_rademacher_steinhaus_on(&e.rademacher, stein, &coeffs, q)?;
                    lo = lo.min(rep.ratio.value);
                    hi = hi.max(rep.ratio.value);
                    all &= rep.pass;
                    tol = rep.tolerance;
                }
                (
                    json!({ "trials": a.trials, "min_ratio": lo, "max_ratio": hi }),
                    all,
                    tol,
                )
            }
            "gaussian" => {
                let e = ens.as_ref().expect("built above");
                let gauss = e.gaussian.as_ref().expect("built above");
                let mut hi = 0.0f64;
                let mut exact = None;
                let mut all = true;
                let mut tol = 0.0;
                for t in 0..a.trials {
                    let coeffs = random_coeffs(sys.params(), desc, &sigma, &mut rng.fork(t as u64));
                    let rep =
                        compare_rademacher_gaussian_on(&e.rademacher, gauss, &coeffs, a.c_max)?;
                    hi = hi.max(rep.ratio.value);
                    exact = rep.exact_ratio;
                    all &= rep.pass;
                    tol = rep.tolerance;
                }
                (
                    json!({ "trials": a.trials, "c_max": a.c_max, "max_ratio": hi, "exact_ratio": exact }),
                    all,
                    tol,
                )
            }
            _ => unreachable!("checks validated above"),
        };
        env.tolerances.insert(check.clone(), tol);
        env.pass &= pass;
        results.insert(check.clone(), json!({ "pass": pass, "value": value }));
    }
    env.result = json!({ "system": system_json(&recipe, &sys), "checks": results });
    finish(cli, &env)
}

// Random polynomials on every index: ‖F(f)‖/‖f‖ = 1 and F(F⁻¹(A)) = A on
// exact spaces, up to the statistical tolerance on Monte Carlo ones.
fn parseval(
    sys: &QSystemInstance,
    desc: VectorSpaceDesc,
    trials: usize,
    rng: &RngStream,
) -> Result<(Value, bool, f64), UsageError> {
    let all: Vec<usize> = (0..sys.params().len()).collect();
    let tol = if sys.space().is_exact() {
        1e-10
    } else {
        sys.space().check_tolerance()
    };
    let (mut ratio_dev, mut residual) = (0.0f64, 0.0f64);
    for t in 0..trials {
        let coeffs = random_coeffs(sys.params(), desc, &all, &mut rng.fork(t as u64));
        let f = inverse(&coeffs, sys)?;
        let fa = forward(&f, sys)?;
        let ratio = lp_sigma_norm(&fa, Exponent::TWO)? / lp_omega_norm(&f, Exponent::TWO);
        ratio_dev = ratio_dev.max((ratio - 1.0).abs());
        let g = inverse(&fa, sys)?;
        let diff: Vec<Complex64> = g
            .values()
            .iter()
            .zip(f.values())
            .map(|(x, y)| x - y)
            .collect();
        let diff = SampledVectorFunction::new(sys.space().clone(), desc, diff)?;
        residual =
            residual.max(lp_omega_norm(&diff, Exponent::TWO) / lp_omega_norm(&f, Exponent::TWO));
    }
    let pass = ratio_dev <= tol && residual <= tol;
    Ok((
        json!({ "trials": trials, "max_ratio_deviation": ratio_dev, "max_relative_residual": residual }),
        pass,
        tol,
    ))
}

fn estimate(cli: &Cli, a: &EstimateArgs) -> Outcome {
    let desc: VectorSpaceDesc = parse(&a.e)?;
    let p: Exponent = parse(&a.p)?;
    let rng = experiment_rng(cli);
    let mut env = Envelope::new("estimate", a, cli.seed);
    if a.target == Target::Pisier {
        let n = a.d * a.d;
        let t = match a.map {
            MapKind::Identity => ComplexMatrix::identity(n),
            MapKind::Transpose => transpose_map(a.d),
            MapKind::Random => {
                let mut r = rng.fork(0);
                ComplexMatrix::from_fn(n, n, |_, _| Complex64::new(r.gaussian(), r.gaussian()))
            }
        };
        let r = pisier_criterion(desc, a.d, &t, a.budget, &rng.fork(1))?;
        env.tolerances.insert("ratio_floor".into(), EXACT_TOLERANCE);
        env.pass = r.ratio.value >= 1.0 - EXACT_TOLERANCE;
        env.result = to_value(&r);
        return finish(cli, &env);
    }
    let default_system = || {
        let count = a
            .sigma
            .as_deref()
            .and_then(|s| s.parse::<usize>().ok())
            .unwrap_or(2);
        format!("signs:m={count}")
    };
    let spec = a.system.clone().unwrap_or_else(default_system);
    let (recipe, sys) = build_system(&spec, cli.seed)?;
    if a.target == Target::Degenerate {
        let r = degenerate_bound_check(&sys, desc, p, a.budget, &rng)?;
        env.tolerances.insert("relative".into(), 1e-6);
        env.pass = r.pass;
        env.result = json!({ "system": system_json(&recipe, &sys), "degenerate": to_value(&r) });
        return finish(cli, &env);
    }
    let method = match &a.method {
        Some(m) => parse::<Method>(m)?,
        None if desc.is_hilbertian() => Method::ExactSvd,
        None => Method::StochasticAscent,
    };
    let subset = parse_sigma(&sys, a.sigma.as_deref())?;
    let r = estimate_constants(
        &sys,
        desc,
        &subset,
        p,
        &EstimateOptions::new(method, a.budget),
        &rng,
    )?;
    let witness = |w: &Option<_>| w.as_ref().map(coeffs_to_map);
    let mut result = to_value(&r);
    result["k1_witness"] = to_value(witness(&r.k1_witness));
    result["k2_witness"] = to_value(witness(&r.k2_witness));
    env.result = json!({ "system": system_json(&recipe, &sys), "constants": result });
    finish(cli, &env)
}

fn clt(cli: &Cli, a: &CltArgs) -> Outcome {
    let dims = parse_dims(&a.dims)?;
    let h: CltFunctional = parse(&a.h)?;
    let r = clt_functional(&dims, h, &a.m, a.n, &experiment_rng(cli))?;
    if cli.format == Some(Format::Json) {
        let mut env = Envelope::new("clt", a, cli.seed);
        env.result = to_value(&r);
        return finish(cli, &env);
    }
    write_output(cli.out.as_deref(), &clt_csv(&r)?)?;
    Ok(EXIT_PASS)
}

fn approx(cli: &Cli, a: &ApproxArgs) -> Outcome {
    let (recipe, sys) = build_system(&a.system, cli.seed)?;
    let r = approximate_deltas(&sys, &a.eps)?;
    let bessel = bessel_audit(&sys)?;
    let mut env = Envelope::new("approx", a, cli.seed);
    env.tolerances.insert("bessel".into(), bessel.tolerance);
    env.pass = r.pass && bessel.pass;
    let steps: Vec<Value> = r
        .steps
        .iter()
        .map(|s| {
            json!({
                "n": s.n,
                "eps": s.eps,
                "k": s.k,
                "tail": s.tail,
                "error": s.error,
                "support": s.support.iter().map(|&i| sys.params().sigma_ids()[i].clone()).collect::<Vec<_>>(),
                "coeffs": coeffs_to_map(&s.coeffs),
            })
        })
        .collect();
    env.result = json!({
        "system": system_json(&recipe, &sys),
        "levels": r.levels,
        "steps": steps,
        "supports_disjoint": r.supports_disjoint,
        "errors_within": r.errors_within,
        "bessel": to_value(&bessel),
    });
    finish(cli, &env)
}

fn transform(cli: &Cli, a: &TransformArgs) -> Outcome {
    let (recipe, sys) = build_system(&a.system, cli.seed)?;
    let desc: VectorSpaceDesc = parse(&a.e)?;
    let mut env = Envelope::new("transform", a, cli.seed);
    if a.roundtrip {
        if a.trials == 0 {
            return Err(UsageError("--trials must be positive".into()));
        }
        let (value, pass, tol) = parseval(&sys, desc, a.trials, &experiment_rng(cli))?;
        env.tolerances.insert("roundtrip".into(), tol);
        env.pass = pass;
        env.result = json!({ "system": system_json(&recipe, &sys), "roundtrip": value });
        return finish(cli, &env);
    }
    let path = a
        .input
        .as_ref()
        .ok_or_else(|| UsageError("give --input or --roundtrip".into()))?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| UsageError(format!("cannot read {}: {e}", path.display())))?;
    let bad = |e: serde_json::Error| UsageError(format!("bad input {}: {e}", path.display()));
    env.result = match a.direction {
        Direction::Inverse => {
            let map = serde_json::from_str(&text).map_err(bad)?;
            let coeffs = coeffs_from_map(sys.params(), desc, &map)?;
            json!({ "values": function_to_points(&inverse(&coeffs, &sys)?) })
        }
        Direction::Forward => {
            let points: Vec<Vec<[f64; 2]>> = serde_json::from_str(&text).map_err(bad)?;
            if points.len() != sys.point_count() {
                return Err(UsageError(format!(
                    "{} points given, the system has {}",
                    points.len(),
                    sys.point_count()
                )));
            }
            let values: Vec<Complex64> = points
                .iter()
                .flatten()
                .map(|[re, im]| Complex64::new(*re, *im))
                .collect();
            let f = SampledVectorFunction::new(sys.space().clone(), desc, values)?;
            json!({ "coeffs": coeffs_to_map(&forward(&f, &sys)?) })
        }
    };
    finish(cli, &env)
}

fn report(cli: &Cli, a: &ReportArgs) -> Outcome {
    let mut env = Envelope::new("report", a, cli.seed);
    let mut rows = Vec::new();
    for path in &a.inputs {
        let text = std::fs::read_to_string(path)
            .map_err(|e| UsageError(format!("cannot read {}: {e}", path.display())))?;
        let v: Value = serde_json::from_str(&text)
            .map_err(|e| UsageError(format!("bad report {}: {e}", path.display())))?;
        let pass = v["pass"]
            .as_bool()
            .ok_or_else(|| UsageError(format!("{} is not a report", path.display())))?;
        env.pass &= pass;
        rows.push(json!({
            "file": path.display().to_string(),
            "command": v["command"],
            "seed": v["seed"],
            "pass": pass,
        }));
    }
    env.result = json!({ "reports": rows });
    finish(cli, &env)
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::Parser;

    fn run(args: &[&str]) -> (i32, String) {
        let dir = std::env::temp_dir().join(format!("qoslab-unit-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let out = dir.join(format!(
            "{}.out",
            args.join("_").replace(['/', ':', ','], "-")
        ));
        let mut full = vec!["qoslab"];
        full.extend_from_slice(args);
        let out_s = out.to_str().unwrap().to_string();
        full.extend_from_slice(&["--out", &out_s]);
        let cli = Cli::try_parse_from(full).unwrap();
        let code = crate::run(&cli);
        (code, std::fs::read_to_string(&out).unwrap_or_default())
    }

    #[test]
    fn verify_orthonormality_on_s3() {
        let (code, text) = run(&["verify", "--system", "s3-dual", "--check", "orthonormality"]);
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(&text).unwrap();
        assert!(
            v["result"]["checks"]["orthonormality"]["value"]["max_defect"]
                .as_f64()
                .unwrap()
                <= 1e-12
        );
        assert_eq!(v["seed"], 0);
    }

    #[test]
    fn gaussian_flagged_unbounded() {
        let (code, text) = run(&[
            "verify",
            "--system",
            "gaussian:d=1,n=100000",
            "--check",
            "uniform-bound",
        ]);
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(
            v["result"]["checks"]["uniform-bound"]["value"]["unbounded"],
            true
        );
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(run(&["verify", "--system", "s3-dual"]).0, 2);
        assert_eq!(
            run(&["verify", "--system", "s3-dual", "--check", "nope"]).0,
            2
        );
        assert_eq!(run(&["approx", "--system", "s3-dual"]).0, 2);
        assert_eq!(run(&["clt", "--m", "4,1"]).0, 2);
    }

    #[test]
    fn exhaustive_witness() {
        let (code, text) = run(&[
            "estimate",
            "--E",
            "l1:2",
            "--method",
            "exhaustive-signs",
            "--sigma",
            "2",
        ]);
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(&text).unwrap();
        let k1 = v["result"]["constants"]["k1_lower"].as_f64().unwrap();
        assert!((k1 - 2f64.sqrt()).abs() <= 1e-8);
    }
}
