//! Command-line front door: build foldings and modules, run verification
//! suites, and emit deterministic JSON.
//!
//! Exit codes: 0 success / all assertions pass, 1 assertion failure,
//! 2 usage or configuration error, 3 mathematical precondition violated
//! (characteristic clashes, non-split polynomials, missing scalars).

mod parse;

use clap::{Args, Parser, Subcommand};
use hyperloop_core::chevalley::chevalley_basis;
use hyperloop_core::coeffring::{Field, FqField, QExt};
use hyperloop_core::hypermod::{build_weyl_module, weight_from_coeffs, weyl_dim};
use hyperloop_core::lweights::{omega_from_pi, standard_decomposition, LwError};
use hyperloop_core::rootfold::{rat_string, DynkinType};
use hyperloop_core::verify::{
    check_divided_power_identities, check_heisenberg_identity, check_restriction_theorem,
    default_fields, evaluation_suite, field_for, garland_suite, restriction_suite,
    twisted_basis_for, AutoKind, VerificationReport,
};
use serde_json::{json, Value};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "hyperloop", version, about = "twisted loop algebra toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Write the JSON output to a file instead of stdout.
    #[arg(long, global = true)]
    out: Option<std::path::PathBuf>,
    /// Include wall-clock timings in reports (off by default so identical
    /// configurations produce byte-identical output).
    #[arg(long, global = true)]
    timing: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Fold a root system along a diagram automorphism.
    Fold(FoldArgs),
    /// Build a highest-weight module and report its dimensions.
    Module(ModuleArgs),
    /// Run a verification suite.
    Verify(VerifyArgs),
    /// Standard-decompose a twisted l-weight and lift it.
    Drinfeld(DrinfeldArgs),
}

#[derive(Args)]
struct FoldArgs {
    #[arg(long = "type")]
    ty: String,
    /// Automorphism: id, flip, or rot3.
    #[arg(long, default_value = "flip")]
    auto: String,
}

#[derive(Args)]
struct ModuleArgs {
    #[arg(long = "type")]
    ty: String,
    /// Comma-separated fundamental-weight coefficients, e.g. `1,1`.
    #[arg(long)]
    hw: String,
    /// Field: `Q`, `Q(z3)`, `Q(s2)`, or a prime power like `F5`, `F25`.
    #[arg(long, default_value = "Q")]
    field: String,
    /// Quotient by the radical of the contravariant form.
    #[arg(long)]
    simple: bool,
    /// Include the full sparse action tables in the output.
    #[arg(long)]
    full: bool,
    /// Override the stored divided-power bound.
    #[arg(long)]
    kmax: Option<usize>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Suite: heisenberg, identities, evaluation, garland, restriction, hw.
    suite: String,
    #[arg(long)]
    nmax: Option<usize>,
    /// Run the full default grid (garland).
    #[arg(long)]
    all: bool,
    #[arg(long = "rank-max")]
    rank_max: Option<usize>,
    #[arg(long = "type")]
    ty: Option<String>,
    #[arg(long)]
    auto: Option<String>,
    #[arg(long)]
    field: Option<String>,
    /// l-weight: fundamental products `w1@2*w2@3` or polynomials `1:(1-2u)`.
    #[arg(long)]
    pi: Option<String>,
}

#[derive(Args)]
struct DrinfeldArgs {
    #[arg(long = "type")]
    ty: String,
    #[arg(long, default_value = "flip")]
    auto: String,
    #[arg(long)]
    field: String,
    #[arg(long)]
    pi: String,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let started = std::time::Instant::now();
    let result = run(&cli);
    match result {
        Ok((mut value, all_pass)) => {
            if cli.timing {
                if let Value::Object(map) = &mut value {
                    map.insert("timing_ms".into(), json!(started.elapsed().as_millis() as u64));
                }
            }
            let text = serde_json::to_string_pretty(&value).unwrap();
            if let Some(path) = &cli.out {
                if let Err(e) = std::fs::write(path, format!("{text}\n")) {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    return ExitCode::from(2);
                }
            } else {
                println!("{text}");
            }
            if all_pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

struct CliError {
    code: u8,
    message: String,
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError { code: 2, message: msg.into() }
}

fn precondition(msg: impl Into<String>) -> CliError {
    CliError { code: 3, message: msg.into() }
}

fn parse_type(s: &str) -> Result<DynkinType, CliError> {
    DynkinType::parse(s).map_err(|e| usage(e.to_string()))
}

fn parse_auto(s: &str) -> Result<AutoKind, CliError> {
    AutoKind::parse(s).ok_or_else(|| usage(format!("unknown automorphism `{s}`")))
}

fn parse_finite_field(s: &str) -> Result<(u64, usize), CliError> {
    let body = s
        .strip_prefix('F')
        .or_else(|| s.strip_prefix('f'))
        .ok_or_else(|| usage(format!("expected a finite field like F5, got `{s}`")))?;
    let (p_str, k_str) = match body.split_once('^') {
        Some((p, k)) => (p, Some(k)),
        None => (body, None),
    };
    if let Some(k) = k_str {
        let p: u64 = p_str.parse().map_err(|_| usage("bad prime"))?;
        let k: usize = k.parse().map_err(|_| usage("bad extension degree"))?;
        return Ok((p, k));
    }
    let q: u64 = p_str.parse().map_err(|_| usage("bad field size"))?;
    // factor q as p^k
    let mut p = 2;
    while p * p <= q {
        if q % p == 0 {
            let mut k = 0;
            let mut qq = q;
            while qq % p == 0 {
                qq /= p;
                k += 1;
            }
            if qq != 1 {
                return Err(usage(format!("{q} is not a prime power")));
            }
            return Ok((p, k));
        }
        p += 1;
    }
    Ok((q, 1))
}

fn run(cli: &Cli) -> Result<(Value, bool), CliError> {
    match &cli.command {
        Command::Fold(args) => {
            let ty = parse_type(&args.ty)?;
            let auto = parse_auto(&args.auto)?;
            let tb = twisted_basis_for(ty, auto)
                .map_err(|e| usage(e.to_string()))?;
            Ok((tb.fd.to_json(), true))
        }
        Command::Module(args) => cmd_module(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Drinfeld(args) => cmd_drinfeld(args),
    }
}

fn cmd_module(args: &ModuleArgs) -> Result<(Value, bool), CliError> {
    let ty = parse_type(&args.ty)?;
    let cb = chevalley_basis(ty);
    let coeffs: Vec<i64> = args
        .hw
        .split(',')
        .map(|t| t.trim().parse::<i64>().map_err(|_| usage("bad weight coefficient")))
        .collect::<Result<_, _>>()?;
    if coeffs.len() != cb.rs.rank() || coeffs.iter().any(|&c| c < 0) {
        return Err(usage(format!(
            "expected {} nonnegative coefficients",
            cb.rs.rank()
        )));
    }
    let hw = weight_from_coeffs(&cb, &coeffs);
    let formula_dim = weyl_dim(&cb.rs, &hw);

    let field_str = args.field.trim();
    let character_json = |ch: std::collections::BTreeMap<Vec<hyperloop_core::rootfold::Rat>, usize>| -> Value {
        Value::Array(
            ch.into_iter()
                .map(|(w, m)| {
                    json!({
                        "weight": w.iter().map(rat_string).collect::<Vec<_>>(),
                        "multiplicity": m,
                    })
                })
                .collect(),
        )
    };

    macro_rules! with_module {
        ($field:expr) => {{
            let field = $field;
            let weyl = build_weyl_module(&cb, &hw, field.clone(), args.kmax)
                .map_err(|e| precondition(e.to_string()))?;
            let weyl_dim_built = weyl.dim();
            let (module, simple_dim) = if args.simple {
                let s = weyl.simple_quotient();
                let d = s.dim();
                (s, Some(d))
            } else {
                (weyl, None)
            };
            let mut out = json!({
                "type": ty.to_string(),
                "highest_weight": coeffs,
                "field": format!("{}", field.ring_spec()),
                "weyl_dim": weyl_dim_built,
                "weyl_dim_formula": formula_dim.to_string(),
                "character": character_json(module.character()),
            });
            if let Some(d) = simple_dim {
                out["simple_dim"] = json!(d);
            }
            if args.full {
                out["module"] = module.to_json();
            }
            Ok((out, true))
        }};
    }

    if field_str.starts_with('Q') || field_str.starts_with('q') {
        let m = if field_str.contains("z3") { 3 } else { 1 };
        let sqrt2 = field_str.contains("s2");
        with_module!(QExt { m, sqrt2 })
    } else {
        let (p, k) = parse_finite_field(field_str)?;
        let field = FqField::new(p, k).map_err(|e| precondition(e.to_string()))?;
        with_module!(field)
    }
}

fn report_out(rep: VerificationReport, timing: Option<u128>) -> (Value, bool) {
    let mut rep = rep;
    rep.timing_ms = timing;
    let pass = rep.passed();
    (rep.to_json(), pass)
}

fn cmd_verify(args: &VerifyArgs) -> Result<(Value, bool), CliError> {
    match args.suite.as_str() {
        "heisenberg" => {
            let rep = check_heisenberg_identity(args.nmax.unwrap_or(6));
            Ok(report_out(rep, None))
        }
        "identities" => {
            let rep = check_divided_power_identities(args.nmax.unwrap_or(6), &default_fields());
            Ok(report_out(rep, None))
        }
        "evaluation" => Ok(report_out(evaluation_suite(), None)),
        "garland" => {
            let rank_max = args.rank_max.unwrap_or(if args.all { 5 } else { 3 });
            Ok(report_out(garland_suite(rank_max, 3), None))
        }
        "restriction" => {
            if let Some(pi_str) = &args.pi {
                let ty = parse_type(args.ty.as_deref().unwrap_or("A3"))?;
                let auto = parse_auto(args.auto.as_deref().unwrap_or("flip"))?;
                let (p, min_k) =
                    parse_finite_field(args.field.as_deref().unwrap_or("F5"))?;
                let tb = twisted_basis_for(ty, auto).map_err(|e| usage(e.to_string()))?;
                let field = field_for(&tb, p, min_k).map_err(|e| precondition(e.to_string()))?;
                let pi = parse::parse_pi(pi_str, &tb.fd, &field).map_err(lw_to_cli)?;
                let case = format!(
                    "{ty} {} F{p} pi={pi_str} over {}",
                    auto.name(),
                    field.ring_spec()
                );
                let rep = check_restriction_theorem(&pi, &tb, &field, &case);
                let pass = rep.passed();
                let out = VerificationReport {
                    suite: "restriction".into(),
                    cases: vec![rep],
                    timing_ms: None,
                };
                Ok((out.to_json(), pass))
            } else {
                Ok(report_out(restriction_suite(&[5, 7]), None))
            }
        }
        "hw" => {
            // the relation battery over the default twisted evaluation grid
            let mut cases = Vec::new();
            for (base, auto, p) in [
                ("A2", AutoKind::Flip, 7u64),
                ("A3", AutoKind::Flip, 5),
                ("A4", AutoKind::Flip, 7),
                ("D4", AutoKind::Rot3, 7),
            ] {
                let ty = parse_type(base)?;
                let tb = twisted_basis_for(ty, auto).map_err(|e| usage(e.to_string()))?;
                let field = field_for(&tb, p, 1).map_err(|e| precondition(e.to_string()))?;
                let values = vec![1i64; tb.fd.folded.rank()];
                let tm = hyperloop_core::verify::twisted_eval_module(&tb, &field, &values, 2, 5);
                cases.push(hyperloop_core::verify::check_hw_relations(
                    &tm,
                    &format!("{base} {} F{p}", auto.name()),
                ));
            }
            let rep = VerificationReport { suite: "hw".into(), cases, timing_ms: None };
            Ok(report_out(rep, None))
        }
        other => Err(usage(format!("unknown suite `{other}`"))),
    }
}

fn lw_to_cli(e: LwError) -> CliError {
    match e {
        LwError::NotSplit { .. } | LwError::NoPrimitiveRoot | LwError::ZeroEvaluationPoint => {
            precondition(e.to_string())
        }
        LwError::Loop(inner) => precondition(inner.to_string()),
        LwError::NotHighestLWeight(_) => CliError { code: 1, message: e.to_string() },
    }
}

fn cmd_drinfeld(args: &DrinfeldArgs) -> Result<(Value, bool), CliError> {
    let ty = parse_type(&args.ty)?;
    let auto = parse_auto(&args.auto)?;
    let (p, min_k) = parse_finite_field(&args.field)?;
    let tb = twisted_basis_for(ty, auto).map_err(|e| usage(e.to_string()))?;
    let field = field_for(&tb, p, min_k).map_err(|e| precondition(e.to_string()))?;
    let pi = parse::parse_pi(&args.pi, &tb.fd, &field).map_err(lw_to_cli)?;
    let sd = standard_decomposition(&pi, &tb.fd, &field).map_err(lw_to_cli)?;
    let (omega, factors) = omega_from_pi(&sd, &tb.fd, &field);
    let out = json!({
        "base": ty.to_string(),
        "auto": auto.name(),
        "field": format!("{}", field.ring_spec()),
        "pi": pi.to_json(&field),
        "standard_decomposition": sd.to_json(&field),
        "omega": omega.to_json(&field),
        "evaluation_factors": factors.iter().map(|(mu, a)| json!({
            "weight": mu.iter().map(rat_string).collect::<Vec<_>>(),
            "point": field.elt_string(a),
        })).collect::<Vec<_>>(),
    });
    Ok((out, true))
}
