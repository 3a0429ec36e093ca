use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use orbitlab::heisenberg::BilinearForm;
use orbitlab::kirillov::{KirillovError, NamedFamily, UnipotentGroupSpec};
use orbitlab::mackey::{brute_force_census, Hei2Spec, MackeyError};
use orbitlab::poly::{family_isaacs, prime_powers_above, verify_reference_polynomials, CensusFamily, PolyError};
use orbitlab::roots::{abelian_ideal_check, Family, RootError, RootSystemType, Subalgebra};
use orbitlab::{FieldCtx, FieldError, DEFAULT_BUDGET};

mod pretty;

const SCHEMA_VERSION: u32 = 1;

#[derive(Parser, Debug)]
#[command(name = "orbitlab", version, about = "Orbit and character censuses for finite unipotent groups")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Serialize)]
struct Common {
    /// Enumeration budget (points touched).
    #[arg(long, env = "ORBITLAB_BUDGET", default_value_t = DEFAULT_BUDGET, value_parser = clap::value_parser!(u64).range(1..))]
    budget: u64,
    #[arg(long, default_value_t = 49325)]
    seed: u64,
    /// Write JSON here instead of standard output.
    #[arg(long)]
    #[serde(skip)]
    output: Option<PathBuf>,
    /// Human-readable rendering of the same document.
    #[arg(long)]
    #[serde(skip)]
    pretty: bool,
    /// Report table mismatches but exit 0.
    #[arg(long)]
    allow_paper_discrepancy: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generalized Heisenberg groups H_β.
    Genhei {
        #[arg(value_enum)]
        action: GenheiAction,
        #[command(flatten)]
        args: GenheiArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Two-layered orthogonal Heisenberg groups.
    Hei2 {
        #[arg(value_enum)]
        action: Hei2Action,
        #[command(flatten)]
        args: Hei2Args,
        #[command(flatten)]
        common: Common,
    },
    /// Positive roots and the first-column ideal.
    Roots {
        #[arg(value_enum)]
        action: RootsAction,
        #[command(flatten)]
        args: RootsArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Polynomiality and nonnegativity in v = q - 1.
    Isaacs {
        #[arg(value_enum)]
        action: IsaacsAction,
        #[command(flatten)]
        args: IsaacsArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Orbit-method verification for a named group.
    Kirillov {
        #[command(flatten)]
        args: KirillovArgs,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize)]
#[serde(rename_all = "lowercase")]
enum GenheiAction {
    Classify,
    Enumerate,
    Verify,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize)]
#[serde(rename_all = "lowercase")]
enum Hei2Action {
    Census,
    Brute,
    Verify,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize)]
#[serde(rename_all = "lowercase")]
enum RootsAction {
    List,
    Check,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize)]
#[serde(rename_all = "lowercase")]
enum IsaacsAction {
    Family,
    Reference,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize)]
#[serde(rename_all = "lowercase")]
enum FormKind {
    Zero,
    Identity,
    Symplectic,
    Random,
}

#[derive(Args, Debug, Clone, Serialize)]
struct FieldArgs {
    /// Field size: `p`, `p^k` or a prime power such as `25`.
    #[arg(long, default_value = "5")]
    q: String,
    /// Monic modulus coefficients, constant term first, e.g. `2,0,1`.
    #[arg(long, value_delimiter = ',')]
    modulus: Option<Vec<u32>>,
}

#[derive(Args, Debug, Clone, Serialize)]
struct GenheiArgs {
    #[command(flatten)]
    field: FieldArgs,
    /// Dimension of V; inferred from the Gram matrix when one is given.
    #[arg(long)]
    n: Option<usize>,
    /// Integer Gram matrix as JSON, e.g. `[[0,1],[0,0]]`.
    #[arg(long, conflicts_with_all = ["gram_file", "form"])]
    gram: Option<String>,
    #[arg(long, conflicts_with = "form")]
    gram_file: Option<PathBuf>,
    /// Named form when no Gram matrix is given.
    #[arg(long, value_enum)]
    form: Option<FormKind>,
}

#[derive(Args, Debug, Clone, Serialize)]
struct Hei2Args {
    #[command(flatten)]
    field: FieldArgs,
    /// B, C or D.
    #[arg(long)]
    family: String,
    /// Heisenberg parameter; the root system has rank n + 1.
    #[arg(long, default_value_t = 2)]
    n: usize,
}

#[derive(Args, Debug, Clone, Serialize)]
struct RootsArgs {
    #[command(flatten)]
    field: FieldArgs,
    /// A, B, C or D.
    #[arg(long)]
    family: String,
    /// Rank of the root system.
    #[arg(long, default_value_t = 3)]
    n: usize,
}

#[derive(Args, Debug, Clone, Serialize)]
struct IsaacsArgs {
    /// gen-hei, hei2-B or hei2-D.
    #[arg(long)]
    family: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    gram: Option<String>,
    #[arg(long)]
    gram_file: Option<PathBuf>,
    /// Sample sizes; defaults to the smallest admissible prime powers, one more than needed.
    #[arg(long, value_delimiter = ',')]
    qs: Option<Vec<u64>>,
}

#[derive(Args, Debug, Clone, Serialize)]
struct KirillovArgs {
    #[command(flatten)]
    field: FieldArgs,
    /// gen-hei, hei2-B, hei2-C, hei2-D, hei-A or hei2-A.
    #[arg(long)]
    family: String,
    #[arg(long, default_value_t = 2)]
    n: usize,
    #[arg(long)]
    gram: Option<String>,
}

/// Usage and budget errors; both exit with status 2.
#[derive(Debug)]
struct CliError(String);

macro_rules! usage_from {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError(e.to_string())
            }
        }
    )*};
}

usage_from!(FieldError, RootError, KirillovError, MackeyError, PolyError, orbitlab::heisenberg::HeisError, serde_json::Error, std::io::Error);

struct Outcome {
    result: Value,
    passed: bool,
    discrepancy: bool,
}

fn field(args: &FieldArgs) -> Result<FieldCtx, CliError> {
    let ctx: FieldCtx = match &args.modulus {
        None => args.q.parse()?,
        Some(m) => {
            let p: u64 = args
                .q
                .split('^')
                .next()
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| CliError(format!("bad field size {:?}", args.q)))?;
            let p = orbitlab::field::prime_power(p).map(|(p, _)| p).unwrap_or(p);
            let ctx = FieldCtx::with_modulus(p, m)?;
            if let Ok(expected) = args.q.parse::<FieldCtx>() {
                if expected.q() != ctx.q() {
                    return Err(CliError(format!("modulus gives q = {}, not {}", ctx.q(), args.q)));
                }
            }
            ctx
        }
    };
    Ok(ctx)
}

fn parse_gram(gram: &Option<String>, file: &Option<PathBuf>) -> Result<Option<Vec<Vec<i64>>>, CliError> {
    let text = match (gram, file) {
        (Some(g), _) => g.clone(),
        (None, Some(f)) => fs::read_to_string(f)?,
        (None, None) => return Ok(None),
    };
    let g: Vec<Vec<i64>> = serde_json::from_str(&text)?;
    if g.is_empty() || g.iter().any(|r| r.len() != g.len()) {
        return Err(CliError("Gram matrix must be square and nonempty".into()));
    }
    Ok(Some(g))
}

fn genhei_form(ctx: &FieldCtx, args: &GenheiArgs, seed: u64) -> Result<(BilinearForm, &'static str), CliError> {
    if let Some(g) = parse_gram(&args.gram, &args.gram_file)? {
        if args.n.is_some_and(|n| n != g.len()) {
            return Err(CliError("--n disagrees with the Gram matrix".into()));
        }
        return Ok((BilinearForm::from_ints(ctx, &g)?, "gram"));
    }
    let n = args.n.ok_or_else(|| CliError("--n is required without a Gram matrix".into()))?;
    Ok(match args.form.unwrap_or(FormKind::Random) {
        FormKind::Zero => (BilinearForm::zero(ctx, n), "zero"),
        FormKind::Identity => (BilinearForm::identity(ctx, n), "identity"),
        FormKind::Symplectic => {
            if n % 2 != 0 {
                return Err(CliError("symplectic form needs even n".into()));
            }
            (BilinearForm::standard_symplectic(ctx, n / 2), "symplectic")
        }
        FormKind::Random => (BilinearForm::random(ctx, n, seed), "random"),
    })
}

fn gram_json(form: &BilinearForm) -> Value {
    let g = form.gram();
    json!((0..g.rows())
        .map(|i| (0..g.cols()).map(|j| g.get(i, j).index()).collect::<Vec<_>>())
        .collect::<Vec<_>>())
}

fn run_genhei(action: GenheiAction, args: &GenheiArgs, common: &Common) -> Result<Outcome, CliError> {
    let ctx = field(&args.field)?;
    let (form, kind) = genhei_form(&ctx, args, common.seed)?;
    let rank = form.antisymmetric_rank();
    let closed = form.classify_orbits_closed_form();
    let base = json!({
        "form": kind,
        "gram": gram_json(&form),
        "antisymmetric_rank": rank,
    });
    let (extra, passed) = match action {
        GenheiAction::Classify => (json!({ "closed_form": closed }), true),
        GenheiAction::Enumerate => {
            let (brute, _) = form.enumerate_orbits_brute(common.budget)?;
            let ok = brute == closed;
            (json!({ "closed_form": closed, "brute_force": brute, "censuses_agree": ok }), ok)
        }
        GenheiAction::Verify => {
            let g = UnipotentGroupSpec::from_heisenberg(&form)?;
            let report = g.verify_orbit_method(common.budget)?;
            let ok = report.passed && report.orbit_count == closed.total_orbits;
            (json!({ "closed_form": closed, "verification": report }), ok)
        }
    };
    Ok(Outcome {
        result: merge(base, extra),
        passed,
        discrepancy: false,
    })
}

fn merge(mut a: Value, b: Value) -> Value {
    if let (Some(a), Value::Object(b)) = (a.as_object_mut(), b) {
        a.extend(b);
    }
    a
}

fn hei2_spec(args: &Hei2Args) -> Result<Hei2Spec, CliError> {
    let family: Family = args.family.parse()?;
    Ok(Hei2Spec::new(family, args.n, &field(&args.field)?)?)
}

fn run_hei2(action: Hei2Action, args: &Hei2Args, common: &Common) -> Result<Outcome, CliError> {
    let spec = hei2_spec(args)?;
    let base = json!({
        "family": spec.family.to_string(),
        "root_system": format!("{}{}", spec.family, spec.n + 1),
        "k": spec.k(),
        "group_order": spec.group_order(),
    });
    match action {
        Hei2Action::Census => {
            let g = spec.build_groups()?;
            let census = g.mackey_census(common.budget)?;
            let orbits = g.character_orbits(common.budget)?;
            let mut cases = std::collections::BTreeMap::new();
            for o in &orbits {
                *cases.entry(format!("{:?}", o.case)).or_insert(0u64) += 1;
            }
            Ok(Outcome {
                passed: census.sum_of_squares_ok,
                discrepancy: !census.discrepancy_flags.is_empty(),
                result: merge(
                    base,
                    json!({
                        "a_roots": g.a_roots,
                        "b_roots": g.b_roots,
                        "character_orbits": orbits.len(),
                        "orbits_by_case": cases,
                        "census": census,
                        "oracle_class_count": Value::Null,
                    }),
                ),
            })
        }
        Hei2Action::Brute => {
            let brute = brute_force_census(&spec, common.budget)?;
            Ok(Outcome {
                passed: true,
                discrepancy: false,
                result: merge(base, json!({ "brute_force": brute })),
            })
        }
        Hei2Action::Verify => {
            let g = spec.build_groups()?;
            let census = g.mackey_census(common.budget)?;
            let brute = brute_force_census(&spec, common.budget)?;
            let totals_agree = census.total == brute.class_count;
            let per_degree_agree = brute.per_degree.as_ref().map(|per| {
                per.iter().map(|d| (d.degree, d.count)).collect::<Vec<_>>()
                    == census.computed_rows.iter().map(|r| (r.degree, r.count)).collect::<Vec<_>>()
            });
            let passed = totals_agree && census.sum_of_squares_ok && per_degree_agree != Some(false);
            Ok(Outcome {
                passed,
                discrepancy: !census.discrepancy_flags.is_empty(),
                result: merge(
                    base,
                    json!({
                        "census": census,
                        "oracle_class_count": brute.class_count,
                        "brute_force": brute,
                        "totals_agree": totals_agree,
                        "per_degree_agree": per_degree_agree,
                    }),
                ),
            })
        }
    }
}

fn run_roots(action: RootsAction, args: &RootsArgs) -> Result<Outcome, CliError> {
    let ctx = field(&args.field)?;
    let t = RootSystemType::new(args.family.parse()?, args.n)?;
    let roots = t.positive_roots();
    let vectors = t.root_vectors(&ctx);
    let membership = vectors.iter().all(|v| t.in_classical_algebra(&v.matrix));
    let base = json!({
        "root_system": format!("{}{}", t.family, t.n),
        "positive_roots": roots,
        "count": roots.len(),
        "root_vectors_in_algebra": membership,
    });
    let (extra, passed) = match action {
        RootsAction::List => {
            let cols: Vec<Value> = (1..=t.n)
                .map(|c| json!({ "column": c, "roots": t.column_roots(&[c]) }))
                .collect();
            (json!({ "columns": cols }), membership)
        }
        RootsAction::Check => {
            let name = if t.family == Family::A { Subalgebra::Hei } else { Subalgebra::Hei2 };
            let ambient = t.subalgebra_basis(name, &ctx)?;
            let first: Vec<_> = ambient.iter().filter(|v| v.root.col() == 1).cloned().collect();
            let check = abelian_ideal_check(&ctx, &first, &ambient)?;
            let witness = check.witness.as_ref().map(|(a, b, m)| {
                let nonzero: Vec<Value> = (0..m.rows())
                    .flat_map(|i| (0..m.cols()).map(move |j| (i, j)))
                    .filter(|&(i, j)| !m.get(i, j).is_zero())
                    .map(|(i, j)| json!([i, j, m.get(i, j).index()]))
                    .collect();
                json!({ "left": a, "right": b, "bracket_entries": nonzero })
            });
            let extra = json!({
                "subalgebra": format!("{name:?}"),
                "first_column": {
                    "is_subalgebra": check.is_subalgebra,
                    "is_abelian": check.is_abelian,
                    "is_ideal": check.is_ideal,
                    "witness": witness,
                },
            });
            (extra, membership && check.is_subalgebra && check.is_ideal)
        }
    };
    Ok(Outcome {
        result: merge(base, extra),
        passed,
        discrepancy: false,
    })
}

fn run_isaacs(action: IsaacsAction, args: &IsaacsArgs, common: &Common) -> Result<Outcome, CliError> {
    match action {
        IsaacsAction::Reference => {
            let report = verify_reference_polynomials();
            let nonneg = report.entries.iter().all(|e| e.isaacs.pass);
            let identities = report.entries.iter().all(|e| e.identity_holds != Some(false));
            Ok(Outcome {
                passed: nonneg,
                discrepancy: !identities,
                result: json!({ "nonnegativity_ok": nonneg, "identities_ok": identities, "report": report }),
            })
        }
        IsaacsAction::Family => {
            let name = args
                .family
                .as_deref()
                .ok_or_else(|| CliError("--family is required".into()))?;
            let family = match name {
                "gen-hei" => {
                    let gram = parse_gram(&args.gram, &args.gram_file)?
                        .ok_or_else(|| CliError("gen-hei needs --gram or --gram-file".into()))?;
                    CensusFamily::GenHeisenberg { gram }
                }
                other => match other.parse::<NamedFamily>()? {
                    NamedFamily::Hei2(f) if f != Family::C => CensusFamily::Hei2 {
                        family: f,
                        n: args.n.unwrap_or(2),
                    },
                    _ => return Err(CliError(format!("unsupported family {other}"))),
                },
            };
            let min_char = if matches!(family, CensusFamily::Hei2 { .. }) { 3 } else { 2 };
            let qs = args
                .qs
                .clone()
                .unwrap_or_else(|| prime_powers_above(min_char, family.degree_bound() + 2));
            let report = family_isaacs(&family, &qs, common.budget)?;
            Ok(Outcome {
                passed: report.passed,
                discrepancy: false,
                result: json!({ "report": report }),
            })
        }
    }
}

fn run_kirillov(args: &KirillovArgs, common: &Common) -> Result<Outcome, CliError> {
    let ctx = field(&args.field)?;
    let family: NamedFamily = args.family.parse()?;
    let form = match parse_gram(&args.gram, &None)? {
        Some(g) => Some(BilinearForm::from_ints(&ctx, &g)?),
        None => None,
    };
    let n = form.as_ref().map_or(args.n, |f| f.n());
    let g = family.build(&ctx, n, form.as_ref())?;
    let report = g.verify_orbit_method(common.budget)?;
    Ok(Outcome {
        passed: report.passed,
        discrepancy: false,
        result: json!({
            "group": family.to_string(),
            "nilpotency_class": g.nilpotency_class(),
            "verification": report,
        }),
    })
}

fn document(name: &str, config: Value, common: &Common, outcome: &Outcome) -> Value {
    json!({
        "schema_version": SCHEMA_VERSION,
        "command": name,
        "config": config,
        "seed": common.seed,
        "budget": common.budget,
        "versions": { "orbitlab": orbitlab::VERSION, "orbitlab-cli": env!("CARGO_PKG_VERSION") },
        "result": outcome.result,
        "passed": outcome.passed,
        "discrepancy": outcome.discrepancy,
    })
}

fn execute(cli: &Cli) -> Result<(Value, &Common, Outcome), CliError> {
    let (name, config, common, outcome) = match &cli.command {
        Command::Genhei { action, args, common } => (
            format!("genhei {}", json!(action).as_str().unwrap_or_default()),
            serde_json::to_value(args)?,
            common,
            run_genhei(*action, args, common)?,
        ),
        Command::Hei2 { action, args, common } => (
            format!("hei2 {}", json!(action).as_str().unwrap_or_default()),
            serde_json::to_value(args)?,
            common,
            run_hei2(*action, args, common)?,
        ),
        Command::Roots { action, args, common } => (
            format!("roots {}", json!(action).as_str().unwrap_or_default()),
            serde_json::to_value(args)?,
            common,
            run_roots(*action, args)?,
        ),
        Command::Isaacs { action, args, common } => (
            format!("isaacs {}", json!(action).as_str().unwrap_or_default()),
            serde_json::to_value(args)?,
            common,
            run_isaacs(*action, args, common)?,
        ),
        Command::Kirillov { args, common } => (
            "kirillov".to_string(),
            serde_json::to_value(args)?,
            common,
            run_kirillov(args, common)?,
        ),
    };
    let mut config = config;
    if let Value::Object(m) = &mut config {
        m.insert("allow_paper_discrepancy".into(), json!(common.allow_paper_discrepancy));
    }
    Ok((document(&name, config, common, &outcome), common, outcome))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (doc, common, outcome) = match execute(&cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {}", e.0);
            return ExitCode::from(2);
        }
    };
    let text = if common.pretty {
        pretty::render(&doc)
    } else {
        let mut s = serde_json::to_string_pretty(&doc).expect("JSON values serialize");
        s.push('\n');
        s
    };
    let written = match &common.output {
        Some(path) => fs::write(path, &text),
        None => std::io::stdout().write_all(text.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    if !outcome.passed {
        eprintln!("failed: a check did not hold");
        return ExitCode::from(1);
    }
    if outcome.discrepancy {
        eprintln!("DISCREPANCY: printed values differ from computed values");
        if !common.allow_paper_discrepancy {
            return ExitCode::from(1);
        }
    }
    ExitCode::SUCCESS
}
