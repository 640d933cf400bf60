//! Command-line front end.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::PathBuf;

use adelic_baker_core::ball::ComplexBall;
use adelic_baker_core::baker::{check_param_properties, compute_params, delta_bound_holds, delta_lcm, theorem_bound, BoundKind};
use adelic_baker_core::bundle::sym_max_slope_bound;
use adelic_baker_core::heights::weil_height;
use adelic_baker_core::linform::verify_instance;
use adelic_baker_core::places::{enumerate_places_lenient, find_place};
use adelic_baker_core::siegel::{
    absolute_bound, absolute_siegel_witness, approx_absolute_bound, approx_hypothesis, approx_siegel_search,
    bombieri_vaaler_bound, classical_bound, classical_siegel_search, SiegelWitness, TwistedBundle,
};
use adelic_baker_core::{Ball, NumberField, PrecisionContext};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::format::{
    bound_json, bundle_to_json, height_json, integer_matrix, lambda_string, params_json, parse_log_real, parse_matrix,
    report_json, BoundInstanceFile, BundleFile, InputError, InstanceFile, SiegelFile, FORMAT,
};
use crate::suite;

#[derive(Parser, Debug)]
#[command(name = "adelic-baker", version, about = "Heights, adelic bundles, Siegel lemmas and explicit bounds for linear forms in logarithms")]
pub struct Cli {
    /// Archimedean working precision in bits.
    #[arg(long, global = true, default_value_t = 128)]
    pub prec: u32,
    /// p-adic working precision in digits.
    #[arg(long = "padic-digits", global = true, default_value_t = 30)]
    pub padic_digits: u32,
    /// Also write a machine-readable JSON report to this path.
    #[arg(long, global = true)]
    pub json: Option<PathBuf>,
    /// Seed for the Monte Carlo oracles of `selftest`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Absolute logarithmic Weil height with its per-place table.
    Height {
        #[arg(long, default_value = "x")]
        field: String,
        #[arg(long)]
        x: String,
    },
    /// Archimedean places and finite places above small primes.
    Places {
        #[arg(long, default_value = "x")]
        field: String,
        #[arg(long, default_value_t = 30)]
        bound: u64,
    },
    /// Degree, slopes, dual and symmetric-power slope bound of a bundle.
    Bundle {
        #[arg(value_enum)]
        op: BundleOp,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 2)]
        ell: u32,
    },
    /// Siegel-lemma bounds and witness searches.
    Siegel {
        #[arg(value_enum)]
        op: SiegelOp,
        #[command(flatten)]
        opts: SiegelOpts,
    },
    /// Explicit lower bound for a bound instance.
    Bound {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        kind: Option<String>,
    },
    /// Auxiliary parameters and their four properties.
    Params {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// `delta_l(h) = lcm{ C(m, k) : k <= l, m <= l h }`.
    Delta {
        #[arg(long)]
        l: u64,
        #[arg(long)]
        h: u64,
    },
    /// Evaluates the linear forms of an instance and compares them with a bound.
    Verify {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        kind: Option<String>,
    },
    /// Runs the acceptance suite.
    Selftest {
        /// Run a single criterion.
        #[arg(long)]
        criterion: Option<u32>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum BundleOp {
    Degree,
    Slope,
    Maxslope,
    Dual,
    Sym,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum SiegelOp {
    Bound,
    Search,
}

#[derive(Clone, Copy, Debug, ValueEnum, PartialEq, Eq)]
pub enum SiegelKindArg {
    Classical,
    Bv,
    Absolute,
    Approx,
}

#[derive(Args, Debug)]
pub struct SiegelOpts {
    #[arg(long, value_enum)]
    kind: SiegelKindArg,
    #[arg(long = "in")]
    input: PathBuf,
}

enum Failure {
    Usage(String),
    Failed(String),
}

impl From<InputError> for Failure {
    fn from(e: InputError) -> Failure {
        Failure::Usage(e.0)
    }
}

fn failed<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Failed(e.to_string())
}

struct Outcome {
    text: String,
    json: Value,
    ok: bool,
}

impl Outcome {
    fn ok(text: String, json: Value) -> Outcome {
        Outcome { text, json, ok: true }
    }
}

/// Parses `args` (including the program name), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let ctx = match PrecisionContext::new(cli.prec, cli.padic_digits) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    match dispatch(&cli, &ctx) {
        Ok(out) => {
            print!("{}", out.text);
            if let Some(path) = &cli.json {
                let body = serde_json::to_string_pretty(&out.json).expect("serializable");
                if let Err(e) = std::fs::write(path, body + "\n") {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    return 2;
                }
            }
            if out.ok {
                0
            } else {
                1
            }
        }
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            2
        }
        Err(Failure::Failed(m)) => {
            eprintln!("error: {m}");
            1
        }
    }
}

fn read(path: &PathBuf) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))
}

fn parse_kind(s: Option<&str>, fallback: Option<BoundKind>) -> Result<BoundKind, Failure> {
    match s {
        Some(s) => BoundKind::parse(s).ok_or_else(|| Failure::Usage(format!("unknown bound kind '{s}'"))),
        None => Ok(fallback.unwrap_or(BoundKind::Principal)),
    }
}

fn dispatch(cli: &Cli, ctx: &PrecisionContext) -> Result<Outcome, Failure> {
    match &cli.command {
        Command::Height { field, x } => height(field, x, ctx),
        Command::Places { field, bound } => places(field, *bound, ctx),
        Command::Bundle { op, input, ell } => bundle(*op, &read(input)?, *ell, ctx),
        Command::Siegel { op, opts } => siegel(*op, opts.kind, &read(&opts.input)?, ctx),
        Command::Bound { input, kind } => bound(&read(input)?, kind.as_deref(), ctx),
        Command::Params { input } => params(&read(input)?, ctx),
        Command::Delta { l, h } => delta(*l, *h),
        Command::Verify { input, kind } => verify(&read(input)?, kind.as_deref(), ctx),
        Command::Selftest { criterion } => selftest(*criterion, cli.seed.unwrap_or(suite::DEFAULT_SEED)),
    }
}

fn field(s: &str) -> Result<NumberField, Failure> {
    NumberField::parse(s).map_err(|e| Failure::Usage(e.to_string()))
}

fn height(field_s: &str, x: &str, ctx: &PrecisionContext) -> Result<Outcome, Failure> {
    let k = field(field_s)?;
    let x = k.parse_element(x).map_err(|e| Failure::Usage(e.to_string()))?;
    let h = weil_height(&k, &x, ctx).map_err(failed)?;
    let mut text = format!("h({}) = {}\n", k.format_element(&x), h.value);
    for c in &h.per_place {
        let _ = writeln!(text, "  {:<8} n_v = {}  {}", c.place.label(), c.n_v, c.value);
    }
    for (p, l) in &h.ramified {
        let _ = writeln!(text, "  above {p:<3} n_v = {}  {l}", k.degree());
    }
    Ok(Outcome::ok(text, height_json(&k, &h)))
}

fn places(field_s: &str, bound: u64, ctx: &PrecisionContext) -> Result<Outcome, Failure> {
    let k = field(field_s)?;
    let (list, skipped) = enumerate_places_lenient(&k, bound, ctx).map_err(failed)?;
    let mut text = String::new();
    let mut rows = Vec::new();
    for v in &list {
        let _ = writeln!(
            text,
            "{:<8} {}  n_v = {}{}",
            v.label(),
            if v.is_archimedean() { "archimedean" } else { "finite" },
            v.local_degree(),
            v.prime().map_or(String::new(), |_| format!("  f = {}", v.residue_degree())),
        );
        rows.push(json!({
            "place": v.label(),
            "p_or_inf": v.prime().map_or_else(|| "inf".to_string(), |p| p.to_string()),
            "n_v": v.local_degree(),
        }));
    }
    if !skipped.is_empty() {
        let _ = writeln!(text, "ramified or non-monogenic, not split: {skipped:?}");
    }
    Ok(Outcome::ok(
        text,
        json!({"format": FORMAT, "field": k.format_poly(), "places": rows, "unsupported_primes": skipped}),
    ))
}

fn bundle(op: BundleOp, input: &str, ell: u32, ctx: &PrecisionContext) -> Result<Outcome, Failure> {
    let b = BundleFile::parse(input)?.build(ctx)?;
    let out = match op {
        BundleOp::Degree => {
            let d = b.degree(ctx).map_err(failed)?;
            Outcome::ok(format!("deg = {d}\n"), json!({"format": FORMAT, "degree": d.to_string()}))
        }
        BundleOp::Slope => {
            let s = b.slope(ctx).map_err(failed)?;
            Outcome::ok(format!("slope = {s}\n"), json!({"format": FORMAT, "slope": s.to_string()}))
        }
        BundleOp::Maxslope => {
            let m = b.max_slope(ctx).map_err(failed)?;
            let k = b.field();
            let basis: Vec<Vec<String>> =
                m.subspace.iter().map(|c| c.iter().map(|x| k.format_element(x)).collect()).collect();
            Outcome::ok(
                format!(
                    "max slope {} {}\nrealized by span of {basis:?}\n",
                    if m.exact { "=" } else { ">=" },
                    m.value
                ),
                json!({"format": FORMAT, "max_slope": m.value.to_string(), "exact": m.exact, "subspace": basis}),
            )
        }
        BundleOp::Dual => {
            let d = b.dual().map_err(failed)?;
            let j = bundle_to_json(&d);
            Outcome::ok(serde_json::to_string_pretty(&j).expect("serializable") + "\n", j)
        }
        BundleOp::Sym => {
            let s = sym_max_slope_bound(&b, ell, ctx).map_err(failed)?;
            Outcome::ok(
                format!("mu_max(Sym^{ell}) <= {s}\n"),
                json!({"format": FORMAT, "ell": ell, "sym_max_slope_bound": s.to_string()}),
            )
        }
    };
    Ok(out)
}

fn witness_json(w: &SiegelWitness) -> Value {
    json!({
        "x": w.x.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
        "value": w.value.to_string(),
        "bound": w.bound.to_string(),
        "residual": w.residual.as_ref().map(|r| r.to_string()),
    })
}

fn witness_text(w: &SiegelWitness) -> String {
    let xs: Vec<String> = w.x.iter().map(|c| c.to_string()).collect();
    let mut t = format!("x = ({})\nvalue = {}\nbound = {}\n", xs.join(", "), w.value, w.bound);
    if let Some(r) = &w.residual {
        let _ = writeln!(t, "residual = {r}");
    }
    t
}

const DEFAULT_BUDGET: u64 = 10_000_000;

fn approx_data(f: &SiegelFile, prec: u32) -> Result<(Vec<Vec<ComplexBall>>, u64, Ball), Failure> {
    let a = f
        .rows()?
        .iter()
        .map(|r| r.iter().map(|x| Ok(ComplexBall::from_rational(&x.rational()?, prec))).collect())
        .collect::<Result<Vec<Vec<_>>, InputError>>()?;
    let h = f.h.ok_or_else(|| Failure::Usage("'H' is required".into()))?;
    let eps = f.eps.as_ref().ok_or_else(|| Failure::Usage("'eps' is required".into()))?.rational()?;
    Ok((a, h, Ball::from_rational(&eps, prec)))
}

fn siegel(op: SiegelOp, kind: SiegelKindArg, input: &str, ctx: &PrecisionContext) -> Result<Outcome, Failure> {
    let f = SiegelFile::parse(input)?;
    let prec = ctx.arch_bits;
    let bundle = || -> Result<_, Failure> {
        Ok(f
            .bundle
            .as_ref()
            .ok_or_else(|| Failure::Usage("'bundle' is required".into()))?
            .build(ctx)?)
    };
    match (op, kind) {
        (SiegelOp::Bound, SiegelKindArg::Classical) => {
            let rows = integer_matrix(f.rows()?)?;
            let (mu, nu) = (rows.len(), f.unknowns()?);
            let a_max = rows.iter().flatten().map(|c| num_traits::Signed::abs(c)).max().unwrap_or_default();
            let (b, floor) = classical_bound(mu, nu, &a_max, prec).map_err(failed)?;
            Ok(Outcome::ok(
                format!("|x|_inf <= 1 + (nu A)^(mu/(nu-mu)) = {b}, integer bound {floor}\n"),
                json!({"format": FORMAT, "kind": "classical", "bound": b.to_string(), "floor": floor.to_string()}),
            ))
        }
        (SiegelOp::Bound, SiegelKindArg::Bv) => {
            let b = bundle()?;
            let rd = f.log_rd.as_deref().map(|s| parse_log_real(s, prec)).transpose()?;
            let v = bombieri_vaaler_bound(&b, rd, ctx).map_err(failed)?;
            Ok(Outcome::ok(
                format!("h(x) <= {v}\n"),
                json!({"format": FORMAT, "kind": "bv", "bound": v.to_string()}),
            ))
        }
        (SiegelOp::Bound, SiegelKindArg::Absolute) => {
            let b = bundle()?;
            let v = match &f.twist {
                None => absolute_bound(&b, ctx).map_err(failed)?,
                Some(t) => {
                    let k = b.field().clone();
                    let v0 = find_place(&k, &t.v0, ctx).map_err(|e| Failure::Usage(e.to_string()))?;
                    let tb = TwistedBundle::new(b, v0, t.alpha.element(&k)?, parse_matrix(&k, &t.matrix)?)
                        .map_err(|e| Failure::Usage(e.to_string()))?;
                    let op = tb.operator_norm_upper(ctx).map_err(failed)?;
                    approx_absolute_bound(&tb, &op, ctx).map_err(failed)?
                }
            };
            Ok(Outcome::ok(
                format!("h(x) <= {v}\n"),
                json!({"format": FORMAT, "kind": "absolute", "twisted": f.twist.is_some(), "bound": v.to_string()}),
            ))
        }
        (SiegelOp::Bound, SiegelKindArg::Approx) => {
            let (a, h, eps) = approx_data(&f, prec)?;
            let holds = approx_hypothesis(&a, h, &eps, prec).map_err(failed)?;
            Ok(Outcome {
                text: format!(
                    "(2 mu H A / eps + 1)^(2 rho) < (H + 1)^nu: {}\n",
                    if holds { "holds" } else { "fails" }
                ),
                json: json!({"format": FORMAT, "kind": "approx", "hypothesis": holds}),
                ok: holds,
            })
        }
        (SiegelOp::Search, SiegelKindArg::Classical) => {
            let rows = integer_matrix(f.rows()?)?;
            let nu = f.unknowns()?;
            let w = classical_siegel_search(&rows, nu, f.budget.unwrap_or(DEFAULT_BUDGET)).map_err(failed)?;
            Ok(Outcome::ok(witness_text(&w), json!({"format": FORMAT, "kind": "classical", "witness": witness_json(&w)})))
        }
        (SiegelOp::Search, SiegelKindArg::Approx) => {
            let (a, h, eps) = approx_data(&f, prec)?;
            let w = approx_siegel_search(&a, h, &eps, f.budget.unwrap_or(DEFAULT_BUDGET)).map_err(failed)?;
            Ok(Outcome::ok(witness_text(&w), json!({"format": FORMAT, "kind": "approx", "witness": witness_json(&w)})))
        }
        (SiegelOp::Search, SiegelKindArg::Absolute | SiegelKindArg::Bv) => {
            let b = bundle()?;
            let w = absolute_siegel_witness(&b, f.radius.unwrap_or(20), ctx).map_err(failed)?;
            let name = if kind == SiegelKindArg::Bv { "bv" } else { "absolute" };
            let mut j = witness_json(&w);
            if kind == SiegelKindArg::Bv {
                let rd = f.log_rd.as_deref().map(|s| parse_log_real(s, prec)).transpose()?;
                j["bound"] = json!(bombieri_vaaler_bound(&b, rd, ctx).map_err(failed)?.to_string());
            }
            Ok(Outcome::ok(witness_text(&w), json!({"format": FORMAT, "kind": name, "witness": j})))
        }
    }
}

fn bound(input: &str, kind: Option<&str>, ctx: &PrecisionContext) -> Result<Outcome, Failure> {
    let f = BoundInstanceFile::parse(input)?;
    let fallback = f.kind.as_deref().map(|s| parse_kind(Some(s), None)).transpose()?;
    let kind = parse_kind(kind, fallback)?;
    let inst = f.build(ctx.arch_bits)?;
    let b = theorem_bound(kind, &inst, ctx.arch_bits).map_err(failed)?;
    let text = format!(
        "{} bound: log|Lambda| >= {}\n  log(-bound) = {}\n  branch = {}, frak_a = {}\n",
        kind.name(),
        b.value.to_scientific(8),
        b.value.log_magnitude(),
        crate::format::branch_name(b.branch),
        b.frak_a,
    );
    Ok(Outcome::ok(text, bound_json(&b)))
}

fn params(input: &str, ctx: &PrecisionContext) -> Result<Outcome, Failure> {
    let inst = BoundInstanceFile::parse(input)?.build(ctx.arch_bits)?;
    let ps = compute_params(&inst, ctx.arch_bits).map_err(failed)?;
    let props = check_param_properties(&ps, &inst);
    let text = format!(
        "C0 = {}\ny = {}\nfrak_a = {}\nS = {}\nU_-1 = {}\nU0 = {}\nT~ = {}\nx0 = {}\n(i) {}  (ii) {}  (iii) {}  (iv) {}\n",
        ps.c0,
        ps.y,
        ps.frak_a,
        ps.s.to_scientific(8),
        ps.u_minus1.to_scientific(8),
        ps.u0.to_scientific(8),
        ps.t_tilde.to_scientific(8),
        ps.x0.to_scientific(8),
        props.i,
        props.ii,
        props.iii,
        props.iv,
    );
    Ok(Outcome {
        text,
        json: params_json(&ps, &props),
        ok: props.all(),
    })
}

fn delta(l: u64, h: u64) -> Result<Outcome, Failure> {
    let d = delta_lcm(l, h).map_err(|e| Failure::Usage(e.to_string()))?;
    let holds = delta_bound_holds(l, h, &d);
    Ok(Outcome {
        text: format!("{d}\n"),
        json: json!({"format": FORMAT, "l": l, "h": h, "delta": d.to_string(), "le_4h_pow_l": holds}),
        ok: holds,
    })
}

fn verify(input: &str, kind: Option<&str>, ctx: &PrecisionContext) -> Result<Outcome, Failure> {
    let value: Value = serde_json::from_str(input).map_err(|e| Failure::Usage(format!("malformed JSON: {e}")))?;
    let batch = value.is_array();
    let texts: Vec<String> = match value {
        Value::Array(items) => items.iter().map(|v| v.to_string()).collect(),
        other => vec![other.to_string()],
    };
    let mut jobs = Vec::with_capacity(texts.len());
    for t in &texts {
        let f = InstanceFile::parse(t)?;
        let k = parse_kind(kind, f.kind()?)?;
        jobs.push((f.build(ctx)?, k));
    }
    let results: Vec<_> = std::thread::scope(|s| {
        let handles: Vec<_> = jobs
            .iter()
            .map(|(inst, k)| s.spawn(move || verify_instance(inst, *k, ctx)))
            .collect();
        handles.into_iter().map(|h| h.join().expect("verification thread panicked")).collect()
    });
    let mut text = String::new();
    let mut reports = Vec::new();
    let mut all = true;
    for (i, r) in results.into_iter().enumerate() {
        let r = r.map_err(failed)?;
        if batch {
            let _ = writeln!(text, "instance {}:", i + 1);
        }
        let lam: Vec<String> = r.lambda_abs.iter().map(lambda_string).collect();
        let _ = writeln!(text, "  |Lambda| = [{}]", lam.join(", "));
        let _ = writeln!(
            text,
            "  {} bound: -exp({}) ({} branch)",
            r.bound.kind.name(),
            r.bound.value.log_magnitude(),
            crate::format::branch_name(r.bound.branch)
        );
        let _ = writeln!(text, "  log|Lambda| - bound = {}", r.margin.to_scientific(6));
        let _ = writeln!(
            text,
            "  hypotheses {}, s = {}, I = {:?}",
            crate::format::hypothesis_name(r.hypothesis.status),
            r.hypothesis.s,
            r.hypothesis.i_set.iter().map(|i| i + 1).collect::<Vec<_>>()
        );
        let _ = writeln!(text, "  {}", if r.pass { "PASS" } else { "FAIL" });
        all &= r.pass;
        reports.push(report_json(&r));
    }
    let json = if batch {
        json!({"format": FORMAT, "reports": reports})
    } else {
        reports.pop().expect("one report")
    };
    Ok(Outcome { text, json, ok: all })
}

fn selftest(criterion: Option<u32>, seed: u64) -> Result<Outcome, Failure> {
    let results = match criterion {
        Some(c) => vec![suite::run_one(c, seed).ok_or_else(|| Failure::Usage(format!("no criterion {c}")))?],
        None => suite::run_all(seed),
    };
    let mut text = String::new();
    for r in &results {
        let _ = writeln!(text, "{}", r.line());
    }
    let passed = results.iter().filter(|r| r.pass).count();
    let _ = writeln!(text, "{passed} of {} criteria pass", results.len());
    let rows: Vec<Value> = results
        .iter()
        .map(|r| json!({"id": r.id, "name": r.name, "pass": r.pass, "detail": r.detail, "seconds": r.elapsed.as_secs_f64()}))
        .collect();
    Ok(Outcome {
        text,
        json: json!({"format": FORMAT, "seed": seed, "criteria": rows}),
        ok: passed == results.len(),
    })
}
