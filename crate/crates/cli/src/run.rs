use std::sync::Arc;

use bartool::bars::{
    find_uniform_bound, is_uniform_at, monotonicity_violation, monotonize, BarRep, Verdict,
};
use bartool::continuity::{
    uniform_modulus_near_fan, uniform_modulus_near_fan_metric, uniform_modulus_via_embedding,
    NbhdFn, PathFunction, RealLine,
};
use bartool::fan_embed::{closure_image, phi_modulus, transfer_bound, transfer_uniform_bound};
use bartool::instances::{
    builtin, cset_table, BarDecl, CsetDecl, FanBarRef, Function, Instance, Pi01Decl, BUILTIN_JSON,
};
use bartool::metric::cantor::sample_check;
use bartool::metric::dyadic::grid_check;
use bartool::metric::uniform_modulus_near_compact;
use bartool::rational::{parse_rational, pow2};
use bartool::seqcode::{decode_small, extensions_up_to, FinSeq};
use bartool::trees::{level, Fan, Limits};
use bartool::{Error, Result};
use num::{BigRational, Signed};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::args::{
    Budgets, Cli, Command, ConvertArgs, EmbedArgs, ModulusArgs, Target, UniformBoundArgs,
};

pub struct Failure {
    pub error: Error,
    /// Emitted for budget failures, which still carry a result.
    pub certificate: Option<String>,
}

impl From<Error> for Failure {
    fn from(error: Error) -> Self {
        Failure {
            error,
            certificate: None,
        }
    }
}

/// Rationals above this width of extension codes make pairwise checks slow.
const PAIR_BUDGET: u64 = 40;
/// Grid spacing for the verification of metric moduli.
const GRID_STEP: (i64, i64) = (1, 200);
/// Cantor-space samples use every point with support below this many digits.
const SAMPLE_WIDTH: u32 = 10;

struct Context {
    instance: Instance,
    digest: String,
    limits: Limits,
}

fn limits_from_env() -> Result<Limits> {
    let mut limits = Limits::default();
    if let Ok(v) = std::env::var("BARTOOL_LEVEL_CAP") {
        limits.level_cap = v.trim().parse().map_err(|_| {
            Error::Schema(format!("BARTOOL_LEVEL_CAP=`{v}` is not a natural number"))
        })?;
    }
    Ok(limits)
}

fn load(cli: &Cli) -> Result<Context> {
    let (instance, bytes) = match &cli.instance {
        None => (builtin()?, BUILTIN_JSON.as_bytes().to_vec()),
        Some(path) => {
            let bytes = std::fs::read(path)
                .map_err(|e| Error::Schema(format!("{}: {e}", path.display())))?;
            let src = std::str::from_utf8(&bytes)
                .map_err(|_| Error::Schema(format!("{} is not UTF-8", path.display())))?;
            (Instance::from_json(src)?, bytes)
        }
    };
    let digest = Sha256::digest(&bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect();
    Ok(Context {
        instance,
        digest,
        limits: limits_from_env()?,
    })
}

fn certificate(
    ctx: &Context,
    command: &str,
    arguments: Value,
    budgets: Value,
    result: Value,
) -> String {
    let mut budgets = budgets;
    budgets["level_cap"] = json!(ctx.limits.level_cap);
    let c = json!({
        "command": command,
        "instance_sha256": ctx.digest,
        "arguments": arguments,
        "budgets": budgets,
        "result": result,
    });
    serde_json::to_string_pretty(&c).expect("certificates serialize")
}

fn budgets_json(b: &Budgets) -> Value {
    json!({"max_depth": b.max_depth, "budget": b.budget})
}

/// Wraps budget exhaustion into a certificate so the failure is recorded too.
fn budget_failure(
    ctx: &Context,
    command: &str,
    arguments: Value,
    budgets: Value,
    error: Error,
) -> Failure {
    let outcome = match &error {
        Error::NotFoundWithinBudget { max_depth } => {
            json!({"not_found_within_budget": {"max_depth": max_depth}})
        }
        Error::VerificationFailed {
            searched,
            max_depth,
        } => {
            json!({"verification_failed": {"searched": searched, "max_depth": max_depth}})
        }
        Error::LevelCapExceeded { depth, cap } => {
            json!({"level_cap_exceeded": {"depth": depth, "cap": cap}})
        }
        Error::SearchCapExceeded { node, cap } => {
            json!({"search_cap_exceeded": {"node": node, "cap": cap}})
        }
        Error::NoCommitment { node, depth } => {
            json!({"no_commitment": {"node": node, "depth": depth}})
        }
        _ => return error.into(),
    };
    Failure {
        certificate: Some(certificate(ctx, command, arguments, budgets, outcome)),
        error,
    }
}

pub fn run(cli: &Cli) -> Result<String, Failure> {
    let ctx = load(cli)?;
    match &cli.command {
        Command::UniformBound(a) => uniform_bound(&ctx, a),
        Command::Embed(a) => embed(&ctx, a),
        Command::Modulus(a) => modulus(&ctx, a),
        Command::Convert(a) => convert(&ctx, a),
        Command::List => Ok(list(&ctx)),
    }
}

fn list(ctx: &Context) -> String {
    let i = &ctx.instance;
    let c = json!({
        "instance_sha256": ctx.digest,
        "fans": i.fan_ids().collect::<Vec<_>>(),
        "bars": i.bar_ids().map(|id| json!({"id": id, "kind": i.bar(id).map(BarRep::kind).unwrap_or("?")})).collect::<Vec<_>>(),
        "functions": i.function_ids().collect::<Vec<_>>(),
        "metrics": i.metric_ids().collect::<Vec<_>>(),
    });
    serde_json::to_string_pretty(&c).expect("listing serializes")
}

fn uniform_bound(ctx: &Context, a: &UniformBoundArgs) -> Result<String, Failure> {
    let t = ctx.instance.fan(&a.fan)?;
    let mut p = ctx.instance.bar(&a.bar)?.clone();
    if a.monotonize {
        p = match p {
            BarRep::Dec(d) => BarRep::Dec(monotonize(&d)),
            other => {
                return Err(Error::KindNotSupported {
                    op: "monotonize",
                    kind: other.kind(),
                }
                .into())
            }
        };
    }
    let arguments = json!({"fan": a.fan, "bar": a.bar, "monotonize": a.monotonize});
    let budgets = budgets_json(&a.budgets);
    let depth = a.budgets.max_depth.min(ctx.instance.validation.depth);
    let checked = monotonicity_violation(t.as_ref(), &p, depth, a.budgets.budget, &ctx.limits)
        .map_err(|e| budget_failure(ctx, "uniform-bound", arguments.clone(), budgets.clone(), e))?;
    if let Some((node, child)) = checked {
        return Err(Error::Validation {
            what: format!(
                "bar `{}` is not monotone on fan `{}` (try --monotonize)",
                a.bar, a.fan
            ),
            witness: format!("{node} -> {child}"),
        }
        .into());
    }
    match find_uniform_bound(
        t.as_ref(),
        &p,
        a.budgets.max_depth,
        a.budgets.budget,
        &ctx.limits,
    ) {
        Ok(b) => Ok(certificate(
            ctx,
            "uniform-bound",
            arguments,
            budgets,
            json!({
                "N": b.n,
                "minimality": b.minimality,
                "level_sizes": b.level_sizes,
                "exact": b.exact,
                "monotone_checked_to_depth": depth,
            }),
        )),
        Err(e) => Err(budget_failure(ctx, "uniform-bound", arguments, budgets, e)),
    }
}

fn embed(ctx: &Context, a: &EmbedArgs) -> Result<String, Failure> {
    let t = ctx.instance.fan(&a.fan)?;
    let budgets = budgets_json(&a.budgets);
    if let Some(n) = a.n {
        let arguments = json!({"fan": a.fan, "n": n});
        let phi = phi_modulus(t.as_ref(), n, &ctx.limits)
            .map_err(|e| budget_failure(ctx, "embed", arguments.clone(), budgets.clone(), e))?;
        return Ok(certificate(
            ctx,
            "embed",
            arguments,
            budgets,
            json!({"phi": phi}),
        ));
    }
    let n = a.transfer.expect("clap requires n or --transfer");
    let arguments = json!({"fan": a.fan, "transfer": n, "bar": a.bar});
    let result = match &a.bar {
        None => {
            let img = closure_image(t.clone());
            transfer_bound(&img, n, &ctx.limits).map(|m| json!({"N": n, "M": m}))
        }
        Some(id) => {
            let p = ctx.instance.bar(id)?;
            transfer_uniform_bound(
                t.clone(),
                p,
                a.budgets.max_depth,
                a.budgets.budget,
                &ctx.limits,
            )
            .map(|r| {
                json!({
                    "N": r.image.n,
                    "M": r.m,
                    "image_minimality": r.image.minimality,
                    "image_level_sizes": r.image.level_sizes,
                    "uniform_at_M_on_fan": true,
                })
            })
        }
    };
    match result {
        Ok(r) => Ok(certificate(ctx, "embed", arguments, budgets, r)),
        Err(e) => Err(budget_failure(ctx, "embed", arguments, budgets, e)),
    }
}

fn epsilon(a: &ModulusArgs) -> Result<BigRational> {
    let src = a
        .epsilon
        .as_deref()
        .ok_or_else(|| Error::Schema("--epsilon is required for this function".into()))?;
    let eps = parse_rational(src)?;
    if !eps.is_positive() {
        return Err(Error::Schema(format!("--epsilon {src} is not positive")));
    }
    Ok(eps)
}

fn modulus(ctx: &Context, a: &ModulusArgs) -> Result<String, Failure> {
    let arguments = json!({
        "fan": a.fan,
        "compact": a.compact,
        "function": a.function,
        "epsilon": a.epsilon,
        "via_embedding": a.via_embedding,
    });
    let budgets = budgets_json(&a.budgets);
    let wrap = |e: Error| budget_failure(ctx, "modulus", arguments.clone(), budgets.clone(), e);
    let result = match (&a.fan, &a.compact) {
        (Some(fan), _) => modulus_on_fan(ctx, a, fan).map_err(wrap)?,
        (None, Some(compact)) => modulus_on_compact(ctx, a, compact).map_err(wrap)?,
        (None, None) => unreachable!("clap requires --fan or --compact"),
    };
    let failed = result["verification"]["passed"] == json!(false);
    let out = certificate(ctx, "modulus", arguments, budgets, result);
    if failed {
        return Err(Failure {
            error: Error::VerificationFailed {
                searched: 0,
                max_depth: a.budgets.max_depth,
            },
            certificate: Some(out),
        });
    }
    Ok(out)
}

fn modulus_on_fan(ctx: &Context, a: &ModulusArgs, fan: &str) -> Result<Value> {
    let t = ctx.instance.fan(fan)?;
    let (max_depth, budget, limits) = (a.budgets.max_depth, a.budgets.budget, &ctx.limits);
    match ctx.instance.function(&a.function)? {
        Function::Discrete(f) => {
            if a.epsilon.is_some() {
                return Err(Error::Schema(format!(
                    "function `{}` is valued in the naturals; drop --epsilon",
                    a.function
                )));
            }
            let cert = if a.via_embedding {
                uniform_modulus_via_embedding(t.clone(), f, max_depth, budget, limits)?
            } else {
                uniform_modulus_near_fan(t.as_ref(), f, max_depth, budget, limits)?
            };
            let verification =
                verify_discrete(t.as_ref(), f, cert.n, budget.min(PAIR_BUDGET * 5), limits)?;
            Ok(json!({
                "N": cert.n,
                "method": cert.method,
                "searched": cert.searched,
                "minimality": cert.minimality,
                "level_size": cert.level_size,
                "exact": cert.exact,
                "verification": verification,
            }))
        }
        Function::Rational(f) => {
            if a.via_embedding {
                return Err(Error::Schema(
                    "--via-embedding applies to natural-valued functions".into(),
                ));
            }
            let eps = epsilon(a)?;
            let g: Arc<dyn PathFunction<BigRational>> = Arc::new(f.clone());
            let cert = uniform_modulus_near_fan_metric(
                t.as_ref(),
                g,
                Arc::new(RealLine),
                &eps,
                max_depth,
                budget,
                limits,
            )?;
            let verification =
                verify_rational(t.as_ref(), f, cert.n, &eps, budget.min(PAIR_BUDGET), limits)?;
            Ok(json!({
                "N": cert.n,
                "epsilon": cert.epsilon,
                "method": cert.method,
                "searched": cert.searched,
                "minimality": cert.minimality,
                "level_size": cert.level_size,
                "exact": cert.exact,
                "verification": verification,
            }))
        }
        Function::Dense(_) => Err(Error::Schema(format!(
            "function `{}` lives on a metric space; use --compact",
            a.function
        ))),
    }
}

/// `f(a * b) = f(a)` for every `a` on level `n` and every `code(b) <= budget`.
fn verify_discrete(
    t: &dyn Fan,
    f: &NbhdFn<u64>,
    n: usize,
    budget: u64,
    limits: &Limits,
) -> Result<Value> {
    let exts: Vec<FinSeq> = extensions_up_to(budget).collect();
    let mut checked = 0usize;
    let mut first = None;
    for a in level(t, n, limits)? {
        let v = f.eval_at(&a)?;
        for b in &exts {
            checked += 1;
            let ab = a.concat(b);
            if f.eval_at(&ab)? != v && first.is_none() {
                first = Some(ab);
            }
        }
    }
    Ok(
        json!({"pairs": checked, "extension_budget": budget, "passed": first.is_none(), "first_violation": first}),
    )
}

/// `|f(a * b) - f(a * c)| < ε` for every `a` on level `n` and codes of `b, c` up to `budget`.
fn verify_rational(
    t: &dyn Fan,
    f: &NbhdFn<BigRational>,
    n: usize,
    eps: &BigRational,
    budget: u64,
    limits: &Limits,
) -> Result<Value> {
    let exts: Vec<FinSeq> = extensions_up_to(budget).collect();
    let mut checked = 0usize;
    let mut first = None;
    for a in level(t, n, limits)? {
        let values = exts
            .iter()
            .map(|b| f.eval_at(&a.concat(b)))
            .collect::<Result<Vec<_>>>()?;
        for (i, v) in values.iter().enumerate() {
            for (j, w) in values.iter().enumerate().skip(i + 1) {
                checked += 1;
                if (v - w).abs() >= *eps && first.is_none() {
                    first = Some((a.concat(&exts[i]), a.concat(&exts[j])));
                }
            }
        }
    }
    Ok(
        json!({"pairs": checked, "extension_budget": budget, "passed": first.is_none(), "first_violation": first}),
    )
}

fn modulus_on_compact(ctx: &Context, a: &ModulusArgs, compact: &str) -> Result<Value> {
    let metric = ctx.instance.metric(compact)?;
    let template = ctx.instance.dense_function(&a.function)?.ok_or_else(|| {
        Error::Schema(format!(
            "function `{}` is not defined on a metric space",
            a.function
        ))
    })?;
    let eps = epsilon(a)?;
    let (max_depth, budget, limits) = (a.budgets.max_depth, a.budgets.budget, &ctx.limits);
    let (m, verification) = match metric {
        bartool::instances::Metric::Reals(cs) => {
            let f = template.on_reals()?;
            let m = uniform_modulus_near_compact(
                cs,
                Arc::new(f.clone()),
                &eps,
                max_depth,
                budget,
                limits,
            )?;
            let (lo, hi) = cs.nets.bounds();
            let step = BigRational::new(GRID_STEP.0.into(), GRID_STEP.1.into());
            let report = grid_check(
                &f,
                &BigRational::from_integer(lo.into()),
                &BigRational::from_integer(hi.into()),
                &step,
                &pow2(-(m.n as i64 + 1)),
                &eps,
            );
            let v = json!({
                "kind": "grid",
                "step": step.to_string(),
                "points": report.points,
                "pairs": report.pairs,
                "violations": report.violations,
                "first_violation": report.first_violation,
                "passed": report.passed(),
            });
            (m, v)
        }
        bartool::instances::Metric::Cantor(cs) => {
            let f = template.on_cantor()?;
            let m = uniform_modulus_near_compact(
                cs,
                Arc::new(f.clone()),
                &eps,
                max_depth,
                budget,
                limits,
            )?;
            let report = sample_check(&f, m.n, SAMPLE_WIDTH, &eps);
            let v = json!({
                "kind": "samples",
                "width": SAMPLE_WIDTH,
                "points": report.points,
                "pairs": report.pairs,
                "violations": report.violations,
                "first_violation": report.first_violation,
                "passed": report.passed(),
            });
            (m, v)
        }
    };
    Ok(json!({
        "N": m.n,
        "delta": format!("2^-{}", m.n + 1),
        "delta_rational": m.delta,
        "epsilon": m.epsilon,
        "space": m.space,
        "function": m.function,
        "searched": m.searched,
        "lambda_precision": m.lambda_precision,
        "representatives": m.representatives,
        "minimality": m.minimality,
        "exact": m.exact,
        "verification": verification,
    }))
}

fn nodes_for(ctx: &Context, fan: Option<&str>, depth: usize, budget: u64) -> Result<Vec<FinSeq>> {
    match fan {
        Some(id) => {
            let t = ctx.instance.fan(id)?;
            let mut out = Vec::new();
            for n in 0..=depth {
                out.extend(level(t.as_ref(), n, &ctx.limits)?);
            }
            Ok(out)
        }
        None => Ok((0..=budget).map(decode_small).collect()),
    }
}

fn convert(ctx: &Context, a: &ConvertArgs) -> Result<String, Failure> {
    let p = ctx.instance.bar(&a.bar)?;
    let target = match a.to {
        Target::Cbar => "cbar",
        Target::Pi01 => "pi01",
    };
    let arguments = json!({"bar": a.bar, "to": target, "fan": a.fan, "depth": a.depth});
    let budgets = json!({"budget": a.budget, "depth": a.depth});
    let unsupported = || Error::UnsupportedDirection {
        from: p.kind(),
        to: target.into(),
    };
    let result = match (p, a.to) {
        (BarRep::Pi01(family), Target::Cbar) => {
            let fan_id = a.fan.as_deref().ok_or_else(|| {
                Error::Schema("--fan is required to convert a pi01 bar to a c-set".into())
            })?;
            let t = ctx.instance.fan(fan_id)?;
            let q = bartool::bars::pi01_to_cbar(t.clone(), family);
            let fragment = BarDecl::Cset(CsetDecl::FromPi01 {
                from_pi01: FanBarRef {
                    bar: a.bar.clone(),
                    fan: fan_id.to_string(),
                },
            });
            let table = cset_table(t.as_ref(), &q, a.depth.min(3), &ctx.limits)?;
            // Q(a) ⇒ P(a) on the fan, both quantifiers cut at the budget.
            let (mut checked, mut violations, mut first) = (0usize, 0usize, None);
            for node in nodes_for(ctx, Some(fan_id), a.depth, a.budget)? {
                checked += 1;
                let q_holds = q.first_failure(&node, a.budget)?.is_none();
                let p_holds = family.first_failure(&node, a.budget)?.is_none();
                if q_holds && !p_holds {
                    violations += 1;
                    first.get_or_insert(node);
                }
            }
            let q_rep: BarRep = q.clone().into();
            let transfer = match find_uniform_bound(t.as_ref(), p, a.depth, a.budget, &ctx.limits) {
                Ok(b) => {
                    let verdict =
                        is_uniform_at(t.as_ref(), &q_rep, b.n + 1, a.budget, &ctx.limits)?;
                    json!({"p_uniform_at": b.n, "q_uniform_at_next": matches!(verdict, Verdict::Holds { .. })})
                }
                Err(Error::NotFoundWithinBudget { .. }) => json!({"p_uniform_at": null}),
                Err(e) => return Err(e.into()),
            };
            json!({
                "fragment": {"bars": {format!("{}_cbar", a.bar): fragment}},
                "d_table": table.iter().map(|(n, d)| json!({"node": n, "d": d})).collect::<Vec<_>>(),
                "containment": {
                    "nodes": checked,
                    "violations": violations,
                    "first_violation": first,
                    "passed": first.is_none(),
                },
                "uniformity": transfer,
            })
        }
        (BarRep::CSet(q), Target::Pi01) => {
            let fragment = match ctx.instance.bar_decl(&a.bar)? {
                BarDecl::Cset(CsetDecl::Pred { pred }) => {
                    json!({"kind": "pi01", "family": "extend", "pred": pred})
                }
                _ => serde_json::to_value(BarDecl::Pi01(Pi01Decl::FromCset {
                    from_cset: a.bar.clone(),
                }))
                .expect("declarations serialize"),
            };
            let family = bartool::bars::cbar_to_pi01(q);
            let (mut checked, mut violations, mut first) = (0usize, 0usize, None);
            for node in nodes_for(ctx, a.fan.as_deref(), a.depth, a.budget)? {
                checked += 1;
                let q_holds = q.first_failure(&node, a.budget)?.is_none();
                let p_holds = family.first_failure(&node, a.budget)?.is_none();
                if q_holds != p_holds {
                    violations += 1;
                    first.get_or_insert(node);
                }
            }
            json!({
                "fragment": {"bars": {format!("{}_pi01", a.bar): fragment}},
                "equality": {
                    "nodes": checked,
                    "violations": violations,
                    "first_violation": first,
                    "passed": first.is_none(),
                },
            })
        }
        _ => return Err(unsupported().into()),
    };
    Ok(certificate(ctx, "convert", arguments, budgets, result))
}
