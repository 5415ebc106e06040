//! Instance files: fans, bars, functions and compact metric spaces declared
//! in JSON and resolved to the library's objects.
//!
//! Each section takes either a map from ids to declarations (`"fans"`) or a
//! single declaration (`"fan"`) that gets the id `default`.

pub mod predicate;
pub mod random;

use std::collections::BTreeMap;
use std::path::Path as FsPath;
use std::sync::Arc;

use num::BigRational;
use serde::{Deserialize, Serialize};

use crate::bars::{cbar_to_pi01, pi01_to_cbar, BarRep, CSet, DecBar, PathModulus, Pi01Bar};
use crate::continuity::NbhdFn;
use crate::error::{Error, Result};
use crate::metric::cantor::{CantorFunction, CantorNets, CantorSpace};
use crate::metric::dyadic::{DyadicReals, IntervalNets, RealFunction};
use crate::metric::{validate_nets, CompactSpace};
use crate::rational::{parse_rational, pow2};
use crate::seqcode::{decode_small, FinSeq};
use crate::trees::{Fan, KaryFan, Limits, Path, Spread};

pub use predicate::{parse_predicate, CmpOp, Expr, Term};

/// A fan given by a table of branching bounds, optionally narrowed by a
/// predicate every prefix of a member must satisfy.
#[derive(Debug, Clone)]
pub struct TableFan {
    default: u64,
    table: BTreeMap<FinSeq, u64>,
    member: Option<Expr>,
}

impl TableFan {
    pub fn new(default: u64, table: BTreeMap<FinSeq, u64>, member: Option<Expr>) -> Self {
        TableFan {
            default,
            table,
            member,
        }
    }

    pub fn declared_bound(&self, a: &[u64]) -> u64 {
        self.table.get(a).copied().unwrap_or(self.default)
    }

    fn admits(&self, a: &[u64]) -> bool {
        self.member.as_ref().is_none_or(|e| e.eval(a))
    }
}

impl Spread for TableFan {
    fn member(&self, a: &[u64]) -> bool {
        match &self.member {
            Some(_) => (0..=a.len()).all(|n| self.admits(&a[..n])),
            None => (0..a.len()).all(|n| a[n] <= self.declared_bound(&a[..n])),
        }
    }

    fn extends(&self, parent: &[u64], n: u64) -> bool {
        let mut v = parent.to_vec();
        v.push(n);
        match &self.member {
            Some(_) => self.admits(&v),
            None => n <= self.declared_bound(parent),
        }
    }

    fn successor_hint(&self, a: &[u64]) -> u64 {
        (0..=self.declared_bound(a))
            .find(|&n| self.extends(a, n))
            .unwrap_or(0)
    }

    fn as_fan(&self) -> Option<&dyn Fan> {
        Some(self)
    }

    fn label(&self) -> String {
        format!("table:{}", self.table.len())
    }
}

impl Fan for TableFan {
    fn branch_bound(&self, a: &[u64]) -> u64 {
        self.declared_bound(a)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FanDecl {
    /// `binary` or `kary:k`.
    Builtin(String),
    Table(TableDecl),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableDecl {
    pub default: u64,
    #[serde(default)]
    pub table: Vec<BoundEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub member: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundEntry {
    pub node: Vec<u64>,
    pub bound: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyTemplate {
    /// `Bₙ(a) :⟺ pred(a)` for every `n`.
    #[default]
    Constant,
    /// `Bₙ(a) :⟺ pred(a * decode(n))`.
    Extend,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BarDecl {
    Dec { pred: String },
    Pi01(Pi01Decl),
    Cset(CsetDecl),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Pi01Decl {
    Pred {
        pred: String,
        #[serde(default)]
        family: FamilyTemplate,
    },
    /// `Bₙ(a) :⟺ D(a * decode(n))` for a declared c-set.
    FromCset { from_cset: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CsetDecl {
    /// `D = pred`.
    Pred { pred: String },
    /// The c-set built below a Π⁰₁ bar of a fan.
    FromPi01 { from_pi01: FanBarRef },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FanBarRef {
    pub bar: String,
    pub fan: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Number {
    Int(u64),
    Text(String),
}

impl Number {
    fn rational(&self) -> Result<BigRational> {
        match self {
            Number::Int(n) => Ok(BigRational::from_integer((*n).into())),
            Number::Text(s) => parse_rational(s),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weights {
    /// `Σ_{i<k} α(i)`.
    #[default]
    Unit,
    /// `Σ_{i<k} α(i)·2^-i`, valued in the rationals.
    Geometric,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableEntry {
    pub node: Vec<u64>,
    pub value: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModulusDecl {
    Constant(usize),
    Search { max_depth: usize, budget: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "template", rename_all = "snake_case", deny_unknown_fields)]
pub enum FunctionDecl {
    Coordinate {
        k: usize,
    },
    Constant {
        value: Number,
    },
    TruncatedSum {
        k: usize,
        #[serde(default)]
        weights: Weights,
    },
    CommitTable {
        depth_bound: usize,
        entries: Vec<TableEntry>,
    },
    FromCbar {
        bar: String,
        modulus: ModulusDecl,
    },
    Identity,
    Square,
    ClippedAbs,
    BinaryValue,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "space", rename_all = "snake_case", deny_unknown_fields)]
pub enum MetricDecl {
    /// A closed interval with integer endpoints inside the dyadic reals.
    Reals {
        interval: [i64; 2],
    },
    Cantor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidationConfig {
    /// Depth to which fan bounds, nets and commitments are checked.
    #[serde(default = "default_validation_depth")]
    pub depth: usize,
    /// Code bound for sampled nodes, extensions and paths.
    #[serde(default = "default_validation_budget")]
    pub budget: u64,
}

fn default_validation_depth() -> usize {
    4
}

fn default_validation_budget() -> u64 {
    200
}

impl Default for ValidationConfig {
    fn default() -> Self {
        ValidationConfig {
            depth: default_validation_depth(),
            budget: default_validation_budget(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub fans: BTreeMap<String, FanDecl>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fan: Option<FanDecl>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub bars: BTreeMap<String, BarDecl>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bar: Option<BarDecl>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub functions: BTreeMap<String, FunctionDecl>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub function: Option<FunctionDecl>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub metrics: BTreeMap<String, MetricDecl>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<MetricDecl>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub validation: Option<ValidationConfig>,
}

pub const DEFAULT_ID: &str = "default";

fn merge<T>(
    kind: &'static str,
    many: BTreeMap<String, T>,
    one: Option<T>,
) -> Result<BTreeMap<String, T>> {
    let mut all = many;
    if let Some(d) = one {
        if all.insert(DEFAULT_ID.to_string(), d).is_some() {
            return Err(Error::Schema(format!(
                "`{kind}` and `{kind}s.{DEFAULT_ID}` both declared"
            )));
        }
    }
    Ok(all)
}

/// A function resolved from an instance.
#[derive(Clone)]
pub enum Function {
    Discrete(NbhdFn<u64>),
    Rational(NbhdFn<BigRational>),
    /// A function on a compact metric space, applied through its dense points.
    Dense(DenseTemplate),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DenseTemplate {
    Identity,
    Square,
    ClippedAbs,
    BinaryValue,
    Constant(BigRational),
}

impl DenseTemplate {
    pub fn on_reals(&self) -> Result<RealFunction> {
        Ok(match self {
            DenseTemplate::Identity => RealFunction::Identity,
            DenseTemplate::Square => RealFunction::Square,
            DenseTemplate::ClippedAbs => RealFunction::ClippedAbs,
            DenseTemplate::Constant(c) => RealFunction::Constant(c.clone()),
            DenseTemplate::BinaryValue => {
                return Err(Error::Schema(
                    "binary_value is defined on cantor space only".into(),
                ))
            }
        })
    }

    pub fn on_cantor(&self) -> Result<CantorFunction> {
        Ok(match self {
            DenseTemplate::BinaryValue => CantorFunction::BinaryValue,
            DenseTemplate::Constant(c) => CantorFunction::Constant(c.clone()),
            other => {
                return Err(Error::Schema(format!(
                    "{other:?} is defined on the reals only"
                )))
            }
        })
    }
}

#[derive(Clone)]
pub enum Metric {
    Reals(CompactSpace<DyadicReals, IntervalNets>),
    Cantor(CompactSpace<CantorSpace, CantorNets>),
}

impl Metric {
    pub fn label(&self) -> String {
        match self {
            Metric::Reals(cs) => cs.label(),
            Metric::Cantor(cs) => cs.label(),
        }
    }
}

/// A loaded, validated instance. Objects are immutable and shareable.
#[derive(Clone)]
pub struct Instance {
    pub file: InstanceFile,
    pub validation: ValidationConfig,
    fans: BTreeMap<String, Arc<dyn Fan>>,
    bar_decls: BTreeMap<String, BarDecl>,
    bars: BTreeMap<String, BarRep>,
    fn_decls: BTreeMap<String, FunctionDecl>,
    functions: BTreeMap<String, Function>,
    metrics: BTreeMap<String, Metric>,
}

fn unknown(kind: &'static str, id: &str) -> Error {
    Error::UnknownId {
        kind,
        id: id.to_string(),
    }
}

pub fn builtin_fan(name: &str) -> Result<Arc<dyn Fan>> {
    if name == "binary" {
        return Ok(Arc::new(KaryFan::binary()));
    }
    if let Some(k) = name.strip_prefix("kary:") {
        let k: u64 = k
            .parse()
            .map_err(|_| Error::Schema(format!("`{name}`: arity is not a natural number")))?;
        if k == 0 {
            return Err(Error::Schema(format!("`{name}`: arity must be positive")));
        }
        return Ok(Arc::new(KaryFan::new(k)));
    }
    Err(Error::Schema(format!("unknown builtin fan `{name}`")))
}

fn predicate(src: &str) -> Result<Expr> {
    parse_predicate(src)
}

fn resolve_fan(decl: &FanDecl) -> Result<Arc<dyn Fan>> {
    match decl {
        FanDecl::Builtin(name) => builtin_fan(name),
        FanDecl::Table(t) => {
            let mut table = BTreeMap::new();
            for e in &t.table {
                if table
                    .insert(FinSeq::from(e.node.as_slice()), e.bound)
                    .is_some()
                {
                    return Err(Error::Schema(format!(
                        "bound for {} given twice",
                        FinSeq::from(e.node.as_slice())
                    )));
                }
            }
            let member = t.member.as_deref().map(predicate).transpose()?;
            Ok(Arc::new(TableFan::new(t.default, table, member)))
        }
    }
}

/// Children probed above a declared bound when checking its honesty.
const BOUND_PROBE: u64 = 16;

/// Checks that every member node up to `depth` has a child and no member
/// child above its declared bound.
pub fn validate_fan(t: &dyn Fan, depth: usize, limits: &Limits) -> Result<()> {
    let mut nodes = vec![FinSeq::empty()];
    for d in 0..depth {
        let mut next = Vec::new();
        for a in &nodes {
            let bound = t.branch_bound(a);
            if let Some(n) =
                (bound + 1..=bound.saturating_add(BOUND_PROBE)).find(|&n| t.extends(a, n))
            {
                return Err(Error::validation(
                    format!("child {n} exceeds the declared bound {bound}"),
                    a,
                ));
            }
            let children = t.children(a);
            if children.is_empty() {
                return Err(Error::validation("member node without a child", a));
            }
            next.extend(children.into_iter().map(|c| a.child(c)));
        }
        if next.len() > limits.level_cap {
            return Err(Error::LevelCapExceeded {
                depth: d + 1,
                cap: limits.level_cap,
            });
        }
        nodes = next;
    }
    Ok(())
}

fn check_commit_monotone<V: Clone + PartialEq + Send + Sync + 'static>(
    f: &NbhdFn<V>,
    cfg: &ValidationConfig,
) -> Result<()> {
    if let Some((a, ab)) = f.monotonicity_violation(cfg.budget, cfg.budget.min(40))? {
        return Err(Error::validation(
            "commitment changes or disappears on an extension",
            format!("{a} -> {ab}"),
        ));
    }
    Ok(())
}

impl Instance {
    pub fn from_json(src: &str) -> Result<Instance> {
        let file: InstanceFile =
            serde_json::from_str(src).map_err(|e| Error::Schema(e.to_string()))?;
        Instance::resolve(file, &Limits::default())
    }

    pub fn load(path: &FsPath) -> Result<Instance> {
        let src = std::fs::read_to_string(path)
            .map_err(|e| Error::Schema(format!("{}: {e}", path.display())))?;
        Instance::from_json(&src)
    }

    pub fn resolve(file: InstanceFile, limits: &Limits) -> Result<Instance> {
        let cfg = file.validation.unwrap_or_default();
        let fan_decls = merge("fan", file.fans.clone(), file.fan.clone())?;
        let bar_decls = merge("bar", file.bars.clone(), file.bar.clone())?;
        let fn_decls = merge("function", file.functions.clone(), file.function.clone())?;
        let metric_decls = merge("metric", file.metrics.clone(), file.metric.clone())?;

        let mut fans = BTreeMap::new();
        for (id, d) in &fan_decls {
            let t = resolve_fan(d)?;
            validate_fan(t.as_ref(), cfg.depth, limits).map_err(|e| in_decl("fan", id, e))?;
            fans.insert(id.clone(), t);
        }

        let mut bars = BTreeMap::new();
        // Derived bars refer to other bars, so plain declarations go first.
        let mut pending = Vec::new();
        for (id, d) in &bar_decls {
            let rep = match d {
                BarDecl::Dec { pred } => {
                    let e = predicate(pred).map_err(|e| in_decl("bar", id, e))?;
                    DecBar::new(move |a| e.eval(a)).into()
                }
                BarDecl::Pi01(Pi01Decl::Pred { pred, family }) => {
                    let e = predicate(pred).map_err(|e| in_decl("bar", id, e))?;
                    pi01_from_template(e, *family).into()
                }
                BarDecl::Cset(CsetDecl::Pred { pred }) => {
                    let e = predicate(pred).map_err(|e| in_decl("bar", id, e))?;
                    CSet::new(move |a| e.eval(a)).into()
                }
                _ => {
                    pending.push((id, d));
                    continue;
                }
            };
            bars.insert(id.clone(), rep);
        }
        while !pending.is_empty() {
            let before = pending.len();
            let mut waiting = Vec::new();
            for (id, d) in pending {
                match derive_bar(d, &bars, &bar_decls, &fans).map_err(|e| in_decl("bar", id, e))? {
                    Some(rep) => {
                        bars.insert(id.clone(), rep);
                    }
                    None => waiting.push((id, d)),
                }
            }
            if waiting.len() == before {
                return Err(Error::Schema(format!(
                    "bar `{}`: derivation refers back to itself",
                    waiting[0].0
                )));
            }
            pending = waiting;
        }

        let mut functions = BTreeMap::new();
        for (id, d) in &fn_decls {
            let f = resolve_function(d, &bars, &cfg).map_err(|e| in_decl("function", id, e))?;
            functions.insert(id.clone(), f);
        }

        let mut metrics = BTreeMap::new();
        for (id, d) in &metric_decls {
            let m = match d {
                MetricDecl::Reals { interval: [lo, hi] } => {
                    Metric::Reals(CompactSpace::new(DyadicReals, IntervalNets::new(*lo, *hi)?))
                }
                MetricDecl::Cantor => Metric::Cantor(CompactSpace::new(CantorSpace, CantorNets)),
            };
            let levels = cfg.depth as u32;
            match &m {
                Metric::Reals(cs) => validate_nets(cs, levels),
                Metric::Cantor(cs) => validate_nets(cs, levels),
            }
            .map_err(|e| in_decl("metric", id, e))?;
            metrics.insert(id.clone(), m);
        }

        Ok(Instance {
            file,
            validation: cfg,
            fans,
            bar_decls,
            bars,
            fn_decls,
            functions,
            metrics,
        })
    }

    pub fn fan(&self, id: &str) -> Result<Arc<dyn Fan>> {
        self.fans.get(id).cloned().ok_or_else(|| unknown("fan", id))
    }

    pub fn bar(&self, id: &str) -> Result<&BarRep> {
        self.bars.get(id).ok_or_else(|| unknown("bar", id))
    }

    pub fn bar_decl(&self, id: &str) -> Result<&BarDecl> {
        self.bar_decls.get(id).ok_or_else(|| unknown("bar", id))
    }

    pub fn function(&self, id: &str) -> Result<&Function> {
        self.functions
            .get(id)
            .ok_or_else(|| unknown("function", id))
    }

    pub fn function_decl(&self, id: &str) -> Result<&FunctionDecl> {
        self.fn_decls.get(id).ok_or_else(|| unknown("function", id))
    }

    /// The function as a map on a compact metric space, if it is one.
    pub fn dense_function(&self, id: &str) -> Result<Option<DenseTemplate>> {
        Ok(match (self.function_decl(id)?, self.function(id)?) {
            (FunctionDecl::Constant { value }, _) => {
                Some(DenseTemplate::Constant(value.rational()?))
            }
            (_, Function::Dense(t)) => Some(t.clone()),
            _ => None,
        })
    }

    pub fn metric(&self, id: &str) -> Result<&Metric> {
        self.metrics.get(id).ok_or_else(|| unknown("metric", id))
    }

    pub fn fan_ids(&self) -> impl Iterator<Item = &str> {
        self.fans.keys().map(String::as_str)
    }

    pub fn bar_ids(&self) -> impl Iterator<Item = &str> {
        self.bars.keys().map(String::as_str)
    }

    pub fn function_ids(&self) -> impl Iterator<Item = &str> {
        self.functions.keys().map(String::as_str)
    }

    pub fn metric_ids(&self) -> impl Iterator<Item = &str> {
        self.metrics.keys().map(String::as_str)
    }
}

fn in_decl(kind: &str, id: &str, e: Error) -> Error {
    match e {
        Error::Validation { what, witness } => Error::Validation {
            what: format!("{kind} `{id}`: {what}"),
            witness,
        },
        Error::Schema(m) => Error::Schema(format!("{kind} `{id}`: {m}")),
        Error::Parse {
            line,
            column,
            message,
        } => Error::Parse {
            line,
            column,
            message: format!("{kind} `{id}`: {message}"),
        },
        other => other,
    }
}

/// `None` while the source bar is declared but not yet resolved.
fn derive_bar(
    d: &BarDecl,
    bars: &BTreeMap<String, BarRep>,
    decls: &BTreeMap<String, BarDecl>,
    fans: &BTreeMap<String, Arc<dyn Fan>>,
) -> Result<Option<BarRep>> {
    let (source, want) = match d {
        BarDecl::Cset(CsetDecl::FromPi01 { from_pi01 }) => (&from_pi01.bar, "pi01"),
        BarDecl::Pi01(Pi01Decl::FromCset { from_cset }) => (from_cset, "cset"),
        _ => unreachable!("only derived declarations are pending"),
    };
    let Some(rep) = bars.get(source) else {
        return match decls.contains_key(source) {
            true => Ok(None),
            false => Err(unknown("bar", source)),
        };
    };
    if rep.kind() != want {
        return Err(Error::Schema(format!(
            "`{source}` is a {} bar, not {want}",
            rep.kind()
        )));
    }
    Ok(Some(match (d, rep) {
        (BarDecl::Cset(CsetDecl::FromPi01 { from_pi01 }), BarRep::Pi01(p)) => {
            let t = fans
                .get(&from_pi01.fan)
                .ok_or_else(|| unknown("fan", &from_pi01.fan))?;
            let spread: Arc<dyn Spread> = t.clone();
            pi01_to_cbar(spread, p).into()
        }
        (_, BarRep::CSet(q)) => cbar_to_pi01(q).into(),
        _ => unreachable!("kinds checked above"),
    }))
}

pub fn pi01_from_template(e: Expr, family: FamilyTemplate) -> Pi01Bar {
    match family {
        FamilyTemplate::Constant => Pi01Bar::new(move |_, a| e.eval(a)),
        FamilyTemplate::Extend => {
            let d = CSet::new(move |a| e.eval(a));
            cbar_to_pi01(&d)
        }
    }
}

fn resolve_function(
    d: &FunctionDecl,
    bars: &BTreeMap<String, BarRep>,
    cfg: &ValidationConfig,
) -> Result<Function> {
    let f = match d {
        FunctionDecl::Coordinate { k } => Function::Discrete(crate::continuity::coordinate(*k)),
        FunctionDecl::Constant { value } => match value {
            Number::Int(n) => Function::Discrete(NbhdFn::constant(*n)),
            Number::Text(_) => Function::Rational(NbhdFn::constant(value.rational()?)),
        },
        FunctionDecl::TruncatedSum { k, weights } => {
            let k = *k;
            match weights {
                Weights::Unit => Function::Discrete(NbhdFn::new(k, move |a| {
                    (a.len() >= k).then(|| a[..k].iter().fold(0u64, |s, &x| s.saturating_add(x)))
                })),
                Weights::Geometric => Function::Rational(NbhdFn::new(k, move |a| {
                    (a.len() >= k).then(|| {
                        a[..k]
                            .iter()
                            .enumerate()
                            .map(|(i, &x)| BigRational::from_integer(x.into()) * pow2(-(i as i64)))
                            .sum()
                    })
                })),
            }
        }
        FunctionDecl::CommitTable {
            depth_bound,
            entries,
        } => {
            let mut table: BTreeMap<FinSeq, u64> = BTreeMap::new();
            for e in entries {
                let node = FinSeq::from(e.node.as_slice());
                if e.node.len() > *depth_bound {
                    return Err(Error::validation(
                        "table node deeper than depth_bound",
                        node,
                    ));
                }
                if table.insert(node.clone(), e.value).is_some() {
                    return Err(Error::Schema(format!("node {node} listed twice")));
                }
            }
            // The most specific listed prefix decides.
            Function::Discrete(NbhdFn::new(*depth_bound, move |a| {
                (0..=a.len())
                    .rev()
                    .find_map(|n| table.get(&a[..n]).copied())
            }))
        }
        FunctionDecl::FromCbar { bar, modulus } => {
            let q = match bars.get(bar) {
                Some(BarRep::CSet(q)) => q.clone(),
                Some(other) => {
                    return Err(Error::Schema(format!(
                        "`{bar}` is a {} bar, not a c-set",
                        other.kind()
                    )))
                }
                None => return Err(unknown("bar", bar)),
            };
            let mu = match modulus {
                ModulusDecl::Constant(k) => PathModulus::constant(*k),
                ModulusDecl::Search { max_depth, budget } => {
                    PathModulus::search(&q, *max_depth, *budget)
                }
            };
            let paths: Vec<Path> = (0..=cfg.budget)
                .map(|c| Path::finite_support(decode_small(c)))
                .collect();
            mu.validate(&q, &paths, 2)?;
            Function::Discrete(crate::continuity::fn_from_cbar(&q, mu))
        }
        FunctionDecl::Identity => Function::Dense(DenseTemplate::Identity),
        FunctionDecl::Square => Function::Dense(DenseTemplate::Square),
        FunctionDecl::ClippedAbs => Function::Dense(DenseTemplate::ClippedAbs),
        FunctionDecl::BinaryValue => Function::Dense(DenseTemplate::BinaryValue),
    };
    match &f {
        Function::Discrete(g) => check_commit_monotone(g, cfg)?,
        Function::Rational(g) => check_commit_monotone(g, cfg)?,
        Function::Dense(_) => {}
    }
    Ok(f)
}

/// `d` on the nodes of `t` up to `depth` and their children up to the bound,
/// in level order.
pub fn cset_table(
    t: &dyn Fan,
    q: &CSet,
    depth: usize,
    limits: &Limits,
) -> Result<Vec<(FinSeq, bool)>> {
    let mut out = Vec::new();
    for n in 0..=depth {
        for a in crate::trees::level(t, n, limits)? {
            out.push((a.clone(), q.d(&a)?));
        }
    }
    Ok(out)
}

/// The builtin instance shipped with the library.
pub const BUILTIN_JSON: &str = include_str!("builtin.json");

pub fn builtin() -> Result<Instance> {
    Instance::from_json(BUILTIN_JSON)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn singular_keys() {
        let inst =
            Instance::from_json(r#"{"fan":"binary","bar":{"kind":"dec","pred":"len >= 3"}}"#)
                .unwrap();
        assert_eq!(
            inst.fan("default").unwrap().label(),
            KaryFan::binary().label()
        );
        assert_eq!(inst.bar("default").unwrap().kind(), "dec");
        assert!(matches!(inst.fan("nope"), Err(Error::UnknownId { .. })));
    }

    #[test]
    fn dishonest_bounds_table() {
        let err = Instance::from_json(r#"{"fan":{"default":1,"member":"maxEntry <= 2"}}"#)
            .err()
            .unwrap();
        match err {
            Error::Validation { what, witness } => {
                assert!(what.contains("child 2"), "{what}");
                assert_eq!(witness, "<>");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn non_bar_cset_is_rejected() {
        let src = r#"{
            "bar": {"kind": "cset", "pred": "len >= 1 and entry(0) != 9"},
            "function": {"template": "from_cbar", "bar": "default",
                         "modulus": {"search": {"max_depth": 6, "budget": 50}}}
        }"#;
        assert!(matches!(
            Instance::from_json(src),
            Err(Error::Validation { .. })
        ));
        let src = src.replace(
            r#"{"search": {"max_depth": 6, "budget": 50}}"#,
            r#"{"constant": 1}"#,
        );
        assert!(matches!(
            Instance::from_json(&src),
            Err(Error::Validation { .. })
        ));
    }

    #[test]
    fn inconsistent_commit_table() {
        let src = r#"{"function": {"template": "commit_table", "depth_bound": 2,
            "entries": [{"node": [], "value": 1}, {"node": [0], "value": 2}]}}"#;
        assert!(matches!(
            Instance::from_json(src),
            Err(Error::Validation { .. })
        ));
        let ok = src.replace(
            r#"{"node": [0], "value": 2}"#,
            r#"{"node": [0], "value": 1}"#,
        );
        let inst = Instance::from_json(&ok).unwrap();
        let Function::Discrete(f) = inst.function("default").unwrap() else {
            panic!("discrete table expected")
        };
        assert_eq!(f.commit(&[0, 1]).unwrap(), Some(1));
    }

    #[test]
    fn schema_errors() {
        assert!(matches!(
            Instance::from_json(r#"{"fan":"ternary"}"#),
            Err(Error::Schema(_))
        ));
        assert!(matches!(
            Instance::from_json(r#"{"fann":"binary"}"#),
            Err(Error::Schema(_))
        ));
        assert!(matches!(
            Instance::from_json(r#"{"bar":{"kind":"dec","pred":"len >"}}"#),
            Err(Error::Parse { column: 6, .. })
        ));
    }

    #[test]
    fn builtin_validates() {
        let inst = builtin().unwrap();
        assert!(inst.fan_ids().count() >= 3);
        assert!(inst.metric_ids().count() >= 2);
    }
}
