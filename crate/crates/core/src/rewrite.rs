//! Directed rewriting with the axioms of BPA, the opponent's alternative
//! composition, deadlock and the playing operator, modulo associativity and
//! commutativity of `+`.
//!
//! Terms are kept in the AC-canonical form of [`ac_flatten`]: A1 and A2 are
//! never applied as rules, instead every `+` cluster is a sorted multiset and
//! the rules whose left side mentions `+` match against that multiset.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use crate::parser::print_term;
use crate::term::{ac_flatten, recanonicalize_sum, sorted_sum, ProcessTerm};

/// Default bound on the number of rewrite steps in one normalization.
pub const DEFAULT_STEP_CAP: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum RuleId {
    /// x + x → x
    A3,
    /// (x + y)·z → x·z + y·z
    A4,
    /// (x·y)·z → x·(y·z)
    A5,
    /// x ‡ y → x + y
    OA1,
    /// x + δ → x
    DL1,
    /// δ·x → δ
    DL2,
    /// υ ⊓ υ → υ
    PO1,
    /// υ ⊓ ω → δ
    PO2,
    /// δ ⊓ x → δ
    PO3,
    /// x ⊓ δ → δ
    PO4,
    /// υ ⊓ (υ·y) → υ·y
    PO5,
    /// υ ⊓ (ω·y) → δ
    PO6,
    /// (υ·x) ⊓ υ → υ·x
    PO7,
    /// (υ·x) ⊓ ω → δ
    PO8,
    /// (υ·x) ⊓ (υ·y) → υ·(x ⊓ y)
    PO9,
    /// (υ·x) ⊓ (ω·y) → δ
    PO10,
    /// (x ‡ y) ⊓ z → (x + y) ⊓ z
    PO11,
    /// x ⊓ (y ‡ z) → x ⊓ (y + z)
    PO12,
    /// (x + y) ⊓ z → x ⊓ z + y ⊓ z
    PO13,
    /// x ⊓ (y + z) → x ⊓ y + x ⊓ z
    PO14,
}

impl RuleId {
    pub const ALL: [RuleId; 20] = [
        RuleId::A3,
        RuleId::A4,
        RuleId::A5,
        RuleId::OA1,
        RuleId::DL1,
        RuleId::DL2,
        RuleId::PO1,
        RuleId::PO2,
        RuleId::PO3,
        RuleId::PO4,
        RuleId::PO5,
        RuleId::PO6,
        RuleId::PO7,
        RuleId::PO8,
        RuleId::PO9,
        RuleId::PO10,
        RuleId::PO11,
        RuleId::PO12,
        RuleId::PO13,
        RuleId::PO14,
    ];
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown rule `{0}`")]
pub struct UnknownRule(pub String);

impl FromStr for RuleId {
    type Err = UnknownRule;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        RuleId::ALL
            .iter()
            .copied()
            .find(|r| r.to_string().eq_ignore_ascii_case(s))
            .ok_or_else(|| UnknownRule(s.to_string()))
    }
}

/// Which rule set is active.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Mode {
    /// Every rule, so normal forms are basic terms.
    #[default]
    Full,
    /// The player's view: OA1 is disabled and `‡` only disappears under `⊓`
    /// through PO11/PO12.
    PView,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Full => "full",
            Mode::PView => "p-view",
        })
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "full" => Ok(Mode::Full),
            "p-view" => Ok(Mode::PView),
            other => Err(format!("unknown mode `{other}` (expected `full` or `p-view`)")),
        }
    }
}

/// Where to look for the next redex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RedexOrder {
    #[default]
    LeftmostInnermost,
    LeftmostOutermost,
}

/// Child indices from the root: 0 is the left operand, 1 the right one.
pub type Position = Vec<usize>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RewriteStep {
    pub rule: RuleId,
    pub position: Position,
    pub before: ProcessTerm,
    pub after: ProcessTerm,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RewriteTrace {
    /// The term as given. The first step starts from its AC-canonical form.
    pub initial: ProcessTerm,
    pub steps: Vec<RewriteStep>,
    pub final_term: ProcessTerm,
}

impl RewriteTrace {
    pub fn rules(&self) -> Vec<RuleId> {
        self.steps.iter().map(|s| s.rule).collect()
    }

    /// `[{rule, position, before, after}, ...]` with terms in ASCII syntax.
    pub fn steps_json(&self) -> serde_json::Value {
        serde_json::Value::Array(
            self.steps
                .iter()
                .map(|s| {
                    json!({
                        "rule": s.rule,
                        "position": s.position,
                        "before": print_term(&s.before),
                        "after": print_term(&s.after),
                    })
                })
                .collect(),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RewriteError {
    #[error("normalization exceeded the step cap of {cap} (last term has {size} nodes)")]
    StepCapExceeded { cap: usize, size: usize },
}

/// A configured rewriting system.
#[derive(Debug, Clone)]
pub struct Rewriter {
    mode: Mode,
    order: RedexOrder,
    disabled: BTreeSet<RuleId>,
    step_cap: usize,
}

impl Default for Rewriter {
    fn default() -> Self {
        Rewriter::new(Mode::Full)
    }
}

/// Normal subterms seen so far, keyed by node address. The stored `Arc`
/// keeps the address alive so it cannot be reused by another node.
#[derive(Default)]
struct NormalMemo(HashMap<usize, Arc<ProcessTerm>>);

impl NormalMemo {
    fn contains(&self, t: &Arc<ProcessTerm>) -> bool {
        self.0.contains_key(&(Arc::as_ptr(t) as usize))
    }

    fn insert(&mut self, t: &Arc<ProcessTerm>) {
        self.0.insert(Arc::as_ptr(t) as usize, t.clone());
    }
}

struct Redex {
    position: Position,
    rule: RuleId,
    replacement: ProcessTerm,
}

/// Summands of the `+` cluster rooted at `t` with their paths relative to `t`.
fn cluster_members(t: &ProcessTerm) -> Vec<(Position, &Arc<ProcessTerm>)> {
    fn go<'a>(t: &'a ProcessTerm, prefix: &mut Position, out: &mut Vec<(Position, &'a Arc<ProcessTerm>)>) {
        if let ProcessTerm::Alt(l, r) = t {
            for (idx, child) in [(0, l), (1, r)] {
                prefix.push(idx);
                if matches!(child.as_ref(), ProcessTerm::Alt(..)) {
                    go(child, prefix, out);
                } else {
                    out.push((prefix.clone(), child));
                }
                prefix.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(t, &mut Vec::new(), &mut out);
    out
}

/// Canonical sum of the summands of every part.
fn plus<'a>(parts: impl IntoIterator<Item = &'a ProcessTerm>) -> ProcessTerm {
    sorted_sum(parts.into_iter().flat_map(|p| p.summands()).cloned().collect())
}

/// Splits a canonical sum into its first summand and the sum of the rest.
fn split_first(t: &ProcessTerm) -> (ProcessTerm, ProcessTerm) {
    let parts = t.summands();
    (parts[0].clone(), plus(parts[1..].iter().copied()))
}

fn replace_at(t: &ProcessTerm, path: &[usize], new: ProcessTerm) -> ProcessTerm {
    let Some((&idx, rest)) = path.split_first() else {
        return new;
    };
    let rebuild = |l: &Arc<ProcessTerm>, r: &Arc<ProcessTerm>| -> (Arc<ProcessTerm>, Arc<ProcessTerm>) {
        if idx == 0 {
            (Arc::new(replace_at(l, rest, new.clone())), r.clone())
        } else {
            (l.clone(), Arc::new(replace_at(r, rest, new.clone())))
        }
    };
    match t {
        ProcessTerm::Seq(l, r) => {
            let (l, r) = rebuild(l, r);
            ProcessTerm::Seq(l, r)
        }
        ProcessTerm::Alt(l, r) => {
            let (l, r) = rebuild(l, r);
            recanonicalize_sum(ProcessTerm::Alt(l, r))
        }
        ProcessTerm::OppAlt(l, r) => {
            let (l, r) = rebuild(l, r);
            ProcessTerm::OppAlt(l, r)
        }
        ProcessTerm::Play(l, r) => {
            let (l, r) = rebuild(l, r);
            ProcessTerm::Play(l, r)
        }
        ProcessTerm::Action(_) | ProcessTerm::Deadlock => panic!("position leads below a leaf"),
    }
}

impl Rewriter {
    pub fn new(mode: Mode) -> Self {
        Rewriter { mode, order: RedexOrder::default(), disabled: BTreeSet::new(), step_cap: DEFAULT_STEP_CAP }
    }

    pub fn with_order(mut self, order: RedexOrder) -> Self {
        self.order = order;
        self
    }

    pub fn with_step_cap(mut self, cap: usize) -> Self {
        self.step_cap = cap;
        self
    }

    /// Removes a rule from the system. Only meant for mutation testing of
    /// the property suites.
    pub fn without_rule(mut self, rule: RuleId) -> Self {
        self.disabled.insert(rule);
        self
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn step_cap(&self) -> usize {
        self.step_cap
    }

    pub fn is_enabled(&self, rule: RuleId) -> bool {
        if self.disabled.contains(&rule) {
            return false;
        }
        !(rule == RuleId::OA1 && self.mode == Mode::PView)
    }

    /// One rewrite step on `t`, or `None` if `t` is a normal form.
    pub fn step(&self, t: &ProcessTerm) -> Option<RewriteStep> {
        let before = ac_flatten(t);
        self.step_canonical(&before, &mut NormalMemo::default())
    }

    /// Rewrites `t` until no rule applies.
    pub fn normalize(&self, t: &ProcessTerm) -> Result<RewriteTrace, RewriteError> {
        let mut memo = NormalMemo::default();
        let mut current = ac_flatten(t);
        let mut steps = Vec::new();
        while let Some(step) = self.step_canonical(&current, &mut memo) {
            if steps.len() == self.step_cap {
                return Err(RewriteError::StepCapExceeded { cap: self.step_cap, size: current.size() });
            }
            current = step.after.clone();
            steps.push(step);
        }
        Ok(RewriteTrace { initial: t.clone(), steps, final_term: current })
    }

    fn step_canonical(&self, t: &ProcessTerm, memo: &mut NormalMemo) -> Option<RewriteStep> {
        let redex = self.find(t, &mut Vec::new(), memo)?;
        let after = replace_at(t, &redex.position, redex.replacement);
        Some(RewriteStep { rule: redex.rule, position: redex.position, before: t.clone(), after })
    }

    fn find(&self, t: &ProcessTerm, path: &mut Position, memo: &mut NormalMemo) -> Option<Redex> {
        if self.order == RedexOrder::LeftmostOutermost {
            if let Some(r) = self.at_root(t, path) {
                return Some(r);
            }
        }
        let children: Vec<(Position, &Arc<ProcessTerm>)> = match t {
            ProcessTerm::Action(_) | ProcessTerm::Deadlock => Vec::new(),
            ProcessTerm::Alt(..) => cluster_members(t),
            ProcessTerm::Seq(l, r) | ProcessTerm::OppAlt(l, r) | ProcessTerm::Play(l, r) => {
                vec![(vec![0], l), (vec![1], r)]
            }
        };
        for (rel, child) in children {
            if memo.contains(child) {
                continue;
            }
            let depth = path.len();
            path.extend(&rel);
            let found = self.find(child, path, memo);
            path.truncate(depth);
            match found {
                Some(r) => return Some(r),
                None => memo.insert(child),
            }
        }
        if self.order == RedexOrder::LeftmostInnermost {
            return self.at_root(t, path);
        }
        None
    }

    fn at_root(&self, t: &ProcessTerm, path: &Position) -> Option<Redex> {
        let (rule, replacement) = self.root_rule(t)?;
        Some(Redex { position: path.clone(), rule, replacement })
    }

    /// First enabled rule (in rule order) whose left side matches `t` itself.
    fn root_rule(&self, t: &ProcessTerm) -> Option<(RuleId, ProcessTerm)> {
        use ProcessTerm::*;
        let on = |r: RuleId| self.is_enabled(r);
        match t {
            Action(_) | Deadlock => None,
            Alt(..) => {
                let parts = t.summands();
                if on(RuleId::A3) {
                    // canonical order puts equal summands next to each other
                    if let Some(i) = parts.windows(2).position(|w| w[0] == w[1]) {
                        let rest = parts.iter().enumerate().filter(|(j, _)| *j != i + 1).map(|(_, p)| *p);
                        return Some((RuleId::A3, plus(rest)));
                    }
                }
                if on(RuleId::DL1) {
                    if let Some(i) = parts.iter().position(|p| matches!(p, Deadlock)) {
                        let rest = parts.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, p)| *p);
                        return Some((RuleId::DL1, plus(rest)));
                    }
                }
                None
            }
            Seq(l, r) => match l.as_ref() {
                Alt(..) if on(RuleId::A4) => {
                    let (x, y) = split_first(l);
                    let xz = ProcessTerm::Seq(Arc::new(x), r.clone());
                    let yz = ProcessTerm::Seq(Arc::new(y), r.clone());
                    Some((RuleId::A4, sorted_sum(vec![xz, yz])))
                }
                Seq(x, y) if on(RuleId::A5) => {
                    Some((RuleId::A5, ProcessTerm::Seq(x.clone(), Arc::new(ProcessTerm::Seq(y.clone(), r.clone())))))
                }
                Deadlock if on(RuleId::DL2) => Some((RuleId::DL2, Deadlock)),
                _ => None,
            },
            OppAlt(l, r) => {
                if on(RuleId::OA1) {
                    Some((RuleId::OA1, plus([l.as_ref(), r.as_ref()])))
                } else {
                    None
                }
            }
            Play(l, r) => self.play_rule(l, r),
        }
    }

    fn play_rule(&self, l: &Arc<ProcessTerm>, r: &Arc<ProcessTerm>) -> Option<(RuleId, ProcessTerm)> {
        use ProcessTerm::*;
        // (label, continuation) for an action prefix υ·x
        fn prefixed(t: &ProcessTerm) -> Option<(&crate::term::ActionLabel, &Arc<ProcessTerm>)> {
            match t {
                Seq(h, x) => match h.as_ref() {
                    Action(a) => Some((a, x)),
                    _ => None,
                },
                _ => None,
            }
        }
        let (lt, rt) = (l.as_ref(), r.as_ref());
        let candidate = |rule: RuleId| -> Option<ProcessTerm> {
            match rule {
                RuleId::PO1 => match (lt, rt) {
                    (Action(a), Action(b)) if a == b => Some(lt.clone()),
                    _ => None,
                },
                RuleId::PO2 => match (lt, rt) {
                    (Action(a), Action(b)) if a != b => Some(Deadlock),
                    _ => None,
                },
                RuleId::PO3 => matches!(lt, Deadlock).then_some(Deadlock),
                RuleId::PO4 => matches!(rt, Deadlock).then_some(Deadlock),
                RuleId::PO5 => match (lt, prefixed(rt)) {
                    (Action(a), Some((b, _))) if a == b => Some(rt.clone()),
                    _ => None,
                },
                RuleId::PO6 => match (lt, prefixed(rt)) {
                    (Action(a), Some((b, _))) if a != b => Some(Deadlock),
                    _ => None,
                },
                RuleId::PO7 => match (prefixed(lt), rt) {
                    (Some((a, _)), Action(b)) if a == b => Some(lt.clone()),
                    _ => None,
                },
                RuleId::PO8 => match (prefixed(lt), rt) {
                    (Some((a, _)), Action(b)) if a != b => Some(Deadlock),
                    _ => None,
                },
                RuleId::PO9 => match (prefixed(lt), prefixed(rt)) {
                    (Some((a, x)), Some((b, y))) if a == b => {
                        Some(ProcessTerm::Seq(Arc::new(Action(a.clone())), Arc::new(Play(x.clone(), y.clone()))))
                    }
                    _ => None,
                },
                RuleId::PO10 => match (prefixed(lt), prefixed(rt)) {
                    (Some((a, _)), Some((b, _))) if a != b => Some(Deadlock),
                    _ => None,
                },
                RuleId::PO11 => match lt {
                    OppAlt(x, y) => Some(ProcessTerm::Play(Arc::new(plus([x.as_ref(), y.as_ref()])), r.clone())),
                    _ => None,
                },
                RuleId::PO12 => match rt {
                    OppAlt(y, z) => Some(ProcessTerm::Play(l.clone(), Arc::new(plus([y.as_ref(), z.as_ref()])))),
                    _ => None,
                },
                RuleId::PO13 => match lt {
                    Alt(..) => {
                        let (x, y) = split_first(lt);
                        Some(sorted_sum(vec![
                            ProcessTerm::Play(Arc::new(x), r.clone()),
                            ProcessTerm::Play(Arc::new(y), r.clone()),
                        ]))
                    }
                    _ => None,
                },
                RuleId::PO14 => match rt {
                    Alt(..) => {
                        let (y, z) = split_first(rt);
                        Some(sorted_sum(vec![
                            ProcessTerm::Play(l.clone(), Arc::new(y)),
                            ProcessTerm::Play(l.clone(), Arc::new(z)),
                        ]))
                    }
                    _ => None,
                },
                _ => None,
            }
        };
        RuleId::ALL[6..].iter().filter(|r| self.is_enabled(**r)).find_map(|&rule| candidate(rule).map(|t| (rule, t)))
    }
}

/// One leftmost-innermost step with the default rule set of `mode`.
pub fn rewrite_step(t: &ProcessTerm, mode: Mode) -> Option<RewriteStep> {
    Rewriter::new(mode).step(t)
}

/// Normalizes with the default rule set of `mode` and the default step cap.
pub fn normalize(t: &ProcessTerm, mode: Mode) -> Result<RewriteTrace, RewriteError> {
    Rewriter::new(mode).normalize(t)
}

/// True iff `t` uses only actions, δ, `·` and `+`.
pub fn is_basic_term(t: &ProcessTerm) -> bool {
    match t {
        ProcessTerm::Action(_) | ProcessTerm::Deadlock => true,
        ProcessTerm::Seq(l, r) | ProcessTerm::Alt(l, r) => is_basic_term(l) && is_basic_term(r),
        ProcessTerm::OppAlt(..) | ProcessTerm::Play(..) => false,
    }
}

/// The subterm of `t` at `position`.
pub fn subterm_at<'a>(t: &'a ProcessTerm, position: &[usize]) -> Option<&'a ProcessTerm> {
    let Some((&idx, rest)) = position.split_first() else {
        return Some(t);
    };
    match t {
        ProcessTerm::Seq(l, r) | ProcessTerm::Alt(l, r) | ProcessTerm::OppAlt(l, r) | ProcessTerm::Play(l, r) => {
            subterm_at(if idx == 0 { l } else { r }, rest)
        }
        ProcessTerm::Action(_) | ProcessTerm::Deadlock => None,
    }
}
