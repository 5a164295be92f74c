//! Structural operational semantics: transition systems generated from
//! closed terms and strong bisimulation between them.
//!
//! Successful termination `t →a ✓` is modelled as an `a`-transition into a
//! single distinguished ✓ node, which partition refinement keeps in a block
//! of its own.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::fmt::Write as _;

use serde_json::json;
use thiserror::Error;

use crate::parser::print_term;
use crate::term::{ac_flatten, ActionLabel, ProcessTerm};

/// Default bound on the number of states of a generated LTS.
pub const DEFAULT_STATE_CAP: usize = 100_000;

/// Where a transition leads.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Target {
    Terminated,
    State(ProcessTerm),
}

/// All outgoing transitions of `t`, sorted and without duplicates.
///
/// `‡` has the same rules as `+`. `⊓` only moves when both operands offer
/// the same label; if one side terminates the other side's residual remains.
pub fn transitions(t: &ProcessTerm) -> Vec<(ActionLabel, Target)> {
    let mut out = BTreeSet::new();
    collect(t, &mut out);
    out.into_iter().collect()
}

fn collect(t: &ProcessTerm, out: &mut BTreeSet<(ActionLabel, Target)>) {
    match t {
        ProcessTerm::Action(a) => {
            out.insert((a.clone(), Target::Terminated));
        }
        ProcessTerm::Deadlock => {}
        ProcessTerm::Alt(l, r) | ProcessTerm::OppAlt(l, r) => {
            collect(l, out);
            collect(r, out);
        }
        ProcessTerm::Seq(l, r) => {
            for (a, target) in transitions(l) {
                let next = match target {
                    Target::Terminated => r.as_ref().clone(),
                    Target::State(x) => ProcessTerm::seq(x, r.as_ref().clone()),
                };
                out.insert((a, Target::State(next)));
            }
        }
        ProcessTerm::Play(l, r) => {
            let right = transitions(r);
            for (a, lt) in transitions(l) {
                for (b, rt) in right.iter().filter(|(b, _)| *b == a) {
                    let target = match (&lt, rt) {
                        (Target::Terminated, Target::Terminated) => Target::Terminated,
                        (Target::Terminated, Target::State(y)) => Target::State(y.clone()),
                        (Target::State(x), Target::Terminated) => Target::State(x.clone()),
                        (Target::State(x), Target::State(y)) => Target::State(ProcessTerm::play(x.clone(), y.clone())),
                    };
                    out.insert((b.clone(), target));
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StateId(pub usize);

impl fmt::Display for StateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "s{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LtsError {
    #[error("transition system exceeds the state cap of {cap}")]
    StateCapExceeded { cap: usize },
}

/// Finite labelled transition system reachable from a term. State 0 is the
/// root and states are distinct modulo AC of `+`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lts {
    states: Vec<ProcessTerm>,
    transitions: Vec<(StateId, ActionLabel, StateId)>,
    terminating: Vec<(StateId, ActionLabel)>,
}

impl Lts {
    pub fn root(&self) -> StateId {
        StateId(0)
    }

    pub fn states(&self) -> &[ProcessTerm] {
        &self.states
    }

    pub fn state(&self, id: StateId) -> &ProcessTerm {
        &self.states[id.0]
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// State-to-state transitions, sorted.
    pub fn transitions(&self) -> &[(StateId, ActionLabel, StateId)] {
        &self.transitions
    }

    /// `(s, a)` pairs with `s →a ✓`, sorted.
    pub fn terminating(&self) -> &[(StateId, ActionLabel)] {
        &self.terminating
    }

    /// `{states, root, transitions: [{from, label, to}], terminating: [{state, label}]}`.
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "states": self.states.iter().map(print_term).collect::<Vec<_>>(),
            "root": 0,
            "transitions": self.transitions.iter().map(|(f, a, t)| json!({
                "from": f.0, "label": a.as_str(), "to": t.0,
            })).collect::<Vec<_>>(),
            "terminating": self.terminating.iter().map(|(s, a)| json!({
                "state": s.0, "label": a.as_str(),
            })).collect::<Vec<_>>(),
        })
    }
}

/// Breadth-first exploration of the states reachable from `t`.
pub fn build_lts(t: &ProcessTerm) -> Result<Lts, LtsError> {
    build_lts_capped(t, DEFAULT_STATE_CAP)
}

pub fn build_lts_capped(t: &ProcessTerm, cap: usize) -> Result<Lts, LtsError> {
    let root = ac_flatten(t);
    let mut index: HashMap<ProcessTerm, StateId> = HashMap::new();
    let mut states = vec![root.clone()];
    index.insert(root, StateId(0));
    let mut trans = BTreeSet::new();
    let mut terminating = BTreeSet::new();
    let mut queue = VecDeque::from([StateId(0)]);

    while let Some(id) = queue.pop_front() {
        for (a, target) in transitions(&states[id.0]) {
            match target {
                Target::Terminated => {
                    terminating.insert((id, a));
                }
                Target::State(next) => {
                    let next = ac_flatten(&next);
                    let to = match index.get(&next) {
                        Some(&to) => to,
                        None => {
                            if states.len() == cap {
                                return Err(LtsError::StateCapExceeded { cap });
                            }
                            let to = StateId(states.len());
                            states.push(next.clone());
                            index.insert(next, to);
                            queue.push_back(to);
                            to
                        }
                    };
                    trans.insert((id, a, to));
                }
            }
        }
    }
    Ok(Lts { states, transitions: trans.into_iter().collect(), terminating: terminating.into_iter().collect() })
}

/// A state of either side of a bisimulation check, or the ✓ node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Node {
    State(StateId),
    Terminated,
}

/// Evidence that two terms are not bisimilar: after `trace` (matched step
/// by step on both sides) the two reached states offer different moves.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub trace: Vec<ActionLabel>,
    pub left: Node,
    pub right: Node,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct BisimResult {
    pub equivalent: bool,
    /// Pairs (left state, right state) related by the largest bisimulation;
    /// populated only when equivalent. The ✓ nodes are implicitly related.
    pub relation: Vec<(StateId, StateId)>,
    pub witness: Option<Witness>,
    pub left: Lts,
    pub right: Lts,
}

/// Both systems merged into one graph: left states, then right states,
/// then the ✓ node.
struct Combined {
    succ: Vec<Vec<(usize, usize)>>,
    labels: Vec<ActionLabel>,
    offset: usize,
    done: usize,
}

impl Combined {
    fn new(left: &Lts, right: &Lts) -> Self {
        let offset = left.len();
        let done = offset + right.len();
        let mut labels: Vec<ActionLabel> = Vec::new();
        let mut label_ix: HashMap<ActionLabel, usize> = HashMap::new();
        let mut succ = vec![Vec::new(); done + 1];
        let mut lid = |a: &ActionLabel| -> usize {
            *label_ix.entry(a.clone()).or_insert_with(|| {
                labels.push(a.clone());
                labels.len() - 1
            })
        };
        for (lts, base) in [(left, 0), (right, offset)] {
            for (f, a, t) in lts.transitions() {
                succ[base + f.0].push((lid(a), base + t.0));
            }
            for (s, a) in lts.terminating() {
                succ[base + s.0].push((lid(a), done));
            }
        }
        for s in &mut succ {
            s.sort_unstable();
            s.dedup();
        }
        Combined { succ, labels, offset, done }
    }

    fn node(&self, ix: usize) -> Node {
        if ix == self.done {
            Node::Terminated
        } else if ix >= self.offset {
            Node::State(StateId(ix - self.offset))
        } else {
            Node::State(StateId(ix))
        }
    }

    /// Coarsest stable partition; returns the block of every node.
    fn refine(&self) -> Vec<usize> {
        let n = self.succ.len();
        let mut block: Vec<usize> = (0..n).map(|i| usize::from(i == self.done)).collect();
        let mut count = if n > 1 { 2 } else { 1 };
        loop {
            let mut ids: HashMap<(usize, Vec<(usize, usize)>), usize> = HashMap::new();
            let mut next = vec![0; n];
            for s in 0..n {
                let mut sig: Vec<(usize, usize)> = self.succ[s].iter().map(|&(a, t)| (a, block[t])).collect();
                sig.sort_unstable();
                sig.dedup();
                let fresh = ids.len();
                next[s] = *ids.entry((block[s], sig)).or_insert(fresh);
            }
            let new_count = ids.len();
            block = next;
            if new_count == count {
                return block;
            }
            count = new_count;
        }
    }

    fn offers(&self, s: usize) -> BTreeSet<usize> {
        self.succ[s].iter().map(|&(a, _)| a).collect()
    }

    /// Shortest matched trace from the roots, through inequivalent pairs
    /// only, to a pair whose immediate offers differ.
    fn witness(&self, block: &[usize], left_root: usize, right_root: usize) -> Option<Witness> {
        // pair -> (predecessor pair, label index)
        type Pair = (usize, usize);
        let mut parent: HashMap<Pair, Option<(Pair, usize)>> = HashMap::new();
        let mut queue = VecDeque::from([(left_root, right_root)]);
        parent.insert((left_root, right_root), None);
        while let Some((p, q)) = queue.pop_front() {
            let reason = if (p == self.done) != (q == self.done) {
                Some(if p == self.done {
                    "left has terminated successfully, right has not".to_string()
                } else {
                    "right has terminated successfully, left has not".to_string()
                })
            } else {
                let (po, qo) = (self.offers(p), self.offers(q));
                po.symmetric_difference(&qo).next().map(|&a| {
                    let side = if po.contains(&a) { ("left", "right") } else { ("right", "left") };
                    format!("{} can do `{}`, {} cannot", side.0, self.labels[a], side.1)
                })
            };
            if let Some(reason) = reason {
                let mut trace = Vec::new();
                let mut cur = (p, q);
                while let Some(Some((prev, a))) = parent.get(&cur) {
                    trace.push(self.labels[*a].clone());
                    cur = *prev;
                }
                trace.reverse();
                return Some(Witness { trace, left: self.node(p), right: self.node(q), reason });
            }
            for &(a, p2) in &self.succ[p] {
                for &(b, q2) in &self.succ[q] {
                    if a == b && block[p2] != block[q2] && !parent.contains_key(&(p2, q2)) {
                        parent.insert((p2, q2), Some(((p, q), a)));
                        queue.push_back((p2, q2));
                    }
                }
            }
        }
        None
    }
}

/// Decides strong bisimilarity of two generated transition systems.
pub fn bisimilar_lts(left: Lts, right: Lts) -> BisimResult {
    let g = Combined::new(&left, &right);
    let block = g.refine();
    let (lr, rr) = (0, g.offset);
    let equivalent = block[lr] == block[rr];
    let mut relation = Vec::new();
    let mut witness = None;
    if equivalent {
        for i in 0..left.len() {
            for j in 0..right.len() {
                if block[i] == block[g.offset + j] {
                    relation.push((StateId(i), StateId(j)));
                }
            }
        }
    } else {
        witness = g.witness(&block, lr, rr);
        debug_assert!(witness.is_some(), "inequivalent roots always have a witness");
    }
    BisimResult { equivalent, relation, witness, left, right }
}

pub fn bisimilar(t: &ProcessTerm, u: &ProcessTerm) -> Result<BisimResult, LtsError> {
    bisimilar_capped(t, u, DEFAULT_STATE_CAP)
}

pub fn bisimilar_capped(t: &ProcessTerm, u: &ProcessTerm, cap: usize) -> Result<BisimResult, LtsError> {
    Ok(bisimilar_lts(build_lts_capped(t, cap)?, build_lts_capped(u, cap)?))
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Graphviz rendering; ✓ is a doubly circled sink shared by all
/// terminating transitions.
pub fn export_dot(lts: &Lts) -> String {
    let mut out = String::from("digraph lts {\n  rankdir=LR;\n  node [shape=ellipse];\n");
    for (i, s) in lts.states().iter().enumerate() {
        let _ = writeln!(out, "  s{i} [label=\"{}\"];", dot_escape(&print_term(s)));
    }
    if !lts.terminating().is_empty() {
        out.push_str("  done [shape=doublecircle, label=\"✓\"];\n");
    }
    for (f, a, t) in lts.transitions() {
        let _ = writeln!(out, "  s{} -> s{} [label=\"{}\"];", f.0, t.0, dot_escape(a.as_str()));
    }
    for (s, a) in lts.terminating() {
        let _ = writeln!(out, "  s{} -> done [label=\"{}\"];", s.0, dot_escape(a.as_str()));
    }
    out.push_str("}\n");
    out
}
