//! Game trees extracted from terms, strategies as pruned game trees, and
//! the check that playing strategy terms against each other yields exactly
//! the maximal common move sequence of the strategies.

use std::collections::BTreeSet;
use std::fmt;
use std::fmt::Write as _;
use std::sync::Arc;

use serde_json::json;
use thiserror::Error;

use crate::parser::print_term;
use crate::rewrite::{RewriteError, RewriteTrace, Rewriter};
use crate::sos::{build_lts_capped, LtsError, StateId};
use crate::term::{ac_equal, ActionLabel, GameDeclaration, ProcessTerm, Role};

pub type MoveSequence = Vec<ActionLabel>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GameError {
    #[error("terms with the playing operator have no game tree")]
    ContainsPlay,
    #[error("deadlock has no counterpart in a game tree")]
    ContainsDeadlock,
    #[error("choice between {labels:?} is nested directly inside a choice of the other kind")]
    MixedChoice { labels: Vec<ActionLabel> },
    #[error("move `{0}` appears twice among sibling moves")]
    DuplicateMove(ActionLabel),
    #[error("opponent's choice between {labels:?} is owned by the viewer `{viewer}`")]
    ViewerOwnsOpponentChoice { labels: Vec<ActionLabel>, viewer: Role },
    #[error("cannot decide who owns the choice between {labels:?}")]
    AmbiguousOwner { labels: Vec<ActionLabel> },
    #[error("role `{0}` is not a player of the game")]
    UnknownRole(Role),
    #[error("branch with {0} children has no owner")]
    UnownedBranch(usize),
    #[error("strategies do not come from the same game tree")]
    DifferentTrees,
    #[error("no strategies given")]
    NoStrategies,
    #[error("expected one strategy per player {expected:?}, got roles {got:?}")]
    RoleMismatch { expected: Vec<Role>, got: Vec<Role> },
    #[error(transparent)]
    Rewrite(#[from] RewriteError),
    #[error(transparent)]
    Lts(#[from] LtsError),
}

/// A game tree. A branch with a single child is an ordinary move and has no
/// owner; a branch with two or more children is a choice of its owner.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum GameTree {
    Leaf,
    Branch { owner: Option<Role>, children: Vec<(ActionLabel, GameTree)> },
}

impl GameTree {
    pub fn node_count(&self) -> usize {
        match self {
            GameTree::Leaf => 1,
            GameTree::Branch { children, .. } => 1 + children.iter().map(|(_, c)| c.node_count()).sum::<usize>(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            GameTree::Leaf => 0,
            GameTree::Branch { children, .. } => 1 + children.iter().map(|(_, c)| c.depth()).max().unwrap_or(0),
        }
    }

    /// Checks that every choice has an owner and sibling moves are distinct.
    pub fn validate(&self) -> Result<(), GameError> {
        if let GameTree::Branch { owner, children } = self {
            if children.len() >= 2 && owner.is_none() {
                return Err(GameError::UnownedBranch(children.len()));
            }
            let mut seen = BTreeSet::new();
            for (m, c) in children {
                if !seen.insert(m) {
                    return Err(GameError::DuplicateMove(m.clone()));
                }
                c.validate()?;
            }
        }
        Ok(())
    }

    /// Every move sequence from the root to some node, including the empty one.
    pub fn paths(&self) -> BTreeSet<MoveSequence> {
        fn go(t: &GameTree, prefix: &mut MoveSequence, out: &mut BTreeSet<MoveSequence>) {
            out.insert(prefix.clone());
            if let GameTree::Branch { children, .. } = t {
                for (m, c) in children {
                    prefix.push(m.clone());
                    go(c, prefix, out);
                    prefix.pop();
                }
            }
        }
        let mut out = BTreeSet::new();
        go(self, &mut Vec::new(), &mut out);
        out
    }

    /// Move sequences from the root to the leaves.
    pub fn leaf_paths(&self) -> Vec<MoveSequence> {
        fn go(t: &GameTree, prefix: &mut MoveSequence, out: &mut Vec<MoveSequence>) {
            match t {
                GameTree::Leaf => out.push(prefix.clone()),
                GameTree::Branch { children, .. } => {
                    for (m, c) in children {
                        prefix.push(m.clone());
                        go(c, prefix, out);
                        prefix.pop();
                    }
                }
            }
        }
        let mut out = Vec::new();
        go(self, &mut Vec::new(), &mut out);
        out
    }

    /// Owners of every choice node, preorder.
    pub fn choice_owners(&self) -> Vec<Role> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(t) = stack.pop() {
            if let GameTree::Branch { owner, children } = t {
                if children.len() >= 2 {
                    out.extend(owner.clone());
                }
                stack.extend(children.iter().rev().map(|(_, c)| c));
            }
        }
        out
    }

    /// Graphviz rendering; choice nodes show their owner.
    pub fn to_dot(&self) -> String {
        self.to_dot_named("game")
    }

    pub fn to_dot_named(&self, name: &str) -> String {
        fn go(t: &GameTree, id: &mut usize, out: &mut String) -> usize {
            let me = *id;
            *id += 1;
            match t {
                GameTree::Leaf => {
                    let _ = writeln!(out, "  n{me} [shape=point];");
                }
                GameTree::Branch { owner, children } => {
                    let label = owner.as_ref().map(|o| o.to_string()).unwrap_or_default();
                    let _ = writeln!(out, "  n{me} [label=\"{label}\"];");
                    for (m, c) in children {
                        let child = go(c, id, out);
                        let _ = writeln!(out, "  n{me} -> n{child} [label=\"{m}\"];");
                    }
                }
            }
            me
        }
        let mut out = format!("digraph {name} {{\n  node [shape=circle];\n");
        go(self, &mut 0, &mut out);
        out.push_str("}\n");
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TreeWarning {
    /// A `‡` choice was assigned to the non-viewer of a two-player game
    /// because the declaration did not determine a single other owner.
    FallbackOwner { labels: Vec<ActionLabel>, owner: Role },
}

impl fmt::Display for TreeWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TreeWarning::FallbackOwner { labels, owner } => {
                let names: Vec<&str> = labels.iter().map(|l| l.as_str()).collect();
                write!(f, "choice between {} assigned to `{owner}` by two-player fallback", names.join(", "))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct TreeOptions {
    /// Reject `‡` choices whose moves the viewer owns instead of falling back.
    pub strict: bool,
}

#[derive(Debug, Clone)]
pub struct ExtractedTree {
    pub tree: GameTree,
    pub warnings: Vec<TreeWarning>,
}

/// What still has to run after the current subterm terminates.
enum Cont<'a> {
    Done,
    Then(&'a ProcessTerm, &'a Cont<'a>),
}

struct Extractor<'g> {
    decl: &'g GameDeclaration,
    viewer: &'g Role,
    options: TreeOptions,
    warnings: Vec<TreeWarning>,
}

impl Extractor<'_> {
    fn build(&mut self, t: &ProcessTerm, cont: &Cont<'_>) -> Result<GameTree, GameError> {
        match t {
            ProcessTerm::Action(a) => {
                let next = match cont {
                    Cont::Done => GameTree::Leaf,
                    Cont::Then(k, rest) => self.build(k, rest)?,
                };
                Ok(GameTree::Branch { owner: None, children: vec![(a.clone(), next)] })
            }
            ProcessTerm::Deadlock => Err(GameError::ContainsDeadlock),
            ProcessTerm::Play(..) => Err(GameError::ContainsPlay),
            ProcessTerm::Seq(x, y) => self.build(x, &Cont::Then(y, cont)),
            ProcessTerm::Alt(..) | ProcessTerm::OppAlt(..) => {
                let is_opp = matches!(t, ProcessTerm::OppAlt(..));
                let operands = if is_opp { t.opp_operands() } else { t.summands() };
                let mut children = Vec::with_capacity(operands.len());
                for op in operands {
                    match self.build(op, cont)? {
                        GameTree::Branch { owner: None, children: mut only } if only.len() == 1 => {
                            children.push(only.pop().expect("one child"))
                        }
                        GameTree::Branch { children: inner, .. } => {
                            return Err(GameError::MixedChoice { labels: inner.into_iter().map(|(m, _)| m).collect() })
                        }
                        GameTree::Leaf => unreachable!("every operand starts with a move"),
                    }
                }
                let mut seen = BTreeSet::new();
                for (m, _) in &children {
                    if !seen.insert(m) {
                        return Err(GameError::DuplicateMove(m.clone()));
                    }
                }
                let labels: Vec<ActionLabel> = children.iter().map(|(m, _)| m.clone()).collect();
                let owner = if is_opp { self.opponent_owner(labels)? } else { self.viewer.clone() };
                Ok(GameTree::Branch { owner: Some(owner), children })
            }
        }
    }

    fn opponent_owner(&mut self, labels: Vec<ActionLabel>) -> Result<Role, GameError> {
        let owners: BTreeSet<Option<&Role>> = labels.iter().map(|l| self.decl.owner(l)).collect();
        if owners.len() == 1 {
            if let Some(Some(role)) = owners.first() {
                if *role != self.viewer {
                    return Ok((*role).clone());
                }
                if self.options.strict {
                    return Err(GameError::ViewerOwnsOpponentChoice { labels, viewer: self.viewer.clone() });
                }
            }
        }
        match self.decl.other_player(self.viewer) {
            Some(other) => {
                let owner = other.clone();
                self.warnings.push(TreeWarning::FallbackOwner { labels, owner: owner.clone() });
                Ok(owner)
            }
            None => Err(GameError::AmbiguousOwner { labels }),
        }
    }
}

/// Game tree of a `⊓`-free term written in `viewer`'s encoding: `+` is a
/// choice of the viewer, `‡` a choice of whoever owns its moves.
pub fn game_tree_from_term(t: &ProcessTerm, decl: &GameDeclaration, viewer: &Role) -> Result<ExtractedTree, GameError> {
    game_tree_from_term_with(t, decl, viewer, TreeOptions::default())
}

pub fn game_tree_from_term_with(
    t: &ProcessTerm,
    decl: &GameDeclaration,
    viewer: &Role,
    options: TreeOptions,
) -> Result<ExtractedTree, GameError> {
    if !decl.has_player(viewer) {
        return Err(GameError::UnknownRole(viewer.clone()));
    }
    let mut ex = Extractor { decl, viewer, options, warnings: Vec::new() };
    let tree = ex.build(t, &Cont::Done)?;
    Ok(ExtractedTree { tree, warnings: ex.warnings })
}

/// A strategy: the game tree pruned to one child at every choice of `role`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Strategy {
    pub role: Role,
    pub tree: GameTree,
    source: Arc<GameTree>,
}

impl Strategy {
    /// Wraps a pruned tree; returns `None` if it is not a strategy of `role`
    /// on `source`.
    pub fn new(role: Role, tree: GameTree, source: Arc<GameTree>) -> Option<Self> {
        is_strategy_of(&tree, &source, &role).then_some(Strategy { role, tree, source })
    }

    pub fn source(&self) -> &Arc<GameTree> {
        &self.source
    }

    /// `{role, retained_paths}` where every retained path ends in a leaf.
    pub fn to_json(&self) -> serde_json::Value {
        let paths: Vec<Vec<String>> =
            self.tree.leaf_paths().iter().map(|p| p.iter().map(|m| m.as_str().to_string()).collect()).collect();
        json!({ "role": self.role.as_str(), "retained_paths": paths })
    }
}

fn prune(t: &GameTree, role: &Role) -> Vec<GameTree> {
    match t {
        GameTree::Leaf => vec![GameTree::Leaf],
        GameTree::Branch { owner, children } if owner.as_ref() == Some(role) => children
            .iter()
            .flat_map(|(m, c)| {
                prune(c, role)
                    .into_iter()
                    .map(move |s| GameTree::Branch { owner: owner.clone(), children: vec![(m.clone(), s)] })
            })
            .collect(),
        GameTree::Branch { owner, children } => {
            let mut acc: Vec<Vec<(ActionLabel, GameTree)>> = vec![Vec::new()];
            for (m, c) in children {
                let options = prune(c, role);
                let mut next = Vec::with_capacity(acc.len() * options.len());
                for partial in &acc {
                    for o in &options {
                        let mut p = partial.clone();
                        p.push((m.clone(), o.clone()));
                        next.push(p);
                    }
                }
                acc = next;
            }
            acc.into_iter().map(|children| GameTree::Branch { owner: owner.clone(), children }).collect()
        }
    }
}

/// Every strategy of `role` on `tree`, in child order.
pub fn enumerate_strategies(tree: &GameTree, role: &Role) -> Vec<Strategy> {
    let source = Arc::new(tree.clone());
    prune(tree, role).into_iter().map(|t| Strategy { role: role.clone(), tree: t, source: source.clone() }).collect()
}

/// Number of strategies without building them: the sum over the children of
/// a choice of `role`, the product over the children of any other node.
/// Saturates at `u128::MAX`.
pub fn count_strategies(tree: &GameTree, role: &Role) -> u128 {
    match tree {
        GameTree::Leaf => 1,
        GameTree::Branch { owner, children } if owner.as_ref() == Some(role) => {
            children.iter().fold(0u128, |acc, (_, c)| acc.saturating_add(count_strategies(c, role)))
        }
        GameTree::Branch { children, .. } => {
            children.iter().fold(1u128, |acc, (_, c)| acc.saturating_mul(count_strategies(c, role)))
        }
    }
}

/// Whether `pruned` keeps exactly one child at each choice of `role` and
/// every child elsewhere, following `original` move by move.
pub fn is_strategy_of(pruned: &GameTree, original: &GameTree, role: &Role) -> bool {
    match (pruned, original) {
        (GameTree::Leaf, GameTree::Leaf) => true,
        (GameTree::Branch { owner: po, children: pc }, GameTree::Branch { owner: oo, children: oc }) => {
            if po != oo {
                return false;
            }
            let follows = |(m, sub): &(ActionLabel, GameTree)| {
                oc.iter().find(|(om, _)| om == m).is_some_and(|(_, osub)| is_strategy_of(sub, osub, role))
            };
            if oo.as_ref() == Some(role) && oc.len() >= 2 {
                pc.len() == 1 && follows(&pc[0])
            } else {
                pc.len() == oc.len() && pc.iter().zip(oc).all(|(p, o)| p.0 == o.0) && pc.iter().all(follows)
            }
        }
        _ => false,
    }
}

/// Term of a strategy: choices of other roles become `‡` chains (whichever
/// other player owns them), moves become sequential composition. A strategy
/// without any move is δ.
pub fn strategy_to_term(s: &Strategy) -> ProcessTerm {
    fn go(t: &GameTree, role: &Role) -> ProcessTerm {
        let GameTree::Branch { owner, children } = t else {
            return ProcessTerm::Deadlock;
        };
        let mut parts = children.iter().map(|(m, sub)| match sub {
            GameTree::Leaf => ProcessTerm::Action(m.clone()),
            _ => ProcessTerm::seq(ProcessTerm::Action(m.clone()), go(sub, role)),
        });
        let first = parts.next().expect("branches have children");
        if owner.as_ref() == Some(role) {
            parts.fold(first, ProcessTerm::alt)
        } else {
            parts.fold(first, ProcessTerm::opp_alt)
        }
    }
    go(&s.tree, &s.role)
}

/// A prefix-closed set of move sequences and its maximal element, if unique.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlaySet {
    pub traces: BTreeSet<MoveSequence>,
    pub maximal: Option<MoveSequence>,
}

impl PlaySet {
    pub fn new(traces: BTreeSet<MoveSequence>) -> Self {
        let maximal_elems = maximal_elements(&traces);
        let maximal = match maximal_elems.as_slice() {
            [only] => Some((*only).clone()),
            _ => None,
        };
        PlaySet { traces, maximal }
    }

    /// Sequences not extended by any other member.
    pub fn maximal_elements(&self) -> Vec<&MoveSequence> {
        maximal_elements(&self.traces)
    }

    /// Trace set of a term read off its transition system, with `‡`
    /// behaving as `+`. Independent of the rewriter.
    pub fn of_term(t: &ProcessTerm, state_cap: usize) -> Result<PlaySet, LtsError> {
        let lts = build_lts_capped(t, state_cap)?;
        let mut traces = BTreeSet::new();
        let mut stack: Vec<(StateId, MoveSequence)> = vec![(lts.root(), Vec::new())];
        traces.insert(Vec::new());
        // closed terms without recursion generate acyclic systems
        while let Some((s, prefix)) = stack.pop() {
            for (_, a, to) in lts.transitions().iter().filter(|(f, _, _)| *f == s) {
                let mut p = prefix.clone();
                p.push(a.clone());
                traces.insert(p.clone());
                stack.push((*to, p));
            }
            for (_, a) in lts.terminating().iter().filter(|(f, _)| *f == s) {
                let mut p = prefix.clone();
                p.push(a.clone());
                traces.insert(p);
            }
        }
        Ok(PlaySet::new(traces))
    }

    pub fn intersect(&self, other: &PlaySet) -> PlaySet {
        PlaySet::new(self.traces.intersection(&other.traces).cloned().collect())
    }
}

fn maximal_elements(traces: &BTreeSet<MoveSequence>) -> Vec<&MoveSequence> {
    // in lexicographic order a proper extension of `t` comes right after it
    let items: Vec<&MoveSequence> = traces.iter().collect();
    items
        .iter()
        .enumerate()
        .filter(|(i, t)| items.get(i + 1).is_none_or(|next| !next.starts_with(t)))
        .map(|(_, t)| *t)
        .collect()
}

/// Intersection of the move sequences of strategies over one game tree.
pub fn intersect_strategies(strategies: &[Strategy]) -> Result<PlaySet, GameError> {
    let (first, rest) = strategies.split_first().ok_or(GameError::NoStrategies)?;
    if rest.iter().any(|s| !Arc::ptr_eq(&s.source, &first.source) && s.source != first.source) {
        return Err(GameError::DifferentTrees);
    }
    let mut traces = first.tree.paths();
    for s in rest {
        let other = s.tree.paths();
        traces.retain(|t| other.contains(t));
    }
    Ok(PlaySet::new(traces))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Assoc {
    #[default]
    Left,
    Right,
}

/// `t1 ⊓ t2 ⊓ ... ⊓ tn` grouped as requested. Panics on an empty slice.
pub fn play_term(terms: &[ProcessTerm], assoc: Assoc) -> ProcessTerm {
    match assoc {
        Assoc::Left => {
            let mut it = terms.iter().cloned();
            let first = it.next().expect("at least one term");
            it.fold(first, ProcessTerm::play)
        }
        Assoc::Right => {
            let mut it = terms.iter().rev().cloned();
            let last = it.next().expect("at least one term");
            it.fold(last, |acc, t| ProcessTerm::play(t, acc))
        }
    }
}

#[derive(Debug, Clone)]
pub struct PlayReport {
    pub pass: bool,
    pub strategy_terms: Vec<ProcessTerm>,
    pub play_term: ProcessTerm,
    pub result: ProcessTerm,
    pub maximal_trace: Option<MoveSequence>,
    pub expected: ProcessTerm,
    pub trace: RewriteTrace,
}

impl PlayReport {
    /// `{pass, play_term, result, expected, maximal_trace, steps}`.
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "pass": self.pass,
            "play_term": print_term(&self.play_term),
            "result": print_term(&self.result),
            "expected": print_term(&self.expected),
            "maximal_trace": self.maximal_trace.as_ref().map(|m| m.iter().map(|a| a.as_str().to_string()).collect::<Vec<_>>()),
            "steps": self.trace.steps_json(),
        })
    }
}

/// Plays the strategy terms (left-associated) with the full rule set and
/// compares the normal form with the maximal common move sequence.
pub fn verify_play(strategies: &[Strategy], decl: &GameDeclaration) -> Result<PlayReport, GameError> {
    verify_play_with(strategies, decl, &Rewriter::default(), Assoc::Left)
}

pub fn verify_play_with(
    strategies: &[Strategy],
    decl: &GameDeclaration,
    rewriter: &Rewriter,
    assoc: Assoc,
) -> Result<PlayReport, GameError> {
    let mut got: Vec<Role> = strategies.iter().map(|s| s.role.clone()).collect();
    let mut expected_roles = decl.players().to_vec();
    got.sort();
    expected_roles.sort();
    if got != expected_roles {
        return Err(GameError::RoleMismatch { expected: decl.players().to_vec(), got });
    }
    let oracle = intersect_strategies(strategies)?;
    let strategy_terms: Vec<ProcessTerm> = strategies.iter().map(strategy_to_term).collect();
    let play = play_term(&strategy_terms, assoc);
    let trace = rewriter.normalize(&play)?;
    let expected = match &oracle.maximal {
        Some(m) => ProcessTerm::seq_chain(m),
        None => ProcessTerm::Deadlock,
    };
    let result = trace.final_term.clone();
    Ok(PlayReport {
        pass: oracle.maximal.is_some() && ac_equal(&result, &expected),
        strategy_terms,
        play_term: play,
        result,
        maximal_trace: oracle.maximal,
        expected,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_game_decl, parse_term};

    fn t(s: &str) -> ProcessTerm {
        parse_term(s).unwrap()
    }

    fn r(s: &str) -> Role {
        Role::new(s).unwrap()
    }

    fn l(s: &str) -> ActionLabel {
        ActionLabel::new(s).unwrap()
    }

    fn seq(labels: &[&str]) -> MoveSequence {
        labels.iter().map(|s| l(s)).collect()
    }

    const PURCHASING_DECL: &str = "players P, O\n\
        owner O: sTruck, sTrain, sPlane\n\
        owner P: start, shopping, oTruck, oTrain, oPlane, pOnLine, pOffLine\n";
    const PURCHASING_P_VIEW: &str = "start . shopping . (sTruck . oTruck . pOnLine $ sTrain . oTrain . pOnLine \
        $ sPlane . oPlane . (pOnLine + pOffLine))";

    fn purchasing_tree() -> GameTree {
        let g = parse_game_decl(PURCHASING_DECL).unwrap();
        let ex = game_tree_from_term(&t(PURCHASING_P_VIEW), &g, &r("P")).unwrap();
        assert!(ex.warnings.is_empty());
        ex.tree
    }

    #[test]
    fn single_action_tree() {
        let g = parse_game_decl("players P, O").unwrap();
        let tree = game_tree_from_term(&t("a"), &g, &r("P")).unwrap().tree;
        assert_eq!(tree, GameTree::Branch { owner: None, children: vec![(l("a"), GameTree::Leaf)] });
    }

    #[test]
    fn submitting_order_tree() {
        let g = parse_game_decl("players P, O\nowner O: submit, cancel\nowner P: start, write, store").unwrap();
        let tree = game_tree_from_term(&t("start . write . (submit . store $ cancel)"), &g, &r("P")).unwrap().tree;
        assert_eq!(tree.depth(), 4);
        assert_eq!(tree.choice_owners(), vec![r("O")]);
        let paths = tree.leaf_paths();
        assert_eq!(paths, vec![seq(&["start", "write", "submit", "store"]), seq(&["start", "write", "cancel"])]);
        assert_eq!(enumerate_strategies(&tree, &r("P")).len(), 1);
        assert_eq!(enumerate_strategies(&tree, &r("O")).len(), 2);
    }

    #[test]
    fn purchasing_tree_shape() {
        let tree = purchasing_tree();
        assert_eq!(tree.choice_owners(), vec![r("O"), r("P")]);
        tree.validate().unwrap();
        // the same tree from the opponent's encoding
        let g = parse_game_decl(PURCHASING_DECL).unwrap();
        let o_view = "start . shopping . (sTruck . oTruck . pOnLine + sTrain . oTrain . pOnLine \
            + sPlane . oPlane . (pOnLine $ pOffLine))";
        assert_eq!(game_tree_from_term(&t(o_view), &g, &r("O")).unwrap().tree, tree);
    }

    #[test]
    fn purchasing_strategy_counts() {
        let tree = purchasing_tree();
        let p = enumerate_strategies(&tree, &r("P"));
        let o = enumerate_strategies(&tree, &r("O"));
        assert_eq!((p.len(), o.len()), (2, 3));
        assert_eq!(count_strategies(&tree, &r("P")), 2);
        assert_eq!(count_strategies(&tree, &r("O")), 3);
        for s in p.iter().chain(&o) {
            assert!(is_strategy_of(&s.tree, &tree, &s.role));
        }
    }

    #[test]
    fn purchasing_strategy_terms() {
        let tree = purchasing_tree();
        let p_terms: Vec<ProcessTerm> = enumerate_strategies(&tree, &r("P")).iter().map(strategy_to_term).collect();
        assert_eq!(
            p_terms,
            vec![
                t("start . shopping . (sTruck . oTruck . pOnLine $ sTrain . oTrain . pOnLine $ sPlane . oPlane . pOnLine)"),
                t("start . shopping . (sTruck . oTruck . pOnLine $ sTrain . oTrain . pOnLine $ sPlane . oPlane . pOffLine)"),
            ]
        );
        let o_terms: Vec<ProcessTerm> = enumerate_strategies(&tree, &r("O")).iter().map(strategy_to_term).collect();
        assert_eq!(
            o_terms,
            vec![
                t("start . shopping . sTruck . oTruck . pOnLine"),
                t("start . shopping . sTrain . oTrain . pOnLine"),
                t("start . shopping . sPlane . oPlane . (pOnLine $ pOffLine)"),
            ]
        );
    }

    #[test]
    fn purchasing_play() {
        let g = parse_game_decl(PURCHASING_DECL).unwrap();
        let tree = purchasing_tree();
        let p = enumerate_strategies(&tree, &r("P")).remove(1);
        let o = enumerate_strategies(&tree, &r("O")).remove(2);
        let set = intersect_strategies(&[p.clone(), o.clone()]).unwrap();
        assert_eq!(set.maximal, Some(seq(&["start", "shopping", "sPlane", "oPlane", "pOffLine"])));
        let report = verify_play(&[p, o], &g).unwrap();
        assert!(report.pass);
        assert_eq!(report.result, t("start . shopping . sPlane . oPlane . pOffLine"));
    }

    #[test]
    fn three_player_play() {
        let g = parse_game_decl(
            "players P1, P2, P3\n\
             owner P1: start, shopping, sTruck, sTrain, sPlane, oTruck, oTrain, oPlane\n\
             owner P2: pOnLine, pOffLine\n\
             owner P3: ByCheck, ByBank",
        )
        .unwrap();
        let p1_view = t("start . shopping . (sTruck . oTruck . pOnLine + sTrain . oTrain . pOnLine \
            + sPlane . oPlane . (pOnLine $ pOffLine . (ByCheck $ ByBank)))");
        let tree = game_tree_from_term(&p1_view, &g, &r("P1")).unwrap().tree;
        assert_eq!(tree.choice_owners(), vec![r("P1"), r("P2"), r("P3")]);
        let counts: Vec<usize> = ["P1", "P2", "P3"].iter().map(|p| enumerate_strategies(&tree, &r(p)).len()).collect();
        assert_eq!(counts, vec![3, 2, 2]);

        let pick = |role: &str, i: usize| enumerate_strategies(&tree, &r(role)).remove(i);
        let chosen = [pick("P1", 2), pick("P2", 1), pick("P3", 1)];
        assert_eq!(
            strategy_to_term(&chosen[0]),
            t("start . shopping . sPlane . oPlane . (pOnLine $ pOffLine . (ByCheck $ ByBank))")
        );
        assert_eq!(
            strategy_to_term(&chosen[2]),
            t("start . shopping . (sTruck . oTruck . pOnLine $ sTrain . oTrain . pOnLine \
               $ sPlane . oPlane . (pOnLine $ pOffLine . ByBank))")
        );
        let report = verify_play(&chosen, &g).unwrap();
        assert!(report.pass);
        assert_eq!(report.result, t("start . shopping . sPlane . oPlane . pOffLine . ByBank"));
        let right = verify_play_with(&chosen, &g, &Rewriter::default(), Assoc::Right).unwrap();
        assert!(right.pass);
    }

    #[test]
    fn play_needs_every_role_once() {
        let g = parse_game_decl(PURCHASING_DECL).unwrap();
        let tree = purchasing_tree();
        let p = enumerate_strategies(&tree, &r("P")).remove(0);
        assert!(matches!(verify_play(&[p.clone(), p], &g).unwrap_err(), GameError::RoleMismatch { .. }));
    }

    #[test]
    fn submitting_order_plays() {
        let g = parse_game_decl("players P, O\nowner O: submit, cancel\nowner P: start, write, store").unwrap();
        let tree = game_tree_from_term(&t("start . write . (submit . store $ cancel)"), &g, &r("P")).unwrap().tree;
        let p = enumerate_strategies(&tree, &r("P")).remove(0);
        let results: Vec<ProcessTerm> = enumerate_strategies(&tree, &r("O"))
            .into_iter()
            .map(|o| {
                let rep = verify_play(&[p.clone(), o], &g).unwrap();
                assert!(rep.pass);
                rep.result
            })
            .collect();
        assert_eq!(results, vec![t("start . write . submit . store"), t("start . write . cancel")]);
    }

    #[test]
    fn self_intersection() {
        let tree = purchasing_tree();
        let p = enumerate_strategies(&tree, &r("P")).remove(0);
        let set = intersect_strategies(&[p.clone(), p.clone()]).unwrap();
        assert_eq!(set.traces, p.tree.paths());
        // the P-strategy still branches on O's choice
        assert_eq!(set.maximal, None);
        assert_eq!(set.maximal_elements().len(), 3);
    }

    #[test]
    fn no_role_branches_means_one_strategy() {
        let g = parse_game_decl("players P, O").unwrap();
        let tree = game_tree_from_term(&t("a . b . c"), &g, &r("P")).unwrap().tree;
        let all = enumerate_strategies(&tree, &r("O"));
        assert_eq!(all.len(), 1);
        assert_eq!(all[0].tree, tree);
        assert_eq!(strategy_to_term(&all[0]), t("a . b . c"));
    }

    #[test]
    fn extraction_errors() {
        let g = parse_game_decl("players P, O\nowner P: a, b").unwrap();
        assert_eq!(game_tree_from_term(&t("a & a"), &g, &r("P")).unwrap_err(), GameError::ContainsPlay);
        assert_eq!(game_tree_from_term(&t("a . delta"), &g, &r("P")).unwrap_err(), GameError::ContainsDeadlock);
        assert_eq!(
            game_tree_from_term(&t("a . b + a . c"), &g, &r("P")).unwrap_err(),
            GameError::DuplicateMove(l("a"))
        );
        assert!(matches!(
            game_tree_from_term(&t("a $ (b + c)"), &g, &r("P")).unwrap_err(),
            GameError::MixedChoice { .. }
        ));
        let strict = TreeOptions { strict: true };
        assert!(matches!(
            game_tree_from_term_with(&t("a $ b"), &g, &r("P"), strict).unwrap_err(),
            GameError::ViewerOwnsOpponentChoice { .. }
        ));
        assert_eq!(game_tree_from_term(&t("a"), &g, &r("Q")).unwrap_err(), GameError::UnknownRole(r("Q")));
    }

    #[test]
    fn two_player_fallback_warns() {
        let g = parse_game_decl("players P, O\nowner P: a, b").unwrap();
        let ex = game_tree_from_term(&t("a $ b"), &g, &r("P")).unwrap();
        assert_eq!(ex.tree.choice_owners(), vec![r("O")]);
        assert_eq!(ex.warnings.len(), 1);

        let g3 = parse_game_decl("players P1, P2, P3\nowner P2: a\nowner P3: b").unwrap();
        assert!(matches!(
            game_tree_from_term(&t("a $ b"), &g3, &r("P1")).unwrap_err(),
            GameError::AmbiguousOwner { .. }
        ));
    }

    #[test]
    fn different_trees_are_rejected() {
        let g = parse_game_decl("players P, O").unwrap();
        let t1 = game_tree_from_term(&t("a + b"), &g, &r("P")).unwrap().tree;
        let t2 = game_tree_from_term(&t("a + c"), &g, &r("P")).unwrap().tree;
        let s1 = enumerate_strategies(&t1, &r("O")).remove(0);
        let s2 = enumerate_strategies(&t2, &r("P")).remove(0);
        assert_eq!(intersect_strategies(&[s1, s2]).unwrap_err(), GameError::DifferentTrees);
        assert_eq!(intersect_strategies(&[]).unwrap_err(), GameError::NoStrategies);
    }

    #[test]
    fn play_set_of_term_matches_tree_paths() {
        let tree = purchasing_tree();
        let o = enumerate_strategies(&tree, &r("O")).remove(2);
        let from_term = PlaySet::of_term(&strategy_to_term(&o), 1000).unwrap();
        assert_eq!(from_term.traces, o.tree.paths());
    }

    #[test]
    fn play_assoc() {
        let terms = [t("a"), t("b"), t("c")];
        assert_eq!(play_term(&terms, Assoc::Left), t("a & b & c"));
        assert_eq!(play_term(&terms, Assoc::Right), t("a & (b & c)"));
    }

    #[test]
    fn strategy_json() {
        let tree = purchasing_tree();
        let o = enumerate_strategies(&tree, &r("O")).remove(2);
        let v = o.to_json();
        assert_eq!(v["role"], "O");
        assert_eq!(v["retained_paths"].as_array().unwrap().len(), 2);
        assert_eq!(v["retained_paths"][1][4], "pOffLine");
    }

    #[test]
    fn dot_annotates_owners() {
        let dot = purchasing_tree().to_dot();
        assert!(dot.contains("[label=\"O\"]"));
        assert!(dot.contains("[label=\"P\"]"));
        assert!(dot.contains("[label=\"sPlane\"]"));
    }
}
