//! Process terms over atomic actions, deadlock, sequential composition,
//! alternative composition, opponent's alternative composition and the
//! playing operator, together with AC-canonical forms, the termination
//! weight and game-role declarations.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use num_bigint::BigUint;
use thiserror::Error;

/// Reserved word for the deadlock constant in the concrete syntax.
pub const DEADLOCK_KEYWORD: &str = "delta";

/// Returns true if `s` matches `[A-Za-z][A-Za-z0-9_]*`.
pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NameError {
    #[error("`{0}` is not a valid identifier")]
    NotIdentifier(String),
    #[error("`{0}` is a reserved word")]
    Reserved(String),
}

fn check_name(name: &str) -> Result<(), NameError> {
    if !is_identifier(name) {
        return Err(NameError::NotIdentifier(name.to_string()));
    }
    if name == DEADLOCK_KEYWORD {
        return Err(NameError::Reserved(name.to_string()));
    }
    Ok(())
}

/// An atomic action name such as `submit` or `pOffLine`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ActionLabel(Arc<str>);

impl ActionLabel {
    pub fn new(name: &str) -> Result<Self, NameError> {
        check_name(name)?;
        Ok(ActionLabel(Arc::from(name)))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ActionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for ActionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A participant of a game, e.g. `P`, `O` or `P1`..`Pn`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Role(Arc<str>);

impl Role {
    pub fn new(name: &str) -> Result<Self, NameError> {
        check_name(name)?;
        Ok(Role(Arc::from(name)))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A closed process term.
///
/// Children are reference counted so that rewriting can share unchanged
/// subterms between consecutive terms of a trace.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum ProcessTerm {
    Action(ActionLabel),
    Deadlock,
    Seq(Arc<ProcessTerm>, Arc<ProcessTerm>),
    Alt(Arc<ProcessTerm>, Arc<ProcessTerm>),
    OppAlt(Arc<ProcessTerm>, Arc<ProcessTerm>),
    Play(Arc<ProcessTerm>, Arc<ProcessTerm>),
}

impl ProcessTerm {
    pub fn action(label: ActionLabel) -> Self {
        ProcessTerm::Action(label)
    }

    pub fn seq(l: ProcessTerm, r: ProcessTerm) -> Self {
        ProcessTerm::Seq(Arc::new(l), Arc::new(r))
    }

    pub fn alt(l: ProcessTerm, r: ProcessTerm) -> Self {
        ProcessTerm::Alt(Arc::new(l), Arc::new(r))
    }

    pub fn opp_alt(l: ProcessTerm, r: ProcessTerm) -> Self {
        ProcessTerm::OppAlt(Arc::new(l), Arc::new(r))
    }

    pub fn play(l: ProcessTerm, r: ProcessTerm) -> Self {
        ProcessTerm::Play(Arc::new(l), Arc::new(r))
    }

    /// Right-nested sequential chain `m1·(m2·(...·mn))`; the empty chain is δ.
    pub fn seq_chain<'a, I>(labels: I) -> Self
    where
        I: IntoIterator<Item = &'a ActionLabel>,
        I::IntoIter: DoubleEndedIterator,
    {
        let mut iter = labels.into_iter().rev();
        let Some(last) = iter.next() else {
            return ProcessTerm::Deadlock;
        };
        iter.fold(ProcessTerm::Action(last.clone()), |acc, l| ProcessTerm::seq(ProcessTerm::Action(l.clone()), acc))
    }

    /// Operands of a maximal `+` chain, left to right. A non-`Alt` term is
    /// its own single summand.
    pub fn summands(&self) -> Vec<&ProcessTerm> {
        let mut out = Vec::new();
        collect_chain(self, &mut out, &|t| match t {
            ProcessTerm::Alt(l, r) => Some((l, r)),
            _ => None,
        });
        out
    }

    /// Operands of a maximal `‡` chain, left to right.
    pub fn opp_operands(&self) -> Vec<&ProcessTerm> {
        let mut out = Vec::new();
        collect_chain(self, &mut out, &|t| match t {
            ProcessTerm::OppAlt(l, r) => Some((l, r)),
            _ => None,
        });
        out
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        match self {
            ProcessTerm::Action(_) | ProcessTerm::Deadlock => 1,
            ProcessTerm::Seq(l, r) | ProcessTerm::Alt(l, r) | ProcessTerm::OppAlt(l, r) | ProcessTerm::Play(l, r) => {
                1 + l.size() + r.size()
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            ProcessTerm::Action(_) | ProcessTerm::Deadlock => 1,
            ProcessTerm::Seq(l, r) | ProcessTerm::Alt(l, r) | ProcessTerm::OppAlt(l, r) | ProcessTerm::Play(l, r) => {
                1 + l.depth().max(r.depth())
            }
        }
    }

    /// Every action label occurring in the term, in order of first occurrence.
    pub fn labels(&self) -> Vec<ActionLabel> {
        fn walk(t: &ProcessTerm, seen: &mut BTreeSet<ActionLabel>, out: &mut Vec<ActionLabel>) {
            match t {
                ProcessTerm::Action(a) => {
                    if seen.insert(a.clone()) {
                        out.push(a.clone());
                    }
                }
                ProcessTerm::Deadlock => {}
                ProcessTerm::Seq(l, r)
                | ProcessTerm::Alt(l, r)
                | ProcessTerm::OppAlt(l, r)
                | ProcessTerm::Play(l, r) => {
                    walk(l, seen, out);
                    walk(r, seen, out);
                }
            }
        }
        let mut out = Vec::new();
        walk(self, &mut BTreeSet::new(), &mut out);
        out
    }

    /// Labels the term can perform as its first step.
    pub fn initial_labels(&self) -> BTreeSet<ActionLabel> {
        match self {
            ProcessTerm::Action(a) => BTreeSet::from([a.clone()]),
            ProcessTerm::Deadlock => BTreeSet::new(),
            ProcessTerm::Seq(l, _) => l.initial_labels(),
            ProcessTerm::Alt(l, r) | ProcessTerm::OppAlt(l, r) => {
                let mut s = l.initial_labels();
                s.extend(r.initial_labels());
                s
            }
            ProcessTerm::Play(l, r) => {
                let rs = r.initial_labels();
                l.initial_labels().intersection(&rs).cloned().collect()
            }
        }
    }

    fn rank(&self) -> u8 {
        match self {
            ProcessTerm::Deadlock => 0,
            ProcessTerm::Action(_) => 1,
            ProcessTerm::Seq(..) => 2,
            ProcessTerm::Alt(..) => 3,
            ProcessTerm::OppAlt(..) => 4,
            ProcessTerm::Play(..) => 5,
        }
    }
}

fn collect_chain<'a>(
    t: &'a ProcessTerm,
    out: &mut Vec<&'a ProcessTerm>,
    split: &dyn Fn(&'a ProcessTerm) -> Option<(&'a Arc<ProcessTerm>, &'a Arc<ProcessTerm>)>,
) {
    match split(t) {
        Some((l, r)) => {
            collect_chain(l, out, split);
            collect_chain(r, out, split);
        }
        None => out.push(t),
    }
}

fn cmp_child(a: &Arc<ProcessTerm>, b: &Arc<ProcessTerm>) -> Ordering {
    if Arc::ptr_eq(a, b) {
        Ordering::Equal
    } else {
        a.as_ref().cmp(b.as_ref())
    }
}

/// Structural order: δ < actions (by name) < `·` < `+` < `‡` < `⊓`, children
/// compared lexicographically. Used to sort summands canonically.
impl Ord for ProcessTerm {
    fn cmp(&self, other: &Self) -> Ordering {
        use ProcessTerm::*;
        match (self, other) {
            (Action(a), Action(b)) => a.cmp(b),
            (Deadlock, Deadlock) => Ordering::Equal,
            (Seq(a1, a2), Seq(b1, b2))
            | (Alt(a1, a2), Alt(b1, b2))
            | (OppAlt(a1, a2), OppAlt(b1, b2))
            | (Play(a1, a2), Play(b1, b2)) => cmp_child(a1, b1).then_with(|| cmp_child(a2, b2)),
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

impl PartialOrd for ProcessTerm {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for ProcessTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::parser::print_term(self))
    }
}

impl fmt::Debug for ProcessTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "`{}`", crate::parser::print_term(self))
    }
}

/// Builds a left-nested `+` chain from already canonical, non-`Alt`
/// summands, sorting them first. Panics on an empty list.
pub(crate) fn sorted_sum(mut summands: Vec<ProcessTerm>) -> ProcessTerm {
    summands.sort();
    let mut iter = summands.into_iter();
    let first = iter.next().expect("a sum needs at least one summand");
    iter.fold(first, ProcessTerm::alt)
}

/// Re-sorts the `+` cluster rooted at `t`, assuming every summand is
/// already canonical. Non-`Alt` terms are returned unchanged.
pub(crate) fn recanonicalize_sum(t: ProcessTerm) -> ProcessTerm {
    if !matches!(t, ProcessTerm::Alt(..)) {
        return t;
    }
    let parts: Vec<ProcessTerm> = t.summands().into_iter().cloned().collect();
    sorted_sum(parts)
}

/// AC-canonical representative: every maximal `+` chain is flattened and its
/// summands sorted by the structural order, then rebuilt left-nested. `·`,
/// `‡` and `⊓` keep their shape; only their children are canonicalized.
pub fn ac_flatten(t: &ProcessTerm) -> ProcessTerm {
    match t {
        ProcessTerm::Action(_) | ProcessTerm::Deadlock => t.clone(),
        ProcessTerm::Alt(..) => sorted_sum(t.summands().into_iter().map(ac_flatten).collect()),
        ProcessTerm::Seq(l, r) => ProcessTerm::seq(ac_flatten(l), ac_flatten(r)),
        ProcessTerm::OppAlt(l, r) => ProcessTerm::opp_alt(ac_flatten(l), ac_flatten(r)),
        ProcessTerm::Play(l, r) => ProcessTerm::play(ac_flatten(l), ac_flatten(r)),
    }
}

/// Equality modulo associativity and commutativity of `+`.
pub fn ac_equal(t: &ProcessTerm, u: &ProcessTerm) -> bool {
    ac_flatten(t) == ac_flatten(u)
}

/// Termination measure. Every rewrite rule strictly decreases it and it is
/// invariant under AC of `+`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Weight(pub BigUint);

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

fn combine(t: &ProcessTerm, l: &BigUint, r: &BigUint) -> BigUint {
    match t {
        ProcessTerm::Alt(..) => l + r,
        ProcessTerm::Seq(..) => l * l * r,
        ProcessTerm::OppAlt(..) => l + r + 1u32,
        ProcessTerm::Play(..) => {
            let p = l * r;
            &p * &p
        }
        ProcessTerm::Action(_) | ProcessTerm::Deadlock => unreachable!("leaf has no children"),
    }
}

/// weight(a) = weight(δ) = 2, weight(s+t) = weight(s)+weight(t),
/// weight(s·t) = weight(s)²·weight(t), weight(s‡t) = weight(s)+weight(t)+1,
/// weight(s⊓t) = (weight(s)·weight(t))².
pub fn weight(t: &ProcessTerm) -> Weight {
    fn go(t: &ProcessTerm) -> BigUint {
        match t {
            ProcessTerm::Action(_) | ProcessTerm::Deadlock => BigUint::from(2u32),
            ProcessTerm::Seq(l, r) | ProcessTerm::Alt(l, r) | ProcessTerm::OppAlt(l, r) | ProcessTerm::Play(l, r) => {
                combine(t, &go(l), &go(r))
            }
        }
    }
    Weight(go(t))
}

/// Memoizes [`weight`] over shared subterms. Consecutive terms of a rewrite
/// trace share almost all of their nodes, so weighing a whole trace through
/// one cache costs roughly the size of the rewritten spine per step.
#[derive(Default)]
pub struct WeightCache {
    memo: HashMap<usize, (Arc<ProcessTerm>, BigUint)>,
}

impl WeightCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn weight(&mut self, t: &ProcessTerm) -> Weight {
        Weight(self.go(t))
    }

    fn child(&mut self, c: &Arc<ProcessTerm>) -> BigUint {
        let key = Arc::as_ptr(c) as usize;
        if let Some((_, w)) = self.memo.get(&key) {
            return w.clone();
        }
        let w = self.go(c);
        // the stored Arc keeps the address from being reused
        self.memo.insert(key, (c.clone(), w.clone()));
        w
    }

    fn go(&mut self, t: &ProcessTerm) -> BigUint {
        match t {
            ProcessTerm::Action(_) | ProcessTerm::Deadlock => BigUint::from(2u32),
            ProcessTerm::Seq(l, r) | ProcessTerm::Alt(l, r) | ProcessTerm::OppAlt(l, r) | ProcessTerm::Play(l, r) => {
                let lw = self.child(l);
                let rw = self.child(r);
                combine(t, &lw, &rw)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DeclarationError {
    #[error("a game needs at least two players, found {0}")]
    TooFewPlayers(usize),
    #[error("player `{0}` is listed twice")]
    DuplicatePlayer(Role),
    #[error("role `{0}` is not a declared player")]
    UnknownRole(Role),
    #[error("label `{label}` is already owned by `{owner}`")]
    DuplicateLabel { label: ActionLabel, owner: Role },
}

/// Players of a game and the owner of each action label (the sets of
/// actions each role may perform).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GameDeclaration {
    players: Vec<Role>,
    ownership: BTreeMap<ActionLabel, Role>,
}

impl GameDeclaration {
    pub fn new(players: Vec<Role>) -> Result<Self, DeclarationError> {
        let mut seen = BTreeSet::new();
        for p in &players {
            if !seen.insert(p.clone()) {
                return Err(DeclarationError::DuplicatePlayer(p.clone()));
            }
        }
        if players.len() < 2 {
            return Err(DeclarationError::TooFewPlayers(players.len()));
        }
        Ok(GameDeclaration { players, ownership: BTreeMap::new() })
    }

    pub fn assign(&mut self, label: ActionLabel, role: Role) -> Result<(), DeclarationError> {
        if !self.players.contains(&role) {
            return Err(DeclarationError::UnknownRole(role));
        }
        if let Some(owner) = self.ownership.get(&label) {
            return Err(DeclarationError::DuplicateLabel { label, owner: owner.clone() });
        }
        self.ownership.insert(label, role);
        Ok(())
    }

    pub fn players(&self) -> &[Role] {
        &self.players
    }

    pub fn owner(&self, label: &ActionLabel) -> Option<&Role> {
        self.ownership.get(label)
    }

    pub fn ownership(&self) -> &BTreeMap<ActionLabel, Role> {
        &self.ownership
    }

    pub fn has_player(&self, role: &Role) -> bool {
        self.players.contains(role)
    }

    /// The labels owned by `role`.
    pub fn actions_of(&self, role: &Role) -> BTreeSet<ActionLabel> {
        self.ownership.iter().filter(|(_, r)| *r == role).map(|(l, _)| l.clone()).collect()
    }

    /// In a two-player game, the player that is not `role`.
    pub fn other_player(&self, role: &Role) -> Option<&Role> {
        if self.players.len() != 2 {
            return None;
        }
        self.players.iter().find(|p| *p != role)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OwnershipWarning {
    /// The label has no entry in the ownership map.
    MissingOwner { label: ActionLabel },
    /// An opponent's choice offers a move that the viewer itself owns.
    ViewerOwnsOpponentMove { label: ActionLabel, viewer: Role },
}

impl fmt::Display for OwnershipWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OwnershipWarning::MissingOwner { label } => {
                write!(f, "label `{label}` has no owner")
            }
            OwnershipWarning::ViewerOwnsOpponentMove { label, viewer } => {
                write!(f, "opponent's alternative offers `{label}`, which is owned by the viewer `{viewer}`")
            }
        }
    }
}

/// Advisory check of a term written from `viewer`'s perspective: reports
/// labels without an owner and `‡` choices whose initial moves belong to the
/// viewer. Each maximal `‡` chain is checked once.
pub fn validate_ownership(t: &ProcessTerm, g: &GameDeclaration, viewer: &Role) -> Vec<OwnershipWarning> {
    let mut warnings: Vec<OwnershipWarning> = t
        .labels()
        .into_iter()
        .filter(|l| g.owner(l).is_none())
        .map(|label| OwnershipWarning::MissingOwner { label })
        .collect();

    fn walk(t: &ProcessTerm, g: &GameDeclaration, viewer: &Role, out: &mut Vec<OwnershipWarning>) {
        match t {
            ProcessTerm::Action(_) | ProcessTerm::Deadlock => {}
            ProcessTerm::OppAlt(..) => {
                let operands = t.opp_operands();
                let mut initial = BTreeSet::new();
                for op in &operands {
                    initial.extend(op.initial_labels());
                }
                for label in initial {
                    if g.owner(&label) == Some(viewer) {
                        out.push(OwnershipWarning::ViewerOwnsOpponentMove { label, viewer: viewer.clone() });
                    }
                }
                for op in operands {
                    walk(op, g, viewer, out);
                }
            }
            ProcessTerm::Seq(l, r) | ProcessTerm::Alt(l, r) | ProcessTerm::Play(l, r) => {
                walk(l, g, viewer, out);
                walk(r, g, viewer, out);
            }
        }
    }
    walk(t, g, viewer, &mut warnings);
    warnings
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_term;

    fn t(s: &str) -> ProcessTerm {
        parse_term(s).unwrap()
    }

    fn l(s: &str) -> ActionLabel {
        ActionLabel::new(s).unwrap()
    }

    fn r(s: &str) -> Role {
        Role::new(s).unwrap()
    }

    #[test]
    fn labels_follow_identifier_grammar() {
        assert!(ActionLabel::new("pOffLine").is_ok());
        assert!(ActionLabel::new("a_1").is_ok());
        assert!(ActionLabel::new("1a").is_err());
        assert!(ActionLabel::new("").is_err());
        assert!(ActionLabel::new("a-b").is_err());
        assert_eq!(ActionLabel::new("delta"), Err(NameError::Reserved("delta".into())));
        assert_eq!(l("a"), l("a"));
        assert_ne!(l("a"), l("b"));
    }

    #[test]
    fn flatten_sorts_nested_sums() {
        let flat = ac_flatten(&t("(c + a) + b"));
        let parts: Vec<_> = flat.summands().into_iter().cloned().collect();
        assert_eq!(parts, vec![t("a"), t("b"), t("c")]);
        assert_eq!(ac_flatten(&t("b + a")), ac_flatten(&t("a + b")));
    }

    #[test]
    fn flatten_does_not_rewrite() {
        let flat = ac_flatten(&t("a . (b + delta)"));
        assert_eq!(flat, t("a . (delta + b)"));
    }

    #[test]
    fn ac_equal_examples() {
        assert!(ac_equal(&t("a + b"), &t("b + a")));
        assert!(!ac_equal(&t("a . (b + c)"), &t("a . b + a . c")));
        assert!(ac_equal(&t("(a + b) + c"), &t("a + (b + c)")));
        // only + is commutative
        assert!(!ac_equal(&t("a $ b"), &t("b $ a")));
        assert!(!ac_equal(&t("a & b"), &t("b & a")));
    }

    #[test]
    fn structural_order_ranks_constructors() {
        let order = ["delta", "a", "b", "a . b", "a + b", "a $ b", "a & b"];
        for w in order.windows(2) {
            assert!(t(w[0]) < t(w[1]), "{} < {}", w[0], w[1]);
        }
    }

    #[test]
    fn weight_examples() {
        let w = |s: &str| weight(&t(s)).0;
        assert_eq!(w("delta"), BigUint::from(2u32));
        assert_eq!(w("a & b"), BigUint::from(16u32));
        assert_eq!(w("a $ b"), BigUint::from(5u32));
        assert_eq!(w("(a . b) . c"), BigUint::from(128u32));
        assert_eq!(w("a . b . c"), BigUint::from(32u32));
    }

    #[test]
    fn weight_cache_agrees_with_weight() {
        let term = t("((a + b) & (a . c $ delta)) . (b & b + c)");
        let mut cache = WeightCache::new();
        assert_eq!(cache.weight(&term), weight(&term));
        assert_eq!(cache.weight(&term), weight(&term));
    }

    #[test]
    fn seq_chain_nests_right() {
        let labels = [l("a"), l("b"), l("c")];
        assert_eq!(ProcessTerm::seq_chain(&labels), t("a . b . c"));
        assert_eq!(ProcessTerm::seq_chain(&[]), ProcessTerm::Deadlock);
    }

    fn submitting_order() -> GameDeclaration {
        let mut g = GameDeclaration::new(vec![r("P"), r("O")]).unwrap();
        for (label, role) in [("submit", "O"), ("store", "P"), ("cancel", "O")] {
            g.assign(l(label), r(role)).unwrap();
        }
        g
    }

    #[test]
    fn ownership_clean_for_player_view() {
        let g = submitting_order();
        assert!(validate_ownership(&t("submit . store $ cancel"), &g, &r("P")).is_empty());
    }

    #[test]
    fn ownership_flags_viewer_owned_opponent_moves() {
        let mut g = GameDeclaration::new(vec![r("P"), r("O")]).unwrap();
        g.assign(l("a"), r("P")).unwrap();
        g.assign(l("b"), r("P")).unwrap();
        let w = validate_ownership(&t("a $ b"), &g, &r("P"));
        assert_eq!(w.len(), 2);
        assert!(w.iter().all(|w| matches!(w, OwnershipWarning::ViewerOwnsOpponentMove { .. })));
    }

    #[test]
    fn ownership_flags_missing_owners() {
        let g = GameDeclaration::new(vec![r("P"), r("O")]).unwrap();
        let w = validate_ownership(&t("a $ b"), &g, &r("P"));
        assert_eq!(
            w,
            vec![OwnershipWarning::MissingOwner { label: l("a") }, OwnershipWarning::MissingOwner { label: l("b") }]
        );
    }

    #[test]
    fn declaration_invariants() {
        assert_eq!(GameDeclaration::new(vec![r("P")]), Err(DeclarationError::TooFewPlayers(1)));
        assert!(matches!(GameDeclaration::new(vec![r("P"), r("P")]), Err(DeclarationError::DuplicatePlayer(_))));
        let mut g = submitting_order();
        assert!(matches!(g.assign(l("x"), r("Q")), Err(DeclarationError::UnknownRole(_))));
        assert!(matches!(g.assign(l("submit"), r("P")), Err(DeclarationError::DuplicateLabel { .. })));
        assert_eq!(g.other_player(&r("P")), Some(&r("O")));
        assert_eq!(g.actions_of(&r("O")).len(), 2);
    }
}
