//! Seeded random terms, term variants and game trees for property suites.

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::Rng;

use crate::game::{count_strategies, GameTree};
use crate::term::{ActionLabel, ProcessTerm, Role};

fn labels(names: &[&str]) -> Vec<ActionLabel> {
    names.iter().map(|n| ActionLabel::new(n).expect("valid label")).collect()
}

#[derive(Debug, Clone)]
pub struct TermGen {
    pub max_depth: usize,
    pub alphabet: Vec<ActionLabel>,
    /// Probability of stopping at a leaf before `max_depth` is reached.
    pub leaf_prob: f64,
    /// Probability that a leaf is δ rather than an action.
    pub deadlock_prob: f64,
    /// Relative frequencies of `·`, `+`, `‡` and `⊓` at inner nodes.
    pub operator_weights: [u32; 4],
}

impl Default for TermGen {
    fn default() -> Self {
        TermGen {
            max_depth: 8,
            alphabet: labels(&["a", "b", "c"]),
            leaf_prob: 0.3,
            deadlock_prob: 0.1,
            operator_weights: [3, 3, 2, 1],
        }
    }
}

impl TermGen {
    pub fn small() -> Self {
        TermGen { max_depth: 3, alphabet: labels(&["a", "b"]), leaf_prob: 0.3, ..TermGen::default() }
    }

    pub fn generate<R: Rng>(&self, rng: &mut R) -> ProcessTerm {
        self.gen_at(rng, 0)
    }

    fn gen_at<R: Rng>(&self, rng: &mut R, depth: usize) -> ProcessTerm {
        if depth + 1 >= self.max_depth || (depth > 0 && rng.gen_bool(self.leaf_prob)) {
            return self.leaf(rng);
        }
        let l = self.gen_at(rng, depth + 1);
        let r = self.gen_at(rng, depth + 1);
        let dist = WeightedIndex::new(self.operator_weights).expect("some operator has positive weight");
        match dist.sample(rng) {
            0 => ProcessTerm::seq(l, r),
            1 => ProcessTerm::alt(l, r),
            2 => ProcessTerm::opp_alt(l, r),
            _ => ProcessTerm::play(l, r),
        }
    }

    fn leaf<R: Rng>(&self, rng: &mut R) -> ProcessTerm {
        if rng.gen_bool(self.deadlock_prob) {
            ProcessTerm::Deadlock
        } else {
            ProcessTerm::Action(self.alphabet.choose(rng).expect("non-empty alphabet").clone())
        }
    }

    /// Term with no ⊓, ‡ or δ: a plain BPA term.
    pub fn generate_bpa<R: Rng>(&self, rng: &mut R) -> ProcessTerm {
        fn go<R: Rng>(g: &TermGen, rng: &mut R, depth: usize) -> ProcessTerm {
            if depth + 1 >= g.max_depth || (depth > 0 && rng.gen_bool(g.leaf_prob)) {
                return ProcessTerm::Action(g.alphabet.choose(rng).expect("non-empty alphabet").clone());
            }
            let l = go(g, rng, depth + 1);
            let r = go(g, rng, depth + 1);
            if rng.gen_bool(0.5) {
                ProcessTerm::seq(l, r)
            } else {
                ProcessTerm::alt(l, r)
            }
        }
        go(self, rng, 0)
    }
}

/// Rewrites at one random position using an equation that holds up to
/// bisimilarity (commutativity, A3–A5 in either direction, OA1, DL1, DL2,
/// commutativity of ⊓). Returns the term unchanged if the chosen equation
/// does not fit the chosen position.
pub fn equational_step<R: Rng>(t: &ProcessTerm, rng: &mut R) -> ProcessTerm {
    let positions = positions(t);
    let target = positions.choose(rng).expect("root is a position");
    let choice = rng.gen_range(0..10);
    replace(t, target, &mut |s| apply_equation(s, choice))
}

/// Applies `steps` equational steps.
pub fn equational_variant<R: Rng>(t: &ProcessTerm, steps: usize, rng: &mut R) -> ProcessTerm {
    (0..steps).fold(t.clone(), |acc, _| equational_step(&acc, rng))
}

/// Replaces one random leaf by a different action or δ. Usually changes
/// the behaviour, occasionally not (when the leaf is unreachable).
pub fn mutate_leaf<R: Rng>(t: &ProcessTerm, alphabet: &[ActionLabel], rng: &mut R) -> ProcessTerm {
    let leaves: Vec<Vec<usize>> = positions(t)
        .into_iter()
        .filter(|p| matches!(at(t, p), ProcessTerm::Action(_) | ProcessTerm::Deadlock))
        .collect();
    let target = leaves.choose(rng).expect("every term has a leaf");
    let replacement = {
        let mut options: Vec<ProcessTerm> = alphabet.iter().cloned().map(ProcessTerm::Action).collect();
        options.push(ProcessTerm::Deadlock);
        let current = at(t, target).clone();
        options.retain(|o| *o != current);
        options.choose(rng).expect("at least two leaf kinds").clone()
    };
    replace(t, target, &mut |_| replacement.clone())
}

fn apply_equation(t: &ProcessTerm, choice: u32) -> ProcessTerm {
    use ProcessTerm::*;
    match (choice, t) {
        (0, Alt(x, y)) => ProcessTerm::alt((**y).clone(), (**x).clone()),
        (0, OppAlt(x, y)) => ProcessTerm::opp_alt((**y).clone(), (**x).clone()),
        (0, Play(x, y)) => ProcessTerm::play((**y).clone(), (**x).clone()),
        (1, _) => ProcessTerm::alt(t.clone(), t.clone()),
        (2, Seq(l, z)) => match &**l {
            Alt(x, y) => ProcessTerm::alt(
                ProcessTerm::seq((**x).clone(), (**z).clone()),
                ProcessTerm::seq((**y).clone(), (**z).clone()),
            ),
            _ => t.clone(),
        },
        (3, Alt(l, r)) => match (&**l, &**r) {
            (Seq(x, z1), Seq(y, z2)) if z1 == z2 => {
                ProcessTerm::seq(ProcessTerm::alt((**x).clone(), (**y).clone()), (**z1).clone())
            }
            _ => t.clone(),
        },
        (4, Seq(l, z)) => match &**l {
            Seq(x, y) => ProcessTerm::seq((**x).clone(), ProcessTerm::seq((**y).clone(), (**z).clone())),
            _ => t.clone(),
        },
        (5, Seq(x, r)) => match &**r {
            Seq(y, z) => ProcessTerm::seq(ProcessTerm::seq((**x).clone(), (**y).clone()), (**z).clone()),
            _ => t.clone(),
        },
        (6, OppAlt(x, y)) => ProcessTerm::alt((**x).clone(), (**y).clone()),
        (6, Alt(x, y)) => ProcessTerm::opp_alt((**x).clone(), (**y).clone()),
        (7, _) => ProcessTerm::alt(t.clone(), Deadlock),
        (8, Alt(x, y)) if **y == Deadlock => (**x).clone(),
        (8, Deadlock) => ProcessTerm::seq(Deadlock, Action(ActionLabel::new("a").expect("valid"))),
        (9, Seq(x, _)) if **x == Deadlock => Deadlock,
        _ => t.clone(),
    }
}

fn children(t: &ProcessTerm) -> Vec<&ProcessTerm> {
    match t {
        ProcessTerm::Seq(l, r) | ProcessTerm::Alt(l, r) | ProcessTerm::OppAlt(l, r) | ProcessTerm::Play(l, r) => {
            vec![l, r]
        }
        _ => Vec::new(),
    }
}

/// Binary-tree positions (0 = left, 1 = right) in preorder.
fn positions(t: &ProcessTerm) -> Vec<Vec<usize>> {
    fn go(t: &ProcessTerm, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        out.push(prefix.clone());
        for (i, c) in children(t).into_iter().enumerate() {
            prefix.push(i);
            go(c, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    go(t, &mut Vec::new(), &mut out);
    out
}

fn at<'a>(t: &'a ProcessTerm, pos: &[usize]) -> &'a ProcessTerm {
    pos.iter().fold(t, |acc, &i| children(acc)[i])
}

fn replace(t: &ProcessTerm, pos: &[usize], f: &mut dyn FnMut(&ProcessTerm) -> ProcessTerm) -> ProcessTerm {
    let Some((&i, rest)) = pos.split_first() else {
        return f(t);
    };
    let rebuild = |l: &ProcessTerm, r: &ProcessTerm, f: &mut dyn FnMut(&ProcessTerm) -> ProcessTerm| {
        if i == 0 {
            (replace(l, rest, f), r.clone())
        } else {
            (l.clone(), replace(r, rest, f))
        }
    };
    match t {
        ProcessTerm::Seq(l, r) => {
            let (l, r) = rebuild(l, r, f);
            ProcessTerm::seq(l, r)
        }
        ProcessTerm::Alt(l, r) => {
            let (l, r) = rebuild(l, r, f);
            ProcessTerm::alt(l, r)
        }
        ProcessTerm::OppAlt(l, r) => {
            let (l, r) = rebuild(l, r, f);
            ProcessTerm::opp_alt(l, r)
        }
        ProcessTerm::Play(l, r) => {
            let (l, r) = rebuild(l, r, f);
            ProcessTerm::play(l, r)
        }
        _ => unreachable!("position below a leaf"),
    }
}

#[derive(Debug, Clone)]
pub struct GameTreeGen {
    pub max_depth: usize,
    pub max_branching: usize,
    pub alphabet: Vec<ActionLabel>,
    /// Probability that a non-root node above `max_depth` is a leaf.
    pub leaf_prob: f64,
    /// Trees whose strategy combinations exceed this are redrawn.
    pub max_combinations: u128,
}

impl Default for GameTreeGen {
    fn default() -> Self {
        GameTreeGen {
            max_depth: 5,
            max_branching: 3,
            alphabet: labels(&["a", "b", "c", "d"]),
            leaf_prob: 0.25,
            max_combinations: 256,
        }
    }
}

impl GameTreeGen {
    /// Random tree whose choice nodes are owned by random `players`; the
    /// root always has at least one move.
    pub fn generate<R: Rng>(&self, players: &[Role], rng: &mut R) -> GameTree {
        loop {
            let tree = self.gen_at(players, rng, 0);
            let combos = players.iter().fold(1u128, |acc, p| acc.saturating_mul(count_strategies(&tree, p)));
            if combos <= self.max_combinations {
                return tree;
            }
        }
    }

    fn gen_at<R: Rng>(&self, players: &[Role], rng: &mut R, depth: usize) -> GameTree {
        if depth + 1 >= self.max_depth || (depth > 0 && rng.gen_bool(self.leaf_prob)) {
            return GameTree::Leaf;
        }
        let k = rng.gen_range(1..=self.max_branching.min(self.alphabet.len()));
        let moves: Vec<ActionLabel> = self.alphabet.choose_multiple(rng, k).cloned().collect();
        let owner = (k >= 2).then(|| players.choose(rng).expect("players").clone());
        let children = moves.into_iter().map(|m| (m, self.gen_at(players, rng, depth + 1))).collect();
        GameTree::Branch { owner, children }
    }
}
