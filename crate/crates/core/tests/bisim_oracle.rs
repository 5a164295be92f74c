//! Cross-checks the bisimulation checker against a direct greatest-fixpoint
//! computation over a separately written transition function.

use std::collections::{BTreeMap, BTreeSet};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use gameacp::gen::TermGen;
use gameacp::parser::parse_term;
use gameacp::selftest::completeness_pair;
use gameacp::sos::{bisimilar, Lts, Node};
use gameacp::term::{ActionLabel, ProcessTerm};

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
enum St {
    Done,
    Term(ProcessTerm),
}

fn steps(t: &ProcessTerm) -> Vec<(ActionLabel, St)> {
    match t {
        ProcessTerm::Action(a) => vec![(a.clone(), St::Done)],
        ProcessTerm::Deadlock => vec![],
        ProcessTerm::Seq(x, y) => steps(x)
            .into_iter()
            .map(|(a, s)| match s {
                St::Done => (a, St::Term((**y).clone())),
                St::Term(x2) => (a, St::Term(ProcessTerm::seq(x2, (**y).clone()))),
            })
            .collect(),
        ProcessTerm::Alt(x, y) | ProcessTerm::OppAlt(x, y) => {
            let mut v = steps(x);
            v.extend(steps(y));
            v
        }
        ProcessTerm::Play(x, y) => {
            let (sx, sy) = (steps(x), steps(y));
            let mut v = Vec::new();
            for (a, nx) in &sx {
                for (b, ny) in &sy {
                    if a != b {
                        continue;
                    }
                    let next = match (nx, ny) {
                        (St::Done, St::Done) => St::Done,
                        (St::Done, St::Term(r)) | (St::Term(r), St::Done) => St::Term(r.clone()),
                        (St::Term(l), St::Term(r)) => St::Term(ProcessTerm::play(l.clone(), r.clone())),
                    };
                    v.push((a.clone(), next));
                }
            }
            v
        }
    }
}

type Graph = BTreeMap<St, BTreeSet<(ActionLabel, St)>>;

fn explore(roots: &[&ProcessTerm]) -> Graph {
    let mut g = Graph::new();
    let mut todo: Vec<St> = roots.iter().map(|t| St::Term((*t).clone())).collect();
    todo.push(St::Done);
    while let Some(s) = todo.pop() {
        if g.contains_key(&s) {
            continue;
        }
        let succ: BTreeSet<(ActionLabel, St)> = match &s {
            St::Done => BTreeSet::new(),
            St::Term(t) => steps(t).into_iter().collect(),
        };
        todo.extend(succ.iter().map(|(_, n)| n.clone()));
        g.insert(s, succ);
    }
    g
}

/// Largest bisimulation on one graph: start from every pair that agrees on
/// termination and drop pairs until the transfer property holds.
fn naive_bisimilar(t: &ProcessTerm, u: &ProcessTerm) -> bool {
    let g = explore(&[t, u]);
    let states: Vec<&St> = g.keys().collect();
    let mut rel: BTreeSet<(&St, &St)> = BTreeSet::new();
    for &p in &states {
        for &q in &states {
            if (*p == St::Done) == (*q == St::Done) {
                rel.insert((p, q));
            }
        }
    }
    loop {
        let simulates = |p: &St, q: &St, rel: &BTreeSet<(&St, &St)>| {
            g[p].iter().all(|(a, p2)| g[q].iter().any(|(b, q2)| a == b && rel.contains(&(p2, q2))))
        };
        let broken: Vec<(&St, &St)> =
            rel.iter().copied().filter(|&(p, q)| !simulates(p, q, &rel) || !simulates(q, p, &rel)).collect();
        if broken.is_empty() {
            break;
        }
        for pair in broken {
            rel.remove(&pair);
        }
    }
    rel.contains(&(&St::Term(t.clone()), &St::Term(u.clone())))
}

fn t(s: &str) -> ProcessTerm {
    parse_term(s).unwrap()
}

fn node_term(n: Node, lts: &Lts) -> Option<&ProcessTerm> {
    match n {
        Node::State(s) => Some(lts.state(s)),
        Node::Terminated => None,
    }
}

fn check_pair(a: &ProcessTerm, b: &ProcessTerm) {
    let res = bisimilar(a, b).unwrap();
    assert_eq!(res.equivalent, naive_bisimilar(a, b), "{a} vs {b}");
    if res.equivalent {
        assert!(res.relation.contains(&(res.left.root(), res.right.root())));
        for &(p, q) in &res.relation {
            assert!(naive_bisimilar(res.left.state(p), res.right.state(q)), "related pair {p:?}, {q:?}");
        }
    } else {
        let w = res.witness.as_ref().expect("witness when not equivalent");
        let (l, r) = (node_term(w.left, &res.left), node_term(w.right, &res.right));
        match (l, r) {
            (Some(l), Some(r)) => assert!(!naive_bisimilar(l, r), "witness ends in bisimilar states"),
            (None, None) => panic!("both witness ends terminated"),
            _ => {}
        }
        // the witness trace is executable on both sides
        for (root, end) in [(a, l), (b, r)] {
            let mut reach: BTreeSet<St> = BTreeSet::from([St::Term(root.clone())]);
            for label in &w.trace {
                reach = reach
                    .iter()
                    .flat_map(|s| match s {
                        St::Done => vec![],
                        St::Term(x) => steps(x).into_iter().filter(|(m, _)| m == label).map(|(_, n)| n).collect(),
                    })
                    .collect();
            }
            assert!(!reach.is_empty(), "trace {:?} not executable from {root}", w.trace);
            if end.is_none() {
                assert!(reach.contains(&St::Done));
            }
        }
    }
}

#[test]
fn known_pairs() {
    let cases = [
        ("a + b", "b + a", true),
        ("a . (b + c)", "a . b + a . c", false),
        ("(a + b) . c", "a . c + b . c", true),
        ("a", "a . delta", false),
        ("a + delta", "a", true),
        ("a $ b", "a + b", true),
        ("(a + b) & a . c", "a . c", true),
        ("a & b", "delta", true),
        ("a . b & a . c", "a . delta", true),
    ];
    for (l, r, expected) in cases {
        assert_eq!(naive_bisimilar(&t(l), &t(r)), expected, "{l} vs {r}");
        check_pair(&t(l), &t(r));
    }
}

#[test]
fn random_pairs_agree_with_naive_fixpoint() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..400 {
        let (a, b) = completeness_pair(&mut rng);
        check_pair(&a, &b);
    }
}

#[test]
fn random_terms_against_themselves_and_normal_forms() {
    let g = TermGen { max_depth: 5, ..TermGen::default() };
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for _ in 0..200 {
        let a = g.generate(&mut rng);
        let n = gameacp::rewrite::normalize(&a, gameacp::rewrite::Mode::Full).unwrap().final_term;
        check_pair(&a, &a);
        check_pair(&a, &n);
    }
}
