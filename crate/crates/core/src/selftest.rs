//! Randomized property suites with deterministic seeding.

use std::fmt;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::game::{enumerate_strategies, verify_play_with, Assoc, Strategy};
use crate::gen::{equational_variant, mutate_leaf, GameTreeGen, TermGen};
use crate::parser::print_term;
use crate::rewrite::{is_basic_term, Rewriter};
use crate::sos::{bisimilar_capped, DEFAULT_STATE_CAP};
use crate::term::{ac_equal, GameDeclaration, ProcessTerm, Role, WeightCache};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    WeightDecrease,
    Purity,
    Soundness,
    Completeness,
    Congruence,
    Theorem13,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::WeightDecrease,
        Suite::Purity,
        Suite::Soundness,
        Suite::Completeness,
        Suite::Congruence,
        Suite::Theorem13,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::WeightDecrease => "weight-decrease",
            Suite::Purity => "normal-form-purity",
            Suite::Soundness => "soundness",
            Suite::Completeness => "completeness",
            Suite::Congruence => "congruence",
            Suite::Theorem13 => "theorem-13",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone)]
pub struct SelftestConfig {
    pub seed: u64,
    /// Cases per suite.
    pub count: usize,
    /// Rewriter under test; should run in full mode.
    pub rewriter: Rewriter,
    pub state_cap: usize,
}

impl SelftestConfig {
    pub fn new(seed: u64, count: usize) -> Self {
        SelftestConfig { seed, count, rewriter: Rewriter::default(), state_cap: DEFAULT_STATE_CAP }
    }

    fn rng(&self, suite: Suite) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed ^ (suite as u64 + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15))
    }
}

#[derive(Debug, Clone)]
pub struct Counterexample {
    pub suite: Suite,
    pub case: usize,
    pub message: String,
    pub data: serde_json::Value,
}

impl Counterexample {
    pub fn to_json(&self) -> serde_json::Value {
        json!({ "suite": self.suite.name(), "case": self.case, "message": self.message, "data": self.data })
    }
}

#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub suite: Suite,
    pub cases: usize,
    pub failures: usize,
    pub first_failure: Option<Counterexample>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

#[derive(Debug, Clone)]
pub struct SelftestReport {
    pub seed: u64,
    pub count: usize,
    pub suites: Vec<SuiteReport>,
}

impl SelftestReport {
    pub fn passed(&self) -> bool {
        self.suites.iter().all(SuiteReport::passed)
    }

    pub fn first_failure(&self) -> Option<&Counterexample> {
        self.suites.iter().find_map(|s| s.first_failure.as_ref())
    }

    pub fn table(&self) -> String {
        let mut out = format!("{:<20} {:>8} {:>8}  result\n", "suite", "cases", "failures");
        for s in &self.suites {
            let verdict = if s.passed() { "PASS" } else { "FAIL" };
            let _ = writeln!(out, "{:<20} {:>8} {:>8}  {verdict}", s.suite.name(), s.cases, s.failures);
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "seed": self.seed,
            "count": self.count,
            "pass": self.passed(),
            "suites": self.suites.iter().map(|s| json!({
                "suite": s.suite.name(),
                "cases": s.cases,
                "failures": s.failures,
                "pass": s.passed(),
            })).collect::<Vec<_>>(),
        })
    }
}

pub fn run_selftest(cfg: &SelftestConfig) -> SelftestReport {
    SelftestReport { seed: cfg.seed, count: cfg.count, suites: Suite::ALL.iter().map(|&s| run_suite(s, cfg)).collect() }
}

struct Tally {
    suite: Suite,
    cases: usize,
    failures: usize,
    first_failure: Option<Counterexample>,
}

impl Tally {
    fn new(suite: Suite) -> Self {
        Tally { suite, cases: 0, failures: 0, first_failure: None }
    }

    fn record(&mut self, case: usize, outcome: Result<(), (String, serde_json::Value)>) {
        self.cases += 1;
        if let Err((message, data)) = outcome {
            self.failures += 1;
            if self.first_failure.is_none() {
                self.first_failure = Some(Counterexample { suite: self.suite, case, message, data });
            }
        }
    }

    fn finish(self) -> SuiteReport {
        SuiteReport { suite: self.suite, cases: self.cases, failures: self.failures, first_failure: self.first_failure }
    }
}

fn term_data(t: &ProcessTerm) -> serde_json::Value {
    json!({ "term": print_term(t) })
}

pub fn run_suite(suite: Suite, cfg: &SelftestConfig) -> SuiteReport {
    let mut rng = cfg.rng(suite);
    let mut tally = Tally::new(suite);
    for case in 0..cfg.count {
        let outcome = match suite {
            Suite::WeightDecrease => weight_case(cfg, &TermGen::default().generate(&mut rng)),
            Suite::Purity => purity_case(cfg, &TermGen::default().generate(&mut rng)),
            Suite::Soundness => soundness_case(cfg, &TermGen::default().generate(&mut rng)),
            Suite::Completeness => {
                let (t, u) = completeness_pair(&mut rng);
                completeness_case(cfg, &t, &u)
            }
            Suite::Congruence => congruence_case(cfg, &mut rng),
            Suite::Theorem13 => theorem13_case(cfg, case, &mut rng),
        };
        tally.record(case, outcome);
    }
    tally.finish()
}

type Outcome = Result<(), (String, serde_json::Value)>;

fn weight_case(cfg: &SelftestConfig, t: &ProcessTerm) -> Outcome {
    let trace = cfg.rewriter.normalize(t).map_err(|e| (e.to_string(), term_data(t)))?;
    let mut weights = WeightCache::new();
    for (i, step) in trace.steps.iter().enumerate() {
        if weights.weight(&step.after) >= weights.weight(&step.before) {
            return Err((
                format!("step {i} ({}) does not decrease the weight", step.rule),
                json!({ "term": print_term(t), "before": print_term(&step.before), "after": print_term(&step.after) }),
            ));
        }
    }
    Ok(())
}

fn purity_case(cfg: &SelftestConfig, t: &ProcessTerm) -> Outcome {
    let nf = cfg.rewriter.normalize(t).map_err(|e| (e.to_string(), term_data(t)))?.final_term;
    if is_basic_term(&nf) {
        Ok(())
    } else {
        Err((
            "normal form is not a basic term".into(),
            json!({ "term": print_term(t), "normal_form": print_term(&nf) }),
        ))
    }
}

fn soundness_case(cfg: &SelftestConfig, t: &ProcessTerm) -> Outcome {
    let nf = cfg.rewriter.normalize(t).map_err(|e| (e.to_string(), term_data(t)))?.final_term;
    let res = bisimilar_capped(t, &nf, cfg.state_cap).map_err(|e| (e.to_string(), term_data(t)))?;
    if res.equivalent {
        Ok(())
    } else {
        Err((
            "term and its normal form are not bisimilar".into(),
            json!({ "term": print_term(t), "normal_form": print_term(&nf) }),
        ))
    }
}

/// Equal-behaviour variants, one-leaf mutations and unrelated small terms.
pub fn completeness_pair<R: Rng>(rng: &mut R) -> (ProcessTerm, ProcessTerm) {
    let g = TermGen { max_depth: 5, ..TermGen::default() };
    match rng.gen_range(0..3) {
        0 => {
            let t = g.generate(rng);
            let steps = rng.gen_range(1..=6);
            let u = equational_variant(&t, steps, rng);
            (t, u)
        }
        1 => {
            let t = g.generate(rng);
            let u = mutate_leaf(&t, &g.alphabet, rng);
            (t, u)
        }
        _ => {
            let small = TermGen::small();
            (small.generate(rng), small.generate(rng))
        }
    }
}

fn completeness_case(cfg: &SelftestConfig, t: &ProcessTerm, u: &ProcessTerm) -> Outcome {
    let pair = || json!({ "left": print_term(t), "right": print_term(u) });
    let nt = cfg.rewriter.normalize(t).map_err(|e| (e.to_string(), pair()))?.final_term;
    let nu = cfg.rewriter.normalize(u).map_err(|e| (e.to_string(), pair()))?.final_term;
    let bisim = bisimilar_capped(t, u, cfg.state_cap).map_err(|e| (e.to_string(), pair()))?.equivalent;
    let equal = ac_equal(&nt, &nu);
    if bisim == equal {
        Ok(())
    } else {
        Err((
            format!("bisimilar = {bisim} but normal forms equal = {equal}"),
            json!({ "left": print_term(t), "right": print_term(u),
                    "left_nf": print_term(&nt), "right_nf": print_term(&nu) }),
        ))
    }
}

pub type Operator = fn(ProcessTerm, ProcessTerm) -> ProcessTerm;

pub const CONGRUENCE_OPERATORS: [(&str, Operator); 4] =
    [("+", ProcessTerm::alt), (".", ProcessTerm::seq), ("$", ProcessTerm::opp_alt), ("&", ProcessTerm::play)];

/// Two bisimilar pairs built from equational variants.
pub fn congruence_quadruple<R: Rng>(rng: &mut R) -> [ProcessTerm; 4] {
    let g = TermGen { max_depth: 4, ..TermGen::default() };
    let t1 = g.generate(rng);
    let u1 = g.generate(rng);
    let n = rng.gen_range(1..=4);
    let t2 = equational_variant(&t1, n, rng);
    let m = rng.gen_range(1..=4);
    let u2 = equational_variant(&u1, m, rng);
    [t1, t2, u1, u2]
}

fn congruence_case<R: Rng>(cfg: &SelftestConfig, rng: &mut R) -> Outcome {
    let [t1, t2, u1, u2] = congruence_quadruple(rng);
    let data = || json!({ "t1": print_term(&t1), "t2": print_term(&t2), "u1": print_term(&u1), "u2": print_term(&u2) });
    let bisim = |a: &ProcessTerm, b: &ProcessTerm| {
        bisimilar_capped(a, b, cfg.state_cap).map(|r| r.equivalent).map_err(|e| (e.to_string(), data()))
    };
    if !bisim(&t1, &t2)? || !bisim(&u1, &u2)? {
        return Err(("generated operands are not bisimilar".into(), data()));
    }
    for (name, op) in CONGRUENCE_OPERATORS {
        if !bisim(&op(t1.clone(), u1.clone()), &op(t2.clone(), u2.clone()))? {
            return Err((format!("bisimilarity not preserved by `{name}`"), data()));
        }
    }
    Ok(())
}

pub fn players(n: usize) -> Vec<Role> {
    (1..=n).map(|i| Role::new(&format!("P{i}")).expect("valid role")).collect()
}

/// Every combination of one strategy per player, in lexicographic order.
pub fn strategy_combinations(per_role: &[Vec<Strategy>]) -> Vec<Vec<Strategy>> {
    per_role.iter().fold(vec![Vec::new()], |acc, options| {
        acc.iter()
            .flat_map(|prefix| {
                options.iter().map(move |s| {
                    let mut next = prefix.clone();
                    next.push(s.clone());
                    next
                })
            })
            .collect()
    })
}

fn theorem13_case<R: Rng>(cfg: &SelftestConfig, case: usize, rng: &mut R) -> Outcome {
    let roles = players(2 + case % 2);
    let decl = GameDeclaration::new(roles.clone()).expect("distinct players");
    let tree = GameTreeGen::default().generate(&roles, rng);
    let per_role: Vec<Vec<Strategy>> = roles.iter().map(|r| enumerate_strategies(&tree, r)).collect();
    for combo in strategy_combinations(&per_role) {
        let report = verify_play_with(&combo, &decl, &cfg.rewriter, Assoc::Left)
            .map_err(|e| (e.to_string(), json!({ "tree": tree.to_dot() })))?;
        if !report.pass {
            return Err((
                "played strategies do not yield the maximal common move sequence".into(),
                json!({
                    "strategies": report.strategy_terms.iter().map(print_term).collect::<Vec<_>>(),
                    "result": print_term(&report.result),
                    "expected": print_term(&report.expected),
                }),
            ));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rewrite::RuleId;

    #[test]
    fn small_run_passes_and_is_deterministic() {
        let cfg = SelftestConfig::new(7, 40);
        let a = run_selftest(&cfg);
        assert!(a.passed(), "{}", a.table());
        assert_eq!(a.table(), run_selftest(&cfg).table());
        assert!(a.suites.iter().all(|s| s.cases == 40));
    }

    #[test]
    fn zero_count_is_vacuous() {
        let report = run_selftest(&SelftestConfig::new(1, 0));
        assert!(report.passed());
        assert!(report.suites.iter().all(|s| s.cases == 0));
    }

    #[test]
    fn disabling_po9_is_caught() {
        let mut cfg = SelftestConfig::new(42, 60);
        cfg.rewriter = Rewriter::default().without_rule(RuleId::PO9);
        let report = run_selftest(&cfg);
        assert!(!report.passed());
        let first = report.first_failure().unwrap();
        assert!(first.to_json()["suite"].is_string());
    }

    #[test]
    fn combinations_cover_the_product() {
        let roles = players(2);
        let tree = GameTreeGen::default().generate(&roles, &mut ChaCha8Rng::seed_from_u64(11));
        let per_role: Vec<Vec<Strategy>> = roles.iter().map(|r| enumerate_strategies(&tree, r)).collect();
        let n: usize = per_role.iter().map(Vec::len).product();
        assert_eq!(strategy_combinations(&per_role).len(), n);
    }
}
