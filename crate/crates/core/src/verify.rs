//! Seeded self-checks that tie the solvers, builders and liftings together.
//! Each suite returns a report listing every failed case; an `Err` means a
//! suite could not run at all.

use std::fmt;
use std::str::FromStr;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::formulations::{build_ip_z, build_qdp, build_qsn, check_point, Assignment, Model};
use crate::generators::{
    check_3partition, gen_bipartite, gen_tree, reduce_3partition, GenConfig, InstanceRng, ThreePartitionInput,
};
use crate::instance::{Instance, NodeId, RootedTree, Variant};
use crate::liftings::{
    convex_combination, encode_f, lift_z, pi_map, project, sample_point_in_p, with_induced_z, LiftedPoint, Projection,
};
use crate::oracle::{brute_force_solve, enumerate_feasible, optimal_solutions, DEFAULT_LIMIT};
use crate::rational::{self, int, ratio, Rational};
use crate::tree_dp::{encode_uv, solve_tree};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    DpOracle,
    Certificates,
    LiftZ,
    PiChain,
    Reduction,
}

impl Suite {
    pub const ALL: [Suite; 5] = [Suite::DpOracle, Suite::Certificates, Suite::LiftZ, Suite::PiChain, Suite::Reduction];

    pub fn tag(self) -> &'static str {
        match self {
            Suite::DpOracle => "dp-oracle",
            Suite::Certificates => "certificates",
            Suite::LiftZ => "lift-z",
            Suite::PiChain => "pi-chain",
            Suite::Reduction => "reduction",
        }
    }

    pub fn default_trials(self) -> usize {
        match self {
            Suite::DpOracle | Suite::Certificates => 200,
            Suite::LiftZ => 20,
            Suite::PiChain => 10,
            Suite::Reduction => REDUCTION_CORPUS.len(),
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.tag() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown suite `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Report {
    pub suite: Suite,
    pub cases: usize,
    pub failures: Vec<String>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed() { "PASS" } else { "FAIL" };
        write!(f, "{status} {}: {} cases, {} failures", self.suite, self.cases, self.failures.len())?;
        for line in &self.failures {
            write!(f, "\n  {line}")?;
        }
        Ok(())
    }
}

pub const TREE_MAX_NODES: u64 = 8;
pub const TREE_MAX_CAP: u64 = 5;
pub const LIFT_POINTS: usize = 100;
pub const CHAIN_POINTS: usize = 50;
pub const CHAIN_MIDPOINTS: usize = 20;
/// Flow-vector budget for the reduction instances; their capacity product
/// is large but the search prunes almost all of it.
pub const REDUCTION_LIMIT: u128 = 1_000_000_000_000;

/// `(numbers, b)`; every entry lies strictly between `b / 4` and `b / 2`.
pub const REDUCTION_CORPUS: &[(&[u64], u64)] = &[
    (&[4, 5, 6], 15),
    (&[3, 3, 3], 9),
    (&[4, 4, 5], 13),
    (&[5, 6, 7], 18),
    (&[5, 5, 5], 15),
    (&[3, 3, 4], 10),
    (&[4, 4, 4], 12),
    (&[6, 7, 8], 21),
    (&[5, 5, 6], 16),
    (&[7, 7, 7], 21),
    (&[3, 3, 3, 3, 3, 3], 9),
    (&[3, 3, 4, 3, 3, 4], 10),
    (&[3, 3, 3, 4, 4, 5], 11),
    (&[3, 3, 3, 3, 5, 5], 11),
    (&[4, 4, 4, 4, 5, 5], 13),
    (&[4, 4, 5, 5, 5, 5], 14),
    (&[4, 4, 4, 5, 5, 6], 14),
    (&[4, 4, 4, 4, 6, 6], 14),
    (&[4, 4, 4, 5, 6, 7], 15),
    (&[4, 4, 5, 5, 5, 7], 15),
    (&[4, 4, 4, 4, 7, 7], 15),
    (&[4, 4, 4, 4, 4, 6], 13),
    (&[4, 4, 4, 6, 6, 6], 15),
    (&[5, 5, 5, 5, 5, 7], 16),
    (&[5, 5, 5, 5, 6, 8], 17),
    (&[6, 6, 7, 7, 8, 8], 21),
    (&[6, 6, 6, 7, 7, 10], 21),
];

pub fn reduction_corpus() -> Vec<ThreePartitionInput> {
    REDUCTION_CORPUS
        .iter()
        .map(|(numbers, b)| ThreePartitionInput::new(numbers.to_vec(), *b).expect("corpus entries are valid"))
        .collect()
}

/// Random trees with at most eight nodes and capacities up to five, one
/// per trial, all derived from `seed`.
pub fn random_trees(seed: u64, trials: usize) -> Result<Vec<Instance>> {
    let mut rng = InstanceRng::new(seed);
    (0..trials)
        .map(|_| {
            let n = 1 + rng.below(TREE_MAX_NODES) as usize;
            gen_tree(n, TREE_MAX_CAP, rng.next_u64())
        })
        .collect()
}

pub fn run_suite(suite: Suite, trials: usize, seed: u64) -> Result<Report> {
    let mut report = Report { suite, cases: 0, failures: Vec::new() };
    match suite {
        Suite::DpOracle => dp_oracle(&mut report, trials, seed)?,
        Suite::Certificates => certificates(&mut report, trials, seed)?,
        Suite::LiftZ => lift_suite(&mut report, trials, seed)?,
        Suite::PiChain => pi_chain(&mut report, trials, seed)?,
        Suite::Reduction => reduction(&mut report, trials)?,
    }
    Ok(report)
}

fn dp_oracle(report: &mut Report, trials: usize, seed: u64) -> Result<()> {
    for (t, inst) in random_trees(seed, trials)?.into_iter().enumerate() {
        report.cases += 1;
        let rt = RootedTree::new(inst.clone(), 1)?;
        let (_, dp) = solve_tree(&rt)?;
        let oracle = brute_force_solve(&inst, DEFAULT_LIMIT)?;
        if dp.objective != oracle.objective {
            report.failures.push(format!(
                "tree {t} ({}): dp {} vs oracle {}",
                inst.fingerprint(),
                rational::to_text(&dp.objective),
                rational::to_text(&oracle.objective)
            ));
        }
    }
    Ok(())
}

fn violations(model: &Model, pt: &Assignment) -> Result<Option<String>> {
    let v = check_point(model, pt)?;
    Ok(v.first().map(|first| format!("{} violations, first {first}", v.len())))
}

fn certificates(report: &mut Report, trials: usize, seed: u64) -> Result<()> {
    for (t, inst) in random_trees(seed, trials)?.into_iter().enumerate() {
        report.cases += 1;
        let rt = RootedTree::new(inst.clone(), 1)?;
        let (tables, sol) = solve_tree(&rt)?;
        let cert = encode_uv(&rt, &sol.x)?;
        let model = build_qdp(&rt)?;
        let pt = cert.to_assignment();
        let tag = format!("tree {t} ({})", inst.fingerprint());
        if let Some(msg) = violations(&model, &pt)? {
            report.failures.push(format!("{tag}: {msg}"));
        }
        let value = model.objective_value(&pt)?;
        if value != tables.root_value || cert.objective != value {
            report.failures.push(format!(
                "{tag}: certificate {} vs dp {}",
                rational::to_text(&value),
                rational::to_text(&tables.root_value)
            ));
        }
    }
    Ok(())
}

/// Instance `t` of the lifting suite: trees, complete bipartite graphs with
/// all rows `<=`, and the same with the lower link, in turn.
pub fn lift_instance(t: usize, rng: &mut InstanceRng) -> Result<Instance> {
    match t % 3 {
        0 => gen_tree(2 + rng.below(7) as usize, TREE_MAX_CAP, rng.next_u64()),
        kind => {
            let n = 2 + rng.below(2) as usize;
            let inst = gen_bipartite(&GenConfig::new(n, 4, int(1), rng.next_u64()))?;
            inst.with_variant(Variant::new(std::iter::empty(), kind == 2))
        }
    }
}

fn lift_suite(report: &mut Report, trials: usize, seed: u64) -> Result<()> {
    let mut rng = InstanceRng::new(seed);
    for t in 0..trials {
        let inst = lift_instance(t, &mut rng)?;
        let model = build_ip_z(&inst);
        for point in 0..LIFT_POINTS {
            report.cases += 1;
            let (x, y) = sample_point_in_p(&inst, &mut rng, point % 2 == 1)?;
            let tag = format!("instance {t} ({}) point {point}", inst.fingerprint());
            let lifted = match lift_z(&inst, &x, &y) {
                Ok(p) => p,
                Err(e) => {
                    report.failures.push(format!("{tag}: {e}"));
                    continue;
                }
            };
            if let Some(msg) = violations(&model, &lifted.to_assignment())? {
                report.failures.push(format!("{tag}: {msg}"));
            }
            if project(&lifted) != (Projection { x, y }) {
                report.failures.push(format!("{tag}: projection differs from the input"));
            }
        }
    }
    Ok(())
}

/// Up to `count` distinct integer-feasible flow vectors, drawn uniformly
/// from the first few thousand in lexicographic order.
pub fn sample_flows(inst: &Instance, count: usize, rng: &mut InstanceRng) -> Result<Vec<Vec<u64>>> {
    const POOL: usize = 5000;
    let mut pool: Vec<Vec<u64>> = enumerate_feasible(inst, DEFAULT_LIMIT)?
        .filter(|s| s.x.iter().zip(&s.y).all(|(&x, &y)| y == (x > 0)))
        .map(|s| s.x)
        .take(POOL)
        .collect();
    let keep = count.min(pool.len());
    for i in 0..keep {
        let j = i + rng.below((pool.len() - i) as u64) as usize;
        pool.swap(i, j);
    }
    pool.truncate(keep);
    Ok(pool)
}

fn nonzero(pt: &LiftedPoint) -> Vec<(&String, &Rational)> {
    pt.values.iter().filter(|(_, v)| !v.is_zero()).collect()
}

fn pi_chain(report: &mut Report, trials: usize, seed: u64) -> Result<()> {
    let mut rng = InstanceRng::new(seed);
    for t in 0..trials {
        let n = 2 + rng.below(TREE_MAX_NODES - 1) as usize;
        let inst = gen_tree(n, TREE_MAX_CAP, rng.next_u64())?;
        let rt = RootedTree::new(inst.clone(), 1)?;
        let qsn = build_qsn(&rt, false)?;
        let qsn_z = build_qsn(&rt, true)?;
        let qdp = build_qdp(&rt)?;
        let mut encoded = Vec::new();
        for x in sample_flows(&inst, CHAIN_POINTS, &mut rng)? {
            report.cases += 1;
            let tag = format!("tree {t} ({}) x={x:?}", inst.fingerprint());
            let expected = Projection::of_flows(&x);
            let f = encode_f(&rt, &x)?;
            if let Some(msg) = violations(&qsn, &f.to_assignment())? {
                report.failures.push(format!("{tag}: f point: {msg}"));
            }
            if let Some(msg) = violations(&qsn_z, &with_induced_z(&rt, &f))? {
                report.failures.push(format!("{tag}: f point with z: {msg}"));
            }
            match pi_map(&rt, &f) {
                Ok(uv) => {
                    if let Some(msg) = violations(&qdp, &uv.to_assignment())? {
                        report.failures.push(format!("{tag}: mapped point: {msg}"));
                    }
                    if uv.projection != expected || project(&uv) != expected {
                        report.failures.push(format!("{tag}: mapped point projects elsewhere"));
                    }
                }
                Err(e) => report.failures.push(format!("{tag}: {e}")),
            }
            if f.projection != expected || project(&f) != expected {
                report.failures.push(format!("{tag}: f point projects elsewhere"));
            }
            encoded.push(f);
        }
        if encoded.is_empty() {
            continue;
        }
        let half = ratio(1, 2);
        for m in 0..CHAIN_MIDPOINTS {
            report.cases += 1;
            let a = &encoded[rng.below(encoded.len() as u64) as usize];
            let b = &encoded[rng.below(encoded.len() as u64) as usize];
            let mid = convex_combination(a, b, &half);
            let tag = format!("tree {t} ({}) midpoint {m}", inst.fingerprint());
            let (pa, pb, pm) = (pi_map(&rt, a)?, pi_map(&rt, b)?, pi_map(&rt, &mid));
            match pm {
                Ok(pm) => {
                    if nonzero(&pm) != nonzero(&convex_combination(&pa, &pb, &half)) {
                        report.failures.push(format!("{tag}: map is not linear here"));
                    }
                }
                Err(e) => report.failures.push(format!("{tag}: {e}")),
            }
        }
    }
    Ok(())
}

/// Every supplier of a reduced instance sends out exactly its capacity.
pub fn saturates_suppliers(inst: &Instance, groups: usize, x: &[u64]) -> bool {
    (1..=groups as NodeId).all(|s| inst.incident(s).iter().map(|&e| x[e]).sum::<u64>() == inst.capacity(s))
}

fn reduction(report: &mut Report, trials: usize) -> Result<()> {
    for inp in reduction_corpus().into_iter().take(trials) {
        report.cases += 1;
        let tag = format!("{:?} / {}", inp.numbers(), inp.bin());
        let inst = reduce_3partition(&inp)?;
        let yes = check_3partition(&inp)?;
        let optima = optimal_solutions(&inst, REDUCTION_LIMIT)?;
        let hits = optima[0].objective == inp.yes_value();
        if yes != hits {
            report.failures.push(format!(
                "{tag}: partition {yes}, optimum {} vs {}",
                rational::to_text(&optima[0].objective),
                rational::to_text(&inp.yes_value())
            ));
        }
        if let Some(bad) = optima.iter().find(|s| !saturates_suppliers(&inst, inp.groups(), &s.x)) {
            report.failures.push(format!("{tag}: optimum {:?} leaves a supplier short", bad.x));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suites_parse() {
        for s in Suite::ALL {
            assert_eq!(s.tag().parse::<Suite>().unwrap(), s);
        }
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn small_runs_pass() {
        for suite in [Suite::DpOracle, Suite::Certificates, Suite::LiftZ, Suite::PiChain] {
            let r = run_suite(suite, 3, 5).unwrap();
            assert!(r.passed(), "{r}");
            assert!(r.cases >= 3);
        }
        let r = run_suite(Suite::Reduction, 4, 0).unwrap();
        assert!(r.passed(), "{r}");
    }

    #[test]
    fn corpus_is_valid_and_mixed() {
        let corpus = reduction_corpus();
        assert!(corpus.len() >= 20);
        let yes = corpus.iter().filter(|c| check_3partition(c).unwrap()).count();
        assert!(yes > 0 && yes < corpus.len());
    }

    #[test]
    fn trees_are_reproducible() {
        assert_eq!(random_trees(9, 5).unwrap(), random_trees(9, 5).unwrap());
    }
}
