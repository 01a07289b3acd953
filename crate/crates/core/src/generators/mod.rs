//! Random transportation and tree instances, and the 3-Partition reduction.

mod rng;

pub use rng::InstanceRng;

use num_traits::{One, Signed, ToPrimitive};

use crate::error::{Error, Result};
use crate::instance::{Instance, NodeId, Variant};
use crate::rational::{self, int, Rational};

/// Parameters of a random bipartite instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenConfig {
    /// Suppliers, and customers.
    pub n: usize,
    /// Capacities are drawn from `1..=cap`.
    pub cap: u64,
    /// Target ratio of total demand to total supply, in `(0, 1]`.
    pub ratio: Rational,
    pub seed: u64,
    pub cost_lo: i64,
    pub cost_hi: i64,
    pub variable_cost: Rational,
}

impl GenConfig {
    pub fn new(n: usize, cap: u64, ratio: Rational, seed: u64) -> Self {
        GenConfig { n, cap, ratio, seed, cost_lo: 200, cost_hi: 800, variable_cost: Rational::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.cap == 0 {
            return Err(Error::InvalidConfig("n and B must be at least 1".into()));
        }
        if !self.ratio.is_positive() || self.ratio > Rational::one() {
            return Err(Error::InvalidConfig(format!("ratio {} outside (0, 1]", rational::to_text(&self.ratio))));
        }
        if self.cost_lo < 0 || self.cost_lo > self.cost_hi {
            return Err(Error::InvalidConfig(format!("fixed-cost range {}..={}", self.cost_lo, self.cost_hi)));
        }
        if i64::try_from(self.cap).is_err() {
            return Err(Error::Overflow);
        }
        Ok(())
    }
}

fn target(ratio: &Rational, supply: u64) -> u64 {
    rational::ceil(&(ratio * rational::from_u64(supply))).to_u64().expect("target is at most the supply")
}

/// Raises demands (if short) or supplies (if demand is too large) one unit
/// at a time, cycling over the indices in increasing order and skipping
/// values already at `cap`, until `sum d = ceil(r * sum c)`.
pub fn balance(c: &mut [u64], d: &mut [u64], cap: u64, ratio: &Rational) -> Result<()> {
    let mut supply: u64 = c.iter().sum();
    let mut demand: u64 = d.iter().sum();
    let mut goal = target(ratio, supply);
    if demand < goal {
        let mut idle = 0;
        let mut j = 0;
        while demand < goal {
            if d[j] < cap {
                d[j] += 1;
                demand += 1;
                idle = 0;
            } else {
                idle += 1;
                if idle == d.len() {
                    return Err(Error::UnreachableTarget(format!("all demands at {cap}, short of {goal}")));
                }
            }
            j = (j + 1) % d.len();
        }
    } else if demand > goal {
        let mut idle = 0;
        let mut i = 0;
        while demand > goal {
            if c[i] < cap {
                c[i] += 1;
                supply += 1;
                goal = target(ratio, supply);
                idle = 0;
            } else {
                idle += 1;
                if idle == c.len() {
                    return Err(Error::UnreachableTarget(format!(
                        "all supplies at {cap}, demand {demand} above {goal}"
                    )));
                }
            }
            i = (i + 1) % c.len();
        }
    }
    Ok(())
}

/// Draws `c` then `d` uniformly from `1..=B`, balances them, then draws one
/// fixed cost per arc (supplier-major). Customer rows are equalities.
pub fn gen_bipartite(cfg: &GenConfig) -> Result<Instance> {
    cfg.validate()?;
    let mut rng = InstanceRng::new(cfg.seed);
    let hi = cfg.cap as i64;
    let mut c: Vec<u64> = (0..cfg.n).map(|_| rng.uniform(1, hi) as u64).collect();
    let mut d: Vec<u64> = (0..cfg.n).map(|_| rng.uniform(1, hi) as u64).collect();
    balance(&mut c, &mut d, cfg.cap, &cfg.ratio)?;
    let q: Vec<Vec<Rational>> =
        (0..cfg.n).map(|_| (0..cfg.n).map(|_| int(rng.uniform(cfg.cost_lo, cfg.cost_hi))).collect()).collect();
    let p = vec![vec![cfg.variable_cost.clone(); cfg.n]; cfg.n];
    let customers = (cfg.n + 1..=2 * cfg.n).map(|v| v as NodeId);
    let c: Vec<i64> = c.into_iter().map(|v| v as i64).collect();
    let d: Vec<i64> = d.into_iter().map(|v| v as i64).collect();
    Instance::bipartite(&c, &d, &p, &q, Variant::with_equalities(customers))
}

/// Random recursive tree on `n` nodes: node `k` attaches to a uniform
/// earlier node. Then `b ~ U{0..b_max}` per node and `p ~ U{-3..3}`,
/// `q ~ U{0..5}` per arc.
pub fn gen_tree(n: usize, b_max: u64, seed: u64) -> Result<Instance> {
    if n == 0 {
        return Err(Error::InvalidConfig("a tree needs at least one node".into()));
    }
    let b_max = i64::try_from(b_max).map_err(|_| Error::Overflow)?;
    let mut rng = InstanceRng::new(seed);
    let arcs: Vec<(NodeId, NodeId)> = (2..=n as i64).map(|k| (rng.uniform(1, k - 1) as NodeId, k as NodeId)).collect();
    let b: Vec<i64> = (0..n).map(|_| rng.uniform(0, b_max)).collect();
    let mut p = Vec::with_capacity(arcs.len());
    let mut q = Vec::with_capacity(arcs.len());
    for _ in &arcs {
        p.push(int(rng.uniform(-3, 3)));
        q.push(int(rng.uniform(0, 5)));
    }
    Instance::new(b, arcs, p, q, Variant::default())
}

/// `3n` positive integers and a bin size `b`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ThreePartitionInput {
    numbers: Vec<u64>,
    bin: u64,
}

impl ThreePartitionInput {
    /// Requires `3n` numbers summing to `n * b`, each strictly between
    /// `b / 4` and `b / 2`.
    pub fn new(numbers: Vec<u64>, bin: u64) -> Result<Self> {
        let invalid = |msg: String| Err(Error::InvalidThreePartition(msg));
        if numbers.is_empty() || !numbers.len().is_multiple_of(3) {
            return invalid(format!("{} numbers is not a positive multiple of 3", numbers.len()));
        }
        let groups = (numbers.len() / 3) as u128;
        let total: u128 = numbers.iter().map(|&a| a as u128).sum();
        if total != groups * bin as u128 {
            return invalid(format!("sum {total} differs from {groups} * {bin}"));
        }
        if let Some(&a) = numbers.iter().find(|&&a| !(4 * a as u128 > bin as u128 && 2 * (a as u128) < bin as u128)) {
            return invalid(format!("{a} is not strictly between {bin}/4 and {bin}/2"));
        }
        Ok(ThreePartitionInput { numbers, bin })
    }

    pub fn numbers(&self) -> &[u64] {
        &self.numbers
    }

    pub fn bin(&self) -> u64 {
        self.bin
    }

    /// Number of groups.
    pub fn groups(&self) -> usize {
        self.numbers.len() / 3
    }

    /// `-2 n b + 3 n`, the reduced instance's optimum exactly on yes-inputs.
    pub fn yes_value(&self) -> Rational {
        let n = self.groups() as i64;
        int(-2 * n * self.bin as i64 + 3 * n)
    }
}

/// `n` suppliers of capacity `b`, one customer per number, complete
/// bipartite with `p = -2` and `q = 1` everywhere.
pub fn reduce_3partition(inp: &ThreePartitionInput) -> Result<Instance> {
    let n = inp.groups();
    let m = inp.numbers.len();
    let c = vec![inp.bin as i64; n];
    let d: Vec<i64> = inp.numbers.iter().map(|&a| a as i64).collect();
    Instance::bipartite(&c, &d, &vec![vec![int(-2); m]; n], &vec![vec![int(1); m]; n], Variant::default())
}

pub const MAX_EXHAUSTIVE_GROUPS: usize = 4;

/// Exhaustive search for a split into triples of sum `b`.
pub fn check_3partition(inp: &ThreePartitionInput) -> Result<bool> {
    let n = inp.groups();
    if n > MAX_EXHAUSTIVE_GROUPS {
        return Err(Error::TooLarge { n, max: MAX_EXHAUSTIVE_GROUPS });
    }
    let mut sorted = inp.numbers.clone();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    let mut sums = vec![0u64; n];
    let mut sizes = vec![0usize; n];
    Ok(place(&sorted, 0, inp.bin, &mut sums, &mut sizes))
}

fn place(items: &[u64], next: usize, bin: u64, sums: &mut [u64], sizes: &mut [usize]) -> bool {
    if next == items.len() {
        return sums.iter().all(|&s| s == bin) && sizes.iter().all(|&s| s == 3);
    }
    let a = items[next];
    for g in 0..sums.len() {
        if sizes[g] == 3 || sums[g] + a > bin {
            continue;
        }
        // bins that are identical so far are interchangeable
        if (0..g).any(|h| sizes[h] == sizes[g] && sums[h] == sums[g]) {
            continue;
        }
        sums[g] += a;
        sizes[g] += 1;
        let found = place(items, next + 1, bin, sums, sizes);
        sums[g] -= a;
        sizes[g] -= 1;
        if found {
            return true;
        }
    }
    false
}
