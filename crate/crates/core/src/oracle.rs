//! Exhaustive reference solver over integer flow vectors.
//!
//! Flows are enumerated arc by arc in lexicographic order, aborting a branch
//! as soon as a node exceeds its capacity or an equality node is closed
//! with the wrong load. Costs are scaled by the common denominator so that
//! the search runs on integers (`i128` when it fits, big integers
//! otherwise); comparisons stay exact.

use std::ops::Add;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::instance::{Instance, NodeSense, Solution};
use crate::rational;

pub const DEFAULT_LIMIT: u128 = 10_000_000;

/// Product of `(a_e + 1)` over all arcs, saturating.
pub fn search_space(inst: &Instance) -> u128 {
    inst.arcs().iter().fold(1u128, |acc, a| acc.saturating_mul(a.cap as u128 + 1))
}

fn check_budget(inst: &Instance, limit: u128) -> Result<()> {
    let bound = search_space(inst);
    if bound > limit {
        let text = if bound == u128::MAX { "> 3.4e38".to_string() } else { bound.to_string() };
        return Err(Error::BudgetExceeded { bound: text, limit });
    }
    Ok(())
}

/// Iterates every flow vector that respects node capacities (and the load
/// of equality nodes), in lexicographic order.
#[derive(Debug)]
pub struct FlowVectors<'a> {
    inst: &'a Instance,
    x: Vec<u64>,
    load: Vec<u64>,
    /// Arc index after which every arc at a node is fixed.
    closes: Vec<Vec<usize>>,
    depth: usize,
    started: bool,
    done: bool,
}

impl<'a> FlowVectors<'a> {
    pub fn new(inst: &'a Instance) -> Self {
        let m = inst.num_arcs();
        let mut closes = vec![Vec::new(); m];
        for v in inst.nodes() {
            if inst.variant().sense(v) == NodeSense::Eq {
                if let Some(&last) = inst.incident(v).iter().max() {
                    closes[last].push(v as usize);
                }
            }
        }
        FlowVectors {
            inst,
            x: vec![0; m],
            load: vec![0; inst.num_nodes() + 1],
            closes,
            depth: 0,
            started: false,
            done: false,
        }
    }

    /// Equality nodes without arcs can only be met with zero capacity.
    fn isolated_equalities_ok(&self) -> bool {
        self.inst
            .nodes()
            .filter(|&v| self.inst.variant().sense(v) == NodeSense::Eq && self.inst.incident(v).is_empty())
            .all(|v| self.inst.capacity(v) == 0)
    }

    fn fits(&self, e: usize) -> bool {
        let a = self.inst.arc(e);
        let (i, j) = (a.i as usize, a.j as usize);
        self.load[i] <= self.inst.capacities()[i - 1]
            && self.load[j] <= self.inst.capacities()[j - 1]
            && self.closes[e].iter().all(|&v| self.load[v] == self.inst.capacities()[v - 1])
    }

    fn set(&mut self, e: usize, value: u64) {
        let a = self.inst.arc(e);
        let old = self.x[e];
        self.load[a.i as usize] = self.load[a.i as usize] - old + value;
        self.load[a.j as usize] = self.load[a.j as usize] - old + value;
        self.x[e] = value;
    }

    /// Moves arc `e` to its next value; false when exhausted.
    fn bump(&mut self, e: usize) -> bool {
        let cap = self.inst.arc(e).cap;
        while self.x[e] < cap {
            let next = self.x[e] + 1;
            self.set(e, next);
            let a = self.inst.arc(e);
            let over =
                self.load[a.i as usize] > self.inst.capacity(a.i) || self.load[a.j as usize] > self.inst.capacity(a.j);
            if over {
                break;
            }
            if self.fits(e) {
                return true;
            }
        }
        self.set(e, 0);
        false
    }

    /// Fills arcs from `self.depth` with the smallest fitting values,
    /// backtracking as needed. Returns false when the space is exhausted.
    fn descend(&mut self) -> bool {
        let m = self.x.len();
        loop {
            if self.depth == m {
                return true;
            }
            let e = self.depth;
            // x[e] is 0 here
            if self.fits(e) || self.bump(e) {
                self.depth += 1;
                continue;
            }
            if !self.backtrack() {
                return false;
            }
        }
    }

    /// Advances the deepest arc that still has room, resetting the ones
    /// after it. Leaves `depth` just past the advanced arc.
    fn backtrack(&mut self) -> bool {
        while self.depth > 0 {
            let e = self.depth - 1;
            if self.bump(e) {
                return true;
            }
            self.depth -= 1;
        }
        false
    }
}

impl Iterator for FlowVectors<'_> {
    type Item = Vec<u64>;

    fn next(&mut self) -> Option<Vec<u64>> {
        if self.done {
            return None;
        }
        let found = if !self.started {
            self.started = true;
            self.isolated_equalities_ok() && self.descend()
        } else {
            self.backtrack() && self.descend()
        };
        if found {
            Some(self.x.clone())
        } else {
            self.done = true;
            None
        }
    }
}

/// Integer costs `c_e(l) * L` for a common denominator `L`.
struct ScaledCosts<T> {
    table: Vec<Vec<T>>,
}

trait Acc: Clone + Ord + Zero + for<'b> Add<&'b Self, Output = Self> {}
impl<T: Clone + Ord + Zero + for<'b> Add<&'b T, Output = T>> Acc for T {}

fn scaled_big(inst: &Instance) -> ScaledCosts<BigInt> {
    let scale = rational::denominator_lcm(inst.arcs().iter().flat_map(|a| [&a.p, &a.q]));
    let scale = rational::Rational::from_integer(scale);
    let table = inst
        .arcs()
        .iter()
        .enumerate()
        .map(|(e, a)| (0..=a.cap).map(|l| (inst.arc_cost(e, l) * &scale).to_integer()).collect())
        .collect();
    ScaledCosts { table }
}

/// Narrows to `i128` when the largest possible total fits comfortably.
fn narrow(big: &ScaledCosts<BigInt>) -> Option<ScaledCosts<i128>> {
    let mut total: i128 = 0;
    let mut table = Vec::with_capacity(big.table.len());
    for row in &big.table {
        let row: Vec<i128> = row.iter().map(|c| c.to_i128()).collect::<Option<_>>()?;
        let worst = row.iter().map(|c| c.checked_abs()).max().flatten().unwrap_or(0);
        total = total.checked_add(worst)?;
        table.push(row);
    }
    Some(ScaledCosts { table })
}

fn cost_of<T: Acc>(costs: &ScaledCosts<T>, x: &[u64]) -> T {
    x.iter().zip(&costs.table).fold(T::zero(), |acc, (&l, row)| acc + &row[l as usize])
}

fn best_flows<T: Acc>(inst: &Instance, costs: &ScaledCosts<T>, keep_all: bool) -> (Vec<Vec<u64>>, bool) {
    let mut best: Option<T> = None;
    let mut winners: Vec<Vec<u64>> = Vec::new();
    for x in FlowVectors::new(inst) {
        let c = cost_of(costs, &x);
        match best.as_ref().map(|b| c.cmp(b)) {
            None | Some(std::cmp::Ordering::Less) => {
                best = Some(c);
                winners.clear();
                winners.push(x);
            }
            Some(std::cmp::Ordering::Equal) if keep_all => winners.push(x),
            _ => {}
        }
    }
    let found = best.is_some();
    (winners, found)
}

fn optimal_flow_vectors(inst: &Instance, limit: u128, keep_all: bool) -> Result<Vec<Vec<u64>>> {
    check_budget(inst, limit)?;
    let big = scaled_big(inst);
    let (winners, found) = match narrow(&big) {
        Some(small) => BoundedSearch::new(inst, &small.table).run(keep_all),
        None => best_flows(inst, &big, keep_all),
    };
    if !found {
        return Err(Error::InfeasibleFlow("no integer flow satisfies the node rows".into()));
    }
    Ok(winners)
}

/// `num / den` with `den > 0`.
#[derive(Clone, Copy, Debug)]
struct Slope {
    num: i128,
    den: i128,
}

impl Slope {
    fn below(self, other: Slope) -> bool {
        self.num * other.den < other.num * self.den
    }
}

/// Depth-first search in the same lexicographic order as [`FlowVectors`],
/// cutting a branch only when a lower bound on its cost is strictly worse
/// than the incumbent (or no better, when only the first optimum is kept).
///
/// Two bounds are used and the larger wins. Per arc, the cheapest level
/// over its whole range. Per node, with `s_e = min_{l >= 1} c_e(l) / l` we
/// have `c_e(l) >= s_e * l`; charging every open arc to one endpoint `v`
/// (the smaller id, or the larger one) gives
/// `sum_e c_e(x_e) >= sum_v min(0, min_{e at v} s_e) * residual_v`.
struct BoundedSearch<'a> {
    inst: &'a Instance,
    costs: &'a [Vec<i128>],
    x: Vec<u64>,
    load: Vec<u64>,
    closes: Vec<Vec<usize>>,
    /// `suffix[e]`: sum over arcs `e..` of their cheapest level.
    suffix: Vec<i128>,
    /// `slopes[side][e][v]`: smallest nonpositive slope among arcs `e..`
    /// charged to `v` when charging by `side`.
    slopes: [Vec<Vec<Option<Slope>>>; 2],
    best: Option<i128>,
    winners: Vec<Vec<u64>>,
    keep_all: bool,
}

impl<'a> BoundedSearch<'a> {
    fn new(inst: &'a Instance, costs: &'a [Vec<i128>]) -> Self {
        let m = inst.num_arcs();
        let n = inst.num_nodes();
        let closes = FlowVectors::new(inst).closes;
        let mut suffix = vec![0i128; m + 1];
        for e in (0..m).rev() {
            suffix[e] = suffix[e + 1] + costs[e].iter().copied().min().unwrap_or(0).min(0);
        }
        let slope_of = |e: usize| {
            (1..costs[e].len())
                .map(|l| Slope { num: costs[e][l], den: l as i128 })
                .reduce(|a, b| if b.below(a) { b } else { a })
                .filter(|s| s.num < 0)
        };
        let arc_slopes: Vec<Option<Slope>> = (0..m).map(slope_of).collect();
        let mut slopes = [vec![vec![None; n + 1]; m + 1], vec![vec![None; n + 1]; m + 1]];
        for (side, table) in slopes.iter_mut().enumerate() {
            for e in (0..m).rev() {
                table[e] = table[e + 1].clone();
                let a = inst.arc(e);
                let owner = if side == 0 { a.i } else { a.j } as usize;
                if let Some(s) = arc_slopes[e] {
                    let cell = &mut table[e][owner];
                    if cell.is_none_or(|c: Slope| s.below(c)) {
                        *cell = Some(s);
                    }
                }
            }
        }
        BoundedSearch {
            inst,
            costs,
            x: vec![0; m],
            load: vec![0; n + 1],
            closes,
            suffix,
            slopes,
            best: None,
            winners: Vec::new(),
            keep_all: false,
        }
    }

    fn lower_bound(&self, e: usize) -> i128 {
        let caps = self.inst.capacities();
        let by_node = |table: &Vec<Vec<Option<Slope>>>| -> i128 {
            table[e]
                .iter()
                .enumerate()
                .filter_map(|(v, s)| s.map(|s| (v, s)))
                .map(|(v, s)| (s.num * (caps[v - 1] - self.load[v]) as i128).div_euclid(s.den))
                .sum()
        };
        self.suffix[e].max(by_node(&self.slopes[0])).max(by_node(&self.slopes[1]))
    }

    fn run(mut self, keep_all: bool) -> (Vec<Vec<u64>>, bool) {
        self.keep_all = keep_all;
        let ok = FlowVectors::new(self.inst).isolated_equalities_ok();
        if ok {
            self.go(0, 0);
        }
        let found = self.best.is_some();
        (self.winners, found)
    }

    fn go(&mut self, e: usize, partial: i128) {
        if e == self.x.len() {
            match self.best {
                Some(b) if partial > b => {}
                Some(b) if partial == b => {
                    if self.keep_all {
                        self.winners.push(self.x.clone());
                    }
                }
                _ => {
                    self.best = Some(partial);
                    self.winners.clear();
                    self.winners.push(self.x.clone());
                }
            }
            return;
        }
        if let Some(b) = self.best {
            let lb = partial + self.lower_bound(e);
            if lb > b || (!self.keep_all && lb == b) {
                return;
            }
        }
        let a = self.inst.arc(e);
        let (i, j) = (a.i as usize, a.j as usize);
        let caps = self.inst.capacities();
        for l in 0..=a.cap {
            if self.load[i] + l > caps[i - 1] || self.load[j] + l > caps[j - 1] {
                break;
            }
            self.load[i] += l;
            self.load[j] += l;
            self.x[e] = l;
            if self.closes[e].iter().all(|&v| self.load[v] == caps[v - 1]) {
                self.go(e + 1, partial + self.costs[e][l as usize]);
            }
            self.load[i] -= l;
            self.load[j] -= l;
        }
        self.x[e] = 0;
    }
}

/// Exact optimum by enumeration; the lexicographically smallest optimal
/// flow vector wins.
///
/// With `q >= 0` the indicator is set exactly on arcs with positive flow;
/// for the lower-link variant this is the only feasible choice anyway.
pub fn brute_force_solve(inst: &Instance, limit: u128) -> Result<Solution> {
    let mut winners = optimal_flow_vectors(inst, limit, false)?;
    Ok(Solution::from_flows(inst, winners.swap_remove(0)))
}

/// Every optimal flow vector, each with its minimal indicator, in
/// lexicographic order.
pub fn optimal_solutions(inst: &Instance, limit: u128) -> Result<Vec<Solution>> {
    Ok(optimal_flow_vectors(inst, limit, true)?.into_iter().map(|x| Solution::from_flows(inst, x)).collect())
}

/// Every feasible `(x, y)`: flows in lexicographic order, and for each flow
/// the indicator patterns in binary counting order over the zero-flow arcs
/// (those are pinned to 0 under the lower link).
pub fn enumerate_feasible(inst: &Instance, limit: u128) -> Result<impl Iterator<Item = Solution> + '_> {
    check_budget(inst, limit)?;
    let link_lower = inst.variant().link_lower;
    Ok(FlowVectors::new(inst).flat_map(move |x| {
        let free: Vec<usize> = if link_lower { Vec::new() } else { (0..x.len()).filter(|&e| x[e] == 0).collect() };
        let patterns = 1u64 << free.len().min(63);
        (0..patterns).map(move |mask| {
            let mut y: Vec<bool> = x.iter().map(|&v| v > 0).collect();
            // most significant bit on the first free arc
            for (bit, &e) in free.iter().rev().enumerate() {
                y[e] = mask >> bit & 1 == 1;
            }
            Solution::new(inst, x.clone(), y)
        })
    }))
}
