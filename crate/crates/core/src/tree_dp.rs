//! Pseudo-polynomial dynamic program on rooted trees.
//!
//! For an arc `(i, j)` with `j` below `i`, `beta[e][l]` is the best cost of
//! the subtree hanging from `i` through `j` when `x_ij = l`. For a node `i`
//! and the child at position `t`, `alpha[i][t][k]` is the best cost of the
//! subtrees of `i`'s first `t + 1` children when they draw `k` units from
//! `i` in total. The root value is the minimum of the last `alpha` row of
//! the root.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::formulations::{names, Assignment};
use crate::instance::{validate_solution, NodeId, RootedTree, Solution};
use crate::rational::Rational;

pub use crate::instance::arc_cost;

/// A table entry: a finite cost, or the sentinel of an unreachable state.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum DpValue {
    Finite(Rational),
    Infinite,
}

impl DpValue {
    pub fn finite(&self) -> Option<&Rational> {
        match self {
            DpValue::Finite(v) => Some(v),
            DpValue::Infinite => None,
        }
    }

    /// Sum with a finite term; the sentinel absorbs.
    pub fn plus(&self, rhs: &Rational) -> DpValue {
        match self {
            DpValue::Finite(v) => DpValue::Finite(v + rhs),
            DpValue::Infinite => DpValue::Infinite,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DpTables {
    /// `beta[e][l]`, `l = 0..=a_e`.
    pub beta: Vec<Vec<Rational>>,
    /// `back_beta[e][l]`: load `k` below the child achieving `beta[e][l]`
    /// (`None` when the child is a leaf).
    pub back_beta: Vec<Vec<Option<u64>>>,
    /// `alpha[i][t][k]`, `k = 0..=b_i`, indexed by node id.
    pub alpha: Vec<Vec<Vec<DpValue>>>,
    /// `back_alpha[i][t][k]`: load `k'` on the first `t` children
    /// (`None` at position 0 or in unreachable cells).
    pub back_alpha: Vec<Vec<Vec<Option<u64>>>>,
    pub root_value: Rational,
    /// Load on the root's children in the selected optimum.
    pub root_load: u64,
}

impl DpTables {
    pub fn alpha_cells(&self) -> usize {
        self.alpha.iter().flatten().map(Vec::len).sum()
    }

    pub fn beta_cells(&self) -> usize {
        self.beta.iter().map(Vec::len).sum()
    }
}

/// `sum_i |children(i)| * (b_i + 1)`.
pub fn expected_alpha_cells(rt: &RootedTree) -> usize {
    rt.bfs_order().iter().map(|&v| rt.children(v).len() * (rt.cap(v) as usize + 1)).sum()
}

/// `sum_(i,j) (a_ij + 1)`.
pub fn expected_beta_cells(rt: &RootedTree) -> usize {
    rt.instance().arcs().iter().map(|a| a.cap as usize + 1).sum()
}

/// Fills the tables leaves-first and recovers an optimal solution.
///
/// Ties go to the smallest split `k'` in `alpha` and the smallest child
/// load `k` in `beta` and at the root.
pub fn solve_tree(rt: &RootedTree) -> Result<(DpTables, Solution)> {
    let inst = rt.instance();
    if !inst.variant().is_default() {
        return Err(Error::UnsupportedVariant("the tree recursion covers only <= rows without a lower link".into()));
    }
    let n = inst.num_nodes();
    let m = inst.num_arcs();
    let mut beta: Vec<Vec<Rational>> = vec![Vec::new(); m];
    let mut back_beta: Vec<Vec<Option<u64>>> = vec![Vec::new(); m];
    let mut alpha: Vec<Vec<Vec<DpValue>>> = vec![Vec::new(); n + 1];
    let mut back_alpha: Vec<Vec<Vec<Option<u64>>>> = vec![Vec::new(); n + 1];

    for &v in rt.bfs_order().iter().rev() {
        let cap = rt.cap(v);
        let mut rows: Vec<Vec<DpValue>> = Vec::with_capacity(rt.children(v).len());
        let mut backs: Vec<Vec<Option<u64>>> = Vec::with_capacity(rt.children(v).len());
        for (pos, &child) in rt.children(v).iter().enumerate() {
            let e = rt.arc_of(v, child).expect("child arc");
            let a = inst.arc(e).cap;
            let mut row = Vec::with_capacity(cap as usize + 1);
            let mut back = Vec::with_capacity(cap as usize + 1);
            for k in 0..=cap {
                if pos == 0 {
                    row.push(if k <= a { DpValue::Finite(beta[e][k as usize].clone()) } else { DpValue::Infinite });
                    back.push(None);
                    continue;
                }
                let prev = &rows[pos - 1];
                let mut best = DpValue::Infinite;
                let mut arg = None;
                for kp in k.saturating_sub(a)..=k {
                    let cand = prev[kp as usize].plus(&beta[e][(k - kp) as usize]);
                    if cand < best {
                        best = cand;
                        arg = Some(kp);
                    }
                }
                row.push(best);
                back.push(arg);
            }
            rows.push(row);
            backs.push(back);
        }

        if let Some(e) = rt.parent_arc(v) {
            let arc = inst.arc(e);
            assert!(arc.cap <= cap, "arc capacity exceeds the child's capacity");
            let mut values = Vec::with_capacity(arc.cap as usize + 1);
            let mut back = Vec::with_capacity(arc.cap as usize + 1);
            for l in 0..=arc.cap {
                let c = arc_cost(l, &arc.p, &arc.q);
                match rows.last() {
                    None => {
                        values.push(c);
                        back.push(None);
                    }
                    Some(last) => {
                        // k = 0 is always reachable, so the minimum is finite.
                        let (k, best) = argmin(&last[..=(cap - l) as usize]).expect("zero load is reachable");
                        values.push(best + c);
                        back.push(Some(k));
                    }
                }
            }
            beta[e] = values;
            back_beta[e] = back;
        }
        alpha[v as usize] = rows;
        back_alpha[v as usize] = backs;
    }

    let root = rt.root();
    let (root_load, root_value) = match alpha[root as usize].last() {
        None => (0, Rational::zero()),
        Some(last) => argmin(last).expect("zero load is reachable"),
    };
    let tables = DpTables { beta, back_beta, alpha, back_alpha, root_value, root_load };
    let sol = recover_solution(&tables, rt)?;
    Ok((tables, sol))
}

/// First index holding the smallest finite value.
fn argmin(cells: &[DpValue]) -> Option<(u64, Rational)> {
    let mut best: Option<(u64, &Rational)> = None;
    for (k, cell) in cells.iter().enumerate() {
        if let Some(v) = cell.finite() {
            if best.is_none_or(|(_, b)| v < b) {
                best = Some((k as u64, v));
            }
        }
    }
    best.map(|(k, v)| (k, v.clone()))
}

/// Follows the back-pointers from the root's selected load.
pub fn recover_solution(tables: &DpTables, rt: &RootedTree) -> Result<Solution> {
    let inst = rt.instance();
    let corrupt = |msg: String| Error::CorruptTables(msg);
    if tables.alpha.len() != inst.num_nodes() + 1 || tables.beta.len() != inst.num_arcs() {
        return Err(corrupt("table dimensions do not match the tree".into()));
    }
    let mut x = vec![0u64; inst.num_arcs()];
    let mut stack: Vec<(NodeId, u64)> = vec![(rt.root(), tables.root_load)];
    while let Some((v, load)) = stack.pop() {
        let kids = rt.children(v);
        if kids.is_empty() {
            if load != 0 {
                return Err(corrupt(format!("leaf {v} asked to carry {load}")));
            }
            continue;
        }
        let rows = &tables.alpha[v as usize];
        if rows.len() != kids.len() {
            return Err(corrupt(format!("node {v} has {} alpha rows for {} children", rows.len(), kids.len())));
        }
        let mut k = load;
        for pos in (0..kids.len()).rev() {
            let cell =
                rows[pos].get(k as usize).ok_or_else(|| corrupt(format!("alpha[{v}][{pos}] has no load {k}")))?;
            if cell.finite().is_none() {
                return Err(corrupt(format!("alpha[{v}][{pos}][{k}] is unreachable")));
            }
            let e = rt.arc_of(v, kids[pos]).expect("child arc");
            let flow = if pos == 0 {
                k
            } else {
                let kp = tables.back_alpha[v as usize][pos][k as usize]
                    .filter(|&kp| kp <= k)
                    .ok_or_else(|| corrupt(format!("missing split at alpha[{v}][{pos}][{k}]")))?;
                let flow = k - kp;
                k = kp;
                flow
            };
            if flow > inst.arc(e).cap {
                return Err(corrupt(format!("flow {flow} exceeds capacity of arc {e}")));
            }
            x[e] = flow;
            let child = kids[pos];
            let below = if rt.is_leaf(child) {
                0
            } else {
                tables.back_beta[e]
                    .get(flow as usize)
                    .copied()
                    .flatten()
                    .ok_or_else(|| corrupt(format!("missing child load at beta[{e}][{flow}]")))?
            };
            stack.push((child, below));
        }
    }
    let sol = Solution::from_flows(inst, x);
    if sol.objective != tables.root_value {
        return Err(corrupt("recovered objective differs from the root value".into()));
    }
    if let Some(v) = validate_solution(inst, &sol).first() {
        return Err(corrupt(format!("recovered solution violates {v}")));
    }
    Ok(sol)
}

/// An integral point of the dual polyhedron of the recursion.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DpCertificate {
    /// `(i, j, k', k)`, parent `i`, child `j`.
    pub u: BTreeMap<(NodeId, NodeId, u64, u64), Rational>,
    /// `(i, j, l, k)`, including the root's `(0, r, 0, k)`.
    pub v: BTreeMap<(NodeId, NodeId, u64, u64), Rational>,
    pub objective: Rational,
}

impl DpCertificate {
    pub fn to_assignment(&self) -> Assignment {
        let mut pt = Assignment::new(true);
        for (&(i, j, kp, k), val) in &self.u {
            pt.set(names::u(i, j, kp, k), val.clone());
        }
        for (&(i, j, l, k), val) in &self.v {
            pt.set(names::v(i, j, l, k), val.clone());
        }
        pt
    }
}

/// Load each node passes to its children under `x`.
pub(crate) fn child_loads(rt: &RootedTree, x: &[u64]) -> Vec<u64> {
    let mut loads = vec![0u64; rt.instance().num_nodes() + 1];
    for (e, &flow) in x.iter().enumerate() {
        let (parent, _) = rt.orient(e);
        loads[parent as usize] += flow;
    }
    loads
}

pub(crate) fn check_flow(rt: &RootedTree, x: &[u64]) -> Result<()> {
    let inst = rt.instance();
    let sol = Solution::from_flows(inst, x.to_vec());
    match validate_solution(inst, &sol).first() {
        Some(v) => Err(Error::InfeasibleFlow(v.to_string())),
        None => Ok(()),
    }
}

/// Encodes integer flows as 0/1 values of `(u, v)`: node `i` walks through
/// the prefix sums of its children's flows, and each arc records its flow
/// together with the load below the child.
pub fn encode_uv(rt: &RootedTree, x: &[u64]) -> Result<DpCertificate> {
    check_flow(rt, x)?;
    let inst = rt.instance();
    let loads = child_loads(rt, x);
    let mut u = BTreeMap::new();
    let mut v = BTreeMap::new();
    v.insert((0, rt.root(), 0, loads[rt.root() as usize]), Rational::one());
    let mut objective = Rational::zero();
    for &i in rt.bfs_order() {
        let mut prefix = 0u64;
        for &j in rt.children(i) {
            let e = rt.arc_of(i, j).expect("child arc");
            let flow = x[e];
            u.insert((i, j, prefix, prefix + flow), Rational::one());
            prefix += flow;
            v.insert((i, j, flow, loads[j as usize]), Rational::one());
            objective += inst.arc_cost(e, flow);
        }
    }
    Ok(DpCertificate { u, v, objective })
}
