//! Instances, solutions, rooted-tree views and exact feasibility checks.
//!
//! An [`Instance`] is an undirected graph with integer node capacities `b`,
//! arc capacities `a_ij = min(b_i, b_j)`, exact per-unit costs `p` and
//! nonnegative fixed costs `q`. The [`Variant`] selects between the general
//! graph model (all node rows `<=`, no lower link) and the bipartite
//! transportation variants with equality rows or the `y <= x` link.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;

use num_traits::{Signed, Zero};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::rational::{self, Rational};

/// External node identifier; nodes are numbered `1..=|V|` and `0` is the
/// parent sentinel of the root.
pub type NodeId = u32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NodeSense {
    Le,
    Eq,
}

/// Which flavour of the model an instance follows.
///
/// Only `EQ` entries are stored; every other node is `LE`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Variant {
    node_sense: BTreeMap<NodeId, NodeSense>,
    pub link_lower: bool,
}

impl Variant {
    pub fn new(node_sense: impl IntoIterator<Item = (NodeId, NodeSense)>, link_lower: bool) -> Self {
        let node_sense = node_sense.into_iter().filter(|(_, s)| *s == NodeSense::Eq).collect();
        Variant { node_sense, link_lower }
    }

    pub fn with_equalities(nodes: impl IntoIterator<Item = NodeId>) -> Self {
        Variant::new(nodes.into_iter().map(|v| (v, NodeSense::Eq)), false)
    }

    pub fn sense(&self, node: NodeId) -> NodeSense {
        self.node_sense.get(&node).copied().unwrap_or(NodeSense::Le)
    }

    pub fn equality_nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.node_sense.keys().copied()
    }

    /// All rows `<=` and no lower link: the general-graph model.
    pub fn is_default(&self) -> bool {
        self.node_sense.is_empty() && !self.link_lower
    }

    /// Same variant with every node row relaxed to `<=`.
    pub fn relaxed(&self) -> Self {
        Variant { node_sense: BTreeMap::new(), link_lower: self.link_lower }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Arc {
    /// Smaller endpoint.
    pub i: NodeId,
    /// Larger endpoint.
    pub j: NodeId,
    pub p: Rational,
    pub q: Rational,
    /// `min(b_i, b_j)`.
    pub cap: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    b: Vec<u64>,
    arcs: Vec<Arc>,
    variant: Variant,
    incidence: Vec<Vec<usize>>,
    lookup: HashMap<(NodeId, NodeId), usize>,
}

impl Instance {
    /// Validates and builds an instance. Arcs are stored as `(min, max)`.
    pub fn new(
        b: Vec<i64>,
        arcs: Vec<(NodeId, NodeId)>,
        p: Vec<Rational>,
        q: Vec<Rational>,
        variant: Variant,
    ) -> Result<Self> {
        if arcs.len() != p.len() || arcs.len() != q.len() {
            return Err(Error::LengthMismatch(format!(
                "{} arcs, {} unit costs, {} fixed costs",
                arcs.len(),
                p.len(),
                q.len()
            )));
        }
        let caps = b
            .iter()
            .enumerate()
            .map(|(idx, &v)| {
                u64::try_from(v)
                    .map_err(|_| Error::NonIntegerCapacity { node: idx as NodeId + 1, value: v.to_string() })
            })
            .collect::<Result<Vec<u64>>>()?;
        let n = caps.len();
        if let Some(&bad) = variant.node_sense.keys().find(|&&v| v == 0 || v as usize > n) {
            return Err(Error::UnknownNode { i: bad, j: bad, n });
        }

        let mut lookup = HashMap::with_capacity(arcs.len());
        let mut incidence = vec![Vec::new(); n + 1];
        let mut stored = Vec::with_capacity(arcs.len());
        for (idx, ((u, v), (p, q))) in arcs.into_iter().zip(p.into_iter().zip(q)).enumerate() {
            let (i, j) = if u <= v { (u, v) } else { (v, u) };
            if i == j {
                return Err(Error::SelfLoop(i));
            }
            if i == 0 || j as usize > n {
                return Err(Error::UnknownNode { i, j, n });
            }
            if q.is_negative() {
                return Err(Error::NegativeFixedCost { i, j, q: rational::to_text(&q) });
            }
            if lookup.insert((i, j), idx).is_some() {
                return Err(Error::DuplicateArc { i, j });
            }
            incidence[i as usize].push(idx);
            incidence[j as usize].push(idx);
            let cap = caps[i as usize - 1].min(caps[j as usize - 1]);
            stored.push(Arc { i, j, p, q, cap });
        }
        Ok(Instance { b: caps, arcs: stored, variant, incidence, lookup })
    }

    /// Complete bipartite instance: suppliers are nodes `1..=n` with
    /// capacities `c`, customers are `n+1..=n+m` with capacities `d`.
    /// Arcs are listed supplier-major.
    pub fn bipartite(c: &[i64], d: &[i64], p: &[Vec<Rational>], q: &[Vec<Rational>], variant: Variant) -> Result<Self> {
        let (n, m) = (c.len(), d.len());
        if n == 0 || m == 0 {
            return Err(Error::LengthMismatch("bipartite instance needs n, m >= 1".into()));
        }
        let shape_ok = |rows: &[Vec<Rational>]| rows.len() == n && rows.iter().all(|r| r.len() == m);
        if !shape_ok(p) || !shape_ok(q) {
            return Err(Error::LengthMismatch(format!("cost matrices must be {n}x{m}")));
        }
        let mut arcs = Vec::with_capacity(n * m);
        let mut pv = Vec::with_capacity(n * m);
        let mut qv = Vec::with_capacity(n * m);
        for s in 0..n {
            for t in 0..m {
                arcs.push((s as NodeId + 1, (n + t) as NodeId + 1));
                pv.push(p[s][t].clone());
                qv.push(q[s][t].clone());
            }
        }
        let b = c.iter().chain(d).copied().collect();
        Instance::new(b, arcs, pv, qv, variant)
    }

    pub fn num_nodes(&self) -> usize {
        self.b.len()
    }

    pub fn num_arcs(&self) -> usize {
        self.arcs.len()
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> {
        1..=self.b.len() as NodeId
    }

    pub fn capacity(&self, node: NodeId) -> u64 {
        self.b[node as usize - 1]
    }

    pub fn capacities(&self) -> &[u64] {
        &self.b
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn arc(&self, idx: usize) -> &Arc {
        &self.arcs[idx]
    }

    pub fn variant(&self) -> &Variant {
        &self.variant
    }

    /// Arc indices incident to `node`, in arc order.
    pub fn incident(&self, node: NodeId) -> &[usize] {
        &self.incidence[node as usize]
    }

    /// Index of the arc joining `u` and `v` in either orientation.
    pub fn find_arc(&self, u: NodeId, v: NodeId) -> Option<usize> {
        self.lookup.get(&(u.min(v), u.max(v))).copied()
    }

    /// Same graph and costs under a different variant.
    pub fn with_variant(&self, variant: Variant) -> Result<Self> {
        let b = self.b.iter().map(|&v| v as i64).collect();
        let arcs = self.arcs.iter().map(|a| (a.i, a.j)).collect();
        let p = self.arcs.iter().map(|a| a.p.clone()).collect();
        let q = self.arcs.iter().map(|a| a.q.clone()).collect();
        Instance::new(b, arcs, p, q, variant)
    }

    /// Cost of sending `l` units on arc `idx` with the indicator at its
    /// minimal value.
    pub fn arc_cost(&self, idx: usize, l: u64) -> Rational {
        let a = &self.arcs[idx];
        arc_cost(l, &a.p, &a.q)
    }

    /// Line-oriented canonical rendering, the input of [`Self::fingerprint`].
    pub fn canonical_text(&self) -> String {
        let mut out = String::new();
        let b: Vec<String> = self.b.iter().map(u64::to_string).collect();
        out.push_str(&format!("b {}\n", b.join(" ")));
        for a in &self.arcs {
            out.push_str(&format!("arc {} {} {} {}\n", a.i, a.j, rational::to_text(&a.p), rational::to_text(&a.q)));
        }
        let eq: Vec<String> = self.variant.equality_nodes().map(|v| v.to_string()).collect();
        out.push_str(&format!("eq {}\nlink_lower {}\n", eq.join(" "), self.variant.link_lower));
        out
    }

    /// First 16 hex digits of the SHA-256 of [`Self::canonical_text`].
    pub fn fingerprint(&self) -> String {
        let digest = Sha256::digest(self.canonical_text().as_bytes());
        digest.iter().take(8).map(|byte| format!("{byte:02x}")).collect()
    }
}

/// Cost of `l` units on an arc: `0` for `l = 0`, else `l*p + q`.
pub fn arc_cost(l: u64, p: &Rational, q: &Rational) -> Rational {
    if l == 0 {
        Rational::zero()
    } else {
        rational::from_u64(l) * p + q
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Solution {
    pub x: Vec<u64>,
    pub y: Vec<bool>,
    pub objective: Rational,
}

impl Solution {
    pub fn new(inst: &Instance, x: Vec<u64>, y: Vec<bool>) -> Self {
        let objective = objective_of(inst, &x, &y);
        Solution { x, y, objective }
    }

    /// Flows with the indicator set exactly where flow is positive.
    pub fn from_flows(inst: &Instance, x: Vec<u64>) -> Self {
        let y = x.iter().map(|&v| v > 0).collect();
        Solution::new(inst, x, y)
    }
}

fn objective_of(inst: &Instance, x: &[u64], y: &[bool]) -> Rational {
    inst.arcs.iter().zip(x.iter().zip(y)).fold(Rational::zero(), |acc, (a, (&xv, &yv))| {
        let mut acc = acc + rational::from_u64(xv) * &a.p;
        if yv {
            acc += &a.q;
        }
        acc
    })
}

/// A violated row: its name, evaluated left-hand side and bound.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub constraint: String,
    pub lhs: Rational,
    pub bound: Rational,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: lhs {} vs bound {}",
            self.constraint,
            rational::to_text(&self.lhs),
            rational::to_text(&self.bound)
        )
    }
}

/// Lists every violated row of the instance's variant. Empty iff feasible.
pub fn validate_solution(inst: &Instance, sol: &Solution) -> Vec<Violation> {
    let mut out = Vec::new();
    let m = inst.num_arcs();
    if sol.x.len() != m || sol.y.len() != m {
        out.push(Violation {
            constraint: "dimension".into(),
            lhs: rational::from_u64(sol.x.len().min(sol.y.len()) as u64),
            bound: rational::from_u64(m as u64),
        });
        return out;
    }
    for v in inst.nodes() {
        let load: u128 = inst.incident(v).iter().map(|&e| sol.x[e] as u128).sum();
        let cap = inst.capacity(v) as u128;
        let bad = match inst.variant.sense(v) {
            NodeSense::Le => load > cap,
            NodeSense::Eq => load != cap,
        };
        if bad {
            out.push(Violation {
                constraint: format!("ipg_cap_{v}"),
                lhs: Rational::from_integer(load.into()),
                bound: Rational::from_integer(cap.into()),
            });
        }
    }
    for (e, a) in inst.arcs.iter().enumerate() {
        let ub = if sol.y[e] { a.cap } else { 0 };
        if sol.x[e] > ub {
            out.push(Violation {
                constraint: format!("ipg_ub_{}_{}", a.i, a.j),
                lhs: rational::from_u64(sol.x[e]),
                bound: rational::from_u64(ub),
            });
        }
        if inst.variant.link_lower && sol.y[e] && sol.x[e] < 1 {
            out.push(Violation {
                constraint: format!("ipg_lb_{}_{}", a.i, a.j),
                lhs: rational::int(1),
                bound: rational::from_u64(sol.x[e]),
            });
        }
    }
    let expected = objective_of(inst, &sol.x, &sol.y);
    if expected != sol.objective {
        out.push(Violation { constraint: "objective".into(), lhs: sol.objective.clone(), bound: expected });
    }
    out
}

/// A tree instance viewed from a root, with children in breadth-first
/// order so that siblings are consecutive.
#[derive(Clone, Debug)]
pub struct RootedTree {
    instance: Instance,
    root: NodeId,
    parent: Vec<NodeId>,
    children: Vec<Vec<NodeId>>,
    parent_arc: Vec<Option<usize>>,
    order: Vec<NodeId>,
    label: Vec<u32>,
}

impl RootedTree {
    /// Roots `instance` at `root`; fails unless the graph is a tree.
    pub fn new(instance: Instance, root: NodeId) -> Result<Self> {
        let n = instance.num_nodes();
        if root == 0 || root as usize > n {
            return Err(Error::NotATree(format!("root {root} is not a node of a {n}-node graph")));
        }
        if instance.num_arcs() + 1 != n {
            return Err(Error::NotATree(format!("{} arcs on {} nodes", instance.num_arcs(), n)));
        }
        let mut parent = vec![0; n + 1];
        let mut parent_arc = vec![None; n + 1];
        let mut children = vec![Vec::new(); n + 1];
        let mut seen = vec![false; n + 1];
        let mut order = Vec::with_capacity(n);
        let mut queue = VecDeque::from([root]);
        seen[root as usize] = true;
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut next: Vec<(NodeId, usize)> = instance
                .incident(v)
                .iter()
                .map(|&e| {
                    let a = instance.arc(e);
                    (if a.i == v { a.j } else { a.i }, e)
                })
                .filter(|(w, _)| !seen[*w as usize])
                .collect();
            next.sort_unstable();
            for (w, e) in next {
                seen[w as usize] = true;
                parent[w as usize] = v;
                parent_arc[w as usize] = Some(e);
                children[v as usize].push(w);
                queue.push_back(w);
            }
        }
        if order.len() != n {
            return Err(Error::NotATree(format!("only {} of {} nodes reachable from {root}", order.len(), n)));
        }
        let mut label = vec![0; n + 1];
        for (pos, &v) in order.iter().enumerate() {
            label[v as usize] = pos as u32 + 1;
        }
        Ok(RootedTree { instance, root, parent, children, parent_arc, order, label })
    }

    pub fn instance(&self) -> &Instance {
        &self.instance
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    /// Parent of `v`; `0` for the root.
    pub fn parent(&self, v: NodeId) -> NodeId {
        self.parent[v as usize]
    }

    pub fn children(&self, v: NodeId) -> &[NodeId] {
        &self.children[v as usize]
    }

    pub fn is_leaf(&self, v: NodeId) -> bool {
        self.children[v as usize].is_empty()
    }

    /// Nodes in breadth-first order from the root.
    pub fn bfs_order(&self) -> &[NodeId] {
        &self.order
    }

    /// Position of `v` in breadth-first order, starting at 1.
    pub fn bfs_label(&self, v: NodeId) -> u32 {
        self.label[v as usize]
    }

    /// Arc joining `v` to its parent.
    pub fn parent_arc(&self, v: NodeId) -> Option<usize> {
        self.parent_arc[v as usize]
    }

    /// Arc index of the `(parent, child)` pair, if `child` hangs below `parent`.
    pub fn arc_of(&self, parent: NodeId, child: NodeId) -> Option<usize> {
        if child == 0 || child as usize >= self.parent.len() || self.parent[child as usize] != parent {
            return None;
        }
        self.parent_arc[child as usize]
    }

    /// `(parent, child)` orientation of arc `idx`.
    pub fn orient(&self, idx: usize) -> (NodeId, NodeId) {
        let a = self.instance.arc(idx);
        if self.parent[a.j as usize] == a.i && self.parent_arc[a.j as usize] == Some(idx) {
            (a.i, a.j)
        } else {
            (a.j, a.i)
        }
    }

    /// Capacity of `v`.
    pub fn cap(&self, v: NodeId) -> u64 {
        self.instance.capacity(v)
    }

    /// Capacity of the arc from `v` to its parent (`0` for the root).
    pub fn parent_arc_cap(&self, v: NodeId) -> u64 {
        self.parent_arc(v).map_or(0, |e| self.instance.arc(e).cap)
    }
}
