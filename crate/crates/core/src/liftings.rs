//! Constructive maps between the original `(x, y)` space and the extended
//! spaces: the unary lift into `z`, the per-node encoding into `f`, the map
//! from `f` to `(u, v)`, and the projections back.

use std::collections::{BTreeMap, HashMap};

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::formulations::names::{self, VarName};
use crate::formulations::{build_ip, build_qsn, check_point, Assignment};
use crate::generators::InstanceRng;
use crate::instance::{Instance, NodeId, NodeSense, RootedTree};
use crate::rational::{from_u64, ratio, Rational};
use crate::tree_dp::{check_flow, child_loads};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Space {
    /// `(x, y, z)` of the unary expansion.
    Z,
    /// Per-node flow-assignment variables `f`.
    F,
    /// `(u, v)` of the recursion's dual.
    UV,
}

/// Original-space coordinates, indexed by arc.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Projection {
    pub x: Vec<Rational>,
    pub y: Vec<Rational>,
}

impl Projection {
    /// `(x, [x > 0])` for integer flows.
    pub fn of_flows(x: &[u64]) -> Self {
        Projection {
            x: x.iter().map(|&v| from_u64(v)).collect(),
            y: x.iter().map(|&v| if v > 0 { Rational::one() } else { Rational::zero() }).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LiftedPoint {
    pub space: Space,
    pub values: BTreeMap<String, Rational>,
    pub projection: Projection,
    /// Orientation of each arc as used by the space's names: canonical
    /// `(i < j)` for `Z`, `(parent, child)` for `F` and `UV`.
    pub arcs: Vec<(NodeId, NodeId)>,
    /// All values are 0/1 by construction.
    pub integral: bool,
}

impl LiftedPoint {
    fn new(space: Space, arcs: Vec<(NodeId, NodeId)>, values: BTreeMap<String, Rational>, integral: bool) -> Self {
        let mut pt =
            LiftedPoint { space, values, projection: Projection { x: Vec::new(), y: Vec::new() }, arcs, integral };
        pt.projection = project(&pt);
        pt
    }

    pub fn to_assignment(&self) -> Assignment {
        Assignment { values: self.values.clone(), claims_integrality: self.integral }
    }

    /// The stored projection agrees with the one recomputed from `values`;
    /// in `Z` the stored `x` must also equal `sum l z_l`.
    pub fn projection_consistent(&self) -> bool {
        let recomputed = project(self);
        if recomputed != self.projection {
            return false;
        }
        if self.space == Space::Z {
            return self
                .arcs
                .iter()
                .zip(&recomputed.x)
                .all(|(&(i, j), x)| self.values.get(&names::x(i, j)).cloned().unwrap_or_default() == *x);
        }
        true
    }
}

/// Applies the space's projection identity to `pt.values`:
/// `Z`: `x = sum l z_l`, `y` read off directly;
/// `F`: `x = sum (k - k') f`, `y = sum_{k' < k} f` over the parent's block;
/// `UV`: `x = sum_l l sum_k v`, `y = sum_{l > 0} sum_k v`.
pub fn project(pt: &LiftedPoint) -> Projection {
    let m = pt.arcs.len();
    let lookup: HashMap<(NodeId, NodeId), usize> = pt.arcs.iter().enumerate().map(|(e, &ij)| (ij, e)).collect();
    let mut x = vec![Rational::zero(); m];
    let mut y = vec![Rational::zero(); m];
    for (name, value) in &pt.values {
        let Some(parsed) = names::parse(name) else { continue };
        match (pt.space, parsed) {
            (Space::Z, VarName::Z(i, j, l)) => {
                if let Some(&e) = lookup.get(&(i, j)) {
                    x[e] += from_u64(l) * value;
                }
            }
            (Space::Z, VarName::Y(i, j)) => {
                if let Some(&e) = lookup.get(&(i, j)) {
                    y[e] += value;
                }
            }
            (Space::F, VarName::F(i, j, kp, k)) => {
                if let Some(&e) = lookup.get(&(i, j)) {
                    add_step(&mut x[e], &mut y[e], k - kp, value);
                }
            }
            (Space::UV, VarName::V(i, j, l, _)) => {
                if let Some(&e) = lookup.get(&(i, j)) {
                    add_step(&mut x[e], &mut y[e], l, value);
                }
            }
            _ => {}
        }
    }
    Projection { x, y }
}

fn add_step(x: &mut Rational, y: &mut Rational, step: u64, value: &Rational) {
    *x += from_u64(step) * value;
    if step > 0 {
        *y += value;
    }
}

fn canonical_arcs(inst: &Instance) -> Vec<(NodeId, NodeId)> {
    inst.arcs().iter().map(|a| (a.i, a.j)).collect()
}

fn oriented_arcs(rt: &RootedTree) -> Vec<(NodeId, NodeId)> {
    (0..rt.instance().num_arcs()).map(|e| rt.orient(e)).collect()
}

/// Lifts a point of the LP relaxation into the unary space:
/// `z_{a} = x / a`, `z_0 = 1 - x / a`, middle levels zero.
pub fn lift_z(inst: &Instance, x: &[Rational], y: &[Rational]) -> Result<LiftedPoint> {
    let m = inst.num_arcs();
    if x.len() != m || y.len() != m {
        return Err(Error::LengthMismatch(format!("{m} arcs, {} x values, {} y values", x.len(), y.len())));
    }
    for (a, xv) in inst.arcs().iter().zip(x) {
        if a.cap == 0 && !xv.is_zero() {
            return Err(Error::ZeroCapacityArcWithFlow { i: a.i, j: a.j });
        }
    }
    let mut base = Assignment::new(false);
    for (a, (xv, yv)) in inst.arcs().iter().zip(x.iter().zip(y)) {
        base.set(names::x(a.i, a.j), xv.clone());
        base.set(names::y(a.i, a.j), yv.clone());
    }
    if let Some(v) = check_point(&build_ip(inst), &base)?.first() {
        return Err(Error::NotInP(v.to_string()));
    }
    let mut values = base.values;
    for (a, xv) in inst.arcs().iter().zip(x) {
        if a.cap == 0 {
            values.insert(names::z(a.i, a.j, 0), Rational::one());
            continue;
        }
        let top = xv / from_u64(a.cap);
        values.insert(names::z(a.i, a.j, 0), Rational::one() - &top);
        values.insert(names::z(a.i, a.j, a.cap), top);
    }
    Ok(LiftedPoint::new(Space::Z, canonical_arcs(inst), values, false))
}

/// Encodes integer flows node by node: `f_i_j_kp_k = 1` when the load on
/// `i`'s earlier children is `k'` and `x_ij = k - k'`; the parent arc starts
/// from the total child load.
pub fn encode_f(rt: &RootedTree, x: &[u64]) -> Result<LiftedPoint> {
    check_flow(rt, x)?;
    let loads = child_loads(rt, x);
    let mut values = BTreeMap::new();
    for &i in rt.bfs_order() {
        let mut prefix = 0;
        for &j in rt.children(i) {
            let flow = x[rt.arc_of(i, j).expect("child arc")];
            values.insert(names::f(i, j, prefix, prefix + flow), Rational::one());
            prefix += flow;
        }
        let up = rt.parent_arc(i).map_or(0, |e| x[e]);
        let base = loads[i as usize];
        values.insert(names::f(i, rt.parent(i), base, base + up), Rational::one());
    }
    Ok(LiftedPoint::new(Space::F, oriented_arcs(rt), values, true))
}

/// The `f` values plus `z_ijl = sum_{k - k' = l} f_i_j_kp_k` on each arc,
/// ready for the `z`-linked model.
pub fn with_induced_z(rt: &RootedTree, pt: &LiftedPoint) -> Assignment {
    let mut out = pt.to_assignment();
    for e in 0..rt.instance().num_arcs() {
        let (i, j) = rt.orient(e);
        for l in 0..=rt.instance().arc(e).cap {
            out.set(names::z(i, j, l), Rational::zero());
        }
    }
    for (name, value) in &pt.values {
        if let Some(VarName::F(i, j, kp, k)) = names::parse(name) {
            if j != 0 && rt.arc_of(i, j).is_some() {
                let key = names::z(i, j, k - kp);
                let cur = out.get(&key);
                out.set(key, cur + value);
            }
        }
    }
    out
}

/// Maps a point of the per-node polyhedron to the recursion's dual:
/// `u_i_j_kp_k = f_i_j_kp_k` for child arcs and `v_i_j_l_k = f_j_i_k_(k+l)`
/// for the arc from child `j` up to `i`.
pub fn pi_map(rt: &RootedTree, pt: &LiftedPoint) -> Result<LiftedPoint> {
    if pt.space != Space::F {
        return Err(Error::NotInQsn(format!("expected an f-space point, got {:?}", pt.space)));
    }
    let model = build_qsn(rt, false)?;
    match check_point(&model, &pt.to_assignment()) {
        Ok(v) if v.is_empty() => {}
        Ok(v) => return Err(Error::NotInQsn(v[0].to_string())),
        Err(e) => return Err(Error::NotInQsn(e.to_string())),
    }
    let mut values = BTreeMap::new();
    for (name, value) in &pt.values {
        let Some(VarName::F(i, j, kp, k)) = names::parse(name) else {
            return Err(Error::NotInQsn(format!("`{name}` is not an f variable")));
        };
        if j != 0 && rt.parent(j) == i {
            values.insert(names::u(i, j, kp, k), value.clone());
        } else {
            values.insert(names::v(j, i, k - kp, kp), value.clone());
        }
    }
    Ok(LiftedPoint::new(Space::UV, oriented_arcs(rt), values, pt.integral))
}

/// `lambda * a + (1 - lambda) * b`, coordinate-wise.
pub fn convex_combination(a: &LiftedPoint, b: &LiftedPoint, lambda: &Rational) -> LiftedPoint {
    assert_eq!(a.space, b.space, "points live in different spaces");
    let mu = Rational::one() - lambda;
    let mut values: BTreeMap<String, Rational> = BTreeMap::new();
    for (k, v) in &a.values {
        *values.entry(k.clone()).or_default() += lambda * v;
    }
    for (k, v) in &b.values {
        *values.entry(k.clone()).or_default() += &mu * v;
    }
    let integral = a.integral && b.integral && (lambda.is_zero() || lambda.is_one());
    LiftedPoint::new(a.space, a.arcs.clone(), values, integral)
}

/// Draws a point of the LP relaxation: integer pseudo-flows are scaled by
/// a random factor in `(0, 1]` and shrunk per node to respect capacities;
/// `y` starts at its smallest feasible value `x / a` and, with
/// `inflate`, moves a random fraction of the way to its largest one.
pub fn sample_point_in_p(
    inst: &Instance,
    rng: &mut InstanceRng,
    inflate: bool,
) -> Result<(Vec<Rational>, Vec<Rational>)> {
    if inst.nodes().any(|v| inst.variant().sense(v) == NodeSense::Eq) {
        return Err(Error::UnsupportedVariant("sampling needs <= node rows".into()));
    }
    const GRID: i64 = 8;
    let raw: Vec<Rational> = inst
        .arcs()
        .iter()
        .map(|a| {
            let w = rng.uniform(0, a.cap as i64);
            let mu = ratio(rng.uniform(1, GRID), GRID);
            Rational::from_integer(w.into()) * mu
        })
        .collect();
    let mut load = vec![Rational::zero(); inst.num_nodes() + 1];
    for (a, w) in inst.arcs().iter().zip(&raw) {
        load[a.i as usize] += w;
        load[a.j as usize] += w;
    }
    let shrink: Vec<Rational> = (0..=inst.num_nodes())
        .map(|v| {
            if v == 0 || load[v] <= from_u64(inst.capacity(v as NodeId)) {
                Rational::one()
            } else {
                from_u64(inst.capacity(v as NodeId)) / &load[v]
            }
        })
        .collect();
    let mut x = Vec::with_capacity(inst.num_arcs());
    let mut y = Vec::with_capacity(inst.num_arcs());
    for (a, w) in inst.arcs().iter().zip(raw) {
        let s = shrink[a.i as usize].clone().min(shrink[a.j as usize].clone());
        let xv = w * s;
        let lo = if a.cap == 0 { Rational::zero() } else { &xv / from_u64(a.cap) };
        let hi = if inst.variant().link_lower { xv.clone().min(Rational::one()) } else { Rational::one() };
        let yv = if inflate {
            let t = ratio(rng.uniform(0, GRID), GRID);
            &lo + (hi - &lo) * t
        } else {
            lo
        };
        x.push(xv);
        y.push(yv);
    }
    Ok((x, y))
}
