//! Builders for the four formulations.
//!
//! * `ip`: flows `x` and indicators `y` with node capacity rows.
//! * `ipz`: `ip` plus the unary expansion `z_ijl` of every flow.
//! * `qdp`: the dual of the linear program behind the tree recursion, over
//!   `(u, v)`.
//! * `qsn`: one flow-assignment network per node, linked arc by arc, either
//!   directly or through shared `z` binaries.

use num_traits::{One, Zero};

use super::model::{Formulation, Model, ModelBuilder, RowSense, VarKind};
use super::names;
use crate::error::{Error, Result};
use crate::instance::{Instance, NodeId, NodeSense, RootedTree};
use crate::rational::{from_u64, int, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FormulationCounts {
    pub variables: usize,
    pub constraints: usize,
    pub integer_variables: usize,
    pub nonzeros: usize,
}

impl FormulationCounts {
    pub fn of(model: &Model) -> Self {
        FormulationCounts {
            variables: model.variables().len(),
            constraints: model.constraints().len(),
            integer_variables: model.variables().len() - model.count_kind(VarKind::Continuous),
            nonzeros: model.constraints().iter().map(|c| c.terms.len()).sum(),
        }
    }
}

fn bounded(hi: u64) -> (Option<Rational>, Option<Rational>) {
    (Some(Rational::zero()), Some(from_u64(hi)))
}

fn nonneg() -> (Option<Rational>, Option<Rational>) {
    (Some(Rational::zero()), None)
}

fn add_ip_part(b: &mut ModelBuilder, inst: &Instance) -> Result<()> {
    let mut xs = Vec::with_capacity(inst.num_arcs());
    let mut ys = Vec::with_capacity(inst.num_arcs());
    for a in inst.arcs() {
        let (lo, hi) = bounded(a.cap);
        xs.push(b.add_var(names::x(a.i, a.j), lo, hi, VarKind::Continuous)?);
    }
    for a in inst.arcs() {
        let (lo, hi) = bounded(1);
        ys.push(b.add_var(names::y(a.i, a.j), lo, hi, VarKind::Binary)?);
    }
    for v in inst.nodes() {
        let incident = inst.incident(v);
        if incident.is_empty() {
            continue;
        }
        let sense = match inst.variant().sense(v) {
            NodeSense::Le => RowSense::Le,
            NodeSense::Eq => RowSense::Eq,
        };
        b.add_row(
            format!("ipg_cap_{v}"),
            incident.iter().map(|&e| (xs[e], Rational::one())),
            sense,
            from_u64(inst.capacity(v)),
        );
    }
    for (e, a) in inst.arcs().iter().enumerate() {
        b.add_row(
            format!("ipg_ub_{}_{}", a.i, a.j),
            [(xs[e], Rational::one()), (ys[e], -from_u64(a.cap))],
            RowSense::Le,
            Rational::zero(),
        );
    }
    if inst.variant().link_lower {
        for (e, a) in inst.arcs().iter().enumerate() {
            b.add_row(
                format!("ipg_lb_{}_{}", a.i, a.j),
                [(ys[e], Rational::one()), (xs[e], int(-1))],
                RowSense::Le,
                Rational::zero(),
            );
        }
    }
    let objective: Vec<(usize, Rational)> =
        inst.arcs().iter().enumerate().flat_map(|(e, a)| [(xs[e], a.p.clone()), (ys[e], a.q.clone())]).collect();
    b.set_objective(objective);
    Ok(())
}

/// Flow/indicator model over any graph and variant.
pub fn build_ip(inst: &Instance) -> Model {
    let mut b = ModelBuilder::new();
    b.set_formulation(Some(Formulation::Ip), inst.fingerprint());
    add_ip_part(&mut b, inst).expect("arc names are unique");
    b.finish()
}

/// [`build_ip`] plus binaries `z_ijl` (`l = 0..=a_ij`) with
/// `sum l z = x`, `sum_{l>=1} z <= y` and `sum z = 1` per arc.
pub fn build_ip_z(inst: &Instance) -> Model {
    let mut b = ModelBuilder::new();
    b.set_formulation(Some(Formulation::IpZ), inst.fingerprint());
    add_ip_part(&mut b, inst).expect("arc names are unique");
    for a in inst.arcs() {
        let x = b.var(&names::x(a.i, a.j)).expect("declared");
        let y = b.var(&names::y(a.i, a.j)).expect("declared");
        let zs: Vec<usize> = (0..=a.cap)
            .map(|l| {
                let (lo, hi) = bounded(1);
                b.add_var(names::z(a.i, a.j, l), lo, hi, VarKind::Binary).expect("unique")
            })
            .collect();
        let level = zs.iter().enumerate().map(|(l, &z)| (z, from_u64(l as u64)));
        b.add_row(format!("uip_xz_{}_{}", a.i, a.j), level.chain([(x, int(-1))]), RowSense::Eq, Rational::zero());
        b.add_row(
            format!("uip_yz_{}_{}", a.i, a.j),
            zs.iter().skip(1).map(|&z| (z, Rational::one())).chain([(y, int(-1))]),
            RowSense::Le,
            Rational::zero(),
        );
        b.add_row(
            format!("uip_z_{}_{}", a.i, a.j),
            zs.iter().map(|&z| (z, Rational::one())),
            RowSense::Eq,
            Rational::one(),
        );
    }
    b.finish()
}

/// Index pairs `(k', k)` of the cumulative-load arc into the child at
/// position `pos` of `node`: the first child starts from `k' = 0`; later
/// children move from `k'` to `k` with `0 <= k - k' <= a`, `k <= b`.
pub(crate) fn child_pairs(rt: &RootedTree, node: NodeId, pos: usize) -> Vec<(u64, u64)> {
    let child = rt.children(node)[pos];
    let a = rt.parent_arc_cap(child);
    let b = rt.cap(node);
    if pos == 0 {
        (0..=a.min(b)).map(|k| (0, k)).collect()
    } else {
        step_pairs(b, a)
    }
}

/// Index pairs `(k', k)` of the arc from `node` to its parent: `k'` is the
/// load on the children (always `0` at a leaf) and `k - k'` the parent flow.
pub(crate) fn parent_pairs(rt: &RootedTree, node: NodeId) -> Vec<(u64, u64)> {
    let a = rt.parent_arc_cap(node);
    let b = rt.cap(node);
    if rt.is_leaf(node) {
        (0..=a.min(b)).map(|k| (0, k)).collect()
    } else {
        step_pairs(b, a)
    }
}

fn step_pairs(b: u64, a: u64) -> Vec<(u64, u64)> {
    (0..=b).flat_map(|kp| (kp..=(kp + a).min(b)).map(move |k| (kp, k))).collect()
}

fn require_default(inst: &Instance, what: &str) -> Result<()> {
    if inst.variant().is_default() {
        Ok(())
    } else {
        Err(Error::UnsupportedVariant(format!("{what} needs all rows <= and no lower link")))
    }
}

/// Sum over `pairs` grouped by `k - k'`.
fn by_difference(pairs: &[(u64, u64)], vars: &[usize], l: u64) -> Vec<(usize, Rational)> {
    pairs.iter().zip(vars).filter(|((kp, k), _)| k - kp == l).map(|(_, &v)| (v, Rational::one())).collect()
}

/// Sum over `pairs` whose first index is `k'`.
fn by_start(pairs: &[(u64, u64)], vars: &[usize], kp: u64) -> Vec<(usize, Rational)> {
    pairs.iter().zip(vars).filter(|((a, _), _)| *a == kp).map(|(_, &v)| (v, Rational::one())).collect()
}

/// Sum over `pairs` whose second index is `k`.
fn by_end(pairs: &[(u64, u64)], vars: &[usize], k: u64) -> Vec<(usize, Rational)> {
    pairs.iter().zip(vars).filter(|((_, b), _)| *b == k).map(|(_, &v)| (v, Rational::one())).collect()
}

fn negate(terms: Vec<(usize, Rational)>) -> impl Iterator<Item = (usize, Rational)> {
    terms.into_iter().map(|(v, c)| (v, -c))
}

/// Per-node variable blocks shared by the `qdp` and `qsn` builders:
/// `chain[node][pos]` holds the child-arc variables, `up[node]` the
/// parent-arc ones (`v` for `qdp`, the node's own `f` block for `qsn`).
struct Blocks {
    chain: Vec<Vec<Block>>,
    up: Vec<Block>,
}

/// Index pairs of a block and the matching variable ids.
type Block = (Vec<(u64, u64)>, Vec<usize>);

/// Conservation rows `flow_i_j_k` along each node's ordered children, the
/// last child handing over to the parent-arc block.
fn add_flow_rows(b: &mut ModelBuilder, rt: &RootedTree, blocks: &Blocks) {
    for &i in rt.bfs_order() {
        let kids = rt.children(i);
        for (pos, &j) in kids.iter().enumerate() {
            let (pairs, vars) = &blocks.chain[i as usize][pos];
            let (next_pairs, next_vars) = match kids.get(pos + 1) {
                Some(_) => &blocks.chain[i as usize][pos + 1],
                None => &blocks.up[i as usize],
            };
            for k in 0..=rt.cap(i) {
                let lhs = by_end(pairs, vars, k);
                let rhs = by_start(next_pairs, next_vars, k);
                b.add_row(
                    format!("flow_{i}_{j}_{k}"),
                    lhs.into_iter().chain(negate(rhs)),
                    RowSense::Eq,
                    Rational::zero(),
                );
            }
        }
    }
}

/// Dual polyhedron of the tree recursion over `(u, v)`.
///
/// `u_i_j_kp_k` follows node `i`'s load from `k'` to `k` when child `j` is
/// added; `v_i_j_l_k` puts `l` units on arc `(i, j)` with `k` units below
/// `j`. The root hangs below the pseudo-node `0` through `v_0_r_0_k`.
pub fn build_qdp(rt: &RootedTree) -> Result<Model> {
    let inst = rt.instance();
    require_default(inst, "qdp")?;
    let n = inst.num_nodes();
    let mut b = ModelBuilder::new();
    b.set_formulation(Some(Formulation::Qdp), inst.fingerprint());

    let mut blocks = Blocks { chain: vec![Vec::new(); n + 1], up: vec![(Vec::new(), Vec::new()); n + 1] };
    let root = rt.root();
    let root_pairs = parent_pairs(rt, root);
    let root_vars = root_pairs
        .iter()
        .map(|&(kp, _)| {
            let (lo, hi) = nonneg();
            b.add_var(names::v(0, root, 0, kp), lo, hi, VarKind::Continuous)
        })
        .collect::<Result<Vec<_>>>()?;
    blocks.up[root as usize] = (root_pairs, root_vars);

    for &i in rt.bfs_order() {
        for (pos, &j) in rt.children(i).iter().enumerate() {
            let pairs = child_pairs(rt, i, pos);
            let vars = pairs
                .iter()
                .map(|&(kp, k)| {
                    let (lo, hi) = nonneg();
                    b.add_var(names::u(i, j, kp, k), lo, hi, VarKind::Continuous)
                })
                .collect::<Result<Vec<_>>>()?;
            blocks.chain[i as usize].push((pairs, vars));
        }
        for &j in rt.children(i) {
            // v_{i,j,l,k} pairs with the child's parent-arc pair (k, k + l).
            let pairs = parent_pairs(rt, j);
            let vars = pairs
                .iter()
                .map(|&(kp, k)| {
                    let (lo, hi) = nonneg();
                    b.add_var(names::v(i, j, k - kp, kp), lo, hi, VarKind::Continuous)
                })
                .collect::<Result<Vec<_>>>()?;
            blocks.up[j as usize] = (pairs, vars);
        }
    }

    add_flow_rows(&mut b, rt, &blocks);

    let mut objective = Vec::new();
    for &i in rt.bfs_order() {
        for (pos, &j) in rt.children(i).iter().enumerate() {
            let e = rt.arc_of(i, j).expect("tree arc");
            let (u_pairs, u_vars) = &blocks.chain[i as usize][pos];
            let (v_pairs, v_vars) = &blocks.up[j as usize];
            for l in 0..=inst.arc(e).cap {
                let lhs = by_difference(v_pairs, v_vars, l);
                let rhs = by_difference(u_pairs, u_vars, l);
                b.add_row(
                    format!("rev_{i}_{j}_{l}"),
                    lhs.into_iter().chain(negate(rhs)),
                    RowSense::Eq,
                    Rational::zero(),
                );
            }
            for (&(kp, k), &var) in v_pairs.iter().zip(v_vars) {
                objective.push((var, inst.arc_cost(e, k - kp)));
            }
        }
    }
    let (_, root_vars) = &blocks.up[root as usize];
    b.add_row("unit", root_vars.iter().map(|&v| (v, Rational::one())), RowSense::Eq, Rational::one());
    b.set_objective(objective);

    for e in 0..inst.num_arcs() {
        let (i, j) = rt.orient(e);
        let (pairs, vars) = &blocks.up[j as usize];
        let x = pairs.iter().zip(vars).map(|(&(kp, k), &v)| (v, from_u64(k - kp)));
        b.add_projection(names::x(i, j), x);
        let y = pairs.iter().zip(vars).filter(|((kp, k), _)| k > kp).map(|(_, &v)| (v, Rational::one()));
        b.add_projection(names::y(i, j), y);
    }
    Ok(b.finish())
}

/// Per-node flow-assignment networks `f_i_j_kp_k` linked across arcs.
///
/// Node `i` scans its children in order and then its parent; the root's
/// parent is the pseudo-node `0` with zero arc capacity. With `with_z`, the
/// two sides of each arc are tied to shared binaries `z_ijl` instead of to
/// each other.
pub fn build_qsn(rt: &RootedTree, with_z: bool) -> Result<Model> {
    let inst = rt.instance();
    require_default(inst, "qsn")?;
    let n = inst.num_nodes();
    let mut b = ModelBuilder::new();
    let tag = if with_z { Formulation::QsnZ } else { Formulation::Qsn };
    b.set_formulation(Some(tag), inst.fingerprint());

    let mut blocks = Blocks { chain: vec![Vec::new(); n + 1], up: vec![(Vec::new(), Vec::new()); n + 1] };
    for &i in rt.bfs_order() {
        for (pos, &j) in rt.children(i).iter().enumerate() {
            let pairs = child_pairs(rt, i, pos);
            let vars = pairs
                .iter()
                .map(|&(kp, k)| {
                    let (lo, hi) = nonneg();
                    b.add_var(names::f(i, j, kp, k), lo, hi, VarKind::Continuous)
                })
                .collect::<Result<Vec<_>>>()?;
            blocks.chain[i as usize].push((pairs, vars));
        }
        let p = rt.parent(i);
        let pairs = parent_pairs(rt, i);
        let vars = pairs
            .iter()
            .map(|&(kp, k)| {
                let (lo, hi) = nonneg();
                b.add_var(names::f(i, p, kp, k), lo, hi, VarKind::Continuous)
            })
            .collect::<Result<Vec<_>>>()?;
        blocks.up[i as usize] = (pairs, vars);
    }
    let mut zvars = vec![Vec::new(); inst.num_arcs()];
    if with_z {
        for &i in rt.bfs_order() {
            for &j in rt.children(i) {
                let e = rt.arc_of(i, j).expect("tree arc");
                zvars[e] = (0..=inst.arc(e).cap)
                    .map(|l| {
                        let (lo, hi) = bounded(1);
                        b.add_var(names::z(i, j, l), lo, hi, VarKind::Binary)
                    })
                    .collect::<Result<Vec<_>>>()?;
            }
        }
    }

    add_flow_rows(&mut b, rt, &blocks);
    for &i in rt.bfs_order() {
        let (_, vars) = &blocks.up[i as usize];
        b.add_row(format!("unit_{i}"), vars.iter().map(|&v| (v, Rational::one())), RowSense::Eq, Rational::one());
    }

    let mut objective = Vec::new();
    for &i in rt.bfs_order() {
        for (pos, &j) in rt.children(i).iter().enumerate() {
            let e = rt.arc_of(i, j).expect("tree arc");
            let (down_pairs, down_vars) = &blocks.chain[i as usize][pos];
            let (up_pairs, up_vars) = &blocks.up[j as usize];
            for l in 0..=inst.arc(e).cap {
                let parent_side = by_difference(down_pairs, down_vars, l);
                let child_side = by_difference(up_pairs, up_vars, l);
                if with_z {
                    let z = zvars[e][l as usize];
                    b.add_row(
                        format!("linkp_{i}_{j}_{l}"),
                        parent_side.into_iter().chain([(z, int(-1))]),
                        RowSense::Eq,
                        Rational::zero(),
                    );
                    b.add_row(
                        format!("linkc_{i}_{j}_{l}"),
                        child_side.into_iter().chain([(z, int(-1))]),
                        RowSense::Eq,
                        Rational::zero(),
                    );
                } else {
                    b.add_row(
                        format!("link_{i}_{j}_{l}"),
                        parent_side.into_iter().chain(negate(child_side)),
                        RowSense::Eq,
                        Rational::zero(),
                    );
                }
            }
            for (&(kp, k), &var) in down_pairs.iter().zip(down_vars) {
                objective.push((var, inst.arc_cost(e, k - kp)));
            }
            let x = down_pairs.iter().zip(down_vars).map(|(&(kp, k), &v)| (v, from_u64(k - kp)));
            b.add_projection(names::x(i, j), x);
            let y = down_pairs.iter().zip(down_vars).filter(|((kp, k), _)| k > kp).map(|(_, &v)| (v, Rational::one()));
            b.add_projection(names::y(i, j), y);
        }
    }
    b.set_objective(objective);
    Ok(b.finish())
}

/// Closed-form number of `v` variables on tree arcs (the root's `v_0_r_0_k`
/// excluded): `sum over (i,j) of sum_{l=0}^{a_ij} (leaf(j) ? 1 : b_j - l + 1)`.
pub fn qdp_arc_v_count(rt: &RootedTree) -> usize {
    (0..rt.instance().num_arcs())
        .map(|e| {
            let (_, j) = rt.orient(e);
            let a = rt.instance().arc(e).cap;
            (0..=a).map(|l| if rt.is_leaf(j) { 1 } else { (rt.cap(j) - l + 1) as usize }).sum::<usize>()
        })
        .sum()
}
