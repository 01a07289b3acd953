//! Variable naming grammar shared by builders, liftings and exporters.
//!
//! `x_i_j`, `y_i_j` and `z_i_j_l` use the canonical `i < j` orientation.
//! `u_i_j_kp_k`, `v_i_j_l_k` and `f_i_j_kp_k` keep the role orientation
//! (`u`, `v`: parent then child; `f`: owning node then neighbour), with `0`
//! standing for the parent of the root.

use crate::instance::NodeId;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum VarName {
    X(NodeId, NodeId),
    Y(NodeId, NodeId),
    Z(NodeId, NodeId, u64),
    U(NodeId, NodeId, u64, u64),
    V(NodeId, NodeId, u64, u64),
    F(NodeId, NodeId, u64, u64),
}

pub fn x(i: NodeId, j: NodeId) -> String {
    format!("x_{}_{}", i.min(j), i.max(j))
}

pub fn y(i: NodeId, j: NodeId) -> String {
    format!("y_{}_{}", i.min(j), i.max(j))
}

pub fn z(i: NodeId, j: NodeId, l: u64) -> String {
    format!("z_{}_{}_{l}", i.min(j), i.max(j))
}

pub fn u(i: NodeId, j: NodeId, kp: u64, k: u64) -> String {
    format!("u_{i}_{j}_{kp}_{k}")
}

pub fn v(i: NodeId, j: NodeId, l: u64, k: u64) -> String {
    format!("v_{i}_{j}_{l}_{k}")
}

pub fn f(i: NodeId, j: NodeId, kp: u64, k: u64) -> String {
    format!("f_{i}_{j}_{kp}_{k}")
}

pub fn parse(name: &str) -> Option<VarName> {
    let mut parts = name.split('_');
    let head = parts.next()?;
    let nums: Vec<u64> = parts.map(|p| p.parse().ok()).collect::<Option<_>>()?;
    let node = |v: u64| NodeId::try_from(v).ok();
    match (head, nums.as_slice()) {
        ("x", &[i, j]) => Some(VarName::X(node(i)?, node(j)?)),
        ("y", &[i, j]) => Some(VarName::Y(node(i)?, node(j)?)),
        ("z", &[i, j, l]) => Some(VarName::Z(node(i)?, node(j)?, l)),
        ("u", &[i, j, a, b]) => Some(VarName::U(node(i)?, node(j)?, a, b)),
        ("v", &[i, j, a, b]) => Some(VarName::V(node(i)?, node(j)?, a, b)),
        ("f", &[i, j, a, b]) => Some(VarName::F(node(i)?, node(j)?, a, b)),
        _ => None,
    }
}
