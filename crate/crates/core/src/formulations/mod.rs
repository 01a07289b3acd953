//! Solver-agnostic model representation and the formulation builders.

mod builders;
mod model;
pub mod names;

pub use builders::{build_ip, build_ip_z, build_qdp, build_qsn, qdp_arc_v_count, FormulationCounts};
pub use model::{
    check_point, Assignment, Constraint, Formulation, Metadata, Model, ModelBuilder, ProjectionRow, RowSense, VarKind,
    Variable,
};
