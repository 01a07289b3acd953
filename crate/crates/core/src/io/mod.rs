//! File formats: JSON documents, LP and MPS model exports.

pub mod json;
pub mod lp;
pub mod mps;

pub use json::{
    assignment_from_str, assignment_to_string, instance_from_str, instance_to_string, read_document, read_instance,
    solution_from_str, solution_to_string, write_document, write_instance, InstanceDocument,
};
pub use lp::{model_from_lp, model_to_lp, read_model_lp, write_model_lp};
pub use mps::{model_to_mps, write_model_mps};
