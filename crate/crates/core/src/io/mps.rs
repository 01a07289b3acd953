//! Free-format MPS export.
//!
//! Integer and binary columns sit between `MARKER INTORG/INTEND` pairs;
//! binaries get a `BV` bound. Rows with non-terminating coefficients are
//! scaled as in the LP writer, with a `*` comment naming the factor.

use std::fmt::Write as _;
use std::path::Path;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::formulations::{Model, RowSense, VarKind};
use crate::io::lp::{decimal, row_scale};
use crate::rational::{self, Rational};

pub const MAX_NAME: usize = 255;
const OBJ: &str = "obj";

fn check_name(name: &str) -> Result<()> {
    if name.len() > MAX_NAME {
        return Err(Error::NameTooLong { name: name.to_owned(), max: MAX_NAME });
    }
    Ok(())
}

fn bound(r: &Rational, name: &str) -> Result<String> {
    rational::to_decimal(r)
        .ok_or_else(|| Error::InexactBound(format!("{name}: {} has no finite decimal form", rational::to_text(r))))
}

pub fn model_to_mps(model: &Model) -> Result<String> {
    let mut out = String::new();
    let tag = model.metadata.formulation.map_or("model", |f| f.tag());
    if !model.metadata.fingerprint.is_empty() {
        writeln!(out, "* fctp-fingerprint: {}", model.metadata.fingerprint).unwrap();
    }
    writeln!(out, "NAME fctp-{tag}").unwrap();

    let obj_scale = row_scale(model.objective().iter().map(|(_, c)| c));
    if !obj_scale.is_one() {
        writeln!(out, "* objective scaled by {obj_scale}").unwrap();
    }
    let mut row_scales = Vec::with_capacity(model.constraints().len());
    out.push_str("ROWS\n");
    writeln!(out, " N {OBJ}").unwrap();
    for row in model.constraints() {
        check_name(&row.name)?;
        if row.name == OBJ {
            return Err(Error::Parse {
                location: row.name.clone(),
                message: "row name clashes with the objective".into(),
            });
        }
        let scale = row_scale(row.terms.iter().map(|(_, c)| c).chain(std::iter::once(&row.rhs)));
        if !scale.is_one() {
            writeln!(out, "* row {} scaled by {scale}", row.name).unwrap();
        }
        row_scales.push(Rational::from_integer(scale));
        let sense = match row.sense {
            RowSense::Le => "L",
            RowSense::Eq => "E",
            RowSense::Ge => "G",
        };
        writeln!(out, " {sense} {}", row.name).unwrap();
    }

    // column-major view of the rows
    let mut columns: Vec<Vec<(&str, Rational)>> = vec![Vec::new(); model.variables().len()];
    let obj_scale = Rational::from_integer(obj_scale);
    for (idx, c) in model.objective() {
        columns[*idx].push((OBJ, c * &obj_scale));
    }
    for (row, scale) in model.constraints().iter().zip(&row_scales) {
        for (idx, c) in &row.terms {
            columns[*idx].push((row.name.as_str(), c * scale));
        }
    }

    out.push_str("COLUMNS\n");
    let mut in_int = false;
    let mut markers = 0;
    for (var, entries) in model.variables().iter().zip(&columns) {
        check_name(&var.name)?;
        let integral = var.kind != VarKind::Continuous;
        if integral != in_int {
            let kind = if integral { "INTORG" } else { "INTEND" };
            writeln!(out, " MARKER{markers} 'MARKER' '{kind}'").unwrap();
            markers += usize::from(!integral);
            in_int = integral;
        }
        if entries.is_empty() {
            // a column must appear to be declared
            writeln!(out, " {} {OBJ} 0", var.name).unwrap();
        }
        for (row, c) in entries {
            writeln!(out, " {} {row} {}", var.name, decimal(c)).unwrap();
        }
    }
    if in_int {
        writeln!(out, " MARKER{markers} 'MARKER' 'INTEND'").unwrap();
    }

    out.push_str("RHS\n");
    for (row, scale) in model.constraints().iter().zip(&row_scales) {
        if !row.rhs.is_zero() {
            writeln!(out, " rhs {} {}", row.name, decimal(&(&row.rhs * scale))).unwrap();
        }
    }

    out.push_str("BOUNDS\n");
    for var in model.variables() {
        let name = &var.name;
        let zero = Rational::zero();
        let one = Rational::one();
        match (&var.lower, &var.upper) {
            (Some(lo), Some(hi)) if var.kind == VarKind::Binary && *lo == zero && *hi == one => {
                writeln!(out, " BV bnd {name}").unwrap();
            }
            (None, None) => writeln!(out, " FR bnd {name}").unwrap(),
            (lo, hi) => {
                let (lo_kind, up_kind) = if var.kind == VarKind::Continuous { ("LO", "UP") } else { ("LI", "UI") };
                match lo {
                    None => writeln!(out, " MI bnd {name}").unwrap(),
                    Some(lo) if lo.is_zero() && var.kind == VarKind::Continuous => {}
                    Some(lo) => writeln!(out, " {lo_kind} bnd {name} {}", bound(lo, name)?).unwrap(),
                }
                match hi {
                    None if var.kind != VarKind::Continuous => writeln!(out, " PL bnd {name}").unwrap(),
                    None => {}
                    Some(hi) => writeln!(out, " {up_kind} bnd {name} {}", bound(hi, name)?).unwrap(),
                }
            }
        }
    }
    out.push_str("ENDATA\n");
    Ok(out)
}

pub fn write_model_mps(model: &Model, path: &Path) -> Result<()> {
    std::fs::write(path, model_to_mps(model)?)?;
    Ok(())
}
