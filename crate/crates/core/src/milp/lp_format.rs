//! Plain-text dump of a [`MilpModel`] in an LP-style layout, for cross-checking
//! with external solvers.
//!
//! ```text
//! \ <comment>
//! Minimize
//!  obj: <coef> <var> + <coef> <var> ... + <constant>
//! Subject To
//!  <row-name>: <coef> <var> ... <= | = | >= <rhs>
//! Bounds
//!  <lower> <= <var> <= <upper>          (-inf / +inf for open ends)
//! Binaries
//!  <var> ...
//! End
//! ```
//!
//! Variable and row names are the model's names with every character outside
//! `[A-Za-z0-9_.]` replaced by `_`, prefixed with their index (`x12_theta_0_3`)
//! so they stay unique. Numbers use the shortest round-trip decimal form.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use super::{MilpModel, Relation, VarId, VarKind};
use crate::error::{Error, Result};

fn sanitize(prefix: char, idx: usize, name: &str) -> String {
    let clean: String = name
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' || c == '.' { c } else { '_' })
        .collect();
    format!("{prefix}{idx}_{clean}")
}

fn bound(v: f64) -> String {
    if v == f64::INFINITY {
        "+inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{v}")
    }
}

fn linear(out: &mut String, names: &[String], terms: &[(VarId, f64)]) {
    for (k, &(VarId(j), c)) in terms.iter().enumerate() {
        if k == 0 {
            let _ = write!(out, " {c} {}", names[j]);
        } else if c < 0.0 {
            let _ = write!(out, " - {} {}", -c, names[j]);
        } else {
            let _ = write!(out, " + {c} {}", names[j]);
        }
    }
    if terms.is_empty() {
        out.push_str(" 0");
    }
}

pub fn to_lp_string(model: &MilpModel) -> String {
    let names: Vec<String> = model
        .variables
        .iter()
        .enumerate()
        .map(|(j, v)| sanitize('x', j, &v.name))
        .collect();
    let mut out = String::new();
    out.push_str("\\ gasdr model dump\nMinimize\n obj:");
    linear(&mut out, &names, &model.objective);
    if model.objective_constant != 0.0 {
        let _ = write!(out, " + {}", model.objective_constant);
    }
    out.push_str("\nSubject To\n");
    for (i, c) in model.constraints.iter().enumerate() {
        let _ = write!(out, " {}:", sanitize('r', i, &c.name));
        linear(&mut out, &names, &c.terms);
        let rel = match c.relation {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        };
        let _ = writeln!(out, " {rel} {}", c.rhs);
    }
    out.push_str("Bounds\n");
    for (j, v) in model.variables.iter().enumerate() {
        let _ = writeln!(out, " {} <= {} <= {}", bound(v.lower), names[j], bound(v.upper));
    }
    out.push_str("Binaries\n");
    for (j, v) in model.variables.iter().enumerate() {
        if v.kind == VarKind::Binary {
            let _ = writeln!(out, " {}", names[j]);
        }
    }
    out.push_str("End\n");
    out
}

pub fn write_lp(model: &MilpModel, path: &Path) -> Result<()> {
    let io = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut f = std::fs::File::create(path).map_err(io)?;
    f.write_all(to_lp_string(model).as_bytes()).map_err(io)
}
