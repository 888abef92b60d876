//! Reference closed forms for the rolling disk's constrained
//! connection symbols, and a structured comparison against the symbols
//! computed here.
//!
//! The reference table lists sixteen entries `Γ^k_{φ j}`. It does not agree
//! with the computed symbols, so the comparison is reported, never asserted.

use std::collections::BTreeMap;

use serde::Serialize;

use super::SystemSpec;
use crate::connections::{christoffel_of, ConnectionKind};
use crate::error::{Error, Result};
use crate::geometry::ChartSpec;

const L: &str = "(-I + J*m*cos(phi)^2 - m*sin(phi)^2 + m*sin(phi)*cos(phi))";
const LP: &str = "(-2*J*m*sin(phi)*cos(phi) - 2*m*sin(phi)*cos(phi) + m*(cos(phi)^2 - sin(phi)^2))";

/// `(k, j, template)` for `Γ^k_{φ j}` with `L` and `L'` as `{L}` / `{LP}`.
/// Lines printed as continuations of an entry are summed into it.
const TABLE: [(usize, usize, &str); 16] = [
    (0, 0, "2*J*m*sin(phi)*cos(phi)/{L} - (I*J + J*m*sin(phi)^2)*{LP}/{L}^2"),
    (1, 0, "J*m*(sin(phi)^2 - cos(phi)^2)/{L} + J*m*sin(phi)*cos(phi)*{LP}/{L}^2"),
    (2, 0, "J*m*sin(phi)/{L} + J*m*cos(phi)*{LP}/{L}^2"),
    (
        3,
        0,
        "m^2*(2*sin(phi)*cos(phi) + sin(phi)^2 - cos(phi)^2)/{L} \
         - m*(I + m*sin(phi)^2 - m*sin(phi)*cos(phi))*{LP}/{L}^2",
    ),
    (0, 1, "J*m*(sin(phi)^2 - cos(phi)^2)/{L} + (I - J*m*sin(phi)*cos(phi))*{LP}/{L}^2"),
    (1, 1, "-2*J*m*sin(phi)*cos(phi)/{L} + (-I + J*m*cos(phi)^2)*{LP}/{L}^2"),
    (
        2,
        1,
        "2*J*m^2*sin(phi)^2*cos(phi)/(I*{L}) \
         - (-I*m + J*m^2*cos(phi)^2)*cos(phi)/(I*{L}) \
         - (-I*m + J*m^2*cos(phi)^2)*{LP}*sin(phi)/(I*{L}^2) \
         + (I*m - J*m^2*sin(phi)*cos(phi))*sin(phi)/(I*{L}) \
         - (I*m - J*m^2*sin(phi)*cos(phi))*{LP}*cos(phi)/(I*{L}^2) \
         - (J*m^2*sin(phi)^2 - J*m^2*cos(phi)^2)*cos(phi)/(I*{L})",
    ),
    (
        3,
        1,
        "(J*m^2*cos(phi)^2 - J*m^2*sin(phi)*cos(phi))*{LP}/(J*{L}^2) \
         + m^2*(sin(phi)^2 - cos(phi)^2 - 2*sin(phi)*cos(phi))/{L}",
    ),
    (0, 2, "(I*J*sin(phi) - I*cos(phi))/{L} + (-I*J*cos(phi) - I*sin(phi))*{LP}/{L}^2"),
    (1, 2, "I*cos(phi)/{L} + I*{LP}*sin(phi)/{L}^2"),
    (
        2,
        2,
        "-(2 + 2*J)*m*sin(phi)*cos(phi)/{L} - m*{LP}*sin(phi)^2/{L}^2 \
         + m*(cos(phi)^2 - sin(phi)^2)/{L} + (J*m*cos(phi) + m*sin(phi))*{LP}*cos(phi)/{L}^2",
    ),
    (
        3,
        2,
        "I*m*cos(phi)/(J*{L}) + I*m*{LP}*sin(phi)/(J*{L}^2) + (I*J*m*sin(phi) - I*m*cos(phi))/(J*{L}) \
         + (-I*J*m*cos(phi) - I*m*sin(phi))*{LP}/(J*{L}^2)",
    ),
    (0, 3, "-2*J*sin(phi)*cos(phi)/{L} + (-I*J - J*m*sin(phi)^2)*{LP}/(m*{L}^2)"),
    (1, 3, "J*(cos(phi)^2 - sin(phi)^2)/{L} + J*{LP}*sin(phi)*cos(phi)/{L}^2"),
    (
        2,
        3,
        "J*m*sin(phi)^3/(I*{L}) - J*m*{LP}*sin(phi)^2*cos(phi)/(I*{L}^2) \
         + (-I*J - J*m*sin(phi)^2)*sin(phi)/(I*{L}) - (-I*J - J*m*sin(phi)^2)*{LP}*cos(phi)/(I*{L}^2)",
    ),
    (
        3,
        3,
        "-m*sin(phi)^2/{L} - 2*m*sin(phi)*cos(phi)/{L} + m*cos(phi)^2/{L} \
         + m*{LP}*sin(phi)*cos(phi)/{L}^2 + (-I*J - J*m*sin(phi)^2)*{LP}/(J*{L}^2)",
    ),
];

/// Index of the heading angle `φ` in the disk chart.
const PHI: usize = 3;
const NAMES: [&str; 4] = ["x", "y", "theta", "phi"];
/// Entries closer than this count as agreeing.
pub const AGREEMENT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Serialize)]
pub struct DiffEntry {
    pub upper: &'static str,
    pub lower: [&'static str; 2],
    pub computed: f64,
    /// `None` when the reference table has no entry at this index.
    pub printed: Option<f64>,
    pub abs_diff: f64,
    pub agrees: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct DiffReport {
    pub point: Vec<f64>,
    pub parameters: BTreeMap<String, f64>,
    pub entries: Vec<DiffEntry>,
    pub agreeing: usize,
    pub total: usize,
    pub max_abs_diff: f64,
}

fn disk_parameters(system: &SystemSpec) -> Result<(f64, f64, f64)> {
    let chart = &system.chart;
    let ok = chart.coordinates() == NAMES;
    match (ok, system.parameter("m"), system.parameter("I"), system.parameter("J")) {
        (true, Some(m), Some(i), Some(j)) => Ok((m, i, j)),
        _ => Err(Error::InvalidSettings(
            "the reference table applies only to the rolling disk (coordinates x, y, theta, phi; parameters m, I, J)"
                .into(),
        )),
    }
}

/// Reference values `(k, j, Γ^k_{φ j})` at heading `phi`.
pub fn printed_symbols(m: f64, i: f64, j: f64, phi: f64) -> Result<Vec<(usize, usize, f64)>> {
    let chart = ChartSpec::new(
        vec!["phi".into()],
        [("m", m), ("I", i), ("J", j)].iter().map(|(k, v)| (k.to_string(), *v)).collect(),
    )?;
    TABLE
        .iter()
        .map(|(k, jj, template)| {
            let src = template.replace("{LP}", LP).replace("{L}", L);
            let expr = chart.parse_configuration(&src, "reference disk symbol")?;
            Ok((*k, *jj, expr.eval(&[phi], &[])?))
        })
        .collect()
}

/// Compare computed constrained symbols with the reference table at `q`.
/// Every entry either side reports as nonzero is listed.
pub fn diff_against_printed(system: &SystemSpec, q: &[f64]) -> Result<DiffReport> {
    let (m, i, j) = disk_parameters(system)?;
    let gamma = christoffel_of(system, q, ConnectionKind::Constrained)?;
    let printed = printed_symbols(m, i, j, q[PHI])?;
    let lookup = |k: usize, a: usize, b: usize| {
        if a != PHI {
            return None;
        }
        printed.iter().find(|(pk, pj, _)| *pk == k && *pj == b).map(|(_, _, v)| *v)
    };
    let mut entries = Vec::new();
    for (k, a, b, computed) in gamma.entries() {
        let reference = lookup(k, a, b);
        if reference.is_none() && computed.abs() <= AGREEMENT_TOL {
            continue;
        }
        let abs_diff = (computed - reference.unwrap_or(0.0)).abs();
        entries.push(DiffEntry {
            upper: NAMES[k],
            lower: [NAMES[a], NAMES[b]],
            computed,
            printed: reference,
            abs_diff,
            agrees: abs_diff <= AGREEMENT_TOL,
        });
    }
    let agreeing = entries.iter().filter(|e| e.agrees).count();
    Ok(DiffReport {
        point: q.to_vec(),
        parameters: system.chart.parameters().clone(),
        total: entries.len(),
        agreeing,
        max_abs_diff: entries.iter().map(|e| e.abs_diff).fold(0.0, f64::max),
        entries,
    })
}
