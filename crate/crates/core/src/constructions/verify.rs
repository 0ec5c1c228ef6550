//! Stand-alone checker for magic rectangle sets.
//!
//! Deliberately does its own residue arithmetic from the group's moduli and
//! shares nothing with the constructors.

use std::collections::HashSet;
use std::fmt;

use serde::Serialize;

use super::MagicRectangleSet;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MrsFailure {
    pub kind: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rectangle: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub row: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub column: Option<usize>,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MrsReport {
    pub valid: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<MrsFailure>,
}

impl MrsReport {
    pub fn is_valid(&self) -> bool {
        self.valid
    }

    pub fn kind(&self) -> Option<&'static str> {
        self.failure.as_ref().map(|f| f.kind)
    }
}

impl fmt::Display for MrsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.failure {
            None => write!(f, "valid"),
            Some(fail) => {
                write!(f, "{}", fail.kind)?;
                if let Some(s) = fail.rectangle {
                    write!(f, " at rectangle {s}")?;
                }
                if let Some(r) = fail.row {
                    write!(f, " row {r}")?;
                }
                if let Some(c) = fail.column {
                    write!(f, " column {c}")?;
                }
                write!(f, ": {}", fail.detail)
            }
        }
    }
}

fn fail(
    kind: &'static str,
    rectangle: Option<usize>,
    row: Option<usize>,
    column: Option<usize>,
    detail: String,
) -> MrsReport {
    MrsReport {
        valid: false,
        failure: Some(MrsFailure {
            kind,
            rectangle,
            row,
            column,
            detail,
        }),
    }
}

fn accumulate(acc: &mut [u64], x: &[u64], moduli: &[u64]) {
    for ((a, v), m) in acc.iter_mut().zip(x).zip(moduli) {
        *a = (*a + v) % m;
    }
}

fn times(k: usize, x: &[u64], moduli: &[u64]) -> Vec<u64> {
    x.iter()
        .zip(moduli)
        .map(|(v, m)| ((k as u128 * *v as u128) % *m as u128) as u64)
        .collect()
}

fn well_formed(x: &[u64], moduli: &[u64]) -> bool {
    x.len() == moduli.len() && x.iter().zip(moduli).all(|(v, m)| v < m)
}

/// Checks the partition property, both constant sums and `a·ω = b·δ`.
/// The report points at the first failing rectangle/row/column.
pub fn verify_mrs(mrs: &MagicRectangleSet) -> MrsReport {
    let moduli = mrs.group.moduli();
    let order: u64 = moduli.iter().product();
    let (a, b, c) = (mrs.a, mrs.b, mrs.c);

    if (a * b * c) as u64 != order {
        return fail(
            "shape",
            None,
            None,
            None,
            format!("{a}x{b}x{c} does not match group order {order}"),
        );
    }
    if mrs.rectangles.len() != c {
        return fail(
            "shape",
            None,
            None,
            None,
            format!("expected {c} rectangles, found {}", mrs.rectangles.len()),
        );
    }
    for (s, rect) in mrs.rectangles.iter().enumerate() {
        if rect.len() != a {
            return fail("shape", Some(s), None, None, format!("expected {a} rows"));
        }
        for (i, row) in rect.iter().enumerate() {
            if row.len() != b {
                return fail("shape", Some(s), Some(i), None, format!("expected {b} columns"));
            }
        }
    }
    for (name, x) in [("omega", &mrs.omega), ("delta", &mrs.delta)] {
        if !well_formed(&x.0, moduli) {
            return fail("entry", None, None, None, format!("{name} {x} is not a group element"));
        }
    }

    let mut seen: HashSet<&[u64]> = HashSet::with_capacity(order as usize);
    for (s, rect) in mrs.rectangles.iter().enumerate() {
        for (i, row) in rect.iter().enumerate() {
            for (j, x) in row.iter().enumerate() {
                if !well_formed(&x.0, moduli) {
                    return fail("entry", Some(s), Some(i), Some(j), format!("{x} is not a group element"));
                }
                if !seen.insert(&x.0) {
                    return fail(
                        "element coverage",
                        Some(s),
                        Some(i),
                        Some(j),
                        format!("{x} appears more than once"),
                    );
                }
            }
        }
    }

    for (s, rect) in mrs.rectangles.iter().enumerate() {
        for (i, row) in rect.iter().enumerate() {
            let mut acc = vec![0; moduli.len()];
            for x in row {
                accumulate(&mut acc, &x.0, moduli);
            }
            if acc != mrs.omega.0 {
                return fail(
                    "row sum",
                    Some(s),
                    Some(i),
                    None,
                    format!("sums to {acc:?}, expected {}", mrs.omega),
                );
            }
        }
        for j in 0..b {
            let mut acc = vec![0; moduli.len()];
            for row in rect {
                accumulate(&mut acc, &row[j].0, moduli);
            }
            if acc != mrs.delta.0 {
                return fail(
                    "column sum",
                    Some(s),
                    None,
                    Some(j),
                    format!("sums to {acc:?}, expected {}", mrs.delta),
                );
            }
        }
    }

    if times(a, &mrs.omega.0, moduli) != times(b, &mrs.delta.0, moduli) {
        return fail(
            "forced identity",
            None,
            None,
            None,
            format!("{a}·omega != {b}·delta"),
        );
    }
    MrsReport {
        valid: true,
        failure: None,
    }
}
