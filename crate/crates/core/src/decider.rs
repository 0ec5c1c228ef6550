//! Existence verdicts for `MRS_Γ(a, b; c)`.
//!
//! Verdict reasons are short tags naming the result that settles the instance:
//!
//! | tag | meaning |
//! |---|---|
//! | `trivial` | the one-element group, a single 1×1 rectangle |
//! | `degenerate` | a side of length 1 with more than one element |
//! | `glowneIWOCA` | both sides even: exists for every group |
//! | `odd`, `codd` | parity obstruction for groups with exactly one involution |
//! | `main2` | odd primes divide both sides and Γ is in 𝒢 |
//! | `main3` | single rectangle, odd × 2^α, Γ in 𝒢 |
//! | `a22` | odd × 2^α set satisfying one of the 2-part conditions |
//! | `p22_` | `Z_{2k+1} × (Z_2)^m` with shape `(2k+1) × 2`, `c = 2^{m−1}`: none |
//! | `open-case-1/2/3` | the three unresolved families |

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{groups_up_to, AbelianGroup};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Status {
    Exists,
    NotExists,
    Open,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Status::Exists => "Exists",
            Status::NotExists => "NotExists",
            Status::Open => "Open",
        };
        f.write_str(s)
    }
}

/// Which constructor builds an `Exists` instance.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Route {
    Trivial,
    EvenEven,
    BothOddFactor,
    OddPowerOfTwo,
}

impl fmt::Display for Route {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Route::Trivial => "trivial",
            Route::EvenEven => "even-even",
            Route::BothOddFactor => "both-odd-factor",
            Route::OddPowerOfTwo => "odd-power-of-two",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExistenceVerdict {
    pub status: Status,
    pub reason: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub route: Option<Route>,
}

impl ExistenceVerdict {
    fn exists(reason: &str, route: Route) -> Self {
        ExistenceVerdict {
            status: Status::Exists,
            reason: reason.into(),
            route: Some(route),
        }
    }

    fn none(reason: &str) -> Self {
        ExistenceVerdict {
            status: Status::NotExists,
            reason: reason.into(),
            route: None,
        }
    }

    fn open(case: u8) -> Self {
        ExistenceVerdict {
            status: Status::Open,
            reason: format!("open-case-{case}"),
            route: None,
        }
    }

    /// The open family (1, 2 or 3) for `Open` verdicts.
    pub fn open_case(&self) -> Option<u8> {
        self.reason.strip_prefix("open-case-")?.parse().ok()
    }
}

fn has_odd_prime_factor(n: usize) -> bool {
    n % 2 == 0 && n >> n.trailing_zeros() > 1 || n % 2 == 1 && n > 1
}

pub fn decide(a: usize, b: usize, c: usize, gamma: &AbelianGroup) -> Result<ExistenceVerdict> {
    if a == 0 || b == 0 || c == 0 {
        return Err(Error::MalformedShape(format!("{a}x{b}x{c}")));
    }
    let product = (a * b * c) as u64;
    if product != gamma.order() {
        return Err(Error::OrderMismatch {
            product,
            order: gamma.order(),
        });
    }
    if gamma.order() == 1 {
        return Ok(ExistenceVerdict::exists("trivial", Route::Trivial));
    }
    if a == 1 || b == 1 {
        return Ok(ExistenceVerdict::none("degenerate"));
    }
    if a % 2 == 0 && b % 2 == 0 {
        return Ok(ExistenceVerdict::exists("glowneIWOCA", Route::EvenEven));
    }
    if gamma.involution_count() == 1 {
        let evens = [a, b, c].iter().filter(|&&x| x % 2 == 0).count();
        return Ok(ExistenceVerdict::none(if evens == 1 { "odd" } else { "codd" }));
    }
    // Γ is in 𝒢 from here on, and at least one side is odd.
    let (odd_side, even_side) = if a % 2 == 1 { (a, b) } else { (b, a) };
    debug_assert!(odd_side % 2 == 1);
    if even_side % 2 == 1 || has_odd_prime_factor(even_side) {
        return Ok(ExistenceVerdict::exists("main2", Route::BothOddFactor));
    }
    let exps = gamma.two_exponents();
    let k = exps.len();
    if even_side >= 4 {
        if c == 1 {
            return Ok(ExistenceVerdict::exists("main3", Route::OddPowerOfTwo));
        }
        let holds = exps[0] > 1 || (k >= 3 && exps[2] > 1) || k > 3 || c % 2 == 1;
        if holds {
            return Ok(ExistenceVerdict::exists("a22", Route::OddPowerOfTwo));
        }
        return Ok(ExistenceVerdict::open(if k == 3 { 2 } else { 3 }));
    }
    // even side is 2
    if c % 2 == 1 {
        return Ok(ExistenceVerdict::none("odd"));
    }
    let elementary_two_part = exps.iter().all(|&e| e == 1);
    if elementary_two_part && c == 1 << (k - 1) && gamma.odd_part().is_cyclic() {
        return Ok(ExistenceVerdict::none("p22_"));
    }
    Ok(ExistenceVerdict::open(1))
}

/// All `(a, b, c)` with `a, b >= 2` and `abc = n`, by `a` then `b`.
pub fn shapes(n: u64) -> Vec<(usize, usize, usize)> {
    let n = n as usize;
    let mut out = Vec::new();
    for a in 2..=n {
        if n % a != 0 {
            continue;
        }
        for b in 2..=n / a {
            if (n / a) % b == 0 {
                out.push((a, b, n / (a * b)));
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    pub group: AbelianGroup,
    pub a: usize,
    pub b: usize,
    pub c: usize,
    pub verdict: ExistenceVerdict,
}

/// Verdicts for every canonical group of order at most `max_order` and every shape.
pub fn existence_table(max_order: u64) -> Vec<Instance> {
    let mut out = Vec::new();
    for group in groups_up_to(max_order) {
        for (a, b, c) in shapes(group.order()) {
            let verdict = decide(a, b, c, &group).expect("shape matches order");
            out.push(Instance {
                group: group.clone(),
                a,
                b,
                c,
                verdict,
            });
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OpenCase {
    pub group: AbelianGroup,
    pub a: usize,
    pub b: usize,
    pub c: usize,
    pub case_id: u8,
}

pub fn open_case_catalog(max_order: u64) -> Vec<OpenCase> {
    existence_table(max_order)
        .into_iter()
        .filter_map(|inst| {
            let case_id = inst.verdict.open_case()?;
            Some(OpenCase {
                group: inst.group,
                a: inst.a,
                b: inst.b,
                c: inst.c,
                case_id,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(spec: &str) -> AbelianGroup {
        AbelianGroup::parse(spec).unwrap()
    }

    fn verdict(a: usize, b: usize, c: usize, spec: &str) -> ExistenceVerdict {
        decide(a, b, c, &g(spec)).unwrap()
    }

    #[test]
    fn examples() {
        let v = verdict(3, 2, 1, "Z6");
        assert_eq!((v.status, v.reason.as_str()), (Status::NotExists, "odd"));
        let v = verdict(3, 2, 2, "Z3xZ2xZ2");
        assert_eq!((v.status, v.reason.as_str()), (Status::NotExists, "p22_"));
        let v = verdict(3, 4, 10, "Z15xZ2xZ2xZ2");
        assert_eq!((v.status, v.open_case()), (Status::Open, Some(2)));
    }

    #[test]
    fn parity_obstructions() {
        assert_eq!(verdict(2, 3, 2, "Z12").reason, "codd");
        assert_eq!(verdict(3, 3, 2, "Z18").reason, "odd");
        assert_eq!(verdict(2, 2, 3, "Z12").status, Status::Exists);
    }

    #[test]
    fn open_families() {
        assert_eq!(verdict(3, 2, 4, "Z3xZ2xZ4").open_case(), Some(1));
        assert_eq!(verdict(3, 4, 2, "Z3xZ2xZ4").open_case(), Some(3));
        assert_eq!(verdict(3, 4, 2, "Z3xZ2xZ2xZ2").open_case(), Some(2));
        assert_eq!(verdict(3, 2, 4, "Z3xZ2xZ2xZ2").reason, "p22_");
        // non-cyclic odd part is left open rather than ruled out
        assert_eq!(verdict(9, 2, 2, "Z3xZ3xZ2xZ2").open_case(), Some(1));
        assert_eq!(verdict(3, 4, 3, "Z9xZ2xZ2").reason, "a22");
        assert_eq!(verdict(3, 8, 1, "Z3xZ2xZ4").reason, "main3");
    }

    #[test]
    fn degenerate_and_errors() {
        assert_eq!(verdict(1, 4, 1, "Z4").reason, "degenerate");
        assert_eq!(verdict(2, 1, 1, "Z2").reason, "degenerate");
        assert_eq!(
            decide(1, 1, 1, &AbelianGroup::trivial()).unwrap().route,
            Some(Route::Trivial)
        );
        assert!(matches!(decide(2, 2, 2, &g("Z4")), Err(Error::OrderMismatch { .. })));
        assert!(decide(0, 2, 2, &g("Z4")).is_err());
    }

    #[test]
    fn catalog_examples() {
        assert!(open_case_catalog(6).is_empty());
        let twelve = open_case_catalog(12);
        assert!(twelve.is_empty());
        let cat = open_case_catalog(24);
        assert!(cat
            .iter()
            .any(|o| o.group == g("Z3xZ2xZ4") && (o.a, o.b, o.c, o.case_id) == (3, 2, 4, 1)));
    }

    #[test]
    fn shapes_of_twelve() {
        assert_eq!(
            shapes(12),
            vec![(2, 2, 3), (2, 3, 2), (2, 6, 1), (3, 2, 2), (3, 4, 1), (4, 3, 1), (6, 2, 1)]
        );
    }

    #[test]
    fn verdict_json() {
        let v = verdict(3, 2, 1, "Z6");
        assert_eq!(
            serde_json::to_string(&v).unwrap(),
            r#"{"status":"NotExists","reason":"odd"}"#
        );
    }
}
