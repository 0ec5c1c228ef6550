//! Finite Abelian groups in canonical primary form.
//!
//! A group is stored as a direct product of cyclic factors `Z_{p^k}`, sorted by
//! `(p, k)` ascending. Two groups are equal exactly when they are isomorphic.
//! Elements are residue vectors aligned with the canonical factors; the
//! lexicographic order on those vectors is the "element order" used everywhere
//! else in the crate (enumeration, indices, coset transversals).
//!
//! Subgroups built here are always *diagonal*: a product of cyclic subgroups of
//! the individual factors. Every subgroup order and every requested shape that
//! embeds at all can be realised that way, which keeps membership, projection
//! and transversals trivial to compute.

use std::fmt;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Returns the prime factorisation of `n` as `(prime, exponent)` pairs.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn is_prime(n: u64) -> bool {
    n >= 2 && factorize(n) == [(n, 1)]
}

/// `Some((p, k))` when `n = p^k` with `k >= 1`.
pub fn prime_power(n: u64) -> Option<(u64, u32)> {
    match factorize(n).as_slice() {
        [(p, k)] => Some((*p, *k)),
        _ => None,
    }
}

pub fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// An element of an [`AbelianGroup`], one reduced residue per canonical factor.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GroupElement(pub Vec<u64>);

impl GroupElement {
    pub fn coords(&self) -> &[u64] {
        &self.0
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

#[derive(Clone, Debug)]
pub struct AbelianGroup {
    moduli: Vec<u64>,
    primes: Vec<u64>,
    exponents: Vec<u32>,
    strides: Vec<u64>,
    order: u64,
    /// display position -> canonical factor index
    display: Vec<usize>,
}

impl PartialEq for AbelianGroup {
    fn eq(&self, other: &Self) -> bool {
        self.moduli == other.moduli
    }
}

impl Eq for AbelianGroup {}

impl Hash for AbelianGroup {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.moduli.hash(state);
    }
}

impl fmt::Display for AbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.moduli.is_empty() {
            return write!(f, "Z1");
        }
        let parts: Vec<String> = self.moduli.iter().map(|m| format!("Z{m}")).collect();
        write!(f, "{}", parts.join("x"))
    }
}

impl AbelianGroup {
    /// The trivial group.
    pub fn trivial() -> Self {
        Self::build(Vec::new(), Vec::new())
    }

    /// Builds a group from already-canonical moduli.
    pub fn from_canonical(moduli: &[u64]) -> Result<Self> {
        let mut keys = Vec::with_capacity(moduli.len());
        for &m in moduli {
            let (p, k) = prime_power(m).ok_or_else(|| Error::NotCanonical(moduli.to_vec()))?;
            keys.push((p, k));
        }
        if keys.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::NotCanonical(moduli.to_vec()));
        }
        Ok(Self::build(moduli.to_vec(), (0..moduli.len()).collect()))
    }

    /// Builds a group from arbitrary cyclic factors, splitting composite ones by CRT.
    /// The display order follows the factors as given.
    pub fn from_cyclic_factors(factors: &[u64]) -> Result<Self> {
        // (prime, exponent, display position)
        let mut pieces = Vec::new();
        for &m in factors {
            if m < 2 {
                return Err(Error::FactorTooSmall(m));
            }
            for (p, k) in factorize(m) {
                pieces.push((p, k, pieces.len()));
            }
        }
        let mut sorted = pieces.clone();
        sorted.sort();
        let moduli: Vec<u64> = sorted.iter().map(|&(p, k, _)| p.pow(k)).collect();
        let mut display = vec![0; pieces.len()];
        for (canon, &(_, _, pos)) in sorted.iter().enumerate() {
            display[pos] = canon;
        }
        Ok(Self::build(moduli, display))
    }

    /// Parses `Zm(xZm)*`, e.g. `Z4xZ2xZ3`.
    pub fn parse(spec: &str) -> Result<Self> {
        let malformed = || Error::MalformedSpec(spec.to_string());
        let trimmed = spec.trim();
        if trimmed.is_empty() {
            return Err(malformed());
        }
        let mut factors = Vec::new();
        for part in trimmed.split(['x', 'X', '*']) {
            let digits = part.trim().strip_prefix('Z').ok_or_else(malformed)?;
            if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
                return Err(malformed());
            }
            let m: u64 = digits.parse().map_err(|_| malformed())?;
            factors.push(m);
        }
        Self::from_cyclic_factors(&factors)
    }

    fn build(moduli: Vec<u64>, display: Vec<usize>) -> Self {
        let (primes, exponents) = moduli
            .iter()
            .map(|&m| prime_power(m).expect("prime power modulus"))
            .unzip();
        let mut strides = vec![1u64; moduli.len()];
        for t in (0..moduli.len().saturating_sub(1)).rev() {
            strides[t] = strides[t + 1] * moduli[t + 1];
        }
        let order = moduli.iter().product();
        AbelianGroup {
            moduli,
            primes,
            exponents,
            strides,
            order,
            display,
        }
    }

    pub fn moduli(&self) -> &[u64] {
        &self.moduli
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn rank(&self) -> usize {
        self.moduli.len()
    }

    pub fn prime_of(&self, factor: usize) -> u64 {
        self.primes[factor]
    }

    pub fn exponent_of(&self, factor: usize) -> u32 {
        self.exponents[factor]
    }

    /// Canonical factor indices in the order the group was written by the user.
    pub fn display_order(&self) -> &[usize] {
        &self.display
    }

    /// Exponents `k` of the factors `Z_{2^k}`, ascending.
    pub fn two_exponents(&self) -> Vec<u32> {
        (0..self.rank())
            .filter(|&t| self.primes[t] == 2)
            .map(|t| self.exponents[t])
            .collect()
    }

    /// The Sylow 2-subgroup as an abstract group.
    pub fn two_part(&self) -> AbelianGroup {
        let m: Vec<u64> = self.moduli.iter().copied().filter(|&m| m % 2 == 0).collect();
        Self::build(m.clone(), (0..m.len()).collect())
    }

    /// The odd-order Hall subgroup as an abstract group.
    pub fn odd_part(&self) -> AbelianGroup {
        let m: Vec<u64> = self.moduli.iter().copied().filter(|&m| m % 2 == 1).collect();
        Self::build(m.clone(), (0..m.len()).collect())
    }

    pub fn is_cyclic(&self) -> bool {
        self.primes.windows(2).all(|w| w[0] != w[1])
    }

    /// True when every factor has exponent 1 for its prime, i.e. the group is
    /// a product of elementary abelian groups.
    pub fn is_elementary(&self) -> bool {
        self.exponents.iter().all(|&k| k == 1)
    }

    pub fn zero(&self) -> GroupElement {
        GroupElement(vec![0; self.rank()])
    }

    pub fn check(&self, x: &GroupElement) -> Result<()> {
        if x.0.len() != self.rank() {
            return Err(Error::LengthMismatch {
                expected: self.rank(),
                got: x.0.len(),
            });
        }
        if x.0.iter().zip(&self.moduli).any(|(c, m)| c >= m) {
            return Err(Error::NotReduced(x.0.clone()));
        }
        Ok(())
    }

    pub fn contains(&self, x: &GroupElement) -> bool {
        self.check(x).is_ok()
    }

    pub fn element(&self, coords: &[u64]) -> Result<GroupElement> {
        let x = GroupElement(coords.to_vec());
        self.check(&x)?;
        Ok(x)
    }

    pub fn add(&self, x: &GroupElement, y: &GroupElement) -> GroupElement {
        debug_assert_eq!(x.0.len(), self.rank());
        debug_assert_eq!(y.0.len(), self.rank());
        GroupElement(
            x.0.iter()
                .zip(&y.0)
                .zip(&self.moduli)
                .map(|((a, b), m)| (a + b) % m)
                .collect(),
        )
    }

    pub fn neg(&self, x: &GroupElement) -> GroupElement {
        GroupElement(
            x.0.iter()
                .zip(&self.moduli)
                .map(|(a, m)| (m - a) % m)
                .collect(),
        )
    }

    pub fn sub(&self, x: &GroupElement, y: &GroupElement) -> GroupElement {
        self.add(x, &self.neg(y))
    }

    /// `k·x`, with negative `k` meaning `|k|·(−x)`.
    pub fn scale(&self, k: i64, x: &GroupElement) -> GroupElement {
        GroupElement(
            x.0.iter()
                .zip(&self.moduli)
                .map(|(&a, &m)| {
                    let k = k.rem_euclid(m as i64) as u128;
                    ((k * a as u128) % m as u128) as u64
                })
                .collect(),
        )
    }

    pub fn sum<'a, I>(&self, items: I) -> GroupElement
    where
        I: IntoIterator<Item = &'a GroupElement>,
    {
        items
            .into_iter()
            .fold(self.zero(), |acc, x| self.add(&acc, x))
    }

    /// Checked addition for untrusted operands.
    pub fn try_add(&self, x: &GroupElement, y: &GroupElement) -> Result<GroupElement> {
        self.check(x)?;
        self.check(y)?;
        Ok(self.add(x, y))
    }

    /// Position of `x` in element order.
    pub fn index_of(&self, x: &GroupElement) -> usize {
        x.0.iter()
            .zip(&self.strides)
            .map(|(c, s)| c * s)
            .sum::<u64>() as usize
    }

    pub fn element_at(&self, mut idx: usize) -> GroupElement {
        let mut coords = vec![0; self.rank()];
        for t in 0..self.rank() {
            let s = self.strides[t] as usize;
            coords[t] = (idx / s) as u64;
            idx %= s;
        }
        GroupElement(coords)
    }

    pub fn elements(&self) -> impl Iterator<Item = GroupElement> + '_ {
        (0..self.order as usize).map(move |i| self.element_at(i))
    }

    /// Image of the integer `v` under `Z -> Γ`, `1 ↦ (1, 1, …, 1)`.
    /// For a cyclic group this is the CRT isomorphism `Z_n ≅ Γ`.
    pub fn from_integer(&self, v: i64) -> GroupElement {
        GroupElement(
            self.moduli
                .iter()
                .map(|&m| v.rem_euclid(m as i64) as u64)
                .collect(),
        )
    }

    /// Coordinates in the user's display order.
    pub fn to_display(&self, x: &GroupElement) -> Vec<u64> {
        self.display.iter().map(|&t| x.0[t]).collect()
    }

    pub fn from_display(&self, coords: &[u64]) -> Result<GroupElement> {
        if coords.len() != self.rank() {
            return Err(Error::LengthMismatch {
                expected: self.rank(),
                got: coords.len(),
            });
        }
        let mut out = vec![0; self.rank()];
        for (pos, &t) in self.display.iter().enumerate() {
            out[t] = coords[pos];
        }
        self.element(&out)
    }

    /// Moduli in display order.
    pub fn display_moduli(&self) -> Vec<u64> {
        self.display.iter().map(|&t| self.moduli[t]).collect()
    }

    /// The group written in display order, e.g. `Z4xZ2`.
    pub fn display_spec(&self) -> String {
        if self.moduli.is_empty() {
            return "Z1".into();
        }
        self.display_moduli()
            .iter()
            .map(|m| format!("Z{m}"))
            .collect::<Vec<_>>()
            .join("x")
    }

    /// Whether `x` lies in `2Γ`.
    pub fn is_double(&self, x: &GroupElement) -> bool {
        x.0.iter()
            .zip(&self.primes)
            .all(|(c, &p)| p != 2 || c % 2 == 0)
    }

    /// Number of factors of even order.
    pub fn even_factor_count(&self) -> usize {
        self.primes.iter().filter(|&&p| p == 2).count()
    }

    /// All elements `ι ≠ 0` with `2ι = 0`, in element order.
    pub fn involutions(&self) -> Vec<GroupElement> {
        self.elements()
            .filter(|x| x.0.iter().any(|&c| c != 0) && self.scale(2, x) == self.zero())
            .collect()
    }

    /// `2^p − 1` for `p` even factors, computed from the structure.
    pub fn involution_count(&self) -> u64 {
        (1u64 << self.even_factor_count()) - 1
    }

    /// Odd order, or more than one involution.
    pub fn is_in_class_g(&self) -> bool {
        self.order % 2 == 1 || self.involution_count() >= 2
    }

    pub fn sum_of_all_elements(&self) -> GroupElement {
        // Each coordinate runs over its residues order/m times.
        GroupElement(
            self.moduli
                .iter()
                .map(|&m| {
                    let reps = (self.order / m) as u128;
                    let tri = (m as u128) * (m as u128 - 1) / 2;
                    ((reps * tri) % m as u128) as u64
                })
                .collect(),
        )
    }

    /// Diagonal subgroup of order `m`, filling the largest factors first.
    pub fn subgroup_of_order(&self, m: u64) -> Result<SubgroupEmbedding> {
        if m == 0 || self.order % m != 0 {
            return Err(Error::NotADivisor {
                divisor: m,
                order: self.order,
            });
        }
        let mut sub_exp = vec![0u32; self.rank()];
        for (p, mut e) in factorize(m) {
            let mut idx: Vec<usize> = (0..self.rank()).filter(|&t| self.primes[t] == p).collect();
            idx.sort_by_key(|&t| std::cmp::Reverse((self.exponents[t], t)));
            for t in idx {
                let take = e.min(self.exponents[t]);
                sub_exp[t] = take;
                e -= take;
            }
            debug_assert_eq!(e, 0);
        }
        Ok(SubgroupEmbedding::diagonal(self.clone(), &sub_exp))
    }

    /// Diagonal subgroup isomorphic to `shape`, or [`Error::ShapeUnavailable`].
    ///
    /// For each prime the shape's exponents, largest first, go into the group's
    /// factors of that prime, largest first.
    pub fn subgroup_with_shape(&self, shape: &AbelianGroup) -> Result<SubgroupEmbedding> {
        self.placed_subgroup(shape, true)
    }

    /// Like [`subgroup_with_shape`](Self::subgroup_with_shape), but each prime's
    /// exponents go into the smallest factors that can hold them, which keeps
    /// the subgroup a direct factor whenever the group allows it.
    pub fn subgroup_with_shape_low(&self, shape: &AbelianGroup) -> Result<SubgroupEmbedding> {
        self.placed_subgroup(shape, false)
    }

    fn placed_subgroup(&self, shape: &AbelianGroup, largest_first: bool) -> Result<SubgroupEmbedding> {
        let unavailable = || Error::ShapeUnavailable {
            shape: shape.to_string(),
            group: self.to_string(),
        };
        let mut sub_exp = vec![0u32; self.rank()];
        let mut shape_primes: Vec<u64> = shape.primes.clone();
        shape_primes.dedup();
        for p in shape_primes {
            let mut want: Vec<u32> = (0..shape.rank())
                .filter(|&t| shape.primes[t] == p)
                .map(|t| shape.exponents[t])
                .collect();
            want.sort_unstable_by(|a, b| b.cmp(a));
            let mut have: Vec<usize> = (0..self.rank()).filter(|&t| self.primes[t] == p).collect();
            have.sort_by_key(|&t| std::cmp::Reverse((self.exponents[t], t)));
            if want.len() > have.len() {
                return Err(unavailable());
            }
            if !largest_first {
                // smallest factors first, matched against the smallest wants
                want.reverse();
                have.reverse();
                let mut chosen = Vec::with_capacity(want.len());
                let mut free = have.iter().copied();
                for &w in &want {
                    let t = free
                        .by_ref()
                        .find(|&t| self.exponents[t] >= w)
                        .ok_or_else(unavailable)?;
                    chosen.push(t);
                }
                have = chosen;
            }
            for (w, &t) in want.iter().zip(&have) {
                if *w > self.exponents[t] {
                    return Err(unavailable());
                }
                sub_exp[t] = *w;
            }
        }
        Ok(SubgroupEmbedding::diagonal(self.clone(), &sub_exp))
    }

    /// Quotient by a subgroup of this group.
    pub fn quotient(&self, subgroup: &SubgroupEmbedding) -> Result<QuotientView> {
        QuotientView::new(self, subgroup)
    }
}

/// Canonical factor list built from `(modulus, tag)` pairs, dropping trivial
/// factors. Returns the group and the tag of each canonical factor.
fn canonical_with_tags(mut pieces: Vec<(u64, usize)>) -> (AbelianGroup, Vec<usize>) {
    pieces.retain(|&(m, _)| m > 1);
    pieces.sort_by_key(|&(m, tag)| {
        let (p, k) = prime_power(m).expect("prime power");
        (p, k, tag)
    });
    let moduli: Vec<u64> = pieces.iter().map(|&(m, _)| m).collect();
    let tags = pieces.iter().map(|&(_, t)| t).collect();
    let n = moduli.len();
    (AbelianGroup::build(moduli, (0..n).collect()), tags)
}

/// A subgroup `Γ₀ ≤ Γ` together with an isomorphism from its canonical form.
///
/// Only diagonal subgroups `⊕ d_t·Z_{m_t}` are represented.
#[derive(Clone, Debug)]
pub struct SubgroupEmbedding {
    parent: AbelianGroup,
    abstract_form: AbelianGroup,
    generators: Vec<GroupElement>,
    /// per parent factor: the subgroup's component is `divisors[t]·Z_{m_t}`
    divisors: Vec<u64>,
    /// abstract factor -> parent factor
    factor_map: Vec<usize>,
}

impl SubgroupEmbedding {
    fn diagonal(parent: AbelianGroup, sub_exp: &[u32]) -> Self {
        let divisors: Vec<u64> = (0..parent.rank())
            .map(|t| parent.primes[t].pow(parent.exponents[t] - sub_exp[t]))
            .collect();
        let pieces = (0..parent.rank())
            .map(|t| (parent.primes[t].pow(sub_exp[t]), t))
            .collect();
        let (abstract_form, factor_map) = canonical_with_tags(pieces);
        let generators = factor_map
            .iter()
            .map(|&t| {
                let mut g = parent.zero();
                g.0[t] = divisors[t];
                g
            })
            .collect();
        SubgroupEmbedding {
            parent,
            abstract_form,
            generators,
            divisors,
            factor_map,
        }
    }

    pub fn parent(&self) -> &AbelianGroup {
        &self.parent
    }

    pub fn abstract_form(&self) -> &AbelianGroup {
        &self.abstract_form
    }

    /// Generators aligned with the abstract form's factors.
    pub fn generators(&self) -> &[GroupElement] {
        &self.generators
    }

    pub fn order(&self) -> u64 {
        self.abstract_form.order()
    }

    pub fn contains(&self, x: &GroupElement) -> bool {
        x.0.iter().zip(&self.divisors).all(|(c, d)| c % d == 0)
    }

    /// Homomorphic injection of the abstract form into the parent.
    pub fn embed(&self, y: &GroupElement) -> GroupElement {
        let mut x = self.parent.zero();
        for (i, &t) in self.factor_map.iter().enumerate() {
            x.0[t] = y.0[i] * self.divisors[t];
        }
        x
    }

    /// Inverse of [`embed`](Self::embed) on the image.
    pub fn pull_back(&self, x: &GroupElement) -> Option<GroupElement> {
        if !self.contains(x) {
            return None;
        }
        let coords = self
            .factor_map
            .iter()
            .map(|&t| x.0[t] / self.divisors[t])
            .collect();
        Some(GroupElement(coords))
    }

    pub(crate) fn divisors(&self) -> &[u64] {
        &self.divisors
    }
}

/// `Γ/Γ₀` with a fixed transversal.
///
/// Coset `i` is the `i`-th element of the quotient's canonical form; its
/// representative is the lexicographically smallest element of the coset.
#[derive(Clone, Debug)]
pub struct QuotientView {
    parent: AbelianGroup,
    subgroup: SubgroupEmbedding,
    abstract_form: AbelianGroup,
    /// quotient factor -> parent factor
    factor_map: Vec<usize>,
    coset_reps: Vec<GroupElement>,
}

impl QuotientView {
    fn new(parent: &AbelianGroup, subgroup: &SubgroupEmbedding) -> Result<Self> {
        if subgroup.parent != *parent {
            return Err(Error::ForeignSubgroup);
        }
        let pieces = subgroup
            .divisors
            .iter()
            .enumerate()
            .map(|(t, &d)| (d, t))
            .collect();
        let (abstract_form, factor_map) = canonical_with_tags(pieces);
        let mut view = QuotientView {
            parent: parent.clone(),
            subgroup: subgroup.clone(),
            abstract_form,
            factor_map,
            coset_reps: Vec::new(),
        };
        view.coset_reps = view
            .abstract_form
            .elements()
            .map(|y| view.lift(&y))
            .collect();
        Ok(view)
    }

    pub fn parent(&self) -> &AbelianGroup {
        &self.parent
    }

    pub fn subgroup(&self) -> &SubgroupEmbedding {
        &self.subgroup
    }

    pub fn abstract_form(&self) -> &AbelianGroup {
        &self.abstract_form
    }

    pub fn coset_reps(&self) -> &[GroupElement] {
        &self.coset_reps
    }

    pub fn coset_count(&self) -> usize {
        self.coset_reps.len()
    }

    /// Image of `x` in the quotient's canonical form.
    pub fn project_element(&self, x: &GroupElement) -> GroupElement {
        let div = self.subgroup.divisors();
        GroupElement(
            self.factor_map
                .iter()
                .map(|&t| x.0[t] % div[t])
                .collect(),
        )
    }

    /// Coset index of `x`.
    pub fn project(&self, x: &GroupElement) -> usize {
        self.abstract_form.index_of(&self.project_element(x))
    }

    /// For each prime with a non-trivial quotient part: the parent factor
    /// indices of that prime and the quotient of those factors by the
    /// matching part of the subgroup.
    pub fn primary_components(&self) -> Vec<(Vec<usize>, QuotientView)> {
        let parent = &self.parent;
        let div = self.subgroup.divisors();
        let mut primes = parent.primes.clone();
        primes.dedup();
        let mut out = Vec::new();
        for p in primes {
            let idx: Vec<usize> = (0..parent.rank()).filter(|&t| parent.primes[t] == p).collect();
            if idx.iter().all(|&t| div[t] == 1) {
                continue;
            }
            let part = AbelianGroup::build(idx.iter().map(|&t| parent.moduli[t]).collect(), (0..idx.len()).collect());
            let sub_exp: Vec<u32> = idx
                .iter()
                .map(|&t| parent.exponents[t] - div[t].ilog(p))
                .collect();
            let sub = SubgroupEmbedding::diagonal(part.clone(), &sub_exp);
            let q = QuotientView::new(&part, &sub).expect("subgroup of the part");
            out.push((idx, q));
        }
        out
    }

    /// The transversal element of the coset named by a quotient element.
    pub fn lift(&self, y: &GroupElement) -> GroupElement {
        let mut x = self.parent.zero();
        for (i, &t) in self.factor_map.iter().enumerate() {
            x.0[t] = y.0[i];
        }
        x
    }
}

/// Every canonical Abelian group of order `n`.
pub fn groups_of_order(n: u64) -> Vec<AbelianGroup> {
    let mut acc: Vec<Vec<u64>> = vec![Vec::new()];
    for (p, e) in factorize(n) {
        let parts = partitions(e);
        let mut next = Vec::new();
        for prefix in &acc {
            for part in &parts {
                let mut m = prefix.clone();
                // partitions come largest-first; canonical form wants ascending
                m.extend(part.iter().rev().map(|&k| p.pow(k)));
                next.push(m);
            }
        }
        acc = next;
    }
    acc.into_iter()
        .map(|m| AbelianGroup::from_canonical(&m).expect("canonical by construction"))
        .collect()
}

/// Every canonical Abelian group with `1 <= order <= max_order`, by order.
pub fn groups_up_to(max_order: u64) -> Vec<AbelianGroup> {
    (1..=max_order).flat_map(groups_of_order).collect()
}

/// Partitions of `n` with parts in non-increasing order.
fn partitions(n: u32) -> Vec<Vec<u32>> {
    fn go(n: u32, max: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if n == 0 {
            out.push(prefix.clone());
            return;
        }
        for part in (1..=n.min(max)).rev() {
            prefix.push(part);
            go(n - part, part, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    go(n, n, &mut Vec::new(), &mut out);
    out
}
