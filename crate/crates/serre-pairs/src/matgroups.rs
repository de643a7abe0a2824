//! Exact arithmetic in `GL2(Z/nZ)` and its direct powers: element types,
//! subgroup closure, normal-subgroup enumeration, and (trace, det) class
//! statistics.
//!
//! Everything here is desk-scale: groups are stored as explicit closed
//! element sets in a `BTreeSet`, which gives set semantics and a canonical
//! deterministic iteration order for reproducible reports.

use crate::arith::{euler_phi, mod_inv};
use crate::Error;
use std::collections::BTreeSet;

/// Direct enumeration of `GL2(Z/nZ)` scans all `n^4` entry tuples; this caps
/// the scan (and transitively the moduli used in class tables).
const DIRECT_ENUM_BUDGET: u128 = 10_000_000;

/// Default cap on closure sizes.
pub const DEFAULT_CLOSURE_BUDGET: usize = 1_000_000;

/// Cap on the order of groups fed to `normal_subgroups`.
const NORMAL_ENUM_BUDGET: usize = 10_000;

/// A 2x2 matrix over `Z/nZ` with unit determinant, stored row-major.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ResidueMatrix {
    n: u64,
    e: [u64; 4],
}

impl ResidueMatrix {
    /// Construct from entries, reducing mod `n`. Panics if the determinant is
    /// not a unit: non-invertible matrices are outside the domain.
    pub fn new(n: u64, entries: [i64; 4]) -> ResidueMatrix {
        assert!(n >= 2, "modulus must be at least 2");
        let e = entries.map(|x| (x as i128).rem_euclid(n as i128) as u64);
        let m = ResidueMatrix { n, e };
        assert!(
            num_integer::gcd(m.det(), n) == 1,
            "determinant {} is not a unit mod {n}",
            m.det()
        );
        m
    }

    pub fn identity(n: u64) -> ResidueMatrix {
        assert!(n >= 2);
        ResidueMatrix { n, e: [1, 0, 0, 1] }
    }

    pub fn modulus(&self) -> u64 {
        self.n
    }

    pub fn entries(&self) -> [u64; 4] {
        self.e
    }

    pub fn det(&self) -> u64 {
        let [a, b, c, d] = self.e;
        let n = self.n;
        ((a * d) % n + n - (b * c) % n) % n
    }

    pub fn trace(&self) -> u64 {
        (self.e[0] + self.e[3]) % self.n
    }

    pub fn mul(&self, rhs: &ResidueMatrix) -> ResidueMatrix {
        assert_eq!(self.n, rhs.n, "modulus mismatch");
        let n = self.n;
        let [a, b, c, d] = self.e;
        let [e, f, g, h] = rhs.e;
        ResidueMatrix {
            n,
            e: [
                (a * e + b * g) % n,
                (a * f + b * h) % n,
                (c * e + d * g) % n,
                (c * f + d * h) % n,
            ],
        }
    }

    pub fn inv(&self) -> ResidueMatrix {
        let n = self.n;
        let [a, b, c, d] = self.e;
        let det_inv = mod_inv(self.det(), n).expect("determinant is a unit by construction");
        let neg = |x: u64| (n - x % n) % n;
        ResidueMatrix {
            n,
            e: [
                d * det_inv % n,
                neg(b) * det_inv % n,
                neg(c) * det_inv % n,
                a * det_inv % n,
            ],
        }
    }

    pub fn is_identity(&self) -> bool {
        self.e == [1, 0, 0, 1]
    }
}

/// An element of a direct power `GL2(Z/nZ)^k`: `k >= 1` matrices over one
/// common modulus. Ordering is lexicographic on the packed residues, which
/// serves as the canonical encoding for deterministic reports.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ProductElement {
    parts: Vec<ResidueMatrix>,
}

impl ProductElement {
    pub fn new(parts: Vec<ResidueMatrix>) -> ProductElement {
        assert!(!parts.is_empty(), "arity must be at least 1");
        let n = parts[0].modulus();
        assert!(
            parts.iter().all(|m| m.modulus() == n),
            "all parts must share one modulus"
        );
        ProductElement { parts }
    }

    pub fn single(m: ResidueMatrix) -> ProductElement {
        ProductElement { parts: vec![m] }
    }

    pub fn pair(a: ResidueMatrix, b: ResidueMatrix) -> ProductElement {
        ProductElement::new(vec![a, b])
    }

    pub fn identity(ambient: Ambient) -> ProductElement {
        ProductElement {
            parts: vec![ResidueMatrix::identity(ambient.n); ambient.k],
        }
    }

    pub fn arity(&self) -> usize {
        self.parts.len()
    }

    pub fn modulus(&self) -> u64 {
        self.parts[0].modulus()
    }

    pub fn parts(&self) -> &[ResidueMatrix] {
        &self.parts
    }

    pub fn part(&self, i: usize) -> &ResidueMatrix {
        &self.parts[i]
    }

    pub fn mul(&self, rhs: &ProductElement) -> ProductElement {
        assert_eq!(self.parts.len(), rhs.parts.len(), "arity mismatch");
        ProductElement {
            parts: self
                .parts
                .iter()
                .zip(&rhs.parts)
                .map(|(a, b)| a.mul(b))
                .collect(),
        }
    }

    pub fn inv(&self) -> ProductElement {
        ProductElement {
            parts: self.parts.iter().map(ResidueMatrix::inv).collect(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.parts.iter().all(|m| m.e == [1, 0, 0, 1])
    }

    /// Split a k-tuple into its first `left` parts and the rest.
    pub fn split_at(&self, left: usize) -> (ProductElement, ProductElement) {
        assert!(left >= 1 && left < self.parts.len());
        (
            ProductElement::new(self.parts[..left].to_vec()),
            ProductElement::new(self.parts[left..].to_vec()),
        )
    }

    pub fn join(left: &ProductElement, right: &ProductElement) -> ProductElement {
        let mut parts = left.parts.clone();
        parts.extend(right.parts.iter().copied());
        ProductElement::new(parts)
    }
}

/// True iff all parts of the tuple share one determinant (membership in the
/// equal-determinant subgroup of the direct power).
pub fn dn_membership(x: &ProductElement) -> bool {
    let d = x.parts[0].det();
    x.parts.iter().all(|m| m.det() == d)
}

/// Descriptor of an ambient direct power `GL2(Z/nZ)^k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Ambient {
    pub k: usize,
    pub n: u64,
}

impl Ambient {
    pub fn new(k: usize, n: u64) -> Ambient {
        assert!(k >= 1 && n >= 2);
        Ambient { k, n }
    }

    pub fn order(&self) -> u128 {
        group_order(self.n, GroupKind::Gl2).pow(self.k as u32)
    }
}

/// Which distinguished group order to compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupKind {
    Gl2,
    Sl2,
    /// Equal-determinant subgroup of the k-th direct power.
    Dn(u32),
}

/// Orders via multiplicativity over prime powers:
/// `|GL2(Z/p^e)| = p^(4(e-1)) (p^2-1)(p^2-p)`, `|SL2| = |GL2| / phi(n)`,
/// and `|D_n^(k)| = |GL2|^k / phi(n)^(k-1)`.
pub fn group_order(n: u64, which: GroupKind) -> u128 {
    assert!(n >= 2);
    let mut gl2: u128 = 1;
    let mut m = n;
    let mut p = 2u64;
    while p * p <= m {
        if m.is_multiple_of(p) {
            let mut e = 0u32;
            while m.is_multiple_of(p) {
                m /= p;
                e += 1;
            }
            gl2 *= gl2_prime_power_order(p, e);
        }
        p += 1;
    }
    if m > 1 {
        gl2 *= gl2_prime_power_order(m, 1);
    }
    let phi = euler_phi(n) as u128;
    match which {
        GroupKind::Gl2 => gl2,
        GroupKind::Sl2 => gl2 / phi,
        GroupKind::Dn(k) => {
            assert!(k >= 1);
            gl2.pow(k) / phi.pow(k - 1)
        }
    }
}

fn gl2_prime_power_order(p: u64, e: u32) -> u128 {
    let p = p as u128;
    p.pow(4 * (e - 1)) * (p * p - 1) * (p * p - p)
}

/// An explicit finite subgroup of `GL2(Z/nZ)^k`, stored as a closed element
/// set plus the generators it was built from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubgroupSet {
    ambient: Ambient,
    elements: BTreeSet<ProductElement>,
    generators: Vec<ProductElement>,
}

impl SubgroupSet {
    /// Smallest subgroup containing `gens`, by breadth-first closure under
    /// multiplication (which also yields inverses in a finite group).
    pub fn closure(ambient: Ambient, gens: &[ProductElement]) -> Result<SubgroupSet, Error> {
        SubgroupSet::closure_with_budget(ambient, gens, DEFAULT_CLOSURE_BUDGET)
    }

    pub fn closure_with_budget(
        ambient: Ambient,
        gens: &[ProductElement],
        budget: usize,
    ) -> Result<SubgroupSet, Error> {
        for g in gens {
            assert_eq!(g.arity(), ambient.k, "generator arity mismatch");
            assert_eq!(g.modulus(), ambient.n, "generator modulus mismatch");
        }
        let identity = ProductElement::identity(ambient);
        let mut elements = BTreeSet::new();
        elements.insert(identity.clone());
        let mut queue = vec![identity];
        while let Some(g) = queue.pop() {
            for h in gens {
                let p = g.mul(h);
                if elements.insert(p.clone()) {
                    if elements.len() > budget {
                        return Err(Error::ClosureBudgetExceeded {
                            reached: elements.len(),
                            budget,
                        });
                    }
                    queue.push(p);
                }
            }
        }
        Ok(SubgroupSet {
            ambient,
            elements,
            generators: gens.to_vec(),
        })
    }

    /// Wrap an already-closed element set. Closedness is the caller's
    /// responsibility; it is spot-checked in debug builds.
    pub(crate) fn from_closed_elements(
        ambient: Ambient,
        elements: BTreeSet<ProductElement>,
        generators: Vec<ProductElement>,
    ) -> SubgroupSet {
        debug_assert!(elements.contains(&ProductElement::identity(ambient)));
        SubgroupSet {
            ambient,
            elements,
            generators,
        }
    }

    /// All of `GL2(Z/nZ)` as an arity-1 subgroup set, by direct enumeration.
    pub fn gl2(n: u64) -> Result<SubgroupSet, Error> {
        SubgroupSet::enumerate_matrices(n, |_| true)
    }

    /// All of `SL2(Z/nZ)`.
    pub fn sl2(n: u64) -> Result<SubgroupSet, Error> {
        SubgroupSet::enumerate_matrices(n, |m| m.det() == 1)
    }

    fn enumerate_matrices(
        n: u64,
        keep: impl Fn(&ResidueMatrix) -> bool,
    ) -> Result<SubgroupSet, Error> {
        assert!(n >= 2);
        if (n as u128).pow(4) > DIRECT_ENUM_BUDGET {
            return Err(Error::EnumerationBudgetExceeded(n));
        }
        let mut elements = BTreeSet::new();
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        let m = ResidueMatrix { n, e: [a, b, c, d] };
                        if num_integer::gcd(m.det(), n) == 1 && keep(&m) {
                            elements.insert(ProductElement::single(m));
                        }
                    }
                }
            }
        }
        Ok(SubgroupSet {
            ambient: Ambient::new(1, n),
            elements,
            generators: Vec::new(),
        })
    }

    pub fn ambient(&self) -> Ambient {
        self.ambient
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn contains(&self, x: &ProductElement) -> bool {
        self.elements.contains(x)
    }

    pub fn elements(&self) -> impl Iterator<Item = &ProductElement> {
        self.elements.iter()
    }

    pub fn element_set(&self) -> &BTreeSet<ProductElement> {
        &self.elements
    }

    pub fn generators(&self) -> &[ProductElement] {
        &self.generators
    }

    pub fn is_subset_of(&self, other: &SubgroupSet) -> bool {
        self.ambient == other.ambient && self.elements.is_subset(&other.elements)
    }

    /// Exhaustive normality check: `g N g^-1 = N` for every `g`.
    pub fn is_normal_in(&self, g: &SubgroupSet) -> bool {
        if !self.is_subset_of(g) {
            return false;
        }
        g.elements.iter().all(|g_el| {
            let g_inv = g_el.inv();
            self.elements
                .iter()
                .all(|n_el| self.elements.contains(&g_el.mul(n_el).mul(&g_inv)))
        })
    }
}

/// Conjugacy classes of `g`, each sorted internally; classes ordered by their
/// least element.
pub fn conjugacy_classes(g: &SubgroupSet) -> Vec<Vec<ProductElement>> {
    let conjugators: Vec<(ProductElement, ProductElement)> =
        g.elements.iter().map(|x| (x.clone(), x.inv())).collect();
    let mut seen: BTreeSet<ProductElement> = BTreeSet::new();
    let mut classes = Vec::new();
    for x in &g.elements {
        if seen.contains(x) {
            continue;
        }
        let mut class: BTreeSet<ProductElement> = BTreeSet::new();
        for (c, c_inv) in &conjugators {
            let y = c.mul(x).mul(c_inv);
            debug_assert!(g.elements.contains(&y));
            class.insert(y);
        }
        seen.extend(class.iter().cloned());
        classes.push(class.into_iter().collect());
    }
    classes
}

/// All normal subgroups of `g`, each returned closed and sorted by order.
///
/// Candidates are generated as closures of unions of conjugacy classes,
/// grown one class at a time from the trivial subgroup: every normal
/// subgroup is a union of classes, so the walk is complete.
pub fn normal_subgroups(g: &SubgroupSet) -> Result<Vec<SubgroupSet>, Error> {
    if g.order() > NORMAL_ENUM_BUDGET {
        return Err(Error::ClosureBudgetExceeded {
            reached: g.order(),
            budget: NORMAL_ENUM_BUDGET,
        });
    }
    let classes = conjugacy_classes(g);
    let trivial: BTreeSet<ProductElement> =
        std::iter::once(ProductElement::identity(g.ambient)).collect();
    let mut found: BTreeSet<BTreeSet<ProductElement>> = BTreeSet::new();
    found.insert(trivial.clone());
    let mut worklist = vec![trivial];
    while let Some(current) = worklist.pop() {
        for class in &classes {
            if current.contains(&class[0]) {
                continue;
            }
            let mut gens: Vec<ProductElement> = current.iter().cloned().collect();
            gens.extend(class.iter().cloned());
            let grown = SubgroupSet::closure_with_budget(g.ambient, &gens, g.order())?;
            if found.insert(grown.elements.clone()) {
                worklist.push(grown.elements);
            }
        }
    }
    let mut result: Vec<SubgroupSet> = found
        .into_iter()
        .map(|elements| {
            // Provenance: the least member of each conjugacy class contained.
            let generators = classes
                .iter()
                .filter(|c| elements.contains(&c[0]))
                .map(|c| c[0].clone())
                .collect();
            SubgroupSet::from_closed_elements(g.ambient, elements, generators)
        })
        .collect();
    result.sort_by(|a, b| {
        a.order()
            .cmp(&b.order())
            .then_with(|| a.elements.cmp(&b.elements))
    });
    Ok(result)
}

/// Element counts keyed by `(trace, det)`.
pub type TraceDetCounts = std::collections::BTreeMap<(u64, u64), u128>;

/// Element counts keyed by `((t_1, ..., t_k), d)`.
pub type JointClassTable = std::collections::BTreeMap<(Vec<u64>, u64), u128>;

/// Element counts of `GL2(Z/nZ)` keyed by `(trace, det)`, assembled from the
/// prime-power factors of `n` by CRT; the `n^4` scan happens only per factor.
pub fn gl2_trace_det_counts(n: u64) -> Result<TraceDetCounts, Error> {
    assert!(n >= 2);
    let mut parts: Vec<(u64, TraceDetCounts)> = Vec::new();
    let mut m = n;
    let mut p = 2u64;
    while p * p <= m {
        if m.is_multiple_of(p) {
            let mut pe = 1u64;
            while m.is_multiple_of(p) {
                m /= p;
                pe *= p;
            }
            parts.push((pe, enumerate_trace_det_counts(pe)?));
        }
        p += 1;
    }
    if m > 1 {
        parts.push((m, enumerate_trace_det_counts(m)?));
    }
    let (mut modulus, mut counts) = parts.remove(0);
    for (m2, counts2) in parts {
        let mut combined = std::collections::BTreeMap::new();
        for (&(t1, d1), &c1) in &counts {
            for (&(t2, d2), &c2) in &counts2 {
                let t = crate::arith::crt_pair(t1, modulus, t2, m2);
                let d = crate::arith::crt_pair(d1, modulus, d2, m2);
                *combined.entry((t, d)).or_insert(0u128) += c1 * c2;
            }
        }
        modulus *= m2;
        counts = combined;
    }
    Ok(counts)
}

fn enumerate_trace_det_counts(m: u64) -> Result<TraceDetCounts, Error> {
    if (m as u128).pow(4) > DIRECT_ENUM_BUDGET {
        return Err(Error::EnumerationBudgetExceeded(m));
    }
    let mut counts = std::collections::BTreeMap::new();
    for a in 0..m {
        for b in 0..m {
            for c in 0..m {
                for d in 0..m {
                    let det = ((a * d) % m + m - (b * c) % m) % m;
                    if num_integer::gcd(det, m) == 1 {
                        *counts.entry(((a + d) % m, det)).or_insert(0u128) += 1;
                    }
                }
            }
        }
    }
    Ok(counts)
}

/// Exact element counts of the equal-determinant subgroup `D_n^(k)` keyed by
/// `((t_1, ..., t_k), d)`: the count of k-tuples of matrices with common
/// determinant `d` and the given traces is the product of the per-matrix
/// `(t_i, d)` counts. Only keys with a positive count appear.
pub fn class_table(n: u64, k: usize) -> Result<JointClassTable, Error> {
    assert!(k >= 1);
    let single = gl2_trace_det_counts(n)?;
    // Group trace counts by determinant.
    let mut by_det: std::collections::BTreeMap<u64, Vec<(u64, u128)>> =
        std::collections::BTreeMap::new();
    for (&(t, d), &c) in &single {
        by_det.entry(d).or_default().push((t, c));
    }
    let keys = by_det.len() as u128 * (n as u128).pow(k as u32);
    if keys > DIRECT_ENUM_BUDGET {
        return Err(Error::EnumerationBudgetExceeded(n));
    }
    let mut table = std::collections::BTreeMap::new();
    for (&d, traces) in &by_det {
        let mut idx = vec![0usize; k];
        'odometer: loop {
            let mut key = Vec::with_capacity(k);
            let mut count: u128 = 1;
            for &i in &idx {
                let (t, c) = traces[i];
                key.push(t);
                count *= c;
            }
            table.insert((key, d), count);
            let mut pos = k - 1;
            loop {
                idx[pos] += 1;
                if idx[pos] < traces.len() {
                    continue 'odometer;
                }
                idx[pos] = 0;
                if pos == 0 {
                    break 'odometer;
                }
                pos -= 1;
            }
        }
    }
    Ok(table)
}
