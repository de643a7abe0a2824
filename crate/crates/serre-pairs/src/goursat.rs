//! Goursat decomposition of subgroups of direct products, and fibered
//! products over a common finite quotient.
//!
//! A subgroup `H` of `G1 x G2` with surjective projections is classified by
//! the pair of kernels `(N1, N2)` together with the induced isomorphism
//! `G1/N1 -> G2/N2`; conversely a pair of surjections `q1: G1 -> Q`,
//! `q2: G2 -> Q` pins down the fibered product `{(a, b) : q1(a) = q2(b)}`.
//!
//! Quotient targets are represented by arbitrary `u64` labels: the group
//! structure on the labels is implicit in the maps and is spot-verified by a
//! functional-consistency check on products before any map is trusted.

use crate::matgroups::{Ambient, ProductElement, SubgroupSet};
use crate::Error;
use std::collections::{BTreeMap, BTreeSet};

/// Pair-enumeration cap for fibered products and homomorphism checks.
const PAIR_BUDGET: u128 = 20_000_000;

/// The invariant of a subgroup of `G1 x G2` with surjective projections:
/// the two projection kernels and the graph of the induced isomorphism on
/// coset representatives (chosen minimal in the canonical element order).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoursatInvariant {
    pub n1: SubgroupSet,
    pub n2: SubgroupSet,
    /// Pairs `(rep in G1/N1, rep in G2/N2)`, sorted by the left entry.
    pub iso: Vec<(ProductElement, ProductElement)>,
}

/// Canonical coset representatives of `n` in `g`: maps every element to the
/// least member of its left coset. Ascending iteration makes the first
/// unassigned element the representative of its own coset.
fn coset_reps(g: &SubgroupSet, n: &SubgroupSet) -> BTreeMap<ProductElement, ProductElement> {
    debug_assert!(n.is_subset_of(g));
    let mut reps = BTreeMap::new();
    for el in g.elements() {
        if reps.contains_key(el) {
            continue;
        }
        for n_el in n.elements() {
            reps.insert(el.mul(n_el), el.clone());
        }
    }
    reps
}

/// Decompose a subgroup `h` of the direct product `g1 x g2` into its Goursat
/// invariant. The projections of `h` onto both factors must be surjective.
pub fn goursat_decompose(
    h: &SubgroupSet,
    g1: &SubgroupSet,
    g2: &SubgroupSet,
) -> Result<GoursatInvariant, Error> {
    let k1 = g1.ambient().k;
    let k2 = g2.ambient().k;
    assert_eq!(
        h.ambient(),
        Ambient::new(k1 + k2, g1.ambient().n),
        "h must live in the direct product of the ambients of g1 and g2"
    );
    assert_eq!(g1.ambient().n, g2.ambient().n);

    let mut proj1 = BTreeSet::new();
    let mut proj2 = BTreeSet::new();
    for el in h.elements() {
        let (left, right) = el.split_at(k1);
        proj1.insert(left);
        proj2.insert(right);
    }
    if &proj1 != g1.element_set() {
        return Err(Error::ProjectionNotSurjective { side: 1 });
    }
    if &proj2 != g2.element_set() {
        return Err(Error::ProjectionNotSurjective { side: 2 });
    }

    let id1 = ProductElement::identity(g1.ambient());
    let id2 = ProductElement::identity(g2.ambient());
    let mut n1_elems = BTreeSet::new();
    let mut n2_elems = BTreeSet::new();
    for el in h.elements() {
        let (left, right) = el.split_at(k1);
        if right == id2 {
            n1_elems.insert(left.clone());
        }
        if left == id1 {
            n2_elems.insert(right.clone());
        }
    }
    let n1 = SubgroupSet::from_closed_elements(g1.ambient(), n1_elems, Vec::new());
    let n2 = SubgroupSet::from_closed_elements(g2.ambient(), n2_elems, Vec::new());

    // Goursat order identity: |H| = |G1| |N2| = |G2| |N1|.
    assert_eq!(h.order(), g1.order() * n2.order());
    assert_eq!(h.order(), g2.order() * n1.order());

    let reps1 = coset_reps(g1, &n1);
    let reps2 = coset_reps(g2, &n2);
    let mut graph: BTreeMap<ProductElement, ProductElement> = BTreeMap::new();
    for el in h.elements() {
        let (left, right) = el.split_at(k1);
        let r1 = reps1[&left].clone();
        let r2 = reps2[&right].clone();
        match graph.get(&r1) {
            None => {
                graph.insert(r1, r2);
            }
            Some(prev) => assert_eq!(
                prev, &r2,
                "subgroup does not induce a well-defined quotient map"
            ),
        }
    }
    let distinct_images: BTreeSet<&ProductElement> = graph.values().collect();
    assert_eq!(
        distinct_images.len(),
        graph.len(),
        "induced quotient correspondence must be a bijection"
    );

    Ok(GoursatInvariant {
        n1,
        n2,
        iso: graph.into_iter().collect(),
    })
}

impl GoursatInvariant {
    /// Order of the common quotient.
    pub fn quotient_order(&self) -> usize {
        self.iso.len()
    }

    /// Check that the recorded bijection of coset representatives is a group
    /// isomorphism `G1/N1 -> G2/N2`, by the full multiplication table.
    pub fn verify_iso(&self, g1: &SubgroupSet, g2: &SubgroupSet) -> bool {
        let reps1 = coset_reps(g1, &self.n1);
        let reps2 = coset_reps(g2, &self.n2);
        let map: BTreeMap<&ProductElement, &ProductElement> =
            self.iso.iter().map(|(a, b)| (a, b)).collect();
        for (a, a_img) in &self.iso {
            for (b, b_img) in &self.iso {
                let prod_rep = &reps1[&a.mul(b)];
                let expected = &reps2[&a_img.mul(b_img)];
                match map.get(prod_rep) {
                    Some(got) if got == &expected => {}
                    _ => return false,
                }
            }
        }
        true
    }

    /// Rebuild the subgroup of `g1 x g2` whose invariant this is:
    /// `{(a, b) : iso(coset of a) = coset of b}`.
    pub fn reassemble(&self, g1: &SubgroupSet, g2: &SubgroupSet) -> SubgroupSet {
        let reps1 = coset_reps(g1, &self.n1);
        let reps2 = coset_reps(g2, &self.n2);
        let map: BTreeMap<&ProductElement, &ProductElement> =
            self.iso.iter().map(|(a, b)| (a, b)).collect();
        let mut elements = BTreeSet::new();
        for a in g1.elements() {
            let image = map[&reps1[a]];
            for b in g2.elements() {
                if &reps2[b] == image {
                    elements.insert(ProductElement::join(a, b));
                }
            }
        }
        let ambient = Ambient::new(g1.ambient().k + g2.ambient().k, g1.ambient().n);
        SubgroupSet::from_closed_elements(ambient, elements, Vec::new())
    }
}

/// Verify that `q` behaves like a homomorphism out of `g` into a label
/// space: the label of a product must be determined by the labels of the
/// factors. Checks every pair when that fits the budget, otherwise all
/// generator-element pairs. Returns the image label set.
fn check_quotient_map(
    g: &SubgroupSet,
    q: &dyn Fn(&ProductElement) -> u64,
) -> Result<BTreeSet<u64>, Error> {
    let order = g.order() as u128;
    let mut table: BTreeMap<(u64, u64), u64> = BTreeMap::new();
    let mut check_pair = |a: &ProductElement, b: &ProductElement| -> Result<(), Error> {
        let key = (q(a), q(b));
        let val = q(&a.mul(b));
        match table.get(&key) {
            None => {
                table.insert(key, val);
                Ok(())
            }
            Some(&prev) if prev == val => Ok(()),
            Some(&prev) => Err(Error::NotAHomomorphism(format!(
                "label of a product is not determined by factor labels: ({}, {}) -> {prev} and {val}",
                key.0, key.1
            ))),
        }
    };
    if order * order <= PAIR_BUDGET {
        for a in g.elements() {
            for b in g.elements() {
                check_pair(a, b)?;
            }
        }
    } else {
        for a in g.generators() {
            for b in g.elements() {
                check_pair(a, b)?;
                check_pair(b, a)?;
            }
        }
    }
    Ok(g.elements().map(q).collect())
}

/// Fibered product of `g1` and `g2` over a common quotient, supplied as two
/// label maps: `{(a, b) : q1(a) = q2(b)}`. Both maps are verified for
/// homomorphy, and their images must coincide (surjectivity onto the same
/// quotient). The result has order `|G1| |G2| / |Q|`.
pub fn fibered_product(
    g1: &SubgroupSet,
    g2: &SubgroupSet,
    q1: &dyn Fn(&ProductElement) -> u64,
    q2: &dyn Fn(&ProductElement) -> u64,
) -> Result<SubgroupSet, Error> {
    assert_eq!(g1.ambient().n, g2.ambient().n, "moduli must agree");
    let pairs = g1.order() as u128 * g2.order() as u128;
    if pairs > PAIR_BUDGET {
        return Err(Error::ClosureBudgetExceeded {
            reached: pairs.min(usize::MAX as u128) as usize,
            budget: PAIR_BUDGET as usize,
        });
    }
    let image1 = check_quotient_map(g1, q1)?;
    let image2 = check_quotient_map(g2, q2)?;
    if image1 != image2 {
        return Err(Error::NotAHomomorphism(
            "the two maps do not land onto a common quotient (images differ)".into(),
        ));
    }
    let quotient_order = image1.len();

    let mut by_label: BTreeMap<u64, Vec<&ProductElement>> = BTreeMap::new();
    for b in g2.elements() {
        by_label.entry(q2(b)).or_default().push(b);
    }
    let mut elements = BTreeSet::new();
    for a in g1.elements() {
        if let Some(matching) = by_label.get(&q1(a)) {
            for b in matching {
                elements.insert(ProductElement::join(a, b));
            }
        }
    }
    assert_eq!(
        elements.len(),
        g1.order() * g2.order() / quotient_order,
        "fibered product order must be |G1||G2|/|Q|"
    );
    let ambient = Ambient::new(g1.ambient().k + g2.ambient().k, g1.ambient().n);
    Ok(SubgroupSet::from_closed_elements(
        ambient,
        elements,
        Vec::new(),
    ))
}

/// Index `[G : N] = |G| / |N|` of a subgroup.
pub fn index_correspondence(n: &SubgroupSet, g: &SubgroupSet) -> Result<u128, Error> {
    if !n.is_subset_of(g) {
        return Err(Error::NotASubgroup);
    }
    assert_eq!(g.order() % n.order(), 0);
    Ok(g.order() as u128 / n.order() as u128)
}
