//! Arithmetic disjointness criteria for pairs of curves: quadratic and cubic
//! Kummer subfield tags, the composite-level entanglement predicates, the
//! large-prime elimination via ramification asymmetry, and the top-level
//! pair / k-tuple verifiers with their statistical cross-check.

use crate::arith::{is_prime, sieve_primes, valuation};
use crate::curves::{
    eligible_family_prime, factor_with_budget, FactorBudget, ReductionTag, WeierstrassCurve,
};
use crate::ffgroup::sample_stream;
use crate::matgroups::class_table;
use crate::Error;
use num_integer::Integer;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Canonical descriptor of the field generated by a radical: quadratic
/// fields are keyed by the signed squarefree part, cubic Kummer fields
/// `Q(cbrt(m), zeta_3)` by the smaller of the two cubefree representatives
/// `m` and `cube-reduced m^2` (the two generate the same field).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum FieldTag {
    /// Degenerate: the radical is already rational.
    Rational,
    /// `Q(sqrt(d))`, `d` squarefree, `d != 0, 1`.
    Quadratic(i128),
    /// `Q(cbrt(m), zeta_3)`, `m` the canonical cubefree representative > 1.
    CubicKummer(i128),
    /// `Q(zeta_n)`; conductors 1, 2 canonicalize to `Rational`, 3 and 4 to
    /// their quadratic tags.
    Cyclotomic(u32),
}

impl FieldTag {
    pub fn cyclotomic(conductor: u32) -> FieldTag {
        match conductor {
            0 => panic!("conductor must be positive"),
            1 | 2 => FieldTag::Rational,
            3 => FieldTag::Quadratic(-3),
            4 => FieldTag::Quadratic(-1),
            n => FieldTag::Cyclotomic(n),
        }
    }
}

impl std::fmt::Display for FieldTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FieldTag::Rational => write!(f, "Q"),
            FieldTag::Quadratic(d) => write!(f, "Q(sqrt({d}))"),
            FieldTag::CubicKummer(m) => write!(f, "Q(cbrt({m}), zeta3)"),
            FieldTag::Cyclotomic(n) => write!(f, "Q(zeta{n})"),
        }
    }
}

/// Tag of the quadratic field `Q(sqrt(d))`: the squarefree part of `d` with
/// its sign, or `Rational` when `d` is a perfect square.
pub fn quadratic_tag(d: i128, budget: &FactorBudget) -> Result<FieldTag, Error> {
    assert!(d != 0, "quadratic tag of zero is undefined");
    let s = factor_with_budget(d, budget)?.squarefree_part();
    if s == 1 {
        return Ok(FieldTag::Rational);
    }
    Ok(FieldTag::Quadratic(s))
}

/// Tag of the cubic Kummer field `Q(cbrt(m), zeta_3)`.
///
/// Invariant under `m -> m * c^3` and under `m -> m^2` (cube-reduced), and
/// independent of sign; perfect cubes collapse to the rational tag.
pub fn kummer_tag(m: i128, budget: &FactorBudget) -> Result<FieldTag, Error> {
    assert!(m != 0, "kummer tag of zero is undefined");
    let f = factor_with_budget(m, budget)?;
    let m0 = f.cubefree_part_abs();
    if m0 == 1 {
        return Ok(FieldTag::Rational);
    }
    // Cube-reduced square: exponents 2e mod 3.
    let mut m1: i128 = 1;
    for &(p, e) in &f.factors {
        for _ in 0..(2 * (e % 3)) % 3 {
            m1 *= p as i128;
        }
    }
    Ok(FieldTag::CubicKummer(m0.min(m1)))
}

/// Quadratic-subfield disjointness at level 4: the only quadratic subfields
/// of the 4-division field of `E2` are `Q(i)`, `Q(sqrt(disc2))` and
/// `Q(sqrt(-disc2))`, so `Q(sqrt(disc1))` must avoid all three (and
/// symmetrically). Degenerate square discriminants fail conservatively.
pub fn check_mod4(
    e1: &WeierstrassCurve,
    e2: &WeierstrassCurve,
    budget: &FactorBudget,
) -> Result<(bool, String), Error> {
    let d1 = e1.discriminant();
    let d2 = e2.discriminant();
    let t1 = quadratic_tag(d1, budget)?;
    let t2 = quadratic_tag(d2, budget)?;
    let t2_neg = quadratic_tag(-d2, budget)?;
    if t1 == FieldTag::Rational || t2 == FieldTag::Rational {
        return Ok((
            false,
            "degenerate: a discriminant is a perfect square".into(),
        ));
    }
    let gaussian = FieldTag::Quadratic(-1);
    if t1 == gaussian {
        return Ok((false, format!("Q(sqrt(disc(E1))) = Q(i), disc = {d1}")));
    }
    if t2 == gaussian {
        return Ok((false, format!("Q(sqrt(disc(E2))) = Q(i), disc = {d2}")));
    }
    if t1 == t2 {
        return Ok((
            false,
            format!("Q(sqrt(disc(E1))) = Q(sqrt(disc(E2))): common tag {t1}"),
        ));
    }
    if t1 == t2_neg {
        return Ok((
            false,
            format!("Q(sqrt(disc(E1))) = Q(sqrt(-disc(E2))): common tag {t1}"),
        ));
    }
    Ok((
        true,
        format!("quadratic tags disjoint: {t1} vs {{Q(i), {t2}, {t2_neg}}}"),
    ))
}

/// Kummer-subfield disjointness at level 9: the degree-6 radical subfields
/// `Q(cbrt(disc_i), zeta_3)` must differ. Degenerate cube discriminants fail
/// conservatively.
pub fn check_mod9(
    e1: &WeierstrassCurve,
    e2: &WeierstrassCurve,
    budget: &FactorBudget,
) -> Result<(bool, String), Error> {
    let k1 = kummer_tag(e1.discriminant(), budget)?;
    let k2 = kummer_tag(e2.discriminant(), budget)?;
    if k1 == FieldTag::Rational || k2 == FieldTag::Rational {
        return Ok((false, "degenerate: a discriminant is a perfect cube".into()));
    }
    if k1 == k2 {
        return Ok((
            false,
            format!("cubefree classes of the discriminants coincide: common tag {k1}"),
        ));
    }
    Ok((true, format!("kummer tags distinct: {k1} vs {k2}")))
}

/// Mixed-level disjointness (4 against 9, both orders): `Q(zeta_3)` is the
/// unique quadratic subfield on the level-9 side, so neither
/// `Q(sqrt(disc_i))` nor `Q(sqrt(-disc_i))` may equal `Q(sqrt(-3))`.
/// (`Q(zeta_3) = Q(zeta_4)` is impossible, so that subfield needs no check.)
pub fn check_mixed(
    e1: &WeierstrassCurve,
    e2: &WeierstrassCurve,
    budget: &FactorBudget,
) -> Result<(bool, String), Error> {
    let zeta3 = FieldTag::Quadratic(-3);
    for (label, e) in [("E1", e1), ("E2", e2)] {
        let d = e.discriminant();
        let t = quadratic_tag(d, budget)?;
        let t_neg = quadratic_tag(-d, budget)?;
        if t == FieldTag::Rational {
            return Ok((
                false,
                format!("degenerate: disc({label}) is a perfect square"),
            ));
        }
        if t == zeta3 {
            return Ok((
                false,
                format!("Q(sqrt(disc({label}))) = Q(zeta3): disc = {d} = -3 * square"),
            ));
        }
        if t_neg == zeta3 {
            return Ok((
                false,
                format!("Q(sqrt(-disc({label}))) = Q(zeta3): disc = {d} = 3 * square"),
            ));
        }
    }
    Ok((
        true,
        "Q(zeta3) is not a quadratic subfield on either level-4 side".into(),
    ))
}

/// Ramification index of `l` in the p-division field of a curve with split
/// multiplicative reduction at `l`, from the displayed Tate-curve case split:
/// `(p-1) p` when `p = l`, else `p`; in both cases at least `p`.
///
/// Hypotheses checked: `p >= 5` prime, `l` prime, multiplicative reduction
/// (`v_disc > 0`, `v_j < 0`) and `v_p(-v_j) = 0`.
pub fn tate_ramification_index(p: u64, l: u64, v_disc: u32, v_j: i64) -> Result<u64, Error> {
    if p < 5 || !is_prime(p) {
        return Err(Error::NotAPrime(p));
    }
    if !is_prime(l) {
        return Err(Error::NotAPrime(l));
    }
    if v_disc == 0 || v_j >= 0 {
        return Err(Error::HypothesisViolation(format!(
            "reduction at {l} is not multiplicative (v_disc = {v_disc}, v_j = {v_j})"
        )));
    }
    let alpha = valuation(-v_j as i128, p);
    if alpha != 0 {
        return Err(Error::HypothesisViolation(format!(
            "alpha = v_{p}(-v_j) = {alpha} must vanish (v_j = {v_j})"
        )));
    }
    let e = if p == l { (p - 1) * p } else { p };
    debug_assert!(e >= p);
    Ok(e)
}

/// Certification status of a curve as a Serre curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SerreCertificate {
    /// The curve is a member of the family `y^2 + xy = x^3 + l` with
    /// eligible `l`, which is a certified fact.
    FamilyCertified {
        l: u64,
    },
    /// The caller attested the curve is a Serre curve.
    UserAsserted,
    Uncertified,
}

impl SerreCertificate {
    pub fn is_certified(&self) -> bool {
        !matches!(self, SerreCertificate::Uncertified)
    }
}

impl std::fmt::Display for SerreCertificate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SerreCertificate::FamilyCertified { l } => write!(f, "family curve (l = {l})"),
            SerreCertificate::UserAsserted => write!(f, "user attestation"),
            SerreCertificate::Uncertified => write!(f, "uncertified"),
        }
    }
}

/// Classify a curve's Serre-curve certificate: family membership is
/// certified, anything else needs a user attestation.
pub fn serre_curve_certificate(e: &WeierstrassCurve, user_asserted: bool) -> SerreCertificate {
    if let Some(l) = e.family_parameter() {
        SerreCertificate::FamilyCertified { l }
    } else if user_asserted {
        SerreCertificate::UserAsserted
    } else {
        SerreCertificate::Uncertified
    }
}

/// One eliminating prime for the large-prime argument: `l` divides exactly
/// one of the two discriminants, with odd valuation and split multiplicative
/// reduction there.
#[derive(Debug, Clone, Copy)]
struct EliminatingPrime {
    l: u64,
    side: u8,
    v_disc: u32,
    v_j: i64,
}

fn eliminating_primes(
    e1: &WeierstrassCurve,
    e2: &WeierstrassCurve,
    budget: &FactorBudget,
) -> Result<Vec<EliminatingPrime>, Error> {
    let f1 = factor_with_budget(e1.discriminant(), budget)?;
    let f2 = factor_with_budget(e2.discriminant(), budget)?;
    let mut out = Vec::new();
    for (own, other, curve, side) in [(&f1, &f2, e1, 1u8), (&f2, &f1, e2, 2u8)] {
        for l in own.primes() {
            if other.exponent_of(l) != 0 || own.exponent_of(l) % 2 == 0 {
                continue;
            }
            let red = curve.reduction_at(l);
            if red.tag == ReductionTag::MultiplicativeSplit {
                out.push(EliminatingPrime {
                    l,
                    side,
                    v_disc: red.v_disc,
                    v_j: red.v_j,
                });
            }
        }
    }
    out.sort_by_key(|w| w.l);
    Ok(out)
}

/// The elimination at one prime `p >= 5`: the joint mod-p image is all of
/// the equal-determinant group provided
/// (a) some prime `l != p` ramifies on exactly one side, with odd
///     discriminant valuation and split multiplicative reduction, ruling
///     out the trivial kernel by ramification asymmetry;
/// (b) the Tate ramification index at that `l` exceeds 2, ruling out the
///     central kernel of order 2;
/// (c) no Galois subextension of degree `2(p-1)` exists on either side (a
///     cited structural fact about the division-field lattice), ruling out
///     the remaining proper kernel.
///
/// Both curves must carry a Serre-curve certificate.
pub fn check_p_large(
    e1: &WeierstrassCurve,
    e2: &WeierstrassCurve,
    p: u64,
    options: &VerifyOptions,
) -> Result<(bool, String), Error> {
    if p < 5 || !is_prime(p) {
        return Err(Error::NotAPrime(p));
    }
    let cert1 = serre_curve_certificate(e1, options.assert_serre);
    let cert2 = serre_curve_certificate(e2, options.assert_serre);
    if !cert1.is_certified() || !cert2.is_certified() {
        return Err(Error::NotCertifiedSerre);
    }
    let witnesses = eliminating_primes(e1, e2, &options.factor_budget)?;
    for w in &witnesses {
        if w.l == p {
            continue;
        }
        match tate_ramification_index(p, w.l, w.v_disc, w.v_j) {
            Ok(e) => {
                assert!(e > 2);
                return Ok((
                    true,
                    format!(
                        "eliminating prime l = {} (ramified on side {} only, v = {}, split \
                         multiplicative); tate index {} > 2; no degree-2(p-1) subextension (cited)",
                        w.l, w.side, w.v_disc, e
                    ),
                ));
            }
            // A witness prime can fail the index hypotheses (e.g. p | v_j);
            // try the next one.
            Err(Error::HypothesisViolation(_)) => continue,
            Err(other) => return Err(other),
        }
    }
    Ok((
        false,
        "no eliminating prime: no l != p ramifies on exactly one side with odd valuation and \
         split multiplicative reduction"
            .into(),
    ))
}

/// Statistical coverage of the joint (trace, trace, det) Frobenius classes
/// against the exact class table of the equal-determinant group. Never a
/// proof; the label says so.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    /// Always `"statistical"`: this cross-check is evidence, not proof.
    pub label: String,
    pub modulus: u64,
    pub q_max: u64,
    pub samples: u64,
    pub total_classes: usize,
    pub observed_classes: usize,
    /// Fraction of class-table keys observed at least once.
    pub coverage: f64,
    /// Pearson statistic over all class-table keys.
    pub chi_square: f64,
    pub degrees_of_freedom: usize,
    /// Largest per-class standardized deviation from the expected frequency.
    pub max_abs_z: f64,
    /// Observed keys that are impossible per the class table (always 0 for a
    /// correct implementation).
    pub unexpected_classes: usize,
    pub insufficient_samples: bool,
}

/// Moduli for which the joint class table is enumerable at desk scale.
pub const COVERAGE_MODULI: [u64; 6] = [4, 5, 7, 9, 11, 13];

/// Observed sample counts keyed by `(t1 mod n, t2 mod n, q mod n)`.
pub type ObservedClassCounts = BTreeMap<(u64, u64, u64), u64>;

/// Coverage statistics plus the raw observed counts keyed by
/// `(t1 mod n, t2 mod n, q mod n)`.
pub fn frobenius_coverage_detailed(
    e1: &WeierstrassCurve,
    e2: &WeierstrassCurve,
    n: u64,
    q_max: u64,
) -> Result<(CoverageReport, ObservedClassCounts), Error> {
    if !COVERAGE_MODULI.contains(&n) {
        return Err(Error::UnsupportedCoverageModulus(n));
    }
    let table = class_table(n, 2)?;
    let expected: BTreeMap<(u64, u64, u64), u128> = table
        .into_iter()
        .map(|((traces, d), c)| ((traces[0], traces[1], d), c))
        .collect();
    let group_order: u128 = expected.values().sum();

    let mut observed: ObservedClassCounts = BTreeMap::new();
    let mut samples = 0u64;
    for s in sample_stream(&[e1.clone(), e2.clone()], n, q_max) {
        let key = (
            s.traces[0].rem_euclid(n as i64) as u64,
            s.traces[1].rem_euclid(n as i64) as u64,
            s.det_residue,
        );
        *observed.entry(key).or_insert(0) += 1;
        samples += 1;
    }

    let total_classes = expected.len();
    let observed_classes = expected
        .keys()
        .filter(|k| observed.contains_key(*k))
        .count();
    let unexpected_classes = observed
        .keys()
        .filter(|k| !expected.contains_key(*k))
        .count();
    let mut chi_square = 0.0f64;
    let mut max_abs_z = 0.0f64;
    if samples > 0 {
        for (key, &count) in &expected {
            let f = count as f64 / group_order as f64;
            let mean = samples as f64 * f;
            let obs = observed.get(key).copied().unwrap_or(0) as f64;
            chi_square += (obs - mean) * (obs - mean) / mean;
            let sigma = (samples as f64 * f * (1.0 - f)).sqrt();
            if sigma > 0.0 {
                max_abs_z = max_abs_z.max((obs - mean).abs() / sigma);
            }
        }
    }
    let report = CoverageReport {
        label: "statistical".into(),
        modulus: n,
        q_max,
        samples,
        total_classes,
        observed_classes,
        coverage: observed_classes as f64 / total_classes as f64,
        chi_square,
        degrees_of_freedom: total_classes.saturating_sub(1),
        max_abs_z,
        unexpected_classes,
        insufficient_samples: q_max < 100 || samples < 2 * total_classes as u64,
    };
    Ok((report, observed))
}

/// Coverage statistics only; see [`frobenius_coverage_detailed`].
pub fn frobenius_coverage(
    e1: &WeierstrassCurve,
    e2: &WeierstrassCurve,
    n: u64,
    q_max: u64,
) -> Result<CoverageReport, Error> {
    frobenius_coverage_detailed(e1, e2, n, q_max).map(|(r, _)| r)
}

/// One verified criterion with its outcome and a human-readable witness.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CriterionCheck {
    pub name: String,
    pub pass: bool,
    pub witness: String,
}

/// Structured verdict for a pair of curves: every mandatory criterion with
/// its witness, optional statistical coverage, and the aggregate answer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairVerdict {
    pub serre_pair: bool,
    pub checks: Vec<CriterionCheck>,
    /// Coverage reports keyed by modulus (stringified for stable JSON).
    pub coverage: BTreeMap<String, CoverageReport>,
}

impl PairVerdict {
    pub fn check(&self, name: &str) -> Option<&CriterionCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// The per-prime elimination records.
    pub fn per_prime_checks(&self) -> impl Iterator<Item = &CriterionCheck> {
        self.checks
            .iter()
            .filter(|c| c.name.starts_with("mod-p-maximal"))
    }
}

/// Options for the pair / k-tuple verifiers.
#[derive(Debug, Clone)]
pub struct VerifyOptions {
    /// Primes `5 <= p <= p_max` get an explicit per-prime record; the
    /// argument itself is uniform in `p`, so this loop is redundancy, not
    /// the certification boundary.
    pub p_max: u64,
    /// Prime bound for the optional Frobenius sampling cross-check.
    pub q_max: u64,
    /// Run the statistical coverage check at levels 4, 5, 9.
    pub run_coverage: bool,
    /// Caller attests that non-family curves are Serre curves.
    pub assert_serre: bool,
    pub factor_budget: FactorBudget,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            p_max: 50,
            q_max: 10_000,
            run_coverage: false,
            assert_serre: false,
            factor_budget: FactorBudget::default(),
        }
    }
}

fn push(checks: &mut Vec<CriterionCheck>, name: &str, pass: bool, witness: String) {
    checks.push(CriterionCheck {
        name: name.into(),
        pass,
        witness,
    });
}

fn error_check(checks: &mut Vec<CriterionCheck>, name: &str, err: &Error) {
    push(checks, name, false, format!("not decided: {err}"));
}

/// Verify that `(e1, e2)` is a Serre pair. Total: every failure mode is
/// reported inside the verdict rather than as an error.
///
/// Mandatory criteria, in order: Serre-curve certificates for both curves;
/// coprime discriminants (Euclidean gcd cross-checked against the prime
/// factorizations); quadratic disjointness at level 4; Kummer disjointness
/// at level 9; mixed 4/9 triviality; the elimination for every prime
/// `5 <= p <= p_max`; and the uniformity record certifying all larger `p`
/// from the same witnesses. Statistical coverage is advisory and never
/// affects the verdict.
pub fn verify_pair(
    e1: &WeierstrassCurve,
    e2: &WeierstrassCurve,
    options: &VerifyOptions,
) -> PairVerdict {
    let mut checks = Vec::new();
    let budget = &options.factor_budget;

    let cert1 = serre_curve_certificate(e1, options.assert_serre);
    let cert2 = serre_curve_certificate(e2, options.assert_serre);
    push(
        &mut checks,
        "serre-certificate(E1)",
        cert1.is_certified(),
        format!("{e1}: {cert1}"),
    );
    push(
        &mut checks,
        "serre-certificate(E2)",
        cert2.is_certified(),
        format!("{e2}: {cert2}"),
    );

    // Coprimality of the discriminants, decided by Euclid and cross-checked
    // by independent factorization when both factorizations fit the budget.
    let d1 = e1.discriminant();
    let d2 = e2.discriminant();
    let g = d1.gcd(&d2);
    match (
        factor_with_budget(d1, budget),
        factor_with_budget(d2, budget),
    ) {
        (Ok(f1), Ok(f2)) => {
            let shared: Vec<u64> = f1.primes().filter(|&p| f2.exponent_of(p) > 0).collect();
            assert_eq!(
                shared.is_empty(),
                g == 1,
                "factorization and Euclidean gcd must agree"
            );
            push(
                &mut checks,
                "discriminant-gcd",
                g == 1,
                format!(
                    "gcd({d1}, {d2}) = {g}; factor sets {:?} vs {:?}{}",
                    f1.primes().collect::<Vec<_>>(),
                    f2.primes().collect::<Vec<_>>(),
                    if shared.is_empty() {
                        " are disjoint".to_string()
                    } else {
                        format!(" share {shared:?}")
                    }
                ),
            );
        }
        (r1, r2) => {
            let err = r1.err().or(r2.err()).unwrap();
            push(
                &mut checks,
                "discriminant-gcd",
                g == 1,
                format!("gcd({d1}, {d2}) = {g}; factorization cross-check skipped: {err}"),
            );
        }
    }

    match check_mod4(e1, e2, budget) {
        Ok((pass, witness)) => push(&mut checks, "mod4-quadratic-disjoint", pass, witness),
        Err(e) => error_check(&mut checks, "mod4-quadratic-disjoint", &e),
    }
    match check_mod9(e1, e2, budget) {
        Ok((pass, witness)) => push(&mut checks, "mod9-kummer-disjoint", pass, witness),
        Err(e) => error_check(&mut checks, "mod9-kummer-disjoint", &e),
    }
    match check_mixed(e1, e2, budget) {
        Ok((pass, witness)) => push(&mut checks, "mixed-4-9-disjoint", pass, witness),
        Err(e) => error_check(&mut checks, "mixed-4-9-disjoint", &e),
    }

    for p in sieve_primes(options.p_max) {
        if p < 5 {
            continue;
        }
        let name = format!("mod-p-maximal(p={p})");
        match check_p_large(e1, e2, p, options) {
            Ok((pass, witness)) => push(&mut checks, &name, pass, witness),
            Err(e) => error_check(&mut checks, &name, &e),
        }
    }

    // The elimination is uniform in p: it only needs, for each p >= 5, one
    // eliminating prime different from p. That holds for every p at once as
    // soon as the witness set has two members, or one member below 5.
    if !cert1.is_certified() || !cert2.is_certified() {
        push(
            &mut checks,
            "uniform-in-p",
            false,
            "not decided: curve is not certified as a Serre curve".into(),
        );
    } else {
        match eliminating_primes(e1, e2, budget) {
            Ok(ws) => {
                let ls: Vec<u64> = ws.iter().map(|w| w.l).collect();
                let pass = !ls.is_empty() && (ls.len() >= 2 || ls[0] < 5);
                push(
                    &mut checks,
                    "uniform-in-p",
                    pass,
                    format!(
                        "eliminating primes {ls:?}: every p >= 5 beyond p_max = {} is covered by \
                         a witness different from p",
                        options.p_max
                    ),
                );
            }
            Err(e) => error_check(&mut checks, "uniform-in-p", &e),
        }
    }

    let mut coverage = BTreeMap::new();
    if options.run_coverage {
        for n in [4u64, 5, 9] {
            // These moduli are always supported and their tables enumerable.
            let report = frobenius_coverage(e1, e2, n, options.q_max)
                .expect("coverage at levels 4, 5, 9 cannot exceed budgets");
            coverage.insert(n.to_string(), report);
        }
    }

    PairVerdict {
        serre_pair: checks.iter().all(|c| c.pass),
        checks,
        coverage,
    }
}

/// Entry for one unordered pair inside a k-tuple verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KTuplePairEntry {
    pub i: usize,
    pub j: usize,
    pub verdict: PairVerdict,
}

/// Verdict for a k-tuple: pass iff every curve is certified and every
/// unordered pair is a Serre pair; the expected joint-image index is `2^k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KTupleVerdict {
    pub serre_tuple: bool,
    pub k: usize,
    pub expected_index: u64,
    pub certificates: Vec<CriterionCheck>,
    pub pairs: Vec<KTuplePairEntry>,
}

/// Verify a k-tuple by checking that all unordered pairs are pairwise
/// maximally disjoint. `k = 1` reduces to the single-curve certificate.
pub fn verify_ktuple(curves: &[WeierstrassCurve], options: &VerifyOptions) -> KTupleVerdict {
    let k = curves.len();
    assert!(k >= 1, "a k-tuple needs at least one curve");
    assert!(k < 64, "expected index 2^k must fit in u64");
    let mut certificates = Vec::new();
    for (i, e) in curves.iter().enumerate() {
        let cert = serre_curve_certificate(e, options.assert_serre);
        push(
            &mut certificates,
            &format!("serre-certificate(E{})", i + 1),
            cert.is_certified(),
            format!("{e}: {cert}"),
        );
    }
    let mut pairs = Vec::new();
    for i in 0..k {
        for j in (i + 1)..k {
            pairs.push(KTuplePairEntry {
                i: i + 1,
                j: j + 1,
                verdict: verify_pair(&curves[i], &curves[j], options),
            });
        }
    }
    KTupleVerdict {
        serre_tuple: certificates.iter().all(|c| c.pass)
            && pairs.iter().all(|p| p.verdict.serre_pair),
        k,
        expected_index: 1u64 << k,
        certificates,
        pairs,
    }
}

/// Find the first `count` family primes `l2` whose curve forms a Serre pair
/// with the family curve of `l1`, i.e. with
/// `gcd(432 l1^2 + l1, 432 l2^2 + l2) = 1`.
///
/// Implemented as a residue sieve: factor the `l1` quantity, forbid per
/// prime factor `p` the residues `l2 = 0` and `l2 = l1 (mod p)` (for
/// `l1 = 3`, verbatim: `l2 not in {3, 1297}` and `l2 != 3 mod 1297`), then
/// walk primes in increasing order. Every survivor is re-validated by a
/// direct gcd computation, which also removes the rare survivor the residue
/// sieve is too coarse to catch.
pub fn search_partner(l1: u64, count: usize, budget: &FactorBudget) -> Result<Vec<u64>, Error> {
    if !eligible_family_prime(l1) {
        return Err(Error::IneligiblePrime(l1));
    }
    let dq = |l: u128| 432 * l * l + l;
    let dq1 = dq(l1 as u128);
    let forbidden: Vec<(u64, Vec<u64>)> = if l1 == 3 {
        vec![(3, vec![0]), (1297, vec![0, 3])]
    } else {
        factor_with_budget(dq1 as i128, budget)?
            .primes()
            .map(|p| (p, vec![0, l1 % p]))
            .collect()
    };

    let mut out = Vec::with_capacity(count);
    let mut bound = 1000u64;
    while out.len() < count {
        out.clear();
        for l2 in sieve_primes(bound) {
            if !eligible_family_prime(l2) {
                continue;
            }
            if forbidden
                .iter()
                .any(|(p, residues)| residues.contains(&(l2 % p)))
            {
                continue;
            }
            if dq1.gcd(&dq(l2 as u128)) != 1 {
                continue;
            }
            out.push(l2);
            if out.len() == count {
                break;
            }
        }
        bound *= 4;
    }
    Ok(out)
}
