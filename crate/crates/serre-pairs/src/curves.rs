//! Integral Weierstrass models, their standard invariants, the prime-parameter
//! curve family `y^2 + xy = x^3 + l`, and local reduction data.
//!
//! All derived quantities are exact 128-bit integers; models whose invariants
//! do not fit are rejected rather than silently truncated.

use crate::arith::{is_prime, legendre, valuation};
use crate::Error;
use num_integer::Integer;

/// An integral Weierstrass model `y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6`
/// together with its b-, c-invariants, discriminant and j-invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeierstrassCurve {
    a1: i64,
    a2: i64,
    a3: i64,
    a4: i64,
    a6: i64,
    b2: i128,
    b4: i128,
    b6: i128,
    b8: i128,
    c4: i128,
    c6: i128,
    disc: i128,
    j_num: i128,
    j_den: i128,
}

/// Local reduction behaviour of a curve at a prime.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReductionTag {
    Good,
    MultiplicativeSplit,
    MultiplicativeNonsplit,
    Additive,
}

/// Reduction tag at a prime `q` plus the valuations `v_q(disc)` and `v_q(j)`.
///
/// `v_j` is the valuation of the reduced fraction `j = c4^3 / disc`; it is 0
/// by convention when `j = 0` (which never happens for multiplicative
/// reduction, the only case in which `v_j` is consumed downstream).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReductionType {
    pub tag: ReductionTag,
    pub v_disc: u32,
    pub v_j: i64,
}

impl WeierstrassCurve {
    /// Compute all invariants of the model `[a1, a2, a3, a4, a6]`.
    pub fn new(model: [i64; 5]) -> Result<Self, Error> {
        let [a1, a2, a3, a4, a6] = model.map(i128::from);
        let (b2, b4, b6, b8, c4, c6, disc) =
            derived_invariants(a1, a2, a3, a4, a6).ok_or(Error::ModelTooLarge)?;
        if disc == 0 {
            return Err(Error::SingularModel);
        }

        // 4 b8 = b2 b6 - b4^2 must hold exactly for any model.
        assert_eq!(4 * b8, b2 * b6 - b4 * b4);

        let c4_cubed = c4.checked_pow(3).ok_or(Error::ModelTooLarge)?;
        let c6_sq = c6.checked_mul(c6).ok_or(Error::ModelTooLarge)?;
        assert_eq!(
            c4_cubed - c6_sq,
            1728 * disc,
            "c4^3 - c6^2 = 1728 disc must hold exactly"
        );

        let g = c4_cubed.gcd(&disc);
        let (mut j_num, mut j_den) = if g == 0 {
            (0, 1)
        } else {
            (c4_cubed / g, disc / g)
        };
        if j_den < 0 {
            j_num = -j_num;
            j_den = -j_den;
        }

        Ok(WeierstrassCurve {
            a1: model[0],
            a2: model[1],
            a3: model[2],
            a4: model[3],
            a6: model[4],
            b2,
            b4,
            b6,
            b8,
            c4,
            c6,
            disc,
            j_num,
            j_den,
        })
    }

    /// The family member `y^2 + xy = x^3 + l` for an odd prime `l != 7`.
    ///
    /// Its discriminant satisfies the closed form `-l (432 l + 1)`, which is
    /// asserted against the general invariant formulas on every construction.
    pub fn serre_family(l: u64) -> Result<Self, Error> {
        if !eligible_family_prime(l) {
            return Err(Error::IneligiblePrime(l));
        }
        let curve = WeierstrassCurve::new([1, 0, 0, 0, l as i64])?;
        let closed_form = -(l as i128) * (432 * l as i128 + 1);
        assert_eq!(curve.disc, closed_form);
        Ok(curve)
    }

    pub fn model(&self) -> [i64; 5] {
        [self.a1, self.a2, self.a3, self.a4, self.a6]
    }

    pub fn b_invariants(&self) -> (i128, i128, i128, i128) {
        (self.b2, self.b4, self.b6, self.b8)
    }

    pub fn c4(&self) -> i128 {
        self.c4
    }

    pub fn c6(&self) -> i128 {
        self.c6
    }

    pub fn discriminant(&self) -> i128 {
        self.disc
    }

    /// j-invariant as a reduced fraction `(numerator, denominator)`, denominator > 0.
    pub fn j_invariant(&self) -> (i128, i128) {
        (self.j_num, self.j_den)
    }

    /// `Some(l)` if this is exactly the family model `[1, 0, 0, 0, l]` with
    /// eligible `l`.
    pub fn family_parameter(&self) -> Option<u64> {
        if self.a1 == 1 && self.a2 == 0 && self.a3 == 0 && self.a4 == 0 && self.a6 > 0 {
            let l = self.a6 as u64;
            if eligible_family_prime(l) {
                return Some(l);
            }
        }
        None
    }

    /// Classify the reduction of the curve at the prime `q`.
    ///
    /// Good reduction is detected by `v_q(disc) = 0` on the model as given.
    /// For bad reduction: multiplicative when `q` does not divide `c4`, else
    /// additive. Multiplicative reduction is split when the tangent slopes at
    /// the node are rational; for `q > 3` this is equivalent to `-c6` being a
    /// nonzero square mod `q`, while for `q in {2, 3}` the tangent cone at
    /// the singular point is inspected directly.
    pub fn reduction_at(&self, q: u64) -> ReductionType {
        assert!(is_prime(q), "reduction_at expects a prime, got {q}");
        let v_disc = valuation(self.disc, q);
        let v_j = if self.j_num == 0 {
            0
        } else {
            valuation(self.j_num, q) as i64 - valuation(self.j_den, q) as i64
        };
        let tag = if v_disc == 0 {
            ReductionTag::Good
        } else if self.c4.rem_euclid(q as i128) == 0 {
            ReductionTag::Additive
        } else {
            let split = if q > 3 {
                legendre(-self.c6, q) == 1
            } else {
                self.node_is_split(q)
            };
            if split {
                ReductionTag::MultiplicativeSplit
            } else {
                ReductionTag::MultiplicativeNonsplit
            }
        };
        ReductionType { tag, v_disc, v_j }
    }

    /// Decide split vs nonsplit multiplicative reduction at `q` by locating
    /// the singular point of the reduced curve and counting rational zeros of
    /// the tangent cone: two distinct rational tangent lines give `2q - 1`
    /// zeros, a conjugate pair gives only the origin.
    ///
    /// Valid in every characteristic; required for `q in {2, 3}` where the
    /// `-c6` square test degenerates.
    fn node_is_split(&self, q: u64) -> bool {
        let m = q as i128;
        let a1 = (self.a1 as i128).rem_euclid(m) as u64;
        let a2 = (self.a2 as i128).rem_euclid(m) as u64;
        let a3 = (self.a3 as i128).rem_euclid(m) as u64;
        let a4 = (self.a4 as i128).rem_euclid(m) as u64;
        let a6 = (self.a6 as i128).rem_euclid(m) as u64;
        let red = |x: u64| x % q;

        // F(x, y) = y^2 + a1 xy + a3 y - x^3 - a2 x^2 - a4 x - a6 over F_q.
        let f = |x: u64, y: u64| -> u64 {
            let pos = y * y + a1 * x * y + a3 * y;
            let neg = x * x * x + a2 * x * x + a4 * x + a6;
            red(pos + q * q * q * q - red(neg) + q)
        };
        let fx = |x: u64, y: u64| -> u64 {
            let pos = a1 * y;
            let neg = 3 * x * x + 2 * a2 * x + a4;
            red(pos + q * q * q * q - red(neg) + q)
        };
        let fy = |x: u64, y: u64| -> u64 { red(2 * y + a1 * x + a3) };

        let mut singular = None;
        for x in 0..q {
            for y in 0..q {
                if f(x, y) == 0 && fx(x, y) == 0 && fy(x, y) == 0 {
                    assert!(
                        singular.is_none(),
                        "a Weierstrass cubic has at most one singular point"
                    );
                    singular = Some((x, y));
                }
            }
        }
        let (x0, _y0) = singular.expect("bad multiplicative reduction must have a rational node");

        // Tangent cone at the node: Q(u, v) = v^2 + a1 uv - (3 x0 + a2) u^2.
        let c = red(3 * x0 + a2);
        let zeros = (0..q)
            .flat_map(|u| (0..q).map(move |v| (u, v)))
            .filter(|&(u, v)| red(v * v + a1 * u * v + q * q - red(c * u * u)) == 0)
            .count() as u64;
        assert!(
            zeros == 2 * q - 1 || zeros == 1,
            "node tangent cone must split into distinct lines or stay irreducible"
        );
        zeros == 2 * q - 1
    }
}

impl std::fmt::Display for WeierstrassCurve {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "[{},{},{},{},{}]",
            self.a1, self.a2, self.a3, self.a4, self.a6
        )
    }
}

/// Family eligibility: an odd prime different from 7.
pub fn eligible_family_prime(l: u64) -> bool {
    l % 2 == 1 && l != 7 && is_prime(l)
}

fn derived_invariants(
    a1: i128,
    a2: i128,
    a3: i128,
    a4: i128,
    a6: i128,
) -> Option<(i128, i128, i128, i128, i128, i128, i128)> {
    let b2 = a1.checked_mul(a1)?.checked_add(4 * a2)?;
    let b4 = a1.checked_mul(a3)?.checked_add(2 * a4)?;
    let b6 = a3.checked_mul(a3)?.checked_add(a6.checked_mul(4)?)?;
    let b8 = a1
        .checked_mul(a1)?
        .checked_mul(a6)?
        .checked_add(4i128.checked_mul(a2)?.checked_mul(a6)?)?
        .checked_sub(a1.checked_mul(a3)?.checked_mul(a4)?)?
        .checked_add(a2.checked_mul(a3)?.checked_mul(a3)?)?
        .checked_sub(a4.checked_mul(a4)?)?;
    let c4 = b2.checked_mul(b2)?.checked_sub(24i128.checked_mul(b4)?)?;
    let c6 = b2
        .checked_mul(b2)?
        .checked_mul(-b2)?
        .checked_add(36i128.checked_mul(b2)?.checked_mul(b4)?)?
        .checked_sub(216i128.checked_mul(b6)?)?;
    let disc = b2
        .checked_mul(b2)?
        .checked_mul(-b8)?
        .checked_sub(8i128.checked_mul(b4)?.checked_mul(b4)?.checked_mul(b4)?)?
        .checked_sub(27i128.checked_mul(b6)?.checked_mul(b6)?)?
        .checked_add(9i128.checked_mul(b2)?.checked_mul(b4)?.checked_mul(b6)?)?;
    Some((b2, b4, b6, b8, c4, c6, disc))
}

/// Budget knobs for [`factor`]: trial-division bound and a cap on the total
/// number of rho iterations spent on stubborn cofactors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactorBudget {
    pub trial_bound: u64,
    pub rho_iterations: u64,
}

impl Default for FactorBudget {
    fn default() -> Self {
        FactorBudget {
            trial_bound: 1_000_000,
            rho_iterations: 2_000_000,
        }
    }
}

/// A signed integer in fully factored form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactoredInteger {
    /// +1 or -1.
    pub sign: i8,
    /// `(prime, exponent)` pairs, primes strictly increasing, exponents >= 1.
    pub factors: Vec<(u64, u32)>,
}

impl FactoredInteger {
    /// Multiply the factorization back out.
    pub fn reconstruct(&self) -> i128 {
        let mut acc: i128 = self.sign as i128;
        for &(p, e) in &self.factors {
            for _ in 0..e {
                acc *= p as i128;
            }
        }
        acc
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.factors.iter().map(|&(p, _)| p)
    }

    /// Exponent of `p` in the factorization (0 if absent).
    pub fn exponent_of(&self, p: u64) -> u32 {
        self.factors
            .iter()
            .find(|&&(q, _)| q == p)
            .map_or(0, |&(_, e)| e)
    }

    /// The squarefree part with sign: product of primes with odd exponent.
    pub fn squarefree_part(&self) -> i128 {
        let mut acc = self.sign as i128;
        for &(p, e) in &self.factors {
            if e % 2 == 1 {
                acc *= p as i128;
            }
        }
        acc
    }

    /// The cubefree part of the absolute value: exponents reduced mod 3.
    pub fn cubefree_part_abs(&self) -> i128 {
        let mut acc = 1i128;
        for &(p, e) in &self.factors {
            for _ in 0..(e % 3) {
                acc *= p as i128;
            }
        }
        acc
    }
}

/// Complete prime factorization of a nonzero integer with default budgets.
pub fn factor(n: i128) -> Result<FactoredInteger, Error> {
    factor_with_budget(n, &FactorBudget::default())
}

/// Complete prime factorization: trial division up to `budget.trial_bound`,
/// then Brent's variant of Pollard rho on any remaining 64-bit cofactors.
/// Cofactors that exceed 64 bits after trial division are rejected with
/// [`Error::FactorizationBudgetExceeded`]; desk-scale inputs never reach that.
pub fn factor_with_budget(n: i128, budget: &FactorBudget) -> Result<FactoredInteger, Error> {
    assert!(n != 0, "factor expects a nonzero integer");
    let sign: i8 = if n < 0 { -1 } else { 1 };
    let mut m = n.unsigned_abs();
    let mut factors: Vec<(u64, u32)> = Vec::new();
    let push =
        |factors: &mut Vec<(u64, u32)>, p: u64| match factors.iter_mut().find(|(q, _)| *q == p) {
            Some((_, e)) => *e += 1,
            None => factors.push((p, 1)),
        };

    while m.is_multiple_of(2) {
        push(&mut factors, 2);
        m /= 2;
    }
    let mut d: u64 = 3;
    while d <= budget.trial_bound && (d as u128) * (d as u128) <= m {
        while m.is_multiple_of(d as u128) {
            push(&mut factors, d);
            m /= d as u128;
        }
        d += 2;
    }

    if m > 1 {
        if (d as u128) * (d as u128) > m {
            // Trial division exhausted sqrt(m): the cofactor is prime.
            push(&mut factors, m as u64);
        } else {
            // No factor up to the trial bound; split 64-bit cofactors by rho.
            if m > u64::MAX as u128 {
                return Err(Error::FactorizationBudgetExceeded {
                    value: n,
                    cofactor: m,
                });
            }
            let mut spent = 0u64;
            let mut stack = vec![m as u64];
            while let Some(c) = stack.pop() {
                if is_prime(c) {
                    push(&mut factors, c);
                    continue;
                }
                match brent_rho(c, budget.rho_iterations.saturating_sub(spent), &mut spent) {
                    Some(f) => {
                        stack.push(f);
                        stack.push(c / f);
                    }
                    None => {
                        return Err(Error::FactorizationBudgetExceeded {
                            value: n,
                            cofactor: c as u128,
                        })
                    }
                }
            }
        }
    }

    factors.sort_unstable();
    let result = FactoredInteger { sign, factors };
    debug_assert_eq!(result.reconstruct(), n);
    Ok(result)
}

/// Brent's cycle-finding variant of Pollard rho. Returns a nontrivial factor
/// of the odd composite `n`, or `None` if the iteration allowance runs out.
fn brent_rho(n: u64, allowance: u64, spent: &mut u64) -> Option<u64> {
    use crate::arith::mul_mod;
    debug_assert!(n > 3 && n % 2 == 1 && !is_prime(n));
    let mut used = 0u64;
    for c in 1..64u64 {
        let f = |x: u64| (mul_mod(x, x, n) + c) % n;
        let (mut x, mut y, mut q) = (2u64, 2u64, 1u64);
        let mut g = 1u64;
        let mut xs = x;
        let mut r = 1u64;
        while g == 1 {
            x = y;
            for _ in 0..r {
                y = f(y);
            }
            let mut k = 0u64;
            while k < r && g == 1 {
                xs = y;
                let chunk = 128.min(r - k);
                for _ in 0..chunk {
                    y = f(y);
                    q = mul_mod(q, x.abs_diff(y).max(1), n);
                }
                g = num_integer::gcd(q, n);
                k += chunk;
                used += chunk;
                if used > allowance {
                    *spent += used;
                    return None;
                }
            }
            r *= 2;
        }
        if g == n {
            // Backtrack one step at a time to recover the factor.
            g = 1;
            while g == 1 {
                xs = f(xs);
                g = num_integer::gcd(x.abs_diff(xs).max(1), n);
                used += 1;
                if used > allowance {
                    *spent += used;
                    return None;
                }
            }
        }
        if g != n {
            *spent += used;
            return Some(g);
        }
        // Degenerate cycle for this polynomial; retry with the next offset.
    }
    *spent += used;
    None
}
