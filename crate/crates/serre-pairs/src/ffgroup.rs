//! Point counting on reduced curves over prime fields and Frobenius-trace
//! sampling streams.
//!
//! Counting is exhaustive in `x` with a quadratic-root count in `y`: for odd
//! `q` the substitution `Y = 2y + a1 x + a3` turns the curve into
//! `Y^2 = 4x^3 + b2 x^2 + 2 b4 x + b6`, and the number of square roots of
//! each right-hand value is read off a precomputed table. `q = 2` falls back
//! to the four-point affine loop.

use crate::arith::sieve_primes;
use crate::curves::WeierstrassCurve;
use crate::Error;
use serde::{Deserialize, Serialize};

/// Frobenius data at one good prime `q`: the trace `a_q` of every curve in
/// the batch, plus `q mod n`, which is the determinant of the Frobenius class
/// at level `n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrobeniusSample {
    pub q: u64,
    pub traces: Vec<i64>,
    #[serde(rename = "det")]
    pub det_residue: u64,
}

/// Number of square roots of each residue: `table[v] = #{y in F_q : y^2 = v}`.
fn sqrt_count_table(q: u64) -> Vec<u8> {
    let mut table = vec![0u8; q as usize];
    for y in 0..q {
        table[(y * y % q) as usize] += 1;
    }
    table
}

fn count_points_odd(model: &[u64; 5], q: u64, roots: &[u8]) -> u64 {
    let [a1, a2, a3, a4, a6] = *model;
    // b-invariants of the reduced model.
    let b2 = (a1 * a1 + 4 * a2) % q;
    let b4 = (2 * a4 + a1 * a3) % q;
    let b6 = (a3 * a3 + 4 * a6) % q;
    let mut affine = 0u64;
    for x in 0..q {
        let x2 = x * x % q;
        let rhs = (4 * x % q * x2 % q + b2 * x2 % q + 2 * b4 * x % q + b6) % q;
        affine += roots[rhs as usize] as u64;
    }
    affine + 1
}

fn count_points_char2(model: &[u64; 5]) -> u64 {
    let [a1, a2, a3, a4, a6] = *model;
    let mut affine = 0u64;
    for x in 0..2u64 {
        for y in 0..2u64 {
            let lhs = y * y + a1 * x * y + a3 * y;
            let rhs = x * x * x + a2 * x * x + a4 * x + a6;
            if lhs % 2 == rhs % 2 {
                affine += 1;
            }
        }
    }
    affine + 1
}

fn reduced_model(e: &WeierstrassCurve, q: u64) -> [u64; 5] {
    e.model().map(|a| (a as i128).rem_euclid(q as i128) as u64)
}

/// `#E(F_q)` including the point at infinity, for a prime `q` of good
/// reduction.
pub fn count_points(e: &WeierstrassCurve, q: u64) -> Result<u64, Error> {
    if e.discriminant().rem_euclid(q as i128) == 0 {
        return Err(Error::BadReductionPrime { q });
    }
    let model = reduced_model(e, q);
    let n = if q == 2 {
        count_points_char2(&model)
    } else {
        count_points_odd(&model, q, &sqrt_count_table(q))
    };
    Ok(n)
}

/// Frobenius trace `a_q = q + 1 - #E(F_q)`.
pub fn trace_of_frobenius(e: &WeierstrassCurve, q: u64) -> Result<i64, Error> {
    let n = count_points(e, q)?;
    let a = q as i64 + 1 - n as i64;
    // Hasse: a^2 <= 4q, asserted rather than clamped.
    assert!(
        (a as i128) * (a as i128) <= 4 * q as i128,
        "Hasse bound violated at q = {q}: a = {a}"
    );
    Ok(a)
}

/// Iterator of [`FrobeniusSample`]s over primes `q <= q_max` in increasing
/// order, skipping `q = 2`, primes dividing the modulus `n`, and primes of
/// bad reduction for any curve in the batch. The stream is a pure function of
/// its inputs.
pub struct SampleStream {
    curves: Vec<WeierstrassCurve>,
    modulus: u64,
    primes: std::vec::IntoIter<u64>,
}

impl Iterator for SampleStream {
    type Item = FrobeniusSample;

    fn next(&mut self) -> Option<FrobeniusSample> {
        let q = self.primes.next()?;
        let roots = if q > 2 {
            sqrt_count_table(q)
        } else {
            Vec::new()
        };
        let traces = self
            .curves
            .iter()
            .map(|e| {
                let model = reduced_model(e, q);
                let n = if q == 2 {
                    count_points_char2(&model)
                } else {
                    count_points_odd(&model, q, &roots)
                };
                let a = q as i64 + 1 - n as i64;
                assert!((a as i128) * (a as i128) <= 4 * q as i128);
                a
            })
            .collect();
        Some(FrobeniusSample {
            q,
            traces,
            det_residue: q % self.modulus,
        })
    }
}

/// Build the sampling stream for a batch of curves at level `n`.
///
/// Emitted primes are exactly the odd `q <= q_max` with `q` coprime to `n`
/// and to every discriminant in the batch, so that every sample corresponds
/// to an unramified Frobenius class. `q = 2` is always skipped: it carries a
/// single sample of no statistical weight and would special-case every
/// consumer.
pub fn sample_stream(curves: &[WeierstrassCurve], n: u64, q_max: u64) -> SampleStream {
    assert!(n >= 2, "sampling level must be at least 2");
    let primes: Vec<u64> = sieve_primes(q_max)
        .into_iter()
        .filter(|&q| q != 2)
        .filter(|&q| !n.is_multiple_of(q))
        .filter(|&q| {
            curves
                .iter()
                .all(|e| e.discriminant().rem_euclid(q as i128) != 0)
        })
        .collect();
    SampleStream {
        curves: curves.to_vec(),
        modulus: n,
        primes: primes.into_iter(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::WeierstrassCurve;

    /// Oracle: count points by iterating over all affine pairs of the
    /// original equation, independent of the complete-the-square path.
    fn naive_count(e: &WeierstrassCurve, q: u64) -> u64 {
        let [a1, a2, a3, a4, a6] = e.model().map(|a| (a as i128).rem_euclid(q as i128) as u64);
        let mut affine = 0u64;
        for x in 0..q {
            for y in 0..q {
                let lhs = (y * y + a1 * x * y + a3 * y) % q;
                let rhs = (x * x * x % q + a2 * x * x + a4 * x + a6) % q;
                if lhs == rhs {
                    affine += 1;
                }
            }
        }
        affine + 1
    }

    #[test]
    fn count_on_f5() {
        // y^2 = x^3 + x + 1 over F_5: x = 0,2,3,4 give squares, x = 1 does
        // not; 8 affine points plus infinity.
        let e = WeierstrassCurve::new([0, 0, 0, 1, 1]).unwrap();
        assert_eq!(count_points(&e, 5).unwrap(), 9);
        assert_eq!(trace_of_frobenius(&e, 5).unwrap(), -3);
    }

    #[test]
    fn supersingular_trace_zero() {
        // y^2 = x^3 - x has CM by i; at q = 3 mod 4 the trace vanishes.
        let e = WeierstrassCurve::new([0, 0, 0, -1, 0]).unwrap();
        assert_eq!(count_points(&e, 7).unwrap(), 8);
        assert_eq!(trace_of_frobenius(&e, 7).unwrap(), 0);
    }

    #[test]
    fn bad_prime_rejected() {
        let e3 = WeierstrassCurve::serre_family(3).unwrap();
        assert_eq!(count_points(&e3, 3), Err(Error::BadReductionPrime { q: 3 }));
        // 7 + 1 - N within the Hasse window |a| <= 5.
        let n = count_points(&e3, 7).unwrap();
        assert!((7 + 1 - n as i64).abs() <= 5);
    }

    #[test]
    fn counting_agrees_with_naive_enumeration() {
        let curves = [
            WeierstrassCurve::serre_family(3).unwrap(),
            WeierstrassCurve::serre_family(5).unwrap(),
            WeierstrassCurve::new([0, 0, 0, -1, 0]).unwrap(),
            WeierstrassCurve::new([0, 0, 0, 1, 1]).unwrap(),
            WeierstrassCurve::new([1, 1, 1, -1, 2]).unwrap(),
            WeierstrassCurve::new([1, 0, 1, 4, -6]).unwrap(),
        ];
        for e in &curves {
            for q in [2u64, 3, 5, 7, 11, 13, 17, 19, 23] {
                if e.discriminant().rem_euclid(q as i128) == 0 {
                    continue;
                }
                assert_eq!(
                    count_points(e, q).unwrap(),
                    naive_count(e, q),
                    "curve {e} at q = {q}"
                );
            }
        }
    }

    #[test]
    fn stream_prime_selection() {
        // [E_3], n = 5, q_max = 30: excludes 2 (always), 3 and 1297 (bad
        // reduction), 5 (the level).
        let e3 = WeierstrassCurve::serre_family(3).unwrap();
        let qs: Vec<u64> = sample_stream(&[e3], 5, 30).map(|s| s.q).collect();
        assert_eq!(qs, vec![7, 11, 13, 17, 19, 23, 29]);
    }

    #[test]
    fn stream_empty_batch() {
        let samples: Vec<FrobeniusSample> = sample_stream(&[], 5, 20).collect();
        assert!(!samples.is_empty());
        assert!(samples.iter().all(|s| s.traces.is_empty()));
        assert!(samples.iter().all(|s| s.det_residue == s.q % 5));
    }

    #[test]
    fn stream_excludes_all_bad_primes() {
        let e3 = WeierstrassCurve::serre_family(3).unwrap();
        let e5 = WeierstrassCurve::serre_family(5).unwrap();
        for s in sample_stream(&[e3, e5], 36, 100) {
            for p in [2u64, 3, 5, 1297, 2161] {
                assert_ne!(s.q, p);
            }
            assert_eq!(s.traces.len(), 2);
            assert_eq!(s.det_residue, s.q % 36);
        }
    }

    #[test]
    fn hasse_bound_on_stream() {
        let e3 = WeierstrassCurve::serre_family(3).unwrap();
        let e5 = WeierstrassCurve::serre_family(5).unwrap();
        for s in sample_stream(&[e3, e5], 5, 500) {
            for &a in &s.traces {
                assert!((a as i128) * (a as i128) <= 4 * s.q as i128);
            }
        }
    }

    #[test]
    fn trace_count_identity() {
        let e3 = WeierstrassCurve::serre_family(3).unwrap();
        for q in [5u64, 7, 11, 101] {
            let n = count_points(&e3, q).unwrap();
            let a = trace_of_frobenius(&e3, q).unwrap();
            assert_eq!(n as i64, q as i64 + 1 - a);
        }
    }
}
