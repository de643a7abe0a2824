//! Command-line surface: configuration, dispatch, and report emission for
//! the verification and search workflows.
//!
//! Exit codes: 0 for a verified-true pair/tuple or a successful scan/search,
//! 1 for verified-false, 2 for usage or runtime errors.

use crate::curves::{FactorBudget, WeierstrassCurve};
use crate::entanglement::{search_partner, verify_ktuple, verify_pair, VerifyOptions};
use crate::ffgroup::sample_stream;
use crate::goursat::{fibered_product, goursat_decompose};
use crate::matgroups::{group_order, normal_subgroups, GroupKind, ProductElement, SubgroupSet};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use std::io::Write;

pub const EXIT_TRUE: i32 = 0;
pub const EXIT_FALSE: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "serre-pairs",
    about = "Certify pairs and k-tuples of rational elliptic curves as having maximally disjoint division fields",
    version
)]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
}

/// Curve inputs shared by the verification commands: family curves by their
/// prime, general curves by their full model.
#[derive(Debug, Args)]
pub struct CurveArgs {
    /// Family curve y^2 + xy = x^3 + l for this odd prime l != 7 (repeatable).
    #[arg(long = "l", value_name = "PRIME")]
    pub l: Vec<u64>,

    /// General model a1,a2,a3,a4,a6 as comma-separated integers (repeatable;
    /// listed after all --l curves).
    #[arg(long = "model", value_name = "A1,A2,A3,A4,A6")]
    pub model: Vec<String>,

    /// Attest that every --model curve is a Serre curve.
    #[arg(long = "assert-serre")]
    pub assert_serre: bool,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub curves: CurveArgs,

    /// Largest prime with an explicit per-prime elimination record.
    #[arg(long, default_value_t = 50)]
    pub pmax: u64,

    /// Prime bound for the statistical coverage cross-check.
    #[arg(long, default_value_t = 10_000)]
    pub qmax: u64,

    /// Run the Frobenius coverage cross-check at levels 4, 5, 9.
    #[arg(long)]
    pub coverage: bool,

    /// Trial-division bound for factorizations.
    #[arg(long = "factor-budget", default_value_t = 1_000_000)]
    pub factor_budget: u64,

    /// Emit the verdict as JSON.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Certify a pair of curves as a Serre pair.
    VerifyPair(VerifyArgs),

    /// Certify a k-tuple of curves pairwise.
    VerifyKtuple(VerifyArgs),

    /// Find family primes whose curve pairs with the given one.
    SearchPartner {
        /// Family prime of the fixed curve.
        #[arg(long = "l", value_name = "PRIME")]
        l: u64,

        /// How many partner primes to report.
        #[arg(long, default_value_t = 1)]
        count: usize,

        /// Trial-division bound for factorizations.
        #[arg(long = "factor-budget", default_value_t = 1_000_000)]
        factor_budget: u64,

        /// Emit the result as JSON.
        #[arg(long)]
        json: bool,
    },

    /// Stream Frobenius trace samples as JSON lines.
    FrobeniusScan {
        #[command(flatten)]
        curves: CurveArgs,

        /// Sampling level n (the determinant is reported mod n).
        #[arg(long, default_value_t = 5)]
        n: u64,

        /// Sample all good primes up to this bound.
        #[arg(long, default_value_t = 10_000)]
        qmax: u64,
    },

    /// Show subgroup orders, normal-subgroup lattices, and a worked
    /// fibered-product decomposition at a small modulus.
    GoursatDemo {
        /// Modulus for the demonstration.
        #[arg(long, default_value_t = 3)]
        n: u64,

        /// Emit the report as JSON.
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug, Serialize, Deserialize)]
struct GoursatDemoReport {
    n: u64,
    gl2_order: u64,
    sl2_order: u64,
    normal_subgroups_of_sl2: Vec<NormalSubgroupLine>,
    equal_det_pairs: Option<EqualDetReport>,
}

#[derive(Debug, Serialize, Deserialize)]
struct NormalSubgroupLine {
    order: u64,
    index: u64,
}

#[derive(Debug, Serialize, Deserialize)]
struct EqualDetReport {
    order: u64,
    kernel_order: u64,
    quotient_order: u64,
    round_trip_exact: bool,
}

fn parse_model(s: &str) -> Result<[i64; 5], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 5 {
        return Err(format!(
            "--model {s}: expected 5 comma-separated integers a1,a2,a3,a4,a6"
        ));
    }
    let mut model = [0i64; 5];
    for (slot, part) in model.iter_mut().zip(&parts) {
        *slot = part
            .parse::<i64>()
            .map_err(|_| format!("--model {s}: `{part}` is not an integer"))?;
    }
    Ok(model)
}

fn build_curves(args: &CurveArgs) -> Result<Vec<WeierstrassCurve>, String> {
    let mut curves = Vec::new();
    for &l in &args.l {
        curves.push(WeierstrassCurve::serre_family(l).map_err(|e| format!("--l {l}: {e}"))?);
    }
    for spec in &args.model {
        let model = parse_model(spec)?;
        curves.push(WeierstrassCurve::new(model).map_err(|e| format!("--model {spec}: {e}"))?);
    }
    Ok(curves)
}

fn verify_options(args: &VerifyArgs) -> VerifyOptions {
    VerifyOptions {
        p_max: args.pmax,
        q_max: args.qmax,
        run_coverage: args.coverage,
        assert_serre: args.curves.assert_serre,
        factor_budget: FactorBudget {
            trial_bound: args.factor_budget,
            ..FactorBudget::default()
        },
    }
}

fn render_checks(out: &mut dyn Write, checks: &[crate::entanglement::CriterionCheck]) {
    for c in checks {
        let mark = if c.pass { "pass" } else { "FAIL" };
        writeln!(out, "  [{mark}] {}: {}", c.name, c.witness).expect("write report");
    }
}

fn render_coverage(
    out: &mut dyn Write,
    coverage: &std::collections::BTreeMap<String, crate::entanglement::CoverageReport>,
) {
    for (n, r) in coverage {
        writeln!(
            out,
            "  coverage n={n}: {}/{} classes ({:.4}), chi2 {:.2} (dof {}), max|z| {:.2}, \
             samples {}{} [{}]",
            r.observed_classes,
            r.total_classes,
            r.coverage,
            r.chi_square,
            r.degrees_of_freedom,
            r.max_abs_z,
            r.samples,
            if r.insufficient_samples {
                ", insufficient samples"
            } else {
                ""
            },
            r.label
        )
        .expect("write report");
    }
}

/// Execute one parsed command, writing the report to `out`; returns the
/// process exit code.
pub fn run(config: RunConfig, out: &mut dyn Write) -> i32 {
    match config.command {
        Command::VerifyPair(args) => {
            let curves = match build_curves(&args.curves) {
                Ok(c) => c,
                Err(msg) => return usage_error(&msg),
            };
            if curves.len() != 2 {
                return usage_error(&format!(
                    "verify-pair needs exactly 2 curves via --l/--model, got {}",
                    curves.len()
                ));
            }
            let verdict = verify_pair(&curves[0], &curves[1], &verify_options(&args));
            if args.json {
                writeln!(out, "{}", serde_json::to_string_pretty(&verdict).unwrap())
                    .expect("write report");
            } else {
                writeln!(out, "pair: {} and {}", curves[0], curves[1]).expect("write report");
                render_checks(out, &verdict.checks);
                render_coverage(out, &verdict.coverage);
                writeln!(out, "serre pair: {}", verdict.serre_pair).expect("write report");
            }
            if verdict.serre_pair {
                EXIT_TRUE
            } else {
                EXIT_FALSE
            }
        }
        Command::VerifyKtuple(args) => {
            let curves = match build_curves(&args.curves) {
                Ok(c) => c,
                Err(msg) => return usage_error(&msg),
            };
            if curves.is_empty() {
                return usage_error("verify-ktuple needs at least 1 curve via --l/--model");
            }
            let verdict = verify_ktuple(&curves, &verify_options(&args));
            if args.json {
                writeln!(out, "{}", serde_json::to_string_pretty(&verdict).unwrap())
                    .expect("write report");
            } else {
                writeln!(
                    out,
                    "k-tuple of {} curves, expected joint-image index 2^{} = {}",
                    verdict.k, verdict.k, verdict.expected_index
                )
                .expect("write report");
                render_checks(out, &verdict.certificates);
                for entry in &verdict.pairs {
                    writeln!(
                        out,
                        "  pair (E{}, E{}): serre pair = {}",
                        entry.i, entry.j, entry.verdict.serre_pair
                    )
                    .expect("write report");
                    for c in entry.verdict.checks.iter().filter(|c| !c.pass) {
                        writeln!(out, "    [FAIL] {}: {}", c.name, c.witness)
                            .expect("write report");
                    }
                }
                writeln!(out, "serre {}-tuple: {}", verdict.k, verdict.serre_tuple)
                    .expect("write report");
            }
            if verdict.serre_tuple {
                EXIT_TRUE
            } else {
                EXIT_FALSE
            }
        }
        Command::SearchPartner {
            l,
            count,
            factor_budget,
            json,
        } => {
            let budget = FactorBudget {
                trial_bound: factor_budget,
                ..FactorBudget::default()
            };
            match search_partner(l, count, &budget) {
                Ok(partners) => {
                    if json {
                        let report = serde_json::json!({
                            "l1": l,
                            "count": count,
                            "partners": partners,
                        });
                        writeln!(out, "{}", serde_json::to_string_pretty(&report).unwrap())
                            .expect("write report");
                    } else {
                        for p in partners {
                            writeln!(out, "{p}").expect("write report");
                        }
                    }
                    EXIT_TRUE
                }
                Err(e) => usage_error(&format!("--l {l}: {e}")),
            }
        }
        Command::FrobeniusScan { curves, n, qmax } => {
            let curves = match build_curves(&curves) {
                Ok(c) => c,
                Err(msg) => return usage_error(&msg),
            };
            if n < 2 {
                return usage_error("--n must be at least 2");
            }
            for sample in sample_stream(&curves, n, qmax) {
                writeln!(out, "{}", serde_json::to_string(&sample).unwrap()).expect("write report");
            }
            EXIT_TRUE
        }
        Command::GoursatDemo { n, json } => match goursat_demo(n) {
            Ok(report) => {
                if json {
                    writeln!(out, "{}", serde_json::to_string_pretty(&report).unwrap())
                        .expect("write report");
                } else {
                    writeln!(out, "GL2(Z/{n}): order {}", report.gl2_order).expect("write report");
                    writeln!(out, "SL2(Z/{n}): order {}", report.sl2_order).expect("write report");
                    writeln!(out, "normal subgroups of SL2(Z/{n}):").expect("write report");
                    for line in &report.normal_subgroups_of_sl2 {
                        writeln!(out, "  order {:>6}  index {:>6}", line.order, line.index)
                            .expect("write report");
                    }
                    match &report.equal_det_pairs {
                        Some(d) => {
                            writeln!(
                                out,
                                "equal-determinant pairs: order {}, kernels SL2 (order {}), \
                                 quotient order {}, round trip exact: {}",
                                d.order, d.kernel_order, d.quotient_order, d.round_trip_exact
                            )
                            .expect("write report");
                        }
                        None => {
                            writeln!(out, "equal-determinant pairs: skipped (enumeration budget)")
                                .expect("write report");
                        }
                    }
                }
                EXIT_TRUE
            }
            Err(e) => usage_error(&format!("--n {n}: {e}")),
        },
    }
}

fn usage_error(msg: &str) -> i32 {
    eprintln!("error: {msg}");
    EXIT_ERROR
}

fn goursat_demo(n: u64) -> Result<GoursatDemoReport, crate::Error> {
    let gl2 = SubgroupSet::gl2(n)?;
    let sl2 = SubgroupSet::sl2(n)?;
    assert_eq!(gl2.order() as u128, group_order(n, GroupKind::Gl2));
    let normals = normal_subgroups(&sl2)?;
    let lattice = normals
        .iter()
        .map(|sub| NormalSubgroupLine {
            order: sub.order() as u64,
            index: (sl2.order() / sub.order()) as u64,
        })
        .collect();

    // The fibered-product demonstration enumerates |GL2|^2 pairs; keep it to
    // moduli where that stays comfortable.
    let equal_det_pairs = if (gl2.order() as u128).pow(2) <= 4_000_000 {
        let det = |x: &ProductElement| x.part(0).det();
        let dn = fibered_product(&gl2, &gl2, &det, &det)?;
        let invariant = goursat_decompose(&dn, &gl2, &gl2)?;
        let rebuilt = invariant.reassemble(&gl2, &gl2);
        Some(EqualDetReport {
            order: dn.order() as u64,
            kernel_order: invariant.n1.order() as u64,
            quotient_order: invariant.quotient_order() as u64,
            round_trip_exact: rebuilt.element_set() == dn.element_set()
                && invariant.verify_iso(&gl2, &gl2),
        })
    } else {
        None
    };

    Ok(GoursatDemoReport {
        n,
        gl2_order: gl2.order() as u64,
        sl2_order: sl2.order() as u64,
        normal_subgroups_of_sl2: lattice,
        equal_det_pairs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn model_parsing() {
        assert_eq!(parse_model("1,0,0,0,3").unwrap(), [1, 0, 0, 0, 3]);
        assert_eq!(parse_model(" 0, 0 ,0,-1,0 ").unwrap(), [0, 0, 0, -1, 0]);
        assert!(parse_model("1,2,3").is_err());
        assert!(parse_model("1,2,3,x,5").is_err());
    }

    #[test]
    fn curve_assembly_order_and_errors() {
        let args = CurveArgs {
            l: vec![3, 5],
            model: vec!["0,0,0,-1,0".into()],
            assert_serre: false,
        };
        let curves = build_curves(&args).unwrap();
        assert_eq!(curves.len(), 3);
        assert_eq!(curves[0].model(), [1, 0, 0, 0, 3]);
        assert_eq!(curves[2].model(), [0, 0, 0, -1, 0]);

        let bad = CurveArgs {
            l: vec![7],
            model: vec![],
            assert_serre: false,
        };
        let err = build_curves(&bad).unwrap_err();
        assert!(err.contains("--l 7"), "{err}");
    }

    #[test]
    fn demo_report_small_modulus() {
        let report = goursat_demo(3).unwrap();
        assert_eq!(report.gl2_order, 48);
        assert_eq!(report.sl2_order, 24);
        let orders: Vec<u64> = report
            .normal_subgroups_of_sl2
            .iter()
            .map(|l| l.order)
            .collect();
        assert_eq!(orders, vec![1, 2, 8, 24]);
        let dn = report.equal_det_pairs.unwrap();
        assert_eq!(dn.order, 1152);
        assert_eq!(dn.kernel_order, 24);
        assert_eq!(dn.quotient_order, 2);
        assert!(dn.round_trip_exact);
    }
}
