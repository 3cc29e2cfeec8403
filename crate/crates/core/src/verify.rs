//! Lemma verification suites producing a machine-readable report.
//!
//! Each result is either required (the statement of a lemma or its stated
//! consequence) or informational (a stated intermediate value). A suite
//! passes when every required result passes.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use serde_json::{json, Value};

use crate::cocycle::{
    hole_triangle, product, state_partition, trial_rng, triangles_tile_simplex, Word,
};
use crate::dimension::{verify_gamma_lemmas, zariski_report, GammaConfig, REFERENCE_X};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::itm::LengthVector;
use crate::rational::{fmt_q, q, random_unit, Q};
use crate::renorm::{gauss_step, gauss_via_induction, Letter, Perm};
use crate::simplicial::{arc_graph, check_strong_nondegeneracy_cond2, first_return_products};
use crate::spectrum::{cone_sup_dnorm, norm_one_direct, table1_compare};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Table1,
    Norms,
    Gamma,
    Zariski,
    Simplicial,
    Gauss,
    Partition,
    All,
}

impl Suite {
    pub const EACH: [Suite; 7] = [
        Suite::Table1,
        Suite::Norms,
        Suite::Gamma,
        Suite::Zariski,
        Suite::Simplicial,
        Suite::Gauss,
        Suite::Partition,
    ];
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "table1" => Suite::Table1,
            "norms" => Suite::Norms,
            "gamma" => Suite::Gamma,
            "zariski" => Suite::Zariski,
            "simplicial" => Suite::Simplicial,
            "gauss" => Suite::Gauss,
            "partition" => Suite::Partition,
            "all" => Suite::All,
            _ => return Err(Error::Parse(format!("unknown suite '{s}'"))),
        })
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).expect("unit variant");
        f.write_str(s.as_str().expect("string"))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LemmaResult {
    pub suite: Suite,
    pub lemma: String,
    pub pass: bool,
    pub required: bool,
    pub witness: Value,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub suite: Suite,
    pub passed: usize,
    pub failed: usize,
    pub required_failed: usize,
    pub ok: bool,
    pub results: Vec<LemmaResult>,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct VerifyConfig {
    pub seed: u64,
    pub gamma: GammaConfig,
    pub gauss_samples: usize,
    pub max_den: i64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            seed: 0,
            gamma: GammaConfig::default(),
            gauss_samples: 1000,
            max_den: 10_000,
        }
    }
}

struct Collector {
    suite: Suite,
    out: Vec<LemmaResult>,
}

impl Collector {
    fn push(&mut self, lemma: impl Into<String>, pass: bool, required: bool, witness: Value) {
        self.out.push(LemmaResult {
            suite: self.suite,
            lemma: lemma.into(),
            pass,
            required,
            witness,
        });
    }
}

fn word(s: &str) -> Word {
    s.parse().expect("literal word")
}

fn table1(c: &mut Collector) {
    let t = table1_compare();
    let off: Vec<usize> = t
        .rows
        .iter()
        .filter(|r| !r.verbatim())
        .map(|r| r.row)
        .collect();
    c.push(
        "norm table: every row reproduces verbatim",
        t.verbatim_rows == t.reference_rows && t.computed_rows == t.reference_rows,
        true,
        json!({ "verbatim_rows": t.verbatim_rows, "reference_rows": t.reference_rows, "mismatched_rows": off }),
    );
    c.push(
        "norm table: both norms agree on every row",
        t.rows.iter().all(|r| r.pair_matches && r.norms_match),
        true,
        json!({ "rows": t.rows.len() }),
    );
    c.push(
        "norm table: maximal ratio is 4/5",
        t.max_ratio == q(4, 5),
        true,
        json!(fmt_q(&t.max_ratio)),
    );
    let inconsistent: Vec<usize> = t
        .rows
        .iter()
        .filter(|r| r.reference_z_inconsistent || r.reference_mtz_inconsistent)
        .map(|r| r.row)
        .collect();
    c.push(
        "norm table: mismatched rows are exactly the self-inconsistent reference rows",
        inconsistent == off,
        false,
        json!({ "self_inconsistent_rows": inconsistent }),
    );
}

fn norms(c: &mut Collector) -> Result<()> {
    for crossing in [Letter::CA, Letter::CB] {
        let stay = if crossing == Letter::CA { "A" } else { "B" };
        for k in 0..=10 {
            let r = norm_one_direct(k, crossing)?;
            c.push(
                format!("cone norm of {stay}^{k} {crossing} equals 1"),
                r.cone_sup == Q::from_integer(1.into()),
                true,
                json!({
                    "value": fmt_q(&r.cone_sup),
                    "reduction_holds": r.reduction_holds,
                    "equality_witness_holds": r.equality_witness_holds,
                    "squeeze_holds": r.squeeze_holds,
                    "squeeze_counterexample": r.squeeze_counterexample.as_ref().map(|v| v.iter().map(fmt_q).collect::<Vec<_>>()),
                }),
            );
        }
    }
    for w in ["AaBb", "BbAa"] {
        let r = cone_sup_dnorm(&product(&word(w))?.matrix)?;
        c.push(
            format!("cone norm of {w} equals 4/5"),
            r.value == q(4, 5),
            true,
            json!({ "value": fmt_q(&r.value), "witness": r.witness }),
        );
    }
    Ok(())
}

fn gamma(c: &mut Collector, cfg: &VerifyConfig, exec: Execution) -> Result<()> {
    let r = verify_gamma_lemmas(&cfg.gamma, exec)?;
    for g in &r.generator_checks {
        c.push(g.name.clone(), g.ok, g.required, json!(g.detail));
    }
    c.push(
        "sub-simplex inclusion for words with mixed tails",
        r.inclusion_failures == 0,
        true,
        json!({ "samples": r.samples, "failures": r.inclusion_failures, "first_failure": r.first_failure }),
    );
    c.push(
        "column norms bounded below by a multiple of the top singular value",
        r.epsilon2 > 0.0,
        true,
        json!({ "epsilon2": r.epsilon2, "witness": r.epsilon2_witness }),
    );
    c.push(
        "distortion constants are finite",
        r.c_diam.is_finite() && r.c_area.is_finite(),
        true,
        json!({ "c_diam": r.c_diam, "c_area": r.c_area }),
    );
    Ok(())
}

fn zariski(c: &mut Collector) {
    let r = zariski_report();
    c.push(
        "curves are affine in the parameter",
        r.curves_linear,
        true,
        json!(null),
    );
    c.push(
        "all eight elements are traceless",
        r.traceless,
        true,
        json!(null),
    );
    c.push(
        "the eight elements have rank 8",
        r.rank == 8,
        true,
        json!({ "rank": r.rank }),
    );
    for (i, ok) in r.reference_match.iter().enumerate() {
        c.push(
            format!("X{} matches its reference value", i + 1),
            *ok,
            false,
            json!({ "computed": r.matrices[i], "reference": REFERENCE_X[i] }),
        );
    }
}

fn simplicial(c: &mut Collector) -> Result<()> {
    let g = arc_graph();
    let white = [
        g.vertex("11").expect("vertex 11"),
        g.vertex("13").expect("vertex 13"),
    ];
    for (v, letters) in [
        (white[0], [Letter::A, Letter::CA]),
        (white[1], [Letter::B, Letter::CB]),
    ] {
        let mut got: Vec<String> = first_return_products(&g, v, &white)?
            .into_iter()
            .map(|(_, m)| m.to_string())
            .collect();
        let mut want: Vec<String> = letters
            .iter()
            .map(|l| crate::renorm::matrix_of(*l).to_string())
            .collect();
        got.sort();
        want.sort();
        c.push(
            format!(
                "first-return products at {} are {{{}, {}}}",
                g.name(v),
                letters[0],
                letters[1]
            ),
            got == want,
            true,
            json!({ "products": got }),
        );
    }
    let r = check_strong_nondegeneracy_cond2(&g);
    c.push(
        "strong non-degeneracy, combinatorial condition",
        r.holds,
        true,
        json!({ "subsets_checked": r.subsets_checked, "failures": r.failures }),
    );
    Ok(())
}

fn gauss(c: &mut Collector, cfg: &VerifyConfig) -> Result<()> {
    let mut rng = trial_rng(cfg.seed, 0x6a55);
    let (mut agree, mut not_applicable, mut mismatches) = (0, 0, Vec::new());
    for _ in 0..cfg.gauss_samples {
        let alpha = random_unit(&mut rng, cfg.max_den);
        let beta = &alpha * random_unit(&mut rng, cfg.max_den);
        let direct = gauss_step(&alpha, &beta)?;
        match gauss_via_induction(&alpha, &beta) {
            Ok(v) if v == direct => agree += 1,
            Err(Error::NotApplicable(_)) if direct.1 < Q::from_integer(0.into()) => {
                not_applicable += 1
            }
            other => mismatches.push(json!({
                "alpha": fmt_q(&alpha),
                "beta": fmt_q(&beta),
                "direct": [fmt_q(&direct.0), fmt_q(&direct.1)],
                "induction": format!("{other:?}"),
            })),
        }
    }
    mismatches.truncate(5);
    c.push(
        "Gauss map equals accelerated induction; not applicable exactly when beta' < 0",
        mismatches.is_empty(),
        true,
        json!({ "samples": cfg.gauss_samples, "agree": agree, "not_applicable": not_applicable, "mismatches": mismatches }),
    );
    Ok(())
}

fn partition(c: &mut Collector) -> Result<()> {
    for p in [Perm::P123, Perm::P213] {
        let tris = state_partition(p);
        c.push(
            format!("children and hole tile the simplex at {p:?}"),
            triangles_tile_simplex(&tris),
            true,
            json!(tris
                .iter()
                .map(|t| t.iter().map(|v| v.to_string()).collect::<Vec<_>>())
                .collect::<Vec<_>>()),
        );
    }
    let hole = hole_triangle(Perm::P123);
    let want = [
        LengthVector::new(q(0, 1), q(1, 1), q(0, 1))?,
        LengthVector::new(q(1, 2), q(1, 2), q(0, 1))?,
        LengthVector::new(q(1, 2), q(0, 1), q(1, 2))?,
    ];
    c.push(
        "hole vertices at P123",
        want.iter().all(|v| hole.contains(v)),
        true,
        json!(hole.iter().map(|v| v.to_string()).collect::<Vec<_>>()),
    );
    Ok(())
}

fn run_one(
    suite: Suite,
    cfg: &VerifyConfig,
    exec: Execution,
    out: &mut Vec<LemmaResult>,
) -> Result<()> {
    let mut c = Collector {
        suite,
        out: Vec::new(),
    };
    match suite {
        Suite::Table1 => table1(&mut c),
        Suite::Norms => norms(&mut c)?,
        Suite::Gamma => gamma(&mut c, cfg, exec)?,
        Suite::Zariski => zariski(&mut c),
        Suite::Simplicial => simplicial(&mut c)?,
        Suite::Gauss => gauss(&mut c, cfg)?,
        Suite::Partition => partition(&mut c)?,
        Suite::All => {
            for s in Suite::EACH {
                run_one(s, cfg, exec, &mut c.out)?;
            }
        }
    }
    out.append(&mut c.out);
    Ok(())
}

pub fn verify(suite: Suite, cfg: &VerifyConfig, exec: Execution) -> Result<VerifyReport> {
    let mut results = Vec::new();
    run_one(suite, cfg, exec, &mut results)?;
    let passed = results.iter().filter(|r| r.pass).count();
    let required_failed = results.iter().filter(|r| r.required && !r.pass).count();
    Ok(VerifyReport {
        suite,
        passed,
        failed: results.len() - passed,
        required_failed,
        ok: required_failed == 0,
        results,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> VerifyConfig {
        VerifyConfig {
            gamma: GammaConfig {
                sample_size: 200,
                ..GammaConfig::default()
            },
            gauss_samples: 200,
            ..VerifyConfig::default()
        }
    }

    fn run(s: Suite) -> VerifyReport {
        verify(s, &small(), Execution::Sequential).unwrap()
    }

    #[test]
    fn passing_suites() {
        for s in [
            Suite::Gamma,
            Suite::Zariski,
            Suite::Simplicial,
            Suite::Gauss,
            Suite::Partition,
        ] {
            let r = run(s);
            assert!(
                r.ok,
                "{s}: {:#?}",
                r.results
                    .iter()
                    .filter(|x| x.required && !x.pass)
                    .collect::<Vec<_>>()
            );
        }
    }

    #[test]
    fn failing_suites_name_their_failures() {
        let t = run(Suite::Table1);
        assert!(!t.ok);
        let failed: Vec<&str> = t
            .results
            .iter()
            .filter(|r| !r.pass)
            .map(|r| r.lemma.as_str())
            .collect();
        assert_eq!(failed, ["norm table: every row reproduces verbatim"]);
        let n = run(Suite::Norms);
        assert!(!n.ok);
        assert_eq!(n.required_failed, 22);
        assert!(n
            .results
            .iter()
            .filter(|r| r.lemma.contains("4/5"))
            .all(|r| r.pass));
    }

    #[test]
    fn all_is_the_union() {
        let all = run(Suite::All);
        let total: usize = Suite::EACH.iter().map(|s| run(*s).results.len()).sum();
        assert_eq!(all.results.len(), total);
        assert_eq!("gauss".parse::<Suite>().unwrap(), Suite::Gauss);
        assert_eq!(Suite::Table1.to_string(), "table1");
        assert!("nope".parse::<Suite>().is_err());
    }
}
