//! Suite bodies: each turns a validated configuration into claim records.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use num_rational::Rational64;
use rayon::prelude::*;
use serde_json::json;
use twoadic::colmez::{self, CzeroSystem, ZComponents};
use twoadic::digitsum::{self, Part};
use twoadic::fermat::{self, BranchData, FermatCase, FermatError};
use twoadic::report::ClaimRecord;

use crate::ConfigError;

pub fn base2(max: u64) -> Vec<ClaimRecord> {
    let params = json!({ "max": max });
    let mut out = Vec::new();
    let sub = digitsum::subadditivity_violation(max);
    out.push(ClaimRecord::new(
        "base2.subadditivity",
        "S(l1 + l2) <= S(l1) + S(l2), strict when l1 = l2 > 0",
        params.clone(),
        sub.is_none(),
        json!({ "violation": sub }),
    ));
    let scaling = digitsum::scaling_violation(max);
    out.push(ClaimRecord::new(
        "base2.scaling",
        "S(2l) = S(l)",
        params.clone(),
        scaling.is_none(),
        json!({ "violation": scaling }),
    ));
    let pairs = digitsum::pair_count_violation(max);
    out.push(ClaimRecord::new(
        "base2.pair_count",
        "exactly 2^S(l) - 2 ordered pairs with S(l1) + S(l2) = S(l)",
        params.clone(),
        pairs.is_none(),
        json!({ "violation": pairs }),
    ));
    let report = digitsum::check_possibilities(max);
    for part in Part::ALL {
        let r = report.part(part);
        out.push(ClaimRecord::new(
            format!("base2.part_{}", part.label()),
            part_statement(part),
            params.clone(),
            r.passed(),
            json!({ "checked": r.checked, "counterexample": r.counterexample }),
        ));
    }
    out
}

fn part_statement(part: Part) -> &'static str {
    match part {
        Part::I => "2S(l/4) - 2 <= S(l)/2",
        Part::II => "S(l/2) - 1 <= S(l)/2",
        Part::III => "S(l1)/2 + S(l2)/2 <= S(l)/2 for l1 + l2 = l",
        Part::IV => "S(l1) + S(l2) - 1 <= S(2(l1 + l2))/2",
        Part::V => "(S(l1) + S(l2) + S(l3))/2 <= S(l1 + l2 + l3)/2",
        Part::VI => "S(l1)/2 + 3S(l2)/2 <= S(l1 + 3l2)/2",
        Part::VII => "S(l1)/2 + S(l2)/2 + S(l3) <= S(l1 + l2 + 2l3)/2",
        Part::VIII => "sum of S(lj)/2 over four summands, plus 1, is at most S(sum)/2",
    }
}

/// The parameter sets selected by `--n/--a/--b`.
pub fn branch_cases(n: Option<u32>, a: Option<i64>, b: Option<i64>) -> Result<Vec<BranchData>, ConfigError> {
    match (n, a, b) {
        (Some(n), Some(a), Some(b)) => Ok(vec![fermat::validate_params(n as i64, a, b)?]),
        (Some(n), None, None) => {
            fermat::validate_params(n as i64, 1, 2).map_err(|_| ConfigError::Range(format!("n = {n} has no valid (a, b)")))?;
            Ok(fermat::all_valid(n))
        }
        (None, None, None) => Ok((3..=5).flat_map(fermat::all_valid).collect()),
        (None, _, _) => Err(ConfigError::Range("--a and --b require --n".into())),
        _ => Err(ConfigError::Range("--a and --b must be given together".into())),
    }
}

pub fn check_chis(chis: &[i64]) -> Result<(), ConfigError> {
    match chis.iter().find(|c| c.rem_euclid(2) != 1) {
        Some(c) => Err(ConfigError::Range(format!("chi = {c} is not odd"))),
        None => Ok(()),
    }
}

fn failed_case(id: &str, data: &BranchData, e: &FermatError) -> ClaimRecord {
    ClaimRecord::new(id, "the case can be computed", data.params(), false, json!({ "error": e.to_string() }))
}

pub fn series(cases: &[BranchData], order: usize) -> Vec<ClaimRecord> {
    cases
        .par_iter()
        .map(|&d| match FermatCase::compute(d, order) {
            Ok(case) => case.all_claims(),
            Err(e) => vec![failed_case("series.compute", &d, &e)],
        })
        .collect::<Vec<_>>()
        .concat()
}

pub fn galois(cases: &[BranchData], chis: &[i64]) -> Vec<ClaimRecord> {
    let jobs: Vec<(BranchData, i64)> = cases.iter().flat_map(|&d| chis.iter().map(move |&c| (d, c))).collect();
    jobs.par_iter()
        .map(|&(d, chi)| match fermat::galois_check(d, chi) {
            Ok(out) => out.claims,
            Err(e) => vec![failed_case("galois.compute", &d, &e)],
        })
        .collect::<Vec<_>>()
        .concat()
}

pub fn beta(cases: &[BranchData], chis: &[i64], order: usize) -> Result<Vec<ClaimRecord>, ConfigError> {
    const MAX_I: u32 = 5;
    let needed = (1usize << MAX_I) - 1;
    if order < needed {
        return Err(ConfigError::Range(format!("--order {order} is below {needed} = 2^{MAX_I} - 1")));
    }
    let mut all: Vec<BranchData> = cases.to_vec();
    for d in cases {
        for &c in chis {
            all.push(d.act(c)?);
        }
    }
    all.sort();
    all.dedup();
    let comps: BTreeMap<BranchData, Result<ZComponents, FermatError>> = all
        .par_iter()
        .map(|&d| (d, FermatCase::compute(d, order).map(|c| c.z_components())))
        .collect::<Vec<_>>()
        .into_iter()
        .collect();
    let mut out = Vec::new();
    for d in cases {
        for &chi in chis {
            let image = d.act(chi)?;
            let claims = match (&comps[d], &comps[&image]) {
                (Ok(x), Ok(y)) => fermat::beta_cross_check(*d, chi, x, y, MAX_I),
                (Err(e), _) | (_, Err(e)) => Err(e.clone()),
            };
            match claims {
                Ok(c) => out.extend(c),
                Err(e) => out.push(failed_case("beta.compute", d, &e)),
            }
        }
    }
    Ok(out)
}

pub fn transition(seed: u64, samples: usize, max_exp: u32, chis: &[i64]) -> Vec<ClaimRecord> {
    let triples = colmez::random_transition_triples(seed, samples, max_exp);
    let mut out = Vec::new();
    for q in &triples {
        for &chi in chis {
            let params = json!({ "q": q, "chi": chi, "seed": seed });
            let record = match (colmez::transition_sum(q, chi), colmez::beta_val_closed(q, chi)) {
                (Ok(sum), Ok(beta)) => ClaimRecord::new(
                    "transition.sum",
                    "V_2(γq) - V_2(q) + v(β_γ(q)) = 0",
                    params,
                    sum == Rational64::from_integer(0),
                    json!({
                        "v2_q": colmez::big_v_triple(q, 2).to_string(),
                        "v2_gamma_q": colmez::big_v_triple(&q.act(chi), 2).to_string(),
                        "beta": beta.to_string(),
                        "sum": sum.to_string(),
                    }),
                ),
                (Err(e), _) | (_, Err(e)) => ClaimRecord::new(
                    "transition.sum",
                    "V_2(γq) - V_2(q) + v(β_γ(q)) = 0",
                    params,
                    false,
                    json!({ "error": e.to_string() }),
                ),
            };
            out.push(record);
        }
    }
    out
}

pub fn czero(level: u32, dump: Option<&Path>) -> Result<Vec<ClaimRecord>, ConfigError> {
    let system = CzeroSystem::build(level);
    if let Some(path) = dump {
        let file = File::create(path).map_err(|e| ConfigError::Io(path.display().to_string(), e))?;
        system.dump(BufWriter::new(file)).map_err(|e| ConfigError::Io(path.display().to_string(), e))?;
    }
    let res = system.solve();
    let params = json!({ "level": level });
    Ok(vec![
        ClaimRecord::new(
            "czero.kernel_zero",
            "f(r) = 0 for every r in (1/2^N)Z/Z",
            params.clone(),
            res.kernel_dimension == 0,
            serde_json::to_value(&res).unwrap_or_default(),
        ),
        ClaimRecord::new(
            "czero.antisymmetry",
            "f(-r) = -f(r) follows from the constraints",
            params,
            res.rank == res.rank_with_antisymmetry,
            json!({ "rank": res.rank, "rank_with_antisymmetry": res.rank_with_antisymmetry }),
        ),
    ])
}
