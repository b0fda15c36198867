//! Acceptance gate. Prints one line per criterion and exits non-zero if any fails.

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use num_rational::Rational64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use railsched_core::dl::{DiffConstraint, DiffSystem, DiffVar, Outcome};
use railsched_core::encode::{sequence_hint, sequence_score, EncodeOptions};
use railsched_core::gen::{generate, GenParams};
use railsched_core::objective::{penalty, weights, ThresholdScheme};
use railsched_core::preprocess::preprocess;
use railsched_core::search::{solve_instance, SolverConfig};
use railsched_core::solution::SolveStatus;
use railsched_core::validator::{brute_force_solve, validate_solution, DEFAULT_BUDGET};
use railsched_core::{parse_instance, Instance, Term};

/// Objectives are compared with exact equality everywhere.
const CRIT1_TIME: Duration = Duration::from_secs(1);
const CRIT2_TIME: Duration = Duration::from_secs(1);
const CRIT5_INSTANCES: usize = 100;
const CRIT5_TIME: Duration = Duration::from_secs(300);
const CRIT6_SYSTEMS: usize = 10_000;
const CRIT6_MAX_VARS: usize = 30;
const CRIT6_MAX_CONSTRAINTS: usize = 120;
const CRIT6_WEIGHT: i64 = 100;
const CRIT8_PER_SIZE: usize = 15;
const CRIT8_MAX_MEDIAN_RATIO: f64 = 2.0;

type Verdict = Result<String, String>;

fn fixture(name: &str) -> Instance {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name);
    parse_instance(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn check(ok: bool, pass: String, fail: String) -> Verdict {
    if ok {
        Ok(pass)
    } else {
        Err(fail)
    }
}

fn golden_example() -> Verdict {
    let inst = fixture("reference.lp");
    let six = (Rational64::from_integer(6), 0);
    for opts in EncodeOptions::combinations() {
        let start = Instant::now();
        let report = solve_instance(&inst, &opts, &SolverConfig::default()).map_err(|e| e.to_string())?;
        let took = start.elapsed();
        let exact = report.solution.as_ref().and_then(|s| s.exact_quality);
        if report.status != SolveStatus::Optimal || exact != Some(six) || took > CRIT1_TIME {
            return Err(format!("options [{opts}]: {:?} exact {exact:?} in {took:?}", report.status));
        }
    }
    Ok("exact quality (6,0) under all 16 option sets".into())
}

fn preprocessing_fixtures() -> Verdict {
    let start = Instant::now();
    let inst = fixture("reference_full.lp");
    let pre = preprocess(&inst).map_err(|e| e.to_string())?;
    let stats = pre.stats(inst.network.resources.len());
    let sw2 = &inst.network.resources[&Term::sym("sw2")];
    let sw1 = &inst.network.resources[&Term::sym("sw1")];
    let singleton_in = |set: &BTreeSet<_>| {
        inst.network
            .resources
            .iter()
            .filter(|(_, es)| es.len() == 1 && es.is_subset(set))
            .map(|(r, _)| r.clone())
            .collect::<BTreeSet<Term>>()
    };
    let removed_ok = pre.removed == singleton_in(sw2) && pre.removed.len() == 5;
    let kept_ok = singleton_in(sw1).is_disjoint(&pre.removed);
    let t1 = stats.per_train_vars["t1"];
    let took = start.elapsed();
    check(
        removed_ok && kept_ok && stats.area_conflicts == 5 && stats.edge_conflicts == 15 && t1 == (8, 6) && took < CRIT2_TIME,
        format!("#sr 5, #ec 15 -> #rac 5, t1 vars 8 -> 6 in {took:?}"),
        format!(
            "removed {:?}, #ec {}, #rac {}, t1 {:?}",
            pre.removed, stats.edge_conflicts, stats.area_conflicts, t1
        ),
    )
}

fn threshold_fixture() -> Verdict {
    let ths = weights(5, &[6, 10, 14]);
    let pairs: Vec<(i64, i64)> = ths.iter().map(|t| (t.at, t.weight)).collect();
    let p = penalty(&ths, 12);
    check(
        pairs == [(6, 1), (10, 4), (14, 4)] && p == 5,
        "weights (6,1),(10,4),(14,4), penalty 5 at 12".into(),
        format!("weights {pairs:?}, penalty {p}"),
    )
}

fn heuristic_fixture() -> Verdict {
    let pre = preprocess(&fixture("reference.lp")).map_err(|e| e.to_string())?;
    let area = |t: &str| {
        let ti = pre.instance.train_index(&Term::sym(t)).unwrap();
        pre.coverage.of(ti, &Term::sym("sw1"))[0]
    };
    let s = sequence_hint(&pre, area("t1"), area("t2"));
    check(
        s == Some(-180) && sequence_score(0, 10, 100, 110) == 200,
        "s(t1,t2,sw1) = -180, t2 first".into(),
        format!("s = {s:?}"),
    )
}

/// Generated instances the oracle can enumerate, with their optima.
struct OracleCase {
    seed: u64,
    inst: Instance,
    optimum: Option<(i64, i64)>,
}

fn oracle_cases() -> Vec<OracleCase> {
    let mut cases = Vec::new();
    let mut seed = 0;
    while cases.len() < CRIT5_INSTANCES {
        let inst = generate(&GenParams {
            seed,
            ..GenParams::default()
        });
        if let Ok(best) = brute_force_solve(&inst, ThresholdScheme::Binary, DEFAULT_BUDGET) {
            cases.push(OracleCase {
                seed,
                inst,
                optimum: best.map(|(q, _)| q),
            });
        }
        seed += 1;
    }
    cases
}

fn solver_objective(inst: &Instance, opts: &EncodeOptions) -> Result<Option<(i64, i64)>, String> {
    let report = solve_instance(inst, opts, &SolverConfig::default()).map_err(|e| e.to_string())?;
    match report.status {
        SolveStatus::Optimal => {
            let sol = report.solution.expect("optimal reports carry a solution");
            let violations = validate_solution(inst, &sol);
            if !violations.is_empty() {
                return Err(format!("invalid solution: {}", violations[0]));
            }
            Ok(sol.approx_quality)
        }
        SolveStatus::Infeasible => Ok(None),
        other => Err(format!("status {other}")),
    }
}

fn oracle_equivalence(cases: &[OracleCase]) -> Verdict {
    let start = Instant::now();
    let mut feasible = 0;
    let mut delayed = 0;
    for c in cases {
        let got = solver_objective(&c.inst, &EncodeOptions::default()).map_err(|e| format!("seed {}: {e}", c.seed))?;
        if got != c.optimum {
            return Err(format!("seed {}: solver {got:?}, oracle {:?}", c.seed, c.optimum));
        }
        feasible += usize::from(got.is_some());
        delayed += usize::from(got.is_some_and(|(d, _)| d > 0));
    }
    let took = start.elapsed();
    check(
        took < CRIT5_TIME,
        format!(
            "{} instances agree ({feasible} feasible, {delayed} delayed) in {took:?}",
            cases.len()
        ),
        format!("took {took:?}"),
    )
}

fn dl_property_suite() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut ops = 0usize;
    for system in 0..CRIT6_SYSTEMS {
        let n = rng.random_range(1..=CRIT6_MAX_VARS);
        let budget = rng.random_range(1..=CRIT6_MAX_CONSTRAINTS);
        let mut dl: DiffSystem<usize> = DiffSystem::new();
        let vars: Vec<DiffVar> = (0..n).map(|i| dl.var(i)).collect();
        let mut active: Vec<(usize, usize, i64)> = Vec::new();
        let mut marks = Vec::new();
        let mut asserted = 0;
        while asserted < budget {
            ops += 1;
            match rng.random_range(0..10) {
                0 => marks.push((dl.checkpoint(), active.len())),
                1 if !marks.is_empty() => {
                    let k = rng.random_range(0..marks.len());
                    let (mark, len) = marks[k];
                    marks.truncate(k);
                    dl.retract_to(mark).map_err(|e| format!("system {system}: {e}"))?;
                    active.truncate(len);
                }
                _ => {
                    asserted += 1;
                    let pick = |rng: &mut ChaCha8Rng| {
                        if rng.random_bool(0.15) {
                            0
                        } else {
                            rng.random_range(1..=n)
                        }
                    };
                    let (u, v) = (pick(&mut rng), pick(&mut rng));
                    if u == v {
                        continue;
                    }
                    let d = rng.random_range(-CRIT6_WEIGHT..=CRIT6_WEIGHT);
                    let var = |i: usize| if i == 0 { DiffVar::ZERO } else { vars[i - 1] };
                    let out = dl
                        .assert_constraint(DiffConstraint::new(var(u), var(v), d, 0))
                        .map_err(|e| format!("system {system}: {e}"))?;
                    let mut with = active.clone();
                    with.push((u, v, d));
                    let expect = consistent(n + 1, &with);
                    if expect != (out == Outcome::Consistent) {
                        return Err(format!("system {system}: verdict {out:?}, oracle consistent = {expect}"));
                    }
                    if expect {
                        active = with;
                    }
                }
            }
            if rng.random_bool(0.2) {
                let got = dl.minimal_model().ok();
                let want = least_solution(n + 1, &active);
                if got != want {
                    return Err(format!("system {system}: minimal model {got:?}, oracle {want:?}"));
                }
            }
        }
    }
    Ok(format!("{CRIT6_SYSTEMS} systems, {ops} operations"))
}

/// Bellman-Ford from a virtual source over arcs v → u of weight d.
fn consistent(n: usize, cs: &[(usize, usize, i64)]) -> bool {
    let mut dist = vec![0i64; n];
    for _ in 0..=n {
        let mut changed = false;
        for &(u, v, d) in cs {
            if dist[v] + d < dist[u] {
                dist[u] = dist[v] + d;
                changed = true;
            }
        }
        if !changed {
            return true;
        }
    }
    false
}

/// Longest paths from zero over `x_v ≥ x_u − d`; `None` if some variable has no lower bound.
fn least_solution(n: usize, cs: &[(usize, usize, i64)]) -> Option<Vec<i64>> {
    let mut low: Vec<Option<i64>> = vec![None; n];
    low[0] = Some(0);
    for _ in 0..=n {
        for &(u, v, d) in cs {
            if let Some(lu) = low[u] {
                if low[v].is_none_or(|lv| lu - d > lv) {
                    low[v] = Some(lu - d);
                }
            }
        }
    }
    low.into_iter().collect()
}

fn neutrality(cases: &[OracleCase]) -> Verdict {
    let variants: Vec<EncodeOptions> = ["ol1", "ol2", "ac", "ol1,ol2,ac", "hs,ol1,ol2,ac"]
        .iter()
        .map(|s| s.parse().unwrap())
        .collect();
    for c in cases {
        let base = solver_objective(&c.inst, &EncodeOptions::default())?;
        for opts in &variants {
            let got = solver_objective(&c.inst, opts).map_err(|e| format!("seed {} [{opts}]: {e}", c.seed))?;
            if got != base {
                return Err(format!("seed {} [{opts}]: {got:?} vs {base:?}", c.seed));
            }
        }
    }
    Ok(format!("{} instances x {} option sets unchanged", cases.len(), variants.len()))
}

fn choice_sanity() -> Verdict {
    let tuned: EncodeOptions = "hs,ol2,ac".parse().unwrap();
    let mut medians = Vec::new();
    for trains in 2..=6 {
        let mut ratios = Vec::new();
        for k in 0..CRIT8_PER_SIZE {
            let inst = generate(&GenParams {
                trains,
                nodes: 8 + trains,
                seed: 1000 * trains as u64 + k as u64,
                ..GenParams::default()
            });
            let cfg = SolverConfig::default();
            let base = solve_instance(&inst, &EncodeOptions::default(), &cfg).map_err(|e| e.to_string())?;
            let with = solve_instance(&inst, &tuned, &cfg).map_err(|e| e.to_string())?;
            ratios.push((with.stats.choices as f64 + 1.0) / (base.stats.choices as f64 + 1.0));
        }
        ratios.sort_by(f64::total_cmp);
        medians.push(ratios[ratios.len() / 2]);
    }
    let shown: Vec<String> = medians.iter().map(|m| format!("{m:.2}")).collect();
    check(
        medians.iter().all(|&m| m <= CRIT8_MAX_MEDIAN_RATIO),
        format!("median choice ratios for 2..6 trains: {}", shown.join(" ")),
        format!("median choice ratios for 2..6 trains: {}", shown.join(" ")),
    )
}

fn main() {
    let cases = oracle_cases();
    let results: Vec<(u8, &str, Verdict)> = vec![
        (1, "golden example", golden_example()),
        (2, "preprocessing fixtures", preprocessing_fixtures()),
        (3, "threshold scheme", threshold_fixture()),
        (4, "sequence heuristic", heuristic_fixture()),
        (5, "oracle equivalence", oracle_equivalence(&cases)),
        (6, "difference logic properties", dl_property_suite()),
        (7, "neutrality of ol1/ol2/ac", neutrality(&cases)),
        (8, "choice count sanity", choice_sanity()),
    ];
    let mut failed = 0;
    for (n, name, verdict) in &results {
        match verdict {
            Ok(msg) => println!("criterion {n} PASS {name}: {msg}"),
            Err(msg) => {
                failed += 1;
                println!("criterion {n} FAIL {name}: {msg}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
