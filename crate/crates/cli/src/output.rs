//! Text, fact and JSON renderings of command results.

use std::fmt::Write;

use serde_json::json;

use railsched_core::instance::Precomputed;
use railsched_core::preprocess::{PreprocessStats, PreprocessedInstance};
use railsched_core::solution::{ExactQuality, SolveReport};
use railsched_core::validator::ViolationReport;
use railsched_core::Edge;

pub fn solution_text(report: &SolveReport) -> String {
    let mut s = format!("status {}\n", report.status);
    if let Some(sol) = &report.solution {
        for (t, path) in &sol.paths {
            let stops: Vec<String> = path
                .iter()
                .map(|v| match sol.arrival(t, v) {
                    Some(a) => format!("{v}@{a}"),
                    None => v.to_string(),
                })
                .collect();
            let _ = writeln!(s, "{t}: {}", stops.join(" -> "));
        }
        if let Some((a, b)) = sol.approx_quality {
            let _ = writeln!(s, "approx quality ({a},{b})");
        }
        if let Some((d, r)) = sol.exact_quality {
            let _ = writeln!(s, "exact quality ({d},{r})");
        }
    }
    let st = &report.stats;
    let _ = writeln!(
        s,
        "T {:.3}s GT {:.3}s CH {} CO {} restarts {} models {}",
        st.total_time, st.ground_time, st.choices, st.conflicts, st.restarts, st.models
    );
    s
}

pub fn solution_facts(report: &SolveReport) -> String {
    let mut s = format!("% status {}\n", report.status);
    if let Some(sol) = &report.solution {
        for (t, path) in &sol.paths {
            for w in path.windows(2) {
                let _ = writeln!(s, "route({t},{}).", Edge::new(w[0].clone(), w[1].clone()).to_term());
            }
            for v in path {
                if let Some(a) = sol.arrival(t, v) {
                    let _ = writeln!(s, "arrival({t},{v},{a}).");
                }
            }
        }
    }
    s
}

pub fn preprocess_text(st: &PreprocessStats) -> String {
    let mut s = String::new();
    for (name, n) in [
        ("#r", st.resources),
        ("#sr", st.subsumed),
        ("#rtl", st.incidences),
        ("#ra", st.areas),
        ("#ec", st.edge_conflicts),
        ("#rac", st.area_conflicts),
        ("#vnn", st.node_vars),
        ("#vhn", st.height_vars),
    ] {
        let _ = writeln!(s, "{name:<5} {n}");
    }
    for (t, (nodes, heights)) in &st.per_train_vars {
        let _ = writeln!(s, "{t}: {nodes} -> {heights} variables");
    }
    s
}

/// The computed areas and mandatory edges in precomputed-fact form.
pub fn area_facts(pre: &PreprocessedInstance) -> Precomputed {
    let mut p = Precomputed::default();
    for a in &pre.coverage.areas {
        let t = pre.instance.trains[a.train].id.clone();
        let key = (t, a.resource.clone(), a.id.clone());
        p.areas.insert(key.clone(), a.edges.clone());
        p.entry.insert(key.clone(), a.entry);
        p.exit.insert(key, a.exit);
    }
    for (t, m) in pre.instance.trains.iter().zip(&pre.mandatory) {
        p.mandatory.insert(t.id.clone(), m.clone());
    }
    p
}

fn quality(exact: &ExactQuality) -> String {
    format!("({},{})", exact.0, exact.1)
}

pub fn validation_text(violations: &[ViolationReport], exact: ExactQuality, approx: (i64, i64)) -> String {
    let mut s = String::new();
    for v in violations {
        let _ = writeln!(s, "{v}");
    }
    if violations.is_empty() {
        s.push_str("feasible\n");
    } else {
        let _ = writeln!(s, "infeasible: {} violations", violations.len());
    }
    let _ = writeln!(s, "exact quality {}", quality(&exact));
    let _ = writeln!(s, "approx quality ({},{})", approx.0, approx.1);
    s
}

pub fn validation_json(violations: &[ViolationReport], exact: ExactQuality, approx: (i64, i64)) -> String {
    let doc = json!({
        "feasible": violations.is_empty(),
        "violations": violations
            .iter()
            .map(|v| json!({
                "condition": v.condition.number(),
                "kind": format!("{:?}", v.condition),
                "entities": v.entities,
                "measured": v.measured,
                "required": v.required,
            }))
            .collect::<Vec<_>>(),
        "exact_quality": { "delay_minutes": exact.0.to_string(), "route_penalty": exact.1 },
        "approx_quality": [approx.0, approx.1],
    });
    serde_json::to_string_pretty(&doc).expect("json value serializes")
}
