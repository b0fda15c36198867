//! Solutions, solve reports and their JSON form.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use crate::error::SolutionError;
use crate::instance::{Node, TrainId};
use crate::term::Term;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    Optimal,
    /// Time ran out after at least one solution was found.
    SatBound,
    Infeasible,
    /// Time ran out before any solution was found.
    Unknown,
}

impl SolveStatus {
    pub fn exit_code(self) -> i32 {
        match self {
            SolveStatus::Optimal => 0,
            SolveStatus::SatBound => 2,
            SolveStatus::Infeasible => 3,
            SolveStatus::Unknown => 4,
        }
    }
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Delay in minutes and route penalty.
pub type ExactQuality = (Rational64, i64);

/// Paths and arrival times per train.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Solution {
    pub paths: BTreeMap<TrainId, Vec<Node>>,
    pub arrivals: BTreeMap<TrainId, BTreeMap<Node, i64>>,
    /// Threshold penalty units and route penalty.
    pub approx_quality: Option<(i64, i64)>,
    pub exact_quality: Option<ExactQuality>,
}

impl Solution {
    pub fn arrival(&self, train: &TrainId, v: &Node) -> Option<i64> {
        self.arrivals.get(train)?.get(v).copied()
    }

    pub fn set_arrival(&mut self, train: &TrainId, v: &Node, at: i64) {
        self.arrivals.entry(train.clone()).or_default().insert(v.clone(), at);
    }
}

/// Counters reported with every solve. Times are in seconds.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveStats {
    #[serde(rename = "T")]
    pub total_time: f64,
    #[serde(rename = "GT")]
    pub ground_time: f64,
    #[serde(rename = "CH")]
    pub choices: u64,
    #[serde(rename = "CO")]
    pub conflicts: u64,
    pub restarts: u64,
    pub learned: u64,
    pub propagations: u64,
    pub theory_conflicts: u64,
    pub models: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveReport {
    pub status: SolveStatus,
    pub solution: Option<Solution>,
    pub stats: SolveStats,
}

#[derive(Serialize, Deserialize)]
struct ExactJson {
    delay_minutes: String,
    route_penalty: i64,
}

#[derive(Serialize, Deserialize)]
struct ReportJson {
    status: SolveStatus,
    #[serde(default)]
    paths: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    arrivals: BTreeMap<String, BTreeMap<String, i64>>,
    #[serde(default)]
    approx_quality: Option<[i64; 2]>,
    #[serde(default)]
    exact_quality: Option<ExactJson>,
    #[serde(default)]
    stats: Option<SolveStats>,
}

fn term(s: &str) -> Result<Term, SolutionError> {
    Term::parse(s).map_err(|_| SolutionError::Term(s.to_string()))
}

impl SolveReport {
    pub fn to_json(&self) -> String {
        let sol = self.solution.clone().unwrap_or_default();
        let doc = ReportJson {
            status: self.status,
            paths: sol
                .paths
                .iter()
                .map(|(t, p)| (t.to_string(), p.iter().map(Term::to_string).collect()))
                .collect(),
            arrivals: sol
                .arrivals
                .iter()
                .map(|(t, a)| (t.to_string(), a.iter().map(|(v, x)| (v.to_string(), *x)).collect()))
                .collect(),
            approx_quality: sol.approx_quality.map(|(a, b)| [a, b]),
            exact_quality: sol.exact_quality.map(|(d, r)| ExactJson {
                delay_minutes: d.to_string(),
                route_penalty: r,
            }),
            stats: Some(self.stats.clone()),
        };
        serde_json::to_string_pretty(&doc).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<SolveReport, SolutionError> {
        let doc: ReportJson = serde_json::from_str(text)?;
        let mut sol = Solution::default();
        for (t, path) in &doc.paths {
            let nodes = path.iter().map(|v| term(v)).collect::<Result<_, _>>()?;
            sol.paths.insert(term(t)?, nodes);
        }
        for (t, arr) in &doc.arrivals {
            let train = term(t)?;
            for (v, x) in arr {
                sol.set_arrival(&train, &term(v)?, *x);
            }
        }
        sol.approx_quality = doc.approx_quality.map(|[a, b]| (a, b));
        if let Some(e) = doc.exact_quality {
            let d: Rational64 = e
                .delay_minutes
                .parse()
                .map_err(|_| SolutionError::Term(e.delay_minutes.clone()))?;
            sol.exact_quality = Some((d, e.route_penalty));
        }
        let has_solution = !sol.paths.is_empty() || sol.approx_quality.is_some();
        Ok(SolveReport {
            status: doc.status,
            solution: has_solution.then_some(sol),
            stats: doc.stats.unwrap_or_default(),
        })
    }
}
