//! Late thresholds approximating delay.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::EncodeError;
use crate::instance::{Instance, Node, Threshold, TrainId};

/// How thresholds are generated for instances without `potlate` facts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ThresholdScheme {
    /// One threshold one second after the delay start.
    #[default]
    Binary,
    /// `d+1`, then every `m` seconds up to the latest arrival.
    Linear(i64),
}

impl FromStr for ThresholdScheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.split_once(':') {
            None if s == "binary" => Ok(ThresholdScheme::Binary),
            Some(("linear", m)) => match m.parse::<i64>() {
                Ok(m) if m >= 1 => Ok(ThresholdScheme::Linear(m)),
                _ => Err(format!("linear step must be a positive integer, got {m:?}")),
            },
            _ => Err(format!("unknown threshold scheme {s:?}; use binary or linear:<m>")),
        }
    }
}

impl fmt::Display for ThresholdScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ThresholdScheme::Binary => write!(f, "binary"),
            ThresholdScheme::Linear(m) => write!(f, "linear:{m}"),
        }
    }
}

/// Weights for sorted threshold times: `u − d` first, then `u − u_prev`.
pub fn weights(d: i64, times: &[i64]) -> Vec<Threshold> {
    let mut prev = d;
    times
        .iter()
        .map(|&at| {
            let th = Threshold {
                at,
                weight: at - prev,
            };
            prev = at;
            th
        })
        .collect()
}

pub fn gen_binary(d: i64, l: Option<i64>) -> Vec<Threshold> {
    if l.is_some_and(|l| l <= d) {
        return Vec::new();
    }
    weights(d, &[d + 1])
}

/// Without a latest arrival only the first threshold is produced.
pub fn gen_linear(d: i64, l: Option<i64>, m: i64) -> Vec<Threshold> {
    assert!(m >= 1, "linear step must be positive");
    let Some(l) = l else {
        return gen_binary(d, None);
    };
    if l <= d {
        return Vec::new();
    }
    let mut times = vec![d + 1];
    let mut k = 1;
    while d + k * m <= l {
        if d + k * m > d + 1 {
            times.push(d + k * m);
        }
        k += 1;
    }
    weights(d, &times)
}

/// Sum of the weights of all thresholds not after `arrival`.
pub fn penalty(thresholds: &[Threshold], arrival: i64) -> i64 {
    thresholds
        .iter()
        .filter(|th| th.at <= arrival)
        .map(|th| th.weight)
        .sum()
}

/// Delay start `d(t,v)`. With `potlate` facts it is derived from the first
/// threshold; without any, it is the earliest arrival.
pub fn delay_start(inst: &Instance, train: &TrainId, v: &Node) -> Option<i64> {
    if inst.objective.thresholds.is_empty() {
        inst.train(train).map(|t| t.earliest(v))
    } else {
        inst.delay_start(train, v)
    }
}

pub type ThresholdSet = BTreeMap<(TrainId, Node), Vec<Threshold>>;

/// Thresholds of every (train, node): the instance's own if it has any,
/// generated by `scheme` otherwise.
pub fn threshold_set(inst: &Instance, scheme: ThresholdScheme) -> Result<ThresholdSet, EncodeError> {
    if !inst.objective.thresholds.is_empty() {
        for ((t, v), ths) in &inst.objective.thresholds {
            let latest = inst.train(t).and_then(|tl| tl.latest(v));
            if let (Some(l), Some(last)) = (latest, ths.last()) {
                if last.at > l {
                    return Err(EncodeError::ThresholdBeyondLatest {
                        train: t.to_string(),
                        node: v.to_string(),
                        threshold: last.at,
                        latest: l,
                    });
                }
            }
        }
        return Ok(inst.objective.thresholds.clone());
    }
    let mut out = ThresholdSet::new();
    for t in &inst.trains {
        for v in &t.nodes {
            let (d, l) = (t.earliest(v), t.latest(v));
            let ths = match scheme {
                ThresholdScheme::Binary => gen_binary(d, l),
                ThresholdScheme::Linear(m) => gen_linear(d, l, m),
            };
            if !ths.is_empty() {
                out.insert((t.id.clone(), v.clone()), ths);
            }
        }
    }
    Ok(out)
}
