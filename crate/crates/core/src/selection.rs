//! Threshold-based path selection over a finished pool.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kg::KnowledgeGraph;
use crate::path_eval::PathFeature;
use crate::search::{PathPool, PoolEntry, PoolRecord};

/// Confidence and coverage floors, split by path length (1 vs. longer).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelectionThresholds {
    pub theta_c1: f64,
    pub theta_c2: f64,
    pub theta_p1: f64,
    pub theta_p2: f64,
}

impl SelectionThresholds {
    pub const NELL995: Self = Self::new(0.3, 0.5, 0.01, 0.1);
    pub const FB15K237_ORIGINAL: Self = Self::new(0.2, 0.3, 0.02, 0.2);
    pub const FB15K237_LOWERED: Self = Self::new(0.2, 0.2, 0.02, 0.02);
    pub const ALL: Self = Self::new(0.0, 0.0, 0.0, 0.0);

    pub const fn new(theta_c1: f64, theta_c2: f64, theta_p1: f64, theta_p2: f64) -> Self {
        Self {
            theta_c1,
            theta_c2,
            theta_p1,
            theta_p2,
        }
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "nell995" => Some(Self::NELL995),
            "fb15k237" | "fb15k237-lowered" => Some(Self::FB15K237_LOWERED),
            "fb15k237-original" => Some(Self::FB15K237_ORIGINAL),
            "all" => Some(Self::ALL),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for v in [self.theta_c1, self.theta_c2, self.theta_p1, self.theta_p2] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Config(format!("threshold {v} outside [0, 1]")));
            }
        }
        Ok(())
    }

    /// `(confidence, coverage)` floors for a path of `len` relations.
    pub fn for_length(&self, len: usize) -> (f64, f64) {
        if len <= 1 {
            (self.theta_c1, self.theta_p1)
        } else {
            (self.theta_c2, self.theta_p2)
        }
    }

    pub fn judge(&self, path: &PathFeature, entry: &PoolEntry) -> Verdict {
        let (min_conf, min_cov) = self.for_length(path.len());
        if entry.d_confidence() < min_conf {
            Verdict::Rejected(Rule::Confidence)
        } else if entry.d_coverage() < min_cov {
            Verdict::Rejected(Rule::Coverage)
        } else {
            Verdict::Kept
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    Confidence,
    Coverage,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Kept,
    Rejected(Rule),
}

/// Paths whose D-confidence and D-coverage both meet the length-specific
/// floors (inclusive), best first.
pub fn select_paths(pool: &PathPool, th: &SelectionThresholds) -> Vec<PathFeature> {
    let kept: Vec<PathFeature> = pool
        .ranked()
        .into_iter()
        .filter(|(p, e)| th.judge(p, e) == Verdict::Kept)
        .map(|(p, _)| p.clone())
        .collect();
    if kept.is_empty() && !pool.is_empty() {
        log::warn!("no path passed selection; reasoning falls back to a bias-only model");
    }
    kept
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionRecord {
    #[serde(flatten)]
    pub path: PoolRecord,
    pub kept: bool,
    pub rejected_by: Option<Rule>,
}

/// One record per pool path, in pool ranking order, with its verdict.
pub fn selection_report(kg: &KnowledgeGraph, pool: &PathPool, th: &SelectionThresholds) -> Vec<SelectionRecord> {
    pool.ranked()
        .into_iter()
        .map(|(p, e)| {
            let verdict = th.judge(p, e);
            SelectionRecord {
                path: PoolRecord::new(kg, p, e),
                kept: verdict == Verdict::Kept,
                rejected_by: match verdict {
                    Verdict::Kept => None,
                    Verdict::Rejected(rule) => Some(rule),
                },
            }
        })
        .collect()
}

pub fn write_selection_report<W: Write>(records: &[SelectionRecord], mut out: W) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}
