//! Serialized form of a frame report.

use std::io::Write;

use blaschke_core::frames::{FrameClass, FrameReport};
use serde::{Deserialize, Serialize};

use crate::config::{to_pair, Pair, RunConfig};
use crate::error::{CliError, Result};
use crate::formats::part_name;

pub const SCHEMA_VERSION: u32 = 1;
pub const LIBRARY_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportJson {
    pub schema_version: u32,
    pub library_version: String,
    pub config: RunConfig,
    pub frame_class: String,
    pub parseval: ParsevalJson,
    pub redundant: Vec<usize>,
    pub disagreements: Vec<usize>,
    pub borderline: Vec<usize>,
    pub tolerances: TolerancesJson,
    pub synthesis: String,
    pub per_index: Vec<IndexJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParsevalJson {
    pub lower: f64,
    pub upper: f64,
    /// `interior` or `extended`.
    pub source: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TolerancesJson {
    pub christensen: f64,
    pub formula: f64,
    pub borderline_factor: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndexJson {
    pub m: usize,
    pub part: String,
    pub s: Option<usize>,
    pub norm_formula: f64,
    pub norm_direct: f64,
    pub redundant: bool,
    pub redundant_christensen: bool,
    pub derivative_row: Vec<Pair>,
    pub margin: f64,
    pub borderline: bool,
}

pub fn class_name(c: FrameClass) -> &'static str {
    match c {
        FrameClass::RieszBasis => "riesz_basis",
        FrameClass::PartiallyRedundant => "partially_redundant",
        FrameClass::FullyInsured => "fully_insured",
    }
}

impl ReportJson {
    pub fn new(config: &RunConfig, r: &FrameReport) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            library_version: LIBRARY_VERSION.to_string(),
            config: config.clone(),
            frame_class: class_name(r.frame_class).to_string(),
            parseval: ParsevalJson {
                lower: r.parseval.lower,
                upper: r.parseval.upper,
                source: if r.parseval.interior {
                    "interior"
                } else {
                    "extended"
                }
                .to_string(),
            },
            redundant: r.redundant_set(),
            disagreements: r.disagreements.clone(),
            borderline: r.borderline_set(),
            tolerances: TolerancesJson {
                christensen: r.tolerances.christensen,
                formula: r.tolerances.formula,
                borderline_factor: r.tolerances.borderline_factor,
            },
            synthesis: "B(V*) acting on the canonical basis of the truncation".to_string(),
            per_index: r
                .per_index
                .iter()
                .map(|x| IndexJson {
                    m: x.m,
                    part: part_name(x.part).to_string(),
                    s: x.s,
                    norm_formula: x.norm_formula,
                    norm_direct: x.norm_direct,
                    redundant: x.redundant,
                    redundant_christensen: x.redundant_christensen,
                    derivative_row: x.derivative_row.iter().copied().map(to_pair).collect(),
                    margin: x.margin,
                    borderline: x.borderline,
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// One row per index: `m, part, s, norm_formula, norm_direct, redundant, margin`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let fmt = |e: csv::Error| CliError::Format(e.to_string());
        out.write_record([
            "m",
            "part",
            "s",
            "norm_formula",
            "norm_direct",
            "redundant",
            "margin",
        ])
        .map_err(fmt)?;
        for r in &self.per_index {
            out.write_record([
                r.m.to_string(),
                r.part.clone(),
                r.s.map(|s| s.to_string()).unwrap_or_default(),
                r.norm_formula.to_string(),
                r.norm_direct.to_string(),
                r.redundant.to_string(),
                r.margin.to_string(),
            ])
            .map_err(fmt)?;
        }
        out.flush().map_err(|e| CliError::Format(e.to_string()))
    }
}
