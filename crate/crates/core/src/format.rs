//! On-disk formats: JSON for chains and both quotients, CSV for the
//! comparison table. Writers emit deterministic, pretty-printed output.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::abstraction::{Imdpa, LumpedChain, Mdpa};
use crate::engine::ComparisonTable;
use crate::interval::{IntervalMatrix, IntervalRow};
use crate::model::LabeledMarkovChain;
use crate::{Error, Result};

#[derive(Serialize, Deserialize)]
struct RawState {
    id: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    label: Option<Vec<String>>,
}

#[derive(Serialize, Deserialize)]
struct RawModel {
    states: Vec<RawState>,
    initial: String,
    matrix: Vec<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    initial_distribution: Option<Vec<f64>>,
}

pub fn parse_model(json: &str) -> Result<LabeledMarkovChain> {
    let raw: RawModel = serde_json::from_str(json).map_err(|e| Error::Parse(e.to_string()))?;
    let mut ids = Vec::with_capacity(raw.states.len());
    let mut labels = Vec::with_capacity(raw.states.len());
    for state in raw.states {
        let label = state
            .label
            .ok_or_else(|| Error::MissingLabel(state.id.clone()))?;
        ids.push(state.id);
        labels.push(label.into_iter().collect::<BTreeSet<_>>());
    }
    LabeledMarkovChain::new(ids, labels, raw.matrix, &raw.initial, raw.initial_distribution)
}

fn raw_model(chain: &LabeledMarkovChain) -> RawModel {
    RawModel {
        states: chain
            .state_ids()
            .iter()
            .zip(chain.labels())
            .map(|(id, label)| RawState {
                id: id.clone(),
                label: Some(label.iter().cloned().collect()),
            })
            .collect(),
        initial: chain.initial_state().to_string(),
        matrix: chain.matrix().to_vec(),
        initial_distribution: chain.explicit_initial_distribution().map(|d| d.to_vec()),
    }
}

pub fn model_to_json(chain: &LabeledMarkovChain) -> String {
    let mut out = serde_json::to_string_pretty(&raw_model(chain)).expect("serializable");
    out.push('\n');
    out
}

#[derive(Serialize)]
struct RawLumped {
    #[serde(flatten)]
    model: RawModel,
    epsilon: f64,
    representatives: Vec<String>,
}

/// The lumped chain with its radius and representative list; the output
/// still parses as a plain model.
pub fn lumped_to_json(lumped: &LumpedChain) -> String {
    let raw = RawLumped {
        model: raw_model(lumped.chain()),
        epsilon: lumped.epsilon(),
        representatives: lumped.representatives().to_vec(),
    };
    let mut out = serde_json::to_string_pretty(&raw).expect("serializable");
    out.push('\n');
    out
}

#[derive(Serialize, Deserialize)]
struct RawImdpa {
    blocks: Vec<String>,
    labels: Vec<Vec<String>>,
    interval_rows: Vec<Vec<[f64; 2]>>,
    xi: Vec<f64>,
    initial: String,
}

pub fn parse_imdpa(json: &str) -> Result<Imdpa> {
    let raw: RawImdpa = serde_json::from_str(json).map_err(|e| Error::Parse(e.to_string()))?;
    let rows = raw
        .interval_rows
        .into_iter()
        .map(|row| {
            let (lower, upper) = row.iter().map(|b| (b[0], b[1])).unzip();
            IntervalRow::new(lower, upper)
        })
        .collect::<Result<Vec<_>>>()?;
    let initial = raw
        .blocks
        .iter()
        .position(|b| *b == raw.initial)
        .ok_or_else(|| Error::UnknownState(raw.initial.clone()))?;
    Imdpa::new(
        raw.blocks,
        raw.labels
            .into_iter()
            .map(|l| l.into_iter().collect())
            .collect(),
        IntervalMatrix::new(rows)?,
        raw.xi,
        initial,
    )
}

pub fn imdpa_to_json(imdpa: &Imdpa) -> String {
    let raw = RawImdpa {
        blocks: imdpa.block_names().to_vec(),
        labels: imdpa
            .block_labels()
            .iter()
            .map(|l| l.iter().cloned().collect())
            .collect(),
        interval_rows: imdpa
            .rows()
            .rows()
            .iter()
            .map(|row| {
                row.lower()
                    .iter()
                    .zip(row.upper())
                    .map(|(&lo, &hi)| [lo, hi])
                    .collect()
            })
            .collect(),
        xi: imdpa.xi().to_vec(),
        initial: imdpa.block_names()[imdpa.initial_block()].clone(),
    };
    let mut out = serde_json::to_string_pretty(&raw).expect("serializable");
    out.push('\n');
    out
}

#[derive(Serialize, Deserialize)]
struct RawMdpa {
    blocks: Vec<String>,
    labels: Vec<Vec<String>>,
    actions: Vec<Vec<Vec<f64>>>,
    xi: Vec<f64>,
    initial: String,
}

pub fn parse_mdpa(json: &str) -> Result<Mdpa> {
    let raw: RawMdpa = serde_json::from_str(json).map_err(|e| Error::Parse(e.to_string()))?;
    let initial = raw
        .blocks
        .iter()
        .position(|b| *b == raw.initial)
        .ok_or_else(|| Error::UnknownState(raw.initial.clone()))?;
    Mdpa::new(
        raw.blocks,
        raw.labels
            .into_iter()
            .map(|l| l.into_iter().collect())
            .collect(),
        raw.actions,
        raw.xi,
        initial,
    )
}

pub fn mdpa_to_json(mdpa: &Mdpa) -> String {
    let raw = RawMdpa {
        blocks: mdpa.block_names().to_vec(),
        labels: mdpa
            .block_labels()
            .iter()
            .map(|l| l.iter().cloned().collect())
            .collect(),
        actions: mdpa.actions().to_vec(),
        xi: mdpa.xi().to_vec(),
        initial: mdpa.block_names()[mdpa.initial_block()].clone(),
    };
    let mut out = serde_json::to_string_pretty(&raw).expect("serializable");
    out.push('\n');
    out
}

/// Rounds to 12 significant digits, then prints the shortest decimal
/// that parses back to the rounded value.
pub fn fmt_sig(x: f64) -> String {
    let rounded: f64 = format!("{x:.11e}").parse().expect("rounded float");
    format!("{rounded}")
}

pub fn comparison_to_csv(table: &ComparisonTable) -> String {
    let mut out =
        String::from("k,p_concrete,std_p,std_lo,std_hi,mdpa_pmin,mdpa_pmax,mdpa_lo,mdpa_hi,eps_k\n");
    for row in &table.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            row.k,
            fmt_sig(row.p_concrete),
            fmt_sig(row.std_p),
            fmt_sig(row.std_lo),
            fmt_sig(row.std_hi),
            fmt_sig(row.mdpa_pmin),
            fmt_sig(row.mdpa_pmax),
            fmt_sig(row.mdpa_lo),
            fmt_sig(row.mdpa_hi),
            fmt_sig(row.eps_k),
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abstraction::{
        build_interval_abstraction, build_standard_abstraction, imdpa_to_mdpa,
    };
    use crate::engine::ComparisonRow;
    use crate::model::partition_by_labels;

    fn three_state() -> LabeledMarkovChain {
        parse_model(
            r#"{
                "states": [
                    {"id": "s0", "label": ["a"]},
                    {"id": "s1", "label": ["b"]},
                    {"id": "s2", "label": ["b"]}
                ],
                "initial": "s0",
                "matrix": [
                    [0.2, 0.5, 0.3],
                    [0.0, 1.0, 0.0],
                    [0.6, 0.0, 0.4]
                ]
            }"#,
        )
        .unwrap()
    }

    #[test]
    fn model_json_round_trips() {
        let chain = three_state();
        let json = model_to_json(&chain);
        assert_eq!(parse_model(&json).unwrap(), chain);
        assert!(json.ends_with('\n'));
    }

    #[test]
    fn states_without_labels_are_rejected() {
        let err = parse_model(
            r#"{"states": [{"id": "s0"}], "initial": "s0", "matrix": [[1.0]]}"#,
        )
        .unwrap_err();
        assert_eq!(err, Error::MissingLabel("s0".into()));
    }

    #[test]
    fn malformed_json_reports_a_parse_error() {
        assert!(matches!(parse_model("{"), Err(Error::Parse(_))));
        assert!(matches!(parse_imdpa("[]"), Err(Error::Parse(_))));
    }

    #[test]
    fn lumped_output_reparses_as_a_model() {
        let chain = three_state();
        let partition = partition_by_labels(&chain);
        let lumped = build_standard_abstraction(&chain, &partition, None).unwrap();
        let json = lumped_to_json(&lumped);
        assert!(json.contains("\"epsilon\""));
        assert!(json.contains("\"representatives\""));
        let reparsed = parse_model(&json).unwrap();
        assert_eq!(reparsed, *lumped.chain());
    }

    #[test]
    fn interval_quotient_round_trips() {
        let chain = three_state();
        let partition = partition_by_labels(&chain);
        let imdpa = build_interval_abstraction(&chain, &partition).unwrap();
        let json = imdpa_to_json(&imdpa);
        assert_eq!(parse_imdpa(&json).unwrap(), imdpa);
    }

    #[test]
    fn vertex_quotient_round_trips() {
        let chain = three_state();
        let partition = partition_by_labels(&chain);
        let mdpa = imdpa_to_mdpa(&build_interval_abstraction(&chain, &partition).unwrap()).unwrap();
        let json = mdpa_to_json(&mdpa);
        assert_eq!(parse_mdpa(&json).unwrap(), mdpa);
    }

    #[test]
    fn unknown_initial_block_is_rejected() {
        let chain = three_state();
        let partition = partition_by_labels(&chain);
        let imdpa = build_interval_abstraction(&chain, &partition).unwrap();
        let json = imdpa_to_json(&imdpa).replace("\"initial\": \"S_a\"", "\"initial\": \"S_z\"");
        assert_eq!(parse_imdpa(&json).unwrap_err(), Error::UnknownState("S_z".into()));
    }

    #[test]
    fn significant_digit_formatting_is_compact() {
        assert_eq!(fmt_sig(0.0), "0");
        assert_eq!(fmt_sig(1.0), "1");
        assert_eq!(fmt_sig(0.06), "0.06");
        assert_eq!(fmt_sig(0.5775), "0.5775");
        assert_eq!(fmt_sig(0.6415140775914577), "0.641514077591");
    }

    #[test]
    fn csv_layout_is_fixed() {
        let table = ComparisonTable {
            rows: vec![ComparisonRow {
                k: 2,
                p_concrete: 0.5775,
                std_p: 0.58,
                std_lo: 0.4636,
                std_hi: 0.6964,
                mdpa_pmin: 0.5808,
                mdpa_pmax: 0.5988,
                mdpa_lo: 0.4833,
                mdpa_hi: 0.6963,
                eps_k: 0.0975,
            }],
        };
        let csv = comparison_to_csv(&table);
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "k,p_concrete,std_p,std_lo,std_hi,mdpa_pmin,mdpa_pmax,mdpa_lo,mdpa_hi,eps_k"
        );
        assert_eq!(
            lines.next().unwrap(),
            "2,0.5775,0.58,0.4636,0.6964,0.5808,0.5988,0.4833,0.6963,0.0975"
        );
        assert_eq!(lines.next(), None);
    }
}
