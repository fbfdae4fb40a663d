//! On-disk formats: the JSON report envelope, coefficient maps and the CLT
//! table.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use qoslab_core::experiments::CltReport;
use qoslab_core::systems::SystemParams;
use qoslab_core::transforms::{CoeffFamily, SampledVectorFunction, VectorSpaceDesc};
use qoslab_core::Complex64;
use serde::Serialize;
use serde_json::Value;

use crate::UsageError;

pub const TOOL: &str = "qoslab";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Every JSON report has this shape. Keys of nested maps are sorted, so
/// the same config and seed always produce the same bytes.
#[derive(Debug, Serialize)]
pub struct Envelope {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config: Value,
    pub seed: u64,
    pub tolerances: BTreeMap<String, f64>,
    pub result: Value,
    pub pass: bool,
}

impl Envelope {
    pub fn new(command: &str, config: impl Serialize, seed: u64) -> Self {
        Self {
            tool: TOOL,
            version: VERSION,
            command: command.into(),
            config: serde_json::to_value(config).expect("configs serialize"),
            seed,
            tolerances: BTreeMap::new(),
            result: Value::Null,
            pass: true,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }
}

pub fn to_value(x: impl Serialize) -> Value {
    serde_json::to_value(x).expect("results serialize")
}

pub fn write_output(out: Option<&Path>, text: &str) -> Result<(), UsageError> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| UsageError(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|e| UsageError(format!("cannot write output: {e}")))
        }
    }
}

/// `{id: [[re, im], …]}` with entries in `(a, b, coordinate)` order.
pub fn coeffs_to_map(a: &CoeffFamily) -> BTreeMap<String, Vec<[f64; 2]>> {
    a.params()
        .sigma_ids()
        .iter()
        .enumerate()
        .map(|(s, id)| {
            (
                id.clone(),
                a.block(s).iter().map(|z| [z.re, z.im]).collect(),
            )
        })
        .collect()
}

/// Inverse of [`coeffs_to_map`]; ids absent from the map get zero blocks.
pub fn coeffs_from_map(
    params: &SystemParams,
    desc: VectorSpaceDesc,
    map: &BTreeMap<String, Vec<[f64; 2]>>,
) -> Result<CoeffFamily, UsageError> {
    for id in map.keys() {
        if params.position(id).is_none() {
            return Err(UsageError(format!("unknown index {id:?} in coefficients")));
        }
    }
    let blocks = params
        .sigma_ids()
        .iter()
        .enumerate()
        .map(|(s, id)| {
            let len = params.dim(s).pow(2) * desc.coords();
            match map.get(id) {
                Some(v) if v.len() == len => {
                    Ok(v.iter().map(|[re, im]| Complex64::new(*re, *im)).collect())
                }
                Some(v) => Err(UsageError(format!(
                    "index {id} needs {len} entries, got {}",
                    v.len()
                ))),
                None => Ok(vec![Complex64::new(0.0, 0.0); len]),
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(CoeffFamily::new(params.clone(), desc, blocks)?)
}

/// One `[[re, im], …]` list of coordinates per point.
pub fn function_to_points(f: &SampledVectorFunction) -> Vec<Vec<[f64; 2]>> {
    (0..f.space().len())
        .map(|w| f.value(w).iter().map(|z| [z.re, z.im]).collect())
        .collect()
}

pub fn clt_csv(report: &CltReport) -> Result<String, UsageError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| UsageError(format!("csv: {e}"));
    w.write_record(["m", "estimate", "stderr", "reference", "reference_stderr"])
        .map_err(err)?;
    for row in &report.rows {
        w.write_record([
            row.m.to_string(),
            format!("{:.16e}", row.estimate),
            format!("{:.16e}", row.stderr),
            format!("{:.16e}", row.reference),
            format!("{:.16e}", row.reference_stderr),
        ])
        .map_err(err)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| UsageError(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is ascii"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use qoslab_core::experiments::random_coeffs;
    use qoslab_core::RngStream;

    #[test]
    fn coefficient_map_round_trip() {
        let params = SystemParams::from_dims(&[1, 2]).unwrap();
        let desc = VectorSpaceDesc::lq(qoslab_core::Exponent::ONE, 2).unwrap();
        let a = random_coeffs(&params, desc, &[0, 1], &mut RngStream::new(1, 0));
        let map = coeffs_to_map(&a);
        assert_eq!(coeffs_from_map(&params, desc, &map).unwrap(), a);
        let json = serde_json::to_string(&map).unwrap();
        let back: BTreeMap<String, Vec<[f64; 2]>> = serde_json::from_str(&json).unwrap();
        assert_eq!(back, map);
        let mut short = map.clone();
        short.get_mut(&params.sigma_ids()[1]).unwrap().pop();
        assert!(coeffs_from_map(&params, desc, &short).is_err());
    }

    #[test]
    fn csv_uses_seventeen_significant_digits() {
        let report = CltReport {
            dims: vec![2],
            functional: "s2sq".into(),
            schedule: vec![1],
            samples: 1000,
            rows: vec![qoslab_core::experiments::CltRow {
                m: 1,
                estimate: 0.1,
                stderr: 1.0 / 3.0,
                reference: 2.0,
                reference_stderr: 0.0,
            }],
        };
        let text = clt_csv(&report).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next(),
            Some("m,estimate,stderr,reference,reference_stderr")
        );
        let row: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(row[1], "1.0000000000000001e-1");
        assert_eq!(row[2].parse::<f64>().unwrap(), 1.0 / 3.0);
    }
}
