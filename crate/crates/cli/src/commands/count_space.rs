use std::fmt::Write as _;

use poweralert::gf2::count_irreducible;
use poweralert::icgen::{count_programs, discrepancy_report, MAX_EXACT_CAP};
use serde::{Deserialize, Serialize};

use super::{Format, Output};
use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountSpaceParams {
    pub degrees: Vec<u64>,
    pub depths: Vec<u64>,
    /// Node cap; `None` sums up to `2^n` nodes.
    pub cap: Option<u64>,
    pub format: Format,
}

#[derive(Serialize)]
struct Row {
    degree: u64,
    depth: u64,
    node_cap: u64,
    irreducible: String,
    count: String,
}

impl CountSpaceParams {
    pub fn new(degrees: Vec<u64>, depths: Vec<u64>, cap: Option<u64>, format: Format) -> Result<Self, CliError> {
        if degrees.is_empty() || depths.is_empty() {
            return Err(CliError::Usage("empty degree or depth range".into()));
        }
        if degrees.contains(&0) || depths.contains(&0) {
            return Err(CliError::Usage("degrees and depths must be >= 1".into()));
        }
        for &n in &depths {
            let nodes = if n >= 64 { u64::MAX } else { 1u64 << n };
            if nodes.min(cap.unwrap_or(u64::MAX)) > MAX_EXACT_CAP {
                return Err(CliError::Usage(format!(
                    "depth {n} sums {nodes} Catalan terms; pass --cap <= {MAX_EXACT_CAP}"
                )));
            }
        }
        Ok(Self { degrees, depths, cap, format })
    }

    pub fn run(&self) -> Result<Output, CliError> {
        let mut rows = Vec::new();
        for &d in &self.degrees {
            let m = count_irreducible(d).map_err(|e| CliError::Usage(e.to_string()))?;
            for &n in &self.depths {
                let full = if n >= 64 { u64::MAX } else { 1u64 << n };
                rows.push(Row {
                    degree: d,
                    depth: n,
                    node_cap: self.cap.map_or(full, |c| c.min(full)),
                    irreducible: m.to_string(),
                    count: count_programs(d, n as u32, self.cap)?.to_string(),
                });
            }
        }
        let report = discrepancy_report(5, 40)?;
        let bytes = match self.format {
            Format::Json => {
                let v = serde_json::json!({ "rows": rows, "discrepancy": report });
                let mut s = serde_json::to_string_pretty(&v).expect("json");
                s.push('\n');
                s.into_bytes()
            }
            Format::Csv => {
                let mut s = String::new();
                writeln!(s, "# D(d, n) = M_d * sum of Catalan numbers C_0..C_cap, cap = min(2^n, node cap)").unwrap();
                writeln!(
                    s,
                    "# headline {:e} for d = 5, n = 40 is not reproduced by this formula",
                    report.headline
                )
                .unwrap();
                writeln!(s, "# d = 5, n = 40: M_5 = {}, log10 D >= {:.6e}", report.irreducible_count, report.log10_lower_bound)
                    .unwrap();
                writeln!(
                    s,
                    "# nearest exact count to the headline: cap {} gives {:e}",
                    report.nearest_cap, report.nearest_count
                )
                .unwrap();
                writeln!(
                    s,
                    "# necklace sum without the 2^(d/k) exponent gives {} for d = 5",
                    report.uncorrected_necklace_count
                )
                .unwrap();
                s.push_str("degree,depth,node_cap,irreducible,count\n");
                for r in &rows {
                    writeln!(s, "{},{},{},{},{}", r.degree, r.depth, r.node_cap, r.irreducible, r.count).unwrap();
                }
                s.into_bytes()
            }
        };
        Ok(Output { bytes, report: String::new() })
    }
}
