//! Run configuration and the tabular reports emitted by the experiments.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::padic::Prime;
use crate::rational::{parse_q, Q};

pub const REPORT_SCHEMA: &str = "lavec.report/1";

/// Everything an experiment depends on. A run is a pure function of this.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub prime: u64,
    /// Series cap `B` as an exact rational.
    pub cap: String,
    pub witt_length: usize,
    /// Mahler degree `N`.
    pub degree: u64,
    /// Rationals or ranges `lo:hi:step`, all exact.
    pub lambda_grid: Vec<String>,
    pub levels: Vec<u32>,
    pub seed: u64,
    pub samples: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            prime: 2,
            cap: "16".into(),
            witt_length: 3,
            degree: 32,
            lambda_grid: vec!["-8:4:1/8".into()],
            levels: vec![0, 1, 2, 3, 4],
            seed: 1,
            samples: 20,
        }
    }
}

impl RunConfig {
    pub fn prime(&self) -> Result<Prime> {
        Prime::new(self.prime)
    }

    pub fn cap(&self) -> Result<Q> {
        let c = parse_q(&self.cap)?;
        if c <= Q::from_integer(0) {
            return Err(Error::Domain(format!("cap must be positive, got {c}")));
        }
        Ok(c)
    }

    /// The λ grid, sorted descending without duplicates.
    pub fn lambdas(&self) -> Result<Vec<Q>> {
        let mut out = Vec::new();
        for item in &self.lambda_grid {
            let parts: Vec<&str> = item.split(':').collect();
            match parts.as_slice() {
                [one] => out.push(parse_q(one)?),
                [lo, hi, step] => {
                    let (lo, hi, step) = (parse_q(lo)?, parse_q(hi)?, parse_q(step)?);
                    if step <= Q::from_integer(0) {
                        return Err(Error::parse(0, format!("grid step must be positive in `{item}`")));
                    }
                    let count = ((hi - lo) / step).floor().to_integer();
                    if count > 100_000 {
                        return Err(Error::BudgetExceeded(format!("grid `{item}` has {count} points")));
                    }
                    out.extend(super::lambda_grid(lo, hi, step));
                }
                _ => return Err(Error::parse(0, format!("bad grid entry `{item}`"))),
            }
        }
        if out.is_empty() {
            return Err(Error::Domain("empty λ grid".into()));
        }
        out.sort_by(|a, b| b.cmp(a));
        out.dedup();
        Ok(out)
    }
}

/// A deterministic experiment report: one flat table plus summary values.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub experiment: String,
    pub seed: u64,
    pub config: RunConfig,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub summary: BTreeMap<String, String>,
    /// Asserted properties that did not hold.
    pub failures: Vec<String>,
}

impl Report {
    pub fn new(experiment: &str, config: &RunConfig, columns: &[&str]) -> Self {
        Report {
            schema: REPORT_SCHEMA.into(),
            experiment: experiment.into(),
            seed: config.seed,
            config: config.clone(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            summary: BTreeMap::new(),
            failures: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn note(&mut self, key: &str, value: impl ToString) {
        self.summary.insert(key.into(), value.to_string());
    }

    pub fn fail(&mut self, what: impl Into<String>) {
        self.failures.push(what.into());
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    /// Column index by name.
    pub fn col(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    /// CSV with a `#` comment line carrying schema, seed and configuration.
    pub fn to_csv(&self) -> String {
        let config = serde_json::to_string(&self.config).expect("config serializes");
        let mut out = format!(
            "# schema={}; experiment={}; seed={}; config={}\n",
            self.schema, self.experiment, self.seed, config
        );
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row).expect("in-memory write");
        }
        out.push_str(&String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8"));
        out
    }

    /// Aligned plain-text table with the summary underneath.
    pub fn to_text(&self) -> String {
        let mut widths: Vec<usize> = self.columns.iter().map(|c| c.chars().count()).collect();
        for row in &self.rows {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.chars().count());
            }
        }
        let line = |cells: &[String]| {
            cells
                .iter()
                .zip(&widths)
                .map(|(c, w)| format!("{c:<w$}"))
                .collect::<Vec<_>>()
                .join("  ")
                .trim_end()
                .to_string()
        };
        let mut out = format!("{} (seed {})\n", self.experiment, self.seed);
        out.push_str(&line(&self.columns));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&line(row));
            out.push('\n');
        }
        for (k, v) in &self.summary {
            out.push_str(&format!("{k}: {v}\n"));
        }
        for f in &self.failures {
            out.push_str(&format!("FAILED: {f}\n"));
        }
        out
    }
}
