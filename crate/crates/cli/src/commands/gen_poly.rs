use std::fmt::Write as _;
use std::time::Instant;

use poweralert::gf2::random_irreducible;
use poweralert::splitmix64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Output;
use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenPolyParams {
    pub degrees: Vec<u64>,
    pub count: u64,
    pub seed: u64,
}

impl GenPolyParams {
    pub fn new(degrees: Vec<u64>, count: u64, seed: u64) -> Result<Self, CliError> {
        if degrees.is_empty() {
            return Err(CliError::Usage("no degrees given".into()));
        }
        if let Some(d) = degrees.iter().find(|&&d| d < 1) {
            return Err(CliError::Usage(format!("degree must be >= 1, got {d}")));
        }
        Ok(Self { degrees, count, seed })
    }

    /// One CSV line per polynomial; generation times go to the report.
    pub fn run(&self) -> Result<Output, CliError> {
        let mut csv = String::from("degree,index,polynomial\n");
        let mut report = String::new();
        for &d in &self.degrees {
            let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(self.seed ^ splitmix64(d)));
            let start = Instant::now();
            let polys = (0..self.count)
                .map(|_| random_irreducible(d as usize, &mut rng))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| CliError::Usage(e.to_string()))?;
            let elapsed = start.elapsed();
            for (i, p) in polys.iter().enumerate() {
                writeln!(csv, "{d},{i},{}", p.to_hex()).expect("string write");
            }
            let mean_us = elapsed.as_secs_f64() * 1e6 / self.count.max(1) as f64;
            writeln!(report, "degree {d}: {} polynomials, mean generation time {mean_us:.3} us", self.count)
                .expect("string write");
        }
        Ok(Output { bytes: csv.into_bytes(), report })
    }
}
