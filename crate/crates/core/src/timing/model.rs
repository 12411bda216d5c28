//! Least-squares timing models.

use serde::{Deserialize, Serialize};

use super::{kv_f64, parse_kv, Kv, TimingError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimingSample {
    /// Bytes hashed.
    pub n: f64,
    /// Instructions per hash iteration.
    pub c: f64,
    pub t_us: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetworkSample {
    pub bytes: f64,
    pub t_us: f64,
}

/// `y = b0 + b1 N + b2 c + b3 N c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimingModel {
    pub beta0: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub beta3: f64,
    /// Mean absolute residual.
    pub sigma_m: f64,
}

impl TimingModel {
    /// Coefficients measured on the reference test board.
    pub const fn reference() -> Self {
        Self {
            beta0: 1.3958,
            beta1: 0.081,
            beta2: -0.017,
            beta3: 0.008,
            sigma_m: 5.4542,
        }
    }

    pub fn predict(&self, n: f64, c: f64) -> f64 {
        self.beta0 + self.beta1 * n + self.beta2 * c + self.beta3 * n * c
    }

    /// `(dy/dN, dy/dc)`.
    pub fn gradient(&self, n: f64, c: f64) -> (f64, f64) {
        (self.beta1 + self.beta3 * c, self.beta2 + self.beta3 * n)
    }

    pub fn to_kv(&self) -> String {
        Kv(&[
            ("beta0", self.beta0),
            ("beta1", self.beta1),
            ("beta2", self.beta2),
            ("beta3", self.beta3),
            ("sigma_m", self.sigma_m),
        ])
        .to_string()
    }

    pub fn from_kv(text: &str) -> Result<Self, TimingError> {
        let m = parse_kv(text)?;
        Ok(Self {
            beta0: kv_f64(&m, "beta0")?,
            beta1: kv_f64(&m, "beta1")?,
            beta2: kv_f64(&m, "beta2")?,
            beta3: kv_f64(&m, "beta3")?,
            sigma_m: kv_f64(&m, "sigma_m")?,
        })
    }
}

/// `y_n = slope * bytes + intercept`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetworkModel {
    pub slope: f64,
    pub intercept: f64,
    pub sigma_n: f64,
}

impl NetworkModel {
    /// Coefficients measured on the reference test board.
    pub const fn reference() -> Self {
        Self {
            slope: 0.129,
            intercept: 12.48,
            sigma_n: 1.902,
        }
    }

    pub fn predict(&self, bytes: f64) -> f64 {
        self.slope * bytes + self.intercept
    }

    pub fn to_kv(&self) -> String {
        Kv(&[("slope", self.slope), ("intercept", self.intercept), ("sigma_n", self.sigma_n)]).to_string()
    }

    pub fn from_kv(text: &str) -> Result<Self, TimingError> {
        let m = parse_kv(text)?;
        Ok(Self {
            slope: kv_f64(&m, "slope")?,
            intercept: kv_f64(&m, "intercept")?,
            sigma_n: kv_f64(&m, "sigma_n")?,
        })
    }
}

/// Solves the square system `a x = b` by Gaussian elimination with partial
/// pivoting. `None` when a pivot vanishes relative to the matrix scale.
fn solve<const K: usize>(mut a: [[f64; K]; K], mut b: [f64; K]) -> Option<[f64; K]> {
    let scale = a.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return None;
    }
    for col in 0..K {
        let pivot = (col..K).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() <= scale * 1e-13 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..K {
            let f = a[row][col] / a[col][col];
            for k in col..K {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; K];
    for row in (0..K).rev() {
        let s: f64 = (row + 1..K).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Some(x)
}

/// Least squares over the design rows via column-scaled normal equations,
/// with two rounds of iterative refinement on the residual.
fn least_squares<const K: usize>(rows: &[[f64; K]], y: &[f64]) -> Option<[f64; K]> {
    let mut scale = [0.0f64; K];
    for r in rows {
        for (s, v) in scale.iter_mut().zip(r) {
            *s = s.max(v.abs());
        }
    }
    if scale.contains(&0.0) {
        return None;
    }
    let scaled: Vec<[f64; K]> = rows.iter().map(|r| std::array::from_fn(|j| r[j] / scale[j])).collect();
    let mut gram = [[0.0; K]; K];
    for r in &scaled {
        for i in 0..K {
            for j in 0..K {
                gram[i][j] += r[i] * r[j];
            }
        }
    }
    let rhs = |target: &[f64]| {
        let mut v = [0.0; K];
        for (r, t) in scaled.iter().zip(target) {
            for i in 0..K {
                v[i] += r[i] * t;
            }
        }
        v
    };
    let mut x = solve(gram, rhs(y))?;
    for _ in 0..2 {
        let resid: Vec<f64> = scaled
            .iter()
            .zip(y)
            .map(|(r, t)| t - r.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>())
            .collect();
        let dx = solve(gram, rhs(&resid))?;
        for (a, d) in x.iter_mut().zip(dx) {
            *a += d;
        }
    }
    Some(std::array::from_fn(|j| x[j] / scale[j]))
}

fn distinct(values: impl Iterator<Item = f64>) -> usize {
    let mut v: Vec<f64> = values.collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v.len()
}

pub fn fit_timing_model(samples: &[TimingSample]) -> Result<TimingModel, TimingError> {
    if samples.len() < 4 {
        return Err(TimingError::TooFewSamples { needed: 4, got: samples.len() });
    }
    if distinct(samples.iter().map(|s| s.n)) < 2 || distinct(samples.iter().map(|s| s.c)) < 2 {
        return Err(TimingError::Singular("need at least two distinct N and two distinct c"));
    }
    let rows: Vec<[f64; 4]> = samples.iter().map(|s| [1.0, s.n, s.c, s.n * s.c]).collect();
    let y: Vec<f64> = samples.iter().map(|s| s.t_us).collect();
    let b = least_squares(&rows, &y).ok_or(TimingError::Singular("normal equations are singular"))?;
    let mut model = TimingModel {
        beta0: b[0],
        beta1: b[1],
        beta2: b[2],
        beta3: b[3],
        sigma_m: 0.0,
    };
    model.sigma_m = samples.iter().map(|s| (s.t_us - model.predict(s.n, s.c)).abs()).sum::<f64>() / samples.len() as f64;
    Ok(model)
}

pub fn fit_network_model(samples: &[NetworkSample]) -> Result<NetworkModel, TimingError> {
    if samples.len() < 2 {
        return Err(TimingError::TooFewSamples { needed: 2, got: samples.len() });
    }
    if distinct(samples.iter().map(|s| s.bytes)) < 2 {
        return Err(TimingError::Singular("need at least two distinct byte counts"));
    }
    let rows: Vec<[f64; 2]> = samples.iter().map(|s| [1.0, s.bytes]).collect();
    let y: Vec<f64> = samples.iter().map(|s| s.t_us).collect();
    let b = least_squares(&rows, &y).ok_or(TimingError::Singular("normal equations are singular"))?;
    let mut model = NetworkModel {
        slope: b[1],
        intercept: b[0],
        sigma_n: 0.0,
    };
    model.sigma_n = samples.iter().map(|s| (s.t_us - model.predict(s.bytes)).abs()).sum::<f64>() / samples.len() as f64;
    Ok(model)
}
