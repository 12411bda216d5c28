//! Alarm rules and the parameter search.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::{NetworkModel, TimingError, TimingModel};

/// One sample period in microseconds.
pub fn sampling_error_us(sampling_rate: f64) -> f64 {
    1e6 / sampling_rate
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionConfig {
    pub gamma: f64,
    /// Power sampling rate, Hz.
    pub sampling_rate: f64,
    /// Instructions an attacker must add per hash iteration.
    pub k: f64,
    /// Exclusive upper bound on instructions per iteration.
    pub cost: u64,
    pub coverage_min: f64,
    /// Size of the protected region, bytes.
    pub n_total: u64,
    /// Smallest program size considered.
    pub c_min: u64,
    /// Bytes of program text shipped per instruction.
    pub instruction_bytes: f64,
}

impl Default for DetectionConfig {
    fn default() -> Self {
        Self {
            gamma: 10.0,
            sampling_rate: 500e3,
            k: 4.0,
            cost: 300,
            coverage_min: 1e-6,
            n_total: 200 * 1024 * 1024,
            c_min: 40,
            instruction_bytes: 8.0,
        }
    }
}

impl DetectionConfig {
    pub fn sigma_s(&self) -> f64 {
        sampling_error_us(self.sampling_rate)
    }

    /// `gamma * (sigma_m + sigma_s)`.
    pub fn hash_tolerance(&self, model: &TimingModel) -> f64 {
        self.gamma * (model.sigma_m + self.sigma_s())
    }

    /// `gamma * max(sigma_n, sigma_s)`.
    pub fn network_tolerance(&self, net: &NetworkModel) -> f64 {
        self.gamma * net.sigma_n.max(self.sigma_s())
    }

    pub fn validate(&self) -> Result<(), TimingError> {
        if !(self.gamma >= 1.0) {
            return Err(TimingError::InvalidConfig("gamma must be >= 1"));
        }
        if !(self.sampling_rate > 0.0 && self.k > 0.0 && self.instruction_bytes > 0.0) {
            return Err(TimingError::InvalidConfig("sampling rate, k and instruction bytes must be positive"));
        }
        if !(self.coverage_min > 0.0 && self.coverage_min <= 1.0) || self.n_total == 0 || self.cost == 0 {
            return Err(TimingError::InvalidConfig("coverage must be in (0, 1], region and cost positive"));
        }
        Ok(())
    }
}

/// Hash-phase alarm: `|predicted - measured| >= gamma * (sigma_m + sigma_s)`.
pub fn detect_hash_phase(measured: f64, predicted: f64, model: &TimingModel, cfg: &DetectionConfig) -> bool {
    (predicted - measured).abs() >= cfg.hash_tolerance(model)
}

/// Network-phase alarm: `|predicted - measured| >= gamma * max(sigma_n, sigma_s)`.
pub fn detect_network_phase(measured: f64, predicted: f64, net: &NetworkModel, cfg: &DetectionConfig) -> bool {
    (predicted - measured).abs() >= cfg.network_tolerance(net)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Constraint {
    /// `k` injected instructions must shift the hash time past the tolerance.
    InjectionGap,
    /// Shipping the program must take measurably longer than the tolerance.
    NetworkVisibility,
    /// Program size must stay below the cost bound.
    CostBound,
    /// `N / N_total` must reach the minimum coverage.
    Coverage,
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::InjectionGap => "injection gap",
            Self::NetworkVisibility => "network visibility",
            Self::CostBound => "cost bound",
            Self::Coverage => "coverage",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizedParams {
    /// Bytes hashed per round.
    pub n: u64,
    /// Instructions per iteration.
    pub c: u64,
    /// Hash-phase tolerance, microseconds.
    pub tolerance: f64,
    pub network_tolerance: f64,
    /// Predicted hash time at `(n, c)`.
    pub predicted_us: f64,
    /// `(tolerance / k - b2) / b3`; `n` is the smallest integer above it.
    pub n_bound: f64,
    /// The local grid pass found no cheaper feasible point.
    pub grid_confirmed: bool,
}

fn infeasible(constraint: Constraint, detail: String) -> TimingError {
    TimingError::Infeasible { constraint, detail }
}

/// Smallest `(N, c)` meeting the injection, network, cost and coverage
/// constraints.
///
/// With a positive interaction term the injection constraint
/// `k (b2 + b3 N) > tol` bounds `N` from below in closed form, and the
/// network constraint `y_n(c * bytes) > tol_n` bounds `c` from below. The
/// objective increases in both, so the optimum is the pair of lower bounds;
/// a grid pass around it checks that.
pub fn optimize_parameters(
    model: &TimingModel,
    net: &NetworkModel,
    cfg: &DetectionConfig,
) -> Result<OptimizedParams, TimingError> {
    cfg.validate()?;
    let tol = cfg.hash_tolerance(model);
    let tol_n = cfg.network_tolerance(net);

    let n_bound = if model.beta3 > 0.0 {
        (tol / cfg.k - model.beta2) / model.beta3
    } else if cfg.k * model.beta2 > tol {
        0.0
    } else {
        return Err(infeasible(
            Constraint::InjectionGap,
            format!("non-positive interaction coefficient {} cannot exceed {tol:.3} us", model.beta3),
        ));
    };
    let n_gap = if n_bound < 0.0 { 1 } else { n_bound.floor() as u64 + 1 };
    let n_cov = (cfg.coverage_min * cfg.n_total as f64).ceil() as u64;
    let n = n_gap.max(n_cov).max(1);
    if n > cfg.n_total {
        let which = if n_gap >= n_cov { Constraint::InjectionGap } else { Constraint::Coverage };
        return Err(infeasible(which, format!("needs N = {n} bytes of a {}-byte region", cfg.n_total)));
    }

    if !(net.slope > 0.0) {
        return Err(infeasible(Constraint::NetworkVisibility, "network slope must be positive".into()));
    }
    let byte_bound = (tol_n - net.intercept) / net.slope;
    let c_net = if byte_bound < 0.0 {
        0
    } else {
        (byte_bound / cfg.instruction_bytes).floor() as u64 + 1
    };
    let c = c_net.max(cfg.c_min);
    if c >= cfg.cost {
        let which = if c_net >= cfg.c_min { Constraint::NetworkVisibility } else { Constraint::CostBound };
        return Err(infeasible(
            which,
            format!("needs c = {c} instructions, cost bound is {}", cfg.cost),
        ));
    }

    let feasible = |n: u64, c: u64| {
        let (_, dc) = model.gradient(n as f64, c as f64);
        cfg.k * dc > tol
            && net.predict(c as f64 * cfg.instruction_bytes) > tol_n
            && c < cfg.cost
            && c >= cfg.c_min
            && n as f64 >= cfg.coverage_min * cfg.n_total as f64
    };
    let best = model.predict(n as f64, c as f64);
    let mut grid_confirmed = feasible(n, c);
    const WINDOW: u64 = 64;
    for gn in n.saturating_sub(WINDOW).max(1)..=n + WINDOW {
        for gc in cfg.c_min..(c + WINDOW).min(cfg.cost) {
            if feasible(gn, gc) && model.predict(gn as f64, gc as f64) < best {
                grid_confirmed = false;
            }
        }
    }

    Ok(OptimizedParams {
        n,
        c,
        tolerance: tol,
        network_tolerance: tol_n,
        predicted_us: best,
        n_bound,
        grid_confirmed,
    })
}
