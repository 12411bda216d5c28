//! Plateau extraction, labeling and level learning.

use serde::{Deserialize, Serialize};

use super::{Label, PfsmParams, PowerError, PowerState, PowerTrace};

/// Smallest self-calibrated threshold, amperes per sample. Keeps noiseless
/// traces (median derivative zero) from flagging rounding error.
const THRESHOLD_FLOOR_PER_SAMPLE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtractionConfig {
    /// First moving-average window, samples.
    pub lowpass1_window: usize,
    /// Moving-average window applied to the derivative, samples.
    pub lowpass2_window: usize,
    /// Derivative threshold in A/s; `None` uses `4 * median(|I_f|)`.
    pub threshold: Option<f64>,
    pub min_segment: usize,
    pub merge_tolerance: f64,
}

impl Default for ExtractionConfig {
    fn default() -> Self {
        Self {
            lowpass1_window: 5,
            lowpass2_window: 5,
            threshold: None,
            min_segment: 8,
            merge_tolerance: 0.05,
        }
    }
}

impl ExtractionConfig {
    /// Samples a step keeps the filtered derivative away from zero.
    pub fn filter_span(&self) -> usize {
        self.lowpass1_window + self.lowpass2_window - 1
    }

    fn validate(&self) -> Result<(), PowerError> {
        if self.lowpass1_window == 0 || self.lowpass2_window == 0 {
            return Err(PowerError::InvalidParameter("filter windows must be >= 1"));
        }
        if matches!(self.threshold, Some(t) if !(t > 0.0)) {
            return Err(PowerError::InvalidParameter("threshold must be positive"));
        }
        if self.min_segment == 0 || !(self.merge_tolerance >= 0.0) {
            return Err(PowerError::InvalidParameter("min_segment must be >= 1, merge tolerance >= 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerStateSegment {
    /// Mean of the first-stage filtered current over the flat core.
    pub mean_current: f64,
    /// `t_b - t_a`, seconds.
    pub duration: f64,
    pub t_a: f64,
    pub t_b: f64,
    /// Flat core `[core_start, core_end)` in samples.
    pub core_start: usize,
    pub core_end: usize,
}

/// Causal moving average; the first `w - 1` outputs average what is
/// available.
fn moving_average(x: &[f64], w: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(x.len());
    let mut sum = 0.0;
    for (n, &v) in x.iter().enumerate() {
        sum += v;
        if n >= w {
            sum -= x[n - w];
        }
        out.push(sum / (n + 1).min(w) as f64);
    }
    out
}

/// Runs `i_l = MA(i, w1)`, `I = diff(i_l) * f_s`, `I_f = MA(I, w2)`, marks
/// `|I_f| <= lambda` and turns flat runs into segments.
///
/// A level change keeps `|I_f|` high for `w1 + w2 - 1` samples, so shorter
/// excursions between runs of the same level are noise and are bridged
/// before the minimum-length filter. Reported intervals undo the filter
/// delay: `t_a` is the core start minus `w1 + w2 - 1` samples and `t_b` is
/// the core end.
pub fn extract_power_states(trace: &PowerTrace, cfg: &ExtractionConfig) -> Result<Vec<PowerStateSegment>, PowerError> {
    cfg.validate()?;
    let fs = trace.sampling_rate;
    if !(fs > 0.0) {
        return Err(PowerError::InvalidParameter("sampling rate must be positive"));
    }
    let span = cfg.filter_span();
    if trace.len() <= span {
        return Ok(Vec::new());
    }
    let il = moving_average(&trace.samples, cfg.lowpass1_window);
    let mut deriv = vec![0.0; il.len()];
    for n in 1..il.len() {
        deriv[n] = (il[n] - il[n - 1]) * fs;
    }
    let fd = moving_average(&deriv, cfg.lowpass2_window);
    let lambda = cfg.threshold.unwrap_or_else(|| {
        let mut mags: Vec<f64> = fd.iter().map(|v| v.abs()).collect();
        let mid = mags.len() / 2;
        let (_, median, _) = mags.select_nth_unstable_by(mid, f64::total_cmp);
        (4.0 * *median).max(THRESHOLD_FLOOR_PER_SAMPLE * fs)
    });

    let core_mean = |s: usize, e: usize| il[s..e].iter().sum::<f64>() / (e - s) as f64;

    // Flat runs as [start, end).
    let mut runs: Vec<(usize, usize)> = Vec::new();
    let mut start = None;
    for (n, v) in fd.iter().enumerate() {
        match (v.abs() <= lambda, start) {
            (true, None) => start = Some(n),
            (false, Some(s)) => {
                runs.push((s, n));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        runs.push((s, fd.len()));
    }

    let mut bridged: Vec<(usize, usize)> = Vec::with_capacity(runs.len());
    for (s, e) in runs {
        if let Some(last) = bridged.last_mut() {
            if s - last.1 < span && (core_mean(last.0, last.1) - core_mean(s, e)).abs() < cfg.merge_tolerance {
                last.1 = e;
                continue;
            }
        }
        bridged.push((s, e));
    }

    let mut segments: Vec<PowerStateSegment> = Vec::new();
    for (s, e) in bridged.into_iter().filter(|(s, e)| e - s >= cfg.min_segment) {
        let mean = core_mean(s, e);
        let a = s.saturating_sub(span);
        if let Some(last) = segments.last_mut() {
            if (last.mean_current - mean).abs() < cfg.merge_tolerance {
                let (n1, n2) = ((last.core_end - last.core_start) as f64, (e - s) as f64);
                last.mean_current = (last.mean_current * n1 + mean * n2) / (n1 + n2);
                last.core_end = e;
                last.t_b = e as f64 / fs;
                last.duration = last.t_b - last.t_a;
                continue;
            }
        }
        segments.push(PowerStateSegment {
            mean_current: mean,
            duration: (e - a) as f64 / fs,
            t_a: a as f64 / fs,
            t_b: e as f64 / fs,
            core_start: s,
            core_end: e,
        });
    }
    Ok(segments)
}

/// Nearest-level labels; a segment further than `level_tolerance` (relative)
/// from its nearest level is `None`.
pub fn classify_states(segments: &[PowerStateSegment], params: &PfsmParams, level_tolerance: f64) -> Vec<Label> {
    segments
        .iter()
        .map(|seg| {
            let (state, level) = PowerState::ALL
                .iter()
                .map(|&s| (s, params.level(s)))
                .min_by(|a, b| (a.1 - seg.mean_current).abs().total_cmp(&(b.1 - seg.mean_current).abs()))
                .expect("four states");
            ((seg.mean_current - level).abs() <= level_tolerance * level).then_some(state)
        })
        .collect()
}

/// Learns the four current levels from honest round traces and an idle
/// trace.
///
/// The idle level and noise come from `idle`. In each round trace the
/// non-idle plateaus are, in order, network bursts, load, hash and the
/// response transfer; that ordering gives provisional levels, and a
/// nearest-neighbor pass over all non-idle plateaus refines them.
pub fn learn_pfsm(
    training: &[PowerTrace],
    idle: &PowerTrace,
    cfg: &ExtractionConfig,
    network_period: f64,
) -> Result<PfsmParams, PowerError> {
    if idle.is_empty() {
        return Err(PowerError::LearningFailure("empty idle trace".into()));
    }
    let n = idle.len() as f64;
    let i_idle = idle.samples.iter().sum::<f64>() / n;
    let noise_sigma = (idle.samples.iter().map(|s| (s - i_idle).powi(2)).sum::<f64>() / n).sqrt();

    let mut busy: Vec<Vec<PowerStateSegment>> = Vec::new();
    for trace in training {
        let segs = extract_power_states(trace, cfg)?;
        let non_idle: Vec<_> = segs
            .into_iter()
            .filter(|s| (s.mean_current - i_idle).abs() >= cfg.merge_tolerance)
            .collect();
        if non_idle.len() >= 4 {
            busy.push(non_idle);
        }
    }
    if busy.is_empty() {
        return Err(PowerError::LearningFailure(
            "no training trace shows network, load and hash plateaus".into(),
        ));
    }

    // Provisional levels by position: [network..., load, hash, network].
    let mut sums = [(0.0, 0.0); 3];
    for segs in &busy {
        let k = segs.len();
        for (i, s) in segs.iter().enumerate() {
            let class = match k - i {
                3 => 1,
                2 => 2,
                _ => 0,
            };
            let w = s.core_end - s.core_start;
            sums[class].0 += s.mean_current * w as f64;
            sums[class].1 += w as f64;
        }
    }
    let mut levels = sums.map(|(s, w)| s / w);

    let mut refined = [(0.0, 0.0); 3];
    for s in busy.iter().flatten() {
        let class = (0..3)
            .min_by(|&a, &b| (levels[a] - s.mean_current).abs().total_cmp(&(levels[b] - s.mean_current).abs()))
            .expect("three classes");
        let w = (s.core_end - s.core_start) as f64;
        refined[class].0 += s.mean_current * w;
        refined[class].1 += w;
    }
    for (l, (s, w)) in levels.iter_mut().zip(refined) {
        if w > 0.0 {
            *l = s / w;
        }
    }

    let all = [i_idle, levels[0], levels[1], levels[2]];
    for a in 0..4 {
        for b in a + 1..4 {
            if (all[a] - all[b]).abs() < cfg.merge_tolerance {
                return Err(PowerError::LearningFailure(format!(
                    "levels {:.4} A and {:.4} A are not distinguishable",
                    all[a], all[b]
                )));
            }
        }
    }
    Ok(PfsmParams {
        i_idle,
        i_network: levels[0],
        i_load: levels[1],
        i_hash: levels[2],
        network_period,
        noise_sigma,
    })
}
