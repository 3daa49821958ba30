//! Sampling statistics for a policy, without touching any pixels.
//!
//! Each trial runs the operator's own draw path ([`draw_plan`]) for a
//! one-sample batch of the given size. The effective area of each region is
//! also recounted by testing every pixel for membership, and the report says
//! whether that recount agrees with the region arithmetic.

use std::fmt;

use mixcut_core::augment::draw_plan;
use mixcut_core::{AugmentPolicy, CutRegion, RngStream};

use crate::policy_file;
use crate::Result;

pub const DEFAULT_TRIALS: usize = 100_000;

#[derive(Clone, Debug, PartialEq)]
pub struct StatsConfig {
    pub policy: AugmentPolicy,
    pub trials: usize,
    pub width: usize,
    pub height: usize,
    pub seed: u64,
}

/// Running summary of a sample.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    m2: f64,
}

impl Summary {
    pub fn push(&mut self, v: f64) {
        if self.count == 0 {
            self.min = v;
            self.max = v;
        }
        self.count += 1;
        let delta = v - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (v - self.mean);
        self.min = self.min.min(v);
        self.max = self.max.max(v);
    }

    pub fn std_dev(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            (self.m2 / (self.count - 1) as f64).sqrt()
        }
    }
}

impl fmt::Display for Summary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.count == 0 {
            return f.write_str("n=0");
        }
        write!(
            f,
            "n={} mean={:.6} sd={:.6} min={:.6} max={:.6}",
            self.count,
            self.mean,
            self.std_dev(),
            self.min,
            self.max
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StatsReport {
    pub config: StatsConfig,
    pub applied: usize,
    pub lambda: Summary,
    pub eta: Summary,
    /// Intended removal ratio `1 - eta`.
    pub beta: Summary,
    pub effective: Summary,
    /// Mean effective ratio recounted pixel by pixel.
    pub oracle_effective_mean: f64,
    /// Trials whose pixel recount differed from the region area.
    pub oracle_mismatches: usize,
    /// Regions that lost area to border clipping.
    pub clipped: usize,
}

impl StatsReport {
    pub fn gate_rate(&self) -> f64 {
        self.applied as f64 / self.config.trials.max(1) as f64
    }

    pub fn oracle_agrees(&self) -> bool {
        self.oracle_mismatches == 0 && self.oracle_effective_mean == self.effective.mean
    }
}

fn brute_force_area(region: &CutRegion) -> usize {
    let mut count = 0;
    for py in 0..region.height {
        for px in 0..region.width {
            if region.x1 <= px && px < region.x2 && region.y1 <= py && py < region.y2 {
                count += 1;
            }
        }
    }
    count
}

pub fn run_stats(config: &StatsConfig) -> Result<StatsReport> {
    config.policy.validate()?;
    let mut rng = RngStream::new(config.seed);
    let mut report = StatsReport {
        config: config.clone(),
        applied: 0,
        lambda: Summary::default(),
        eta: Summary::default(),
        beta: Summary::default(),
        effective: Summary::default(),
        oracle_effective_mean: 0.0,
        oracle_mismatches: 0,
        clipped: 0,
    };
    let mut oracle = Summary::default();
    let pixels = (config.width * config.height) as f64;
    for _ in 0..config.trials {
        let plan = draw_plan(&config.policy, 1, config.width, config.height, &mut rng)?;
        if !plan.applied {
            continue;
        }
        report.applied += 1;
        let p = plan.params[0];
        report.lambda.push(p.lambda);
        if let (Some(eta), Some(region)) = (p.eta, p.region) {
            report.eta.push(eta);
            report.beta.push(1.0 - eta);
            let counted = brute_force_area(&region);
            if counted != region.area() {
                report.oracle_mismatches += 1;
            }
            report.effective.push(region.effective_area_ratio());
            oracle.push(counted as f64 / pixels);
            let (side_w, side_h) = mixcut_core::geometry::side_lengths(config.width, config.height, eta)?;
            let clipped = |c: f64, side: f64, max: usize| c - side / 2.0 < 0.0 || c + side / 2.0 > max as f64;
            let (cx, cy) = (
                (region.x1 + region.x2) as f64 / 2.0,
                (region.y1 + region.y2) as f64 / 2.0,
            );
            if clipped(cx, side_w, config.width) || clipped(cy, side_h, config.height) {
                report.clipped += 1;
            }
        }
    }
    report.oracle_effective_mean = oracle.mean;
    Ok(report)
}

impl fmt::Display for StatsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = &self.config;
        writeln!(f, "policy: {}", policy_file::format_inline(&c.policy))?;
        writeln!(f, "seed: {}", c.seed)?;
        writeln!(f, "image: {}x{}", c.width, c.height)?;
        writeln!(f, "trials: {}", c.trials)?;
        writeln!(f, "gate_rate: {:.6} ({} applied)", self.gate_rate(), self.applied)?;
        writeln!(f, "lambda: {}", self.lambda)?;
        writeln!(f, "eta: {}", self.eta)?;
        writeln!(f, "beta_intended: {}", self.beta)?;
        writeln!(f, "effective_area: {}", self.effective)?;
        writeln!(f, "oracle_effective_mean: {:.6}", self.oracle_effective_mean)?;
        writeln!(f, "oracle_agrees: {}", self.oracle_agrees())?;
        write!(f, "clipped_regions: {}", self.clipped)
    }
}
