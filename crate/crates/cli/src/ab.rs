//! RWNDQ against DropTail on the same scenario and seed.

use std::fmt::Write as _;
use std::thread;

use rwndq_core::metrics::MetricsReport;
use rwndq_core::report::RunSummary;
use rwndq_core::workload::{self, AqmConfig, ScenarioConfig};
use rwndq_core::{Error, Result};

use crate::scenario::{Mode, RunConfig, RunSpec};

#[derive(Clone, Debug, PartialEq)]
pub struct AbComparison {
    pub rwndq: RunSummary,
    pub droptail: RunSummary,
    /// `100 * (droptail - rwndq) / droptail` bottleneck drops; 0 when
    /// DropTail dropped nothing.
    pub drop_reduction_pct: f64,
    /// RWNDQ minus DropTail. `None` when only one side has finished mice.
    pub fct_mean_delta: Option<f64>,
    pub fct_p99_delta: Option<f64>,
    pub fct_max_delta: Option<f64>,
    pub jain_mean_delta: Option<f64>,
    pub mean_queue_delta: f64,
    /// Share of mice finishing within `rto_min`, RWNDQ then DropTail.
    pub mice_within_rto_min: (f64, f64),
}

impl AbComparison {
    pub fn new(rwndq: RunSummary, droptail: RunSummary, rto_min: f64) -> Self {
        let drop_reduction_pct = if droptail.bottleneck_drops == 0 {
            0.0
        } else {
            100.0 * (droptail.bottleneck_drops as f64 - rwndq.bottleneck_drops as f64) / droptail.bottleneck_drops as f64
        };
        let fct = |f: fn(&rwndq_core::metrics::FctStats) -> f64| {
            delta(rwndq.fct.as_ref().map(f), droptail.fct.as_ref().map(f))
        };
        AbComparison {
            drop_reduction_pct,
            fct_mean_delta: fct(|s| s.mean),
            fct_p99_delta: fct(|s| s.p99),
            fct_max_delta: fct(|s| s.max),
            jain_mean_delta: delta(rwndq.jain_mean, droptail.jain_mean),
            mean_queue_delta: rwndq.mean_queue_bytes - droptail.mean_queue_bytes,
            mice_within_rto_min: (rwndq.mice_below(rto_min), droptail.mice_below(rto_min)),
            rwndq,
            droptail,
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let show = |d: Option<f64>| d.map_or("n/a".to_string(), |v| format!("{v:+.6}"));
        let _ = writeln!(
            s,
            "bottleneck drops   rwndq {}  droptail {}  reduction {:.1}%",
            self.rwndq.bottleneck_drops, self.droptail.bottleneck_drops, self.drop_reduction_pct
        );
        let _ = writeln!(
            s,
            "mean queue (B)     rwndq {:.0}  droptail {:.0}  delta {:+.0}",
            self.rwndq.mean_queue_bytes, self.droptail.mean_queue_bytes, self.mean_queue_delta
        );
        let _ = writeln!(s, "mice fct mean (s)  delta {}", show(self.fct_mean_delta));
        let _ = writeln!(s, "mice fct p99 (s)   delta {}", show(self.fct_p99_delta));
        let _ = writeln!(s, "mice fct max (s)   delta {}", show(self.fct_max_delta));
        let _ = writeln!(
            s,
            "mice within rto_min rwndq {:.3}  droptail {:.3}",
            self.mice_within_rto_min.0, self.mice_within_rto_min.1
        );
        let _ = writeln!(s, "jain mean          delta {}", show(self.jain_mean_delta));
        s
    }
}

fn delta(a: Option<f64>, b: Option<f64>) -> Option<f64> {
    match (a, b) {
        (Some(a), Some(b)) => Some(a - b),
        (None, None) => Some(0.0),
        _ => None,
    }
}

pub struct AbOutcome {
    pub rwndq: MetricsReport,
    pub droptail: MetricsReport,
    pub comparison: AbComparison,
}

/// Runs the two scenarios side by side. They must agree on the seed and
/// differ only in the queue discipline.
pub fn compare_scenarios(rwndq: &ScenarioConfig, droptail: &ScenarioConfig) -> Result<AbOutcome> {
    if rwndq.seed != droptail.seed {
        return Err(Error::validation(
            "seed",
            format!("A/B runs must share a seed ({} vs {})", rwndq.seed, droptail.seed),
        ));
    }
    if !matches!(rwndq.aqm, AqmConfig::Rwndq(_)) {
        return Err(Error::validation("aqm.kind", "first scenario must use rwndq"));
    }
    if droptail.aqm != AqmConfig::DropTail {
        return Err(Error::validation("aqm.kind", "second scenario must use droptail"));
    }
    if rwndq.with_aqm(AqmConfig::DropTail) != *droptail {
        return Err(Error::validation("scenario", "A/B scenarios differ in more than the queue discipline"));
    }
    let (a, b) = thread::scope(|s| {
        let a = s.spawn(|| workload::run(rwndq));
        let b = s.spawn(|| workload::run(droptail));
        (a.join().expect("rwndq run panicked"), b.join().expect("droptail run panicked"))
    });
    let (a, b) = (a?, b?);
    let comparison = AbComparison::new(
        RunSummary::new(&a, rwndq.warmup),
        RunSummary::new(&b, droptail.warmup),
        rwndq.tcp.rto_min.as_secs_f64(),
    );
    Ok(AbOutcome { rwndq: a, droptail: b, comparison })
}

pub fn run_ab(spec: &RunSpec) -> Result<AbOutcome> {
    let RunConfig::Scenario(s) = &spec.config else {
        return Err(Error::validation("run.mode", "ab_compare needs a packet-level scenario"));
    };
    if spec.mode != Mode::AbCompare {
        return Err(Error::validation("run.mode", format!("expected ab_compare, got {}", spec.mode.as_str())));
    }
    spec.validate()?;
    compare_scenarios(s, &s.with_aqm(AqmConfig::DropTail))
}
