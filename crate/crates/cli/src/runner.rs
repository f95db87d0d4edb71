//! Runs a [`RunSpec`] and writes its output directory.
//!
//! Results are written to a sibling staging directory and moved into place
//! only once every file is complete, so a failed run leaves nothing behind.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rwndq_core::fluid::{self, FluidConfig};
use rwndq_core::report::{self, RunSummary};
use rwndq_core::workload;
use rwndq_core::{Error, Result};

use crate::ab::run_ab;
use crate::scenario::{Mode, RunConfig, RunSpec};

const PACKET_BYTES: f64 = 1500.0;
const BAND: f64 = 0.1;

pub struct Outcome {
    /// Human-readable summary, also written to the output directory.
    pub summary: String,
    pub files: Vec<PathBuf>,
}

pub fn execute(spec: &RunSpec) -> Result<Outcome> {
    spec.validate()?;
    let staging = staging_dir(&spec.out_dir);
    if staging.exists() {
        fs::remove_dir_all(&staging).map_err(|e| Error::io(&staging, e))?;
    }
    let written = produce(spec, &staging).and_then(|summary| {
        fs::write(staging.join("scenario.txt"), spec.to_text()).map_err(|e| Error::io(&staging, e))?;
        Ok(summary)
    });
    let summary = match written {
        Ok(s) => s,
        Err(e) => {
            let _ = fs::remove_dir_all(&staging);
            return Err(e);
        }
    };
    let files = publish(&staging, &spec.out_dir).inspect_err(|_| {
        let _ = fs::remove_dir_all(&staging);
    })?;
    Ok(Outcome { summary, files })
}

fn produce(spec: &RunSpec, dir: &Path) -> Result<String> {
    match (&spec.config, spec.mode) {
        (RunConfig::Fluid(cfg), Mode::Fluid) => {
            let series = fluid::run_fluid(cfg)?;
            report::write_fluid_dir(&series, dir)?;
            let summary = fluid_summary(cfg, &series);
            write_text(dir, "summary.txt", &summary)?;
            Ok(summary)
        }
        (RunConfig::Scenario(s), Mode::Sim) => {
            let r = workload::run(s)?;
            let summary = RunSummary::new(&r, s.warmup);
            report::write_run_dir(&r, &summary, s.persistent_window(), dir)?;
            Ok(summary.to_text())
        }
        (RunConfig::Scenario(s), Mode::AbCompare) => {
            let out = run_ab(spec)?;
            let c = &out.comparison;
            report::write_run_dir(&out.rwndq, &c.rwndq, s.persistent_window(), &dir.join("rwndq"))?;
            report::write_run_dir(&out.droptail, &c.droptail, s.persistent_window(), &dir.join("droptail"))?;
            let text = c.to_text();
            write_text(dir, "comparison.txt", &text)?;
            Ok(text)
        }
        _ => Err(Error::validation("run.mode", "configuration does not match mode")),
    }
}

fn fluid_summary(cfg: &FluidConfig, series: &[fluid::FluidSample]) -> String {
    let target = cfg.target_bytes();
    let mean = fluid::mean_queue(series);
    let mut s = String::new();
    let _ = writeln!(s, "target queue      {target:.0} B ({:.2} pkts)", target / PACKET_BYTES);
    if let Some(&(_, m)) = mean.last() {
        let _ = writeln!(s, "final mean queue  {m:.0} B ({:.2} pkts)", m / PACKET_BYTES);
    }
    match fluid::convergence_time(mean.iter().copied(), target, BAND) {
        Ok(t) => {
            let _ = writeln!(s, "mean queue within {:.0}% of target from {t:.4} s", BAND * 100.0);
        }
        Err(_) => {
            let _ = writeln!(s, "mean queue never settles within {:.0}% of target", BAND * 100.0);
        }
    }
    match fluid::first_reach(mean.iter().copied(), (1.0 - BAND) * target) {
        Some(t) => {
            let _ = writeln!(s, "mean queue reaches 90% of target at {t:.4} s");
        }
        None => {
            let _ = writeln!(s, "mean queue never reaches 90% of target");
        }
    }
    s
}

fn write_text(dir: &Path, name: &str, text: &str) -> Result<()> {
    let path = dir.join(name);
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    fs::write(&path, text).map_err(|e| Error::io(&path, e))
}

fn staging_dir(out: &Path) -> PathBuf {
    let name = out.file_name().map_or_else(|| "out".into(), |n| n.to_string_lossy().into_owned());
    let parent = out.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    parent.join(format!(".{name}.partial"))
}

/// Moves every entry of `staging` into `out`, replacing same-named entries.
fn publish(staging: &Path, out: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let mut entries: Vec<_> = fs::read_dir(staging)
        .map_err(|e| Error::io(staging, e))?
        .map(|e| e.map(|e| e.file_name()))
        .collect::<std::io::Result<_>>()
        .map_err(|e| Error::io(staging, e))?;
    entries.sort();
    let mut files = Vec::new();
    for name in entries {
        let (from, to) = (staging.join(&name), out.join(&name));
        if to.is_dir() {
            fs::remove_dir_all(&to).map_err(|e| Error::io(&to, e))?;
        }
        fs::rename(&from, &to).map_err(|e| Error::io(&to, e))?;
        if to.is_dir() {
            let mut inner: Vec<PathBuf> = fs::read_dir(&to)
                .map_err(|e| Error::io(&to, e))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .collect();
            inner.sort();
            files.extend(inner);
        } else {
            files.push(to);
        }
    }
    fs::remove_dir(staging).map_err(|e| Error::io(staging, e))?;
    Ok(files)
}
