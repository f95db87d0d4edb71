//! Acceptance criteria. Runs as a plain binary so each criterion prints one
//! PASS/FAIL line; exits non-zero if any criterion fails.

use std::fmt::Write as _;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use rwndq_cli::compare_scenarios;
use rwndq_core::fluid::{convergence_time, first_reach, mean_queue, run_fluid, FluidConfig};
use rwndq_core::packet::{full_checksum, Flags, FlowKey, TcpSegment};
use rwndq_core::port::{PortState, RwndqParams};
use rwndq_core::report::{self, RunSummary};
use rwndq_core::workload::{run, AqmConfig, ElephantSpec, ScenarioConfig};
use rwndq_core::SimTime;

const BUFFER: u64 = 83 * 1500;
const MSS: u64 = 1460;
const CAPACITY: f64 = 10e9;

struct Verdict {
    pass: bool,
    detail: String,
}

fn rwndq() -> AqmConfig {
    AqmConfig::Rwndq(RwndqParams { buffer_bytes: BUFFER, ..RwndqParams::default() })
}

fn mixed(aqm: AqmConfig, sources: usize) -> ScenarioConfig {
    let mut s = ScenarioConfig::mixed(aqm, sources);
    s.topology.buffer_bytes = BUFFER;
    s
}

fn fluid_convergence() -> Verdict {
    let on = FluidConfig::default();
    let off = FluidConfig { slow_start: false, ..on.clone() };
    let target = on.target_bytes();
    let mut detail = format!("target {:.1} pkts;", target / 1500.0);
    let mut pass = (target / 1500.0 - 16.6).abs() < 1e-9;
    let mut reach = Vec::new();
    for (name, cfg) in [("slow start", &on), ("no slow start", &off)] {
        let mean = mean_queue(&run_fluid(cfg).unwrap());
        let settled = convergence_time(mean.iter().copied(), target, 0.1);
        let r = first_reach(mean.iter().copied(), 0.9 * target);
        let last = mean.last().unwrap().1 / 1500.0;
        match &settled {
            Ok(t) => {
                let _ = write!(detail, " {name}: in band from {t:.3} s, ends at {last:.2} pkts,");
            }
            Err(e) => {
                let _ = write!(detail, " {name}: {e},");
            }
        }
        pass &= settled.is_ok() && r.is_some();
        reach.push(r.unwrap_or(f64::INFINITY));
    }
    let _ = write!(detail, " 90% reached at {:.3} s vs {:.3} s", reach[0], reach[1]);
    Verdict { pass: pass && reach[0] < reach[1], detail }
}

fn staggered_fairness() -> Verdict {
    let phase = 0.1;
    let mut s = ScenarioConfig::staggered_elephants(rwndq(), phase);
    s.topology.buffer_bytes = BUFFER;
    let r = run(&s).unwrap();
    let mut worst_dev: f64 = 0.0;
    let mut worst_jain: f64 = 1.0;
    let phases = (s.duration / phase).round() as usize;
    for k in 0..phases {
        let (from, to) = (k as f64 * phase + 0.05, (k + 1) as f64 * phase);
        let mid = (from + to) / 2.0;
        let active: Vec<usize> = s
            .elephants
            .iter()
            .enumerate()
            .filter(|(_, e)| e.start <= mid && e.stop.is_none_or(|t| t > mid))
            .map(|(i, _)| i)
            .collect();
        let share = CAPACITY / active.len() as f64;
        let rates: Vec<f64> = active.iter().map(|&f| r.goodput_between(f, from, to)).collect();
        for g in &rates {
            worst_dev = worst_dev.max((g / share - 1.0).abs());
        }
        worst_jain = worst_jain.min(rwndq_core::metrics::jain_index(&rates).unwrap());
    }
    Verdict {
        pass: worst_dev <= 0.15 && worst_jain >= 0.95,
        detail: format!(
            "{phases} membership phases; worst deviation from C/n {:.1}%, worst Jain {worst_jain:.4}",
            worst_dev * 100.0
        ),
    }
}

fn queue_pinning() -> Verdict {
    let runs: Vec<f64> = std::thread::scope(|sc| {
        let handles: Vec<_> = [(rwndq(), 50), (rwndq(), 100), (AqmConfig::DropTail, 50), (AqmConfig::DropTail, 100)]
            .into_iter()
            .map(|(aqm, n)| {
                sc.spawn(move || {
                    let s = mixed(aqm, n);
                    run(&s).unwrap().mean_queue_after(s.warmup)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let target = 0.2 * BUFFER as f64;
    let (r50, r100, d50, d100) = (runs[0], runs[1], runs[2], runs[3]);
    let near_target = (r50 - target).abs() <= 0.5 * target;
    let scales = (r100 - r50).abs() / r50 < 0.25;
    let droptail_grows = d100 > d50;
    Verdict {
        pass: near_target && scales && droptail_grows,
        detail: format!(
            "rwndq 50: {:.2} pkts (target {:.1}), 100: {:.2} pkts ({:+.1}%); droptail 50: {:.2}, 100: {:.2} pkts",
            r50 / 1500.0,
            target / 1500.0,
            r100 / 1500.0,
            (r100 / r50 - 1.0) * 100.0,
            d50 / 1500.0,
            d100 / 1500.0
        ),
    }
}

fn drop_reduction() -> Verdict {
    let s = mixed(rwndq(), 50);
    let out = compare_scenarios(&s, &s.with_aqm(AqmConfig::DropTail)).unwrap();
    let (a, b) = (out.rwndq.bottleneck_drops, out.droptail.bottleneck_drops);
    Verdict {
        pass: b > 0 && a * 2 <= b,
        detail: format!(
            "drops rwndq {a} vs droptail {b} ({:.1}% reduction)",
            out.comparison.drop_reduction_pct
        ),
    }
}

fn mice_fct() -> Verdict {
    let mut s = mixed(rwndq(), 50);
    s.tcp.rto_min = SimTime::from_millis(200);
    let out = compare_scenarios(&s, &s.with_aqm(AqmConfig::DropTail)).unwrap();
    let c = &out.comparison;
    let (fa, fb) = c.mice_within_rto_min;
    let mean = |r: &RunSummary| r.fct.as_ref().map_or(f64::INFINITY, |f| f.mean);
    let (ma, mb) = (mean(&c.rwndq), mean(&c.droptail));
    Verdict {
        pass: fa > fb && ma <= mb,
        detail: format!(
            "mice under 200 ms: rwndq {:.3} vs droptail {:.3}; mean fct {:.4} s vs {:.4} s ({} of {} droptail mice unfinished)",
            fa, fb, ma, mb, c.droptail.unfinished_mice, c.droptail.mice
        ),
    }
}

fn control(flags: Flags, rwnd: u16, scale: u8) -> TcpSegment {
    let mut s = TcpSegment::new(FlowKey { src: 1, dst: 2, sport: 3, dport: 4 }, flags);
    s.rwnd_field = rwnd;
    s.scale_bits = scale;
    s.seal();
    s
}

fn algorithm_properties() -> Verdict {
    let mut failures = Vec::new();
    let mut check = |name: &str, result: Result<(), String>| {
        if let Err(e) = result {
            failures.push(format!("{name}: {e}"));
        }
    };
    let params = RwndqParams { buffer_bytes: BUFFER, ..RwndqParams::default() };

    // any interleaving of joins and leaves that ends with the starting flow
    // count restores the window exactly
    let mut runner = TestRunner::new(Config { cases: 2_000, failure_persistence: None, ..Config::default() });
    let p = params.clone();
    check(
        "join/leave reversibility",
        runner
            .run(&(1u64..40, prop::collection::vec(any::<bool>(), 0..200)), |(base, moves)| {
                let mut port = PortState::new(p.clone()).unwrap();
                for _ in 0..base {
                    port.on_packet_departure(&mut control(Flags::SYNACK, 0xFFFF, 14));
                }
                let before = port.rwnd();
                let mut extra = 0u64;
                for join in moves {
                    if join {
                        port.on_packet_departure(&mut control(Flags::SYNACK, 0xFFFF, 14));
                        extra += 1;
                    } else if extra > 0 {
                        port.on_packet_departure(&mut control(Flags::FINACK, 0xFFFF, 14));
                        extra -= 1;
                    }
                }
                for _ in 0..extra {
                    port.on_packet_departure(&mut control(Flags::FINACK, 0xFFFF, 14));
                }
                prop_assert_eq!(port.rwnd(), before);
                Ok(())
            })
            .map_err(|e| e.to_string()),
    );

    let mut runner = TestRunner::new(Config { cases: 10_000, failure_persistence: None, ..Config::default() });
    let p = params.clone();
    check(
        "rewrite monotonicity",
        runner
            .run(&(1u64..200, any::<u16>(), 0u8..=14, 1_000u64..200_000), |(flows, field, scale, rwnd)| {
                let mut port = PortState::with_flows(p.clone(), flows, rwnd).unwrap();
                let mut seg = control(Flags::ACK, field, scale);
                let before = seg.effective_rwnd();
                port.on_packet_departure(&mut seg);
                let after = seg.effective_rwnd();
                prop_assert!(after <= before);
                prop_assert!(after <= before.min(port.rwnd()) || before <= port.rwnd());
                if port.rwnd() <= before {
                    prop_assert!(port.rwnd() - after < 1u64 << scale);
                }
                prop_assert!(seg.checksum_ok());
                Ok(())
            })
            .map_err(|e| e.to_string()),
    );

    let mut runner = TestRunner::new(Config { cases: 10_000, failure_persistence: None, ..Config::default() });
    check(
        "incremental checksum",
        runner
            .run(&(any::<[u32; 4]>(), any::<u16>(), any::<u16>(), 0u8..=14), |(w, old, new, scale)| {
                let key = FlowKey { src: w[0], dst: w[1], sport: w[2] as u16, dport: (w[2] >> 16) as u16 };
                let mut seg = TcpSegment::new(key, Flags::ACK);
                seg.seq = w[3] as u64;
                seg.rwnd_field = old;
                seg.scale_bits = scale;
                seg.seal();
                seg.rewrite_rwnd(new);
                prop_assert_eq!(seg.checksum, full_checksum(&seg));
                Ok(())
            })
            .map_err(|e| e.to_string()),
    );

    let fixed = RwndqParams { slow_start: false, ..params.clone() };
    let mut port = PortState::with_flows(fixed.clone(), 7, 3000).unwrap();
    port.observe_payload(MSS as u32);
    for _ in 0..1000 * fixed.intervals_per_update {
        port.on_timer_tick(fixed.target_bytes());
    }
    check(
        "timer fixed point",
        if port.rwnd() == 3000 { Ok(()) } else { Err(format!("window moved to {}", port.rwnd())) },
    );

    let s = ScenarioConfig { duration: 0.2, seed: 5, ..mixed(rwndq(), 20) };
    let files = |tag: &str| -> Vec<(String, Vec<u8>)> {
        let dir = tempfile::Builder::new().prefix(tag).tempdir().unwrap();
        let r = run(&s).unwrap();
        let written = report::write_run_dir(&r, &RunSummary::new(&r, s.warmup), s.persistent_window(), dir.path()).unwrap();
        written
            .iter()
            .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(p).unwrap()))
            .collect()
    };
    let (a, b) = (files("a"), files("b"));
    check(
        "determinism",
        if a == b && !a.is_empty() { Ok(()) } else { Err("CSV outputs differ between identical runs".into()) },
    );

    Verdict {
        pass: failures.is_empty(),
        detail: if failures.is_empty() {
            "reversibility (2000 sequences), rewrite monotonicity and checksum (10^4 cases each), fixed point, byte-identical CSVs".into()
        } else {
            failures.join("; ")
        },
    }
}

fn flow_control_binding() -> Verdict {
    let mut s = mixed(rwndq(), 5);
    s.mice.count = 0;
    s.elephants = vec![ElephantSpec { start: 0.0, stop: None }; 5];
    s.tcp.congestion_control = false;
    s.record_windows = true;
    s.duration = 0.3;
    let r = run(&s).unwrap();
    let steady: Vec<_> = r.windows.iter().filter(|w| w.t > 0.1).collect();
    let worst = steady.iter().map(|w| w.in_flight.abs_diff(w.rwnd)).max().unwrap_or(u64::MAX);
    let senders = steady.iter().map(|w| w.flow).collect::<std::collections::BTreeSet<_>>().len();
    Verdict {
        pass: !steady.is_empty() && senders == 5 && worst <= MSS,
        detail: format!(
            "{} ACK samples from {senders} senders; worst |in_flight - rwnd| = {worst} B (MSS {MSS})",
            steady.len()
        ),
    }
}

type Criterion = (u32, &'static str, fn() -> Verdict, Duration);

fn main() -> ExitCode {
    let criteria: [Criterion; 7] = [
        (1, "fluid-model convergence", fluid_convergence, Duration::from_secs(5)),
        (2, "staggered elephant fairness", staggered_fairness, Duration::from_secs(60)),
        (3, "persistent queue pinning", queue_pinning, Duration::from_secs(600)),
        (4, "drop reduction", drop_reduction, Duration::from_secs(600)),
        (5, "mice FCT tail", mice_fct, Duration::from_secs(600)),
        (6, "algorithm-level properties", algorithm_properties, Duration::from_secs(30)),
        (7, "flow-control binding", flow_control_binding, Duration::from_secs(600)),
    ];
    let mut failed = 0;
    for (n, name, f, limit) in criteria {
        let start = Instant::now();
        let v = f();
        let elapsed = start.elapsed();
        let in_time = elapsed <= limit;
        let pass = v.pass && in_time;
        if !pass {
            failed += 1;
        }
        let timing = if in_time { String::new() } else { format!(" exceeded {:?} budget", limit) };
        println!(
            "criterion {n} ({name}): {} - {} [{:.2} s{timing}]",
            if pass { "PASS" } else { "FAIL" },
            v.detail,
            elapsed.as_secs_f64()
        );
    }
    println!("acceptance: {} passed, {failed} failed", 7 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
