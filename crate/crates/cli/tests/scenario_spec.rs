use proptest::prelude::*;
use rwndq_cli::{compare_scenarios, parse_scenario, run_ab, Mode, RunConfig, RunSpec};
use rwndq_core::fluid::FluidConfig;
use rwndq_core::port::RwndqParams;
use rwndq_core::sim::TcpConfig;
use rwndq_core::workload::{AqmConfig, DumbbellConfig, ElephantSpec, MiceConfig, ScenarioConfig};
use rwndq_core::{Error, SimTime};

fn secs() -> impl Strategy<Value = f64> {
    prop_oneof![Just(0.0), 1e-6f64..2.0]
}

fn positive_secs() -> impl Strategy<Value = f64> {
    1e-6f64..2.0
}

fn fluid() -> impl Strategy<Value = FluidConfig> {
    (positive_secs(), 1u32..50, 1u64..1_000_000, 0.01f64..=1.0, 1e6f64..1e11, positive_secs(), 1u64..9000, any::<bool>(), positive_secs())
        .prop_map(|(interval, m, buffer, alpha, cap, rtt, mss, ss, horizon)| FluidConfig {
            interval,
            intervals_per_update: m,
            buffer_bytes: buffer as f64,
            alpha,
            capacity_bps: cap,
            rtt,
            mss: mss as f64,
            slow_start: ss,
            horizon,
        })
}

fn aqm() -> impl Strategy<Value = Option<(f64, u64, u32, bool, Option<u64>)>> {
    prop::option::of((0.01f64..=1.0, 1u64..10_000_000, 1u32..50, any::<bool>(), prop::option::of(1u64..10_000)))
}

fn scenario(seed: u64) -> impl Strategy<Value = ScenarioConfig> {
    let topo = (1usize..200, 1e6f64..1e11, 1e6f64..1e11, positive_secs(), 1u64..10_000_000, 1u64..100_000_000);
    let eleph = prop::collection::vec((secs(), prop::option::of(1e-6f64..1.0)), 0..6);
    let mice = (0usize..50, 1u64..100_000, 0usize..8, secs(), secs());
    let tcp = (1u32..9000, 1u32..10, 1u64..1_000_000_000, 0u8..=14, any::<bool>(), 1u32..5);
    let sim = (positive_secs(), positive_secs(), positive_secs(), secs(), any::<bool>(), any::<bool>());
    (topo, aqm(), eleph, mice, tcp, sim).prop_map(move |(t, a, e, m, tc, s)| {
        let topology = DumbbellConfig {
            n_senders: t.0,
            sender_link_bps: t.1,
            bottleneck_bps: t.2,
            rtt: t.3,
            buffer_bytes: t.4,
            host_buffer_bytes: t.5,
        };
        let aqm = match a {
            None => AqmConfig::DropTail,
            Some((alpha, interval_ns, m, ss, min)) => AqmConfig::Rwndq(RwndqParams {
                interval: SimTime::from_nanos(interval_ns),
                intervals_per_update: m,
                buffer_bytes: t.4,
                alpha,
                slow_start: ss,
                min_window: min,
            }),
        };
        ScenarioConfig {
            topology,
            aqm,
            elephants: e.into_iter().map(|(start, life)| ElephantSpec { start, stop: life.map(|l| start + l) }).collect(),
            mice: MiceConfig { count: m.0, transfer_size: m.1, epochs: m.2, epoch_start: m.3, epoch_interval: m.4 },
            tcp: TcpConfig {
                mss: tc.0,
                initial_cwnd: tc.1,
                rto_min: SimTime::from_nanos(tc.2),
                rto_max: SimTime::from_nanos(tc.2 * 4),
                window_scale: tc.3,
                congestion_control: tc.4,
                dupack_threshold: tc.5,
            },
            seed,
            duration: s.0,
            bin: s.1,
            sample_interval: s.2,
            warmup: s.3,
            record_windows: s.4,
            trace: s.5,
        }
    })
}

fn run_spec() -> impl Strategy<Value = RunSpec> {
    (any::<u64>(), "[a-z][a-z0-9_/]{0,12}").prop_flat_map(|(seed, out)| {
        let out2 = out.clone();
        prop_oneof![
            fluid().prop_map(move |c| RunSpec { mode: Mode::Fluid, config: RunConfig::Fluid(c), out_dir: out.clone().into(), seed }),
            scenario(seed).prop_map(move |s| RunSpec {
                mode: Mode::Sim,
                config: RunConfig::Scenario(s),
                out_dir: out2.clone().into(),
                seed,
            }),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn text_round_trip(spec in run_spec()) {
        let text = spec.to_text();
        let parsed = parse_scenario(&text).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
        prop_assert_eq!(&parsed, &spec);
        prop_assert_eq!(parsed.to_text(), text);
    }
}

#[test]
fn hand_written_file_normalises() {
    let text = "# comment\n[run]\nmode = sim\n\n[topology]\nbottleneck = 10Gbps\n; another\n[sim]\nduration=200ms\n";
    let spec = parse_scenario(text).unwrap();
    let canon = spec.to_text();
    assert!(canon.contains("bottleneck = 10000000000\n"));
    assert!(canon.contains("duration = 0.2\n"));
    assert_eq!(parse_scenario(&canon).unwrap(), spec);
}

#[test]
fn zero_traffic_ab_has_zero_deltas() {
    let spec = parse_scenario("[run]\nmode = ab_compare\n[sim]\nduration = 10ms\n").unwrap();
    let out = run_ab(&spec).unwrap();
    assert!(out.rwndq.is_empty() && out.droptail.is_empty());
    let c = &out.comparison;
    assert_eq!(c.drop_reduction_pct, 0.0);
    assert_eq!(c.fct_mean_delta, Some(0.0));
    assert_eq!(c.fct_p99_delta, Some(0.0));
    assert_eq!(c.jain_mean_delta, Some(0.0));
    assert_eq!(c.mean_queue_delta, 0.0);
}

#[test]
fn ab_requires_matching_seeds() {
    let a = ScenarioConfig { seed: 1, ..ScenarioConfig::default() };
    let b = ScenarioConfig { seed: 2, aqm: AqmConfig::DropTail, ..ScenarioConfig::default() };
    let err = compare_scenarios(&a, &b).err().unwrap();
    assert!(matches!(&err, Error::Validation { field, .. } if field == "seed"), "{err}");
}

#[test]
fn ab_requires_identical_scenarios() {
    let a = ScenarioConfig::default();
    let b = ScenarioConfig { duration: 2.0, aqm: AqmConfig::DropTail, ..ScenarioConfig::default() };
    assert!(matches!(compare_scenarios(&a, &b), Err(Error::Validation { .. })));
}

#[test]
fn ab_mode_rejects_droptail_only_file() {
    let err = parse_scenario("[run]\nmode = ab_compare\n[aqm]\nkind = droptail\n").unwrap_err();
    assert!(matches!(&err, Error::Validation { field, .. } if field == "aqm.kind"));
}
