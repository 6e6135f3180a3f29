use hbsim_core::protocols::{ForwardStamp, GroupLayout, Overlap, Protocol, ProtocolConfig, ProtocolKind};
use hbsim_core::sim::{run, EventKind, FailureModel, PhaseMode, Recovery, SimConfig, Simulation, World};
use hbsim_core::topology::{gen_random, GenParams, NodeId, SubscriptionGraph, TopologyKind};

const PROTOCOLS: [ProtocolKind; 4] = ProtocolKind::ALL;

fn cfg(kind: ProtocolKind, rate: f64, horizon: u32, seed: u64) -> SimConfig {
    SimConfig::new(ProtocolConfig::new(kind), FailureModel::with_rate(rate), horizon, seed)
}

fn infra_total(p: &Protocol) -> u64 {
    match p {
        Protocol::Centralised(c) => (0..c.monitor_count()).map(|m| c.accesses_total(m)).sum(),
        Protocol::Hierarchical(h) => (0..h.aggregator_count()).map(|a| h.accesses_total(a)).sum(),
        _ => 0,
    }
}

fn node_total(w: &World) -> u64 {
    (0..w.n() as NodeId).map(|i| w.accesses_total(i)).sum()
}

fn hand_graph(n: usize, out_edges: Vec<Vec<NodeId>>) -> SubscriptionGraph {
    let k = out_edges[0].len();
    SubscriptionGraph {
        n,
        out_edges,
        kind: TopologyKind::ScaleFree,
        params: GenParams::new(k),
        seed: 0,
    }
}

#[test]
fn zero_horizon_gives_empty_series() {
    let g = gen_random(50, 7, 0).unwrap();
    for kind in PROTOCOLS {
        let m = run(&g, cfg(kind, 10.0, 0, 1)).unwrap();
        assert!(m.inconsistency_series.is_empty());
        assert!(m.load_series.is_empty());
        assert!(m.monitor_load_series.is_empty());
    }
}

#[test]
fn no_failures_means_no_inconsistency() {
    let g = gen_random(200, 14, 3).unwrap();
    for kind in PROTOCOLS {
        let m = run(&g, cfg(kind, 0.0, 120, 4)).unwrap();
        assert_eq!(m.inconsistency_series.len(), 120);
        assert!(m.inconsistency_series.iter().all(|&c| c == 0), "{kind}");
        assert!(m.load_series[5..].iter().all(|&l| l > 0.0), "{kind} still polls");
    }
}

#[test]
fn same_seed_same_metrics() {
    let g = gen_random(300, 17, 5).unwrap();
    for kind in PROTOCOLS {
        let a = run(&g, cfg(kind, 10.0, 200, 9)).unwrap();
        let b = run(&g, cfg(kind, 10.0, 200, 9)).unwrap();
        assert_eq!(a, b, "{kind}");
        let c = run(&g, cfg(kind, 10.0, 200, 10)).unwrap();
        assert_ne!(a.inconsistency_series, c.inconsistency_series, "{kind}");
    }
}

#[test]
fn events_in_time_order_and_inside_horizon() {
    let g = gen_random(100, 10, 1).unwrap();
    for kind in PROTOCOLS {
        let mut sim = Simulation::new(&g, cfg(kind, 10.0, 60, 2)).unwrap();
        let mut last = 0.0;
        while let Some(ev) = sim.step() {
            assert!(ev.time >= last);
            assert!(ev.time <= 60.0);
            last = ev.time;
        }
    }
}

#[test]
fn belief_keys_and_observation_times_are_stable() {
    let g = gen_random(150, 12, 6).unwrap();
    for kind in PROTOCOLS {
        let mut sim = Simulation::new(&g, cfg(kind, 10.0, 120, 7)).unwrap();
        let mut prev: Vec<f64> = (0..150)
            .flat_map(|i| sim.world().beliefs_of(i).iter().map(|b| b.observed_at))
            .collect();
        let mut prev_access = vec![0u64; 150];
        while let Some(ev) = sim.step() {
            let w = sim.world();
            let now = sim.now();
            let mut idx = 0;
            for i in 0..150u32 {
                let beliefs = w.beliefs_of(i);
                let targets: Vec<NodeId> = beliefs.iter().map(|b| b.target).collect();
                assert_eq!(targets, g.out_edges[i as usize]);
                let revived = matches!(ev.kind, EventKind::Toggle(x) if x == i) && w.is_alive(i);
                for b in beliefs {
                    assert!(b.observed_at <= now);
                    if !revived {
                        assert!(b.observed_at >= prev[idx], "{kind}: observed_at went back at node {i}");
                    }
                    prev[idx] = b.observed_at;
                    idx += 1;
                }
                assert!(w.accesses_total(i) >= prev_access[i as usize]);
                prev_access[i as usize] = w.accesses_total(i);
            }
        }
    }
}

#[test]
fn direct_observations_are_truthful() {
    let g = gen_random(100, 10, 11).unwrap();
    let simple = cfg(ProtocolKind::SimpleP2P, 10.0, 300, 12);
    // receipt stamping gives forwarded records the current time too
    let mut transitive = cfg(ProtocolKind::TransitiveP2P, 10.0, 300, 12);
    transitive.protocol.forward_stamp = ForwardStamp::Original;
    for c in [simple, transitive] {
        let mut sim = Simulation::new(&g, c).unwrap();
        while let Some(ev) = sim.step() {
            if let EventKind::PollTick(node) = ev.kind {
                let w = sim.world();
                for b in w.beliefs_of(node) {
                    if b.observed_at == ev.time {
                        assert_eq!(b.believed_alive, w.is_alive(b.target));
                    }
                }
            }
        }
    }
}

#[test]
fn incremental_probe_matches_brute_force() {
    let g = gen_random(200, 14, 13).unwrap();
    for kind in PROTOCOLS {
        let mut sim = Simulation::new(&g, cfg(kind, 10.0, 200, 14)).unwrap();
        while sim.step().is_some() {
            let w = sim.world();
            assert_eq!(w.inconsistent_count(), w.inconsistent_count_brute());
        }
    }
}

#[test]
fn accesses_are_conserved() {
    let g = gen_random(120, 11, 15).unwrap();
    for kind in PROTOCOLS {
        let mut sim = Simulation::new(&g, cfg(kind, 10.0, 100, 16)).unwrap();
        while sim.step().is_some() {}
        let nodes = node_total(sim.world());
        let infra = infra_total(sim.protocol());
        assert_eq!(nodes + infra, 2 * sim.world().total_exchanges(), "{kind}");
        if !kind.has_infrastructure() {
            assert_eq!(infra, 0);
        }
    }
}

#[test]
fn failure_count_tracks_rate() {
    let n = 1000;
    let g = gen_random(n, 32, 17).unwrap();
    let mut total = 0u64;
    for seed in 0..10 {
        let mut sim = Simulation::new(&g, cfg(ProtocolKind::SimpleP2P, 1.0, 3600, seed)).unwrap();
        while sim.step().is_some() {}
        total += sim.counters().failures;
    }
    let mean = total as f64 / 10.0;
    assert!((mean / 600.0 - 1.0).abs() <= 0.10, "{mean}");
}

#[test]
fn toggle_model_counts_both_directions() {
    let g = gen_random(1000, 32, 18).unwrap();
    let mut c = cfg(ProtocolKind::SimpleP2P, 1.0, 3600, 3);
    c.failure.recovery = Recovery::Toggle;
    let mut sim = Simulation::new(&g, c).unwrap();
    while sim.step().is_some() {}
    let counters = sim.counters();
    let toggles = (counters.failures + counters.recoveries) as f64;
    assert!((toggles / 600.0 - 1.0).abs() <= 0.15, "{toggles}");
}

#[test]
fn probe_counts_every_subscriber_of_a_fresh_failure() {
    let g = gen_random(100, 10, 19).unwrap();
    let victim: NodeId = 42;
    let s = g.out_edges.iter().filter(|ts| ts.contains(&victim)).count();
    let mut c = cfg(ProtocolKind::SimpleP2P, 0.0, 3, 0);
    // every node ticks at x.9, so a death at 1.95 is unseen by the probe at 2
    c.phases = PhaseMode::Fixed(0.9);
    let mut sim = Simulation::new(&g, c).unwrap();
    sim.inject_toggle(1.95, victim);
    let m = sim.run_to_end();
    assert_eq!(m.inconsistency_series, vec![0, s as u32, 0]);
}

#[test]
fn simple_p2p_polls_k_per_second() {
    let (n, k) = (200, 14);
    let g = gen_random(n, k, 20).unwrap();
    let m = run(&g, cfg(ProtocolKind::SimpleP2P, 0.0, 50, 1)).unwrap();
    // each exchange adds one access at both ends, so per-node load is 2k
    for &l in &m.load_series[1..] {
        assert!((l - 2.0 * k as f64).abs() < 1e-9, "{l}");
    }
    assert_eq!(m.counters.exchanges, (n * k * 50) as u64);

    let t = run(&g, cfg(ProtocolKind::TransitiveP2P, 0.0, 50, 1)).unwrap();
    assert!(t.counters.exchanges <= m.counters.exchanges);
}

#[test]
fn transitive_equals_simple_without_overlap() {
    // i -> {i+1, i+3}: no responder ever tracks a target of its requester
    let n = 100;
    let edges = (0..n)
        .map(|i| vec![((i + 1) % n) as NodeId, ((i + 3) % n) as NodeId])
        .collect();
    let g = hand_graph(n, edges);
    let simple = run(&g, cfg(ProtocolKind::SimpleP2P, 10.0, 600, 21)).unwrap();
    let mut sim = Simulation::new(&g, cfg(ProtocolKind::TransitiveP2P, 10.0, 600, 21)).unwrap();
    if let Protocol::TransitiveP2P(t) = sim.protocol() {
        assert_eq!(Overlap::build(sim.world()).mean_shared(), 0.0);
        assert_eq!(t.adopted(), 0);
    }
    while sim.step().is_some() {}
    if let Protocol::TransitiveP2P(t) = sim.protocol() {
        assert_eq!(t.adopted(), 0);
    }
    let trans = sim.finish();
    // the first tick is gated because initial records are younger than t_fresh
    assert_eq!(simple.inconsistency_series[1..], trans.inconsistency_series[1..]);
    assert_eq!(simple.load_series[1..], trans.load_series[1..]);
}

#[test]
fn simple_p2p_detection_delay_is_half_a_poll() {
    let g = gen_random(1000, 32, 22).unwrap();
    let victim: NodeId = 7;
    let subscribers: Vec<NodeId> = (0..1000)
        .filter(|&i| g.out_edges[i as usize].contains(&victim))
        .collect();
    let mut delays = Vec::new();
    for seed in 0..10 {
        let mut sim = Simulation::new(&g, cfg(ProtocolKind::SimpleP2P, 0.0, 20, seed)).unwrap();
        let t0 = 10.37;
        sim.inject_toggle(t0, victim);
        let mut pending = subscribers.clone();
        while let Some(ev) = sim.step() {
            if let EventKind::PollTick(node) = ev.kind {
                if ev.time > t0 {
                    if let Some(p) = pending.iter().position(|&x| x == node) {
                        pending.swap_remove(p);
                        delays.push(ev.time - t0);
                    }
                }
            }
        }
        assert!(pending.is_empty());
    }
    let mean = delays.iter().sum::<f64>() / delays.len() as f64;
    assert!(delays.iter().all(|&d| d > 0.0 && d <= 1.0));
    assert!((mean - 0.5).abs() < 0.05, "{mean} over {}", delays.len());
}

#[test]
fn hierarchy_cross_group_failure_arrives_at_four() {
    let n = 100;
    let mut edges: Vec<Vec<NodeId>> = (0..n).map(|i| vec![((i + 1) % n) as NodeId]).collect();
    // node 95 sits in the last leaf group, node 3 in the first
    edges[95] = vec![3];
    let g = hand_graph(n, edges);
    let mut pc = ProtocolConfig::new(ProtocolKind::Hierarchical);
    pc.group_layout = GroupLayout::ById;
    let mut c = SimConfig::new(pc, FailureModel::with_rate(0.0), 6, 0);
    c.phases = PhaseMode::Fixed(0.0);
    let mut sim = Simulation::new(&g, c).unwrap();
    if let Protocol::Hierarchical(h) = sim.protocol() {
        assert_ne!(h.tree.leaf_of(3), h.tree.leaf_of(95));
    }
    sim.inject_toggle(0.5, 3);
    let mut learned = None;
    while let Some(ev) = sim.step() {
        let b = sim.world().belief(95, 3).unwrap();
        if learned.is_none() && !b.believed_alive {
            learned = Some(ev.time);
        }
    }
    assert_eq!(learned, Some(4.0));
}

#[test]
fn centralised_load_is_two_per_node() {
    let n = 100;
    let g = gen_random(n, 10, 23).unwrap();
    let m = run(&g, cfg(ProtocolKind::Centralised, 0.0, 10, 24)).unwrap();
    for &l in &m.load_series[1..] {
        assert!((l - 2.0).abs() < 1e-9, "{l}");
    }
    for &peak in &m.monitor_load_series[1..] {
        assert_eq!(peak, 2 * n as u64);
    }
}

#[test]
fn explicit_phases_are_checked() {
    let g = gen_random(10, 3, 0).unwrap();
    let mut c = cfg(ProtocolKind::Centralised, 1.0, 10, 0);
    c.phases = PhaseMode::Explicit {
        nodes: vec![0.0; 10],
        infra: vec![],
    };
    assert!(Simulation::new(&g, c.clone()).is_err());
    c.phases = PhaseMode::Explicit {
        nodes: vec![0.0; 10],
        infra: vec![0.25],
    };
    assert!(Simulation::new(&g, c).is_ok());
}
