//! The event loop of one run.

use rand::Rng;
use rand_distr::{Distribution, Gamma};

use crate::error::{Error, Result};
use crate::metrics::{RunCounters, RunFingerprint, RunMetrics};
use crate::protocols::{Protocol, ProtocolConfig, ProtocolKind};
use crate::rng::{self, SimRng, STREAM_FAILURES, STREAM_PHASES};
use crate::topology::{NodeId, SubscriptionGraph};

use super::failure::{positive, FailureModel};
use super::queue::{Event, EventKind, EventQueue};
use super::world::World;

pub const STREAM_LAYOUT: &str = "layout";

/// How tick phases are assigned.
#[derive(Debug, Clone, PartialEq)]
pub enum PhaseMode {
    /// Independent uniform draws in `[0, t_poll)`.
    Uniform,
    /// The same phase for every node and infrastructure entity.
    Fixed(f64),
    Explicit {
        nodes: Vec<f64>,
        infra: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub protocol: ProtocolConfig,
    pub failure: FailureModel,
    /// Run length in whole seconds; one probe per second.
    pub horizon: u32,
    pub seed: u64,
    pub phases: PhaseMode,
}

impl SimConfig {
    pub fn new(protocol: ProtocolConfig, failure: FailureModel, horizon: u32, seed: u64) -> Self {
        SimConfig {
            protocol,
            failure,
            horizon,
            seed,
            phases: PhaseMode::Uniform,
        }
    }
}

pub struct Simulation {
    cfg: SimConfig,
    fingerprint: RunFingerprint,
    world: World,
    protocol: Protocol,
    queue: EventQueue,
    fail_rng: SimRng,
    gaps: Option<Gamma<f64>>,
    downtimes: Option<Gamma<f64>>,
    inconsistency: Vec<u32>,
    load: Vec<f64>,
    infra_load: Vec<u64>,
    counters: RunCounters,
}

impl Simulation {
    pub fn new(graph: &SubscriptionGraph, cfg: SimConfig) -> Result<Self> {
        let n = graph.n;
        cfg.protocol.validate(n)?;
        cfg.failure.validate()?;

        let mut world = World::new(graph);
        let mut layout_rng = rng::stream(cfg.seed, STREAM_LAYOUT);
        let protocol = Protocol::new(&cfg.protocol, &world, &mut layout_rng);
        let infra = protocol.infra_count();

        let t_poll = cfg.protocol.t_poll;
        let (node_phases, infra_phases) = match &cfg.phases {
            PhaseMode::Uniform => {
                let mut r = rng::stream(cfg.seed, STREAM_PHASES);
                let nodes: Vec<f64> = (0..n).map(|_| r.random::<f64>() * t_poll).collect();
                let infra: Vec<f64> = (0..infra).map(|_| r.random::<f64>() * t_poll).collect();
                (nodes, infra)
            }
            PhaseMode::Fixed(p) => (vec![*p; n], vec![*p; infra]),
            PhaseMode::Explicit { nodes, infra: inf } => {
                if nodes.len() != n || inf.len() != infra {
                    return Err(Error::InvalidConfig(format!(
                        "explicit phases need {n} node and {infra} infrastructure entries"
                    )));
                }
                (nodes.clone(), inf.clone())
            }
        };
        if node_phases
            .iter()
            .chain(&infra_phases)
            .any(|p| !(*p >= 0.0 && p.is_finite()))
        {
            return Err(Error::InvalidConfig("phases must be finite and >= 0".into()));
        }

        let mut queue = EventQueue::new();
        for (i, &p) in node_phases.iter().enumerate() {
            queue.schedule_at(p, EventKind::PollTick(i as NodeId));
        }
        for (e, &p) in infra_phases.iter().enumerate() {
            let kind = match cfg.protocol.kind {
                ProtocolKind::Centralised => EventKind::MonitorSweep(e as u32),
                _ => EventKind::HierarchyExchange(e as u32),
            };
            queue.schedule_at(p, kind);
        }
        world.set_phases(node_phases);

        let mut fail_rng = rng::stream(cfg.seed, STREAM_FAILURES);
        let gaps = cfg.failure.gap_distribution(n);
        let downtimes = cfg.failure.downtime_distribution();
        if let Some(g) = &gaps {
            let first = positive(g.sample(&mut fail_rng));
            queue.schedule_at(first, EventKind::FailureArrival);
        }
        if cfg.horizon >= 1 {
            queue.schedule_at(1.0, EventKind::Probe);
        }

        let fingerprint = RunFingerprint {
            protocol: cfg.protocol.kind,
            topology: graph.kind,
            n,
            k: graph.params.k,
            rate: cfg.failure.rate_pct_per_min,
            seed: cfg.seed,
        };
        let h = cfg.horizon as usize;
        Ok(Simulation {
            cfg,
            fingerprint,
            world,
            protocol,
            queue,
            fail_rng,
            gaps,
            downtimes,
            inconsistency: Vec::with_capacity(h),
            load: Vec::with_capacity(h),
            infra_load: Vec::with_capacity(h),
            counters: RunCounters::default(),
        })
    }

    pub fn world(&self) -> &World {
        &self.world
    }

    pub fn protocol(&self) -> &Protocol {
        &self.protocol
    }

    pub fn now(&self) -> f64 {
        self.queue.now()
    }

    pub fn counters(&self) -> RunCounters {
        RunCounters {
            exchanges: self.world.total_exchanges(),
            ..self.counters
        }
    }

    /// Schedules a flip of `node`'s aliveness at `time`.
    pub fn inject_toggle(&mut self, time: f64, node: NodeId) {
        self.queue.schedule_at(time, EventKind::Toggle(node));
    }

    /// Processes the next event inside the horizon and returns it.
    pub fn step(&mut self) -> Option<Event> {
        let t = self.queue.peek_time()?;
        if t > self.cfg.horizon as f64 {
            return None;
        }
        let ev = self.queue.pop()?;
        let now = ev.time;
        let t_poll = self.cfg.protocol.t_poll;
        match ev.kind {
            EventKind::FailureArrival => {
                self.failure_arrival(now);
            }
            EventKind::Toggle(node) => {
                self.toggle(node);
            }
            EventKind::PollTick(node) => {
                self.protocol.node_tick(&mut self.world, node, now);
                self.queue.schedule_at(now + t_poll, ev.kind);
            }
            EventKind::MonitorSweep(e) | EventKind::HierarchyExchange(e) => {
                self.protocol.infra_tick(&mut self.world, e as usize, now);
                self.queue.schedule_at(now + t_poll, ev.kind);
            }
            EventKind::Probe => {
                self.inconsistency.push(self.world.inconsistent_count() as u32);
                let c = self.world.take_interval();
                self.load.push(c.node_accesses as f64 / self.world.n() as f64);
                if let Some(peak) = self.protocol.take_infra_peak() {
                    self.infra_load.push(peak);
                }
                if now + 1.0 <= self.cfg.horizon as f64 {
                    self.queue.schedule_at(now + 1.0, EventKind::Probe);
                }
            }
        }
        Some(ev)
    }

    fn toggle(&mut self, node: NodeId) {
        if self.world.toggle(node) {
            self.counters.recoveries += 1;
        } else {
            self.counters.failures += 1;
        }
    }

    fn failure_arrival(&mut self, now: f64) {
        match self.downtimes {
            None => {
                let node = self.fail_rng.random_range(0..self.world.n()) as NodeId;
                self.toggle(node);
            }
            Some(d) => {
                let alive = self.world.alive_count();
                if alive > 0 {
                    let node = self.world.alive_at(self.fail_rng.random_range(0..alive));
                    self.toggle(node);
                    let down = positive(d.sample(&mut self.fail_rng));
                    self.queue.schedule_at(now + down, EventKind::Toggle(node));
                }
            }
        }
        if let Some(g) = self.gaps {
            let gap = positive(g.sample(&mut self.fail_rng));
            self.queue.schedule_at(now + gap, EventKind::FailureArrival);
        }
    }

    pub fn run_to_end(mut self) -> RunMetrics {
        while self.step().is_some() {}
        self.finish()
    }

    pub fn finish(self) -> RunMetrics {
        let counters = self.counters();
        RunMetrics {
            fingerprint: self.fingerprint,
            inconsistency_series: self.inconsistency,
            load_series: self.load,
            monitor_load_series: self.infra_load,
            counters,
        }
    }
}

pub fn run(graph: &SubscriptionGraph, cfg: SimConfig) -> Result<RunMetrics> {
    Ok(Simulation::new(graph, cfg)?.run_to_end())
}
