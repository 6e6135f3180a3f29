use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ProtocolKind {
    Centralised,
    Hierarchical,
    SimpleP2P,
    TransitiveP2P,
}

impl ProtocolKind {
    pub const ALL: [ProtocolKind; 4] = [
        ProtocolKind::Centralised,
        ProtocolKind::Hierarchical,
        ProtocolKind::SimpleP2P,
        ProtocolKind::TransitiveP2P,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ProtocolKind::Centralised => "centralised",
            ProtocolKind::Hierarchical => "hierarchical",
            ProtocolKind::SimpleP2P => "simple-p2p",
            ProtocolKind::TransitiveP2P => "transitive-p2p",
        }
    }

    pub fn has_infrastructure(self) -> bool {
        matches!(self, ProtocolKind::Centralised | ProtocolKind::Hierarchical)
    }
}

impl fmt::Display for ProtocolKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ProtocolKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "centralised" | "centralized" | "central" => Ok(ProtocolKind::Centralised),
            "hierarchical" | "hierarchy" => Ok(ProtocolKind::Hierarchical),
            "simple-p2p" | "simplep2p" | "p2p" => Ok(ProtocolKind::SimpleP2P),
            "transitive-p2p" | "transitivep2p" | "transitive" => Ok(ProtocolKind::TransitiveP2P),
            other => Err(Error::InvalidConfig(format!("unknown protocol `{other}`"))),
        }
    }
}

/// How subscriber nodes are assigned to leaf aggregators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GroupLayout {
    /// Consecutive id ranges.
    ById,
    /// A seeded random permutation of ids, cut into consecutive ranges.
    Shuffled,
}

impl FromStr for GroupLayout {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "id" | "by-id" => Ok(GroupLayout::ById),
            "shuffled" | "random" => Ok(GroupLayout::Shuffled),
            other => Err(Error::InvalidConfig(format!("unknown group layout `{other}`"))),
        }
    }
}

impl fmt::Display for GroupLayout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GroupLayout::ById => "by-id",
            GroupLayout::Shuffled => "shuffled",
        })
    }
}

/// Timestamp a node gives a record it adopts from a piggybacked reply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ForwardStamp {
    /// Keep the time of the original direct observation.
    Original,
    /// Stamp with the time of receipt, so forwarding delays go unnoticed.
    Receipt,
}

impl FromStr for ForwardStamp {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "original" => Ok(ForwardStamp::Original),
            "receipt" => Ok(ForwardStamp::Receipt),
            other => Err(Error::InvalidConfig(format!("unknown forward stamp `{other}`"))),
        }
    }
}

impl fmt::Display for ForwardStamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ForwardStamp::Original => "original",
            ForwardStamp::Receipt => "receipt",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolConfig {
    pub kind: ProtocolKind,
    /// Seconds between two ticks of the same node or entity.
    pub t_poll: f64,
    pub monitor_count: usize,
    /// Hierarchy fan-out; `None` means `ceil(sqrt(n))`.
    pub branching: Option<usize>,
    pub group_layout: GroupLayout,
    /// Records younger than this are not re-polled; `None` means `t_poll`.
    pub t_fresh: Option<f64>,
    /// Oldest forwarded record a node will accept, in seconds.
    pub max_age: f64,
    pub forward_stamp: ForwardStamp,
}

impl ProtocolConfig {
    pub fn new(kind: ProtocolKind) -> Self {
        ProtocolConfig {
            kind,
            t_poll: 1.0,
            monitor_count: 1,
            branching: None,
            group_layout: GroupLayout::Shuffled,
            t_fresh: None,
            max_age: f64::INFINITY,
            forward_stamp: ForwardStamp::Receipt,
        }
    }

    pub fn t_fresh(&self) -> f64 {
        self.t_fresh.unwrap_or(self.t_poll)
    }

    pub fn branching_for(&self, n: usize) -> usize {
        self.branching
            .unwrap_or_else(|| ((n as f64).sqrt().ceil() as usize).max(2))
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if !(self.t_poll > 0.0 && self.t_poll.is_finite()) {
            return Err(Error::InvalidConfig(format!("t_poll {} must be > 0", self.t_poll)));
        }
        if !(self.t_fresh() >= 0.0) {
            return Err(Error::InvalidConfig(format!("t_fresh {} must be >= 0", self.t_fresh())));
        }
        if !(self.max_age >= 0.0) {
            return Err(Error::InvalidConfig(format!("max_age {} must be >= 0", self.max_age)));
        }
        if self.monitor_count < 1 || self.monitor_count > n.max(1) {
            return Err(Error::InvalidConfig(format!(
                "monitor count {} must be in 1..={n}",
                self.monitor_count
            )));
        }
        if self.branching_for(n) < 2 {
            return Err(Error::InvalidConfig("hierarchy branching must be >= 2".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let c = ProtocolConfig::new(ProtocolKind::TransitiveP2P);
        assert_eq!(c.t_fresh(), 1.0);
        assert_eq!(c.branching_for(100), 10);
        assert_eq!(c.branching_for(10_000), 100);
        assert_eq!(c.branching_for(1000), 32);
        assert!(c.max_age.is_infinite());
        assert!(c.validate(100).is_ok());
    }

    #[test]
    fn names_round_trip() {
        for k in ProtocolKind::ALL {
            assert_eq!(k.as_str().parse::<ProtocolKind>().unwrap(), k);
        }
        assert!("gossip".parse::<ProtocolKind>().is_err());
    }

    #[test]
    fn rejects_out_of_range() {
        let mut c = ProtocolConfig::new(ProtocolKind::Centralised);
        c.t_poll = 0.0;
        assert!(c.validate(10).is_err());
        c.t_poll = 1.0;
        c.monitor_count = 0;
        assert!(c.validate(10).is_err());
        c.monitor_count = 1;
        c.branching = Some(1);
        assert!(c.validate(10).is_err());
        c.branching = None;
        c.t_fresh = Some(-1.0);
        assert!(c.validate(10).is_err());
    }
}
