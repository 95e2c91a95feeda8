//! Message trace of a repair run.

use std::fmt;

use super::identity::Digest;
use crate::field::Fe;
use crate::shamir::Share;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Recipients {
    Nodes(Vec<usize>),
    Broadcast,
}

impl Recipients {
    pub fn only(&self, node: usize) -> bool {
        matches!(self, Recipients::Nodes(v) if v == &[node])
    }
}

impl fmt::Display for Recipients {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Recipients::Broadcast => f.write_str("*"),
            Recipients::Nodes(v) => {
                let names: Vec<String> = v.iter().map(|n| format!("P{n}")).collect();
                f.write_str(&names.join(","))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Payload {
    /// The proposer asks its group to authorize a repair of `failed`.
    Request {
        group: usize,
        failed: usize,
    },
    Ack,
    /// Digest broadcast searching for the external sub-share.
    HolderLookup {
        digest: Digest,
    },
    HolderResponse {
        subshare: Share,
    },
    /// A surviving member's primary share and sub-share.
    Contribution {
        share: Share,
        subshare: Share,
    },
    /// Local step at the proposer: sub-secret and repairing polynomial.
    Interpolation {
        subshares: usize,
        points: usize,
    },
    Delivery {
        share: Share,
    },
    SubshareRestored {
        subshare: Share,
    },
}

impl Payload {
    pub fn kind(&self) -> &'static str {
        match self {
            Payload::Request { .. } => "request",
            Payload::Ack => "ack",
            Payload::HolderLookup { .. } => "holder-lookup",
            Payload::HolderResponse { .. } => "holder-response",
            Payload::Contribution { .. } => "contribution",
            Payload::Interpolation { .. } => "interpolation",
            Payload::Delivery { .. } => "delivery",
            Payload::SubshareRestored { .. } => "subshare-restored",
        }
    }

    /// Private y-values carried by the message.
    pub fn private_values(&self) -> Vec<Fe> {
        match self {
            Payload::HolderResponse { subshare } | Payload::SubshareRestored { subshare } => {
                vec![subshare.y]
            }
            Payload::Contribution { share, subshare } => vec![share.y, subshare.y],
            Payload::Delivery { share } => vec![share.y],
            _ => Vec::new(),
        }
    }

    pub fn carries_subshare(&self) -> bool {
        matches!(
            self,
            Payload::HolderResponse { .. }
                | Payload::Contribution { .. }
                | Payload::SubshareRestored { .. }
        )
    }

    /// One-line summary. y-values are redacted except in deliveries.
    pub fn summary(&self) -> String {
        match self {
            Payload::Request { group, failed } => format!("group={group} failed=P{failed}"),
            Payload::Ack => "authorized".to_string(),
            Payload::HolderLookup { digest } => format!("digest={digest}"),
            Payload::HolderResponse { subshare } => {
                format!("subshare x={} y=<redacted>", subshare.x)
            }
            Payload::Contribution { share, subshare } => format!(
                "share x={} y=<redacted> subshare x={} y=<redacted>",
                share.x, subshare.x
            ),
            Payload::Interpolation { subshares, points } => {
                format!("subshares={subshares} points={points}")
            }
            Payload::Delivery { share } => format!("share x={} y={}", share.x, share.y),
            Payload::SubshareRestored { subshare } => {
                format!("subshare x={} y=<redacted>", subshare.x)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceEvent {
    pub seq: usize,
    pub from: usize,
    pub to: Recipients,
    pub payload: Payload,
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} | {} | P{} | {} | {}",
            self.seq,
            self.payload.kind(),
            self.from,
            self.to,
            self.payload.summary()
        )
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RepairTrace {
    pub events: Vec<TraceEvent>,
}

impl RepairTrace {
    pub(crate) fn push(&mut self, from: usize, to: Recipients, payload: Payload) {
        let seq = self.events.len() + 1;
        self.events.push(TraceEvent {
            seq,
            from,
            to,
            payload,
        });
    }

    pub fn deliveries(&self) -> impl Iterator<Item = &TraceEvent> {
        self.events
            .iter()
            .filter(|e| matches!(e.payload, Payload::Delivery { .. }))
    }

    pub fn lines(&self) -> Vec<String> {
        self.events.iter().map(ToString::to_string).collect()
    }
}

impl fmt::Display for RepairTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.events {
            writeln!(f, "{e}")?;
        }
        Ok(())
    }
}
