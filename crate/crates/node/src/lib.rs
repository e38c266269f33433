//! Network roles of the chain: the Root Authority, miners, full nodes and
//! light nodes. Nodes are pure state machines; a runtime delivers their
//! [`Outbound`] effects.

mod authority;
pub mod light;
pub mod message;
pub mod metrics;
mod miner;
mod node;
mod sync;
pub mod transport;

pub use authority::{AuthorityConfig, AuthorityState, RoundRecord};
pub use light::{LightError, LightLog, VerifiedBalance};
pub use message::{BlockAnnouncement, Envelope, Message, SyncMessage, Topic};
pub use metrics::NodeMetrics;
pub use miner::MinerState;
pub use node::{Adversary, Node, NodeConfig, NodeError, Role};
pub use sync::SyncState;
pub use transport::{dispatch, Outbound, Transport};
