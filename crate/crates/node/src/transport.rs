use pouw_core::PublicKey;

use crate::message::Envelope;

/// Side effects requested by a node handler. Nodes never perform I/O
/// themselves; the runtime delivers these.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outbound {
    /// Fan out on the envelope's topic to every subscriber but the sender.
    Publish(Envelope),
    Direct { to: PublicKey, envelope: Envelope },
    /// Call the node's timer handler at this protocol time (milliseconds).
    WakeAt(u64),
}

/// Delivery service between nodes.
pub trait Transport {
    fn publish(&mut self, from: &PublicKey, envelope: Envelope);
    fn send_direct(&mut self, from: &PublicKey, to: &PublicKey, envelope: Envelope);
    fn wake_at(&mut self, node: &PublicKey, at_ms: u64);
}

pub fn dispatch(from: &PublicKey, outbound: Vec<Outbound>, transport: &mut dyn Transport) {
    for o in outbound {
        match o {
            Outbound::Publish(env) => transport.publish(from, env),
            Outbound::Direct { to, envelope } => transport.send_direct(from, &to, envelope),
            Outbound::WakeAt(t) => transport.wake_at(from, t),
        }
    }
}
