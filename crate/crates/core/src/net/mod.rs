//! Network model: packets, links, the RED bottleneck, the dumbbell topology,
//! route selection across parallel bottlenecks and Poisson background load.

mod link;
mod packet;
mod poisson;
mod red;
mod route;
mod topology;

pub use link::{BottleneckLink, FifoLink};
pub use packet::{Packet, PacketKind, Source, ACK_PACKET_BYTES, DATA_PACKET_BYTES};
pub use poisson::PoissonSource;
pub use red::{red_drop_probability, RedParams, RedQueue, RedVerdict};
pub use route::{route_assign, RoutePolicy};
pub use topology::{build_dumbbell, HostId, LinkConfig, Topology};
