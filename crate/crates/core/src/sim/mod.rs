//! Multicast traffic simulation with mobile receivers.

mod engine;
mod metrics;
mod scenario;

pub use engine::{
    prepare, receivers, run, run_records, transition_request, MobilePlan, Prepared, SimError,
};
pub use metrics::{
    amd, amt, average_delay, throughput, Amd, Delivery, Metrics, MetricsError, PacketRecord,
    ReceiverStats,
};
pub use scenario::{
    free_space_range, Check, MobileSpec, Policy, Scenario, DEFAULT_CHANNEL_RATE_BPS,
    DEFAULT_DURATION_S, DEFAULT_PACKET_SIZE_BITS, DEFAULT_PER_HOP_LATENCY_S,
    DEFAULT_QUEUE_CAPACITY, DEFAULT_RADIUS_M, DEFAULT_TIMESTEP_S,
};
