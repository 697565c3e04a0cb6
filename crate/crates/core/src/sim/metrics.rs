use thiserror::Error;

use crate::lcrt::DroneId;

/// Fate of one packet at one receiver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Delivery {
    Delivered(f64),
    Dropped,
    /// Still queued or on the air when the run ended.
    InFlight,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PacketRecord {
    pub sequence: u64,
    pub sent_at: f64,
    /// Indexed like the receiver list the records were produced for.
    pub deliveries: Vec<Delivery>,
}

impl PacketRecord {
    pub fn delay(&self, receiver: usize) -> Option<f64> {
        match self.deliveries[receiver] {
            Delivery::Delivered(at) => Some(at - self.sent_at),
            _ => None,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MetricsError {
    #[error("no receiver got any packet")]
    NoData,
}

/// Average multicast delay with the receivers that got nothing listed
/// separately; they do not contribute to the mean.
#[derive(Debug, Clone, PartialEq)]
pub struct Amd {
    pub value: f64,
    pub without_data: Vec<usize>,
}

/// Mean delay of the packets delivered to `receiver`.
pub fn average_delay(records: &[PacketRecord], receiver: usize) -> Option<f64> {
    let (sum, n) = records
        .iter()
        .filter_map(|r| r.delay(receiver))
        .fold((0.0, 0usize), |(s, n), d| (s + d, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// Mean over receivers of each receiver's average packet delay.
pub fn amd(records: &[PacketRecord], receivers: usize) -> Result<Amd, MetricsError> {
    let mut without_data = Vec::new();
    let mut delays = Vec::with_capacity(receivers);
    for i in 0..receivers {
        match average_delay(records, i) {
            Some(d) => delays.push(d),
            None => without_data.push(i),
        }
    }
    if delays.is_empty() {
        return Err(MetricsError::NoData);
    }
    Ok(Amd {
        value: delays.iter().sum::<f64>() / delays.len() as f64,
        without_data,
    })
}

/// Bits delivered to `receiver` per second of run time.
pub fn throughput(records: &[PacketRecord], receiver: usize, packet_size: u64, duration: f64) -> f64 {
    let delivered = records
        .iter()
        .filter(|r| matches!(r.deliveries[receiver], Delivery::Delivered(_)))
        .count();
    delivered as f64 * packet_size as f64 / duration
}

/// Mean over receivers of each receiver's throughput.
pub fn amt(records: &[PacketRecord], receivers: usize, packet_size: u64, duration: f64) -> f64 {
    if receivers == 0 {
        return 0.0;
    }
    (0..receivers)
        .map(|i| throughput(records, i, packet_size, duration))
        .sum::<f64>()
        / receivers as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReceiverStats {
    pub id: DroneId,
    pub mobile: bool,
    pub avg_delay: Option<f64>,
    /// bits/s
    pub throughput: f64,
    pub delivered: u64,
    pub dropped: u64,
    pub in_flight: u64,
}

impl ReceiverStats {
    /// Delivered share of the packets whose fate was decided during the run.
    pub fn delivery_ratio(&self) -> f64 {
        let decided = self.delivered + self.dropped;
        if decided == 0 {
            1.0
        } else {
            self.delivered as f64 / decided as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Metrics {
    pub per_receiver: Vec<ReceiverStats>,
    /// seconds
    pub amd: f64,
    /// bits/s
    pub amt: f64,
    /// Mean over mobiles; 1.0 when there are none.
    pub mobile_delivery_ratio: f64,
    /// Mean over mobiles of the trajectory length beyond the straight line.
    pub mobile_extra_distance: f64,
    pub receivers_without_data: Vec<DroneId>,
    pub emitted: u64,
}

impl Metrics {
    pub fn receiver(&self, id: DroneId) -> Option<&ReceiverStats> {
        self.per_receiver.iter().find(|r| r.id == id)
    }

    pub fn from_records(
        records: &[PacketRecord],
        receivers: &[(DroneId, bool)],
        packet_size: u64,
        duration: f64,
        mobile_extra_distance: f64,
    ) -> Self {
        let mut per_receiver = Vec::with_capacity(receivers.len());
        for (i, &(id, mobile)) in receivers.iter().enumerate() {
            let mut stats = ReceiverStats {
                id,
                mobile,
                avg_delay: average_delay(records, i),
                throughput: throughput(records, i, packet_size, duration),
                delivered: 0,
                dropped: 0,
                in_flight: 0,
            };
            for r in records {
                match r.deliveries[i] {
                    Delivery::Delivered(_) => stats.delivered += 1,
                    Delivery::Dropped => stats.dropped += 1,
                    Delivery::InFlight => stats.in_flight += 1,
                }
            }
            per_receiver.push(stats);
        }
        let (amd_value, without_data) = match amd(records, receivers.len()) {
            Ok(a) => (a.value, a.without_data),
            Err(MetricsError::NoData) => (f64::NAN, (0..receivers.len()).collect()),
        };
        let mobiles: Vec<&ReceiverStats> = per_receiver.iter().filter(|r| r.mobile).collect();
        let mobile_delivery_ratio = if mobiles.is_empty() {
            1.0
        } else {
            mobiles.iter().map(|r| r.delivery_ratio()).sum::<f64>() / mobiles.len() as f64
        };
        Self {
            amd: amd_value,
            amt: amt(records, receivers.len(), packet_size, duration),
            mobile_delivery_ratio,
            mobile_extra_distance,
            receivers_without_data: without_data.into_iter().map(|i| receivers[i].0).collect(),
            emitted: records.len() as u64,
            per_receiver,
        }
    }
}
