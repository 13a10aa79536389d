use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

/// Independent random streams derived from one master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    /// The task itself: dimension, weights, inputs, observation noise.
    Task,
    /// Held-out probe points used by the Bayes-risk estimator.
    Probe,
}

impl Stream {
    fn tag(self) -> &'static [u8] {
        match self {
            Stream::Task => b"iclbench/task/v1",
            Stream::Probe => b"iclbench/probe/v1",
        }
    }
}

/// Counter-based seed derivation.
///
/// The ChaCha20 key for `(stream, scenario_id, replication)` is
///
/// ```text
/// SHA-256( tag(stream) || 0x00 || master_seed as u64 LE
///          || len(scenario_id) as u64 LE || scenario_id UTF-8
///          || replication as u64 LE )
/// ```
///
/// so any replication can be regenerated on its own, in any order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedPolicy {
    pub master_seed: u64,
}

impl Default for SeedPolicy {
    fn default() -> Self {
        Self { master_seed: 0 }
    }
}

impl SeedPolicy {
    pub fn new(master_seed: u64) -> Self {
        Self { master_seed }
    }

    pub fn key(&self, stream: Stream, scenario_id: &str, replication: usize) -> [u8; 32] {
        let mut hasher = Sha256::new();
        hasher.update(stream.tag());
        hasher.update([0u8]);
        hasher.update(self.master_seed.to_le_bytes());
        hasher.update((scenario_id.len() as u64).to_le_bytes());
        hasher.update(scenario_id.as_bytes());
        hasher.update((replication as u64).to_le_bytes());
        hasher.finalize().into()
    }

    pub fn rng(&self, stream: Stream, scenario_id: &str, replication: usize) -> ChaCha20Rng {
        ChaCha20Rng::from_seed(self.key(stream, scenario_id, replication))
    }
}
