use std::time::Duration;

use rand::Rng;
use serde::{Deserialize, Serialize};

/// Exponential backoff with bounded jitter.
///
/// Delay before retry `k` (0-based) is `initial * factor^k`, scaled by a
/// uniform factor in `[1 - jitter, 1 + jitter]`, capped at `cap`, and never
/// shorter than the previous delay.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetryPolicy {
    #[serde(with = "secs")]
    pub initial: Duration,
    pub factor: f64,
    pub jitter: f64,
    #[serde(with = "secs")]
    pub cap: Duration,
    pub max_retries: u32,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            initial: Duration::from_secs(1),
            factor: 2.0,
            jitter: 0.2,
            cap: Duration::from_secs(30),
            max_retries: 5,
        }
    }
}

impl RetryPolicy {
    pub fn delay<R: Rng + ?Sized>(&self, retry: u32, previous: Duration, rng: &mut R) -> Duration {
        let base = self.initial.as_secs_f64() * self.factor.powi(retry as i32);
        let jitter = self.jitter.clamp(0.0, 1.0);
        let scale = if jitter > 0.0 { rng.random_range(1.0 - jitter..=1.0 + jitter) } else { 1.0 };
        let secs = (base * scale).min(self.cap.as_secs_f64());
        Duration::from_secs_f64(secs).max(previous).min(self.cap)
    }
}

mod secs {
    use std::time::Duration;

    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(d.as_secs_f64())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        Ok(Duration::from_secs_f64(f64::deserialize(d)?))
    }
}
