//! Throughput of a UART link carrying raw PCM.

use std::fmt;
use std::str::FromStr;

use crate::error::{require_positive, Error, Result};

/// Asynchronous serial character framing. A start bit is always present.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Framing {
    pub data_bits: u8,
    pub stop_bits: u8,
    pub parity_bits: u8,
}

impl Framing {
    pub const EIGHT_N_ONE: Framing = Framing { data_bits: 8, stop_bits: 1, parity_bits: 0 };

    /// Line bits per character, including the start bit.
    pub fn bits_per_char(&self) -> u32 {
        1 + u32::from(self.data_bits) + u32::from(self.stop_bits) + u32::from(self.parity_bits)
    }
}

impl FromStr for Framing {
    type Err = Error;

    /// Parses the usual `<data><parity><stop>` shorthand, e.g. `8N1`, `7E2`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::invalid(format!("framing {s:?} is not of the form 8N1"));
        let bytes = s.as_bytes();
        if bytes.len() != 3 {
            return Err(bad());
        }
        let digit = |b: u8| (b as char).to_digit(10).map(|d| d as u8).ok_or_else(bad);
        let data_bits = digit(bytes[0])?;
        let parity_bits = match bytes[1].to_ascii_uppercase() {
            b'N' => 0,
            b'E' | b'O' | b'M' | b'S' => 1,
            _ => return Err(bad()),
        };
        let stop_bits = digit(bytes[2])?;
        if !(5..=9).contains(&data_bits) || !(1..=2).contains(&stop_bits) {
            return Err(bad());
        }
        Ok(Framing { data_bits, stop_bits, parity_bits })
    }
}

impl fmt::Display for Framing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parity = if self.parity_bits == 0 { 'N' } else { 'P' };
        write!(f, "{}{}{}", self.data_bits, parity, self.stop_bits)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    /// Bytes per second produced by the sampler.
    pub capture_rate_bps: f64,
    /// Payload bytes per second the serial line can carry.
    pub link_rate_bps: f64,
    /// `link_rate / capture_rate`; below 1 continuous streaming must drop data.
    pub duty_cycle: f64,
    pub lossless_continuous: bool,
}

impl LinkBudget {
    /// Seconds needed to ship a recorded chunk of `n_samples` at `bits_per_sample`.
    pub fn transmit_time_s(&self, n_samples: usize, bits_per_sample: u32) -> f64 {
        n_samples as f64 * f64::from(bits_per_sample) / 8.0 / self.link_rate_bps
    }
}

pub fn link_budget(sample_rate_hz: f64, bits_per_sample: u32, baud: f64, framing: Framing) -> Result<LinkBudget> {
    require_positive("sample_rate_hz", sample_rate_hz)?;
    require_positive("baud", baud)?;
    if bits_per_sample == 0 {
        return Err(Error::invalid("bits_per_sample must be positive"));
    }
    if framing.data_bits == 0 {
        return Err(Error::invalid("framing needs at least one data bit"));
    }
    let link_rate_bps = baud * f64::from(framing.data_bits) / f64::from(framing.bits_per_char()) / 8.0;
    let capture_rate_bps = sample_rate_hz * f64::from(bits_per_sample) / 8.0;
    Ok(LinkBudget {
        capture_rate_bps,
        link_rate_bps,
        duty_cycle: link_rate_bps / capture_rate_bps,
        lossless_continuous: link_rate_bps >= capture_rate_bps,
    })
}
