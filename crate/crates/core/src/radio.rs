//! Closed-form functional-split datarates, RU-DU-CU processing effort and
//! Ethernet burst framing.
//!
//! All rates are bit/s and all efforts are GOPS/slot. Conversion to Gbps
//! happens only at I/O boundaries.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Radio configuration feeding the split-7.2/7.3 datarate and processing
/// effort formulas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitParams {
    /// Antenna ports.
    pub n_ports: u32,
    /// Spatial layers.
    pub n_layers: u32,
    /// Resource blocks.
    pub n_rb: u32,
    /// Sub-carriers per resource block.
    #[serde(default = "default_sc_per_rb")]
    pub sc_per_rb: u32,
    /// Symbols per sub-frame.
    #[serde(default = "default_sym_per_sf")]
    pub sym_per_sf: u32,
    /// Sub-frame duration, seconds.
    pub sf_duration: f64,
    /// Maximum RB utilization, in (0, 1].
    pub utilization: f64,
    /// Quantizer resolution per I/Q dimension, bits.
    pub quantizer_bits: u32,
    /// Fronthaul overhead multiplier, >= 1.
    pub overhead: f64,
    /// Resource overhead fraction, in [0, 1).
    pub resource_overhead: f64,
    /// Modulation order (4, 16, 64 or 256).
    pub mod_order: u32,
    /// MIMO antennas.
    pub n_antennas: u32,
    /// Modulation bits used by the processing-effort model.
    pub mod_bits: f64,
    /// Coding rate, in [0, 1].
    pub code_rate: f64,
}

fn default_sc_per_rb() -> u32 {
    12
}

fn default_sym_per_sf() -> u32 {
    14
}

impl SplitParams {
    /// Uplink split-7.2 configuration: 2x2 MIMO, 2 layers, 50 MHz at 15 kHz
    /// (270 RBs), 1 ms sub-frames. `quantizer_bits = 12` and `overhead = 1.06`
    /// are calibration constants that land the split-7.2 rate on 2.304 Gbps.
    pub fn calibrated_uplink() -> Self {
        Self {
            n_ports: 2,
            n_layers: 2,
            n_rb: 270,
            sc_per_rb: 12,
            sym_per_sf: 14,
            sf_duration: 1e-3,
            utilization: 1.0,
            quantizer_bits: 12,
            overhead: 1.06,
            resource_overhead: 0.25,
            mod_order: 64,
            n_antennas: 2,
            mod_bits: 6.0,
            code_rate: 0.64,
        }
    }

    /// Downlink split-7.3 configuration. Same radio as the uplink preset but
    /// the split-7.3 stream carries modulated bits, so one bit per dimension
    /// with 25% resource overhead gives 0.432 Gbps.
    pub fn calibrated_downlink() -> Self {
        Self {
            quantizer_bits: 1,
            ..Self::calibrated_uplink()
        }
    }

    /// Processing-effort configuration (MCS 16 read as 6 modulation bits at
    /// rate 0.64). The effort model counts 219 active RBs, which places the
    /// total effort at roughly 550 GOPS/slot.
    pub fn calibrated_processing() -> Self {
        Self {
            n_rb: 219,
            ..Self::calibrated_uplink()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("n_ports", self.n_ports),
            ("n_layers", self.n_layers),
            ("n_rb", self.n_rb),
            ("sc_per_rb", self.sc_per_rb),
            ("sym_per_sf", self.sym_per_sf),
            ("quantizer_bits", self.quantizer_bits),
            ("n_antennas", self.n_antennas),
        ];
        for (name, value) in counts {
            if value < 1 {
                return Err(invalid(format!("{name} must be >= 1, got {value}")));
            }
        }
        if !(self.sf_duration > 0.0) {
            return Err(invalid(format!("sf_duration must be > 0, got {}", self.sf_duration)));
        }
        if !(self.utilization > 0.0 && self.utilization <= 1.0) {
            return Err(invalid(format!("utilization must be in (0, 1], got {}", self.utilization)));
        }
        if !(self.resource_overhead >= 0.0 && self.resource_overhead < 1.0) {
            return Err(invalid(format!(
                "resource_overhead must be in [0, 1), got {}",
                self.resource_overhead
            )));
        }
        if !(self.overhead >= 1.0) {
            return Err(invalid(format!("overhead must be >= 1, got {}", self.overhead)));
        }
        if ![4, 16, 64, 256].contains(&self.mod_order) {
            return Err(invalid(format!(
                "mod_order must be one of 4, 16, 64, 256, got {}",
                self.mod_order
            )));
        }
        if !(self.mod_bits >= 0.0) {
            return Err(invalid(format!("mod_bits must be >= 0, got {}", self.mod_bits)));
        }
        if !(0.0..=1.0).contains(&self.code_rate) {
            return Err(invalid(format!("code_rate must be in [0, 1], got {}", self.code_rate)));
        }
        Ok(())
    }

    /// Resource elements per second before utilization and quantization.
    fn re_per_second(&self) -> f64 {
        f64::from(self.n_rb) * f64::from(self.sc_per_rb) * f64::from(self.sym_per_sf)
            / self.sf_duration
    }
}

fn invalid(msg: String) -> Error {
    Error::InvalidParameter(msg)
}

/// Split-7.2 front/mid-haul datarate in bit/s.
pub fn split72_rate(p: &SplitParams) -> Result<f64> {
    p.validate()?;
    Ok(f64::from(p.n_ports)
        * p.re_per_second()
        * p.utilization
        * f64::from(p.quantizer_bits)
        * 2.0
        * p.overhead)
}

/// Split-7.3 front/mid-haul datarate in bit/s.
pub fn split73_rate(p: &SplitParams) -> Result<f64> {
    p.validate()?;
    Ok(f64::from(p.n_layers)
        * p.re_per_second()
        * p.utilization
        * (1.0 - p.resource_overhead)
        * f64::from(p.quantizer_bits)
        * f64::from(p.mod_order).log2()
        * p.overhead)
}

/// Total RU-DU-CU processing effort in GOPS/slot.
pub fn rdc_effort(p: &SplitParams) -> Result<f64> {
    p.validate()?;
    let na = f64::from(p.n_antennas);
    Ok((3.0 * na + na * na + p.mod_bits * p.code_rate * f64::from(p.n_layers) / 3.0)
        * f64::from(p.n_rb)
        / 5.0)
}

/// Intra-PHY functional split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Split {
    #[serde(rename = "7.2")]
    Split72,
    #[serde(rename = "7.3")]
    Split73,
}

impl Split {
    /// Fraction of the processing effort executed at the RU.
    pub fn ru_fraction(self) -> f64 {
        match self {
            Split::Split72 => 0.40,
            Split::Split73 => 0.50,
        }
    }
}

/// Divides an effort into `(ru_share, ducu_share)`.
pub fn split_fraction(effort: f64, split: Split) -> (f64, f64) {
    // The larger share is computed by multiplication and the smaller one by
    // subtraction, which is exact (Sterbenz), so the shares add back to
    // `effort` bit for bit.
    let ru_fraction = split.ru_fraction();
    if ru_fraction >= 0.5 {
        let ru = effort * ru_fraction;
        (ru, effort - ru)
    } else {
        let ducu = effort * (1.0 - ru_fraction);
        (effort - ducu, ducu)
    }
}

/// Ethernet framing of periodic front/mid-haul bursts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BurstConfig {
    /// Ethernet payload per frame, bits.
    #[serde(default = "default_payload_bits")]
    pub payload_bits: f64,
    /// Maximum Ethernet frame size, bits.
    #[serde(default = "default_frame_bits")]
    pub frame_bits: f64,
    /// Burst interval, seconds.
    #[serde(default = "default_burst_interval")]
    pub burst_interval: f64,
}

fn default_payload_bits() -> f64 {
    1500.0 * 8.0
}

fn default_frame_bits() -> f64 {
    1542.0 * 8.0
}

fn default_burst_interval() -> f64 {
    31.25e-6
}

impl Default for BurstConfig {
    fn default() -> Self {
        Self {
            payload_bits: default_payload_bits(),
            frame_bits: default_frame_bits(),
            burst_interval: default_burst_interval(),
        }
    }
}

impl BurstConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.payload_bits > 0.0) || !(self.frame_bits >= self.payload_bits) {
            return Err(invalid(format!(
                "burst framing needs frame_bits >= payload_bits > 0, got {} / {}",
                self.frame_bits, self.payload_bits
            )));
        }
        if !(self.burst_interval > 0.0) {
            return Err(invalid(format!(
                "burst_interval must be > 0, got {}",
                self.burst_interval
            )));
        }
        Ok(())
    }
}

/// Frames needed to carry one burst of a `rate` bit/s flow.
pub fn burst_frames(rate: f64, cfg: &BurstConfig) -> u64 {
    if rate <= 0.0 {
        return 0;
    }
    let frames = rate * cfg.burst_interval / cfg.payload_bits;
    // absorb representation error so exact multiples do not round up
    (frames - 1e-9).ceil().max(1.0) as u64
}

/// On-the-wire throughput of `frames` frames per burst.
pub fn effective_throughput(frames: u64, cfg: &BurstConfig) -> f64 {
    frames as f64 * cfg.frame_bits / cfg.burst_interval
}

/// Effective wire rate of a flow after burst framing.
pub fn framed_rate(rate: f64, cfg: &BurstConfig) -> f64 {
    effective_throughput(burst_frames(rate, cfg), cfg)
}
