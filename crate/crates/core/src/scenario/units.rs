//! Canonical units: bits, bits/second, Hz, cycles/second.

/// One megabit, in bits.
pub const MB: f64 = 1e6;
/// One megabit per second, in bits/second.
pub const MBPS: f64 = 1e6;
/// One gigabyte, in bits.
pub const GB: f64 = 8e9;
/// One gigahertz, in cycles/second.
pub const GHZ: f64 = 1e9;
