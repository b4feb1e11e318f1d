//! Time handling.
//!
//! The simulator keeps every event timestamp as integer milliseconds since
//! midnight so that event-log identities (arrival = departure + walk + wait +
//! in-vehicle) hold exactly, with no dependence on float summation order.
//! Seconds (`f64`) are used at API boundaries where costs are computed.

use crate::error::{Error, Result};

/// Milliseconds since midnight.
pub type TimeMs = i64;

pub const MS_PER_SEC: i64 = 1_000;

pub fn ms_to_s(t: TimeMs) -> f64 {
    t as f64 / 1_000.0
}

pub fn s_to_ms(s: f64) -> TimeMs {
    (s * 1_000.0).round() as TimeMs
}

/// Duration of a walk or drive leg in ms, rounded to the nearest millisecond.
pub fn travel_ms(length_m: f64, speed_mps: f64) -> TimeMs {
    (length_m / speed_mps * 1_000.0).round() as TimeMs
}

/// Parse a clock time of day (`HH:MM` or `HH:MM:SS`) into seconds since midnight.
pub fn parse_clock(text: &str, line: usize) -> Result<f64> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 2 && parts.len() != 3 {
        return Err(Error::scenario(line, format!("bad clock time '{text}'")));
    }
    let mut total = 0u32;
    for (i, part) in parts.iter().enumerate() {
        let v: u32 = part
            .parse()
            .map_err(|_| Error::scenario(line, format!("bad clock time '{text}'")))?;
        if i > 0 && v >= 60 {
            return Err(Error::scenario(line, format!("bad clock time '{text}'")));
        }
        total = total * 60 + v;
    }
    if parts.len() == 2 {
        total *= 60;
    }
    Ok(total as f64)
}

/// Format seconds since midnight as `HH:MM` (rounded down to the minute).
pub fn format_clock(seconds: f64) -> String {
    let s = seconds.max(0.0) as u64;
    format!("{:02}:{:02}", s / 3600, (s % 3600) / 60)
}

/// Departure-window structure: `windows` windows of `window_ms` each,
/// starting at `t0_ms`. `tmax_ms` is the hard simulation horizon guard.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Horizon {
    pub t0_ms: TimeMs,
    pub window_ms: TimeMs,
    pub windows: usize,
    pub tmax_ms: TimeMs,
}

impl Horizon {
    pub fn new(t0_s: f64, window_s: f64, windows: usize, tmax_hours: f64) -> Horizon {
        let t0_ms = s_to_ms(t0_s);
        Horizon {
            t0_ms,
            window_ms: s_to_ms(window_s),
            windows,
            tmax_ms: t0_ms + s_to_ms(tmax_hours * 3600.0),
        }
    }

    /// Start of window `h` in ms.
    pub fn window_start_ms(&self, h: usize) -> TimeMs {
        self.t0_ms + h as TimeMs * self.window_ms
    }

    /// Midpoint of window `h` in seconds.
    pub fn window_mid_s(&self, h: usize) -> f64 {
        ms_to_s(self.window_start_ms(h) + self.window_ms / 2)
    }

    /// End of the departure period (start of the window after the last).
    pub fn end_ms(&self) -> TimeMs {
        self.window_start_ms(self.windows)
    }

    /// Index of the window containing time `t`, clamped to valid range below,
    /// unbounded above (bins after the departure period keep counting).
    pub fn bin_of(&self, t: TimeMs) -> i64 {
        ((t - self.t0_ms).max(0)) / self.window_ms
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clock_roundtrip() {
        assert_eq!(parse_clock("07:00", 1).unwrap(), 25200.0);
        assert_eq!(parse_clock("09:00", 1).unwrap(), 32400.0);
        assert_eq!(parse_clock("00:05:30", 1).unwrap(), 330.0);
        assert_eq!(format_clock(25200.0), "07:00");
        assert!(parse_clock("9h00", 1).is_err());
        assert!(parse_clock("09:61", 1).is_err());
    }

    #[test]
    fn horizon_windows() {
        let h = Horizon::new(25200.0, 300.0, 24, 12.0);
        assert_eq!(h.window_start_ms(0), 25_200_000);
        assert_eq!(h.window_start_ms(1), 25_500_000);
        assert_eq!(h.end_ms(), 25_200_000 + 24 * 300_000);
        assert_eq!(h.window_mid_s(0), 25350.0);
        assert_eq!(h.bin_of(25_200_000), 0);
        assert_eq!(h.bin_of(25_499_999), 0);
        assert_eq!(h.bin_of(25_500_000), 1);
        // bins keep counting past the departure period
        assert_eq!(h.bin_of(h.end_ms() + 1), 24);
    }
}
