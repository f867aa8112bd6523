use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

/// Clock rings in increasing time order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EventLog {
    events: Vec<(f64, usize)>,
}

impl EventLog {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a ring; times must be strictly increasing.
    pub fn push(&mut self, time: f64, vertex: usize) {
        if let Some(&(last, _)) = self.events.last() {
            assert!(time > last, "event times must increase: {time} after {last}");
        }
        self.events.push((time, vertex));
    }

    pub fn events(&self) -> &[(f64, usize)] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Rings with time in `(a, b]`.
    pub fn window(&self, a: f64, b: f64) -> &[(f64, usize)] {
        let lo = self.events.partition_point(|&(t, _)| t <= a);
        let hi = self.events.partition_point(|&(t, _)| t <= b);
        &self.events[lo..hi]
    }

    /// One `t v` line per ring. Times use the shortest round-trip decimal
    /// form, so a parsed log replays bit-identically.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (t, v) in &self.events {
            let _ = writeln!(out, "{t} {v}");
        }
        out
    }

    pub fn from_text(text: &str, n: usize) -> Result<Self> {
        let mut log = Self::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| Error::Parse { line: i + 1, message };
            let mut parts = line.split_whitespace();
            let (Some(t), Some(v), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(err("expected `time vertex`".into()));
            };
            let t: f64 = t.parse().map_err(|_| err(format!("bad time `{t}`")))?;
            let v: usize = v.parse().map_err(|_| err(format!("bad vertex `{v}`")))?;
            if v >= n {
                return Err(err(format!("vertex {v} out of range for n = {n}")));
            }
            if !(t >= 0.0) || log.events.last().is_some_and(|&(last, _)| t <= last) {
                return Err(err(format!("time {t} does not increase")));
            }
            log.events.push((t, v));
        }
        Ok(log)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: &Path, n: usize) -> Result<Self> {
        Self::from_text(&std::fs::read_to_string(path)?, n)
    }
}

impl FromIterator<(f64, usize)> for EventLog {
    fn from_iter<I: IntoIterator<Item = (f64, usize)>>(iter: I) -> Self {
        let mut log = Self::new();
        for (t, v) in iter {
            log.push(t, v);
        }
        log
    }
}
