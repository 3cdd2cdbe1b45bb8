//! Battery dynamics: linear harvesting, a fixed cost per emission, and the
//! resting guard that pauses transmissions after a queue drains.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::NodeState;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyConfig {
    /// pJ/s.
    pub harvest_rate: f64,
    /// pJ per packet emission.
    pub drain_per_tx: f64,
    /// pJ.
    pub capacity: f64,
    /// s.
    pub rest_duration: f64,
    /// pJ.
    pub initial_battery: f64,
}

impl Default for EnergyConfig {
    fn default() -> Self {
        Self {
            harvest_rate: 10.0,
            drain_per_tx: 10.0,
            capacity: 1000.0,
            rest_duration: 1.0,
            initial_battery: 1000.0,
        }
    }
}

impl EnergyConfig {
    pub fn violations(&self) -> Vec<alloc::string::String> {
        let mut v = Vec::new();
        for (name, value) in [
            ("energy.harvest_rate", self.harvest_rate),
            ("energy.drain_per_tx", self.drain_per_tx),
            ("energy.capacity", self.capacity),
            ("energy.rest_duration", self.rest_duration),
            ("energy.initial_battery", self.initial_battery),
        ] {
            if !(value > 0.0 && value.is_finite()) {
                v.push(alloc::format!("{name} must be positive and finite, got {value}"));
            }
        }
        if self.initial_battery > self.capacity {
            v.push(alloc::format!(
                "energy.initial_battery ({}) exceeds energy.capacity ({})",
                self.initial_battery,
                self.capacity
            ));
        }
        v
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(v))
        }
    }

    /// Long-run emission rate a node can sustain, packets/s.
    pub fn sustainable_tx_rate(&self) -> f64 {
        self.harvest_rate / self.drain_per_tx
    }
}

/// Battery after harvesting for `dt` seconds, clamped at capacity.
pub fn harvest(battery: f64, dt: f64, cfg: &EnergyConfig) -> f64 {
    debug_assert!(dt >= 0.0);
    let charged = battery + cfg.harvest_rate * dt;
    if charged > cfg.capacity {
        cfg.capacity
    } else {
        charged
    }
}

/// Charges up to `n_packets` emissions. Returns the remaining battery and
/// how many emissions it could pay for.
pub fn drain_tx(battery: f64, n_packets: usize, cfg: &EnergyConfig) -> (f64, usize) {
    let affordable = libm::floor(battery / cfg.drain_per_tx);
    let n = if affordable <= 0.0 {
        0
    } else {
        n_packets.min(affordable as usize)
    };
    let rest = battery - n as f64 * cfg.drain_per_tx;
    (if rest < 0.0 { 0.0 } else { rest }, n)
}

impl NodeState {
    /// Battery at `now` without mutating the node.
    pub fn battery_at(&self, now: f64, cfg: &EnergyConfig) -> f64 {
        if now > self.energy_clock {
            harvest(self.battery, now - self.energy_clock, cfg)
        } else {
            self.battery
        }
    }

    /// Applies harvesting up to `now`.
    pub fn bring_up_to_date(&mut self, now: f64, cfg: &EnergyConfig) {
        if now > self.energy_clock {
            let updated = harvest(self.battery, now - self.energy_clock, cfg);
            self.harvested_total += updated - self.battery;
            self.battery = updated;
            self.energy_clock = now;
        }
    }

    /// Pays for up to `n` emissions from the (already up to date) battery.
    pub fn charge_emissions(&mut self, n: usize, cfg: &EnergyConfig) -> usize {
        let before = self.battery;
        let (after, paid) = drain_tx(before, n, cfg);
        self.drained_total += before - after;
        self.battery = after;
        self.tx_count += paid as u64;
        paid
    }

    pub fn can_transmit(&self, cfg: &EnergyConfig) -> bool {
        self.battery >= cfg.drain_per_tx
    }

    pub fn is_resting(&self, now: f64) -> bool {
        matches!(self.resting_until, Some(t) if now < t)
    }

    /// Starts a rest period. Only the transition into an empty queue rests
    /// the node; calling this again before new traffic arrives is a no-op.
    /// Returns whether a rest was started.
    pub fn enter_rest(&mut self, now: f64, cfg: &EnergyConfig) -> bool {
        if self.idle {
            return false;
        }
        self.resting_until = Some(now + cfg.rest_duration);
        self.idle = true;
        true
    }

    /// Time at which the battery will afford one emission, assuming no
    /// further drain.
    pub fn energy_ready_at(&self, now: f64, cfg: &EnergyConfig) -> f64 {
        let b = self.battery_at(now, cfg);
        if b >= cfg.drain_per_tx {
            now
        } else {
            // 1 ns margin so the lazily harvested value clears the threshold
            // despite rounding.
            now + (cfg.drain_per_tx - b) / cfg.harvest_rate + 1e-9
        }
    }

    /// `initial + harvested - drained - final`, relative to the larger side.
    pub fn energy_residual(&self) -> f64 {
        let lhs = self.initial_battery + self.harvested_total - self.drained_total;
        let scale = lhs.abs().max(self.battery.abs()).max(1.0);
        (lhs - self.battery).abs() / scale
    }
}
