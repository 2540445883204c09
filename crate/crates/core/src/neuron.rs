//! Simplified leaky integrate-and-fire membrane dynamics.
//!
//! The membrane potential integrates the weighted input spikes of each Time
//! Unit in a single fused update: the fixed leak is subtracted only while the
//! potential sits above rest, crossing the threshold fires the neuron and
//! parks it at the refractory potential, and falling to the floor snaps the
//! potential back to rest.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::TimeUnit;

/// Constants of the membrane update rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NeuronParams {
    /// Potential leaked per Time Unit while above rest.
    pub decay: f64,
    /// Lower clamp; reaching it resets the potential to rest.
    pub p_min: f64,
    /// Resting potential.
    pub p_rest: f64,
    /// Potential assigned on firing, held through the refractory phase.
    pub p_refract: f64,
    /// Refractory duration in Time Units; all input is ignored while it runs.
    pub t_refract: u32,
}

impl Default for NeuronParams {
    fn default() -> Self {
        NeuronParams {
            decay: 0.25,
            p_min: -1.0,
            p_rest: 0.0,
            p_refract: 0.0,
            t_refract: 5,
        }
    }
}

impl NeuronParams {
    /// Check the documented invariants, reporting violations against the
    /// dotted config prefix (e.g. `neuron.p_min`).
    pub fn validate(&self, prefix: &str) -> Result<()> {
        let field = |name: &str| format!("{prefix}.{name}");
        if !self.decay.is_finite() || self.decay < 0.0 {
            return Err(Error::config(&field("decay"), "must be finite and >= 0"));
        }
        if !self.p_min.is_finite() || !self.p_rest.is_finite() || !self.p_refract.is_finite() {
            return Err(Error::config(prefix, "potentials must be finite"));
        }
        if self.p_min > self.p_rest {
            return Err(Error::config(&field("p_min"), "must be <= neuron.p_rest"));
        }
        if self.p_refract > self.p_rest {
            return Err(Error::config(
                &field("p_refract"),
                "must be <= neuron.p_rest",
            ));
        }
        Ok(())
    }
}

/// Dynamic state of one neuron.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NeuronState {
    /// Current membrane potential.
    pub potential: f64,
    /// Time Units left in the refractory phase; 0 means active.
    pub refract_remaining: u32,
    /// Time Unit of the most recent output spike, if any.
    pub last_spike_time: Option<TimeUnit>,
}

impl NeuronState {
    /// A fresh neuron resting at `p_rest`.
    pub fn at_rest(params: &NeuronParams) -> Self {
        NeuronState {
            potential: params.p_rest,
            refract_remaining: 0,
            last_spike_time: None,
        }
    }

    /// Advance one Time Unit with the summed weighted input of that unit.
    ///
    /// Returns whether the neuron fired. While refractory the potential is
    /// frozen and input is discarded. Otherwise the potential is updated in
    /// one fused step (leak applies only from above rest), then checked
    /// against the threshold and the floor. The threshold comparison is `>=`
    /// so a potential landing exactly on the threshold fires.
    pub fn step(
        &mut self,
        weighted_input: f64,
        threshold: f64,
        params: &NeuronParams,
        now: TimeUnit,
    ) -> bool {
        assert!(
            weighted_input.is_finite(),
            "non-finite weighted input ({weighted_input}) passed to NeuronState::step"
        );

        if self.refract_remaining > 0 {
            self.refract_remaining -= 1;
            return false;
        }

        let leak = if self.potential > params.p_rest {
            params.decay
        } else {
            0.0
        };
        let updated = self.potential + weighted_input - leak;

        if updated >= threshold {
            self.potential = params.p_refract;
            self.refract_remaining = params.t_refract;
            self.last_spike_time = Some(now);
            true
        } else if updated <= params.p_min {
            self.potential = params.p_rest;
            false
        } else {
            self.potential = updated;
            false
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn params() -> NeuronParams {
        NeuronParams::default()
    }

    #[test]
    fn resting_neuron_with_no_input_stays_at_rest() {
        // Leak is gated off at and below rest, so an idle neuron must not
        // drift downwards.
        let p = params();
        let mut state = NeuronState::at_rest(&p);
        for t in 1..100 {
            let fired = state.step(0.0, 10.0, &p, t);
            assert!(!fired);
            assert_eq!(state.potential, p.p_rest);
        }
    }

    #[test]
    fn fused_update_adds_input_and_subtracts_decay() {
        let p = NeuronParams {
            decay: 0.1,
            p_min: -100.0,
            p_rest: 0.0,
            p_refract: 0.0,
            t_refract: 5,
        };
        let mut state = NeuronState {
            potential: 1.0,
            refract_remaining: 0,
            last_spike_time: None,
        };
        let fired = state.step(0.5, 100.0, &p, 1);
        assert!(!fired);
        assert!((state.potential - 1.4).abs() < 1e-12);
    }

    #[test]
    fn crossing_threshold_fires_and_enters_refractory() {
        let p = params();
        let mut state = NeuronState {
            potential: 1.9,
            refract_remaining: 0,
            last_spike_time: None,
        };
        let fired = state.step(1.0, 2.0, &p, 7);
        assert!(fired);
        assert_eq!(state.potential, p.p_refract);
        assert_eq!(state.refract_remaining, p.t_refract);
        assert_eq!(state.last_spike_time, Some(7));
    }

    #[test]
    fn exactly_at_threshold_fires() {
        let p = NeuronParams {
            decay: 0.0,
            ..params()
        };
        let mut state = NeuronState::at_rest(&p);
        assert!(state.step(2.0, 2.0, &p, 1));
    }

    #[test]
    fn falling_to_floor_resets_to_rest() {
        let p = params();
        let mut state = NeuronState {
            potential: -0.9,
            refract_remaining: 0,
            last_spike_time: None,
        };
        let fired = state.step(-5.0, 10.0, &p, 1);
        assert!(!fired);
        assert_eq!(state.potential, p.p_rest);
    }

    #[test]
    fn refractory_blocks_input_for_exact_duration() {
        let p = params();
        let mut state = NeuronState::at_rest(&p);
        assert!(state.step(10.0, 2.0, &p, 1));

        // t_refract steps of huge input must neither fire nor move the
        // potential.
        for t in 2..2 + p.t_refract {
            let fired = state.step(1e6, 2.0, &p, t);
            assert!(!fired, "fired during refractory at t={t}");
            assert_eq!(state.potential, p.p_refract);
        }
        // First step after the refractory phase integrates again.
        assert!(state.step(10.0, 2.0, &p, 2 + p.t_refract));
    }

    #[test]
    fn pure_decay_descends_monotonically_then_settles() {
        let p = params();
        let mut state = NeuronState {
            potential: 1.4,
            refract_remaining: 0,
            last_spike_time: None,
        };
        let mut previous = state.potential;
        for t in 1..100 {
            state.step(0.0, 10.0, &p, t);
            if previous > p.p_rest {
                assert!(
                    (previous - state.potential - p.decay).abs() < 1e-12
                        || state.potential == p.p_rest,
                    "expected exact decay step at t={t}"
                );
            } else {
                // Settled at or below rest: no further movement.
                assert_eq!(state.potential, previous);
            }
            assert!(state.potential <= previous, "potential oscillated");
            previous = state.potential;
        }
    }

    #[test]
    #[should_panic(expected = "non-finite")]
    fn non_finite_input_is_rejected() {
        let p = params();
        let mut state = NeuronState::at_rest(&p);
        state.step(f64::NAN, 2.0, &p, 1);
    }

    #[test]
    fn validate_rejects_floor_above_rest() {
        let p = NeuronParams {
            p_min: 0.5,
            ..params()
        };
        let err = p.validate("neuron").unwrap_err();
        assert!(err.to_string().contains("neuron.p_min"));
    }

    proptest! {
        /// After any step the potential is either the refractory value, the
        /// resting value, or strictly inside (p_min, threshold).
        #[test]
        fn potential_stays_in_admissible_region(
            start in -0.99f64..5.0,
            input in -10.0f64..10.0,
            threshold in 0.5f64..5.0,
        ) {
            let p = params();
            let mut state = NeuronState {
                potential: start.min(threshold - 1e-9),
                refract_remaining: 0,
                last_spike_time: None,
            };
            let fired = state.step(input, threshold, &p, 1);
            let v = state.potential;
            let admissible = v == p.p_refract
                || v == p.p_rest
                || (v > p.p_min && v < threshold);
            prop_assert!(admissible, "potential {v} escaped after fired={fired}");
        }

        /// Same state, same input, same outcome.
        #[test]
        fn step_is_deterministic(
            start in -0.99f64..1.99,
            input in -5.0f64..5.0,
            refract in 0u32..3,
        ) {
            let p = params();
            let make = || NeuronState {
                potential: start,
                refract_remaining: refract,
                last_spike_time: None,
            };
            let (mut a, mut b) = (make(), make());
            let fired_a = a.step(input, 2.0, &p, 3);
            let fired_b = b.step(input, 2.0, &p, 3);
            prop_assert_eq!(fired_a, fired_b);
            prop_assert_eq!(a, b);
        }
    }
}
