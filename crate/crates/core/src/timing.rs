//! Spacetime scheduling for the loophole-free Bell test: lightcone checks on
//! a 1-D lab-frame geometry and feasibility margins.
//!
//! Three exclusion constraints must hold:
//!
//! 1. the basis choice C_B lies outside the backward lightcone of the
//!    completed detection D_A;
//! 2. symmetrically, C_A outside the backward lightcone of D_B;
//! 3. both choices lie outside the backward lightcone of the herald
//!    detection D_I, so the heralding cannot depend on the settings.
//!
//! Events exactly on a lightcone count as outside: the constraints exclude
//! strictly causal influence and the boundary is measure zero.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::constants::SPEED_OF_LIGHT;
use crate::error::{Error, Result};

/// Spatial slack absorbing floating-point rounding in boundary cases; one
/// nanometer against kilometer-scale geometries.
const BOUNDARY_SLACK_M: f64 = 1e-9;

/// The labeled events of one experimental run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventLabel {
    /// Excitation (and prompt emission) at ion A / B.
    ExcitationA,
    ExcitationB,
    /// Random basis choice on each side.
    ChoiceA,
    ChoiceB,
    /// Measurement result established on each side.
    DetectionA,
    DetectionB,
    /// Coincidence detection at the intermediate analyzer station.
    HeraldDetection,
}

impl EventLabel {
    pub const ALL: [EventLabel; 7] = [
        EventLabel::ExcitationA,
        EventLabel::ExcitationB,
        EventLabel::ChoiceA,
        EventLabel::ChoiceB,
        EventLabel::DetectionA,
        EventLabel::DetectionB,
        EventLabel::HeraldDetection,
    ];
}

/// A labeled event on the 1-D line, position in meters, time in seconds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpacetimeEvent {
    pub label: EventLabel,
    pub x: f64,
    pub t: f64,
}

/// Experiment geometry and delays.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Scenario {
    /// Positions of the two ions and the analyzer station, meters.
    pub x_a: f64,
    pub x_b: f64,
    pub x_i: f64,
    /// Photon group velocity in the fibers, m/s; must be below c.
    pub fiber_speed: f64,
    /// Delay from excitation to the random basis choice, seconds.
    pub excitation_to_choice: f64,
    /// Duration of the basis rotation pulses after the choice, seconds.
    pub choice_to_rotation: f64,
    /// Fluorescence readout duration, seconds.
    pub readout_duration: f64,
    /// Delay from excitation to photon emission; negligible for the ions
    /// considered, so it defaults to zero.
    pub excitation_to_emission: f64,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            x_a: 0.0,
            x_b: 10_000.0,
            x_i: 5_000.0,
            fiber_speed: SPEED_OF_LIGHT / 1.5,
            excitation_to_choice: 10e-6,
            choice_to_rotation: 3e-6,
            readout_duration: 23e-6,
            excitation_to_emission: 0.0,
        }
    }
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        if !(self.fiber_speed > 0.0 && self.fiber_speed < SPEED_OF_LIGHT) {
            return Err(Error::InvalidParameter(format!(
                "fiber speed {} must lie in (0, c)",
                self.fiber_speed
            )));
        }
        if !(self.x_a < self.x_i && self.x_i < self.x_b) {
            return Err(Error::InvalidParameter(
                "positions must be ordered x_a < x_i < x_b".into(),
            ));
        }
        for (name, v) in [
            ("excitation_to_choice", self.excitation_to_choice),
            ("choice_to_rotation", self.choice_to_rotation),
            ("readout_duration", self.readout_duration),
            ("excitation_to_emission", self.excitation_to_emission),
        ] {
            if v < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be non-negative"
                )));
            }
        }
        Ok(())
    }

    /// Ion separation |x_b − x_a|, meters.
    pub fn distance(&self) -> f64 {
        (self.x_b - self.x_a).abs()
    }

    /// Interval from the basis choice to the completed detection.
    pub fn choice_to_detection(&self) -> f64 {
        self.choice_to_rotation + self.readout_duration
    }

    /// The largest choice-to-detection window compatible with constraints
    /// (1) and (2): L/c.
    pub fn max_choice_to_detection_window(&self) -> f64 {
        self.distance() / SPEED_OF_LIGHT
    }
}

/// The scheduled events of one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub events: BTreeMap<EventLabel, SpacetimeEvent>,
}

impl Schedule {
    pub fn get(&self, label: EventLabel) -> Result<&SpacetimeEvent> {
        self.events
            .get(&label)
            .ok_or_else(|| Error::MissingEvent(format!("{label:?}")))
    }
}

/// Places all seven events: excitations at t = 0, the herald at the later
/// photon arrival, choices after the configured delay, detections after
/// rotation plus readout.
pub fn build_schedule(scenario: &Scenario) -> Result<Schedule> {
    scenario.validate()?;
    let mut events = BTreeMap::new();
    let mut put = |label, x, t| {
        events.insert(label, SpacetimeEvent { label, x, t });
    };
    put(EventLabel::ExcitationA, scenario.x_a, 0.0);
    put(EventLabel::ExcitationB, scenario.x_b, 0.0);
    let arrival_a = (scenario.x_i - scenario.x_a).abs() / scenario.fiber_speed;
    let arrival_b = (scenario.x_b - scenario.x_i).abs() / scenario.fiber_speed;
    put(
        EventLabel::HeraldDetection,
        scenario.x_i,
        scenario.excitation_to_emission + arrival_a.max(arrival_b),
    );
    let t_choice = scenario.excitation_to_choice;
    put(EventLabel::ChoiceA, scenario.x_a, t_choice);
    put(EventLabel::ChoiceB, scenario.x_b, t_choice);
    let t_detect = t_choice + scenario.choice_to_detection();
    put(EventLabel::DetectionA, scenario.x_a, t_detect);
    put(EventLabel::DetectionB, scenario.x_b, t_detect);
    Ok(Schedule { events })
}

/// True when `event` lies outside the backward lightcone of `apex`: either
/// not earlier than the apex, or spacelike separated from it. Boundary
/// events exactly on the cone count as outside.
pub fn outside_backward_lightcone(event: &SpacetimeEvent, apex: &SpacetimeEvent) -> bool {
    event.t >= apex.t
        || (event.x - apex.x).abs() + BOUNDARY_SLACK_M >= SPEED_OF_LIGHT * (apex.t - event.t)
}

/// Seconds of slack before `event` would enter the backward lightcone of
/// `apex` (negative when the constraint is violated).
pub fn lightcone_margin(event: &SpacetimeEvent, apex: &SpacetimeEvent) -> f64 {
    (event.x - apex.x).abs() / SPEED_OF_LIGHT - (apex.t - event.t)
}

/// Result of one constraint check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstraintCheck {
    pub name: String,
    pub passed: bool,
    pub margin_s: f64,
}

/// The three checks and their margins.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimingReport {
    pub checks: Vec<ConstraintCheck>,
    pub all_passed: bool,
}

/// Validates the three locality constraints on a complete schedule.
pub fn validate(schedule: &Schedule) -> Result<TimingReport> {
    let choice_a = schedule.get(EventLabel::ChoiceA)?;
    let choice_b = schedule.get(EventLabel::ChoiceB)?;
    let det_a = schedule.get(EventLabel::DetectionA)?;
    let det_b = schedule.get(EventLabel::DetectionB)?;
    let herald = schedule.get(EventLabel::HeraldDetection)?;

    let single = |name: &str, event: &SpacetimeEvent, apex: &SpacetimeEvent| ConstraintCheck {
        name: name.to_string(),
        passed: outside_backward_lightcone(event, apex),
        margin_s: lightcone_margin(event, apex),
    };
    let choice_b_vs_det_a = single("choice_b_outside_detection_a_cone", choice_b, det_a);
    let choice_a_vs_det_b = single("choice_a_outside_detection_b_cone", choice_a, det_b);
    let herald_a = single("", choice_a, herald);
    let herald_b = single("", choice_b, herald);
    let herald_check = ConstraintCheck {
        name: "choices_outside_herald_cone".to_string(),
        passed: herald_a.passed && herald_b.passed,
        margin_s: herald_a.margin_s.min(herald_b.margin_s),
    };

    let checks = vec![choice_b_vs_det_a, choice_a_vs_det_b, herald_check];
    let all_passed = checks.iter().all(|c| c.passed);
    Ok(TimingReport { checks, all_passed })
}

/// Smallest excitation-to-choice delay for which the herald-cone constraint
/// holds, in closed form: the choice must satisfy
/// t_choice ≥ t_herald − |x_ion − x_i|/c on both sides.
pub fn min_choice_delay(scenario: &Scenario) -> Result<f64> {
    scenario.validate()?;
    let schedule = build_schedule(scenario)?;
    let herald = schedule.get(EventLabel::HeraldDetection)?;
    let needed_a = herald.t - (scenario.x_a - scenario.x_i).abs() / SPEED_OF_LIGHT;
    let needed_b = herald.t - (scenario.x_b - scenario.x_i).abs() / SPEED_OF_LIGHT;
    Ok(needed_a.max(needed_b).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn symmetric_10km(fiber_speed: f64) -> Scenario {
        Scenario {
            x_a: 0.0,
            x_b: 10_000.0,
            x_i: 5_000.0,
            fiber_speed,
            ..Scenario::default()
        }
    }

    #[test]
    fn herald_arrival_time() {
        let schedule = build_schedule(&symmetric_10km(2e8)).unwrap();
        let herald = schedule.get(EventLabel::HeraldDetection).unwrap();
        assert_abs_diff_eq!(herald.t, 25e-6, epsilon = 1e-18);
        assert_abs_diff_eq!(herald.x, 5_000.0, epsilon = 1e-12);
    }

    #[test]
    fn degenerate_distances() {
        let scenario = Scenario {
            x_a: 0.0,
            x_i: 1e-12,
            x_b: 2e-12,
            ..Scenario::default()
        };
        let schedule = build_schedule(&scenario).unwrap();
        let herald = schedule.get(EventLabel::HeraldDetection).unwrap();
        assert!(herald.t < 1e-15);
    }

    #[test]
    fn asymmetric_arms_use_later_arrival() {
        let scenario = Scenario {
            x_a: 0.0,
            x_i: 2_000.0,
            x_b: 10_000.0,
            fiber_speed: 2e8,
            ..Scenario::default()
        };
        let schedule = build_schedule(&scenario).unwrap();
        let herald = schedule.get(EventLabel::HeraldDetection).unwrap();
        assert_abs_diff_eq!(herald.t, 8_000.0 / 2e8, epsilon = 1e-18);
    }

    #[test]
    fn lightcone_examples() {
        let at = |x: f64, t: f64| SpacetimeEvent {
            label: EventLabel::ChoiceA,
            x,
            t,
        };
        // Timelike: same position, strictly earlier.
        assert!(!outside_backward_lightcone(&at(0.0, 0.0), &at(0.0, 1e-6)));
        // 10 km apart, 33.0 µs: spacelike (10000 m > c·33.0µs ≈ 9893 m).
        assert!(outside_backward_lightcone(
            &at(0.0, 0.0),
            &at(10_000.0, 33.0e-6)
        ));
        // 34 µs: inside (c·34µs ≈ 10193 m > 10000 m).
        assert!(!outside_backward_lightcone(
            &at(0.0, 0.0),
            &at(10_000.0, 34.0e-6)
        ));
        // Later events are trivially outside.
        assert!(outside_backward_lightcone(&at(0.0, 2.0), &at(0.0, 1.0)));
    }

    #[test]
    fn translation_invariance() {
        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..200 {
            let e1 = SpacetimeEvent {
                label: EventLabel::ChoiceA,
                x: rng.gen_range(-1e5..1e5),
                t: rng.gen_range(-1e-3..1e-3),
            };
            let e2 = SpacetimeEvent {
                label: EventLabel::DetectionB,
                x: rng.gen_range(-1e5..1e5),
                t: rng.gen_range(-1e-3..1e-3),
            };
            let (dx, dt) = (rng.gen_range(-1e5..1e5), rng.gen_range(-1e-3..1e-3));
            let shift = |e: &SpacetimeEvent| SpacetimeEvent {
                label: e.label,
                x: e.x + dx,
                t: e.t + dt,
            };
            assert_eq!(
                outside_backward_lightcone(&e1, &e2),
                outside_backward_lightcone(&shift(&e1), &shift(&e2))
            );
        }
    }

    #[test]
    fn paper_scenario_passes_all_constraints() {
        let scenario = symmetric_10km(2e8);
        let report = validate(&build_schedule(&scenario).unwrap()).unwrap();
        assert!(report.all_passed, "report: {report:?}");
        assert_eq!(report.checks.len(), 3);
        for check in &report.checks {
            assert!(check.margin_s >= 0.0);
        }
        // Maximum window: 10 km / c = 33.36 µs.
        assert_abs_diff_eq!(
            scenario.max_choice_to_detection_window(),
            33.356e-6,
            epsilon = 0.01e-6
        );
    }

    #[test]
    fn forty_microsecond_window_fails_locality() {
        let scenario = Scenario {
            choice_to_rotation: 5e-6,
            readout_duration: 35e-6,
            ..symmetric_10km(2e8)
        };
        assert_abs_diff_eq!(scenario.choice_to_detection(), 40e-6, epsilon = 1e-12);
        let report = validate(&build_schedule(&scenario).unwrap()).unwrap();
        assert!(!report.checks[0].passed);
        assert!(!report.checks[1].passed);
        assert!(report.checks[0].margin_s < 0.0);
    }

    #[test]
    fn herald_constraint_binds_first_with_slow_fiber() {
        // Zero excitation-to-choice delay, v = 2c/3: the herald-cone check
        // fails while the two locality checks still pass.
        let scenario = Scenario {
            excitation_to_choice: 0.0,
            fiber_speed: 2.0 * SPEED_OF_LIGHT / 3.0,
            ..symmetric_10km(2e8)
        };
        let report = validate(&build_schedule(&scenario).unwrap()).unwrap();
        assert!(report.checks[0].passed);
        assert!(report.checks[1].passed);
        assert!(!report.checks[2].passed);
    }

    #[test]
    fn min_delay_closed_form_and_boundary() {
        let scenario = Scenario {
            excitation_to_choice: 0.0,
            ..symmetric_10km(2e8)
        };
        let delay = min_choice_delay(&scenario).unwrap();
        // (L/2)(1/v − 1/c) for the symmetric case.
        let expected = 5_000.0 * (1.0 / 2e8 - 1.0 / SPEED_OF_LIGHT);
        assert_relative_eq!(delay, expected, max_relative = 1e-12);

        // At the returned delay the margin is zero and validation passes.
        let tuned = Scenario {
            excitation_to_choice: delay,
            ..scenario
        };
        let report = validate(&build_schedule(&tuned).unwrap()).unwrap();
        assert!(report.checks[2].passed);
        assert!(report.checks[2].margin_s.abs() < 1e-12);

        // Verified by scan: any smaller delay fails, any larger passes.
        for frac in [0.5, 0.9, 0.99] {
            let early = Scenario {
                excitation_to_choice: delay * frac,
                ..scenario
            };
            assert!(!validate(&build_schedule(&early).unwrap()).unwrap().checks[2].passed);
        }
        for frac in [1.01, 1.5, 3.0] {
            let late = Scenario {
                excitation_to_choice: delay * frac,
                ..scenario
            };
            assert!(validate(&build_schedule(&late).unwrap()).unwrap().checks[2].passed);
        }
    }

    #[test]
    fn min_delay_vanishes_at_lightspeed_fiber() {
        let scenario = Scenario {
            fiber_speed: SPEED_OF_LIGHT * (1.0 - 1e-12),
            ..symmetric_10km(2e8)
        };
        let delay = min_choice_delay(&scenario).unwrap();
        assert!(delay < 1e-12, "delay {delay}");
    }

    #[test]
    fn increasing_delay_never_breaks_herald_constraint() {
        let base = Scenario {
            excitation_to_choice: 0.0,
            fiber_speed: 1.9e8,
            ..symmetric_10km(1.9e8)
        };
        let mut passed_before = false;
        for k in 0..60 {
            let scenario = Scenario {
                excitation_to_choice: k as f64 * 1e-6,
                ..base
            };
            let report = validate(&build_schedule(&scenario).unwrap()).unwrap();
            let passes = report.checks[2].passed;
            assert!(!passed_before || passes, "monotonicity broken at k = {k}");
            passed_before = passes;
        }
    }

    #[test]
    fn window_bound_matches_locality_checks_randomized() {
        // window ≤ L/c is necessary and sufficient for checks (1) and (2)
        // in the symmetric configuration.
        let mut rng = StdRng::seed_from_u64(5);
        for _ in 0..10_000 {
            let half = rng.gen_range(100.0..50_000.0);
            let scenario = Scenario {
                x_a: -half,
                x_b: half,
                x_i: 0.0,
                fiber_speed: rng.gen_range(1e8..2.9e8),
                excitation_to_choice: rng.gen_range(0.0..1e-4),
                choice_to_rotation: rng.gen_range(0.0..1e-4),
                readout_duration: rng.gen_range(0.0..1e-4),
                excitation_to_emission: 0.0,
            };
            let report = validate(&build_schedule(&scenario).unwrap()).unwrap();
            let within =
                scenario.choice_to_detection() <= scenario.max_choice_to_detection_window() + 1e-15;
            assert_eq!(
                report.checks[0].passed && report.checks[1].passed,
                within,
                "window {} vs bound {}",
                scenario.choice_to_detection(),
                scenario.max_choice_to_detection_window()
            );
        }
    }

    #[test]
    fn invalid_scenarios_rejected() {
        let bad_speed = Scenario {
            fiber_speed: SPEED_OF_LIGHT * 1.1,
            ..Scenario::default()
        };
        assert!(build_schedule(&bad_speed).is_err());
        let bad_order = Scenario {
            x_i: -1.0,
            ..Scenario::default()
        };
        assert!(bad_order.validate().is_err());
    }
}
