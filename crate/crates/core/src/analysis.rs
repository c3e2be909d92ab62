//! Invisibility condition for object 2, parameter sweeps and the scans that
//! confirm which rates do or do not depend on object 2.
//!
//! Object 2 drops out of every signal-side rate at `B` and `C` when the two
//! crystal-1 and crystal-2 amplitudes heading to beam splitter b cancel:
//!
//! ```text
//! γ₁ T_a T₁ e^{i(φ₁+ϕ₁)} + γ₂ R_a e^{iφ₃} = 0
//! ```
//!
//! `φ₁`, `φ₃` are path delays and `ϕ₁` is the object-1 phase. Only the
//! difference `φ₁ − φ₃` enters, and `φ₂` never does.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::Amplitude;
use crate::detection::{full_report, ProbabilityReport};
use crate::elements::{reduce_angle, BeamSplitterSpec, ObjectSpec};
use crate::network::{build_network, NetworkConfig};
use crate::tolerance::CHECK;
use crate::{Error, Result};

/// Object-1 settings that hide object 2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InvisibilitySolution {
    pub t1: f64,
    /// Object-1 phase in `[0, 2π)`, with the path delays folded in.
    pub phi1: f64,
    pub residual: f64,
}

impl InvisibilitySolution {
    /// `template` with object 1 replaced by the solved object.
    pub fn apply(&self, template: &NetworkConfig) -> Result<NetworkConfig> {
        Ok(NetworkConfig {
            object1: ObjectSpec::new(self.t1, self.phi1)?,
            ..template.clone()
        })
    }
}

fn check_inputs(gamma1: f64, gamma2: f64, bs_a: &BeamSplitterSpec) -> Result<()> {
    if !(gamma1.is_finite() && gamma1 > 0.0) {
        return Err(Error::InvalidAmplitude(format!(
            "gamma1 = {gamma1} must be positive"
        )));
    }
    if !(gamma2.is_finite() && gamma2 >= 0.0) {
        return Err(Error::InvalidAmplitude(format!(
            "gamma2 = {gamma2} must be non-negative"
        )));
    }
    let (t, r) = (bs_a.t.norm(), bs_a.r.norm());
    if t < CHECK || r < CHECK {
        return Err(Error::DegenerateSplitter { t, r });
    }
    Ok(())
}

/// Magnitude of `γ₁ T_a T₁ e^{i(φ₁+ϕ₁)} + γ₂ R_a e^{iφ₃}`.
pub fn condition_residual(
    gamma1: f64,
    gamma2: f64,
    bs_a: &BeamSplitterSpec,
    (delay1, delay3): (f64, f64),
    t1: f64,
    phi1: f64,
) -> f64 {
    (gamma1 * bs_a.t * Amplitude::from_polar(t1, delay1 + phi1)
        + gamma2 * bs_a.r * Amplitude::from_polar(1.0, delay3))
    .norm()
}

/// Closed-form solution: `T₁ = γ₂|R_a| / (γ₁|T_a|)` and
/// `ϕ₁ = arg(−γ₂ R_a e^{iφ₃} / (γ₁ T_a e^{iφ₁}))`.
pub fn solve_invisibility(
    gamma1: f64,
    gamma2: f64,
    bs_a: &BeamSplitterSpec,
    delays: (f64, f64),
) -> Result<InvisibilitySolution> {
    check_inputs(gamma1, gamma2, bs_a)?;
    let required = gamma2 * bs_a.r.norm() / (gamma1 * bs_a.t.norm());
    if required > 1.0 + CHECK {
        return Err(Error::Infeasible {
            required_t1: required,
        });
    }
    let t1 = required.min(1.0);
    let phi1 = if gamma2 == 0.0 {
        0.0
    } else {
        let target =
            -gamma2 * bs_a.r * Amplitude::from_polar(1.0, delays.1 - delays.0) / (gamma1 * bs_a.t);
        reduce_angle(target.arg())
    };
    Ok(InvisibilitySolution {
        t1,
        phi1,
        residual: condition_residual(gamma1, gamma2, bs_a, delays, t1, phi1),
    })
}

/// Whether `config` satisfies the invisibility condition within `tol`.
pub fn check_invisibility(config: &NetworkConfig, tol: f64) -> bool {
    invisibility_residual(config) <= tol
}

pub fn invisibility_residual(config: &NetworkConfig) -> f64 {
    condition_residual(
        config.gammas[0],
        config.gammas[1],
        &config.bs_a,
        (config.delays.phi1, config.delays.phi3),
        config.object1.transmissivity(),
        config.object1.phase(),
    )
}

/// Scalar knobs a sweep can vary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parameter {
    Phi1Obj,
    T1,
    T2,
    Phi2Obj,
    Phi1,
    Phi2,
    Phi3,
    Gamma1,
    Gamma2,
    Gamma3,
}

impl Parameter {
    pub const ALL: [Parameter; 10] = [
        Parameter::Phi1Obj,
        Parameter::T1,
        Parameter::T2,
        Parameter::Phi2Obj,
        Parameter::Phi1,
        Parameter::Phi2,
        Parameter::Phi3,
        Parameter::Gamma1,
        Parameter::Gamma2,
        Parameter::Gamma3,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Parameter::Phi1Obj => "phi1_obj",
            Parameter::T1 => "T1",
            Parameter::T2 => "T2",
            Parameter::Phi2Obj => "phi2_obj",
            Parameter::Phi1 => "phi1",
            Parameter::Phi2 => "phi2",
            Parameter::Phi3 => "phi3",
            Parameter::Gamma1 => "gamma1",
            Parameter::Gamma2 => "gamma2",
            Parameter::Gamma3 => "gamma3",
        }
    }

    pub fn apply(self, template: &NetworkConfig, value: f64) -> Result<NetworkConfig> {
        let mut cfg = template.clone();
        let (o1, o2) = (&template.object1, &template.object2);
        match self {
            Parameter::Phi1Obj => cfg.object1 = ObjectSpec::new(o1.transmissivity(), value)?,
            Parameter::T1 => cfg.object1 = ObjectSpec::new(value, o1.phase())?,
            Parameter::T2 => cfg.object2 = ObjectSpec::new(value, o2.phase())?,
            Parameter::Phi2Obj => cfg.object2 = ObjectSpec::new(o2.transmissivity(), value)?,
            Parameter::Phi1 => cfg.delays.phi1 = value,
            Parameter::Phi2 => cfg.delays.phi2 = value,
            Parameter::Phi3 => cfg.delays.phi3 = value,
            Parameter::Gamma1 => cfg.gammas[0] = value,
            Parameter::Gamma2 => cfg.gammas[1] = value,
            Parameter::Gamma3 => cfg.gammas[2] = value,
        }
        Ok(cfg)
    }
}

impl fmt::Display for Parameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Parameter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Parameter::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::UnknownParameter(s.to_owned()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub parameter: Parameter,
    pub grid: Vec<f64>,
    pub rows: Vec<ProbabilityReport>,
}

/// `points` evenly spaced values from `from` to `to` inclusive.
pub fn linspace(from: f64, to: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![from],
        n => (0..n)
            .map(|k| from + (to - from) * k as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// One full report per grid value, rows in grid order.
pub fn sweep(template: &NetworkConfig, parameter: Parameter, grid: &[f64]) -> Result<SweepTable> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let rows = grid
        .par_iter()
        .map(|&v| full_report(&build_network(parameter.apply(template, v)?)?))
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepTable {
        parameter,
        grid: grid.to_vec(),
        rows,
    })
}

/// Least-squares line `y ≈ intercept + slope·x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearFit {
    pub intercept: f64,
    pub slope: f64,
    /// Largest absolute residual over the fitted points.
    pub residual: f64,
}

impl LinearFit {
    pub fn fit(xs: &[f64], ys: &[f64]) -> Self {
        let n = xs.len() as f64;
        let mx = xs.iter().sum::<f64>() / n;
        let my = ys.iter().sum::<f64>() / n;
        let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
        let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
        let intercept = my - slope * mx;
        let residual = xs
            .iter()
            .zip(ys)
            .map(|(x, y)| (y - intercept - slope * x).abs())
            .fold(0.0, f64::max);
        Self {
            intercept,
            slope,
            residual,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spread {
    pub observable: &'static str,
    pub min: f64,
    pub max: f64,
}

impl Spread {
    pub fn deviation(&self) -> f64 {
        self.max - self.min
    }
}

/// Outcome of varying object 2 over a grid with the condition in force.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndependenceReport {
    /// P_A, P_B, P_C, P_BI, P_CI: expected flat.
    pub invariant: Vec<Spread>,
    /// P_AI against T₂².
    pub coincidence_ai: LinearFit,
    /// P_I against T₂².
    pub idler: LinearFit,
    /// `γ₁²T₁² / (|R_a|² N²)`, the predicted P_AI slope.
    pub predicted_ai_slope: f64,
    pub points: usize,
}

impl IndependenceReport {
    pub fn max_deviation(&self) -> f64 {
        self.invariant
            .iter()
            .map(Spread::deviation)
            .fold(0.0, f64::max)
    }
}

/// Varies object 2 over `t2_grid × phi2_grid` on a config that satisfies the
/// invisibility condition.
pub fn object2_independence_scan(
    config: &NetworkConfig,
    t2_grid: &[f64],
    phi2_grid: &[f64],
) -> Result<IndependenceReport> {
    let residual = invisibility_residual(config);
    if residual > CHECK {
        return Err(Error::ConditionNotSatisfied(residual));
    }
    if t2_grid.is_empty() || phi2_grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let points: Vec<(f64, f64)> = t2_grid
        .iter()
        .flat_map(|&t| phi2_grid.iter().map(move |&p| (t, p)))
        .collect();
    let reports = points
        .par_iter()
        .map(|&(t2, phi2)| {
            let cfg = NetworkConfig {
                object2: ObjectSpec::new(t2, phi2)?,
                ..config.clone()
            };
            full_report(&build_network(cfg)?)
        })
        .collect::<Result<Vec<_>>>()?;

    let spread = |observable: &'static str, get: fn(&ProbabilityReport) -> f64| {
        let vals = reports.iter().map(get);
        Spread {
            observable,
            min: vals.clone().fold(f64::INFINITY, f64::min),
            max: vals.fold(f64::NEG_INFINITY, f64::max),
        }
    };
    let invariant = vec![
        spread("P_A", |r| r.singles.a),
        spread("P_B", |r| r.singles.b),
        spread("P_C", |r| r.singles.c),
        spread("P_BI", |r| r.coincidences.bi),
        spread("P_CI", |r| r.coincidences.ci),
    ];
    let xs: Vec<f64> = points.iter().map(|(t, _)| t * t).collect();
    let ai: Vec<f64> = reports.iter().map(|r| r.coincidences.ai).collect();
    let idler: Vec<f64> = reports.iter().map(|r| r.singles.i).collect();
    let t1 = config.object1.transmissivity();
    let n2 = config.normalization().powi(2);
    Ok(IndependenceReport {
        invariant,
        coincidence_ai: LinearFit::fit(&xs, &ai),
        idler: LinearFit::fit(&xs, &idler),
        predicted_ai_slope: config.gammas[0].powi(2) * t1 * t1 / (config.bs_a.r.norm_sqr() * n2),
        points: points.len(),
    })
}

/// Why the invisibility condition and the condition that removes T₂ from the
/// A-I coincidence cannot hold together.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DualWitness {
    /// `e^{iϕ₁}` demanded by the invisibility condition.
    pub invisibility_phase: Amplitude,
    /// `e^{iϕ₁}` demanded by the A-I cancellation condition.
    pub coincidence_phase: Amplitude,
    /// Angle between the two demanded phasors, in `[0, π]`.
    pub phase_gap: f64,
    pub invisibility_t1: f64,
    pub coincidence_t1: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum DualOutcome {
    Infeasible(DualWitness),
    /// Both conditions hold. Only reachable as `T₁ = 0` with `γ₂ = 0`.
    Solution {
        t1: f64,
        phi1: f64,
        degenerate: bool,
    },
}

/// Tries to satisfy both
/// `γ₁T_aT₁e^{i(φ₁+ϕ₁)} + γ₂R_a e^{iφ₃} = 0` and
/// `γ₁R_aT₁e^{i(φ₁+ϕ₁)} + γ₂T_a e^{iφ₃} = 0`.
pub fn dual_condition_feasibility(
    gamma1: f64,
    gamma2: f64,
    bs_a: &BeamSplitterSpec,
    (delay1, delay3): (f64, f64),
) -> Result<DualOutcome> {
    check_inputs(gamma1, gamma2, bs_a)?;
    if gamma2 == 0.0 {
        return Ok(DualOutcome::Solution {
            t1: 0.0,
            phi1: 0.0,
            degenerate: true,
        });
    }
    // Each condition fixes T₁e^{iϕ₁} completely.
    let shift = Amplitude::from_polar(1.0, delay3 - delay1);
    let first = -gamma2 * bs_a.r * shift / (gamma1 * bs_a.t);
    let second = -gamma2 * bs_a.t * shift / (gamma1 * bs_a.r);
    let (u1, u2) = (first / first.norm(), second / second.norm());
    let phase_gap = (u1 * u2.conj()).arg().abs();
    if phase_gap <= CHECK && (first - second).norm() <= CHECK && first.norm() <= 1.0 + CHECK {
        return Ok(DualOutcome::Solution {
            t1: first.norm().min(1.0),
            phi1: reduce_angle(first.arg()),
            degenerate: false,
        });
    }
    Ok(DualOutcome::Infeasible(DualWitness {
        invisibility_phase: u1,
        coincidence_phase: u2,
        phase_gap: phase_gap.min(PI),
        invisibility_t1: first.norm(),
        coincidence_t1: second.norm(),
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, TAU};

    fn balanced() -> BeamSplitterSpec {
        BeamSplitterSpec::balanced()
    }

    #[test]
    fn equal_pumps_balanced() {
        let s = solve_invisibility(1.0, 1.0, &balanced(), (0.0, 0.0)).unwrap();
        assert!((s.t1 - 1.0).abs() < 1e-15);
        assert!((s.phi1 - 1.5 * PI).abs() < 1e-15);
        assert!(s.residual <= 1e-15);
    }

    #[test]
    fn stronger_second_pump_is_infeasible() {
        match solve_invisibility(1.0, 2.0, &balanced(), (0.0, 0.0)) {
            Err(Error::Infeasible { required_t1 }) => assert!((required_t1 - 2.0).abs() < 1e-15),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn stronger_first_pump_halves_t1() {
        let s = solve_invisibility(2.0, 1.0, &balanced(), (0.0, 0.0)).unwrap();
        assert!((s.t1 - 0.5).abs() < 1e-15);
        assert!((s.phi1 - 1.5 * PI).abs() < 1e-15);
        assert!(s.residual < 1e-15);
    }

    #[test]
    fn degenerate_splitters() {
        let full =
            BeamSplitterSpec::new(Amplitude::new(1.0, 0.0), Amplitude::new(0.0, 0.0)).unwrap();
        assert!(matches!(
            solve_invisibility(1.0, 1.0, &full, (0.0, 0.0)),
            Err(Error::DegenerateSplitter { .. })
        ));
        let mirror =
            BeamSplitterSpec::new(Amplitude::new(0.0, 0.0), Amplitude::new(0.0, 1.0)).unwrap();
        assert!(matches!(
            solve_invisibility(1.0, 1.0, &mirror, (0.0, 0.0)),
            Err(Error::DegenerateSplitter { .. })
        ));
    }

    #[test]
    fn near_unit_t1_is_clamped() {
        let s = solve_invisibility(1.0, 1.0 + 5e-13, &balanced(), (0.0, 0.0)).unwrap();
        assert_eq!(s.t1, 1.0);
    }

    #[test]
    fn check_round_trip_and_sensitivity() {
        let template = NetworkConfig::default();
        let s = solve_invisibility(1.0, 1.0, &template.bs_a, (0.0, 0.0)).unwrap();
        let cfg = s.apply(&template).unwrap();
        assert!(check_invisibility(&cfg, 1e-12));
        assert!(!check_invisibility(&template, 1e-12));
        assert!((invisibility_residual(&template) - 1.0).abs() < 1e-15);
        let nudged = NetworkConfig {
            object1: ObjectSpec::new(s.t1, s.phi1 + 1e-6).unwrap(),
            ..cfg
        };
        assert!(!check_invisibility(&nudged, 1e-9));
    }

    #[test]
    fn delays_absorbed_into_object_phase() {
        let a = solve_invisibility(1.0, 0.8, &balanced(), (0.3, 1.1)).unwrap();
        let b = solve_invisibility(1.0, 0.8, &balanced(), (0.3 + 2.0, 1.1 + 2.0)).unwrap();
        assert!((a.t1 - b.t1).abs() < 1e-12);
        assert!((a.phi1 - b.phi1).abs() < 1e-12);
        assert!(a.residual < 1e-15);
    }

    #[test]
    fn parameter_names_round_trip() {
        for p in Parameter::ALL {
            assert_eq!(p.name().parse::<Parameter>().unwrap(), p);
        }
        assert_eq!(
            "T3".parse::<Parameter>(),
            Err(Error::UnknownParameter("T3".into()))
        );
    }

    #[test]
    fn fringe_sweep() {
        let template = NetworkConfig {
            gammas: [1.0, 1.0, 0.0],
            ..Default::default()
        };
        let grid = linspace(0.0, TAU, 33);
        for t1 in [1.0, 0.5] {
            let tpl = Parameter::T1.apply(&template, t1).unwrap();
            let table = sweep(&tpl, Parameter::Phi1Obj, &grid).unwrap();
            assert_eq!(table.rows.len(), 33);
            for (phi, row) in table.grid.iter().zip(&table.rows) {
                assert!((row.singles.a - (1.0 - t1 * phi.sin()) / 2.0).abs() < 1e-12);
            }
        }
        assert_eq!(sweep(&template, Parameter::T1, &[]), Err(Error::EmptyGrid));
    }

    #[test]
    fn t2_sweep_under_condition_is_flat_at_b() {
        let cfg = NetworkConfig {
            object1: ObjectSpec::new(1.0, 1.5 * PI).unwrap(),
            ..Default::default()
        };
        let table = sweep(&cfg, Parameter::T2, &[0.0, 0.25, 0.5, 0.75, 1.0]).unwrap();
        for row in &table.rows {
            assert!((row.singles.b - 1.0 / 6.0).abs() < 1e-12);
        }
    }

    #[test]
    fn independence_scan() {
        let cfg = NetworkConfig {
            object1: ObjectSpec::new(1.0, 1.5 * PI).unwrap(),
            ..Default::default()
        };
        let report =
            object2_independence_scan(&cfg, &linspace(0.0, 1.0, 9), &linspace(0.0, TAU, 9))
                .unwrap();
        assert_eq!(report.points, 81);
        assert!(report.max_deviation() <= 1e-12);
        assert!((report.predicted_ai_slope - 2.0 / 3.0).abs() < 1e-15);
        assert!((report.coincidence_ai.slope - 2.0 / 3.0).abs() < 1e-12);
        assert!(report.coincidence_ai.intercept.abs() < 1e-12);
        assert!(report.coincidence_ai.residual <= 1e-12);
        assert!((report.idler.intercept - 1.0 / 3.0).abs() < 1e-12);

        assert!(matches!(
            object2_independence_scan(&NetworkConfig::default(), &[0.5], &[0.0]),
            Err(Error::ConditionNotSatisfied(_))
        ));
    }

    #[test]
    fn dual_conditions_exclusive() {
        match dual_condition_feasibility(1.0, 1.0, &balanced(), (0.0, 0.0)).unwrap() {
            DualOutcome::Infeasible(w) => {
                assert!((w.phase_gap - PI).abs() < 1e-12);
                assert!((w.invisibility_phase - Amplitude::new(0.0, -1.0)).norm() < 1e-15);
                assert!((w.coincidence_phase - Amplitude::new(0.0, 1.0)).norm() < 1e-15);
            }
            other => panic!("{other:?}"),
        }
        let degenerate = dual_condition_feasibility(1.0, 0.0, &balanced(), (0.0, 0.0)).unwrap();
        assert_eq!(
            degenerate,
            DualOutcome::Solution {
                t1: 0.0,
                phi1: 0.0,
                degenerate: true
            }
        );
    }

    #[test]
    fn phase_output_canonical() {
        // R_a = -i/√2 flips the demanded phasor to +i, i.e. π/2.
        let bs = BeamSplitterSpec::new(balanced().t, -balanced().r).unwrap();
        let s = solve_invisibility(1.0, 1.0, &bs, (0.0, 0.0)).unwrap();
        assert!((s.phi1 - FRAC_PI_2).abs() < 1e-15);
        // A zero demanded angle stays 0, never 2π.
        let s = solve_invisibility(1.0, 1.0, &balanced(), (FRAC_PI_2, 0.0)).unwrap();
        assert!(s.phi1 < TAU && s.phi1 >= 0.0);
        assert!(s.residual < 1e-15);
    }
}
