//! Partial trace over the environment modes and photodetection statistics.
//!
//! Tracing out `v1` and `v2` from a pure two-photon state leaves a mixture
//! whose components are labelled by the environment content of each basis
//! pair. Coherences inside a component survive; coherences between
//! components are exactly what the trace removes.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::algebra::{ModeId, ModePair, TwoPhotonState};
use crate::network::{Modes, Network};
use crate::tolerance::CHECK;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Detector {
    A,
    B,
    C,
    I,
}

impl Detector {
    pub const ALL: [Detector; 4] = [Detector::A, Detector::B, Detector::C, Detector::I];
    pub const SIGNALS: [Detector; 3] = [Detector::A, Detector::B, Detector::C];

    pub fn mode(self, modes: &Modes) -> ModeId {
        match self {
            Detector::A => modes.a,
            Detector::B => modes.b,
            Detector::C => modes.c,
            Detector::I => modes.idler,
        }
    }
}

impl fmt::Display for Detector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Detector::A => "A",
            Detector::B => "B",
            Detector::C => "C",
            Detector::I => "I",
        };
        f.write_str(s)
    }
}

impl FromStr for Detector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "A" => Ok(Detector::A),
            "B" => Ok(Detector::B),
            "C" => Ok(Detector::C),
            "I" => Ok(Detector::I),
            other => Err(Error::InvalidDetector(other.to_owned())),
        }
    }
}

/// One component of the reduced state: the normalized system state seen
/// with environment content `environment`, and its probability.
#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub environment: Vec<ModeId>,
    pub state: TwoPhotonState,
    pub weight: f64,
}

/// `Tr_{v1,v2} |ψ⟩⟨ψ|` as an ensemble of orthogonal pure components.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedDensityState {
    blocks: Vec<Block>,
    modes: Modes,
}

impl ReducedDensityState {
    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn total_weight(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| b.weight * b.state.norm_squared())
            .sum()
    }

    /// `Tr{n_X ρ}`
    pub fn singles(&self, detector: Detector) -> f64 {
        let mode = detector.mode(&self.modes);
        self.blocks
            .iter()
            .map(|b| {
                b.weight
                    * b.state
                        .iter()
                        .map(|(pair, amp)| pair.occupation(mode) as f64 * amp.norm_sqr())
                        .sum::<f64>()
            })
            .sum()
    }

    /// `Tr{n_X n_I ρ}` for a signal detector `X`.
    pub fn coincidence(&self, signal: Detector) -> Result<f64> {
        if signal == Detector::I {
            return Err(Error::InvalidDetector(
                "I (coincidences pair a signal detector with I)".into(),
            ));
        }
        let (x, i) = (signal.mode(&self.modes), self.modes.idler);
        Ok(self
            .blocks
            .iter()
            .map(|b| b.weight * b.state.get(x, i).norm_sqr())
            .sum())
    }
}

/// Partial trace over the environment modes `modes.v1`, `modes.v2`.
pub fn reduce(state: &TwoPhotonState, modes: &Modes) -> ReducedDensityState {
    let env = modes.environment();
    let env_of = |pair: ModePair| -> Vec<ModeId> {
        [pair.first(), pair.second()]
            .into_iter()
            .filter(|m| env.contains(m))
            .collect()
    };
    let mut groups: BTreeMap<Vec<ModeId>, Vec<ModePair>> = BTreeMap::new();
    for (pair, _) in state.iter() {
        groups.entry(env_of(pair)).or_default().push(pair);
    }
    let blocks = groups
        .into_iter()
        .filter_map(|(environment, pairs)| {
            let part = state.filtered(|p| pairs.binary_search(&p).is_ok());
            let weight = part.norm_squared();
            (weight > 0.0).then(|| Block {
                environment,
                state: part.scaled((1.0 / weight.sqrt()).into()),
                weight,
            })
        })
        .collect();
    ReducedDensityState {
        blocks,
        modes: *modes,
    }
}

pub fn singles_probability(rho: &ReducedDensityState, detector: Detector) -> f64 {
    rho.singles(detector)
}

pub fn coincidence_probability(rho: &ReducedDensityState, signal: Detector) -> Result<f64> {
    rho.coincidence(signal)
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub struct Singles {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub i: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub struct Coincidences {
    pub ai: f64,
    pub bi: f64,
    pub ci: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Rates {
    pub singles: Singles,
    pub coincidences: Coincidences,
}

impl Rates {
    fn scaled(&self, k: f64) -> Self {
        let s = &self.singles;
        let c = &self.coincidences;
        Rates {
            singles: Singles {
                a: s.a * k,
                b: s.b * k,
                c: s.c * k,
                i: s.i * k,
            },
            coincidences: Coincidences {
                ai: c.ai * k,
                bi: c.bi * k,
                ci: c.ci * k,
            },
        }
    }
}

/// Per-pair detection probabilities, plus the same rates scaled by `N²`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ProbabilityReport {
    pub singles: Singles,
    pub coincidences: Coincidences,
    pub unnormalized: Rates,
}

/// Observable names in report order.
pub const OBSERVABLES: [&str; 7] = ["P_A", "P_B", "P_C", "P_I", "P_AI", "P_BI", "P_CI"];

impl ProbabilityReport {
    pub fn from_reduced(rho: &ReducedDensityState, norm_squared: f64) -> Result<Self> {
        let singles = Singles {
            a: rho.singles(Detector::A),
            b: rho.singles(Detector::B),
            c: rho.singles(Detector::C),
            i: rho.singles(Detector::I),
        };
        let coincidences = Coincidences {
            ai: rho.coincidence(Detector::A)?,
            bi: rho.coincidence(Detector::B)?,
            ci: rho.coincidence(Detector::C)?,
        };
        Ok(Self::from_rates(
            Rates {
                singles,
                coincidences,
            },
            norm_squared,
        ))
    }

    pub fn from_rates(rates: Rates, norm_squared: f64) -> Self {
        Self {
            singles: rates.singles,
            coincidences: rates.coincidences,
            unnormalized: rates.scaled(norm_squared),
        }
    }

    pub fn singles(&self, detector: Detector) -> f64 {
        match detector {
            Detector::A => self.singles.a,
            Detector::B => self.singles.b,
            Detector::C => self.singles.c,
            Detector::I => self.singles.i,
        }
    }

    /// Panics for `Detector::I`.
    pub fn coincidence(&self, signal: Detector) -> f64 {
        match signal {
            Detector::A => self.coincidences.ai,
            Detector::B => self.coincidences.bi,
            Detector::C => self.coincidences.ci,
            Detector::I => panic!("no I-I coincidence"),
        }
    }

    /// Values in [`OBSERVABLES`] order.
    pub fn observables(&self) -> [f64; 7] {
        let s = &self.singles;
        let c = &self.coincidences;
        [s.a, s.b, s.c, s.i, c.ai, c.bi, c.ci]
    }

    /// Conservation checks that hold for every network state: one signal
    /// photon per pair, the idler rate splits over the coincidences, and no
    /// coincidence exceeds either of its singles.
    pub fn invariant_violations(&self) -> Vec<String> {
        let s = &self.singles;
        let c = &self.coincidences;
        let mut out = Vec::new();
        let signal_sum = s.a + s.b + s.c;
        if (signal_sum - 1.0).abs() > CHECK {
            out.push(format!("P_A + P_B + P_C = {signal_sum}"));
        }
        let idler_sum = c.ai + c.bi + c.ci;
        if (idler_sum - s.i).abs() > CHECK {
            out.push(format!("P_I = {} but coincidences sum to {idler_sum}", s.i));
        }
        for (name, pc, px) in [("AI", c.ai, s.a), ("BI", c.bi, s.b), ("CI", c.ci, s.c)] {
            if pc > px.min(s.i) + CHECK {
                out.push(format!("P_{name} = {pc} exceeds its singles"));
            }
        }
        for (name, v) in OBSERVABLES.iter().zip(self.observables()) {
            if !(-CHECK..=1.0 + CHECK).contains(&v) {
                out.push(format!("{name} = {v} outside [0, 1]"));
            }
        }
        out
    }
}

/// Every singles and coincidence probability of `network`.
pub fn full_report(network: &Network) -> Result<ProbabilityReport> {
    let state = network.output_state()?;
    let rho = reduce(&state, network.ids());
    let n = network.normalization();
    ProbabilityReport::from_reduced(&rho, n * n)
}
