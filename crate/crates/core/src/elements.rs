//! Optical elements: beam splitters, absorbing objects, path delays and
//! down-conversion crystals.

use std::f64::consts::{FRAC_1_SQRT_2, TAU};

use serde::{Deserialize, Serialize};

use crate::algebra::{Amplitude, LinearForm, ModeId};
use crate::tolerance::CHECK;
use crate::{Error, Result};

fn check_finite(what: &str, a: Amplitude) -> Result<()> {
    if a.re.is_finite() && a.im.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidAmplitude(format!(
            "{what} = {a} is not finite"
        )))
    }
}

/// Lossless two-port splitter with transmission `t` and reflection `r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeamSplitterSpec {
    pub t: Amplitude,
    pub r: Amplitude,
    pub label: String,
}

impl BeamSplitterSpec {
    /// Accepts `(t, r)` iff `|t|² + |r|² = 1` and `t r* + t* r = 0`.
    pub fn new(t: Amplitude, r: Amplitude) -> Result<Self> {
        Self::labelled("", t, r)
    }

    pub fn labelled(label: &str, t: Amplitude, r: Amplitude) -> Result<Self> {
        check_finite("T", t)?;
        check_finite("R", r)?;
        let energy = (t.norm_sqr() + r.norm_sqr() - 1.0).abs();
        if energy > CHECK {
            return Err(Error::NonUnitary {
                label: label.to_owned(),
                identity: "|T|^2 + |R|^2 = 1",
                deviation: energy,
            });
        }
        let phase = (t * r.conj() + t.conj() * r).norm();
        if phase > CHECK {
            return Err(Error::NonUnitary {
                label: label.to_owned(),
                identity: "T R* + T* R = 0",
                deviation: phase,
            });
        }
        Ok(Self {
            t,
            r,
            label: label.to_owned(),
        })
    }

    /// `T = 1/√2`, `R = i/√2`.
    pub fn balanced() -> Self {
        Self {
            t: Amplitude::new(FRAC_1_SQRT_2, 0.0),
            r: Amplitude::new(0.0, FRAC_1_SQRT_2),
            label: String::new(),
        }
    }

    pub fn with_label(mut self, label: &str) -> Self {
        self.label = label.to_owned();
        self
    }
}

/// Free-function form of [`BeamSplitterSpec::new`].
pub fn validate_bs(t: Amplitude, r: Amplitude) -> Result<BeamSplitterSpec> {
    BeamSplitterSpec::new(t, r)
}

/// Partially transparent object: a splitter whose reflected port is an
/// environment mode, followed by a phase shift on the transmitted beam.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectSpec {
    t: f64,
    phi: f64,
    r: Amplitude,
}

/// Phase convention for the reflected (absorbed) amplitude of an object.
/// Only `|R|` is observable through the traced-out environment mode.
fn object_reflection(t: f64) -> Amplitude {
    Amplitude::new(0.0, (1.0 - t * t).max(0.0).sqrt())
}

impl ObjectSpec {
    pub fn new(t: f64, phi: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::InvalidTransmissivity(t));
        }
        if !phi.is_finite() {
            return Err(Error::InvalidAmplitude(format!(
                "object phase {phi} is not finite"
            )));
        }
        Ok(Self {
            t,
            phi,
            r: object_reflection(t),
        })
    }

    /// No object in the beam.
    pub fn absent() -> Self {
        Self {
            t: 1.0,
            phi: 0.0,
            r: Amplitude::new(0.0, 0.0),
        }
    }

    #[cfg(test)]
    pub(crate) fn unchecked(t: f64, phi: f64) -> Self {
        Self {
            t,
            phi,
            r: Amplitude::new(0.0, 0.0),
        }
    }

    pub fn transmissivity(&self) -> f64 {
        self.t
    }

    pub fn phase(&self) -> f64 {
        self.phi
    }

    pub fn reflection(&self) -> Amplitude {
        self.r
    }

    /// `T e^{iφ}`
    pub fn transmitted(&self) -> Amplitude {
        Amplitude::from_polar(self.t, self.phi)
    }
}

pub fn object_as_bs(t: f64, phi: f64) -> Result<ObjectSpec> {
    ObjectSpec::new(t, phi)
}

/// Phase in radians, reduced to `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
pub struct PhaseSpec(f64);

impl PhaseSpec {
    pub fn new(phi: f64) -> Self {
        Self(reduce_angle(phi))
    }

    pub fn radians(self) -> f64 {
        self.0
    }

    pub fn factor(self) -> Amplitude {
        Amplitude::from_polar(1.0, self.0)
    }
}

/// Reduces to `[0, 2π)`; a result that rounds to 2π maps to 0.
pub fn reduce_angle(phi: f64) -> f64 {
    let r = phi.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrystalWarning {
    /// Zero pair amplitude: the crystal never contributes.
    DeadCrystal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveGamma {
    pub value: f64,
    pub warning: Option<CrystalWarning>,
}

/// Pair amplitude `γ = |α| g` from the pump amplitude and conversion
/// efficiency, in the post-selected single-pair sector.
pub fn effective_gamma(alpha: f64, g: f64) -> Result<EffectiveGamma> {
    if !(alpha.is_finite() && g.is_finite()) || alpha < 0.0 || g < 0.0 {
        return Err(Error::InvalidAmplitude(format!(
            "pump amplitude {alpha} and efficiency {g} must be finite and non-negative"
        )));
    }
    let value = alpha * g;
    Ok(EffectiveGamma {
        value,
        warning: (value == 0.0).then_some(CrystalWarning::DeadCrystal),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrystalSpec {
    gamma: f64,
    pump: Option<(f64, f64)>,
}

impl CrystalSpec {
    /// `gamma = 0` disables the crystal.
    pub fn new(gamma: f64) -> Result<Self> {
        if !gamma.is_finite() || gamma < 0.0 {
            return Err(Error::InvalidAmplitude(format!(
                "pair amplitude {gamma} must be real, finite and non-negative"
            )));
        }
        Ok(Self { gamma, pump: None })
    }

    pub fn from_pump(alpha: f64, g: f64) -> Result<Self> {
        let eff = effective_gamma(alpha, g)?;
        Ok(Self {
            gamma: eff.value,
            pump: Some((alpha, g)),
        })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn pump(&self) -> Option<(f64, f64)> {
        self.pump
    }

    pub fn is_dead(&self) -> bool {
        self.gamma == 0.0
    }
}

/// Seed of one pump branch: `a†_p → γ a†_s a†_i`, before any downstream
/// element acts.
pub fn spdc_split(
    crystal: &CrystalSpec,
    signal_seed: ModeId,
    idler_seed: ModeId,
) -> Result<(LinearForm, LinearForm, f64)> {
    if signal_seed == idler_seed {
        return Err(Error::InvalidWiring(format!(
            "signal and idler seeds share mode {signal_seed}"
        )));
    }
    Ok((
        LinearForm::unit(signal_seed),
        LinearForm::unit(idler_seed),
        crystal.gamma(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{ModeRegistry, TwoPhotonState};
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Amplitude {
        Amplitude::new(re, im)
    }

    #[test]
    fn balanced_values() {
        let bs = BeamSplitterSpec::balanced();
        assert_eq!(bs.t, c(FRAC_1_SQRT_2, 0.0));
        assert_eq!(bs.r, c(0.0, FRAC_1_SQRT_2));
        assert!(validate_bs(bs.t, bs.r).is_ok());
        assert!((bs.t.norm_sqr() - 0.5).abs() < 1e-15);
        assert!((bs.r.norm_sqr() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn fully_transmissive_is_valid() {
        assert!(validate_bs(c(1.0, 0.0), c(0.0, 0.0)).is_ok());
    }

    #[test]
    fn real_pair_fails_phase_identity() {
        match validate_bs(c(0.8, 0.0), c(0.6, 0.0)) {
            Err(Error::NonUnitary {
                identity,
                deviation,
                ..
            }) => {
                assert_eq!(identity, "T R* + T* R = 0");
                assert!((deviation - 0.96).abs() < 1e-12);
            }
            other => panic!("expected NonUnitary, got {other:?}"),
        }
    }

    #[test]
    fn lossy_pair_fails_energy_identity() {
        let err = validate_bs(c(0.5, 0.0), c(0.0, 0.5)).unwrap_err();
        assert!(matches!(
            err,
            Error::NonUnitary {
                identity: "|T|^2 + |R|^2 = 1",
                ..
            }
        ));
    }

    #[test]
    fn splitter_grid() {
        for k in 0..100 {
            let theta = TAU * k as f64 / 100.0;
            assert!(validate_bs(c(theta.cos(), 0.0), c(0.0, theta.sin())).is_ok());
            let real = validate_bs(c(theta.cos(), 0.0), c(theta.sin(), 0.0));
            assert_eq!(real.is_ok(), k % 25 == 0, "theta index {k}");
        }
    }

    #[test]
    fn object_limits() {
        let clear = object_as_bs(1.0, 0.0).unwrap();
        assert_eq!(clear.reflection(), c(0.0, 0.0));
        let opaque = object_as_bs(0.0, 0.0).unwrap();
        assert_eq!(opaque.reflection(), c(0.0, 1.0));
        assert_eq!(opaque.transmitted(), c(0.0, 0.0));
    }

    #[test]
    fn object_partial() {
        let o = object_as_bs(0.5, PI / 3.0).unwrap();
        assert!((o.transmitted() - Amplitude::from_polar(0.5, PI / 3.0)).norm() < 1e-15);
        assert!((o.reflection().norm_sqr() - 0.75).abs() < 1e-15);
    }

    #[test]
    fn object_range_checked() {
        assert_eq!(
            object_as_bs(1.5, 0.0),
            Err(Error::InvalidTransmissivity(1.5))
        );
        assert_eq!(
            object_as_bs(-0.1, 0.0),
            Err(Error::InvalidTransmissivity(-0.1))
        );
    }

    #[test]
    fn object_unitarity_and_clear_transmission() {
        for k in 0..=50 {
            let t = k as f64 / 50.0;
            let o = object_as_bs(t, 1.3 * k as f64).unwrap();
            assert!((o.transmitted().norm_sqr() + o.reflection().norm_sqr() - 1.0).abs() < 1e-15);
        }
        let o = object_as_bs(1.0, 0.7).unwrap();
        assert!((o.transmitted() - Amplitude::from_polar(1.0, 0.7)).norm() < 1e-15);
        assert_eq!(o.reflection().norm(), 0.0);
    }

    #[test]
    fn effective_gamma_cases() {
        let g = effective_gamma(2.0, 0.01).unwrap();
        assert!((g.value - 0.02).abs() < 1e-15);
        assert_eq!(g.warning, None);
        let dead = effective_gamma(0.0, 0.5).unwrap();
        assert_eq!(dead.value, 0.0);
        assert_eq!(dead.warning, Some(CrystalWarning::DeadCrystal));
        assert_eq!(effective_gamma(1.0, 1.0).unwrap().value, 1.0);
        assert!(matches!(
            effective_gamma(-1.0, 1.0),
            Err(Error::InvalidAmplitude(_))
        ));
        let crystal = CrystalSpec::from_pump(2.0, 0.01).unwrap();
        assert!((crystal.gamma() - 2.0 * 0.01).abs() < 1e-15);
    }

    #[test]
    fn phase_reduction() {
        assert_eq!(PhaseSpec::new(TAU).radians(), 0.0);
        assert!((PhaseSpec::new(-PI / 2.0).radians() - 1.5 * PI).abs() < 1e-15);
        assert_eq!(PhaseSpec::new(-1e-17).radians(), 0.0);
        assert!(PhaseSpec::new(7.0 * TAU + 1.0).radians() < TAU);
    }

    #[test]
    fn spdc_seed() {
        let mut reg = ModeRegistry::new();
        let s1 = reg.register("s1").unwrap();
        let i1 = reg.register("i1").unwrap();
        let (s, i, w) = spdc_split(&CrystalSpec::new(1.0).unwrap(), s1, i1).unwrap();
        assert_eq!(s, LinearForm::unit(s1));
        assert_eq!(i, LinearForm::unit(i1));
        assert_eq!(w, 1.0);

        let (_, _, w) = spdc_split(&CrystalSpec::new(0.3).unwrap(), s1, i1).unwrap();
        assert_eq!(w, 0.3);

        let (s, i, w) = spdc_split(&CrystalSpec::new(0.3).unwrap(), s1, i1).unwrap();
        let st = TwoPhotonState::bilinear_product(&s, &i, c(w, 0.0));
        assert_eq!(st.len(), 1);
        assert_eq!(st.get(s1, i1), c(0.3, 0.0));

        assert!(matches!(
            spdc_split(&CrystalSpec::new(1.0).unwrap(), s1, s1),
            Err(Error::InvalidWiring(_))
        ));
    }
}
