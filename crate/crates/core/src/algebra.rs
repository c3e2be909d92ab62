//! Mode bookkeeping and the sparse amplitude algebra of one- and two-photon
//! states.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::Add;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::tolerance::PRUNE;
use crate::{Error, Result};

/// Complex amplitude in double precision.
pub type Amplitude = Complex64;

/// Dense index of a bosonic mode inside a [`ModeRegistry`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ModeId(usize);

impl ModeId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for ModeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Named modes with dense ids handed out in registration order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ModeRegistry {
    names: Vec<String>,
    lookup: HashMap<String, ModeId>,
}

impl ModeRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(&mut self, name: &str) -> Result<ModeId> {
        if self.lookup.contains_key(name) {
            return Err(Error::DuplicateMode(name.to_owned()));
        }
        let id = ModeId(self.names.len());
        self.names.push(name.to_owned());
        self.lookup.insert(name.to_owned(), id);
        Ok(id)
    }

    pub fn id(&self, name: &str) -> Option<ModeId> {
        self.lookup.get(name).copied()
    }

    /// Panics if `id` was not issued by this registry.
    pub fn name(&self, id: ModeId) -> &str {
        &self.names[id.0]
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (ModeId, &str)> + '_ {
        self.names
            .iter()
            .enumerate()
            .map(|(i, n)| (ModeId(i), n.as_str()))
    }
}

fn negligible(a: Amplitude) -> bool {
    a.norm() < PRUNE
}

/// Superposition of single-photon creation operators, `Σ c_m a†_m`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinearForm {
    terms: BTreeMap<ModeId, Amplitude>,
}

impl LinearForm {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn unit(mode: ModeId) -> Self {
        let mut form = Self::new();
        form.add_term(mode, Amplitude::new(1.0, 0.0));
        form
    }

    pub fn from_terms<I: IntoIterator<Item = (ModeId, Amplitude)>>(terms: I) -> Self {
        let mut form = Self::new();
        for (mode, amp) in terms {
            form.add_term(mode, amp);
        }
        form
    }

    /// Accumulates `amp` onto `mode`, pruning the entry if it cancels.
    pub fn add_term(&mut self, mode: ModeId, amp: Amplitude) {
        let entry = self.terms.entry(mode).or_default();
        *entry += amp;
        if negligible(*entry) {
            self.terms.remove(&mode);
        }
    }

    pub fn get(&self, mode: ModeId) -> Amplitude {
        self.terms.get(&mode).copied().unwrap_or_default()
    }

    pub fn scaled(&self, factor: Amplitude) -> Self {
        Self::from_terms(self.terms.iter().map(|(&m, &a)| (m, a * factor)))
    }

    pub fn norm_squared(&self) -> f64 {
        self.terms.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (ModeId, Amplitude)> + '_ {
        self.terms.iter().map(|(&m, &a)| (m, a))
    }
}

/// Unordered mode pair, stored with the smaller id first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ModePair(ModeId, ModeId);

impl ModePair {
    pub fn new(a: ModeId, b: ModeId) -> Self {
        if a <= b {
            Self(a, b)
        } else {
            Self(b, a)
        }
    }

    pub fn first(self) -> ModeId {
        self.0
    }

    pub fn second(self) -> ModeId {
        self.1
    }

    pub fn contains(self, mode: ModeId) -> bool {
        self.0 == mode || self.1 == mode
    }

    /// Photon number of `mode` in this pair (0, 1 or 2).
    pub fn occupation(self, mode: ModeId) -> usize {
        usize::from(self.0 == mode) + usize::from(self.1 == mode)
    }

    pub fn is_double(self) -> bool {
        self.0 == self.1
    }
}

/// Two-photon state in the normalized Fock basis.
///
/// Every entry is the amplitude of a normalized basis ket, so the probability
/// weight of a pair is `|amp|²` for doubly occupied modes too: the `√2` of
/// `(a†)²|0⟩ = √2|2⟩` is folded into the stored value by [`bilinear_product`].
///
/// [`bilinear_product`]: TwoPhotonState::bilinear_product
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TwoPhotonState {
    amps: BTreeMap<ModePair, Amplitude>,
}

impl TwoPhotonState {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_pairs<I: IntoIterator<Item = ((ModeId, ModeId), Amplitude)>>(pairs: I) -> Self {
        let mut state = Self::zero();
        for ((a, b), amp) in pairs {
            state.add_amplitude(ModePair::new(a, b), amp);
        }
        state
    }

    pub fn add_amplitude(&mut self, pair: ModePair, amp: Amplitude) {
        let entry = self.amps.entry(pair).or_default();
        *entry += amp;
        if negligible(*entry) {
            self.amps.remove(&pair);
        }
    }

    /// `weight · (Σ s_x a†_x)(Σ i_y a†_y)|0⟩` expanded in the normalized basis.
    pub fn bilinear_product(signal: &LinearForm, idler: &LinearForm, weight: Amplitude) -> Self {
        let mut state = Self::zero();
        for (x, sx) in signal.iter() {
            for (y, iy) in idler.iter() {
                let mut amp = weight * sx * iy;
                if x == y {
                    amp *= std::f64::consts::SQRT_2;
                }
                state.add_amplitude(ModePair::new(x, y), amp);
            }
        }
        state
    }

    pub fn get(&self, a: ModeId, b: ModeId) -> Amplitude {
        self.amps
            .get(&ModePair::new(a, b))
            .copied()
            .unwrap_or_default()
    }

    pub fn norm_squared(&self) -> f64 {
        self.amps.values().map(|a| a.norm_sqr()).sum()
    }

    /// `⟨self|other⟩`.
    pub fn inner_product(&self, other: &Self) -> Amplitude {
        self.amps
            .iter()
            .filter_map(|(pair, a)| other.amps.get(pair).map(|b| a.conj() * b))
            .sum()
    }

    pub fn scaled(&self, factor: Amplitude) -> Self {
        let mut out = Self::zero();
        for (&pair, &a) in &self.amps {
            out.add_amplitude(pair, a * factor);
        }
        out
    }

    /// Keeps only the pairs accepted by `keep`.
    pub fn filtered<F: Fn(ModePair) -> bool>(&self, keep: F) -> Self {
        Self {
            amps: self
                .amps
                .iter()
                .filter(|(p, _)| keep(**p))
                .map(|(&p, &a)| (p, a))
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (ModePair, Amplitude)> + '_ {
        self.amps.iter().map(|(&p, &a)| (p, a))
    }
}

impl Add for &TwoPhotonState {
    type Output = TwoPhotonState;

    fn add(self, rhs: &TwoPhotonState) -> TwoPhotonState {
        let mut out = self.clone();
        for (pair, amp) in rhs.iter() {
            out.add_amplitude(pair, amp);
        }
        out
    }
}

impl Add for TwoPhotonState {
    type Output = TwoPhotonState;

    fn add(self, rhs: TwoPhotonState) -> TwoPhotonState {
        &self + &rhs
    }
}
