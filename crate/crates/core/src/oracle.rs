//! Dense brute-force reference simulation.
//!
//! Every element is a unitary single-photon matrix over all oracle modes,
//! lifted to the symmetric two-photon space. Each crystal's pair is seeded on
//! its own and pushed through the elements downstream of that crystal; the
//! weighted results are summed. The full density matrix is then traced over
//! `v1`, `v2` by explicit index summation.
//!
//! Nothing here calls into the graph propagation or the blockwise trace of the
//! fast path; only [`Amplitude`] and the configuration types are shared.
//!
//! Basis order is lexicographic in `(min index, max index)` over
//! [`ORACLE_MODES`], doubly occupied modes included.

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::SQRT_2;

use serde::Serialize;

use crate::algebra::{Amplitude, ModeRegistry, TwoPhotonState};
use crate::detection::{Coincidences, ProbabilityReport, Rates, Singles, OBSERVABLES};
use crate::elements::{BeamSplitterSpec, CrystalSpec, ObjectSpec};
use crate::network::NetworkConfig;
use crate::numfmt::g17;
use crate::{Error, Result};

/// Oracle mode order. `m` is the beam between the two splitters; `I` is the
/// aligned idler beam along its whole length.
pub const ORACLE_MODES: [&str; 10] = ["s1", "s2", "s3", "I", "m", "A", "B", "C", "v1", "v2"];

const S1: usize = 0;
const S2: usize = 1;
const S3: usize = 2;
const IDLER: usize = 3;
const MID: usize = 4;
const OUT_A: usize = 5;
const OUT_B: usize = 6;
const OUT_C: usize = 7;
const V1: usize = 8;
const V2: usize = 9;
const ENV: [usize; 2] = [V1, V2];
const M: usize = ORACLE_MODES.len();

type Matrix = Vec<Vec<Amplitude>>;

fn zero() -> Amplitude {
    Amplitude::new(0.0, 0.0)
}

fn identity() -> Matrix {
    (0..M)
        .map(|r| {
            (0..M)
                .map(|c| {
                    if r == c {
                        Amplitude::new(1.0, 0.0)
                    } else {
                        zero()
                    }
                })
                .collect()
        })
        .collect()
}

fn phase(mode: usize, phi: f64) -> Matrix {
    let mut u = identity();
    u[mode][mode] = Amplitude::from_polar(1.0, phi);
    u
}

/// Splitter from inputs to (distinct) outputs: `in1 → r out1 + t out2`,
/// `in2 → t out1 + r out2`. The vacuum output-side ports are mapped back
/// onto the input modes with the same block so the whole matrix is unitary.
fn splitter(t: Amplitude, r: Amplitude, ins: [usize; 2], outs: [usize; 2]) -> Matrix {
    let mut u = identity();
    for &k in ins.iter().chain(&outs) {
        u[k][k] = zero();
    }
    let block = [[r, t], [t, r]];
    for (j, &src) in ins.iter().enumerate() {
        for (i, &dst) in outs.iter().enumerate() {
            u[dst][src] = block[i][j];
            u[src][dst] = block[i][j];
        }
    }
    u
}

/// In-place object on `(beam, env)`: `beam → T e^{iϕ} beam + R env`.
fn absorber(transmitted: Amplitude, reflected: Amplitude, beam: usize, env: usize) -> Matrix {
    let mut u = identity();
    u[beam][beam] = transmitted;
    u[env][beam] = reflected;
    u[beam][env] = -reflected.conj();
    u[env][env] = transmitted.conj();
    u
}

/// Symmetric two-photon space over [`ORACLE_MODES`].
#[derive(Debug, Clone)]
struct PairBasis {
    pairs: Vec<(usize, usize)>,
    index: HashMap<(usize, usize), usize>,
}

impl PairBasis {
    fn new() -> Self {
        let pairs: Vec<_> = (0..M).flat_map(|i| (i..M).map(move |j| (i, j))).collect();
        let index = pairs.iter().enumerate().map(|(k, &p)| (p, k)).collect();
        Self { pairs, index }
    }

    fn of(&self, a: usize, b: usize) -> usize {
        self.index[&(a.min(b), a.max(b))]
    }

    /// `U⊗U` restricted to the symmetric subspace, applied to `psi`.
    fn apply(&self, u: &Matrix, psi: &[Amplitude]) -> Vec<Amplitude> {
        let mut out = vec![zero(); psi.len()];
        for (k, &(i, j)) in self.pairs.iter().enumerate() {
            let c = psi[k];
            if c == zero() {
                continue;
            }
            // |1_i 1_j⟩ = a†_i a†_j |0⟩, |2_i⟩ = (a†_i)²/√2 |0⟩.
            let c = if i == j { c / SQRT_2 } else { c };
            for p in 0..M {
                if u[p][i] == zero() {
                    continue;
                }
                for q in 0..M {
                    let w = c * u[p][i] * u[q][j];
                    if w == zero() {
                        continue;
                    }
                    // a†_p a†_q |0⟩ in the normalized basis.
                    let w = if p == q { w * SQRT_2 } else { w };
                    out[self.of(p, q)] += w;
                }
            }
        }
        out
    }
}

/// Dense two-photon state over [`ORACLE_MODES`].
#[derive(Debug, Clone, PartialEq)]
pub struct FullFockState {
    pub pairs: Vec<(usize, usize)>,
    pub amplitudes: Vec<Amplitude>,
    /// Largest `|‖ψ‖² − 1|` seen after any element on any branch.
    pub max_step_norm_error: f64,
}

impl FullFockState {
    pub fn dimension(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm_squared(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn amplitude(&self, a: &str, b: &str) -> Option<Amplitude> {
        let ia = ORACLE_MODES.iter().position(|m| *m == a)?;
        let ib = ORACLE_MODES.iter().position(|m| *m == b)?;
        let key = (ia.min(ib), ia.max(ib));
        self.pairs
            .iter()
            .position(|&p| p == key)
            .map(|k| self.amplitudes[k])
    }

    /// One line per basis pair: `modeX modeY re im`, fields as `%.17g`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (&(i, j), a) in self.pairs.iter().zip(&self.amplitudes) {
            out.push_str(&format!(
                "{} {} {} {}\n",
                ORACLE_MODES[i],
                ORACLE_MODES[j],
                g17(a.re),
                g17(a.im)
            ));
        }
        out
    }
}

struct Setup {
    gammas: [f64; 3],
    bs_a: BeamSplitterSpec,
    bs_b: BeamSplitterSpec,
    object1: ObjectSpec,
    object2: ObjectSpec,
}

fn validated(config: &NetworkConfig) -> Result<Setup> {
    let mut gammas = [0.0; 3];
    for (g, &raw) in gammas.iter_mut().zip(&config.gammas) {
        *g = CrystalSpec::new(raw)?.gamma();
    }
    if gammas.iter().all(|&g| g == 0.0) {
        return Err(Error::AllCrystalsDead);
    }
    Ok(Setup {
        gammas,
        bs_a: BeamSplitterSpec::labelled("a", config.bs_a.t, config.bs_a.r)?,
        bs_b: BeamSplitterSpec::labelled("b", config.bs_b.t, config.bs_b.r)?,
        object1: ObjectSpec::new(config.object1.transmissivity(), config.object1.phase())?,
        object2: ObjectSpec::new(config.object2.transmissivity(), config.object2.phase())?,
    })
}

/// Which pump branches an element acts on.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Reach {
    /// Signal side: every crystal's signal photon passes.
    All,
    /// Idler side: only crystals up to and including this one emit upstream.
    UpTo(usize),
}

impl Reach {
    fn covers(self, crystal: usize) -> bool {
        match self {
            Reach::All => true,
            Reach::UpTo(last) => crystal <= last,
        }
    }
}

fn elements(setup: &Setup, config: &NetworkConfig) -> Vec<(Reach, Matrix)> {
    let d = &config.delays;
    let o1 = &setup.object1;
    let o2 = &setup.object2;
    vec![
        (Reach::All, phase(S1, d.phi1)),
        (Reach::All, phase(S2, d.phi3)),
        (
            Reach::All,
            splitter(setup.bs_a.t, setup.bs_a.r, [S1, S2], [OUT_A, MID]),
        ),
        (Reach::All, phase(MID, d.phi2)),
        (
            Reach::All,
            splitter(setup.bs_b.t, setup.bs_b.r, [MID, S3], [OUT_B, OUT_C]),
        ),
        (
            Reach::UpTo(1),
            absorber(
                Amplitude::from_polar(o1.transmissivity(), o1.phase()),
                o1.reflection(),
                IDLER,
                V1,
            ),
        ),
        (
            Reach::UpTo(2),
            absorber(
                Amplitude::from_polar(o2.transmissivity(), o2.phase()),
                o2.reflection(),
                IDLER,
                V2,
            ),
        ),
    ]
}

/// Output state by explicit matrix evolution of each pump branch.
pub fn oracle_output_state(config: &NetworkConfig) -> Result<FullFockState> {
    let setup = validated(config)?;
    let basis = PairBasis::new();
    let n = setup.gammas.iter().map(|g| g * g).sum::<f64>().sqrt();
    let elems = elements(&setup, config);
    let mut total = vec![zero(); basis.pairs.len()];
    let mut worst = 0.0f64;
    for (k, signal) in [S1, S2, S3].into_iter().enumerate() {
        let crystal = k + 1;
        if setup.gammas[k] == 0.0 {
            continue;
        }
        let mut psi = vec![zero(); basis.pairs.len()];
        psi[basis.of(signal, IDLER)] = Amplitude::new(1.0, 0.0);
        for (reach, u) in &elems {
            if !reach.covers(crystal) {
                continue;
            }
            psi = basis.apply(u, &psi);
            let norm: f64 = psi.iter().map(|a| a.norm_sqr()).sum();
            worst = worst.max((norm - 1.0).abs());
        }
        let w = setup.gammas[k] / n;
        for (t, p) in total.iter_mut().zip(&psi) {
            *t += w * p;
        }
    }
    Ok(FullFockState {
        pairs: basis.pairs,
        amplitudes: total,
        max_step_norm_error: worst,
    })
}

/// Detection probabilities via `ρ = |ψ⟩⟨ψ|` and `Σ_e ⟨e|ρ|e⟩` over the
/// environment occupations `e` of `v1`, `v2`.
pub fn oracle_probabilities(config: &NetworkConfig) -> Result<ProbabilityReport> {
    let psi = oracle_output_state(config)?;
    let dim = psi.dimension();
    let rho: Vec<Vec<Amplitude>> = (0..dim)
        .map(|r| {
            (0..dim)
                .map(|c| psi.amplitudes[r] * psi.amplitudes[c].conj())
                .collect()
        })
        .collect();

    // Split each basis pair into its system modes and environment modes.
    let split = |&(i, j): &(usize, usize)| -> (Vec<usize>, Vec<usize>) {
        let mut sys = Vec::new();
        let mut env = Vec::new();
        for m in [i, j] {
            if ENV.contains(&m) {
                env.push(m);
            } else {
                sys.push(m);
            }
        }
        (sys, env)
    };
    let parts: Vec<_> = psi.pairs.iter().map(split).collect();
    let mut reduced: BTreeMap<(Vec<usize>, Vec<usize>), Amplitude> = BTreeMap::new();
    for a in 0..dim {
        for b in 0..dim {
            if parts[a].1 == parts[b].1 {
                *reduced
                    .entry((parts[a].0.clone(), parts[b].0.clone()))
                    .or_insert_with(zero) += rho[a][b];
            }
        }
    }

    let count = |sys: &[usize], mode: usize| sys.iter().filter(|&&m| m == mode).count() as f64;
    let mut singles = [0.0; 4];
    let mut pairs = [0.0; 3];
    let detectors = [OUT_A, OUT_B, OUT_C, IDLER];
    for ((row, col), value) in &reduced {
        if row != col {
            continue;
        }
        let p = value.re;
        for (s, &mode) in singles.iter_mut().zip(&detectors) {
            *s += count(row, mode) * p;
        }
        for (c, &mode) in pairs.iter_mut().zip(&detectors[..3]) {
            *c += count(row, mode) * count(row, IDLER) * p;
        }
    }
    let n2: f64 = config.gammas.iter().map(|g| g * g).sum();
    Ok(ProbabilityReport::from_rates(
        Rates {
            singles: Singles {
                a: singles[0],
                b: singles[1],
                c: singles[2],
                i: singles[3],
            },
            coincidences: Coincidences {
                ai: pairs[0],
                bi: pairs[1],
                ci: pairs[2],
            },
        },
        n2,
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObservableDiff {
    pub observable: &'static str,
    pub fast: f64,
    pub oracle: f64,
    pub abs_diff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiffReport {
    pub diffs: Vec<ObservableDiff>,
    pub tolerance: f64,
}

impl DiffReport {
    pub fn max_diff(&self) -> f64 {
        self.diffs.iter().map(|d| d.abs_diff).fold(0.0, f64::max)
    }

    pub fn passed(&self) -> bool {
        self.diffs.iter().all(|d| d.abs_diff <= self.tolerance)
    }
}

/// Per-observable absolute differences between two reports.
pub fn compare(fast: &ProbabilityReport, oracle: &ProbabilityReport, tol: f64) -> DiffReport {
    let diffs = OBSERVABLES
        .iter()
        .zip(fast.observables().into_iter().zip(oracle.observables()))
        .map(|(&observable, (f, o))| ObservableDiff {
            observable,
            fast: f,
            oracle: o,
            abs_diff: (f - o).abs(),
        })
        .collect();
    DiffReport {
        diffs,
        tolerance: tol,
    }
}

/// Largest amplitude mismatch between a fast-path state (over `modes`) and
/// the oracle state, matching modes by name. Pairs touching modes the oracle
/// does not know are compared against zero.
pub fn max_amplitude_diff(
    fast: &TwoPhotonState,
    modes: &ModeRegistry,
    oracle: &FullFockState,
) -> f64 {
    let mut worst = 0.0f64;
    let mut seen = Vec::new();
    for (pair, amp) in fast.iter() {
        let (a, b) = (modes.name(pair.first()), modes.name(pair.second()));
        let reference = oracle.amplitude(a, b).unwrap_or_default();
        worst = worst.max((amp - reference).norm());
        seen.push((a.to_owned(), b.to_owned()));
    }
    for (&(i, j), amp) in oracle.pairs.iter().zip(&oracle.amplitudes) {
        let (a, b) = (ORACLE_MODES[i], ORACLE_MODES[j]);
        let covered = seen
            .iter()
            .any(|(x, y)| (x == a && y == b) || (x == b && y == a));
        if !covered {
            worst = worst.max(amp.norm());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn basis_dimension() {
        // C(M + 1, 2) with M = 10.
        assert_eq!(PairBasis::new().pairs.len(), 55);
    }

    #[test]
    fn element_matrices_are_unitary() {
        let cfg = NetworkConfig {
            object1: ObjectSpec::new(0.3, 1.0).unwrap(),
            ..Default::default()
        };
        let setup = validated(&cfg).unwrap();
        for (_, u) in elements(&setup, &cfg) {
            for a in 0..M {
                for b in 0..M {
                    let dot: Amplitude = (0..M).map(|r| u[r][a].conj() * u[r][b]).sum();
                    let expected = if a == b { 1.0 } else { 0.0 };
                    assert!((dot - Amplitude::new(expected, 0.0)).norm() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn splitter_on_photon_pair_preserves_norm() {
        let basis = PairBasis::new();
        let mut psi = vec![zero(); basis.pairs.len()];
        psi[basis.of(S1, IDLER)] = Amplitude::new(1.0, 0.0);
        let bs = BeamSplitterSpec::balanced();
        let out = basis.apply(&splitter(bs.t, bs.r, [S1, S2], [OUT_A, MID]), &psi);
        let norm: f64 = out.iter().map(|a| a.norm_sqr()).sum();
        assert!((norm - 1.0).abs() < 1e-15);
        assert!((out[basis.of(OUT_A, IDLER)] - Amplitude::new(0.0, FRAC_1_SQRT_2)).norm() < 1e-15);
    }

    #[test]
    fn splitter_bunches_two_photons() {
        // Hong-Ou-Mandel: |1,1⟩ on a balanced splitter leaves no coincidence.
        let basis = PairBasis::new();
        let mut psi = vec![zero(); basis.pairs.len()];
        psi[basis.of(S1, S2)] = Amplitude::new(1.0, 0.0);
        let bs = BeamSplitterSpec::balanced();
        let out = basis.apply(&splitter(bs.t, bs.r, [S1, S2], [OUT_A, MID]), &psi);
        assert!(out[basis.of(OUT_A, MID)].norm() < 1e-15);
        assert!((out[basis.of(OUT_A, OUT_A)].norm_sqr() - 0.5).abs() < 1e-15);
        let norm: f64 = out.iter().map(|a| a.norm_sqr()).sum();
        assert!((norm - 1.0).abs() < 1e-15);
    }

    #[test]
    fn third_crystal_alone() {
        let st = oracle_output_state(&NetworkConfig {
            gammas: [0.0, 0.0, 1.0],
            ..Default::default()
        })
        .unwrap();
        assert!(
            (st.amplitude("B", "I").unwrap() - Amplitude::new(FRAC_1_SQRT_2, 0.0)).norm() < 1e-15
        );
        assert!(
            (st.amplitude("C", "I").unwrap() - Amplitude::new(0.0, FRAC_1_SQRT_2)).norm() < 1e-15
        );
        assert!((st.norm_squared() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn default_probabilities() {
        let r = oracle_probabilities(&NetworkConfig::default()).unwrap();
        assert!((r.singles.a - 1.0 / 3.0).abs() < 1e-9);
        assert!((r.singles.i - 1.0).abs() < 1e-12);
    }

    #[test]
    fn both_objects_opaque() {
        let r = oracle_probabilities(&NetworkConfig {
            gammas: [1.0, 1.0, 0.0],
            object1: ObjectSpec::new(0.0, 0.0).unwrap(),
            object2: ObjectSpec::new(0.0, 0.0).unwrap(),
            ..Default::default()
        })
        .unwrap();
        assert!(r.singles.i.abs() < 1e-15);
        assert!((r.singles.a + r.singles.b + r.singles.c - 1.0).abs() < 1e-12);
    }

    #[test]
    fn compare_reflexive_and_sensitive() {
        let r = oracle_probabilities(&NetworkConfig::default()).unwrap();
        let same = compare(&r, &r, 1e-9);
        assert!(same.passed());
        assert_eq!(same.max_diff(), 0.0);
        let mut bad = r;
        bad.coincidences.bi += 1e-6;
        assert!(!compare(&bad, &r, 1e-9).passed());
    }

    #[test]
    fn dump_format() {
        let st = oracle_output_state(&NetworkConfig {
            gammas: [0.0, 0.0, 1.0],
            ..Default::default()
        })
        .unwrap();
        let dump = st.dump();
        assert_eq!(dump.lines().count(), 55);
        assert_eq!(dump.lines().next().unwrap(), "s1 s1 0 0");
        assert!(dump.contains("I B 0.70710678118654757 0\n"));
    }

    #[test]
    fn dead_network_rejected() {
        assert_eq!(
            oracle_output_state(&NetworkConfig {
                gammas: [0.0; 3],
                ..Default::default()
            }),
            Err(Error::AllCrystalsDead)
        );
    }
}
