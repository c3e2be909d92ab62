//! Wiring of the three-crystal interferometer and propagation of each pump
//! branch through it.
//!
//! The network is a directed acyclic graph whose edges carry complex
//! amplitudes. A photon injected at a source port reaches each output mode
//! with the sum over paths of the product of edge amplitudes; this is
//! accumulated by a single walk in topological order.
//!
//! ```text
//!  s1 ─φ1─┐                          ┌─ A
//!         ├─ BS_a ──────────────────┤
//!  s2 ─φ3─┘                          └─φ2─┐
//!                                         ├─ BS_b ─┬─ B
//!  s3 ────────────────────────────────────┘        └─ C
//!
//!  i1 ─[obj1]─┬─(i2 joins)─[obj2]─┬─(i3 joins)─ I
//!             └─ v1               └─ v2
//! ```
//!
//! The aligned idler beams are modelled as one spatial mode: `i2` is emitted
//! into the beam leaving object 1, and `i3` into the beam leaving object 2.

use petgraph::algo::toposort;
use petgraph::graph::{DiGraph, NodeIndex};
use petgraph::visit::EdgeRef;
use petgraph::Direction;
use serde::{Deserialize, Serialize};

use crate::algebra::{Amplitude, LinearForm, ModeId, ModeRegistry, TwoPhotonState};
use crate::elements::{spdc_split, BeamSplitterSpec, CrystalSpec, ObjectSpec, PhaseSpec};
use crate::tolerance::CHECK;
use crate::{Error, Result};

/// Signal-path delays: `phi1` on s1 before BS_a, `phi2` between BS_a and
/// BS_b, `phi3` on s2 before BS_a.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Delays {
    pub phi1: f64,
    pub phi2: f64,
    pub phi3: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    /// Pair amplitudes of crystals 1..3; zero disables a crystal.
    pub gammas: [f64; 3],
    pub bs_a: BeamSplitterSpec,
    pub bs_b: BeamSplitterSpec,
    pub object1: ObjectSpec,
    pub object2: ObjectSpec,
    pub delays: Delays,
}

impl Default for NetworkConfig {
    /// Unit pair amplitudes, balanced splitters, no objects, no delays.
    fn default() -> Self {
        Self {
            gammas: [1.0; 3],
            bs_a: BeamSplitterSpec::balanced().with_label("a"),
            bs_b: BeamSplitterSpec::balanced().with_label("b"),
            object1: ObjectSpec::absent(),
            object2: ObjectSpec::absent(),
            delays: Delays::default(),
        }
    }
}

impl NetworkConfig {
    /// `N = √(γ₁² + γ₂² + γ₃²)`
    pub fn normalization(&self) -> f64 {
        self.gammas.iter().map(|g| g * g).sum::<f64>().sqrt()
    }
}

/// Ids of the externally visible modes, in registration order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Modes {
    pub pumps: [ModeId; 3],
    pub a: ModeId,
    pub b: ModeId,
    pub c: ModeId,
    pub idler: ModeId,
    pub v1: ModeId,
    pub v2: ModeId,
    pub u1: ModeId,
    pub u2: ModeId,
}

impl Modes {
    pub fn signals(&self) -> [ModeId; 3] {
        [self.a, self.b, self.c]
    }

    pub fn environment(&self) -> [ModeId; 2] {
        [self.v1, self.v2]
    }
}

/// One pump photon's fate: `a†_{p_k} → γ_k · signal · idler`.
#[derive(Debug, Clone, PartialEq)]
pub struct PumpBranch {
    pub crystal: usize,
    pub signal: LinearForm,
    pub idler: LinearForm,
    pub weight: f64,
}

#[derive(Debug, Clone)]
pub struct Network {
    config: NetworkConfig,
    crystals: [CrystalSpec; 3],
    modes: ModeRegistry,
    ids: Modes,
    ports: ModeRegistry,
    graph: DiGraph<ModeId, Amplitude>,
    order: Vec<NodeIndex>,
    sources: [(ModeId, ModeId); 3],
    sinks: Vec<(NodeIndex, ModeId)>,
}

const OUTPUT_PORTS: [&str; 6] = ["A", "B", "C", "I", "v1", "v2"];

struct Wiring {
    ports: ModeRegistry,
    graph: DiGraph<ModeId, Amplitude>,
}

impl Wiring {
    fn node(&mut self, name: &str) -> Result<NodeIndex> {
        let id = self.ports.register(name)?;
        let node = self.graph.add_node(id);
        debug_assert_eq!(node.index(), id.index());
        Ok(node)
    }

    fn edge(&mut self, from: NodeIndex, to: NodeIndex, amp: Amplitude) {
        self.graph.add_edge(from, to, amp);
    }

    /// Two-input, two-output splitter: `in1 → r·out1 + t·out2`,
    /// `in2 → t·out1 + r·out2`.
    fn splitter(&mut self, bs: &BeamSplitterSpec, ins: [NodeIndex; 2], outs: [NodeIndex; 2]) {
        self.edge(ins[0], outs[0], bs.r);
        self.edge(ins[0], outs[1], bs.t);
        self.edge(ins[1], outs[0], bs.t);
        self.edge(ins[1], outs[1], bs.r);
    }

    /// Object on a beam: transmitted to `through`, reflected into `env`.
    /// The vacuum input port of the object carries no photon and is omitted.
    fn object(&mut self, obj: &ObjectSpec, input: NodeIndex, through: NodeIndex, env: NodeIndex) {
        self.edge(input, through, obj.transmitted());
        self.edge(input, env, obj.reflection());
    }
}

impl Network {
    pub fn build(config: NetworkConfig) -> Result<Self> {
        let crystals = [
            CrystalSpec::new(config.gammas[0])?,
            CrystalSpec::new(config.gammas[1])?,
            CrystalSpec::new(config.gammas[2])?,
        ];
        // Splitters and objects may come from deserialized input; re-check them.
        let bs_a = BeamSplitterSpec::labelled("a", config.bs_a.t, config.bs_a.r)?;
        let bs_b = BeamSplitterSpec::labelled("b", config.bs_b.t, config.bs_b.r)?;
        let object1 = ObjectSpec::new(config.object1.transmissivity(), config.object1.phase())?;
        let object2 = ObjectSpec::new(config.object2.transmissivity(), config.object2.phase())?;

        let mut modes = ModeRegistry::new();
        let mut reg = |n: &str| modes.register(n);
        let ids = Modes {
            pumps: [reg("p1")?, reg("p2")?, reg("p3")?],
            a: reg("A")?,
            b: reg("B")?,
            c: reg("C")?,
            idler: reg("I")?,
            v1: reg("v1")?,
            v2: reg("v2")?,
            u1: reg("u1")?,
            u2: reg("u2")?,
        };

        let mut w = Wiring {
            ports: ModeRegistry::new(),
            graph: DiGraph::new(),
        };
        let one = Amplitude::new(1.0, 0.0);
        let s = [w.node("s1")?, w.node("s2")?, w.node("s3")?];
        let i = [w.node("i1")?, w.node("i2")?, w.node("i3")?];
        let bsa_in = [w.node("bs_a.in1")?, w.node("bs_a.in2")?];
        let bsa_through = w.node("bs_a.out2")?;
        let bsb_in = [w.node("bs_b.in1")?, w.node("bs_b.in2")?];
        let obj1_in = w.node("object1.in")?;
        let idler_mid = w.node("idler.mid")?;
        let obj2_in = w.node("object2.in")?;
        let idler_late = w.node("idler.late")?;
        let mut out = Vec::new();
        for name in OUTPUT_PORTS {
            out.push(w.node(name)?);
        }
        let [a, b, c, idler, v1, v2] = [out[0], out[1], out[2], out[3], out[4], out[5]];

        let d = config.delays;
        w.edge(s[0], bsa_in[0], PhaseSpec::new(d.phi1).factor());
        w.edge(s[1], bsa_in[1], PhaseSpec::new(d.phi3).factor());
        w.splitter(&bs_a, bsa_in, [a, bsa_through]);
        w.edge(bsa_through, bsb_in[0], PhaseSpec::new(d.phi2).factor());
        w.edge(s[2], bsb_in[1], one);
        w.splitter(&bs_b, bsb_in, [b, c]);

        w.edge(i[0], obj1_in, one);
        w.object(&object1, obj1_in, idler_mid, v1);
        w.edge(i[1], idler_mid, one);
        w.edge(idler_mid, obj2_in, one);
        w.object(&object2, obj2_in, idler_late, v2);
        w.edge(i[2], idler_late, one);
        w.edge(idler_late, idler, one);

        let order = toposort(&w.graph, None).map_err(|cycle| {
            Error::InvalidWiring(format!("cycle through {:?}", cycle.node_id()))
        })?;
        let mut sinks = Vec::new();
        for node in w.graph.node_indices() {
            if w.graph
                .edges_directed(node, Direction::Outgoing)
                .next()
                .is_none()
            {
                let name = w.ports.name(w.graph[node]);
                let mode = modes
                    .id(name)
                    .ok_or_else(|| Error::InvalidWiring(format!("port `{name}` leads nowhere")))?;
                sinks.push((node, mode));
            }
        }
        let port = |n: NodeIndex| w.graph[n];
        let sources = [
            (port(s[0]), port(i[0])),
            (port(s[1]), port(i[1])),
            (port(s[2]), port(i[2])),
        ];

        Ok(Self {
            config: NetworkConfig {
                bs_a,
                bs_b,
                object1,
                object2,
                ..config
            },
            crystals,
            modes,
            ids,
            ports: w.ports,
            graph: w.graph,
            order,
            sources,
            sinks,
        })
    }

    pub fn config(&self) -> &NetworkConfig {
        &self.config
    }

    pub fn modes(&self) -> &ModeRegistry {
        &self.modes
    }

    pub fn ids(&self) -> &Modes {
        &self.ids
    }

    /// Internal ports of the wiring graph (sources, junctions, outputs).
    pub fn ports(&self) -> &ModeRegistry {
        &self.ports
    }

    pub fn normalization(&self) -> f64 {
        self.config.normalization()
    }

    /// Pushes a superposition over internal ports to the output modes.
    pub fn transfer(&self, form: &LinearForm) -> LinearForm {
        let mut acc = vec![Amplitude::default(); self.graph.node_count()];
        for (port, amp) in form.iter() {
            acc[port.index()] += amp;
        }
        for &node in &self.order {
            let here = acc[node.index()];
            if here == Amplitude::default() {
                continue;
            }
            for edge in self.graph.edges_directed(node, Direction::Outgoing) {
                acc[edge.target().index()] += here * edge.weight();
            }
        }
        LinearForm::from_terms(
            self.sinks
                .iter()
                .map(|&(node, mode)| (mode, acc[node.index()])),
        )
    }

    /// Field transformation of pump `k` (1-based).
    ///
    /// Panics if `k` is not 1, 2 or 3.
    pub fn propagate_pump(&self, k: usize) -> PumpBranch {
        assert!((1..=3).contains(&k), "crystal index {k} out of range 1..=3");
        let (s_seed, i_seed) = self.sources[k - 1];
        let (signal, idler, weight) = spdc_split(&self.crystals[k - 1], s_seed, i_seed)
            .expect("source ports are distinct by construction");
        PumpBranch {
            crystal: k,
            signal: self.transfer(&signal),
            idler: self.transfer(&idler),
            weight,
        }
    }

    pub fn branches(&self) -> [PumpBranch; 3] {
        [
            self.propagate_pump(1),
            self.propagate_pump(2),
            self.propagate_pump(3),
        ]
    }

    /// Contribution of crystal `k`, already divided by `N`.
    pub fn branch_state(&self, k: usize) -> Result<TwoPhotonState> {
        let n = self.live_normalization()?;
        let br = self.propagate_pump(k);
        Ok(TwoPhotonState::bilinear_product(
            &br.signal,
            &br.idler,
            Amplitude::new(br.weight / n, 0.0),
        ))
    }

    /// Output state without the `1/N` factor, in the form the proportional
    /// rate expressions are written in.
    pub fn unnormalized_output_state(&self) -> Result<TwoPhotonState> {
        self.live_normalization()?;
        Ok(self
            .branches()
            .iter()
            .filter(|br| br.weight != 0.0)
            .map(|br| {
                TwoPhotonState::bilinear_product(
                    &br.signal,
                    &br.idler,
                    Amplitude::new(br.weight, 0.0),
                )
            })
            .fold(TwoPhotonState::zero(), |acc, st| acc + st))
    }

    /// Normalized two-photon output state.
    pub fn output_state(&self) -> Result<TwoPhotonState> {
        let n = self.live_normalization()?;
        Ok(self
            .unnormalized_output_state()?
            .scaled(Amplitude::new(1.0 / n, 0.0)))
    }

    fn live_normalization(&self) -> Result<f64> {
        if self.crystals.iter().all(CrystalSpec::is_dead) {
            return Err(Error::AllCrystalsDead);
        }
        Ok(self.normalization())
    }

    /// Checks that every branch leaves its signal and idler forms normalized.
    pub fn check_branch_unitarity(&self) -> bool {
        self.branches().iter().all(|br| {
            (br.signal.norm_squared() - 1.0).abs() <= CHECK
                && (br.idler.norm_squared() - 1.0).abs() <= CHECK
        })
    }
}

pub fn build_network(config: NetworkConfig) -> Result<Network> {
    Network::build(config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};

    fn c(re: f64, im: f64) -> Amplitude {
        Amplitude::new(re, im)
    }

    fn close(a: Amplitude, b: Amplitude) -> bool {
        (a - b).norm() < 1e-14
    }

    #[test]
    fn default_network_has_eleven_modes() {
        let net = build_network(NetworkConfig::default()).unwrap();
        assert_eq!(net.modes().len(), 11);
        let names: Vec<_> = net.modes().iter().map(|(_, n)| n.to_owned()).collect();
        assert_eq!(
            names,
            ["p1", "p2", "p3", "A", "B", "C", "I", "v1", "v2", "u1", "u2"]
        );
    }

    #[test]
    fn third_crystal_can_be_disabled() {
        let net = build_network(NetworkConfig {
            gammas: [1.0, 1.0, 0.0],
            ..Default::default()
        })
        .unwrap();
        assert_eq!(net.propagate_pump(3).weight, 0.0);
        assert!((net.output_state().unwrap().norm_squared() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn out_of_range_object_rejected() {
        // A deserialized config can carry an unchecked object.
        let err = build_network(NetworkConfig {
            object1: ObjectSpec::unchecked(1.5, 0.0),
            ..Default::default()
        })
        .unwrap_err();
        assert_eq!(err, Error::InvalidTransmissivity(1.5));
    }

    #[test]
    fn third_pump_branch() {
        let net = build_network(NetworkConfig::default()).unwrap();
        let ids = *net.ids();
        let br = net.propagate_pump(3);
        assert_eq!(br.signal.len(), 2);
        assert!(close(br.signal.get(ids.b), c(FRAC_1_SQRT_2, 0.0)));
        assert!(close(br.signal.get(ids.c), c(0.0, FRAC_1_SQRT_2)));
        assert_eq!(br.idler, LinearForm::unit(ids.idler));
    }

    #[test]
    fn first_pump_branch_balanced_transparent() {
        let net = build_network(NetworkConfig::default()).unwrap();
        let ids = *net.ids();
        let br = net.propagate_pump(1);
        assert!(close(br.signal.get(ids.a), c(0.0, FRAC_1_SQRT_2)));
        assert!(close(br.signal.get(ids.b), c(0.0, 0.5)));
        assert!(close(br.signal.get(ids.c), c(0.5, 0.0)));
        assert_eq!(br.idler, LinearForm::unit(ids.idler));
    }

    #[test]
    fn first_pump_branch_opaque_object() {
        let net = build_network(NetworkConfig {
            object1: ObjectSpec::new(0.0, 0.3).unwrap(),
            ..Default::default()
        })
        .unwrap();
        let ids = *net.ids();
        let br = net.propagate_pump(1);
        assert_eq!(br.idler, LinearForm::from_terms([(ids.v1, c(0.0, 1.0))]));
    }

    #[test]
    fn default_output_amplitudes() {
        let net = build_network(NetworkConfig::default()).unwrap();
        let ids = *net.ids();
        let st = net.output_state().unwrap();
        let s6 = 6f64.sqrt();
        assert!(close(st.get(ids.a, ids.idler), c(1.0 / s6, 1.0 / s6)));
        assert!((st.get(ids.a, ids.idler).norm_sqr() - 1.0 / 3.0).abs() < 1e-15);
        assert!((st.get(ids.b, ids.idler).norm_sqr() - (1.0 - FRAC_1_SQRT_2) / 3.0).abs() < 1e-15);
        assert!((st.get(ids.c, ids.idler).norm_sqr() - (1.0 + FRAC_1_SQRT_2) / 3.0).abs() < 1e-15);
        assert!((st.norm_squared() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_crystal_dark_fringe() {
        let net = build_network(NetworkConfig {
            gammas: [1.0, 1.0, 0.0],
            object1: ObjectSpec::new(1.0, FRAC_PI_2).unwrap(),
            ..Default::default()
        })
        .unwrap();
        let ids = *net.ids();
        assert!(net.output_state().unwrap().get(ids.a, ids.idler).norm() < 1e-15);
    }

    #[test]
    fn opaque_first_object_routes_to_environment() {
        let net = build_network(NetworkConfig {
            gammas: [1.0, 1.0, 0.0],
            object1: ObjectSpec::new(0.0, 0.0).unwrap(),
            ..Default::default()
        })
        .unwrap();
        let ids = *net.ids();
        let st = net.output_state().unwrap();
        // Only crystal 2 reaches (A, I): γ₂ T_a / N.
        assert!(close(st.get(ids.a, ids.idler), c(0.5, 0.0)));
        // γ₁² |R_a|² / N² = 0.5 / 2.
        assert!((st.get(ids.a, ids.v1).norm_sqr() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn all_dead_is_an_error() {
        let net = build_network(NetworkConfig {
            gammas: [0.0; 3],
            ..Default::default()
        })
        .unwrap();
        assert_eq!(net.output_state(), Err(Error::AllCrystalsDead));
    }

    #[test]
    fn negative_gamma_rejected() {
        let err = build_network(NetworkConfig {
            gammas: [1.0, -1.0, 1.0],
            ..Default::default()
        })
        .unwrap_err();
        assert!(matches!(err, Error::InvalidAmplitude(_)));
    }
}
