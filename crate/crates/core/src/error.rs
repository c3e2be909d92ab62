use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("mode `{0}` is already registered")]
    DuplicateMode(String),

    #[error("beam splitter `{label}` is not unitary: {identity} off by {deviation:e}")]
    NonUnitary {
        label: String,
        identity: &'static str,
        deviation: f64,
    },

    #[error("transmissivity {0} outside [0, 1]")]
    InvalidTransmissivity(f64),

    #[error("invalid amplitude: {0}")]
    InvalidAmplitude(String),

    #[error("invalid wiring: {0}")]
    InvalidWiring(String),

    #[error("all crystals have zero pair amplitude")]
    AllCrystalsDead,

    #[error("invalid detector `{0}`")]
    InvalidDetector(String),

    #[error("condition requires T1 = {required_t1}, an object cannot amplify")]
    Infeasible { required_t1: f64 },

    #[error("beam splitter a has a vanishing coefficient (|T| = {t}, |R| = {r})")]
    DegenerateSplitter { t: f64, r: f64 },

    #[error("unknown sweep parameter `{0}`")]
    UnknownParameter(String),

    #[error("invisibility condition not satisfied (residual {0:e})")]
    ConditionNotSatisfied(f64),

    #[error("empty grid")]
    EmptyGrid,
}
