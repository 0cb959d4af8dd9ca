use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),

    #[error("negative power on derived function atom `{0}`")]
    NegativeDerivedPower(String),

    #[error("expression is not invertible in the term language: {0}")]
    NotInvertible(String),

    #[error("exponent is not affine in p, k, n: {0}")]
    NonAffineExponent(String),

    #[error("denominator vanishes after substituting {0}")]
    DenominatorVanishes(String),

    #[error("ambiguous grading: keys {0} and {1} may coincide under the active assumptions")]
    AmbiguousGrading(String, String),

    #[error("resonance: exponent {0} collides with the homogeneous solution")]
    Resonance(String),

    #[error("cannot integrate {0} in V without a logarithm")]
    LogarithmicIntegral(String),

    #[error("`{target}` does not occur linearly with an invertible coefficient in {expr}")]
    NotIsolable { target: String, expr: String },

    #[error("tau is zero: operators of the form d/dx + eta d/dV are outside the classification")]
    TauZero,

    #[error("column {0} is not a function of p alone")]
    ColumnNotReducible(String),

    #[error("target and column are identical ({0}); they coincide for every p")]
    AlwaysCoincide(String),

    #[error("unbound function `{0}` during numeric evaluation")]
    UnboundFunction(String),

    #[error("pole: denominator {0:e} too small")]
    Pole(f64),

    #[error("non-finite value during evaluation")]
    NonFinite,

    #[error("numerical instability: |V| exceeded {0:e}")]
    Unstable(f64),

    #[error("positivity violated: V = {0} where a positive field is required")]
    Positivity(f64),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("transformed lattice does not overlap the source field")]
    EmptyOverlap,

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("step `{step}` failed: {detail}")]
    StepFailed { step: String, detail: String },
}
