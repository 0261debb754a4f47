use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Operand shapes do not fit the operation.
    DimensionMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },
    NotSquare {
        rows: usize,
        cols: usize,
    },
    NotHermitian,
    /// Cholesky failed even after diagonal loading.
    Singular,
    OddBitCount(usize),
    NotConstellationPoint,
    LengthMismatch {
        expected: usize,
        found: usize,
    },
    InvalidProbability(f64),
    InvalidParameter(&'static str),
    Unsupported(&'static str),
    /// The power budget cannot be met with equality by any multiplier.
    ConstraintInfeasible,
    /// A code with zero (or non-finite) power cannot be normalized.
    DegenerateCode,
    /// The running squared error blew up during adaptation.
    Diverged {
        iteration: usize,
    },
    MalformedPacket {
        expected: usize,
        found: usize,
    },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch { op, left, right } => write!(
                f,
                "{op}: dimension mismatch ({}x{} vs {}x{})",
                left.0, left.1, right.0, right.1
            ),
            Error::NotSquare { rows, cols } => write!(f, "matrix is not square ({rows}x{cols})"),
            Error::NotHermitian => f.write_str("matrix is not Hermitian"),
            Error::Singular => f.write_str("matrix is singular or not positive definite"),
            Error::OddBitCount(n) => write!(f, "4-QAM needs an even number of bits, got {n}"),
            Error::NotConstellationPoint => {
                f.write_str("symbol is not a 4-QAM constellation point")
            }
            Error::LengthMismatch { expected, found } => {
                write!(f, "length mismatch: expected {expected}, found {found}")
            }
            Error::InvalidProbability(p) => write!(f, "probability {p} outside [0, 1]"),
            Error::InvalidParameter(what) => write!(f, "invalid parameter: {what}"),
            Error::Unsupported(what) => write!(f, "unsupported configuration: {what}"),
            Error::ConstraintInfeasible => {
                f.write_str("power constraint cannot be met for any Lagrange multiplier")
            }
            Error::DegenerateCode => f.write_str("randomized code has zero power"),
            Error::Diverged { iteration } => {
                write!(f, "adaptation diverged at iteration {iteration}")
            }
            Error::MalformedPacket { expected, found } => {
                write!(f, "feedback packet has {found} bits, expected {expected}")
            }
        }
    }
}

impl core::error::Error for Error {}
