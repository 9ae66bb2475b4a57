use core::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CoreError {
    TooManyElements(usize),
    ElementOutOfRange { element: usize, n: usize },
    Cyclic,
    NotTransitive,
    NotReduced,
    NotTopological,
    AlreadyComparable { u: usize, v: usize },
    Truncated { expected: usize, got: usize },
    NonZeroPadding,
    InvalidBandwidth(&'static str),
    ParseBandwidth,
}

impl fmt::Display for CoreError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoreError::TooManyElements(n) => {
                write!(f, "{n} elements exceed the supported maximum of {}", crate::MAX_N)
            }
            CoreError::ElementOutOfRange { element, n } => {
                write!(f, "element {element} out of range for a poset on {n} elements")
            }
            CoreError::Cyclic => f.write_str("relation contains a cycle"),
            CoreError::NotTransitive => f.write_str("relation is not a partial order"),
            CoreError::NotReduced => f.write_str("edge set contains a transitive edge"),
            CoreError::NotTopological => f.write_str("edge (i, j) with i >= j"),
            CoreError::AlreadyComparable { u, v } => {
                write!(f, "elements {u} and {v} are already comparable")
            }
            CoreError::Truncated { expected, got } => {
                write!(f, "expected {expected} bytes, got {got}")
            }
            CoreError::NonZeroPadding => f.write_str("padding bits are not zero"),
            CoreError::InvalidBandwidth(why) => write!(f, "invalid efficiency bandwidth: {why}"),
            CoreError::ParseBandwidth => {
                f.write_str("bandwidth must be a rational like 5/100 or a decimal like 0.05")
            }
        }
    }
}

impl core::error::Error for CoreError {}
