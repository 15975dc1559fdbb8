use std::fmt;

/// Three-valued diagnosis used by detectors and certifiers.
///
/// `Positive` and `Negative` are definite answers at the checked tolerance;
/// `Undetermined` means the available (finite) evidence cannot decide.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    Positive,
    Negative,
    Undetermined,
}

impl Verdict {
    pub fn is_positive(self) -> bool {
        self == Verdict::Positive
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Positive => write!(f, "Positive"),
            Verdict::Negative => write!(f, "Negative"),
            Verdict::Undetermined => write!(f, "Undetermined"),
        }
    }
}
