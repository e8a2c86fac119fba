//! Global coordinate charts.
//!
//! Everything in this crate lives on a single chart of `R^m` with named
//! coordinates. Charts are cheap to clone and compared by coordinate names,
//! so two independently built charts with the same names are interchangeable.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Names that cannot be used for coordinates: `i` is the imaginary unit,
/// `c` the formal central constant, `t` the reserved fibre coordinate.
pub const RESERVED_NAMES: [&str; 3] = ["i", "c", "t"];

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ChartError {
    #[error("reserved symbol `{0}` cannot be a coordinate name")]
    ReservedSymbol(String),
    #[error("duplicate coordinate name `{0}`")]
    DuplicateCoordinate(String),
    #[error("chart must have at least one coordinate")]
    Empty,
}

/// An ordered list of coordinate names for one chart of `R^m`.
#[derive(Clone, PartialEq, Eq)]
pub struct Chart {
    names: Arc<Vec<String>>,
}

impl Chart {
    pub fn new<S: AsRef<str>>(names: &[S]) -> Result<Self, ChartError> {
        if names.is_empty() {
            return Err(ChartError::Empty);
        }
        let mut seen = Vec::new();
        for n in names {
            let n = n.as_ref();
            if RESERVED_NAMES.contains(&n) {
                return Err(ChartError::ReservedSymbol(n.to_string()));
            }
            if seen.iter().any(|s: &String| s == n) {
                return Err(ChartError::DuplicateCoordinate(n.to_string()));
            }
            seen.push(n.to_string());
        }
        Ok(Chart { names: Arc::new(seen) })
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// The chart of the total space of the trivial circle bundle: the same
    /// base coordinates with the fibre coordinate `t` appended last.
    pub fn with_fibre(&self) -> Chart {
        let mut names: Vec<String> = self.names.as_ref().clone();
        names.push("t".to_string());
        Chart { names: Arc::new(names) }
    }

    /// Index of the fibre coordinate on a chart built by [`Chart::with_fibre`].
    pub fn fibre_index(&self) -> Option<usize> {
        let last = self.names.len() - 1;
        (self.names[last] == "t").then_some(last)
    }
}

impl fmt::Debug for Chart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Chart({})", self.names.join(","))
    }
}

impl fmt::Display for Chart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.names.join(" "))
    }
}
