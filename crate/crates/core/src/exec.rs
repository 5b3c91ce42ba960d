//! Data-parallel helpers with a sequential fallback.
//!
//! Every per-point and per-`l` loop in the crate goes through [`Execution`].
//! Results are always collected in input order, so reductions downstream are
//! identical in both modes. Without the `parallel` feature the parallel mode
//! silently runs sequentially.

use crate::error::Result;
use serde::Serialize;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "sequential" => Some(Execution::Sequential),
            "parallel" => Some(Execution::Parallel),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Execution::Sequential => "sequential",
            Execution::Parallel => "parallel",
        }
    }

    /// Maps `f` over `items`, preserving order.
    pub fn map<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => {
                use rayon::prelude::*;
                items.par_iter().map(f).collect()
            }
            _ => items.iter().map(f).collect(),
        }
    }

    /// Fallible map. On failure the error of the first failing item (in input
    /// order) is returned, independent of scheduling.
    pub fn try_map<T, R, F>(self, items: &[T], f: F) -> Result<Vec<R>>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> Result<R> + Sync + Send,
    {
        self.map(items, f).into_iter().collect()
    }
}

/// Maximum of a slice, ignoring NaN; 0 for an empty slice.
pub fn max_of(values: &[f64]) -> f64 {
    values.iter().copied().filter(|v| !v.is_nan()).fold(0.0, f64::max)
}
