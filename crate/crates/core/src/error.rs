use thiserror::Error;

/// Failures raised while building or evaluating the geometric constructions.
#[derive(Debug, Error)]
pub enum GeomError {
    #[error("point {point:?} is outside the chart domain ({detail})")]
    Domain { point: Vec<f64>, detail: String },

    #[error("degenerate point {point:?}: singular value {sigma:e} is within the ambiguous band around the kernel threshold")]
    Degenerate { point: Vec<f64>, sigma: f64 },

    #[error("numerical failure at point {point:?}{}: {detail}", fmt_l(.l))]
    Numerical {
        point: Vec<f64>,
        l: Option<f64>,
        detail: String,
    },

    #[error("inconsistent Lie algebra: {0}")]
    Algebra(String),

    #[error("unsupported C^p order {0} (only p = 0 and p = 1 are available)")]
    UnsupportedOrder(u32),

    #[error("configuration error: {0}")]
    Config(String),
}

fn fmt_l(l: &Option<f64>) -> String {
    match l {
        Some(l) => format!(" (l = {l})"),
        None => String::new(),
    }
}

impl GeomError {
    pub(crate) fn numerical(point: &[f64], detail: impl Into<String>) -> Self {
        GeomError::Numerical {
            point: point.to_vec(),
            l: None,
            detail: detail.into(),
        }
    }

    /// Attach the deformation parameter to a numerical failure that does not carry one yet.
    pub fn with_l(self, l: f64) -> Self {
        match self {
            GeomError::Numerical {
                point,
                l: None,
                detail,
            } => GeomError::Numerical {
                point,
                l: Some(l),
                detail,
            },
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, GeomError>;
