use crate::error::{GeomError, Result};
use nalgebra::DVector;
use std::f64::consts::TAU;

#[derive(Clone, Debug)]
pub struct Coordinate {
    pub label: &'static str,
    pub lo: f64,
    pub hi: f64,
    /// Periodic coordinates have period `hi - lo` and are never out of domain.
    pub periodic: bool,
}

impl Coordinate {
    pub fn angle(label: &'static str) -> Self {
        Coordinate {
            label,
            lo: 0.0,
            hi: TAU,
            periodic: true,
        }
    }

    pub fn interval(label: &'static str, lo: f64, hi: f64) -> Self {
        Coordinate {
            label,
            lo,
            hi,
            periodic: false,
        }
    }

    pub fn period(&self) -> f64 {
        self.hi - self.lo
    }
}

/// A single coordinate chart. Periodic coordinates live on the universal
/// cover and are reduced only for display.
#[derive(Clone, Debug)]
pub struct Chart {
    coords: Vec<Coordinate>,
}

/// Axis-aligned box used for sampling; periodic axes span a full period.
#[derive(Clone, Debug, PartialEq)]
pub struct Region {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl Chart {
    pub fn new(coords: Vec<Coordinate>) -> Self {
        assert!(!coords.is_empty());
        for c in &coords {
            assert!(c.hi > c.lo, "empty coordinate interval for {}", c.label);
        }
        Chart { coords }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[Coordinate] {
        &self.coords
    }

    pub fn labels(&self) -> Vec<&'static str> {
        self.coords.iter().map(|c| c.label).collect()
    }

    /// Points with every non-periodic coordinate at least `reach` inside the interval.
    pub fn contains_with(&self, x: &DVector<f64>, reach: f64) -> bool {
        x.len() == self.dim()
            && x.iter().all(|v| v.is_finite())
            && self
                .coords
                .iter()
                .zip(x.iter())
                .all(|(c, &v)| c.periodic || (v >= c.lo + reach && v <= c.hi - reach))
    }

    pub fn check(&self, x: &DVector<f64>) -> Result<()> {
        self.check_with(x, 0.0)
    }

    pub fn check_with(&self, x: &DVector<f64>, reach: f64) -> Result<()> {
        if self.contains_with(x, reach) {
            Ok(())
        } else {
            Err(GeomError::Domain {
                point: x.iter().copied().collect(),
                detail: if reach > 0.0 {
                    format!("a stencil of reach {reach:e} leaves the chart")
                } else {
                    "coordinates outside the chart intervals".into()
                },
            })
        }
    }

    /// Difference `b - a` with periodic components reduced to half a period.
    pub fn delta(&self, a: &DVector<f64>, b: &DVector<f64>) -> DVector<f64> {
        DVector::from_fn(self.dim(), |i, _| {
            let d = b[i] - a[i];
            let c = &self.coords[i];
            if c.periodic {
                let p = c.period();
                d - p * (d / p).round()
            } else {
                d
            }
        })
    }

    /// Reduces periodic coordinates into `[lo, hi)`.
    pub fn reduce(&self, x: &DVector<f64>) -> DVector<f64> {
        DVector::from_fn(self.dim(), |i, _| {
            let c = &self.coords[i];
            if c.periodic {
                c.lo + (x[i] - c.lo).rem_euclid(c.period())
            } else {
                x[i]
            }
        })
    }

    /// The sampling box: non-periodic intervals shrunk by `margin` on each side.
    pub fn region(&self, margin: f64) -> Region {
        let (lo, hi) = self
            .coords
            .iter()
            .map(|c| {
                if c.periodic {
                    (c.lo, c.hi)
                } else {
                    (c.lo + margin, c.hi - margin)
                }
            })
            .unzip();
        Region { lo, hi }
    }
}

impl Region {
    pub fn is_empty(&self) -> bool {
        self.lo.iter().zip(&self.hi).any(|(l, h)| h <= l)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn band() -> Chart {
        Chart::new(vec![
            Coordinate::angle("theta"),
            Coordinate::interval("phi", 0.4, std::f64::consts::PI - 0.4),
        ])
    }

    #[test]
    fn periodic_axes_never_leave_domain() {
        let c = band();
        assert!(c.contains_with(&DVector::from_vec(vec![100.0, 1.0]), 0.0));
        assert!(!c.contains_with(&DVector::from_vec(vec![0.0, 0.3]), 0.0));
        assert!(!c.contains_with(&DVector::from_vec(vec![0.0, 0.41]), 0.05));
        assert!(c.check(&DVector::from_vec(vec![0.0, 0.0])).is_err());
    }

    #[test]
    fn delta_unwraps_periodic() {
        let c = band();
        let a = DVector::from_vec(vec![0.1, 1.0]);
        let b = DVector::from_vec(vec![TAU + 0.2, 1.5]);
        let d = c.delta(&a, &b);
        assert!((d[0] - 0.1).abs() < 1e-12 && (d[1] - 0.5).abs() < 1e-15);
        let r = c.reduce(&b);
        assert!((r[0] - 0.2).abs() < 1e-12);
    }

    #[test]
    fn region_respects_margin() {
        let r = band().region(0.05);
        assert_eq!(r.lo[0], 0.0);
        assert!((r.lo[1] - 0.45).abs() < 1e-15);
        assert!(!r.is_empty());
        assert!(band().region(2.0).is_empty());
    }
}
