use super::christoffel::ChristoffelField;
use crate::cheeger::MetricVariant;
use crate::error::{GeomError, Result};
use crate::manifold::Scenario;
use nalgebra::DVector;

#[derive(Clone, Debug, PartialEq)]
pub struct GeodesicState {
    pub position: DVector<f64>,
    pub velocity: DVector<f64>,
    pub arc_length: f64,
}

/// Sampled states after every step. `boundary_exit` holds the arc length at
/// which integration stopped because the chart (or a derivative stencil) was left.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub states: Vec<GeodesicState>,
    pub boundary_exit: Option<f64>,
}

impl Trajectory {
    pub fn last(&self) -> &GeodesicState {
        self.states.last().expect("trajectory holds its initial state")
    }
}

/// Classical RK4 on `x'' + Gamma(x', x') = 0`.
///
/// `arc_length` advances by `step` times the initial speed, which equals arc
/// length for unit-speed starts.
pub fn geodesic_integrate(
    scenario: &Scenario,
    variant: MetricVariant,
    initial: GeodesicState,
    length: f64,
    step: f64,
) -> Result<Trajectory> {
    if !(step > 0.0 && length >= 0.0) {
        return Err(GeomError::Config(format!(
            "geodesic step {step} and length {length} must be positive"
        )));
    }
    scenario.chart().check(&initial.position)?;
    let field = ChristoffelField::new(scenario, variant);
    let accel = |x: &DVector<f64>, v: &DVector<f64>| -> Result<DVector<f64>> {
        Ok(-field.at(x)?.contract(v, v))
    };
    let speed = {
        let g = variant.eval(scenario, &initial.position)?;
        crate::linalg::norm_in(&g, &initial.velocity)
    };
    let steps = (length / step).round() as usize;
    let mut states = Vec::with_capacity(steps + 1);
    states.push(initial);
    for _ in 0..steps {
        let cur = states.last().unwrap();
        let (x, v) = (&cur.position, &cur.velocity);
        let stage = || -> Result<(DVector<f64>, DVector<f64>)> {
            let k1v = accel(x, v)?;
            let k1x = v.clone();
            let x2 = x + &k1x * (0.5 * step);
            let v2 = v + &k1v * (0.5 * step);
            let k2v = accel(&x2, &v2)?;
            let x3 = x + &v2 * (0.5 * step);
            let v3 = v + &k2v * (0.5 * step);
            let k3v = accel(&x3, &v3)?;
            let x4 = x + &v3 * step;
            let v4 = v + &k3v * step;
            let k4v = accel(&x4, &v4)?;
            let nx = x + (k1x + &v2 * 2.0 + &v3 * 2.0 + &v4) * (step / 6.0);
            let nv = v + (k1v + k2v * 2.0 + k3v * 2.0 + k4v) * (step / 6.0);
            Ok((nx, nv))
        };
        match stage() {
            Ok((position, velocity)) => {
                let arc_length = cur.arc_length + step * speed;
                states.push(GeodesicState {
                    position,
                    velocity,
                    arc_length,
                });
            }
            Err(GeomError::Domain { .. }) => {
                let at = cur.arc_length;
                return Ok(Trajectory {
                    states,
                    boundary_exit: Some(at),
                });
            }
            Err(e) => return Err(e),
        }
    }
    Ok(Trajectory {
        states,
        boundary_exit: None,
    })
}
