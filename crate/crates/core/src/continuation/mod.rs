//! One-parameter families of models and the orbits tracked along them.

pub mod sky;
pub mod track;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::FlowSystem;
use crate::index::{index_record, IndexControls, IndexRecord};
use crate::models::{ContactModel, CylinderField, GeodesicFlow, ModelChecks, ReebFlow, TorusMetric};
use crate::orbit::{lift_geodesic_orbit, ClosedOrbit, OrbitString};

pub use sky::{
    detect_sky_catastrophe, fuller_invariance_check, InvarianceReport, SkyEvidence, SkyReport, SkyVerdict,
};
pub use track::{continue_orbit, ContinuationControls, OrbitTrack, TrackNode, TrackStatus};

/// A fixed model, seen as a constant family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FixedModel {
    /// Geodesic flow of a torus metric.
    Metric { metric: TorusMetric },
    /// Reeb flow of a contact model.
    Contact { model: ContactModel },
    /// `X(θ, r) = (1, r − c)` on the cylinder.
    Cylinder { c: f64 },
}

/// Family `t ↦ X_t`, `t ∈ [0, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum HomotopyFamily {
    Constant { model: FixedModel },
    /// Geodesic flows of `(1 − s)g₀ + s g₁` with `s = σ(t)`.
    MetricInterpolation {
        start: TorusMetric,
        end: TorusMetric,
        #[serde(default)]
        smooth: bool,
    },
    /// Reeb flows of the componentwise interpolation of two contact models.
    ContactInterpolation {
        start: ContactModel,
        end: ContactModel,
        #[serde(default)]
        smooth: bool,
    },
    /// `X_t(θ, r) = (1, r − t/(1 − t))`, whose closed orbit `r = t/(1 − t)`
    /// leaves every bounded window before `t = 1`.
    CylinderEscape,
}

/// `σ(t)`: identity, or the smoothstep `3t² − 2t³` which is flat at both ends.
fn reparam(t: f64, smooth: bool) -> f64 {
    if smooth {
        let t = t.clamp(0.0, 1.0);
        t * t * (3.0 - 2.0 * t)
    } else {
        t
    }
}

impl FixedModel {
    pub fn system(&self) -> Box<dyn FlowSystem> {
        match self {
            Self::Metric { metric } => Box::new(GeodesicFlow { metric: metric.clone() }),
            Self::Contact { model } => Box::new(ReebFlow::new(model.clone())),
            Self::Cylinder { c } => Box::new(CylinderField { c: *c }),
        }
    }

    pub fn validate(&self, checks: ModelChecks) -> Result<()> {
        match self {
            Self::Metric { metric } => metric.validate(checks.grid, checks.max_degree),
            Self::Contact { model } => model.validate(checks.grid3(), checks.max_degree),
            Self::Cylinder { .. } => Ok(()),
        }
    }

    /// Index data of an orbit of [`FixedModel::system`]; geodesics use their
    /// canonical lift to the unit cotangent bundle.
    pub fn index_record(&self, string: &OrbitString, c: &IndexControls) -> Result<IndexRecord> {
        match self {
            Self::Metric { metric } => {
                let lift = lift_geodesic_orbit(metric, &string.representative)?;
                let sys = ReebFlow::new(ContactModel::unit_cotangent(metric.clone()));
                let lifted = OrbitString { representative: lift, ..string.clone() };
                let mut rec = index_record(&sys, &lifted, c)?;
                rec.string = string.clone();
                Ok(rec)
            }
            _ => index_record(self.system().as_ref(), string, c),
        }
    }
}

impl HomotopyFamily {
    pub fn constant(model: FixedModel) -> Self {
        Self::Constant { model }
    }

    /// The model at parameter `t`. Interpolations return the endpoint models
    /// exactly at `t = 0` and `t = 1`.
    pub fn model_at(&self, t: f64) -> Result<FixedModel> {
        match self {
            Self::Constant { model } => Ok(model.clone()),
            Self::MetricInterpolation { start, end, smooth } => Ok(FixedModel::Metric {
                metric: if t == 0.0 {
                    start.clone()
                } else if t == 1.0 {
                    end.clone()
                } else {
                    start.lerp(end, reparam(t, *smooth))
                },
            }),
            Self::ContactInterpolation { start, end, smooth } => Ok(FixedModel::Contact {
                model: if t == 0.0 {
                    start.clone()
                } else if t == 1.0 {
                    end.clone()
                } else {
                    start.lerp(end, reparam(t, *smooth))?
                },
            }),
            Self::CylinderEscape => {
                if !(t < 1.0) {
                    return Err(Error::InvalidInput("the cylinder family is undefined at t = 1".into()));
                }
                Ok(FixedModel::Cylinder { c: t / (1.0 - t) })
            }
        }
    }

    pub fn system_at(&self, t: f64) -> Result<Box<dyn FlowSystem>> {
        Ok(self.model_at(t)?.system())
    }

    /// Whether tracks of this family live on a torus chart (coordinate sections apply).
    pub fn torus_based(&self) -> bool {
        match self {
            Self::Constant { model: FixedModel::Contact { model } } => model.is_torus_based(),
            Self::ContactInterpolation { start, .. } => start.is_torus_based(),
            _ => true,
        }
    }

    /// Validity of the model at `t` on the check grid.
    pub fn validate_at(&self, t: f64, checks: ModelChecks) -> Result<()> {
        self.model_at(t)?.validate(checks)
    }
}

/// The closed orbit `r = c` of the cylinder field, class `θ`-winding 1.
pub fn cylinder_orbit(c: f64, samples: usize) -> Result<ClosedOrbit> {
    let sys = CylinderField { c };
    crate::orbit::shooting::assemble_orbit(
        &sys,
        &[0.0, c],
        1.0,
        crate::orbit::ClassLabel::Winding { winding: vec![1, 0] },
        samples * 4,
        samples,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolation_endpoints_are_exact() {
        let f = HomotopyFamily::MetricInterpolation {
            start: TorusMetric::conformal_cos_y(1e-3),
            end: TorusMetric::conformal_cos_y(0.1),
            smooth: true,
        };
        assert_eq!(f.model_at(1.0).unwrap(), FixedModel::Metric { metric: TorusMetric::conformal_cos_y(0.1) });
        let mid = f.model_at(0.5).unwrap();
        let FixedModel::Metric { metric } = mid else { panic!() };
        let [a, _, _] = metric.components(&[0.0, 0.0]);
        assert!((a - (1.0 + 0.5 * (1e-3 + 0.1))).abs() < 1e-12);
        assert!(HomotopyFamily::CylinderEscape.model_at(1.0).is_err());
        let json = serde_json::to_string(&f).unwrap();
        assert_eq!(serde_json::from_str::<HomotopyFamily>(&json).unwrap(), f);
    }

    #[test]
    fn cylinder_orbit_is_closed() {
        let o = cylinder_orbit(0.0, 64).unwrap();
        assert!(o.closure_residual < 1e-14 && o.flow_residual < 1e-12);
    }
}
