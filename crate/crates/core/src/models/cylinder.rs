//! Explicit planar field on the cylinder `S¹ × R` with a closed orbit at `r = c`.

use nalgebra::DMatrix;

use crate::error::Result;
use crate::flow::FlowSystem;

/// `X(θ, r) = (1, r − c)`: the circle `r = c` is a hyperbolic closed orbit of period 1.
#[derive(Clone, Debug, PartialEq)]
pub struct CylinderField {
    pub c: f64,
}

impl FlowSystem for CylinderField {
    fn dim(&self) -> usize {
        2
    }
    fn periodic(&self) -> Vec<bool> {
        vec![true, false]
    }
    fn field(&self, p: &[f64]) -> Result<Vec<f64>> {
        Ok(vec![1.0, p[1] - self.c])
    }
    fn field_jacobian(&self, p: &[f64]) -> Result<(Vec<f64>, DMatrix<f64>)> {
        Ok((self.field(p)?, DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 1.0])))
    }
    fn transverse_frame(&self, _p: &[f64]) -> Result<DMatrix<f64>> {
        Ok(DMatrix::from_row_slice(2, 1, &[0.0, 1.0]))
    }
    fn symplectic_frame(&self) -> bool {
        false
    }
    fn frame_id(&self) -> String {
        "radial:(d/dr)".into()
    }
    fn system_id(&self) -> String {
        format!("cylinder:c={:.17e}", self.c)
    }
}
