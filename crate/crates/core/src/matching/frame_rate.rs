use crate::Error;

/// Linear speed-density traffic parameters.
///
/// `free_flow_speed` is in distance units per second, `gradient` in
/// distance² per second per object.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameRateParams {
    free_flow_speed: f64,
    gradient: f64,
}

impl FrameRateParams {
    pub fn new(free_flow_speed: f64, gradient: f64) -> Result<Self, Error> {
        if !(free_flow_speed.is_finite() && free_flow_speed >= 0.0) {
            return Err(Error::InvalidFreeFlowSpeed(free_flow_speed));
        }
        if !(gradient.is_finite() && gradient > 0.0) {
            return Err(Error::InvalidGradient(gradient));
        }
        Ok(FrameRateParams {
            free_flow_speed,
            gradient,
        })
    }

    pub fn free_flow_speed(&self) -> f64 {
        self.free_flow_speed
    }

    pub fn gradient(&self) -> f64 {
        self.gradient
    }

    /// `μ_f² / (4b)`. A frame rate must strictly exceed this.
    pub fn min_fps(&self) -> f64 {
        self.free_flow_speed * self.free_flow_speed / (4.0 * self.gradient)
    }

    /// Strict: a frame rate equal to the minimum is inadequate.
    pub fn is_adequate(&self, fps: f64) -> bool {
        fps > self.min_fps()
    }
}

/// Lower bound on frames per second for the free-flow speed and
/// speed-density gradient.
pub fn min_frames_per_second(free_flow_speed: f64, gradient: f64) -> Result<f64, Error> {
    FrameRateParams::new(free_flow_speed, gradient).map(|p| p.min_fps())
}
