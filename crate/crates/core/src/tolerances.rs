//! Tolerance settings shared by the property checks.

/// Defaults used by the harness; the cli lets scenarios override them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Relative residual of every linear solve.
    pub linear_residual: f64,
    /// `c` in the margin tolerance `c (Δtᵖ + h²) scale`.
    pub margin_constant: f64,
    /// Bound on `|E Ë − Ė²| / E²` for single-mode differences.
    pub single_mode: f64,
    /// Bound on the estimated pressure offset when a pressure boundary exists.
    pub pressure_offset: f64,
    /// Relative commutativity of discrete convolutions.
    pub commutativity: f64,
    /// Relative adjointness of divergence and gradient.
    pub adjointness: f64,
    /// Normalized reciprocity residual on the finest level.
    pub reciprocity: f64,
    /// `|δΨ| / ‖direction‖` relative to the scale of Ψ.
    pub stationarity: f64,
    /// Relative agreement of assembled and finite-difference variations.
    pub variation_agreement: f64,
    /// Allowed gap between fitted and expected order when only Δt is refined.
    pub order_band_time: f64,
    /// Allowed gap when `h` and Δt are refined together.
    pub order_band_joint: f64,
    /// Smallest fitted order accepted for second-order identities.
    pub min_order: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            linear_residual: 1e-10,
            margin_constant: 1.0,
            single_mode: 1e-6,
            pressure_offset: 1e-8,
            commutativity: 1e-13,
            adjointness: 1e-12,
            reciprocity: 1e-3,
            stationarity: 1e-3,
            variation_agreement: 1e-8,
            order_band_time: 0.2,
            order_band_joint: 0.3,
            min_order: 1.8,
        }
    }
}

impl Tolerances {
    /// `c (Δtᵖ + h²) scale`.
    pub fn margin(&self, dt: f64, order: f64, h: f64, scale: f64) -> f64 {
        self.margin_constant * (dt.powf(order) + h * h) * scale
    }
}
