//! Result type shared by the subspace, cone and Hölder computations.

use serde::Serialize;

use crate::space::Vector;

/// Values of γ at or above `1 - INTERSECTION_TOL` are reported as a
/// nontrivial intersection of the two sets.
pub const INTERSECTION_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Principal angles, or direct evaluation on single rays.
    ExactSubspace,
    /// Multistart alternating projections / projected gradient.
    AlternatingMultistart,
    /// Brute-force sampling.
    Oracle,
}

/// γ, κ and the unit vectors at which they are attained (or best found).
///
/// `gamma == 1 - kappa²/2` holds to rounding for the Cauchy-Schwarz reports;
/// Hölder reports use `1 - kappa²/M` instead.
#[derive(Debug, Clone)]
pub struct GammaReport {
    pub gamma: f64,
    pub kappa: f64,
    pub certificate_v: Option<Vector>,
    pub certificate_w: Option<Vector>,
    pub method: Method,
    pub restarts_used: usize,
    pub converged: bool,
    /// The value is a best-found bound, not a certified optimum.
    pub heuristic: bool,
    /// γ reached `1 - INTERSECTION_TOL`: the sets meet outside the origin.
    pub intersects: bool,
    /// Unsymmetrized `sup Re(v, w)`; cone reports only.
    pub gamma_re: Option<f64>,
}

impl GammaReport {
    /// Report whose stored κ is derived from γ as `√(2 - 2γ)`.
    pub(crate) fn from_gamma(gamma: f64, method: Method) -> Self {
        let kappa = (2.0 - 2.0 * gamma).max(0.0).sqrt();
        GammaReport {
            gamma,
            kappa,
            certificate_v: None,
            certificate_w: None,
            method,
            restarts_used: 0,
            converged: true,
            heuristic: false,
            intersects: gamma >= 1.0 - INTERSECTION_TOL,
            gamma_re: None,
        }
    }

    pub(crate) fn with_certificates(mut self, v: Vector, w: Vector) -> Self {
        self.certificate_v = Some(v);
        self.certificate_w = Some(w);
        self
    }
}
