//! Central numerical tolerances and step sizes.
//!
//! Every threshold used by the solvers lives in this one record so that
//! CLI overrides and tests agree on the same numbers.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Slack allowed outside the saturation triangle.
    pub eps_dom: f64,
    /// Discriminant below `-eps_hyp` counts as loss of hyperbolicity.
    pub eps_hyp: f64,
    /// Eigenvalue gap below which the fields are flagged as nearly coincident.
    pub eps_coinc: f64,
    /// Finite-difference step for directional derivatives of eigenvalues.
    pub h_nl: f64,
    /// |grad lambda . r| below this counts as an inflection-manifold point.
    pub eps_nl: f64,
    /// Newton corrector tolerance on the Rankine-Hugoniot residual.
    pub eps_rh: f64,
    /// Equality tolerance in Lax / Liu speed comparisons.
    pub eps_eq: f64,
    /// Pseudo-arclength continuation step bounds.
    pub h_min: f64,
    pub h_max: f64,
    /// RK4 arclength step for rarefaction integration.
    pub h_rar: f64,
    /// Richardson halving check tolerance for the rarefaction quadrature.
    pub eps_quad: f64,
    /// Cap on continuation / integration steps per curve.
    pub max_steps: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            eps_dom: 1e-12,
            eps_hyp: 1e-12,
            eps_coinc: 1e-8,
            h_nl: 1e-5,
            eps_nl: 1e-7,
            eps_rh: 1e-12,
            eps_eq: 1e-9,
            h_min: 1e-5,
            h_max: 2e-3,
            h_rar: 1e-3,
            eps_quad: 1e-8,
            max_steps: 8000,
        }
    }
}

impl Tolerances {
    /// Checks that every tolerance is positive and the step bounds are ordered.
    pub fn validate(&self) -> crate::Result<()> {
        let fields = [
            ("eps_dom", self.eps_dom),
            ("eps_hyp", self.eps_hyp),
            ("eps_coinc", self.eps_coinc),
            ("h_nl", self.h_nl),
            ("eps_nl", self.eps_nl),
            ("eps_rh", self.eps_rh),
            ("eps_eq", self.eps_eq),
            ("h_min", self.h_min),
            ("h_max", self.h_max),
            ("h_rar", self.h_rar),
            ("eps_quad", self.eps_quad),
        ];
        for (name, value) in fields {
            if !(value > 0.0) || !value.is_finite() {
                return Err(crate::RieffError::Config(format!(
                    "tolerance {name} must be positive, got {value}"
                )));
            }
        }
        if self.h_min > self.h_max {
            return Err(crate::RieffError::Config(format!(
                "h_min {} exceeds h_max {}",
                self.h_min, self.h_max
            )));
        }
        if self.max_steps == 0 {
            return Err(crate::RieffError::Config("max_steps must be nonzero".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        Tolerances::default().validate().unwrap();
    }

    #[test]
    fn negative_tolerance_rejected() {
        let mut tol = Tolerances::default();
        tol.eps_rh = -1.0;
        assert!(tol.validate().is_err());
    }

    #[test]
    fn unknown_keys_rejected() {
        let parsed: Result<Tolerances, _> = serde_json::from_str(r#"{"eps_dom":1e-12,"bogus":1}"#);
        assert!(parsed.is_err());
    }
}
