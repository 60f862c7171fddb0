//! Quadratic Corey flux model: fluxes, Jacobian, characteristic fields and
//! genuine-nonlinearity indicators on the saturation triangle.

use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::error::{Result, RieffError};

/// A point (u1, u2) of the saturation triangle; u3 = 1 - u1 - u2 is implicit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub u1: f64,
    pub u2: f64,
}

impl State {
    pub fn new(u1: f64, u2: f64) -> Self {
        State { u1, u2 }
    }

    pub fn u3(&self) -> f64 {
        1.0 - self.u1 - self.u2
    }

    pub fn in_triangle(&self, eps: f64) -> bool {
        self.u1 >= -eps && self.u2 >= -eps && self.u1 + self.u2 <= 1.0 + eps
    }

    /// Euclidean distance in the (u1, u2) plane.
    pub fn dist(&self, other: &State) -> f64 {
        ((self.u1 - other.u1).powi(2) + (self.u2 - other.u2).powi(2)).sqrt()
    }

    pub fn offset(&self, dir: [f64; 2], h: f64) -> State {
        State::new(self.u1 + h * dir[0], self.u2 + h * dir[1])
    }

    /// Smallest of the three saturations; negative outside the triangle.
    pub fn boundary_margin(&self) -> f64 {
        self.u1.min(self.u2).min(self.u3())
    }
}

/// Characteristic family of the 2x2 system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Slow,
    Fast,
}

impl Family {
    pub fn label(&self) -> &'static str {
        match self {
            Family::Slow => "slow",
            Family::Fast => "fast",
        }
    }
}

impl std::str::FromStr for Family {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "s" | "slow" => Ok(Family::Slow),
            "f" | "fast" => Ok(Family::Fast),
            other => Err(format!("unknown family '{other}' (expected s or f)")),
        }
    }
}

/// Eigenstructure of the flux Jacobian at one state.
#[derive(Debug, Clone, Copy)]
pub struct CharField {
    pub lambda_s: f64,
    pub lambda_f: f64,
    /// Unit eigenvectors, oriented so the eigenvalue grows along them
    /// wherever the directional derivative is decisively nonzero.
    pub r_s: [f64; 2],
    pub r_f: [f64; 2],
    /// (tr J)^2 - 4 det J.
    pub discriminant: f64,
    pub near_coincidence: bool,
}

impl CharField {
    pub fn lambda(&self, family: Family) -> f64 {
        match family {
            Family::Slow => self.lambda_s,
            Family::Fast => self.lambda_f,
        }
    }

    pub fn eigenvector(&self, family: Family) -> [f64; 2] {
        match family {
            Family::Slow => self.r_s,
            Family::Fast => self.r_f,
        }
    }
}

/// Corey quadratic model: f_i = (coefficient_i * u_i^2) / Q with
/// Q = A u1^2 + B u2^2 + C u3^2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluxModel {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl FluxModel {
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        if !(a > 0.0 && b > 0.0 && c > 0.0) || !(a.is_finite() && b.is_finite() && c.is_finite()) {
            return Err(RieffError::Parameter(format!(
                "mobility coefficients must be positive, got A={a}, B={b}, C={c}"
            )));
        }
        Ok(FluxModel { a, b, c })
    }

    fn check_domain(&self, u: State, tol: &Tolerances) -> Result<()> {
        if u.in_triangle(tol.eps_dom) {
            Ok(())
        } else {
            Err(RieffError::Domain { u1: u.u1, u2: u.u2 })
        }
    }

    fn q(&self, u: State) -> f64 {
        let u3 = u.u3();
        self.a * u.u1 * u.u1 + self.b * u.u2 * u.u2 + self.c * u3 * u3
    }

    /// Flux triple (f1, f2, f3); the components sum to one by construction.
    pub fn eval_flux(&self, u: State, tol: &Tolerances) -> Result<[f64; 3]> {
        self.check_domain(u, tol)?;
        Ok(self.eval_flux_unchecked(u))
    }

    pub(crate) fn eval_flux_unchecked(&self, u: State) -> [f64; 3] {
        let q = self.q(u);
        let f1 = self.a * u.u1 * u.u1 / q;
        let f2 = self.b * u.u2 * u.u2 / q;
        [f1, f2, 1.0 - f1 - f2]
    }

    /// First two flux components; convenience for jump conditions.
    pub(crate) fn flux2(&self, u: State) -> [f64; 2] {
        let f = self.eval_flux_unchecked(u);
        [f[0], f[1]]
    }

    /// Analytic Jacobian d(f1,f2)/d(u1,u2) with u3 = 1 - u1 - u2 chained through.
    pub fn jacobian(&self, u: State, tol: &Tolerances) -> Result<[[f64; 2]; 2]> {
        self.check_domain(u, tol)?;
        Ok(self.jacobian_unchecked(u))
    }

    pub(crate) fn jacobian_unchecked(&self, u: State) -> [[f64; 2]; 2] {
        let u3 = u.u3();
        let q = self.q(u);
        let qx = 2.0 * self.a * u.u1 - 2.0 * self.c * u3;
        let qy = 2.0 * self.b * u.u2 - 2.0 * self.c * u3;
        let q2 = q * q;
        let n1 = self.a * u.u1 * u.u1;
        let n2 = self.b * u.u2 * u.u2;
        [
            [
                (2.0 * self.a * u.u1 * q - n1 * qx) / q2,
                (-n1 * qy) / q2,
            ],
            [
                (-n2 * qx) / q2,
                (2.0 * self.b * u.u2 * q - n2 * qy) / q2,
            ],
        ]
    }

    /// Central finite-difference Jacobian; used as an independent oracle.
    pub fn jacobian_fd(&self, u: State, h: f64) -> [[f64; 2]; 2] {
        let fp1 = self.flux2(State::new(u.u1 + h, u.u2));
        let fm1 = self.flux2(State::new(u.u1 - h, u.u2));
        let fp2 = self.flux2(State::new(u.u1, u.u2 + h));
        let fm2 = self.flux2(State::new(u.u1, u.u2 - h));
        [
            [(fp1[0] - fm1[0]) / (2.0 * h), (fp2[0] - fm2[0]) / (2.0 * h)],
            [(fp1[1] - fm1[1]) / (2.0 * h), (fp2[1] - fm2[1]) / (2.0 * h)],
        ]
    }

    /// Eigenvalues and oriented unit eigenvectors of the Jacobian.
    pub fn char_fields(&self, u: State, tol: &Tolerances) -> Result<CharField> {
        self.check_domain(u, tol)?;
        let mut cf = self.char_fields_raw(u, tol)?;
        if !cf.near_coincidence {
            for family in [Family::Slow, Family::Fast] {
                let r = cf.eigenvector(family);
                let dd = self.dirderiv_lambda(u, family, r, tol);
                if dd < -tol.eps_nl {
                    match family {
                        Family::Slow => cf.r_s = [-r[0], -r[1]],
                        Family::Fast => cf.r_f = [-r[0], -r[1]],
                    }
                }
            }
        }
        Ok(cf)
    }

    /// Eigenstructure without the orientation pass; for callers that manage
    /// eigenvector signs by continuity along a curve.
    pub(crate) fn char_fields_raw(&self, u: State, tol: &Tolerances) -> Result<CharField> {
        let j = self.jacobian_unchecked(u);
        let tr = j[0][0] + j[1][1];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        let disc = tr * tr - 4.0 * det;
        if disc < -tol.eps_hyp {
            return Err(RieffError::HyperbolicityLoss {
                u1: u.u1,
                u2: u.u2,
                discriminant: disc,
            });
        }
        let sq = disc.max(0.0).sqrt();
        let lambda_s = 0.5 * (tr - sq);
        let lambda_f = 0.5 * (tr + sq);
        let near = (lambda_f - lambda_s).abs() < tol.eps_coinc;
        let r_s = eigenvector_2x2(&j, lambda_s).unwrap_or([1.0, 0.0]);
        let r_f = eigenvector_2x2(&j, lambda_f).unwrap_or([0.0, 1.0]);
        Ok(CharField {
            lambda_s,
            lambda_f,
            r_s,
            r_f,
            discriminant: disc,
            near_coincidence: near,
        })
    }

    /// Directional derivative of lambda_k along a given unit direction,
    /// by central differences with one-sided fallback at the boundary.
    pub fn dirderiv_lambda(&self, u: State, family: Family, dir: [f64; 2], tol: &Tolerances) -> f64 {
        let h = tol.h_nl;
        let lam = |s: State| -> Option<f64> {
            if !s.in_triangle(tol.eps_dom) {
                return None;
            }
            self.char_fields_raw(s, tol).ok().map(|cf| cf.lambda(family))
        };
        let plus = lam(u.offset(dir, h));
        let minus = lam(u.offset(dir, -h));
        match (plus, minus) {
            (Some(p), Some(m)) => (p - m) / (2.0 * h),
            (Some(p), None) => {
                let here = lam(u).unwrap_or(p);
                (p - here) / h
            }
            (None, Some(m)) => {
                let here = lam(u).unwrap_or(m);
                (here - m) / h
            }
            (None, None) => 0.0,
        }
    }

    /// grad(lambda_k) . r_k with the oriented eigenvector of `char_fields`.
    pub fn nonlinearity(&self, u: State, family: Family, tol: &Tolerances) -> Result<f64> {
        let cf = self.char_fields(u, tol)?;
        if cf.near_coincidence {
            return Err(RieffError::StartDegenerate { u1: u.u1, u2: u.u2 });
        }
        Ok(self.dirderiv_lambda(u, family, cf.eigenvector(family), tol))
    }
}

/// Unit eigenvector of a 2x2 matrix for a given eigenvalue; None when the
/// matrix is (numerically) a multiple of the identity.
fn eigenvector_2x2(j: &[[f64; 2]; 2], lambda: f64) -> Option<[f64; 2]> {
    // Rows of (J - lambda I) are (j11-l, j12) and (j21, j22-l); the
    // eigenvector is orthogonal to both, so build it from the larger row.
    let c1 = [j[0][1], lambda - j[0][0]];
    let c2 = [lambda - j[1][1], j[1][0]];
    let n1 = (c1[0] * c1[0] + c1[1] * c1[1]).sqrt();
    let n2 = (c2[0] * c2[0] + c2[1] * c2[1]).sqrt();
    let scale = j.iter().flatten().fold(1.0_f64, |m, v| m.max(v.abs()));
    let floor = 1e-14 * (1.0 + scale + lambda.abs());
    if n1 >= n2 && n1 > floor {
        Some([c1[0] / n1, c1[1] / n1])
    } else if n2 > floor {
        Some([c2[0] / n2, c2[1] / n2])
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn unit_model() -> FluxModel {
        FluxModel::new(1.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn rejects_nonpositive_coefficients() {
        assert!(FluxModel::new(0.0, 1.0, 1.0).is_err());
        assert!(FluxModel::new(1.0, -2.0, 1.0).is_err());
    }

    #[test]
    fn symmetric_center_gives_equal_fluxes() {
        let f = unit_model()
            .eval_flux(State::new(1.0 / 3.0, 1.0 / 3.0), &tol())
            .unwrap();
        for v in f {
            assert!((v - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn pure_oil_vertex() {
        let f = unit_model().eval_flux(State::new(0.0, 0.0), &tol()).unwrap();
        assert_eq!(f, [0.0, 0.0, 1.0]);
    }

    #[test]
    fn hand_evaluated_interior_point() {
        let f = unit_model().eval_flux(State::new(0.3, 0.3), &tol()).unwrap();
        assert!((f[0] - 0.09 / 0.34).abs() < 1e-15);
        assert!((f[1] - 0.09 / 0.34).abs() < 1e-15);
        assert!((f[2] - 0.16 / 0.34).abs() < 1e-15);
    }

    #[test]
    fn domain_violation_rejected() {
        let err = unit_model().eval_flux(State::new(0.8, 0.4), &tol()).unwrap_err();
        assert_eq!(err.name(), "DomainError");
    }

    #[test]
    fn jacobian_edge_row_vanishes() {
        let j = unit_model().jacobian(State::new(0.5, 0.0), &tol()).unwrap();
        assert_eq!(j[1], [0.0, 0.0]);
        assert!((j[0][0] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let model = FluxModel::new(1.3, 0.8, 2.1).unwrap();
        for _ in 0..200 {
            let u1: f64 = rng.gen_range(0.02..0.9);
            let u2: f64 = rng.gen_range(0.02..(0.97 - u1));
            let u = State::new(u1, u2);
            let ja = model.jacobian(u, &tol()).unwrap();
            let jf = model.jacobian_fd(u, 1e-6);
            for r in 0..2 {
                for c in 0..2 {
                    assert!(
                        (ja[r][c] - jf[r][c]).abs() < 1e-6,
                        "mismatch at {u:?} entry ({r},{c}): {} vs {}",
                        ja[r][c],
                        jf[r][c]
                    );
                }
            }
        }
    }

    #[test]
    fn edge_eigenvalues() {
        let cf = unit_model().char_fields(State::new(0.5, 0.0), &tol()).unwrap();
        assert!((cf.lambda_s - 0.0).abs() < 1e-14);
        assert!((cf.lambda_f - 2.0).abs() < 1e-14);
        // Fast eigenvector on the edge is the edge direction itself.
        assert!(cf.r_f[1].abs() < 1e-12);
    }

    #[test]
    fn eigen_residual_is_tiny() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let model = FluxModel::new(2.0, 1.0, 0.7).unwrap();
        for _ in 0..200 {
            let u1: f64 = rng.gen_range(0.02..0.9);
            let u2: f64 = rng.gen_range(0.02..(0.97 - u1));
            let u = State::new(u1, u2);
            let cf = model.char_fields(u, &tol()).unwrap();
            let j = model.jacobian(u, &tol()).unwrap();
            for (lam, r) in [(cf.lambda_s, cf.r_s), (cf.lambda_f, cf.r_f)] {
                let res = [
                    j[0][0] * r[0] + j[0][1] * r[1] - lam * r[0],
                    j[1][0] * r[0] + j[1][1] * r[1] - lam * r[1],
                ];
                let norm = (res[0] * res[0] + res[1] * res[1]).sqrt();
                assert!(norm <= 1e-10 * (1.0 + lam.abs()), "residual {norm} at {u:?}");
                let len = (r[0] * r[0] + r[1] * r[1]).sqrt();
                assert!((len - 1.0).abs() < 1e-12);
            }
            assert!(cf.lambda_s <= cf.lambda_f);
        }
    }

    #[test]
    fn symmetric_diagonal_eigenvectors() {
        // With A = B the model is symmetric under u1 <-> u2, so on the
        // diagonal the eigenvectors are the symmetric and antisymmetric
        // directions.
        let model = FluxModel::new(1.0, 1.0, 0.6).unwrap();
        let cf = model.char_fields(State::new(0.28, 0.28), &tol()).unwrap();
        for r in [cf.r_s, cf.r_f] {
            let sym = (r[0] - r[1]).abs();
            let asym = (r[0] + r[1]).abs();
            assert!(sym < 1e-9 || asym < 1e-9, "eigenvector {r:?} not aligned");
        }
    }

    #[test]
    fn nonlinearity_vanishes_at_edge_inflection() {
        // On the u2 = 0 edge the fast flux reduces to the Buckley-Leverett
        // profile f(s) = s^2/(s^2 + (1-s)^2), whose second derivative
        // vanishes at s = 1/2.
        let model = unit_model();
        let nl = model
            .dirderiv_lambda(State::new(0.5, 0.0), Family::Fast, [1.0, 0.0], &tol());
        assert!(nl.abs() < 1e-6, "nonlinearity {nl} at the edge inflection");
    }

    #[test]
    fn nonlinearity_changes_sign_across_edge_inflection() {
        let model = unit_model();
        let t = tol();
        let before = model.dirderiv_lambda(State::new(0.4, 0.0), Family::Fast, [1.0, 0.0], &t);
        let after = model.dirderiv_lambda(State::new(0.6, 0.0), Family::Fast, [1.0, 0.0], &t);
        assert!(before > 0.0 && after < 0.0, "no sign change: {before} vs {after}");
    }

    #[test]
    fn nonlinearity_matches_definition() {
        let model = FluxModel::new(1.4, 0.9, 1.1).unwrap();
        let t = tol();
        let u = State::new(0.33, 0.21);
        let cf = model.char_fields(u, &t).unwrap();
        let r = cf.r_f;
        let h = t.h_nl;
        let lp = model.char_fields(u.offset(r, h), &t).unwrap().lambda_f;
        let lm = model.char_fields(u.offset(r, -h), &t).unwrap().lambda_f;
        let expected = (lp - lm) / (2.0 * h);
        let got = model.nonlinearity(u, Family::Fast, &t).unwrap();
        assert!((got - expected).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn flux_triple_sums_to_one(u1 in 0.0f64..1.0, frac in 0.0f64..1.0) {
            let u2 = (1.0 - u1) * frac;
            let u = State::new(u1, u2);
            let model = FluxModel::new(1.7, 0.4, 2.3).unwrap();
            let f = model.eval_flux(u, &Tolerances::default()).unwrap();
            prop_assert!((f[0] + f[1] + f[2] - 1.0).abs() < 1e-12);
            for v in f {
                prop_assert!((-1e-12..=1.0 + 1e-12).contains(&v));
            }
        }

        #[test]
        fn swap_symmetry_when_a_equals_b(u1 in 0.01f64..0.95, frac in 0.01f64..0.99) {
            let u2 = (1.0 - u1) * frac;
            let model = FluxModel::new(1.3, 1.3, 0.8).unwrap();
            let t = Tolerances::default();
            let f = model.eval_flux(State::new(u1, u2), &t).unwrap();
            let g = model.eval_flux(State::new(u2, u1), &t).unwrap();
            prop_assert!((f[0] - g[1]).abs() < 1e-13);
            prop_assert!((f[1] - g[0]).abs() < 1e-13);
            let cf = model.char_fields(State::new(u1, u2), &t);
            let cg = model.char_fields(State::new(u2, u1), &t);
            if let (Ok(cf), Ok(cg)) = (cf, cg) {
                prop_assert!((cf.lambda_s - cg.lambda_s).abs() < 1e-10);
                prop_assert!((cf.lambda_f - cg.lambda_f).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn grid_flux_bounds() {
        let model = FluxModel::new(2.2, 0.5, 1.0).unwrap();
        let t = tol();
        for i in 0..=100 {
            for j in 0..=(100 - i) {
                let u = State::new(i as f64 / 100.0, j as f64 / 100.0);
                let f = model.eval_flux(u, &t).unwrap();
                assert!((f[0] + f[1] + f[2] - 1.0).abs() < 1e-12);
                for v in f {
                    assert!((-1e-12..=1.0 + 1e-12).contains(&v));
                }
            }
        }
    }
}
