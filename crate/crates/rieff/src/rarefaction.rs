//! Integral curves of the eigenvector fields (rarefaction curves) with
//! inflection detection.
//!
//! The integrator follows the arclength-normalized eigenvector field with
//! RK4. Eigenvector signs are carried by continuity with the previous
//! step, and near coincident eigenvalues the branch is selected by
//! direction rather than by eigenvalue ordering, which keeps the march
//! stable through umbilic points.

use serde::Serialize;

use crate::config::Tolerances;
use crate::error::{Result, RieffError};
use crate::flux_model::{Family, FluxModel, State};
use crate::numerics::bisect;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// Characteristic speed increases along the curve.
    Forward,
    /// Characteristic speed decreases along the curve.
    Backward,
}

impl std::str::FromStr for Direction {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "forward" | "fwd" => Ok(Direction::Forward),
            "backward" | "bwd" => Ok(Direction::Backward),
            other => Err(format!("unknown direction '{other}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Inflection,
    Boundary,
    HyperbolicityLoss,
    MaxLength,
    StartAtInflection,
}

impl StopReason {
    pub fn label(&self) -> &'static str {
        match self {
            StopReason::Inflection => "inflection",
            StopReason::Boundary => "boundary",
            StopReason::HyperbolicityLoss => "hyperbolicity_loss",
            StopReason::MaxLength => "max_length",
            StopReason::StartAtInflection => "start_at_inflection",
        }
    }
}

#[derive(Debug, Clone)]
pub struct RarefactionSegment {
    pub family: Family,
    pub direction: Direction,
    pub points: Vec<State>,
    pub lambdas: Vec<f64>,
    /// grad(lambda) . dir along the curve, signed with the travel direction.
    pub nonlinearities: Vec<f64>,
    /// Unit travel direction at each sample.
    pub dirs: Vec<[f64; 2]>,
    pub stop_reason: StopReason,
}

impl RarefactionSegment {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn endpoint(&self) -> State {
        *self.points.last().expect("segment has at least one point")
    }
}

/// Eigenvector and eigenvalue at `u` selected by alignment with `ref_dir`.
fn tracked_field(
    model: &FluxModel,
    u: State,
    ref_dir: [f64; 2],
    tol: &Tolerances,
) -> Result<([f64; 2], f64)> {
    let cf = model.char_fields_raw(u, tol)?;
    let cand = [(cf.r_s, cf.lambda_s), (cf.r_f, cf.lambda_f)];
    let score =
        |r: [f64; 2]| -> f64 { (r[0] * ref_dir[0] + r[1] * ref_dir[1]).abs() };
    let (mut r, lambda) = if score(cand[0].0) >= score(cand[1].0) {
        cand[0]
    } else {
        cand[1]
    };
    if r[0] * ref_dir[0] + r[1] * ref_dir[1] < 0.0 {
        r = [-r[0], -r[1]];
    }
    Ok((r, lambda))
}

/// Directional derivative of the tracked eigenvalue along `dir`, following
/// the eigen-branch by direction instead of by ordering.
fn tracked_dirderiv(model: &FluxModel, u: State, dir: [f64; 2], tol: &Tolerances) -> Result<f64> {
    let h = tol.h_nl;
    let probe = |s: State| -> Option<f64> {
        if !s.in_triangle(tol.eps_dom) {
            return None;
        }
        tracked_field(model, s, dir, tol).ok().map(|(_, l)| l)
    };
    let plus = probe(u.offset(dir, h));
    let minus = probe(u.offset(dir, -h));
    let here = || tracked_field(model, u, dir, tol).map(|(_, l)| l);
    match (plus, minus) {
        (Some(p), Some(m)) => Ok((p - m) / (2.0 * h)),
        (Some(p), None) => Ok((p - here()?) / h),
        (None, Some(m)) => Ok((here()? - m) / h),
        (None, None) => Ok(0.0),
    }
}

/// The triangle vertex the march is about to run into, if any: within
/// `radius` and aligned with the travel direction.
fn vertex_ahead(u: State, dir: [f64; 2], radius: f64) -> Option<State> {
    const VERTICES: [(f64, f64); 3] = [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)];
    for (v1, v2) in VERTICES {
        let v = State::new(v1, v2);
        let dist = u.dist(&v);
        if dist < 1e-13 || dist > radius {
            continue;
        }
        let align = ((v.u1 - u.u1) * dir[0] + (v.u2 - u.u2) * dir[1]) / dist;
        if align > 0.9999 {
            return Some(v);
        }
    }
    None
}

fn rk4_step(model: &FluxModel, u: State, ref_dir: [f64; 2], h: f64, tol: &Tolerances) -> Result<State> {
    let f = |s: State, rd: [f64; 2]| -> Result<[f64; 2]> { Ok(tracked_field(model, s, rd, tol)?.0) };
    let k1 = f(u, ref_dir)?;
    let k2 = f(u.offset(k1, 0.5 * h), k1)?;
    let k3 = f(u.offset(k2, 0.5 * h), k2)?;
    let k4 = f(u.offset(k3, h), k3)?;
    Ok(State::new(
        u.u1 + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        u.u2 + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
    ))
}

/// Integrates the rarefaction curve of `family` from `u0` so that the
/// characteristic speed moves in the requested direction.
pub fn integrate_rarefaction(
    model: &FluxModel,
    u0: State,
    family: Family,
    direction: Direction,
    tol: &Tolerances,
) -> Result<RarefactionSegment> {
    let cf = model.char_fields(u0, tol)?;
    if cf.near_coincidence {
        return Err(RieffError::StartDegenerate { u1: u0.u1, u2: u0.u2 });
    }
    let r = cf.eigenvector(family);
    let nl = model.dirderiv_lambda(u0, family, r, tol);
    if nl.abs() < tol.eps_nl {
        // The start sits on the inflection manifold; report it as a
        // zero-length segment so the caller can decide how to compose.
        return Ok(RarefactionSegment {
            family,
            direction,
            points: vec![u0],
            lambdas: vec![cf.lambda(family)],
            nonlinearities: vec![nl],
            dirs: vec![r],
            stop_reason: StopReason::StartAtInflection,
        });
    }
    // `char_fields` orients r so lambda grows along it wherever decisive.
    let init_dir = match direction {
        Direction::Forward => r,
        Direction::Backward => [-r[0], -r[1]],
    };
    integrate_from_direction(model, u0, family, init_dir, tol)
}

/// Integration engine with an explicit initial direction; the direction
/// label is inferred from the observed eigenvalue trend.
pub fn integrate_from_direction(
    model: &FluxModel,
    u0: State,
    family: Family,
    init_dir: [f64; 2],
    tol: &Tolerances,
) -> Result<RarefactionSegment> {
    let norm = (init_dir[0] * init_dir[0] + init_dir[1] * init_dir[1]).sqrt();
    if norm < 1e-14 {
        return Err(RieffError::Parameter("zero rarefaction direction".into()));
    }
    let init_dir = [init_dir[0] / norm, init_dir[1] / norm];
    let (d0, l0) = tracked_field(model, u0, init_dir, tol)?;
    let nl0 = tracked_dirderiv(model, u0, d0, tol)?;

    let mut points = vec![u0];
    let mut lambdas = vec![l0];
    let mut nonlins = vec![nl0];
    let mut dirs = vec![d0];
    let h = tol.h_rar;
    let mut stop = StopReason::MaxLength;

    for _ in 0..tol.max_steps {
        let u = *points.last().unwrap();
        let dir = *dirs.last().unwrap();
        let nl_prev = *nonlins.last().unwrap();

        // Integral curves that run straight into a vertex of the triangle
        // follow an invariant line that is transversally unstable for the
        // marching scheme there (the eigenvalue gap collapses like the
        // squared distance). Once the march heads directly at a vertex,
        // finish along the straight segment.
        if let Some(vertex) = vertex_ahead(u, dir, 12.0 * h) {
            let dist = u.dist(&vertex);
            let dirv = [(vertex.u1 - u.u1) / dist, (vertex.u2 - u.u2) / dist];
            let mut covered = h;
            while covered < dist - 0.5 * h {
                let p = u.offset(dirv, covered);
                if let Ok((d, l)) = tracked_field(model, p, dirv, tol) {
                    let nl = tracked_dirderiv(model, p, d, tol).unwrap_or(0.0);
                    points.push(p);
                    lambdas.push(l);
                    nonlins.push(nl);
                    dirs.push(d);
                }
                covered += h;
            }
            points.push(vertex);
            // Both characteristic speeds vanish at a vertex of the Corey
            // model; the gap closes along the approach.
            lambdas.push(0.0);
            nonlins.push(*nonlins.last().unwrap());
            dirs.push(dirv);
            stop = StopReason::Boundary;
            break;
        }

        let next = match rk4_step(model, u, dir, h, tol) {
            Ok(s) => s,
            Err(RieffError::HyperbolicityLoss { .. }) => {
                stop = StopReason::HyperbolicityLoss;
                break;
            }
            Err(e) => return Err(e),
        };

        if next.boundary_margin() < -tol.eps_dom {
            // Linear backtracking onto the triangle boundary. The eps_dom
            // cushion keeps marches that travel along an edge (one
            // saturation identically zero up to roundoff) from stopping
            // early on sign noise.
            let margin = |tau: f64| -> f64 {
                rk4_step(model, u, dir, tau * h, tol)
                    .map(|s| s.boundary_margin() + tol.eps_dom)
                    .unwrap_or(-1.0)
            };
            let tau = bisect(margin, 0.0, 1.0, 1e-13);
            if tau * h > 1e-12 {
                if let Ok(bp) = rk4_step(model, u, dir, tau * h, tol) {
                    if let Ok((bd, bl)) = tracked_field(model, bp, dir, tol) {
                        let bnl = tracked_dirderiv(model, bp, bd, tol).unwrap_or(0.0);
                        points.push(bp);
                        lambdas.push(bl);
                        nonlins.push(bnl);
                        dirs.push(bd);
                    }
                }
            }
            stop = StopReason::Boundary;
            break;
        }

        let (nd, nlam) = match tracked_field(model, next, dir, tol) {
            Ok(v) => v,
            Err(_) => {
                stop = StopReason::HyperbolicityLoss;
                break;
            }
        };
        let nl_next = tracked_dirderiv(model, next, nd, tol)?;

        if nl_prev * nl_next < 0.0 {
            // Crossed the inflection manifold inside this step; refine the
            // endpoint by bisection on the nonlinearity.
            let g = |tau: f64| -> f64 {
                rk4_step(model, u, dir, tau * h, tol)
                    .ok()
                    .and_then(|s| {
                        let (d, _) = tracked_field(model, s, dir, tol).ok()?;
                        tracked_dirderiv(model, s, d, tol).ok()
                    })
                    .unwrap_or(0.0)
            };
            let tau = bisect(g, 0.0, 1.0, 1e-13);
            if tau * h > 1e-12 {
                if let Ok(ip) = rk4_step(model, u, dir, tau * h, tol) {
                    if let Ok((id, il)) = tracked_field(model, ip, dir, tol) {
                        let inl = tracked_dirderiv(model, ip, id, tol).unwrap_or(0.0);
                        points.push(ip);
                        lambdas.push(il);
                        nonlins.push(inl);
                        dirs.push(id);
                    }
                }
            }
            stop = StopReason::Inflection;
            break;
        }

        points.push(next);
        lambdas.push(nlam);
        nonlins.push(nl_next);
        dirs.push(nd);
    }

    let direction = if lambdas.len() >= 2 && lambdas[lambdas.len() - 1] < lambdas[0] {
        Direction::Backward
    } else {
        Direction::Forward
    };
    Ok(RarefactionSegment {
        family,
        direction,
        points,
        lambdas,
        nonlinearities: nonlins,
        dirs,
        stop_reason: stop,
    })
}

/// Refined inflection state of a segment that stopped at one.
pub fn find_inflection(model: &FluxModel, segment: &RarefactionSegment, tol: &Tolerances) -> Result<State> {
    if segment.stop_reason != StopReason::Inflection {
        return Err(RieffError::NotAnInflectionStop {
            reason: segment.stop_reason.label().to_string(),
        });
    }
    let u = segment.endpoint();
    let dir = *segment.dirs.last().unwrap();
    let nl = tracked_dirderiv(model, u, dir, tol)?;
    debug_assert!(nl.abs() <= 1e-9, "inflection endpoint not refined: {nl}");
    Ok(u)
}
