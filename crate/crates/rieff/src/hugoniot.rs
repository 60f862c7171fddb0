//! Rankine-Hugoniot locus tracing by pseudo-arclength continuation, shock
//! classification, Liu admissibility trimming and Bethe-Wendroff points.

use serde::Serialize;

use crate::config::Tolerances;
use crate::error::{Result, RieffError};
use crate::flux_model::{Family, FluxModel, State};
use crate::numerics::{bisect, solve3};

/// Which side of the jump the branch reference plays in admissibility checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    /// Reference is the left state of the jump.
    Forward,
    /// Reference is the right state of the jump.
    Backward,
}

impl std::str::FromStr for Orientation {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "forward" | "fwd" => Ok(Orientation::Forward),
            "backward" | "bwd" => Ok(Orientation::Backward),
            other => Err(format!("unknown orientation '{other}'")),
        }
    }
}

/// Lax inequality pattern of one shock.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LaxClass {
    SlowShock,
    FastShock,
    Overcompressive,
    Undercompressive,
    CharacteristicLeft,
    CharacteristicRight,
}

impl LaxClass {
    pub fn label(&self) -> &'static str {
        match self {
            LaxClass::SlowShock => "slow_shock",
            LaxClass::FastShock => "fast_shock",
            LaxClass::Overcompressive => "overcompressive",
            LaxClass::Undercompressive => "undercompressive",
            LaxClass::CharacteristicLeft => "characteristic_left",
            LaxClass::CharacteristicRight => "characteristic_right",
        }
    }
}

/// One local branch of the Hugoniot locus H(R), ordered from the start
/// point outward.
#[derive(Debug, Clone)]
pub struct HugoniotBranch {
    pub reference: State,
    pub points: Vec<State>,
    pub sigmas: Vec<f64>,
    pub lax_classes: Vec<LaxClass>,
    /// Cumulative arclength in state space.
    pub arclength: Vec<f64>,
    /// Unit tangents d(u1, u2, sigma)/ds oriented along the trace.
    pub tangents: Vec<[f64; 3]>,
    /// Direction in which the branch left its start point.
    pub start_dir: [f64; 2],
}

impl HugoniotBranch {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn truncated(&self, keep: usize) -> HugoniotBranch {
        HugoniotBranch {
            reference: self.reference,
            points: self.points[..keep].to_vec(),
            sigmas: self.sigmas[..keep].to_vec(),
            lax_classes: self.lax_classes[..keep].to_vec(),
            arclength: self.arclength[..keep].to_vec(),
            tangents: self.tangents[..keep].to_vec(),
            start_dir: self.start_dir,
        }
    }
}

/// Rankine-Hugoniot residual F(U) - F(R) - sigma (U - R).
pub fn rh_residual(model: &FluxModel, r: State, u: State, sigma: f64) -> [f64; 2] {
    let fr = model.flux2(r);
    let fu = model.flux2(u);
    [
        fu[0] - fr[0] - sigma * (u.u1 - r.u1),
        fu[1] - fr[1] - sigma * (u.u2 - r.u2),
    ]
}

/// Least-squares shock speed between two states together with the norm of
/// the Rankine-Hugoniot defect. Either jump component may vanish, so the
/// speed combines both relations.
pub fn shock_speed(model: &FluxModel, r: State, u: State) -> Result<(f64, f64)> {
    let du = [u.u1 - r.u1, u.u2 - r.u2];
    if du[0].abs() < 1e-14 && du[1].abs() < 1e-14 {
        return Err(RieffError::CoincidentStates { tol: 1e-14 });
    }
    let fr = model.flux2(r);
    let fu = model.flux2(u);
    let df = [fu[0] - fr[0], fu[1] - fr[1]];
    let sigma = (df[0] * du[0] + df[1] * du[1]) / (du[0] * du[0] + du[1] * du[1]);
    let res = [df[0] - sigma * du[0], df[1] - sigma * du[1]];
    Ok((sigma, (res[0] * res[0] + res[1] * res[1]).sqrt()))
}

/// Classifies a jump (left, right, sigma) by the Lax inequality pattern,
/// allowing single equalities within eps_eq.
pub fn lax_classify(
    model: &FluxModel,
    r: State,
    u: State,
    sigma: f64,
    orientation: Orientation,
    tol: &Tolerances,
) -> LaxClass {
    let (left, right) = match orientation {
        Orientation::Forward => (r, u),
        Orientation::Backward => (u, r),
    };
    classify_jump(model, left, right, sigma, tol)
}

fn classify_jump(model: &FluxModel, left: State, right: State, sigma: f64, tol: &Tolerances) -> LaxClass {
    let eps = tol.eps_eq;
    let cl = model.char_fields_raw(left, tol);
    let cr = model.char_fields_raw(right, tol);
    let (ls_l, lf_l) = match &cl {
        Ok(c) => (c.lambda_s, c.lambda_f),
        Err(_) => return LaxClass::Undercompressive,
    };
    let (ls_r, lf_r) = match &cr {
        Ok(c) => (c.lambda_s, c.lambda_f),
        Err(_) => return LaxClass::Undercompressive,
    };
    if (sigma - ls_r).abs() <= eps || (sigma - lf_r).abs() <= eps {
        return LaxClass::CharacteristicRight;
    }
    if (sigma - ls_l).abs() <= eps || (sigma - lf_l).abs() <= eps {
        return LaxClass::CharacteristicLeft;
    }
    let slow = ls_r < sigma && sigma < ls_l && sigma < lf_r;
    let fast = lf_r < sigma && sigma < lf_l && ls_l < sigma;
    let over = lf_r < sigma && sigma < ls_l;
    if over {
        LaxClass::Overcompressive
    } else if slow {
        LaxClass::SlowShock
    } else if fast {
        LaxClass::FastShock
    } else {
        LaxClass::Undercompressive
    }
}

/// Newton correction of (u1, u2, sigma) onto H(reference) subject to the
/// linear constraint (X - anchor) . constraint = 0.
fn correct_point(
    model: &FluxModel,
    reference: State,
    mut x: [f64; 3],
    anchor: [f64; 3],
    constraint: [f64; 3],
    tol: &Tolerances,
) -> Option<[f64; 3]> {
    for _ in 0..12 {
        let u = State::new(x[0], x[1]);
        let res = rh_residual(model, reference, u, x[2]);
        let cons = (x[0] - anchor[0]) * constraint[0]
            + (x[1] - anchor[1]) * constraint[1]
            + (x[2] - anchor[2]) * constraint[2];
        let norm = (res[0] * res[0] + res[1] * res[1]).sqrt() + cons.abs();
        if norm <= tol.eps_rh {
            return Some(x);
        }
        let j = model.jacobian_unchecked(u);
        let m = [
            [j[0][0] - x[2], j[0][1], -(x[0] - reference.u1)],
            [j[1][0], j[1][1] - x[2], -(x[1] - reference.u2)],
            constraint,
        ];
        let delta = solve3(m, [-res[0], -res[1], -cons])?;
        x[0] += delta[0];
        x[1] += delta[1];
        x[2] += delta[2];
        if !x.iter().all(|v| v.is_finite()) {
            return None;
        }
    }
    let u = State::new(x[0], x[1]);
    let res = rh_residual(model, reference, u, x[2]);
    if (res[0] * res[0] + res[1] * res[1]).sqrt() <= tol.eps_rh {
        Some(x)
    } else {
        None
    }
}

/// Unit tangent of the locus at X, from the null space of the 2x3 system
/// matrix (a cross product of its rows); oriented along `prev`.
fn locus_tangent(model: &FluxModel, reference: State, x: [f64; 3], prev: [f64; 3]) -> Option<[f64; 3]> {
    let u = State::new(x[0], x[1]);
    let j = model.jacobian_unchecked(u);
    let m1 = [j[0][0] - x[2], j[0][1], -(x[0] - reference.u1)];
    let m2 = [j[1][0], j[1][1] - x[2], -(x[1] - reference.u2)];
    let mut t = [
        m1[1] * m2[2] - m1[2] * m2[1],
        m1[2] * m2[0] - m1[0] * m2[2],
        m1[0] * m2[1] - m1[1] * m2[0],
    ];
    let norm = (t[0] * t[0] + t[1] * t[1] + t[2] * t[2]).sqrt();
    if norm < 1e-300 {
        return None;
    }
    for v in &mut t {
        *v /= norm;
    }
    if t[0] * prev[0] + t[1] * prev[1] + t[2] * prev[2] < 0.0 {
        for v in &mut t {
            *v = -*v;
        }
    }
    // The state-space projection can degenerate where the locus turns in
    // sigma only; callers treat a vanishing (t1, t2) as a dead end.
    Some(t)
}

/// Newton correction with a general linear constraint; used by the
/// effective-flux construction to project states onto the locus.
pub(crate) fn correct_with_constraint(
    model: &FluxModel,
    reference: State,
    x: [f64; 3],
    anchor: [f64; 3],
    constraint: [f64; 3],
    tol: &Tolerances,
) -> Option<[f64; 3]> {
    correct_point(model, reference, x, anchor, constraint, tol)
}

/// Locus tangent at a point, oriented arbitrarily.
pub(crate) fn tangent_at(model: &FluxModel, reference: State, x: [f64; 3]) -> Option<[f64; 3]> {
    locus_tangent(model, reference, x, [1.0, 0.0, 0.0])
}

/// Traces one branch of H(reference) starting at `start` in direction `dir`.
///
/// `start` may equal the reference (the usual case) or any other on-locus
/// state; the latter allows branches of a locus whose reference is a
/// degenerate vertex such as the pure-oil point.
pub fn trace_branch(
    model: &FluxModel,
    reference: State,
    start: State,
    dir: [f64; 2],
    tol: &Tolerances,
) -> Result<HugoniotBranch> {
    let norm = (dir[0] * dir[0] + dir[1] * dir[1]).sqrt();
    if norm < 1e-14 {
        return Err(RieffError::Parameter("zero start direction".into()));
    }
    let dir = [dir[0] / norm, dir[1] / norm];

    let at_reference = start.dist(&reference) < 1e-14;
    let (sigma0, dsigma0) = initial_speed_guess(model, reference, start, dir, tol)?;

    let mut prev_t = {
        let n = (1.0 + dsigma0 * dsigma0).sqrt();
        [dir[0] / n, dir[1] / n, dsigma0 / n]
    };
    let mut x = [start.u1, start.u2, sigma0];
    if !at_reference {
        // Snap the supplied start point onto the locus without moving it
        // along the launch direction.
        let anchor = x;
        x = correct_point(model, reference, x, anchor, [dir[0], dir[1], 0.0], tol)
            .ok_or(RieffError::NewtonDivergence { step: 0, residual: f64::NAN })?;
    }

    let mut branch = HugoniotBranch {
        reference,
        points: Vec::new(),
        sigmas: Vec::new(),
        lax_classes: Vec::new(),
        arclength: Vec::new(),
        tangents: Vec::new(),
        start_dir: dir,
    };
    let mut arclen = 0.0;
    if !at_reference {
        push_point(model, &mut branch, x, arclen, prev_t, tol);
    }

    let mut h = tol.h_max.min(10.0 * tol.h_min);
    let mut step = 0;
    let mut jumps = 0;
    while step < tol.max_steps {
        step += 1;
        let mut predictor = [
            x[0] + h * prev_t[0],
            x[1] + h * prev_t[1],
            x[2] + h * prev_t[2],
        ];
        if branch.points.is_empty() && at_reference {
            // First step away from the reference: predict sigma with the
            // least-squares speed; the tangent-based guess can vanish at a
            // degenerate vertex and leave the corrector matrix singular.
            if let Ok((sigma, _)) =
                shock_speed(model, reference, State::new(predictor[0], predictor[1]))
            {
                predictor[2] = sigma;
            }
        }
        let corrected = correct_point(model, reference, predictor, predictor, prev_t, tol);
        let Some(next) = corrected else {
            h *= 0.5;
            if h < tol.h_min {
                // The corrector degenerates where the locus crosses itself
                // (the system matrix loses rank when sigma matches an
                // eigenvalue); stride over the point along the incoming
                // tangent and pick up the aligned branch on the far side.
                if !branch.points.is_empty() && jumps < 4 {
                    if let Some((nx, nt)) = stride_past(model, reference, x, prev_t, tol) {
                        jumps += 1;
                        arclen += State::new(nx[0], nx[1]).dist(&State::new(x[0], x[1]));
                        x = nx;
                        prev_t = nt;
                        push_point(model, &mut branch, x, arclen, nt, tol);
                        h = tol.h_max.min(10.0 * tol.h_min);
                        continue;
                    }
                }
                if branch.points.is_empty() {
                    return Err(RieffError::NewtonDivergence { step, residual: f64::NAN });
                }
                break;
            }
            continue;
        };
        let next_state = State::new(next[0], next[1]);
        if next_state.boundary_margin() < -tol.eps_dom {
            // Leaving the triangle: shrink the step onto the boundary.
            if let Some((bx, bt)) = backtrack_to_boundary(model, reference, x, prev_t, h, tol) {
                let ds = State::new(bx[0], bx[1]).dist(&State::new(x[0], x[1]));
                if ds > 1e-13 {
                    arclen += ds;
                    push_point(model, &mut branch, bx, arclen, bt, tol);
                }
            }
            break;
        }
        let t = match locus_tangent(model, reference, next, prev_t) {
            Some(t) if (t[0] * t[0] + t[1] * t[1]).sqrt() > 1e-10 => t,
            _ => {
                h *= 0.5;
                if h < tol.h_min {
                    break;
                }
                continue;
            }
        };
        arclen += next_state.dist(&State::new(x[0], x[1]));
        x = next;
        prev_t = t;
        push_point(model, &mut branch, x, arclen, t, tol);
        h = (h * 1.4).min(tol.h_max);
    }
    Ok(branch)
}

/// Long-stride predictor-corrector used to pass a transcritical point of
/// the locus; succeeds only when the landing tangent stays aligned.
fn stride_past(
    model: &FluxModel,
    reference: State,
    x: [f64; 3],
    t: [f64; 3],
    tol: &Tolerances,
) -> Option<([f64; 3], [f64; 3])> {
    for stride in [2.0 * tol.h_max, 4.0 * tol.h_max, 8.0 * tol.h_max] {
        let predictor = [
            x[0] + stride * t[0],
            x[1] + stride * t[1],
            x[2] + stride * t[2],
        ];
        if let Some(next) = correct_point(model, reference, predictor, predictor, t, tol) {
            if !State::new(next[0], next[1]).in_triangle(tol.eps_dom) {
                continue;
            }
            if let Some(nt) = locus_tangent(model, reference, next, t) {
                let align = nt[0] * t[0] + nt[1] * t[1] + nt[2] * t[2];
                if align > 0.5 && (nt[0] * nt[0] + nt[1] * nt[1]).sqrt() > 1e-10 {
                    return Some((next, nt));
                }
            }
        }
    }
    None
}

fn initial_speed_guess(
    model: &FluxModel,
    reference: State,
    start: State,
    dir: [f64; 2],
    tol: &Tolerances,
) -> Result<(f64, f64)> {
    if start.dist(&reference) >= 1e-14 {
        let (sigma, _res) = shock_speed(model, reference, start)?;
        return Ok((sigma, 0.0));
    }
    match model.char_fields_raw(reference, tol) {
        Ok(cf) if !cf.near_coincidence => {
            let ds = (dir[0] * cf.r_s[0] + dir[1] * cf.r_s[1]).abs();
            let df = (dir[0] * cf.r_f[0] + dir[1] * cf.r_f[1]).abs();
            let family = if ds >= df { Family::Slow } else { Family::Fast };
            let lambda = cf.lambda(family);
            let slope = 0.5 * model.dirderiv_lambda(reference, family, dir, tol);
            Ok((lambda, slope))
        }
        // Degenerate reference (e.g. a vertex of the triangle): the branch
        // still exists, start with the mean characteristic speed.
        _ => {
            let j = model.jacobian_unchecked(reference);
            Ok((0.5 * (j[0][0] + j[1][1]), 0.0))
        }
    }
}

fn push_point(
    model: &FluxModel,
    branch: &mut HugoniotBranch,
    x: [f64; 3],
    arclen: f64,
    tangent: [f64; 3],
    tol: &Tolerances,
) {
    let u = State::new(x[0], x[1]);
    branch.points.push(u);
    branch.sigmas.push(x[2]);
    branch
        .lax_classes
        .push(lax_classify(model, branch.reference, u, x[2], Orientation::Forward, tol));
    branch.arclength.push(arclen);
    branch.tangents.push(tangent);
}

fn backtrack_to_boundary(
    model: &FluxModel,
    reference: State,
    x: [f64; 3],
    t: [f64; 3],
    h: f64,
    tol: &Tolerances,
) -> Option<([f64; 3], [f64; 3])> {
    let correct_at = |tau: f64| -> Option<[f64; 3]> {
        let predictor = [x[0] + tau * h * t[0], x[1] + tau * h * t[1], x[2] + tau * h * t[2]];
        correct_point(model, reference, predictor, predictor, t, tol)
    };
    let margin = |tau: f64| -> f64 {
        correct_at(tau)
            .map(|p| State::new(p[0], p[1]).boundary_margin() + tol.eps_dom)
            .unwrap_or(-1.0)
    };
    if margin(1.0) > 0.0 {
        return None;
    }
    let tau = bisect(margin, 0.0, 1.0, 1e-13);
    let point = correct_at(tau)?;
    let tangent = locus_tangent(model, reference, point, t).unwrap_or(t);
    Some((point, tangent))
}

/// Traces up to four local branches of H(R), one along each of the
/// directions +/- r_s and +/- r_f at the reference.
pub fn trace_hugoniot(model: &FluxModel, reference: State, tol: &Tolerances) -> Result<Vec<HugoniotBranch>> {
    let cf = model.char_fields(reference, tol)?;
    if cf.near_coincidence {
        return Err(RieffError::StartDegenerate {
            u1: reference.u1,
            u2: reference.u2,
        });
    }
    let mut branches = Vec::new();
    for dir in [
        cf.r_s,
        [-cf.r_s[0], -cf.r_s[1]],
        cf.r_f,
        [-cf.r_f[0], -cf.r_f[1]],
    ] {
        match trace_branch(model, reference, reference, dir, tol) {
            Ok(branch) if !branch.is_empty() => branches.push(branch),
            Ok(_) => {}
            Err(RieffError::NewtonDivergence { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(branches)
}

/// Evaluates a point between two branch samples by correcting the linear
/// interpolant back onto the locus, with the secant as the constraint.
fn correct_between(
    model: &FluxModel,
    branch: &HugoniotBranch,
    i: usize,
    tau: f64,
    tol: &Tolerances,
) -> Option<[f64; 3]> {
    let a = [branch.points[i].u1, branch.points[i].u2, branch.sigmas[i]];
    let b = [
        branch.points[i + 1].u1,
        branch.points[i + 1].u2,
        branch.sigmas[i + 1],
    ];
    let predictor = [
        a[0] + tau * (b[0] - a[0]),
        a[1] + tau * (b[1] - a[1]),
        a[2] + tau * (b[2] - a[2]),
    ];
    let mut secant = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
    let norm = (secant[0] * secant[0] + secant[1] * secant[1] + secant[2] * secant[2]).sqrt();
    if norm < 1e-300 {
        return Some(a);
    }
    for v in &mut secant {
        *v /= norm;
    }
    correct_point(model, branch.reference, predictor, predictor, secant, tol)
}

/// Returns the maximal initial arc on which the Liu E-condition holds:
/// with the reference as left state the speed never exceeds the speed to
/// any earlier point (reversed comparison for the backward orientation).
/// The first violation is refined by bisection before trimming.
pub fn liu_trim(
    model: &FluxModel,
    branch: &HugoniotBranch,
    orientation: Orientation,
    tol: &Tolerances,
) -> HugoniotBranch {
    if branch.len() <= 1 {
        return branch.clone();
    }
    let sign = match orientation {
        Orientation::Forward => 1.0,
        Orientation::Backward => -1.0,
    };
    // Forward: sigma must stay at or below the running minimum.
    let mut extremum = branch.sigmas[0];
    let mut violation = None;
    for i in 1..branch.len() {
        if sign * (branch.sigmas[i] - extremum) > tol.eps_eq {
            violation = Some(i);
            break;
        }
        if sign * (branch.sigmas[i] - extremum) < 0.0 {
            extremum = branch.sigmas[i];
        }
    }
    let Some(i) = violation else {
        return branch.clone();
    };

    let mut trimmed = branch.truncated(i);
    // Refine the admissibility boundary inside [i-1, i]: either the speed
    // extremum (tangent sigma-component crossing zero) or the crossing of
    // the carried extremum level.
    let seg = i - 1;
    let dsig_a = branch.tangents[seg][2];
    let dsig_b = branch.tangents[seg + 1][2];
    let refined = if dsig_a * dsig_b < 0.0 {
        let g = |tau: f64| -> f64 {
            correct_between(model, branch, seg, tau, tol)
                .and_then(|x| locus_tangent(model, branch.reference, x, branch.tangents[seg]))
                .map(|t| t[2])
                .unwrap_or(0.0)
        };
        let tau = bisect(g, 0.0, 1.0, 1e-13);
        correct_between(model, branch, seg, tau, tol)
    } else {
        let level = extremum;
        let g = |tau: f64| -> f64 {
            correct_between(model, branch, seg, tau, tol)
                .map(|x| sign * (x[2] - level))
                .unwrap_or(0.0)
        };
        if g(0.0) * g(1.0) < 0.0 {
            let tau = bisect(g, 0.0, 1.0, 1e-13);
            correct_between(model, branch, seg, tau, tol)
        } else {
            None
        }
    };
    if let Some(x) = refined {
        let state = State::new(x[0], x[1]);
        let last = *trimmed.points.last().unwrap();
        let ds = state.dist(&last);
        if ds > 1e-13 {
            let arclen = trimmed.arclength.last().unwrap() + ds;
            let tangent = locus_tangent(model, branch.reference, x, branch.tangents[seg])
                .unwrap_or(branch.tangents[seg]);
            push_point(model, &mut trimmed, x, arclen, tangent, tol);
        }
    }
    trimmed
}

/// A locus point where the shock is characteristic: sigma = lambda_{k'}.
#[derive(Debug, Clone, Copy)]
pub struct BethePoint {
    pub state: State,
    pub sigma: f64,
    /// Family whose characteristic speed matches sigma; may differ from the
    /// family the branch started tangent to.
    pub family: Family,
    pub arclength: f64,
    pub tangent: [f64; 3],
    /// Residual sigma - lambda_{k'} after refinement.
    pub g: f64,
}

/// Locates every point of the branch where sigma(R, .) crosses one of the
/// characteristic speeds, refined by bisection on corrected locus points.
pub fn find_bethe_wendroff(model: &FluxModel, branch: &HugoniotBranch, tol: &Tolerances) -> Vec<BethePoint> {
    let mut found: Vec<BethePoint> = Vec::new();
    if branch.len() < 2 {
        return found;
    }
    for family in [Family::Slow, Family::Fast] {
        let g_at = |state: State, sigma: f64| -> Option<f64> {
            model
                .char_fields_raw(state, tol)
                .ok()
                .map(|cf| sigma - cf.lambda(family))
        };
        let mut g_prev = g_at(branch.points[0], branch.sigmas[0]);
        for i in 1..branch.len() {
            let g_here = g_at(branch.points[i], branch.sigmas[i]);
            if let (Some(ga), Some(gb)) = (g_prev, g_here) {
                if ga * gb < 0.0 && ga.abs().max(gb.abs()) > 1e-12 {
                    if let Some(bw) = refine_bethe_wendroff(model, branch, i - 1, family, tol) {
                        found.push(bw);
                    }
                }
            }
            g_prev = g_here;
        }
    }
    // A root seen by both families at (numerically) the same state is one
    // point; keep the sharper match.
    found.sort_by(|a, b| a.arclength.partial_cmp(&b.arclength).unwrap());
    let mut dedup: Vec<BethePoint> = Vec::new();
    for bw in found {
        if let Some(last) = dedup.last_mut() {
            if last.state.dist(&bw.state) < 1e-9 {
                if bw.g.abs() < last.g.abs() {
                    *last = bw;
                }
                continue;
            }
        }
        dedup.push(bw);
    }
    dedup
}

fn refine_bethe_wendroff(
    model: &FluxModel,
    branch: &HugoniotBranch,
    seg: usize,
    family: Family,
    tol: &Tolerances,
) -> Option<BethePoint> {
    let g = |tau: f64| -> f64 {
        correct_between(model, branch, seg, tau, tol)
            .and_then(|x| {
                model
                    .char_fields_raw(State::new(x[0], x[1]), tol)
                    .ok()
                    .map(|cf| x[2] - cf.lambda(family))
            })
            .unwrap_or(0.0)
    };
    let tau = bisect(g, 0.0, 1.0, 1e-14);
    let x = correct_between(model, branch, seg, tau, tol)?;
    let state = State::new(x[0], x[1]);
    let cf = model.char_fields_raw(state, tol).ok()?;
    let residual = x[2] - cf.lambda(family);
    let tangent = locus_tangent(model, branch.reference, x, branch.tangents[seg])?;
    let ds = state.dist(&branch.points[seg]);
    Some(BethePoint {
        state,
        sigma: x[2],
        family,
        arclength: branch.arclength[seg] + ds,
        tangent,
        g: residual,
    })
}
