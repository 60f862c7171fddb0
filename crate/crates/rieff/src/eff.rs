//! Effective flux functions: affine base-curve coordinates, shock and
//! rarefaction liftings, and the composite construction across
//! Bethe-Wendroff and inflection transitions.
//!
//! A wave group through a reference state R is parametrized by an affine
//! coordinate ell(U) = a0 + a1 u1 + a2 u2. Lifting the group produces a
//! scalar flux f(ell) that equals the same affine combination of the flux
//! components along the curve, so the group solves a scalar conservation
//! law in ell.

use serde::Serialize;

use crate::config::Tolerances;
use crate::error::{Result, RieffError};
use crate::flux_model::{Family, FluxModel, State};
use crate::hugoniot::{
    find_bethe_wendroff, shock_speed, trace_branch, HugoniotBranch, Orientation,
};
use crate::numerics::{bracket_index, hermite};
use crate::rarefaction::{integrate_from_direction, RarefactionSegment, StopReason};

/// Affine weights defining ell(U) = alpha0 + alpha1 u1 + alpha2 u2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParamCoordinate {
    pub alpha0: f64,
    pub alpha1: f64,
    pub alpha2: f64,
}

impl ParamCoordinate {
    pub const U1: ParamCoordinate = ParamCoordinate { alpha0: 0.0, alpha1: 1.0, alpha2: 0.0 };
    pub const U2: ParamCoordinate = ParamCoordinate { alpha0: 0.0, alpha1: 0.0, alpha2: 1.0 };
    pub const U3: ParamCoordinate = ParamCoordinate { alpha0: 1.0, alpha1: -1.0, alpha2: -1.0 };

    pub fn new(alpha0: f64, alpha1: f64, alpha2: f64) -> Result<Self> {
        if alpha1 == 0.0 && alpha2 == 0.0 {
            return Err(RieffError::Parameter(
                "coordinate weights (alpha1, alpha2) must not both vanish".into(),
            ));
        }
        Ok(ParamCoordinate { alpha0, alpha1, alpha2 })
    }

    /// ell(U).
    pub fn project(&self, u: State) -> f64 {
        self.alpha0 + self.alpha1 * u.u1 + self.alpha2 * u.u2
    }

    /// The same affine weights applied to a flux triple; with the u3
    /// preset this reproduces f3 = 1 - f1 - f2 exactly.
    pub fn flux_combination(&self, f: [f64; 3]) -> f64 {
        self.alpha0 + self.alpha1 * f[0] + self.alpha2 * f[1]
    }

    /// Rate of change of ell along a state-space direction.
    pub fn project_dir(&self, dir: [f64; 2]) -> f64 {
        self.alpha1 * dir[0] + self.alpha2 * dir[1]
    }
}

impl std::str::FromStr for ParamCoordinate {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "u1" => Ok(ParamCoordinate::U1),
            "u2" => Ok(ParamCoordinate::U2),
            "u3" => Ok(ParamCoordinate::U3),
            other => {
                let parts: Vec<&str> = other.split(',').collect();
                if parts.len() != 3 {
                    return Err(format!(
                        "coordinate must be u1, u2, u3 or 'a0,a1,a2', got '{other}'"
                    ));
                }
                let vals: std::result::Result<Vec<f64>, _> =
                    parts.iter().map(|p| p.trim().parse::<f64>()).collect();
                let vals = vals.map_err(|e| format!("bad coordinate weights: {e}"))?;
                ParamCoordinate::new(vals[0], vals[1], vals[2]).map_err(|e| e.to_string())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PieceKind {
    Shock,
    Rarefaction,
}

impl PieceKind {
    pub fn label(&self) -> &'static str {
        match self {
            PieceKind::Shock => "shock",
            PieceKind::Rarefaction => "rarefaction",
        }
    }
}

/// The geometric source a base-curve piece was cut from.
#[derive(Debug, Clone)]
pub enum PieceSource {
    Shock(HugoniotBranch),
    Rarefaction(RarefactionSegment),
}

impl PieceSource {
    pub fn kind(&self) -> PieceKind {
        match self {
            PieceSource::Shock(_) => PieceKind::Shock,
            PieceSource::Rarefaction(_) => PieceKind::Rarefaction,
        }
    }

    pub fn states(&self) -> &[State] {
        match self {
            PieceSource::Shock(b) => &b.points,
            PieceSource::Rarefaction(s) => &s.points,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BasePiece {
    pub source: PieceSource,
    pub ells: Vec<f64>,
}

/// A wave group parametrized by a monotone affine coordinate.
#[derive(Debug, Clone)]
pub struct BaseCurve {
    pub reference: State,
    pub coord: ParamCoordinate,
    pub pieces: Vec<BasePiece>,
}

/// Validates and assembles a base curve: the coordinate must be strictly
/// monotone along the concatenation and consecutive pieces must share
/// their junction state.
pub fn make_base_curve(
    reference: State,
    sources: Vec<PieceSource>,
    coord: ParamCoordinate,
) -> Result<BaseCurve> {
    let mut pieces = Vec::with_capacity(sources.len());
    let mut all_ells: Vec<f64> = Vec::new();
    let mut prev_end: Option<State> = None;
    for source in sources {
        let states = source.states();
        if let (Some(prev), Some(first)) = (prev_end, states.first()) {
            if prev.dist(first) > 1e-8 {
                return Err(RieffError::Parameter(format!(
                    "base-curve pieces do not share an endpoint: gap {:.3e}",
                    prev.dist(first)
                )));
            }
        }
        prev_end = states.last().copied();
        let ells: Vec<f64> = states.iter().map(|s| coord.project(*s)).collect();
        // Skip the duplicated junction sample when flattening.
        let skip = usize::from(!all_ells.is_empty() && !ells.is_empty());
        all_ells.extend_from_slice(&ells[skip.min(ells.len())..]);
        pieces.push(BasePiece { source, ells });
    }
    if all_ells.len() >= 2 {
        let dir = (all_ells[all_ells.len() - 1] - all_ells[0]).signum();
        for (i, w) in all_ells.windows(2).enumerate() {
            if dir * (w[1] - w[0]) <= 0.0 {
                return Err(RieffError::NonMonotoneCoordinate { index: i + 1, ell: w[1] });
            }
        }
    }
    Ok(BaseCurve { reference, coord, pieces })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BreakTag {
    /// Welge tangency of the lifted flux = Bethe-Wendroff point of the locus.
    BetheWendroff,
    Inflection,
}

impl BreakTag {
    pub fn label(&self) -> &'static str {
        match self {
            BreakTag::BetheWendroff => "bethe_wendroff",
            BreakTag::Inflection => "inflection",
        }
    }
}

/// Transition point between composite pieces, with the measured jumps of
/// the lifting and its derivative across it.
#[derive(Debug, Clone, Copy)]
pub struct Breakpoint {
    pub ell: f64,
    pub tag: BreakTag,
    pub state: State,
    /// Family the construction continues with after this point.
    pub family_after: Option<Family>,
    pub f_jump: f64,
    pub fprime_jump: f64,
}

/// One sampled point of an effective flux function.
#[derive(Debug, Clone, Copy)]
pub struct EffSample {
    pub ell: f64,
    pub f: f64,
    pub fprime: f64,
    pub state: State,
    /// dU/d(ell) along the base curve, for state interpolation.
    pub dstate: [f64; 2],
    pub kind: PieceKind,
}

/// A sampled effective flux function over a monotone interval, with exact
/// breakpoints at the composite transitions.
#[derive(Debug, Clone)]
pub struct EffectiveFlux {
    pub model: FluxModel,
    pub interval: (f64, f64),
    /// Samples sorted by strictly increasing ell.
    pub samples: Vec<EffSample>,
    pub breakpoints: Vec<Breakpoint>,
    pub base: BaseCurve,
}

impl EffectiveFlux {
    pub fn ell_reference(&self) -> f64 {
        self.base.coord.project(self.base.reference)
    }

    pub fn ell_min(&self) -> f64 {
        self.interval.0
    }

    pub fn ell_max(&self) -> f64 {
        self.interval.1
    }

    fn bracket(&self, ell: f64) -> usize {
        // Samples are strictly increasing in ell.
        let grid: Vec<f64> = self.samples.iter().map(|s| s.ell).collect();
        bracket_index(&grid, ell)
    }

    /// Value and derivative by cubic Hermite interpolation on the sample
    /// grid; the stored slopes keep the evaluation derivative-consistent.
    pub fn eval(&self, ell: f64) -> (f64, f64) {
        if self.samples.len() == 1 {
            let s = &self.samples[0];
            return (s.f, s.fprime);
        }
        let i = self.bracket(ell);
        let (a, b) = (&self.samples[i], &self.samples[i + 1]);
        hermite(a.ell, b.ell, a.f, b.f, a.fprime, b.fprime, ell)
    }

    /// Base-curve state at a coordinate value, by per-component Hermite
    /// interpolation with the stored state derivatives.
    pub fn state_at(&self, ell: f64) -> State {
        if self.samples.len() == 1 {
            return self.samples[0].state;
        }
        let i = self.bracket(ell);
        let (a, b) = (&self.samples[i], &self.samples[i + 1]);
        let (u1, _) = hermite(a.ell, b.ell, a.state.u1, b.state.u1, a.dstate[0], b.dstate[0], ell);
        let (u2, _) = hermite(a.ell, b.ell, a.state.u2, b.state.u2, a.dstate[1], b.dstate[1], ell);
        State::new(u1, u2)
    }

    /// Piece kind governing the interval that contains ell.
    pub fn kind_at(&self, ell: f64) -> PieceKind {
        if self.samples.len() == 1 {
            return self.samples[0].kind;
        }
        let i = self.bracket(ell);
        self.samples[i + 1].kind
    }
}

/// Shock lifting: f(ell) = phi(R) + sigma(R, G(ell)) (ell - ell_R) over a
/// traced locus arc. Sample slopes come from the locus tangents, so the
/// lifted values satisfy the chord identity exactly at the samples.
pub fn lift_shock(
    model: &FluxModel,
    branch: &HugoniotBranch,
    coord: ParamCoordinate,
    tol: &Tolerances,
) -> Result<Vec<EffSample>> {
    let reference = branch.reference;
    let ell_r = coord.project(reference);
    let phi_r = coord.flux_combination(model.eval_flux_unchecked(reference));
    let mut samples = Vec::with_capacity(branch.len() + 1);

    // A branch that starts at the reference carries the removable point
    // ell = ell_R with f = phi(R); the slope there is the limiting shock
    // speed, taken from the first trace samples.
    let starts_at_reference = branch
        .points
        .first()
        .map(|p| p.dist(&reference) <= 5.0 * tol.h_max)
        .unwrap_or(false);
    if starts_at_reference {
        let slope = match (branch.sigmas.first(), branch.sigmas.get(1)) {
            (Some(&s0), Some(&s1)) => {
                let ds = branch.arclength[1] - branch.arclength[0];
                if ds > 0.0 {
                    s0 - (s1 - s0) / ds * branch.arclength[0]
                } else {
                    s0
                }
            }
            (Some(&s0), None) => s0,
            _ => 0.0,
        };
        let t0 = branch.tangents.first().copied().unwrap_or([1.0, 0.0, 0.0]);
        let dl = coord.project_dir([t0[0], t0[1]]);
        let dstate = if dl.abs() > 1e-14 {
            [t0[0] / dl, t0[1] / dl]
        } else {
            [0.0, 0.0]
        };
        samples.push(EffSample {
            ell: ell_r,
            f: phi_r,
            fprime: slope,
            state: reference,
            dstate,
            kind: PieceKind::Shock,
        });
    }

    for i in 0..branch.len() {
        let u = branch.points[i];
        let sigma = branch.sigmas[i];
        let ell = coord.project(u);
        let f = phi_r + sigma * (ell - ell_r);
        let t = branch.tangents[i];
        let dl_ds = coord.project_dir([t[0], t[1]]);
        let j = model.jacobian_unchecked(u);
        let dphi_ds = coord.alpha1 * (j[0][0] * t[0] + j[0][1] * t[1])
            + coord.alpha2 * (j[1][0] * t[0] + j[1][1] * t[1]);
        let (fprime, dstate) = if dl_ds.abs() > 1e-14 {
            (dphi_ds / dl_ds, [t[0] / dl_ds, t[1] / dl_ds])
        } else {
            (f64::NAN, [0.0, 0.0])
        };
        samples.push(EffSample {
            ell,
            f,
            fprime,
            state: u,
            dstate,
            kind: PieceKind::Shock,
        });
    }
    Ok(samples)
}

/// Rarefaction lifting: f accumulates the integral of lambda d(ell) from
/// `f_start`, by derivative-corrected trapezoid quadrature with a
/// Richardson halving check; f'(ell) = lambda(G(ell)) per sample.
pub fn lift_rarefaction(
    model: &FluxModel,
    segment: &RarefactionSegment,
    coord: ParamCoordinate,
    f_start: f64,
    tol: &Tolerances,
) -> Result<Vec<EffSample>> {
    let _ = model;
    let n = segment.len();
    let mut samples = Vec::with_capacity(n);
    if n == 0 {
        return Ok(samples);
    }
    let ells: Vec<f64> = segment.points.iter().map(|p| coord.project(*p)).collect();
    // dlambda/d(ell) from the stored arclength derivatives.
    let mut dlam = vec![0.0; n];
    let mut dstate = vec![[0.0, 0.0]; n];
    for i in 0..n {
        let dl_ds = coord.project_dir(segment.dirs[i]);
        if dl_ds.abs() > 1e-14 {
            dlam[i] = segment.nonlinearities[i] / dl_ds;
            dstate[i] = [segment.dirs[i][0] / dl_ds, segment.dirs[i][1] / dl_ds];
        }
    }
    let corrected_trap = |i: usize, j: usize| -> f64 {
        let h = ells[j] - ells[i];
        0.5 * h * (segment.lambdas[i] + segment.lambdas[j])
            + h * h / 12.0 * (dlam[i] - dlam[j])
    };
    let mut acc = f_start;
    for i in 0..n {
        if i > 0 {
            acc += corrected_trap(i - 1, i);
        }
        samples.push(EffSample {
            ell: ells[i],
            f: acc,
            fprime: segment.lambdas[i],
            state: segment.points[i],
            dstate: dstate[i],
            kind: PieceKind::Rarefaction,
        });
    }
    // Richardson check: the same rule on the half-resolution grid must
    // agree with the full-grid total.
    if n >= 5 {
        let full = samples[n - 1].f - f_start;
        let mut coarse = 0.0;
        let mut i = 0;
        while i + 2 < n {
            coarse += corrected_trap(i, i + 2);
            i += 2;
        }
        if i < n - 1 {
            coarse += corrected_trap(i, n - 1);
        }
        let estimate = (full - coarse).abs();
        if estimate > tol.eps_quad {
            return Err(RieffError::QuadratureCheck { estimate, tol: tol.eps_quad });
        }
    }
    Ok(samples)
}

/// Which wave the composite construction starts with.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FirstWave {
    /// Shock first; falls back to a rarefaction when the reference sits on
    /// the inflection manifold.
    Auto,
    Shock,
    Rarefaction,
}

#[derive(Debug, Clone, Copy)]
pub struct EffOptions {
    pub first: FirstWave,
    /// Explicit launch direction in state space; required when the
    /// reference state is degenerate (e.g. a vertex of the triangle).
    pub dir_hint: Option<[f64; 2]>,
    pub max_pieces: usize,
}

impl Default for EffOptions {
    fn default() -> Self {
        EffOptions {
            first: FirstWave::Auto,
            dir_hint: None,
            max_pieces: 16,
        }
    }
}

/// Composite EFF construction with the default options: the first wave is
/// a shock (the admissible locus arc up to its first Bethe-Wendroff
/// point), then rarefactions and further locus arcs alternate.
pub fn build_eff(
    model: &FluxModel,
    reference: State,
    family: Family,
    orientation: Orientation,
    coord: ParamCoordinate,
    tol: &Tolerances,
) -> Result<EffectiveFlux> {
    build_eff_with(model, reference, family, orientation, coord, EffOptions::default(), tol)
}

enum Mode {
    Shock,
    Rarefaction(Family),
}

pub fn build_eff_with(
    model: &FluxModel,
    reference: State,
    family: Family,
    orientation: Orientation,
    coord: ParamCoordinate,
    opts: EffOptions,
    tol: &Tolerances,
) -> Result<EffectiveFlux> {
    if !reference.in_triangle(tol.eps_dom) {
        return Err(RieffError::Domain { u1: reference.u1, u2: reference.u2 });
    }
    // Resolve the launch mode and direction.
    let (mut mode, mut dir) = match opts.dir_hint {
        Some(hint) => {
            let mode = match opts.first {
                FirstWave::Rarefaction => Mode::Rarefaction(family),
                _ => Mode::Shock,
            };
            (mode, hint)
        }
        None => {
            let cf = model.char_fields(reference, tol)?;
            if cf.near_coincidence {
                return Err(RieffError::StartDegenerate {
                    u1: reference.u1,
                    u2: reference.u2,
                });
            }
            let r = cf.eigenvector(family);
            let nl = model.dirderiv_lambda(reference, family, r, tol);
            let on_inflection = nl.abs() < tol.eps_nl;
            let first = match opts.first {
                FirstWave::Auto if on_inflection => FirstWave::Rarefaction,
                FirstWave::Auto => FirstWave::Shock,
                other => other,
            };
            // Forward groups open with a shock on the side where the
            // characteristic speed decreases, backward groups on the
            // increasing side; rarefaction-first flips the side.
            let shock_dir = match orientation {
                Orientation::Forward => [-r[0], -r[1]],
                Orientation::Backward => r,
            };
            match first {
                FirstWave::Rarefaction => {
                    (Mode::Rarefaction(family), [-shock_dir[0], -shock_dir[1]])
                }
                _ => (Mode::Shock, shock_dir),
            }
        }
    };

    let mut sources: Vec<PieceSource> = Vec::new();
    let mut samples: Vec<EffSample> = Vec::new();
    let mut breakpoints: Vec<Breakpoint> = Vec::new();
    let mut cursor = reference;
    let mut piece = 0;

    loop {
        if piece >= opts.max_pieces {
            break;
        }
        match mode {
            Mode::Shock => {
                let branch = trace_branch(model, reference, cursor, dir, tol)
                    .map_err(|e| e.in_piece(piece))?;
                if branch.is_empty() {
                    break;
                }
                let guard = 10.0 * tol.h_min;
                // Only characteristic points where the locus is tangent to
                // the matching eigenvector are composite transitions; the
                // speed can also cross the *transverse* family's
                // eigenvalue at a locus self-intersection, and the base
                // curve passes straight through those.
                let bw = find_bethe_wendroff(model, &branch, tol)
                    .into_iter()
                    .filter(|p| p.arclength > guard)
                    .find(|p| is_transition_point(&branch, p));
                match bw {
                    Some(bw) => {
                        let launch = approach_dir(&branch, bw.arclength);
                        let cut = cut_branch_at(model, &branch, &bw, tol);
                        let piece_samples = lift_shock(model, &cut, coord, tol)
                            .map_err(|e| e.in_piece(piece))?;
                        let fprime_before = piece_samples.last().map(|s| s.fprime);
                        let f_before = piece_samples.last().map(|s| s.f);
                        append_samples(&mut samples, piece_samples);
                        sources.push(PieceSource::Shock(cut));
                        let lambda_after = model
                            .char_fields_raw(bw.state, tol)
                            .map(|c| c.lambda(bw.family))
                            .unwrap_or(bw.sigma);
                        let phi_at = coord.flux_combination(model.eval_flux_unchecked(bw.state));
                        breakpoints.push(Breakpoint {
                            ell: coord.project(bw.state),
                            tag: BreakTag::BetheWendroff,
                            state: bw.state,
                            family_after: Some(bw.family),
                            f_jump: (f_before.unwrap_or(phi_at) - phi_at).abs(),
                            fprime_jump: (fprime_before.unwrap_or(lambda_after) - lambda_after)
                                .abs(),
                        });
                        cursor = bw.state;
                        let tn =
                            (bw.tangent[0] * bw.tangent[0] + bw.tangent[1] * bw.tangent[1]).sqrt();
                        dir = if tn > 1e-9 {
                            [bw.tangent[0] / tn, bw.tangent[1] / tn]
                        } else {
                            launch.unwrap_or(dir)
                        };
                        mode = Mode::Rarefaction(bw.family);
                    }
                    None => {
                        let piece_samples = lift_shock(model, &branch, coord, tol)
                            .map_err(|e| e.in_piece(piece))?;
                        append_samples(&mut samples, piece_samples);
                        sources.push(PieceSource::Shock(branch));
                        break;
                    }
                }
            }
            Mode::Rarefaction(fam) => {
                let segment = integrate_from_direction(model, cursor, fam, dir, tol)
                    .map_err(|e| e.in_piece(piece))?;
                if segment.len() <= 1 {
                    // Stuck on the inflection manifold or at the boundary.
                    break;
                }
                let f_start = samples
                    .last()
                    .map(|s| s.f)
                    .unwrap_or_else(|| coord.flux_combination(model.eval_flux_unchecked(cursor)));
                let piece_samples = lift_rarefaction(model, &segment, coord, f_start, tol)
                    .map_err(|e| e.in_piece(piece))?;
                let stop = segment.stop_reason;
                let end = segment.endpoint();
                let end_dir = *segment.dirs.last().unwrap();
                let f_end = piece_samples.last().map(|s| s.f);
                let lambda_end = piece_samples.last().map(|s| s.fprime);
                append_samples(&mut samples, piece_samples);
                sources.push(PieceSource::Rarefaction(segment));
                if stop == StopReason::Inflection {
                    // Resume the shock lifting from the original reference:
                    // project the inflection point onto H(R) at fixed ell.
                    // The composite continues only when the locus actually
                    // passes through the inflection point; off the
                    // invariant lines the two curves can genuinely
                    // separate, and the construction ends there.
                    match project_to_locus(model, reference, end, coord, tol)
                        .filter(|(proj, _)| proj.dist(&end) <= 1e-8)
                    {
                        Some((proj, sigma)) => {
                            let ell_r = coord.project(reference);
                            let phi_r =
                                coord.flux_combination(model.eval_flux_unchecked(reference));
                            let f_shock = phi_r + sigma * (coord.project(proj) - ell_r);
                            breakpoints.push(Breakpoint {
                                ell: coord.project(end),
                                tag: BreakTag::Inflection,
                                state: end,
                                family_after: None,
                                f_jump: (f_end.unwrap_or(f_shock) - f_shock).abs(),
                                fprime_jump: lambda_end
                                    .map(|l| {
                                        shock_slope_at(model, reference, proj, sigma, coord)
                                            .map(|s| (l - s).abs())
                                            .unwrap_or(0.0)
                                    })
                                    .unwrap_or(0.0),
                            });
                            cursor = proj;
                            dir = end_dir;
                            mode = Mode::Shock;
                        }
                        None => break,
                    }
                } else {
                    break;
                }
            }
        }
        piece += 1;
    }

    if samples.is_empty() {
        return Err(RieffError::Parameter(
            "effective flux construction produced no samples".into(),
        ));
    }

    let base = make_base_curve(reference, sources, coord)?;
    if samples.len() >= 2 && samples[0].ell > samples[samples.len() - 1].ell {
        samples.reverse();
    }
    // Drop numerically duplicated junction samples.
    samples.dedup_by(|b, a| (b.ell - a.ell).abs() < 1e-13);
    let interval = (samples[0].ell, samples[samples.len() - 1].ell);
    breakpoints.sort_by(|a, b| a.ell.partial_cmp(&b.ell).unwrap());
    Ok(EffectiveFlux {
        model: *model,
        interval,
        samples,
        breakpoints,
        base,
    })
}

/// A characteristic locus point is a wave-type transition exactly when
/// the shock speed is critical along the branch there (then the branch is
/// tangent to the matching eigenvector). The speed can also cross the
/// transverse family's eigenvalue at a locus self-intersection with the
/// speed still strictly monotone; those are not transitions.
fn is_transition_point(branch: &HugoniotBranch, bw: &crate::hugoniot::BethePoint) -> bool {
    let mut i = 0;
    while i + 1 < branch.len() && branch.arclength[i + 1] < bw.arclength {
        i += 1;
    }
    if i + 1 >= branch.len() {
        return true;
    }
    let a = branch.tangents[i][2];
    let b = branch.tangents[i + 1][2];
    a * b <= 0.0 || a.abs().min(b.abs()) < 1e-9
}

/// Unit state-space direction of the branch sample just before an
/// arclength position; the refined tangent at a characteristic point can
/// be unreliable, the approach direction is not.
fn approach_dir(branch: &HugoniotBranch, arclength: f64) -> Option<[f64; 2]> {
    let mut i = 0;
    while i + 1 < branch.len() && branch.arclength[i + 1] < arclength {
        i += 1;
    }
    let t = branch.tangents[i];
    let n = (t[0] * t[0] + t[1] * t[1]).sqrt();
    if n < 1e-12 {
        return None;
    }
    Some([t[0] / n, t[1] / n])
}

/// Truncates a branch at a refined Bethe-Wendroff point and appends the
/// point itself as the final sample.
fn cut_branch_at(
    model: &FluxModel,
    branch: &HugoniotBranch,
    bw: &crate::hugoniot::BethePoint,
    tol: &Tolerances,
) -> HugoniotBranch {
    let mut keep = 0;
    while keep < branch.len() && branch.arclength[keep] < bw.arclength - 1e-12 {
        keep += 1;
    }
    let mut cut = HugoniotBranch {
        reference: branch.reference,
        points: branch.points[..keep].to_vec(),
        sigmas: branch.sigmas[..keep].to_vec(),
        lax_classes: branch.lax_classes[..keep].to_vec(),
        arclength: branch.arclength[..keep].to_vec(),
        tangents: branch.tangents[..keep].to_vec(),
        start_dir: branch.start_dir,
    };
    cut.points.push(bw.state);
    cut.sigmas.push(bw.sigma);
    cut.lax_classes.push(crate::hugoniot::lax_classify(
        model,
        branch.reference,
        bw.state,
        bw.sigma,
        Orientation::Forward,
        tol,
    ));
    cut.arclength.push(bw.arclength);
    cut.tangents.push(bw.tangent);
    cut
}

/// Newton projection of a state onto H(reference) keeping its coordinate
/// value fixed; returns the projected state and its shock speed.
fn project_to_locus(
    model: &FluxModel,
    reference: State,
    u: State,
    coord: ParamCoordinate,
    tol: &Tolerances,
) -> Option<(State, f64)> {
    let sigma0 = shock_speed(model, reference, u).map(|(s, _)| s).ok()?;
    let anchor = [u.u1, u.u2, sigma0];
    let constraint = [coord.alpha1, coord.alpha2, 0.0];
    let x =
        crate::hugoniot::correct_with_constraint(model, reference, anchor, anchor, constraint, tol)?;
    Some((State::new(x[0], x[1]), x[2]))
}

/// df/d(ell) of the shock lifting at a locus point, via the locus tangent.
fn shock_slope_at(
    model: &FluxModel,
    reference: State,
    u: State,
    sigma: f64,
    coord: ParamCoordinate,
) -> Option<f64> {
    let t = crate::hugoniot::tangent_at(model, reference, [u.u1, u.u2, sigma])?;
    let dl = coord.project_dir([t[0], t[1]]);
    if dl.abs() < 1e-14 {
        return None;
    }
    let j = model.jacobian_unchecked(u);
    let dphi = coord.alpha1 * (j[0][0] * t[0] + j[0][1] * t[1])
        + coord.alpha2 * (j[1][0] * t[0] + j[1][1] * t[1]);
    Some(dphi / dl)
}

fn append_samples(samples: &mut Vec<EffSample>, piece: Vec<EffSample>) {
    for s in piece {
        if let Some(last) = samples.last() {
            if (last.ell - s.ell).abs() < 1e-13 {
                continue;
            }
        }
        samples.push(s);
    }
}

/// Maximum deviation between the lifted flux and the affine flux
/// combination along the base curve; the lifting identity says this is
/// zero in exact arithmetic.
pub fn lifting_identity_error(model: &FluxModel, eff: &EffectiveFlux) -> f64 {
    eff.samples
        .iter()
        .map(|s| {
            let phi = eff.base.coord.flux_combination(model.eval_flux_unchecked(s.state));
            (s.f - phi).abs()
        })
        .fold(0.0, f64::max)
}

/// Same deviation restricted to samples of one piece kind.
pub fn lifting_identity_error_by_kind(
    model: &FluxModel,
    eff: &EffectiveFlux,
    kind: PieceKind,
) -> f64 {
    eff.samples
        .iter()
        .filter(|s| s.kind == kind)
        .map(|s| {
            let phi = eff.base.coord.flux_combination(model.eval_flux_unchecked(s.state));
            (s.f - phi).abs()
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rarefaction::Direction;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn unit_model() -> FluxModel {
        FluxModel::new(1.0, 1.0, 1.0).unwrap()
    }

    /// Closed form of the separatrix EFF in the u3 coordinate.
    fn separatrix_flux(model: &FluxModel, ell: f64) -> f64 {
        let d = model.a + model.b;
        let k = model.a * model.b / d;
        model.c * ell * ell / (k * (1.0 - ell) * (1.0 - ell) + model.c * ell * ell)
    }

    #[test]
    fn coordinate_presets() {
        let o = State::new(0.0, 0.0);
        assert_eq!(ParamCoordinate::U3.project(o), 1.0);
        assert_eq!(ParamCoordinate::U3.flux_combination([0.0, 0.0, 1.0]), 1.0);
        let u = State::new(0.3, 0.5);
        assert_eq!(ParamCoordinate::U1.project(u), 0.3);
        assert_eq!(ParamCoordinate::U2.project(u), 0.5);
        assert!((ParamCoordinate::U3.project(u) - 0.2).abs() < 1e-15);
        assert!(ParamCoordinate::new(1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn jump_consistency_of_affine_weights() {
        // Whenever dF = sigma dU the affine combinations jump consistently:
        // d(phi) = sigma d(ell).
        let model = unit_model();
        let t = tol();
        let r = State::new(0.25, 0.1);
        let branches = crate::hugoniot::trace_hugoniot(&model, r, &t).unwrap();
        let coord = ParamCoordinate::U3;
        for b in &branches {
            for (u, sigma) in b.points.iter().zip(&b.sigmas) {
                let dphi = coord.flux_combination(model.eval_flux_unchecked(*u))
                    - coord.flux_combination(model.eval_flux_unchecked(r));
                let dell = coord.project(*u) - coord.project(r);
                assert!((dphi - sigma * dell).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn separatrix_eff_matches_closed_form() {
        // Reference at the oil vertex, launch along the separatrix: the
        // composite EFF is the closed-form S-shaped flux on [0, 1] with a
        // single Bethe-Wendroff breakpoint.
        let model = unit_model();
        let t = tol();
        let opts = EffOptions {
            dir_hint: Some([1.0, 1.0]),
            ..Default::default()
        };
        let eff = build_eff_with(
            &model,
            State::new(0.0, 0.0),
            Family::Slow,
            Orientation::Backward,
            ParamCoordinate::U3,
            opts,
            &t,
        )
        .unwrap();
        assert!(eff.ell_min() < 1e-6, "interval {:?}", eff.interval);
        assert!((eff.ell_max() - 1.0).abs() < 1e-9);
        assert_eq!(eff.breakpoints.len(), 1);
        let bp = eff.breakpoints[0];
        assert_eq!(bp.tag, BreakTag::BetheWendroff);
        let l3 = 1.0 - (2.0f64 / 3.0).sqrt();
        assert!((bp.ell - l3).abs() < 1e-7, "breakpoint at {} vs {}", bp.ell, l3);
        assert_eq!(bp.family_after, Some(Family::Slow));
        for s in &eff.samples {
            let expect = separatrix_flux(&model, s.ell);
            assert!(
                (s.f - expect).abs() < 1e-6,
                "EFF deviates at ell {}: {} vs {}",
                s.ell,
                s.f,
                expect
            );
        }
        // Shock-lifted part is exact to corrector accuracy.
        assert!(lifting_identity_error_by_kind(&model, &eff, PieceKind::Shock) <= 1e-10);
        assert!(lifting_identity_error_by_kind(&model, &eff, PieceKind::Rarefaction) <= 1e-6);
        // Smooth across the breakpoint.
        assert!(bp.f_jump <= 1e-8);
        assert!(bp.fprime_jump <= 1e-6);
    }

    #[test]
    fn backward_slow_eff_from_edge_reference() {
        // Reference (0.7, 0): the backward slow group follows the interior
        // locus branch to its extension point and continues as a slow
        // rarefaction; parametrized by u2 per the hyperbola geometry.
        let model = unit_model();
        let t = tol();
        let eff = build_eff(
            &model,
            State::new(0.7, 0.0),
            Family::Slow,
            Orientation::Backward,
            ParamCoordinate::U2,
            &t,
        )
        .unwrap();
        assert!(eff.samples.len() > 50);
        assert_eq!(eff.breakpoints.len(), 1);
        assert_eq!(eff.breakpoints[0].tag, BreakTag::BetheWendroff);
        assert!(lifting_identity_error_by_kind(&model, &eff, PieceKind::Shock) <= 1e-10);
        assert!(lifting_identity_error_by_kind(&model, &eff, PieceKind::Rarefaction) <= 1e-6);
        // f = f2 along the curve for the u2 coordinate.
        for s in eff.samples.iter().step_by(7) {
            let f2 = model.eval_flux_unchecked(s.state)[1];
            assert!((s.f - f2).abs() < 1e-6);
        }
    }

    #[test]
    fn hyperbola_with_u1_coordinate_is_rejected() {
        let model = unit_model();
        let t = tol();
        let err = build_eff(
            &model,
            State::new(0.7, 0.0),
            Family::Slow,
            Orientation::Backward,
            ParamCoordinate::U1,
            &t,
        )
        .unwrap_err();
        assert_eq!(err.name(), "NonMonotoneCoordinate");
    }

    #[test]
    fn single_point_base_curve_is_degenerate_but_valid() {
        let model = unit_model();
        let t = tol();
        let seg = crate::rarefaction::integrate_rarefaction(
            &model,
            State::new(0.5, 0.0),
            Family::Fast,
            Direction::Forward,
            &t,
        )
        .unwrap();
        assert_eq!(seg.len(), 1);
        let base = make_base_curve(
            State::new(0.5, 0.0),
            vec![PieceSource::Rarefaction(seg)],
            ParamCoordinate::U1,
        )
        .unwrap();
        assert_eq!(base.pieces.len(), 1);
    }

    #[test]
    fn shock_lift_chord_identity() {
        // (f(ell) - phi_R) / (ell - ell_R) recovers the traced shock speed.
        let model = unit_model();
        let t = tol();
        let o = State::new(0.0, 0.0);
        let branch = trace_branch(&model, o, o, [1.0, 0.0], &t).unwrap();
        let coord = ParamCoordinate::U1;
        let samples = lift_shock(&model, &branch, coord, &t).unwrap();
        let ell_r = coord.project(o);
        let phi_r = coord.flux_combination(model.eval_flux_unchecked(o));
        assert!((samples[0].ell - ell_r).abs() < 1e-14);
        assert!((samples[0].f - phi_r).abs() < 1e-14);
        for (s, sigma) in samples.iter().skip(1).zip(&branch.sigmas) {
            let chord = (s.f - phi_r) / (s.ell - ell_r);
            assert!((chord - sigma).abs() < 1e-10);
        }
        // Edge lift with the u1 coordinate is the Buckley-Leverett flux.
        for s in samples.iter().skip(1).step_by(50) {
            let f1 = model.eval_flux_unchecked(s.state)[0];
            assert!((s.f - f1).abs() < 1e-10);
        }
    }

    #[test]
    fn rarefaction_lift_matches_quadrature_oracle() {
        // Along the symmetric separatrix the lift must reproduce the
        // closed-form flux; slopes equal the sampled eigenvalue.
        let model = unit_model();
        let t = tol();
        let coord = ParamCoordinate::U3;
        let start = State::new(0.45, 0.45);
        let seg = integrate_from_direction(&model, start, Family::Slow, [-1.0, -1.0], &t).unwrap();
        let f_start = separatrix_flux(&model, coord.project(start));
        let samples = lift_rarefaction(&model, &seg, coord, f_start, &t).unwrap();
        assert!(samples.len() > 50);
        for s in &samples {
            let expect = separatrix_flux(&model, s.ell);
            assert!((s.f - expect).abs() < 1e-6, "at ell {}: {} vs {}", s.ell, s.f, expect);
        }
        // Finite-difference slope of the emitted samples matches lambda.
        for w in samples.windows(2) {
            let slope = (w[1].f - w[0].f) / (w[1].ell - w[0].ell);
            let mid = 0.5 * (w[0].fprime + w[1].fprime);
            assert!((slope - mid).abs() < 1e-5);
        }
        // Zero-length segment keeps the accumulated value.
        let stub = crate::rarefaction::integrate_rarefaction(
            &model,
            State::new(0.5, 0.0),
            Family::Fast,
            Direction::Forward,
            &t,
        )
        .unwrap();
        let single = lift_rarefaction(&model, &stub, ParamCoordinate::U1, 0.25, &t).unwrap();
        assert_eq!(single.len(), 1);
        assert_eq!(single[0].f, 0.25);
    }

    #[test]
    fn breakpoint_states_are_parametrization_invariant() {
        // Moving from the u3 coordinate to u1 rescales the interval but the
        // breakpoint state in the plane stays put.
        let model = unit_model();
        let t = tol();
        let opts = EffOptions { dir_hint: Some([1.0, 0.0]), ..Default::default() };
        let eff_u3 = build_eff_with(
            &model,
            State::new(0.0, 0.0),
            Family::Fast,
            Orientation::Backward,
            ParamCoordinate::U3,
            opts,
            &t,
        )
        .unwrap();
        let eff_u1 = build_eff_with(
            &model,
            State::new(0.0, 0.0),
            Family::Fast,
            Orientation::Backward,
            ParamCoordinate::U1,
            opts,
            &t,
        )
        .unwrap();
        let a = eff_u3.breakpoints[0].state;
        let b = eff_u1.breakpoints[0].state;
        assert!(a.dist(&b) <= 1e-7, "breakpoint states differ: {a:?} vs {b:?}");
    }
}
