//! Scalar Riemann construction on an effective flux function: convex /
//! concave envelopes, Welge tangency points and the closed forms for the
//! Corey base curves through the oil vertex.

use serde::Serialize;

use crate::eff::EffectiveFlux;
use crate::error::{Result, RieffError};
use crate::numerics::bisect_polished;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WaveKind {
    Shock,
    Rarefaction,
}

/// One wave of a scalar Riemann solution in the base-curve coordinate.
/// Shock speeds satisfy the chord rule, rarefaction speeds are the flux
/// derivative at the endpoints.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ScalarWave {
    pub kind: WaveKind,
    pub ell_left: f64,
    pub ell_right: f64,
    pub speed_left: f64,
    pub speed_right: f64,
}

/// Welge tangency: the root of T(ell) = f'(ell)(ell - ell_r) - (f(ell) -
/// f(ell_r)) inside the search interval, bracketed on the sample grid and
/// polished to |T| <= 1e-12.
pub fn welge_point(eff: &EffectiveFlux, ell_r: f64, search: (f64, f64)) -> Result<f64> {
    let (f_r, _) = eff.eval(ell_r);
    let t_fn = |ell: f64| -> f64 {
        let (f, d) = eff.eval(ell);
        d * (ell - ell_r) - (f - f_r)
    };
    let lo = search.0.min(search.1);
    let hi = search.0.max(search.1);
    // T vanishes identically at ell_r; keep a margin away from it.
    let margin = 1e-6 * (hi - lo).abs().max(1e-6);
    let mut xs: Vec<f64> = eff
        .samples
        .iter()
        .map(|s| s.ell)
        .filter(|&x| x >= lo && x <= hi && (x - ell_r).abs() > margin)
        .collect();
    for bound in [lo, hi] {
        if (bound - ell_r).abs() > margin {
            xs.push(bound);
        }
    }
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    xs.dedup_by(|a, b| (*a - *b).abs() < 1e-13);
    if xs.len() < 2 {
        return Err(RieffError::NoTangency);
    }
    // Scan outward from the reference end so the nearest tangency wins.
    let from_right = (ell_r - hi).abs() < (ell_r - lo).abs();
    let order: Vec<usize> = if from_right {
        (0..xs.len()).rev().collect()
    } else {
        (0..xs.len()).collect()
    };
    let mut prev: Option<(f64, f64)> = None;
    for &i in &order {
        let x = xs[i];
        let tx = t_fn(x);
        // A sample can land exactly on the tangency (the lifted flux is
        // built that way at a Bethe-Wendroff point); strict sign products
        // would miss it.
        if tx == 0.0 {
            return Ok(x);
        }
        if let Some((px, pt)) = prev {
            if pt * tx < 0.0 {
                let (a, b) = if px < x { (px, x) } else { (x, px) };
                let root = bisect_polished(t_fn, a, b, 1e-15);
                return Ok(root);
            }
        }
        prev = Some((x, tx));
    }
    Err(RieffError::NoTangency)
}

/// Node of the envelope computation, in traversal coordinates.
#[derive(Clone, Copy)]
struct Node {
    x: f64,
    y: f64,
}

/// Scalar Riemann solution between two coordinate values on the lifted
/// flux: the lower convex envelope for ell_l < ell_r, the upper concave
/// envelope otherwise. Envelope contacts become rarefactions, envelope
/// chords become shocks; tangency endpoints are polished by root solving
/// on the interpolant.
pub fn hull_solution(eff: &EffectiveFlux, ell_l: f64, ell_r: f64) -> Result<Vec<ScalarWave>> {
    if (ell_l - ell_r).abs() < 1e-14 {
        return Ok(Vec::new());
    }
    // Mirror ell -> -ell turns the decreasing problem into the increasing
    // one with flux -f(-ell) and unchanged wave speeds.
    let mirrored = ell_l > ell_r;
    let eval = |x: f64| -> (f64, f64) {
        if mirrored {
            let (f, d) = eff.eval(-x);
            (-f, d)
        } else {
            eff.eval(x)
        }
    };
    let (x_lo, x_hi) = if mirrored { (-ell_l, -ell_r) } else { (ell_l, ell_r) };

    // Node grid: the EFF samples inside the interval plus the exact ends.
    let mut grid: Vec<f64> = eff
        .samples
        .iter()
        .map(|s| if mirrored { -s.ell } else { s.ell })
        .filter(|&x| x > x_lo + 1e-13 && x < x_hi - 1e-13)
        .collect();
    grid.push(x_lo);
    grid.push(x_hi);
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    grid.dedup_by(|a, b| (*a - *b).abs() < 1e-13);
    let nodes: Vec<Node> = grid.iter().map(|&x| Node { x, y: eval(x).0 }).collect();
    if nodes.len() < 2 {
        return Ok(Vec::new());
    }

    // Lower convex hull by a monotone-chain scan; collinear runs merge.
    let mut hull: Vec<usize> = Vec::new();
    for (i, n) in nodes.iter().enumerate() {
        while hull.len() >= 2 {
            let o = nodes[hull[hull.len() - 2]];
            let a = nodes[hull[hull.len() - 1]];
            let cross = (a.x - o.x) * (n.y - o.y) - (a.y - o.y) * (n.x - o.x);
            if cross <= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(i);
    }

    // Classify hull gaps: adjacent nodes (or nodes collinear with the
    // chord) are envelope contact, anything else is a chord.
    #[derive(Clone, Copy, PartialEq)]
    enum Gap {
        Contact,
        Chord,
    }
    let mut gaps: Vec<(usize, usize, Gap)> = Vec::new();
    for w in hull.windows(2) {
        let (i, j) = (w[0], w[1]);
        let kind = if j == i + 1 {
            Gap::Contact
        } else {
            let a = nodes[i];
            let b = nodes[j];
            let slope = (b.y - a.y) / (b.x - a.x);
            let max_dev = (i + 1..j)
                .map(|k| (nodes[k].y - (a.y + slope * (nodes[k].x - a.x))).abs())
                .fold(0.0, f64::max);
            if max_dev <= 1e-12 {
                Gap::Contact
            } else {
                Gap::Chord
            }
        };
        gaps.push((i, j, kind));
    }

    // Assemble waves, polishing interior chord endpoints to the exact
    // tangency (a grid hull locates them only to one cell).
    let mut waves: Vec<ScalarWave> = Vec::new();
    let mut push_wave = |kind: WaveKind, xl: f64, xr: f64, sl: f64, sr: f64| {
        if xr - xl > 1e-12 {
            let (el, er) = if mirrored { (-xl, -xr) } else { (xl, xr) };
            waves.push(ScalarWave {
                kind,
                ell_left: el,
                ell_right: er,
                speed_left: sl,
                speed_right: sr,
            });
        }
    };

    // Merge consecutive contact gaps into runs, interleave with chords.
    let mut idx = 0;
    let mut pending_left: Option<f64> = None;
    while idx < gaps.len() {
        match gaps[idx].2 {
            Gap::Contact => {
                let start = pending_left.take().unwrap_or(nodes[gaps[idx].0].x);
                let mut end = nodes[gaps[idx].1].x;
                while idx + 1 < gaps.len() && gaps[idx + 1].2 == Gap::Contact {
                    idx += 1;
                    end = nodes[gaps[idx].1].x;
                }
                // The run may be cut short by the next chord's polished
                // tangency; emit later once known.
                let next_is_chord = idx + 1 < gaps.len();
                if next_is_chord {
                    let (ci, cj, _) = gaps[idx + 1];
                    let (xl, xr) =
                        polish_chord(&eval, &nodes, ci, cj, ci > 0, cj + 1 < nodes.len());
                    // The rarefaction ends exactly where the polished chord
                    // becomes tangent.
                    let run_end = xl.max(start);
                    push_wave(
                        WaveKind::Rarefaction,
                        start,
                        run_end,
                        eval(start).1,
                        eval(run_end).1,
                    );
                    let sigma = chord_slope(&eval, xl, xr);
                    push_wave(WaveKind::Shock, xl, xr, sigma, sigma);
                    pending_left = Some(xr);
                    idx += 2;
                    continue;
                } else {
                    push_wave(WaveKind::Rarefaction, start, end, eval(start).1, eval(end).1);
                }
            }
            Gap::Chord => {
                let (ci, cj, _) = gaps[idx];
                let start_bound = pending_left.take();
                let (mut xl, xr) =
                    polish_chord(&eval, &nodes, ci, cj, ci > 0, cj + 1 < nodes.len());
                if let Some(sb) = start_bound {
                    xl = xl.max(sb);
                }
                let sigma = chord_slope(&eval, xl, xr);
                push_wave(WaveKind::Shock, xl, xr, sigma, sigma);
                pending_left = Some(xr);
            }
        }
        idx += 1;
    }

    Ok(waves)
}

fn chord_slope(eval: &impl Fn(f64) -> (f64, f64), a: f64, b: f64) -> f64 {
    if (b - a).abs() < 1e-300 {
        return eval(a).1;
    }
    (eval(b).0 - eval(a).0) / (b - a)
}

/// Polishes the endpoints of an envelope chord: any endpoint interior to
/// the interval must satisfy the tangency condition against the opposite
/// endpoint. Alternates both sides until stable.
fn polish_chord(
    eval: &impl Fn(f64) -> (f64, f64),
    nodes: &[Node],
    i: usize,
    j: usize,
    left_interior: bool,
    right_interior: bool,
) -> (f64, f64) {
    let mut xl = nodes[i].x;
    let mut xr = nodes[j].x;
    for _ in 0..3 {
        if left_interior {
            if let Some(x) = polish_tangency(eval, nodes, i, xr) {
                xl = x;
            }
        }
        if right_interior {
            if let Some(x) = polish_tangency(eval, nodes, j, xl) {
                xr = x;
            }
        }
        if !(left_interior && right_interior) {
            break;
        }
    }
    (xl, xr)
}

/// Solves T(x) = f'(x)(x - other) - (f(x) - f(other)) = 0 near node k.
fn polish_tangency(
    eval: &impl Fn(f64) -> (f64, f64),
    nodes: &[Node],
    k: usize,
    other: f64,
) -> Option<f64> {
    let (f_o, _) = eval(other);
    let t_fn = |x: f64| -> f64 {
        let (f, d) = eval(x);
        d * (x - other) - (f - f_o)
    };
    let reach = 3usize;
    let lo_idx = k.saturating_sub(reach);
    let hi_idx = (k + reach).min(nodes.len() - 1);
    let mut prev = (nodes[lo_idx].x, t_fn(nodes[lo_idx].x));
    if prev.1 == 0.0 {
        return Some(prev.0);
    }
    for n in &nodes[lo_idx + 1..=hi_idx] {
        let here = (n.x, t_fn(n.x));
        if here.1 == 0.0 {
            return Some(here.0);
        }
        if prev.1 * here.1 < 0.0 {
            return Some(bisect_polished(t_fn, prev.0, here.0, 1e-15));
        }
        prev = here;
    }
    None
}

/// Closed-form Welge points of the three base curves through the oil
/// vertex of the Corey model, in the u3 coordinate.
pub fn corey_welge_closed_form(a: f64, b: f64, c: f64) -> Result<(f64, f64, f64)> {
    if !(a > 0.0 && b > 0.0 && c > 0.0) {
        return Err(RieffError::Parameter(format!(
            "closed forms need positive coefficients, got ({a}, {b}, {c})"
        )));
    }
    let d = a + b;
    let l1 = 1.0 - (c / (a + c)).sqrt();
    let l2 = 1.0 - (c / (b + c)).sqrt();
    let l3 = 1.0 - (c * d / (a * b + c * d)).sqrt();
    debug_assert!(l3 < l1 && l3 < l2);
    Ok((l1, l2, l3))
}
