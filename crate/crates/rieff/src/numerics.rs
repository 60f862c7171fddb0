//! Small shared numerical kernels: linear solves, bisection and cubic
//! Hermite interpolation.

/// Solves a 3x3 linear system by Gaussian elimination with partial pivoting.
pub fn solve3(mut m: [[f64; 3]; 3], mut rhs: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let mut pivot = col;
        for row in col + 1..3 {
            if m[row][col].abs() > m[pivot][col].abs() {
                pivot = row;
            }
        }
        if m[pivot][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, pivot);
        rhs.swap(col, pivot);
        for row in col + 1..3 {
            let factor = m[row][col] / m[col][col];
            for k in col..3 {
                m[row][k] -= factor * m[col][k];
            }
            rhs[row] -= factor * rhs[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let mut acc = rhs[row];
        for k in row + 1..3 {
            acc -= m[row][k] * x[k];
        }
        x[row] = acc / m[row][row];
        if !x[row].is_finite() {
            return None;
        }
    }
    Some(x)
}

/// Bisection on a bracketed sign change. Returns the midpoint once the
/// bracket width shrinks below `tol_x` (absolute) or iterations run out.
pub fn bisect<F: FnMut(f64) -> f64>(mut f: F, mut lo: f64, mut hi: f64, tol_x: f64) -> f64 {
    let mut f_lo = f(lo);
    if f_lo == 0.0 {
        return lo;
    }
    let f_hi = f(hi);
    if f_hi == 0.0 {
        return hi;
    }
    debug_assert!(f_lo * f_hi <= 0.0, "bisect requires a sign change");
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (hi - lo).abs() <= tol_x || mid == lo || mid == hi {
            return mid;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return mid;
        }
        if f_lo * f_mid < 0.0 {
            hi = mid;
        } else {
            lo = mid;
            f_lo = f_mid;
        }
    }
    0.5 * (lo + hi)
}

/// Bisection refined by a final secant polish; for smooth residuals this
/// lands within a few ulps of the root.
pub fn bisect_polished<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, tol_x: f64) -> f64 {
    let x = bisect(&mut f, lo, hi, tol_x.max(1e-15 * (hi - lo).abs()));
    let h = (hi - lo).abs() * 1e-7;
    let (fa, fb) = (f(x - h), f(x + h));
    let denom = fb - fa;
    if denom != 0.0 {
        let step = -(fa + fb) / 2.0 * (2.0 * h) / denom;
        let polished = x + step;
        if polished > lo.min(hi) && polished < lo.max(hi) && step.abs() < 2.0 * (hi - lo).abs() {
            return polished;
        }
    }
    x
}

/// Cubic Hermite value and derivative on [x0, x1] with node values and slopes.
pub fn hermite(x0: f64, x1: f64, f0: f64, f1: f64, d0: f64, d1: f64, x: f64) -> (f64, f64) {
    let h = x1 - x0;
    if h == 0.0 {
        return (f0, d0);
    }
    let t = (x - x0) / h;
    let t2 = t * t;
    let t3 = t2 * t;
    let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    let h10 = t3 - 2.0 * t2 + t;
    let h01 = -2.0 * t3 + 3.0 * t2;
    let h11 = t3 - t2;
    let value = h00 * f0 + h10 * h * d0 + h01 * f1 + h11 * h * d1;
    let dh00 = 6.0 * t2 - 6.0 * t;
    let dh10 = 3.0 * t2 - 4.0 * t + 1.0;
    let dh01 = -6.0 * t2 + 6.0 * t;
    let dh11 = 3.0 * t2 - 2.0 * t;
    let deriv = (dh00 * f0 + dh01 * f1) / h + dh10 * d0 + dh11 * d1;
    (value, deriv)
}

/// Index of the interval containing x in a strictly increasing grid.
pub fn bracket_index(grid: &[f64], x: f64) -> usize {
    debug_assert!(grid.len() >= 2);
    match grid.binary_search_by(|g| g.partial_cmp(&x).unwrap()) {
        Ok(i) => i.min(grid.len() - 2),
        Err(i) => i.clamp(1, grid.len() - 1) - 1,
    }
}
