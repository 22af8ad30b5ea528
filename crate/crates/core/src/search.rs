//! Derivative-free scalar minimization used by the program solvers and the
//! adversary oracle.
//!
//! The objectives are piecewise smooth (maxima of a few smooth surfaces), so
//! everything here is bracketing-based: golden-section contraction on an
//! interval, and a nested scan-plus-refine scheme for two variables where the
//! inner slice is quasiconvex.

// Negated comparisons double as NaN guards on the bracket bounds.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use crate::scalar::{lit, Scalar};

/// Golden-section minimization on `[lo, hi]`.
///
/// Returns the best point evaluated, including the endpoints, which makes the
/// result robust on plateaus and at kinks. `iters` evaluations shrink the
/// bracket by the golden ratio each step; 90 iterations reach relative width
/// below 1e-18.
pub(crate) fn golden_min<S: Scalar>(f: impl Fn(S) -> S, lo: S, hi: S, iters: usize) -> (S, S) {
    let inv_phi: S = lit(0.618_033_988_749_894_9);
    if !(hi > lo) {
        return (lo, f(lo));
    }
    let mut best_x = lo;
    let mut best_f = f(lo);
    let f_hi = f(hi);
    if f_hi < best_f {
        best_x = hi;
        best_f = f_hi;
    }

    let mut a = lo;
    let mut b = hi;
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..iters {
        if f1 < best_f {
            best_x = x1;
            best_f = f1;
        }
        if f2 < best_f {
            best_x = x2;
            best_f = f2;
        }
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        }
        if b - a <= S::epsilon() * (S::one() + a.abs() + b.abs()) {
            break;
        }
    }
    (best_x, best_f)
}

/// Minimum of `obj(x, z)` over `x` in `[x_lo, x_hi]` and `z` in the feasible
/// interval `z_range(x)` (`None` marks infeasible `x`).
///
/// The inner slice `z -> obj(x, z)` must be quasiconvex, which holds for all
/// the guarantee programs: their margin is a maximum of terms monotone in
/// `z`. The outer variable is scanned on `n_scan` points and every local
/// minimum of the scan is refined by golden section over its bracket, which
/// localizes kink-valley minima without stalling.
pub(crate) fn minimize_nested<S: Scalar>(
    x_lo: S,
    x_hi: S,
    z_range: impl Fn(S) -> Option<(S, S)>,
    obj: impl Fn(S, S) -> S,
    n_scan: usize,
) -> Option<(S, S, S)> {
    let inner = |x: S| -> Option<(S, S)> {
        let (z_lo, z_hi) = z_range(x)?;
        if !(z_hi >= z_lo) {
            return None;
        }
        Some(golden_min(|z| obj(x, z), z_lo, z_hi, 90))
    };
    let inner_value = |x: S| inner(x).map(|(_, v)| v).unwrap_or_else(S::infinity);

    if !(x_hi >= x_lo) {
        return None;
    }
    let n = n_scan.max(2);
    let step = (x_hi - x_lo) / S::from_usize(n - 1).unwrap();
    let xs: Vec<S> = (0..n)
        .map(|i| {
            if i == n - 1 {
                x_hi
            } else {
                x_lo + step * S::from_usize(i).unwrap()
            }
        })
        .collect();
    let values: Vec<S> = xs.iter().map(|&x| inner_value(x)).collect();

    // Candidate brackets: local minima of the scan, plus feasible boundary
    // cells next to infeasible ones. Plateaus can make every point a local
    // minimum, so refinement is limited to the best few.
    let mut candidates: Vec<usize> = Vec::new();
    for i in 0..n {
        if !values[i].is_finite() {
            continue;
        }
        let left_ok = i == 0 || !values[i - 1].is_finite() || values[i] <= values[i - 1];
        let right_ok = i == n - 1 || !values[i + 1].is_finite() || values[i] <= values[i + 1];
        if left_ok && right_ok {
            candidates.push(i);
        }
    }
    if candidates.is_empty() {
        return None;
    }
    candidates.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
    candidates.truncate(6);

    let mut best: Option<(S, S, S)> = None;
    for &i in &candidates {
        let lo = if i == 0 { xs[0] } else { xs[i - 1] };
        let hi = if i == n - 1 { xs[n - 1] } else { xs[i + 1] };
        let (x_star, _) = golden_min(inner_value, lo, hi, 90);
        if let Some((z_star, v)) = inner(x_star) {
            if best.as_ref().is_none_or(|(bv, _, _)| v < *bv) {
                best = Some((v, x_star, z_star));
            }
        }
    }
    // The scan points themselves are also candidates (golden refinement
    // cannot do worse, but guard against boundary rounding).
    for &i in &candidates {
        if let Some((z, v)) = inner(xs[i]) {
            if best.as_ref().is_none_or(|(bv, _, _)| v < *bv) {
                best = Some((v, xs[i], z));
            }
        }
    }
    best
}
