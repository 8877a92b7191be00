//! Closed-form proximal maps applied per edge group and per stencil group.

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Group soft shrinkage: `x * max(0, 1 - t/|x|)`, zero when `|x| <= t`.
///
/// Minimizes `t |p| + |p - x|^2 / 2` over `p`.
pub fn soft_shrink_group(x: &mut [f64], threshold: f64) {
    let n = norm(x);
    if n <= threshold {
        x.iter_mut().for_each(|v| *v = 0.0);
    } else if threshold > 0.0 {
        let scale = 1.0 - threshold / n;
        x.iter_mut().for_each(|v| *v *= scale);
    }
}

/// Group hard threshold: zero when `|x| <= t`, unchanged otherwise.
pub fn hard_threshold_group(x: &mut [f64], threshold: f64) {
    if norm(x) <= threshold {
        x.iter_mut().for_each(|v| *v = 0.0);
    }
}

pub fn soft_shrink(x: f64, threshold: f64) -> f64 {
    let mut v = [x];
    soft_shrink_group(&mut v, threshold);
    v[0]
}

pub fn hard_threshold(x: f64, threshold: f64) -> f64 {
    let mut v = [x];
    hard_threshold_group(&mut v, threshold);
    v[0]
}
