//! Reference computations used by the integration tests. Nothing here calls
//! into the library's propagation, quadrature or eigen code.
#![allow(dead_code)]

/// `Σ cⁿ x^{4n+j}/(4n+j)!` summed term by term until the terms stop mattering.
pub fn krylov_by_series(x: f64, c: f64) -> [f64; 4] {
    let mut out = [0.0; 4];
    for (j, slot) in out.iter_mut().enumerate() {
        // first term x^j / j!
        let mut term = 1.0;
        for m in 1..=j {
            term *= x / m as f64;
        }
        let mut sum = term;
        let mut n = 0usize;
        loop {
            let p = 4 * n + j;
            term *= c * x.powi(4) / ((p + 1) * (p + 2) * (p + 3) * (p + 4)) as f64;
            sum += term;
            n += 1;
            if term.abs() <= 1e-18 * sum.abs().max(1e-300) || n > 400 {
                break;
            }
        }
        *slot = sum;
    }
    out
}

/// Jet of the solution of `u'''' = c·u` with data `jet` at 0, evaluated at `x`.
pub fn constant_solution_jet(c: f64, jet: [f64; 4], x: f64) -> [f64; 4] {
    let k = krylov_by_series(x, c);
    // derivative i of K_j: K_{j-i} when j ≥ i, else c·K_{j-i+4}
    let mut out = [0.0; 4];
    for (i, o) in out.iter_mut().enumerate() {
        for (j, w) in jet.iter().enumerate() {
            let v = if j >= i { k[j - i] } else { c * k[j + 4 - i] };
            *o += w * v;
        }
    }
    out
}

/// Adaptive classical RK4 with step doubling for `u'''' = −q(x)·u`.
/// `breaks` are coefficient discontinuities; the integrator lands on each.
pub fn rk_integrate<F: Fn(f64) -> f64>(
    q: F,
    breaks: &[f64],
    y0: [f64; 4],
    x0: f64,
    x1: f64,
    tol: f64,
) -> [f64; 4] {
    let mut stops: Vec<f64> = breaks
        .iter()
        .copied()
        .filter(|b| *b > x0 && *b < x1)
        .collect();
    stops.push(x1);
    stops.sort_by(f64::total_cmp);
    let mut y = y0;
    let mut x = x0;
    for stop in stops {
        // sample q strictly inside the current segment
        let mid = 0.5 * (x + stop);
        let qv = q(mid);
        let f = |y: &[f64; 4]| [y[1], y[2], y[3], -qv * y[0]];
        let step = |y: &[f64; 4], h: f64| {
            let k1 = f(y);
            let k2 = f(&std::array::from_fn(|i| y[i] + 0.5 * h * k1[i]));
            let k3 = f(&std::array::from_fn(|i| y[i] + 0.5 * h * k2[i]));
            let k4 = f(&std::array::from_fn(|i| y[i] + h * k3[i]));
            std::array::from_fn(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        };
        let mut h = (stop - x).min(0.01);
        while x < stop {
            h = h.min(stop - x);
            let full = step(&y, h);
            let half = step(&step(&y, 0.5 * h), 0.5 * h);
            let scale = half.iter().fold(1.0f64, |m, v| m.max(v.abs()));
            let err = (0..4)
                .map(|i| (full[i] - half[i]).abs())
                .fold(0.0, f64::max)
                / 15.0;
            if err <= tol * scale {
                x += h;
                y = std::array::from_fn(|i| half[i] + (half[i] - full[i]) / 15.0);
                if err < 0.1 * tol * scale {
                    h *= 1.5;
                }
            } else {
                h *= 0.5;
            }
        }
        x = stop;
    }
    y
}

/// First sign change of `f` on `(lo, hi]` at resolution `step`, located by
/// linear interpolation between the bracketing samples.
pub fn dense_scan_first_zero<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, step: f64) -> Option<f64> {
    let mut x_prev = lo;
    let mut f_prev = f(lo);
    let mut i = 1u64;
    loop {
        let x = lo + i as f64 * step;
        if x > hi {
            return None;
        }
        let fx = f(x);
        if f_prev != 0.0 && (fx == 0.0 || fx.signum() != f_prev.signum()) {
            return Some(x_prev + step * f_prev / (f_prev - fx));
        }
        x_prev = x;
        f_prev = fx;
        i += 1;
    }
}

/// Central difference `(f(x+ε) − f(x−ε)) / 2ε`.
pub fn central_diff<F: Fn(f64) -> f64>(f: F, x: f64, eps: f64) -> f64 {
    (f(x + eps) - f(x - eps)) / (2.0 * eps)
}

/// Fourth derivative of uniformly sampled data at index `i` with spacing
/// `stride·h`, Richardson-combined from strides `s` and `2s` (error `O(h⁴)`).
pub fn fourth_derivative_richardson(values: &[f64], h: f64, i: usize, stride: usize) -> f64 {
    let d4 = |s: usize| {
        let hs = s as f64 * h;
        (values[i - 2 * s] - 4.0 * values[i - s] + 6.0 * values[i] - 4.0 * values[i + s]
            + values[i + 2 * s])
            / hs.powi(4)
    };
    (4.0 * d4(stride) - d4(2 * stride)) / 3.0
}

/// Plain 5-point fourth difference.
pub fn fourth_difference(values: &[f64], h: f64, i: usize) -> f64 {
    (values[i - 2] - 4.0 * values[i - 1] + 6.0 * values[i] - 4.0 * values[i + 1] + values[i + 2])
        / h.powi(4)
}

/// Smallest `count` roots `βL` of `cos(βL)·cosh(βL) = 1`, `βL > 0`.
pub fn clamped_beam_roots(count: usize) -> Vec<f64> {
    let f = |t: f64| t.cos() * t.cosh() - 1.0;
    let mut roots = Vec::new();
    // roots sit near (m + 1/2)π for m ≥ 1
    for m in 1..=count {
        let mid = (m as f64 + 0.5) * std::f64::consts::PI;
        let (mut lo, mut hi) = (mid - 1.0, mid + 1.0);
        assert!(f(lo) * f(hi) < 0.0);
        for _ in 0..200 {
            let c = 0.5 * (lo + hi);
            if f(lo) * f(c) <= 0.0 {
                hi = c;
            } else {
                lo = c;
            }
        }
        roots.push(0.5 * (lo + hi));
    }
    roots
}

/// Largest `count` eigenvalues of a symmetric matrix by power iteration
/// with Hotelling deflation on `M + shift·I`.
pub fn power_iteration_top(m: &[Vec<f64>], count: usize, shift: f64, iters: usize) -> Vec<f64> {
    let n = m.len();
    let mut a: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| m[i][j] + if i == j { shift } else { 0.0 })
                .collect()
        })
        .collect();
    let mut out = Vec::new();
    for k in 0..count {
        let mut v: Vec<f64> = (0..n)
            .map(|i| 1.0 + ((i * 7 + k * 13) % 11) as f64 * 0.1)
            .collect();
        for _ in 0..iters {
            let w: Vec<f64> = (0..n)
                .map(|i| (0..n).map(|j| a[i][j] * v[j]).sum())
                .collect();
            let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
            v = w.into_iter().map(|x| x / norm).collect();
        }
        // Rayleigh quotient on the converged vector
        let w: Vec<f64> = (0..n)
            .map(|i| (0..n).map(|j| a[i][j] * v[j]).sum())
            .collect();
        let lambda = v.iter().zip(&w).map(|(x, y)| x * y).sum::<f64>();
        out.push(lambda - shift);
        for i in 0..n {
            for j in 0..n {
                a[i][j] -= lambda * v[i] * v[j];
            }
        }
    }
    out
}

/// `−2 sech² x` and its derivatives in closed form.
pub fn sech2_well(x: f64) -> [f64; 3] {
    let s2 = 1.0 / x.cosh().powi(2);
    let t = x.tanh();
    [-2.0 * s2, 4.0 * s2 * t, 4.0 * s2 * (1.0 - 3.0 * t * t)]
}
