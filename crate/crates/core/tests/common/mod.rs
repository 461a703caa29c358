//! Independent reference solvers for p = 2, written without any use of the
//! library's discretization.

#![allow(dead_code)]

use nalgebra::{DMatrix, SymmetricEigen};

/// One RK4 step for y'' = k²y − (ν−1)/r·y', the radial form of −Δu = λu
/// with λ = −k², written as a first-order system.
fn rk4(r: f64, y: [f64; 2], h: f64, k2: f64, nu: f64) -> [f64; 2] {
    let f = |r: f64, y: [f64; 2]| [y[1], k2 * y[0] - (nu - 1.0) / r * y[1]];
    let k1 = f(r, y);
    let k2 = f(r + h / 2.0, [y[0] + h / 2.0 * k1[0], y[1] + h / 2.0 * k1[1]]);
    let k3 = f(r + h / 2.0, [y[0] + h / 2.0 * k2[0], y[1] + h / 2.0 * k2[1]]);
    let k4 = f(r + h, [y[0] + h * k3[0], y[1] + h * k3[1]]);
    [
        y[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        y[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
    ]
}

fn steps_for(k: f64, length: f64) -> usize {
    ((k.max(1.0) * length / 2e-3).ceil() as usize).max(4000)
}

/// u'(ρ)/u(ρ) for the regular solution of u'' + (ν−1)/r·u' = k²u, started
/// from its series at r = 0.
fn ball_log_derivative(rho: f64, nu: f64, k: f64) -> f64 {
    let k2 = k * k;
    let r0 = (1e-3 / k.max(1.0)).min(rho * 1e-3);
    // u = 1 + k²r²/(2ν) + k⁴r⁴/(8ν(ν+2)) + …
    let c1 = k2 / (2.0 * nu);
    let c2 = k2 * k2 / (8.0 * nu * (nu + 2.0));
    let mut y = [1.0 + c1 * r0 * r0 + c2 * r0.powi(4), 2.0 * c1 * r0 + 4.0 * c2 * r0.powi(3)];
    let n = steps_for(k, rho);
    let h = (rho - r0) / n as f64;
    let mut r = r0;
    for _ in 0..n {
        y = rk4(r, y, h, k2, nu);
        r += h;
        // Rescale to keep the growing solution in range.
        let s = y[0].abs().max(1e-300);
        y = [y[0] / s, y[1] / s];
    }
    y[1] / y[0]
}

fn bisect(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    let mut f_lo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if (fm > 0.0) == (f_lo > 0.0) {
            lo = mid;
            f_lo = fm;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-14 * hi.abs().max(1.0) {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Principal Robin eigenvalue of the ball B_ρ ⊂ ℝ^ν at p = 2 by shooting:
/// the regular radial solution must satisfy u'(ρ) = α·u(ρ).
pub fn shooting_ball(rho: f64, nu: u32, alpha: f64) -> f64 {
    let nu = nu as f64;
    // u'/u at ρ increases from 0 with k and exceeds α once k > α + (ν−1)/ρ + 1.
    let hi = alpha + (nu - 1.0) / rho + 1.0;
    let k = bisect(0.0, hi, |k| ball_log_derivative(rho, nu, k) - alpha);
    -k * k
}

/// Same eigenvalue for the disk through k·I₁(kρ) = α·I₀(kρ), with the
/// modified Bessel functions summed from their power series.
pub fn bessel_disk(rho: f64, alpha: f64) -> f64 {
    let series = |x: f64| {
        // Returns (I₀(x), I₁(x)) scaled by a common factor e^{−x}.
        let q = x * x / 4.0;
        let mut t0 = (-x).exp();
        let mut t1 = (-x).exp() * x / 2.0;
        let (mut i0, mut i1) = (t0, t1);
        let mut m = 0.0;
        loop {
            m += 1.0;
            t0 *= q / (m * m);
            t1 *= q / (m * (m + 1.0));
            i0 += t0;
            i1 += t1;
            if t0 <= 1e-18 * i0 && t1 <= 1e-18 * i1 {
                break;
            }
        }
        (i0, i1)
    };
    let k = bisect(0.0, alpha + 2.0 / rho, |k| {
        let (i0, i1) = series(k * rho);
        k * i1 / i0 - alpha
    });
    -k * k
}

/// Principal Robin eigenvalue of the shell r < |x| < R ⊂ ℝ^ν at p = 2.
/// Shoots inward from R with u(R) = 1, u'(R) = α. By Sturm comparison the
/// shot stays positive with −u'(r) > α·u(r) exactly when k exceeds the
/// principal value, so bisection on that predicate is safe even when a pole
/// of −u'/u sits next to the root.
pub fn shooting_shell(inner: f64, outer: f64, nu: u32, alpha: f64) -> f64 {
    let nu = nu as f64;
    let admissible = |k: f64| {
        let k2 = k * k;
        let n = steps_for(k, outer - inner);
        let h = -(outer - inner) / n as f64;
        let mut y = [1.0, alpha];
        let mut r = outer;
        for _ in 0..n {
            y = rk4(r, y, h, k2, nu);
            r += h;
            if y[0] <= 0.0 {
                return -1.0;
            }
            y = [1.0, y[1] / y[0]];
        }
        if -y[1] / y[0] > alpha {
            1.0
        } else {
            -1.0
        }
    };
    let hi = 2.0 * alpha + 2.0 * (nu - 1.0) / inner + 10.0;
    assert!(admissible(hi) > 0.0 && admissible(0.0) < 0.0);
    let k = bisect(0.0, hi, admissible);
    -k * k
}

/// Exact generalized eigenpair (λ, u) of the discrete p = 2 problem
/// K u = λ M u on a grid with unit weight, Robin coefficient α at t = a only
/// and a free end at b. K is the P1 stiffness minus α at node 0, M the
/// midpoint-rule mass matrix. M is singular, so the pencil is shifted below
/// the spectrum and the largest eigenvalue of L⁻¹ M L⁻ᵀ is taken.
pub fn discrete_robin_eigenpair(nodes: &[f64], alpha: f64) -> (f64, Vec<f64>) {
    let n = nodes.len();
    let mut k = DMatrix::<f64>::zeros(n, n);
    let mut m = DMatrix::<f64>::zeros(n, n);
    for i in 0..n - 1 {
        let h = nodes[i + 1] - nodes[i];
        for (a, b, kv, mv) in [(i, i, 1.0 / h, h / 4.0), (i + 1, i + 1, 1.0 / h, h / 4.0), (i, i + 1, -1.0 / h, h / 4.0), (i + 1, i, -1.0 / h, h / 4.0)] {
            k[(a, b)] += kv;
            m[(a, b)] += mv;
        }
    }
    k[(0, 0)] -= alpha;
    let shift = -(alpha + 1.0).powi(2) - 10.0;
    let a = &k - shift * &m;
    let chol = a.clone().cholesky().expect("shifted pencil must be positive definite");
    let l = chol.l();
    let linv = l.clone().try_inverse().unwrap();
    let c = &linv * &m * linv.transpose();
    let c = (&c + c.transpose()) * 0.5;
    let eig = SymmetricEigen::new(c);
    let (idx, mu) = eig.eigenvalues.iter().enumerate().fold((0, f64::MIN), |b, (i, v)| if *v > b.1 { (i, *v) } else { b });
    let y = eig.eigenvectors.column(idx).into_owned();
    let u = linv.transpose() * y;
    let sign = if u.sum() < 0.0 { -1.0 } else { 1.0 };
    (shift + 1.0 / mu, u.iter().map(|v| v * sign).collect())
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}
