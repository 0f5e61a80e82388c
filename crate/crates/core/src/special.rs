//! Special functions and quadrature rules used across the crate.
//!
//! Everything here is self-contained: a Lanczos gamma, the upper incomplete
//! gamma, the analytically continued Epstein zeta function of the cubic
//! lattice, and Gauss-Legendre nodes.

use std::f64::consts::PI;

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Gamma function (Lanczos, g = 7), about 1e-15 relative accuracy on the real line
/// away from the poles.
pub fn gamma(x: f64) -> f64 {
    if x < 0.5 {
        PI / ((PI * x).sin() * gamma(1.0 - x))
    } else if x > 140.0 {
        ln_gamma(x).exp()
    } else {
        let x = x - 1.0;
        let t = x + LANCZOS_G + 0.5;
        (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * lanczos_sum(x)
    }
}

/// Natural log of |Gamma(x)| for x > 0.
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        (PI / (PI * x).sin()).abs().ln() - ln_gamma(1.0 - x)
    } else {
        let x = x - 1.0;
        let t = x + LANCZOS_G + 0.5;
        0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + lanczos_sum(x).ln()
    }
}

fn lanczos_sum(x: f64) -> f64 {
    LANCZOS_COEF
        .iter()
        .enumerate()
        .skip(1)
        .fold(LANCZOS_COEF[0], |acc, (i, c)| acc + c / (x + i as f64))
}

/// Upper incomplete gamma Γ(a, x) for x > 0 and a not in {0, -1, -2, ...}.
pub fn upper_incomplete_gamma(a: f64, x: f64) -> f64 {
    assert!(x > 0.0, "upper_incomplete_gamma needs x > 0");
    if a <= 0.0 {
        assert!(a.fract() != 0.0, "upper_incomplete_gamma has no finite value at a = {a}");
        // Γ(a, x) = (Γ(a+1, x) - x^a e^{-x}) / a
        return (upper_incomplete_gamma(a + 1.0, x) - (a * x.ln() - x).exp()) / a;
    }
    if x < a + 1.0 {
        // series for the lower function
        let mut term = 1.0 / a;
        let mut sum = term;
        let mut n = a;
        for _ in 0..1000 {
            n += 1.0;
            term *= x / n;
            sum += term;
            if term.abs() < sum.abs() * 1e-17 {
                break;
            }
        }
        gamma(a) - sum * (-x + a * x.ln()).exp()
    } else {
        // modified Lentz on the continued fraction
        let tiny = 1e-300;
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..1000 {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < tiny {
                d = tiny;
            }
            c = b + an / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = 1.0 / d;
            let delta = d * c;
            h *= delta;
            if (delta - 1.0).abs() < 1e-16 {
                break;
            }
        }
        (-x + a * x.ln()).exp() * h
    }
}

/// Analytic continuation of the Epstein zeta function of the integer lattice,
/// `Z_d(sigma) = sum_{j != 0} |j|^{-sigma}`, for `sigma < d`.
///
/// Uses the theta-function splitting, whose lattice sums converge like
/// `exp(-pi |j|^2)`. `Z_d(0) = -1` and `Z_d(-2k) = 0`.
pub fn epstein_zeta(dim: usize, sigma: f64) -> f64 {
    assert!((1..=3).contains(&dim), "epstein_zeta supports dim 1..=3");
    assert!(sigma < dim as f64, "sigma must be below dim");
    if sigma <= 0.0 && (0.5 * sigma).fract() == 0.0 {
        return if sigma == 0.0 { -1.0 } else { 0.0 };
    }
    let s = 0.5 * sigma;
    let r = 0.5 * dim as f64 - s;
    const REACH: i64 = 5;
    let mut total = 0.0;
    let mut visit = |j2: i64| {
        if j2 == 0 {
            return;
        }
        let x = PI * j2 as f64;
        total += x.powf(-s) * upper_incomplete_gamma(s, x)
            + x.powf(-r) * upper_incomplete_gamma(r, x);
    };
    match dim {
        1 => (-REACH..=REACH).for_each(|i| visit(i * i)),
        2 => {
            for i in -REACH..=REACH {
                for j in -REACH..=REACH {
                    visit(i * i + j * j);
                }
            }
        }
        _ => {
            for i in -REACH..=REACH {
                for j in -REACH..=REACH {
                    for k in -REACH..=REACH {
                        visit(i * i + j * j + k * k);
                    }
                }
            }
        }
    }
    total += 1.0 / (s - 0.5 * dim as f64) - 1.0 / s;
    total * PI.powf(s) / gamma(s)
}

/// Surface area of the unit sphere in R^n.
pub fn unit_sphere_area(n: usize) -> f64 {
    2.0 * PI.powf(0.5 * n as f64) / gamma(0.5 * n as f64)
}

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Composite Gauss-Legendre rule on the panels delimited by `breaks`
/// (strictly increasing), `order` nodes per panel.
pub fn composite_rule(breaks: &[f64], order: usize) -> (Vec<f64>, Vec<f64>) {
    let (z, w) = gauss_legendre(order);
    let mut xs = Vec::with_capacity((breaks.len() - 1) * order);
    let mut ws = Vec::with_capacity(xs.capacity());
    for pair in breaks.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        for (zi, wi) in z.iter().zip(&w) {
            xs.push(mid + half * zi);
            ws.push(half * wi);
        }
    }
    (xs, ws)
}
