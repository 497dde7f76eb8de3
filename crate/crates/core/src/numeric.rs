//! Small scalar utilities: one-dimensional maximization and the Riemann zeta
//! function.

/// Maximizer of a unimodal `f` on `[a, b]` by golden-section search.
pub fn golden_section_max<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol * (a.abs() + b.abs()).max(1e-300) && (b - a).abs() > 1e-300 {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    // the endpoints are candidates too, for monotone f
    let mut best = (0.5 * (a + b), f(0.5 * (a + b)));
    for x in [a, b] {
        let v = f(x);
        if v > best.1 {
            best = (x, v);
        }
    }
    best
}

/// Maximum of `f` over an equispaced grid of `points` on `[lo, hi]`, then
/// polished by golden-section search in the neighbouring cells.
pub fn grid_max<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, points: usize) -> (f64, f64) {
    assert!(points >= 2);
    let h = (hi - lo) / (points - 1) as f64;
    let mut best = (lo, f(lo));
    for i in 1..points {
        let x = lo + h * i as f64;
        let v = f(x);
        if v > best.1 {
            best = (x, v);
        }
    }
    let a = (best.0 - h).max(lo);
    let b = (best.0 + h).min(hi);
    let polished = golden_section_max(&f, a, b, 1e-13);
    if polished.1 > best.1 {
        polished
    } else {
        best
    }
}

/// Riemann zeta ζ(s) for real s > 1 by Euler–Maclaurin summation.
pub fn zeta(s: f64) -> f64 {
    assert!(s > 1.0, "zeta needs s > 1, got {s}");
    const N: usize = 20;
    let n = N as f64;
    let mut sum: f64 = (1..N).map(|k| (k as f64).powf(-s)).sum();
    sum += n.powf(1.0 - s) / (s - 1.0) + 0.5 * n.powf(-s);
    // Bernoulli corrections B_{2m}/(2m)! * s(s+1)...(s+2m-2) N^{-s-2m+1}
    const B: [f64; 6] = [
        1.0 / 6.0,
        -1.0 / 30.0,
        1.0 / 42.0,
        -1.0 / 30.0,
        5.0 / 66.0,
        -691.0 / 2730.0,
    ];
    let mut rising = s;
    let mut fact = 2.0;
    for (m, b) in B.iter().enumerate() {
        let k = 2 * m as i32 + 1;
        sum += b / fact * rising * n.powf(-s - k as f64);
        rising *= (s + k as f64) * (s + k as f64 + 1.0);
        fact *= ((2 * m + 3) * (2 * m + 4)) as f64;
    }
    sum
}
