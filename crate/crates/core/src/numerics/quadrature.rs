/// Result of a refined Simpson integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    /// Difference between the last two Richardson-extrapolated estimates.
    pub residual: f64,
    pub intervals: usize,
    pub converged: bool,
}

const MAX_INTERVALS: usize = 1 << 24;

fn simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    debug_assert!(n.is_multiple_of(2));
    let h = (b - a) / n as f64;
    let mut odd = 0.0;
    let mut even = 0.0;
    for i in 1..n {
        let x = a + i as f64 * h;
        if i % 2 == 1 {
            odd += f(x);
        } else {
            even += f(x);
        }
    }
    h / 3.0 * (f(a) + 4.0 * odd + 2.0 * even + f(b))
}

/// Composite Simpson on a uniform grid, doubling the interval count and
/// applying one Richardson step (`S_2n + (S_2n - S_n) / 15`) until successive
/// extrapolated estimates differ by less than `tol`.
pub fn simpson_richardson(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Quadrature {
    let mut n = 8;
    let mut coarse = simpson(&f, a, b, n);
    let mut previous: Option<f64> = None;
    loop {
        n *= 2;
        let fine = simpson(&f, a, b, n);
        let extrapolated = fine + (fine - coarse) / 15.0;
        if let Some(prev) = previous {
            let residual = (extrapolated - prev).abs();
            if residual < tol || n >= MAX_INTERVALS {
                return Quadrature {
                    value: extrapolated,
                    residual,
                    intervals: n,
                    converged: residual < tol,
                };
            }
        }
        previous = Some(extrapolated);
        coarse = fine;
    }
}
