//! Shared numeric tolerances and the quadrature / root-finding kernels.

/// Every tolerance used by the numeric kernels, in one place.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NumericPolicy {
    /// Stop summing a pmf series once the remaining mass is below this.
    pub series_tail: f64,
    /// Absolute tolerance of adaptive quadrature.
    pub quad_abs_tol: f64,
    /// Relative tolerance of adaptive quadrature.
    pub quad_rel_tol: f64,
    /// Maximum bisection depth of adaptive quadrature.
    pub quad_max_depth: u32,
    /// A CDF built from a density is rejected if its total mass is off by more.
    pub normalization_tol: f64,
    /// Bisection stopping width for inverse CDFs.
    pub inverse_tol: f64,
    /// Cells of the tabulated CDF.
    pub cdf_cells: usize,
    /// Atoms used to discretise a continuous distribution.
    pub quantile_atoms: usize,
    /// Grid used to build `F_0` from a non-step multigraphon.
    pub degree_grid: usize,
    /// Largest Poisson mixing rate accepted by the CIR transition density.
    pub max_mixing_rate: f64,
    /// Exact enumeration budget for induced densities.
    pub enumeration_budget: f64,
}

pub const POLICY: NumericPolicy = NumericPolicy {
    series_tail: 1e-12,
    quad_abs_tol: 1e-13,
    quad_rel_tol: 1e-11,
    quad_max_depth: 48,
    normalization_tol: 1e-4,
    inverse_tol: 1e-11,
    cdf_cells: 1024,
    quantile_atoms: 1024,
    degree_grid: 1 << 14,
    max_mixing_rate: 1e6,
    enumeration_budget: 1e8,
};

// Gauss-Kronrod 7/15 nodes and weights on [-1, 1].
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// One Gauss-Kronrod 15-point panel: (kronrod estimate, |kronrod - gauss|).
pub fn gk15<F: Fn(f64) -> f64 + ?Sized>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Adaptive Gauss-Kronrod integral of `f` over `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64 + ?Sized>(f: &F, a: f64, b: f64) -> f64 {
    integrate_tol(f, a, b, POLICY.quad_abs_tol, POLICY.quad_rel_tol)
}

pub fn integrate_tol<F: Fn(f64) -> f64 + ?Sized>(f: &F, a: f64, b: f64, abs: f64, rel: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let (whole, err) = gk15(f, a, b);
    recurse(f, a, b, whole, err, abs, rel, POLICY.quad_max_depth)
}

#[allow(clippy::too_many_arguments)]
fn recurse<F: Fn(f64) -> f64 + ?Sized>(
    f: &F,
    a: f64,
    b: f64,
    whole: f64,
    err: f64,
    abs: f64,
    rel: f64,
    depth: u32,
) -> f64 {
    if err <= abs.max(rel * whole.abs()) || depth == 0 {
        return whole;
    }
    let m = 0.5 * (a + b);
    let (l, el) = gk15(f, a, m);
    let (r, er) = gk15(f, m, b);
    recurse(f, a, m, l, el, 0.5 * abs, rel, depth - 1)
        + recurse(f, m, b, r, er, 0.5 * abs, rel, depth - 1)
}

/// Integral over `[0, b]` after substituting `x = u^2`, which removes
/// integrable `x^{-1/2}`-type singularities at the origin.
pub fn integrate_from_zero<F: Fn(f64) -> f64 + ?Sized>(f: &F, b: f64) -> f64 {
    let g = |u: f64| 2.0 * u * f(u * u);
    integrate(&g, 0.0, b.sqrt())
}

/// Integral over `[a, inf)` via `x = a + s / (1 - s)`.
pub fn integrate_to_infinity<F: Fn(f64) -> f64 + ?Sized>(f: &F, a: f64) -> f64 {
    let g = |s: f64| {
        if s >= 1.0 {
            return 0.0;
        }
        let d = 1.0 - s;
        f(a + s / d) / (d * d)
    };
    integrate(&g, 0.0, 1.0)
}

/// Smallest `z` in `[lo, hi]` (to within `tol`) with `pred(z)` true,
/// assuming `pred` is monotone (false ... false true ... true).
pub fn bisect<P: FnMut(f64) -> bool>(mut pred: P, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    while hi - lo > tol * (1.0 + hi.abs()) {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let v = integrate(&|x: f64| 3.0 * x * x, 0.0, 2.0);
        assert!((v - 8.0).abs() < 1e-13);
    }

    #[test]
    fn sqrt_singularity_at_origin() {
        let v = integrate_from_zero(&|x: f64| if x > 0.0 { x.powf(-0.5) } else { 0.0 }, 4.0);
        assert!((v - 4.0).abs() < 1e-10, "{v}");
    }

    #[test]
    fn infinite_tail() {
        let v = integrate_to_infinity(&|x: f64| (-x).exp(), 1.0);
        assert!((v - (-1.0f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn bisect_finds_threshold() {
        let z = bisect(|x| x * x >= 2.0, 0.0, 2.0, 1e-14);
        assert!((z - 2f64.sqrt()).abs() < 1e-12);
    }
}
