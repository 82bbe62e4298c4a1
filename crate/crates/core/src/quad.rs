//! Globally adaptive Gauss–Kronrod (7/15) quadrature.

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

/// Gauss weights attached to the odd Kronrod abscissae `XGK[1], XGK[3], ...`.
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions { abs_tol: 1e-12, rel_tol: 1e-13, max_intervals: 4000 }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    pub abs_err: f64,
    pub evaluations: usize,
}

struct Piece {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

fn kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Piece {
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
    Piece { a, b, value: k * h, err: ((k - g) * h).abs() }
}

/// Integrates `f` over `[a, b]`, bisecting the interval with the largest
/// error estimate until `Σ err ≤ max(abs_tol, rel_tol·|I|)`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, opts: QuadOptions) -> Result<QuadResult> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::domain("integration limits must be finite"));
    }
    if a == b {
        return Ok(QuadResult { value: 0.0, abs_err: 0.0, evaluations: 0 });
    }
    let mut pieces = vec![kronrod(&f, a, b)];
    let mut evaluations = 15;
    loop {
        let value: f64 = pieces.iter().map(|p| p.value).sum();
        let err: f64 = pieces.iter().map(|p| p.err).sum();
        if !value.is_finite() {
            return Err(Error::Numerical("non-finite integrand".into()));
        }
        let target = opts.abs_tol.max(opts.rel_tol * value.abs());
        if err <= target {
            return Ok(QuadResult { value, abs_err: err, evaluations });
        }
        if pieces.len() >= opts.max_intervals {
            return Err(Error::NonConvergence(format!(
                "quadrature on [{a}, {b}] reached {} intervals with error {err:e} > {target:e}",
                pieces.len()
            )));
        }
        let (worst, _) = pieces
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.err.total_cmp(&y.1.err))
            .expect("non-empty");
        let p = pieces.swap_remove(worst);
        let mid = 0.5 * (p.a + p.b);
        if mid <= p.a || mid >= p.b {
            return Err(Error::NonConvergence("interval collapsed below machine precision".into()));
        }
        pieces.push(kronrod(&f, p.a, mid));
        pieces.push(kronrod(&f, mid, p.b));
        evaluations += 30;
    }
}

/// Half-width `L` beyond which `|f(center ± t)|` stays below `ratio·|f(center)|`.
///
/// Assumes `|f|` decays monotonically away from `center`; probes outward by
/// doubling from `scale`.
pub fn decay_half_width<F: Fn(f64) -> f64>(f: &F, center: f64, scale: f64, ratio: f64) -> Result<f64> {
    let peak = f(center).abs();
    if peak == 0.0 {
        return Err(Error::Numerical("integrand vanishes at its peak".into()));
    }
    let mut l = scale;
    for _ in 0..200 {
        if f(center - l).abs() < ratio * peak && f(center + l).abs() < ratio * peak {
            return Ok(l);
        }
        l *= 1.25;
    }
    Err(Error::Numerical("integrand does not decay".into()))
}

/// Integral over ℝ of a function decaying away from `center`, truncated where
/// it falls below `1e-18` of its peak.
pub fn integrate_line<F: Fn(f64) -> f64>(f: F, center: f64, scale: f64, opts: QuadOptions) -> Result<QuadResult> {
    let l = decay_half_width(&f, center, scale, 1e-18)?;
    let left = integrate(&f, center - l, center, opts)?;
    let right = integrate(&f, center, center + l, opts)?;
    Ok(QuadResult {
        value: left.value + right.value,
        abs_err: left.abs_err + right.abs_err,
        evaluations: left.evaluations + right.evaluations,
    })
}
