//! Globally adaptive Gauss-Kronrod (7/15) quadrature of vector-valued
//! complex integrands on a finite interval.

use num_complex::Complex64;

use crate::error::{Error, Result};

type C64 = Complex64;

/// Kronrod abscissae on [0, 1]; odd indices are the 7-point Gauss nodes.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
#[allow(clippy::excessive_precision)]
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
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureResult {
    pub value: Vec<C64>,
    pub error_estimate: f64,
    pub evaluations: usize,
}

struct Segment {
    a: f64,
    b: f64,
    value: Vec<C64>,
    error: f64,
}

fn gauss_kronrod<F>(f: &mut F, a: f64, b: f64, width: usize) -> Segment
where
    F: FnMut(f64) -> Vec<C64>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut kronrod = vec![C64::new(0.0, 0.0); width];
    let mut gauss = vec![C64::new(0.0, 0.0); width];
    let fc = f(center);
    for k in 0..width {
        kronrod[k] += fc[k] * WGK[7];
        gauss[k] += fc[k] * WG[3];
    }
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        for k in 0..width {
            let s = f1[k] + f2[k];
            kronrod[k] += s * WGK[j];
            if j % 2 == 1 {
                gauss[k] += s * WG[j / 2];
            }
        }
    }
    let mut error = 0.0f64;
    for k in 0..width {
        kronrod[k] *= half;
        gauss[k] *= half;
        error = error.max((kronrod[k] - gauss[k]).norm());
    }
    Segment { a, b, value: kronrod, error }
}

/// Integrates `f` over `[a, b]`, bisecting the segment with the largest
/// error until the summed error is below `max(abs_tol, rel_tol · max|I|)`.
/// Segments are always split and summed in a fixed order.
pub fn integrate_adaptive<F>(
    mut f: F,
    a: f64,
    b: f64,
    width: usize,
    abs_tol: f64,
    rel_tol: f64,
    max_evaluations: usize,
) -> Result<QuadratureResult>
where
    F: FnMut(f64) -> Vec<C64>,
{
    const PER_SEGMENT: usize = 15;
    let mut segments = vec![gauss_kronrod(&mut f, a, b, width)];
    let mut evaluations = PER_SEGMENT;
    loop {
        let mut total = vec![C64::new(0.0, 0.0); width];
        let mut error = 0.0;
        for s in &segments {
            for (t, v) in total.iter_mut().zip(&s.value) {
                *t += v;
            }
            error += s.error;
        }
        let scale = total.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if error <= abs_tol.max(rel_tol * scale) {
            return Ok(QuadratureResult { value: total, error_estimate: error, evaluations });
        }
        if evaluations + 2 * PER_SEGMENT > max_evaluations {
            return Err(Error::QuadratureNotConverged { evaluations, error_estimate: error });
        }
        let worst = segments
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .map(|(i, _)| i)
            .expect("at least one segment");
        let s = segments.swap_remove(worst);
        let mid = 0.5 * (s.a + s.b);
        segments.push(gauss_kronrod(&mut f, s.a, mid, width));
        segments.push(gauss_kronrod(&mut f, mid, s.b, width));
        evaluations += 2 * PER_SEGMENT;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn polynomial_is_exact() {
        // Kronrod-15 integrates degree 22 exactly.
        let r = integrate_adaptive(|x| vec![C64::new(x.powi(10), -x.powi(3))], -1.0, 2.0, 1, 0.0, 1e-15, 1000).unwrap();
        assert_relative_eq!(r.value[0].re, (2f64.powi(11) + 1.0) / 11.0, max_relative = 1e-14);
        assert_relative_eq!(r.value[0].im, -(16.0 - 1.0) / 4.0, max_relative = 1e-14);
        assert_eq!(r.evaluations, 15);
    }

    #[test]
    fn exponential_moment() {
        // ∫_0^T τ e^{-ε τ} dτ → 1/ε²
        for eps in [0.05, 1.0, 30.0] {
            let t = 14.0 * 10f64.ln() / eps;
            let r = integrate_adaptive(|x| vec![C64::new(x * (-eps * x).exp(), 0.0)], 0.0, t, 1, 0.0, 1e-13, 100_000)
                .unwrap();
            assert_relative_eq!(r.value[0].re, 1.0 / (eps * eps), max_relative = 1e-11);
        }
    }

    #[test]
    fn budget_exhaustion() {
        let err = integrate_adaptive(|x| vec![C64::new((1.0 / x).sin(), 0.0)], 1e-6, 1.0, 1, 0.0, 1e-15, 200).unwrap_err();
        assert!(matches!(err, Error::QuadratureNotConverged { .. }));
    }
}
