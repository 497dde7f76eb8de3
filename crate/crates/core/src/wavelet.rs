//! Meyer scaling function and wavelet, described by their Fourier transforms.
//!
//! The transforms are compactly supported: the scaling symbol lives on
//! `|y| <= 4π/3` and the wavelet symbol on the annulus `2π/3 <= |y| <= 8π/3`.
//! Time-domain values are obtained by inverse-Fourier quadrature over those
//! finite ranges and memoized on a dense grid.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{self, GaussLegendre};

pub const TWO_PI_THIRDS: f64 = 2.0 * PI / 3.0;
pub const FOUR_PI_THIRDS: f64 = 4.0 * PI / 3.0;
pub const EIGHT_PI_THIRDS: f64 = 8.0 * PI / 3.0;

/// Minimum smoothness order of the auxiliary polynomial.
pub const MIN_AUX_ORDER: u32 = 3;

/// Half-width of the memoized time grid.
pub const CACHE_RADIUS: f64 = 64.0;
/// Samples per unit time in the memoized grid.
pub const CACHE_DENSITY: usize = 256;
/// Extent of the lazily built far-field table; direct quadrature beyond.
pub const FAR_RADIUS: f64 = 4096.0;
/// Samples per unit time in the far-field table. Coarser than the dense
/// range is enough because the functions are below 1e-7 there.
const FAR_DENSITY: usize = 64;

const FREQ_PANEL: f64 = PI / 8.0;
const CACHE_REFINE_TOL: f64 = 1e-8;
const IMAG_TOL: f64 = 1e-10;

/// Which frequency-domain quantity to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Member {
    Phi,
    Psi,
    PhiD1,
    PsiD1,
    PsiD2,
}

/// The two base functions of the multiresolution pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Base {
    Phi,
    Psi,
}

/// Level and shift of a dilated/translated basis function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DyadicIndex {
    pub j: u32,
    pub k: i64,
}

impl DyadicIndex {
    pub fn new(j: u32, k: i64) -> Self {
        Self { j, k }
    }

    /// Dilation factor `2^j`.
    pub fn scale(&self) -> f64 {
        (self.j as f64).exp2()
    }

    /// Maps an absolute time to the argument of the base function.
    pub fn local(&self, t: f64) -> f64 {
        self.scale() * t - self.k as f64
    }
}

/// Meyer auxiliary function ν of order r: the polynomial of degree 2r+1 with
/// ν(0)=0, ν(1)=1, ν(x)+ν(1-x)=1 and r vanishing derivatives at both ends.
#[derive(Debug, Clone)]
pub struct AuxPolynomial {
    order: u32,
    binomials: Vec<f64>,
    norm: f64,
}

impl AuxPolynomial {
    pub fn new(order: u32) -> Self {
        let n = 2 * order + 1;
        let mut binomials = vec![1.0f64; n as usize + 1];
        for i in 1..=n as usize {
            binomials[i] = binomials[i - 1] * (n as usize + 1 - i) as f64 / i as f64;
        }
        // ν'(x) = norm * x^r (1-x)^r with norm = (2r+1)! / (r!)^2
        let r = order as usize;
        let norm = (r + 1..=2 * r + 1).map(|i| i as f64).product::<f64>()
            / (1..=r).map(|i| i as f64).product::<f64>();
        Self {
            order,
            binomials,
            norm,
        }
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    /// ν on [0, 1]; clamped outside.
    pub fn value(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        if x >= 1.0 {
            return 1.0;
        }
        let n = (2 * self.order + 1) as i32;
        let y = 1.0 - x;
        let mut acc = 0.0;
        for i in (self.order + 1) as i32..=n {
            acc += self.binomials[i as usize] * x.powi(i) * y.powi(n - i);
        }
        acc
    }

    pub fn d1(&self, x: f64) -> f64 {
        if !(0.0..=1.0).contains(&x) {
            return 0.0;
        }
        let r = self.order as i32;
        self.norm * x.powi(r) * (1.0 - x).powi(r)
    }

    pub fn d2(&self, x: f64) -> f64 {
        if !(0.0..=1.0).contains(&x) {
            return 0.0;
        }
        let r = self.order as i32;
        let rf = r as f64;
        self.norm * rf * (x.powi(r - 1) * (1.0 - x).powi(r) - x.powi(r) * (1.0 - x).powi(r - 1))
    }
}

/// sin(π/2 · ν(x)) with its first two derivatives in x.
fn taper(aux: &AuxPolynomial, x: f64) -> [f64; 3] {
    let h = 0.5 * PI;
    let v = aux.value(x);
    let (s, c) = (h * v).sin_cos();
    let d1 = aux.d1(x);
    let d2 = aux.d2(x);
    [s, c * h * d1, -s * (h * d1).powi(2) + c * h * d2]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Shape {
    Scaling,
    Wavelet,
}

/// Fourier transform of a base function with derivatives up to order two.
#[derive(Debug, Clone)]
pub struct FrequencyForm {
    pub support_lo: f64,
    pub support_hi: f64,
    shape: Shape,
    aux: AuxPolynomial,
}

impl FrequencyForm {
    fn scaling(aux_order: u32) -> Self {
        Self {
            support_lo: 0.0,
            support_hi: FOUR_PI_THIRDS,
            shape: Shape::Scaling,
            aux: AuxPolynomial::new(aux_order),
        }
    }

    fn wavelet(aux_order: u32) -> Self {
        Self {
            support_lo: TWO_PI_THIRDS,
            support_hi: EIGHT_PI_THIRDS,
            shape: Shape::Wavelet,
            aux: AuxPolynomial::new(aux_order),
        }
    }

    /// Breakpoints of the piecewise definition on the positive half-line,
    /// including both support ends.
    pub fn junctions(&self) -> &'static [f64] {
        match self.shape {
            Shape::Scaling => &[0.0, TWO_PI_THIRDS, FOUR_PI_THIRDS],
            Shape::Wavelet => &[TWO_PI_THIRDS, FOUR_PI_THIRDS, EIGHT_PI_THIRDS],
        }
    }

    /// Real even magnitude profile and its derivatives with respect to y.
    fn profile(&self, y: f64) -> [f64; 3] {
        let a = y.abs();
        let sgn = if y < 0.0 { -1.0 } else { 1.0 };
        // each taper piece is g(x) with x = slope*|y| + offset
        let piece = |slope: f64, offset: f64| {
            let g = taper(&self.aux, slope * a + offset);
            [g[0], g[1] * slope * sgn, g[2] * slope * slope]
        };
        match self.shape {
            Shape::Scaling => {
                if a < TWO_PI_THIRDS {
                    [1.0, 0.0, 0.0]
                } else if a <= FOUR_PI_THIRDS {
                    // cos(π/2 ν(x)) = sin(π/2 ν(1-x)), x = 3|y|/(2π) - 1
                    piece(-3.0 / (2.0 * PI), 2.0)
                } else {
                    [0.0; 3]
                }
            }
            Shape::Wavelet => {
                if a < TWO_PI_THIRDS {
                    [0.0; 3]
                } else if a <= FOUR_PI_THIRDS {
                    piece(3.0 / (2.0 * PI), -1.0)
                } else if a <= EIGHT_PI_THIRDS {
                    piece(-3.0 / (4.0 * PI), 2.0)
                } else {
                    [0.0; 3]
                }
            }
        }
    }

    /// Value, first and second derivative at frequency `y`.
    pub fn eval(&self, y: f64) -> [Complex64; 3] {
        let [m, m1, m2] = self.profile(y);
        match self.shape {
            Shape::Scaling => [m.into(), m1.into(), m2.into()],
            Shape::Wavelet => {
                if m == 0.0 && m1 == 0.0 && m2 == 0.0 {
                    return [Complex64::new(0.0, 0.0); 3];
                }
                // phase factor exp(-iy/2)
                let phase = Complex64::from_polar(1.0, -0.5 * y);
                let i = Complex64::i();
                [
                    phase * m,
                    phase * (m1 - 0.5 * i * m),
                    phase * (m2 - i * m1 - 0.25 * m),
                ]
            }
        }
    }

    pub fn value(&self, y: f64) -> Complex64 {
        self.eval(y)[0]
    }

    /// |value|, which is the real magnitude profile.
    pub fn magnitude(&self, y: f64) -> f64 {
        self.profile(y)[0]
    }
}

/// Dominating function `C / (1 + |t|)^p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub amplitude: f64,
    pub exponent: f64,
}

impl Envelope {
    pub fn at(&self, t: f64) -> f64 {
        self.amplitude / (1.0 + t.abs()).powf(self.exponent)
    }

    /// ∫₀^∞ C/(1+x)^p dx.
    pub fn half_line_integral(&self) -> f64 {
        if self.exponent <= 1.0 {
            f64::INFINITY
        } else {
            self.amplitude / (self.exponent - 1.0)
        }
    }
}

/// Meyer f-wavelet / m-wavelet pair.
#[derive(Debug)]
pub struct WaveletPair {
    pub phi_hat: FrequencyForm,
    pub psi_hat: FrequencyForm,
    aux_order: u32,
    phi_time: OnceLock<Result<TimeDomain>>,
    psi_time: OnceLock<Result<TimeDomain>>,
    phi_envelope: OnceLock<Result<Envelope>>,
    psi_envelope: OnceLock<Result<Envelope>>,
}

/// Builds the Meyer pair with auxiliary polynomial of the given order.
pub fn build_meyer_pair(aux_order: u32) -> Result<WaveletPair> {
    if aux_order < MIN_AUX_ORDER {
        return Err(Error::Precondition(format!(
            "aux_order must be at least {MIN_AUX_ORDER}, got {aux_order}"
        )));
    }
    Ok(WaveletPair {
        phi_hat: FrequencyForm::scaling(aux_order),
        psi_hat: FrequencyForm::wavelet(aux_order),
        aux_order,
        phi_time: OnceLock::new(),
        psi_time: OnceLock::new(),
        phi_envelope: OnceLock::new(),
        psi_envelope: OnceLock::new(),
    })
}

impl WaveletPair {
    pub fn aux_order(&self) -> u32 {
        self.aux_order
    }

    pub fn form(&self, base: Base) -> &FrequencyForm {
        match base {
            Base::Phi => &self.phi_hat,
            Base::Psi => &self.psi_hat,
        }
    }

    /// Evaluates one member of the pair at frequency `z`.
    pub fn eval_frequency(&self, member: Member, z: f64) -> Complex64 {
        match member {
            Member::Phi => self.phi_hat.eval(z)[0],
            Member::PhiD1 => self.phi_hat.eval(z)[1],
            Member::Psi => self.psi_hat.eval(z)[0],
            Member::PsiD1 => self.psi_hat.eval(z)[1],
            Member::PsiD2 => self.psi_hat.eval(z)[2],
        }
    }

    /// Memoized time-domain representation of a base function.
    pub fn time_domain(&self, base: Base) -> Result<&TimeDomain> {
        let cell = match base {
            Base::Phi => &self.phi_time,
            Base::Psi => &self.psi_time,
        };
        cell.get_or_init(|| TimeDomain::build(self.form(base).clone()))
            .as_ref()
            .map_err(Clone::clone)
    }

    /// `2^{j/2} w(2^j t - k)` for `w` the requested base function.
    pub fn eval_time(&self, base: Base, index: DyadicIndex, t: f64) -> Result<f64> {
        Ok(self.time_domain(base)?.dyadic(index, t))
    }

    /// Envelope `C/(1+|t|)^p` with `p = aux_order + 1`, fitted on `[-t_max, t_max]`.
    pub fn fit_envelope(&self, base: Base, t_max: f64) -> Result<Envelope> {
        if t_max < 20.0 {
            return Err(Error::Precondition(format!(
                "envelope fit needs t_max >= 20, got {t_max}"
            )));
        }
        let td = self.time_domain(base)?;
        let p = (self.aux_order + 1) as f64;
        let steps = (t_max * 2.0 * CACHE_DENSITY as f64).ceil() as usize;
        let h = t_max / steps as f64;
        let mut c: f64 = 0.0;
        for i in 0..=steps {
            let t = i as f64 * h;
            let w = td.value(t).abs().max(td.value(-t).abs());
            c = c.max(w * (1.0 + t).powf(p));
        }
        // pad for the gaps between grid points
        Ok(Envelope {
            amplitude: c * 1.02,
            exponent: p,
        })
    }

    /// Envelope fitted on the whole memoized range.
    pub fn envelope(&self, base: Base) -> Result<Envelope> {
        let cell = match base {
            Base::Phi => &self.phi_envelope,
            Base::Psi => &self.psi_envelope,
        };
        cell.get_or_init(|| self.fit_envelope(base, CACHE_RADIUS))
            .clone()
    }
}

/// Frequency nodes for inverse-Fourier sums: positive abscissae with the
/// weighted transform at `+y` and `-y`.
#[derive(Debug, Clone)]
struct NodeTable {
    freq: Vec<f64>,
    plus: Vec<Complex64>,
    minus: Vec<Complex64>,
}

impl NodeTable {
    fn new(form: &FrequencyForm, panel_width: f64) -> Self {
        let ps = quadrature::panels(form.junctions(), panel_width);
        let rule = GaussLegendre::g32();
        let mut freq = Vec::with_capacity(ps.len() * rule.len());
        let mut plus = Vec::with_capacity(freq.capacity());
        let mut minus = Vec::with_capacity(freq.capacity());
        for &(a, b) in &ps {
            for (y, w) in rule.mapped(a, b) {
                freq.push(y);
                plus.push(form.value(y) * w);
                minus.push(form.value(-y) * w);
            }
        }
        Self { freq, plus, minus }
    }

    /// (1/2π) ∫ ŵ(y) e^{iyt} dy and the same for the derivative (factor iy).
    fn inverse(&self, t: f64) -> (Complex64, Complex64) {
        let mut val = Complex64::new(0.0, 0.0);
        let mut der = Complex64::new(0.0, 0.0);
        for ((&y, &p), &m) in self.freq.iter().zip(&self.plus).zip(&self.minus) {
            let (s, c) = (y * t).sin_cos();
            let e = Complex64::new(c, s);
            let fwd = p * e;
            let bwd = m * e.conj();
            val += fwd + bwd;
            der += Complex64::new(0.0, y) * (fwd - bwd);
        }
        let norm = 1.0 / (2.0 * PI);
        (val * norm, der * norm)
    }
}

/// Panel width in frequency that keeps at most four oscillations of
/// `exp(iyt)` per panel.
fn panel_width_for(t: f64) -> f64 {
    FREQ_PANEL.min(8.0 * PI / t.abs().max(1e-300))
}

/// Inverse Fourier transform of `form` at time `t` by composite quadrature,
/// without caching. Returns the complex integral so callers can inspect the
/// imaginary residue.
pub fn inverse_fourier_direct(form: &FrequencyForm, t: f64) -> Complex64 {
    NodeTable::new(form, panel_width_for(t)).inverse(t).0
}

/// Dense cubic-Hermite table of a base function on `[-CACHE_RADIUS, CACHE_RADIUS]`,
/// extended lazily by unit blocks out to `FAR_RADIUS`.
#[derive(Debug)]
pub struct TimeDomain {
    form: FrequencyForm,
    values: Vec<f64>,
    derivs: Vec<f64>,
    far: Vec<OnceLock<FarBlock>>,
}

/// Values and derivatives at `start + i / FAR_DENSITY`, `i = 0..=FAR_DENSITY`.
#[derive(Debug)]
struct FarBlock {
    values: Vec<f64>,
    derivs: Vec<f64>,
}

impl FarBlock {
    fn build(form: &FrequencyForm, start: f64) -> Self {
        let table = NodeTable::new(form, panel_width_for(start.abs() + 1.0));
        let (values, derivs) = (0..=FAR_DENSITY)
            .map(|i| {
                let (v, d) = table.inverse(start + i as f64 / FAR_DENSITY as f64);
                (v.re, d.re)
            })
            .unzip();
        Self { values, derivs }
    }
}

/// Cubic Hermite value and derivative on a cell of width `h` at fraction `u`.
fn hermite(y: [f64; 2], d: [f64; 2], h: f64, u: f64) -> (f64, f64) {
    let (m0, m1) = (d[0] * h, d[1] * h);
    let u2 = u * u;
    let u3 = u2 * u;
    let value = (2.0 * u3 - 3.0 * u2 + 1.0) * y[0] + (u3 - 2.0 * u2 + u) * m0 + (-2.0 * u3 + 3.0 * u2) * y[1] + (u3 - u2) * m1;
    let slope = ((6.0 * u2 - 6.0 * u) * y[0]
        + (3.0 * u2 - 4.0 * u + 1.0) * m0
        + (-6.0 * u2 + 6.0 * u) * y[1]
        + (3.0 * u2 - 2.0 * u) * m1)
        / h;
    (value, slope)
}

impl TimeDomain {
    fn build(form: FrequencyForm) -> Result<Self> {
        let coarse = NodeTable::new(&form, FREQ_PANEL);
        let fine = NodeTable::new(&form, 0.5 * FREQ_PANEL);
        let n = 2 * CACHE_RADIUS as usize * CACHE_DENSITY + 1;
        let h = 1.0 / CACHE_DENSITY as f64;
        let mut values = Vec::with_capacity(n);
        let mut derivs = Vec::with_capacity(n);
        for i in 0..n {
            let t = -CACHE_RADIUS + i as f64 * h;
            let (v0, d0) = coarse.inverse(t);
            let (v1, d1) = fine.inverse(t);
            if (v0.re - v1.re).abs() > CACHE_REFINE_TOL || (d0.re - d1.re).abs() > CACHE_REFINE_TOL * 10.0 {
                return Err(Error::Quadrature {
                    context: format!("inverse transform at t = {t}"),
                    coarse: v0.re,
                    refined: v1.re,
                });
            }
            if v1.im.abs() > IMAG_TOL {
                return Err(Error::ImaginaryResidue {
                    context: format!("inverse transform at t = {t}"),
                    real: v1.re,
                    imag: v1.im,
                });
            }
            values.push(v1.re);
            derivs.push(d1.re);
        }
        let blocks = 2 * (FAR_RADIUS - CACHE_RADIUS) as usize;
        Ok(Self {
            form,
            values,
            derivs,
            far: (0..blocks).map(|_| OnceLock::new()).collect(),
        })
    }

    /// Value and derivative from the tables, or by direct quadrature beyond
    /// `FAR_RADIUS`.
    fn eval(&self, t: f64) -> (f64, f64) {
        if (-CACHE_RADIUS..=CACHE_RADIUS).contains(&t) {
            let s = (t + CACHE_RADIUS) * CACHE_DENSITY as f64;
            let i = (s.floor() as usize).min(self.values.len() - 2);
            let h = 1.0 / CACHE_DENSITY as f64;
            return hermite(
                [self.values[i], self.values[i + 1]],
                [self.derivs[i], self.derivs[i + 1]],
                h,
                s - i as f64,
            );
        }
        if t.abs() < FAR_RADIUS {
            let start = t.floor();
            let half = (FAR_RADIUS - CACHE_RADIUS) as usize;
            let slot = if start >= 0.0 {
                (start - CACHE_RADIUS) as usize
            } else {
                half + (-start - CACHE_RADIUS - 1.0) as usize
            };
            let block = self.far[slot].get_or_init(|| FarBlock::build(&self.form, start));
            let s = (t - start) * FAR_DENSITY as f64;
            let i = (s.floor() as usize).min(FAR_DENSITY - 1);
            return hermite(
                [block.values[i], block.values[i + 1]],
                [block.derivs[i], block.derivs[i + 1]],
                1.0 / FAR_DENSITY as f64,
                s - i as f64,
            );
        }
        let (v, d) = NodeTable::new(&self.form, panel_width_for(t)).inverse(t);
        (v.re, d.re)
    }

    /// Base function value at `t`.
    pub fn value(&self, t: f64) -> f64 {
        self.eval(t).0
    }

    /// Derivative of the base function at `t`.
    pub fn derivative(&self, t: f64) -> f64 {
        self.eval(t).1
    }

    /// `2^{j/2} w(2^j t - k)`.
    pub fn dyadic(&self, index: DyadicIndex, t: f64) -> f64 {
        index.scale().sqrt() * self.value(index.local(t))
    }

    /// Sampled grid values (spacing `1/CACHE_DENSITY`, starting at `-CACHE_RADIUS`).
    pub fn samples(&self) -> &[f64] {
        &self.values
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair() -> WaveletPair {
        build_meyer_pair(3).unwrap()
    }

    #[test]
    fn rejects_low_order() {
        let err = build_meyer_pair(2).unwrap_err();
        assert!(err.to_string().contains("at least 3"));
    }

    #[test]
    fn aux_polynomial_matches_monomial_form() {
        let nu = AuxPolynomial::new(3);
        for i in 0..=100 {
            let x = i as f64 / 100.0;
            let mono = x.powi(4) * (35.0 - 84.0 * x + 70.0 * x * x - 20.0 * x.powi(3));
            // the monomial form cancels badly near x = 1
            assert!((nu.value(x) - mono).abs() < 1e-12, "x = {x}");
            let d1 = 140.0 * x.powi(3) * (1.0 - x).powi(3);
            assert!((nu.d1(x) - d1).abs() < 1e-12);
            assert!((nu.value(x) + nu.value(1.0 - x) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn simple_values() {
        let p = pair();
        assert_eq!(p.eval_frequency(Member::Phi, 0.0), Complex64::new(1.0, 0.0));
        assert_eq!(p.eval_frequency(Member::Psi, 0.0), Complex64::new(0.0, 0.0));
        assert_eq!(p.eval_frequency(Member::PsiD1, 0.0), Complex64::new(0.0, 0.0));
        assert_eq!(p.eval_frequency(Member::Phi, 10.0), Complex64::new(0.0, 0.0));
        let v = p.eval_frequency(Member::Phi, PI);
        // independent evaluation of the taper from the monomial form
        let x = 3.0 * PI / (2.0 * PI) - 1.0;
        let nu = x.powi(4) * (35.0 - 84.0 * x + 70.0 * x * x - 20.0 * x.powi(3));
        assert!((v.re - (0.5 * PI * nu).cos()).abs() < 1e-14);
        assert!(v.re > 0.0 && v.re < 1.0 && v.im == 0.0);
    }

    #[test]
    fn psi_hat_vanishes_near_origin() {
        let p = pair();
        for i in 0..200 {
            let y = -TWO_PI_THIRDS + (i as f64 + 0.5) * (2.0 * TWO_PI_THIRDS) / 200.0;
            for m in [Member::Psi, Member::PsiD1, Member::PsiD2] {
                assert_eq!(p.eval_frequency(m, y), Complex64::new(0.0, 0.0));
            }
        }
    }

    #[test]
    fn support_ends_are_exact_zeros() {
        let p = pair();
        for m in [Member::Phi, Member::PhiD1] {
            assert_eq!(p.eval_frequency(m, FOUR_PI_THIRDS + 1e-12).norm(), 0.0);
        }
        assert!(p.phi_hat.magnitude(FOUR_PI_THIRDS) < 1e-50);
        assert!(p.psi_hat.magnitude(EIGHT_PI_THIRDS) < 1e-50);
        assert_eq!(p.psi_hat.magnitude(-EIGHT_PI_THIRDS - 1.0), 0.0);
    }

    #[test]
    fn partition_of_unity_dense() {
        let p = pair();
        for i in 0..1024 {
            let y = -PI + 2.0 * PI * i as f64 / 1023.0;
            let s: f64 = (-2..=2)
                .map(|k| p.eval_frequency(Member::Phi, y + 2.0 * PI * k as f64).norm_sqr())
                .sum();
            assert!((s - 1.0).abs() < 1e-10, "y = {y}: {s}");
        }
    }

    #[test]
    fn dilation_identity() {
        let p = pair();
        let td = p.time_domain(Base::Psi).unwrap();
        for i in 0..50 {
            let t = -3.0 + 0.137 * i as f64;
            let a = p.eval_time(Base::Psi, DyadicIndex::new(2, 3), t).unwrap();
            let b = 2.0 * td.value(4.0 * t - 3.0);
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn phi_is_even() {
        let p = pair();
        for i in 0..100 {
            let t = 0.0371 * i as f64;
            let a = p.eval_time(Base::Phi, DyadicIndex::new(0, 0), t).unwrap();
            let b = p.eval_time(Base::Phi, DyadicIndex::new(0, 0), -t).unwrap();
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn cache_matches_direct_quadrature() {
        let p = pair();
        for base in [Base::Phi, Base::Psi] {
            let td = p.time_domain(base).unwrap();
            for i in 0..40 {
                let t = -20.0 + 1.013 * i as f64 + 0.001_953;
                let direct = inverse_fourier_direct(p.form(base), t);
                assert!(direct.im.abs() < 1e-12);
                assert!((td.value(t) - direct.re).abs() < 1e-9, "{base:?} t={t}");
            }
            // far-field blocks on both sides, then the direct path
            for t in [64.0, 64.5, 100.3, -64.2, -65.0, -771.77, 2047.9, 4095.999, -4095.5] {
                let direct = inverse_fourier_direct(p.form(base), t).re;
                assert!((td.value(t) - direct).abs() < 1e-13, "{base:?} t={t}");
            }
            let far = td.value(5000.3);
            assert!((far - inverse_fourier_direct(p.form(base), 5000.3).re).abs() < 1e-15);
        }
    }

    #[test]
    fn envelope_bounds_samples() {
        let p = pair();
        let env = p.fit_envelope(Base::Phi, 40.0).unwrap();
        assert_eq!(env.exponent, 4.0);
        let td = p.time_domain(Base::Phi).unwrap();
        for i in 0..10_000 {
            let t = 40.0 * i as f64 / 9_999.0;
            assert!(td.value(t).abs() <= env.at(t));
        }
        assert!((env.half_line_integral() - env.amplitude / 3.0).abs() < 1e-15);
        assert!(p.fit_envelope(Base::Phi, 10.0).is_err());
    }
}
