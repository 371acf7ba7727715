//! The Bessel transform at the real place.
//!
//! For `phi` supported in `(0, inf)` the transform is the contour integral
//! `B(y) = 1/(4 pi) sum_r (-1)^{r(n-1)} sgn(y)^r int gamma(1-s, sgn^r pi) m(phi, 1-s-(n-1)/2) |y|^{(n-1)/2-s} dt`
//! over `s = sigma + i t`, with `m(phi, w) = int phi(x) x^{w-1} dx`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
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

/// `log sin(pi z)` on some branch.
fn ln_sin_pi(z: Complex64) -> Complex64 {
    let w = PI * z;
    let i = Complex64::i();
    if w.im.abs() < 20.0 {
        return w.sin().ln();
    }
    // sin w = -e^{-iw} (1 - e^{2iw}) / (2i) for Im w > 0, and the mirror image below
    if w.im > 0.0 {
        -i * w + (1.0 - (2.0 * i * w).exp()).ln() - (-2.0 * i).ln()
    } else {
        i * w + (1.0 - (-2.0 * i * w).exp()).ln() - (2.0 * i).ln()
    }
}

/// `log Gamma(z)` on some branch; exponentiate for values.
pub fn ln_gamma(z: Complex64) -> Complex64 {
    if z.re < 0.5 {
        return Complex64::new(PI.ln(), 0.0) - ln_sin_pi(z) - ln_gamma(1.0 - z);
    }
    let z = z - 1.0;
    let mut a = Complex64::new(LANCZOS[0], 0.0);
    for (k, c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (z + k as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + a.ln()
}

pub fn gamma(z: Complex64) -> Complex64 {
    ln_gamma(z).exp()
}

/// `log Gamma_R(s) = log(pi^{-s/2} Gamma(s/2))`.
pub fn ln_gamma_r(s: Complex64) -> Complex64 {
    -s / 2.0 * PI.ln() + ln_gamma(s / 2.0)
}

/// `log Gamma_C(s) = log(2 (2 pi)^{-s} Gamma(s))`.
pub fn ln_gamma_c(s: Complex64) -> Complex64 {
    2f64.ln() - s * (2.0 * PI).ln() + ln_gamma(s)
}

/// One archimedean gamma shift.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum GammaShift {
    /// `Gamma_R(s + mu + delta)`.
    R { mu: Complex64, delta: u8 },
    /// `Gamma_C(s + nu)`.
    C { nu: Complex64 },
}

/// Archimedean parameters with root numbers `eps[r]` for the twists by `sgn^r`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArchRep {
    pub shifts: Vec<GammaShift>,
    pub eps: [Complex64; 2],
}

impl ArchRep {
    pub fn new(shifts: Vec<GammaShift>, eps: [Complex64; 2]) -> Result<Self> {
        let rep = ArchRep { shifts, eps };
        if rep.n() == 0 {
            return Err(Error::InvalidArgument("empty archimedean data".into()));
        }
        if rep.shifts.iter().any(|s| matches!(s, GammaShift::R { delta, .. } if *delta > 1)) {
            return Err(Error::InvalidArgument("parity must be 0 or 1".into()));
        }
        Ok(rep)
    }

    /// Tempered principal series of `GL_2` with shifts `+-i t0`, root numbers 1 and -1.
    pub fn tempered_gl2(t0: f64) -> Self {
        let mu = Complex64::new(0.0, t0);
        ArchRep {
            shifts: vec![GammaShift::R { mu, delta: 0 }, GammaShift::R { mu: -mu, delta: 0 }],
            eps: [Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)],
        }
    }

    /// Holomorphic discrete series of weight `k`.
    pub fn holomorphic(k: u32) -> Self {
        ArchRep {
            shifts: vec![GammaShift::C { nu: Complex64::new((k as f64 - 1.0) / 2.0, 0.0) }],
            eps: [Complex64::new(1.0, 0.0); 2],
        }
    }

    pub fn trivial_gl1() -> Self {
        ArchRep {
            shifts: vec![GammaShift::R { mu: Complex64::new(0.0, 0.0), delta: 0 }],
            eps: [Complex64::new(1.0, 0.0); 2],
        }
    }

    pub fn n(&self) -> usize {
        self.shifts.iter().map(|s| if matches!(s, GammaShift::R { .. }) { 1 } else { 2 }).sum()
    }

    fn ln_l(&self, s: Complex64, r: u8, dual: bool) -> Complex64 {
        self.shifts
            .iter()
            .map(|sh| match *sh {
                GammaShift::R { mu, delta } => {
                    let mu = if dual { -mu } else { mu };
                    ln_gamma_r(s + mu + ((delta + r) % 2) as f64)
                }
                GammaShift::C { nu } => ln_gamma_c(s + nu),
            })
            .sum()
    }

    /// Every pole of `gamma(1-s, sgn^r pi)` has real part below this abscissa.
    pub fn pole_abscissa(&self) -> f64 {
        self.shifts
            .iter()
            .map(|sh| match *sh {
                GammaShift::R { mu, .. } => mu.re,
                GammaShift::C { nu } => -nu.re,
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }

    fn pole_distance(&self, s: Complex64, r: u8) -> f64 {
        self.shifts
            .iter()
            .map(|sh| {
                let z = match *sh {
                    GammaShift::R { mu, delta } => (s + mu + ((delta + r) % 2) as f64) / 2.0,
                    GammaShift::C { nu } => s + nu,
                };
                if z.re > 0.5 {
                    f64::INFINITY
                } else {
                    let k = (-z.re).round().max(0.0);
                    (z + k).norm()
                }
            })
            .fold(f64::INFINITY, f64::min)
    }
}

/// `gamma(s, sgn^r pi) = eps_r L(1-s, dual) / L(s, pi)`.
pub fn gamma_factor_arch(rep: &ArchRep, r: u8, s: Complex64) -> Result<Complex64> {
    if rep.pole_distance(s, r) < 1e-8 || rep.pole_distance(1.0 - s, r) < 1e-8 {
        return Err(Error::InvalidArgument(format!("s = {s} is within 1e-8 of a pole")));
    }
    Ok(rep.eps[(r % 2) as usize] * (rep.ln_l(1.0 - s, r, true) - rep.ln_l(s, r, false)).exp())
}

/// `gamma(1-s, sgn^r pi)` in a form that stays finite for large `|Im s|`.
fn gamma_reflected(rep: &ArchRep, r: u8, s: Complex64) -> Complex64 {
    rep.eps[(r % 2) as usize] * (rep.ln_l(s, r, true) - rep.ln_l(1.0 - s, r, false)).exp()
}

/// A smooth bump on `[a, b]`, flat on the middle `plateau` fraction of its log-support.
///
/// With `u` the affine image of `log x` onto `[-1, 1]`, the profile is 1 for `|u| <= plateau` and
/// `exp(1 - 1/(1 - w^2)^k)` with `w = (|u| - plateau)/(1 - plateau)` outside it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub a: f64,
    pub b: f64,
    pub k: u32,
    pub plateau: f64,
}

impl Bump {
    pub fn new(a: f64, b: f64, k: u32) -> Result<Self> {
        Self::with_plateau(a, b, k, 0.0)
    }

    pub fn with_plateau(a: f64, b: f64, k: u32, plateau: f64) -> Result<Self> {
        if !(a > 0.0 && b > a) {
            return Err(Error::InvalidArgument(format!("support [{a}, {b}] must lie in (0, inf)")));
        }
        if k == 0 || !(0.0..1.0).contains(&plateau) {
            return Err(Error::InvalidArgument("need k >= 1 and plateau in [0, 1)".into()));
        }
        Ok(Bump { a, b, k, plateau })
    }

    fn centre(&self) -> f64 {
        (self.a.ln() + self.b.ln()) / 2.0
    }

    fn half_width(&self) -> f64 {
        (self.b.ln() - self.a.ln()) / 2.0
    }

    fn profile(&self, u: f64) -> f64 {
        let au = u.abs();
        if au >= 1.0 {
            return 0.0;
        }
        if au <= self.plateau {
            return 1.0;
        }
        let w = (au - self.plateau) / (1.0 - self.plateau);
        let d = (1.0 - w * w).powi(self.k as i32);
        if d < 1e-300 {
            return 0.0;
        }
        (1.0 - 1.0 / d).exp()
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        self.profile((x.ln() - self.centre()) / self.half_width())
    }
}

/// Trapezoid nodes `(log x, weight * phi(x))` in logarithmic coordinates.
#[derive(Clone, Debug)]
pub struct MellinNodes {
    tau: Vec<f64>,
    w: Vec<f64>,
}

impl MellinNodes {
    pub fn new(phi: &Bump, nodes: usize) -> Self {
        let (c, h) = (phi.centre(), phi.half_width());
        let step = 2.0 / nodes as f64;
        let mut tau = Vec::with_capacity(nodes);
        let mut w = Vec::with_capacity(nodes);
        for j in 1..nodes {
            let u = -1.0 + j as f64 * step;
            let f = phi.profile(u);
            if f > 0.0 {
                tau.push(c + h * u);
                w.push(f * h * step);
            }
        }
        MellinNodes { tau, w }
    }

    /// `m(phi, w) = int phi(x) x^{w-1} dx = int phi(e^tau) e^{w tau} dtau`.
    pub fn eval(&self, w: Complex64) -> Complex64 {
        self.tau.iter().zip(&self.w).map(|(&t, &f)| f * (w * t).exp()).sum()
    }

    /// `m(phi, w0 + j dw)` for `j = 0..count`, by rotation with periodic reseeding.
    pub fn eval_line(&self, w0: Complex64, dw: Complex64, count: usize) -> Vec<Complex64> {
        const RESEED: usize = 256;
        let mut out = vec![Complex64::new(0.0, 0.0); count];
        for (&t, &f) in self.tau.iter().zip(&self.w) {
            let rot = (dw * t).exp();
            for (c, chunk) in out.chunks_mut(RESEED).enumerate() {
                let mut z = f * ((w0 + dw * (c * RESEED) as f64) * t).exp();
                for o in chunk {
                    *o += z;
                    z *= rot;
                }
            }
        }
        out
    }
}

/// Node count that resolves `e^{i t tau}` for `|t| <= height` across the support.
pub fn default_nodes(phi: &Bump, height: f64) -> usize {
    let span = 2.0 * phi.half_width();
    ((span * height / 0.35) as usize).max(2048).next_power_of_two()
}

/// `m(phi, s) = int_0^inf phi(y) y^{s-1} dy`.
pub fn mellin_real(phi: &Bump, s: Complex64) -> Complex64 {
    MellinNodes::new(phi, default_nodes(phi, s.im.abs().max(50.0))).eval(s)
}

/// Contour parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Contour {
    pub sigma: f64,
    pub height: f64,
    pub step: f64,
}

impl Contour {
    /// `sigma = max(3/4, pole abscissa + 1/2)`; the integrand grows like `|t|^{n(sigma - 1/2)}`.
    pub fn default_for(rep: &ArchRep, height: f64) -> Self {
        Contour { sigma: (rep.pole_abscissa() + 0.5).max(0.75), height, step: 0.02 }
    }
}

/// Precomputed `gamma(1-s, sgn^r pi) m(phi, 1-s-(n-1)/2)` on the contour for both parities.
#[derive(Clone, Debug)]
pub struct ArchKernel {
    n: usize,
    contour: Contour,
    ts: Vec<f64>,
    vals: [Vec<Complex64>; 2],
    /// Largest integrand modulus at the two ends of the contour.
    pub edge: f64,
    /// Largest integrand modulus.
    pub peak: f64,
}

impl ArchKernel {
    pub fn new(rep: &ArchRep, phi: &Bump, contour: Contour) -> Result<Self> {
        if contour.height <= 0.0 || contour.step <= 0.0 {
            return Err(Error::InvalidArgument("contour height and step must be positive".into()));
        }
        if contour.sigma <= rep.pole_abscissa() {
            return Err(Error::InvalidArgument(format!(
                "abscissa {} is not right of the poles at real part {}",
                contour.sigma,
                rep.pole_abscissa()
            )));
        }
        let n = rep.n();
        let nodes = MellinNodes::new(phi, default_nodes(phi, contour.height));
        let m = (contour.height / contour.step).ceil() as i64;
        let ts: Vec<f64> = (-m..=m).map(|j| j as f64 * contour.step).collect();
        let shift = 1.0 - (n as f64 - 1.0) / 2.0;
        let mels = nodes.eval_line(
            Complex64::new(shift - contour.sigma, m as f64 * contour.step),
            Complex64::new(0.0, -contour.step),
            ts.len(),
        );
        let mut v0 = Vec::with_capacity(ts.len());
        let mut v1 = Vec::with_capacity(ts.len());
        for (&t, &mel) in ts.iter().zip(&mels) {
            let s = Complex64::new(contour.sigma, t);
            v0.push(gamma_reflected(rep, 0, s) * mel);
            v1.push(gamma_reflected(rep, 1, s) * mel);
        }
        let peak = v0.iter().chain(&v1).map(|z| z.norm()).fold(0.0, f64::max);
        let edge = [v0[0], v0[v0.len() - 1], v1[0], v1[v1.len() - 1]].iter().map(|z| z.norm()).fold(0.0, f64::max);
        Ok(ArchKernel { n, contour, ts, vals: [v0, v1], edge, peak })
    }

    /// `B(y)` with an error estimate from halving the step and the contour ends.
    pub fn eval(&self, y: f64) -> Result<(Complex64, f64)> {
        if y == 0.0 {
            return Err(Error::InvalidArgument("y must be nonzero".into()));
        }
        let ly = y.abs().ln();
        let sg = y.signum();
        let half = (self.n as f64 - 1.0) / 2.0;
        let base = (half - self.contour.sigma) * ly;
        let mut full = Complex64::new(0.0, 0.0);
        let mut coarse = Complex64::new(0.0, 0.0);
        let last = self.ts.len() - 1;
        let r1 = if self.n.is_multiple_of(2) { -sg } else { sg };
        let rot = Complex64::from_polar(1.0, -self.contour.step * ly);
        let mut z = Complex64::new(0.0, 0.0);
        for (j, &t) in self.ts.iter().enumerate() {
            // y^{-i t} by rotation, reseeded every 256 nodes
            z = if j % 256 == 0 { Complex64::from_polar(1.0, -t * ly) } else { z * rot };
            let g = self.vals[0][j] + r1 * self.vals[1][j];
            let term = g * z;
            let w = if j == 0 || j == last { 0.5 } else { 1.0 };
            full += w * term;
            if j % 2 == 0 {
                let wc = if j == 0 || j == last - last % 2 { 0.5 } else { 1.0 };
                coarse += wc * term;
            }
        }
        let h = self.contour.step;
        let scale = 1.0 / (4.0 * PI);
        let value = full * h * scale * base.exp();
        let coarse = coarse * 2.0 * h * scale * base.exp();
        let tail = self.edge * base.exp() * scale;
        Ok((value, (value - coarse).norm() + tail))
    }
}

/// `B(y)` for a single `y`.
pub fn bessel_transform_real(rep: &ArchRep, phi: &Bump, y: f64, contour: Contour) -> Result<(Complex64, f64)> {
    ArchKernel::new(rep, phi, contour)?.eval(y)
}

/// Smallest height in `start, 2 start, ...` (at most six doublings) beyond which the integrand
/// stays below `rel_tol` of its peak, judged on a coarse sample of the contour.
pub fn adaptive_height(rep: &ArchRep, phi: &Bump, start: f64, rel_tol: f64) -> Result<f64> {
    const DOUBLINGS: i32 = 6;
    const COARSE: f64 = 1.0;
    let top = start * 2f64.powi(DOUBLINGS);
    let sigma = Contour::default_for(rep, top).sigma;
    let n = rep.n();
    let shift = 1.0 - (n as f64 - 1.0) / 2.0;
    let nodes = MellinNodes::new(phi, default_nodes(phi, top));
    let count = (top / COARSE).ceil() as usize + 1;
    let mut prof = vec![0.0f64; count];
    for sign in [1.0, -1.0] {
        let mels = nodes.eval_line(Complex64::new(shift - sigma, 0.0), Complex64::new(0.0, -sign * COARSE), count);
        for (j, mel) in mels.into_iter().enumerate() {
            let s = Complex64::new(sigma, sign * j as f64 * COARSE);
            let g = gamma_reflected(rep, 0, s).norm().max(gamma_reflected(rep, 1, s).norm());
            prof[j] = prof[j].max(g * mel.norm());
        }
    }
    // suffix maxima
    let peak = prof.iter().cloned().fold(0.0, f64::max);
    for j in (0..count - 1).rev() {
        prof[j] = prof[j].max(prof[j + 1]);
    }
    let mut h = start;
    while h <= top {
        let j = (h / COARSE).round() as usize;
        if prof[j.min(count - 1)] <= rel_tol * peak {
            return Ok(h);
        }
        h *= 2.0;
    }
    Err(Error::NotConverged(format!("integrand still above tolerance at height {top}; increase the bump smoothness")))
}

/// Outcome of [`decay_check`].
#[derive(Clone, Debug, Serialize)]
pub struct DecayReport {
    pub exponent: f64,
    pub height: f64,
    pub values: Vec<(f64, f64)>,
    pub doubling_change: f64,
}

/// Least-squares decay exponent of `max |B(+-y)|` on `ys`, with the change under doubling the height.
pub fn decay_check(rep: &ArchRep, phi: &Bump, ys: &[f64]) -> Result<DecayReport> {
    if ys.len() < 2 || ys.iter().any(|&y| y <= 0.0) {
        return Err(Error::InvalidArgument("need at least two positive y".into()));
    }
    let height = adaptive_height(rep, phi, 50.0, 1e-12)?;
    let k1 = ArchKernel::new(rep, phi, Contour::default_for(rep, height))?;
    let k2 = ArchKernel::new(rep, phi, Contour::default_for(rep, 2.0 * height))?;
    let mut values = Vec::with_capacity(ys.len());
    let mut change: f64 = 0.0;
    for &y in ys {
        let mut size: f64 = 0.0;
        for yy in [y, -y] {
            let (b1, _) = k1.eval(yy)?;
            let (b2, _) = k2.eval(yy)?;
            change = change.max((b1 - b2).norm());
            size = size.max(b1.norm().max(b2.norm()));
        }
        values.push((y, size));
    }
    let xs: Vec<f64> = values.iter().map(|v| v.0.ln()).collect();
    let ls: Vec<f64> = values.iter().map(|v| v.1.max(1e-300).ln()).collect();
    let mx = xs.iter().sum::<f64>() / xs.len() as f64;
    let ml = ls.iter().sum::<f64>() / ls.len() as f64;
    let num: f64 = xs.iter().zip(&ls).map(|(x, l)| (x - mx) * (l - ml)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    Ok(DecayReport { exponent: -num / den, height, values, doubling_change: change })
}

/// `J_nu(x)` for integer order by the periodic trapezoid rule on Bessel's integral.
pub fn bessel_j(nu: i32, x: f64) -> f64 {
    let m = (x.abs() + nu.unsigned_abs() as f64 + 64.0) as usize * 2;
    let h = 2.0 * PI / m as f64;
    (0..m).map(|j| (nu as f64 * j as f64 * h - x * (j as f64 * h).sin()).cos()).sum::<f64>() / m as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn gamma_identities() {
        assert!((gamma(c(5.0, 0.0)) - c(24.0, 0.0)).norm() < 1e-11);
        assert!((gamma(c(0.5, 0.0)) - c(PI.sqrt(), 0.0)).norm() < 1e-13);
        for k in 0..100 {
            let z = c(-3.0 + 0.13 * k as f64, -40.0 + 0.9 * k as f64);
            // reflection
            let lhs = ln_gamma(z) + ln_gamma(1.0 - z);
            let rhs = c(PI.ln(), 0.0) - ln_sin_pi(z);
            assert!(((lhs - rhs).exp() - 1.0).norm() < 1e-12, "{z}");
            // duplication
            let lhs = ln_gamma(z) + ln_gamma(z + 0.5);
            let rhs = (1.0 - 2.0 * z) * 2f64.ln() + 0.5 * PI.ln() + ln_gamma(2.0 * z);
            assert!(((lhs - rhs).exp() - 1.0).norm() < 1e-12, "{z}");
        }
    }

    #[test]
    fn gamma_factor_examples() {
        let t = ArchRep::trivial_gl1();
        assert!((gamma_factor_arch(&t, 0, c(0.5, 0.0)).unwrap() - 1.0).norm() < 1e-14);
        let rep = ArchRep::tempered_gl2(3.1);
        for k in -20..=20 {
            let g = gamma_factor_arch(&rep, 0, c(0.5, 2.5 * k as f64)).unwrap();
            assert!((g.norm() - 1.0).abs() < 1e-10);
        }
        let d = ArchRep::holomorphic(12);
        let s = c(0.3, 4.0);
        let direct = (ln_gamma_c(1.0 - s + 5.5) - ln_gamma_c(s + 5.5)).exp();
        assert!((gamma_factor_arch(&d, 0, s).unwrap() - direct).norm() < 1e-12);
        assert!(gamma_factor_arch(&t, 0, c(0.0, 0.0)).is_err());
    }

    #[test]
    fn mellin_quadratures_agree() {
        let phi = Bump::with_plateau(1.0, 2.0, 2, 0.6).unwrap();
        let m = mellin_real(&phi, c(1.0, 0.0));
        // composite Simpson in x
        let n = 200_000;
        let h = (phi.b - phi.a) / n as f64;
        let mut s = phi.eval(phi.a) + phi.eval(phi.b);
        for j in 1..n {
            s += phi.eval(phi.a + j as f64 * h) * if j % 2 == 1 { 4.0 } else { 2.0 };
        }
        let simpson = s * h / 3.0;
        assert!((m.re - simpson).abs() < 1e-8 && m.im.abs() < 1e-14);
        assert!(m.re < 1.0 && m.re > 0.5);
    }

    #[test]
    fn mellin_decays_fast() {
        let phi = Bump::new(1.0, 64.0, 3).unwrap();
        let a = mellin_real(&phi, c(0.5, 50.0)).norm();
        let b = mellin_real(&phi, c(0.5, 100.0)).norm();
        assert!(b / a < 2f64.powi(-6), "{a} {b}");
    }

    #[test]
    fn zero_height_rejected_and_linearity() {
        let rep = ArchRep::tempered_gl2(1.0);
        let phi = Bump::new(1.0, 4.0, 2).unwrap();
        assert!(
            bessel_transform_real(&rep, &phi, 1.0, Contour { height: 0.0, ..Contour::default_for(&rep, 1.0) }).is_err()
        );
        let m1 = mellin_real(&phi, c(0.2, 7.0));
        let nodes = MellinNodes::new(&phi, default_nodes(&phi, 50.0));
        let doubled = MellinNodes { tau: nodes.tau.clone(), w: nodes.w.iter().map(|w| 2.0 * w).collect() };
        assert!((doubled.eval(c(0.2, 7.0)) - 2.0 * m1).norm() < 1e-12);
    }

    #[test]
    fn bessel_j_values() {
        assert!((bessel_j(0, 1.0) - 0.765_197_686_557_966_6).abs() < 1e-14);
        assert!((bessel_j(11, 20.0) - 0.061_356_303_375_950_81).abs() < 1e-12);
    }

    #[test]
    fn holomorphic_weight_twelve_matches_j_bessel() {
        let rep = ArchRep::holomorphic(12);
        let phi = Bump::new(1.0, 2.0, 2).unwrap();
        let k = ArchKernel::new(&rep, &phi, Contour::default_for(&rep, 400.0)).unwrap();
        for y in [0.5, 1.0, 2.0] {
            let (b, _) = k.eval(-y).unwrap();
            // 2 pi sqrt(y) int phi(x) x^{-1/2} J_11(4 pi sqrt(x y)) dx
            let n = 4000;
            let h = (phi.b - phi.a) / n as f64;
            let j: f64 = (1..n)
                .map(|i| {
                    let x = phi.a + i as f64 * h;
                    phi.eval(x) * x.powf(-0.5) * bessel_j(11, 4.0 * PI * (x * y).sqrt())
                })
                .sum::<f64>()
                * h;
            let j = 2.0 * PI * y.sqrt() * j;
            assert!((b - j).norm() < 1e-8, "y={y}: {b} vs {j}");
            let (pos, _) = k.eval(y).unwrap();
            assert!(pos.norm() < 1e-12);
        }
    }

    #[test]
    fn contour_shift_invariance() {
        let rep = ArchRep::tempered_gl2(2.0);
        let phi = Bump::with_plateau(1.0, 2.0, 2, 0.5).unwrap();
        let (a, _) =
            bessel_transform_real(&rep, &phi, 1.0, Contour { sigma: 0.75, height: 400.0, step: 0.02 }).unwrap();
        let (b, _) =
            bessel_transform_real(&rep, &phi, 1.0, Contour { sigma: 1.25, height: 800.0, step: 0.02 }).unwrap();
        assert!((a - b).norm() < 1e-6, "{a} {b}");
    }
}
