//! p-adic numbers with rational unit parts, locally constant shell functions on `Q_p^x`,
//! multiplicative characters, Gauss sums and the Mellin transform.
//!
//! Conventions: `psi_p(x) = e({x}_p)`, the Haar measure `d^x y` gives `Z_p^x` mass one, and a
//! multiplicative character is normalised by `chi(p) = 1`.

use std::collections::HashMap;
use std::hash::{Hash, Hasher};

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::arith::{self, e_ratio, gcd, mod_inv, units_mod, DirichletCharacter};
use crate::error::{Error, Result};
use crate::series::Laurent;

/// A nonzero element `p^val * num/den` of `Q_p` with `num`, `den` prime to `p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Qp {
    pub p: u64,
    pub val: i32,
    pub num: i64,
    pub den: i64,
}

impl Qp {
    pub fn new(p: u64, val: i32, num: i64, den: i64) -> Result<Self> {
        if num == 0 || den == 0 || num % p as i64 == 0 || den % p as i64 == 0 {
            return Err(Error::InvalidArgument(format!("{num}/{den} is not a {p}-adic unit")));
        }
        let g = gcd(num, den);
        let s = if den < 0 { -1 } else { 1 };
        Ok(Qp { p, val, num: s * num / g, den: s * den / g })
    }

    /// `p^val` times the unit `u`.
    pub fn from_unit(p: u64, val: i32, u: i64) -> Result<Self> {
        Self::new(p, val, u, 1)
    }

    /// The rational `n/d` viewed in `Q_p`; `None` for zero.
    pub fn from_ratio(p: u64, n: i128, d: i128) -> Result<Option<Self>> {
        if d == 0 {
            return Err(Error::InvalidArgument("zero denominator".into()));
        }
        if n == 0 {
            return Ok(None);
        }
        let (mut n, mut d, mut v) = (n, d, 0i32);
        while n % p as i128 == 0 {
            n /= p as i128;
            v += 1;
        }
        while d % p as i128 == 0 {
            d /= p as i128;
            v -= 1;
        }
        let g = gcd_i128(n, d);
        let (n, d) = (n / g, d / g);
        let pk = (p as i128).pow(12).max(1);
        // only the unit class matters downstream; keep it within i64
        let (n, d) = if n.abs() > i64::MAX as i128 || d.abs() > i64::MAX as i128 {
            let r = n.rem_euclid(pk) * inv_i128(d.rem_euclid(pk), pk) % pk;
            (r, 1)
        } else {
            (n, d)
        };
        Ok(Some(Self::new(p, v, n as i64, d as i64)?))
    }

    pub fn one(p: u64) -> Self {
        Qp { p, val: 0, num: 1, den: 1 }
    }

    /// The unit part reduced mod `p^k`.
    pub fn unit_residue(&self, k: u32) -> u64 {
        let pk = self.p.pow(k) as i64;
        if pk == 1 {
            return 0;
        }
        let n = self.num.rem_euclid(pk) as i128;
        let d = mod_inv(self.den, pk).unwrap() as i128;
        (n * d % pk as i128) as u64
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.p, other.p);
        let n = self.num as i128 * other.num as i128;
        let d = self.den as i128 * other.den as i128;
        let mut out = Qp::from_ratio(self.p, n, d).unwrap().unwrap();
        out.val = self.val + other.val;
        out
    }

    pub fn inv(&self) -> Self {
        Qp::new(self.p, -self.val, self.den, self.num).unwrap()
    }

    pub fn neg(&self) -> Self {
        Qp { num: -self.num, ..*self }
    }

    pub fn abs(&self) -> f64 {
        (self.p as f64).powi(-self.val)
    }
}

fn gcd_i128(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn inv_i128(a: i128, m: i128) -> i128 {
    let (mut r0, mut r1, mut s0, mut s1) = (a, m, 1i128, 0i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
    }
    s0.rem_euclid(m)
}

/// `psi_p(n/d) = e({n/d}_p)`.
pub fn psi_p(n: i128, d: i128, p: u64) -> Complex64 {
    match Qp::from_ratio(p, n, d).expect("zero denominator") {
        None => Complex64::new(1.0, 0.0),
        Some(x) => psi_qp(&x),
    }
}

pub fn psi_qp(x: &Qp) -> Complex64 {
    if x.val >= 0 {
        return Complex64::new(1.0, 0.0);
    }
    let k = (-x.val) as u32;
    e_ratio(x.unit_residue(k) as i128, x.p.pow(k) as u128)
}

/// `psi_p(a * p^v * w)` for an integer unit `w` known modulo at least `p^{-(v(a)+v)}`.
pub fn psi_scaled(a: &Qp, v: i32, w: u64) -> Complex64 {
    let val = a.val + v;
    if val >= 0 {
        return Complex64::new(1.0, 0.0);
    }
    let k = (-val) as u32;
    let pk = a.p.pow(k);
    let r = (a.unit_residue(k) as u128 * (w % pk) as u128) % pk as u128;
    e_ratio(r as i128, pk as u128)
}

/// A character of `Z_p^x` of finite conductor, extended by `chi(p) = 1`.
#[derive(Clone, Debug)]
pub struct PadicCharacter {
    p: u64,
    chi: DirichletCharacter,
    prim: DirichletCharacter,
    cond_exp: u32,
}

impl PartialEq for PadicCharacter {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.prim == other.prim
    }
}

impl Eq for PadicCharacter {}

impl Hash for PadicCharacter {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.p.hash(state);
        self.prim.hash(state);
    }
}

impl std::fmt::Display for PadicCharacter {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}-adic character of conductor p^{} ({})", self.p, self.cond_exp, self.prim)
    }
}

fn p_power_exp(p: u64, m: u64) -> Option<u32> {
    let mut k = 0;
    let mut x = m;
    while x.is_multiple_of(p) {
        x /= p;
        k += 1;
    }
    (x == 1).then_some(k)
}

impl PadicCharacter {
    /// From a Dirichlet character modulo a power of `p`.
    pub fn from_dirichlet(p: u64, chi: DirichletCharacter) -> Result<Self> {
        p_power_exp(p, chi.modulus())
            .ok_or_else(|| Error::InvalidArgument(format!("modulus {} is not a power of {p}", chi.modulus())))?;
        let prim = chi.primitive();
        let cond_exp = p_power_exp(p, prim.modulus()).unwrap();
        Ok(PadicCharacter { p, chi, prim, cond_exp })
    }

    pub fn trivial(p: u64) -> Self {
        Self::from_dirichlet(p, DirichletCharacter::trivial(1)).unwrap()
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    /// Conductor exponent `a(chi)`.
    pub fn conductor_exp(&self) -> u32 {
        self.cond_exp
    }

    pub fn is_trivial(&self) -> bool {
        self.cond_exp == 0
    }

    /// Realisation as a Dirichlet character mod `p^{a(chi)}`.
    pub fn primitive(&self) -> &DirichletCharacter {
        &self.prim
    }

    /// Realisation as a Dirichlet character mod `p^k`, `k >= a(chi)`.
    pub fn at_level(&self, k: u32) -> DirichletCharacter {
        self.prim.lift_to(self.p.pow(k)).unwrap()
    }

    /// Value at an integer unit.
    pub fn value(&self, u: u64) -> Complex64 {
        self.prim.value((u % self.prim.modulus().max(1)) as i64)
    }

    /// `chi(x) = chi(unit part of x)`.
    pub fn value_qp(&self, x: &Qp) -> Complex64 {
        self.value(x.unit_residue(self.cond_exp))
    }

    pub fn inverse(&self) -> Self {
        Self::from_dirichlet(self.p, self.prim.conj()).unwrap()
    }

    pub fn mul(&self, other: &Self) -> Self {
        let k = self.cond_exp.max(other.cond_exp);
        let c = self.at_level(k).mul(&other.at_level(k));
        Self::from_dirichlet(self.p, c).unwrap()
    }

    /// `chi(-1)` as `+1` or `-1`.
    pub fn parity(&self) -> i64 {
        self.prim.parity()
    }

    pub fn dirichlet(&self) -> &DirichletCharacter {
        &self.chi
    }
}

/// All characters of conductor exponent at most `k`.
pub fn enumerate_padic_characters(p: u64, k: u32) -> Vec<PadicCharacter> {
    arith::enumerate_characters(p.pow(k)).into_iter().map(|c| PadicCharacter::from_dirichlet(p, c).unwrap()).collect()
}

/// `epsilon(1/2, chi)` for the standard character; `eps(1/2, chi^{-1}) = tau_p(chi) / p^{a/2}`.
pub fn epsilon_half(chi: &PadicCharacter) -> Complex64 {
    arith::epsilon_half_inverse(chi.inverse().primitive())
}

/// `epsilon(1/2, chi^{-1})`.
pub fn epsilon_half_inverse(chi: &PadicCharacter) -> Complex64 {
    arith::epsilon_half_inverse(chi.primitive())
}

/// `(1 - p^{-1})^{-1}`.
pub fn zeta_one(p: u64) -> f64 {
    1.0 / (1.0 - 1.0 / p as f64)
}

/// The Gauss sum `int_{Z_p^x} psi_p(a y) chi(y) d^x y` as an exact finite average.
pub fn gauss_sum_padic(a: &Qp, chi: &PadicCharacter) -> Complex64 {
    let level = chi.cond_exp.max((-a.val).max(0) as u32);
    let pk = a.p.pow(level);
    let us = units_mod(pk);
    let s: Complex64 = us.iter().map(|&y| psi_scaled(a, 0, y) * chi.value(y)).sum();
    s / us.len() as f64
}

/// The same Gauss sum from its closed form.
pub fn gauss_sum_closed_form(a: &Qp, chi: &PadicCharacter) -> Complex64 {
    let p = a.p as f64;
    if chi.is_trivial() {
        return match a.val {
            v if v >= 0 => 1.0.into(),
            -1 => (1.0 / (1.0 - p)).into(),
            _ => 0.0.into(),
        };
    }
    if a.val != -(chi.cond_exp as i32) {
        return 0.0.into();
    }
    zeta_one(a.p) * p.powf(a.val as f64 / 2.0) * chi.value_qp(a).conj() * epsilon_half_inverse(chi)
}

/// The progression variant `int_{1 + p^k Z_p} psi_p(a y) chi(y) d^x y`.
pub fn gauss_sum_progression(a: &Qp, chi: &PadicCharacter, k: u32) -> Complex64 {
    assert!(k >= 1, "progression level must be positive");
    let level = k.max(chi.cond_exp).max((-a.val).max(0) as u32);
    let pl = a.p.pow(level);
    let pk = a.p.pow(k);
    let phi = pl / a.p * (a.p - 1);
    let s: Complex64 = (0..pl / pk).map(|t| 1 + t * pk).map(|y| psi_scaled(a, 0, y) * chi.value(y)).sum();
    s / phi as f64
}

/// `Vol(1 + p^k Z_p)` under the unit-mass normalisation.
pub fn progression_volume(p: u64, k: u32) -> f64 {
    if k == 0 {
        1.0
    } else {
        1.0 / (p.pow(k - 1) * (p - 1)) as f64
    }
}

/// A function on `Q_p^x` supported on shells `v_min..=v_max`, constant on classes of `1 + p^level Z_p`.
#[derive(Clone, Debug, PartialEq)]
pub struct PadicShellFunction {
    pub p: u64,
    pub level: u32,
    pub v_min: i32,
    /// `shells[i][r]` is the value at `r p^(v_min + i)` for units `r mod p^level`; non-unit slots are zero.
    pub shells: Vec<Vec<Complex64>>,
}

#[derive(Serialize, Deserialize)]
struct ShellJson {
    v: i32,
    units: Vec<[f64; 2]>,
}

#[derive(Serialize, Deserialize)]
struct ShellFunctionJson {
    p: u64,
    level: u32,
    shells: Vec<ShellJson>,
}

impl PadicShellFunction {
    pub fn zero(p: u64) -> Self {
        PadicShellFunction { p, level: 0, v_min: 0, shells: Vec::new() }
    }

    pub fn modulus(&self) -> u64 {
        self.p.pow(self.level)
    }

    pub fn from_fn(p: u64, level: u32, v_min: i32, v_max: i32, mut f: impl FnMut(i32, u64) -> Complex64) -> Self {
        let pk = p.pow(level);
        let shells = (v_min..=v_max)
            .map(|v| {
                let mut row = vec![Complex64::new(0.0, 0.0); pk as usize];
                for u in units_mod(pk) {
                    row[u as usize] = f(v, u);
                }
                row
            })
            .collect();
        PadicShellFunction { p, level, v_min, shells }
    }

    /// Indicator of `p^v Z_p^x`.
    pub fn indicator_shell(p: u64, v: i32) -> Self {
        Self::from_fn(p, 0, v, v, |_, _| 1.0.into())
    }

    /// Indicator of `1 + p^k Z_p`.
    pub fn indicator_progression(p: u64, k: u32) -> Self {
        Self::from_fn(p, k, 0, 0, |_, u| if u == 1 % p.pow(k).max(2) { 1.0.into() } else { 0.0.into() })
    }

    /// Random values in the unit square on every unit class of every shell.
    pub fn random<R: Rng>(p: u64, level: u32, v_min: i32, v_max: i32, rng: &mut R) -> Self {
        Self::from_fn(p, level, v_min, v_max, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
    }

    pub fn v_max(&self) -> i32 {
        self.v_min + self.shells.len() as i32 - 1
    }

    pub fn is_zero(&self) -> bool {
        self.shells.iter().flatten().all(|z| z.norm() == 0.0)
    }

    /// `Phi(u p^v)` for an integer unit `u`.
    pub fn eval(&self, v: i32, u: u64) -> Complex64 {
        if v < self.v_min || v > self.v_max() {
            return 0.0.into();
        }
        self.shells[(v - self.v_min) as usize][(u % self.modulus()) as usize]
    }

    pub fn eval_qp(&self, x: &Qp) -> Complex64 {
        self.eval(x.val, x.unit_residue(self.level))
    }

    /// The same function stored at a finer level.
    pub fn lift(&self, level: u32) -> Self {
        assert!(level >= self.level, "cannot lower the level");
        if self.shells.is_empty() {
            return PadicShellFunction { level, ..self.clone() };
        }
        Self::from_fn(self.p, level, self.v_min, self.v_max(), |v, u| self.eval(v, u))
    }

    /// Smallest level at which the function is still exactly representable.
    pub fn minimal_level(&self, tol: f64) -> u32 {
        let us = units_mod(self.modulus());
        (0..self.level)
            .find(|&k| {
                let m = self.p.pow(k);
                self.shells.iter().all(|row| {
                    let mut first: HashMap<u64, Complex64> = HashMap::new();
                    us.iter().all(|&u| {
                        let z = row[u as usize];
                        (*first.entry(u % m).or_insert(z) - z).norm() <= tol
                    })
                })
            })
            .unwrap_or(self.level)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.p, other.p);
        let level = self.level.max(other.level);
        let pk = self.p.pow(level);
        let lo = self.v_min.min(other.v_min);
        let hi = self.v_max().max(other.v_max());
        let mut m: f64 = 0.0;
        for v in lo..=hi {
            for u in units_mod(pk) {
                m = m.max((self.eval(v, u) - other.eval(v, u)).norm());
            }
        }
        m
    }

    /// Pointwise product with `y -> psi_p(zeta y)`, stored at a level fine enough to be exact.
    pub fn twist_additive(&self, zeta: Option<&Qp>) -> Self {
        let Some(z) = zeta else { return self.clone() };
        if self.shells.is_empty() {
            return self.clone();
        }
        let need = (self.v_min..=self.v_max()).map(|v| (-(z.val + v)).max(0) as u32).max().unwrap_or(0);
        let level = self.level.max(need);
        Self::from_fn(self.p, level, self.v_min, self.v_max(), |v, u| self.eval(v, u) * psi_scaled(z, v, u))
    }

    pub fn to_json(&self) -> serde_json::Value {
        let shells = (self.v_min..=self.v_max())
            .map(|v| ShellJson {
                v,
                units: units_mod(self.modulus())
                    .iter()
                    .map(|&u| {
                        let z = self.eval(v, u);
                        [z.re, z.im]
                    })
                    .collect(),
            })
            .collect();
        serde_json::to_value(ShellFunctionJson { p: self.p, level: self.level, shells }).unwrap()
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self> {
        let raw: ShellFunctionJson = serde_json::from_value(value.clone()).map_err(|e| Error::Parse(e.to_string()))?;
        if !arith::is_prime(raw.p) {
            return Err(Error::Parse(format!("{} is not prime", raw.p)));
        }
        if raw.shells.is_empty() {
            return Ok(PadicShellFunction { level: raw.level, ..Self::zero(raw.p) });
        }
        let us = units_mod(raw.p.pow(raw.level));
        let mut table: HashMap<i32, Vec<[f64; 2]>> = HashMap::new();
        for s in raw.shells {
            if s.units.len() != us.len() {
                return Err(Error::Parse(format!(
                    "shell {} lists {} values, expected {}",
                    s.v,
                    s.units.len(),
                    us.len()
                )));
            }
            if table.insert(s.v, s.units).is_some() {
                return Err(Error::Parse(format!("shell {} listed twice", s.v)));
            }
        }
        let lo = *table.keys().min().unwrap();
        let hi = *table.keys().max().unwrap();
        let index: HashMap<u64, usize> = us.iter().enumerate().map(|(i, &u)| (u, i)).collect();
        Ok(Self::from_fn(raw.p, raw.level, lo, hi, |v, u| match table.get(&v) {
            Some(row) => {
                let [re, im] = row[index[&u]];
                Complex64::new(re, im)
            }
            None => 0.0.into(),
        }))
    }
}

/// Mellin transform of a shell function: one Laurent series in `Z` per character of conductor
/// exponent at most the level, `[Z^m] S(chi) = avg_u Phi(u p^{-m}) chi(u)`.
#[derive(Clone, Debug)]
pub struct MellinSpectrum {
    pub p: u64,
    pub level: u32,
    pub chars: Vec<PadicCharacter>,
    pub series: Vec<Laurent>,
}

impl MellinSpectrum {
    pub fn get(&self, chi: &PadicCharacter) -> Option<&Laurent> {
        self.chars.iter().position(|c| c == chi).map(|i| &self.series[i])
    }

    pub fn coefficient(&self, chi: &PadicCharacter, m: i32) -> Complex64 {
        self.get(chi).map(|s| s.coeff(m)).unwrap_or_default()
    }
}

pub fn mellin_padic(phi: &PadicShellFunction) -> MellinSpectrum {
    let chars = enumerate_padic_characters(phi.p, phi.level);
    let us = units_mod(phi.modulus());
    let n = us.len() as f64;
    let series = chars
        .iter()
        .map(|chi| {
            if phi.shells.is_empty() {
                return Laurent::zero();
            }
            let vals: Vec<Complex64> = us.iter().map(|&u| chi.value(u)).collect();
            let lo = -phi.v_max();
            let c = (0..phi.shells.len())
                .rev()
                .map(|i| {
                    let row = &phi.shells[i];
                    us.iter().zip(&vals).map(|(&u, x)| row[u as usize] * x).sum::<Complex64>() / n
                })
                .collect();
            Laurent::new(lo, c)
        })
        .collect();
    MellinSpectrum { p: phi.p, level: phi.level, chars, series }
}

/// `Phi(u p^v) = sum_chi chi(u)^{-1} [Z^{-v}] S(chi)`.
pub fn mellin_inverse_padic(s: &MellinSpectrum) -> PadicShellFunction {
    let nonzero: Vec<usize> = (0..s.series.len()).filter(|&i| !s.series[i].c.is_empty()).collect();
    if nonzero.is_empty() {
        return PadicShellFunction { level: s.level, ..PadicShellFunction::zero(s.p) };
    }
    let lo = nonzero.iter().map(|&i| s.series[i].lo).min().unwrap();
    let hi = nonzero.iter().map(|&i| s.series[i].hi()).max().unwrap();
    let level = s.chars.iter().map(|c| c.conductor_exp()).max().unwrap_or(0).max(s.level);
    PadicShellFunction::from_fn(s.p, level, -hi, -lo, |v, u| {
        nonzero.iter().map(|&i| s.chars[i].value(u).conj() * s.series[i].coeff(-v)).sum()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn additive_character() {
        assert!(close(psi_p(7, 1, 5), 1.0.into(), 1e-15));
        assert!(close(psi_p(1, 5, 5), arith::e(0.2), 1e-15));
        assert!(close(psi_p(1, 5, 3), 1.0.into(), 1e-15));
        // product formula against psi_inf(x) = e(-x)
        for (n, d) in [(7i128, 60i128), (-13, 84), (1, 1024), (22, 45)] {
            let mut prod = arith::e(-(n as f64) / d as f64);
            for (p, _) in arith::factorize(d.unsigned_abs() as u64) {
                prod *= psi_p(n, d, p);
            }
            assert!(close(prod, 1.0.into(), 1e-12));
        }
    }

    #[test]
    fn character_counts() {
        assert_eq!(enumerate_padic_characters(7, 0).len(), 1);
        let c = enumerate_padic_characters(5, 1);
        assert_eq!(c.len(), 4);
        assert_eq!(c.iter().filter(|x| x.conductor_exp() == 1).count(), 3);
        assert_eq!(enumerate_padic_characters(2, 3).len(), 4);
    }

    #[test]
    fn gauss_lemma_examples() {
        let triv = PadicCharacter::trivial(5);
        let g = |v| gauss_sum_padic(&Qp::from_unit(5, v, 2).unwrap(), &triv);
        assert!(close(g(0), 1.0.into(), 1e-14));
        assert!(close(g(-1), (-0.25).into(), 1e-14));
        assert!(close(g(-2), 0.0.into(), 1e-14));
        let chi = enumerate_padic_characters(5, 1).into_iter().find(|c| !c.is_trivial()).unwrap();
        assert!(gauss_sum_padic(&Qp::from_unit(5, -2, 3).unwrap(), &chi).norm() < 1e-14);
    }

    #[test]
    fn gauss_lemma_closed_form_grid() {
        for p in [2u64, 3, 5, 7] {
            for chi in enumerate_padic_characters(p, 3) {
                for v in -3..=1 {
                    for u in [1i64, 2, 3, 4, 6, 11, 13] {
                        if u % p as i64 == 0 {
                            continue;
                        }
                        let a = Qp::from_unit(p, v, u).unwrap();
                        let brute = gauss_sum_padic(&a, &chi);
                        assert!(close(brute, gauss_sum_closed_form(&a, &chi), 1e-10));
                        if !chi.is_trivial() && brute.norm() > 1e-9 {
                            let expect = zeta_one(p) * (p as f64).powf(-(chi.conductor_exp() as f64) / 2.0);
                            assert!((brute.norm() - expect).abs() < 1e-10);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn epsilon_matches_dirichlet_side() {
        for p in [2u64, 3, 5, 7, 11] {
            let mut k = 1;
            while p.pow(k) <= 125 {
                for chi in enumerate_padic_characters(p, k).into_iter().filter(|c| !c.is_trivial()) {
                    let c = chi.conductor_exp() as i32;
                    let a = Qp::from_unit(p, -c, 1).unwrap();
                    let extracted = gauss_sum_padic(&a, &chi) / (zeta_one(p) * (p as f64).powf(-c as f64 / 2.0));
                    let tau = arith::gauss_sum_dirichlet(chi.primitive());
                    assert!(close(extracted, tau / (p as f64).powf(c as f64 / 2.0), 1e-10));
                }
                k += 1;
            }
        }
    }

    #[test]
    fn progression_gauss_sums() {
        for p in [2u64, 3, 5] {
            for chi in enumerate_padic_characters(p, 3) {
                for k in 1..=2u32 {
                    for v in -3..=1i32 {
                        let a = Qp::from_unit(p, v, 1).unwrap();
                        let g = gauss_sum_progression(&a, &chi, k);
                        let m = k.max((-v).max(0) as u32);
                        if chi.conductor_exp() > m {
                            assert!(g.norm() < 1e-12);
                        } else if g.norm() > 1e-12 {
                            let m2 = k.max((-v - k as i32).max(0) as u32);
                            let expect = progression_volume(p, k) * progression_volume(p, m2);
                            assert!((g.norm_sqr() - expect).abs() < 1e-12, "p={p} k={k} v={v}");
                        }
                    }
                }
            }
        }
        let triv = PadicCharacter::trivial(3);
        let g = gauss_sum_progression(&Qp::from_unit(3, 0, 1).unwrap(), &triv, 2);
        assert!(close(g, progression_volume(3, 2).into(), 1e-14));
    }

    #[test]
    fn mellin_examples() {
        let s = mellin_padic(&PadicShellFunction::indicator_shell(5, 0));
        assert!(s.get(&PadicCharacter::trivial(5)).unwrap().max_abs_diff(&Laurent::one()) < 1e-15);
        let s = mellin_padic(&PadicShellFunction::indicator_shell(5, 1));
        let t = s.get(&PadicCharacter::trivial(5)).unwrap();
        assert!(t.max_abs_diff(&Laurent::monomial(-1, 1.0.into())) < 1e-15);
        let s = mellin_padic(&PadicShellFunction::indicator_progression(7, 1));
        assert_eq!(s.chars.len(), 6);
        for series in &s.series {
            assert!(series.max_abs_diff(&Laurent::monomial(0, (1.0 / 6.0).into())) < 1e-15);
        }
        let back = mellin_inverse_padic(&s);
        assert!(back.max_abs_diff(&PadicShellFunction::indicator_progression(7, 1)) < 1e-14);
        let zero = mellin_inverse_padic(&mellin_padic(&PadicShellFunction::zero(3)));
        assert!(zero.is_zero());
    }

    #[test]
    fn mellin_round_trip_random() {
        let mut rng = StdRng::seed_from_u64(11);
        let phi = PadicShellFunction::random(3, 2, -1, 3, &mut rng);
        let back = mellin_inverse_padic(&mellin_padic(&phi));
        assert!(back.max_abs_diff(&phi) < 1e-12);
    }

    #[test]
    fn circle_integral_extracts_constant_term() {
        let mut rng = StdRng::seed_from_u64(5);
        for q in [3.0f64, 5.0, 7.0] {
            let s = Laurent::new(
                -3,
                (0..7).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect(),
            );
            let period = 2.0 * std::f64::consts::PI / q.ln();
            let m = 64;
            let h = period / m as f64;
            let integral: Complex64 = (0..m)
                .map(|j| {
                    let t = -period / 2.0 + j as f64 * h;
                    s.eval(Complex64::from_polar(1.0, t * q.ln()))
                })
                .sum::<Complex64>()
                * h
                * q.ln()
                / (2.0 * std::f64::consts::PI);
            assert!(close(integral, s.coeff(0), 1e-9));
        }
    }

    #[test]
    fn json_round_trip() {
        let mut rng = StdRng::seed_from_u64(2);
        let phi = PadicShellFunction::random(5, 1, -2, 1, &mut rng);
        let back = PadicShellFunction::from_json(&phi.to_json()).unwrap();
        assert!(back.max_abs_diff(&phi) == 0.0);
        assert!(PadicShellFunction::from_json(&serde_json::json!({"p": 4, "level": 0, "shells": []})).is_err());
    }
}
