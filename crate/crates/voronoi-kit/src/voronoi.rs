//! Classical Voronoi summation: coefficient sources, both sides of the formula and the GL(2) check.
//!
//! The left side is `sum_m e(am/lq) A(m, c) |m|^{-(n-1)/2} phi_inf(m) prod_{p | M} phi_p(m)`.
//! The right side runs over dual `m` coprime to `MN`, divisor chains `d`, and either the full
//! `r | (MN)^inf` sum (general mode), its collapsed form for twist-minimal level (refined mode) or
//! the `r | [M, l]` sum (progression mode).

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;
use std::time::Instant;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::ToPrimitive;
use serde::Serialize;

use crate::arith::{
    divisors, e, factorize, gcd, lcm_u, mod_inv, primitive_characters, s_f_sum, valuation, DirichletCharacter,
    KloostermanSpec,
};
use crate::bessel_arch::{adaptive_height, ArchKernel, ArchRep, Bump, Contour};
use crate::bessel_padic::{bessel_character_sum_ox, bessel_closed_form_ap, bessel_general, BesselRequest};
use crate::error::{Error, Result};
use crate::local_reps::{hecke_coefficient, spherical_kirillov, LocalRepresentation, SatakeModel, TwistMinimal};
use crate::padic::{PadicCharacter, PadicShellFunction, Qp};

/// `tau(1..=n_max)`, the coefficients of `q prod (1 - q^m)^24`.
///
/// With `E = prod (1 - q^m) = sum e_j q^j` (pentagonal numbers) and `F = E^24`, comparing
/// coefficients in `E F' = 24 E' F` gives `k f_k = sum_{j >= 1} e_j (25 j - k) f_{k-j}`.
pub fn tau_coefficients(n_max: usize) -> Result<Vec<i128>> {
    if n_max > 1_000_000 {
        return Err(Error::InvalidArgument(format!("n_max = {n_max} exceeds 10^6")));
    }
    let len = n_max;
    let mut pent: Vec<(usize, i128)> = Vec::new();
    for k in 1i64.. {
        let a = (k * (3 * k - 1) / 2) as usize;
        if a >= len.max(1) {
            break;
        }
        let s = if k % 2 == 0 { 1 } else { -1 };
        pent.push((a, s));
        let b = (k * (3 * k + 1) / 2) as usize;
        if b < len {
            pent.push((b, s));
        }
    }
    pent.sort_unstable();
    let mut f = vec![0i128; len];
    if len > 0 {
        f[0] = 1;
    }
    for k in 1..len {
        let mut acc: Option<i128> = Some(0);
        for &(j, ej) in pent.iter().take_while(|(j, _)| *j <= k) {
            let w = ej * (25 * j as i128 - k as i128);
            acc = acc.and_then(|a| w.checked_mul(f[k - j]).and_then(|t| a.checked_add(t)));
            if acc.is_none() {
                break;
            }
        }
        let total = match acc {
            Some(a) => a,
            None => {
                let mut big = BigInt::from(0);
                for &(j, ej) in pent.iter().take_while(|(j, _)| *j <= k) {
                    big += BigInt::from(ej * (25 * j as i128 - k as i128)) * BigInt::from(f[k - j]);
                }
                (big / BigInt::from(k))
                    .to_i128()
                    .ok_or_else(|| Error::InvalidArgument(format!("tau({}) exceeds 128 bits", k + 1)))?
                    * k as i128
            }
        };
        f[k] = total / k as i128;
    }
    Ok(f)
}

/// How the entries of a coefficient table are normalised.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Normalization {
    /// Already `A(m)`.
    Hecke,
    /// `A(m) (m_1 ... m_{n-1})^{exponent}`, e.g. `exponent = (k-1)/2` for weight `k`.
    Raw { exponent: f64 },
}

/// The built-in discriminant form, exposing `tau(m) / m^{11/2}`.
#[derive(Clone, Debug)]
pub struct DeltaForm {
    tau: Vec<i128>,
}

impl DeltaForm {
    pub fn new(m_max: usize) -> Result<Self> {
        Ok(DeltaForm { tau: tau_coefficients(m_max)? })
    }

    pub fn m_max(&self) -> usize {
        self.tau.len()
    }

    pub fn tau(&self, m: u64) -> Option<i128> {
        self.tau.get((m as usize).checked_sub(1)?).copied()
    }

    /// Rows `m,re,im` of the raw coefficients `tau(m)`.
    pub fn to_csv(&self) -> String {
        self.tau.iter().enumerate().map(|(i, t)| format!("{},{t},0\n", i + 1)).collect()
    }
}

/// A table of coefficients read from rows `m_1,...,m_{n-1},re,im`.
#[derive(Clone, Debug)]
pub struct CsvTable {
    pub n: usize,
    pub normalization: Normalization,
    pub values: BTreeMap<Vec<i64>, Complex64>,
}

/// A source of Hecke-normalised coefficients `A(m_1, ..., m_{n-1})`.
#[derive(Clone, Debug)]
pub enum CoefficientOracle {
    Satake(SatakeModel),
    Delta(DeltaForm),
    Table(CsvTable),
}

impl CoefficientOracle {
    pub fn n(&self) -> usize {
        match self {
            CoefficientOracle::Satake(s) => s.n,
            CoefficientOracle::Delta(_) => 2,
            CoefficientOracle::Table(t) => t.n,
        }
    }

    /// `A(m)`; signs are ignored and any zero entry gives zero.
    pub fn coefficient(&self, m: &[i64]) -> Result<Complex64> {
        if m.len() + 1 != self.n() {
            return Err(Error::InvalidArgument(format!("expected {} indices", self.n() - 1)));
        }
        if m.contains(&0) {
            return Ok(Complex64::new(0.0, 0.0));
        }
        match self {
            CoefficientOracle::Satake(s) => hecke_coefficient(s, m),
            CoefficientOracle::Delta(d) => {
                let k = m[0].unsigned_abs();
                let t = d.tau(k).ok_or_else(|| Error::MissingCoefficient(format!("tau({k}) not generated")))?;
                Ok(Complex64::new(t as f64 / (k as f64).powf(5.5), 0.0))
            }
            CoefficientOracle::Table(t) => {
                let key: Vec<i64> = m.iter().map(|x| x.abs()).collect();
                let raw = t.values.get(&key).ok_or_else(|| Error::MissingCoefficient(format!("{key:?}")))?;
                Ok(match t.normalization {
                    Normalization::Hecke => *raw,
                    Normalization::Raw { exponent } => {
                        let prod: f64 = key.iter().map(|&x| x as f64).product();
                        raw / prod.powf(exponent)
                    }
                })
            }
        }
    }
}

/// Parses a coefficient table; returns it with any normalisation warnings.
pub fn parse_csv(text: &str, n: usize, normalization: Normalization) -> Result<(CoefficientOracle, Vec<String>)> {
    if n < 2 {
        return Err(Error::InvalidArgument("dimension must be at least 2".into()));
    }
    let mut values = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != n + 1 {
            return Err(Error::Parse(format!("line {}: expected {} fields, found {}", i + 1, n + 1, fields.len())));
        }
        let mut key = Vec::with_capacity(n - 1);
        for f in &fields[..n - 1] {
            let k: i64 = f.parse().map_err(|_| Error::Parse(format!("line {}: bad index {f:?}", i + 1)))?;
            if k <= 0 {
                return Err(Error::Parse(format!("line {}: indices must be positive", i + 1)));
            }
            key.push(k);
        }
        let num = |f: &str| -> Result<f64> {
            f.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| Error::Parse(format!("line {}: bad number {f:?}", i + 1)))
        };
        let z = Complex64::new(num(fields[n - 1])?, num(fields[n])?);
        if values.insert(key.clone(), z).is_some() {
            return Err(Error::Parse(format!("line {}: duplicate row for {key:?}", i + 1)));
        }
    }
    if values.is_empty() {
        return Err(Error::Parse("no coefficient rows".into()));
    }
    let table = CsvTable { n, normalization, values };
    let ones = vec![1i64; n - 1];
    let oracle = CoefficientOracle::Table(table);
    let a1 = oracle.coefficient(&ones).map_err(|_| Error::Parse("missing the row for A(1, ..., 1)".into()))?;
    if (a1 - Complex64::new(1.0, 0.0)).norm() > 1e-9 {
        return Err(Error::Parse(format!("A(1, ..., 1) = {a1}, expected 1")));
    }
    Ok((oracle.clone(), normalization_warnings(&oracle)))
}

/// Reads a coefficient table from disk.
pub fn ingest_csv(path: &Path, n: usize, normalization: Normalization) -> Result<(CoefficientOracle, Vec<String>)> {
    parse_csv(&std::fs::read_to_string(path)?, n, normalization)
}

/// Rows far outside the generalised Ramanujan range suggest a raw table declared as Hecke.
fn normalization_warnings(oracle: &CoefficientOracle) -> Vec<String> {
    let CoefficientOracle::Table(t) = oracle else { return Vec::new() };
    let mut out = Vec::new();
    for key in t.values.keys() {
        let a = oracle.coefficient(key).unwrap().norm();
        let size: f64 = key.iter().map(|&x| x as f64).product();
        let bound = (t.n as f64).powi(2) * size.powf(0.5) * (1.0 + size.ln().max(0.0)).powi(t.n as i32);
        if a > bound {
            out.push(format!("|A{key:?}| = {a:.3e} is far above the Ramanujan range; is the table raw?"));
        }
    }
    out.truncate(10);
    out
}

/// Truncation of the dual side.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Truncation {
    /// Dual `m` runs over `0 < |m| <= m_max`.
    pub m_max: u64,
    /// Shells above the test-function support kept at each `p | MN`.
    pub padic_extra: i32,
}

impl Default for Truncation {
    fn default() -> Self {
        Truncation { m_max: 2000, padic_extra: 3 }
    }
}

/// The data of one summation problem.
#[derive(Clone, Debug)]
pub struct VoronoiInstance {
    pub n: usize,
    pub level: u64,
    pub nebentypus: DirichletCharacter,
    pub a: i64,
    pub l: u64,
    pub q: u64,
    /// `(c_2, ..., c_{n-1})`
    pub c: Vec<i64>,
    pub phi_inf: Bump,
    /// `phi_p` for the primes `p | M`.
    pub phi_p: BTreeMap<u64, PadicShellFunction>,
}

impl VoronoiInstance {
    /// Checks every coprimality and divisibility hypothesis.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        n: usize,
        level: u64,
        nebentypus: DirichletCharacter,
        (a, l, q): (i64, u64, u64),
        c: Vec<i64>,
        phi_inf: Bump,
        phi_p: BTreeMap<u64, PadicShellFunction>,
    ) -> Result<Self> {
        if n < 2 || c.len() != n - 2 {
            return Err(Error::InvalidArgument(format!("need n >= 2 and {} shifts", n.saturating_sub(2))));
        }
        if level == 0 || nebentypus.modulus() != level {
            return Err(Error::InvalidArgument("nebentypus must be a character mod the level".into()));
        }
        if a == 0 || l == 0 || q == 0 {
            return Err(Error::InvalidArgument("a must be nonzero and l, q positive".into()));
        }
        for (&p, phi) in &phi_p {
            if factorize(p) != vec![(p, 1)] || phi.p != p {
                return Err(Error::InvalidArgument(format!("test function keyed by {p} is not at that prime")));
            }
        }
        let inst = VoronoiInstance { n, level, nebentypus, a, l, q, c, phi_inf, phi_p };
        let mn = inst.m_times_n();
        if gcd(a, (l * q) as i64) != 1 {
            return Err(Error::InvalidArgument(format!("(a, lq) = ({a}, {}) is not 1", l * q)));
        }
        if gcd(q as i64, mn as i64) != 1 {
            return Err(Error::InvalidArgument(format!("(q, MN) = ({q}, {mn}) is not 1")));
        }
        if factorize(l).iter().any(|&(p, _)| !mn.is_multiple_of(p)) {
            return Err(Error::InvalidArgument(format!("l = {l} does not divide (MN)^inf")));
        }
        let cprod = inst.c.iter().product::<i64>();
        if cprod == 0 || gcd(cprod, mn as i64) != 1 {
            return Err(Error::InvalidArgument(format!("shifts {:?} are not coprime to MN = {mn}", inst.c)));
        }
        Ok(inst)
    }

    /// The product of the primes carrying a test function.
    pub fn m(&self) -> u64 {
        self.phi_p.keys().product()
    }

    pub fn m_times_n(&self) -> u64 {
        self.m() * self.level
    }

    /// Primes dividing `MN`.
    pub fn ramified_primes(&self) -> Vec<u64> {
        let mut s: BTreeSet<u64> = factorize(self.level).into_iter().map(|(p, _)| p).collect();
        s.extend(self.phi_p.keys());
        s.into_iter().collect()
    }

    /// `lambda_l = [l, N] l^{n-1} L^n` with `L` the radical of `MN`.
    pub fn lambda_l(&self) -> u64 {
        let rad: u64 = self.ramified_primes().iter().product();
        lcm_u(self.l, self.level) * self.l.pow(self.n as u32 - 1) * rad.pow(self.n as u32)
    }

    /// `zeta_p = a / (l q)` in `Q_p`.
    pub fn zeta_at(&self, p: u64) -> Qp {
        Qp::from_ratio(p, self.a as i128, (self.l * self.q) as i128).unwrap().unwrap()
    }
}

/// Which form of the right-hand side to assemble.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum RhsMode {
    General,
    Refined,
    Progression,
}

/// The left side with its term count.
#[derive(Clone, Debug, Serialize)]
pub struct LhsReport {
    pub value: Complex64,
    pub terms: usize,
}

/// The right side with truncation diagnostics.
#[derive(Clone, Debug, Serialize)]
pub struct RhsReport {
    pub value: Complex64,
    pub terms: usize,
    /// Sum of term sizes over `m_max / 2 < |m| <= m_max`.
    pub dual_tail: f64,
    /// Accumulated quadrature error of the real Bessel transform.
    pub arch_error: f64,
    /// Largest p-adic Bessel value on the top retained shell.
    pub padic_tail: f64,
}

/// `sum_m e(am/lq) A(m, c) |m|^{-(n-1)/2} phi_inf(m) prod_{p | M} phi_p(m)`.
pub fn assemble_lhs(inst: &VoronoiInstance, oracle: &CoefficientOracle) -> Result<LhsReport> {
    if oracle.n() != inst.n {
        return Err(Error::InvalidArgument("oracle dimension differs from the instance".into()));
    }
    let lq = (inst.l * inst.q) as i128;
    let lo = inst.phi_inf.a.ceil().max(1.0) as i64;
    let hi = inst.phi_inf.b.floor() as i64;
    let mut value = Complex64::new(0.0, 0.0);
    let mut terms = 0;
    for m in lo..=hi {
        let w = inst.phi_inf.eval(m as f64);
        if w == 0.0 {
            continue;
        }
        let mut local = Complex64::new(w, 0.0);
        for (&p, phi) in &inst.phi_p {
            let x = Qp::from_ratio(p, m as i128, 1)?.unwrap();
            local *= phi.eval_qp(&x);
        }
        if local.norm() == 0.0 {
            continue;
        }
        let mut idx = vec![m];
        idx.extend(&inst.c);
        let coeff = oracle.coefficient(&idx)?;
        let phase = e((inst.a as i128 * m as i128).rem_euclid(lq) as f64 / lq as f64);
        value += phase * coeff * local / (m as f64).powf((inst.n as f64 - 1.0) / 2.0);
        terms += 1;
    }
    Ok(LhsReport { value, terms })
}

/// Divisor chains `d_{n-1} | q c_2`, `d_{n-2} | q c_2 c_3 / d_{n-1}`, ..., as `(d_2, ..., d_{n-1})`.
pub fn divisor_chains(n: usize, q: u64, c: &[i64]) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let mut cur = vec![0i64; n.saturating_sub(2)];
    fn rec(n: usize, i: usize, num: u64, c: &[i64], cur: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if i < 2 {
            out.push(cur.clone());
            return;
        }
        // modulus for d_i is q c_2 ... c_{n-i+1} / (d_{n-1} ... d_{i+1})
        let num = num * c[n - i - 1].unsigned_abs();
        for d in divisors(num) {
            cur[i - 2] = d as i64;
            rec(n, i - 1, num / d, c, cur, out);
        }
    }
    if n == 2 {
        return vec![Vec::new()];
    }
    rec(n, n - 1, q, c, &mut cur, &mut out);
    out
}

/// `y -> W_p(a(y))` for the newform at `p`, on shells `v_lo..=v_hi`.
fn kirillov_newform(rep: &LocalRepresentation, v_lo: i32, v_hi: i32) -> PadicShellFunction {
    match rep {
        LocalRepresentation::Unramified(s) => {
            let w = spherical_kirillov(s, v_hi.max(0));
            PadicShellFunction::from_fn(s.p, 0, v_lo, v_hi, |v, u| w.eval(v, u))
        }
        LocalRepresentation::TwistMinimal(t) => {
            PadicShellFunction::from_fn(t.p, 0, v_lo, v_hi, |v, _| if v == 0 { 1.0.into() } else { 0.0.into() })
        }
    }
}

/// `Phi_p = phi_p W_p(a(.))` at `p | M`, or `W_p(a(.))` at `p | N` without a test function.
pub fn local_test_vector(inst: &VoronoiInstance, rep: &LocalRepresentation) -> PadicShellFunction {
    let p = rep.p();
    match inst.phi_p.get(&p) {
        Some(phi) => {
            let w = kirillov_newform(rep, phi.v_min, phi.v_max());
            PadicShellFunction::from_fn(p, phi.level, phi.v_min, phi.v_max(), |v, u| phi.eval(v, u) * w.eval(v, u))
        }
        None => kirillov_newform(rep, 0, 0),
    }
}

/// `B_p` for every `p | MN` from the general engine.
pub fn local_bessel_tables(
    inst: &VoronoiInstance,
    locals: &BTreeMap<u64, LocalRepresentation>,
    padic_extra: i32,
) -> Result<BTreeMap<u64, PadicShellFunction>> {
    let mut out = BTreeMap::new();
    for p in inst.ramified_primes() {
        let rep = locals.get(&p).ok_or_else(|| Error::InvalidArgument(format!("no local model at {p}")))?;
        if rep.n() != inst.n {
            return Err(Error::InvalidArgument(format!("local model at {p} has the wrong rank")));
        }
        let phi = local_test_vector(inst, rep);
        let cutoff = phi.v_max().max(0) + padic_extra;
        let b = bessel_general(&BesselRequest { rep: rep.clone(), phi, zeta: Some(inst.zeta_at(p)), cutoff })?;
        out.insert(p, b);
    }
    Ok(out)
}

/// The shift-dependent part of one dual term: coefficient, Kloosterman sum and nebentypus.
struct DualTerm {
    m: i64,
    weight: Complex64,
    /// `prod d_i^i / prod c_i^{n-i}` as a fraction.
    scale: (i128, i128),
    d: Vec<i64>,
}

fn dual_terms(inst: &VoronoiInstance, oracle: &CoefficientOracle, m_max: u64) -> Result<Vec<DualTerm>> {
    let n = inst.n;
    let mn = inst.m_times_n() as i64;
    let nn = inst.level as i64;
    let chains = divisor_chains(n, inst.q, &inst.c);
    let cfac: f64 =
        (2..n).map(|i| (inst.c[i - 2].abs() as f64).powf((n - i) as f64 * (i as f64 / 2.0 - 1.0))).product();
    let mut out = Vec::new();
    for k in 1..=m_max as i64 {
        if gcd(k, mn) != 1 {
            continue;
        }
        for m in [k, -k] {
            let mbar = if nn > 1 { mod_inv(m.rem_euclid(nn), nn).unwrap() } else { 0 };
            for d in &chains {
                let mut idx: Vec<i64> = d.iter().rev().copied().collect();
                idx.push(m);
                let coeff = oracle.coefficient(&idx)?;
                if coeff.norm() == 0.0 {
                    continue;
                }
                let dfac: f64 = (2..n).map(|i| (d[i - 2] as f64).powf((i * (n - i)) as f64 / 2.0)).product();
                let num: i128 = (2..n).map(|i| (d[i - 2] as i128).pow(i as u32)).product();
                let den: i128 = (2..n).map(|i| (inst.c[i - 2].abs() as i128).pow((n - i) as u32)).product();
                let top: i128 = inst.c.iter().fold(inst.q as i128, |a, &x| a * x.abs() as i128);
                let quot = top / d.iter().fold(1i128, |a, &x| a * x as i128);
                let chi = if nn > 1 {
                    inst.nebentypus.value((mbar as i128 * quot).rem_euclid(nn as i128) as i64).conj()
                } else {
                    1.0.into()
                };
                out.push(DualTerm {
                    m,
                    weight: cfac * chi * coeff / ((m.unsigned_abs() as f64).powf((n as f64 - 1.0) / 2.0) * dfac),
                    scale: (num, den),
                    d: d.clone(),
                });
            }
        }
    }
    Ok(out)
}

fn kl(inst: &VoronoiInstance, d: &[i64], x: i64, m: i64) -> Result<Complex64> {
    let spec = KloostermanSpec { n: inst.n, q: inst.q, c: inst.c.clone(), d: d.to_vec() };
    Ok(crate::arith::kloosterman_classical(&spec, x, m)?.0)
}

fn inv_mod_q(x: u64, q: u64) -> Result<i64> {
    if q == 1 {
        return Ok(0);
    }
    mod_inv((x % q) as i64, q as i64).ok_or(Error::NotInvertible { residue: x as i64, modulus: q as i64 })
}

/// Valuation exponents `e` with `B_p` not identically zero on shell `e - base_val`.
fn live_exponents(b: &PadicShellFunction, base_val: i32) -> Vec<u32> {
    const LIVE: f64 = 1e-12;
    let peak = b.shells.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max);
    (0..=b.v_max() + base_val)
        .filter(|&e| {
            let v = e - base_val;
            v >= b.v_min && b.shells[(v - b.v_min) as usize].iter().any(|z| z.norm() > LIVE * peak)
        })
        .map(|e| e as u32)
        .collect()
}

/// The local factor attached to one `r`.
enum LocalFactor<'a> {
    Tables(&'a BTreeMap<u64, PadicShellFunction>),
    Refined { prefactor: f64, roots: &'a HashMap<DirichletCharacter, Complex64> },
    Progression(&'a [(u64, TwistMinimal, u32)]),
}

/// One admissible `r`: Kloosterman argument and `gamma = num m D / den`.
struct Branch<'a> {
    x: i64,
    num: i128,
    den: i128,
    local: LocalFactor<'a>,
}

/// `[N, l^n]`, the denominator of the refined formula.
pub fn refined_modulus(inst: &VoronoiInstance) -> u64 {
    lcm_u(inst.level, inst.l.pow(inst.n as u32))
}

/// Checks the refined-mode hypotheses: no test functions, twist-minimal models at every `p | N`,
/// `l` square-full with the same prime divisors as `N`.
fn check_refined(
    inst: &VoronoiInstance,
    locals: &BTreeMap<u64, LocalRepresentation>,
) -> Result<Vec<(u64, TwistMinimal)>> {
    if !inst.phi_p.is_empty() {
        return Err(Error::InvalidArgument("refined mode takes no p-adic test functions".into()));
    }
    let mut out = Vec::new();
    for (p, k) in factorize(inst.level) {
        let Some(LocalRepresentation::TwistMinimal(t)) = locals.get(&p) else {
            return Err(Error::InvalidArgument(format!("refined mode needs a twist-minimal model at {p}")));
        };
        if t.a_pi != k {
            return Err(Error::InvalidArgument(format!("conductor exponent at {p} is {}, level has {k}", t.a_pi)));
        }
        let lp = valuation(inst.l as i64, p);
        if lp < 2 {
            return Err(Error::InvalidArgument(format!("refined mode needs p^2 | l for p = {p} | N")));
        }
        out.push((p, t.clone()));
    }
    Ok(out)
}

/// Checks the progression-mode hypotheses: twist-minimal models at every `p | MN`, test functions
/// `Char_{1 + p^k Z_p}`. Returns `(p, model, k)` with `k = 0` where there is no test function.
fn check_progression(
    inst: &VoronoiInstance,
    locals: &BTreeMap<u64, LocalRepresentation>,
) -> Result<Vec<(u64, TwistMinimal, u32)>> {
    let mut out = Vec::new();
    for p in inst.ramified_primes() {
        let Some(LocalRepresentation::TwistMinimal(t)) = locals.get(&p) else {
            return Err(Error::InvalidArgument(format!("progression mode needs a twist-minimal model at {p}")));
        };
        let k = match inst.phi_p.get(&p) {
            None => 0,
            Some(phi) => {
                let k = phi.level;
                if *phi != PadicShellFunction::indicator_progression(p, k) || k == 0 {
                    return Err(Error::InvalidArgument(format!("test function at {p} is not Char(1 + p^k Z_p)")));
                }
                k
            }
        };
        out.push((p, t.clone(), k));
    }
    Ok(out)
}

/// Synthetic `eps(1/2, f x chi)` for primitive `chi mod l`: the product of local twisted root numbers
/// times the values `chi_p((l / [N, l^n])_{p'})` that move the normalised local characters to the
/// components of the idele class character.
pub fn refined_root_numbers(
    inst: &VoronoiInstance,
    locals: &BTreeMap<u64, LocalRepresentation>,
) -> Result<HashMap<DirichletCharacter, Complex64>> {
    let models = check_refined(inst, locals)?;
    let t = refined_modulus(inst);
    let mut out = HashMap::new();
    for chi in primitive_characters(inst.l) {
        let mut root = Complex64::new(1.0, 0.0);
        for (p, comp) in chi.prime_components() {
            let local = PadicCharacter::from_dirichlet(p, comp)?;
            let model = &models.iter().find(|(q, _)| *q == p).unwrap().1;
            let w = Qp::from_ratio(p, inst.l as i128, t as i128)?.unwrap();
            root *= model.root_number(&local)? * local.value_qp(&w);
        }
        out.insert(chi, root);
    }
    Ok(out)
}

/// The right-hand side in the requested mode.
pub fn assemble_rhs(
    inst: &VoronoiInstance,
    oracle: &CoefficientOracle,
    locals: &BTreeMap<u64, LocalRepresentation>,
    arch: &ArchKernel,
    mode: RhsMode,
    trunc: Truncation,
) -> Result<RhsReport> {
    if oracle.n() != inst.n {
        return Err(Error::InvalidArgument("oracle dimension differs from the instance".into()));
    }
    let n = inst.n as u32;
    let q = inst.q;
    let qi = q as i128;
    let abar = inv_mod_q(inst.a.rem_euclid(q as i64) as u64, q)? as i128;
    let qn = qi.pow(n);
    let l = inst.l as i128;
    let terms = dual_terms(inst, oracle, trunc.m_max)?;

    let tables;
    let roots;
    let models;
    let mut padic_tail: f64 = 0.0;
    let mut branches = Vec::new();
    match mode {
        RhsMode::General => {
            tables = local_bessel_tables(inst, locals, trunc.padic_extra)?;
            for b in tables.values() {
                if let Some(top) = b.shells.last() {
                    padic_tail = padic_tail.max(top.iter().map(|z| z.norm()).fold(0.0, f64::max));
                }
            }
            let lam = inst.lambda_l();
            let lbar = inv_mod_q(lam, q)? as i128;
            let mut rs = vec![1u64];
            for (&p, b) in &tables {
                let es = live_exponents(b, valuation(lam as i64, p) as i32);
                rs = rs.iter().flat_map(|&r| es.iter().map(move |&e| r * p.pow(e))).collect();
            }
            for r in rs {
                let x = (abar * lbar % qi * l % qi * r as i128 % qi) as i64;
                branches.push(Branch { x, num: r as i128, den: lam as i128 * qn, local: LocalFactor::Tables(&tables) });
            }
        }
        RhsMode::Progression => {
            models = check_progression(inst, locals)?;
            // B_p lives on |y| = p^{max(a(pi), n j)} for 0 <= j <= max(k, v_p(l))
            let mut rs = vec![1u64];
            for (p, t, k) in &models {
                let top = (*k).max(valuation(inst.l as i64, *p));
                let mut es: Vec<u32> = (0..=top).map(|j| t.a_pi.max(n * j)).collect();
                es.dedup();
                rs = rs.iter().flat_map(|&r| es.iter().map(move |&e| r * p.pow(e))).collect();
            }
            for r in rs {
                let rbar = inv_mod_q(r, q)? as i128;
                let x = (abar * rbar % qi * l % qi) as i64;
                branches.push(Branch { x, num: 1, den: r as i128 * qn, local: LocalFactor::Progression(&models) });
            }
        }
        RhsMode::Refined => {
            roots = refined_root_numbers(inst, locals)?;
            let t = refined_modulus(inst);
            let tbar = inv_mod_q(t, q)? as i128;
            let euler: f64 = factorize(inst.level).iter().map(|&(p, _)| 1.0 - 1.0 / p as f64).product();
            let prefactor = (t as f64).powf((n as f64 - 2.0) / 2.0) / ((inst.l as f64).sqrt() * euler);
            let x = (abar * tbar % qi * l % qi) as i64;
            branches.push(Branch {
                x,
                num: 1,
                den: t as i128 * qn,
                local: LocalFactor::Refined { prefactor, roots: &roots },
            });
        }
    }

    let half = trunc.m_max / 2;
    let mut value = Complex64::new(0.0, 0.0);
    let (mut dual_tail, mut arch_error, mut count) = (0.0, 0.0, 0usize);
    for term in &terms {
        for br in &branches {
            let num = br.num * term.m as i128 * term.scale.0;
            let den = br.den * term.scale.1;
            let local = match br.local {
                LocalFactor::Tables(tabs) => {
                    let mut z = Complex64::new(1.0, 0.0);
                    for (&p, b) in tabs {
                        z *= b.eval_qp(&Qp::from_ratio(p, num, den)?.unwrap());
                        if z.norm() == 0.0 {
                            break;
                        }
                    }
                    z
                }
                LocalFactor::Progression(models) => {
                    let mut z = Complex64::new(1.0, 0.0);
                    for (p, t, k) in models {
                        let g = Qp::from_ratio(*p, num, den)?.unwrap();
                        let zeta = inst.zeta_at(*p);
                        z *= if *k == 0 {
                            bessel_character_sum_ox(t, Some(&zeta), &g)?
                        } else {
                            bessel_closed_form_ap(t, Some(&zeta), *k, &g)?
                        };
                        if z.norm() == 0.0 {
                            break;
                        }
                    }
                    z
                }
                LocalFactor::Refined { prefactor, roots } => {
                    // chi(m abar q^{1-n} D) with D = scale.0 / scale.1
                    let lm = inst.l as i64;
                    let abar_l = mod_inv(inst.a.rem_euclid(lm), lm).unwrap_or(0) as i128;
                    let qinv = mod_inv((q as i64).rem_euclid(lm), lm).unwrap_or(0) as i128;
                    let dinv = mod_inv((term.scale.1 % lm as i128) as i64, lm).unwrap_or(0) as i128;
                    let mut arg = term.m as i128 * abar_l % lm as i128 * (term.scale.0 % lm as i128) % lm as i128
                        * dinv
                        % lm as i128;
                    for _ in 1..n {
                        arg = arg * qinv % lm as i128;
                    }
                    let arg = arg.rem_euclid(lm as i128) as i64;
                    prefactor * s_f_sum(inst.l, arg, 1, 1, inst.n, roots)?
                }
            };
            if local.norm() == 0.0 {
                continue;
            }
            let (b, err) = arch.eval(num as f64 / den as f64)?;
            let k = kl(inst, &term.d, br.x, term.m)?;
            let scale = term.weight * k * local;
            let contrib = scale * b;
            value += contrib;
            arch_error += scale.norm() * err;
            if term.m.unsigned_abs() > half {
                dual_tail += contrib.norm();
            }
            count += 1;
        }
    }
    let qpow = (q as f64).powi(n as i32 - 2);
    Ok(RhsReport {
        value: value * qpow,
        terms: count,
        dual_tail: dual_tail * qpow,
        arch_error: arch_error * qpow,
        padic_tail,
    })
}

/// Outcome of [`verify_voronoi_gl2`].
#[derive(Clone, Debug, Serialize)]
pub struct VoronoiReport {
    pub q: u64,
    pub a: i64,
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub rel_err: f64,
    pub lhs_terms: usize,
    pub rhs_terms: usize,
    pub dual_tail: f64,
    pub arch_error: f64,
    pub height: f64,
    pub seconds: f64,
    pub passed: bool,
}

/// Both sides for the discriminant form at level one with `l = M = 1`.
///
/// The gate is `rel_err <= tol` together with both truncation estimates below `tol |lhs|`.
pub fn verify_voronoi_gl2(q: u64, a: i64, phi: Bump, delta: &DeltaForm, m_max: u64, tol: f64) -> Result<VoronoiReport> {
    if m_max as usize > delta.m_max() {
        return Err(Error::MissingCoefficient(format!("dual range {m_max} exceeds the generated {}", delta.m_max())));
    }
    verify_voronoi_gl2_with(q, a, phi, &CoefficientOracle::Delta(delta.clone()), m_max, tol)
}

/// [`verify_voronoi_gl2`] with the coefficients of a level-one weight-12 eigenform taken from `oracle`.
pub fn verify_voronoi_gl2_with(
    q: u64,
    a: i64,
    phi: Bump,
    oracle: &CoefficientOracle,
    m_max: u64,
    tol: f64,
) -> Result<VoronoiReport> {
    let start = Instant::now();
    if oracle.n() != 2 {
        return Err(Error::InvalidArgument("coefficients must be those of a GL(2) form".into()));
    }
    let inst = VoronoiInstance::new(2, 1, DirichletCharacter::trivial(1), (a, 1, q), Vec::new(), phi, BTreeMap::new())?;
    let oracle = oracle.clone();
    let rep = ArchRep::holomorphic(12);
    let height = adaptive_height(&rep, &phi, 50.0, 1e-12)?;
    let kernel = ArchKernel::new(&rep, &phi, Contour::default_for(&rep, height))?;
    let lhs = assemble_lhs(&inst, &oracle)?;
    let rhs = assemble_rhs(
        &inst,
        &oracle,
        &BTreeMap::new(),
        &kernel,
        RhsMode::General,
        Truncation { m_max, padic_extra: 0 },
    )?;
    let rel_err = (lhs.value - rhs.value).norm() / lhs.value.norm();
    let gate = tol * lhs.value.norm();
    Ok(VoronoiReport {
        q,
        a,
        lhs: lhs.value,
        rhs: rhs.value,
        rel_err,
        lhs_terms: lhs.terms,
        rhs_terms: rhs.terms,
        dual_tail: rhs.dual_tail,
        arch_error: rhs.arch_error,
        height,
        seconds: start.elapsed().as_secs_f64(),
        passed: rel_err <= tol && rhs.dual_tail <= gate && rhs.arch_error <= gate,
    })
}

/// A self-contained instance with twist-minimal level for comparing the modes of the right side.
pub struct SyntheticInstance {
    pub inst: VoronoiInstance,
    pub oracle: CoefficientOracle,
    pub locals: BTreeMap<u64, LocalRepresentation>,
    pub kernel: ArchKernel,
}

/// Builds a synthetic instance: random twist-minimal models with `a(pi_p) = level_exp` and
/// `v_p(l) = l_exp` for each `(p, level_exp, l_exp)`, random unitary Satake data elsewhere up to
/// `satake_bound`, and a tempered archimedean component.
pub fn synthetic_twist_minimal(
    n: usize,
    primes: &[(u64, u32, u32)],
    progression: &[(u64, u32)],
    (a, q): (i64, u64),
    c: Vec<i64>,
    satake_bound: u64,
    seed: u64,
) -> Result<SyntheticInstance> {
    use crate::arith::is_prime;
    use crate::bessel_arch::GammaShift;
    use crate::local_reps::SatakeParams;
    use rand::{Rng, SeedableRng};
    let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
    let mut locals = BTreeMap::new();
    let (mut level, mut l) = (1u64, 1u64);
    for &(p, k, j) in primes {
        let kp = progression.iter().filter(|x| x.0 == p).map(|x| x.1).max().unwrap_or(0);
        let t = TwistMinimal::random(p, n, k, j.max(kp).max(1), &mut rng);
        locals.insert(p, LocalRepresentation::TwistMinimal(t));
        level *= p.pow(k);
        l *= p.pow(j);
    }
    let mut model = SatakeModel::new(n);
    for p in (2..=satake_bound).filter(|&p| is_prime(p) && level % p != 0) {
        model.insert(SatakeParams::random_unitary(p, n, Complex64::new(1.0, 0.0), &mut rng))?;
    }
    let phi = Bump::new(1.0, 8.0, 2)?;
    let mut phi_p = BTreeMap::new();
    for &(p, k) in progression {
        phi_p.insert(p, PadicShellFunction::indicator_progression(p, k));
        if let Some(sp) = model.params.get(&p) {
            locals.insert(p, LocalRepresentation::Unramified(sp.clone()));
        }
    }
    let inst = VoronoiInstance::new(n, level, DirichletCharacter::trivial(level), (a, l, q), c, phi, phi_p)?;
    let ts: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
    let mean = ts.iter().sum::<f64>() / n as f64;
    let shifts = ts.iter().map(|t| GammaShift::R { mu: Complex64::new(0.0, t - mean), delta: 0 }).collect();
    let rep = ArchRep::new(shifts, [Complex64::new(1.0, 0.0); 2])?;
    // both modes share this kernel, so a looser height only moves the common archimedean error
    let height = adaptive_height(&rep, &phi, 50.0, 1e-10)?;
    let kernel = ArchKernel::new(&rep, &phi, Contour::default_for(&rep, height))?;
    Ok(SyntheticInstance { inst, oracle: CoefficientOracle::Satake(model), locals, kernel })
}

/// General-mode and refined-mode right sides with their relative difference.
pub fn compare_refined(s: &SyntheticInstance, m_max: u64) -> Result<(RhsReport, RhsReport, f64)> {
    let trunc = Truncation { m_max, padic_extra: 3 };
    let g = assemble_rhs(&s.inst, &s.oracle, &s.locals, &s.kernel, RhsMode::General, trunc)?;
    let r = assemble_rhs(&s.inst, &s.oracle, &s.locals, &s.kernel, RhsMode::Refined, trunc)?;
    let rel = (g.value - r.value).norm() / g.value.norm().max(r.value.norm());
    Ok((g, r, rel))
}
