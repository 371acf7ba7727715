//! Local hyper-Kloosterman sums at an unramified place and the integral they come from.
//!
//! The oracle [`hk_integral_bruteforce`] integrates the contragredient spherical Whittaker
//! function over `F_p^{n-2}` shell by shell, reducing each matrix argument to Iwasawa form
//! over exact rationals. [`hk_closed_form`] evaluates the finite expansion
//! `sum_t Kl(y, t; zeta, xi) W~(a(y) delta(t; zeta, xi))`, and [`verify_geometric_identity`]
//! compares the two.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::arith::{e_ratio, factorize, units_mod};
use crate::error::{Error, Result};
use crate::local_reps::{shintani_whittaker, SatakeParams};
use crate::padic::{psi_qp, Qp};

/// The `n = 2` hyper-Kloosterman value `prod_{p | q} psi_p(t / q)`.
pub fn kl_degenerate(t: i128, q: u64) -> Result<Complex64> {
    if q == 0 {
        return Err(Error::InvalidArgument("modulus must be positive".into()));
    }
    let mut out = Complex64::new(1.0, 0.0);
    for (p, k) in factorize(q) {
        let pk = p.pow(k) as i128;
        let rest = q as i128 / pk;
        // p-part of t/q is t * rest^{-1} / p^k mod 1
        let inv = crate::arith::mod_inv((rest % pk) as i64, pk as i64).unwrap() as i128;
        out *= e_ratio(t.rem_euclid(pk) * inv % pk, pk as u128);
    }
    Ok(out)
}

/// `t = diag(p^{v_2}, ..., p^{v_{n-1}})` with every `v_i <= 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ToralElement {
    pub p: u64,
    pub v: Vec<i32>,
}

impl ToralElement {
    pub fn new(p: u64, v: Vec<i32>) -> Result<Self> {
        if let Some(x) = v.iter().find(|&&x| x > 0) {
            return Err(Error::InvalidArgument(format!("toral entry of valuation {x} is not of norm >= 1")));
        }
        Ok(ToralElement { p, v })
    }

    pub fn det_val(&self) -> i32 {
        self.v.iter().sum()
    }
}

/// A modulus `zeta` (`None` for zero) and a shift `xi = diag(xi_1, ..., xi_n)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ShiftModulus {
    pub zeta: Option<Qp>,
    pub xi: Vec<Qp>,
}

impl ShiftModulus {
    /// Trivial shift of size `n`.
    pub fn plain(p: u64, n: usize, zeta: Option<Qp>) -> Self {
        ShiftModulus { zeta, xi: vec![Qp::one(p); n] }
    }

    pub fn n(&self) -> usize {
        self.xi.len()
    }

    /// Whether `|zeta xi_1^{-1} xi_2| > 1`.
    pub fn is_large(&self) -> bool {
        match self.zeta {
            None => false,
            Some(z) => z.val - self.xi[0].val + self.xi[1].val < 0,
        }
    }

    /// `zeta` itself in the large branch, `xi_1 xi_2^{-1}` otherwise.
    pub fn effective_zeta(&self) -> Qp {
        if self.is_large() {
            self.zeta.unwrap()
        } else {
            self.xi[0].mul(&self.xi[1].inv())
        }
    }

    fn check(&self, p: u64) -> Result<()> {
        if self.xi.len() < 2 {
            return Err(Error::InvalidArgument("shift needs at least two entries".into()));
        }
        if self.xi.iter().chain(self.zeta.iter()).any(|x| x.p != p) {
            return Err(Error::InvalidArgument(format!("shift or modulus not {p}-adic")));
        }
        Ok(())
    }
}

/// Representatives of `p^v Z_p^x / Z_p` for `v < 0`, and `{1}` for `v = 0`.
pub fn lambda_set(p: u64, v: i32) -> Result<Vec<Qp>> {
    if v > 0 {
        return Err(Error::InvalidArgument(format!("valuation {v} > 0 has no lambda set")));
    }
    if v == 0 {
        return Ok(vec![Qp::one(p)]);
    }
    units_mod(p.pow((-v) as u32)).into_iter().map(|u| Qp::from_unit(p, v, u as i64)).collect()
}

fn sign_qp(x: Qp, neg: bool) -> Qp {
    if neg {
        x.neg()
    } else {
        x
    }
}

/// The hyper-Kloosterman sum with a prescribed modulus, without any branch selection.
pub fn kl_local_with(y: &Qp, t: &ToralElement, zeta: &Qp, xi: &[Qp]) -> Result<Complex64> {
    let n = xi.len();
    if t.v.len() + 2 != n {
        return Err(Error::InvalidArgument(format!("toral element of size {} for n = {n}", t.v.len())));
    }
    let p = t.p;
    let q = p as f64;
    if n == 2 {
        return Ok(psi_qp(&y.mul(&zeta.inv())));
    }
    let pref_val = (n as i32 - 2) * (xi[1].val + zeta.val) - xi[2..].iter().map(|x| x.val).sum::<i32>();
    let pref = q.powi(-pref_val) * psi_qp(&xi[1].mul(&xi[2].inv()).neg());
    // (-1)^n y zeta^{-1} xi_2^{-1} xi_n
    let head = sign_qp(y.mul(&zeta.inv()).mul(&xi[1].inv()).mul(&xi[n - 1]), n % 2 == 1);
    // x_j multiplies xi_{n-j+1} / xi_{n-j+2}
    let ratios: Vec<Qp> = (2..n).map(|j| xi[n - j].mul(&xi[n - j + 1].inv())).collect();
    let sets = t.v.iter().map(|&v| lambda_set(p, v)).collect::<Result<Vec<_>>>()?;
    let mut acc = Complex64::new(0.0, 0.0);
    let mut idx = vec![0usize; sets.len()];
    loop {
        let mut inner = head;
        let mut phase = Complex64::new(1.0, 0.0);
        for (j, set) in sets.iter().enumerate() {
            let x = set[idx[j]];
            inner = inner.mul(&x.inv());
            phase *= psi_qp(&ratios[j].mul(&x));
        }
        acc += phase * psi_qp(&inner);
        let mut k = 0;
        loop {
            if k == idx.len() {
                return Ok(acc * pref);
            }
            idx[k] += 1;
            if idx[k] < sets[k].len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// `Kl_p(y, t; zeta, xi)`, with the branch chosen by `|zeta xi_1^{-1} xi_2|`.
pub fn kl_local(y: &Qp, t: &ToralElement, sm: &ShiftModulus) -> Result<Complex64> {
    sm.check(t.p)?;
    kl_local_with(y, t, &sm.effective_zeta(), &sm.xi)
}

/// Diagonal entries of `delta(t; zeta, xi)`, given by valuation and unit class.
pub fn delta_matrix(t: &ToralElement, sm: &ShiftModulus) -> Result<Vec<Qp>> {
    sm.check(t.p)?;
    delta_with(t, &sm.effective_zeta(), &sm.xi)
}

fn delta_with(t: &ToralElement, zeta: &Qp, xi: &[Qp]) -> Result<Vec<Qp>> {
    let n = xi.len();
    if t.v.len() + 2 != n {
        return Err(Error::InvalidArgument(format!("toral element of size {} for n = {n}", t.v.len())));
    }
    let p = t.p;
    let mut d = Vec::with_capacity(n);
    d.push(Qp { val: -t.det_val(), ..Qp::one(p) }.mul(&zeta.inv()).mul(&xi[1].inv()));
    for (i, &v) in t.v.iter().enumerate() {
        d.push(Qp { val: v, ..Qp::one(p) }.mul(&xi[n - 1 - i].inv()));
    }
    d.push(zeta.mul(&xi[0].inv()));
    Ok(d)
}

/// Window of toral valuations allowed by the Whittaker support: `v_i` ranges over `lo[i]..=0`.
pub fn support_window(sm: &ShiftModulus) -> Vec<i32> {
    let n = sm.n();
    let z = sm.effective_zeta();
    // v(t_i) - v(xi_{n-i+2}) >= v(zeta) - v(xi_1)
    (2..n).map(|i| (z.val - sm.xi[0].val + sm.xi[n - i + 1].val).min(0)).collect()
}

/// Whether `v(xi_i) >= v(xi_{i+1})` for `2 <= i <= n-1`; the expansion vanishes otherwise.
pub fn shift_is_dominant(sm: &ShiftModulus) -> bool {
    (1..sm.n() - 1).all(|i| sm.xi[i].val >= sm.xi[i + 1].val)
}

/// `sum_t Kl(y, t; zeta, xi) W~(a(y) delta(t))` over the toral window, with the number of nonzero terms.
pub fn hk_closed_form(y: &Qp, sm: &ShiftModulus, dual: &SatakeParams) -> Result<(Complex64, usize)> {
    hk_closed_form_window(y, sm, dual, &support_window(sm))
}

/// As [`hk_closed_form`] with an explicit lower window `lo`.
pub fn hk_closed_form_window(y: &Qp, sm: &ShiftModulus, dual: &SatakeParams, lo: &[i32]) -> Result<(Complex64, usize)> {
    let p = dual.p;
    sm.check(p)?;
    let n = sm.n();
    if dual.n() != n {
        return Err(Error::InvalidArgument(format!("Satake data of rank {} for n = {n}", dual.n())));
    }
    if lo.len() + 2 != n {
        return Err(Error::InvalidArgument("window has the wrong length".into()));
    }
    if !shift_is_dominant(sm) {
        return Ok((Complex64::new(0.0, 0.0), 0));
    }
    let zeta = sm.effective_zeta();
    let mut v = lo.to_vec();
    let mut acc = Complex64::new(0.0, 0.0);
    let mut terms = 0usize;
    loop {
        let t = ToralElement::new(p, v.clone())?;
        let d = delta_with(&t, &zeta, &sm.xi)?;
        let mut lambda: Vec<i64> = d.iter().map(|x| x.val as i64).collect();
        lambda[0] += y.val as i64;
        if crate::local_reps::is_dominant(&lambda) {
            let w = shintani_whittaker(&lambda, dual);
            if w.norm() > 0.0 {
                acc += kl_local_with(y, &t, &zeta, &sm.xi)? * w;
                terms += 1;
            }
        }
        let mut k = 0;
        loop {
            if k == v.len() {
                return Ok((acc, terms));
            }
            v[k] += 1;
            if v[k] <= 0 {
                break;
            }
            v[k] = lo[k];
            k += 1;
        }
    }
}

fn qp_to_rat(x: &Qp) -> BigRational {
    let pv = BigRational::from_integer(BigInt::from(x.p).pow(x.val.unsigned_abs()));
    let u = BigRational::new(BigInt::from(x.num), BigInt::from(x.den));
    if x.val >= 0 {
        u * pv
    } else {
        u / pv
    }
}

fn rat_val(x: &BigRational, p: u64) -> Option<i32> {
    if x.is_zero() {
        return None;
    }
    let bp = BigInt::from(p);
    let mut v = 0i32;
    let (mut n, mut d) = (x.numer().clone(), x.denom().clone());
    while (&n % &bp).is_zero() {
        n /= &bp;
        v += 1;
    }
    while (&d % &bp).is_zero() {
        d /= &bp;
        v -= 1;
    }
    Some(v)
}

fn psi_rat(x: &BigRational, p: u64) -> Complex64 {
    let v = match rat_val(x, p) {
        None => return Complex64::new(1.0, 0.0),
        Some(v) if v >= 0 => return Complex64::new(1.0, 0.0),
        Some(v) => v,
    };
    let k = (-v) as u32;
    let pk = BigInt::from(p).pow(k);
    // x p^k = a / b with b prime to p
    let scaled = x * BigRational::from_integer(pk.clone());
    let b = scaled.denom().mod_floor_pos(&pk);
    let a = scaled.numer().mod_floor_pos(&pk);
    let r = (a * b.modinv(&pk).expect("denominator prime to p")).mod_floor_pos(&pk);
    let r: i128 = r.try_into().expect("residue fits");
    let m: i128 = pk.try_into().expect("modulus fits");
    e_ratio(r, m as u128)
}

trait ModFloorPos {
    fn mod_floor_pos(&self, m: &BigInt) -> BigInt;
}

impl ModFloorPos for BigInt {
    fn mod_floor_pos(&self, m: &BigInt) -> BigInt {
        let r = self % m;
        if r.is_negative() {
            r + m
        } else {
            r
        }
    }
}

type Mat = Vec<Vec<BigRational>>;

fn mat_mul(a: &Mat, b: &Mat) -> Mat {
    let n = a.len();
    (0..n).map(|i| (0..n).map(|j| (0..n).fold(BigRational::zero(), |s, k| s + &a[i][k] * &b[k][j])).collect()).collect()
}

fn identity(n: usize) -> Mat {
    (0..n).map(|i| (0..n).map(|j| if i == j { BigRational::one() } else { BigRational::zero() }).collect()).collect()
}

/// Column reduction `g k = b` with `k` in `GL_n(Z_p)` and `b` upper triangular.
fn iwasawa(mut g: Mat, p: u64) -> Mat {
    let n = g.len();
    for r in (0..n).rev() {
        let c = (0..=r).filter_map(|j| rat_val(&g[r][j], p).map(|v| (v, j))).min().expect("matrix is invertible").1;
        for row in g.iter_mut() {
            row.swap(c, r);
        }
        for j in 0..r {
            if g[r][j].is_zero() {
                continue;
            }
            let f = &g[r][j] / &g[r][r];
            for i in 0..n {
                let delta = &f * &g[i][r];
                g[i][j] -= delta;
            }
        }
    }
    g
}

/// `W~(g)` for the spherical vector of the contragredient with Satake data `dual`.
fn whittaker_dual(g: Mat, dual: &SatakeParams) -> Complex64 {
    let p = dual.p;
    let b = iwasawa(g, p);
    let n = b.len();
    let lambda: Vec<i64> = (0..n).map(|i| rat_val(&b[i][i], p).unwrap() as i64).collect();
    if !crate::local_reps::is_dominant(&lambda) {
        return Complex64::new(0.0, 0.0);
    }
    let s = (0..n - 1).fold(BigRational::zero(), |s, i| s + &b[i][i + 1] / &b[i + 1][i + 1]);
    psi_rat(&-s, p) * shintani_whittaker(&lambda, dual)
}

/// The right factor `diag(1, w_{n-1}) n(-zeta)^T xi^{-1}`.
fn right_factor(sm: &ShiftModulus) -> Mat {
    let n = sm.n();
    let mut w = identity(n);
    for i in 1..n {
        for j in 1..n {
            w[i][j] = if i + j == n { BigRational::one() } else { BigRational::zero() };
        }
    }
    let mut u = identity(n);
    if let Some(z) = &sm.zeta {
        u[1][0] = -qp_to_rat(z);
    }
    let mut xi = identity(n);
    for (i, x) in sm.xi.iter().enumerate() {
        xi[i][i] = qp_to_rat(&x.inv());
    }
    mat_mul(&mat_mul(&w, &u), &xi)
}

struct Integrand<'a> {
    p: u64,
    y: BigRational,
    right: Mat,
    dual: &'a SatakeParams,
    n: usize,
}

impl Integrand<'_> {
    fn eval(&self, x: &[BigRational]) -> Complex64 {
        let n = self.n;
        let mut a = identity(n);
        a[0][0] = self.y.clone();
        for (i, xi) in x.iter().enumerate() {
            a[i + 1][0] = xi.clone();
        }
        whittaker_dual(mat_mul(&a, &self.right), self.dual)
    }

    /// Integral over the coordinates `x[fixed.len()..]` with `x[..fixed.len()] = fixed`.
    fn integrate(&self, fixed: &mut Vec<BigRational>, jlo: i32, tol: f64) -> Complex64 {
        if fixed.len() == self.n - 2 {
            return self.eval(fixed);
        }
        let p = self.p;
        let q = p as f64;
        let mut at = |x: BigRational| -> Complex64 {
            fixed.push(x);
            let v = self.integrate(fixed, jlo, tol);
            fixed.pop();
            v
        };
        let f0 = at(BigRational::zero());
        let mut shell = |j: i32| -> Complex64 {
            let pj = if j >= 0 {
                BigRational::from_integer(BigInt::from(p).pow(j as u32))
            } else {
                BigRational::new(BigInt::one(), BigInt::from(p).pow((-j) as u32))
            };
            let mut prev: Vec<Complex64> = Vec::new();
            let mut m = 1u32;
            loop {
                let us = units_mod(p.pow(m));
                let avg = us.iter().map(|&u| at(&pj * BigRational::from_integer(BigInt::from(u)))).sum::<Complex64>()
                    / us.len() as f64;
                prev.push(avg);
                let k = prev.len();
                if k >= 3 && (prev[k - 1] - prev[k - 2]).norm() < tol && (prev[k - 2] - prev[k - 3]).norm() < tol {
                    return avg;
                }
                if p.pow(m + 1) > 200_000 {
                    return avg;
                }
                m += 1;
            }
        };
        let mut lo = jlo;
        while shell(lo).norm() > tol {
            lo -= 2;
        }
        let mut total = Complex64::new(0.0, 0.0);
        let mut stable = 0;
        let mut j = lo;
        loop {
            let avg = shell(j);
            total += q.powi(-j) * (1.0 - 1.0 / q) * avg;
            if j > 0 && (avg - f0).norm() < tol {
                stable += 1;
            } else {
                stable = 0;
            }
            j += 1;
            if stable >= 2 {
                break;
            }
        }
        total + q.powi(-j) * f0
    }
}

/// The integral `H(y; zeta, xi)` of `W~` over `F_p^{n-2}`, by adaptive exact-cell summation.
pub fn hk_integral_bruteforce(y: &Qp, sm: &ShiftModulus, dual: &SatakeParams) -> Result<Complex64> {
    let p = dual.p;
    sm.check(p)?;
    let n = sm.n();
    if dual.n() != n || y.p != p {
        return Err(Error::InvalidArgument("inconsistent rank or prime".into()));
    }
    let spread =
        sm.zeta.map(|z| z.val.abs()).unwrap_or(0) + y.val.abs() + sm.xi.iter().map(|x| x.val.abs()).sum::<i32>();
    let f = Integrand { p, y: qp_to_rat(y), right: right_factor(sm), dual, n };
    Ok(f.integrate(&mut Vec::new(), -(spread + 4), 1e-13))
}

/// `|closed form - brute force|` at `y`.
pub fn verify_geometric_identity(y: &Qp, sm: &ShiftModulus, dual: &SatakeParams) -> Result<f64> {
    let (cf, _) = hk_closed_form(y, sm, dual)?;
    Ok((cf - hk_integral_bruteforce(y, sm, dual)?).norm())
}
