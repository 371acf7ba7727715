//! Local representation data at a prime: Schur polynomials, spherical Whittaker values,
//! Fourier coefficients from Satake parameters, and local L, epsilon and gamma factors.

use std::collections::{BTreeMap, HashMap};

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::arith::{factorize, gcd, DirichletCharacter};
use crate::error::{Error, Result};
use crate::padic::{enumerate_padic_characters, epsilon_half, PadicCharacter, PadicShellFunction};
use crate::series::{Laurent, RationalFunction};

fn one() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

/// Dimension of the irreducible representation of GL(n) with highest weight `lambda`.
pub fn weyl_dimension(lambda: &[i64]) -> f64 {
    let n = lambda.len();
    let mut d = 1.0;
    for i in 0..n {
        for j in i + 1..n {
            d *= (lambda[i] - lambda[j] + (j - i) as i64) as f64 / (j - i) as f64;
        }
    }
    d
}

pub fn is_dominant(lambda: &[i64]) -> bool {
    lambda.windows(2).all(|w| w[0] >= w[1])
}

/// Determinant by Gaussian elimination with partial pivoting.
pub fn det(mut a: Vec<Vec<Complex64>>) -> Complex64 {
    let n = a.len();
    let mut d = one();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].norm().partial_cmp(&a[j][col].norm()).unwrap()).unwrap();
        if a[piv][col].norm() == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if piv != col {
            a.swap(piv, col);
            d = -d;
        }
        d *= a[col][col];
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for c in col..n {
                let t = a[col][c];
                a[r][c] -= f * t;
            }
        }
    }
    d
}

fn check_dominant(lambda: &[i64], t: &[Complex64]) -> Result<()> {
    if lambda.len() != t.len() {
        return Err(Error::InvalidArgument(format!(
            "partition of length {} against {} variables",
            lambda.len(),
            t.len()
        )));
    }
    if !is_dominant(lambda) {
        return Err(Error::InvalidArgument(format!("{lambda:?} is not dominant")));
    }
    Ok(())
}

/// Splits off `(prod t)^{lambda_n}` so the remaining partition is non-negative.
fn normalise(lambda: &[i64], t: &[Complex64]) -> (Vec<i64>, Complex64) {
    let last = *lambda.last().unwrap_or(&0);
    let shifted = lambda.iter().map(|l| l - last).collect();
    let prod: Complex64 = t.iter().product();
    (shifted, prod.powi(last as i32))
}

/// `det(t_j^{lambda_i + n - i}) / prod_{i<j} (t_i - t_j)`.
pub fn schur_bialternant(lambda: &[i64], t: &[Complex64]) -> Result<Complex64> {
    check_dominant(lambda, t)?;
    let n = t.len();
    if n == 0 {
        return Ok(one());
    }
    let (lam, factor) = normalise(lambda, t);
    let num = det((0..n).map(|i| (0..n).map(|j| t[j].powi((lam[i] + (n - 1 - i) as i64) as i32)).collect()).collect());
    let mut vdm = one();
    for i in 0..n {
        for j in i + 1..n {
            vdm *= t[i] - t[j];
        }
    }
    Ok(factor * num / vdm)
}

/// Complete homogeneous symmetric polynomials `h_0..=h_k`.
pub fn complete_homogeneous(k: usize, t: &[Complex64]) -> Vec<Complex64> {
    let mut h = vec![Complex64::new(0.0, 0.0); k + 1];
    h[0] = one();
    for &x in t {
        for j in 1..=k {
            let prev = h[j - 1];
            h[j] += x * prev;
        }
    }
    h
}

/// `det(h_{lambda_i - i + j})`.
pub fn schur_jacobi_trudi(lambda: &[i64], t: &[Complex64]) -> Result<Complex64> {
    check_dominant(lambda, t)?;
    if t.is_empty() {
        return Ok(one());
    }
    let (lam, factor) = normalise(lambda, t);
    let l = lam.len();
    let top = (lam[0] as usize) + l;
    let h = complete_homogeneous(top, t);
    let hk = |k: i64| if k < 0 { Complex64::new(0.0, 0.0) } else { h[k as usize] };
    let m = (0..l).map(|i| (0..l).map(|j| hk(lam[i] - i as i64 + j as i64)).collect()).collect();
    Ok(factor * det(m))
}

/// Sum over semistandard tableaux of shape `lambda` with entries in `1..=n`.
pub fn schur_tableaux(lambda: &[i64], t: &[Complex64]) -> Result<Complex64> {
    check_dominant(lambda, t)?;
    if t.is_empty() {
        return Ok(one());
    }
    let (lam, factor) = normalise(lambda, t);
    let size: i64 = lam.iter().sum();
    if size > 12 {
        return Err(Error::InvalidArgument(format!("tableau enumeration limited to |lambda| <= 12, got {size}")));
    }
    let shape: Vec<usize> = lam.iter().map(|&x| x as usize).collect();
    let mut grid: Vec<Vec<usize>> = shape.iter().map(|&r| vec![0; r]).collect();
    let mut total = Complex64::new(0.0, 0.0);
    fill(&shape, &mut grid, 0, 0, t, one(), &mut total);
    Ok(factor * total)
}

fn fill(
    shape: &[usize],
    grid: &mut Vec<Vec<usize>>,
    r: usize,
    c: usize,
    t: &[Complex64],
    weight: Complex64,
    total: &mut Complex64,
) {
    if r == shape.len() || shape[r] == 0 {
        *total += weight;
        return;
    }
    let (nr, nc) = if c + 1 == shape[r] { (r + 1, 0) } else { (r, c + 1) };
    let lo_row = if c > 0 { grid[r][c - 1] } else { 1 };
    let lo_col = if r > 0 { grid[r - 1][c] + 1 } else { 1 };
    for x in lo_row.max(lo_col)..=t.len() {
        grid[r][c] = x;
        fill(shape, grid, nr, nc, t, weight * t[x - 1], total);
    }
}

/// `s_lambda(t)` by the bialternant when the entries are well separated, otherwise by Jacobi-Trudi.
pub fn schur(lambda: &[i64], t: &[Complex64]) -> Result<Complex64> {
    let scale = t.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let sep = (0..t.len())
        .flat_map(|i| (i + 1..t.len()).map(move |j| (i, j)))
        .map(|(i, j)| (t[i] - t[j]).norm())
        .fold(f64::INFINITY, f64::min);
    if sep > 1e-3 * scale {
        schur_bialternant(lambda, t)
    } else {
        schur_jacobi_trudi(lambda, t)
    }
}

/// Satake parameters `mu_1..mu_n` at a prime.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SatakeParams {
    pub p: u64,
    pub mu: Vec<Complex64>,
}

impl SatakeParams {
    pub fn new(p: u64, mu: Vec<Complex64>) -> Result<Self> {
        if mu.iter().any(|z| z.norm() == 0.0 || !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidArgument("Satake parameters must be finite and nonzero".into()));
        }
        Ok(SatakeParams { p, mu })
    }

    pub fn n(&self) -> usize {
        self.mu.len()
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.mu.iter().all(|z| (z.norm() - 1.0).abs() <= tol)
    }

    pub fn inverse(&self) -> Self {
        SatakeParams { p: self.p, mu: self.mu.iter().map(|z| 1.0 / z).collect() }
    }

    /// Unitary parameters with prescribed product.
    pub fn random_unitary<R: Rng>(p: u64, n: usize, product: Complex64, rng: &mut R) -> Self {
        let mut mu: Vec<Complex64> =
            (0..n).map(|_| Complex64::from_polar(1.0, rng.gen_range(0.0..std::f64::consts::TAU))).collect();
        let cur: Complex64 = mu.iter().product();
        mu[0] *= product / cur;
        SatakeParams { p, mu }
    }
}

/// `W(p^lambda) = p^{-sum_i lambda_i ((n+1)/2 - i)} s_lambda(mu)` for dominant `lambda`, zero otherwise.
pub fn shintani_whittaker(lambda: &[i64], mu: &SatakeParams) -> Complex64 {
    if !is_dominant(lambda) {
        return Complex64::new(0.0, 0.0);
    }
    let n = lambda.len() as f64;
    let expo: f64 = lambda.iter().enumerate().map(|(i, &l)| l as f64 * ((n + 1.0) / 2.0 - (i + 1) as f64)).sum();
    (mu.p as f64).powf(-expo) * schur(lambda, &mu.mu).unwrap()
}

/// Kirillov restriction `y -> W(a(y))` of the spherical vector, on shells `0..=v_max`.
pub fn spherical_kirillov(mu: &SatakeParams, v_max: i32) -> PadicShellFunction {
    let n = mu.n();
    PadicShellFunction::from_fn(mu.p, 0, 0, v_max, |v, _| {
        let mut lambda = vec![0i64; n];
        lambda[0] = v as i64;
        shintani_whittaker(&lambda, mu)
    })
}

/// `y -> W~(a(y))` for the spherical vector of the contragredient.
pub fn dual_spherical_kirillov(mu: &SatakeParams, v_max: i32) -> PadicShellFunction {
    spherical_kirillov(&mu.inverse(), v_max)
}

/// Satake parameters at finitely many primes.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct SatakeModel {
    pub n: usize,
    pub params: BTreeMap<u64, SatakeParams>,
}

impl SatakeModel {
    pub fn new(n: usize) -> Self {
        SatakeModel { n, params: BTreeMap::new() }
    }

    pub fn insert(&mut self, sp: SatakeParams) -> Result<()> {
        if sp.n() != self.n {
            return Err(Error::InvalidArgument(format!("expected {} parameters at {}", self.n, sp.p)));
        }
        self.params.insert(sp.p, sp);
        Ok(())
    }

    pub fn inverse(&self) -> Self {
        SatakeModel { n: self.n, params: self.params.iter().map(|(&p, s)| (p, s.inverse())).collect() }
    }
}

/// `A_f(m_1, ..., m_{n-1})` from Satake data; signs of the entries are ignored.
pub fn hecke_coefficient(model: &SatakeModel, m: &[i64]) -> Result<Complex64> {
    let n = model.n;
    if m.len() + 1 != n {
        return Err(Error::InvalidArgument(format!("expected {} indices", n - 1)));
    }
    if m.contains(&0) {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let mut primes: Vec<u64> =
        m.iter().flat_map(|&x| factorize(x.unsigned_abs()).into_iter().map(|(p, _)| p)).collect();
    primes.sort_unstable();
    primes.dedup();
    let mut out = one();
    for p in primes {
        let sp =
            model.params.get(&p).ok_or_else(|| Error::MissingCoefficient(format!("no Satake parameters at {p}")))?;
        let k: Vec<i64> = m.iter().map(|&x| crate::arith::valuation(x, p) as i64).collect();
        let mut lambda = vec![0i64; n];
        for i in (0..n - 1).rev() {
            lambda[i] = lambda[i + 1] + k[i];
        }
        out *= schur(&lambda, &sp.mu)?;
    }
    Ok(out)
}

/// `A_{f^iota}(m) = chi(m_1...m_{n-1}) A_f(m_{n-1}, ..., m_1)`.
pub fn dual_coefficient(model: &SatakeModel, chi: &DirichletCharacter, m: &[i64]) -> Result<Complex64> {
    let prod: i128 = m.iter().map(|&x| x as i128).product();
    let n = chi.modulus() as i128;
    let r = (prod % n) as i64;
    if gcd(r, n as i64) != 1 && n > 1 {
        return Err(Error::InvalidArgument(format!("{m:?} is not coprime to {n}")));
    }
    let rev: Vec<i64> = m.iter().rev().copied().collect();
    Ok(chi.value(r) * hecke_coefficient(model, &rev)?)
}

/// The abstract local model with trivial twisted L-factors and minimal twist conductors.
#[derive(Clone, Debug)]
pub struct TwistMinimal {
    pub p: u64,
    pub n: usize,
    pub a_pi: u32,
    pub eps0: Complex64,
    pub eps_chi: HashMap<PadicCharacter, Complex64>,
}

impl TwistMinimal {
    /// Random unit-modulus root numbers for every character with `1 <= a(chi) <= max_cond`.
    pub fn random<R: Rng>(p: u64, n: usize, a_pi: u32, max_cond: u32, rng: &mut R) -> Self {
        let mut phase = || Complex64::from_polar(1.0, rng.gen_range(0.0..std::f64::consts::TAU));
        let eps0 = phase();
        let eps_chi = enumerate_padic_characters(p, max_cond)
            .into_iter()
            .filter(|c| !c.is_trivial())
            .map(|c| (c, phase()))
            .collect();
        TwistMinimal { p, n, a_pi, eps0, eps_chi }
    }

    /// `a(chi pi) = max(a(pi), n a(chi))`.
    pub fn twist_conductor(&self, chi: &PadicCharacter) -> u32 {
        self.a_pi.max(self.n as u32 * chi.conductor_exp())
    }

    pub fn root_number(&self, chi: &PadicCharacter) -> Result<Complex64> {
        if chi.is_trivial() {
            return Ok(self.eps0);
        }
        self.eps_chi.get(chi).copied().ok_or_else(|| Error::MissingRootNumber(chi.to_string()))
    }
}

/// A generic irreducible local representation as far as the Bessel engine needs it.
#[derive(Clone, Debug)]
pub enum LocalRepresentation {
    Unramified(SatakeParams),
    TwistMinimal(TwistMinimal),
}

impl LocalRepresentation {
    pub fn p(&self) -> u64 {
        match self {
            LocalRepresentation::Unramified(s) => s.p,
            LocalRepresentation::TwistMinimal(t) => t.p,
        }
    }

    pub fn n(&self) -> usize {
        match self {
            LocalRepresentation::Unramified(s) => s.n(),
            LocalRepresentation::TwistMinimal(t) => t.n,
        }
    }

    pub fn conductor_exp(&self) -> u32 {
        match self {
            LocalRepresentation::Unramified(_) => 0,
            LocalRepresentation::TwistMinimal(t) => t.a_pi,
        }
    }

    /// The contragredient: inverse Satake parameters, or conjugate root numbers.
    pub fn dual(&self) -> Self {
        match self {
            LocalRepresentation::Unramified(s) => LocalRepresentation::Unramified(s.inverse()),
            LocalRepresentation::TwistMinimal(t) => LocalRepresentation::TwistMinimal(TwistMinimal {
                eps0: t.eps0.conj(),
                eps_chi: t.eps_chi.iter().map(|(c, e)| (c.inverse(), e.conj())).collect(),
                ..t.clone()
            }),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum RepJson {
    Unramified { p: u64, mu: Vec<Complex64> },
    TwistMinimal { p: u64, n: usize, a_pi: u32, eps0: Complex64, twists: Vec<TwistJson> },
}

/// A twisted root number keyed by the primitive character of conductor `p^conductor_exp` with
/// the given enumeration index.
#[derive(Serialize, Deserialize)]
struct TwistJson {
    conductor_exp: u32,
    index: u64,
    eps: Complex64,
}

impl LocalRepresentation {
    pub fn to_json(&self) -> serde_json::Value {
        let raw = match self {
            LocalRepresentation::Unramified(s) => RepJson::Unramified { p: s.p, mu: s.mu.clone() },
            LocalRepresentation::TwistMinimal(t) => {
                let mut twists: Vec<TwistJson> = t
                    .eps_chi
                    .iter()
                    .map(|(c, &eps)| TwistJson { conductor_exp: c.conductor_exp(), index: c.primitive().index(), eps })
                    .collect();
                twists.sort_by_key(|x| (x.conductor_exp, x.index));
                RepJson::TwistMinimal { p: t.p, n: t.n, a_pi: t.a_pi, eps0: t.eps0, twists }
            }
        };
        serde_json::to_value(raw).unwrap()
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self> {
        let raw: RepJson = serde_json::from_value(value.clone()).map_err(|e| Error::Parse(e.to_string()))?;
        match raw {
            RepJson::Unramified { p, mu } => Ok(LocalRepresentation::Unramified(SatakeParams::new(p, mu)?)),
            RepJson::TwistMinimal { p, n, a_pi, eps0, twists } => {
                let mut eps_chi = HashMap::new();
                for t in twists {
                    let chi = DirichletCharacter::from_index(p.pow(t.conductor_exp), t.index)?;
                    if !chi.is_primitive() || t.conductor_exp == 0 {
                        return Err(Error::Parse(format!("character {chi} is not primitive of positive conductor")));
                    }
                    eps_chi.insert(PadicCharacter::from_dirichlet(p, chi)?, t.eps);
                }
                Ok(LocalRepresentation::TwistMinimal(TwistMinimal { p, n, a_pi, eps0, eps_chi }))
            }
        }
    }
}

/// `L(s, chi pi)` as a rational function in `X = p^{-s}`.
pub fn l_factor(rep: &LocalRepresentation, chi: &PadicCharacter) -> RationalFunction {
    match rep {
        LocalRepresentation::Unramified(s) if chi.is_trivial() => {
            let den = s.mu.iter().fold(Laurent::one(), |acc, &m| acc * Laurent::one_minus(m, 1));
            RationalFunction::new(Laurent::one(), den)
        }
        _ => RationalFunction::constant(one()),
    }
}

/// `(epsilon(1/2, chi pi), a(chi pi))`.
pub fn epsilon_factor(rep: &LocalRepresentation, chi: &PadicCharacter) -> Result<(Complex64, u32)> {
    match rep {
        LocalRepresentation::Unramified(_) if chi.is_trivial() => Ok((one(), 0)),
        LocalRepresentation::Unramified(s) => {
            let a = chi.conductor_exp();
            let prod: Complex64 = s.mu.iter().product();
            let eps = epsilon_half(chi).powi(s.n() as i32) * prod.powi(a as i32);
            Ok((eps, s.n() as u32 * a))
        }
        LocalRepresentation::TwistMinimal(t) => Ok((t.root_number(chi)?, t.twist_conductor(chi))),
    }
}

/// `gamma(s, chi pi, psi)` as a rational function in `X = p^{-s}`.
pub fn gamma_factor(rep: &LocalRepresentation, chi: &PadicCharacter) -> Result<RationalFunction> {
    let q = rep.p() as f64;
    let (eps, a) = epsilon_factor(rep, chi)?;
    let eps_part = eps * q.powf(a as f64 / 2.0);
    let l = l_factor(rep, chi);
    // L(1 - s, chi^{-1} pi~) for unramified data is prod (1 - mu_i^{-1} p^{-1} X^{-1})^{-1}
    let dual_l_den = match rep {
        LocalRepresentation::Unramified(s) if chi.is_trivial() => {
            s.mu.iter().fold(Laurent::one(), |acc, &m| acc * Laurent::one_minus(1.0 / (m * q), -1))
        }
        _ => Laurent::one(),
    };
    Ok(RationalFunction::new(l.den.shift(a as i32).scale(eps_part), dual_l_den))
}

/// `gamma(1 - s, chi pi, psi)` in `X = p^{-s}`.
pub fn gamma_factor_reflected(rep: &LocalRepresentation, chi: &PadicCharacter) -> Result<RationalFunction> {
    Ok(gamma_factor(rep, chi)?.reflect(rep.p() as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn random_annulus(rng: &mut StdRng, n: usize) -> Vec<Complex64> {
        (0..n)
            .map(|_| Complex64::from_polar(rng.gen_range(0.5..2.0), rng.gen_range(0.0..std::f64::consts::TAU)))
            .collect()
    }

    fn partitions(size: i64, parts: usize, max: i64) -> Vec<Vec<i64>> {
        if parts == 0 {
            return if size == 0 { vec![vec![]] } else { vec![] };
        }
        let mut out = Vec::new();
        for first in (0..=size.min(max)).rev() {
            for mut rest in partitions(size - first, parts - 1, first) {
                rest.insert(0, first);
                out.push(rest);
            }
        }
        out
    }

    #[test]
    fn representation_json_round_trip() {
        let mut rng = StdRng::seed_from_u64(21);
        let tm = TwistMinimal::random(3, 3, 4, 2, &mut rng);
        let back = LocalRepresentation::from_json(&LocalRepresentation::TwistMinimal(tm.clone()).to_json()).unwrap();
        let LocalRepresentation::TwistMinimal(b) = back else { panic!("wrong variant") };
        assert_eq!(b.eps_chi.len(), tm.eps_chi.len());
        for chi in enumerate_padic_characters(3, 2) {
            assert_eq!(b.root_number(&chi).unwrap(), tm.root_number(&chi).unwrap());
        }
        let sp = SatakeParams::random_unitary(5, 2, c(1.0), &mut rng);
        let back = LocalRepresentation::from_json(&LocalRepresentation::Unramified(sp.clone()).to_json()).unwrap();
        assert!(matches!(back, LocalRepresentation::Unramified(s) if s == sp));
        assert!(LocalRepresentation::from_json(&serde_json::json!({"type": "other"})).is_err());
    }

    #[test]
    fn schur_examples() {
        let t = vec![c(2.0), c(3.0), c(5.0)];
        assert!((schur(&[0, 0, 0], &t).unwrap() - 1.0).norm() < 1e-12);
        assert!((schur(&[1, 0, 0], &t).unwrap() - 10.0).norm() < 1e-12);
        assert!((schur(&[2, 1, 0], &[c(1.0); 3]).unwrap() - 8.0).norm() < 1e-12);
        assert!((schur_tableaux(&[2, 1, 0], &[c(1.0); 3]).unwrap() - 8.0).norm() < 1e-12);
        assert!(schur(&[0, 1, 0], &t).is_err());
    }

    #[test]
    fn three_evaluators_agree() {
        let mut rng = StdRng::seed_from_u64(7);
        for n in 1..=4usize {
            for size in 0..=6i64 {
                for lambda in partitions(size, n, size) {
                    let t = random_annulus(&mut rng, n);
                    let a = schur_bialternant(&lambda, &t).unwrap();
                    let b = schur_jacobi_trudi(&lambda, &t).unwrap();
                    let d = schur_tableaux(&lambda, &t).unwrap();
                    assert!((a - b).norm() < 1e-9 && (a - d).norm() < 1e-9, "{lambda:?}");
                }
            }
        }
    }

    #[test]
    fn shintani_support_and_normalisation() {
        let mu = SatakeParams::new(5, vec![c(0.5), Complex64::new(0.0, 1.0), c(2.0)]).unwrap();
        assert_eq!(shintani_whittaker(&[0, 1, 0], &mu), Complex64::new(0.0, 0.0));
        assert!((shintani_whittaker(&[0, 0, 0], &mu) - 1.0).norm() < 1e-14);
        let expect = (mu.mu[0] + mu.mu[1] + mu.mu[2]) / 5.0;
        assert!((shintani_whittaker(&[1, 0, 0], &mu) - expect).norm() < 1e-14);
        let phi = spherical_kirillov(&mu, 4);
        assert_eq!(phi.v_min, 0);
        assert_eq!(phi.eval(-1, 1), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn hecke_examples_and_multiplicativity() {
        let mut rng = StdRng::seed_from_u64(3);
        let mut model = SatakeModel::new(3);
        for p in [2u64, 3, 5, 7] {
            model.insert(SatakeParams::random_unitary(p, 3, c(1.0), &mut rng)).unwrap();
        }
        assert!((hecke_coefficient(&model, &[1, 1]).unwrap() - 1.0).norm() < 1e-14);
        let mu = &model.params[&3].mu;
        let s: Complex64 = mu.iter().sum();
        assert!((hecke_coefficient(&model, &[3, 1]).unwrap() - s).norm() < 1e-12);
        assert_eq!(hecke_coefficient(&model, &[0, 2]).unwrap(), Complex64::new(0.0, 0.0));
        let a = hecke_coefficient(&model, &[4, 9]).unwrap();
        let b = hecke_coefficient(&model, &[25, 7]).unwrap();
        let ab = hecke_coefficient(&model, &[100, 63]).unwrap();
        assert!((a * b - ab).norm() < 1e-10);
        assert!(hecke_coefficient(&model, &[11, 1]).is_err());
        // |A(m)| <= prod_p dim V_lambda, and A(m) << prod |m_i|^{i(n-i)/2} with constant 4
        let mut worst: f64 = 0.0;
        for m1 in 1..=30i64 {
            for m2 in 1..=30i64 {
                let Ok(v) = hecke_coefficient(&model, &[m1, m2]) else { continue };
                let dims: f64 = [2i64, 3, 5, 7]
                    .iter()
                    .map(|&p| {
                        let k1 = crate::arith::valuation(m1, p as u64) as i64;
                        let k2 = crate::arith::valuation(m2, p as u64) as i64;
                        weyl_dimension(&[k1 + k2, k2, 0])
                    })
                    .product();
                assert!(v.norm() <= dims + 1e-9);
                worst = worst.max(v.norm() / (m1 * m2) as f64);
            }
        }
        assert!(worst <= 4.0);
    }

    #[test]
    fn dual_coefficients_match_inverse_parameters() {
        let mut rng = StdRng::seed_from_u64(19);
        for n in 2..=4usize {
            let chi = crate::arith::enumerate_characters(7).into_iter().find(|c| c.order() == 3).unwrap();
            let mut model = SatakeModel::new(n);
            for p in [2u64, 3, 5] {
                let central = chi.value(p as i64).conj();
                model.insert(SatakeParams::random_unitary(p, n, central, &mut rng)).unwrap();
            }
            let inv = model.inverse();
            let mut m = vec![1i64; n - 1];
            for p in [2i64, 3, 5] {
                for trial in 0..20 {
                    for (i, x) in m.iter_mut().enumerate() {
                        *x = p.pow(((trial + i * 7) % 4) as u32);
                    }
                    let lhs = dual_coefficient(&model, &chi, &m).unwrap();
                    let rhs = hecke_coefficient(&inv, &m).unwrap();
                    assert!((lhs - rhs).norm() < 1e-9, "n={n} m={m:?}");
                }
            }
            assert!(dual_coefficient(&model, &chi, &vec![7; n - 1]).is_err());
        }
    }

    #[test]
    fn local_factor_examples() {
        let triv = PadicCharacter::trivial(5);
        let rep = LocalRepresentation::Unramified(SatakeParams::new(5, vec![c(1.0)]).unwrap());
        let l = l_factor(&rep, &triv);
        assert!(l.den.max_abs_diff(&Laurent::one_minus(c(1.0), 1)) < 1e-15);
        let chi = enumerate_padic_characters(5, 1).into_iter().find(|c| !c.is_trivial()).unwrap();
        let rep2 = LocalRepresentation::Unramified(SatakeParams::new(5, vec![c(2.0), c(0.5)]).unwrap());
        assert_eq!(l_factor(&rep2, &chi), RationalFunction::constant(c(1.0)));
        assert_eq!(epsilon_factor(&rep2, &triv).unwrap(), (c(1.0), 0));
        assert_eq!(epsilon_factor(&rep2, &chi).unwrap().1, 2);

        let mut rng = StdRng::seed_from_u64(1);
        let tm = TwistMinimal::random(3, 3, 5, 2, &mut rng);
        let chis = enumerate_padic_characters(3, 2);
        let c1 = chis.iter().find(|c| c.conductor_exp() == 1).unwrap();
        let c2 = chis.iter().find(|c| c.conductor_exp() == 2).unwrap();
        let rep3 = LocalRepresentation::TwistMinimal(tm);
        assert_eq!(epsilon_factor(&rep3, c1).unwrap().1, 5);
        assert_eq!(epsilon_factor(&rep3, c2).unwrap().1, 6);
        let g = gamma_factor(&rep3, c2).unwrap();
        assert_eq!(g.num.clone().trim().c.len(), 1);
        assert_eq!(g.den, Laurent::one());
        let chi3 = enumerate_padic_characters(3, 3).into_iter().find(|c| c.conductor_exp() == 3).unwrap();
        assert!(matches!(epsilon_factor(&rep3, &chi3), Err(Error::MissingRootNumber(_))));
    }

    #[test]
    fn gamma_is_unitary_on_critical_line() {
        let mut rng = StdRng::seed_from_u64(4);
        let p = 7u64;
        let rep = LocalRepresentation::Unramified(SatakeParams::random_unitary(p, 3, c(1.0), &mut rng));
        for chi in enumerate_padic_characters(p, 1) {
            let g = gamma_factor(&rep, &chi).unwrap();
            for k in 0..10 {
                let t = 0.37 * k as f64 - 1.1;
                let x = Complex64::new(-0.5 * (p as f64).ln(), -t * (p as f64).ln()).exp();
                assert!((g.eval(x).norm() - 1.0).abs() < 1e-10);
            }
        }
    }
}
