//! Modular arithmetic, Dirichlet characters, Gauss sums and classical hyper-Kloosterman sums.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// `exp(2 pi i x)`.
pub fn e(x: f64) -> Complex64 {
    let t = x - x.floor();
    Complex64::from_polar(1.0, 2.0 * PI * t)
}

/// `exp(2 pi i num/den)` with the fraction reduced exactly before the float conversion.
pub fn e_ratio(num: i128, den: u128) -> Complex64 {
    assert!(den > 0, "zero denominator");
    let r = num.rem_euclid(den as i128) as u128;
    Complex64::from_polar(1.0, 2.0 * PI * (r as f64 / den as f64))
}

pub fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.unsigned_abs(), b.unsigned_abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a as i64
}

pub fn gcd_u(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

pub fn lcm_u(a: u64, b: u64) -> u64 {
    if a == 0 || b == 0 {
        return 0;
    }
    a / gcd_u(a, b) * b
}

pub fn mod_pow(base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let m128 = m as u128;
    let mut b = (base % m) as u128;
    let mut r: u128 = 1;
    while exp > 0 {
        if exp & 1 == 1 {
            r = r * b % m128;
        }
        b = b * b % m128;
        exp >>= 1;
    }
    r as u64
}

/// Inverse of `a` modulo `m` in `[0, m)`. Modulo 1 every residue inverts to 0.
pub fn mod_inv(a: i64, m: i64) -> Option<i64> {
    assert!(m >= 1, "modulus must be positive");
    if m == 1 {
        return Some(0);
    }
    let (mut old_r, mut r) = (a.rem_euclid(m) as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    if old_r != 1 {
        return None;
    }
    Some(old_s.rem_euclid(m as i128) as i64)
}

/// Prime factorisation by trial division, primes ascending.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n.is_multiple_of(p) {
            let mut k = 0;
            while n.is_multiple_of(p) {
                n /= p;
                k += 1;
            }
            out.push((p, k));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn is_prime(n: u64) -> bool {
    n >= 2 && factorize(n).len() == 1 && factorize(n)[0].1 == 1
}

pub fn euler_phi(n: u64) -> u64 {
    factorize(n).iter().fold(n, |acc, &(p, _)| acc / p * (p - 1))
}

pub fn divisors(n: u64) -> Vec<u64> {
    let mut ds = vec![1u64];
    for (p, k) in factorize(n) {
        let len = ds.len();
        let mut pk = 1;
        for _ in 0..k {
            pk *= p;
            for i in 0..len {
                ds.push(ds[i] * pk);
            }
        }
    }
    ds.sort_unstable();
    ds
}

/// p-adic valuation of a nonzero integer.
pub fn valuation(n: i64, p: u64) -> u32 {
    assert!(n != 0, "valuation of zero");
    let mut n = n.unsigned_abs();
    let mut v = 0;
    while n.is_multiple_of(p) {
        n /= p;
        v += 1;
    }
    v
}

pub fn units_mod(m: u64) -> Vec<u64> {
    (0..m.max(1)).filter(|&x| gcd_u(x, m) == 1).collect()
}

const NO_LOG: u32 = u32::MAX;

#[derive(Debug)]
struct PrimePart {
    p: u64,
    k: u32,
    pk: u64,
    offset: usize,
    orders: Vec<u64>,
    gens: Vec<u64>,
    // discrete logs of every residue mod p^k; NO_LOG marks non-units
    logs: Vec<[u32; 2]>,
}

/// The group `(Z/NZ)^x` as a product of cyclic factors, one or two per prime power.
#[derive(Debug)]
pub struct UnitGroup {
    modulus: u64,
    parts: Vec<PrimePart>,
    generators: Vec<u64>,
    orders: Vec<u64>,
    exponent: u64,
}

fn primitive_root_odd(p: u64) -> u64 {
    let fs: Vec<u64> = factorize(p - 1).iter().map(|&(q, _)| q).collect();
    let mut g = 2;
    loop {
        if fs.iter().all(|&q| mod_pow(g, (p - 1) / q, p) != 1) {
            // a root mod p that fails mod p^2 is repaired by adding p
            if mod_pow(g, p - 1, p * p) == 1 {
                return g + p;
            }
            return g;
        }
        g += 1;
    }
}

fn crt_lift(local: u64, pk: u64, n: u64) -> u64 {
    let rest = n / pk;
    if rest == 1 {
        return local % n;
    }
    // x = local mod pk, x = 1 mod rest
    let inv = mod_inv((rest % pk) as i64, pk as i64).unwrap() as u128;
    let t = ((local + pk - 1 % pk) as u128 % pk as u128) * inv % pk as u128;
    ((1 + rest as u128 * t) % n as u128) as u64
}

impl PrimePart {
    fn build(p: u64, k: u32, pk: u64) -> PrimePart {
        let mut logs = vec![[NO_LOG, NO_LOG]; pk as usize];
        let (orders, gens) = if p == 2 {
            match k {
                1 => {
                    logs[1] = [0, 0];
                    (vec![], vec![])
                }
                2 => {
                    logs[1] = [0, 0];
                    logs[3] = [1, 0];
                    (vec![2], vec![pk - 1])
                }
                _ => {
                    let ob = pk / 4;
                    let mut x = 1u64;
                    for b in 0..ob {
                        logs[x as usize] = [0, b as u32];
                        logs[(pk - x) as usize] = [1, b as u32];
                        x = x * 5 % pk;
                    }
                    (vec![2, ob], vec![pk - 1, 5])
                }
            }
        } else {
            let g = primitive_root_odd(p) % pk;
            let ord = pk / p * (p - 1);
            let mut x = 1u64;
            for a in 0..ord {
                logs[x as usize] = [a as u32, 0];
                x = (x as u128 * g as u128 % pk as u128) as u64;
            }
            (vec![ord], vec![g])
        };
        PrimePart { p, k, pk, offset: 0, orders, gens, logs }
    }

    fn log(&self, x: u64, out: &mut [u64]) -> bool {
        let l = self.logs[(x % self.pk) as usize];
        if l[0] == NO_LOG {
            return false;
        }
        match self.orders.len() {
            0 => {}
            1 => out[0] = l[0] as u64,
            _ => {
                out[0] = l[0] as u64;
                out[1] = l[1] as u64;
            }
        }
        true
    }

    /// Exponent of the conductor of the component with exponents `e`.
    fn conductor_exp(&self, e: &[u64]) -> u32 {
        if e.iter().all(|&x| x == 0) {
            return 0;
        }
        if self.p == 2 {
            if self.k == 2 || e[1] == 0 {
                return 2;
            }
            let ob = self.orders[1];
            // 1 + 2^j is generated by 5^(2^(j-2))
            (3..=self.k).find(|&j| (e[1] as u128 * (1u128 << (j - 2))).is_multiple_of(ob as u128)).unwrap()
        } else {
            let ord = self.orders[0];
            (1..=self.k)
                .find(|&j| {
                    let phi_j = self.p.pow(j - 1) * (self.p - 1);
                    (e[0] as u128 * phi_j as u128).is_multiple_of(ord as u128)
                })
                .unwrap()
        }
    }
}

impl UnitGroup {
    fn build(n: u64) -> UnitGroup {
        assert!(n >= 1, "modulus must be positive");
        let mut parts = Vec::new();
        let mut generators = Vec::new();
        let mut orders = Vec::new();
        for (p, k) in factorize(n) {
            let pk = p.pow(k);
            let mut part = PrimePart::build(p, k, pk);
            part.offset = orders.len();
            for (&g, &o) in part.gens.iter().zip(&part.orders) {
                generators.push(crt_lift(g, pk, n));
                orders.push(o);
            }
            parts.push(part);
        }
        let exponent = orders.iter().fold(1, |a, &o| lcm_u(a, o));
        UnitGroup { modulus: n, parts, generators, orders, exponent }
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// Generators lifted to residues mod N.
    pub fn generators(&self) -> &[u64] {
        &self.generators
    }

    pub fn orders(&self) -> &[u64] {
        &self.orders
    }

    pub fn order(&self) -> u64 {
        self.orders.iter().product()
    }

    /// Least common multiple of the generator orders.
    pub fn exponent(&self) -> u64 {
        self.exponent
    }

    /// Discrete logarithm vector, `None` for non-units.
    pub fn log(&self, x: i64) -> Option<Vec<u64>> {
        let r = x.rem_euclid(self.modulus as i64) as u64;
        let mut out = vec![0u64; self.orders.len()];
        for part in &self.parts {
            let n = part.orders.len();
            if !part.log(r, &mut out[part.offset..part.offset + n]) {
                return None;
            }
        }
        Some(out)
    }
}

fn group_cache() -> &'static Mutex<HashMap<u64, Arc<UnitGroup>>> {
    static CACHE: OnceLock<Mutex<HashMap<u64, Arc<UnitGroup>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Memoized unit group of `Z/NZ`.
pub fn unit_group(n: u64) -> Arc<UnitGroup> {
    let mut cache = group_cache().lock().unwrap();
    cache.entry(n).or_insert_with(|| Arc::new(UnitGroup::build(n))).clone()
}

/// A Dirichlet character stored as an exponent vector against the generators of its unit group.
#[derive(Clone)]
pub struct DirichletCharacter {
    group: Arc<UnitGroup>,
    exps: Vec<u64>,
    conductor: u64,
}

impl PartialEq for DirichletCharacter {
    fn eq(&self, other: &Self) -> bool {
        self.group.modulus == other.group.modulus && self.exps == other.exps
    }
}

impl Eq for DirichletCharacter {}

impl Hash for DirichletCharacter {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.group.modulus.hash(state);
        self.exps.hash(state);
    }
}

impl fmt::Debug for DirichletCharacter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "chi(mod {}, exps {:?}, cond {})", self.group.modulus, self.exps, self.conductor)
    }
}

impl fmt::Display for DirichletCharacter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "character mod {} with exponents {:?}", self.group.modulus, self.exps)
    }
}

impl DirichletCharacter {
    pub fn new(n: u64, exps: Vec<u64>) -> Result<Self> {
        let group = unit_group(n);
        if exps.len() != group.orders.len() {
            return Err(Error::InvalidArgument(format!("expected {} exponents for modulus {n}", group.orders.len())));
        }
        let exps: Vec<u64> = exps.iter().zip(&group.orders).map(|(e, o)| e % o).collect();
        let conductor = group
            .parts
            .iter()
            .map(|part| {
                let e = &exps[part.offset..part.offset + part.orders.len()];
                part.p.pow(part.conductor_exp(e))
            })
            .product();
        Ok(DirichletCharacter { group, exps, conductor })
    }

    pub fn trivial(n: u64) -> Self {
        let len = unit_group(n).orders.len();
        Self::new(n, vec![0; len]).unwrap()
    }

    /// Character number `index` in the mixed-radix enumeration used by [`enumerate_characters`].
    pub fn from_index(n: u64, mut index: u64) -> Result<Self> {
        let group = unit_group(n);
        if index >= group.order() {
            return Err(Error::InvalidArgument(format!("character index {index} out of range for modulus {n}")));
        }
        let mut exps = Vec::with_capacity(group.orders.len());
        for &o in &group.orders {
            exps.push(index % o);
            index /= o;
        }
        Self::new(n, exps)
    }

    pub fn index(&self) -> u64 {
        let mut idx = 0;
        for (e, o) in self.exps.iter().zip(&self.group.orders).rev() {
            idx = idx * o + e;
        }
        idx
    }

    pub fn modulus(&self) -> u64 {
        self.group.modulus
    }

    pub fn exponents(&self) -> &[u64] {
        &self.exps
    }

    pub fn group(&self) -> &Arc<UnitGroup> {
        &self.group
    }

    pub fn conductor(&self) -> u64 {
        self.conductor
    }

    pub fn is_primitive(&self) -> bool {
        self.conductor == self.group.modulus
    }

    pub fn is_trivial(&self) -> bool {
        self.exps.iter().all(|&e| e == 0)
    }

    /// `chi(x) = e(turn / exponent)`; `None` when `gcd(x, N) > 1`.
    pub fn turn(&self, x: i64) -> Option<u64> {
        let logs = self.group.log(x)?;
        let ex = self.group.exponent as u128;
        let mut t: u128 = 0;
        for ((l, e), o) in logs.iter().zip(&self.exps).zip(&self.group.orders) {
            t = (t + *l as u128 * *e as u128 % ex * (ex / *o as u128)) % ex;
        }
        Some(t as u64)
    }

    pub fn value(&self, x: i64) -> Complex64 {
        match self.turn(x) {
            Some(t) => e_ratio(t as i128, self.group.exponent as u128),
            None => Complex64::new(0.0, 0.0),
        }
    }

    /// `chi(-1)` as `+1` or `-1`.
    pub fn parity(&self) -> i64 {
        if self.turn(-1).unwrap() == 0 {
            1
        } else {
            -1
        }
    }

    pub fn conj(&self) -> Self {
        let exps = self.exps.iter().zip(&self.group.orders).map(|(&e, &o)| (o - e) % o).collect();
        Self::new(self.modulus(), exps).unwrap()
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.modulus(), other.modulus(), "moduli differ");
        let exps = self.exps.iter().zip(&other.exps).map(|(a, b)| a + b).collect();
        Self::new(self.modulus(), exps).unwrap()
    }

    /// Order of the character as a group element.
    pub fn order(&self) -> u64 {
        self.exps.iter().zip(&self.group.orders).fold(1, |acc, (&e, &o)| lcm_u(acc, o / gcd_u(e, o)))
    }

    /// The character mod `m` agreeing with `self` on integers coprime to `N`; needs `conductor | m | N`.
    pub fn restrict_to(&self, m: u64) -> Result<Self> {
        let n = self.modulus();
        if m == 0 || !n.is_multiple_of(m) || !m.is_multiple_of(self.conductor) {
            return Err(Error::InvalidArgument(format!("cannot realise {self} modulo {m}")));
        }
        let target = unit_group(m);
        let ex = self.group.exponent;
        let mut exps = Vec::with_capacity(target.orders.len());
        for (&g, &o) in target.generators.iter().zip(&target.orders) {
            let mut x = g;
            while gcd_u(x, n) != 1 {
                x += m;
            }
            let t = self.turn(x as i64).unwrap();
            exps.push(t * o / ex);
        }
        Self::new(m, exps)
    }

    /// The primitive character inducing `self`.
    pub fn primitive(&self) -> Self {
        self.restrict_to(self.conductor).unwrap()
    }

    /// Lift to a multiple `m` of the modulus.
    pub fn lift_to(&self, m: u64) -> Result<Self> {
        if !m.is_multiple_of(self.modulus()) {
            return Err(Error::InvalidArgument(format!("{m} is not a multiple of {}", self.modulus())));
        }
        let target = unit_group(m);
        let ex = self.group.exponent;
        let exps = target
            .generators
            .iter()
            .zip(&target.orders)
            .map(|(&g, &o)| {
                let t = self.turn(g as i64).unwrap();
                // t * o / ex need not be integral when the new order is smaller
                debug_assert_eq!((t as u128 * o as u128) % ex as u128, 0);
                (t as u128 * o as u128 / ex as u128) as u64
            })
            .collect();
        Self::new(m, exps)
    }

    /// Components at each prime power of the modulus, as characters mod `p^k`.
    pub fn prime_components(&self) -> Vec<(u64, DirichletCharacter)> {
        self.group
            .parts
            .iter()
            .map(|part| {
                let e = self.exps[part.offset..part.offset + part.orders.len()].to_vec();
                (part.p, DirichletCharacter::new(part.pk, e).unwrap())
            })
            .collect()
    }
}

/// All `phi(N)` characters mod `N` in mixed-radix order.
pub fn enumerate_characters(n: u64) -> Vec<DirichletCharacter> {
    let order = unit_group(n).order();
    (0..order).map(|i| DirichletCharacter::from_index(n, i).unwrap()).collect()
}

pub fn primitive_characters(n: u64) -> Vec<DirichletCharacter> {
    enumerate_characters(n).into_iter().filter(|c| c.is_primitive()).collect()
}

/// `chi(p)^{-v}`, the value at a uniformizer power of the attached idele class character.
pub fn hecke_character_local_value(chi: &DirichletCharacter, p: u64, v: i64) -> Result<Complex64> {
    if chi.modulus().is_multiple_of(p) {
        return Err(Error::RamifiedPrime { p, modulus: chi.modulus() });
    }
    Ok(chi.value(p as i64).powi(-(v as i32)))
}

/// `tau(chi) = sum_{x mod N} chi(x) e(x/N)`.
pub fn gauss_sum_dirichlet(chi: &DirichletCharacter) -> Complex64 {
    let n = chi.modulus();
    let ex = chi.group.exponent;
    let den = n as u128 * ex as u128;
    (0..n)
        .filter_map(|x| {
            chi.turn(x as i64).map(|t| e_ratio((t as u128 * n as u128 + x as u128 * ex as u128) as i128, den))
        })
        .sum()
}

/// `epsilon(1/2, chi^{-1})`: the product over primes of `tau(chi_p) / p^{c_p/2}` for the
/// components of the primitive character inducing `chi`.
pub fn epsilon_half_inverse(chi: &DirichletCharacter) -> Complex64 {
    chi.primitive()
        .prime_components()
        .iter()
        .map(|(_, c)| gauss_sum_dirichlet(c) / (c.modulus() as f64).sqrt())
        .product()
}

/// Parameters of the classical hyper-Kloosterman sum `KL(x, y; q, c, d)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KloostermanSpec {
    pub n: usize,
    pub q: u64,
    /// `(c_2, ..., c_{n-1})`
    pub c: Vec<i64>,
    /// `(d_2, ..., d_{n-1})`
    pub d: Vec<i64>,
}

impl KloostermanSpec {
    pub fn plain(n: usize, q: u64) -> Self {
        let m = n.saturating_sub(2);
        KloostermanSpec { n, q, c: vec![1; m], d: vec![1; m] }
    }

    /// Layer moduli `M_j = q c_2...c_{n-j+1} / (d_{n-1}...d_j)` for `j = 2..=n-1`, indexed by `j - 2`.
    pub fn layer_moduli(&self) -> Result<Vec<u64>> {
        let n = self.n;
        if n < 2 {
            return Err(Error::InvalidArgument("dimension must be at least 2".into()));
        }
        if self.q == 0 {
            return Err(Error::InvalidArgument("modulus q must be positive".into()));
        }
        if self.c.len() != n - 2 || self.d.len() != n - 2 {
            return Err(Error::InvalidArgument(format!("expected {} shifts and divisors", n - 2)));
        }
        if self.c.iter().chain(&self.d).any(|&x| x == 0) {
            return Err(Error::InvalidArgument("shifts and divisors must be nonzero".into()));
        }
        let mut out = vec![0u64; n - 2];
        for j in (2..n).rev() {
            let num: i128 = (2..=n - j + 1).fold(self.q as i128, |a, i| a * self.c[i - 2] as i128);
            let den: i128 = (j..n).fold(1i128, |a, i| a * self.d[i - 2] as i128);
            if num % den != 0 || num / den <= 0 {
                return Err(Error::InvalidChain(format!("layer {j}: {num}/{den} is not a positive integer")));
            }
            out[j - 2] = (num / den) as u64;
        }
        Ok(out)
    }
}

/// The nested sum `KL(x, y; q, c, d)` with its number of terms. For `n = 2` the value is the
/// degenerate local product of `kloosterman_geometric::kl_degenerate`.
pub fn kloosterman_classical(spec: &KloostermanSpec, x: i64, y: i64) -> Result<(Complex64, u64)> {
    let moduli = spec.layer_moduli()?;
    let n = spec.n;
    if n == 2 {
        let v = crate::kloosterman_geometric::kl_degenerate(x as i128 * y as i128, spec.q)?;
        return Ok((v, 1));
    }
    let units: Vec<Vec<u64>> = moduli.iter().map(|&m| units_mod(m)).collect();
    let sign: i128 = if n.is_multiple_of(2) { 1 } else { -1 };
    let q = spec.q;
    let d_top = spec.d[n - 3] as i128;
    let mut total = Complex64::new(0.0, 0.0);
    let mut terms = 0u64;
    // alpha_j runs over units mod M_j for j = n-1 down to 2
    for &a_top in &units[n - 3] {
        let p0 = (sign * x as i128 * d_top % q as i128 * a_top as i128).rem_euclid(q as i128);
        let phase0 = p0 as f64 / q as f64;
        nest(spec, &moduli, &units, n - 1, a_top, y, phase0, &mut total, &mut terms)?;
    }
    Ok((total, terms))
}

#[allow(clippy::too_many_arguments)]
fn nest(
    spec: &KloostermanSpec,
    moduli: &[u64],
    units: &[Vec<u64>],
    j: usize,
    alpha: u64,
    y: i64,
    phase: f64,
    total: &mut Complex64,
    terms: &mut u64,
) -> Result<()> {
    let m = moduli[j - 2];
    let inv = mod_inv(alpha as i64, m as i64)
        .ok_or(Error::NotInvertible { residue: alpha as i64, modulus: m as i64 })? as i128;
    if j == 2 {
        let r = (y as i128 % m as i128 * inv).rem_euclid(m as i128);
        *total += e(phase + r as f64 / m as f64);
        *terms += 1;
        return Ok(());
    }
    let dj = spec.d[j - 3] as i128;
    for &a in &units[j - 3] {
        let r = (dj * a as i128 % m as i128 * inv).rem_euclid(m as i128);
        nest(spec, moduli, units, j - 1, a, y, phase + r as f64 / m as f64, total, terms)?;
    }
    Ok(())
}

/// The twisted root-number sum
/// `sum_{chi primitive mod l} chi(-1)^{n-1} chi(m abar q) eps(1/2, f x chi) eps(1/2, chi^{-1})`.
pub fn s_f_sum(
    l: u64,
    m: i64,
    a: i64,
    q: i64,
    n: usize,
    twisted_root_numbers: &HashMap<DirichletCharacter, Complex64>,
) -> Result<Complex64> {
    let abar = mod_inv(a, l as i64).ok_or(Error::NotInvertible { residue: a, modulus: l as i64 })?;
    if gcd(q, l as i64) != 1 {
        return Err(Error::InvalidArgument(format!("q = {q} is not coprime to {l}")));
    }
    let arg = (m as i128 * abar as i128 % l as i128 * q as i128).rem_euclid(l.max(1) as i128) as i64;
    let mut s = Complex64::new(0.0, 0.0);
    for chi in primitive_characters(l) {
        let root = twisted_root_numbers.get(&chi).ok_or_else(|| Error::MissingRootNumber(chi.to_string()))?;
        let sign = if n.is_multiple_of(2) { chi.parity() as f64 } else { 1.0 };
        s += chi.value(arg) * sign * root * epsilon_half_inverse(&chi);
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn unit_group_orders() {
        assert_eq!(unit_group(1).order(), 1);
        assert_eq!(unit_group(8).orders(), &[2, 2]);
        let g = unit_group(45);
        assert_eq!(g.order(), 24);
        // brute-force closure of the generators
        let mut seen = std::collections::HashSet::new();
        seen.insert(1u64);
        let mut frontier = vec![1u64];
        while let Some(x) = frontier.pop() {
            for &gen in g.generators() {
                let y = x * gen % 45;
                if seen.insert(y) {
                    frontier.push(y);
                }
            }
        }
        assert_eq!(seen.len(), 24);
        for (&gen, &o) in g.generators().iter().zip(g.orders()) {
            assert_eq!(mod_pow(gen, o, 45), 1);
            assert!((1..o).all(|k| mod_pow(gen, k, 45) != 1));
        }
    }

    fn brute_conductor(chi: &DirichletCharacter) -> u64 {
        let n = chi.modulus();
        divisors(n)
            .into_iter()
            .find(|&f| {
                (0..n as i64)
                    .filter(|&x| gcd(x, n as i64) == 1 && (x - 1) % f as i64 == 0)
                    .all(|x| chi.turn(x) == Some(0))
            })
            .unwrap()
    }

    #[test]
    fn conductors_match_brute_force() {
        for n in 1..=200u64 {
            for chi in enumerate_characters(n) {
                assert_eq!(chi.conductor(), brute_conductor(&chi), "{chi:?}");
            }
        }
    }

    #[test]
    fn enumeration_examples() {
        assert_eq!(enumerate_characters(1).len(), 1);
        let six = enumerate_characters(6);
        assert_eq!(six.len(), 2);
        assert_eq!(six.iter().find(|c| !c.is_trivial()).unwrap().conductor(), 3);
        let five = enumerate_characters(5);
        assert_eq!(five.iter().filter(|c| c.is_primitive()).count(), 3);
    }

    #[test]
    fn orthogonality() {
        for n in 1..=60u64 {
            let chars = enumerate_characters(n);
            let us = units_mod(n);
            for &x in &us {
                for &y in &us {
                    let s: Complex64 = chars.iter().map(|c| c.value(x as i64) * c.value(y as i64).conj()).sum();
                    let expect = if x == y { euler_phi(n) as f64 } else { 0.0 };
                    assert!(close(s, Complex64::new(expect, 0.0), 1e-10));
                }
            }
        }
    }

    #[test]
    fn hecke_local_values() {
        let chi4 = enumerate_characters(4).into_iter().find(|c| !c.is_trivial()).unwrap();
        assert!(close(hecke_character_local_value(&chi4, 3, 1).unwrap(), (-1.0).into(), 1e-14));
        assert!(close(hecke_character_local_value(&chi4, 5, 0).unwrap(), 1.0.into(), 1e-14));
        assert!(hecke_character_local_value(&chi4, 2, 1).is_err());
    }

    #[test]
    fn gauss_sums() {
        assert!(close(gauss_sum_dirichlet(&DirichletCharacter::trivial(1)), 1.0.into(), 1e-14));
        assert!(close(gauss_sum_dirichlet(&DirichletCharacter::trivial(7)), (-1.0).into(), 1e-12));
        for n in 2..=100u64 {
            for chi in primitive_characters(n) {
                let t = gauss_sum_dirichlet(&chi);
                assert!((t.norm() - (n as f64).sqrt()).abs() < 1e-10);
                let prod = t * gauss_sum_dirichlet(&chi.conj());
                assert!(close(prod, Complex64::new((chi.parity() * n as i64) as f64, 0.0), 1e-9));
            }
        }
    }

    #[test]
    fn restriction_and_lift_agree_on_units() {
        for n in [12u64, 36, 40, 45, 64, 81] {
            for chi in enumerate_characters(n) {
                let prim = chi.primitive();
                for x in units_mod(n) {
                    assert!(close(prim.value(x as i64), chi.value(x as i64), 1e-12));
                }
                let up = prim.lift_to(n).unwrap();
                assert_eq!(up, chi);
            }
        }
    }

    fn textbook_kloosterman(a: i64, b: i64, q: u64) -> Complex64 {
        units_mod(q)
            .into_iter()
            .map(|x| {
                let xi = mod_inv(x as i64, q as i64).unwrap();
                e_ratio(a as i128 * x as i128 + b as i128 * xi as i128, q as u128)
            })
            .sum()
    }

    #[test]
    fn kloosterman_examples() {
        let (v, _) = kloosterman_classical(&KloostermanSpec::plain(3, 1), 3, 4).unwrap();
        assert!(close(v, 1.0.into(), 1e-14));
        let (v, _) = kloosterman_classical(&KloostermanSpec::plain(3, 5), -1, 1).unwrap();
        assert!((v.re - 0.381966011250105).abs() < 1e-12 && v.im.abs() < 1e-12);
        for x in -3..3 {
            for y in -3..3 {
                let (v, _) = kloosterman_classical(&KloostermanSpec::plain(3, 2), x, y).unwrap();
                let s = if (x + y).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                assert!(close(v, s.into(), 1e-12));
            }
        }
    }

    #[test]
    fn kloosterman_matches_textbook_sum() {
        for q in 1..=40u64 {
            for x in 0..q as i64 {
                for y in 0..q as i64 {
                    let (v, _) = kloosterman_classical(&KloostermanSpec::plain(3, q), x, y).unwrap();
                    assert!(close(v, textbook_kloosterman(-x, y, q), 1e-9));
                }
            }
        }
    }

    #[test]
    fn rejects_broken_chain() {
        let spec = KloostermanSpec { n: 3, q: 5, c: vec![1], d: vec![3] };
        assert!(matches!(kloosterman_classical(&spec, 1, 1), Err(Error::InvalidChain(_))));
        let spec = KloostermanSpec { n: 4, q: 6, c: vec![2, 1], d: vec![4, 3] };
        assert!(spec.layer_moduli().is_ok());
    }

    #[test]
    fn four_dimensional_nesting_by_brute_force() {
        // n = 4: alpha_3 mod q c_2 / d_3, alpha_2 mod q c_2 c_3 / (d_3 d_2)
        let spec = KloostermanSpec { n: 4, q: 6, c: vec![2, 3], d: vec![3, 4] };
        let (m3, m2) = (6 * 2 / 4, 6 * 2 * 3 / (4 * 3));
        let (x, y) = (5i64, 7i64);
        let mut s = Complex64::new(0.0, 0.0);
        for a3 in units_mod(m3) {
            for a2 in units_mod(m2) {
                let i3 = mod_inv(a3 as i64, m3 as i64).unwrap();
                let i2 = mod_inv(a2 as i64, m2 as i64).unwrap();
                let ph = (x * 4 * a3 as i64) as f64 / 6.0
                    + (3 * a2 as i64 * i3) as f64 / m3 as f64
                    + (y * i2) as f64 / m2 as f64;
                s += e(ph);
            }
        }
        let (v, terms) = kloosterman_classical(&spec, x, y).unwrap();
        assert!(close(v, s, 1e-10));
        assert_eq!(terms, euler_phi(m3) * euler_phi(m2));
    }

    #[test]
    fn s_f_examples() {
        let mut roots = HashMap::new();
        roots.insert(DirichletCharacter::trivial(1), Complex64::new(0.6, 0.8));
        let v = s_f_sum(1, 7, 1, 3, 3, &roots).unwrap();
        assert!(close(v, Complex64::new(0.6, 0.8), 1e-14));

        let mut roots = HashMap::new();
        for chi in primitive_characters(9) {
            roots.insert(chi, Complex64::new(1.0, 0.0));
        }
        assert_eq!(roots.len(), 4);
        let (m, a, q, n) = (4i64, 2i64, 5i64, 3usize);
        let abar = mod_inv(a, 9).unwrap();
        let mut direct = Complex64::new(0.0, 0.0);
        for chi in primitive_characters(9) {
            let tau = gauss_sum_dirichlet(&chi);
            direct += chi.value(m * abar * q) * tau / 3.0;
        }
        let v = s_f_sum(9, m, a, q, n, &roots).unwrap();
        assert!(close(v, direct, 1e-12));
        assert!(v.norm() <= 4.0 + 1e-12);

        roots.remove(&primitive_characters(9)[0]);
        assert!(matches!(s_f_sum(9, m, a, q, n, &roots), Err(Error::MissingRootNumber(_))));
    }
}
