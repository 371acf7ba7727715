//! The p-adic Bessel transform.
//!
//! For `X = q^{-s}` the transform `B` of a shell function `Phi` is characterised by
//! `sum_v X^v q^{v(n-1)/2} B_v(chi^{-1}) = chi(-1)^{n-1} gamma(1-s, chi pi) sum_v X^{-v} q^{-v(1-(n-1)/2)} Phi_v(chi)`
//! for every character `chi`, where `F_v(chi)` is the unit average of `F(u p^v) chi(u)`.

use num_complex::Complex64;

use crate::arith::units_mod;
use crate::error::{Error, Result};
use crate::local_reps::{epsilon_factor, gamma_factor_reflected, LocalRepresentation, TwistMinimal};
use crate::padic::{
    enumerate_padic_characters, epsilon_half_inverse, gauss_sum_padic, gauss_sum_progression, zeta_one, PadicCharacter,
    PadicShellFunction, Qp,
};
use crate::series::Laurent;

/// A Bessel transform request; `zeta = None` means no additive twist.
#[derive(Clone, Debug)]
pub struct BesselRequest {
    pub rep: LocalRepresentation,
    pub phi: PadicShellFunction,
    pub zeta: Option<Qp>,
    pub cutoff: i32,
}

/// `y -> psi_p(zeta y) Phi(y)`.
pub fn twist_by_modulus(phi: &PadicShellFunction, zeta: Option<&Qp>) -> PadicShellFunction {
    phi.twist_additive(zeta)
}

fn effective_zeta(zeta: Option<&Qp>) -> Option<&Qp> {
    zeta.filter(|z| z.val < 0)
}

/// Lowest shell on which the transform of a function of level at most 1 supported on `Z_p - {0}`
/// can be nonzero.
pub fn bessel_support_bound(rep: &LocalRepresentation, zeta: Option<&Qp>) -> i32 {
    let n = rep.n() as i32;
    let a = rep.conductor_exp() as i32;
    match effective_zeta(zeta) {
        None => -(n + a),
        Some(z) => {
            let m = -z.val;
            -((n - 1) * m + n + a.max(m))
        }
    }
}

/// [`bessel_support_bound`] for a function of level `level`; a level above 1 widens the character
/// range like a twist of valuation `-level`.
pub fn bessel_support_bound_level(rep: &LocalRepresentation, zeta: Option<&Qp>, level: u32) -> i32 {
    let base = bessel_support_bound(rep, zeta);
    if level <= 1 {
        return base;
    }
    let n = rep.n() as i32;
    let a = rep.conductor_exp() as i32;
    let m = (level as i32).max(effective_zeta(zeta).map(|z| -z.val).unwrap_or(0));
    base.min(-((n - 1) * m + n + a.max(m)))
}

/// `sum_v X^{-v} q^{-v(1-(n-1)/2)} F_v(chi)` for a shell function `F`.
fn mellin_weighted(phi: &PadicShellFunction, chi: &PadicCharacter, n: usize) -> Laurent {
    if phi.shells.is_empty() {
        return Laurent::zero();
    }
    let level = phi.level.max(chi.conductor_exp());
    let us = units_mod(phi.p.pow(level));
    let q = phi.p as f64;
    let w = 1.0 - (n as f64 - 1.0) / 2.0;
    let lo = -phi.v_max();
    let c = (0..phi.shells.len())
        .rev()
        .map(|i| {
            let v = phi.v_min + i as i32;
            let avg = us.iter().map(|&u| phi.eval(v, u) * chi.value(u)).sum::<Complex64>() / us.len() as f64;
            avg * q.powf(-(v as f64) * w)
        })
        .collect();
    Laurent::new(lo, c)
}

/// The right-hand side `chi(-1)^{n-1} gamma(1-s, chi pi) * (weighted Mellin of Phi^zeta)` to order `hi`.
fn dual_side(rep: &LocalRepresentation, phiz: &PadicShellFunction, chi: &PadicCharacter, hi: i32) -> Result<Laurent> {
    let n = rep.n();
    let m = mellin_weighted(phiz, chi, n).trim();
    if m.c.is_empty() || m.c.iter().all(|z| z.norm() == 0.0) {
        return Ok(Laurent::zero());
    }
    let gamma = gamma_factor_reflected(rep, chi)?;
    let g = gamma.expand(hi - m.lo)?;
    let sign = if n.is_multiple_of(2) { chi.parity() as f64 } else { 1.0 };
    Ok(g.mul_trunc(&m, hi).scale(sign.into()))
}

/// The transform `B` on shells `v_low..=cutoff`, exact at level `level(Phi^zeta)`.
pub fn bessel_general(req: &BesselRequest) -> Result<PadicShellFunction> {
    let p = req.phi.p;
    if req.rep.p() != p {
        return Err(Error::InvalidArgument(format!("representation at {} against function at {p}", req.rep.p())));
    }
    let v_low = bessel_support_bound_level(&req.rep, req.zeta.as_ref(), req.phi.level) + req.phi.v_min.min(0) * 2;
    if req.cutoff < v_low {
        return Err(Error::InvalidArgument(format!("cutoff {} below the support bound {v_low}", req.cutoff)));
    }
    let phiz = twist_by_modulus(&req.phi, req.zeta.as_ref());
    if phiz.is_zero() {
        return Ok(PadicShellFunction { level: phiz.level, ..PadicShellFunction::zero(p) });
    }
    let n = req.rep.n();
    let q = p as f64;
    let level = phiz.level;
    let chars = enumerate_padic_characters(p, level);
    let us = units_mod(p.pow(level));
    let mut sides = Vec::with_capacity(chars.len());
    let mut lo = req.cutoff;
    for chi in &chars {
        let s = dual_side(&req.rep, &phiz, chi, req.cutoff)?;
        if !s.c.is_empty() {
            lo = lo.min(s.lo);
        }
        sides.push(s);
    }
    let vals: Vec<Vec<Complex64>> = chars.iter().map(|c| us.iter().map(|&u| c.value(u)).collect()).collect();
    let index: Vec<usize> = {
        let mut idx = vec![0usize; p.pow(level) as usize];
        for (i, &u) in us.iter().enumerate() {
            idx[u as usize] = i;
        }
        idx
    };
    let half = (n as f64 - 1.0) / 2.0;
    Ok(PadicShellFunction::from_fn(p, level, lo, req.cutoff, |w, u| {
        let scale = q.powf(-(w as f64) * half);
        let j = index[u as usize];
        sides.iter().zip(&vals).map(|(s, v)| v[j] * s.coeff(w)).sum::<Complex64>() * scale
    }))
}

/// Largest coefficient mismatch between the two sides of the defining equation at `chi`, up to `X^d`.
pub fn verify_duality(
    rep: &LocalRepresentation,
    phi: &PadicShellFunction,
    zeta: Option<&Qp>,
    chi: &PadicCharacter,
    d: i32,
) -> Result<f64> {
    let b = bessel_general(&BesselRequest { rep: rep.clone(), phi: phi.clone(), zeta: zeta.copied(), cutoff: d })?;
    let phiz = twist_by_modulus(phi, zeta);
    let rhs = dual_side(rep, &phiz, chi, d)?;
    let n = rep.n();
    let q = phi.p as f64;
    let lhs = if b.shells.is_empty() {
        Laurent::zero()
    } else {
        let level = b.level.max(chi.conductor_exp());
        let us = units_mod(phi.p.pow(level));
        let inv = chi.inverse();
        let c = (b.v_min..=b.v_max())
            .map(|w| {
                let avg = us.iter().map(|&u| b.eval(w, u) * inv.value(u)).sum::<Complex64>() / us.len() as f64;
                avg * q.powf(w as f64 * (n as f64 - 1.0) / 2.0)
            })
            .collect();
        Laurent::new(b.v_min, c)
    };
    Ok(lhs.truncate(d).max_abs_diff(&rhs.truncate(d)))
}

/// Default series order `n (a(pi) + a(chi) + |v(zeta)|) + 10`.
pub fn default_order(rep: &LocalRepresentation, chi: &PadicCharacter, zeta: Option<&Qp>) -> i32 {
    let vz = zeta.map(|z| z.val.abs()).unwrap_or(0);
    rep.n() as i32 * (rep.conductor_exp() as i32 + chi.conductor_exp() as i32 + vz) + 10
}

fn sign_power(chi: &PadicCharacter, n: usize) -> f64 {
    if n.is_multiple_of(2) {
        chi.parity() as f64
    } else {
        1.0
    }
}

/// Closed form of the transform of `Char_{Z_p^x}` twisted by `zeta` for a twist-minimal model.
pub fn bessel_closed_form_ox(rep: &TwistMinimal, zeta: Option<&Qp>, y: &Qp) -> Result<Complex64> {
    let p = rep.p;
    let q = p as f64;
    let n = rep.n;
    let a = rep.a_pi as i32;
    let half = (n as f64 - 2.0) / 2.0;
    let zero = Complex64::new(0.0, 0.0);
    let vz = effective_zeta(zeta).map(|z| z.val).unwrap_or(0);
    let char_sum = |c: u32| -> Result<Complex64> {
        let z = zeta.unwrap();
        let t = y.mul(&z.inv());
        let mut s = zero;
        for chi in enumerate_padic_characters(p, c).into_iter().filter(|x| x.conductor_exp() == c) {
            s += sign_power(&chi, n) * chi.value_qp(&t) * rep.root_number(&chi)? * epsilon_half_inverse(&chi);
        }
        Ok(s)
    };
    match vz {
        0 => Ok(if y.val == -a { rep.eps0 * q.powf(a as f64 * half) } else { zero }),
        -1 => {
            let top = a.max(n as i32);
            let mut out = zero;
            if y.val == -a {
                out += rep.eps0 * q.powf(a as f64 * half) / (1.0 - q);
            }
            if y.val == -top {
                out += zeta_one(p) * q.powf(top as f64 * half - 0.5) * char_sum(1)?;
            }
            Ok(out)
        }
        v => {
            let top = a.max(-(n as i32) * v);
            if y.val != -top {
                return Ok(zero);
            }
            Ok(zeta_one(p) * q.powf(top as f64 * half + v as f64 / 2.0) * char_sum((-v) as u32)?)
        }
    }
}

/// `sum_chi G(zeta, chi) eps(1/2, chi pi) chi(-1)^{n-1} chi(y) q^{a(chi pi)(n-2)/2} [v(y) = -a(chi pi)]`
/// for `Char_{Z_p^x}` (`k = 0`) or `Char_{1 + p^k Z_p}` (`k >= 1`).
fn character_expansion(rep: &TwistMinimal, zeta: Option<&Qp>, k: u32, y: &Qp) -> Result<Complex64> {
    let p = rep.p;
    let q = p as f64;
    let n = rep.n;
    let z = effective_zeta(zeta).copied().unwrap_or(Qp::one(p));
    let top = k.max((-z.val).max(0) as u32);
    let mut out = Complex64::new(0.0, 0.0);
    for chi in enumerate_padic_characters(p, top) {
        let a = rep.twist_conductor(&chi) as i32;
        if y.val != -a {
            continue;
        }
        let g = if k == 0 { gauss_sum_padic(&z, &chi) } else { gauss_sum_progression(&z, &chi, k) };
        if g.norm() < 1e-15 {
            continue;
        }
        let (eps, _) = epsilon_factor(&LocalRepresentation::TwistMinimal(rep.clone()), &chi)?;
        out += g * eps * sign_power(&chi, n) * chi.value_qp(y) * q.powf(a as f64 * (n as f64 - 2.0) / 2.0);
    }
    Ok(out)
}

/// The transform of `Char_{1 + p^k Z_p}` twisted by `zeta` for a twist-minimal model.
pub fn bessel_closed_form_ap(rep: &TwistMinimal, zeta: Option<&Qp>, k: u32, y: &Qp) -> Result<Complex64> {
    if k == 0 {
        return Err(Error::InvalidArgument("progression level must be at least 1".into()));
    }
    character_expansion(rep, zeta, k, y)
}

/// The character expansion of the `Char_{Z_p^x}` transform, before any case analysis.
pub fn bessel_character_sum_ox(rep: &TwistMinimal, zeta: Option<&Qp>, y: &Qp) -> Result<Complex64> {
    character_expansion(rep, zeta, 0, y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::local_reps::SatakeParams;
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    fn minimal(p: u64, n: usize, a: u32, seed: u64) -> TwistMinimal {
        TwistMinimal::random(p, n, a, 3, &mut StdRng::seed_from_u64(seed))
    }

    #[test]
    fn twist_examples() {
        let units = PadicShellFunction::indicator_shell(5, 0);
        let z = Qp::from_unit(5, 2, 3).unwrap();
        assert_eq!(twist_by_modulus(&units, Some(&z)), units);
        let z = Qp::from_unit(5, -1, 2).unwrap();
        let t = twist_by_modulus(&units, Some(&z));
        assert_eq!(t.level, 1);
        for u in 1..5u64 {
            assert!((t.eval(0, u) - crate::arith::e((2 * u) as f64 / 5.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn support_bound_examples() {
        let rep = LocalRepresentation::Unramified(SatakeParams::new(3, vec![1.0.into(), 1.0.into()]).unwrap());
        assert_eq!(bessel_support_bound(&rep, None), -2);
        let rep = LocalRepresentation::TwistMinimal(minimal(3, 3, 4, 1));
        let z = Qp::from_unit(3, -2, 1).unwrap();
        assert_eq!(bessel_support_bound(&rep, Some(&z)), -11);
    }

    #[test]
    fn higher_level_bound_covers_engine_support() {
        let rep = LocalRepresentation::Unramified(SatakeParams::new(3, vec![1.0.into(), 1.0.into()]).unwrap());
        assert_eq!(bessel_support_bound_level(&rep, None, 1), -2);
        assert_eq!(bessel_support_bound_level(&rep, None, 2), -6);
        let phi = PadicShellFunction::indicator_progression(3, 2);
        let b = bessel_general(&BesselRequest { rep: rep.clone(), phi, zeta: None, cutoff: 2 }).unwrap();
        let lowest = (b.v_min..=2).find(|&w| units_mod(9).iter().any(|&u| b.eval(w, u).norm() > 1e-12)).unwrap();
        assert_eq!(lowest, -4);
        assert!(lowest < bessel_support_bound(&rep, None));
    }

    #[test]
    fn zero_function_transforms_to_zero() {
        let rep = LocalRepresentation::TwistMinimal(minimal(3, 2, 3, 2));
        let req = BesselRequest { rep, phi: PadicShellFunction::zero(3), zeta: None, cutoff: 5 };
        assert!(bessel_general(&req).unwrap().is_zero());
    }

    #[test]
    fn closed_form_case_one() {
        let tm = minimal(5, 3, 4, 3);
        let y = Qp::from_unit(5, -4, 2).unwrap();
        let v = bessel_closed_form_ox(&tm, None, &y).unwrap();
        assert!((v - tm.eps0 * 5f64.powf(2.0)).norm() < 1e-12);
        let y = Qp::from_unit(5, -3, 2).unwrap();
        assert_eq!(bessel_closed_form_ox(&tm, None, &y).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn engine_matches_closed_forms() {
        for p in [2u64, 3] {
            for n in [2usize, 3] {
                for a in [2u32, 3, 4] {
                    let tm = minimal(p, n, a, 10 + a as u64);
                    let rep = LocalRepresentation::TwistMinimal(tm.clone());
                    for vz in [-2i32, -1, 0] {
                        let z = Qp::from_unit(p, vz, 1).unwrap();
                        let req = BesselRequest {
                            rep: rep.clone(),
                            phi: PadicShellFunction::indicator_shell(p, 0),
                            zeta: Some(z),
                            cutoff: 2,
                        };
                        let b = bessel_general(&req).unwrap();
                        for w in b.v_min..=b.v_max() {
                            for u in units_mod(p.pow(b.level)) {
                                let y = Qp::from_unit(p, w, u.max(1) as i64).unwrap();
                                let cf = bessel_closed_form_ox(&tm, Some(&z), &y).unwrap();
                                assert!((b.eval(w, u) - cf).norm() < 1e-10, "p={p} n={n} a={a} vz={vz} w={w}");
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn progression_engine_cross_check() {
        let tm = minimal(3, 3, 4, 21);
        let rep = LocalRepresentation::TwistMinimal(tm.clone());
        let z = Qp::from_unit(3, -1, 2).unwrap();
        let req = BesselRequest { rep, phi: PadicShellFunction::indicator_progression(3, 1), zeta: Some(z), cutoff: 2 };
        let b = bessel_general(&req).unwrap();
        for w in b.v_min..=b.v_max() {
            for u in units_mod(3u64.pow(b.level)) {
                let y = Qp::from_unit(3, w, u.max(1) as i64).unwrap();
                let cf = bessel_closed_form_ap(&tm, Some(&z), 1, &y).unwrap();
                assert!((b.eval(w, u) - cf).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn duality_unramified_spherical_units() {
        let mut rng = StdRng::seed_from_u64(8);
        let rep = LocalRepresentation::Unramified(SatakeParams::random_unitary(5, 2, 1.0.into(), &mut rng));
        let r = verify_duality(&rep, &PadicShellFunction::indicator_shell(5, 0), None, &PadicCharacter::trivial(5), 40)
            .unwrap();
        assert!(r <= 1e-9, "residual {r}");
        let r0 = verify_duality(&rep, &PadicShellFunction::zero(5), None, &PadicCharacter::trivial(5), 40).unwrap();
        assert_eq!(r0, 0.0);
    }

    #[test]
    fn linearity() {
        let mut rng = StdRng::seed_from_u64(9);
        let rep = LocalRepresentation::Unramified(SatakeParams::random_unitary(3, 3, 1.0.into(), &mut rng));
        let f = PadicShellFunction::random(3, 1, 0, 2, &mut rng);
        let g = PadicShellFunction::random(3, 1, 0, 2, &mut rng);
        let (a, b) = (Complex64::new(0.3, -1.2), Complex64::new(2.0, 0.5));
        let comb = PadicShellFunction::from_fn(3, 1, 0, 2, |v, u| a * f.eval(v, u) + b * g.eval(v, u));
        let z = Some(Qp::from_unit(3, -1, 1).unwrap());
        let run = |phi: &PadicShellFunction| {
            bessel_general(&BesselRequest { rep: rep.clone(), phi: phi.clone(), zeta: z, cutoff: 6 }).unwrap()
        };
        let (bf, bg, bc) = (run(&f), run(&g), run(&comb));
        let lin = PadicShellFunction::from_fn(3, bc.level, bc.v_min, bc.v_max(), |v, u| {
            a * bf.eval(v, u) + b * bg.eval(v, u)
        });
        assert!(lin.max_abs_diff(&bc) < 1e-10);
    }

    #[test]
    fn size_bound_from_character_count() {
        let mut worst: f64 = 0.0;
        for p in [2u64, 3, 5] {
            for n in [2usize, 3] {
                let tm = minimal(p, n, 3, 40 + p);
                for vz in [-3i32, -2, -1] {
                    let z = Qp::from_unit(p, vz, 1).unwrap();
                    let top = (tm.a_pi as i32).max(-(n as i32) * vz);
                    let q = p as f64;
                    for u in units_mod(p.pow((-vz) as u32)) {
                        let y = Qp::from_unit(p, -top, u.max(1) as i64).unwrap();
                        let b = bessel_closed_form_ox(&tm, Some(&z), &y).unwrap().norm();
                        let claimed = q.powf(top as f64 * (n as f64 - 2.0) / 2.0 + 1.5 * vz as f64);
                        let triangle = zeta_one(p)
                            * q.powf(top as f64 * (n as f64 - 2.0) / 2.0 + vz as f64 / 2.0)
                            * (q.powi(-vz) - q.powi(-vz - 1));
                        assert!(b <= triangle * (1.0 + 1e-12));
                        worst = worst.max(b / claimed);
                    }
                }
            }
        }
        println!("largest ratio to the 3v/2 bound: {worst}");
    }
}
