//! The acceptance suite: ten timed checks, each with a numeric gate and a time budget.

use std::time::Instant;

use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Serialize;

use crate::arith::{gcd_u, is_prime, kloosterman_classical, mod_inv, units_mod, KloostermanSpec};
use crate::bessel_arch::{decay_check, ArchRep, Bump};
use crate::bessel_padic::{
    bessel_character_sum_ox, bessel_closed_form_ap, bessel_closed_form_ox, bessel_general, bessel_support_bound_level,
    verify_duality, BesselRequest,
};
use crate::error::Result;
use crate::kloosterman_geometric::{hk_closed_form, hk_integral_bruteforce, ShiftModulus};
use crate::local_reps::{
    is_dominant, schur_bialternant, schur_jacobi_trudi, schur_tableaux, shintani_whittaker, LocalRepresentation,
    SatakeParams, TwistMinimal,
};
use crate::padic::{
    enumerate_padic_characters, gauss_sum_closed_form, gauss_sum_padic, mellin_inverse_padic, mellin_padic,
    PadicShellFunction, Qp,
};
use crate::voronoi::{compare_refined, synthetic_twist_minimal, verify_voronoi_gl2, DeltaForm};

/// Measured quantity of one check against its gate.
#[derive(Clone, Debug, Serialize)]
pub struct Measure {
    pub value: f64,
    pub gate: f64,
    pub ok: bool,
    pub detail: String,
}

impl Measure {
    fn at_most(value: f64, gate: f64, detail: String) -> Self {
        Measure { value, gate, ok: value <= gate, detail }
    }
}

/// One acceptance check.
pub struct Criterion {
    pub id: usize,
    pub name: &'static str,
    /// Time budget in seconds.
    pub budget: f64,
    pub run: fn() -> Result<Measure>,
}

/// Outcome of running a [`Criterion`].
#[derive(Clone, Debug, Serialize)]
pub struct Outcome {
    pub id: usize,
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub gate: f64,
    pub seconds: f64,
    pub budget: f64,
    pub detail: String,
}

impl Outcome {
    pub fn line(&self) -> String {
        format!(
            "[{}] {:>2} {:<28} value={:.3e} gate={:.1e} time={:.1}s/{:.0}s  {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.value,
            self.gate,
            self.seconds,
            self.budget,
            self.detail
        )
    }
}

pub fn criteria() -> Vec<Criterion> {
    vec![
        Criterion { id: 1, name: "gauss-sum-lemma", budget: 5.0, run: gauss_lemma },
        Criterion { id: 2, name: "padic-mellin-round-trip", budget: 5.0, run: mellin_round_trip },
        Criterion { id: 3, name: "duality-equation", budget: 120.0, run: duality_grid },
        Criterion { id: 4, name: "closed-forms-vs-engine", budget: 60.0, run: closed_forms },
        Criterion { id: 5, name: "geometric-identity", budget: 600.0, run: geometric_identity },
        Criterion { id: 6, name: "schur-triple-oracle", budget: 10.0, run: schur_oracles },
        Criterion { id: 7, name: "classical-kloosterman", budget: 30.0, run: classical_kloosterman },
        Criterion { id: 8, name: "archimedean-decay", budget: 120.0, run: archimedean_decay },
        Criterion { id: 9, name: "gl2-voronoi-delta", budget: 600.0, run: gl2_voronoi },
        Criterion { id: 10, name: "refined-vs-general", budget: 60.0, run: refined_consistency },
    ]
}

/// Runs one check; errors count as failures.
pub fn run(c: &Criterion) -> Outcome {
    let start = Instant::now();
    let res = (c.run)();
    let seconds = start.elapsed().as_secs_f64();
    let (value, gate, ok, detail) = match res {
        Ok(m) => (m.value, m.gate, m.ok, m.detail),
        Err(e) => (f64::NAN, f64::NAN, false, format!("error: {e}")),
    };
    let passed = ok && seconds <= c.budget;
    let detail = if ok && !passed { format!("{detail}; over time budget") } else { detail };
    Outcome { id: c.id, name: c.name.into(), passed, value, gate, seconds, budget: c.budget, detail }
}

/// Runs the checks whose id is in `ids`, or all of them when `ids` is empty.
pub fn run_suite(ids: &[usize]) -> Vec<Outcome> {
    criteria().iter().filter(|c| ids.is_empty() || ids.contains(&c.id)).map(run).collect()
}

fn qp(p: u64, v: i32, u: i64) -> Qp {
    Qp::from_unit(p, v, u).unwrap()
}

fn gauss_lemma() -> Result<Measure> {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for p in [2u64, 3, 5, 7] {
        let us = units_mod(p * p);
        for chi in enumerate_padic_characters(p, 3) {
            for v in -3..=1 {
                for &u in us.iter().take(8) {
                    let a = qp(p, v, u as i64);
                    worst = worst.max((gauss_sum_padic(&a, &chi) - gauss_sum_closed_form(&a, &chi)).norm());
                    count += 1;
                }
            }
        }
    }
    Ok(Measure::at_most(worst, 1e-10, format!("{count} sums")))
}

fn mellin_round_trip() -> Result<Measure> {
    let mut rng = StdRng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let p = [2u64, 3, 5, 7][rng.gen_range(0..4)];
        let level = rng.gen_range(0..=2);
        let v_min = rng.gen_range(-3..=3);
        let width = rng.gen_range(1..=6);
        let phi = PadicShellFunction::random(p, level, v_min, v_min + width - 1, &mut rng);
        worst = worst.max(mellin_inverse_padic(&mellin_padic(&phi)).max_abs_diff(&phi));
    }
    Ok(Measure::at_most(worst, 1e-12, "200 random shell functions".into()))
}

/// One evaluated grid point of a verification grid.
#[derive(Clone, Debug, Serialize)]
pub struct GridPoint {
    pub params: serde_json::Value,
    pub lhs: Option<Complex64>,
    pub rhs: Option<Complex64>,
    pub residual: f64,
}

/// Grid for the defining equation of the p-adic transform.
#[derive(Clone, Debug)]
pub struct DualityGrid {
    pub ns: Vec<usize>,
    pub ps: Vec<u64>,
    /// Conductor exponents of the twist-minimal models; an unramified model is always included.
    pub a_pis: Vec<u32>,
    pub zeta_vals: Vec<i32>,
    /// Characters of conductor exponent up to this.
    pub char_level: u32,
    pub order: i32,
    pub seed: u64,
}

impl Default for DualityGrid {
    fn default() -> Self {
        DualityGrid {
            ns: vec![2, 3],
            ps: vec![2, 3, 5],
            a_pis: vec![3, 4, 5],
            zeta_vals: vec![-2, -1, 0],
            char_level: 2,
            order: 40,
            seed: 3,
        }
    }
}

/// Unramified unitary and twist-minimal models with the given conductor exponents.
fn grid_reps(p: u64, n: usize, a_pis: &[u32], max_cond: u32, rng: &mut StdRng) -> Vec<LocalRepresentation> {
    let mut reps = vec![LocalRepresentation::Unramified(SatakeParams::random_unitary(p, n, 1.0.into(), rng))];
    for &a in a_pis {
        reps.push(LocalRepresentation::TwistMinimal(TwistMinimal::random(p, n, a, max_cond, rng)));
    }
    reps
}

/// Residual of the defining equation over the grid, for `Phi` the units, `1 + pZ_p` and a random
/// level-one function.
pub fn duality_points(g: &DualityGrid) -> Result<Vec<GridPoint>> {
    let mut rng = StdRng::seed_from_u64(g.seed);
    let mut out = Vec::new();
    for &n in &g.ns {
        for &p in &g.ps {
            let tests = [
                ("units", PadicShellFunction::indicator_shell(p, 0)),
                ("1+pZp", PadicShellFunction::indicator_progression(p, 1)),
                ("random", PadicShellFunction::random(p, 1, 0, 2, &mut rng)),
            ];
            let max_cond = g.char_level.max(g.zeta_vals.iter().map(|v| v.unsigned_abs()).max().unwrap_or(0)).max(1);
            let chars = enumerate_padic_characters(p, g.char_level);
            for rep in grid_reps(p, n, &g.a_pis, max_cond, &mut rng) {
                for &vz in &g.zeta_vals {
                    let z = qp(p, vz, 1);
                    for (label, phi) in &tests {
                        for chi in &chars {
                            let residual = verify_duality(&rep, phi, Some(&z), chi, g.order)?;
                            let params = serde_json::json!({
                                "n": n, "p": p, "a_pi": rep.conductor_exp(), "zeta_val": vz, "phi": label,
                                "chi": {"conductor_exp": chi.conductor_exp(), "index": chi.primitive().index()},
                                "order": g.order,
                            });
                            out.push(GridPoint { params, lhs: None, rhs: None, residual });
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

fn duality_grid() -> Result<Measure> {
    let points = duality_points(&DualityGrid::default())?;
    let worst = points.iter().map(|x| x.residual).fold(0.0, f64::max);
    Ok(Measure::at_most(worst, 1e-9, format!("{} grid points, order 40", points.len())))
}

fn closed_forms() -> Result<Measure> {
    let mut rng = StdRng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    let mut below: f64 = 0.0;
    let mut count = 0;
    for n in [2usize, 3] {
        for p in [2u64, 3, 5] {
            for rep in grid_reps(p, n, &[3, 4, 5], 3, &mut rng) {
                for vz in [-2, -1, 0] {
                    let z = qp(p, vz, 1);
                    for k in 0..=2u32 {
                        let bound = bessel_support_bound_level(&rep, Some(&z), k);
                        let phi = if k == 0 {
                            PadicShellFunction::indicator_shell(p, 0)
                        } else {
                            PadicShellFunction::indicator_progression(p, k)
                        };
                        let b = bessel_general(&BesselRequest { rep: rep.clone(), phi, zeta: Some(z), cutoff: 2 })?;
                        for w in b.v_min..bound {
                            for u in units_mod(p.pow(b.level)) {
                                below = below.max(b.eval(w, u).norm());
                            }
                        }
                        let LocalRepresentation::TwistMinimal(tm) = &rep else { continue };
                        for w in (bound - 2)..=2 {
                            for u in units_mod(p.pow(b.level)) {
                                let y = qp(p, w, u.max(1) as i64);
                                let engine = if w >= b.v_min { b.eval(w, u) } else { 0.0.into() };
                                let forms: Vec<Complex64> = if k == 0 {
                                    vec![
                                        bessel_closed_form_ox(tm, Some(&z), &y)?,
                                        bessel_character_sum_ox(tm, Some(&z), &y)?,
                                    ]
                                } else {
                                    vec![bessel_closed_form_ap(tm, Some(&z), k, &y)?]
                                };
                                for f in forms {
                                    worst = worst.max((f - engine).norm());
                                    if w < bound {
                                        below = below.max(f.norm());
                                    }
                                    count += 1;
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    let ok = worst <= 1e-10 && below <= 1e-12;
    Ok(Measure {
        value: worst,
        gate: 1e-10,
        ok,
        detail: format!("{count} values; largest value below the support bound {below:.1e} (gate 1e-12)"),
    })
}

/// Grid for the Whittaker-integral identity.
#[derive(Clone, Debug)]
pub struct GeometricGrid {
    pub ns: Vec<usize>,
    pub ps: Vec<u64>,
    pub zeta_vals: Vec<i32>,
    pub y_vals: Vec<i32>,
    pub seed: u64,
}

impl Default for GeometricGrid {
    fn default() -> Self {
        GeometricGrid {
            ns: vec![2, 3],
            ps: vec![2, 3, 5],
            zeta_vals: vec![-2, -1, 0],
            y_vals: vec![0, 1, 2, 3],
            seed: 5,
        }
    }
}

/// Brute-force integral against the closed-form expansion, over shifts with at most one
/// non-unit entry.
pub fn geometric_points(g: &GeometricGrid) -> Result<Vec<GridPoint>> {
    let mut rng = StdRng::seed_from_u64(g.seed);
    let mut out = Vec::new();
    for &n in &g.ns {
        for &p in &g.ps {
            let dual = SatakeParams::random_unitary(p, n, 1.0.into(), &mut rng);
            let mut shifts = vec![vec![0i32; n]];
            for i in 0..n {
                for v in [-1, 1] {
                    let mut xi = vec![0; n];
                    xi[i] = v;
                    shifts.push(xi);
                }
            }
            let unit = if p > 2 { 2 } else { 1 };
            for &vz in &g.zeta_vals {
                for xi in &shifts {
                    let sm =
                        ShiftModulus { zeta: Some(qp(p, vz, 1)), xi: xi.iter().map(|&v| qp(p, v, unit)).collect() };
                    for &vy in &g.y_vals {
                        let y = qp(p, vy, 1);
                        let lhs = hk_integral_bruteforce(&y, &sm, &dual)?;
                        let (rhs, _) = hk_closed_form(&y, &sm, &dual)?;
                        let params = serde_json::json!({
                            "n": n, "p": p, "zeta_val": vz, "xi_vals": xi, "y_val": vy, "satake": dual.mu,
                        });
                        out.push(GridPoint { params, lhs: Some(lhs), rhs: Some(rhs), residual: (lhs - rhs).norm() });
                    }
                }
            }
        }
    }
    Ok(out)
}

fn geometric_identity() -> Result<Measure> {
    let points = geometric_points(&GeometricGrid::default())?;
    let worst = points.iter().map(|x| x.residual).fold(0.0, f64::max);
    Ok(Measure::at_most(worst, 1e-9, format!("{} grid points", points.len())))
}

/// Partitions of `size` into at most `len` parts, padded with zeros.
fn partitions(size: i64, len: usize, cap: i64) -> Vec<Vec<i64>> {
    if len == 0 {
        return if size == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    for first in (0..=size.min(cap)).rev() {
        for mut rest in partitions(size - first, len - 1, first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

fn schur_oracles() -> Result<Measure> {
    let mut rng = StdRng::seed_from_u64(6);
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for n in 1..=4usize {
        for size in 0..=6 {
            for lambda in partitions(size, n, size) {
                let t: Vec<Complex64> =
                    (0..n).map(|_| Complex64::from_polar(rng.gen_range(0.5..1.5), rng.gen_range(0.0..6.3))).collect();
                let a = schur_bialternant(&lambda, &t)?;
                let b = schur_jacobi_trudi(&lambda, &t)?;
                let c = schur_tableaux(&lambda, &t)?;
                worst = worst.max((a - b).norm()).max((a - c).norm());
                count += 1;
            }
        }
    }
    let mut nonzero = 0;
    for n in 2..=4usize {
        let mu = SatakeParams::random_unitary(3, n, 1.0.into(), &mut rng);
        let mut lambda = vec![-2i64; n];
        loop {
            if !is_dominant(&lambda) && shintani_whittaker(&lambda, &mu) != Complex64::new(0.0, 0.0) {
                nonzero += 1;
            }
            let Some(i) = lambda.iter().position(|&x| x < 3) else { break };
            lambda[i] += 1;
            lambda[..i].iter_mut().for_each(|x| *x = -2);
        }
    }
    Ok(Measure {
        value: worst,
        gate: 1e-9,
        ok: worst <= 1e-9 && nonzero == 0,
        detail: format!("{count} dominant weights; {nonzero} non-dominant weights with nonzero Whittaker value"),
    })
}

fn textbook(a: i64, b: i64, q: u64) -> Complex64 {
    units_mod(q)
        .into_iter()
        .map(|x| {
            let xi = mod_inv(x as i64, q as i64).unwrap();
            crate::arith::e_ratio(a as i128 * x as i128 + b as i128 * xi as i128, q as u128)
        })
        .sum()
}

fn classical_kloosterman() -> Result<Measure> {
    let mut worst: f64 = 0.0;
    for q in 1..=100u64 {
        for x in 0..q as i64 {
            for y in 0..q as i64 {
                let (v, _) = kloosterman_classical(&KloostermanSpec::plain(3, q), x, y)?;
                worst = worst.max((v - textbook(-x, y, q)).norm());
            }
        }
    }
    let mut rng = StdRng::seed_from_u64(7);
    let mut crt: f64 = 0.0;
    let mut pairs = 0;
    for q1 in 2..=100u64 {
        for q2 in q1 + 1..=10_000 / q1 {
            if gcd_u(q1, q2) != 1 || rng.gen_range(0..8) != 0 {
                continue;
            }
            let q = q1 * q2;
            let (x, y) = (rng.gen_range(0..q as i64), rng.gen_range(0..q as i64));
            let (i1, i2) = (mod_inv(q1 as i64, q2 as i64).unwrap(), mod_inv(q2 as i64, q1 as i64).unwrap());
            let (whole, _) = kloosterman_classical(&KloostermanSpec::plain(3, q), x, y)?;
            let (a, _) = kloosterman_classical(&KloostermanSpec::plain(3, q1), x * i2 % q1 as i64, y * i2 % q1 as i64)?;
            let (b, _) = kloosterman_classical(&KloostermanSpec::plain(3, q2), x * i1 % q2 as i64, y * i1 % q2 as i64)?;
            crt = crt.max((whole - a * b).norm() / q as f64);
            pairs += 1;
        }
    }
    let mut weil: f64 = 0.0;
    for p in (2..=101u64).filter(|&p| is_prime(p)) {
        for x in 1..p as i64 {
            for y in 1..p as i64 {
                let (v, _) = kloosterman_classical(&KloostermanSpec::plain(3, p), x, y)?;
                weil = weil.max(v.norm() / (2.0 * (p as f64).sqrt()));
            }
        }
    }
    let value = worst.max(crt);
    Ok(Measure {
        value,
        gate: 1e-9,
        ok: value <= 1e-9 && weil <= 1.0 + 1e-12,
        detail: format!("{pairs} coprime factorisations; largest |S|/(2 sqrt p) = {weil:.6}"),
    })
}

fn archimedean_decay() -> Result<Measure> {
    let ys: Vec<f64> = (0..=7).map(|k| 2f64.powi(k)).collect();
    let phi = Bump::new(2.0, 64.0, 2)?;
    let mut exponent = f64::INFINITY;
    let mut change: f64 = 0.0;
    let mut detail = Vec::new();
    for (label, rep) in [("tempered", ArchRep::tempered_gl2(2.0)), ("holomorphic", ArchRep::holomorphic(12))] {
        let r = decay_check(&rep, &phi, &ys)?;
        let peak = r.values.iter().map(|v| v.1).fold(0.0, f64::max);
        exponent = exponent.min(r.exponent);
        change = change.max(r.doubling_change / peak);
        detail.push(format!("{label}: exponent {:.2} at T={}", r.exponent, r.height));
    }
    Ok(Measure {
        value: exponent,
        gate: 3.0,
        ok: exponent >= 3.0 && change <= 1e-6,
        detail: format!("{}; relative change under doubling {change:.1e} (gate 1e-6)", detail.join(", ")),
    })
}

fn gl2_voronoi() -> Result<Measure> {
    let delta = DeltaForm::new(10_000)?;
    let phi = Bump::with_plateau(5.0, 40.0, 2, 0.0)?;
    let mut worst: f64 = 0.0;
    let mut ok = true;
    let mut detail = Vec::new();
    for q in [1u64, 3, 5] {
        let r = verify_voronoi_gl2(q, 1, phi, &delta, 10_000, 1e-4)?;
        worst = worst.max(r.rel_err);
        ok &= r.passed;
        detail.push(format!("q={q}: {:.1e}", r.rel_err));
    }
    Ok(Measure { value: worst, gate: 1e-4, ok, detail: detail.join(", ") })
}

fn refined_consistency() -> Result<Measure> {
    let cases: [(usize, &[(u64, u32, u32)], (i64, u64), Vec<i64>, u64); 3] = [
        (2, &[(3, 3, 2)], (2, 5), vec![], 1),
        (2, &[(2, 2, 3), (3, 2, 2)], (1, 7), vec![], 2),
        (3, &[(2, 2, 2)], (1, 3), vec![1], 3),
    ];
    let mut worst: f64 = 0.0;
    for (n, primes, aq, c, seed) in cases {
        let s = synthetic_twist_minimal(n, primes, &[], aq, c, 60, seed)?;
        let (_, _, rel) = compare_refined(&s, 40)?;
        worst = worst.max(rel);
    }
    Ok(Measure::at_most(worst, 1e-8, "3 synthetic instances with square-full l".into()))
}
