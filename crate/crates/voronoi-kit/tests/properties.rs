use std::collections::BTreeMap;

use num_complex::Complex64;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;
use voronoi_kit::arith::{
    enumerate_characters, euler_phi, gcd, gcd_u, kloosterman_classical, mod_inv, units_mod, DirichletCharacter,
    KloostermanSpec,
};
use voronoi_kit::bessel_arch::Bump;
use voronoi_kit::bessel_padic::{bessel_general, BesselRequest};
use voronoi_kit::local_reps::{hecke_coefficient, schur, LocalRepresentation, SatakeModel, SatakeParams};
use voronoi_kit::padic::{
    enumerate_padic_characters, gauss_sum_closed_form, gauss_sum_padic, mellin_inverse_padic, mellin_padic,
    PadicShellFunction, Qp,
};
use voronoi_kit::series::Laurent;
use voronoi_kit::voronoi::{
    assemble_lhs, parse_csv, tau_coefficients, CoefficientOracle, Normalization, VoronoiInstance,
};

const PRIMES: [u64; 4] = [2, 3, 5, 7];

fn unit_circle() -> impl Strategy<Value = Complex64> {
    (0.0..std::f64::consts::TAU).prop_map(|t| Complex64::from_polar(1.0, t))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn character_orthogonality(n in 1u64..=200, i in 0usize..1000, j in 0usize..1000) {
        let us = units_mod(n);
        let (x, y) = (us[i % us.len()] as i64, us[j % us.len()] as i64);
        let s: Complex64 = enumerate_characters(n).iter().map(|c| c.value(x) * c.value(y).conj()).sum();
        let expect = if x == y { euler_phi(n) as f64 } else { 0.0 };
        prop_assert!((s - expect).norm() < 1e-10);
    }

    #[test]
    fn kloosterman_twisted_multiplicativity(q1 in 2u64..60, q2 in 2u64..60, x in 0i64..5000, y in 0i64..5000) {
        prop_assume!(gcd_u(q1, q2) == 1);
        let k = |q: u64, x: i64, y: i64| kloosterman_classical(&KloostermanSpec::plain(3, q), x, y).unwrap().0;
        let (i1, i2) = (mod_inv(q1 as i64, q2 as i64).unwrap(), mod_inv(q2 as i64, q1 as i64).unwrap());
        let whole = k(q1 * q2, x, y);
        let split = k(q1, x * i2 % q1 as i64, y * i2 % q1 as i64) * k(q2, x * i1 % q2 as i64, y * i1 % q2 as i64);
        prop_assert!((whole - split).norm() < 1e-9 * (q1 * q2) as f64);
    }

    #[test]
    fn gauss_lemma_closed_form(pi in 0usize..4, ci in 0usize..400, v in -3i32..=1, u in 1i64..1000) {
        let p = PRIMES[pi];
        prop_assume!(u % p as i64 != 0);
        let chars = enumerate_padic_characters(p, 3);
        let chi = &chars[ci % chars.len()];
        let a = Qp::from_unit(p, v, u).unwrap();
        prop_assert!((gauss_sum_padic(&a, chi) - gauss_sum_closed_form(&a, chi)).norm() < 1e-10);
    }

    #[test]
    fn mellin_round_trip(pi in 0usize..4, level in 0u32..=2, v_min in -3i32..=3, width in 1i32..=6, seed in any::<u64>()) {
        let phi = PadicShellFunction::random(PRIMES[pi], level, v_min, v_min + width - 1, &mut StdRng::seed_from_u64(seed));
        prop_assert!(mellin_inverse_padic(&mellin_padic(&phi)).max_abs_diff(&phi) < 1e-12);
    }

    #[test]
    fn shell_function_json_round_trip(pi in 0usize..4, level in 0u32..=2, v_min in -3i32..=3, seed in any::<u64>()) {
        let phi = PadicShellFunction::random(PRIMES[pi], level, v_min, v_min + 2, &mut StdRng::seed_from_u64(seed));
        prop_assert_eq!(PadicShellFunction::from_json(&phi.to_json()).unwrap(), phi);
    }

    #[test]
    fn laurent_inverse(lo in -3i32..3, c in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..6)) {
        let mut c: Vec<Complex64> = c.into_iter().map(|(a, b)| Complex64::new(a, b)).collect();
        c[0] = Complex64::new(1.0, 0.5);
        let s = Laurent::new(lo, c);
        let prod = s.mul_trunc(&s.inverse(20).unwrap(), 20 + lo);
        prop_assert!(prod.max_abs_diff(&Laurent::one()) < 1e-9);
    }

    #[test]
    fn schur_is_symmetric(l1 in 0i64..4, l2 in 0i64..4, l3 in 0i64..4, t in prop::collection::vec(unit_circle(), 3)) {
        let mut lambda = vec![l1, l2, l3];
        lambda.sort_unstable_by(|a, b| b.cmp(a));
        let a = schur(&lambda, &t).unwrap();
        let b = schur(&lambda, &[t[2], t[0], t[1]]).unwrap();
        prop_assert!((a - b).norm() < 1e-9);
    }

    #[test]
    fn hecke_multiplicative(m in 1i64..200, k in 1i64..200, seed in any::<u64>()) {
        prop_assume!(gcd(m, k) == 1);
        let mut rng = StdRng::seed_from_u64(seed);
        let mut model = SatakeModel::new(3);
        for p in (2..200u64).filter(|&p| voronoi_kit::arith::is_prime(p)) {
            model.insert(SatakeParams::random_unitary(p, 3, 1.0.into(), &mut rng)).unwrap();
        }
        let a = hecke_coefficient(&model, &[m * k, 1]).unwrap();
        let b = hecke_coefficient(&model, &[m, 1]).unwrap() * hecke_coefficient(&model, &[k, 1]).unwrap();
        prop_assert!((a - b).norm() < 1e-9);
    }

    #[test]
    fn bessel_transform_is_linear(pi in 0usize..3, vz in -2i32..=0, seed in any::<u64>(), s in unit_circle()) {
        let p = PRIMES[pi];
        let mut rng = StdRng::seed_from_u64(seed);
        let rep = LocalRepresentation::Unramified(SatakeParams::random_unitary(p, 2, 1.0.into(), &mut rng));
        let f = PadicShellFunction::random(p, 1, 0, 2, &mut rng);
        let g = PadicShellFunction::random(p, 1, 0, 2, &mut rng);
        let comb = PadicShellFunction::from_fn(p, 1, 0, 2, |v, u| s * f.eval(v, u) + g.eval(v, u));
        let z = Some(Qp::from_unit(p, vz, 1).unwrap());
        let run = |phi: &PadicShellFunction| {
            bessel_general(&BesselRequest { rep: rep.clone(), phi: phi.clone(), zeta: z, cutoff: 4 }).unwrap()
        };
        let (bf, bg, bc) = (run(&f), run(&g), run(&comb));
        let lin = PadicShellFunction::from_fn(p, bc.level, bc.v_min, bc.v_max(), |v, u| s * bf.eval(v, u) + bg.eval(v, u));
        prop_assert!(lin.max_abs_diff(&bc) < 1e-10);
    }

    #[test]
    fn csv_round_trip(rows in prop::collection::btree_map((1i64..50, 1i64..50), (-2.0f64..2.0, -2.0f64..2.0), 0..20)) {
        let mut rows = rows;
        rows.insert((1, 1), (1.0, 0.0));
        let text: String = rows.iter().map(|((a, b), (re, im))| format!("{a},{b},{re:e},{im:e}\n")).collect();
        let (oracle, _) = parse_csv(&text, 3, Normalization::Hecke).unwrap();
        for ((a, b), (re, im)) in rows {
            prop_assert_eq!(oracle.coefficient(&[a, -b]).unwrap(), Complex64::new(re, im));
        }
    }

    #[test]
    fn lhs_periodic_in_a(a in 1i64..50, q in 1u64..30) {
        prop_assume!(gcd(a, q as i64) == 1);
        let mut rng = StdRng::seed_from_u64(a as u64 * 1000 + q);
        let mut model = SatakeModel::new(2);
        for p in (2..100u64).filter(|&p| voronoi_kit::arith::is_prime(p)) {
            model.insert(SatakeParams::random_unitary(p, 2, 1.0.into(), &mut rng)).unwrap();
        }
        let oracle = CoefficientOracle::Satake(model);
        let phi = Bump::new(2.0, 90.0, 2).unwrap();
        let lhs = |a: i64| {
            let inst = VoronoiInstance::new(2, 1, DirichletCharacter::trivial(1), (a, 1, q), vec![], phi, BTreeMap::new()).unwrap();
            assemble_lhs(&inst, &oracle).unwrap().value
        };
        prop_assert!((lhs(a) - lhs(a + q as i64)).norm() < 1e-12);
    }
}

#[test]
fn tau_hecke_recursion() {
    let t = tau_coefficients(3000).unwrap();
    for p in [2usize, 3, 5, 7, 11, 13] {
        let p11 = (p as i128).pow(11);
        for m in 1..=3000 / p {
            let lower = if m % p == 0 { p11 * t[m / p - 1] } else { 0 };
            assert_eq!(t[p * m - 1], t[p - 1] * t[m - 1] - lower, "p={p} m={m}");
        }
    }
}
