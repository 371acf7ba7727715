use num_complex::Complex64;
use voronoi_kit::arith::{
    enumerate_characters, gauss_sum_dirichlet, kloosterman_classical, mod_inv, DirichletCharacter, KloostermanSpec,
};
use voronoi_kit::bessel_arch::{ArchKernel, ArchRep, Bump, Contour};
use voronoi_kit::voronoi::{tau_coefficients, verify_voronoi_gl2, DeltaForm};

fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
    (a - b).norm() <= tol
}

/// Coefficients of `q prod (1 - q^n)^24` by repeated multiplication.
fn eta_product(n_max: usize) -> Vec<i128> {
    let mut c = vec![0i128; n_max];
    c[0] = 1;
    for n in 1..n_max {
        for _ in 0..24 {
            for k in (n..n_max).rev() {
                c[k] -= c[k - n];
            }
        }
    }
    c
}

#[test]
fn tau_matches_eta_product() {
    let t = tau_coefficients(400).unwrap();
    assert_eq!(t, eta_product(400));
    assert_eq!(t[1], -24);
}

#[test]
fn kloosterman_at_five() {
    let (v, terms) = kloosterman_classical(&KloostermanSpec::plain(3, 5), -1, 1).unwrap();
    let expect = 2.0 + 2.0 * (4.0 * std::f64::consts::PI / 5.0).cos();
    assert!(close(v, expect.into(), 1e-12));
    assert_eq!(terms, 4);
}

#[test]
fn kloosterman_crt_at_fifteen() {
    let k = |q: u64, x: i64, y: i64| kloosterman_classical(&KloostermanSpec::plain(3, q), x, y).unwrap().0;
    let (i3, i5) = (mod_inv(3, 5).unwrap(), mod_inv(5, 3).unwrap());
    for (x, y) in [(1, 1), (2, 7), (4, 0), (11, 13)] {
        let whole = k(15, x, y);
        let split = k(3, x * i5 % 3, y * i5 % 3) * k(5, x * i3 % 5, y * i3 % 5);
        assert!(close(whole, split, 1e-12), "x={x} y={y}");
    }
}

#[test]
fn gauss_sums_at_small_moduli() {
    for chi in enumerate_characters(5).into_iter().filter(|c| c.is_primitive()) {
        assert!((gauss_sum_dirichlet(&chi).norm() - 5f64.sqrt()).abs() < 1e-12);
    }
    assert!(close(gauss_sum_dirichlet(&DirichletCharacter::trivial(7)), (-1.0).into(), 1e-12));
}

#[test]
fn real_transform_growth_near_zero() {
    // |B(y)| << y^{-(1/2 + 1/(n^2 + 1))} on (0, 1], with the constant fitted at y = 1
    let phi = Bump::with_plateau(1.0, 2.0, 2, 0.5).unwrap();
    for rep in [ArchRep::tempered_gl2(2.0), ArchRep::holomorphic(12)] {
        let k = ArchKernel::new(&rep, &phi, Contour::default_for(&rep, 800.0)).unwrap();
        let size = |y: f64| {
            let (a, ea) = k.eval(y).unwrap();
            let (b, eb) = k.eval(-y).unwrap();
            assert!(ea.max(eb) < 1e-4);
            a.norm().max(b.norm())
        };
        let c = size(1.0);
        for y in [0.25, 1.0 / 16.0] {
            assert!(size(y) <= c * y.powf(-0.7), "y={y}");
        }
    }
}

#[test]
fn delta_twists_at_five_pass_separately() {
    let delta = DeltaForm::new(4000).unwrap();
    let phi = Bump::with_plateau(5.0, 40.0, 2, 0.0).unwrap();
    let r2 = verify_voronoi_gl2(5, 2, phi, &delta, 4000, 1e-4).unwrap();
    let r3 = verify_voronoi_gl2(5, 3, phi, &delta, 4000, 1e-4).unwrap();
    assert!(r2.passed && r3.passed, "{} {}", r2.rel_err, r3.rel_err);
    // a = 3 is the conjugate twist of a = 2 since 3 = -2 mod 5 and tau is real
    assert!(close(r2.lhs.conj(), r3.lhs, 1e-14));
}
