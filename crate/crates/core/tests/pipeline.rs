use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sobolev_ball::ballbasis::{basis, basis_i, basis_ii};
use sobolev_ball::expansion::{
    coefficient, expand, kernel_section, lambda_limit, project, project_via_kernel_at, Integrand,
};
use sobolev_ball::innerprod::{ip_exact, ip_ii_radial_green, InnerProductSpec};
use sobolev_ball::polyalg::{homogeneous_exponents, MultiPoly};

fn poly_from(d: usize, deg: usize, coefs: &[f64]) -> MultiPoly {
    let mut p = MultiPoly::zero(d);
    let mut it = coefs.iter().cycle();
    for n in 0..=deg {
        for e in homogeneous_exponents(d, n as u32) {
            p.add_term(e, *it.next().unwrap());
        }
    }
    p
}

fn spec_for(kind: usize, d: usize, param: f64) -> InnerProductSpec {
    match kind {
        0 => InnerProductSpec::i(d, param).unwrap(),
        1 => InnerProductSpec::ii(d, param).unwrap(),
        2 => InnerProductSpec::delta(d).unwrap(),
        _ => InnerProductSpec::wmu(d, param - 0.9).unwrap(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn expand_then_reconstruct_is_identity(
        kind in 0usize..4,
        d in 2usize..=3,
        deg in 0usize..=6,
        param in 0.2f64..4.0,
        coefs in prop::collection::vec(-1.0f64..1.0, 8..20),
    ) {
        let f = poly_from(d, deg, &coefs);
        let spec = spec_for(kind, d, param);
        let t = expand(&f, &spec, deg).unwrap();
        let back = t.reconstruct().unwrap();
        prop_assert!((&back - &f).max_abs_coef() <= 1e-10 * f.max_abs_coef().max(1.0));
    }

    #[test]
    fn kernel_route_equals_coefficient_route(
        kind in 0usize..4,
        d in 2usize..=3,
        n in 0usize..=4,
        param in 0.2f64..4.0,
        coefs in prop::collection::vec(-1.0f64..1.0, 8..20),
        seed in 0u64..1000,
    ) {
        let f = poly_from(d, 4, &coefs);
        let spec = spec_for(kind, d, param);
        let proj = project(&Integrand::Poly(&f), &spec, n).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..20 {
            let x: Vec<f64> = loop {
                let x: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
                if x.iter().map(|v| v * v).sum::<f64>() <= 1.0 {
                    break x;
                }
            };
            let a = project_via_kernel_at(&f, &spec, n, &x).unwrap();
            let b = proj.eval(&x);
            prop_assert!((a - b).abs() <= 1e-10 * (1.0 + b.abs()), "{a} vs {b}");
        }
    }
}

#[test]
fn kernel_sections_reproduce_every_basis_element() {
    let x = [0.2, -0.4, 0.1];
    for spec in [InnerProductSpec::i(3, 0.5).unwrap(), InnerProductSpec::ii(3, 2.0).unwrap()] {
        for n in 0..=4 {
            let k = kernel_section(&spec, n, &x).unwrap();
            for e in basis(spec.basis_family(), n, 3).unwrap() {
                assert!((ip_exact(&spec, &k, &e.poly).unwrap() - e.poly.eval(&x)).abs() < 1e-12);
            }
            // orthogonal to the neighbouring degree
            for e in basis(spec.basis_family(), n + 1, 3).unwrap() {
                assert!(ip_exact(&spec, &k, &e.poly).unwrap().abs() < 1e-12);
            }
        }
    }
}

#[test]
fn radial_coefficient_of_family_ii_uses_green_route() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for d in [2usize, 3] {
        for lambda in [0.5, 1.0, 4.0] {
            let spec = InnerProductSpec::ii(d, lambda).unwrap();
            for n in [2usize, 4, 6] {
                let v = basis_ii(n, d).unwrap().into_iter().find(|e| 2 * e.j == n).unwrap();
                let coefs: Vec<f64> = (0..30).map(|_| rng.random_range(-1.0..1.0)).collect();
                let f = poly_from(d, 6, &coefs);
                let direct = ip_exact(&spec, &f, &v.poly).unwrap();
                let green = coefficient(&spec, &v, &Integrand::Poly(&f)).unwrap();
                let green2 = ip_ii_radial_green(&f, &v.poly, lambda, d).unwrap();
                assert!((green - direct).abs() <= 1e-11 * direct.abs().max(1.0), "{green} vs {direct}");
                assert!((green2 - direct).abs() <= 1e-11 * direct.abs().max(1.0));
            }
        }
    }
}

#[test]
fn basis_inputs_give_delta_tables() {
    for d in [2usize, 3] {
        let lambda = 0.8;
        let spec = InnerProductSpec::i(d, lambda).unwrap();
        for u in basis_i(4, d).unwrap() {
            let t = expand(&u.poly, &spec, 5).unwrap();
            for e in &t.entries {
                let want = if (e.n, e.j, e.nu) == (4, u.j, u.nu) { u.closed_norm.at(lambda) } else { 0.0 };
                assert!((e.value - want).abs() < 1e-12, "{e:?}");
            }
        }
    }
}

#[test]
fn random_degree_five_family_i_reconstructs() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let coefs: Vec<f64> = (0..21).map(|_| rng.random_range(-1.0..1.0)).collect();
    let f = poly_from(2, 5, &coefs);
    let t = expand(&f, &InnerProductSpec::i(2, 1.0).unwrap(), 5).unwrap();
    assert!(t.reconstruct().unwrap().relative_distance(&f) <= 1e-10);
    let json = t.to_json_value();
    assert_eq!(json["entries"].as_array().unwrap().len(), 21);
    assert_eq!(json["family"], "I");
}

#[test]
fn lambda_limit_shrinks_like_one_over_lambda() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for d in [2usize, 3] {
        let coefs: Vec<f64> = (0..40).map(|_| rng.random_range(-1.0..1.0)).collect();
        let f = poly_from(d, 5, &coefs);
        let lams: Vec<f64> = (2..=6).map(|k| 10f64.powi(k)).collect();
        let gaps = lambda_limit(&f, d, 5, &lams).unwrap();
        for (lam, gap) in &gaps {
            // gap·λ tends to Σ_n Σ_ν ⟨f, Y_ν^n⟩²
            let scaled = gap * lam;
            let first = gaps[0].1 * gaps[0].0;
            assert!((scaled - first).abs() <= 1e-6 * first, "λ={lam}: {scaled} vs {first}");
        }
    }
}
