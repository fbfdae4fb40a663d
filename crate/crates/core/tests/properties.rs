use proptest::prelude::*;
use qoslab_core::experiments::{estimate_constants, random_coeffs, EstimateOptions, Method};
use qoslab_core::spaces::SampleSpace;
use qoslab_core::systems::{
    build_blocked_scalar, build_finite_group_dual, build_rademacher, complete_dims, BlockBase,
    FiniteGroup, QSystemInstance, SystemParams,
};
use qoslab_core::transforms::{
    forward, inverse, lp_omega_norm, lp_sigma_norm, CoeffFamily, VectorSpaceDesc,
};
use qoslab_core::{Complex64, Exponent, RngStream};

fn exact_systems() -> Vec<QSystemInstance> {
    let (dims, levels) = complete_dims(&[1, 2, 1, 2], Some(4)).unwrap();
    vec![
        build_finite_group_dual(FiniteGroup::S3).unwrap(),
        build_finite_group_dual(FiniteGroup::D4).unwrap(),
        build_finite_group_dual(FiniteGroup::Q8).unwrap(),
        build_finite_group_dual(FiniteGroup::Cyclic(7)).unwrap(),
        build_blocked_scalar(
            BlockBase::Trig,
            &SystemParams::from_dims(&dims).unwrap(),
            levels,
        )
        .unwrap(),
        build_blocked_scalar(
            BlockBase::Walsh,
            &SystemParams::from_dims(&dims).unwrap(),
            levels,
        )
        .unwrap(),
    ]
}

fn descs() -> Vec<VectorSpaceDesc> {
    vec![
        VectorSpaceDesc::Scalar,
        VectorSpaceDesc::lq(Exponent::TWO, 3).unwrap(),
        VectorSpaceDesc::schatten(Exponent::TWO, 2).unwrap(),
    ]
}

fn everywhere(sys: &QSystemInstance) -> Vec<usize> {
    (0..sys.params().len()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn round_trip_and_parseval(seed in any::<u64>(), which in 0usize..6, e in 0usize..3) {
        let sys = &exact_systems()[which];
        let desc = descs()[e];
        let a = random_coeffs(sys.params(), desc, &everywhere(sys), &mut RngStream::new(seed, 0));
        let f = inverse(&a, sys).unwrap();
        let back = forward(&f, sys).unwrap();
        prop_assert!(back.max_abs_diff(&a).unwrap() <= 1e-10);
        let lhs = lp_omega_norm(&f, Exponent::TWO);
        let rhs = lp_sigma_norm(&a, Exponent::TWO).unwrap();
        prop_assert!((lhs / rhs - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn transforms_are_linear(seed in any::<u64>(), which in 0usize..6, re in -3.0f64..3.0, im in -3.0f64..3.0) {
        let sys = &exact_systems()[which];
        let mut rng = RngStream::new(seed, 1);
        let desc = VectorSpaceDesc::lq(Exponent::ONE, 2).unwrap();
        let a = random_coeffs(sys.params(), desc, &everywhere(sys), &mut rng);
        let b = random_coeffs(sys.params(), desc, &everywhere(sys), &mut rng);
        let z = Complex64::new(re, im);
        let combo = a.scale(z).add(&b).unwrap();
        let fa = inverse(&a, sys).unwrap();
        let fb = inverse(&b, sys).unwrap();
        let fc = inverse(&combo, sys).unwrap();
        let scale = 1.0 + z.norm();
        for w in 0..sys.point_count() {
            for c in 0..2 {
                let expect = fa.value(w)[c] * z + fb.value(w)[c];
                prop_assert!((fc.value(w)[c] - expect).norm() <= 1e-11 * scale * 10.0);
            }
        }
        let back = forward(&fc, sys).unwrap();
        let expect = forward(&fa, sys).unwrap().scale(z).add(&forward(&fb, sys).unwrap()).unwrap();
        prop_assert!(back.max_abs_diff(&expect).unwrap() <= 1e-11 * scale * 10.0);
    }

    #[test]
    fn norms_obey_triangle_inequality(seed in any::<u64>(), which in 0usize..6, q in 1.0f64..6.0) {
        let sys = &exact_systems()[which];
        let mut rng = RngStream::new(seed, 2);
        let q = Exponent::new(q).unwrap();
        let desc = VectorSpaceDesc::lq(q, 3).unwrap();
        let a = random_coeffs(sys.params(), desc, &everywhere(sys), &mut rng);
        let b = random_coeffs(sys.params(), desc, &everywhere(sys), &mut rng);
        let sum = a.add(&b).unwrap();
        let n = |x: &CoeffFamily| lp_sigma_norm(x, q).unwrap();
        prop_assert!(n(&sum) <= (n(&a) + n(&b)) * (1.0 + 1e-12));
        let (fa, fb, fs) = (inverse(&a, sys).unwrap(), inverse(&b, sys).unwrap(), inverse(&sum, sys).unwrap());
        for p in [Exponent::ONE, Exponent::TWO, Exponent::Infinity] {
            prop_assert!(lp_omega_norm(&fs, p) <= (lp_omega_norm(&fa, p) + lp_omega_norm(&fb, p)) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn schatten_coefficient_norm_is_homogeneous(seed in any::<u64>(), which in 0usize..6, q in 1.0f64..4.0, t in 0.01f64..50.0) {
        let sys = &exact_systems()[which];
        let q = Exponent::new(q).unwrap();
        let desc = VectorSpaceDesc::schatten(q, 2).unwrap();
        let a = random_coeffs(sys.params(), desc, &everywhere(sys), &mut RngStream::new(seed, 3));
        let scaled = a.scale(Complex64::new(0.0, t));
        let (na, ns) = (lp_sigma_norm(&a, q).unwrap(), lp_sigma_norm(&scaled, q).unwrap());
        prop_assert!((ns - t * na).abs() <= 1e-10 * t * na);
    }
}

#[test]
fn exact_svd_monotone_over_nested_subsets() {
    let rad = build_rademacher(
        &SystemParams::from_dims(&[1, 1, 2, 3]).unwrap(),
        1500,
        &RngStream::new(11, 0),
    )
    .unwrap();
    let desc = VectorSpaceDesc::lq(Exponent::TWO, 2).unwrap();
    let mut last = 0.0;
    for k in 1..=4 {
        let subset: Vec<usize> = (0..k).collect();
        let r = estimate_constants(
            &rad,
            desc,
            &subset,
            Exponent::TWO,
            &EstimateOptions::new(Method::ExactSvd, 1),
            &RngStream::new(0, 0),
        )
        .unwrap();
        let sampled = r.exact.unwrap().sampled_sigma_max.unwrap();
        assert!(sampled >= last, "{sampled} < {last}");
        last = sampled;
    }
}

#[test]
fn ascent_monotone_over_nested_subsets_with_warm_starts() {
    let sys = build_finite_group_dual(FiniteGroup::Cyclic(8)).unwrap();
    let desc = VectorSpaceDesc::lq(Exponent::ONE, 4).unwrap();
    let mut prev: Option<(f64, f64, Vec<CoeffFamily>)> = None;
    for k in 1..=8 {
        let subset: Vec<usize> = (0..k).collect();
        let mut opts = EstimateOptions::new(Method::StochasticAscent, 400);
        if let Some((_, _, w)) = &prev {
            opts.warm_start = w.clone();
        }
        let r = estimate_constants(
            &sys,
            desc,
            &subset,
            Exponent::TWO,
            &opts,
            &RngStream::new(7, k as u64),
        )
        .unwrap();
        if let Some((k1, k2, _)) = &prev {
            assert!(r.k1_lower >= k1 * (1.0 - 1e-12));
            assert!(r.k2_lower >= k2 * (1.0 - 1e-12));
        }
        prev = Some((
            r.k1_lower,
            r.k2_lower,
            vec![r.k1_witness.unwrap(), r.k2_witness.unwrap()],
        ));
    }
}

#[test]
fn monte_carlo_space_weights_are_uniform() {
    let space = SampleSpace::monte_carlo(1000, RngStream::new(1, 2).descriptor()).unwrap();
    assert!(space.weights().iter().all(|&w| w == 1e-3));
    assert!((space.check_tolerance() - 5.0 / 1000f64.sqrt()).abs() < 1e-15);
}
