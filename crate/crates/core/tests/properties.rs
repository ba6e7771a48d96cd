use num_complex::Complex64;
use proptest::prelude::*;

use slabkernel::eigen::{characteristic, solve_eigenvalues};
use slabkernel::kernel::KernelEval;
use slabkernel::model::{FieldRequest, SlabModel, SourceSpec};
use slabkernel::profile::{temperature, QuadraturePlan};
use slabkernel::quadrature::{integrate, Tolerance};
use slabkernel::scenario::Scenario;
use slabkernel::specfun::{bessel_k0, erf_complex, faddeeva_w};

fn slab() -> impl Strategy<Value = SlabModel> {
    (0.2f64..3.0, 0.5f64..8.0, 0.0f64..3.0, 0.05f64..3.0, -2.0f64..2.0)
        .prop_map(|(alpha, w, h1, h2, v)| SlabModel::new(alpha, w, h1, h2, v))
}

fn source() -> impl Strategy<Value = SourceSpec> {
    (
        prop_oneof![Just(0usize), Just(1usize), Just(2usize)],
        -1.0f64..1.0,
        0.0f64..1.0,
        0.2f64..2.0,
        0.2f64..2.0,
        0.1f64..1.0,
        0.1f64..3.0,
        0.0f64..2.0,
        proptest::option::of(0.1f64..4.0),
    )
        .prop_map(|(kind, xc, zfrac, sx, sy, sz, a, t_on, dur)| {
            let c = [xc, 0.0, zfrac];
            let s = match kind {
                0 => SourceSpec::gaussian(c, [sx, sy, sz], a),
                1 => SourceSpec::double_ellipsoid(c, sx, 0.5 * sx + 0.1, sy, sz, 0.4 * a, 0.6 * a),
                _ => SourceSpec::point(c, a),
            };
            s.switched(t_on, dur.map_or(f64::INFINITY, |d| t_on + d))
                .with_power_law(vec![1.0, 0.25])
        })
}

fn quick() -> ProptestConfig {
    ProptestConfig {
        cases: 24,
        ..ProptestConfig::default()
    }
}

proptest! {
    #![proptest_config(quick())]

    #[test]
    fn scenario_parts_round_trip_through_json(model in slab(), src in source()) {
        let text = serde_json::to_string(&model).unwrap();
        prop_assert_eq!(serde_json::from_str::<SlabModel>(&text).unwrap(), model);
        let text = serde_json::to_string(&src).unwrap();
        prop_assert_eq!(serde_json::from_str::<SourceSpec>(&text).unwrap(), src);
    }

    #[test]
    fn eigenvalues_sit_one_per_bracket(model in slab()) {
        prop_assume!(model.h1 + model.h2 > 1e-6);
        let spectrum = solve_eigenvalues(&model, 40).unwrap();
        let pi = std::f64::consts::PI;
        for (i, mode) in spectrum.modes.iter().enumerate() {
            let n = (i + 1) as f64;
            prop_assert!(mode.lambda > (n - 1.0) * pi / model.w && mode.lambda < n * pi / model.w);
            let scale = mode.lambda * mode.lambda + model.h1 * model.h2 + mode.lambda * (model.h1 + model.h2);
            prop_assert!(characteristic(&model, mode.lambda).abs() <= 1e-9 * scale);
        }
    }

    #[test]
    fn modes_are_orthogonal(model in slab(), m in 0usize..6, n in 0usize..6) {
        let spectrum = solve_eigenvalues(&model, 6).unwrap();
        let (a, b) = (&spectrum.modes[m], &spectrum.modes[n]);
        let tol = Tolerance::new(1e-13, 1e-11);
        let dot = integrate(|z| a.phi(&model, z) * b.phi(&model, z), 0.0, model.w, tol).value;
        let expected = if m == n { a.norm } else { 0.0 };
        prop_assert!((dot - expected).abs() <= 1e-9 * a.norm.max(b.norm));
    }

    #[test]
    fn z_kernel_is_symmetric_and_causal(
        model in slab(),
        fz in 0.0f64..1.0,
        fzp in 0.0f64..1.0,
        t in 0.001f64..5.0,
    ) {
        let k = KernelEval::new(&model, 160).unwrap();
        let (z, zp) = (fz * model.w, fzp * model.w);
        let a = k.g_z(z, zp, t);
        let b = k.g_z(zp, z, t);
        prop_assert!((a - b).abs() <= 1e-10 * a.abs().max(1e-300));
        prop_assert!(a >= -1e-14);
        prop_assert_eq!(k.g_z(z, zp, -t), 0.0);
        prop_assert_eq!(k.green_full([0.0, 0.0, z], [0.0, 0.0, zp], 0.0), 0.0);
    }

    #[test]
    fn z_kernel_has_the_semigroup_property(
        model in slab(),
        fz in 0.0f64..1.0,
        fzp in 0.0f64..1.0,
        t1 in 0.05f64..2.0,
        t2 in 0.05f64..2.0,
    ) {
        let k = KernelEval::new(&model, 160).unwrap();
        let (z, zp) = (fz * model.w, fzp * model.w);
        let tol = Tolerance::new(1e-14, 1e-11);
        let conv = integrate(|y| k.g_z(z, y, t1) * k.g_z(y, zp, t2), 0.0, model.w, tol).value;
        let direct = k.g_z(z, zp, t1 + t2);
        prop_assert!((conv - direct).abs() <= 1e-7 * direct.max(1e-12));
    }

    #[test]
    fn more_cooling_means_less_heat(model in slab(), extra in 0.01f64..2.0, fz in 0.0f64..1.0, t in 0.01f64..5.0) {
        let hotter = KernelEval::new(&model, 160).unwrap();
        let mut cooled = model;
        cooled.h1 += extra;
        let colder = KernelEval::new(&cooled, 160).unwrap();
        let z = fz * model.w;
        let zp = 0.5 * model.w;
        prop_assert!(colder.g_z(z, zp, t) <= hotter.g_z(z, zp, t) * (1.0 + 1e-9) + 1e-300);
    }

    #[test]
    fn erf_respects_its_symmetries(x in -5.0f64..5.0, y in -5.0f64..5.0) {
        let z = Complex64::new(x, y);
        let e = erf_complex(z).unwrap();
        let neg = erf_complex(-z).unwrap();
        let conj = erf_complex(z.conj()).unwrap();
        let scale = e.norm().max(1e-300);
        prop_assert!((e + neg).norm() <= 1e-13 * scale);
        prop_assert!((e.conj() - conj).norm() <= 1e-13 * scale);
        // w(z) for Im z ≥ 0 is bounded by 1/√π·... and never exceeds 1.
        prop_assert!(faddeeva_w(Complex64::new(x, y.abs())).norm() <= 1.0 + 1e-15);
    }

    #[test]
    fn k0_is_positive_and_decreasing(x in 1e-6f64..600.0, dx in 1e-3f64..5.0) {
        let a = bessel_k0(x).unwrap();
        let b = bessel_k0(x + dx).unwrap();
        prop_assert!(a > 0.0 && b < a);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 8, ..ProptestConfig::default() })]

    #[test]
    fn temperature_is_linear_and_non_negative(model in slab(), src in source(), scale in 0.1f64..5.0) {
        prop_assume!(src.variant != slabkernel::model::SourceVariant::PointOnOff);
        let mut src = src;
        src.center[2] *= model.w;
        let kernel = KernelEval::new(&model, 80).unwrap();
        let points = vec![[0.0, 0.0, 0.5 * model.w], [-1.0, 0.5, 0.0], [1.0, 0.0, model.w]];
        let request = FieldRequest::new(points, vec![src.t_on + 0.5, src.t_on + 3.0]);
        let plan = QuadraturePlan::default();
        let base = temperature(&kernel, &src, &request, &plan).unwrap();
        let mut bigger = src.clone();
        match &mut bigger.amplitudes {
            slabkernel::model::Amplitudes::Single { a0 } => *a0 *= scale,
            slabkernel::model::Amplitudes::Split { a_left, a_right } => {
                *a_left *= scale;
                *a_right *= scale;
            }
        }
        let scaled = temperature(&kernel, &bigger, &request, &plan).unwrap();
        let peak = base.max_abs();
        for (ra, rb) in base.values.iter().zip(&scaled.values) {
            for (a, b) in ra.iter().zip(rb) {
                prop_assert!(*a >= -1e-12 * peak.max(1e-300));
                prop_assert!((scale * a - b).abs() <= 1e-9 * scale * peak.max(1e-300));
            }
        }
    }
}

#[test]
fn shipped_scenarios_parse_and_validate() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios");
    let mut count = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "json") {
            let s = Scenario::load(&path).unwrap();
            s.validate().unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            count += 1;
        }
    }
    assert!(count >= 4);
}
