use fibercal_core::baseline::{denormalize, normalize, Baseline, RawFrame};
use fibercal_core::linalg::{lstsq_fit, lstsq_solve, pseudoinverse, DEFAULT_RCOND};
use fibercal_core::{
    CalibrationModel, FitMeta, ForceVector, GridConfig, IndentationState, IntensityFrame, Matrix,
    SyntheticSensor,
};
use proptest::prelude::*;
use std::sync::OnceLock;

fn matrix(rows: usize, cols: usize, data: Vec<f64>) -> Matrix {
    Matrix::new(rows, cols, data).unwrap()
}

/// Random matrix up to 7×7 whose rank is capped by an inner product dimension.
fn low_rank() -> impl Strategy<Value = Matrix> {
    (1usize..=7, 1usize..=7)
        .prop_flat_map(|(r, c)| (Just(r), Just(c), 1usize..=r.min(c)))
        .prop_flat_map(|(r, c, k)| {
            (
                prop::collection::vec(-2.0f64..2.0, r * k),
                prop::collection::vec(-2.0f64..2.0, k * c),
            )
                .prop_map(move |(a, b)| matrix(r, k, a).matmul(&matrix(k, c, b)).unwrap())
        })
}

fn rel(a: &Matrix, b: &Matrix, scale: f64) -> f64 {
    a.sub(b).unwrap().frobenius_norm() / scale.max(1e-300)
}

fn reference_model() -> &'static CalibrationModel {
    static MODEL: OnceLock<CalibrationModel> = OnceLock::new();
    MODEL.get_or_init(|| {
        let grid = GridConfig::default();
        let sensor = SyntheticSensor::reference_noisy(&grid, 17).unwrap();
        CalibrationModel::calibrate(&sensor.generate_grid_dataset(&grid).unwrap().calibration)
            .unwrap()
    })
}

fn frame() -> impl Strategy<Value = IntensityFrame> {
    prop::array::uniform7(-0.5f64..0.5).prop_map(|pd| IntensityFrame::new(pd).unwrap())
}

proptest! {
    #[test]
    fn penrose_conditions(a in low_rank()) {
        let p = pseudoinverse(&a, DEFAULT_RCOND).unwrap();
        let na = a.frobenius_norm();
        let np = p.frobenius_norm();
        let ap = a.matmul(&p).unwrap();
        let pa = p.matmul(&a).unwrap();
        prop_assert!(rel(&ap.matmul(&a).unwrap(), &a, na) < 1e-9);
        prop_assert!(rel(&pa.matmul(&p).unwrap(), &p, np) < 1e-9);
        prop_assert!(rel(&ap.transpose(), &ap, ap.frobenius_norm()) < 1e-9);
        prop_assert!(rel(&pa.transpose(), &pa, pa.frobenius_norm()) < 1e-9);
    }

    #[test]
    fn fit_residual_is_orthogonal_to_regressors(
        x in prop::collection::vec(-1.0f64..1.0, 3 * 12),
        b in prop::collection::vec(-1.0f64..1.0, 2 * 12),
    ) {
        let x = matrix(3, 12, x);
        let b = matrix(2, 12, b);
        let g = lstsq_fit(&x, &b).unwrap();
        let resid = x.sub(&g.matmul(&b).unwrap()).unwrap();
        let ortho = resid.matmul(&b.transpose()).unwrap();
        prop_assert!(ortho.frobenius_norm() <= 1e-9 * x.frobenius_norm() * b.frobenius_norm());
    }

    #[test]
    fn solve_residual_is_orthogonal_to_columns(
        g in prop::collection::vec(-1.0f64..1.0, 6 * 3),
        x in prop::collection::vec(-1.0f64..1.0, 6),
    ) {
        let g = matrix(6, 3, g);
        let x = Matrix::column_vector(&x).unwrap();
        let b = lstsq_solve(&g, &x).unwrap();
        let resid = x.sub(&g.matmul(&b).unwrap()).unwrap();
        prop_assert!(g.transpose().matmul(&resid).unwrap().max_abs() < 1e-9);
    }

    #[test]
    fn exact_models_are_recovered(
        gain in prop::collection::vec(-1.0f64..1.0, 3 * 2),
        b in prop::collection::vec(-1.0f64..1.0, 2 * 20),
    ) {
        let gain = matrix(3, 2, gain);
        let b = matrix(2, 20, b);
        let x = gain.matmul(&b).unwrap();
        let fitted = lstsq_fit(&x, &b).unwrap();
        prop_assert!(rel(&fitted, &gain, gain.frobenius_norm()) < 1e-9);
    }

    #[test]
    fn pipeline_is_linear(f1 in frame(), f2 in frame(), a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let model = reference_model();
        let combined = f1.scaled(a).add(&f2.scaled(b));
        let r = model.recover_force(&combined);
        let r1 = model.recover_force(&f1);
        let r2 = model.recover_force(&f2);
        let lin = |x: f64, y: f64| a * x + b * y;
        let force = [r.force.fx, r.force.fy, r.force.fz];
        let expected = [
            lin(r1.force.fx, r2.force.fx),
            lin(r1.force.fy, r2.force.fy),
            lin(r1.force.fz, r2.force.fz),
        ];
        for (got, want) in force.iter().zip(expected) {
            prop_assert!((got - want).abs() < 1e-9);
        }
        let u = r.indentation.raw;
        prop_assert!((u.depth - lin(r1.indentation.raw.depth, r2.indentation.raw.depth)).abs() < 1e-9);
        prop_assert!((u.radius - lin(r1.indentation.raw.radius, r2.indentation.raw.radius)).abs() < 1e-9);
    }

    #[test]
    fn consistent_geometry_perturbation_leaves_force_unchanged(
        f in frame(),
        r in prop::collection::vec(-1.0f64..1.0, 3 * 2),
        k_upper in prop::collection::vec(-1.0f64..1.0, 4 * 2),
        c in prop::collection::vec(-1.0f64..1.0, 6 * 3),
        dd in -2.0f64..2.0,
        dr in -2.0f64..2.0,
    ) {
        let r = matrix(3, 2, r);
        // K shares its PD5/PD6 rows with R, so one δU moves every channel consistently.
        let k_data: Vec<f64> = k_upper.into_iter().chain(r.as_slice()[..4].iter().copied()).collect();
        let k = matrix(6, 2, k_data);
        let c = matrix(6, 3, c);
        let Ok(model) = CalibrationModel::new(r.clone(), k.clone(), c, FitMeta::default()) else {
            return Ok(());
        };
        let du = Matrix::column_vector(&[dd, dr]).unwrap();
        let ku = k.matmul(&du).unwrap();
        let ru = r.matmul(&du).unwrap();
        let mut pd = f.pd;
        for (i, p) in pd.iter_mut().take(6).enumerate() {
            *p += ku[(i, 0)];
        }
        pd[6] += ru[(2, 0)];
        let base = model.recover_force(&f);
        let moved = model.recover_force(&IntensityFrame::new(pd).unwrap());
        let tol = 1e-9 * (1.0 + base.force.fx.abs() + base.force.fy.abs() + base.force.fz.abs());
        prop_assert!((moved.indentation.raw.depth - base.indentation.raw.depth - dd).abs() < 1e-9);
        prop_assert!((moved.indentation.raw.radius - base.indentation.raw.radius - dr).abs() < 1e-9);
        prop_assert!((moved.force.fx - base.force.fx).abs() < tol);
        prop_assert!((moved.force.fy - base.force.fy).abs() < tol);
        prop_assert!((moved.force.fz - base.force.fz).abs() < tol);
    }

    #[test]
    fn mae_is_order_invariant(seed in any::<u64>()) {
        let model = reference_model();
        let grid = GridConfig::default();
        let sensor = SyntheticSensor::reference_noisy(&grid, 5).unwrap();
        let test: Vec<_> = sensor.generate_grid_dataset(&grid).unwrap().test.into_iter().take(200).collect();
        let mut shuffled = test.clone();
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed);
        rand::seq::SliceRandom::shuffle(shuffled.as_mut_slice(), &mut rng);
        let a = model.evaluate(&test).unwrap();
        let b = model.evaluate(&shuffled).unwrap();
        for (x, y) in [
            (a.mae_fx, b.mae_fx), (a.mae_fy, b.mae_fy), (a.mae_fz, b.mae_fz),
            (a.mae_depth, b.mae_depth), (a.mae_diameter, b.mae_diameter),
        ] {
            prop_assert!((x - y).abs() <= 1e-12 * x.max(1.0));
        }
    }

    #[test]
    fn noise_free_frames_are_additive(
        a in prop::array::uniform5(-3.0f64..3.0),
        b in prop::array::uniform5(-3.0f64..3.0),
    ) {
        let sensor = SyntheticSensor::reference();
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(0);
        let mut frame = |v: [f64; 5]| {
            sensor
                .synth_frame(
                    &ForceVector::new(v[0], v[1], v[2]),
                    &IndentationState::new(v[3], v[4]),
                    &mut rng,
                )
                .pd
        };
        let sum: [f64; 5] = core::array::from_fn(|i| a[i] + b[i]);
        let (fa, fb, fs) = (frame(a), frame(b), frame(sum));
        for i in 0..7 {
            prop_assert!((fs[i] - fa[i] - fb[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn normalize_inverts_denormalize(
        i0 in prop::array::uniform7(0.1f64..10.0),
        pd in prop::array::uniform7(-0.99f64..2.0),
        ts in any::<u64>(),
    ) {
        let baseline = Baseline::new(i0, 1).unwrap();
        let frame = IntensityFrame::new(pd).unwrap();
        let raw = denormalize(&frame, &baseline, ts);
        prop_assert_eq!(raw.timestamp_ms, ts);
        let back = normalize(&raw, &baseline);
        for (b, f) in back.pd.iter().zip(pd) {
            prop_assert!((b - f).abs() <= 1e-12);
        }
    }

    #[test]
    fn denormalize_inverts_normalize(
        i0 in prop::array::uniform7(0.1f64..10.0),
        readings in prop::array::uniform7(0.0f64..20.0),
        ts in any::<u64>(),
    ) {
        let baseline = Baseline::new(i0, 1).unwrap();
        let raw = RawFrame::new(readings, ts).unwrap();
        let back = denormalize(&normalize(&raw, &baseline), &baseline, ts);
        for (b, r) in back.readings.iter().zip(readings) {
            prop_assert!((b - r).abs() <= 1e-12 * r.max(1.0));
        }
    }
}
