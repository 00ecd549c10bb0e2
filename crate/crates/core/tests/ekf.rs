use jape_core::ekf::{ekf_init, ekf_propagate, EkfState, EkfTuning, Mat18, Vec18, ATT, LEVER, POS};
use jape_core::rotation::{dcm_to_rotvec, rotvec_to_dcm, Euler};
use jape_core::sim::{
    antenna_fix, synthesize_gnss, synthesize_imu, MotionProfile, SensorSpec, Trajectory, DEG_PER_HOUR, MICRO_G,
};
use jape_core::{Error, Vec3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn moving_state(rng: &mut ChaCha8Rng) -> EkfState {
    let profile = MotionProfile::default_maneuver();
    let truth = Trajectory::new(&profile).unwrap().at(rng.gen_range(0.0..50.0)).unwrap();
    let fix = antenna_fix(&truth, &Vec3::zeros()).unwrap();
    let mut s = ekf_init(&truth.c_bn, &fix, EkfTuning::from_spec(&SensorSpec::navigation_grade()));
    s.lever_arm = Vec3::from_fn(|_, _| rng.gen_range(-3.0..3.0));
    s.body_rate = truth.omega_ib_b;
    s
}

#[test]
fn measurement_jacobian_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let h = 1e-6;
    for _ in 0..50 {
        let s = moving_state(&mut rng);
        let jac = s.measurement_jacobian();
        let scale = jac.amax();
        for i in 0..18 {
            let mut e = Vec18::zeros();
            e[i] = h;
            let fd = (s.measurement(&e) - s.measurement(&-e)) / (2.0 * h);
            let err = (fd - jac.column(i)).amax() / scale;
            assert!(err < 1e-5, "column {i}: {err:e}");
        }
    }
}

#[test]
fn lever_error_appears_in_position_innovation() {
    let profile = MotionProfile::stationary(
        MotionProfile::default_maneuver().initial_attitude,
        MotionProfile::default_maneuver().initial_position,
    );
    let truth = Trajectory::new(&profile).unwrap().at(0.0).unwrap();
    let lever = Vec3::new(0.5, 1.2, -0.7);
    let delta = Vec3::new(0.03, -0.02, 0.05);
    let fix = antenna_fix(&truth, &lever).unwrap();
    let mut s = ekf_init(&truth.c_bn, &fix, EkfTuning::zero());
    s.nav.position = truth.position;
    s.nav.velocity = truth.velocity;
    s.lever_arm = lever - delta;
    s.body_rate = truth.omega_ib_b;
    let y = s.innovation(&fix).unwrap();
    let expected = truth.c_bn * delta;
    assert!((y.fixed_rows::<3>(0) - expected).amax() < 1e-6, "{y:?} vs {expected:?}");
}

struct Run {
    states: Vec<EkfState>,
    traj: Trajectory,
    spec: SensorSpec,
}

fn run_filter(
    spec: &SensorSpec,
    tuning: EkfTuning,
    start: f64,
    duration: f64,
    exact: bool,
    attitude_offset: Vec3,
) -> Run {
    let profile = MotionProfile::default_maneuver();
    let traj = Trajectory::new(&profile).unwrap();
    let imu = synthesize_imu(&profile, spec, 7, duration).unwrap();
    let gnss = synthesize_gnss(&profile, spec, 7, duration).unwrap();
    let k0 = (start / spec.interval()).round() as usize;
    let truth0 = traj.at(gnss[k0].t).unwrap();
    let c0 = rotvec_to_dcm(&attitude_offset) * truth0.c_bn;
    let mut s = ekf_init(&c0, &gnss[k0], tuning);
    if exact {
        s.nav.position = truth0.position;
        s.nav.velocity = truth0.velocity;
        s.gyro_bias = spec.gyro_bias;
        s.accel_bias = spec.accel_bias;
        s.lever_arm = spec.lever_arm;
        s.body_rate = truth0.omega_ib_b;
    }
    let mut states = Vec::new();
    for (inc, fix) in imu[k0..].iter().zip(&gnss[k0 + 1..]) {
        s.propagate(inc).unwrap();
        s.update(fix).unwrap();
        states.push(s.clone());
    }
    Run {
        states,
        traj,
        spec: *spec,
    }
}

#[test]
fn covariance_stays_symmetric_psd() {
    let spec = SensorSpec::navigation_grade();
    let run = run_filter(
        &spec,
        EkfTuning::from_spec(&spec),
        0.0,
        60.0,
        false,
        Vec3::new(0.01, 0.1, -0.01),
    );
    for s in run.states.iter().step_by(100) {
        assert!((s.cov - s.cov.transpose()).amax() == 0.0);
        assert!(s.cov.symmetric_eigenvalues().min() >= -1e-12);
    }
}

#[test]
fn propagation_without_measurements_grows_trace() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let mut s = moving_state(&mut rng);
    let profile = MotionProfile::default_maneuver();
    let imu = synthesize_imu(&profile, &SensorSpec::navigation_grade(), 1, 1.0).unwrap();
    s.nav.t = 0.0;
    for inc in &imu {
        let next = ekf_propagate(&s, inc).unwrap();
        assert!(next.cov.trace() >= s.cov.trace());
        s = next;
    }
    let late = jape_core::sim::ImuIncrement {
        t: s.nav.t + 0.5,
        ..imu[0]
    };
    assert!(matches!(s.propagate(&late), Err(Error::TimeGap { .. })));
}

#[test]
fn exact_start_without_noise_stays_on_truth() {
    let spec = SensorSpec::navigation_grade().noise_free();
    let mut tuning = EkfTuning::zero();
    tuning.velocity_meas_sigma = 1e-4;
    tuning.position_meas_sigma = 1e-3;
    let run = run_filter(&spec, tuning, 0.0, 100.0, true, Vec3::zeros());
    let (mut att, mut vel) = (0.0f64, 0.0f64);
    for s in &run.states {
        let truth = run.traj.at(s.nav.t).unwrap();
        att = att.max(dcm_to_rotvec(&(s.nav.c_bn * truth.c_bn.transpose())).amax());
        vel = vel.max((s.nav.velocity - truth.velocity).amax());
    }
    println!("attitude {att:e} rad, velocity {vel:e} m/s");
    assert!(att < 1e-8 && vel < 1e-5);
    let last = run.states.last().unwrap();
    assert_eq!(last.cov, Mat18::zeros());
    assert!((last.lever_arm - run.spec.lever_arm).amax() < 1e-9);
}

#[test]
fn filter_recovers_heading_from_eight_degrees() {
    let spec = SensorSpec::navigation_grade();
    let run = run_filter(
        &spec,
        EkfTuning::from_spec(&spec),
        30.0,
        300.0,
        false,
        Vec3::new(0.005, 0.14, -0.01),
    );
    let last = run.states.last().unwrap();
    let truth = run.traj.at(last.nav.t).unwrap();
    let err = Euler::from_body_to_nav(&last.nav.c_bn).difference(&Euler::from_body_to_nav(&truth.c_bn));
    println!(
        "yaw {:e} pitch {:e} roll {:e} deg",
        err.yaw.to_degrees(),
        err.pitch.to_degrees(),
        err.roll.to_degrees()
    );
    println!(
        "ba err ug {:?}",
        ((last.accel_bias - spec.accel_bias) / MICRO_G).as_slice()
    );
    println!("bg deg/h {:?}", (last.gyro_bias / DEG_PER_HOUR).as_slice());
    println!(
        "lever err mm {:?}",
        ((last.lever_arm - spec.lever_arm) * 1e3).as_slice()
    );
    let sig = |i: usize| last.cov[(i, i)].sqrt();
    println!(
        "sigma att deg {:e} {:e} {:e}; lever {:e}; pos {:e}",
        sig(ATT).to_degrees(),
        sig(ATT + 1).to_degrees(),
        sig(ATT + 2).to_degrees(),
        sig(LEVER),
        sig(POS)
    );
    assert!(err.yaw.to_degrees().abs() < 0.05);
    assert!((last.lever_arm - spec.lever_arm).amax() < 0.05);
}
