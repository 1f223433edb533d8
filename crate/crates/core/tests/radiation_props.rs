use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::Vector3;
use proptest::prelude::*;
use vsp_core::farfield::*;
use vsp_core::kinematics::*;
use vsp_core::prewave::*;
use vsp_core::wavepacket::*;

fn fig3(strips: usize, ell: i32) -> (Grating, ElectronKinematics, PacketModel) {
    let kin = kinematics_from_beta(0.5).unwrap();
    let g = Grating::new(10e-6, strips, 2.7e-6).unwrap();
    let v = make_vortex_packet(mean_momentum_along_z(&kin), 1.0 / 100e-9, ell).unwrap();
    (g, kin, v)
}

#[test]
fn parity_in_ell() {
    let (g, kin, v) = fig3(500, 10);
    let det = DetectorGeometry::far_field(1.2, 0.4).unwrap();
    let a = total_line_intensity(&g, &v, &kin, &det, 1).unwrap();
    let b = total_line_intensity(&g, &v.with_opposite_ell(), &kin, &det, 1).unwrap();
    assert_eq!(a.w_e, b.w_e);
    assert_eq!(a.w_eq1, b.w_eq1);
    assert_eq!(a.w_eq2, b.w_eq2);
    assert_eq!(a.w_emu, -b.w_emu);
    let asym = oam_asymmetry(&g, &v, &kin, &det, 1).unwrap();
    let asym_m = oam_asymmetry(&g, &v.with_opposite_ell(), &kin, &det, 1).unwrap();
    assert!((asym + asym_m).abs() < 1e-15);
}

#[test]
fn magnetic_term_vanishes_at_right_angle() {
    let (g, kin, v) = fig3(200, 10);
    let det = DetectorGeometry::far_field(1.0, FRAC_PI_2).unwrap();
    assert_eq!(total_line_intensity(&g, &v, &kin, &det, 1).unwrap().w_emu, 0.0);
}

#[test]
fn phase_shift_leaves_far_field_unchanged() {
    let kin = kinematics_from_beta(0.5).unwrap();
    let g = Grating::new(10e-6, 50, 2.7e-6).unwrap();
    let pk = make_vortex_packet(mean_momentum_along_z(&kin), 1.0 / 100e-9, 2).unwrap();
    let det = DetectorGeometry::far_field(FRAC_PI_2, FRAC_PI_2).unwrap();
    let before = wigner_averaged_line(&pk, &g, &kin, &det, 1).unwrap();
    let after = wigner_averaged_line(&pk.shifted(Vector3::new(1e-6, 0.0, 0.0)), &g, &kin, &det, 1).unwrap();
    assert!((after / before - 1.0).abs() < 1e-10);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn discrete_sum_approaches_closed_form(n in 10usize..5000, theta in 0.3f64..2.8) {
        let (g, kin, v) = fig3(n, 10);
        let closed = quadrupole_spreading_ratio(&g, &v, &kin, theta).unwrap();
        let discrete = quadrupole_spreading_ratio_discrete(&g, &v, &kin, theta, 0.0).unwrap();
        prop_assert!((discrete / closed - 1.0).abs() <= 3.0 / n as f64);
    }

    #[test]
    fn beam_average_is_linear_in_count(nb in 1.0f64..1e6, phi in 0.5f64..2.6) {
        let kin = kinematics_from_beta(0.7).unwrap();
        let g = Grating::new(416e-9, 5, 1e-7).unwrap();
        let det = DetectorGeometry::at_distance(1.2, phi, 0.05).unwrap();
        let omega = 2.0 * PI / 416e-9;
        let one = beam_averaged_intensity_with(&BeamProfile::new(1e-5, 1.0).unwrap(), &g, &kin, &det, omega, 8).unwrap();
        let many = beam_averaged_intensity_with(&BeamProfile::new(1e-5, nb).unwrap(), &g, &kin, &det, omega, 8).unwrap();
        prop_assert!((many / (nb * one) - 1.0).abs() < 1e-12);
    }
}

#[test]
fn line_intensity_grows_linearly() {
    let det = DetectorGeometry::far_field(FRAC_PI_2, FRAC_PI_2).unwrap();
    let kin = kinematics_from_beta(0.5).unwrap();
    let per = |n: usize| {
        let g = Grating::new(10e-6, n, 2.7e-6).unwrap();
        charge_intensity_line(&g, &kin, &det, 1).unwrap() / n as f64
    };
    let base = per(100);
    for n in [300, 1000, 3500] {
        assert!((per(n) / base - 1.0).abs() < 0.02, "N = {n}");
    }
}

#[test]
fn mirrored_offsets_mirror_the_profile() {
    let kin = kinematics_from_beta(0.7).unwrap();
    let g = Grating::new(416e-9, 20, 1e-7).unwrap();
    let omega = 2.0 * PI / 416e-9;
    for phi in [1.2, 1.4] {
        let det = DetectorGeometry::at_distance(1.1, phi, 0.02).unwrap();
        let mirror = DetectorGeometry::at_distance(1.1, PI - phi, 0.02).unwrap();
        let a = prewave_intensity(&g, &kin, &det, omega, [3e-5, 0.0]).unwrap();
        let b = prewave_intensity(&g, &kin, &mirror, omega, [-3e-5, 0.0]).unwrap();
        assert!((a / b - 1.0).abs() < 1e-9, "phi {phi}: {a} vs {b}");
    }
}
