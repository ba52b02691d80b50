//! Report files for each preset at a fixed seed, compared against stored
//! copies. Set `EHD_BLESS=1` to rewrite the stored copies.

mod common;

use common::check_preset;

#[test]
fn taylor_green_report_is_stable() {
    check_preset("taylor_green", "taylor_green").unwrap();
}

#[test]
fn charged_shear_report_is_stable() {
    check_preset("charged_shear", "charged_shear").unwrap();
}

#[test]
fn random_smooth_report_is_stable() {
    check_preset("random_smooth", "random_smooth(42, 1.0, 2.0)").unwrap();
}
