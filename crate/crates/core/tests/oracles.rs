mod common;

use common::*;
use excitonscope::bath::BathSpec;
use excitonscope::filter::{spectrogram, FilterSpec};

#[test]
fn pair_basis_matches_product_space() {
    for n in [2, 3] {
        let (de, dd) = exciton_oracle_error(&irregular_aggregate(n));
        assert!(de <= 1e-9 && dd <= 1e-9, "{n} sites: energies {de:.2e}, d_fe {dd:.2e}");
    }
}

#[test]
fn correlation_real_part_matches_time_integral() {
    let bath = BathSpec::bundled();
    for w in [-400.0, -35.0, 12.0, 160.0, 900.0] {
        let closed = bath.correlation_real(w);
        let quad = half_fourier_real(&bath, w);
        assert!((closed - quad).abs() <= 1e-6 * closed.abs(), "{w}: {closed} vs {quad}");
    }
}

#[test]
fn spectrogram_matches_its_definition() {
    let f = FilterSpec {
        t_bar: 40.0,
        omega_bar: 15100.0,
        sigma_t: 4.8681,
        sigma_omega: 10.0,
    };
    for &(t, tau) in &[(40.0, 0.0), (45.0, 12.0), (60.0, -15.0), (300.0, 250.0), (41.0, -0.5), (39.0, 3.0)] {
        let closed = spectrogram(&f, t, tau);
        let quad = spectrogram_from_definition(&f, t, tau);
        assert!((closed - quad).norm() <= 1e-8 * closed.norm().max(1e-300), "({t}, {tau}): {closed} vs {quad}");
    }
}
