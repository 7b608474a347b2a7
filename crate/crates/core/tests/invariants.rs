use excitonscope::aggregate::AggregateSpec;
use excitonscope::bath::BathSpec;
use excitonscope::excitation::selectivity;
use excitonscope::exciton::{ExcitonEigensystem, Manifold, PairIndex};
use excitonscope::filter::{filtered_lineshape, spectrogram, FilterSpec};
use excitonscope::output::fmt_float;
use excitonscope::propagate::population_propagator;
use excitonscope::transport::TransportModel;
use proptest::prelude::*;

fn aggregate() -> impl Strategy<Value = AggregateSpec> {
    (2usize..=4).prop_flat_map(|n| {
        let pairs = n * (n - 1) / 2;
        (
            prop::collection::vec(14500.0..15500.0f64, n),
            prop::collection::vec(-150.0..150.0f64, pairs),
            prop::collection::vec(-800.0..-300.0f64, n),
            prop::collection::vec(-60.0..0.0f64, pairs),
        )
            .prop_map(move |(e, j, u1, u2)| {
                let mut s = AggregateSpec::uncoupled(e, vec![[1.0, 0.0, 0.0]; n]);
                let mut k = 0;
                for a in 0..n {
                    for b in a + 1..n {
                        s.couplings[a][b] = j[k];
                        s.couplings[b][a] = j[k];
                        s.pair_anharmonicity[a][b] = u2[k];
                        s.pair_anharmonicity[b][a] = u2[k];
                        k += 1;
                    }
                }
                s.onsite_anharmonicity = u1;
                s
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn transport_conserves_and_balances(spec in aggregate(), t in 0.0..3000.0f64) {
        let eig = ExcitonEigensystem::new(&spec).unwrap();
        let bath = BathSpec::bundled();
        for manifold in [Manifold::One, Manifold::Two] {
            let tm = TransportModel::new(&eig, manifold, &bath, &vec![1.0; spec.n_sites()]).unwrap();
            prop_assert!(tm.column_sum_defect() <= 1e-12);
            let g = population_propagator(&tm, t).unwrap();
            for c in 0..tm.len() {
                prop_assert!((g.column(c).sum() - 1.0).abs() <= 1e-9);
                for r in 0..tm.len() {
                    prop_assert!(g[(r, c)] >= -1e-9);
                }
            }
            let stationary = &g * &tm.boltzmann;
            prop_assert!((stationary - &tm.boltzmann).amax() <= 1e-9);
        }
    }

    #[test]
    fn two_exciton_states_are_normalized(spec in aggregate()) {
        let eig = ExcitonEigensystem::new(&spec).unwrap();
        prop_assert!(eig.orthonormality_defect() <= 1e-10);
        let w = eig.site_weights(Manifold::Two);
        for f in 0..eig.n_two() {
            prop_assert!((w.row(f).sum() - 2.0).abs() <= 1e-10);
        }
    }

    #[test]
    fn pair_index_round_trips(n in 2usize..30) {
        let idx = PairIndex::new(n);
        prop_assert_eq!(idx.len(), n * (n + 1) / 2);
        for p in 0..idx.len() {
            let (m, k) = idx.pair(p);
            prop_assert_eq!(idx.index(m, k), p);
            prop_assert_eq!(idx.index(k, m), p);
        }
    }

    #[test]
    fn lineshape_branches_are_conjugate(
        center in 14000.0..16000.0f64,
        detune in -500.0..500.0f64,
        gamma in 0.0..200.0f64,
        sigma_t in 0.1..50.0f64,
        sigma_omega in 1.0..50.0f64,
    ) {
        let f = FilterSpec::new(sigma_t, sigma_omega).centered(0.0, center);
        let l = filtered_lineshape(&f, center + detune, gamma).unwrap();
        prop_assert!((l.greater - l.less.conj()).norm() <= 1e-12 * l.greater.norm());
        let a = l.absorptive();
        prop_assert!(a.re > 0.0 && a.im.abs() <= 1e-12 * a.re);
    }

    #[test]
    fn spectrogram_is_bounded_by_its_peak(t in -50.0..500.0f64, tau in -300.0..300.0f64) {
        let f = FilterSpec::new(4.8681, 10.0).centered(0.0, 15000.0);
        prop_assert!(spectrogram(&f, t, tau).norm() <= 1.0 / (2.0 * f.sigma_omega) * (1.0 + 1e-15));
    }

    #[test]
    fn selectivity_is_a_fraction(values in prop::collection::vec(0.0..10.0f64, 1..40), pick in 0usize..40) {
        let s = selectivity(&values, pick % values.len());
        prop_assert!((0.0..=1.0).contains(&s));
    }

    #[test]
    fn float_format_round_trips(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
        prop_assert_eq!(fmt_float(x).parse::<f64>().unwrap(), x);
    }
}
