use core::f64::consts::{FRAC_PI_2, PI};

use proptest::prelude::*;
use qdisc_core::noise::{cos2_moment, sin2_moment};
use qdisc_core::protocols::adaptive::adaptive_incoherent_error_exact;
use qdisc_core::protocols::helstrom::helstrom_error_noisy;
use qdisc_core::protocols::qsp::{
    qsp_unitary, segment_error_on_draws, segment_error_quadrature, simple_qsp_error_exact, simple_segment,
    StandardDraws,
};
use qdisc_core::protocols::vote::{maj_protocol_error, majority_vote};
use qdisc_core::protocols::{PhaseAngleList, Segment};
use qdisc_core::quadrature::GaussHermite;
use qdisc_core::qubit::{rot_x, rot_z, transition_prob};
use qdisc_core::{AngleDistribution, PureState, QspProtocol, RdgInstance, SeededRng};

fn angle() -> impl Strategy<Value = f64> {
    -PI..PI
}

fn state() -> impl Strategy<Value = PureState> {
    (0.0..PI, angle()).prop_map(|(p, a)| PureState::from_bloch(p, a))
}

fn segment(max_r: usize) -> impl Strategy<Value = Segment> {
    (1..=max_r)
        .prop_flat_map(|r| (prop::collection::vec(angle(), r + 1), state(), state()))
        .prop_map(|(phases, prep, meas)| Segment {
            phases: PhaseAngleList::new(phases).unwrap(),
            prep,
            meas,
        })
}

proptest! {
    #[test]
    fn rotations_compose(a in -10.0..10.0f64, b in -10.0..10.0f64) {
        prop_assert!((rot_x(a) * rot_x(b)).max_abs_diff(&rot_x(a + b)) < 1e-12);
        prop_assert!((rot_z(a) * rot_z(b)).max_abs_diff(&rot_z(a + b)) < 1e-12);
        prop_assert!(rot_x(a).unitarity_defect() < 1e-12);
    }

    #[test]
    fn qsp_sequences_concatenate(
        phases in prop::collection::vec(angle(), 5),
        thetas in prop::collection::vec(angle(), 4),
        split in 1usize..4,
    ) {
        let whole = qsp_unitary(&PhaseAngleList::new(phases.clone()).unwrap(), &thetas).unwrap();
        let head = qsp_unitary(&PhaseAngleList::new(phases[..=split].to_vec()).unwrap(), &thetas[..split]).unwrap();
        let mut tail_phases = vec![0.0];
        tail_phases.extend_from_slice(&phases[split + 1..]);
        let tail = qsp_unitary(&PhaseAngleList::new(tail_phases).unwrap(), &thetas[split..]).unwrap();
        prop_assert!((head * tail).max_abs_diff(&whole) < 1e-12);
    }

    #[test]
    fn transition_probability_symmetry(a in state(), b in state(), g in angle(), h in angle()) {
        let p = transition_prob(&a, &b);
        prop_assert!((p - transition_prob(&b, &a)).abs() < 1e-12);
        prop_assert!((p - transition_prob(&a.with_global_phase(g), &b.with_global_phase(h))).abs() < 1e-12);
    }

    #[test]
    fn segment_error_ignores_global_phases(seg in segment(3), g in angle(), d in 0.0..1.5f64, s in 0.0..1.0f64) {
        let rdg = RdgInstance::canonical(d, s).unwrap();
        let rule = GaussHermite::new(12).unwrap();
        let shifted = Segment {
            prep: seg.prep.with_global_phase(g),
            meas: seg.meas.with_global_phase(-2.0 * g),
            ..seg.clone()
        };
        let a = segment_error_quadrature(&seg, &rdg, &rule);
        let b = segment_error_quadrature(&shifted, &rdg, &rule);
        prop_assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn label_swap_leaves_errors_unchanged(seg in segment(3), m0 in -1.0..1.0f64, m1 in -1.0..1.0f64, s in 0.0..1.0f64) {
        let rdg = RdgInstance::new(
            AngleDistribution::new(m0, s).unwrap(),
            AngleDistribution::new(m1, s).unwrap(),
        ).unwrap();
        let sw = rdg.swapped();
        let rule = GaussHermite::new(12).unwrap();
        prop_assert!((segment_error_quadrature(&seg, &rdg, &rule) - segment_error_quadrature(&seg, &sw, &rule)).abs() < 1e-12);
        prop_assert!((helstrom_error_noisy(&rdg) - helstrom_error_noisy(&sw)).abs() < 1e-15);
        prop_assert!((maj_protocol_error(&rdg, 2).error_prob - maj_protocol_error(&sw, 2).error_prob).abs() < 1e-15);
        let draws = StandardDraws::new(&mut SeededRng::new(3), 500, seg.queries());
        let a = segment_error_on_draws(&seg, &rdg, &draws).unwrap().0;
        let b = segment_error_on_draws(&seg, &sw, &draws).unwrap().0;
        prop_assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn majority_vote_shape(p in 0.0..1.0f64, m in 0u32..40) {
        let v = majority_vote(p, m);
        prop_assert!((v + majority_vote(1.0 - p, m) - 1.0).abs() < 1e-12);
        if p > 0.5 && p < 1.0 && m > 0 {
            prop_assert!(v > p);
        }
        prop_assert!(majority_vote(p, m + 1) >= v - 1e-12 || p < 0.5);
    }

    #[test]
    fn gaussian_characteristic_identity(mu in -5.0..5.0f64, s in 0.0..2.0f64) {
        let d = AngleDistribution::new(mu, s).unwrap();
        let lhs = cos2_moment(&d).powi(2) + sin2_moment(&d).powi(2);
        prop_assert!((lhs - (-4.0 * s * s).exp()).abs() < 1e-12);
    }
}

fn assert_non_increasing(v: &[f64], what: &str) {
    for w in v.windows(2) {
        assert!(w[1] <= w[0] + 1e-12, "{what}: {w:?}");
    }
}

#[test]
fn errors_fall_with_delta() {
    let sigma = 0.3;
    let grid: Vec<f64> = (0..=40).map(|k| k as f64 * FRAC_PI_2 / 40.0).collect();
    let at = |f: &dyn Fn(&RdgInstance) -> f64, g: &[f64]| -> Vec<f64> {
        g.iter().map(|&d| f(&RdgInstance::canonical(d, sigma).unwrap())).collect()
    };
    assert_non_increasing(&at(&helstrom_error_noisy, &grid), "helstrom");
    assert_non_increasing(&at(&|r| maj_protocol_error(r, 2).error_prob, &grid), "maj");
    // Coherent sequences only improve up to Nδ = π/2.
    let short: Vec<f64> = grid.iter().map(|d| d / 3.0).collect();
    assert_non_increasing(&at(&|r| simple_qsp_error_exact(r, 3), &short), "qsp3");
    let coarse: Vec<f64> = (1..=8).map(|k| k as f64 * FRAC_PI_2 / 8.0).collect();
    assert_non_increasing(&at(&|r| adaptive_incoherent_error_exact(r, 3).unwrap(), &coarse), "adaptive");
    // Monte Carlo with one frozen sample for every grid point.
    let draws = StandardDraws::new(&mut SeededRng::new(17), 20_000, 3);
    let mc: Vec<f64> = short
        .iter()
        .map(|&d| {
            let r = RdgInstance::canonical(d, sigma).unwrap();
            segment_error_on_draws(&simple_segment(&r, 3), &r, &draws).unwrap().0
        })
        .collect();
    assert_non_increasing(&mc, "qsp3 mc");
}

#[test]
fn errors_grow_with_sigma() {
    let delta = 0.25;
    let grid: Vec<f64> = (0..=12).map(|k| k as f64 * 0.05).collect();
    let rdgs: Vec<RdgInstance> = grid.iter().map(|&s| RdgInstance::canonical(delta, s).unwrap()).collect();
    let neg = |v: Vec<f64>| -> Vec<f64> { v.into_iter().map(|x| -x).collect() };
    assert_non_increasing(&neg(rdgs.iter().map(helstrom_error_noisy).collect()), "helstrom");
    assert_non_increasing(&neg(rdgs.iter().map(|r| maj_protocol_error(r, 1).error_prob).collect()), "maj");
    assert_non_increasing(&neg(rdgs.iter().map(|r| simple_qsp_error_exact(r, 5)).collect()), "qsp5");
    assert_non_increasing(
        &neg(rdgs.iter().map(|r| adaptive_incoherent_error_exact(r, 3).unwrap()).collect()),
        "adaptive",
    );
    let draws = StandardDraws::new(&mut SeededRng::new(5), 20_000, 3);
    let mc: Vec<f64> = rdgs
        .iter()
        .map(|r| segment_error_on_draws(&simple_segment(r, 3), r, &draws).unwrap().0)
        .collect();
    assert_non_increasing(&neg(mc), "qsp3 mc");
}

#[test]
fn one_query_segments_are_majority_vote() {
    let r = RdgInstance::canonical(0.35, 0.25).unwrap();
    for n in [1usize, 3, 5] {
        let p = QspProtocol::incoherent(&r, n);
        let mc = qdisc_core::protocols::qsp::qsp_error_mc(&p, &r, 60_000, &mut SeededRng::new(n as u64)).unwrap();
        let exact = maj_protocol_error(&r, (n as u32 - 1) / 2).error_prob;
        assert!((mc.error_prob - exact).abs() < 3.0 * mc.std_error + 1e-12, "n={n}");
    }
}
