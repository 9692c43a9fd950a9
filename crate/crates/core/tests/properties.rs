use num_complex::Complex64;
use phaselab::ensembles::{haar_unitary, RandomStream};
use phaselab::info::{
    coherent_information, holevo_chi, min_entropy_probe, random_product_state, random_pure_state, Ensemble,
};
use phaselab::phasechannel::{apply_copies_pure, sample_channel, ChannelSampler};
use phaselab::protocols::{backassisted_classical, joint_coherent_info, ProtocolTranscript};
use phaselab::qstate::{partial_trace, purity, unitarity_deviation, von_neumann_entropy, SubsystemLayout};
use phaselab::schur::{expected_purity_exact, per_copy_trace_term, purity_upper_bound};
use proptest::prelude::*;

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(config(24))]

    #[test]
    fn haar_unitaries_are_unitary(d in 2usize..8, seed in any::<u64>()) {
        let u = haar_unitary(d, &RandomStream::new(seed)).unwrap();
        prop_assert!(unitarity_deviation(u.matrix()) < 1e-12);
    }

    #[test]
    fn partial_trace_keeps_trace_and_spectrum(d1 in 2usize..4, d2 in 2usize..4, seed in any::<u64>()) {
        let layout = SubsystemLayout::new(vec![d1, d2]).unwrap();
        let rho = random_pure_state(&layout, &RandomStream::new(seed)).unwrap().density();
        let a = partial_trace(&rho, &[0]).unwrap();
        let b = partial_trace(&rho, &[1]).unwrap();
        prop_assert!((a.trace() - 1.0).abs() < 1e-12);
        prop_assert!(a.eigenvalues().unwrap()[0] > -1e-12);
        // Schmidt: both marginals of a pure state share their entropy.
        let (sa, sb) = (von_neumann_entropy(&a).unwrap(), von_neumann_entropy(&b).unwrap());
        prop_assert!((sa - sb).abs() < 1e-9);
    }

    #[test]
    fn tensor_then_trace_recovers_factor(seed in any::<u64>()) {
        let s = RandomStream::new(seed);
        let a = random_pure_state(&SubsystemLayout::new(vec![2]).unwrap(), &s.substream(0)).unwrap().density();
        let b = random_pure_state(&SubsystemLayout::new(vec![3]).unwrap(), &s.substream(1)).unwrap().density();
        let back = partial_trace(&a.tensor(&b), &[1]).unwrap();
        let diff = (back.matrix() - b.matrix()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        prop_assert!(diff < 1e-12);
    }

    #[test]
    fn measurement_branches_sum_to_one(seed in any::<u64>(), target in 0usize..3) {
        let layout = SubsystemLayout::new(vec![2, 3, 2]).unwrap();
        let psi = random_pure_state(&layout, &RandomStream::new(seed)).unwrap();
        let d = layout.dims()[target];
        let total: f64 = (0..d).map(|j| psi.project(target, j).unwrap().amplitudes().norm_squared()).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn holevo_is_between_zero_and_output_entropy(seed in any::<u64>(), size in 2usize..6) {
        let d = 3;
        let layout = SubsystemLayout::uniform(d, 2).unwrap();
        let root = RandomStream::new(seed);
        let states = (0..size)
            .map(|i| random_pure_state(&layout, &root.substream(i as u64)).unwrap())
            .collect::<Vec<_>>();
        let ensemble = Ensemble::uniform(states).unwrap();
        let insts = sample_channel(&ChannelSampler::haar(d).unwrap(), 1, &root.substream(99)).unwrap();
        let outputs = ensemble.members().iter().map(|(_, s)| apply_copies_pure(&insts, s).unwrap()).collect::<Vec<_>>();
        let chi = holevo_chi(&outputs, &ensemble.probabilities()).unwrap();
        prop_assert!(chi >= -1e-9);
        prop_assert!(chi <= (d as f64).log2() + 1e-9);
    }

    #[test]
    fn coherent_information_is_at_most_log_output(seed in any::<u64>()) {
        let layout = SubsystemLayout::new(vec![2, 3]).unwrap();
        let rho = random_pure_state(&layout, &RandomStream::new(seed)).unwrap().density();
        prop_assert!(coherent_information(&rho, &[0]).unwrap() <= 3f64.log2() + 1e-9);
    }

    #[test]
    fn per_copy_term_within_magnitude_bound(d in 2usize..13, sb: bool, se: bool) {
        let df = d as f64;
        prop_assert!(per_copy_trace_term(d, sb, se).unwrap().abs() <= df * df * (3.0 * df + 1.0) / 4.0 + 1e-9);
    }
}

proptest! {
    #![proptest_config(config(8))]

    #[test]
    fn expected_purity_is_a_purity(d in 2usize..6, n in 1usize..3, seed in any::<u64>()) {
        let layout = SubsystemLayout::uniform(d, 2 * n).unwrap();
        let psi = random_product_state(&layout, &RandomStream::new(seed)).unwrap();
        let p = expected_purity_exact(&psi, d, n).unwrap();
        prop_assert!(p <= 1.0 + 1e-9);
        prop_assert!(p >= (d as f64).powi(-(n as i32)) - 1e-9);
    }

    #[test]
    fn expected_purity_below_bound_when_nontrivial(d in 6usize..10, seed in any::<u64>()) {
        let layout = SubsystemLayout::uniform(d, 2).unwrap();
        let psi = random_pure_state(&layout, &RandomStream::new(seed)).unwrap();
        prop_assert!(expected_purity_exact(&psi, d, 1).unwrap() <= purity_upper_bound(d, 1).unwrap() + 1e-9);
    }

    #[test]
    fn sampled_output_purity_in_range(seed in any::<u64>()) {
        let d = 3;
        let layout = SubsystemLayout::uniform(d, 2).unwrap();
        let psi = random_pure_state(&layout, &RandomStream::new(seed)).unwrap();
        let insts = sample_channel(&ChannelSampler::haar(d).unwrap(), 1, &RandomStream::new(seed ^ 1)).unwrap();
        let p = purity(&apply_copies_pure(&insts, &psi).unwrap());
        prop_assert!(p >= 1.0 / d as f64 - 1e-12 && p <= 1.0 + 1e-12);
    }

    #[test]
    fn joint_average_is_half_log_d(d in 2usize..6, seed in any::<u64>()) {
        let inst = sample_channel(&ChannelSampler::haar(d).unwrap(), 1, &RandomStream::new(seed)).unwrap().remove(0);
        let r = joint_coherent_info(d, &inst).unwrap();
        prop_assert!((r.average - (d as f64).log2() / 2.0).abs() < 1e-6);
    }

    #[test]
    fn classical_transcripts_round_trip(a in 0usize..2, b in 0usize..2, seed in any::<u64>()) {
        let run = backassisted_classical(2, (a, b), &RandomStream::new(seed)).unwrap();
        prop_assert_eq!(run.decoded, (a, b));
        let parsed = ProtocolTranscript::from_text(&run.transcript.to_text()).unwrap();
        prop_assert_eq!(parsed, run.transcript);
    }
}

#[test]
fn probe_trajectory_regression() {
    let r = min_entropy_probe(3, 1, 4, 50, &RandomStream::new(11)).unwrap();
    let expected = [0.8990599061682991, 0.8505742795594119, 0.8505742795594119, 0.8505742795594119, 0.8505742795594119];
    assert_eq!(r.trajectory.len(), expected.len());
    for (got, want) in r.trajectory.iter().zip(expected) {
        assert!((got - want).abs() < 1e-12, "{got} vs {want}");
    }
    assert!(r.trajectory.windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn explicit_states_from_amplitudes() {
    let layout = SubsystemLayout::new(vec![2]).unwrap();
    let amps = nalgebra::DVector::from_vec(vec![Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)]);
    let psi = phaselab::qstate::PureState::new(amps, layout).unwrap();
    assert!((psi.project(0, 1).unwrap().amplitudes().norm_squared() - 0.64).abs() < 1e-15);
}
