use proptest::prelude::*;

use tcac_core::geometry::{parse_cables, Environment};
use tcac_core::pul::{
    make_provider, sequence_impedance, solve_cross_section, EngineOptions, Excitation, PulSource, PulTable,
};
use tcac_core::timedomain::{energize, EnergizeOptions, SourceSpec};
use tcac_core::tline::{sweep, FrequencyGrid, Termination};
use tcac_core::{CableSpec, Sequence};

fn cables() -> Vec<CableSpec> {
    parse_cables(include_str!("../../bench/fixtures/cables.json"), "cables.json").unwrap()
}

fn env_for(spec: &CableSpec) -> Environment {
    if spec.name == "C2" {
        Environment::sea()
    } else {
        Environment::air()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn positive_sequence_ignores_the_nominal_return(idx in 0usize..3, lf in 0.0f64..3.3, d in 100.0f64..1e5) {
        let spec = &cables()[idx];
        let f = 10f64.powf(lf);
        let exc = Excitation::new(Sequence::Positive, 1.0);
        let base = EngineOptions::default();
        let moved = EngineOptions { metallic_return_distance: d, ..base };
        let a = sequence_impedance(&solve_cross_section(spec, &env_for(spec), f, &exc, &base).unwrap()).z();
        let b = sequence_impedance(&solve_cross_section(spec, &env_for(spec), f, &exc, &moved).unwrap()).z();
        prop_assert!((a - b).norm() / a.norm() < 1e-9, "{} vs {}", a, b);
    }

    #[test]
    fn series_resistance_is_positive(idx in 0usize..3, lf in -2.0f64..4.0, zero in any::<bool>()) {
        let spec = &cables()[idx];
        let seq = if zero { Sequence::Zero } else { Sequence::Positive };
        let sol = solve_cross_section(spec, &env_for(spec), 10f64.powf(lf), &Excitation::new(seq, 1.0), &EngineOptions::default()).unwrap();
        let p = sequence_impedance(&sol);
        prop_assert!(p.r > 0.0 && p.l > 0.0);
    }

    #[test]
    fn balanced_currents_sum_to_zero(idx in 0usize..3, lf in 0.0f64..3.3, amps in 1.0f64..1000.0) {
        let spec = &cables()[idx];
        let sol = solve_cross_section(spec, &env_for(spec), 10f64.powf(lf), &Excitation::new(Sequence::Positive, amps), &EngineOptions::default()).unwrap();
        prop_assert!(sol.net_current().norm() < 1e-9 * amps);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn step_response_scales_with_the_source(k in 0.1f64..100.0, r in 0.0f64..1e-4) {
        let table = PulTable::constant(Sequence::Positive, 0.01, 1e9, r, 0.2621e-6, 0.0, 156.25e-12).unwrap();
        let p = make_provider(PulSource::Table { id: "t".into(), table }).unwrap();
        let opts = EnergizeOptions::default();
        let one = energize(&p, 5e3, &SourceSpec::step(1.0), 5e-4, 1 << 10, &opts).unwrap();
        let scaled = energize(&p, 5e3, &SourceSpec::step(k), 5e-4, 1 << 10, &opts).unwrap();
        for (a, b) in one.samples.iter().zip(&scaled.samples) {
            prop_assert!((k * a - b).abs() <= 1e-9 * k.max(1.0) * (1.0 + a.abs()));
        }
    }

    #[test]
    fn sweeps_are_strictly_increasing_and_finite(
        r in 1e-6f64..1e-3,
        length in 1e3f64..2e5,
        open in any::<bool>(),
        levels in 0u32..4,
    ) {
        let table = PulTable::constant(Sequence::Positive, 0.01, 1e7, r, 0.2621e-6, 0.0, 156.25e-12).unwrap();
        let p = make_provider(PulSource::Table { id: "t".into(), table }).unwrap();
        let term = if open { Termination::OpenCircuit } else { Termination::ShortCircuit };
        let resp = sweep(&p, Sequence::Positive, term, &FrequencyGrid::log(1.0, 1e4, 60).with_refinement(levels), length).unwrap();
        prop_assert!(resp.points.windows(2).all(|w| w[0].f < w[1].f));
        prop_assert!(resp.points.iter().all(|pt| pt.z.re.is_finite() && pt.z.im.is_finite()));
        prop_assert!(resp.points.len() >= 60 - resp.poles.len());
    }
}
