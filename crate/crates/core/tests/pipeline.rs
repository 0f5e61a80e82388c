use choquard_core::functionals::Model;
use choquard_core::params::{validate_regime, ProblemParams, Regime};
use choquard_core::solver::{fiber_project, minimize_on_pohozaev, Initializer, SolverConfig};
use choquard_core::spectral::{read_field_dump, write_field_dump, Grid};
use choquard_core::verify::symmetry_checks;
use proptest::prelude::*;

fn model_1d(m: usize) -> Model {
    let params = ProblemParams::new(1, 0.5, 4.0, 6.5, 1.0, 1.0).unwrap();
    Model::new(params, Grid::new(1, 0.3, m).unwrap()).unwrap()
}

#[test]
fn ground_state_pipeline_1d() {
    let model = model_1d(512);
    assert_eq!(validate_regime(model.params(), None).unwrap().regime, Regime::Existence);
    let init = Initializer::Gaussian { width: Some(0.05) };
    let report = minimize_on_pohozaev(&model, &init, &SolverConfig::default()).unwrap();
    assert!(report.converged, "{}", report.stop_reason);
    assert!(report.lambda < 0.0);
    assert!(report.residuals.pohozaev < 1e-6);
    assert!(report.residuals.pde < 1e-4);
    assert!(report.residuals.pohozaev_identity < 1e-4);
    // the minimizer is a fixed point of the fiber projection
    assert!(fiber_project(&model, report.field(), 0.5).unwrap().abs() < 1e-9);
    // energy through the manifold form agrees with the direct energy
    assert!((report.manifold_form_energy - report.c_po).abs() < 1e-8 * report.c_po);

    let mut buf = Vec::new();
    write_field_dump(report.field(), &mut buf).unwrap();
    assert_eq!(&read_field_dump(&buf[..]).unwrap(), report.field());

    for c in symmetry_checks(report.symmetry.as_ref().unwrap()) {
        assert!(c.passed, "{c:?}");
    }
}

#[test]
fn off_center_start_converges_to_the_same_level() {
    let model = model_1d(512);
    let cfg = SolverConfig::default();
    let centered = minimize_on_pohozaev(&model, &Initializer::Gaussian { width: Some(0.05) }, &cfg).unwrap();
    let two = Initializer::TwoBump {
        separation: 0.07,
        width: 0.02,
        weight: 0.6,
        shift: 0.02,
    };
    let other = minimize_on_pohozaev(&model, &two, &cfg).unwrap();
    assert!(other.converged);
    assert!(((other.c_po - centered.c_po) / centered.c_po).abs() < 1e-6);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    // every projected start lands on 𝒫 with the prescribed mass
    #[test]
    fn projection_lands_on_manifold(width in 0.02f64..0.08, shift in -0.05f64..0.05) {
        let model = model_1d(256);
        let u = Initializer::TwoBump { separation: 0.0, width, weight: 1.0, shift }
            .build(*model.grid(), 1.0, 0)
            .unwrap();
        let p = choquard_core::solver::project_to_manifold(&model, &u, &SolverConfig::default()).unwrap();
        prop_assert!((p.field.mass() - 1.0).abs() < 1e-12);
        prop_assert!(p.breakdown.pohozaev.abs() <= 1e-9 * p.breakdown.kinetic);
    }
}
