use plap::config::*;
use plap_core::geometry::MetricName;
use plap_core::parabolic::{EquationKind, HarnackId, IdentityKind};
use proptest::prelude::*;

const SAMPLE: &str = "\
# IMCF limit
command = imcf
metric = euclidean
n = 3
p = 1.5, 1.3, 1.2, 1.1, 1.05
grid.h = 0.0078125
tol.limit = 5e-2
";

#[test]
fn parses_sample() {
    let c = ExperimentConfig::parse(SAMPLE).unwrap();
    assert_eq!(c.command, Some(Command::Imcf));
    assert_eq!(c.metric, Some(MetricName::Euclidean));
    assert_eq!(c.n, Some(3));
    assert_eq!(c.p, vec![1.5, 1.3, 1.2, 1.1, 1.05]);
    assert_eq!(c.grid_h, Some(1.0 / 128.0));
    assert_eq!(c.tol_or("limit", 1.0), 0.05);
    assert_eq!(c.tol_or("missing", 0.25), 0.25);
}

#[test]
fn canonical_text_round_trips() {
    let c = ExperimentConfig::parse(SAMPLE).unwrap();
    let text = c.to_text();
    assert!(text.contains("grid.h = 7.8125e-3"), "{text}");
    let back = ExperimentConfig::parse(&text).unwrap();
    assert_eq!(back, c);
    assert_eq!(back.to_text(), text);
}

#[test]
fn every_key_round_trips() {
    let text = "\
command = parabolic
metric = hyperbolic(0.5)
n = 2
p = 3
eps = 1e-2, 1e-3
delta = 1e-8
alpha = 2
equation = B-reg
data = perturbed
harnack = lyp1, globalapproxge
identities = bochner2, ptwise-W
grid.h = 0.05
grid.extent = 12
time.t0 = 1
time.t1 = 2
time.samples = 6
time.origin = 0.9
tol.abs = 1e-3
tol.rel = 0.05
out.dir = runs/a
out.plots = harnack:lyp1, entropy:W
seed = 7
suite = full
";
    let c = ExperimentConfig::parse(text).unwrap();
    assert_eq!(c.equation, Some(EquationKind::BReg));
    assert_eq!(c.data, Some(InitialData::Perturbed));
    assert_eq!(c.harnack, vec![HarnackId::Lyp1, HarnackId::GlobalApprox]);
    assert_eq!(c.identities, vec![IdentityKind::Bochner2, IdentityKind::PtwiseW]);
    assert_eq!(c.metric, Some(MetricName::Hyperbolic(0.5)));
    assert_eq!(c.suite, Some(Suite::Full));
    assert_eq!(ExperimentConfig::parse(&c.to_text()).unwrap(), c);
}

#[test]
fn empty_text_is_an_empty_config() {
    let c = ExperimentConfig::parse("\n# nothing\n").unwrap();
    assert_eq!(c, ExperimentConfig::default());
    assert_eq!(c.to_text(), "");
}

#[test]
fn rejects_bad_input() {
    assert!(matches!(ExperimentConfig::parse("command imcf"), Err(ConfigError::Syntax { line: 1, .. })));
    assert!(matches!(ExperimentConfig::parse("n = 2\nbogus = 1"), Err(ConfigError::UnknownKey(_))));
    assert!(matches!(ExperimentConfig::parse("n = 2\nn = 3"), Err(ConfigError::Duplicate(_))));
    assert!(matches!(ExperimentConfig::parse("p = 1.5, x"), Err(ConfigError::BadValue { .. })));
    assert!(matches!(ExperimentConfig::parse("tol.rel = 0"), Err(ConfigError::Invalid(_))));
    assert!(matches!(ExperimentConfig::parse("tol.rel = -1e-3"), Err(ConfigError::Invalid(_))));
    assert!(matches!(ExperimentConfig::parse("time.t0 = 2\ntime.t1 = 1"), Err(ConfigError::Invalid(_))));
    assert!(matches!(ExperimentConfig::parse("command = plot"), Err(ConfigError::BadValue { .. })));
    assert!(matches!(ExperimentConfig::parse("tol. = 1"), Err(ConfigError::UnknownKey(_))));
}

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![1e-12f64..1e12, (-300i32..300).prop_map(|e| 1.2345678901234567 * 10f64.powi(e) * 0.5)]
}

proptest! {
    #[test]
    fn prop_round_trip(
        p in prop::collection::vec(1.0f64..5.0, 0..6),
        eps in prop::collection::vec(0.0f64..1.0, 0..3),
        h in prop::option::of(finite()),
        tols in prop::collection::btree_map("[a-z]{1,8}", finite(), 0..4),
        seed in prop::option::of(any::<u64>()),
        n in prop::option::of(1usize..5),
    ) {
        let c = ExperimentConfig { p, eps, grid_h: h, tol: tols, seed, n, command: Some(Command::Entropy), ..Default::default() };
        let back = ExperimentConfig::parse(&c.to_text()).unwrap();
        prop_assert_eq!(back, c);
    }
}
