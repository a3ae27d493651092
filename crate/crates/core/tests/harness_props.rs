use nmc::codec::{decode, Codeword};
use nmc::harness::{confidence_radius, run_experiment, run_experiment_t, tamper_apply, ExperimentReport, TamperSpec};
use nmc::nmext::{NmExt, ParamProfile};
use nmc::{BitString, Error};

fn micro() -> NmExt {
    NmExt::new(&ParamProfile::micro()).unwrap()
}

fn spec(s: &str) -> TamperSpec {
    s.parse().unwrap()
}

fn sums_to_one(r: &ExperimentReport) {
    for d in [&r.d_f, &r.d_f_first_half, &r.d_f_second_half] {
        assert!((d.values().sum::<f64>() - 1.0).abs() < 1e-9);
    }
    for c in &r.components {
        assert!((c.d_f.values().sum::<f64>() - 1.0).abs() < 1e-9);
    }
}

#[test]
fn identity_is_all_same() {
    let r = run_experiment(&micro(), &spec("identity"), 1000, 1).unwrap();
    sums_to_one(&r);
    assert_eq!(r.d_f.keys().collect::<Vec<_>>(), vec!["same"]);
    assert!(r.within_radius(), "{} > {}", r.l1, r.confidence_radius);
    assert_eq!(r.confidence_radius, confidence_radius(r.joint_support, 1000));
    assert_eq!(r.encoder_failures, 0);
}

#[test]
fn constant_gives_a_point_mass_independent_of_the_message() {
    let nm = micro();
    let sp = spec("constant:3");
    let r = run_experiment(&nm, &sp, 1000, 2).unwrap();
    sums_to_one(&r);
    let fam = &sp.build(nm.profile().n).unwrap()[0];
    let c = fam.apply(&Codeword {
        x: BitString::zeros(nm.profile().n),
        y: BitString::zeros(nm.profile().n),
    });
    let want = decode(&nm, &c).unwrap().to_string();
    assert_eq!(r.d_f.len(), 1);
    assert_eq!(r.d_f.get(&want), Some(&1.0));
    assert!(r.within_radius());
}

#[test]
fn split_halves_agree_for_mixing_families() {
    let nm = micro();
    for f in ["xor:y:1", "xor:xy:2", "perm:3"] {
        let r = run_experiment(&nm, &spec(f), 1000, 4).unwrap();
        sums_to_one(&r);
        assert!(
            r.split_half_agrees(),
            "{f}: {} > 2 * {}",
            r.split_half_l1,
            r.split_half_radius
        );
        assert_eq!(r.per_message.iter().map(|m| m.trials).sum::<u64>(), r.completed);
    }
}

#[test]
fn reports_are_reproducible_and_parse_back() {
    let nm = micro();
    let a = run_experiment(&nm, &spec("xor:x:5"), 1000, 9).unwrap();
    let b = run_experiment(&nm, &spec("xor:x:5"), 1000, 9).unwrap();
    assert_eq!(a.without_timing().to_toml(), b.without_timing().to_toml());
    let c = run_experiment(&nm, &spec("xor:x:5"), 1000, 10).unwrap();
    assert_ne!(a.without_timing(), c.without_timing());
    let back = ExperimentReport::from_toml(&a.to_toml()).unwrap();
    assert_eq!(back, a);
}

#[test]
fn single_family_matches_the_tuple_runner() {
    let nm = micro();
    let a = run_experiment(&nm, &spec("perm:1"), 1000, 3).unwrap();
    let b = run_experiment_t(&nm, &spec("perm:1"), 1000, 3).unwrap();
    assert_eq!(a.without_timing(), b.without_timing());
}

#[test]
fn tuples_work_component_wise() {
    let nm = NmExt::new(&ParamProfile::canonical_toy_t2()).unwrap();
    let r = run_experiment_t(&nm, &spec("identity+identity"), 1000, 1).unwrap();
    assert_eq!(r.d_f.keys().collect::<Vec<_>>(), vec!["same,same"]);
    assert!(r.within_radius());

    let r = run_experiment_t(&nm, &spec("identity+constant:2"), 1000, 2).unwrap();
    sums_to_one(&r);
    assert_eq!(r.d_f.len(), 1);
    assert!(r.d_f.keys().next().unwrap().starts_with("same,"));
    assert_eq!(r.components[0].d_f.keys().collect::<Vec<_>>(), vec!["same"]);
    assert_eq!(r.components[1].d_f.len(), 1);
    for c in &r.components {
        assert!(c.l1 <= c.confidence_radius);
    }
}

#[test]
fn bad_requests_are_usage_errors() {
    let nm = micro();
    assert!(matches!(
        run_experiment(&nm, &spec("identity"), 999, 1),
        Err(Error::Usage(_))
    ));
    assert!(matches!(
        run_experiment_t(&nm, &spec("identity+identity"), 1000, 1),
        Err(Error::Usage(_))
    ));
    let fams = spec("identity").build(nm.profile().n).unwrap();
    let cw = Codeword {
        x: BitString::zeros(4),
        y: BitString::zeros(4),
    };
    assert!(matches!(tamper_apply(2, &fams, &cw), Err(Error::Usage(_))));
    assert!(matches!(spec("lookup:1").build(nm.profile().n), Err(Error::Usage(_))));
}
