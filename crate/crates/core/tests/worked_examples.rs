mod common;

use common::*;
use memsynth::membrane_system::BmsViolation;
use memsynth::translate::{bms_to_ptl, ptl_to_bms};
use memsynth::{ExploreLimits, Mode};
use num_bigint::BigUint;

fn t(names: &[&str]) -> memsynth::Step {
    ms(names)
}

#[test]
fn pre_and_post_of_a_step() {
    let (net, _) = bms_to_ptl(&bms0()).unwrap();
    let (pre, post) = net.pre_post(&t(&["t^r11_1", "t^r11_1", "t^r31_3"])).unwrap();
    assert_eq!(pre, ms(&["p^b_1", "p^b_1", "p^a_3"]));
    assert_eq!(post, ms(&["p^a_1", "p^a_1", "p^c_1", "p^a_3", "p^a_3", "p^c_3"]));
}

#[test]
fn net_enabledness_at_initial_marking() {
    let (net, _) = bms_to_ptl(&bms0()).unwrap();
    let m0 = net.initial_marking();
    let u = t(&["t^r12_1", "t^r21_2"]);
    assert!(net.is_enabled(m0, &u, Mode::Free).unwrap());
    assert!(!net.is_enabled(m0, &u, Mode::Max).unwrap());
    let all = t(&["t^r11_1", "t^r12_1", "t^r21_2", "t^r22_2"]);
    assert!(net.is_enabled(m0, &all, Mode::Max).unwrap());
    assert!(net.is_enabled(m0, &t(&["t^r11_1", "t^r12_1"]), Mode::Lmax).unwrap());
    assert!(!net.is_enabled(m0, &t(&["t^r11_1"]), Mode::Lmax).unwrap());
    let next = net.execute(m0, &u).unwrap();
    assert_eq!(next, ms(&["p^b_1", "p^b_1", "p^b_2", "p^b_2", "p^c_2", "p^c_2", "p^a_3"]));
}

#[test]
fn system_enabledness_at_initial_configuration() {
    let bms = bms0();
    let c0 = bms.initial();
    assert_eq!(*c0, cfg(&[&["a", "b"], &["a", "b", "c", "c"], &[]]));
    assert!(!bms.is_enabled(c0, &vector(&[&[], &[], &["r31"]]), Mode::Free).unwrap());
    let r = vector(&[&["r11", "r12"], &[], &[]]);
    assert!(bms.is_enabled(c0, &r, Mode::Lmax).unwrap());
    assert!(!bms.is_enabled(c0, &r, Mode::Max).unwrap());
    let full = vector(&[&["r11", "r12"], &["r21", "r22"], &[]]);
    assert!(bms.is_enabled(c0, &full, Mode::Max).unwrap());
}

#[test]
fn two_step_lmax_computation() {
    let bms = bms0();
    let c1 = bms.evolve(bms.initial(), &vector(&[&["r11", "r12"], &[], &[]])).unwrap();
    assert_eq!(c1, cfg(&[&["a", "b"], &["a", "b", "c", "c", "c"], &["a"]]));
    let r2 = vector(&[&[], &["r21", "r22"], &[]]);
    assert!(bms.is_enabled(&c1, &r2, Mode::Lmax).unwrap());
    let c2 = bms.evolve(&c1, &r2).unwrap();
    assert_eq!(c2, cfg(&[&["a", "b"], &["a", "b", "c", "c"], &["a"]]));
}

#[test]
fn lmax_graph_contains_the_computation() {
    let g = bms0().reachability_graph(Mode::Lmax, ExploreLimits::depth(2)).unwrap();
    assert!(g.truncated);
    let c0 = "({a:1,b:1},{a:1,b:1,c:2},{})";
    let c1 = "({a:1,b:1},{a:1,b:1,c:3},{a:1})";
    let c2 = "({a:1,b:1},{a:1,b:1,c:2},{a:1})";
    let arcs: Vec<_> = g.ts.arcs().collect();
    assert!(arcs.contains(&(c0, &ms(&["r11", "r12"]), c1)));
    assert!(arcs.contains(&(c1, &ms(&["r21", "r22"]), c2)));
}

#[test]
fn translation_of_the_sample_system() {
    let (net, maps) = bms_to_ptl(&bms0()).unwrap();
    let places: Vec<&str> = net.places().iter().map(|p| p.id.as_str()).collect();
    let mut expected_places = Vec::new();
    for a in ["a", "b", "c"] {
        for j in 1..=3 {
            expected_places.push(format!("p^{a}_{j}"));
        }
    }
    expected_places.sort();
    assert_eq!(places, expected_places);
    let transitions: Vec<&str> = net.transitions().iter().map(|t| t.id.as_str()).collect();
    assert_eq!(
        transitions,
        ["t^r11_1", "t^r12_1", "t^r13_1", "t^r21_2", "t^r22_2", "t^r31_3"]
    );
    for n in net.places().iter().chain(net.transitions()) {
        let j: usize = n.id.rsplit('_').next().unwrap().parse().unwrap();
        assert_eq!(n.location, Some(j), "{}", n.id);
    }
    assert_eq!(net.weight_out("t^r31_3", "p^a_3"), BigUint::from(2u32));
    let arcs: Vec<(String, String, u32)> = net
        .arcs()
        .into_iter()
        .map(|a| (a.from, a.to, a.weight.try_into().unwrap()))
        .collect();
    let expected: Vec<(&str, &str, u32)> = vec![
        ("p^a_1", "t^r12_1", 1),
        ("p^a_2", "t^r21_2", 1),
        ("p^a_3", "t^r31_3", 1),
        ("p^b_1", "t^r11_1", 1),
        ("p^b_1", "t^r13_1", 1),
        ("p^b_2", "t^r22_2", 1),
        ("p^c_2", "t^r21_2", 1),
        ("t^r11_1", "p^a_1", 1),
        ("t^r12_1", "p^a_3", 1),
        ("t^r12_1", "p^b_1", 1),
        ("t^r12_1", "p^c_2", 1),
        ("t^r13_1", "p^a_3", 1),
        ("t^r13_1", "p^c_1", 1),
        ("t^r21_2", "p^b_2", 1),
        ("t^r22_2", "p^a_2", 1),
        ("t^r31_3", "p^a_3", 2),
        ("t^r31_3", "p^c_1", 1),
        ("t^r31_3", "p^c_3", 1),
    ];
    let mut got = arcs.clone();
    got.sort();
    let mut want: Vec<(String, String, u32)> =
        expected.into_iter().map(|(a, b, w)| (a.into(), b.into(), w)).collect();
    want.sort();
    assert_eq!(got, want);
    assert_eq!(
        net.initial_marking(),
        &ms(&["p^a_1", "p^b_1", "p^a_2", "p^b_2", "p^c_2", "p^c_2"])
    );
    assert!(net.check_spanned(&three_membranes()).is_empty());

    assert_eq!(maps.marking_to_config(net.initial_marking()).unwrap(), *bms0().initial());
    let free_result = ms(&["p^b_1", "p^b_1", "p^b_2", "p^b_2", "p^c_2", "p^c_2", "p^a_3"]);
    assert_eq!(
        maps.marking_to_config(&free_result).unwrap(),
        cfg(&[&["b", "b"], &["b", "b", "c", "c"], &["a"]])
    );
    assert_eq!(
        maps.step_to_vector(&t(&["t^r11_1", "t^r12_1"])).unwrap(),
        vector(&[&["r11", "r12"], &[], &[]])
    );
}

#[test]
fn reverse_translation_of_r31() {
    let (net, _) = bms_to_ptl(&bms0()).unwrap();
    let (bms, maps) = ptl_to_bms(&net, &three_membranes()).unwrap();
    assert!(bms.validate().is_empty());
    let (i, rule) = bms.rule("t^r31_3").unwrap();
    assert_eq!(i, 3);
    assert_eq!(rule.lhs, ms(&["p^a_3"]));
    let rhs: Vec<String> = rule
        .rhs
        .iter()
        .flat_map(|(o, n)| std::iter::repeat_n(o.to_string(), n.try_into().unwrap()))
        .collect();
    assert_eq!(rhs, ["p^a_3", "p^a_3", "p^c_1_out", "p^c_3"]);
    assert_eq!(maps.phi["t^r31_3"], "t^r31_3");
}

#[test]
fn validation_flags_root_out_rules() {
    let text = std::fs::read_to_string(data("bms0.bms"))
        .unwrap()
        .replace(r#""object": "a", "target": "here", "count": 1 } ] },"#, r#""object": "a", "target": "out", "count": 1 } ] },"#);
    let bad: memsynth::BasicMembraneSystem = serde_json::from_str(&text).unwrap();
    assert_eq!(bad.validate(), vec![BmsViolation::RootOut { rule: "r11".into() }]);
    assert!(bms_to_ptl(&bad).is_err());
}
