//! Fixtures and independent oracles shared by the integration tests and the
//! acceptance harness. Nothing here calls the library's enumeration,
//! region or cone code; it recomputes answers from the definitions.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::path::PathBuf;

use memsynth::membrane_system::{BasicMembraneSystem, Configuration, Target, VectorMultiRule};
use memsynth::ptl_net::{NetArc, Node};
use memsynth::regions::Region;
use memsynth::transition_system::Arc;
use memsynth::{Exploration, MembraneStructure, Mode, Multiset, PtlNet, Step, StepTransitionSystem};
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::Rng;

// ---- fixtures ----

pub fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

pub fn load<T: serde::de::DeserializeOwned>(name: &str) -> T {
    let text = std::fs::read_to_string(data(name)).unwrap();
    serde_json::from_str(&text).unwrap()
}

pub fn bms0() -> BasicMembraneSystem {
    load("bms0.bms")
}

pub fn two_membranes() -> BasicMembraneSystem {
    load("two_membranes.bms")
}

pub fn three_membranes() -> MembraneStructure {
    load("three_membranes.json")
}

pub fn ms(xs: &[&str]) -> Multiset<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

pub fn cfg(parts: &[&[&str]]) -> Configuration {
    Configuration::new(parts.iter().map(|p| ms(p)).collect())
}

pub fn vector(parts: &[&[&str]]) -> VectorMultiRule {
    VectorMultiRule::new(parts.iter().map(|p| ms(p)).collect())
}

pub fn ts_from(arcs: &[(&str, &[&str], &str)]) -> StepTransitionSystem {
    StepTransitionSystem::from_arcs(
        arcs[0].0,
        arcs.iter().map(|(a, s, b)| Arc::new(*a, ms(s), *b)).collect(),
    )
    .unwrap()
}

pub fn identity(actions: &BTreeSet<String>) -> BTreeMap<String, String> {
    actions.iter().map(|a| (a.clone(), a.clone())).collect()
}

/// State value by id for an exploration.
pub fn states_by_id<S: Clone>(g: &Exploration<S>) -> HashMap<String, S> {
    g.ts.states().iter().cloned().zip(g.states.iter().cloned()).collect()
}

fn small(n: &BigUint) -> u64 {
    n.to_u64().expect("test values are small")
}

// ---- random models ----

fn action_names(n: usize) -> Vec<String> {
    (0..n).map(|k| ((b'a' + k as u8) as char).to_string()).collect()
}

fn random_step<R: Rng>(rng: &mut R, actions: &[String], max_step: usize) -> Step {
    let size = rng.gen_range(1..=max_step);
    (0..size).map(|_| actions.choose(rng).unwrap().clone()).collect()
}

/// A deterministic transition system in which every state is reachable
/// from `q0` and every action labels some arc.
pub fn random_ts<R: Rng>(rng: &mut R, max_states: usize, max_actions: usize, max_step: usize) -> StepTransitionSystem {
    let h = rng.gen_range(1..=max_states);
    let n = rng.gen_range(1..=max_actions);
    let actions = action_names(n);
    let mut out: Vec<BTreeMap<Step, usize>> = vec![BTreeMap::new(); h];
    let add = |rng: &mut R, out: &mut Vec<BTreeMap<Step, usize>>, from: usize, to: usize| {
        for _ in 0..32 {
            let s = random_step(rng, &actions, max_step);
            if let std::collections::btree_map::Entry::Vacant(e) = out[from].entry(s) {
                e.insert(to);
                return;
            }
        }
    };
    for k in 1..h {
        let from = rng.gen_range(0..k);
        add(rng, &mut out, from, k);
    }
    for _ in 0..rng.gen_range(1..=h + 2) {
        let (from, to) = (rng.gen_range(0..h), rng.gen_range(0..h));
        add(rng, &mut out, from, to);
    }
    let arcs = out
        .iter()
        .enumerate()
        .flat_map(|(f, m)| m.iter().map(move |(s, t)| Arc::new(format!("q{f}"), s.clone(), format!("q{t}"))))
        .collect();
    StepTransitionSystem::from_arcs("q0", arcs).unwrap()
}

/// A net over up to three places and transitions in membranes 1 and 2.
pub fn random_net<R: Rng>(rng: &mut R) -> PtlNet {
    let np = rng.gen_range(1..=3);
    let nt = rng.gen_range(1..=3);
    let places: Vec<Node> = (0..np).map(|k| Node::at(format!("p{k}"), rng.gen_range(1..=2))).collect();
    let transitions: Vec<Node> = (0..nt).map(|k| Node::at(format!("t{k}"), rng.gen_range(1..=2))).collect();
    let mut arcs = Vec::new();
    for t in &transitions {
        let mut inputs: Vec<usize> = (0..np).filter(|_| rng.gen_bool(0.5)).collect();
        if inputs.is_empty() {
            inputs.push(rng.gen_range(0..np));
        }
        for p in inputs {
            arcs.push(NetArc::new(places[p].id.clone(), t.id.clone(), rng.gen_range(1..=2u32)));
        }
        for p in &places {
            if rng.gen_bool(0.4) {
                arcs.push(NetArc::new(t.id.clone(), p.id.clone(), rng.gen_range(1..=2u32)));
            }
        }
    }
    let initial = random_marking(rng, &places);
    PtlNet::new(places, transitions, arcs, initial).unwrap()
}

pub fn random_marking<R: Rng>(rng: &mut R, places: &[Node]) -> Multiset<String> {
    Multiset::from_counts(places.iter().map(|p| (p.id.clone(), BigUint::from(rng.gen_range(0..=3u32)))))
}

// ---- brute-force step enumeration ----

/// All count vectors with `0 ≤ v[k] ≤ bounds[k]`.
pub fn count_vectors(bounds: &[u64]) -> Vec<Vec<u64>> {
    let mut all = vec![Vec::new()];
    for &b in bounds {
        all = all
            .into_iter()
            .flat_map(|v| {
                (0..=b).map(move |c| {
                    let mut v2 = v.clone();
                    v2.push(c);
                    v2
                })
            })
            .collect();
    }
    all
}

fn net_pre(net: &PtlNet, counts: &[u64]) -> BTreeMap<String, u64> {
    let mut pre = BTreeMap::new();
    for (t, &c) in net.transitions().iter().zip(counts) {
        for p in net.places() {
            let w = small(&net.weight_in(&p.id, &t.id));
            if w * c > 0 {
                *pre.entry(p.id.clone()).or_insert(0) += w * c;
            }
        }
    }
    pre
}

fn fits(pre: &BTreeMap<String, u64>, marking: &Multiset<String>) -> bool {
    pre.iter().all(|(p, n)| *n <= small(&marking.count(p)))
}

/// Mode-enabled nonempty steps of a net, straight from the definitions.
pub fn brute_enabled_net(net: &PtlNet, marking: &Multiset<String>, mode: Mode) -> BTreeSet<Step> {
    let ts = net.transitions();
    let bounds: Vec<u64> = ts
        .iter()
        .map(|t| {
            net.places()
                .iter()
                .filter_map(|p| {
                    let w = small(&net.weight_in(&p.id, &t.id));
                    (w > 0).then(|| small(&marking.count(&p.id)) / w)
                })
                .min()
                .unwrap_or(0)
        })
        .collect();
    let mut out = BTreeSet::new();
    for v in count_vectors(&bounds) {
        if v.iter().all(|&c| c == 0) || !fits(&net_pre(net, &v), marking) {
            continue;
        }
        let active: BTreeSet<_> = ts.iter().zip(&v).filter(|(_, &c)| c > 0).map(|(t, _)| t.location).collect();
        let extendable = (0..ts.len()).any(|k| {
            let relevant = match mode {
                Mode::Free => false,
                Mode::Max => true,
                Mode::Lmax => active.contains(&ts[k].location),
            };
            let mut w = v.clone();
            w[k] += 1;
            relevant && fits(&net_pre(net, &w), marking)
        });
        if !extendable {
            out.insert(Step::from_counts(
                ts.iter().zip(&v).map(|(t, &c)| (t.id.clone(), BigUint::from(c))),
            ));
        }
    }
    out
}

/// Mode-enabled nonempty vector multi-rules, straight from the definitions.
pub fn brute_enabled_bms(bms: &BasicMembraneSystem, c: &Configuration, mode: Mode) -> BTreeSet<VectorMultiRule> {
    let m = bms.degree();
    let rules: Vec<(usize, String, BTreeMap<String, u64>)> = (1..=m)
        .flat_map(|i| {
            bms.rules_in(i).iter().map(move |r| {
                let lhs = r.lhs.iter().map(|(a, n)| (a.clone(), small(n))).collect();
                (i, r.name.clone(), lhs)
            })
        })
        .collect();
    let lhs_of = |v: &[u64]| -> Vec<BTreeMap<String, u64>> {
        let mut acc = vec![BTreeMap::new(); m];
        for ((i, _, lhs), &k) in rules.iter().zip(v) {
            for (a, n) in lhs {
                *acc[i - 1].entry(a.clone()).or_insert(0) += n * k;
            }
        }
        acc
    };
    let free = |v: &[u64]| {
        lhs_of(v)
            .iter()
            .enumerate()
            .all(|(idx, need)| need.iter().all(|(a, n)| *n <= small(&c.membrane(idx + 1).count(a))))
    };
    let bounds: Vec<u64> = rules
        .iter()
        .map(|(i, _, lhs)| lhs.iter().map(|(a, n)| small(&c.membrane(*i).count(a)) / n).min().unwrap_or(0))
        .collect();
    let mut out = BTreeSet::new();
    for v in count_vectors(&bounds) {
        if v.iter().all(|&k| k == 0) || !free(&v) {
            continue;
        }
        let extendable = (0..rules.len()).any(|k| {
            let i = rules[k].0;
            let used_here = rules.iter().zip(&v).any(|((j, _, _), &c)| *j == i && c > 0);
            let relevant = match mode {
                Mode::Free => false,
                Mode::Max => true,
                Mode::Lmax => used_here,
            };
            let mut w = v.clone();
            w[k] += 1;
            relevant && free(&w)
        });
        if !extendable {
            let mut parts = vec![Multiset::new(); m];
            for ((i, name, _), &k) in rules.iter().zip(&v) {
                if k > 0 {
                    parts[i - 1].insert(name.clone(), BigUint::from(k));
                }
            }
            out.insert(VectorMultiRule::new(parts));
        }
    }
    out
}

/// Evolution recomputed with objects routed by hand.
pub fn oracle_evolve(bms: &BasicMembraneSystem, c: &Configuration, r: &VectorMultiRule) -> Configuration {
    let mu = bms.structure();
    let m = bms.degree();
    let mut w: Vec<BTreeMap<String, i64>> = c
        .membranes()
        .iter()
        .map(|x| x.iter().map(|(a, n)| (a.clone(), small(n) as i64)).collect())
        .collect();
    for i in 1..=m {
        for (name, k) in r.component(i).iter() {
            let k = small(k) as i64;
            let (_, rule) = bms.rule(name).unwrap();
            for (a, n) in rule.lhs.iter() {
                *w[i - 1].entry(a.clone()).or_insert(0) -= k * small(n) as i64;
            }
            for (o, n) in rule.rhs.iter() {
                let dest = match o.target {
                    Target::Here => i,
                    Target::Out => mu.parent(i).unwrap(),
                    Target::In(j) => j,
                };
                *w[dest - 1].entry(o.object.clone()).or_insert(0) += k * small(n) as i64;
            }
        }
    }
    Configuration::new(
        w.into_iter()
            .map(|x| {
                assert!(x.values().all(|&n| n >= 0));
                Multiset::from_counts(x.into_iter().map(|(a, n)| (a, BigUint::from(n as u64))))
            })
            .collect(),
    )
}

// ---- regions ----

/// The arc conditions, with signed arithmetic.
pub fn oracle_is_region(ts: &StepTransitionSystem, r: &Region) -> bool {
    let val = |m: &Multiset<String>, k: &str| BigInt::from(m.count(&k.to_string()));
    ts.arcs().all(|(q, step, q2)| {
        let (mut out, mut inp) = (BigInt::zero(), BigInt::zero());
        for (t, k) in step.iter() {
            out += val(&r.omega, t) * BigInt::from(k.clone());
            inp += val(&r.iota, t) * BigInt::from(k.clone());
        }
        val(&r.sigma, q) >= out && val(&r.sigma, q2) == val(&r.sigma, q) - out + inp
    })
}

/// Every primitive nonnegative integer solution of the region system with
/// all coordinates at most `bound`, in the variable order x (states), y, z
/// (actions sorted). Since every state is reachable, σ is determined by
/// σ(q₀) and (ı, ω), so only those are enumerated.
pub fn grid_solutions(ts: &StepTransitionSystem, bound: i64) -> Vec<Vec<BigInt>> {
    let h = ts.states().len();
    let actions: Vec<&String> = ts.actions().iter().collect();
    let n = actions.len();
    let col: BTreeMap<&String, usize> = actions.iter().enumerate().map(|(k, a)| (*a, k)).collect();
    type SmallArc = (usize, Vec<(usize, i64)>, usize);
    let arcs: Vec<SmallArc> = ts
        .indexed_arcs()
        .iter()
        .map(|(i, s, j)| (*i, s.iter().map(|(a, k)| (col[a], small(k) as i64)).collect(), *j))
        .collect();
    let mut out = Vec::new();
    let weights = count_vectors(&vec![bound as u64; 2 * n]);
    for x0 in 0..=bound {
        for yz in &weights {
            let (y, z) = yz.split_at(n);
            let mut x: Vec<Option<i64>> = vec![None; h];
            x[ts.initial_index()] = Some(x0);
            let mut queue = VecDeque::from([ts.initial_index()]);
            let mut ok = true;
            while let Some(i) = queue.pop_front() {
                for (f, s, t) in arcs.iter().filter(|a| a.0 == i || a.2 == i) {
                    let delta: i64 = s.iter().map(|(c, k)| k * (y[*c] as i64 - z[*c] as i64)).sum();
                    match (x[*f], x[*t]) {
                        (Some(a), None) => {
                            x[*t] = Some(a + delta);
                            queue.push_back(*t);
                        }
                        (None, Some(b)) => {
                            x[*f] = Some(b - delta);
                            queue.push_back(*f);
                        }
                        (Some(a), Some(b)) => ok &= b == a + delta,
                        (None, None) => unreachable!(),
                    }
                }
            }
            let x: Vec<i64> = match x.into_iter().collect::<Option<Vec<_>>>() {
                Some(x) => x,
                None => continue,
            };
            ok &= x.iter().all(|&v| (0..=bound).contains(&v));
            ok &= arcs
                .iter()
                .all(|(f, s, _)| x[*f] >= s.iter().map(|(c, k)| k * z[*c] as i64).sum::<i64>());
            if !ok {
                continue;
            }
            let v: Vec<i64> = x.into_iter().chain(y.iter().map(|&a| a as i64)).chain(z.iter().map(|&a| a as i64)).collect();
            let g = v.iter().fold(0i64, |g, &a| gcd(g, a));
            if g == 1 {
                out.push(v.into_iter().map(BigInt::from).collect());
            }
        }
    }
    out
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// Whether `v` is a nonnegative rational combination of `rays`: phase one
/// of the simplex method over exact rationals with Bland's rule, on
/// `Σ c_l·ray_l = v`, `c ≥ 0`.
pub fn in_cone(rays: &[Vec<BigInt>], v: &[BigInt]) -> bool {
    let m = v.len();
    let k = rays.len();
    let q = |x: &BigInt| BigRational::from_integer(x.clone());
    // Columns: k ray coefficients, then m artificials; last entry is the rhs.
    let mut rows: Vec<Vec<BigRational>> = (0..m)
        .map(|i| {
            let mut row: Vec<BigRational> = rays.iter().map(|r| q(&r[i])).collect();
            row.extend((0..m).map(|j| if i == j { BigRational::one() } else { BigRational::zero() }));
            row.push(q(&v[i]));
            row
        })
        .collect();
    let mut basis: Vec<usize> = (k..k + m).collect();
    // w = constant + Σ cost_j·var_j, minimised.
    let mut cost: Vec<BigRational> = (0..k + m)
        .map(|j| if j < k { -rows.iter().map(|r| r[j].clone()).sum::<BigRational>() } else { BigRational::zero() })
        .collect();
    let mut constant: BigRational = v.iter().map(q).sum();
    while let Some(e) = (0..k + m).find(|&j| cost[j].is_negative()) {
        let mut leave: Option<(usize, BigRational)> = None;
        for (i, row) in rows.iter().enumerate() {
            if row[e].is_positive() {
                let ratio = &row[k + m] / &row[e];
                let better = match &leave {
                    None => true,
                    Some((l, best)) => ratio < *best || (ratio == *best && basis[i] < basis[*l]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let (l, _) = leave.expect("phase one objective is bounded below");
        let pivot = rows[l][e].clone();
        for x in rows[l].iter_mut() {
            *x /= &pivot;
        }
        let prow = rows[l].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != l && !row[e].is_zero() {
                let f = row[e].clone();
                for (x, p) in row.iter_mut().zip(&prow) {
                    *x -= &f * p;
                }
            }
        }
        let d = cost[e].clone();
        for (c, p) in cost.iter_mut().zip(&prow) {
            *c -= &d * p;
        }
        constant += &d * &prow[k + m];
        basis[l] = e;
    }
    constant.is_zero()
}

/// Nonempty steps of size at most `bound` that no region blocks at `q`.
pub fn brute_unblocked(actions: &BTreeSet<String>, regions: &[Region], q: &str, bound: u64) -> BTreeSet<Step> {
    let names: Vec<&String> = actions.iter().collect();
    let sigma = |r: &Region| small(&r.sigma.count(&q.to_string()));
    count_vectors(&vec![bound; names.len()])
        .into_iter()
        .filter(|v| {
            let size: u64 = v.iter().sum();
            size > 0 && size <= bound
        })
        .filter(|v| {
            regions.iter().all(|r| {
                let out: u64 = names.iter().zip(v).map(|(t, &c)| small(&r.omega.count(t)) * c).sum();
                sigma(r) >= out
            })
        })
        .map(|v| Step::from_counts(names.iter().map(|t| (*t).clone()).zip(v.into_iter().map(BigUint::from))))
        .collect()
}

/// A valid system over objects {a, b} on a random tree of up to three
/// membranes, with up to two rules per membrane.
pub fn random_bms<R: Rng>(rng: &mut R) -> BasicMembraneSystem {
    use memsynth::membrane_system::{EvolutionRule, IndexedObject};
    let m = rng.gen_range(1..=3);
    let parents: Vec<(usize, usize)> = (2..=m).map(|j| (j, rng.gen_range(1..j))).collect();
    let mu = MembraneStructure::new(m, parents.clone());
    let objects = ["a", "b"];
    let mut rules = BTreeMap::new();
    let mut counter = 0;
    for i in 1..=m {
        let children: Vec<usize> = parents.iter().filter(|(_, p)| *p == i).map(|(c, _)| *c).collect();
        let mut rs = Vec::new();
        for _ in 0..rng.gen_range(0..=2) {
            counter += 1;
            let lhs: Multiset<String> = (0..rng.gen_range(1..=2)).map(|_| objects.choose(rng).unwrap().to_string()).collect();
            let rhs: Multiset<IndexedObject> = (0..rng.gen_range(0..=2))
                .map(|_| {
                    let o = objects.choose(rng).unwrap().to_string();
                    match rng.gen_range(0..3) {
                        1 if i != 1 => IndexedObject::out(o),
                        2 if !children.is_empty() => IndexedObject::into_child(o, *children.choose(rng).unwrap()),
                        _ => IndexedObject::here(o),
                    }
                })
                .collect();
            rs.push(EvolutionRule::new(format!("r{counter}"), lhs, rhs));
        }
        rules.insert(i, rs);
    }
    let initial = (1..=m)
        .map(|i| {
            let w = Multiset::from_counts(objects.iter().map(|a| (a.to_string(), BigUint::from(rng.gen_range(0..=2u32)))));
            (i, w)
        })
        .collect();
    let bms = BasicMembraneSystem::new(objects.iter().map(|s| s.to_string()), mu, initial, rules).unwrap();
    assert!(bms.validate().is_empty());
    bms
}

/// Checks `CRG(net) ∼φ,ν CRG(bms)` under `maps` on explorations bounded
/// by `limits`, including that every matched pair of states agrees with ν.
pub fn check_correspondence(
    net: &PtlNet,
    bms: &BasicMembraneSystem,
    maps: &memsynth::translate::TranslationMaps,
    mode: Mode,
    limits: memsynth::ExploreLimits,
) -> Result<(), String> {
    let gn = net.reachability_graph(mode, limits).map_err(|e| e.to_string())?;
    let gb = bms.reachability_graph(mode, limits).map_err(|e| e.to_string())?;
    if gn.truncated != gb.truncated {
        return Err(format!("truncation differs: net {} vs system {}", gn.truncated, gb.truncated));
    }
    let nu = gn
        .ts
        .check_isomorphic(&gb.ts, &maps.phi)
        .map_err(|e| e.to_string())?
        .ok_or_else(|| format!("{mode}: graphs are not isomorphic under phi"))?;
    let markings = states_by_id(&gn);
    let configs = states_by_id(&gb);
    for (m, c) in &nu {
        let got = maps.marking_to_config(&markings[m]).map_err(|e| e.to_string())?;
        if got != configs[c] {
            return Err(format!("{mode}: nu({m}) = {got}, matched with {c}"));
        }
    }
    Ok(())
}

/// The synthesis problem posed by a net's own reachability graph, or `None`
/// when the exploration is cut off by `limits`.
pub fn problem_from_net(
    net: &PtlNet,
    mu: &MembraneStructure,
    mode: Mode,
    limits: memsynth::ExploreLimits,
) -> Option<memsynth::synthesis::SynthesisProblem> {
    let g = net.reachability_graph(mode, limits).unwrap();
    if g.truncated {
        return None;
    }
    let loc = g.ts.actions().iter().map(|t| (t.clone(), net.location(t).unwrap())).collect();
    Some(memsynth::synthesis::SynthesisProblem {
        ts: g.ts,
        mu: mu.clone(),
        loc,
        mode,
    })
}

// ---- property checks shared with the acceptance harness ----

pub type Check = Result<(), String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Check {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

pub fn multiset_of(pairs: &[(u8, u32)]) -> Multiset<String> {
    Multiset::from_counts(pairs.iter().map(|(k, n)| (((b'a' + k % 4) as char).to_string(), BigUint::from(*n))))
}

pub fn check_multiset_laws(a: &Multiset<String>, b: &Multiset<String>, c: &Multiset<String>, k: u32) -> Check {
    let k = BigUint::from(k);
    ensure(a.sum(b) == b.sum(a), || "sum commutes".into())?;
    ensure(a.sum(b).sum(c) == a.sum(&b.sum(c)), || "sum associates".into())?;
    ensure(a.sum(&Multiset::new()) == *a, || "empty is neutral".into())?;
    ensure(a.leq(&a.sum(b)), || "a ≤ a+b".into())?;
    ensure(a.sum(b).difference(b) == *a, || "(a+b)-b = a".into())?;
    ensure(a.sum(b).size() == a.size() + b.size(), || "size is additive".into())?;
    ensure(a.sum(b).scalar_mul(&k) == a.scalar_mul(&k).sum(&b.scalar_mul(&k)), || "k(a+b) = ka+kb".into())?;
    ensure(a.checked_sub(b).is_some() == b.leq(a), || "checked_sub iff b ≤ a".into())?;
    if let Some(d) = a.checked_sub(b) {
        ensure(d.sum(b) == *a, || "(a-b)+b = a".into())?;
    }
    ensure(a.lt(b) == (a.leq(b) && a != b), || "strict order".into())?;
    ensure(a.iter().all(|(_, n)| !n.is_zero()), || "no zero counts stored".into())
}

pub fn check_mode_hierarchy(seed: u64) -> Check {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let net = random_net(&mut rng);
    let m = random_marking(&mut rng, net.places());
    let steps = |mode| net.enabled_steps(&m, mode).unwrap();
    let (free, lmax, max) = (steps(Mode::Free), steps(Mode::Lmax), steps(Mode::Max));
    ensure(max.is_subset(&lmax), || format!("max ⊄ lmax at {m}"))?;
    ensure(lmax.is_subset(&free), || format!("lmax ⊄ free at {m}"))?;
    ensure(free.is_empty() == max.is_empty(), || format!("max empty but free is not at {m}"))
}

pub fn check_region_closure(seed: u64, k: u32) -> Check {
    use memsynth::regions::{assign_location, build_system, extreme_rays, filter_compatible};
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let ts = random_ts(&mut rng, 3, 3, 2);
    let mu = MembraneStructure::new(3, [(2, 1), (3, 1)]);
    let loc: BTreeMap<String, usize> = ts.actions().iter().map(|a| (a.clone(), rng.gen_range(1..=3))).collect();
    let regions = filter_compatible(&extreme_rays(&build_system(&ts)), &ts, &mu, &loc);
    if regions.is_empty() {
        return Ok(());
    }
    let r1 = regions.choose(&mut rng).unwrap();
    let scaled = r1.scaled(&BigUint::from(k));
    ensure(oracle_is_region(&ts, &scaled), || format!("{k}·region is not a region"))?;
    ensure(assign_location(&scaled, &mu, &loc) == r1.location, || "scaling moves the location".into())?;
    for r2 in regions.iter().filter(|r| r.location == r1.location) {
        let s = r1.plus(r2);
        ensure(oracle_is_region(&ts, &s), || "sum of regions is not a region".into())?;
        ensure(assign_location(&s, &mu, &loc) == r1.location, || "sum moves the location".into())?;
    }
    Ok(())
}

pub fn check_rs_downward_closed(seed: u64) -> Check {
    use memsynth::synthesis::{region_enabled_steps, SynthesisProblem};
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let ts = random_ts(&mut rng, 3, 3, 2);
    let mu = MembraneStructure::new(3, [(2, 1), (3, 1)]);
    let loc = ts.actions().iter().map(|a| (a.clone(), rng.gen_range(1..=3))).collect();
    let p = SynthesisProblem { ts, mu, loc, mode: Mode::Free };
    let regions = p.generating_regions();
    let cap = small(&(BigUint::from(p.mu.degree()) * p.ts.max_step_size()));
    for q in p.ts.states() {
        let rs = region_enabled_steps(&p, &regions, q).map_err(|e| e.to_string())?.steps;
        let brute = brute_unblocked(p.ts.actions(), &regions, q, cap);
        ensure(rs == brute, || format!("RS at {q} differs from brute force"))?;
        for s in &rs {
            for t in s.support() {
                let smaller = s.difference(&Multiset::singleton(t.clone()));
                ensure(smaller.is_empty() || rs.contains(&smaller), || format!("{smaller} ⊂ {s} missing at {q}"))?;
            }
        }
    }
    Ok(())
}
