//! Regions of step transition systems and the cone of their integer
//! solutions.
//!
//! A region `(σ, ı, ω)` assigns a token count to every state and an
//! input/output weight to every action such that each arc `q -α-> q'`
//! satisfies `σ(q) ≥ ω(α)` and `σ(q') = σ(q) − ω(α) + ı(α)`, where
//! `ω(α) = Σ α(t)·ω(t)`. These conditions are homogeneous, so the regions
//! are the integer points of a polyhedral cone; its extreme rays are
//! computed exactly with the double-description method.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;

use fixedbitset::FixedBitSet;
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::membrane_structure::{MembraneId, MembraneStructure};
use crate::multiset::Multiset;
use crate::transition_system::{Step, StepTransitionSystem};

/// A primitive nonnegative integer vector in the cone's variable order.
pub type Ray = Vec<BigInt>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConeError {
    #[error("constraint row has {got} entries, expected {expected}")]
    Dimension { expected: usize, got: usize },
}

/// `{ v ≥ 0 | E·v = 0, I·v ≥ 0 }` over named variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cone {
    variables: Vec<String>,
    equalities: Vec<Vec<BigInt>>,
    inequalities: Vec<Vec<BigInt>>,
}

impl Cone {
    pub fn new(
        variables: Vec<String>,
        equalities: Vec<Vec<BigInt>>,
        inequalities: Vec<Vec<BigInt>>,
    ) -> Result<Self, ConeError> {
        let expected = variables.len();
        if let Some(row) = equalities.iter().chain(&inequalities).find(|r| r.len() != expected) {
            return Err(ConeError::Dimension {
                expected,
                got: row.len(),
            });
        }
        Ok(Self {
            variables,
            equalities,
            inequalities,
        })
    }

    pub fn dimension(&self) -> usize {
        self.variables.len()
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn equalities(&self) -> &[Vec<BigInt>] {
        &self.equalities
    }

    pub fn inequalities(&self) -> &[Vec<BigInt>] {
        &self.inequalities
    }

    /// Exact membership test.
    pub fn contains(&self, v: &[BigInt]) -> bool {
        v.len() == self.dimension()
            && v.iter().all(|x| !x.is_negative())
            && self.equalities.iter().all(|row| dot(row, v).is_zero())
            && self.inequalities.iter().all(|row| !dot(row, v).is_negative())
    }
}

fn dot(row: &[BigInt], v: &[BigInt]) -> BigInt {
    row.iter()
        .zip(v)
        .filter(|(a, _)| !a.is_zero())
        .map(|(a, b)| a * b)
        .sum()
}

/// The region system of `ts`.
///
/// Variables are `x[q]` for every state in `ts.states()` order, then
/// `y[t]` (ı) and `z[t]` (ω) for every action in sorted order. Each
/// nonempty arc `qᵢ -α-> qⱼ` contributes the inequality `xᵢ − α·z ≥ 0`
/// and the equality `xⱼ − xᵢ − α·(y − z) = 0`.
pub fn build_system(ts: &StepTransitionSystem) -> Cone {
    let h = ts.states().len();
    let actions: Vec<&String> = ts.actions().iter().collect();
    let n = actions.len();
    let action_index: BTreeMap<&String, usize> = actions.iter().enumerate().map(|(k, a)| (*a, k)).collect();

    let mut variables: Vec<String> = ts.states().iter().map(|q| format!("x[{q}]")).collect();
    variables.extend(actions.iter().map(|a| format!("y[{a}]")));
    variables.extend(actions.iter().map(|a| format!("z[{a}]")));

    let d = h + 2 * n;
    let mut equalities = Vec::new();
    let mut inequalities = Vec::new();
    for (i, step, j) in ts.indexed_arcs() {
        let mut ineq = vec![BigInt::zero(); d];
        let mut eq = vec![BigInt::zero(); d];
        ineq[*i] += 1;
        eq[*j] += 1;
        eq[*i] -= 1;
        for (a, k) in step.iter() {
            let col = action_index[a];
            let k = BigInt::from(k.clone());
            ineq[h + n + col] -= &k;
            eq[h + col] -= &k;
            eq[h + n + col] += &k;
        }
        inequalities.push(ineq);
        equalities.push(eq);
    }
    Cone {
        variables,
        equalities,
        inequalities,
    }
}

/// Extreme rays of `cone` by double description, sorted lexicographically.
///
/// Starts from the unit vectors generating the nonnegative orthant and
/// intersects with one hyperplane or half-space at a time (equalities
/// first). Rays on opposite sides are combined only when adjacent: no
/// third ray is tight on every constraint both are tight on.
pub fn extreme_rays(cone: &Cone) -> Vec<Ray> {
    let d = cone.dimension();
    let mut rows: Vec<(&Vec<BigInt>, bool)> = Vec::new();
    let mut seen = HashSet::new();
    for (row, is_eq) in cone
        .equalities
        .iter()
        .map(|r| (r, true))
        .chain(cone.inequalities.iter().map(|r| (r, false)))
    {
        if row.iter().any(|a| !a.is_zero()) && seen.insert((row, is_eq)) {
            rows.push((row, is_eq));
        }
    }

    // Zero sets index the d nonnegativity constraints, then the rows.
    let bits = d + rows.len();
    let mut rays: Vec<(Ray, FixedBitSet)> = (0..d)
        .map(|k| {
            let mut v = vec![BigInt::zero(); d];
            v[k] = BigInt::one();
            let mut z = FixedBitSet::with_capacity(bits);
            z.insert_range(0..d);
            z.set(k, false);
            (v, z)
        })
        .collect();

    for (ci, (row, is_eq)) in rows.into_iter().enumerate() {
        let bit = d + ci;
        let values: Vec<BigInt> = rays.iter().map(|(r, _)| dot(row, r)).collect();
        let pos: Vec<usize> = (0..rays.len()).filter(|&k| values[k].is_positive()).collect();
        let neg: Vec<usize> = (0..rays.len()).filter(|&k| values[k].is_negative()).collect();

        let mut next: Vec<(Ray, FixedBitSet)> = Vec::new();
        for &p in &pos {
            for &n in &neg {
                let mut common = rays[p].1.clone();
                common.intersect_with(&rays[n].1);
                if common.count_ones(..) + 2 < d {
                    continue;
                }
                let adjacent = rays
                    .iter()
                    .enumerate()
                    .all(|(k, (_, z))| k == p || k == n || !common.is_subset(z));
                if !adjacent {
                    continue;
                }
                let (vp, vn) = (&values[p], -&values[n]);
                let combo: Ray = rays[p]
                    .0
                    .iter()
                    .zip(&rays[n].0)
                    .map(|(a, b)| vn.clone() * a + vp * b)
                    .collect();
                common.insert(bit);
                next.push((primitive(combo), common));
            }
        }
        for (k, (r, mut z)) in rays.into_iter().enumerate() {
            if values[k].is_zero() {
                z.insert(bit);
                next.push((r, z));
            } else if values[k].is_positive() && !is_eq {
                next.push((r, z));
            }
        }
        let mut unique = HashSet::new();
        next.retain(|(r, _)| unique.insert(r.clone()));
        rays = next;
    }

    let mut out: Vec<Ray> = rays.into_iter().map(|(r, _)| r).collect();
    out.sort();
    out
}

fn primitive(v: Ray) -> Ray {
    let g = v.iter().fold(BigInt::zero(), |g, x| g.gcd(x));
    if g.is_zero() || g.is_one() {
        v
    } else {
        v.into_iter().map(|x| x / &g).collect()
    }
}

/// Debug dump: a `#` header naming the variables, then one ray per line.
pub fn dump_rays(cone: &Cone, rays: &[Ray]) -> String {
    let mut out = format!("# {}\n", cone.variables.join(" "));
    for r in rays {
        let line: Vec<String> = r.iter().map(BigInt::to_string).collect();
        let _ = writeln!(out, "{}", line.join(" "));
    }
    out
}

/// A region `(σ, ı, ω)` with an optional assigned membrane.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Region {
    pub sigma: Multiset<String>,
    pub iota: Multiset<String>,
    pub omega: Multiset<String>,
    pub location: Option<MembraneId>,
}

impl Region {
    pub fn sigma_at(&self, q: &str) -> BigUint {
        self.sigma.count(&q.to_string())
    }

    /// `ω(α)`.
    pub fn consumed(&self, step: &Step) -> BigUint {
        weigh(&self.omega, step)
    }

    /// `ı(α)`.
    pub fn produced(&self, step: &Step) -> BigUint {
        weigh(&self.iota, step)
    }

    /// Componentwise `k·r`, keeping the location.
    pub fn scaled(&self, k: &BigUint) -> Self {
        Self {
            sigma: self.sigma.scalar_mul(k),
            iota: self.iota.scalar_mul(k),
            omega: self.omega.scalar_mul(k),
            location: self.location,
        }
    }

    /// Componentwise sum, without a location.
    pub fn plus(&self, other: &Self) -> Self {
        Self {
            sigma: self.sigma.sum(&other.sigma),
            iota: self.iota.sum(&other.iota),
            omega: self.omega.sum(&other.omega),
            location: None,
        }
    }

    /// Whether `α` cannot fire at `q` because of this region.
    pub fn blocks(&self, q: &str, step: &Step) -> bool {
        self.sigma_at(q) < self.consumed(step)
    }
}

fn weigh(weights: &Multiset<String>, step: &Step) -> BigUint {
    step.iter().map(|(t, k)| weights.count(t) * k).sum()
}

/// Checks the arc conditions on every nonempty arc of `ts`.
pub fn is_region(ts: &StepTransitionSystem, r: &Region) -> bool {
    ts.arcs().all(|(q, step, q2)| {
        let out = r.consumed(step);
        let s = r.sigma_at(q);
        s >= out && r.sigma_at(q2) + &out == s + r.produced(step)
    })
}

/// Decodes a ray of `build_system(ts)` into a region without a location.
pub fn decode_ray(ts: &StepTransitionSystem, ray: &[BigInt]) -> Region {
    let h = ts.states().len();
    let n = ts.actions().len();
    debug_assert_eq!(ray.len(), h + 2 * n);
    let nat = |x: &BigInt| x.to_biguint().expect("rays are nonnegative");
    Region {
        sigma: Multiset::from_counts(ts.states().iter().cloned().zip(ray[..h].iter().map(nat))),
        iota: Multiset::from_counts(ts.actions().iter().cloned().zip(ray[h..h + n].iter().map(nat))),
        omega: Multiset::from_counts(ts.actions().iter().cloned().zip(ray[h + n..].iter().map(nat))),
        location: None,
    }
}

/// The membrane a region must live in, if any.
///
/// Consumption forces the location to that of the consuming actions.
/// Every producing action must then sit in the same membrane or across a
/// single tree edge. Without consumption the admissible membrane of least
/// depth is chosen, ties going to the smallest id.
pub fn assign_location(
    r: &Region,
    mu: &MembraneStructure,
    loc: &BTreeMap<String, MembraneId>,
) -> Option<MembraneId> {
    let mut forced = None;
    for t in r.omega.support() {
        let l = *loc.get(t)?;
        match forced {
            None => forced = Some(l),
            Some(f) if f != l => return None,
            Some(_) => {}
        }
    }
    let producers: Vec<MembraneId> = r
        .iota
        .support()
        .map(|t| loc.get(t).copied())
        .collect::<Option<_>>()?;
    let admissible = |i: MembraneId| {
        producers
            .iter()
            .all(|&l| mu.relation(i, l).is_ok_and(|rel| rel.is_adjacent_or_same()))
    };
    match forced {
        Some(i) => (mu.contains(i) && admissible(i)).then_some(i),
        None => mu
            .membranes()
            .filter(|&i| admissible(i))
            .min_by_key(|&i| (mu.depth(i).unwrap_or(usize::MAX), i)),
    }
}

/// Decodes rays, drops those without a compatible location and removes
/// exact duplicates.
pub fn filter_compatible(
    rays: &[Ray],
    ts: &StepTransitionSystem,
    mu: &MembraneStructure,
    loc: &BTreeMap<String, MembraneId>,
) -> Vec<Region> {
    let mut seen = HashSet::new();
    rays.iter()
        .filter_map(|ray| {
            let mut r = decode_ray(ts, ray);
            r.location = Some(assign_location(&r, mu, loc)?);
            Some(r)
        })
        .filter(|r| seen.insert(r.clone()))
        .collect()
}

/// One region per membrane `i` with `σ ≡ Max` and `ı = ω` the indicator of
/// the actions located in `i`; together they bound every membrane's share
/// of a step by `Max`, the largest step size in `ts`.
pub fn locality_witnesses(
    ts: &StepTransitionSystem,
    mu: &MembraneStructure,
    loc: &BTreeMap<String, MembraneId>,
) -> Vec<Region> {
    let max = ts.max_step_size();
    mu.membranes()
        .map(|i| {
            let local = Multiset::from_counts(
                ts.actions()
                    .iter()
                    .filter(|t| loc.get(*t) == Some(&i))
                    .map(|t| (t.clone(), BigUint::one())),
            );
            Region {
                sigma: Multiset::from_counts(ts.states().iter().map(|q| (q.clone(), max.clone()))),
                iota: local.clone(),
                omega: local,
                location: Some(i),
            }
        })
        .collect()
}
