//! Finite multisets with exact, arbitrary-precision multiplicities.
//!
//! A [`Multiset`] is stored in canonical form: symbols with multiplicity
//! zero are never kept, so two multisets are equal exactly when their
//! entry maps are equal. This matters because markings and configurations
//! double as node identities in reachability graphs.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::Add;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use serde::de::{self, Deserialize, Deserializer, MapAccess, Visitor};
use serde::ser::{Serialize, SerializeMap, Serializer};

/// Error returned by [`Multiset::map_image`] when the function is not
/// defined on some element of the support.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("mapping is undefined on symbol `{symbol}`")]
pub struct UnmappedSymbol {
    pub symbol: String,
}

/// A finite multiset over symbols of type `K`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Multiset<K: Ord = String> {
    entries: BTreeMap<K, BigUint>,
}

impl<K: Ord> Default for Multiset<K> {
    fn default() -> Self {
        Self {
            entries: BTreeMap::new(),
        }
    }
}

impl<K: Ord + Clone> Multiset<K> {
    /// The empty multiset.
    pub fn new() -> Self {
        Self::default()
    }

    pub fn singleton(symbol: K) -> Self {
        let mut m = Self::new();
        m.insert(symbol, BigUint::from(1u32));
        m
    }

    /// Builds a multiset from `(symbol, count)` pairs; repeated symbols
    /// accumulate and zero counts are dropped.
    pub fn from_counts<I, N>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (K, N)>,
        N: Into<BigUint>,
    {
        let mut m = Self::new();
        for (k, n) in pairs {
            m.insert(k, n.into());
        }
        m
    }

    /// Builds a multiset by listing elements with repetition, e.g.
    /// `["y", "y", "z"]`.
    pub fn from_elements<I: IntoIterator<Item = K>>(elements: I) -> Self {
        let mut m = Self::new();
        for k in elements {
            m.insert(k, BigUint::from(1u32));
        }
        m
    }

    /// Adds `n` copies of `symbol`.
    pub fn insert(&mut self, symbol: K, n: BigUint) {
        if n.is_zero() {
            return;
        }
        *self.entries.entry(symbol).or_insert_with(BigUint::zero) += n;
    }

    /// Multiplicity of `symbol` (zero when absent).
    pub fn count(&self, symbol: &K) -> BigUint {
        self.entries.get(symbol).cloned().unwrap_or_default()
    }

    pub fn count_ref(&self, symbol: &K) -> Option<&BigUint> {
        self.entries.get(symbol)
    }

    pub fn contains(&self, symbol: &K) -> bool {
        self.entries.contains_key(symbol)
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Number of distinct symbols with positive multiplicity.
    pub fn support_len(&self) -> usize {
        self.entries.len()
    }

    pub fn support(&self) -> impl Iterator<Item = &K> {
        self.entries.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&K, &BigUint)> {
        self.entries.iter()
    }

    /// `|θ|`, the total number of elements counted with multiplicity.
    pub fn size(&self) -> BigUint {
        self.entries.values().sum()
    }

    pub fn sum(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (k, n) in &other.entries {
            out.insert(k.clone(), n.clone());
        }
        out
    }

    pub fn scalar_mul(&self, k: &BigUint) -> Self {
        if k.is_zero() {
            return Self::new();
        }
        Self {
            entries: self
                .entries
                .iter()
                .map(|(s, n)| (s.clone(), n * k))
                .collect(),
        }
    }

    /// Truncated difference: `max(a(x) - b(x), 0)` pointwise.
    pub fn difference(&self, other: &Self) -> Self {
        let entries = self
            .entries
            .iter()
            .filter_map(|(k, n)| match other.entries.get(k) {
                Some(m) if m >= n => None,
                Some(m) => Some((k.clone(), n - m)),
                None => Some((k.clone(), n.clone())),
            })
            .collect();
        Self { entries }
    }

    /// Exact subtraction, defined only when `other ≤ self`.
    pub fn checked_sub(&self, other: &Self) -> Option<Self> {
        if other.leq(self) {
            Some(self.difference(other))
        } else {
            None
        }
    }

    /// `self ≤ other` in the pointwise order.
    pub fn leq(&self, other: &Self) -> bool {
        self.entries
            .iter()
            .all(|(k, n)| other.entries.get(k).is_some_and(|m| n <= m))
    }

    /// Strict order: `self ≤ other` and `self ≠ other`.
    pub fn lt(&self, other: &Self) -> bool {
        self != other && self.leq(other)
    }

    pub fn restrict(&self, zone: &BTreeSet<K>) -> Self {
        self.restrict_by(|k| zone.contains(k))
    }

    pub fn restrict_by<F: Fn(&K) -> bool>(&self, keep: F) -> Self {
        Self {
            entries: self
                .entries
                .iter()
                .filter(|(k, _)| keep(k))
                .map(|(k, n)| (k.clone(), n.clone()))
                .collect(),
        }
    }

    /// Image of the multiset under `f`, summing multiplicities over fibres.
    pub fn map_image<K2, F>(&self, f: F) -> Result<Multiset<K2>, UnmappedSymbol>
    where
        K2: Ord + Clone,
        K: fmt::Display,
        F: Fn(&K) -> Option<K2>,
    {
        let mut out = Multiset::new();
        for (k, n) in &self.entries {
            let image = f(k).ok_or_else(|| UnmappedSymbol {
                symbol: k.to_string(),
            })?;
            out.insert(image, n.clone());
        }
        Ok(out)
    }
}

impl<K: Ord + Clone> Add for &Multiset<K> {
    type Output = Multiset<K>;

    fn add(self, rhs: Self) -> Multiset<K> {
        self.sum(rhs)
    }
}

impl<K: Ord + Clone> FromIterator<K> for Multiset<K> {
    fn from_iter<I: IntoIterator<Item = K>>(iter: I) -> Self {
        Self::from_elements(iter)
    }
}

/// Canonical rendering `{a:1,b:2}` with symbols in sorted order.
impl<K: Ord + fmt::Display> fmt::Display for Multiset<K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (k, n)) in self.entries.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{k}:{n}")?;
        }
        f.write_str("}")
    }
}

impl<K: Ord + fmt::Debug> fmt::Debug for Multiset<K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.entries.iter()).finish()
    }
}

/// Converts a count to `usize`, for enumeration bounds.
pub(crate) fn count_to_usize(n: &BigUint) -> Option<usize> {
    n.to_usize()
}

/// Serde adapter for standalone counts (arc weights): a JSON number when the
/// value fits in u64, a decimal string otherwise.
pub(crate) mod count_serde {
    use super::CountRepr;
    use num_bigint::BigUint;
    use num_traits::ToPrimitive;
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(n: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        match n.to_u64() {
            Some(v) => s.serialize_u64(v),
            None => s.serialize_str(&n.to_str_radix(10)),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
        match CountRepr::deserialize(d)? {
            CountRepr::Number(v) => Ok(BigUint::from(v)),
            CountRepr::Text(s) => s
                .parse()
                .map_err(|_| de::Error::custom(format!("invalid count `{s}`"))),
        }
    }
}

// JSON: `{symbol: count}`. Counts that fit in u64 are written as numbers,
// larger ones as decimal strings; both forms are accepted on input.

impl<K: Ord + Serialize> Serialize for Multiset<K> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.entries.len()))?;
        for (k, n) in &self.entries {
            match n.to_u64() {
                Some(v) => map.serialize_entry(k, &v)?,
                None => map.serialize_entry(k, &n.to_str_radix(10))?,
            }
        }
        map.end()
    }
}

#[derive(serde::Deserialize)]
#[serde(untagged)]
enum CountRepr {
    Number(u64),
    Text(String),
}

impl<'de, K> Deserialize<'de> for Multiset<K>
where
    K: Ord + Clone + Deserialize<'de>,
{
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct MultisetVisitor<K>(std::marker::PhantomData<K>);

        impl<'de, K: Ord + Clone + Deserialize<'de>> Visitor<'de> for MultisetVisitor<K> {
            type Value = Multiset<K>;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("an object mapping symbols to nonnegative integer counts")
            }

            fn visit_map<A: MapAccess<'de>>(self, mut access: A) -> Result<Self::Value, A::Error> {
                let mut out = Multiset::new();
                while let Some((k, repr)) = access.next_entry::<K, CountRepr>()? {
                    let n = match repr {
                        CountRepr::Number(v) => BigUint::from(v),
                        CountRepr::Text(s) => s.parse::<BigUint>().map_err(|_| {
                            de::Error::custom(format!("invalid count `{s}`"))
                        })?,
                    };
                    out.insert(k, n);
                }
                Ok(out)
            }
        }

        deserializer.deserialize_map(MultisetVisitor(std::marker::PhantomData))
    }
}
