use std::cmp::Ordering;
use std::collections::BTreeMap;

use crate::scalar::Scalar;

/// Finite distribution over real values: `(value, mass)` bins sorted by
/// value with distinct values.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram<T> {
    bins: Vec<(T, T)>,
    total_mass: T,
}

fn cmp<T: PartialOrd>(a: &T, b: &T) -> Ordering {
    a.partial_cmp(b).unwrap_or(Ordering::Equal)
}

impl<T: Scalar> Histogram<T> {
    /// Builds from arbitrary `(value, mass)` pairs; equal values merge.
    pub fn from_weighted(pairs: impl IntoIterator<Item = (T, T)>) -> Self {
        let mut pairs: Vec<(T, T)> = pairs.into_iter().collect();
        pairs.sort_by(|a, b| cmp(&a.0, &b.0));
        let mut bins: Vec<(T, T)> = Vec::with_capacity(pairs.len());
        for (value, mass) in pairs {
            match bins.last_mut() {
                Some(last) if last.0 == value => last.1 = last.1 + mass,
                _ => bins.push((value, mass)),
            }
        }
        let total_mass = bins.iter().fold(T::zero(), |acc, b| acc + b.1);
        Histogram { bins, total_mass }
    }

    /// Empirical distribution of `values`, each sample weighing `1/n`.
    pub fn empirical(values: &[T]) -> Self {
        let mut sorted = values.to_vec();
        sorted.sort_by(cmp);
        let n = sorted.len();
        let mut bins: Vec<(T, usize)> = Vec::new();
        for v in sorted {
            match bins.last_mut() {
                Some(last) if last.0 == v => last.1 += 1,
                _ => bins.push((v, 1)),
            }
        }
        Histogram::from_weighted(bins.into_iter().map(|(v, c)| (v, T::ratio(c, n))))
    }

    pub fn bins(&self) -> &[(T, T)] {
        &self.bins
    }

    pub fn total_mass(&self) -> T {
        self.total_mass
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }

    pub fn is_normalized(&self) -> bool {
        let diff = self.total_mass - T::one();
        self.bins.iter().all(|b| b.1 >= T::zero()) && diff.abs() <= T::mass_tolerance()
    }

    /// Rescales masses to sum to one. An all-zero histogram is returned
    /// unchanged.
    pub fn normalized(&self) -> Self {
        if self.total_mass == T::zero() {
            return self.clone();
        }
        Histogram::from_weighted(self.bins.iter().map(|&(v, m)| (v, m / self.total_mass)))
    }

    pub fn mass_at(&self, value: T) -> T {
        self.bins
            .iter()
            .find(|b| b.0 == value)
            .map_or(T::zero(), |b| b.1)
    }
}

/// Finite distribution over arbitrary ordered categories.
#[derive(Debug, Clone, PartialEq)]
pub struct Categorical<K, T> {
    masses: BTreeMap<K, T>,
}

impl<K: Ord + Clone, T: Scalar> Categorical<K, T> {
    pub fn from_counts(counts: &BTreeMap<K, usize>) -> Self {
        let total: usize = counts.values().sum();
        let masses = counts
            .iter()
            .filter(|(_, &c)| c > 0)
            .map(|(k, &c)| (k.clone(), T::ratio(c, total)))
            .collect();
        Categorical { masses }
    }

    pub fn from_masses(masses: BTreeMap<K, T>) -> Self {
        Categorical { masses }
    }

    pub fn masses(&self) -> &BTreeMap<K, T> {
        &self.masses
    }

    pub fn mass(&self, key: &K) -> T {
        self.masses.get(key).copied().unwrap_or_else(T::zero)
    }

    pub fn total_mass(&self) -> T {
        self.masses.values().fold(T::zero(), |acc, &m| acc + m)
    }

    pub fn is_normalized(&self) -> bool {
        let diff = self.total_mass() - T::one();
        self.masses.values().all(|&m| m >= T::zero()) && diff.abs() <= T::mass_tolerance()
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }
}

/// Pairs of masses of two distributions over their union support.
pub trait Discrete<T> {
    fn is_normalized(&self) -> bool;
    fn paired_masses(&self, other: &Self) -> Vec<(T, T)>;
}

impl<T: Scalar> Discrete<T> for Histogram<T> {
    fn is_normalized(&self) -> bool {
        Histogram::is_normalized(self)
    }

    fn paired_masses(&self, other: &Self) -> Vec<(T, T)> {
        let (a, b) = (&self.bins, &other.bins);
        let (mut i, mut j) = (0, 0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        while i < a.len() || j < b.len() {
            let order = match (a.get(i), b.get(j)) {
                (Some(x), Some(y)) => cmp(&x.0, &y.0),
                (Some(_), None) => Ordering::Less,
                _ => Ordering::Greater,
            };
            match order {
                Ordering::Less => {
                    out.push((a[i].1, T::zero()));
                    i += 1;
                }
                Ordering::Greater => {
                    out.push((T::zero(), b[j].1));
                    j += 1;
                }
                Ordering::Equal => {
                    out.push((a[i].1, b[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out
    }
}

impl<K: Ord + Clone, T: Scalar> Discrete<T> for Categorical<K, T> {
    fn is_normalized(&self) -> bool {
        Categorical::is_normalized(self)
    }

    fn paired_masses(&self, other: &Self) -> Vec<(T, T)> {
        let keys: std::collections::BTreeSet<&K> =
            self.masses.keys().chain(other.masses.keys()).collect();
        keys.into_iter()
            .map(|k| (self.mass(k), other.mass(k)))
            .collect()
    }
}
