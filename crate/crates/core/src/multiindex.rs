//! Multi-indices over a base dimension `n`.
//!
//! A multi-index is stored as its count vector `[I_1, ..., I_n]`, where
//! `I_r` is the number of times the base index `r` occurs. Base indices are
//! 1-based in the public API and in all documentation; internally, slot `r`
//! of the count vector is `counts[r - 1]`.
//!
//! The canonical sequence form of a multi-index is non-decreasing; two
//! sequences with equal count vectors denote the same multi-index. The
//! degree-0 (empty) multi-index is a first-class value.
//!
//! # Ordering contract
//!
//! [`enumerate_degree`] lists all multi-indices of a fixed degree in
//! ascending lexicographic order of their count vectors, and enumeration
//! across degrees is graded (degree 0 first). This order is deterministic,
//! stable across runs, and is the order used when arrays keyed by
//! multi-indices are serialized.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Factorial for small arguments; the degrees used here stay far below 20.
pub fn factorial_u64(k: u64) -> u64 {
    (2..=k).product::<u64>().max(1)
}

/// Binomial coefficient `C(n, k)` computed without intermediate overflow.
pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u64 = 1;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Dimension of the space of symmetric degree-`l` arrays over `n` variables:
/// `(n + l - 1)! / ((n - 1)! l!)`.
pub fn sym_dim(n: usize, l: usize) -> usize {
    binomial((n + l - 1) as u64, l as u64) as usize
}

/// A multi-index over base dimension `n`, stored as a count vector.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex {
    counts: Vec<u32>,
}

impl MultiIndex {
    /// Build from a count vector; `counts[r - 1]` is the multiplicity of the
    /// base index `r`.
    pub fn new(counts: Vec<u32>) -> Self {
        assert!(!counts.is_empty(), "base dimension must be at least 1");
        Self { counts }
    }

    /// The empty (degree-0) multi-index over `n`.
    pub fn empty(n: usize) -> Self {
        Self::new(vec![0; n])
    }

    /// Build from a sequence of 1-based base indices, in any order.
    pub fn from_sequence(n: usize, seq: &[usize]) -> Result<Self> {
        let mut counts = vec![0u32; n];
        for &j in seq {
            if j < 1 || j > n {
                return Err(Error::IndexOutOfRange { index: j, n });
            }
            counts[j - 1] += 1;
        }
        Ok(Self { counts })
    }

    pub fn n(&self) -> usize {
        self.counts.len()
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    /// Multiplicity of the 1-based base index `r`.
    pub fn count(&self, r: usize) -> u32 {
        self.counts[r - 1]
    }

    /// The length `|I|` of any sequence representative.
    pub fn degree(&self) -> usize {
        self.counts.iter().map(|&c| c as usize).sum()
    }

    /// `I! = I_1! ... I_n!`.
    pub fn factorial(&self) -> u64 {
        self.counts.iter().map(|&c| factorial_u64(c as u64)).product()
    }

    /// `|I|!/I!`, the number of distinct sequence arrangements.
    pub fn multiplicity(&self) -> u64 {
        factorial_u64(self.degree() as u64) / self.factorial()
    }

    /// Number of distinct base indices occurring at least once.
    pub fn distinct_count(&self) -> usize {
        self.counts.iter().filter(|&&c| c > 0).count()
    }

    /// Iterator over the distinct 1-based base indices present.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(i, _)| i + 1)
    }

    pub fn contains(&self, j: usize) -> bool {
        j >= 1 && j <= self.n() && self.counts[j - 1] > 0
    }

    /// Append one occurrence of the 1-based base index `j`.
    pub fn append(&self, j: usize) -> Result<Self> {
        if j < 1 || j > self.n() {
            return Err(Error::IndexOutOfRange { index: j, n: self.n() });
        }
        let mut counts = self.counts.clone();
        counts[j - 1] += 1;
        Ok(Self { counts })
    }

    /// Remove one occurrence of the 1-based base index `j`.
    pub fn remove(&self, j: usize) -> Result<Self> {
        if j < 1 || j > self.n() {
            return Err(Error::IndexOutOfRange { index: j, n: self.n() });
        }
        if self.counts[j - 1] == 0 {
            return Err(Error::RemoveAbsent { index: j });
        }
        let mut counts = self.counts.clone();
        counts[j - 1] -= 1;
        Ok(Self { counts })
    }

    /// Concatenation: counts add, degrees add.
    pub fn concat(&self, other: &Self) -> Result<Self> {
        if self.n() != other.n() {
            return Err(crate::error::mismatch(format!(
                "cannot concatenate multi-indices over n={} and n={}",
                self.n(),
                other.n()
            )));
        }
        let counts = self
            .counts
            .iter()
            .zip(&other.counts)
            .map(|(a, b)| a + b)
            .collect();
        Ok(Self { counts })
    }

    /// The canonical (non-decreasing) sequence of 1-based base indices.
    pub fn sequence(&self) -> Vec<usize> {
        let mut seq = Vec::with_capacity(self.degree());
        for (i, &c) in self.counts.iter().enumerate() {
            for _ in 0..c {
                seq.push(i + 1);
            }
        }
        seq
    }

    /// All distinct sequence arrangements of this multi-index
    /// (`multiplicity()` of them), in lexicographic order.
    pub fn arrangements(&self) -> Vec<Vec<usize>> {
        let mut out = Vec::with_capacity(self.multiplicity() as usize);
        let mut counts = self.counts.clone();
        let mut prefix = Vec::with_capacity(self.degree());
        fn rec(counts: &mut [u32], prefix: &mut Vec<usize>, left: usize, out: &mut Vec<Vec<usize>>) {
            if left == 0 {
                out.push(prefix.clone());
                return;
            }
            for r in 0..counts.len() {
                if counts[r] > 0 {
                    counts[r] -= 1;
                    prefix.push(r + 1);
                    rec(counts, prefix, left - 1, out);
                    prefix.pop();
                    counts[r] += 1;
                }
            }
        }
        rec(&mut counts, &mut prefix, self.degree(), &mut out);
        out
    }
}

impl fmt::Display for MultiIndex {
    /// Canonical sequence form, e.g. `(1,1,3)`; `()` for degree 0.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, j) in self.sequence().iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{j}")?;
        }
        write!(f, ")")
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for MultiIndex {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.counts.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for MultiIndex {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let counts = Vec::<u32>::deserialize(deserializer)?;
        if counts.is_empty() {
            return Err(D::Error::custom("multi-index count vector must be non-empty"));
        }
        Ok(MultiIndex { counts })
    }
}

/// All multi-indices of degree `l` over base dimension `n`, in ascending
/// lexicographic order of count vectors. The list has `sym_dim(n, l)`
/// entries.
pub fn enumerate_degree(n: usize, l: usize) -> Vec<MultiIndex> {
    assert!(n >= 1);
    let mut out = Vec::with_capacity(sym_dim(n, l));
    let mut counts = vec![0u32; n];
    fn rec(slot: usize, left: u32, counts: &mut [u32], out: &mut Vec<MultiIndex>) {
        if slot + 1 == counts.len() {
            counts[slot] = left;
            out.push(MultiIndex::new(counts.to_vec()));
            counts[slot] = 0;
            return;
        }
        for c in 0..=left {
            counts[slot] = c;
            rec(slot + 1, left - c, counts, out);
        }
        counts[slot] = 0;
    }
    rec(0, l as u32, &mut counts, &mut out);
    out
}

/// Enumeration of one degree with offset lookup; shared and immutable.
pub struct DegreeLayout {
    n: usize,
    degree: usize,
    indices: Vec<MultiIndex>,
    offsets: HashMap<Vec<u32>, usize>,
}

impl DegreeLayout {
    fn build(n: usize, degree: usize) -> Self {
        let indices = enumerate_degree(n, degree);
        let offsets = indices
            .iter()
            .enumerate()
            .map(|(pos, idx)| (idx.counts().to_vec(), pos))
            .collect();
        Self { n, degree, indices, offsets }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    /// Position of `idx` in enumeration order.
    pub fn offset(&self, idx: &MultiIndex) -> usize {
        *self
            .offsets
            .get(idx.counts())
            .unwrap_or_else(|| panic!("multi-index {idx} is not of degree {} over n={}", self.degree, self.n))
    }
}

/// Cached layout for `(n, degree)`.
pub fn degree_layout(n: usize, degree: usize) -> Arc<DegreeLayout> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<DegreeLayout>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap();
    guard
        .entry((n, degree))
        .or_insert_with(|| Arc::new(DegreeLayout::build(n, degree)))
        .clone()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mi(counts: &[u32]) -> MultiIndex {
        MultiIndex::new(counts.to_vec())
    }

    #[test]
    fn degree_examples() {
        assert_eq!(mi(&[0, 0, 0]).degree(), 0);
        assert_eq!(mi(&[2, 1]).degree(), 3);
        assert_eq!(mi(&[1, 0, 1, 0]).degree(), 2);
    }

    #[test]
    fn factorial_examples() {
        assert_eq!(mi(&[2, 1]).factorial(), 2);
        assert_eq!(mi(&[0, 0]).factorial(), 1);
        assert_eq!(mi(&[3, 2]).factorial(), 12);
    }

    #[test]
    fn multiplicity_examples() {
        assert_eq!(mi(&[1, 1]).multiplicity(), 2);
        assert_eq!(mi(&[2, 0]).multiplicity(), 1);
        assert_eq!(mi(&[2, 1]).multiplicity(), 3);
    }

    #[test]
    fn distinct_count_examples() {
        assert_eq!(MultiIndex::from_sequence(3, &[1, 1, 3]).unwrap().distinct_count(), 2);
        assert_eq!(MultiIndex::from_sequence(2, &[2]).unwrap().distinct_count(), 1);
        assert_eq!(MultiIndex::from_sequence(3, &[1, 2, 3]).unwrap().distinct_count(), 3);
    }

    #[test]
    fn append_examples() {
        assert_eq!(mi(&[1, 0]).append(2).unwrap(), mi(&[1, 1]));
        assert_eq!(mi(&[0, 0]).append(1).unwrap(), mi(&[1, 0]));
        assert_eq!(mi(&[2, 1]).append(1).unwrap(), mi(&[3, 1]));
        assert!(matches!(
            mi(&[1, 0]).append(3),
            Err(Error::IndexOutOfRange { index: 3, n: 2 })
        ));
    }

    #[test]
    fn remove_examples() {
        assert_eq!(mi(&[1, 1]).remove(2).unwrap(), mi(&[1, 0]));
        assert_eq!(mi(&[2, 0]).remove(1).unwrap(), mi(&[1, 0]));
        assert!(matches!(mi(&[0, 1]).remove(1), Err(Error::RemoveAbsent { index: 1 })));
    }

    #[test]
    fn enumerate_counts() {
        assert_eq!(enumerate_degree(3, 2).len(), 6);
        assert_eq!(enumerate_degree(2, 3).len(), 4);
        assert_eq!(enumerate_degree(1, 5).len(), 1);
    }

    #[test]
    fn enumerate_matches_closed_form_small() {
        for n in 1..=5 {
            for l in 0..=5 {
                assert_eq!(enumerate_degree(n, l).len(), sym_dim(n, l), "n={n} l={l}");
            }
        }
    }

    #[test]
    fn multiplicities_partition_all_sequences() {
        for n in 1..=4 {
            for l in 0..=5 {
                let total: u64 = enumerate_degree(n, l).iter().map(|i| i.multiplicity()).sum();
                assert_eq!(total, (n as u64).pow(l as u32), "n={n} l={l}");
            }
        }
    }

    #[test]
    fn enumeration_order_is_pinned() {
        // Serialization contract: ascending lex on count vectors.
        let got: Vec<Vec<u32>> = enumerate_degree(3, 2)
            .iter()
            .map(|i| i.counts().to_vec())
            .collect();
        assert_eq!(
            got,
            vec![
                vec![0, 0, 2],
                vec![0, 1, 1],
                vec![0, 2, 0],
                vec![1, 0, 1],
                vec![1, 1, 0],
                vec![2, 0, 0],
            ]
        );
    }

    #[test]
    fn remove_append_roundtrip_and_removable_count() {
        for n in 1..=3 {
            for l in 0..=4 {
                for idx in enumerate_degree(n, l) {
                    for j in 1..=n {
                        let grown = idx.append(j).unwrap();
                        assert_eq!(grown.remove(j).unwrap(), idx);
                    }
                    let removable = (1..=n).filter(|&j| idx.remove(j).is_ok()).count();
                    assert_eq!(removable, idx.distinct_count());
                }
            }
        }
    }

    #[test]
    fn arrangements_count_and_distinctness() {
        let idx = MultiIndex::from_sequence(3, &[1, 1, 3]).unwrap();
        let arr = idx.arrangements();
        assert_eq!(arr.len() as u64, idx.multiplicity());
        assert_eq!(arr.len(), 3);
        for a in &arr {
            assert_eq!(MultiIndex::from_sequence(3, a).unwrap(), idx);
        }
    }

    #[test]
    fn serde_roundtrip_is_bare_count_vector() {
        let idx = mi(&[2, 0, 1]);
        let json = serde_json::to_string(&idx).unwrap();
        assert_eq!(json, "[2,0,1]");
        let back: MultiIndex = serde_json::from_str(&json).unwrap();
        assert_eq!(back, idx);
    }
}
