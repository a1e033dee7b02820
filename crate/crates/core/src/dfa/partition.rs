use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PartitionError {
    #[error("string `{0}` is not in the carrier")]
    NotInCarrier(String),
}

/// Union-find over a finite set of strings.
#[derive(Clone, Debug)]
pub struct StringPartition {
    carrier: Vec<String>,
    index: HashMap<String, usize>,
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl StringPartition {
    /// All singletons over `carrier` (duplicates collapse).
    pub fn discrete<I, S>(carrier: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut strings: Vec<String> = carrier.into_iter().map(Into::into).collect();
        strings.sort_by(|a, b| a.chars().count().cmp(&b.chars().count()).then_with(|| a.cmp(b)));
        strings.dedup();
        let index = strings.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        let n = strings.len();
        StringPartition { carrier: strings, index, parent: (0..n).collect(), rank: vec![0; n] }
    }

    pub fn carrier(&self) -> &[String] {
        &self.carrier
    }

    pub fn len(&self) -> usize {
        self.carrier.len()
    }

    pub fn is_empty(&self) -> bool {
        self.carrier.is_empty()
    }

    pub fn contains(&self, w: &str) -> bool {
        self.index.contains_key(w)
    }

    pub fn index_of(&self, w: &str) -> Option<usize> {
        self.index.get(w).copied()
    }

    fn root(&self, mut i: usize) -> usize {
        while self.parent[i] != i {
            i = self.parent[i];
        }
        i
    }

    /// Representative index of the class of `w`.
    pub fn find(&self, w: &str) -> Option<usize> {
        self.index_of(w).map(|i| self.root(i))
    }

    pub fn find_index(&self, i: usize) -> usize {
        self.root(i)
    }

    pub fn same(&self, u: &str, w: &str) -> Result<bool, PartitionError> {
        let a = self.find(u).ok_or_else(|| PartitionError::NotInCarrier(u.to_string()))?;
        let b = self.find(w).ok_or_else(|| PartitionError::NotInCarrier(w.to_string()))?;
        Ok(a == b)
    }

    /// Merges the classes of `u` and `w`; returns whether they were distinct.
    pub fn union(&mut self, u: &str, w: &str) -> Result<bool, PartitionError> {
        let a = self.index_of(u).ok_or_else(|| PartitionError::NotInCarrier(u.to_string()))?;
        let b = self.index_of(w).ok_or_else(|| PartitionError::NotInCarrier(w.to_string()))?;
        Ok(self.union_index(a, b))
    }

    pub fn union_index(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.root(a), self.root(b));
        if ra == rb {
            return false;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
        true
    }

    /// The classes, each in shortlex order, ordered by their first member.
    pub fn classes(&self) -> Vec<Vec<String>> {
        let mut groups: BTreeMap<usize, Vec<String>> = BTreeMap::new();
        let mut first: BTreeMap<usize, usize> = BTreeMap::new();
        for (i, s) in self.carrier.iter().enumerate() {
            let r = self.root(i);
            first.entry(r).or_insert(i);
            groups.entry(r).or_default().push(s.clone());
        }
        let mut out: Vec<(usize, Vec<String>)> = groups.into_iter().map(|(r, g)| (first[&r], g)).collect();
        out.sort_by_key(|(f, _)| *f);
        out.into_iter().map(|(_, g)| g).collect()
    }

    pub fn num_classes(&self) -> usize {
        (0..self.len()).filter(|&i| self.parent[i] == i).count()
    }
}

impl PartialEq for StringPartition {
    fn eq(&self, other: &Self) -> bool {
        self.carrier == other.carrier && self.classes() == other.classes()
    }
}

impl Eq for StringPartition {}
