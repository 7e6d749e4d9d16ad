use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A finite union of levels of one column, as sorted level indices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "LevelSetRepr", try_from = "LevelSetRepr")]
pub struct LevelSet {
    stage: usize,
    indices: Vec<u64>,
}

/// Wire form: `(start, length)` runs.
#[derive(Serialize, Deserialize)]
struct LevelSetRepr {
    stage: usize,
    runs: Vec<(u64, u64)>,
}

impl From<LevelSet> for LevelSetRepr {
    fn from(s: LevelSet) -> Self {
        let mut runs: Vec<(u64, u64)> = Vec::new();
        for &i in &s.indices {
            match runs.last_mut() {
                Some((start, len)) if *start + *len == i => *len += 1,
                _ => runs.push((i, 1)),
            }
        }
        LevelSetRepr { stage: s.stage, runs }
    }
}

impl TryFrom<LevelSetRepr> for LevelSet {
    type Error = Error;
    fn try_from(r: LevelSetRepr) -> Result<Self> {
        let mut indices = Vec::new();
        for (start, len) in r.runs {
            if let Some(&last) = indices.last() {
                if start <= last {
                    return Err(Error::InvalidInput("level-set runs must be increasing and disjoint".into()));
                }
            }
            indices.extend(start..start + len);
        }
        Ok(LevelSet {
            stage: r.stage,
            indices,
        })
    }
}

impl LevelSet {
    pub fn new(stage: usize, mut indices: Vec<u64>) -> Self {
        indices.sort_unstable();
        indices.dedup();
        LevelSet { stage, indices }
    }

    pub fn single(stage: usize, level: u64) -> Self {
        LevelSet {
            stage,
            indices: vec![level],
        }
    }

    pub fn range(stage: usize, levels: std::ops::Range<u64>) -> Self {
        LevelSet {
            stage,
            indices: levels.collect(),
        }
    }

    pub fn empty(stage: usize) -> Self {
        LevelSet {
            stage,
            indices: Vec::new(),
        }
    }

    pub(crate) fn from_sorted(stage: usize, indices: Vec<u64>) -> Self {
        debug_assert!(indices.windows(2).all(|w| w[0] < w[1]));
        LevelSet { stage, indices }
    }

    pub fn stage(&self) -> usize {
        self.stage
    }

    pub fn indices(&self) -> &[u64] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, level: u64) -> bool {
        self.indices.binary_search(&level).is_ok()
    }

    fn same_stage(&self, other: &LevelSet) -> Result<()> {
        if self.stage != other.stage {
            return Err(Error::StageMismatch(self.stage, other.stage));
        }
        Ok(())
    }

    pub fn intersection(&self, other: &LevelSet) -> Result<LevelSet> {
        self.same_stage(other)?;
        let (a, b) = (&self.indices, &other.indices);
        let (mut i, mut j) = (0, 0);
        let mut out = Vec::new();
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    out.push(a[i]);
                    i += 1;
                    j += 1;
                }
            }
        }
        Ok(LevelSet::from_sorted(self.stage, out))
    }

    pub fn union(&self, other: &LevelSet) -> Result<LevelSet> {
        self.same_stage(other)?;
        let mut v: Vec<u64> = self.indices.iter().chain(&other.indices).copied().collect();
        v.sort_unstable();
        v.dedup();
        Ok(LevelSet::from_sorted(self.stage, v))
    }

    pub fn difference(&self, other: &LevelSet) -> Result<LevelSet> {
        self.same_stage(other)?;
        let v = self
            .indices
            .iter()
            .copied()
            .filter(|i| !other.contains(*i))
            .collect();
        Ok(LevelSet::from_sorted(self.stage, v))
    }

    /// Complement inside a column of the given height.
    pub fn complement(&self, height: u64) -> LevelSet {
        let v = (0..height).filter(|i| !self.contains(*i)).collect();
        LevelSet::from_sorted(self.stage, v)
    }

    /// Number of `l` in the set with `l + p` also in the set.
    pub fn overlap_count(&self, p: i64) -> usize {
        let v = &self.indices;
        let mut j = 0;
        let mut count = 0;
        for &l in v {
            let target = l as i128 + p as i128;
            if target < 0 {
                continue;
            }
            while j < v.len() && (v[j] as i128) < target {
                j += 1;
            }
            if j < v.len() && v[j] as i128 == target {
                count += 1;
            }
        }
        count
    }
}
