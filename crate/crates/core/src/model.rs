use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// A set of predictor indices, kept strictly increasing.
///
/// Models order first by size and then lexicographically, which is the
/// tie-break used in every ranked report.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Model(Vec<usize>);

impl Model {
    /// Builds a model from arbitrary indices; sorts and rejects duplicates.
    pub fn new(mut indices: Vec<usize>) -> Result<Self> {
        indices.sort_unstable();
        if indices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidInput(format!(
                "duplicate predictor in model {indices:?}"
            )));
        }
        Ok(Model(indices))
    }

    /// Same as [`Model::new`] plus an upper bound check against `p`.
    pub fn with_bound(indices: Vec<usize>, p: usize) -> Result<Self> {
        let m = Self::new(indices)?;
        if let Some(&j) = m.0.last() {
            if j >= p {
                return Err(Error::InvalidInput(format!(
                    "predictor index {j} out of range for p = {p}"
                )));
            }
        }
        Ok(m)
    }

    pub fn empty() -> Self {
        Model(Vec::new())
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn size(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, j: usize) -> bool {
        self.0.binary_search(&j).is_ok()
    }

    /// `(self \ {removed}) ∪ {added}`.
    pub fn swap(&self, removed: usize, added: usize) -> Model {
        debug_assert!(self.contains(removed) && !self.contains(added));
        let mut v: Vec<usize> = self.0.iter().copied().filter(|&j| j != removed).collect();
        let pos = v.binary_search(&added).unwrap_err();
        v.insert(pos, added);
        Model(v)
    }

    pub fn is_subset_of(&self, other: &Model) -> bool {
        self.0.iter().all(|&j| other.contains(j))
    }

    /// Parses the `3;7;12` form used in pool files.
    pub fn parse_list(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Ok(Model::empty());
        }
        let idx = s
            .split(';')
            .map(|t| {
                t.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::InvalidInput(format!("bad model index {t:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Model::new(idx)
    }
}

impl Ord for Model {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Model {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, j) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str(";")?;
            }
            write!(f, "{j}")?;
        }
        Ok(())
    }
}

impl FromStr for Model {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Model::parse_list(s)
    }
}

impl TryFrom<Vec<usize>> for Model {
    type Error = Error;
    fn try_from(v: Vec<usize>) -> Result<Self> {
        Model::new(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sorted_and_deduplicated() {
        let m = Model::new(vec![7, 3, 5]).unwrap();
        assert_eq!(m.indices(), &[3, 5, 7]);
        assert!(Model::new(vec![1, 1]).is_err());
        assert!(Model::with_bound(vec![0, 4], 4).is_err());
    }

    #[test]
    fn swap_keeps_order() {
        let m = Model::new(vec![1, 4, 9]).unwrap();
        assert_eq!(m.swap(4, 10).indices(), &[1, 9, 10]);
        assert_eq!(m.swap(9, 0).indices(), &[0, 1, 4]);
    }

    #[test]
    fn text_form_round_trips() {
        let m = Model::new(vec![12, 3, 7]).unwrap();
        assert_eq!(m.to_string(), "3;7;12");
        assert_eq!("3;7;12".parse::<Model>().unwrap(), m);
        assert_eq!("".parse::<Model>().unwrap(), Model::empty());
    }

    #[test]
    fn size_then_lexicographic() {
        let a = Model::new(vec![5]).unwrap();
        let b = Model::new(vec![0, 1]).unwrap();
        let c = Model::new(vec![0, 2]).unwrap();
        assert!(a < b && b < c);
    }
}
