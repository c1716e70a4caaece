use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A strictly increasing set of column indices.
///
/// Stored 0-based; displayed, parsed and serialized 1-based (`{3,5,10}`).
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Support(Vec<usize>);

impl Support {
    pub fn empty() -> Self {
        Support(Vec::new())
    }

    /// From 0-based indices, which must be strictly increasing.
    pub fn new(indices: Vec<usize>) -> Result<Self> {
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid(format!(
                "support indices must be strictly increasing: {indices:?}"
            )));
        }
        Ok(Support(indices))
    }

    /// From 1-based indices in any order; duplicates and zero are rejected.
    pub fn from_one_based(indices: &[usize]) -> Result<Self> {
        if indices.contains(&0) {
            return Err(Error::invalid("support indices are 1-based; 0 is not allowed"));
        }
        let mut v: Vec<usize> = indices.iter().map(|i| i - 1).collect();
        v.sort_unstable();
        let len = v.len();
        v.dedup();
        if v.len() != len {
            return Err(Error::invalid("support has repeated indices"));
        }
        Ok(Support(v))
    }

    pub(crate) fn from_sorted_unchecked(indices: Vec<usize>) -> Self {
        debug_assert!(indices.windows(2).all(|w| w[0] < w[1]));
        Support(indices)
    }

    /// 0-based indices.
    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.0.iter().map(|i| i + 1).collect()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.binary_search(&i).is_ok()
    }

    pub fn is_subset_of(&self, other: &Support) -> bool {
        self.0.iter().all(|&i| other.contains(i))
    }

    /// Largest index plus one, or 0 for the empty support.
    pub fn bound(&self) -> usize {
        self.0.last().map_or(0, |i| i + 1)
    }

    pub(crate) fn check_within(&self, n: usize) -> Result<()> {
        if self.bound() > n {
            return Err(Error::invalid(format!(
                "support {self} exceeds the {n} available columns"
            )));
        }
        Ok(())
    }
}

impl fmt::Display for Support {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, i) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", i + 1)?;
        }
        write!(f, "}}")
    }
}

impl fmt::Debug for Support {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Parses `3,5,10`, `{3,5,10}`, `3 5 10`, or an empty list (`{}` / `""`).
impl FromStr for Support {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let inner = s.trim().trim_start_matches('{').trim_end_matches('}');
        let idx = inner
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<usize>()
                    .map_err(|_| Error::invalid(format!("bad support index {t:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Support::from_one_based(&idx)
    }
}

impl Serialize for Support {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.one_based().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Support {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<usize>::deserialize(d)?;
        Support::from_one_based(&v).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_display() {
        let s: Support = "{10,3,5}".parse().unwrap();
        assert_eq!(s.indices(), &[2, 4, 9]);
        assert_eq!(s.to_string(), "{3,5,10}");
        assert_eq!("".parse::<Support>().unwrap(), Support::empty());
        assert_eq!("{}".parse::<Support>().unwrap().to_string(), "{}");
        assert!("0,1".parse::<Support>().is_err());
        assert!("2,2".parse::<Support>().is_err());
        assert!(Support::new(vec![3, 1]).is_err());
    }

    #[test]
    fn serde_is_one_based() {
        let s: Support = "2,3".parse().unwrap();
        assert_eq!(serde_json::to_string(&s).unwrap(), "[2,3]");
        let back: Support = serde_json::from_str("[2,3]").unwrap();
        assert_eq!(back, s);
    }
}
