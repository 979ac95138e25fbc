//! Plain-text key/value documents used by scenario files, plan files and reports.
//!
//! One `key = value` pair per line. `#` starts a comment, blank lines are
//! ignored, list values are comma-separated. Keys are case-sensitive and may
//! appear only once.

use crate::{Error, Result};
use std::collections::BTreeMap;
use std::fmt::Display;
use std::str::FromStr;

#[derive(Debug, Clone, Default)]
pub struct KvDoc {
    entries: BTreeMap<String, (usize, String)>,
}

impl KvDoc {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| Error::Parse {
                line,
                msg: format!("expected `key = value`, got `{content}`"),
            })?;
            let key = key.trim();
            if key.is_empty() {
                return Err(Error::Parse {
                    line,
                    msg: "empty key".into(),
                });
            }
            if entries
                .insert(key.to_string(), (line, value.trim().to_string()))
                .is_some()
            {
                return Err(Error::Parse {
                    line,
                    msg: format!("duplicate key `{key}`"),
                });
            }
        }
        Ok(Self { entries })
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    /// Removes and parses `key` if present.
    pub fn take<T: FromStr>(&mut self, key: &str) -> Result<Option<T>>
    where
        T::Err: Display,
    {
        match self.entries.remove(key) {
            None => Ok(None),
            Some((line, v)) => v.parse::<T>().map(Some).map_err(|e| Error::Parse {
                line,
                msg: format!("bad value `{v}` for `{key}`: {e}"),
            }),
        }
    }

    pub fn require<T: FromStr>(&mut self, key: &str) -> Result<T>
    where
        T::Err: Display,
    {
        self.take(key)?
            .ok_or_else(|| Error::InvalidConfig(format!("missing mandatory key `{key}`")))
    }

    pub fn take_list<T: FromStr>(&mut self, key: &str) -> Result<Option<Vec<T>>>
    where
        T::Err: Display,
    {
        match self.entries.remove(key) {
            None => Ok(None),
            Some((line, v)) => {
                if v.is_empty() {
                    return Ok(Some(Vec::new()));
                }
                v.split(',')
                    .map(|item| {
                        let item = item.trim();
                        item.parse::<T>().map_err(|e| Error::Parse {
                            line,
                            msg: format!("bad list item `{item}` for `{key}`: {e}"),
                        })
                    })
                    .collect::<Result<Vec<T>>>()
                    .map(Some)
            }
        }
    }

    /// Fails on any key nobody consumed.
    pub fn finish(self) -> Result<()> {
        match self.entries.into_iter().next() {
            None => Ok(()),
            Some((key, (line, _))) => Err(Error::Parse {
                line,
                msg: format!("unknown key `{key}`"),
            }),
        }
    }
}

/// Accumulates `key = value` lines in insertion order.
#[derive(Debug, Default, Clone)]
pub struct KvWriter {
    out: String,
}

impl KvWriter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn comment(&mut self, text: &str) -> &mut Self {
        self.out.push_str("# ");
        self.out.push_str(text);
        self.out.push('\n');
        self
    }

    pub fn put(&mut self, key: &str, value: impl Display) -> &mut Self {
        self.out.push_str(&format!("{key} = {value}\n"));
        self
    }

    pub fn put_list<T: Display>(&mut self, key: &str, values: &[T]) -> &mut Self {
        let joined = values
            .iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join(", ");
        self.put(key, joined)
    }

    pub fn finish(self) -> String {
        self.out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_lists_and_rejects_leftovers() {
        let mut doc = KvDoc::parse("# header\nM = 8\n values = 0, 4,8 # trailing\n\nextra = 1\n")
            .unwrap();
        assert_eq!(doc.require::<usize>("M").unwrap(), 8);
        assert_eq!(
            doc.take_list::<f64>("values").unwrap().unwrap(),
            vec![0.0, 4.0, 8.0]
        );
        assert!(doc.take::<usize>("missing").unwrap().is_none());
        assert!(matches!(doc.finish(), Err(Error::Parse { line: 5, .. })));
    }

    #[test]
    fn duplicate_and_malformed_lines_are_errors() {
        assert!(KvDoc::parse("a = 1\na = 2").is_err());
        assert!(KvDoc::parse("just text").is_err());
        let mut doc = KvDoc::parse("n = x").unwrap();
        assert!(doc.require::<usize>("n").is_err());
    }
}
