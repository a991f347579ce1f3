use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// One of the five readiness categories.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Category {
    /// Environment specification.
    E,
    /// Data accessibility.
    A,
    /// Documentation.
    D,
    /// Code portability.
    C,
    /// Reproducibility signals.
    S,
}

impl Category {
    /// All categories in canonical order.
    pub const ALL: [Category; 5] = [Category::E, Category::A, Category::D, Category::C, Category::S];

    pub fn symbol(self) -> &'static str {
        match self {
            Category::E => "E",
            Category::A => "A",
            Category::D => "D",
            Category::C => "C",
            Category::S => "S",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Category::E => "Environment specification",
            Category::A => "Data accessibility",
            Category::D => "Documentation",
            Category::C => "Code portability",
            Category::S => "Reproducibility signals",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown category `{0}` (expected one of E, A, D, C, S)")]
pub struct UnknownCategory(pub String);

impl FromStr for Category {
    type Err = UnknownCategory;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "E" => Ok(Category::E),
            "A" => Ok(Category::A),
            "D" => Ok(Category::D),
            "C" => Ok(Category::C),
            "S" => Ok(Category::S),
            other => Err(UnknownCategory(other.to_string())),
        }
    }
}

/// A fixed-size map keyed by [`Category`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PerCategory<V>(pub [V; 5]);

impl<V> PerCategory<V> {
    pub fn from_fn(mut f: impl FnMut(Category) -> V) -> Self {
        PerCategory(Category::ALL.map(&mut f))
    }

    pub fn get(&self, c: Category) -> &V {
        &self.0[c.index()]
    }

    pub fn get_mut(&mut self, c: Category) -> &mut V {
        &mut self.0[c.index()]
    }

    pub fn iter(&self) -> impl Iterator<Item = (Category, &V)> {
        Category::ALL.into_iter().zip(self.0.iter())
    }

    pub fn map<W>(&self, mut f: impl FnMut(Category, &V) -> W) -> PerCategory<W> {
        PerCategory::from_fn(|c| f(c, self.get(c)))
    }
}

impl<V> std::ops::Index<Category> for PerCategory<V> {
    type Output = V;
    fn index(&self, c: Category) -> &V {
        self.get(c)
    }
}

impl<V> std::ops::IndexMut<Category> for PerCategory<V> {
    fn index_mut(&mut self, c: Category) -> &mut V {
        self.get_mut(c)
    }
}

/// Serialized as a map keyed by category symbol.
impl<V: Serialize> Serialize for PerCategory<V> {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut map = serializer.serialize_map(Some(5))?;
        for (c, v) in self.iter() {
            map.serialize_entry(c.symbol(), v)?;
        }
        map.end()
    }
}
