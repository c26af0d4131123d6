//! Many-sorted relational signatures.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SortId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RelId(pub usize);

/// Ordered product of sorts; the type of a tuple of variables or elements.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct TupleType(pub Vec<SortId>);

impl TupleType {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn sorts(&self) -> &[SortId] {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RelationSymbol {
    pub name: String,
    pub ty: TupleType,
}

/// Sorts plus typed relation symbols. Names are unique across sorts and
/// relations so that the text formats can refer to either unambiguously.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Signature {
    sorts: Vec<String>,
    relations: Vec<RelationSymbol>,
}

impl Signature {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_sort(&mut self, name: impl Into<String>) -> Result<SortId> {
        let name = name.into();
        self.check_fresh(&name)?;
        self.sorts.push(name);
        Ok(SortId(self.sorts.len() - 1))
    }

    pub fn add_relation(&mut self, name: impl Into<String>, ty: Vec<SortId>) -> Result<RelId> {
        let name = name.into();
        self.check_fresh(&name)?;
        if let Some(bad) = ty.iter().find(|s| s.0 >= self.sorts.len()) {
            return Err(Error::SortOutOfRange(bad.0));
        }
        self.relations.push(RelationSymbol {
            name,
            ty: TupleType(ty),
        });
        Ok(RelId(self.relations.len() - 1))
    }

    fn check_fresh(&self, name: &str) -> Result<()> {
        if self.sort_id(name).is_some() || self.relation_id(name).is_some() {
            return Err(Error::DuplicateName(name.to_string()));
        }
        Ok(())
    }

    pub fn has_name(&self, name: &str) -> bool {
        self.sort_id(name).is_some() || self.relation_id(name).is_some()
    }

    pub fn sort_id(&self, name: &str) -> Option<SortId> {
        self.sorts.iter().position(|s| s == name).map(SortId)
    }

    pub fn relation_id(&self, name: &str) -> Option<RelId> {
        self.relations.iter().position(|r| r.name == name).map(RelId)
    }

    pub fn sort_name(&self, id: SortId) -> &str {
        &self.sorts[id.0]
    }

    pub fn relation(&self, id: RelId) -> &RelationSymbol {
        &self.relations[id.0]
    }

    pub fn num_sorts(&self) -> usize {
        self.sorts.len()
    }

    pub fn num_relations(&self) -> usize {
        self.relations.len()
    }

    pub fn sort_ids(&self) -> impl Iterator<Item = SortId> {
        (0..self.sorts.len()).map(SortId)
    }

    pub fn relation_ids(&self) -> impl Iterator<Item = RelId> {
        (0..self.relations.len()).map(RelId)
    }

    /// Renders a tuple type as `X*Y`.
    pub fn type_string(&self, ty: &TupleType) -> String {
        ty.0.iter()
            .map(|s| self.sort_name(*s))
            .collect::<Vec<_>>()
            .join("*")
    }

    /// True when `self` is `other` followed by zero or more extra sorts and
    /// relations, so that ids valid in `other` are valid here.
    pub fn extends(&self, other: &Signature) -> bool {
        self.sorts.len() >= other.sorts.len()
            && self.relations.len() >= other.relations.len()
            && self.sorts[..other.sorts.len()] == other.sorts[..]
            && self.relations[..other.relations.len()] == other.relations[..]
    }

    /// Prefix of this signature with the first `relations` relation symbols.
    pub fn truncated(&self, relations: usize) -> Signature {
        Signature {
            sorts: self.sorts.clone(),
            relations: self.relations[..relations].to_vec(),
        }
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "language {{")?;
        for s in &self.sorts {
            write!(f, " sort {s};")?;
        }
        for r in &self.relations {
            write!(f, " rel {} : {};", r.name, self.type_string(&r.ty))?;
        }
        write!(f, " }}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_duplicate_and_out_of_range() {
        let mut sig = Signature::new();
        let x = sig.add_sort("X").unwrap();
        sig.add_relation("E", vec![x, x]).unwrap();
        assert_eq!(
            sig.add_relation("E", vec![x]),
            Err(Error::DuplicateName("E".into()))
        );
        assert_eq!(
            sig.add_sort("E"),
            Err(Error::DuplicateName("E".into()))
        );
        assert_eq!(
            sig.add_relation("F", vec![SortId(3)]),
            Err(Error::SortOutOfRange(3))
        );
    }

    #[test]
    fn display_lists_types() {
        let mut sig = Signature::new();
        let x = sig.add_sort("X").unwrap();
        let y = sig.add_sort("Y").unwrap();
        sig.add_relation("R", vec![x, y]).unwrap();
        assert_eq!(sig.to_string(), "language { sort X; sort Y; rel R : X*Y; }");
    }
}
