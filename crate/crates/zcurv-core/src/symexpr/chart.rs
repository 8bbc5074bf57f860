//! Coordinate charts: the atom table every expression refers into.
//!
//! Atoms are interned once, in declaration order, and `AtomId` doubles as the
//! rank used by the fixed term order. Charts are append-only and immutable in
//! use, so expressions can be shared freely across threads.

use std::collections::HashMap;
use std::fmt;
use thiserror::Error;

/// Index of an atom within its chart; declaration order defines the total
/// order used everywhere (term order, basis order, printing).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AtomId(pub u32);

impl AtomId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Sorted multi-index over base axes (0-based), e.g. `[0, 1]` for ∂x∂y.
pub type MultiIndex = Vec<u8>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AtomKind {
    /// Independent base coordinate (x, y, t, ...); `axis` is its position.
    Base { axis: usize },
    /// The value of a dependent function (fiber or pseudopotential).
    Value { owner: usize },
    /// Formal jet coordinate λ of a fiber, before restriction to a section.
    Jet { owner: usize, index: MultiIndex },
    /// Derivative of a dependent function on a section (u_x, v_xy, ...).
    Deriv { owner: usize, index: MultiIndex },
    /// Free auxiliary symbol.
    Aux,
}

#[derive(Debug, Clone)]
pub struct AtomInfo {
    pub name: String,
    pub kind: AtomKind,
}

#[derive(Debug, Clone, Default)]
pub struct Chart {
    atoms: Vec<AtomInfo>,
    by_name: HashMap<String, AtomId>,
}

#[derive(Debug, Error, PartialEq)]
pub enum ChartError {
    #[error("atom name `{0}` already declared")]
    Duplicate(String),
    #[error("unknown atom `{0}`")]
    Unknown(String),
}

impl Chart {
    pub fn new() -> Self {
        Chart::default()
    }

    pub fn declare(&mut self, name: &str, kind: AtomKind) -> Result<AtomId, ChartError> {
        if self.by_name.contains_key(name) {
            return Err(ChartError::Duplicate(name.to_string()));
        }
        let id = AtomId(self.atoms.len() as u32);
        self.atoms.push(AtomInfo { name: name.to_string(), kind });
        self.by_name.insert(name.to_string(), id);
        Ok(id)
    }

    pub fn lookup(&self, name: &str) -> Option<AtomId> {
        self.by_name.get(name).copied()
    }

    pub fn resolve(&self, name: &str) -> Result<AtomId, ChartError> {
        self.lookup(name).ok_or_else(|| ChartError::Unknown(name.to_string()))
    }

    pub fn info(&self, id: AtomId) -> &AtomInfo {
        &self.atoms[id.index()]
    }

    pub fn name(&self, id: AtomId) -> &str {
        &self.atoms[id.index()].name
    }

    pub fn contains(&self, id: AtomId) -> bool {
        id.index() < self.atoms.len()
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = AtomId> + '_ {
        (0..self.atoms.len() as u32).map(AtomId)
    }
}

impl fmt::Display for Chart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self.atoms.iter().map(|a| a.name.as_str()).collect();
        write!(f, "({})", names.join(", "))
    }
}

/// Colex order on sorted multi-indices: compare reversed sequences
/// lexicographically. This ranks mixed derivatives above same-order pure
/// ones once the last axis is involved (u_xy above u_xx, u_xt above u_xxx),
/// which is what puts evolution terms first in printed residuals.
pub fn colex(a: &MultiIndex, b: &MultiIndex) -> std::cmp::Ordering {
    let mut ia = a.iter().rev();
    let mut ib = b.iter().rev();
    loop {
        match (ia.next(), ib.next()) {
            (None, None) => return std::cmp::Ordering::Equal,
            (None, Some(_)) => return std::cmp::Ordering::Less,
            (Some(_), None) => return std::cmp::Ordering::Greater,
            (Some(x), Some(y)) => match x.cmp(y) {
                std::cmp::Ordering::Equal => continue,
                other => return other,
            },
        }
    }
}

/// All sorted multi-indices over `n_axes` axes with orders `1..=max_order`,
/// in colex order.
pub fn enumerate_indices(n_axes: usize, max_order: usize) -> Vec<MultiIndex> {
    let mut all: Vec<MultiIndex> = Vec::new();
    let mut frontier: Vec<MultiIndex> = vec![Vec::new()];
    for _ in 0..max_order {
        let mut next = Vec::new();
        for idx in &frontier {
            let lo = idx.last().copied().unwrap_or(0);
            for axis in lo..n_axes as u8 {
                let mut extended = idx.clone();
                extended.push(axis);
                next.push(extended);
            }
        }
        all.extend(next.iter().cloned());
        frontier = next;
    }
    all.sort_by(|a, b| colex(a, b));
    all
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn declaration_order_is_rank() {
        let mut c = Chart::new();
        let x = c.declare("x", AtomKind::Base { axis: 0 }).unwrap();
        let y = c.declare("y", AtomKind::Base { axis: 1 }).unwrap();
        assert!(x < y);
        assert_eq!(c.name(x), "x");
        assert_eq!(c.lookup("y"), Some(y));
        assert!(c.declare("x", AtomKind::Aux).is_err());
    }

    #[test]
    fn colex_ranks_mixed_derivatives_last() {
        // (1) < (1,1) < (1,1,1) < (2) < (1,2) < (2,2) in 1-based notation
        let order = enumerate_indices(2, 3);
        let expect: Vec<MultiIndex> = vec![
            vec![0],
            vec![0, 0],
            vec![0, 0, 0],
            vec![1],
            vec![0, 1],
            vec![0, 0, 1],
            vec![1, 1],
            vec![0, 1, 1],
            vec![1, 1, 1],
        ];
        assert_eq!(order, expect);
        // u_xt outranks u_xxx
        assert_eq!(colex(&vec![0, 1], &vec![0, 0, 0]), std::cmp::Ordering::Greater);
    }
}
