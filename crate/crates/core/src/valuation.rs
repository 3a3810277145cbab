use std::fmt;

use crate::formula::Atom;

/// Maximum number of atoms a task may declare.
pub const MAX_ATOMS: usize = 128;

/// Truth assignment over the task's atom universe, one bit per atom.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Valuation(u128);

impl Valuation {
    pub const EMPTY: Valuation = Valuation(0);

    pub fn from_bits(bits: u128) -> Self {
        Valuation(bits)
    }

    pub fn bits(self) -> u128 {
        self.0
    }

    #[inline]
    pub fn get(self, atom: Atom) -> bool {
        self.0 >> atom.index() & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, atom: Atom, value: bool) {
        let mask = 1u128 << atom.index();
        if value {
            self.0 |= mask;
        } else {
            self.0 &= !mask;
        }
    }

    pub fn with(mut self, atom: Atom, value: bool) -> Self {
        self.set(atom, value);
        self
    }

    /// Atoms set to true, in ascending index order.
    pub fn true_atoms(self) -> impl Iterator<Item = Atom> {
        (0..MAX_ATOMS)
            .filter(move |i| self.0 >> i & 1 == 1)
            .map(|i| Atom::new(i as u16))
    }
}

impl fmt::Debug for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Valuation({:#b})", self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_and_get() {
        let p = Atom::new(3);
        let q = Atom::new(127);
        let v = Valuation::EMPTY.with(p, true).with(q, true);
        assert!(v.get(p));
        assert!(v.get(q));
        assert!(!v.get(Atom::new(0)));
        assert_eq!(v.true_atoms().collect::<Vec<_>>(), vec![p, q]);
        assert!(!v.with(p, false).get(p));
    }
}
