//! Pregroup reduction: planar cancellation of adjacent adjoint pairs.

use alloc::vec;
use alloc::vec::Vec;

use super::PregroupType;

/// Result of [`pregroup_reduce`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Reduction {
    /// The irreducible remainder.
    pub remainder: PregroupType,
    /// Cancelled pairs as indices into the input, in application order. Each
    /// pair is adjacent once the pairs before it have been removed.
    pub cups: Vec<(usize, usize)>,
}

impl Reduction {
    /// Wire offset of every cup in the running type at the moment it is
    /// applied, for an input of `len` atoms.
    pub fn cup_offsets(&self, len: usize) -> Vec<usize> {
        let mut alive: Vec<usize> = (0..len).collect();
        self.cups
            .iter()
            .map(|&(i, j)| {
                let pos = alive
                    .iter()
                    .position(|&a| a == i)
                    .expect("cup index already consumed");
                debug_assert_eq!(alive.get(pos + 1), Some(&j));
                alive.drain(pos..pos + 2);
                pos
            })
            .collect()
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Block {
    No,
    /// `[i..=k]` and `[k+1..=j]` reduce independently.
    Split(usize),
    /// `i` cancels `j` around a reducible interior.
    Outer,
}

/// Reduces a pregroup type by cancelling adjacent `(x, x^r)` and `(x^l, x)`
/// pairs.
///
/// The search covers every planar cancellation pattern, so it finds a minimal
/// remainder even where greedy left-to-right cancellation gets stuck (e.g. a
/// post-nominal preposition `n^r·n·n^l` after a transitive verb). Ties prefer
/// the leftmost cancellation, which makes the output deterministic.
pub fn pregroup_reduce(ty: &PregroupType) -> Reduction {
    let atoms = ty.atoms();
    let n = atoms.len();
    // block[i][j]: how the interval i..=j reduces to the unit, if it does
    let mut block = vec![vec![Block::No; n]; n];
    for len in (2..=n).step_by(2) {
        for i in 0..=n - len {
            let j = i + len - 1;
            let mut choice = Block::No;
            let mut k = i + 1;
            while k < j {
                if block[i][k] != Block::No && block[k + 1][j] != Block::No {
                    choice = Block::Split(k);
                    break;
                }
                k += 2;
            }
            if choice == Block::No
                && atoms[i].cancels(atoms[j])
                && (len == 2 || block[i + 1][j - 1] != Block::No)
            {
                choice = Block::Outer;
            }
            block[i][j] = choice;
        }
    }

    // cover[i]: most atoms of the suffix i.. that can be cancelled, and the
    // end of the block taken at i (if any)
    let mut cover = vec![(0usize, None::<usize>); n + 1];
    for i in (0..n).rev() {
        let mut best = (cover[i + 1].0, None);
        let mut j = i + 1;
        while j < n {
            if block[i][j] != Block::No {
                let covered = j - i + 1 + cover[j + 1].0;
                if covered > best.0 || (covered == best.0 && best.1.is_none()) {
                    best = (covered, Some(j));
                }
            }
            j += 2;
        }
        cover[i] = best;
    }

    let mut cups = Vec::new();
    let mut remainder = Vec::new();
    let mut i = 0;
    while i < n {
        match cover[i].1 {
            Some(j) => {
                emit(&block, i, j, &mut cups);
                i = j + 1;
            }
            None => {
                remainder.push(atoms[i]);
                i += 1;
            }
        }
    }
    Reduction {
        remainder: PregroupType::new(remainder),
        cups,
    }
}

fn emit(block: &[Vec<Block>], i: usize, j: usize, cups: &mut Vec<(usize, usize)>) {
    match block[i][j] {
        Block::Split(k) => {
            emit(block, i, k, cups);
            emit(block, k + 1, j, cups);
        }
        Block::Outer => {
            if j > i + 1 {
                emit(block, i + 1, j - 1, cups);
            }
            cups.push((i, j));
        }
        Block::No => unreachable!("emit called on an irreducible interval"),
    }
}

/// Applies `cups` (original indices, application order) to `atoms`, checking
/// adjacency and adjointness at each step. Returns the remainder.
#[cfg(test)]
pub(crate) fn apply_cups(atoms: &[super::Atom], cups: &[(usize, usize)]) -> Option<Vec<super::Atom>> {
    let mut alive: Vec<usize> = (0..atoms.len()).collect();
    for &(i, j) in cups {
        let pos = alive.iter().position(|&a| a == i)?;
        if alive.get(pos + 1) != Some(&j) || !atoms[i].cancels(atoms[j]) {
            return None;
        }
        alive.drain(pos..pos + 2);
    }
    Some(alive.into_iter().map(|a| atoms[a]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::Atom;
    use alloc::collections::BTreeSet;
    use proptest::prelude::*;

    fn ty(atoms: &[Atom]) -> PregroupType {
        PregroupType::from(atoms)
    }

    /// Every irreducible remainder reachable by cancelling adjacent pairs in
    /// any order.
    fn all_remainders(atoms: Vec<Atom>, out: &mut BTreeSet<Vec<Atom>>) {
        let mut reducible = false;
        for i in 0..atoms.len().saturating_sub(1) {
            if atoms[i].cancels(atoms[i + 1]) {
                reducible = true;
                let mut next = atoms.clone();
                next.drain(i..i + 2);
                all_remainders(next, out);
            }
        }
        if !reducible {
            out.insert(atoms);
        }
    }

    #[test]
    fn dog_chases_cat() {
        let (n, s) = (Atom::N, Atom::S);
        let r = pregroup_reduce(&ty(&[n, n.r(), s, n.l(), n]));
        assert_eq!(r.remainder, ty(&[s]));
        assert_eq!(r.cups, vec![(0, 1), (3, 4)]);
        assert_eq!(r.cup_offsets(5), vec![0, 1]);
    }

    #[test]
    fn irreducible_input_is_returned() {
        let r = pregroup_reduce(&ty(&[Atom::S]));
        assert_eq!(r.remainder, ty(&[Atom::S]));
        assert!(r.cups.is_empty());
        let r = pregroup_reduce(&PregroupType::unit());
        assert!(r.remainder.is_empty());
    }

    #[test]
    fn sentence_adjoint_pair_unique_remainder() {
        let (n, s) = (Atom::N, Atom::S);
        let input = vec![n, n.r(), s, s.r(), s];
        let mut oracle = BTreeSet::new();
        all_remainders(input.clone(), &mut oracle);
        assert_eq!(oracle.len(), 1);
        let r = pregroup_reduce(&ty(&input));
        assert_eq!(r.remainder.atoms(), oracle.iter().next().unwrap().as_slice());
        assert_eq!(r.remainder, ty(&[s]));
        assert_eq!(r.cups.len(), 2);
    }

    #[test]
    fn postnominal_preposition_needs_full_search() {
        // dog chases cat in park: greedy left-to-right would cancel the verb's
        // n^l against "cat" and strand the preposition's n^r
        let (n, s) = (Atom::N, Atom::S);
        let input = [n, n.r(), s, n.l(), n, n.r(), n, n.l(), n];
        let r = pregroup_reduce(&ty(&input));
        assert_eq!(r.remainder, ty(&[s]));
        assert_eq!(r.cups.len(), 4);
        assert_eq!(apply_cups(&input, &r.cups).unwrap(), vec![s]);
    }

    fn atom_strategy() -> impl Strategy<Value = Atom> {
        (0usize..2, -1i32..=1).prop_map(|(b, adj)| {
            let base = [crate::diagram::Base::Noun, crate::diagram::Base::Sentence][b];
            Atom::new(base, adj)
        })
    }

    proptest! {
        #[test]
        fn reduction_is_sound_and_minimal(atoms in proptest::collection::vec(atom_strategy(), 0..9)) {
            let r = pregroup_reduce(&ty(&atoms));
            // replaying the cups only ever cancels adjacent adjoint pairs
            let replay = apply_cups(&atoms, &r.cups);
            prop_assert_eq!(replay.as_deref(), Some(r.remainder.atoms()));
            prop_assert_eq!(r.cups.len() * 2 + r.remainder.len(), atoms.len());
            // and nothing shorter is reachable
            let mut oracle = BTreeSet::new();
            all_remainders(atoms.clone(), &mut oracle);
            let shortest = oracle.iter().map(Vec::len).min().unwrap();
            prop_assert_eq!(r.remainder.len(), shortest);
            prop_assert!(oracle.contains(r.remainder.atoms()));
        }

        #[test]
        fn concatenation_is_associative(
            a in proptest::collection::vec(atom_strategy(), 0..4),
            b in proptest::collection::vec(atom_strategy(), 0..4),
            c in proptest::collection::vec(atom_strategy(), 0..4),
        ) {
            let (a, b, c) = (ty(&a), ty(&b), ty(&c));
            prop_assert_eq!(a.concat(&b).concat(&c), a.concat(&b.concat(&c)));
            prop_assert_eq!(a.concat(&PregroupType::unit()), a.clone());
            prop_assert_eq!(PregroupType::unit().concat(&a), a);
        }
    }
}
