//! SMILES parsing into heavy-atom molecular graphs.
//!
//! Supported subset: organic-subset atoms (`B C N O P S F Cl Br I` and
//! aromatic `b c n o p s`), bracket atoms with isotope, element, hydrogen
//! count, charge and atom class, bonds `- = # : / \`, branches, ring
//! closures (`0-9` and `%nn`) and `.`-separated fragments. Stereo markers
//! are accepted and dropped. Aromaticity is purely syntactic.
//!
//! Plain `[H]` atoms attached to a single heavy atom are folded into that
//! atom's hydrogen count, so the returned graph holds heavy atoms only.

mod elements;

use std::collections::HashMap;

use crate::error::{Error, Result, SmilesErrorKind};

pub use elements::{atomic_number, default_valence, symbol};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BondOrder {
    Single,
    Double,
    Triple,
    Aromatic,
}

impl BondOrder {
    /// Bond order in units of half bonds (aromatic = 1.5 -> 3).
    fn half_units(self) -> u32 {
        match self {
            BondOrder::Single => 2,
            BondOrder::Double => 4,
            BondOrder::Triple => 6,
            BondOrder::Aromatic => 3,
        }
    }

    /// Integer code used by the fingerprint hash.
    pub fn code(self) -> u8 {
        match self {
            BondOrder::Single => 1,
            BondOrder::Double => 2,
            BondOrder::Triple => 3,
            BondOrder::Aromatic => 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Atom {
    /// Atomic number.
    pub element: u8,
    pub aromatic: bool,
    pub charge: i32,
    pub isotope: Option<u32>,
    /// Hydrogen count written in a bracket atom; `None` for organic-subset atoms.
    pub explicit_h: Option<u32>,
    pub implicit_h: u32,
    /// Number of heavy-atom neighbors.
    pub degree: usize,
    pub in_ring: bool,
}

impl Atom {
    pub fn total_h(&self) -> u32 {
        self.implicit_h + self.explicit_h.unwrap_or(0)
    }

    pub fn is_bracket(&self) -> bool {
        self.explicit_h.is_some()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bond {
    pub begin: usize,
    pub end: usize,
    pub order: BondOrder,
}

impl Bond {
    pub fn other(&self, atom: usize) -> usize {
        if self.begin == atom {
            self.end
        } else {
            self.begin
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MolecularGraph {
    pub atoms: Vec<Atom>,
    pub bonds: Vec<Bond>,
    /// `adjacency[i]` lists `(neighbor, bond index)` pairs.
    pub adjacency: Vec<Vec<(usize, usize)>>,
}

impl MolecularGraph {
    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn bond_count(&self) -> usize {
        self.bonds.len()
    }

    pub fn bond_between(&self, a: usize, b: usize) -> Option<&Bond> {
        self.adjacency[a].iter().find(|&&(n, _)| n == b).map(|&(_, bi)| &self.bonds[bi])
    }

    fn from_parts(mut atoms: Vec<Atom>, bonds: Vec<Bond>) -> Self {
        let mut adjacency = vec![Vec::new(); atoms.len()];
        for (bi, b) in bonds.iter().enumerate() {
            adjacency[b.begin].push((b.end, bi));
            adjacency[b.end].push((b.begin, bi));
        }
        for (atom, adj) in atoms.iter_mut().zip(&adjacency) {
            atom.degree = adj.len();
        }
        let mut g = MolecularGraph { atoms, bonds, adjacency };
        g.mark_rings();
        g
    }

    /// Flags bonds lying on a cycle (non-bridges) and their atoms.
    fn ring_bonds(&self) -> Vec<bool> {
        let n = self.atoms.len();
        let mut in_ring = vec![true; self.bonds.len()];
        let mut disc = vec![usize::MAX; n];
        let mut low = vec![0usize; n];
        let mut timer = 0;
        // Iterative Tarjan bridge search; frames hold (atom, parent bond, next adjacency slot).
        for root in 0..n {
            if disc[root] != usize::MAX {
                continue;
            }
            let mut stack: Vec<(usize, usize, usize)> = vec![(root, usize::MAX, 0)];
            disc[root] = timer;
            low[root] = timer;
            timer += 1;
            while let Some(top) = stack.len().checked_sub(1) {
                let (v, parent_bond, slot) = stack[top];
                if let Some(&(w, bi)) = self.adjacency[v].get(slot) {
                    stack[top].2 += 1;
                    if bi == parent_bond {
                        continue;
                    }
                    if disc[w] == usize::MAX {
                        disc[w] = timer;
                        low[w] = timer;
                        timer += 1;
                        stack.push((w, bi, 0));
                    } else {
                        low[v] = low[v].min(disc[w]);
                    }
                } else {
                    stack.pop();
                    if let Some(&(p, _, _)) = stack.last() {
                        low[p] = low[p].min(low[v]);
                        if low[v] > disc[p] {
                            in_ring[parent_bond] = false;
                        }
                    }
                }
            }
        }
        in_ring
    }

    fn mark_rings(&mut self) {
        let ring = self.ring_bonds();
        for a in &mut self.atoms {
            a.in_ring = false;
        }
        for (b, &r) in self.bonds.iter().zip(&ring) {
            if r {
                self.atoms[b.begin].in_ring = true;
                self.atoms[b.end].in_ring = true;
            }
        }
    }
}

/// Fills `implicit_h` from the valence table.
///
/// Organic-subset atoms get `max(0, valence - floor(bond order sum))` with
/// aromatic bonds counted as 1.5; bracket atoms and elements outside the
/// table get zero.
pub fn compute_implicit_hydrogens(mut g: MolecularGraph) -> MolecularGraph {
    for (i, atom) in g.atoms.iter_mut().enumerate() {
        atom.implicit_h = 0;
        if atom.is_bracket() {
            continue;
        }
        let Some(valence) = default_valence(atom.element) else {
            continue;
        };
        let half: u32 = g.adjacency[i].iter().map(|&(_, bi)| g.bonds[bi].order.half_units()).sum();
        atom.implicit_h = valence.saturating_sub(half / 2);
    }
    g
}

struct RawBond {
    begin: usize,
    end: usize,
    order: Option<BondOrder>,
}

struct OpenRing {
    atom: usize,
    order: Option<BondOrder>,
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    atoms: Vec<Atom>,
    bonds: Vec<RawBond>,
    prev: Option<usize>,
    // (atom the branch hangs from, atom count when the branch opened, offset of `(`)
    branches: Vec<(usize, usize, usize)>,
    pending: Option<(BondOrder, usize)>,
    rings: HashMap<u32, (OpenRing, usize)>,
}

fn err(offset: usize, kind: SmilesErrorKind) -> Error {
    Error::Smiles { offset, kind }
}

/// Parses `s` into a heavy-atom graph with hydrogen counts and ring flags.
pub fn parse_smiles(s: &str) -> Result<MolecularGraph> {
    if s.trim().is_empty() {
        return Err(err(0, SmilesErrorKind::Empty));
    }
    let mut p = Parser {
        src: s.as_bytes(),
        pos: 0,
        atoms: Vec::new(),
        bonds: Vec::new(),
        prev: None,
        branches: Vec::new(),
        pending: None,
        rings: HashMap::new(),
    };
    p.run()?;
    Ok(p.finish())
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn run(&mut self) -> Result<()> {
        while let Some(c) = self.peek() {
            let at = self.pos;
            match c {
                b'(' => {
                    let Some(prev) = self.prev else {
                        return Err(err(at, SmilesErrorKind::UnexpectedChar('(')));
                    };
                    if self.pending.is_some() {
                        return Err(err(at, SmilesErrorKind::DanglingBond));
                    }
                    self.branches.push((prev, self.atoms.len(), at));
                    self.pos += 1;
                }
                b')' => {
                    let Some((from, count, _)) = self.branches.pop() else {
                        return Err(err(at, SmilesErrorKind::UnbalancedParentheses));
                    };
                    if self.pending.is_some() {
                        return Err(err(at, SmilesErrorKind::DanglingBond));
                    }
                    if self.atoms.len() == count {
                        return Err(err(at, SmilesErrorKind::EmptyBranch));
                    }
                    self.prev = Some(from);
                    self.pos += 1;
                }
                b'.' => {
                    if self.pending.is_some() || self.prev.is_none() {
                        return Err(err(at, SmilesErrorKind::UnexpectedChar('.')));
                    }
                    self.prev = None;
                    self.pos += 1;
                }
                b'-' | b'=' | b'#' | b':' | b'/' | b'\\' => {
                    if self.pending.is_some() || self.prev.is_none() {
                        return Err(err(at, SmilesErrorKind::DanglingBond));
                    }
                    let order = match c {
                        b'=' => BondOrder::Double,
                        b'#' => BondOrder::Triple,
                        b':' => BondOrder::Aromatic,
                        _ => BondOrder::Single,
                    };
                    self.pending = Some((order, at));
                    self.pos += 1;
                }
                b'0'..=b'9' | b'%' => self.ring_closure()?,
                b'[' => {
                    let atom = self.bracket_atom()?;
                    self.add_atom(atom)?;
                }
                _ => {
                    let atom = self.organic_atom()?;
                    self.add_atom(atom)?;
                }
            }
        }
        if let Some(&(_, _, at)) = self.branches.last() {
            return Err(err(at, SmilesErrorKind::UnbalancedParentheses));
        }
        if let Some((_, at)) = self.pending {
            return Err(err(at, SmilesErrorKind::DanglingBond));
        }
        if let Some((&digit, &(_, at))) = self.rings.iter().min_by_key(|(_, (_, at))| *at) {
            return Err(err(at, SmilesErrorKind::UnmatchedRingClosure(digit)));
        }
        if self.atoms.is_empty() {
            return Err(err(0, SmilesErrorKind::Empty));
        }
        Ok(())
    }

    fn add_atom(&mut self, atom: Atom) -> Result<()> {
        let idx = self.atoms.len();
        self.atoms.push(atom);
        if let Some(prev) = self.prev {
            let order = self.pending.take().map(|(o, _)| o);
            self.bonds.push(RawBond { begin: prev, end: idx, order });
        }
        self.prev = Some(idx);
        Ok(())
    }

    fn ring_closure(&mut self) -> Result<()> {
        let at = self.pos;
        let Some(prev) = self.prev else {
            return Err(err(at, SmilesErrorKind::UnexpectedChar(self.src[at] as char)));
        };
        let digit = if self.src[at] == b'%' {
            let d = self.src.get(at + 1..at + 3).filter(|d| d.iter().all(u8::is_ascii_digit));
            let Some(d) = d else {
                return Err(err(at, SmilesErrorKind::UnexpectedChar('%')));
            };
            self.pos += 3;
            u32::from(d[0] - b'0') * 10 + u32::from(d[1] - b'0')
        } else {
            self.pos += 1;
            u32::from(self.src[at] - b'0')
        };
        let order = self.pending.take().map(|(o, _)| o);
        match self.rings.remove(&digit) {
            None => {
                self.rings.insert(digit, (OpenRing { atom: prev, order }, at));
            }
            Some((open, _)) => {
                let order = match (open.order, order) {
                    (Some(a), Some(b)) if a != b => return Err(err(at, SmilesErrorKind::ConflictingRingBond(digit))),
                    (a, b) => a.or(b),
                };
                let duplicate = self
                    .bonds
                    .iter()
                    .any(|b| (b.begin == open.atom && b.end == prev) || (b.begin == prev && b.end == open.atom));
                if open.atom == prev || duplicate {
                    return Err(err(at, SmilesErrorKind::InvalidRingBond));
                }
                self.bonds.push(RawBond { begin: open.atom, end: prev, order });
            }
        }
        Ok(())
    }

    fn organic_atom(&mut self) -> Result<Atom> {
        let at = self.pos;
        let rest = &self.src[at..];
        for (sym, z, aromatic) in elements::ORGANIC {
            if rest.starts_with(sym.as_bytes()) {
                self.pos += sym.len();
                return Ok(Atom {
                    element: z,
                    aromatic,
                    charge: 0,
                    isotope: None,
                    explicit_h: None,
                    implicit_h: 0,
                    degree: 0,
                    in_ring: false,
                });
            }
        }
        let c = self.src[at] as char;
        if c.is_ascii_alphabetic() || c == '*' {
            let len = if rest.len() > 1 && rest[1].is_ascii_lowercase() { 2 } else { 1 };
            let sym = String::from_utf8_lossy(&rest[..len]).into_owned();
            Err(err(at, SmilesErrorKind::UnknownAtom(sym)))
        } else {
            Err(err(at, SmilesErrorKind::UnexpectedChar(c)))
        }
    }

    fn read_number(&mut self) -> Option<u32> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.pos == start {
            return None;
        }
        std::str::from_utf8(&self.src[start..self.pos]).ok()?.parse().ok()
    }

    fn bracket_atom(&mut self) -> Result<Atom> {
        let open = self.pos;
        let close = match self.src[open..].iter().position(|&c| c == b']') {
            Some(rel) => open + rel,
            None => return Err(err(open, SmilesErrorKind::UnclosedBracket)),
        };
        if self.src[open + 1..close].contains(&b'[') {
            return Err(err(open, SmilesErrorKind::UnclosedBracket));
        }
        self.pos = open + 1;

        let isotope = self.read_number();

        let sym_at = self.pos;
        let body = &self.src[sym_at..close];
        let (element, aromatic, sym_len) = bracket_symbol(body).ok_or_else(|| {
            let end = body.iter().position(|c| !c.is_ascii_alphabetic()).unwrap_or(body.len()).max(1).min(body.len());
            err(sym_at, SmilesErrorKind::UnknownAtom(String::from_utf8_lossy(&body[..end]).into_owned()))
        })?;
        self.pos += sym_len;

        // Chirality: @, @@, @TH1, @SP2, @TB10, @OH25 ...
        if self.peek() == Some(b'@') {
            self.pos += 1;
            if self.peek() == Some(b'@') {
                self.pos += 1;
            } else if self.pos + 1 < close {
                let tag = &self.src[self.pos..self.pos + 2];
                if [b"TH", b"AL", b"SP", b"TB", b"OH"].iter().any(|t| tag == *t) {
                    self.pos += 2;
                    self.read_number();
                }
            }
        }

        let mut h_count = 0;
        if self.peek() == Some(b'H') && self.pos < close {
            self.pos += 1;
            h_count = self.read_number().unwrap_or(1);
        }

        let mut charge: i32 = 0;
        if let Some(sign @ (b'+' | b'-')) = self.peek() {
            let unit = if sign == b'+' { 1 } else { -1 };
            self.pos += 1;
            if let Some(n) = self.read_number() {
                charge = unit * n as i32;
            } else {
                charge = unit;
                while self.peek() == Some(sign) {
                    self.pos += 1;
                    charge += unit;
                }
            }
        }

        if self.peek() == Some(b':') {
            self.pos += 1;
            if self.read_number().is_none() {
                return Err(err(self.pos, SmilesErrorKind::UnexpectedChar(':')));
            }
        }

        if self.pos != close {
            let c = self.src[self.pos] as char;
            return Err(err(self.pos, SmilesErrorKind::UnexpectedChar(c)));
        }
        self.pos = close + 1;
        Ok(Atom {
            element,
            aromatic,
            charge,
            isotope,
            explicit_h: Some(h_count),
            implicit_h: 0,
            degree: 0,
            in_ring: false,
        })
    }

    fn finish(self) -> MolecularGraph {
        let aromatic: Vec<bool> = self.atoms.iter().map(|a| a.aromatic).collect();
        let mut atoms = self.atoms;
        let mut implicit_order = Vec::with_capacity(self.bonds.len());
        let bonds: Vec<Bond> = self
            .bonds
            .into_iter()
            .map(|b| {
                implicit_order.push(b.order.is_none());
                let order = b.order.unwrap_or(if aromatic[b.begin] && aromatic[b.end] {
                    BondOrder::Aromatic
                } else {
                    BondOrder::Single
                });
                Bond { begin: b.begin, end: b.end, order }
            })
            .collect();

        // Fold plain hydrogens into their heavy neighbour.
        let mut degree = vec![0usize; atoms.len()];
        for b in &bonds {
            degree[b.begin] += 1;
            degree[b.end] += 1;
        }
        let foldable = |i: usize, atoms: &[Atom], degree: &[usize]| {
            let a = &atoms[i];
            a.element == elements::HYDROGEN
                && a.isotope.is_none()
                && a.charge == 0
                && a.explicit_h.unwrap_or(0) == 0
                && degree[i] == 1
        };
        let mut remove = vec![false; atoms.len()];
        for b in &bonds {
            for (h, heavy) in [(b.begin, b.end), (b.end, b.begin)] {
                if foldable(h, &atoms, &degree)
                    && atoms[heavy].element != elements::HYDROGEN
                    && b.order == BondOrder::Single
                {
                    remove[h] = true;
                    if let Some(eh) = atoms[heavy].explicit_h.as_mut() {
                        *eh += 1;
                    }
                }
            }
        }
        let mut new_index = vec![usize::MAX; atoms.len()];
        let mut next = 0;
        for i in 0..atoms.len() {
            if !remove[i] {
                new_index[i] = next;
                next += 1;
            }
        }
        let mut kept_bonds = Vec::with_capacity(bonds.len());
        let mut kept_implicit = Vec::with_capacity(bonds.len());
        for (b, imp) in bonds.into_iter().zip(implicit_order) {
            if remove[b.begin] || remove[b.end] {
                continue;
            }
            kept_bonds.push(Bond { begin: new_index[b.begin], end: new_index[b.end], order: b.order });
            kept_implicit.push(imp);
        }
        let mut idx = 0;
        atoms.retain(|_| {
            idx += 1;
            !remove[idx - 1]
        });

        let mut g = MolecularGraph::from_parts(atoms, kept_bonds);
        // An unwritten bond between aromatic atoms outside any ring is single.
        let ring = g.ring_bonds();
        for (bi, b) in g.bonds.iter_mut().enumerate() {
            if kept_implicit[bi] && b.order == BondOrder::Aromatic && !ring[bi] {
                b.order = BondOrder::Single;
            }
        }
        compute_implicit_hydrogens(g)
    }
}

fn bracket_symbol(body: &[u8]) -> Option<(u8, bool, usize)> {
    let first = *body.first()?;
    if first.is_ascii_uppercase() {
        if body.len() > 1 && body[1].is_ascii_lowercase() {
            let two = std::str::from_utf8(&body[..2]).ok()?;
            if let Some(z) = atomic_number(two) {
                return Some((z, false, 2));
            }
        }
        let one = std::str::from_utf8(&body[..1]).ok()?;
        return atomic_number(one).map(|z| (z, false, 1));
    }
    elements::BRACKET_AROMATIC
        .iter()
        .find(|(sym, _)| body.starts_with(sym.as_bytes()))
        .map(|&(sym, z)| (z, true, sym.len()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kind(s: &str) -> SmilesErrorKind {
        match parse_smiles(s) {
            Err(Error::Smiles { kind, .. }) => kind,
            other => panic!("expected SMILES error for {s}, got {other:?}"),
        }
    }

    #[test]
    fn ethanol() {
        let g = parse_smiles("CCO").unwrap();
        assert_eq!(g.atom_count(), 3);
        assert_eq!(g.bond_count(), 2);
        let el: Vec<u8> = g.atoms.iter().map(|a| a.element).collect();
        assert_eq!(el, vec![6, 6, 8]);
        let h: Vec<u32> = g.atoms.iter().map(|a| a.implicit_h).collect();
        assert_eq!(h, vec![3, 2, 1]);
        assert!(g.bonds.iter().all(|b| b.order == BondOrder::Single));
        assert!(g.atoms.iter().all(|a| !a.in_ring));
    }

    #[test]
    fn benzene() {
        let g = parse_smiles("c1ccccc1").unwrap();
        assert_eq!(g.atom_count(), 6);
        assert_eq!(g.bond_count(), 6);
        assert!(g.bonds.iter().all(|b| b.order == BondOrder::Aromatic));
        for a in &g.atoms {
            assert!(a.aromatic && a.in_ring);
            assert_eq!(a.implicit_h, 1);
            assert_eq!(a.degree, 2);
        }
    }

    #[test]
    fn ammonium() {
        let g = parse_smiles("[NH4+]").unwrap();
        assert_eq!(g.atom_count(), 1);
        assert_eq!(g.bond_count(), 0);
        let a = &g.atoms[0];
        assert_eq!((a.element, a.charge, a.explicit_h, a.implicit_h), (7, 1, Some(4), 0));
    }

    #[test]
    fn implicit_hydrogen_rules() {
        assert_eq!(parse_smiles("C").unwrap().atoms[0].implicit_h, 4);
        let acid = parse_smiles("C(=O)O").unwrap();
        assert_eq!(acid.atoms[0].implicit_h, 1);
        assert_eq!(acid.atoms[1].implicit_h, 0);
        assert_eq!(acid.atoms[2].implicit_h, 1);
        let methyl = parse_smiles("[CH3]").unwrap();
        assert_eq!((methyl.atoms[0].implicit_h, methyl.atoms[0].explicit_h), (0, Some(3)));
        // hypervalent sulfur: no hydrogens, no failure
        let sulfone = parse_smiles("CS(=O)(=O)C").unwrap();
        assert_eq!(sulfone.atoms[1].implicit_h, 0);
        // pyridine nitrogen
        let pyr = parse_smiles("c1ccncc1").unwrap();
        assert_eq!(pyr.atoms[3].implicit_h, 0);
        assert_eq!(pyr.atoms[0].implicit_h, 1);
    }

    #[test]
    fn ring_closure_errors() {
        assert_eq!(kind("C1CC"), SmilesErrorKind::UnmatchedRingClosure(1));
        assert_eq!(kind("C11"), SmilesErrorKind::InvalidRingBond);
        assert_eq!(kind("C12CC12"), SmilesErrorKind::InvalidRingBond);
        assert_eq!(kind("C=1CC#1"), SmilesErrorKind::ConflictingRingBond(1));
    }

    #[test]
    fn syntax_errors() {
        assert_eq!(kind(""), SmilesErrorKind::Empty);
        assert_eq!(kind("C(C"), SmilesErrorKind::UnbalancedParentheses);
        assert_eq!(kind("CC)"), SmilesErrorKind::UnbalancedParentheses);
        assert_eq!(kind("C()C"), SmilesErrorKind::EmptyBranch);
        assert_eq!(kind("[NH4+"), SmilesErrorKind::UnclosedBracket);
        assert_eq!(kind("CXC"), SmilesErrorKind::UnknownAtom("X".into()));
        assert_eq!(kind("[Xy]"), SmilesErrorKind::UnknownAtom("Xy".into()));
        assert_eq!(kind("CC="), SmilesErrorKind::DanglingBond);
        assert_eq!(kind("C$C"), SmilesErrorKind::UnexpectedChar('$'));
    }

    #[test]
    fn error_offsets_are_bytes() {
        match parse_smiles("CC(C)X") {
            Err(Error::Smiles { offset, .. }) => assert_eq!(offset, 5),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn two_digit_ring_closures_and_branches() {
        let g = parse_smiles("C%10CCCCC%10").unwrap();
        assert_eq!(g.bond_count(), 6);
        assert!(g.atoms.iter().all(|a| a.in_ring));
        let g = parse_smiles("CC(C)(C)C").unwrap();
        assert_eq!(g.atoms[1].degree, 4);
        assert_eq!(g.atoms[1].implicit_h, 0);
    }

    #[test]
    fn stereo_is_ignored() {
        let a = parse_smiles("F/C=C/F").unwrap();
        let b = parse_smiles("FC=CF").unwrap();
        assert_eq!(a, b);
        let c = parse_smiles("N[C@@H](C)C(=O)O").unwrap();
        let d = parse_smiles("N[CH](C)C(=O)O").unwrap();
        assert_eq!(c, d);
    }

    #[test]
    fn disconnected_fragments() {
        let g = parse_smiles("[Na+].[Cl-]").unwrap();
        assert_eq!(g.atom_count(), 2);
        assert_eq!(g.bond_count(), 0);
        assert_eq!(g.atoms[0].charge, 1);
        assert_eq!(g.atoms[1].charge, -1);
    }

    #[test]
    fn explicit_hydrogens_are_folded() {
        let g = parse_smiles("[H]C([H])([H])[H]").unwrap();
        assert_eq!(g.atom_count(), 1);
        assert_eq!(g.atoms[0].total_h(), 4);
        let g = parse_smiles("[H]OC").unwrap();
        assert_eq!(g.atom_count(), 2);
        assert_eq!(g.atoms[0].total_h(), 1);
        // a bracket heavy atom keeps its hydrogens as explicit
        let g = parse_smiles("[H][N+](C)(C)C").unwrap();
        assert_eq!(g.atoms[0].explicit_h, Some(1));
        // isotopic hydrogen stays in the graph
        let g = parse_smiles("[2H]C").unwrap();
        assert_eq!(g.atom_count(), 2);
    }

    #[test]
    fn charges_and_isotopes() {
        let g = parse_smiles("[13CH4]").unwrap();
        assert_eq!(g.atoms[0].isotope, Some(13));
        let g = parse_smiles("[Fe+++]").unwrap();
        assert_eq!(g.atoms[0].charge, 3);
        let g = parse_smiles("[O-2]").unwrap();
        assert_eq!(g.atoms[0].charge, -2);
        let g = parse_smiles("[nH]1cccc1").unwrap();
        assert!(g.atoms[0].aromatic);
        assert_eq!(g.atoms[0].explicit_h, Some(1));
        let g = parse_smiles("[CH3:7]C").unwrap();
        assert_eq!(g.atoms[0].explicit_h, Some(3));
    }

    #[test]
    fn biaryl_link_is_single() {
        let g = parse_smiles("c1ccccc1c1ccccc1").unwrap();
        assert_eq!(g.bond_between(5, 6).unwrap().order, BondOrder::Single);
        let h = parse_smiles("c1ccccc1-c1ccccc1").unwrap();
        assert_eq!(g, h);
    }

    #[test]
    fn no_self_loops_or_duplicates() {
        let g = parse_smiles("C1CC2CCC1CC2").unwrap();
        let mut seen = std::collections::HashSet::new();
        for b in &g.bonds {
            assert_ne!(b.begin, b.end);
            assert!(seen.insert((b.begin.min(b.end), b.begin.max(b.end))));
        }
    }

    #[test]
    fn ring_membership_in_fused_and_pendant() {
        // toluene: methyl carbon not in ring
        let g = parse_smiles("Cc1ccccc1").unwrap();
        assert!(!g.atoms[0].in_ring);
        assert!(g.atoms[1..].iter().all(|a| a.in_ring));
        // two rings joined by a chain
        let g = parse_smiles("C1CC1CCC1CC1").unwrap();
        let flags: Vec<bool> = g.atoms.iter().map(|a| a.in_ring).collect();
        assert_eq!(flags, vec![true, true, true, false, false, true, true, true]);
    }
}
