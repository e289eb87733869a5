//! SMILES reader.
//!
//! Covers the organic subset, aromatic lowercase atoms, bracket atoms
//! (isotope, chirality, H count, charge and atom class; isotope, chirality
//! and class are discarded), bonds `- = # $ : / \`, branches, ring closures
//! (`0`-`9` and `%nn`) and `.` component separators. Stereo is ignored and
//! directional bonds are read as single bonds. No aromaticity perception,
//! valence checks or implicit-hydrogen inference are performed.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SmilesError {
    #[error("empty molecule")]
    EmptyMolecule,
    #[error("ring bond {label} opened at offset {offset} is never closed")]
    UnmatchedRingBond { offset: usize, label: u32 },
    #[error("unmatched parenthesis at offset {offset}")]
    UnmatchedParenthesis { offset: usize },
    #[error("unknown element `{symbol}` at offset {offset}")]
    UnknownElement { offset: usize, symbol: String },
    #[error("unexpected `{found}` at offset {offset}")]
    TrailingGarbage { offset: usize, found: char },
    #[error("malformed bracket atom at offset {offset}")]
    InvalidBracketAtom { offset: usize },
    #[error("bond at offset {offset} is not followed by an atom")]
    DanglingBond { offset: usize },
    #[error("invalid ring closure at offset {offset}")]
    InvalidRingClosure { offset: usize },
    #[error("aromatic atom at offset {offset} is not in a ring")]
    AromaticOutsideRing { offset: usize },
}

impl SmilesError {
    /// Character offset of the error, when it points at a position.
    pub fn offset(&self) -> Option<usize> {
        match *self {
            SmilesError::EmptyMolecule => None,
            SmilesError::UnmatchedRingBond { offset, .. }
            | SmilesError::UnmatchedParenthesis { offset }
            | SmilesError::UnknownElement { offset, .. }
            | SmilesError::TrailingGarbage { offset, .. }
            | SmilesError::InvalidBracketAtom { offset }
            | SmilesError::DanglingBond { offset }
            | SmilesError::InvalidRingClosure { offset }
            | SmilesError::AromaticOutsideRing { offset } => Some(offset),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            SmilesError::EmptyMolecule => "EmptyMolecule",
            SmilesError::UnmatchedRingBond { .. } => "UnmatchedRingBond",
            SmilesError::UnmatchedParenthesis { .. } => "UnmatchedParenthesis",
            SmilesError::UnknownElement { .. } => "UnknownElement",
            SmilesError::TrailingGarbage { .. } => "TrailingGarbage",
            SmilesError::InvalidBracketAtom { .. } => "InvalidBracketAtom",
            SmilesError::DanglingBond { .. } => "DanglingBond",
            SmilesError::InvalidRingClosure { .. } => "InvalidRingClosure",
            SmilesError::AromaticOutsideRing { .. } => "AromaticOutsideRing",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BondOrder {
    Single,
    Double,
    Triple,
    Quadruple,
    Aromatic,
}

impl BondOrder {
    /// Stable small integer used when hashing environments.
    pub fn code(self) -> u8 {
        match self {
            BondOrder::Single => 1,
            BondOrder::Double => 2,
            BondOrder::Triple => 3,
            BondOrder::Quadruple => 4,
            BondOrder::Aromatic => 5,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Atom {
    /// Element symbol in canonical case (`C`, `Cl`, `Se`, ...; `*` for wildcard).
    pub element: String,
    pub charge: i32,
    pub hydrogens: u32,
    pub aromatic: bool,
    pub in_ring: bool,
    /// Character offset of the atom in the source text.
    pub offset: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bond {
    pub a: usize,
    pub b: usize,
    pub order: BondOrder,
    pub in_ring: bool,
}

/// Parsed molecule: heavy atoms and the bonds between them.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MolecularGraph {
    pub atoms: Vec<Atom>,
    pub bonds: Vec<Bond>,
    pub source: String,
}

impl MolecularGraph {
    pub fn heavy_atom_count(&self) -> usize {
        self.atoms.len()
    }

    /// Per-atom list of `(neighbor, bond order)`.
    pub fn adjacency(&self) -> Vec<Vec<(usize, BondOrder)>> {
        let mut adj = vec![Vec::new(); self.atoms.len()];
        for bond in &self.bonds {
            adj[bond.a].push((bond.b, bond.order));
            adj[bond.b].push((bond.a, bond.order));
        }
        adj
    }
}

const ELEMENTS: &[&str] = &[
    "H", "He", "Li", "Be", "B", "C", "N", "O", "F", "Ne", "Na", "Mg", "Al", "Si", "P", "S", "Cl",
    "Ar", "K", "Ca", "Sc", "Ti", "V", "Cr", "Mn", "Fe", "Co", "Ni", "Cu", "Zn", "Ga", "Ge", "As",
    "Se", "Br", "Kr", "Rb", "Sr", "Y", "Zr", "Nb", "Mo", "Tc", "Ru", "Rh", "Pd", "Ag", "Cd", "In",
    "Sn", "Sb", "Te", "I", "Xe", "Cs", "Ba", "La", "Ce", "Pr", "Nd", "Pm", "Sm", "Eu", "Gd", "Tb",
    "Dy", "Ho", "Er", "Tm", "Yb", "Lu", "Hf", "Ta", "W", "Re", "Os", "Ir", "Pt", "Au", "Hg", "Tl",
    "Pb", "Bi", "Po", "At", "Rn", "Fr", "Ra", "Ac", "Th", "Pa", "U", "Np", "Pu", "Am", "Cm", "Bk",
    "Cf", "Es", "Fm", "Md", "No", "Lr", "Rf", "Db", "Sg", "Bh", "Hs", "Mt", "Ds", "Rg", "Cn", "Nh",
    "Fl", "Mc", "Lv", "Ts", "Og",
];

const AROMATIC_BRACKET: &[&str] = &["b", "c", "n", "o", "p", "s", "se", "as", "te", "si", "ge"];

// Raw atom before hydrogens are folded into their neighbours.
struct RawAtom {
    element: String,
    charge: i32,
    hydrogens: u32,
    aromatic: bool,
    offset: usize,
    bracket: bool,
}

struct RingOpen {
    atom: usize,
    bond: Option<BondOrder>,
    offset: usize,
}

struct Parser<'a> {
    chars: &'a [char],
    pos: usize,
    atoms: Vec<RawAtom>,
    bonds: Vec<(usize, usize, Option<BondOrder>)>,
    rings: std::collections::BTreeMap<u32, RingOpen>,
}

/// Parses a SMILES string into a [`MolecularGraph`].
pub fn parse_smiles(text: &str) -> Result<MolecularGraph, SmilesError> {
    let chars: Vec<char> = text.chars().collect();
    let mut parser = Parser {
        chars: &chars,
        pos: 0,
        atoms: Vec::new(),
        bonds: Vec::new(),
        rings: Default::default(),
    };
    parser.parse()?;
    parser.finish(text)
}

impl Parser<'_> {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn parse(&mut self) -> Result<(), SmilesError> {
        // Atom that the next atom bonds to, and the explicit bond (with offset) pending.
        let mut prev: Option<usize> = None;
        let mut pending: Option<(BondOrder, usize)> = None;
        let mut branches: Vec<(Option<usize>, usize)> = Vec::new();

        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                break;
            }
            let at = self.pos;
            match c {
                '(' => {
                    if prev.is_none() || pending.is_some() {
                        return Err(SmilesError::TrailingGarbage { offset: at, found: c });
                    }
                    branches.push((prev, at));
                    self.pos += 1;
                }
                ')' => {
                    if let Some((_, off)) = pending {
                        return Err(SmilesError::DanglingBond { offset: off });
                    }
                    let (saved, _) = branches
                        .pop()
                        .ok_or(SmilesError::UnmatchedParenthesis { offset: at })?;
                    prev = saved;
                    self.pos += 1;
                }
                '.' => {
                    if let Some((_, off)) = pending {
                        return Err(SmilesError::DanglingBond { offset: off });
                    }
                    if !branches.is_empty() {
                        return Err(SmilesError::TrailingGarbage { offset: at, found: c });
                    }
                    prev = None;
                    self.pos += 1;
                }
                '-' | '=' | '#' | '$' | ':' | '/' | '\\' => {
                    if pending.is_some() {
                        return Err(SmilesError::TrailingGarbage { offset: at, found: c });
                    }
                    if prev.is_none() {
                        return Err(SmilesError::DanglingBond { offset: at });
                    }
                    let order = match c {
                        '=' => BondOrder::Double,
                        '#' => BondOrder::Triple,
                        '$' => BondOrder::Quadruple,
                        ':' => BondOrder::Aromatic,
                        _ => BondOrder::Single,
                    };
                    pending = Some((order, at));
                    self.pos += 1;
                }
                '0'..='9' | '%' => {
                    let Some(atom) = prev else {
                        return Err(SmilesError::InvalidRingClosure { offset: at });
                    };
                    let label = self.ring_label()?;
                    self.ring_closure(atom, label, pending.take().map(|p| p.0), at)?;
                }
                _ => {
                    let idx = self.atom()?;
                    if let Some(p) = prev {
                        self.bonds.push((p, idx, pending.take().map(|p| p.0)));
                    }
                    prev = Some(idx);
                }
            }
        }

        if let Some((_, off)) = pending {
            return Err(SmilesError::DanglingBond { offset: off });
        }
        if let Some(&(_, off)) = branches.last() {
            return Err(SmilesError::UnmatchedParenthesis { offset: off });
        }
        if let Some((&label, open)) = self.rings.iter().min_by_key(|(_, r)| r.offset) {
            return Err(SmilesError::UnmatchedRingBond {
                offset: open.offset,
                label,
            });
        }
        // Anything after whitespace must also be whitespace.
        if let Some((i, &c)) = self
            .chars
            .iter()
            .enumerate()
            .skip(self.pos)
            .find(|(_, c)| !c.is_whitespace())
        {
            return Err(SmilesError::TrailingGarbage { offset: i, found: c });
        }
        Ok(())
    }

    fn ring_label(&mut self) -> Result<u32, SmilesError> {
        let at = self.pos;
        if self.peek() == Some('%') {
            let digits: String = self.chars[at + 1..].iter().take(2).collect();
            if digits.len() != 2 || !digits.chars().all(|c| c.is_ascii_digit()) {
                return Err(SmilesError::InvalidRingClosure { offset: at });
            }
            self.pos += 3;
            Ok(digits.parse().expect("two ascii digits"))
        } else {
            let d = self.peek().and_then(|c| c.to_digit(10)).expect("digit");
            self.pos += 1;
            Ok(d)
        }
    }

    fn ring_closure(
        &mut self,
        atom: usize,
        label: u32,
        bond: Option<BondOrder>,
        offset: usize,
    ) -> Result<(), SmilesError> {
        match self.rings.remove(&label) {
            None => {
                self.rings.insert(label, RingOpen { atom, bond, offset });
            }
            Some(open) => {
                if open.atom == atom {
                    return Err(SmilesError::InvalidRingClosure { offset });
                }
                let order = match (open.bond, bond) {
                    (Some(a), Some(b)) if a != b => {
                        return Err(SmilesError::InvalidRingClosure { offset })
                    }
                    (a, b) => a.or(b),
                };
                if self
                    .bonds
                    .iter()
                    .any(|&(x, y, _)| (x, y) == (open.atom, atom) || (x, y) == (atom, open.atom))
                {
                    return Err(SmilesError::InvalidRingClosure { offset });
                }
                self.bonds.push((open.atom, atom, order));
            }
        }
        Ok(())
    }

    fn atom(&mut self) -> Result<usize, SmilesError> {
        let at = self.pos;
        let c = self.peek().expect("caller checked");
        let raw = if c == '[' {
            self.bracket_atom()?
        } else if c == '*' {
            self.pos += 1;
            RawAtom {
                element: "*".into(),
                charge: 0,
                hydrogens: 0,
                aromatic: false,
                offset: at,
                bracket: false,
            }
        } else if c.is_ascii_alphabetic() {
            let next = self.chars.get(at + 1).copied();
            let (element, aromatic, width) = match (c, next) {
                ('C', Some('l')) => ("Cl", false, 2),
                ('B', Some('r')) => ("Br", false, 2),
                ('B', _) => ("B", false, 1),
                ('C', _) => ("C", false, 1),
                ('N', _) => ("N", false, 1),
                ('O', _) => ("O", false, 1),
                ('P', _) => ("P", false, 1),
                ('S', _) => ("S", false, 1),
                ('F', _) => ("F", false, 1),
                ('I', _) => ("I", false, 1),
                ('b', _) => ("B", true, 1),
                ('c', _) => ("C", true, 1),
                ('n', _) => ("N", true, 1),
                ('o', _) => ("O", true, 1),
                ('p', _) => ("P", true, 1),
                ('s', _) => ("S", true, 1),
                _ => {
                    return Err(SmilesError::UnknownElement {
                        offset: at,
                        symbol: c.to_string(),
                    })
                }
            };
            self.pos += width;
            RawAtom {
                element: element.into(),
                charge: 0,
                hydrogens: 0,
                aromatic,
                offset: at,
                bracket: false,
            }
        } else {
            return Err(SmilesError::TrailingGarbage { offset: at, found: c });
        };
        self.atoms.push(raw);
        Ok(self.atoms.len() - 1)
    }

    fn bracket_atom(&mut self) -> Result<RawAtom, SmilesError> {
        let open = self.pos;
        let close = self.chars[open..]
            .iter()
            .position(|&c| c == ']')
            .map(|p| open + p)
            .ok_or(SmilesError::InvalidBracketAtom { offset: open })?;
        let body = &self.chars[open + 1..close];
        let mut i = 0;
        let invalid = |k: usize| SmilesError::InvalidBracketAtom { offset: open + 1 + k };

        while i < body.len() && body[i].is_ascii_digit() {
            i += 1; // isotope
        }
        let sym_start = i;
        let (element, aromatic) = if body.get(i) == Some(&'*') {
            i += 1;
            ("*".to_string(), false)
        } else {
            let two: String = body[i..].iter().take(2).collect();
            let one: String = body[i..].iter().take(1).collect();
            if two.len() == 2 && AROMATIC_BRACKET.contains(&two.as_str()) {
                i += 2;
                (capitalize(&two), true)
            } else if two.len() == 2 && ELEMENTS.contains(&two.as_str()) {
                i += 2;
                (two, false)
            } else if AROMATIC_BRACKET.contains(&one.as_str()) {
                i += 1;
                (one.to_uppercase(), true)
            } else if ELEMENTS.contains(&one.as_str()) {
                i += 1;
                (one, false)
            } else {
                let symbol: String = body[i..]
                    .iter()
                    .take_while(|c| c.is_ascii_alphabetic())
                    .collect();
                if symbol.is_empty() {
                    return Err(invalid(sym_start));
                }
                return Err(SmilesError::UnknownElement {
                    offset: open + 1 + sym_start,
                    symbol,
                });
            }
        };
        // chirality: @, @@, @TH1, @AL2, @SP3, @TB12, @OH30
        if body.get(i) == Some(&'@') {
            i += 1;
            if body.get(i) == Some(&'@') {
                i += 1;
            } else {
                while i < body.len() && body[i].is_ascii_uppercase() {
                    i += 1;
                }
                while i < body.len() && body[i].is_ascii_digit() {
                    i += 1;
                }
            }
        }
        let mut hydrogens = 0;
        if body.get(i) == Some(&'H') {
            i += 1;
            hydrogens = 1;
            let start = i;
            while i < body.len() && body[i].is_ascii_digit() {
                i += 1;
            }
            if i > start {
                hydrogens = body[start..i].iter().collect::<String>().parse().map_err(|_| invalid(start))?;
            }
        }
        let mut charge = 0i32;
        if let Some(&sign @ ('+' | '-')) = body.get(i) {
            let unit = if sign == '+' { 1 } else { -1 };
            i += 1;
            let start = i;
            while i < body.len() && body[i].is_ascii_digit() {
                i += 1;
            }
            if i > start {
                let n: i32 = body[start..i].iter().collect::<String>().parse().map_err(|_| invalid(start))?;
                charge = unit * n;
            } else {
                charge = unit;
                while body.get(i) == Some(&sign) {
                    charge += unit;
                    i += 1;
                }
            }
        }
        if body.get(i) == Some(&':') {
            i += 1;
            let start = i;
            while i < body.len() && body[i].is_ascii_digit() {
                i += 1;
            }
            if i == start {
                return Err(invalid(start));
            }
        }
        if i != body.len() {
            return Err(invalid(i));
        }
        self.pos = close + 1;
        Ok(RawAtom {
            element,
            charge,
            hydrogens,
            aromatic,
            offset: open,
            bracket: true,
        })
    }

    fn finish(self, text: &str) -> Result<MolecularGraph, SmilesError> {
        let raw = self.atoms;
        // Fold explicit hydrogen atoms into the H count of their single heavy neighbour.
        let mut degree = vec![0usize; raw.len()];
        for &(a, b, _) in &self.bonds {
            degree[a] += 1;
            degree[b] += 1;
        }
        let is_h = |i: usize| raw[i].element == "H" && raw[i].bracket;
        let mut extra_h = vec![0u32; raw.len()];
        let mut dropped = vec![false; raw.len()];
        for (i, _) in raw.iter().enumerate() {
            if is_h(i) && degree[i] <= 1 {
                let partner = self.bonds.iter().find_map(|&(a, b, _)| {
                    if a == i {
                        Some(b)
                    } else if b == i {
                        Some(a)
                    } else {
                        None
                    }
                });
                match partner {
                    Some(p) if !is_h(p) => {
                        extra_h[p] += 1 + raw[i].hydrogens;
                        dropped[i] = true;
                    }
                    _ => dropped[i] = true,
                }
            }
        }
        let mut remap = vec![usize::MAX; raw.len()];
        let mut atoms = Vec::new();
        for (i, r) in raw.iter().enumerate() {
            if dropped[i] {
                continue;
            }
            remap[i] = atoms.len();
            atoms.push(Atom {
                element: r.element.clone(),
                charge: r.charge,
                hydrogens: r.hydrogens + extra_h[i],
                aromatic: r.aromatic,
                in_ring: false,
                offset: r.offset,
            });
        }
        if atoms.is_empty() {
            return Err(SmilesError::EmptyMolecule);
        }
        let mut bonds = Vec::new();
        for &(a, b, order) in &self.bonds {
            if dropped[a] || dropped[b] {
                continue;
            }
            let (a, b) = (remap[a], remap[b]);
            let order = order.unwrap_or(if atoms[a].aromatic && atoms[b].aromatic {
                BondOrder::Aromatic
            } else {
                BondOrder::Single
            });
            bonds.push(Bond {
                a,
                b,
                order,
                in_ring: false,
            });
        }
        mark_rings(&mut atoms, &mut bonds);
        if let Some(atom) = atoms.iter().find(|a| a.aromatic && !a.in_ring) {
            return Err(SmilesError::AromaticOutsideRing { offset: atom.offset });
        }
        Ok(MolecularGraph {
            atoms,
            bonds,
            source: text.to_string(),
        })
    }
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

/// A bond is in a ring iff it is not a bridge; an atom is in a ring iff it
/// has a ring bond. Bridges are found with an iterative low-link DFS.
fn mark_rings(atoms: &mut [Atom], bonds: &mut [Bond]) {
    let n = atoms.len();
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (e, b) in bonds.iter().enumerate() {
        adj[b.a].push((b.b, e));
        adj[b.b].push((b.a, e));
    }
    let mut disc = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut is_bridge = vec![false; bonds.len()];
    let mut timer = 0;
    for root in 0..n {
        if disc[root] != usize::MAX {
            continue;
        }
        // (node, parent edge, next adjacency position)
        let mut stack: Vec<(usize, usize, usize)> = vec![(root, usize::MAX, 0)];
        disc[root] = timer;
        low[root] = timer;
        timer += 1;
        while let Some(&mut (v, parent_edge, ref mut next)) = stack.last_mut() {
            if *next < adj[v].len() {
                let (u, e) = adj[v][*next];
                *next += 1;
                if e == parent_edge {
                    continue;
                }
                if disc[u] == usize::MAX {
                    disc[u] = timer;
                    low[u] = timer;
                    timer += 1;
                    stack.push((u, e, 0));
                } else {
                    low[v] = low[v].min(disc[u]);
                }
            } else {
                stack.pop();
                if let Some(&(p, _, _)) = stack.last() {
                    low[p] = low[p].min(low[v]);
                    if low[v] > disc[p] {
                        is_bridge[parent_edge] = true;
                    }
                }
            }
        }
    }
    for (e, bond) in bonds.iter_mut().enumerate() {
        if !is_bridge[e] {
            bond.in_ring = true;
            atoms[bond.a].in_ring = true;
            atoms[bond.b].in_ring = true;
        }
    }
}
