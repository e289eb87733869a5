//! Circular (Morgan/ECFP-style) substructure identifiers at radii 0 and 1.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::smiles::MolecularGraph;

/// Identifier of the circular environment centred on one atom.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SubstructureId {
    pub hash: u32,
    pub radius: u8,
    pub atom: usize,
}

/// Per-atom identifiers in atom order: radius 0 then radius 1 for each atom.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MolSentence {
    pub tokens: Vec<SubstructureId>,
}

impl MolSentence {
    pub fn hashes(&self) -> impl Iterator<Item = u32> + '_ {
        self.tokens.iter().map(|t| t.hash)
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// Fingerprint as a set of identifiers.
pub type Fingerprint = BTreeSet<u32>;

const FNV_OFFSET: u32 = 0x811c_9dc5;
const FNV_PRIME: u32 = 0x0100_0193;

/// FNV-1a over the byte stream followed by the murmur3 32-bit finalizer.
#[derive(Clone, Copy)]
struct Hasher32(u32);

impl Hasher32 {
    fn new(tag: u8) -> Self {
        let mut h = Hasher32(FNV_OFFSET);
        h.bytes(&[tag]);
        h
    }

    fn bytes(&mut self, data: &[u8]) {
        for &b in data {
            self.0 ^= u32::from(b);
            self.0 = self.0.wrapping_mul(FNV_PRIME);
        }
    }

    fn u32(&mut self, v: u32) {
        self.bytes(&v.to_le_bytes());
    }

    fn finish(self) -> u32 {
        let mut h = self.0;
        h ^= h >> 16;
        h = h.wrapping_mul(0x85eb_ca6b);
        h ^= h >> 13;
        h = h.wrapping_mul(0xc2b2_ae35);
        h ^= h >> 16;
        h
    }
}

/// Radius-0 and radius-1 identifiers for every heavy atom.
pub fn morgan_sentence(mol: &MolecularGraph) -> MolSentence {
    let adj = mol.adjacency();
    let r0: Vec<u32> = mol
        .atoms
        .iter()
        .enumerate()
        .map(|(i, atom)| {
            let mut h = Hasher32::new(0);
            h.bytes(atom.element.as_bytes());
            h.bytes(&[0xff]);
            h.u32(adj[i].len() as u32);
            h.u32(atom.charge as u32);
            h.u32(atom.hydrogens);
            h.bytes(&[u8::from(atom.aromatic), u8::from(atom.in_ring)]);
            h.finish()
        })
        .collect();
    let mut tokens = Vec::with_capacity(2 * mol.atoms.len());
    for (i, &id0) in r0.iter().enumerate() {
        let mut env: Vec<(u8, u32)> = adj[i].iter().map(|&(j, order)| (order.code(), r0[j])).collect();
        env.sort_unstable();
        let mut h = Hasher32::new(1);
        h.u32(id0);
        for (code, nid) in env {
            h.bytes(&[code]);
            h.u32(nid);
        }
        tokens.push(SubstructureId {
            hash: id0,
            radius: 0,
            atom: i,
        });
        tokens.push(SubstructureId {
            hash: h.finish(),
            radius: 1,
            atom: i,
        });
    }
    MolSentence { tokens }
}

/// Deduplicated identifiers of [`morgan_sentence`].
pub fn fingerprint(mol: &MolecularGraph) -> Fingerprint {
    morgan_sentence(mol).hashes().collect()
}

/// `|a ∩ b| / |a ∪ b|`; 0 when both sets are empty.
pub fn tanimoto(a: &Fingerprint, b: &Fingerprint) -> f64 {
    let inter = a.intersection(b).count();
    let union = a.len() + b.len() - inter;
    if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse_smiles;
    use super::*;

    fn sentence(s: &str) -> MolSentence {
        morgan_sentence(&parse_smiles(s).unwrap())
    }

    fn multiset(s: &MolSentence) -> Vec<u32> {
        let mut v: Vec<u32> = s.hashes().collect();
        v.sort_unstable();
        v
    }

    #[test]
    fn sentence_length() {
        assert_eq!(sentence("CCO").len(), 6);
    }

    #[test]
    fn order_invariance() {
        assert_eq!(multiset(&sentence("OCC")), multiset(&sentence("CCO")));
    }

    #[test]
    fn symmetric_atoms_share_identifiers() {
        let s = sentence("CCC");
        let r0: Vec<u32> = s.tokens.iter().filter(|t| t.radius == 0).map(|t| t.hash).collect();
        assert_eq!(r0[0], r0[2]);
        assert_ne!(r0[0], r0[1]);
    }

    #[test]
    fn single_carbon_fingerprint() {
        let fp = fingerprint(&parse_smiles("C").unwrap());
        assert!(fp.len() <= 2);
        // isolated atom: radius-1 identifier is a rehash, distinct from radius 0
        assert_eq!(fp.len(), 2);
    }

    #[test]
    fn tanimoto_cases() {
        let a: Fingerprint = [1, 2, 3].into_iter().collect();
        let b: Fingerprint = [2, 3, 4].into_iter().collect();
        let c: Fingerprint = [7, 8].into_iter().collect();
        assert_eq!(tanimoto(&a, &b), 0.5);
        assert_eq!(tanimoto(&a, &a), 1.0);
        assert_eq!(tanimoto(&a, &c), 0.0);
        assert_eq!(tanimoto(&Fingerprint::new(), &Fingerprint::new()), 0.0);
    }

    #[test]
    fn identifiers_are_stable() {
        // frozen so that saved embedding tables stay valid across releases
        let ids = |s: &str| sentence(s).hashes().collect::<Vec<_>>();
        assert_eq!(ids("C"), [4084136339, 617819529]);
        assert_eq!(
            ids("CCO"),
            [1254156794, 475243740, 3603514400, 3317170108, 2171506436, 833435858]
        );
        assert_eq!(ids("c1ccccc1")[..2], [1704793799, 1554447989]);
    }
}
