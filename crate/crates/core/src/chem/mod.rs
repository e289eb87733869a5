//! SMILES parsing, circular substructure identifiers and fingerprint similarity.

mod morgan;
mod smiles;
mod writer;

pub use morgan::{fingerprint, morgan_sentence, tanimoto, Fingerprint, MolSentence, SubstructureId};
pub use smiles::{parse_smiles, Atom, Bond, BondOrder, MolecularGraph, SmilesError};
pub use writer::write_smiles;

/// Reads a drug list: `drug_id<TAB>smiles` per line, `#` comments and blank
/// lines skipped. Returns `(line number, id, smiles)` triples.
pub fn read_drug_list(text: &str) -> Result<Vec<(usize, String, String)>, (usize, String)> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        let mut parts = line.split('\t');
        match (parts.next(), parts.next()) {
            (Some(id), Some(smiles)) if !id.is_empty() && !smiles.is_empty() => {
                out.push((i + 1, id.to_string(), smiles.to_string()))
            }
            _ => return Err((i + 1, line.to_string())),
        }
    }
    Ok(out)
}
