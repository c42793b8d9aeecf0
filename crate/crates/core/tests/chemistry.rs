//! SMILES parsing and ECFP checked against frozen RDKit output.
//!
//! `fixtures/atom_invariants.json` holds RDKit per-atom hydrogen counts,
//! aromaticity, ring membership and degree for canonical SMILES;
//! `fixtures/renumbered_smiles.json` holds 100 RDKit atom renumberings of
//! each molecule. The generator script is not part of the build.

use std::collections::BTreeSet;

use scarcemol::fingerprint::{ecfp, ecfp_from_smiles, identifier_rounds, EcfpParams};
use scarcemol::smiles::parse_smiles;
use serde::Deserialize;

#[derive(Deserialize)]
struct AtomRecord {
    smiles: String,
    heavy_atoms: usize,
    total_h: Vec<u32>,
    aromatic: Vec<bool>,
    in_ring: Vec<bool>,
    degree: Vec<usize>,
}

#[derive(Deserialize)]
struct Renumbered {
    name: String,
    smiles: String,
    renumbered: Vec<String>,
}

fn atom_records() -> Vec<AtomRecord> {
    serde_json::from_str(include_str!("fixtures/atom_invariants.json")).unwrap()
}

fn renumbered() -> Vec<Renumbered> {
    serde_json::from_str(include_str!("fixtures/renumbered_smiles.json")).unwrap()
}

#[test]
fn atom_invariants_match_rdkit() {
    for rec in atom_records() {
        let g = parse_smiles(&rec.smiles).unwrap();
        assert_eq!(g.atom_count(), rec.heavy_atoms, "{}", rec.smiles);
        for (i, a) in g.atoms.iter().enumerate() {
            let ctx = format!("{} atom {i}", rec.smiles);
            assert_eq!(a.total_h(), rec.total_h[i], "H count, {ctx}");
            assert_eq!(a.aromatic, rec.aromatic[i], "aromatic, {ctx}");
            assert_eq!(a.in_ring, rec.in_ring[i], "ring, {ctx}");
            assert_eq!(a.degree, rec.degree[i], "degree, {ctx}");
        }
    }
}

#[test]
fn fingerprints_survive_rdkit_renumbering() {
    let molecules = renumbered();
    assert_eq!(molecules.len(), 20);
    for d in [2, 4, 6] {
        let p = EcfpParams::new(d, 1024).unwrap();
        for m in &molecules {
            let reference = ecfp_from_smiles(&m.smiles, &p).unwrap();
            assert_eq!(m.renumbered.len(), 100);
            for s in &m.renumbered {
                let fp = ecfp_from_smiles(s, &p).unwrap();
                assert_eq!(fp, reference, "{} d={d}: `{s}`", m.name);
            }
        }
    }
}

#[test]
fn benzene_has_one_identifier_per_round() {
    let g = parse_smiles("c1ccccc1").unwrap();
    let rounds = identifier_rounds(&g, 2);
    assert_eq!(rounds.len(), 3);
    for ids in &rounds {
        let distinct: BTreeSet<u64> = ids.iter().copied().collect();
        assert_eq!(distinct.len(), 1);
    }
    let fp = ecfp(&g, &EcfpParams::new(4, 512).unwrap());
    assert!(fp.popcount() <= 3);
    assert_eq!(fp.feature_ids.len(), 3);
}

#[test]
fn feature_sets_grow_with_diameter() {
    for m in renumbered() {
        let mut previous: Option<BTreeSet<u64>> = None;
        for d in [0, 2, 4, 6] {
            let ids = ecfp_from_smiles(&m.smiles, &EcfpParams::new(d, 2048).unwrap()).unwrap().feature_ids;
            if let Some(prev) = &previous {
                assert!(prev.is_subset(&ids), "{} d={d}", m.name);
            }
            previous = Some(ids);
        }
    }
}

#[test]
fn folded_bits_come_from_feature_ids() {
    for m in renumbered() {
        let fp = ecfp_from_smiles(&m.smiles, &EcfpParams::new(4, 512).unwrap()).unwrap();
        let expected: BTreeSet<usize> = fp.feature_ids.iter().map(|id| (id % 512) as usize).collect();
        let set: BTreeSet<usize> = fp.set_bits().into_iter().collect();
        assert_eq!(set, expected);
        assert!(fp.popcount() <= fp.feature_ids.len());
    }
}
