#!/usr/bin/env python3
# SPDX-License-Identifier: Apache-2.0
"""Regenerates the bundled SDF corpora under data/corpus/.

Development helper only; the C++ build never depends on RDKit.
Output is deterministic for a fixed RDKit version.
"""

import argparse
import pathlib
import random

from rdkit import Chem, RDLogger
from rdkit.Chem import AllChem

ALLOWED = {"C", "N", "O", "F"}

CORES = [
    "C", "CC", "CCC", "CC(C)C", "CCCC", "CC(C)(C)C", "CCCCC",
    "C=CC", "CC#C", "CC=CC",
    "C1CC1", "C1CCC1", "C1CCCC1", "C1CCCCC1", "C1CCOC1", "C1CCNC1",
    "C1COC1", "C1CNC1", "C1CCOCC1", "C1CCNCC1", "C1COCCN1", "C1CN1",
    "C1CO1", "C1=CCC1", "C1=CCCC1",
    "c1ccoc1", "c1cc[nH]c1",
]

PREFIXES = ["", "O", "N", "F", "N#C", "O=C", "OC(=O)", "CO", "NC(=O)",
            "C#C", "C=C", "FC(F)"]
SUFFIXES = ["", "O", "N", "F", "C#N", "C=O", "CO"]

OVERFIT = ["CCO", "CC(C)=O", "OCC#N", "CC1CC1", "NCC(=O)O", "CC(F)CO",
           "C1CCOC1", "CC#CC", "COC(C)=O", "NC(=O)CO", "CC(C)(C)O",
           "C1CCNC1", "OC1CCC1", "CCCC=O", "FCC(F)F", "CNC=O"]

RINGS_CYCLIC = ["C1CC1", "C1CCC1", "C1CCCC1", "C1CCCCC1", "C1CCOC1",
                "C1CCNC1", "OC1CC1", "CC1CCC1"]
RINGS_NONCYCLIC = ["CCC", "CCCC", "CCCCC", "CC(C)C", "CCOC", "CCNC",
                   "CCO", "CC(C)CC"]


def candidates():
    seen = set()
    for core in CORES:
        for pre in PREFIXES:
            for suf in SUFFIXES:
                smi = pre + core + suf
                mol = Chem.MolFromSmiles(smi)
                if mol is None:
                    continue
                if mol.GetNumHeavyAtoms() > 9:
                    continue
                if any(a.GetSymbol() not in ALLOWED for a in mol.GetAtoms()):
                    continue
                if any(a.GetFormalCharge() != 0 for a in mol.GetAtoms()):
                    continue
                can = Chem.MolToSmiles(mol)
                if can in seen:
                    continue
                seen.add(can)
                yield can


def embed(smiles, seed):
    mol = Chem.AddHs(Chem.MolFromSmiles(smiles))
    if AllChem.EmbedMolecule(mol, randomSeed=seed) != 0:
        return None
    AllChem.MMFFOptimizeMolecule(mol, maxIters=2000)
    Chem.Kekulize(mol, clearAromaticFlags=True)
    mol.SetProp("_Name", smiles)
    return mol


def write(path, smiles_list, label=None):
    writer = Chem.SDWriter(str(path))
    writer.SetKekulize(True)
    count = 0
    for i, smi in enumerate(smiles_list):
        mol = embed(smi, 0xC0FFEE + i)
        if mol is None:
            continue
        if label is not None:
            mol.SetProp("class", str(label(smi)))
        writer.write(mol)
        count += 1
    writer.close()
    return count


def main():
    RDLogger.DisableLog("rdApp.*")
    parser = argparse.ArgumentParser()
    parser.add_argument("--out", default="data/corpus")
    parser.add_argument("--count", type=int, default=200)
    args = parser.parse_args()
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    pool = sorted(candidates())
    rng = random.Random(20240917)
    picked = sorted(rng.sample(pool, args.count))
    print("pool", len(pool), "corpus", write(out / "corpus200.sdf", picked))
    print("overfit", write(out / "overfit16.sdf", OVERFIT))
    rings = RINGS_CYCLIC + RINGS_NONCYCLIC
    cyclic = set(RINGS_CYCLIC)
    print("rings", write(out / "rings16.sdf", rings,
                         label=lambda s: 1 if s in cyclic else 0))


if __name__ == "__main__":
    main()
