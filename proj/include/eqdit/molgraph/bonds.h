// SPDX-License-Identifier: Apache-2.0

#ifndef EQDIT_MOLGRAPH_BONDS_H_
#define EQDIT_MOLGRAPH_BONDS_H_

#include "eqdit/molgraph/element.h"
#include "eqdit/molgraph/molecule.h"

namespace eqdit {

enum class BondMode {
  kGeometry,  // from element pairs and interatomic distances
  kChannel,   // keep the bonds decoded from the generated bond channel
};

// Highest order k with distance <= length(a, b, k) + margin(k), or 0.
int bond_order_from_distance(Element a, Element b, double distance,
                             const ChemTable &table = ChemTable::builtin());

Molecule infer_bonds(const Molecule &m, BondMode mode,
                     const ChemTable &table = ChemTable::builtin());

}  // namespace eqdit

#endif  // EQDIT_MOLGRAPH_BONDS_H_
