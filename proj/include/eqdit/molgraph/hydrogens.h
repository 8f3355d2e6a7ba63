// SPDX-License-Identifier: Apache-2.0

#ifndef EQDIT_MOLGRAPH_HYDROGENS_H_
#define EQDIT_MOLGRAPH_HYDROGENS_H_

#include <cstddef>
#include <vector>

#include "eqdit/molgraph/element.h"
#include "eqdit/molgraph/molecule.h"

namespace eqdit {

// Removes H atoms and their bonds; heavy atoms keep their relative order.
Molecule strip_hydrogens(const Molecule &m);

// Saturates every heavy atom up to its maximum valence with single-bonded
// hydrogens. Atoms already above their maximum valence get none and are
// reported through `overvalent` when given.
Molecule add_hydrogens(const Molecule &m,
                       std::vector<std::size_t> *overvalent = nullptr,
                       const ChemTable &table = ChemTable::builtin());

// Number of H neighbours of each atom.
std::vector<int> hydrogen_counts(const Molecule &m);

}  // namespace eqdit

#endif  // EQDIT_MOLGRAPH_HYDROGENS_H_
