// SPDX-License-Identifier: Apache-2.0

#ifndef EQDIT_MOLGRAPH_GRAPH_H_
#define EQDIT_MOLGRAPH_GRAPH_H_

#include <cstddef>
#include <string>
#include <vector>

#include "eqdit/molgraph/molecule.h"

namespace eqdit {

// Component id per atom, numbered in order of first appearance.
std::vector<std::size_t> connected_components(const Molecule &m);

// The sub-molecule induced by the largest connected component (ties go to
// the component containing the lowest atom index).
Molecule largest_fragment(const Molecule &m);

// True iff the bond graph has a cycle: bonds - atoms + components > 0.
bool detect_rings(const Molecule &m);

// Canonical string for the element- and bond-order-labelled graph. Equal for
// isomorphic molecules regardless of atom order; positions are ignored.
std::string canonical_hash(const Molecule &m);

}  // namespace eqdit

#endif  // EQDIT_MOLGRAPH_GRAPH_H_
