// SPDX-License-Identifier: Apache-2.0

#include "eqdit/molgraph/bonds.h"

#include <algorithm>

namespace eqdit {

int bond_order_from_distance(Element a, Element b, double distance,
                             const ChemTable &table) {
  if (distance > table.single_bond_length(a, b) + table.margin(1)) return 0;
  int order = 1;
  for (int k = 2; k <= 3; ++k) {
    auto length = table.bond_length(a, b, k);
    if (length && distance <= *length + table.margin(k)) order = k;
  }
  return order;
}

Molecule infer_bonds(const Molecule &m, BondMode mode,
                     const ChemTable &table) {
  if (mode == BondMode::kChannel) {
    Molecule out(m.atoms(), {});
    out.class_label = m.class_label;
    for (const auto &b : m.bonds())
      out.add_bond(b.i, b.j, std::clamp(b.order, 1, 3));
    return out;
  }

  Molecule out(m.atoms(), {});
  out.class_label = m.class_label;
  const auto &atoms = m.atoms();
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    for (std::size_t j = i + 1; j < atoms.size(); ++j) {
      double d = (atoms[i].position - atoms[j].position).norm();
      int order =
          bond_order_from_distance(atoms[i].element, atoms[j].element, d, table);
      if (order > 0) out.add_bond(i, j, order);
    }
  }
  return out;
}

}  // namespace eqdit
