// SPDX-License-Identifier: Apache-2.0

#include "eqdit/molgraph/molecule.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "eqdit/error.h"

namespace eqdit {

Molecule::Molecule(std::vector<Atom> atoms, const std::vector<Bond> &bonds)
    : atoms_(std::move(atoms)) {
  for (const auto &a : atoms_)
    if (!a.position.allFinite()) throw Error("non-finite atom position");
  for (const auto &b : bonds) add_bond(b.i, b.j, b.order);
}

std::size_t Molecule::add_atom(const Atom &atom) {
  if (!atom.position.allFinite()) throw Error("non-finite atom position");
  atoms_.push_back(atom);
  return atoms_.size() - 1;
}

void Molecule::add_bond(std::size_t i, std::size_t j, int order) {
  if (i >= atoms_.size() || j >= atoms_.size())
    throw Error("bond endpoint out of range");
  if (i == j) throw Error("self bond on atom " + std::to_string(i));
  if (order < 1) throw Error("bond order must be positive");
  if (bond_order(i, j) != 0)
    throw Error("duplicate bond " + std::to_string(i) + "-"
                + std::to_string(j));
  bonds_.push_back({i, j, order});
}

int Molecule::bond_order(std::size_t i, std::size_t j) const {
  for (const auto &b : bonds_)
    if ((b.i == i && b.j == j) || (b.i == j && b.j == i)) return b.order;
  return 0;
}

int Molecule::valence(std::size_t i) const {
  int v = 0;
  for (const auto &b : bonds_)
    if (b.i == i || b.j == i) v += b.order;
  return v;
}

std::vector<std::size_t> Molecule::neighbors(std::size_t i) const {
  std::vector<std::size_t> out;
  for (const auto &b : bonds_) {
    if (b.i == i) out.push_back(b.j);
    else if (b.j == i) out.push_back(b.i);
  }
  return out;
}

std::size_t Molecule::heavy_atom_count() const {
  return static_cast<std::size_t>(
      std::count_if(atoms_.begin(), atoms_.end(),
                    [](const Atom &a) { return !a.element.is_hydrogen(); }));
}

}  // namespace eqdit
