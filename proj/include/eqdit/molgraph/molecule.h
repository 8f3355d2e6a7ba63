// SPDX-License-Identifier: Apache-2.0

#ifndef EQDIT_MOLGRAPH_MOLECULE_H_
#define EQDIT_MOLGRAPH_MOLECULE_H_

#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "eqdit/molgraph/element.h"

namespace eqdit {

struct Atom {
  Element element;
  Eigen::Vector3d position = Eigen::Vector3d::Zero();  // Angstrom
};

struct Bond {
  std::size_t i = 0;
  std::size_t j = 0;
  int order = 1;

  bool operator==(const Bond &) const = default;
};

// Atoms plus an undirected bond list. Bond endpoints are validated on
// insertion; at most one bond exists per unordered atom pair.
class Molecule {
 public:
  Molecule() = default;
  Molecule(std::vector<Atom> atoms, const std::vector<Bond> &bonds);

  std::size_t size() const noexcept { return atoms_.size(); }
  bool empty() const noexcept { return atoms_.empty(); }

  const std::vector<Atom> &atoms() const noexcept { return atoms_; }
  const Atom &atom(std::size_t i) const { return atoms_.at(i); }
  const std::vector<Bond> &bonds() const noexcept { return bonds_; }

  std::size_t add_atom(const Atom &atom);
  void add_bond(std::size_t i, std::size_t j, int order);
  void clear_bonds() { bonds_.clear(); }
  void set_position(std::size_t i, const Eigen::Vector3d &p) {
    atoms_.at(i).position = p;
  }

  // 0 when the atoms are not bonded.
  int bond_order(std::size_t i, std::size_t j) const;
  // Sum of bond orders incident to atom i.
  int valence(std::size_t i) const;
  std::vector<std::size_t> neighbors(std::size_t i) const;
  std::size_t heavy_atom_count() const;

  std::optional<int> class_label;

 private:
  std::vector<Atom> atoms_;
  std::vector<Bond> bonds_;
};

}  // namespace eqdit

#endif  // EQDIT_MOLGRAPH_MOLECULE_H_
