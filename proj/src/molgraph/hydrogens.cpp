// SPDX-License-Identifier: Apache-2.0

#include "eqdit/molgraph/hydrogens.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace eqdit {

namespace {

// Quasi-uniform points on the unit sphere.
const std::vector<Eigen::Vector3d> &sphere_candidates() {
  static const std::vector<Eigen::Vector3d> points = [] {
    constexpr int kCount = 600;
    std::vector<Eigen::Vector3d> pts;
    pts.reserve(kCount);
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < kCount; ++i) {
      double z = 1.0 - 2.0 * (i + 0.5) / kCount;
      double r = std::sqrt(1.0 - z * z);
      double phi = golden * i;
      pts.emplace_back(r * std::cos(phi), r * std::sin(phi), z);
    }
    return pts;
  }();
  return points;
}

// Ideal directions for `count` substituents on an isolated centre.
std::vector<Eigen::Vector3d> ideal_directions(int count) {
  const double s = 1.0 / std::sqrt(3.0);
  switch (count) {
    case 1:
      return {{1, 0, 0}};
    case 2:
      return {{1, 0, 0}, {-1, 0, 0}};
    case 3:
      return {{1, 0, 0},
              {-0.5, std::sqrt(3.0) / 2, 0},
              {-0.5, -std::sqrt(3.0) / 2, 0}};
    case 4:
      return {{s, s, s}, {s, -s, -s}, {-s, s, -s}, {-s, -s, s}};
    default:
      return {};
  }
}

// Greedily picks directions maximizing the smallest angle to those taken.
std::vector<Eigen::Vector3d> spread_directions(
    std::vector<Eigen::Vector3d> taken, int count) {
  std::vector<Eigen::Vector3d> out;
  if (taken.empty()) {
    out = ideal_directions(count);
    if (static_cast<int>(out.size()) == count) return out;
    out.clear();
  }
  for (int n = 0; n < count; ++n) {
    const Eigen::Vector3d *best = nullptr;
    double best_score = std::numeric_limits<double>::infinity();
    for (const auto &c : sphere_candidates()) {
      // Largest cosine to any taken direction; minimize it.
      double score = -1.0;
      for (const auto &t : taken) score = std::max(score, c.dot(t));
      if (score < best_score) {
        best_score = score;
        best = &c;
      }
    }
    taken.push_back(*best);
    out.push_back(*best);
  }
  return out;
}

}  // namespace

Molecule strip_hydrogens(const Molecule &m) {
  std::vector<std::size_t> remap(m.size(), SIZE_MAX);
  std::vector<Atom> atoms;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (m.atom(i).element.is_hydrogen()) continue;
    remap[i] = atoms.size();
    atoms.push_back(m.atom(i));
  }
  Molecule out(std::move(atoms), {});
  out.class_label = m.class_label;
  for (const auto &b : m.bonds())
    if (remap[b.i] != SIZE_MAX && remap[b.j] != SIZE_MAX)
      out.add_bond(remap[b.i], remap[b.j], b.order);
  return out;
}

Molecule add_hydrogens(const Molecule &m, std::vector<std::size_t> *overvalent,
                       const ChemTable &table) {
  Molecule out = m;
  if (overvalent) overvalent->clear();
  const std::size_t n = m.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Atom &atom = m.atom(i);
    if (atom.element.is_hydrogen()) continue;
    const int deficit = table.max_valence(atom.element) - m.valence(i);
    if (deficit < 0) {
      if (overvalent) overvalent->push_back(i);
      continue;
    }
    if (deficit == 0) continue;

    std::vector<Eigen::Vector3d> taken;
    for (std::size_t j : m.neighbors(i)) {
      Eigen::Vector3d d = m.atom(j).position - atom.position;
      if (d.norm() > 1e-8) taken.push_back(d.normalized());
    }
    const double length = table.single_bond_length(atom.element, elements::H);
    for (const auto &dir : spread_directions(std::move(taken), deficit)) {
      std::size_t h = out.add_atom({elements::H, atom.position + length * dir});
      out.add_bond(i, h, 1);
    }
  }
  return out;
}

std::vector<int> hydrogen_counts(const Molecule &m) {
  std::vector<int> counts(m.size(), 0);
  for (const auto &b : m.bonds()) {
    if (m.atom(b.j).element.is_hydrogen()) ++counts[b.i];
    if (m.atom(b.i).element.is_hydrogen()) ++counts[b.j];
  }
  return counts;
}

}  // namespace eqdit
