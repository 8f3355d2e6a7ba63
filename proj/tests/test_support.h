// SPDX-License-Identifier: Apache-2.0
//
// Shared fixtures and independent oracles for the unit tests.

#ifndef EQDIT_TESTS_TEST_SUPPORT_H_
#define EQDIT_TESTS_TEST_SUPPORT_H_

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "eqdit/molgraph/element.h"
#include "eqdit/molgraph/molecule.h"
#include "eqdit/molgraph/structure_io.h"

namespace eqdit::testing {

inline std::filesystem::path data_path(const std::string &rel) {
  return std::filesystem::path(EQDIT_TEST_DATA) / rel;
}

inline std::vector<Molecule> load_corpus(const std::string &name) {
  return read_structures(data_path("corpus/" + name), StructureFormat::kSdf);
}

// Molecule from element symbols and (i, j, order) bonds. Atoms are placed on
// a line 1.5 A apart; only the graph matters to callers.
inline Molecule skeleton(const std::vector<std::string> &symbols,
                         const std::vector<std::tuple<int, int, int>> &bonds) {
  Molecule m;
  for (std::size_t i = 0; i < symbols.size(); ++i)
    m.add_atom({ChemTable::builtin().element(symbols[i]),
                Eigen::Vector3d(1.5 * static_cast<double>(i), 0.0, 0.0)});
  for (auto [i, j, o] : bonds)
    m.add_bond(static_cast<std::size_t>(i), static_cast<std::size_t>(j), o);
  return m;
}

inline Molecule methane() {
  const double s = 1.09 / std::sqrt(3.0);
  Molecule m;
  m.add_atom({elements::C, {0, 0, 0}});
  for (Eigen::Vector3d d : {Eigen::Vector3d(s, s, s), Eigen::Vector3d(s, -s, -s),
                            Eigen::Vector3d(-s, s, -s), Eigen::Vector3d(-s, -s, s)})
    m.add_bond(0, m.add_atom({elements::H, d}), 1);
  return m;
}

inline Molecule benzene_skeleton() {
  Molecule m;
  for (int k = 0; k < 6; ++k) {
    double a = k * M_PI / 3.0;
    m.add_atom({elements::C, {1.39 * std::cos(a), 1.39 * std::sin(a), 0.0}});
  }
  for (int k = 0; k < 6; ++k) m.add_bond(k, (k + 1) % 6, k % 2 ? 1 : 2);
  return m;
}

inline Eigen::Matrix3d random_rotation(std::mt19937_64 &rng) {
  std::normal_distribution<double> g;
  Eigen::Quaterniond q(g(rng), g(rng), g(rng), g(rng));
  return q.normalized().toRotationMatrix();
}

inline Molecule permuted(const Molecule &m, const std::vector<std::size_t> &perm) {
  // perm[old] = new index
  std::vector<Atom> atoms(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) atoms[perm[i]] = m.atom(i);
  Molecule out(std::move(atoms), {});
  for (const auto &b : m.bonds()) out.add_bond(perm[b.i], perm[b.j], b.order);
  out.class_label = m.class_label;
  return out;
}

inline Molecule transformed(const Molecule &m, const Eigen::Matrix3d &r,
                            const Eigen::Vector3d &t) {
  Molecule out = m;
  for (std::size_t i = 0; i < m.size(); ++i)
    out.set_position(i, r * m.atom(i).position + t);
  return out;
}

// Backtracking isomorphism test over element- and bond-order-labelled
// graphs, independent of the refinement-based canonical form.
inline bool brute_force_isomorphic(const Molecule &a, const Molecule &b) {
  const std::size_t n = a.size();
  if (n != b.size() || a.bonds().size() != b.bonds().size()) return false;
  Eigen::MatrixXi ea = Eigen::MatrixXi::Zero(n, n), eb = ea;
  for (const auto &x : a.bonds()) ea(x.i, x.j) = ea(x.j, x.i) = x.order;
  for (const auto &x : b.bonds()) eb(x.i, x.j) = eb(x.j, x.i) = x.order;
  std::vector<int> map(n, -1);
  std::vector<bool> used(n, false);
  std::function<bool(std::size_t)> extend = [&](std::size_t i) {
    if (i == n) return true;
    for (std::size_t j = 0; j < n; ++j) {
      if (used[j] || a.atom(i).element != b.atom(j).element) continue;
      bool ok = true;
      for (std::size_t k = 0; k < i && ok; ++k)
        ok = ea(i, k) == eb(j, static_cast<std::size_t>(map[k]));
      if (!ok) continue;
      map[i] = static_cast<int>(j);
      used[j] = true;
      if (extend(i + 1)) return true;
      used[j] = false;
    }
    return false;
  };
  return extend(0);
}

// Cycle detection by DFS back edges.
inline bool dfs_has_cycle(const Molecule &m) {
  const std::size_t n = m.size();
  std::vector<int> state(n, 0);
  std::function<bool(std::size_t, std::size_t)> visit = [&](std::size_t v,
                                                            std::size_t parent) {
    state[v] = 1;
    for (std::size_t u : m.neighbors(v)) {
      if (u == parent) continue;
      if (state[u] == 1) return true;
      if (state[u] == 0 && visit(u, v)) return true;
    }
    state[v] = 2;
    return false;
  };
  for (std::size_t v = 0; v < n; ++v)
    if (state[v] == 0 && visit(v, SIZE_MAX)) return true;
  return false;
}

}  // namespace eqdit::testing

#endif  // EQDIT_TESTS_TEST_SUPPORT_H_
