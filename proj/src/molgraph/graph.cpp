// SPDX-License-Identifier: Apache-2.0

#include "eqdit/molgraph/graph.h"

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <tuple>

namespace eqdit {

std::vector<std::size_t> connected_components(const Molecule &m) {
  const std::size_t n = m.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto &b : m.bonds()) {
    std::size_t a = find(b.i), c = find(b.j);
    if (a != c) parent[std::max(a, c)] = std::min(a, c);
  }
  std::vector<std::size_t> comp(n);
  std::map<std::size_t, std::size_t> ids;
  for (std::size_t i = 0; i < n; ++i) {
    auto [it, _] = ids.try_emplace(find(i), ids.size());
    comp[i] = it->second;
  }
  return comp;
}

Molecule largest_fragment(const Molecule &m) {
  if (m.empty()) return m;
  auto comp = connected_components(m);
  std::size_t n_comp = *std::max_element(comp.begin(), comp.end()) + 1;
  if (n_comp == 1) return m;
  std::vector<std::size_t> sizes(n_comp, 0);
  for (auto c : comp) ++sizes[c];
  // Components are numbered by first atom, so max_element breaks ties
  // toward the lowest atom index.
  std::size_t keep = static_cast<std::size_t>(
      std::max_element(sizes.begin(), sizes.end()) - sizes.begin());

  std::vector<std::size_t> remap(m.size(), SIZE_MAX);
  std::vector<Atom> atoms;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (comp[i] != keep) continue;
    remap[i] = atoms.size();
    atoms.push_back(m.atom(i));
  }
  Molecule out(std::move(atoms), {});
  out.class_label = m.class_label;
  for (const auto &b : m.bonds())
    if (remap[b.i] != SIZE_MAX) out.add_bond(remap[b.i], remap[b.j], b.order);
  return out;
}

bool detect_rings(const Molecule &m) {
  if (m.empty()) return false;
  auto comp = connected_components(m);
  std::size_t n_comp = *std::max_element(comp.begin(), comp.end()) + 1;
  return m.bonds().size() + n_comp > m.size();
}

namespace {

// Labelled graph with terminal hydrogens folded into their heavy neighbour.
struct LabelledGraph {
  std::vector<std::pair<int, int>> labels;  // (atomic number, folded H count)
  std::vector<std::vector<std::pair<std::size_t, int>>> adj;  // (nbr, order)
  std::vector<std::tuple<std::size_t, std::size_t, int>> edges;
};

LabelledGraph fold_hydrogens(const Molecule &m) {
  const std::size_t n = m.size();
  std::vector<int> degree(n, 0);
  for (const auto &b : m.bonds()) {
    ++degree[b.i];
    ++degree[b.j];
  }
  // A hydrogen is folded when its only bond is a single bond to a non-H atom.
  std::vector<bool> folded(n, false);
  std::vector<int> hcount(n, 0);
  for (const auto &b : m.bonds()) {
    for (auto [h, x] : {std::pair{b.i, b.j}, std::pair{b.j, b.i}}) {
      if (m.atom(h).element.is_hydrogen() && degree[h] == 1 && b.order == 1
          && !m.atom(x).element.is_hydrogen()) {
        folded[h] = true;
        ++hcount[x];
      }
    }
  }
  LabelledGraph g;
  std::vector<std::size_t> remap(n, SIZE_MAX);
  for (std::size_t i = 0; i < n; ++i) {
    if (folded[i]) continue;
    remap[i] = g.labels.size();
    g.labels.emplace_back(m.atom(i).element.atomic_number(), hcount[i]);
  }
  g.adj.resize(g.labels.size());
  for (const auto &b : m.bonds()) {
    if (folded[b.i] || folded[b.j]) continue;
    std::size_t u = remap[b.i], v = remap[b.j];
    g.adj[u].emplace_back(v, b.order);
    g.adj[v].emplace_back(u, b.order);
    g.edges.emplace_back(u, v, b.order);
  }
  return g;
}

// Replaces each key by its rank among the sorted distinct keys.
template <typename Key>
std::vector<int> rank(const std::vector<Key> &keys) {
  std::vector<Key> sorted = keys;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  std::vector<int> out(keys.size());
  for (std::size_t i = 0; i < keys.size(); ++i)
    out[i] = static_cast<int>(
        std::lower_bound(sorted.begin(), sorted.end(), keys[i]) - sorted.begin());
  return out;
}

int count_colors(const std::vector<int> &colors) {
  return colors.empty() ? 0
                        : *std::max_element(colors.begin(), colors.end()) + 1;
}

// Iterated neighbourhood refinement until the partition is stable.
std::vector<int> refine(const LabelledGraph &g, std::vector<int> colors) {
  using Signature = std::pair<int, std::vector<std::pair<int, int>>>;
  int n_colors = count_colors(colors);
  while (true) {
    std::vector<Signature> sig(colors.size());
    for (std::size_t v = 0; v < colors.size(); ++v) {
      sig[v].first = colors[v];
      for (auto [u, order] : g.adj[v]) sig[v].second.emplace_back(order, colors[u]);
      std::sort(sig[v].second.begin(), sig[v].second.end());
    }
    colors = rank(sig);
    int next = count_colors(colors);
    if (next == n_colors) return colors;
    n_colors = next;
  }
}

std::string serialize(const LabelledGraph &g, const std::vector<int> &colors) {
  const std::size_t n = colors.size();
  std::vector<std::size_t> order(n);
  for (std::size_t v = 0; v < n; ++v) order[colors[v]] = v;
  std::ostringstream out;
  for (std::size_t k = 0; k < n; ++k) {
    auto [z, h] = g.labels[order[k]];
    out << (k ? "," : "") << z << 'h' << h;
  }
  std::vector<std::tuple<int, int, int>> edges;
  for (auto [u, v, o] : g.edges) {
    auto [a, b] = std::minmax(colors[u], colors[v]);
    edges.emplace_back(a, b, o);
  }
  std::sort(edges.begin(), edges.end());
  out << '|';
  for (std::size_t k = 0; k < edges.size(); ++k) {
    auto [a, b, o] = edges[k];
    out << (k ? "," : "") << a << '-' << b << ':' << o;
  }
  return out.str();
}

// Individualization-refinement search for the lexicographically smallest
// serialization over all canonical leaves.
void search(const LabelledGraph &g, const std::vector<int> &colors,
            std::optional<std::string> &best) {
  const int n_colors = count_colors(colors);
  if (n_colors == static_cast<int>(colors.size())) {
    std::string s = serialize(g, colors);
    if (!best || s < *best) best = std::move(s);
    return;
  }
  std::vector<int> cell_size(n_colors, 0);
  for (int c : colors) ++cell_size[c];
  int target = 0;
  while (cell_size[target] < 2) ++target;

  for (std::size_t v = 0; v < colors.size(); ++v) {
    if (colors[v] != target) continue;
    std::vector<int> split(colors.size());
    for (std::size_t u = 0; u < colors.size(); ++u)
      split[u] = 2 * colors[u] + (colors[u] == target && u != v ? 1 : 0);
    search(g, refine(g, rank(split)), best);
  }
}

}  // namespace

std::string canonical_hash(const Molecule &m) {
  LabelledGraph g = fold_hydrogens(m);
  if (g.labels.empty()) return "|";
  std::optional<std::string> best;
  search(g, refine(g, rank(g.labels)), best);
  return *best;
}

}  // namespace eqdit
