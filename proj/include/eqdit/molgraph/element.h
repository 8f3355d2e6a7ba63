// SPDX-License-Identifier: Apache-2.0

#ifndef EQDIT_MOLGRAPH_ELEMENT_H_
#define EQDIT_MOLGRAPH_ELEMENT_H_

#include <array>
#include <compare>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

namespace eqdit {

// An element identified by its atomic number.
class Element {
 public:
  constexpr Element() = default;
  constexpr explicit Element(int atomic_number)
      : atomic_number_(atomic_number) {}

  constexpr int atomic_number() const noexcept { return atomic_number_; }
  constexpr bool is_hydrogen() const noexcept { return atomic_number_ == 1; }

  constexpr auto operator<=>(const Element &) const = default;

 private:
  int atomic_number_ = 0;
};

namespace elements {
inline constexpr Element H{1};
inline constexpr Element C{6};
inline constexpr Element N{7};
inline constexpr Element O{8};
inline constexpr Element F{9};
}  // namespace elements

struct ElementInfo {
  std::string symbol;
  Element element;
  double covalent_radius = 0.0;  // Angstrom
  int max_valence = 0;
};

// Element properties and reference bond lengths. The builtin table is
// compiled from data/chem_tables.txt; other tables (e.g. with a wider element
// vocabulary) can be loaded from files in the same format.
class ChemTable {
 public:
  static const ChemTable &builtin();

  static ChemTable parse(std::istream &in);
  static ChemTable load(const std::filesystem::path &path);

  const std::vector<ElementInfo> &elements() const noexcept {
    return elements_;
  }

  // Throws UnsupportedElementError for elements missing from the table.
  const ElementInfo &info(Element e) const;
  Element element(std::string_view symbol) const;
  std::optional<Element> find(std::string_view symbol) const;
  bool contains(Element e) const noexcept;

  const std::string &symbol(Element e) const { return info(e).symbol; }
  int max_valence(Element e) const { return info(e).max_valence; }

  // Reference length for the given bond order, if tabulated.
  std::optional<double> bond_length(Element a, Element b, int order) const;
  double margin(int order) const;

  // Single-bond reference length, falling back to the covalent radii sum.
  double single_bond_length(Element a, Element b) const;

 private:
  std::vector<ElementInfo> elements_;
  std::map<std::tuple<int, int, int>, double> lengths_;
  std::array<double, 3> margins_ = {0.10, 0.05, 0.03};
};

}  // namespace eqdit

#endif  // EQDIT_MOLGRAPH_ELEMENT_H_
