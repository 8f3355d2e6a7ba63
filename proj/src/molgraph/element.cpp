// SPDX-License-Identifier: Apache-2.0

#include "eqdit/molgraph/element.h"

#include <algorithm>
#include <fstream>
#include <istream>
#include <sstream>

#include "eqdit/error.h"
#include "eqdit_builtin_tables.h"

namespace eqdit {

namespace {

std::tuple<int, int, int> pair_key(Element a, Element b, int order) {
  const int za = a.atomic_number(), zb = b.atomic_number();
  return {std::min(za, zb), std::max(za, zb), order};
}

}  // namespace

const ChemTable &ChemTable::builtin() {
  static const ChemTable table = [] {
    std::istringstream in(internal::kBuiltinChemTables);
    return parse(in);
  }();
  return table;
}

ChemTable ChemTable::load(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open element table " + path.string());
  return parse(in);
}

ChemTable ChemTable::parse(std::istream &in) {
  ChemTable table;
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::tuple<std::string, std::string, int, double>> bonds;

  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    std::istringstream fields(line);
    std::string kind;
    if (!(fields >> kind)) continue;

    if (kind == "element") {
      ElementInfo info;
      int z = 0;
      if (!(fields >> info.symbol >> z >> info.covalent_radius
            >> info.max_valence))
        throw ParseError("malformed element record", lineno);
      if (z <= 0 || info.covalent_radius <= 0.0 || info.max_valence < 0)
        throw ParseError("invalid element record for " + info.symbol, lineno);
      info.element = Element(z);
      table.elements_.push_back(std::move(info));
    } else if (kind == "bond") {
      std::string a, b;
      int order = 0;
      double length = 0.0;
      if (!(fields >> a >> b >> order >> length) || order < 1 || order > 3
          || length <= 0.0)
        throw ParseError("malformed bond record", lineno);
      bonds.emplace_back(a, b, order, length);
    } else if (kind == "margin") {
      int order = 0;
      double margin = 0.0;
      if (!(fields >> order >> margin) || order < 1 || order > 3
          || margin < 0.0)
        throw ParseError("malformed margin record", lineno);
      table.margins_[order - 1] = margin;
    } else {
      throw ParseError("unknown record '" + kind + "'", lineno);
    }
  }

  for (const auto &[a, b, order, length] : bonds)
    table.lengths_[pair_key(table.element(a), table.element(b), order)] =
        length;
  return table;
}

const ElementInfo &ChemTable::info(Element e) const {
  auto it = std::find_if(elements_.begin(), elements_.end(),
                         [e](const ElementInfo &i) { return i.element == e; });
  if (it == elements_.end())
    throw UnsupportedElementError("unsupported element with atomic number "
                                  + std::to_string(e.atomic_number()));
  return *it;
}

std::optional<Element> ChemTable::find(std::string_view symbol) const {
  for (const auto &info : elements_)
    if (info.symbol == symbol) return info.element;
  return std::nullopt;
}

Element ChemTable::element(std::string_view symbol) const {
  if (auto e = find(symbol)) return *e;
  throw UnsupportedElementError("unsupported element '" + std::string(symbol)
                                + "'");
}

bool ChemTable::contains(Element e) const noexcept {
  return std::any_of(elements_.begin(), elements_.end(),
                     [e](const ElementInfo &i) { return i.element == e; });
}

std::optional<double> ChemTable::bond_length(Element a, Element b,
                                             int order) const {
  auto it = lengths_.find(pair_key(a, b, order));
  if (it == lengths_.end()) return std::nullopt;
  return it->second;
}

double ChemTable::margin(int order) const {
  if (order < 1 || order > 3)
    throw ConfigError("bond order out of range: " + std::to_string(order));
  return margins_[order - 1];
}

double ChemTable::single_bond_length(Element a, Element b) const {
  if (auto length = bond_length(a, b, 1)) return *length;
  return info(a).covalent_radius + info(b).covalent_radius;
}

}  // namespace eqdit
