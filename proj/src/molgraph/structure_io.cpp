// SPDX-License-Identifier: Apache-2.0

#include "eqdit/molgraph/structure_io.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "eqdit/error.h"

namespace eqdit {

namespace {

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

bool is_blank(const std::string &s) { return trim(s).empty(); }

// Fixed-width integer field; throws with the line number on failure.
int int_field(const std::string &line, std::size_t pos, std::size_t width,
              std::size_t lineno, const char *what) {
  if (pos >= line.size()) throw ParseError(std::string("missing ") + what, lineno);
  std::string f = trim(line.substr(pos, width));
  int value = 0;
  auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), value);
  if (f.empty() || ec != std::errc() || ptr != f.data() + f.size())
    throw ParseError(std::string("bad ") + what + " '" + f + "'", lineno);
  return value;
}

double double_field(const std::string &line, std::size_t pos,
                    std::size_t width, std::size_t lineno, const char *what) {
  if (pos >= line.size()) throw ParseError(std::string("missing ") + what, lineno);
  std::string f = trim(line.substr(pos, width));
  try {
    std::size_t used = 0;
    double v = std::stod(f, &used);
    if (used != f.size()) throw std::invalid_argument(f);
    return v;
  } catch (const std::exception &) {
    throw ParseError(std::string("bad ") + what + " '" + f + "'", lineno);
  }
}

Atom parse_xyz_atom(const std::string &line, std::size_t lineno,
                    const ChemTable &table) {
  std::istringstream in(line);
  std::string symbol;
  double x, y, z;
  if (!(in >> symbol >> x >> y >> z))
    throw ParseError("expected '<element> x y z'", lineno);
  Atom atom;
  try {
    atom.element = table.element(symbol);
  } catch (const UnsupportedElementError &e) {
    throw UnsupportedElementError("line " + std::to_string(lineno) + ": "
                                  + e.what());
  }
  atom.position = {x, y, z};
  return atom;
}

bool parse_count(const std::string &line, std::size_t &count) {
  std::string t = trim(line);
  if (t.empty() || !std::all_of(t.begin(), t.end(), [](unsigned char c) {
        return std::isdigit(c);
      }))
    return false;
  count = std::stoul(t);
  return true;
}

}  // namespace

StructureFormat format_from_path(const std::filesystem::path &path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (ext == ".xyz") return StructureFormat::kXyz;
  if (ext == ".sdf" || ext == ".mol" || ext == ".sd") return StructureFormat::kSdf;
  throw Error("cannot infer structure format of " + path.string());
}

std::vector<Molecule> read_xyz(std::istream &in, const ChemTable &table) {
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(line);

  std::vector<Molecule> out;
  std::size_t first = 0;
  while (first < lines.size() && is_blank(lines[first])) ++first;
  if (first == lines.size()) return out;

  std::size_t count = 0;
  if (!parse_count(lines[first], count)) {
    // Bare atom list.
    Molecule m;
    for (std::size_t i = first; i < lines.size(); ++i)
      if (!is_blank(lines[i])) m.add_atom(parse_xyz_atom(lines[i], i + 1, table));
    out.push_back(std::move(m));
    return out;
  }

  std::size_t i = first;
  while (i < lines.size()) {
    if (is_blank(lines[i])) {
      ++i;
      continue;
    }
    if (!parse_count(lines[i], count))
      throw ParseError("expected atom count", i + 1);
    if (i + 2 + count > lines.size())
      throw ParseError("truncated frame: expected " + std::to_string(count)
                           + " atoms",
                       i + 1);
    Molecule m;
    for (std::size_t k = 0; k < count; ++k) {
      std::size_t at = i + 2 + k;
      m.add_atom(parse_xyz_atom(lines[at], at + 1, table));
    }
    out.push_back(std::move(m));
    i += 2 + count;
  }
  return out;
}

std::vector<Molecule> read_sdf(std::istream &in, const ChemTable &table) {
  std::vector<Molecule> out;
  std::string line;
  std::size_t lineno = 0;
  auto next = [&](const char *what) -> std::string & {
    if (!std::getline(in, line))
      throw ParseError(std::string("unexpected end of file, expected ") + what,
                       lineno + 1);
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
  };

  while (true) {
    // Skip blank lines between records; stop at EOF.
    std::string header;
    bool got = false;
    while (std::getline(in, header)) {
      ++lineno;
      if (!is_blank(header)) {
        got = true;
        break;
      }
    }
    if (!got) break;

    next("program line");
    next("comment line");
    std::string counts = next("counts line");
    const std::size_t counts_line = lineno;
    if (counts.find("V3000") != std::string::npos)
      throw ParseError("V3000 records are not supported", counts_line);
    int n_atoms = int_field(counts, 0, 3, counts_line, "atom count");
    int n_bonds = int_field(counts, 3, 3, counts_line, "bond count");
    if (n_atoms < 0 || n_bonds < 0)
      throw ParseError("negative counts", counts_line);

    Molecule m;
    for (int a = 0; a < n_atoms; ++a) {
      const std::string &l = next("atom line");
      Atom atom;
      atom.position = {double_field(l, 0, 10, lineno, "x coordinate"),
                       double_field(l, 10, 10, lineno, "y coordinate"),
                       double_field(l, 20, 10, lineno, "z coordinate")};
      if (l.size() < 32) throw ParseError("missing element symbol", lineno);
      std::string symbol = trim(l.substr(31, 3));
      try {
        atom.element = table.element(symbol);
      } catch (const UnsupportedElementError &e) {
        throw UnsupportedElementError("line " + std::to_string(lineno) + ": "
                                      + e.what());
      }
      m.add_atom(atom);
    }
    for (int b = 0; b < n_bonds; ++b) {
      const std::string &l = next("bond line");
      int i = int_field(l, 0, 3, lineno, "bond atom");
      int j = int_field(l, 3, 3, lineno, "bond atom");
      int type = int_field(l, 6, 3, lineno, "bond type");
      if (i < 1 || j < 1 || i > n_atoms || j > n_atoms || i == j)
        throw ParseError("bond endpoint out of range", lineno);
      if (type < 1 || type > 3)
        throw ParseError("unsupported bond type " + std::to_string(type)
                             + " (only kekulized orders 1-3)",
                         lineno);
      try {
        m.add_bond(static_cast<std::size_t>(i - 1),
                   static_cast<std::size_t>(j - 1), type);
      } catch (const ParseError &) {
        throw;
      } catch (const Error &e) {
        throw ParseError(e.what(), lineno);
      }
    }

    // Properties block and data items up to the record terminator.
    bool in_class_item = false;
    while (true) {
      const std::string &l = next("'$$$$'");
      if (l.rfind("$$$$", 0) == 0) break;
      if (l.rfind("> ", 0) == 0 || l.rfind(">  ", 0) == 0) {
        in_class_item = l.find("<class>") != std::string::npos;
        continue;
      }
      if (in_class_item && !is_blank(l)) {
        std::string v = trim(l);
        int label = 0;
        auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), label);
        if (ec != std::errc() || ptr != v.data() + v.size())
          throw ParseError("class label must be an integer", lineno);
        m.class_label = label;
        in_class_item = false;
      }
    }
    out.push_back(std::move(m));
  }
  return out;
}

std::vector<Molecule> read_structures(const std::filesystem::path &path,
                                      StructureFormat format,
                                      const ChemTable &table) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return format == StructureFormat::kXyz ? read_xyz(in, table)
                                         : read_sdf(in, table);
}

void write_sdf(std::ostream &out, const Molecule &m, const std::string &name,
               const ChemTable &table) {
  if (m.size() > 999 || m.bonds().size() > 999)
    throw CapacityError("molecule too large for a V2000 record");
  char buf[128];
  out << name << "\n  eqdit          3D\n\n";
  std::snprintf(buf, sizeof buf, "%3zu%3zu  0  0  0  0  0  0  0  0999 V2000\n",
                m.size(), m.bonds().size());
  out << buf;
  for (const auto &a : m.atoms()) {
    std::snprintf(buf, sizeof buf,
                  "%10.4f%10.4f%10.4f %-3s 0  0  0  0  0  0  0  0  0  0  0  0\n",
                  a.position.x(), a.position.y(), a.position.z(),
                  table.symbol(a.element).c_str());
    out << buf;
  }
  for (const auto &b : m.bonds()) {
    std::snprintf(buf, sizeof buf, "%3zu%3zu%3d  0\n", b.i + 1, b.j + 1,
                  b.order);
    out << buf;
  }
  out << "M  END\n";
  if (m.class_label) out << ">  <class>\n" << *m.class_label << "\n\n";
  out << "$$$$\n";
}

}  // namespace eqdit
