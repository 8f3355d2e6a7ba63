// SPDX-License-Identifier: Apache-2.0

#include "eqdit/metrics/metrics.h"

#include <fmt/format.h>

#include <unordered_set>

#include "eqdit/molgraph/element.h"
#include "eqdit/molgraph/graph.h"

namespace eqdit {
namespace {

std::optional<double> ratio(std::size_t num, std::size_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

bool atom_stable(const Molecule &m, std::size_t i) {
  return m.valence(i) == ChemTable::builtin().max_valence(m.atom(i).element);
}

std::string fmt_opt(const std::optional<double> &v) {
  return v ? fmt::format("{:.6f}", *v) : std::string("NA");
}

}  // namespace

std::string ring_class_name(RingClass c) {
  return c == RingClass::kCyclic ? "cyclic" : "noncyclic";
}

std::optional<RingClass> parse_ring_class(const std::string &name) {
  if (name == "cyclic" || name == "1") return RingClass::kCyclic;
  if (name == "noncyclic" || name == "0") return RingClass::kNoncyclic;
  return std::nullopt;
}

RingClass ring_class_of(const Molecule &m) {
  return detect_rings(m) ? RingClass::kCyclic : RingClass::kNoncyclic;
}

std::optional<double> atom_stability(const std::vector<Molecule> &mols) {
  std::size_t stable = 0, total = 0;
  for (const Molecule &m : mols)
    for (std::size_t i = 0; i < m.size(); ++i) {
      ++total;
      stable += atom_stable(m, i);
    }
  return ratio(stable, total);
}

std::optional<double> mol_stability(const std::vector<Molecule> &mols) {
  std::size_t stable = 0;
  for (const Molecule &m : mols) {
    bool all = true;
    for (std::size_t i = 0; i < m.size() && all; ++i) all = atom_stable(m, i);
    stable += all;
  }
  return ratio(stable, mols.size());
}

bool is_valid(const Molecule &m) {
  if (m.size() == 0) return false;
  const Molecule frag = largest_fragment(m);
  for (std::size_t i = 0; i < frag.size(); ++i)
    if (frag.valence(i) > ChemTable::builtin().max_valence(frag.atom(i).element)) return false;
  return true;
}

std::optional<double> validity(const std::vector<Molecule> &mols) {
  std::size_t valid = 0;
  for (const Molecule &m : mols) valid += is_valid(m);
  return ratio(valid, mols.size());
}

std::optional<double> uniqueness(const std::vector<Molecule> &mols) {
  std::unordered_set<std::string> seen;
  std::size_t valid = 0;
  for (const Molecule &m : mols) {
    if (!is_valid(m)) continue;
    ++valid;
    seen.insert(canonical_hash(largest_fragment(m)));
  }
  return ratio(seen.size(), valid);
}

std::optional<double> class_accuracy(const std::vector<Molecule> &mols, RingClass target) {
  std::size_t hit = 0;
  for (const Molecule &m : mols) hit += ring_class_of(m) == target;
  return ratio(hit, mols.size());
}

MetricReport evaluate(const std::vector<Molecule> &mols, const EvaluateOptions &options) {
  MetricReport r;
  r.samples = mols.size();
  r.atom_stable = atom_stability(mols);
  r.mol_stable = mol_stability(mols);
  r.valid = validity(mols);
  // Stored as the fraction of all samples that are valid and unique, so
  // that val_uniq <= valid holds.
  r.uniq = uniqueness(mols);
  if (r.uniq) r.val_uniq = *r.uniq * *r.valid;
  else if (r.valid) r.val_uniq = 0.0;
  if (options.target) {
    r.target = options.target;
    r.class_accuracy = class_accuracy(mols, *options.target);
  }
  return r;
}

void write_report(std::ostream &out, const MetricReport &r) {
  out << "samples = " << r.samples << '\n'
      << "atom_stable = " << fmt_opt(r.atom_stable) << '\n'
      << "mol_stable = " << fmt_opt(r.mol_stable) << '\n'
      << "valid = " << fmt_opt(r.valid) << '\n'
      << "uniq = " << fmt_opt(r.uniq) << '\n'
      << "val_uniq = " << fmt_opt(r.val_uniq) << '\n';
  if (r.target) {
    out << "target = " << ring_class_name(*r.target) << '\n'
        << "class_accuracy = " << fmt_opt(r.class_accuracy) << '\n';
  }
}

std::string report_csv_header() {
  return "samples,atom_stable,mol_stable,valid,uniq,val_uniq,target,class_accuracy";
}

std::string report_csv_row(const MetricReport &r) {
  return fmt::format("{},{},{},{},{},{},{},{}", r.samples, fmt_opt(r.atom_stable),
                     fmt_opt(r.mol_stable), fmt_opt(r.valid), fmt_opt(r.uniq), fmt_opt(r.val_uniq),
                     r.target ? ring_class_name(*r.target) : "NA", fmt_opt(r.class_accuracy));
}

}  // namespace eqdit
