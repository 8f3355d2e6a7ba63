// SPDX-License-Identifier: Apache-2.0

#ifndef EQDIT_METRICS_METRICS_H_
#define EQDIT_METRICS_METRICS_H_

#include <cstddef>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "eqdit/molgraph/molecule.h"

namespace eqdit {

// Class labels used for ring-conditioned generation.
enum class RingClass { kNoncyclic = 0, kCyclic = 1 };

std::string ring_class_name(RingClass c);
std::optional<RingClass> parse_ring_class(const std::string &name);
RingClass ring_class_of(const Molecule &m);

// Every metric returns nullopt when its denominator is empty.

// Fraction of atoms whose summed bond orders equal the element valence.
std::optional<double> atom_stability(const std::vector<Molecule> &mols);

// Fraction of molecules in which every atom is stable.
std::optional<double> mol_stability(const std::vector<Molecule> &mols);

// At least one atom and no over-valent atom in the largest fragment.
bool is_valid(const Molecule &m);
std::optional<double> validity(const std::vector<Molecule> &mols);

// Distinct canonical hashes among the largest fragments of valid molecules,
// over the number of valid molecules.
std::optional<double> uniqueness(const std::vector<Molecule> &mols);

std::optional<double> class_accuracy(const std::vector<Molecule> &mols, RingClass target);

struct EvaluateOptions {
  std::optional<RingClass> target;
};

struct MetricReport {
  std::size_t samples = 0;
  std::optional<double> atom_stable;
  std::optional<double> mol_stable;
  std::optional<double> valid;
  std::optional<double> uniq;
  std::optional<double> val_uniq;
  std::optional<RingClass> target;
  std::optional<double> class_accuracy;
};

MetricReport evaluate(const std::vector<Molecule> &mols, const EvaluateOptions &options = {});

// Flat "key = value" lines; absent metrics are written as NA.
void write_report(std::ostream &out, const MetricReport &r);
std::string report_csv_header();
std::string report_csv_row(const MetricReport &r);

}  // namespace eqdit

#endif  // EQDIT_METRICS_METRICS_H_
