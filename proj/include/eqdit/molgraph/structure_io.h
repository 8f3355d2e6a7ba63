// SPDX-License-Identifier: Apache-2.0

#ifndef EQDIT_MOLGRAPH_STRUCTURE_IO_H_
#define EQDIT_MOLGRAPH_STRUCTURE_IO_H_

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "eqdit/molgraph/element.h"
#include "eqdit/molgraph/molecule.h"

namespace eqdit {

enum class StructureFormat { kXyz, kSdf };

// Guesses the format from the extension (.xyz, .sdf, .mol).
StructureFormat format_from_path(const std::filesystem::path &path);

// XYZ: frames of "<count>\n<comment>\n<count atom lines>", or a bare list of
// "<symbol> x y z" lines forming one molecule. Yields bond-free molecules.
std::vector<Molecule> read_xyz(std::istream &in,
                               const ChemTable &table = ChemTable::builtin());

// MDL SDF V2000. Bond blocks are kept; a "class" data item sets the class
// label.
std::vector<Molecule> read_sdf(std::istream &in,
                               const ChemTable &table = ChemTable::builtin());

std::vector<Molecule> read_structures(
    const std::filesystem::path &path, StructureFormat format,
    const ChemTable &table = ChemTable::builtin());

void write_sdf(std::ostream &out, const Molecule &m, const std::string &name,
               const ChemTable &table = ChemTable::builtin());

}  // namespace eqdit

#endif  // EQDIT_MOLGRAPH_STRUCTURE_IO_H_
