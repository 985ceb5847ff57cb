#pragma once

#include "clab/grid.hpp"
#include "clab/problems.hpp"

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace clab {

/// Raised on unreadable, truncated or malformed archives and on write failures.
class ArchiveError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Named fields plus text metadata, stored as one binary file:
///   magic "CLABARC\x01", geometry block, metadata block (key/value text),
///   then per field: name, kind, three u64 extents, little-endian float64 values.
/// Integers are little-endian u64, strings are length-prefixed.
struct FieldArchive {
  CylinderGeometry geometry;
  std::map<std::string, std::string> metadata;
  std::vector<std::pair<std::string, ScalarField>> fields;

  const ScalarField& field(const std::string& name) const;
};

void write_archive(const std::string& path, const FieldArchive& archive);
FieldArchive read_archive(const std::string& path);

/// Instance <-> archive. The provenance block (recipe text, seed, noise level)
/// and the scalars D_of_u and M travel in the metadata with full precision.
FieldArchive instance_to_archive(const ProblemInstance& instance);
ProblemInstance instance_from_archive(const FieldArchive& archive);

void write_instance(const std::string& path, const ProblemInstance& instance,
                    const std::map<std::string, std::string>& extra_metadata = {});
ProblemInstance read_instance(const std::string& path);

}  // namespace clab
