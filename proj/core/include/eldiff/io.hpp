#pragma once

// Output formats: CSV tables, binary field snapshots.
//
// Snapshot layout (little-endian):
//   char[8]  "ELDSNAP1"
//   uint32   dim, n, field count
//   per field: uint32 name length, name bytes
//   per field: n^dim float64 values, row-major (axis 0 slowest)

#include <filesystem>
#include <string>
#include <vector>

#include "eldiff/spectral.hpp"

namespace eldiff {

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

/// Values use %.17g so they round-trip exactly. Throws IoError naming the path.
void write_csv(const std::filesystem::path& path, const Table& table);
Table read_csv(const std::filesystem::path& path);

struct NamedField {
  std::string name;
  std::vector<double> values;
};

struct SnapshotFile {
  int dim = 0;
  int n = 0;
  std::vector<NamedField> fields;
};

void write_snapshot(const std::filesystem::path& path, const SnapshotFile& snapshot);
SnapshotFile read_snapshot(const std::filesystem::path& path);

/// Packs grid fields (physical values) under the given names.
SnapshotFile make_snapshot(const std::vector<std::pair<std::string, const ScalarField*>>& fields);

/// Writes the text, creating parent directories. Throws IoError naming the path.
void write_text(const std::filesystem::path& path, const std::string& text);
void ensure_directory(const std::filesystem::path& dir);

}  // namespace eldiff
