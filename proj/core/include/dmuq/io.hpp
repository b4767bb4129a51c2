#pragma once

#include "dmuq/dmap.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace dmuq {

/// Numeric CSV with a header row.
struct CsvTable {
  std::vector<std::string> header;
  Matrix values;  ///< rows x columns

  Eigen::Index column(const std::string& name) const;  ///< -1 when absent
};

CsvTable read_csv(const std::filesystem::path& path);
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header, const Matrix& values);

/// Time series CSV (columns t, x_1..x_n) to a SampleSet tagged with dt.
SampleSet read_series(const std::filesystem::path& path);
void write_series(const std::filesystem::path& path, const SampleSet& series, double t0 = 0.0);

struct ArtifactProvenance {
  std::string source_hash;  ///< FNV-1a of the input file, hex
  std::string parameters;   ///< JSON object text
  std::string timestamp;    ///< ISO 8601 UTC
};

inline constexpr int kArtifactFormatVersion = 1;

/// JSON header + raw little-endian float64 blocks. Round-trips bit-exactly.
void save_model(const std::filesystem::path& path, const GeneratorModel& model, const ArtifactProvenance& provenance);
GeneratorModel load_model(const std::filesystem::path& path, ArtifactProvenance* provenance = nullptr);

std::string fnv1a_hex(const std::filesystem::path& path);
std::string utc_timestamp();

}  // namespace dmuq
