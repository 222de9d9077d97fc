#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "steinmc/metrics.hpp"
#include "steinmc/spmcmc.hpp"
#include "steinmc/types.hpp"

namespace steinmc {

/// Shortest round-trip decimal form of v ("nan", "inf" for non-finite values).
std::string format_double(double v);

/// Simple comma-separated table with a header row.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const;
};

CsvTable read_csv(const std::filesystem::path& path);
void write_csv(const std::filesystem::path& path, const CsvTable& table);

/// One point per row, columns x0..x{d-1}.
void write_points_csv(const std::filesystem::path& path, const PointSet& points);
void write_points_csv(const std::filesystem::path& path, const Matrix& points);
Matrix read_points_csv(const std::filesystem::path& path);

/// Columns j, action, ksd, n_eval, elapsed_s, jump_sq, chain_disp_sq. With
/// include_timing = false the elapsed_s column is written as 0 so that
/// identical seeds give byte-identical files.
void write_trace_csv(const std::filesystem::path& path, const ExperimentTrace& trace, bool include_timing);

/// Writes `csv_path` and a sidecar `<csv_path stem>.json` with provenance, seed, N, d, self_energy.
void write_reference(const std::filesystem::path& csv_path, const ReferenceSample& ref, std::uint64_t seed,
                     const std::string& target_descriptor);
ReferenceSample read_reference(const std::filesystem::path& csv_path);
std::filesystem::path reference_sidecar(const std::filesystem::path& csv_path);

}  // namespace steinmc
