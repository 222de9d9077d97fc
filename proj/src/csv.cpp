#include "steinmc/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "steinmc/errors.hpp"

namespace steinmc {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw ConfigError("CSV has no column '" + name + "'");
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    if (!cell.empty() && cell.back() == '\r') cell.pop_back();
    out.push_back(cell);
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw RuntimeFailure("cannot write " + path.string());
  return out;
}

double parse_double(const std::string& s, const std::filesystem::path& path) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("non-numeric value '" + s + "' in " + path.string());
  }
}

}  // namespace

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("empty CSV file " + path.string());
  table.header = split(line);
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    table.rows.push_back(split(line));
    if (table.rows.back().size() != table.header.size()) {
      throw ConfigError("ragged row in " + path.string());
    }
  }
  return table;
}

void write_csv(const std::filesystem::path& path, const CsvTable& table) {
  std::ofstream out = open_out(path);
  auto emit = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
    out << '\n';
  };
  emit(table.header);
  for (const auto& r : table.rows) emit(r);
}

void write_points_csv(const std::filesystem::path& path, const Matrix& points) {
  std::ofstream out = open_out(path);
  for (Index k = 0; k < points.cols(); ++k) out << (k ? "," : "") << 'x' << k;
  out << '\n';
  for (Index i = 0; i < points.rows(); ++i) {
    for (Index k = 0; k < points.cols(); ++k) out << (k ? "," : "") << format_double(points(i, k));
    out << '\n';
  }
}

void write_points_csv(const std::filesystem::path& path, const PointSet& points) {
  write_points_csv(path, stack_rows(points));
}

Matrix read_points_csv(const std::filesystem::path& path) {
  const CsvTable t = read_csv(path);
  Matrix m(static_cast<Index>(t.rows.size()), static_cast<Index>(t.header.size()));
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    for (std::size_t k = 0; k < t.header.size(); ++k) {
      m(static_cast<Index>(i), static_cast<Index>(k)) = parse_double(t.rows[i][k], path);
    }
  }
  return m;
}

void write_trace_csv(const std::filesystem::path& path, const ExperimentTrace& trace, bool include_timing) {
  std::ofstream out = open_out(path);
  out << "j,action,ksd,n_eval,elapsed_s,jump_sq,chain_disp_sq\n";
  for (const TraceRecord& r : trace.records) {
    out << r.iteration << ',' << (r.action == TraceAction::Add ? "add" : "remove") << ',' << format_double(r.ksd)
        << ',' << r.n_eval << ',' << (include_timing ? format_double(r.elapsed_s) : "0") << ','
        << format_double(r.jump_sq) << ',' << format_double(r.chain_disp_sq) << '\n';
  }
}

std::filesystem::path reference_sidecar(const std::filesystem::path& csv_path) {
  std::filesystem::path p = csv_path;
  p.replace_extension(".json");
  return p;
}

void write_reference(const std::filesystem::path& csv_path, const ReferenceSample& ref, std::uint64_t seed,
                     const std::string& target_descriptor) {
  write_points_csv(csv_path, ref.points());
  nlohmann::json meta = {{"provenance", ref.provenance()},
                         {"seed", seed},
                         {"N", ref.size()},
                         {"d", ref.dim()},
                         {"self_energy", ref.self_energy()},
                         {"target", target_descriptor}};
  std::ofstream out = open_out(reference_sidecar(csv_path));
  out << meta.dump(2) << '\n';
}

ReferenceSample read_reference(const std::filesystem::path& csv_path) {
  Matrix points = read_points_csv(csv_path);
  const auto sidecar = reference_sidecar(csv_path);
  if (!std::filesystem::exists(sidecar)) return ReferenceSample(std::move(points), "csv:" + csv_path.string());
  std::ifstream in(sidecar);
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("bad reference metadata " + sidecar.string() + ": " + e.what());
  }
  if (meta.value("N", points.rows()) != points.rows() || meta.value("d", points.cols()) != points.cols()) {
    throw ConfigError("reference metadata does not match " + csv_path.string());
  }
  const std::string provenance = meta.value("provenance", std::string("csv"));
  if (meta.contains("self_energy")) {
    return ReferenceSample(std::move(points), provenance, meta["self_energy"].get<double>());
  }
  return ReferenceSample(std::move(points), provenance);
}

}  // namespace steinmc
