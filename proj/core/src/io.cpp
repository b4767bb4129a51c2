#include "dmuq/io.hpp"

#include <json.hpp>

#include <bit>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstring>
#include <ctime>
#include <fstream>
#include <sstream>

namespace dmuq {
namespace {

using nlohmann::json;

constexpr char kMagic[8] = {'D', 'M', 'U', 'Q', 'A', 'R', 'T', '1'};

static_assert(std::endian::native == std::endian::little, "artifact I/O assumes a little-endian host");

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_number(const std::string& cell, std::size_t line, const std::filesystem::path& path) {
  double v = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  if (!cell.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || cell.empty())
    fail(ErrorCategory::parse, path.string() + ":" + std::to_string(line) + ": cannot parse '" + cell + "' as a number");
  return v;
}

void write_block(std::ofstream& out, const double* data, std::size_t count) {
  out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(count * sizeof(double)));
}

void read_block(std::ifstream& in, double* data, std::size_t count, const std::string& name) {
  in.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(count * sizeof(double)));
  require(static_cast<std::size_t>(in.gcount()) == count * sizeof(double), ErrorCategory::io,
          "artifact truncated while reading block '" + name + "'");
}

}  // namespace

Eigen::Index CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return static_cast<Eigen::Index>(i);
  return -1;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCategory::io, "cannot open " + path.string());
  CsvTable table;
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    auto cells = split(t);
    if (table.header.empty()) {
      table.header = std::move(cells);
      continue;
    }
    require(cells.size() == table.header.size(), ErrorCategory::parse,
            path.string() + ":" + std::to_string(lineno) + ": expected " + std::to_string(table.header.size()) +
                " columns, found " + std::to_string(cells.size()));
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) row.push_back(parse_number(c, lineno, path));
    rows.push_back(std::move(row));
  }
  require(!table.header.empty(), ErrorCategory::parse, path.string() + ": missing header row");
  table.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(table.header.size()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows[r].size(); ++c)
      table.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
  return table;
}

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header, const Matrix& values) {
  require(static_cast<Eigen::Index>(header.size()) == values.cols(), ErrorCategory::parameter,
          "write_csv: header and column counts differ");
  std::ofstream out(path);
  require(out.good(), ErrorCategory::io, "cannot write " + path.string());
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
  char buf[32];
  for (Eigen::Index r = 0; r < values.rows(); ++r) {
    for (Eigen::Index c = 0; c < values.cols(); ++c) {
      const auto res = std::to_chars(buf, buf + sizeof(buf), values(r, c));
      if (c) out << ',';
      out.write(buf, res.ptr - buf);
    }
    out << '\n';
  }
  require(out.good(), ErrorCategory::io, "error while writing " + path.string());
}

SampleSet read_series(const std::filesystem::path& path) {
  const CsvTable table = read_csv(path);
  const Eigen::Index tcol = table.column("t");
  require(tcol == 0, ErrorCategory::parse, path.string() + ": first column must be 't'");
  require(table.values.cols() >= 2, ErrorCategory::parse, path.string() + ": no state columns");
  require(table.values.rows() >= 2, ErrorCategory::data, path.string() + ": need at least two rows");
  const Vector t = table.values.col(0);
  const double dt = t(1) - t(0);
  require(dt > 0.0, ErrorCategory::data, path.string() + ": time column must increase");
  for (Eigen::Index r = 2; r < t.size(); ++r)
    require(std::abs((t(r) - t(r - 1)) - dt) <= 1e-6 * dt + 1e-9 * std::abs(t(r)), ErrorCategory::data,
            path.string() + ": non-uniform time step at data row " + std::to_string(r + 1));
  PointMatrix points = table.values.rightCols(table.values.cols() - 1);
  return SampleSet(std::move(points), dt);
}

void write_series(const std::filesystem::path& path, const SampleSet& series, double t0) {
  const double dt = series.dt().value_or(1.0);
  const auto n = static_cast<Eigen::Index>(series.dim());
  Matrix values(static_cast<Eigen::Index>(series.size()), n + 1);
  for (Eigen::Index r = 0; r < values.rows(); ++r) values(r, 0) = t0 + static_cast<double>(r) * dt;
  values.rightCols(n) = series.points();
  std::vector<std::string> header{"t"};
  for (Eigen::Index j = 0; j < n; ++j) header.push_back("x_" + std::to_string(j + 1));
  write_csv(path, header, values);
}

void save_model(const std::filesystem::path& path, const GeneratorModel& model, const ArtifactProvenance& provenance) {
  const auto N = static_cast<std::size_t>(model.size());
  const auto n = model.points.dim();
  const auto modes = static_cast<std::size_t>(model.modes());
  const bool perturbed = model.mode == BandwidthMode::perturbed;

  json header;
  header["format_version"] = kArtifactFormatVersion;
  header["N"] = N;
  header["n"] = n;
  header["modes"] = modes;
  header["epsilon"] = model.epsilon;
  header["d"] = model.d;
  header["D"] = model.D ? json(*model.D) : json(nullptr);
  header["dt"] = model.points.dt() ? json(*model.points.dt()) : json(nullptr);
  header["mode"] = perturbed ? "perturbed" : "equilibrium";
  json prov_params = json::object();
  if (!provenance.parameters.empty()) prov_params = json::parse(provenance.parameters, nullptr, false);
  header["provenance"] = {{"source_hash", provenance.source_hash},
                          {"parameters", prov_params},
                          {"timestamp", provenance.timestamp}};
  // Exact values of scalars travel as raw bits too, so the JSON text never rounds them.
  header["blocks"] = json::array();
  std::vector<std::pair<std::string, std::pair<const double*, std::size_t>>> blocks{
      {"points", {model.points.points().data(), N * n}},
      {"q_eps", {model.q_eps.data(), N}},
      {"density", {model.density.data(), N}},
      {"rho", {model.rho.data(), N}},
      {"bandwidth_density", {model.bandwidth_density.data(), N}},
      {"lambdas", {model.lambdas.data(), modes}},
      {"phi", {model.phi.data(), N * modes}},
  };
  if (perturbed) {
    blocks.push_back({"delta_u", {model.delta_u.data(), N}});
    blocks.push_back({"weights", {model.weights.data(), N}});
  }
  const double scalars[4] = {model.epsilon, model.d, model.D.value_or(std::nan("")),
                             model.points.dt().value_or(std::nan(""))};
  blocks.push_back({"scalars", {scalars, 4}});
  for (const auto& b : blocks) header["blocks"].push_back({{"name", b.first}, {"count", b.second.second}});

  const std::string text = header.dump();
  std::ofstream out(path, std::ios::binary);
  require(out.good(), ErrorCategory::io, "cannot write " + path.string());
  out.write(kMagic, sizeof(kMagic));
  const std::uint64_t len = text.size();
  out.write(reinterpret_cast<const char*>(&len), sizeof(len));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto& b : blocks) write_block(out, b.second.first, b.second.second);
  require(out.good(), ErrorCategory::io, "error while writing " + path.string());
}

GeneratorModel load_model(const std::filesystem::path& path, ArtifactProvenance* provenance) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorCategory::io, "cannot open " + path.string());
  char magic[sizeof(kMagic)] = {};
  in.read(magic, sizeof(magic));
  require(in.gcount() == sizeof(magic) && std::memcmp(magic, kMagic, sizeof(kMagic)) == 0, ErrorCategory::io,
          path.string() + " is not a model artifact");
  std::uint64_t len = 0;
  in.read(reinterpret_cast<char*>(&len), sizeof(len));
  require(in.good() && len < (1ull << 32), ErrorCategory::io, path.string() + ": corrupt header length");
  std::string text(len, '\0');
  in.read(text.data(), static_cast<std::streamsize>(len));
  require(static_cast<std::uint64_t>(in.gcount()) == len, ErrorCategory::io, path.string() + ": truncated header");
  const json header = json::parse(text, nullptr, false);
  require(!header.is_discarded(), ErrorCategory::io, path.string() + ": header is not valid JSON");
  require(header.value("format_version", 0) == kArtifactFormatVersion, ErrorCategory::io,
          path.string() + ": unsupported artifact format version");

  const auto N = header.at("N").get<std::size_t>();
  const auto n = header.at("n").get<std::size_t>();
  const auto modes = header.at("modes").get<std::size_t>();
  const bool perturbed = header.at("mode").get<std::string>() == "perturbed";

  PointMatrix points(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(n));
  GeneratorModel model;
  model.q_eps.resize(static_cast<Eigen::Index>(N));
  model.density.resize(static_cast<Eigen::Index>(N));
  model.rho.resize(static_cast<Eigen::Index>(N));
  model.bandwidth_density.resize(static_cast<Eigen::Index>(N));
  model.lambdas.resize(static_cast<Eigen::Index>(modes));
  model.phi.resize(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(modes));
  double scalars[4] = {};
  for (const auto& b : header.at("blocks")) {
    const auto name = b.at("name").get<std::string>();
    const auto count = b.at("count").get<std::size_t>();
    double* target = nullptr;
    std::size_t expected = N;
    if (name == "points") target = points.data(), expected = N * n;
    else if (name == "q_eps") target = model.q_eps.data();
    else if (name == "density") target = model.density.data();
    else if (name == "rho") target = model.rho.data();
    else if (name == "bandwidth_density") target = model.bandwidth_density.data();
    else if (name == "lambdas") target = model.lambdas.data(), expected = modes;
    else if (name == "phi") target = model.phi.data(), expected = N * modes;
    else if (name == "delta_u") model.delta_u.resize(static_cast<Eigen::Index>(N)), target = model.delta_u.data();
    else if (name == "weights") model.weights.resize(static_cast<Eigen::Index>(N)), target = model.weights.data();
    else if (name == "scalars") target = scalars, expected = 4;
    else fail(ErrorCategory::io, path.string() + ": unknown block '" + name + "'");
    require(count == expected, ErrorCategory::io, path.string() + ": block '" + name + "' has the wrong size");
    read_block(in, target, count, name);
  }
  std::optional<double> dt;
  if (!std::isnan(scalars[3])) dt = scalars[3];
  model.points = SampleSet(std::move(points), dt);
  model.epsilon = scalars[0];
  model.d = scalars[1];
  if (!std::isnan(scalars[2])) model.D = scalars[2];
  model.mode = perturbed ? BandwidthMode::perturbed : BandwidthMode::equilibrium;
  model.phi_mean = model.phi.colwise().mean().transpose();
  if (provenance) {
    const auto& p = header.at("provenance");
    provenance->source_hash = p.value("source_hash", "");
    provenance->parameters = p.contains("parameters") ? p.at("parameters").dump() : "{}";
    provenance->timestamp = p.value("timestamp", "");
  }
  return model;
}

std::string fnv1a_hex(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorCategory::io, "cannot open " + path.string());
  std::uint64_t h = 1469598103934665603ull;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof(buf));
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 1099511628211ull;
    }
  }
  char out[17];
  std::snprintf(out, sizeof(out), "%016llx", static_cast<unsigned long long>(h));
  return out;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace dmuq
