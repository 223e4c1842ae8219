#include "rdmc/io.hpp"

#include <bit>
#include <charconv>
#include <cstdio>
#include <cstring>
#include <fstream>

namespace rdmc::io {

static_assert(std::endian::native == std::endian::little, "snapshot I/O assumes a little-endian host");

namespace {

template <class T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::istream& in) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) throw FormatError("snapshot truncated");
  return v;
}

std::string csv_vector(const std::vector<double>& v) {
  std::string out;
  for (std::size_t k = 0; k < v.size(); ++k) out += (k ? ";" : "") + format_double(v[k]);
  return out;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_snapshot(std::ostream& out, const FieldState& state, const GridSpec& grid) {
  out.write("RDMC", 4);
  put<std::uint32_t>(out, kSnapshotVersion);
  put<std::uint64_t>(out, grid.dim());
  for (std::size_t n : grid.cells()) put<std::uint64_t>(out, n);
  put<std::uint64_t>(out, state.u.size());
  put<double>(out, state.t);
  put<double>(out, state.eps);
  for (const auto& f : state.u) {
    if (f.size() != grid.cell_count()) throw FormatError("field size does not match the grid");
    out.write(reinterpret_cast<const char*>(f.data()), static_cast<std::streamsize>(f.size() * sizeof(double)));
  }
}

void write_snapshot(const std::filesystem::path& path, const FieldState& state, const GridSpec& grid) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_snapshot(out, state, grid);
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

void write_snapshot_csv(const std::filesystem::path& path, const FieldState& state, const GridSpec& grid) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "cell";
  for (std::size_t a = 0; a < grid.dim(); ++a) out << ",x" << a;
  for (std::size_t i = 0; i < state.u.size(); ++i) out << ",u" << i + 1;
  out << '\n';
  for (std::size_t c = 0; c < grid.cell_count(); ++c) {
    out << c;
    const auto x = grid.center(c);
    for (std::size_t a = 0; a < grid.dim(); ++a) out << ',' << format_double(x[a]);
    for (const auto& f : state.u) out << ',' << format_double(f[c]);
    out << '\n';
  }
}

Snapshot read_snapshot(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, "RDMC", 4) != 0) throw FormatError("not an RDMC snapshot");
  const auto version = get<std::uint32_t>(in);
  if (version != kSnapshotVersion) throw FormatError("unsupported snapshot version " + std::to_string(version));
  const auto dim = get<std::uint64_t>(in);
  if (dim < 1 || dim > 2) throw FormatError("snapshot dimension must be 1 or 2");
  Snapshot snap;
  std::size_t count = 1;
  for (std::uint64_t a = 0; a < dim; ++a) {
    snap.cells.push_back(get<std::uint64_t>(in));
    count *= snap.cells.back();
  }
  const auto n = get<std::uint64_t>(in);
  if (n < 1 || n > 64) throw FormatError("implausible species count in snapshot");
  snap.state.t = get<double>(in);
  snap.state.eps = get<double>(in);
  snap.state.u.assign(n, Field(count));
  for (auto& f : snap.state.u)
    if (!in.read(reinterpret_cast<char*>(f.data()), static_cast<std::streamsize>(count * sizeof(double))))
      throw FormatError("snapshot payload truncated");
  return snap;
}

Snapshot read_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open snapshot " + path.string());
  return read_snapshot(in);
}

std::string snapshot_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "snap_%06zu.bin", index);
  return buf;
}

nlohmann::json trajectory_to_json(const Trajectory& traj, const std::vector<std::string>& files) {
  nlohmann::json j;
  j["steps"] = traj.steps;
  j["dt_min"] = traj.dt_min;
  j["dt_max"] = traj.dt_max;
  auto& snaps = j["snapshots"] = nlohmann::json::array();
  for (std::size_t s = 0; s < traj.snapshots.size(); ++s)
    snaps.push_back({{"t", traj.snapshots[s].t}, {"eps", traj.snapshots[s].eps}, {"file", files.at(s)}});
  j["series"] = traj.series;
  return j;
}

Trajectory load_trajectory(const std::filesystem::path& dir, const GridSpec& grid) {
  const auto meta_path = dir / "trajectory.json";
  std::ifstream in(meta_path);
  if (!in) throw FormatError("missing " + meta_path.string());
  Trajectory traj;
  try {
    const auto j = nlohmann::json::parse(in);
    traj.steps = j.at("steps").get<std::size_t>();
    traj.dt_min = j.at("dt_min").get<double>();
    traj.dt_max = j.at("dt_max").get<double>();
    traj.series = j.at("series").get<decltype(traj.series)>();
    for (const auto& s : j.at("snapshots")) {
      auto snap = read_snapshot(dir / s.at("file").get<std::string>());
      if (snap.cells != grid.cells()) throw FormatError("snapshot grid does not match the config");
      traj.snapshots.push_back(std::move(snap.state));
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("malformed trajectory.json: " + std::string(e.what()));
  }
  if (traj.snapshots.empty()) throw FormatError("trajectory has no snapshots");
  for (const auto& [key, values] : traj.series)
    if (values.size() != traj.snapshots.size()) throw FormatError("series '" + key + "' does not match the snapshots");
  return traj;
}

void write_condition_header(std::ostream& out) { out << "condition,verdict,worst_sample,worst_value,estimated_K\n"; }

void write_condition_row(std::ostream& out, const reactions::ConditionReport& r) {
  out << csv_field(r.condition) << ',' << (r.passed ? "pass" : "fail") << ',' << csv_vector(r.witness) << ','
      << format_double(r.worst_value) << ',' << (r.estimated_K ? format_double(*r.estimated_K) : "") << '\n';
}

void write_estimate_header(std::ostream& out) { out << "estimate_id,i,T,value,bound,margin,verdict,params_hash\n"; }

void write_estimate_row(std::ostream& out, const verify::EstimateRecord& rec, const std::string& params_hash) {
  out << csv_field(rec.id) << ',' << (rec.species ? std::to_string(*rec.species + 1) : "") << ',' << format_double(rec.T) << ','
      << format_double(rec.value) << ',' << (rec.bound ? format_double(*rec.bound) : "") << ','
      << format_double(rec.margin) << ',' << (rec.passed ? "pass" : "fail") << ',' << params_hash << '\n';
}

std::ofstream open_estimate_csv(const std::filesystem::path& path, bool append) {
  const bool fresh = !append || !std::filesystem::exists(path) || std::filesystem::file_size(path) == 0;
  std::ofstream out(path, append ? std::ios::app : std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  if (fresh) write_estimate_header(out);
  return out;
}

}  // namespace rdmc::io
