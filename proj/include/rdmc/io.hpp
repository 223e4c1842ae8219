#pragma once

// Snapshot files, trajectory metadata and the CSV tables.
//
// Snapshot layout (little-endian): "RDMC", u32 version, u64 dim,
// u64 cells[dim], u64 N, f64 t, f64 eps, then N row-major f64 grids.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "rdmc/core.hpp"
#include "rdmc/reactions.hpp"
#include "rdmc/trajectory.hpp"
#include "rdmc/verify.hpp"

namespace rdmc::io {

inline constexpr std::uint32_t kSnapshotVersion = 1;

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void write_snapshot(std::ostream& out, const FieldState& state, const GridSpec& grid);
void write_snapshot(const std::filesystem::path& path, const FieldState& state, const GridSpec& grid);
void write_snapshot_csv(const std::filesystem::path& path, const FieldState& state, const GridSpec& grid);

struct Snapshot {
  std::vector<std::size_t> cells;
  FieldState state;
};

/// Throws FormatError on a bad magic, version or truncated payload.
Snapshot read_snapshot(std::istream& in);
Snapshot read_snapshot(const std::filesystem::path& path);

std::string snapshot_name(std::size_t index);

/// Trajectory metadata (accumulator series, step statistics, snapshot files).
nlohmann::json trajectory_to_json(const Trajectory& traj, const std::vector<std::string>& files);
/// Rebuilds a trajectory from trajectory.json and the snapshot files next to it.
/// Throws FormatError if anything is missing or inconsistent with `grid`.
Trajectory load_trajectory(const std::filesystem::path& dir, const GridSpec& grid);

/// Shortest round-trip decimal form.
std::string format_double(double v);

// CSV tables. Each writer emits the header when `header` is true.
void write_condition_header(std::ostream& out);
void write_condition_row(std::ostream& out, const reactions::ConditionReport& report);

void write_estimate_header(std::ostream& out);
void write_estimate_row(std::ostream& out, const verify::EstimateRecord& rec, const std::string& params_hash);

/// Opens `path` for appending, writing the header first if the file is new or empty.
std::ofstream open_estimate_csv(const std::filesystem::path& path, bool append);

}  // namespace rdmc::io
