#pragma once

#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "rdmc/core.hpp"

namespace rdmc {

/// What an accumulator sees once per time step: the state at the start of the
/// step, the regularized reaction evaluated on it, and the step length.
/// `begin` receives the initial state with dt == 0; `after_step` receives the
/// state at the end of the step with dt the step just taken.
struct StepContext {
  const GridSpec& grid;
  const ReactionSystem& system;
  const FieldState& state;
  std::span<const Field> reaction;  // regularized reaction, reaction[i][cell]
  double dt = 0.0;
};

/// Running space-time integral updated by the solver's time loop.
class Accumulator {
 public:
  virtual ~Accumulator() = default;
  virtual void begin(const StepContext&) {}
  virtual void observe(const StepContext& ctx) = 0;
  virtual void after_step(const StepContext&) {}
  /// Write the current value of every key this accumulator owns.
  virtual void emit(std::map<std::string, std::vector<double>>& out) const = 0;
};

using AccumulatorList = std::vector<std::unique_ptr<Accumulator>>;

struct Trajectory {
  std::vector<FieldState> snapshots;
  /// series[key][snapshot] holds the accumulator value at that snapshot time.
  std::map<std::string, std::vector<std::vector<double>>> series;
  std::size_t steps = 0;
  double dt_min = 0.0;
  double dt_max = 0.0;
  std::vector<double> dts;  // every step length, in order

  double horizon() const { return snapshots.empty() ? 0.0 : snapshots.back().t; }

  /// Final value of an accumulator; throws std::out_of_range if not recorded.
  const std::vector<double>& final_value(const std::string& key) const;
  bool has(const std::string& key) const { return series.count(key) != 0; }
};

}  // namespace rdmc
