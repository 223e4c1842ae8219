#pragma once

// The four entry points of the rdmc command line tool.
// Exit codes: 0 pass, 1 check or verification failure, 2 usage or config error.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace rdmc::cli {

inline constexpr int kExitPass = 0;
inline constexpr int kExitFail = 1;
inline constexpr int kExitUsage = 2;

struct Options {
  std::string config;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::size_t threads = 1;
};

int cmd_check(const Options& opts, std::ostream& out, std::ostream& err);
int cmd_run(const Options& opts, std::ostream& out, std::ostream& err);
int cmd_verify(const Options& opts, std::ostream& out, std::ostream& err);
int cmd_sweep(const Options& opts, std::ostream& out, std::ostream& err);

/// --threads if given, else RDMC_THREADS, else 1.
std::size_t resolve_threads(std::optional<std::size_t> flag);

/// Full argument handling; args excludes the program name.
int main_entry(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rdmc::cli
