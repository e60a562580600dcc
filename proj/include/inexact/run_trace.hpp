#pragma once

#include <json.hpp>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace inexact {

struct TraceRecord {
  std::size_t iteration = 0;
  std::vector<std::pair<std::string, double>> metrics;

  std::optional<double> get(const std::string& name) const;
};

/// Per-iteration log shared by every solver. Iteration indices must strictly
/// increase; metadata is frozen once `finish` is called.
class RunTrace {
 public:
  RunTrace() = default;
  explicit RunTrace(std::string solver) : solver_(std::move(solver)) {}

  void add(std::size_t iteration, std::vector<std::pair<std::string, double>> metrics);

  void set_config(nlohmann::json config);
  void set_seed(std::uint64_t seed);
  void finish(double wall_seconds);

  bool finished() const noexcept { return finished_; }
  const std::string& solver() const noexcept { return solver_; }
  const nlohmann::json& config() const noexcept { return config_; }
  std::optional<std::uint64_t> seed() const noexcept { return seed_; }
  double wall_seconds() const noexcept { return wall_seconds_; }

  const std::vector<TraceRecord>& records() const noexcept { return records_; }
  std::size_t size() const noexcept { return records_.size(); }
  bool empty() const noexcept { return records_.empty(); }

  /// Values of one metric across all records that carry it.
  std::vector<double> series(const std::string& name) const;

  nlohmann::json metadata_json() const;

  /// One line per record: `k,name=value,...` with 17 significant digits.
  void write_lines(std::ostream& os) const;

 private:
  void check_open() const;

  std::string solver_;
  nlohmann::json config_ = nlohmann::json::object();
  std::optional<std::uint64_t> seed_;
  double wall_seconds_ = 0.0;
  bool finished_ = false;
  std::vector<TraceRecord> records_;
};

/// Formats a double with 17 significant digits.
std::string format_double(double value);

}  // namespace inexact
