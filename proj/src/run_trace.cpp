#include "inexact/run_trace.hpp"

#include <cstdio>
#include <ostream>

#include "inexact/errors.hpp"

namespace inexact {

std::optional<double> TraceRecord::get(const std::string& name) const {
  for (const auto& [key, value] : metrics) {
    if (key == name) return value;
  }
  return std::nullopt;
}

void RunTrace::add(std::size_t iteration, std::vector<std::pair<std::string, double>> metrics) {
  if (!records_.empty() && iteration <= records_.back().iteration) {
    throw std::logic_error("trace iteration indices must strictly increase");
  }
  records_.push_back(TraceRecord{iteration, std::move(metrics)});
}

void RunTrace::check_open() const {
  if (finished_) throw std::logic_error("trace metadata is immutable after the run");
}

void RunTrace::set_config(nlohmann::json config) {
  check_open();
  config_ = std::move(config);
}

void RunTrace::set_seed(std::uint64_t seed) {
  check_open();
  seed_ = seed;
}

void RunTrace::finish(double wall_seconds) {
  check_open();
  wall_seconds_ = wall_seconds;
  finished_ = true;
}

std::vector<double> RunTrace::series(const std::string& name) const {
  std::vector<double> out;
  out.reserve(records_.size());
  for (const auto& r : records_) {
    if (auto v = r.get(name)) out.push_back(*v);
  }
  return out;
}

nlohmann::json RunTrace::metadata_json() const {
  nlohmann::json j;
  j["solver"] = solver_;
  j["config"] = config_;
  j["seed"] = seed_ ? nlohmann::json(*seed_) : nlohmann::json(nullptr);
  j["wall_seconds"] = wall_seconds_;
  j["records"] = records_.size();
  return j;
}

void RunTrace::write_lines(std::ostream& os) const {
  for (const auto& r : records_) {
    os << r.iteration;
    for (const auto& [key, value] : r.metrics) os << ',' << key << '=' << format_double(value);
    os << '\n';
  }
}

std::string format_double(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

}  // namespace inexact
