#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "inexact/bregman.hpp"
#include "inexact/run_trace.hpp"

namespace inexact::harness {

/// Reads a rectangular numeric CSV. A first line containing a non-numeric field
/// is taken as a header and skipped.
Matrix read_csv_matrix(const std::filesystem::path& path);

/// Reads every entry of a CSV in row-major order.
Vector read_csv_vector(const std::filesystem::path& path);

/// Row-major CSV with 17 significant digits.
std::string to_csv(const Matrix& m);

/// Writes through a temporary sibling file and renames it into place.
void write_text_atomic(const std::filesystem::path& path, const std::string& text);

void write_csv(const std::filesystem::path& path, const Matrix& m);
void write_csv_vector(const std::filesystem::path& path, const Vector& v);
void write_json(const std::filesystem::path& path, const nlohmann::json& j);

/// `<stem>.txt` with one record per line and `<stem>_meta.json` with the
/// metadata minus the wall time. A given seed overrides the recorded one.
void write_trace(const std::filesystem::path& dir, const std::string& stem, const RunTrace& trace,
                 std::optional<std::uint64_t> seed = std::nullopt);

}  // namespace inexact::harness
