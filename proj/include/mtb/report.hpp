#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "mtb/config.hpp"
#include "mtb/spectral.hpp"

namespace mtb {

const char* tool_version();

/// UTC time in ISO 8601. SOURCE_DATE_EPOCH, when set, replaces the clock so that reports are
/// reproducible byte for byte.
std::string timestamp_now();

/// {tool, version, command, config_hash, config, started, finished, reports}
nlohmann::json make_envelope(const std::string& command, const RunConfig& cfg, const std::string& started,
                             nlohmann::json reports);

/// Pretty-printed JSON with a trailing newline. Creates parent directories.
void write_json(const std::string& path, const nlohmann::json& j);

/// Tab-separated columns with a '#' header line; doubles with 17 significant digits.
void write_columns(const std::string& path, const std::vector<std::string>& header,
                   const std::vector<std::vector<double>>& rows);

struct FieldHeader {
    int nx = 0;
    int ny = 0;
    double a = 1.0;
    double b = 1.0;
    nlohmann::json meta;
};

/// base + ".bin" holds nx*ny little-endian float64 values (x fastest); base + ".hdr" the
/// plain-text header.
void write_field(const std::string& base, const Field& f, const PeriodicGrid& grid,
                 const nlohmann::json& meta = nlohmann::json::object());
Field read_field(const std::string& base, FieldHeader* header = nullptr);

}  // namespace mtb
