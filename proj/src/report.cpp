#include "mtb/report.hpp"

#include <bit>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "mtb/errors.hpp"

#ifndef MTB_VERSION
#define MTB_VERSION "0.0.0"
#endif

namespace mtb {

namespace {

void make_parent(const std::string& path) {
    std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
}

std::ofstream open_out(const std::string& path, std::ios::openmode mode = std::ios::out) {
    make_parent(path);
    std::ofstream f(path, mode);
    if (!f) throw ConfigError("cannot write " + path);
    return f;
}

}  // namespace

const char* tool_version() { return MTB_VERSION; }

std::string timestamp_now() {
    std::time_t t = std::time(nullptr);
    if (const char* s = std::getenv("SOURCE_DATE_EPOCH")) t = static_cast<std::time_t>(std::strtoll(s, nullptr, 10));
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

nlohmann::json make_envelope(const std::string& command, const RunConfig& cfg, const std::string& started,
                             nlohmann::json reports) {
    nlohmann::json j;
    j["tool"] = "mtb";
    j["version"] = tool_version();
    j["command"] = command;
    j["config_hash"] = config_hash(cfg);
    j["config"] = to_text(cfg);
    j["started"] = started;
    j["finished"] = timestamp_now();
    j["reports"] = std::move(reports);
    return j;
}

void write_json(const std::string& path, const nlohmann::json& j) { open_out(path) << j.dump(2) << "\n"; }

void write_columns(const std::string& path, const std::vector<std::string>& header,
                   const std::vector<std::vector<double>>& rows) {
    std::ofstream f = open_out(path);
    f << "#";
    for (std::size_t i = 0; i < header.size(); ++i) f << (i ? "\t" : " ") << header[i];
    f << "\n";
    char buf[40];
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.17g", row[i]);
            f << (i ? "\t" : "") << buf;
        }
        f << "\n";
    }
}

void write_field(const std::string& base, const Field& f, const PeriodicGrid& grid, const nlohmann::json& meta) {
    static_assert(std::endian::native == std::endian::little, "field files are written little-endian");
    if (f.size() != grid.size()) throw ConfigError("field size does not match the grid");
    {
        std::ofstream h = open_out(base + ".hdr");
        char buf[64];
        h << "format = mtb-field-1\n";
        h << "encoding = float64-le\n";
        h << "nx = " << grid.nx() << "\n";
        h << "ny = " << grid.ny() << "\n";
        std::snprintf(buf, sizeof buf, "%.17g", grid.geometry().a());
        h << "a = " << buf << "\n";
        std::snprintf(buf, sizeof buf, "%.17g", grid.geometry().b());
        h << "b = " << buf << "\n";
        h << "meta = " << meta.dump() << "\n";
    }
    std::ofstream b = open_out(base + ".bin", std::ios::binary);
    b.write(reinterpret_cast<const char*>(f.data()), static_cast<std::streamsize>(f.size() * sizeof(double)));
}

Field read_field(const std::string& base, FieldHeader* header) {
    std::ifstream h(base + ".hdr");
    if (!h) throw ConfigError("cannot read " + base + ".hdr");
    FieldHeader fh;
    std::string line;
    bool format_ok = false;
    while (std::getline(h, line)) {
        const auto eq = line.find(" = ");
        if (eq == std::string::npos) continue;
        const std::string k = line.substr(0, eq);
        const std::string v = line.substr(eq + 3);
        if (k == "format") format_ok = v == "mtb-field-1";
        else if (k == "nx") fh.nx = std::stoi(v);
        else if (k == "ny") fh.ny = std::stoi(v);
        else if (k == "a") fh.a = std::stod(v);
        else if (k == "b") fh.b = std::stod(v);
        else if (k == "meta") fh.meta = nlohmann::json::parse(v);
    }
    if (!format_ok || fh.nx <= 0 || fh.ny <= 0) throw ConfigError("malformed field header " + base + ".hdr");
    Field f(static_cast<std::size_t>(fh.nx) * fh.ny);
    std::ifstream b(base + ".bin", std::ios::binary);
    b.read(reinterpret_cast<char*>(f.data()), static_cast<std::streamsize>(f.size() * sizeof(double)));
    if (!b || b.peek() != std::char_traits<char>::eof()) throw ConfigError("field data size mismatch in " + base + ".bin");
    if (header) *header = std::move(fh);
    return f;
}

}  // namespace mtb
