#include "mtb/config.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "mtb/errors.hpp"

namespace mtb {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
    char* end = nullptr;
    errno = 0;
    double x = std::strtod(v.c_str(), &end);
    if (v.empty() || *end != '\0' || errno == ERANGE || !std::isfinite(x))
        throw ConfigError("config key '" + key + "': not a finite number: '" + v + "'");
    return x;
}

long long to_integer(const std::string& key, const std::string& v) {
    char* end = nullptr;
    errno = 0;
    long long x = std::strtoll(v.c_str(), &end, 10);
    if (v.empty() || *end != '\0' || errno == ERANGE)
        throw ConfigError("config key '" + key + "': not an integer: '" + v + "'");
    return x;
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ConfigError("config key '" + key + "': expected true or false, got '" + v + "'");
}

std::string num(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> m = {
        {"a", [](RunConfig& c, const std::string& k, const std::string& v) { c.a = to_double(k, v); }},
        {"b", [](RunConfig& c, const std::string& k, const std::string& v) { c.b = to_double(k, v); }},
        {"newton_tol", [](RunConfig& c, const std::string& k, const std::string& v) { c.newton_tol = to_double(k, v); }},
        {"quadrature_tol",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.quadrature_tol = to_double(k, v); }},
        {"green_tol", [](RunConfig& c, const std::string& k, const std::string& v) { c.green_tol = to_double(k, v); }},
        {"lambda_lo", [](RunConfig& c, const std::string& k, const std::string& v) { c.lambda_lo = to_double(k, v); }},
        {"lambda_hi", [](RunConfig& c, const std::string& k, const std::string& v) { c.lambda_hi = to_double(k, v); }},
        {"lambda_n",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.lambda_n = static_cast<int>(to_integer(k, v)); }},
        {"lambda_log", [](RunConfig& c, const std::string& k, const std::string& v) { c.lambda_log = to_bool(k, v); }},
        {"seeds", [](RunConfig& c, const std::string&, const std::string& v) { c.seeds = v; }},
        {"out", [](RunConfig& c, const std::string&, const std::string& v) { c.out = v; }},
        {"seed",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             char* end = nullptr;
             errno = 0;
             unsigned long long s = std::strtoull(v.c_str(), &end, 10);
             if (v.empty() || v[0] == '-' || *end != '\0' || errno == ERANGE)
                 throw ConfigError("config key '" + k + "': not a non-negative integer: '" + v + "'");
             c.seed = s;
         }},
        {"workers",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.workers = static_cast<int>(to_integer(k, v)); }},
        {"grid", [](RunConfig& c, const std::string& k, const std::string& v) { c.grid = static_cast<int>(to_integer(k, v)); }},
        {"delta_const",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.delta_const = to_double(k, v); }},
        {"max_iter",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.max_iter = static_cast<int>(to_integer(k, v)); }},
    };
    return m;
}

}  // namespace

double RunConfig::lambda_at(int i) const {
    if (lambda_n == 1) return lambda_lo;
    const double t = static_cast<double>(i) / (lambda_n - 1);
    return lambda_log ? lambda_lo * std::pow(lambda_hi / lambda_lo, t) : lambda_lo + t * (lambda_hi - lambda_lo);
}

void validate(const RunConfig& c) {
    if (!(c.a > 0.0) || !(c.b > 0.0)) throw ConfigError("torus sides a, b must be positive");
    if (!(c.newton_tol > 0.0) || !(c.quadrature_tol > 0.0) || !(c.green_tol > 0.0))
        throw ConfigError("all tolerances must be positive");
    if (!(c.lambda_lo > 0.0) || !(c.lambda_lo < c.lambda_hi)) throw ConfigError("need 0 < lambda_lo < lambda_hi");
    if (c.lambda_n < 1) throw ConfigError("lambda_n must be at least 1");
    if (c.grid < 16 || c.grid % 2) throw ConfigError("grid must be even and at least 16");
    if (c.workers < 0) throw ConfigError("workers must be non-negative");
    if (!(c.delta_const > 0.0)) throw ConfigError("delta_const must be positive");
    if (c.max_iter < 1) throw ConfigError("max_iter must be at least 1");
    seed_selected(c.seeds, 1, BranchKind::diagonal);  // throws on a malformed spec
    if (c.out.empty()) throw ConfigError("out must not be empty");
}

RunConfig parse_config(const std::string& text) {
    RunConfig c;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        auto it = setters().find(key);
        if (it == setters().end()) throw ConfigError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
        it->second(c, key, value);
    }
    validate(c);
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot read config file " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str());
}

std::string to_text(const RunConfig& c) {
    std::ostringstream o;
    o << "a = " << num(c.a) << "\n"
      << "b = " << num(c.b) << "\n"
      << "newton_tol = " << num(c.newton_tol) << "\n"
      << "quadrature_tol = " << num(c.quadrature_tol) << "\n"
      << "green_tol = " << num(c.green_tol) << "\n"
      << "lambda_lo = " << num(c.lambda_lo) << "\n"
      << "lambda_hi = " << num(c.lambda_hi) << "\n"
      << "lambda_n = " << c.lambda_n << "\n"
      << "lambda_log = " << (c.lambda_log ? "true" : "false") << "\n"
      << "seeds = " << c.seeds << "\n"
      << "out = " << c.out << "\n"
      << "seed = " << c.seed << "\n"
      << "workers = " << c.workers << "\n"
      << "grid = " << c.grid << "\n"
      << "delta_const = " << num(c.delta_const) << "\n"
      << "max_iter = " << c.max_iter << "\n";
    return o.str();
}

std::uint64_t fnv1a(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : bytes) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

bool seed_selected(const std::string& spec, int period, BranchKind kind) {
    if (trim(spec) == "all") return true;
    std::istringstream in(spec);
    std::string item;
    bool any = false;
    bool hit = false;
    while (std::getline(in, item, ',')) {
        item = trim(item);
        const auto colon = item.find(':');
        const std::string p = item.substr(0, colon);
        const std::string k = colon == std::string::npos ? "" : item.substr(colon + 1);
        if (p.size() != 2 || p[0] != 'p' || p[1] < '1' || p[1] > '3')
            throw ConfigError("seeds: expected p1, p2 or p3 in '" + item + "'");
        if (!k.empty() && k != "diagonal" && k != "pair" && k != "pair_swapped")
            throw ConfigError("seeds: unknown branch '" + k + "'");
        any = true;
        hit = hit || (p[1] - '0' == period && (k.empty() || k == to_string(kind)));
    }
    if (!any) throw ConfigError("seeds spec is empty");
    return hit;
}

std::string config_hash(const RunConfig& c) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(to_text(c))));
    return buf;
}

}  // namespace mtb
