#include "kac/config.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

namespace kac {

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::string strip_quotes(const std::string& raw) {
    if (raw.size() >= 2 && raw.front() == '"' && raw.back() == '"')
        return raw.substr(1, raw.size() - 2);
    return raw;
}

} // namespace

Config Config::parse(const std::string& text) {
    Config cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        if (t[0] == '[')
            throw usage_error("config: sections are not supported (line " +
                              std::to_string(lineno) + ")");
        size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw usage_error("config: expected key = value (line " + std::to_string(lineno) + ")");
        std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        // strip trailing comment outside quotes
        if (!value.empty() && value[0] != '"') {
            size_t hash = value.find('#');
            if (hash != std::string::npos) value = trim(value.substr(0, hash));
        }
        if (key.empty() || value.empty())
            throw usage_error("config: empty key or value (line " + std::to_string(lineno) + ")");
        cfg.values_[key] = value;
    }
    return cfg;
}

Config Config::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw usage_error("config: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

void Config::set(const std::string& key, const std::string& raw_value) {
    values_[key] = raw_value;
}

std::string Config::get_string(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw usage_error("config: missing key '" + key + "'");
    return strip_quotes(it->second);
}

long long Config::get_int(const std::string& key) const {
    const std::string raw = get_string(key);
    try {
        size_t pos = 0;
        long long v = std::stoll(raw, &pos);
        if (pos != raw.size()) throw std::invalid_argument(raw);
        return v;
    } catch (const std::exception&) {
        throw usage_error("config: key '" + key + "' is not an integer: " + raw);
    }
}

double Config::get_double(const std::string& key) const {
    const std::string raw = get_string(key);
    try {
        size_t pos = 0;
        double v = std::stod(raw, &pos);
        if (pos != raw.size()) throw std::invalid_argument(raw);
        return v;
    } catch (const std::exception&) {
        throw usage_error("config: key '" + key + "' is not a number: " + raw);
    }
}

bool Config::get_bool(const std::string& key) const {
    const std::string raw = get_string(key);
    if (raw == "true") return true;
    if (raw == "false") return false;
    throw usage_error("config: key '" + key + "' is not a boolean: " + raw);
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
    return has(key) ? get_string(key) : fallback;
}
long long Config::get_int(const std::string& key, long long fallback) const {
    return has(key) ? get_int(key) : fallback;
}
double Config::get_double(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
}
bool Config::get_bool(const std::string& key, bool fallback) const {
    return has(key) ? get_bool(key) : fallback;
}

std::string Config::canonical_text() const {
    std::ostringstream out;
    for (const auto& [k, v] : values_) out << k << " = " << v << "\n";
    return out.str();
}

std::uint64_t fnv1a64(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string RunManifest::to_toml() const {
    std::ostringstream out;
    char hash_hex[32];
    std::snprintf(hash_hex, sizeof(hash_hex), "%016llx",
                  static_cast<unsigned long long>(config_hash));
    out << "version = \"" << version << "\"\n";
    out << "mode = \"" << mode << "\"\n";
    out << "config_hash = \"" << hash_hex << "\"\n";
    out << "seed = " << seed << "\n";
    out << "# resolved configuration\n";
    std::istringstream cfg(config_text);
    std::string line;
    while (std::getline(cfg, line)) out << "# " << line << "\n";
    return out.str();
}

} // namespace kac
