#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "kac/errors.hpp"

namespace kac {

/// Flat TOML-style configuration: `key = value` lines with strings, numbers
/// and booleans, `#` comments.  Sections are not needed by the runner and are
/// rejected to keep files diff-able and unambiguous.
class Config {
public:
    static Config parse(const std::string& text);
    static Config load(const std::string& path);

    bool has(const std::string& key) const { return values_.count(key) > 0; }
    void set(const std::string& key, const std::string& raw_value);

    std::string get_string(const std::string& key) const;
    long long get_int(const std::string& key) const;
    double get_double(const std::string& key) const;
    bool get_bool(const std::string& key) const;

    std::string get_string(const std::string& key, const std::string& fallback) const;
    long long get_int(const std::string& key, long long fallback) const;
    double get_double(const std::string& key, double fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;

    /// Canonical text form (sorted keys); used for hashing and the manifest.
    std::string canonical_text() const;

private:
    std::map<std::string, std::string> values_;  // raw value text, strings keep quotes
};

std::uint64_t fnv1a64(const std::string& text);

/// Reproducibility record: configuration hash, code version and seeds.
/// Timings are intentionally written to a separate file so the manifest is
/// byte-stable across reruns.
struct RunManifest {
    std::string version;
    std::string mode;
    std::uint64_t config_hash = 0;
    std::uint64_t seed = 0;
    std::string config_text;

    std::string to_toml() const;
};

inline constexpr const char* kVersion = "kac 0.1.0";

} // namespace kac
