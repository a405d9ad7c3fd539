#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "frontlab/model.hpp"

namespace frontlab::cli {

/// Malformed or inconsistent configuration (exit code 2).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Sectioned key/value configuration; values are lists of strings.
class Config {
public:
    static Config parse(const std::string& text);
    static Config load(const std::filesystem::path& path);

    [[nodiscard]] bool has(const std::string& section, const std::string& key) const;
    [[nodiscard]] double get_double(const std::string& section, const std::string& key, double fallback) const;
    [[nodiscard]] std::optional<double> find_double(const std::string& section, const std::string& key) const;
    [[nodiscard]] int get_int(const std::string& section, const std::string& key, int fallback) const;
    [[nodiscard]] bool get_bool(const std::string& section, const std::string& key, bool fallback) const;
    [[nodiscard]] std::string get_string(const std::string& section, const std::string& key, const std::string& fallback) const;
    [[nodiscard]] std::vector<double> get_list(const std::string& section, const std::string& key) const;

    /// Sorted `[section] key = v1, v2` lines; independent of file layout, comments and key order.
    [[nodiscard]] std::string canonical() const;

    void set(const std::string& section, const std::string& key, std::vector<std::string> values);

private:
    [[nodiscard]] const std::vector<std::string>* find(const std::string& section, const std::string& key) const;
    std::map<std::string, std::map<std::string, std::vector<std::string>>> values_;
};

/// 64-bit FNV-1a.
std::uint64_t fnv1a(const std::string& bytes);
std::string hex_digest(std::uint64_t value);

/// [model]: preset = fkpp | efkpp | cubic (with delta), or order_half, p, f, u_minus.
ModelSpec model_from_config(const Config& config);
/// A family for delta sweeps: "efkpp" or "cubic".
ModelFamily family_from_name(const std::string& name);

}  // namespace frontlab::cli
