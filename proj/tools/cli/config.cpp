#include "cli/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <CLI11.hpp>

namespace frontlab::cli {

namespace {

double to_double(const std::string& section, const std::string& key, const std::string& text) {
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("[" + section + "] " + key + ": '" + text + "' is not a number");
    }
}

}  // namespace

Config Config::parse(const std::string& text) {
    std::istringstream in(text);
    std::vector<CLI::ConfigItem> items;
    try {
        items = CLI::ConfigINI().from_config(in);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("unreadable config: ") + e.what());
    }
    Config c;
    for (const auto& item : items) {
        if (item.name == "++" || item.name == "--") continue;
        if (item.parents.size() > 1) throw ConfigError("nested sections are not supported: " + item.fullname());
        const std::string section = item.parents.empty() ? "" : item.parents.front();
        std::vector<std::string> inputs;
        for (const auto& v : item.inputs)
            if (!v.empty()) inputs.push_back(v);
        c.values_[section][item.name] = std::move(inputs);
    }
    return c;
}

Config Config::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

const std::vector<std::string>* Config::find(const std::string& section, const std::string& key) const {
    const auto s = values_.find(section);
    if (s == values_.end()) return nullptr;
    const auto k = s->second.find(key);
    return k == s->second.end() ? nullptr : &k->second;
}

bool Config::has(const std::string& section, const std::string& key) const { return find(section, key) != nullptr; }

std::optional<double> Config::find_double(const std::string& section, const std::string& key) const {
    const auto* v = find(section, key);
    if (!v) return std::nullopt;
    if (v->size() != 1) throw ConfigError("[" + section + "] " + key + ": expected a single number");
    return to_double(section, key, v->front());
}

double Config::get_double(const std::string& section, const std::string& key, double fallback) const {
    return find_double(section, key).value_or(fallback);
}

int Config::get_int(const std::string& section, const std::string& key, int fallback) const {
    const auto v = find_double(section, key);
    if (!v) return fallback;
    if (*v != std::round(*v) || std::abs(*v) > 2e9) throw ConfigError("[" + section + "] " + key + ": expected an integer");
    return static_cast<int>(*v);
}

bool Config::get_bool(const std::string& section, const std::string& key, bool fallback) const {
    const auto* v = find(section, key);
    if (!v) return fallback;
    if (v->size() == 1) {
        const auto& s = v->front();
        if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
        if (s == "false" || s == "0" || s == "no" || s == "off") return false;
    }
    throw ConfigError("[" + section + "] " + key + ": expected true or false");
}

std::string Config::get_string(const std::string& section, const std::string& key, const std::string& fallback) const {
    const auto* v = find(section, key);
    if (!v) return fallback;
    if (v->size() != 1) throw ConfigError("[" + section + "] " + key + ": expected a single value");
    return v->front();
}

std::vector<double> Config::get_list(const std::string& section, const std::string& key) const {
    const auto* v = find(section, key);
    if (!v) return {};
    std::vector<double> out;
    for (const auto& s : *v) out.push_back(to_double(section, key, s));
    return out;
}

std::string Config::canonical() const {
    std::string out;
    for (const auto& [section, keys] : values_)
        for (const auto& [key, vals] : keys) {
            out += "[" + section + "] " + key + " =";
            for (const auto& v : vals) out += " " + v;
            out += "\n";
        }
    return out;
}

void Config::set(const std::string& section, const std::string& key, std::vector<std::string> values) {
    values_[section][key] = std::move(values);
}

std::uint64_t fnv1a(const std::string& bytes) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char ch : bytes) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string hex_digest(std::uint64_t value) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
    return buf;
}

ModelFamily family_from_name(const std::string& name) {
    if (name == "efkpp") return models::efkpp_family();
    if (name == "cubic") return models::cubic_family();
    throw ConfigError("unknown model family '" + name + "' (expected efkpp or cubic)");
}

ModelSpec model_from_config(const Config& config) {
    const std::string preset = config.get_string("model", "preset", "");
    if (!preset.empty()) {
        if (preset == "fkpp") return models::fkpp();
        const auto delta = config.find_double("model", "delta");
        if (!delta) throw ConfigError("[model] preset '" + preset + "' needs delta");
        return family_from_name(preset)(*delta);
    }
    ModelSpec spec;
    spec.order_half = config.get_int("model", "order_half", 1);
    spec.p = config.get_list("model", "p");
    spec.f = config.get_list("model", "f");
    spec.u_minus = config.get_double("model", "u_minus", 1.0);
    if (spec.p.empty()) throw ConfigError("[model] p is empty");
    if (spec.f.empty()) throw ConfigError("[model] f is empty");
    return spec;
}

}  // namespace frontlab::cli
