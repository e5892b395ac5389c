#include "qes/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace qes::cli {

namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    auto e = s.find_last_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) out.push_back(trim(item));
    if (!out.empty() && out.back().empty()) out.pop_back();
    return out;
}

double to_double(const std::string& v, const std::string& key) {
    try {
        std::size_t pos = 0;
        double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("value for '" + key + "' is not a number: " + v);
    }
}

int to_int(const std::string& v, const std::string& key) {
    try {
        std::size_t pos = 0;
        int x = std::stoi(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("value for '" + key + "' is not an integer: " + v);
    }
}

models::Family parse_family(const std::string& v) {
    if (v == "cubic") return models::Family::InverseCubic;
    if (v == "quartic") return models::Family::InverseQuartic;
    if (v == "quintic") return models::Family::InverseQuintic;
    if (v == "sextic") return models::Family::InverseSextic;
    throw ConfigError("unknown family: " + v + " (expected cubic|quartic|quintic|sextic)");
}

models::CaseTag parse_case(const std::string& v) {
    if (v == "oscillator") return models::CaseTag::OscillatorLike;
    if (v == "coulomb") return models::CaseTag::CoulombLike;
    if (v == "plain") return models::CaseTag::Plain;
    throw ConfigError("unknown case: " + v + " (expected oscillator|coulomb|plain)");
}

} // namespace

models::PotentialModel JobConfig::model() const {
    auto get = [&](char c) {
        auto it = coefficients.find(c);
        return it == coefficients.end() ? 0.0 : it->second;
    };
    return models::make_model(family, get('a'), get('b'), get('d'), get('e'), get('f'), get('g'),
                              get('h'), M, m);
}

JobConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);

    JobConfig cfg;
    bool have_family = false;
    std::string section = "model";
    std::string line;
    std::map<char, double> raw_coeffs;

    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[' && line.back() == ']') {
            section = trim(line.substr(1, line.size() - 2));
            if (section != "model" && section != "job" && section != "grid" &&
                section != "degeneration")
                throw ConfigError("unknown section [" + section + "]");
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        if (key.empty() || val.empty())
            throw ConfigError("line " + std::to_string(lineno) + ": empty key or value");

        if (section == "model") {
            if (key == "family") {
                cfg.family = parse_family(val);
                have_family = true;
            } else if (key == "case") {
                cfg.case_tag = parse_case(val);
            } else if (key == "M") {
                cfg.M = to_double(val, key);
            } else if (key == "m") {
                cfg.m = to_int(val, key);
            } else if (key.size() == 1) {
                raw_coeffs[key[0]] = to_double(val, key);
            } else {
                throw ConfigError("unknown model key: " + key);
            }
        } else if (section == "job") {
            if (key == "levels") {
                cfg.levels.clear();
                for (const auto& tok : split(val, ','))
                    if (!tok.empty()) cfg.levels.push_back(to_int(tok, key));
                for (int n : cfg.levels)
                    if (n < 0) throw ConfigError("levels must be non-negative");
            } else if (key == "free") {
                if (val.size() != 1) throw ConfigError("free must name one coefficient letter");
                cfg.free_coefficient = val[0];
            } else if (key == "window") {
                auto parts = split(val, ',');
                if (parts.size() != 2) throw ConfigError("window must be 'lo,hi'");
                cfg.window = {to_double(parts[0], key), to_double(parts[1], key)};
            } else if (key == "samples") {
                cfg.samples = to_int(val, key);
            } else if (key == "out") {
                cfg.out_dir = val;
            } else if (key == "verify") {
                cfg.verify_checks = split(val, ',');
            } else {
                throw ConfigError("unknown job key: " + key);
            }
        } else if (section == "grid") {
            if (key == "rmin")
                cfg.grid.r_min = to_double(val, key);
            else if (key == "rmax")
                cfg.grid.r_max = to_double(val, key);
            else if (key == "count")
                cfg.grid.count = to_int(val, key);
            else if (key == "spacing")
                cfg.grid.spacing = val == "uniform" ? numeric::RadialGrid::Spacing::Uniform
                                                    : numeric::RadialGrid::Spacing::Log;
            else
                throw ConfigError("unknown grid key: " + key);
        } else { // degeneration
            if (key == "scales") {
                for (const auto& tok : split(val, ','))
                    cfg.degeneration_scales.push_back(to_double(tok, key));
            } else if (key == "levels") {
                for (const auto& tok : split(val, ','))
                    cfg.degeneration_levels.push_back(to_int(tok, key));
            } else {
                throw ConfigError("unknown degeneration key: " + key);
            }
        }
    }
    if (!have_family) throw ConfigError("config must set family in [model]");

    // coefficient keys must belong to the family schema
    auto allowed = models::family_coefficients(cfg.family);
    for (const auto& [c, v] : raw_coeffs) {
        if (std::find(allowed.begin(), allowed.end(), c) == allowed.end())
            throw ConfigError(std::string("coefficient '") + c + "' is not used by the " +
                              models::family_name(cfg.family) + " family");
        cfg.coefficients[c] = v;
    }
    if (cfg.free_coefficient) {
        char fc = *cfg.free_coefficient;
        if (std::find(allowed.begin(), allowed.end(), fc) == allowed.end())
            throw ConfigError(std::string("free coefficient '") + fc +
                              "' is not used by this family");
    }
    return cfg;
}

} // namespace qes::cli
