#include "mdsenbd/cli/config.hpp"

#include "mdsenbd/errors.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>

namespace mdsenbd::cli {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::string where(const std::string& section, const std::string& key) { return "[" + section + "] " + key; }

double parse_real(const std::string& text, const std::string& context) {
    const std::string t = lower(trim(text));
    if (t == "inf" || t == "+inf" || t == "infinity") {
        return kInfinity;
    }
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (t.empty() || end != t.c_str() + t.size() || std::isnan(v)) {
        throw ConfigError(context + ": '" + text + "' is not a number");
    }
    return v;
}

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, sep)) {
        out.push_back(trim(item));
    }
    if (!text.empty() && text.back() == sep) {
        out.emplace_back();
    }
    return out;
}

Config from_ptree(const boost::property_tree::ptree& tree) {
    Config config;
    for (const auto& [section, body] : tree) {
        if (body.empty() && !body.data().empty()) {
            throw ConfigError("key '" + section + "' appears outside any [section]");
        }
        for (const auto& [key, value] : body) {
            config.set_override(section + "." + key + "=" + value.data());
        }
    }
    return config;
}

}  // namespace

Config Config::from_file(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) {
        throw IoError("config file '" + path.string() + "' does not exist");
    }
    boost::property_tree::ptree tree;
    try {
        boost::property_tree::read_ini(path.string(), tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError(std::string("cannot parse config: ") + e.what());
    }
    return from_ptree(tree);
}

Config Config::from_string(const std::string& text) {
    boost::property_tree::ptree tree;
    std::istringstream in(text);
    try {
        boost::property_tree::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError(std::string("cannot parse config: ") + e.what());
    }
    return from_ptree(tree);
}

void Config::set_override(const std::string& assignment) {
    const auto eq = assignment.find('=');
    const auto dot = assignment.find('.');
    if (eq == std::string::npos || dot == std::string::npos || dot > eq) {
        throw ConfigError("override '" + assignment + "' is not of the form section.key=value");
    }
    const std::string section = trim(assignment.substr(0, dot));
    const std::string key = trim(assignment.substr(dot + 1, eq - dot - 1));
    if (section.empty() || key.empty()) {
        throw ConfigError("override '" + assignment + "' has an empty section or key");
    }
    values_[section][key] = trim(assignment.substr(eq + 1));
}

bool Config::has(const std::string& section, const std::string& key) const { return raw(section, key).has_value(); }

std::optional<std::string> Config::raw(const std::string& section, const std::string& key) const {
    const auto s = values_.find(section);
    if (s == values_.end()) {
        return std::nullopt;
    }
    const auto k = s->second.find(key);
    if (k == s->second.end()) {
        return std::nullopt;
    }
    return k->second;
}

void Config::record(const std::string& section, const std::string& key, const std::string& value) {
    resolved_[section][key] = value;
}

std::string Config::get_string(const std::string& section, const std::string& key, const std::string& fallback) {
    const std::string v = raw(section, key).value_or(fallback);
    record(section, key, v);
    return v;
}

std::optional<std::string> Config::get_optional(const std::string& section, const std::string& key) {
    auto v = raw(section, key);
    if (v) {
        record(section, key, *v);
    }
    return v;
}

double Config::get_double(const std::string& section, const std::string& key, double fallback) {
    const auto v = raw(section, key);
    const double out = v ? parse_real(*v, where(section, key)) : fallback;
    record(section, key, format_number(out));
    return out;
}

std::int64_t Config::get_int(const std::string& section, const std::string& key, std::int64_t fallback) {
    const auto v = raw(section, key);
    std::int64_t out = fallback;
    if (v) {
        const std::string t = trim(*v);
        const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
        if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
            throw ConfigError(where(section, key) + ": '" + *v + "' is not an integer");
        }
    }
    record(section, key, std::to_string(out));
    return out;
}

std::size_t Config::get_size(const std::string& section, const std::string& key, std::size_t fallback) {
    const auto v = get_int(section, key, static_cast<std::int64_t>(fallback));
    if (v < 0) {
        throw ConfigError(where(section, key) + " must be nonnegative");
    }
    return static_cast<std::size_t>(v);
}

std::uint64_t Config::get_seed(const std::string& section, const std::string& key, std::uint64_t fallback) {
    const auto v = raw(section, key);
    std::uint64_t out = fallback;
    if (v) {
        const std::string t = trim(*v);
        const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
        if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
            throw ConfigError(where(section, key) + ": '" + *v + "' is not an unsigned integer");
        }
    }
    record(section, key, std::to_string(out));
    return out;
}

bool Config::get_bool(const std::string& section, const std::string& key, bool fallback) {
    const auto v = raw(section, key);
    bool out = fallback;
    if (v) {
        const std::string t = lower(trim(*v));
        if (t == "true" || t == "1" || t == "yes" || t == "on") {
            out = true;
        } else if (t == "false" || t == "0" || t == "no" || t == "off") {
            out = false;
        } else {
            throw ConfigError(where(section, key) + ": '" + *v + "' is not a boolean");
        }
    }
    record(section, key, out ? "true" : "false");
    return out;
}

std::optional<std::vector<double>> Config::get_list(const std::string& section, const std::string& key) {
    const auto v = raw(section, key);
    if (!v) {
        return std::nullopt;
    }
    std::vector<double> out;
    for (const auto& item : split(*v, ',')) {
        out.push_back(parse_real(item, where(section, key)));
    }
    record(section, key, *v);
    return out;
}

std::optional<std::vector<std::vector<double>>> Config::get_matrix(const std::string& section, const std::string& key) {
    const auto v = raw(section, key);
    if (!v) {
        return std::nullopt;
    }
    std::vector<std::vector<double>> out;
    for (const auto& row : split(*v, ';')) {
        std::vector<double> r;
        for (const auto& item : split(row, ',')) {
            r.push_back(parse_real(item, where(section, key)));
        }
        out.push_back(std::move(r));
    }
    record(section, key, *v);
    return out;
}

void Config::reject_unused(const std::set<std::string>& sections) const {
    for (const auto& [section, keys] : values_) {
        if (!sections.contains(section)) {
            continue;
        }
        const auto r = resolved_.find(section);
        for (const auto& [key, value] : keys) {
            if (r == resolved_.end() || !r->second.contains(key)) {
                throw ConfigError("unknown key " + where(section, key));
            }
        }
    }
}

namespace {

Eigen::VectorXd to_vector(const std::vector<double>& v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Eigen::MatrixXd to_matrix(const std::vector<std::vector<double>>& rows, std::size_t d, const std::string& key) {
    if (rows.size() != d) {
        throw ConfigError("[model] " + key + " has " + std::to_string(rows.size()) + " rows, expected " +
                          std::to_string(d));
    }
    const auto di = static_cast<Eigen::Index>(d);
    Eigen::MatrixXd m(di, di);
    for (std::size_t i = 0; i < d; ++i) {
        if (rows[i].size() != d) {
            throw ConfigError("[model] " + key + " row " + std::to_string(i + 1) + " has " +
                              std::to_string(rows[i].size()) + " entries, expected " + std::to_string(d));
        }
        for (std::size_t j = 0; j < d; ++j) {
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
        }
    }
    return m;
}

}  // namespace

ModelSpec read_model(Config& config) {
    const Family family = parse_family(config.get_string("model", "family", "SE_NBD"));
    const auto m0 = config.get_list("model", "baseline_mean");
    if (!m0 || m0->empty()) {
        throw ConfigError("[model] baseline_mean is required");
    }
    const std::size_t d = m0->size();

    std::vector<std::optional<double>> k0(d);
    if (const auto shapes = config.get_list("model", "dispersion_shape")) {
        if (shapes->size() != d) {
            throw ConfigError("[model] dispersion_shape needs " + std::to_string(d) + " entries");
        }
        for (std::size_t i = 0; i < d; ++i) {
            if (std::isfinite((*shapes)[i])) {
                k0[i] = (*shapes)[i];
            }
        }
    } else if (family != Family::hawkes && family != Family::md_hawkes) {
        throw ConfigError("[model] dispersion_shape is required for family " + std::string(to_string(family)));
    }

    Eigen::VectorXd decay = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d));
    if (const auto r = config.get_list("model", "decay")) {
        if (r->size() != d) {
            throw ConfigError("[model] decay needs " + std::to_string(d) + " entries");
        }
        decay = to_vector(*r);
    }

    const auto s = config.get_matrix("model", "interaction");
    const auto l0 = config.get_matrix("model", "interaction_scale");
    if (s && l0) {
        throw ConfigError("[model] give either interaction or interaction_scale, not both");
    }
    ModelSpec spec;
    try {
        if (l0) {
            spec.family = family;
            spec.baseline_mean = to_vector(*m0);
            spec.dispersion_shape = k0;
            spec.interaction_scale = to_matrix(*l0, d, "interaction_scale");
            spec.decay = decay;
            spec.validate();
        } else {
            const auto di = static_cast<Eigen::Index>(d);
            const Eigen::MatrixXd smat = s ? to_matrix(*s, d, "interaction") : Eigen::MatrixXd::Zero(di, di);
            spec = spec_from_interaction(family, to_vector(*m0), k0, smat, decay);
        }
    } catch (const DomainError& e) {
        throw ConfigError(std::string("[model] ") + e.what());
    }
    return spec;
}

std::vector<std::string> read_sector_names(Config& config, std::size_t dimension) {
    const auto names = config.get_optional("model", "sector_names");
    if (!names) {
        return default_sector_names(dimension);
    }
    auto out = split(*names, ',');
    if (out.size() != dimension) {
        throw ConfigError("[model] sector_names needs " + std::to_string(dimension) + " entries");
    }
    return out;
}

FitConfig read_fit_config(Config& config,
                          const std::string& section,
                          Family family,
                          std::size_t dimension,
                          EdgeSelection default_selection) {
    FitConfig fc;
    fc.family = family;
    fc.multistart = config.get_size(section, "multistart", fc.multistart);
    fc.tolerance = config.get_double(section, "tolerance", fc.tolerance);
    fc.max_iterations = config.get_size(section, "max_iterations", fc.max_iterations);
    fc.edge_selection = parse_edge_selection(config.get_string(section, "edge_selection", std::string(to_string(default_selection))));

    const bool has_m0_lower = config.has(section, "baseline_mean_lower");
    const bool has_m0_upper = config.has(section, "baseline_mean_upper");
    if (has_m0_lower != has_m0_upper) {
        throw ConfigError("[" + section + "] give both baseline_mean_lower and baseline_mean_upper or neither");
    }
    if (has_m0_lower) {
        fc.bounds.baseline_mean = ParameterBounds{config.get_double(section, "baseline_mean_lower", 0.0),
                                                  config.get_double(section, "baseline_mean_upper", 0.0)};
    }
    auto& b = fc.bounds;
    b.dispersion_shape.lower = config.get_double(section, "dispersion_shape_lower", b.dispersion_shape.lower);
    b.dispersion_shape.upper = config.get_double(section, "dispersion_shape_upper", b.dispersion_shape.upper);
    b.decay.lower = config.get_double(section, "decay_lower", b.decay.lower);
    b.decay.upper = config.get_double(section, "decay_upper", b.decay.upper);
    b.interaction.lower = config.get_double(section, "interaction_lower", b.interaction.lower);
    b.interaction.upper = config.get_double(section, "interaction_upper", b.interaction.upper);

    if (family == Family::hybrid) {
        const auto flags = config.get_list(section, "poisson_lines");
        if (!flags || flags->size() != dimension) {
            throw ConfigError("[" + section + "] poisson_lines needs one 0/1 flag per line for HYBRID");
        }
        for (double f : *flags) {
            fc.poisson_lines.push_back(f != 0.0);
        }
    }
    try {
        fc.validate();
    } catch (const DomainError& e) {
        throw ConfigError("[" + section + "] " + e.what());
    }
    return fc;
}

std::string format_number(double value) {
    if (std::isinf(value)) {
        return value > 0 ? "inf" : "-inf";
    }
    if (std::isnan(value)) {
        return "nan";
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", value);
    return buf;
}

}  // namespace mdsenbd::cli
