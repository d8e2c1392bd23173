#include <lmmg/config.hpp>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace lmmg {
namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos)
        return {};
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

double parse_double(const std::string& key, const std::string& value) {
    double out = 0.0;
    const char* first = value.data();
    const char* last = first + value.size();
    const auto [ptr, ec] = std::from_chars(first, last, out);
    if (ec != std::errc{} || ptr != last)
        throw ConfigError("invalid number '" + value + "' for key '" + key + "'");
    return out;
}

long parse_long(const std::string& key, const std::string& value) {
    long out = 0;
    const char* first = value.data();
    const char* last = first + value.size();
    const auto [ptr, ec] = std::from_chars(first, last, out);
    if (ec != std::errc{} || ptr != last)
        throw ConfigError("invalid integer '" + value + "' for key '" + key + "'");
    return out;
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> items;
    std::string item;
    std::istringstream in(value);
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (!item.empty())
            items.push_back(item);
    }
    return items;
}

} // namespace

LmmgConfig preset_config(const std::string& name) {
    const auto names = builtin_problem_names();
    if (std::find(names.begin(), names.end(), name) == names.end()) {
        std::string known;
        for (const auto& n : names)
            known += (known.empty() ? "" : ", ") + n;
        throw ConfigError("unknown preset '" + name + "' (available: " + known + ")");
    }
    LmmgConfig config;
    config.problem = name;
    if (name == "henon_perturbed") {
        config.gamma = 0.125;
        config.lambda = 0.25;
    }
    return config;
}

void apply_config_key(LmmgConfig& config, const std::string& key, const std::string& value) {
    if (key == "problem") {
        const auto names = builtin_problem_names();
        if (std::find(names.begin(), names.end(), value) == names.end())
            throw ConfigError("unknown problem '" + value + "' for key 'problem'");
        config.problem = value;
    } else if (key == "epsilon") {
        config.epsilon = parse_double(key, value);
    } else if (key == "gamma") {
        config.gamma = parse_double(key, value);
    } else if (key == "lambda") {
        config.lambda = parse_double(key, value);
    } else if (key == "theta") {
        config.theta = parse_double(key, value);
    } else if (key == "eps_tol") {
        config.eps_tol = parse_double(key, value);
    } else if (key == "max_elements") {
        config.max_elements = parse_long(key, value);
    } else if (key == "initial_divisions") {
        config.initial_divisions = static_cast<int>(parse_long(key, value));
    } else if (key == "refinement") {
        if (value == "adaptive")
            config.refinement = RefinementMode::adaptive;
        else if (value == "uniform")
            config.refinement = RefinementMode::uniform;
        else
            throw ConfigError("invalid value '" + value +
                              "' for key 'refinement' (adaptive or uniform)");
    } else if (key == "initial_guess") {
        config.initial_guess = value;
    } else if (key == "subspace_files") {
        config.subspace_files = split_list(value);
    } else if (key == "checkpoint_dir") {
        config.checkpoint_dir = value;
    } else if (key == "inner_iteration_cap") {
        config.inner_iteration_cap = static_cast<int>(parse_long(key, value));
    } else if (key == "cg_rel_tol") {
        config.cg_rel_tol = parse_double(key, value);
    } else if (key == "scaled_threshold") {
        config.peak.scaled_threshold = parse_double(key, value);
    } else if (key == "domain") {
        const auto parts = split_list(value);
        if (parts.size() != 4)
            throw ConfigError("key 'domain' needs four numbers lo_x,lo_y,hi_x,hi_y");
        config.domain_lo = Vec2{parse_double(key, parts[0]), parse_double(key, parts[1])};
        config.domain_hi = Vec2{parse_double(key, parts[2]), parse_double(key, parts[3])};
    } else {
        throw ConfigError("unknown configuration key '" + key + "'");
    }
}

LmmgConfig parse_config_text(const std::string& text, LmmgConfig base) {
    std::istringstream in(text);
    std::string line;
    long line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped.front() == '#')
            continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(line_number) +
                              " is not of the form key = value");
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        if (key.empty())
            throw ConfigError("line " + std::to_string(line_number) + " has an empty key");
        try {
            apply_config_key(base, key, value);
        } catch (const ConfigError& err) {
            throw ConfigError("line " + std::to_string(line_number) + ": " + err.what());
        }
    }
    return base;
}

LmmgConfig parse_config_file(const std::string& path, LmmgConfig base) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open configuration file '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config_text(buffer.str(), std::move(base));
}

} // namespace lmmg
