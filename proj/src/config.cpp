#include "gwi/config.hpp"

#include "gwi/errors.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace gwi {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

// Drops a '#' comment that is not inside a quoted string.
std::string strip_comment(const std::string& line) {
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') quoted = !quoted;
        if (line[i] == '#' && !quoted) return line.substr(0, i);
    }
    return line;
}

bool valid_name(const std::string& s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) {
        return std::isalnum(c) || c == '_' || c == '-' || c == '.';
    });
}

double parse_number(const std::string& text, const std::string& where) {
    const std::string t = trim(text);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
    if (t.empty() || ec != std::errc() || ptr != t.data() + t.size())
        throw ConfigError(where + ": expected a number, got '" + t + "'");
    return value;
}

std::string unquote(const std::string& text, const std::string& where) {
    const std::string t = trim(text);
    if (t.size() >= 2 && t.front() == '"' && t.back() == '"') return t.substr(1, t.size() - 2);
    if (t.find('"') != std::string::npos) throw ConfigError(where + ": unbalanced quotes");
    return t;
}

}  // namespace

ConfigFile ConfigFile::parse(std::istream& in) {
    ConfigFile config;
    std::string section;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string where = "line " + std::to_string(line_no);
        std::string text = trim(strip_comment(line));
        if (text.empty()) continue;
        if (text.front() == '[') {
            if (text.back() != ']') throw ConfigError(where + ": unterminated section header");
            section = trim(text.substr(1, text.size() - 2));
            if (!valid_name(section)) throw ConfigError(where + ": bad section name '" + section + "'");
            config.values_[section];
            continue;
        }
        const auto eq = text.find('=');
        if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
        const std::string key = trim(text.substr(0, eq));
        std::string value = trim(text.substr(eq + 1));
        if (!valid_name(key)) throw ConfigError(where + ": bad key '" + key + "'");
        if (section.empty()) throw ConfigError(where + ": key outside any section");
        if (value.empty()) throw ConfigError(where + ": empty value for '" + key + "'");
        if (value.front() == '[') {
            while (value.find(']') == std::string::npos) {
                if (!std::getline(in, line)) throw ConfigError(where + ": unterminated array");
                ++line_no;
                value += ' ' + trim(strip_comment(line));
            }
            if (value.back() != ']') throw ConfigError(where + ": trailing text after array");
        }
        if (config.values_[section].count(key)) throw ConfigError(where + ": duplicate key '" + key + "'");
        config.values_[section][key] = value;
    }
    return config;
}

ConfigFile ConfigFile::parse_string(const std::string& text) {
    std::istringstream in(text);
    return parse(in);
}

ConfigFile ConfigFile::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    try {
        return parse(in);
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

bool ConfigFile::has(const std::string& section, const std::string& key) const {
    const auto it = values_.find(section);
    return it != values_.end() && it->second.count(key) > 0;
}

bool ConfigFile::has_section(const std::string& section) const { return values_.count(section) > 0; }

const std::string& ConfigFile::raw(const std::string& section, const std::string& key) const {
    const auto it = values_.find(section);
    if (it == values_.end()) throw ConfigError("missing section [" + section + "]");
    const auto kv = it->second.find(key);
    if (kv == it->second.end()) throw ConfigError("missing key '" + key + "' in [" + section + "]");
    return kv->second;
}

std::string ConfigFile::get_string(const std::string& section, const std::string& key) const {
    return unquote(raw(section, key), section + "." + key);
}

double ConfigFile::get_number(const std::string& section, const std::string& key) const {
    const std::string& text = raw(section, key);
    const std::string where = section + "." + key;
    // A one-element array stands for its element.
    if (!text.empty() && text.front() == '[') {
        const auto values = get_numbers(section, key);
        if (values.size() != 1) throw ConfigError(where + ": expected a single number");
        return values[0];
    }
    return parse_number(text, where);
}

long long ConfigFile::get_integer(const std::string& section, const std::string& key) const {
    const double value = get_number(section, key);
    if (value != std::floor(value) || std::abs(value) > 9.0e15)
        throw ConfigError(section + "." + key + ": expected an integer");
    return static_cast<long long>(value);
}

std::vector<double> ConfigFile::get_numbers(const std::string& section, const std::string& key) const {
    const std::string text = trim(raw(section, key));
    const std::string where = section + "." + key;
    if (text.empty() || text.front() != '[') return {parse_number(text, where)};
    const std::string body = trim(text.substr(1, text.size() - 2));
    std::vector<double> out;
    if (body.empty()) return out;
    std::stringstream ss(body);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (trim(item).empty() && ss.eof()) break;  // trailing comma
        out.push_back(parse_number(item, where));
    }
    return out;
}

void ConfigFile::set(const std::string& section, const std::string& key, const std::string& value) {
    if (!valid_name(section) || !valid_name(key)) throw ConfigError("bad override name '" + section + "." + key + "'");
    values_[section][key] = trim(value);
}

void ConfigFile::apply_override(const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) throw ConfigError("override '" + assignment + "' is not key=value");
    const std::string path = trim(assignment.substr(0, eq));
    const auto dot = path.rfind('.');
    if (dot == std::string::npos) throw ConfigError("override '" + path + "' needs a section");
    set(path.substr(0, dot), path.substr(dot + 1), assignment.substr(eq + 1));
}

DistributionSpec distribution_from_config(const ConfigFile& config, const std::string& section) {
    const std::string kind = config.get_string(section, "kind");
    DistributionSpec spec = [&] {
        switch (distribution_kind_from_string(kind)) {
            case DistributionKind::explicit_pmf: {
                const auto pmf = config.get_numbers(section, "pmf");
                return DistributionSpec::explicit_pmf(Eigen::Map<const Eigen::VectorXd>(
                    pmf.data(), static_cast<Eigen::Index>(pmf.size())));
            }
            case DistributionKind::geometric: return DistributionSpec::geometric(config.get_number(section, "params"));
            case DistributionKind::poisson: return DistributionSpec::poisson(config.get_number(section, "params"));
        }
        throw ConfigError(section + ".kind: unknown kind");
    }();
    if (config.has(section, "pmf_truncation"))
        spec.set_pmf_truncation(static_cast<int>(config.get_integer(section, "pmf_truncation")));
    return spec;
}

ModelParams model_from_config(const ConfigFile& config) {
    return validate_condition_A(distribution_from_config(config, "model.offspring"),
                                distribution_from_config(config, "model.immigration"));
}

std::optional<IncrementLaw> increments_from_config(const ConfigFile& config) {
    const std::string s = "increments";
    if (!config.has_section(s)) return std::nullopt;
    const std::string kind = config.get_string(s, "kind");
    if (kind == "shifted-pareto")
        return IncrementLaw::shifted_pareto(config.get_number(s, "alpha"),
                                            config.has(s, "x_m") ? config.get_number(s, "x_m") : 1.0);
    if (kind == "gaussian") return IncrementLaw::gaussian(config.get_number(s, "sigma0sq"));
    if (kind == "truncated-discrete")
        return IncrementLaw::truncated_discrete(config.get_numbers(s, "values"), config.get_numbers(s, "probs"));
    throw ConfigError("increments.kind: unknown kind '" + kind + "'");
}

ExperimentConfig experiment_from_config(const ConfigFile& config) {
    const std::string s = "experiment";
    const Study study = [&] {
        try {
            return study_from_string(config.get_string(s, "study"));
        } catch (const DomainError& e) {
            throw ConfigError(std::string("experiment.study: ") + e.what());
        }
    }();
    // Validating the model can raise domain errors; the study key is parsed first
    // so a typo there still reports as a config error.
    ExperimentConfig out{.study = study, .model = model_from_config(config)};
    out.law = increments_from_config(config);
    for (double n : config.get_numbers(s, "n_grid")) {
        if (n != std::floor(n) || n < 1 || n > 1e9) throw ConfigError("experiment.n_grid: expected positive integers");
        out.n_grid.push_back(static_cast<int>(n));
    }
    if (config.has(s, "r")) out.r_values = config.get_numbers(s, "r");
    if (config.has(s, "eps")) {
        out.eps = EpsSequence::constant(config.get_number(s, "eps"));
    } else if (config.has(s, "eps_exponent")) {
        out.eps = EpsSequence::power(config.get_number(s, "eps_exponent"),
                                     config.has(s, "eps_coef") ? config.get_number(s, "eps_coef") : 1.0,
                                     config.has(s, "eps_log_exponent") ? config.get_number(s, "eps_log_exponent") : 0.0);
    }
    if (config.has(s, "paths")) out.paths = config.get_integer(s, "paths");
    if (config.has(s, "seed")) {
        const long long seed = config.get_integer(s, "seed");
        if (seed < 0) throw ConfigError("experiment.seed: must be non-negative");
        out.seed = static_cast<std::uint64_t>(seed);
    }
    if (config.has(s, "shards")) out.shards = static_cast<int>(config.get_integer(s, "shards"));
    if (config.has(s, "n_star")) out.n_star = static_cast<int>(config.get_integer(s, "n_star"));
    if (config.has(s, "q_terms")) out.q_terms = static_cast<int>(config.get_integer(s, "q_terms"));
    if (config.has(s, "q_paths")) out.q_paths = config.get_integer(s, "q_paths");
    if (config.has(s, "output")) out.output_path = config.get_string(s, "output");
    return out;
}

}  // namespace gwi
