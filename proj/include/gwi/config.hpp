#pragma once

#include "gwi/experiments.hpp"
#include "gwi/model.hpp"
#include "gwi/simulate.hpp"

#include <istream>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace gwi {

// Malformed config text or a missing required key. Not a DomainError: the
// CLI maps it to its own exit code.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Sectioned key = value text:
//
//   # comment
//   [model.offspring]
//   kind = "geometric"
//   params = [0.5]
//
// Values are numbers, quoted or bare strings, booleans, or bracketed number
// arrays (which may span lines).
class ConfigFile {
public:
    static ConfigFile parse(std::istream& in);
    static ConfigFile parse_string(const std::string& text);
    static ConfigFile load(const std::string& path);

    bool has(const std::string& section, const std::string& key) const;
    bool has_section(const std::string& section) const;

    std::string get_string(const std::string& section, const std::string& key) const;
    double get_number(const std::string& section, const std::string& key) const;
    long long get_integer(const std::string& section, const std::string& key) const;
    std::vector<double> get_numbers(const std::string& section, const std::string& key) const;

    // Raw text as it would appear on the right of '='.
    void set(const std::string& section, const std::string& key, const std::string& value);
    // "section.key=value"; the key is the last dotted component.
    void apply_override(const std::string& assignment);

private:
    const std::string& raw(const std::string& section, const std::string& key) const;

    std::map<std::string, std::map<std::string, std::string>> values_;
};

DistributionSpec distribution_from_config(const ConfigFile& config, const std::string& section);
ModelParams model_from_config(const ConfigFile& config);
std::optional<IncrementLaw> increments_from_config(const ConfigFile& config);
ExperimentConfig experiment_from_config(const ConfigFile& config);

}  // namespace gwi
