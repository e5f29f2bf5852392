#pragma once

#include "mgdwr/adaptivity.hpp"

#include <string>
#include <vector>

namespace mgdwr {

/// Run configuration plus output settings.
struct ExperimentConfig {
    RunConfig run;
    std::string out_dir{"out"};
    bool vtk{false};
    bool compare_uniform{false};
};

/// Names accepted by preset().
[[nodiscard]] std::vector<std::string> preset_names();
/// Throws ConfigError for unknown names.
[[nodiscard]] ExperimentConfig preset(const std::string& name);

/// INI-like text: [section] headers, key = value lines, '#' comments.
/// Throws ConfigError.
[[nodiscard]] ExperimentConfig parse_config(const std::string& text);
[[nodiscard]] ExperimentConfig load_config(const std::string& path);
/// Every field, so that parse_config(serialize_config(c)) reproduces c.
[[nodiscard]] std::string serialize_config(const ExperimentConfig& c);

[[nodiscard]] bool operator==(const ExperimentConfig& a, const ExperimentConfig& b);

}  // namespace mgdwr
