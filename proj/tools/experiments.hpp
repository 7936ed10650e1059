#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace strz::cli {

using json = nlohmann::json;

const std::vector<std::string>& command_names();
bool is_command(const std::string& name);

// Defaults for one command; every key a config file may set appears here.
json default_config(const std::string& command);
// Merge a user config over the defaults. Unknown keys are rejected.
json resolve_config(const std::string& command, const json& user);

std::uint64_t fnv1a64(const std::string& bytes);
std::string config_hash(const json& resolved); // 16 hex digits over the canonical dump

struct Artifact {
    std::string name;
    std::string content;
};

// Runs one command. Artifacts depend only on the resolved config.
std::vector<Artifact> run_command(const std::string& command, const json& resolved);

} // namespace strz::cli
