#pragma once

#include <map>
#include <string>

#include "ttcc/avionics.hpp"

namespace ttcc::avio {

// Parses the system configuration format: modules with partition schedules,
// topology (vertices, dataflow links, virtual links), frames with per-link
// offsets and guard/result constraints, network parameters, and latency
// constraints. Validates the result with validate_spec.
SystemSpec parse_system(const std::string& text);
SystemSpec load_system(const std::string& path);

// Environment schedule: lines of the form `tick: constraint`, applied at the
// named tick only. Repeated ticks conjoin.
std::map<std::int64_t, Constraint> parse_env(const std::string& text);
std::map<std::int64_t, Constraint> load_env(const std::string& path);

std::string read_file(const std::string& path); // ConfigError when missing

} // namespace ttcc::avio
