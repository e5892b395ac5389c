#pragma once
#include "qes/config.hpp"

namespace qes::cli {

// Exit codes: 0 success; 2 configuration error; 3 a requested level failed to
// certify (solve); 1 a verification check failed (verify).
int cmd_solve(const std::string& config_path, const CliOptions& opts);
int cmd_verify(const std::string& config_path, const CliOptions& opts);
int cmd_sweep(const std::string& config_path, const CliOptions& opts);

} // namespace qes::cli
