#ifndef REMTRACK_CLI_HPP
#define REMTRACK_CLI_HPP

#include <stdexcept>
#include <string>

#include "remtrack/engine.hpp"
#include "remtrack/optimize.hpp"

namespace remtrack {

inline constexpr const char* tool_version = "0.1.0";

/// Schema violations carry the offending field path in what().
struct config_error : std::runtime_error {
    explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

struct parsed_config {
    sim_config sim;
    bool has_budget = false;
    budget budget_spec;
};

/// Parse and validate a JSON config document against the documented schema.
/// Unknown keys, wrong types and out-of-range values all raise config_error.
parsed_config parse_config_text(const std::string& text);

/// Locale-independent float serialization, 10 significant digits.
std::string format_double(double v);

/// Full command-line entry point. Returns the process exit code:
/// 0 success, 1 runtime failure, 2 usage or config error.
int cli_main(int argc, const char* const* argv);

} // namespace remtrack

#endif
