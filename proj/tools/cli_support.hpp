#ifndef MLTRL_CLI_SUPPORT_HPP
#define MLTRL_CLI_SUPPORT_HPP

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace mltrl::cli {

/// Malformed or schema-violating configuration; message carries the field path.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct CommonOptions {
    std::string config_path;
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed; // overrides config seeds
    int threads = 0;
};

// Exit codes: 0 ok, 2 config error, 3 infeasible, 4 numerical degeneracy.
int run_analyze(const CommonOptions& opts);
int run_design_optimize(const CommonOptions& opts);
int run_design_ruler(const CommonOptions& opts);
int run_linecount(const CommonOptions& opts);
int run_trl_band(const CommonOptions& opts);
int run_mc_sens(const CommonOptions& opts);

} // namespace mltrl::cli

#endif
