#ifndef KVDG_ERRORS_HPP
#define KVDG_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace kvdg {

/// Invalid configuration or malformed input (bad flags, bad mesh file,
/// mismatched spaces). Reported before any numerical work.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A linear solve failed to converge or produced non-finite values.
struct SolveError : std::runtime_error {
    explicit SolveError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace kvdg

#endif
