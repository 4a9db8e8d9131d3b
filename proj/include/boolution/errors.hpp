#pragma once

#include <stdexcept>
#include <string>

namespace boolution {

// Error taxonomy shared by the whole library.  The CLI maps these onto exit
// codes: Config -> 2, Capability -> 3, everything else -> 1.
enum class ErrorKind {
    Argument,              // malformed call (dimension mismatch, bad range)
    Capability,            // request exceeds an exact-computation cap
    DegenerateCoordinate,  // sigma_i = 0 where the basis requires sigma_i > 0
    Extinction,            // lethal landscape wiped out the population
    Precondition,          // a documented mathematical precondition failed
    Config,                // bad file / unknown key / unparsable input
};

class Error : public std::runtime_error {
  public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

  private:
    ErrorKind kind_;
};

[[noreturn]] inline void throw_argument(const std::string& msg) {
    throw Error(ErrorKind::Argument, msg);
}
[[noreturn]] inline void throw_capability(const std::string& msg) {
    throw Error(ErrorKind::Capability, msg);
}
[[noreturn]] inline void throw_degenerate(const std::string& msg) {
    throw Error(ErrorKind::DegenerateCoordinate, msg);
}
[[noreturn]] inline void throw_extinction(const std::string& msg) {
    throw Error(ErrorKind::Extinction, msg);
}
[[noreturn]] inline void throw_precondition(const std::string& msg) {
    throw Error(ErrorKind::Precondition, msg);
}
[[noreturn]] inline void throw_config(const std::string& msg) {
    throw Error(ErrorKind::Config, msg);
}

}  // namespace boolution
