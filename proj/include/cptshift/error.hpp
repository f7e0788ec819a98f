#pragma once

#include <stdexcept>
#include <string>

namespace cptshift {

/// Raised when an argument violates a documented precondition.
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised when a linear system is numerically singular.
class SingularSystem : public std::runtime_error {
public:
    SingularSystem(const std::string& what, double rcond)
        : std::runtime_error(what + " (reciprocal condition " + std::to_string(rcond) + ")"),
          rcond_(rcond) {}
    double rcond() const noexcept { return rcond_; }

private:
    double rcond_;
};

/// Raised when a bracketed root search finds no sign change.
class NoCrossing : public std::runtime_error {
public:
    NoCrossing(double lo, double hi, double f_lo, double f_hi)
        : std::runtime_error("no crossing in bracket [" + std::to_string(lo) + ", " +
                             std::to_string(hi) + "]: f = " + std::to_string(f_lo) + ", " +
                             std::to_string(f_hi)),
          lo_(lo), hi_(hi), f_lo_(f_lo), f_hi_(f_hi) {}
    double lo() const noexcept { return lo_; }
    double hi() const noexcept { return hi_; }
    double f_lo() const noexcept { return f_lo_; }
    double f_hi() const noexcept { return f_hi_; }

private:
    double lo_, hi_, f_lo_, f_hi_;
};

namespace detail {
inline void require(bool ok, const std::string& message) {
    if (!ok) throw InvalidInput(message);
}
} // namespace detail

} // namespace cptshift
