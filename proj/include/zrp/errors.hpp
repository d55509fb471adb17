#pragma once

#include <stdexcept>
#include <string>

namespace zrp {

/// Base class for all errors raised by this library.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct ZeroRateInFactorial : Error {
    explicit ZeroRateInFactorial(const std::string& w) : Error(w) {}
};

struct FugacityOutOfRange : Error {
    explicit FugacityOutOfRange(const std::string& w) : Error(w) {}
};

struct SeriesNotConverged : Error {
    explicit SeriesNotConverged(const std::string& w) : Error(w) {}
};

struct DensityUnreachable : Error {
    explicit DensityUnreachable(const std::string& w) : Error(w) {}
};

struct FugacityExceedsRadius : Error {
    explicit FugacityExceedsRadius(const std::string& w) : Error(w) {}
};

struct ImpossibleEvent : Error {
    explicit ImpossibleEvent(const std::string& w) : Error(w) {}
};

struct Absorbed : Error {
    explicit Absorbed(const std::string& w) : Error(w) {}
};

struct OrderingViolated : Error {
    explicit OrderingViolated(const std::string& w) : Error(w) {}
};

struct DenseTrajectoryRequired : Error {
    explicit DenseTrajectoryRequired(const std::string& w) : Error(w) {}
};

struct WindowOutOfRange : Error {
    explicit WindowOutOfRange(const std::string& w) : Error(w) {}
};

struct StateSpaceTooLarge : Error {
    explicit StateSpaceTooLarge(const std::string& w) : Error(w) {}
};

struct StabilityFailure : Error {
    explicit StabilityFailure(const std::string& w) : Error(w) {}
};

struct DominationViolated : Error {
    explicit DominationViolated(const std::string& w) : Error(w) {}
};

struct OccupancyOverflow : Error {
    explicit OccupancyOverflow(const std::string& w) : Error(w) {}
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& w) : Error(w) {}
};

} // namespace zrp
