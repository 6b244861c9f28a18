#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace aidcots {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(std::string msg) : std::runtime_error(std::move(msg)) {}
};

class ParseError : public Error {
public:
    ParseError(const std::string& msg, int line = -1)
        : Error(line >= 0 ? msg + " (line " + std::to_string(line) + ")" : msg), line_(line) {}
    int line() const noexcept { return line_; }

private:
    int line_ = -1;
};

struct MissingMatrixError : ParseError {
    explicit MissingMatrixError(const std::string& name)
        : ParseError("missing required matrix: " + name) {}
};

struct MalformedRowError : ParseError {
    MalformedRowError(const std::string& msg, int line) : ParseError("malformed row: " + msg, line) {}
};

struct NoSlackBusError : ParseError {
    explicit NoSlackBusError(int count)
        : ParseError("expected exactly one slack bus, found " + std::to_string(count)) {}
};

struct DuplicateBusIdError : ParseError {
    explicit DuplicateBusIdError(int bus_id)
        : ParseError("duplicate bus id " + std::to_string(bus_id)) {}
};

/// Thrown when a power-flow solve is attempted on a topology that splits the
/// network. Carries the connected components (dense bus indices).
class DisconnectedNetworkError : public Error {
public:
    explicit DisconnectedNetworkError(std::vector<std::vector<int>> components)
        : Error("network is disconnected into " + std::to_string(components.size()) + " components"),
          components_(std::move(components)) {}
    const std::vector<std::vector<int>>& components() const noexcept { return components_; }

private:
    std::vector<std::vector<int>> components_;
};

class SingularJacobianError : public Error {
public:
    explicit SingularJacobianError(int iteration)
        : Error("power-flow Jacobian is singular at iteration " + std::to_string(iteration)),
          iteration_(iteration) {}
    int iteration() const noexcept { return iteration_; }

private:
    int iteration_;
};

struct UnboundedCostError : Error {
    explicit UnboundedCostError(int gen_index)
        : Error("generator " + std::to_string(gen_index) + " has a concave cost polynomial") {}
};

struct MissingSensitivitiesError : Error {
    MissingSensitivitiesError() : Error("aidc model requires sensitivities and tolerances") {}
};

struct InconsistentPointError : Error {
    explicit InconsistentPointError(double residual)
        : Error("solver point violates model constraints, residual " + std::to_string(residual)) {}
};

struct NumericalFailureError : Error {
    explicit NumericalFailureError(std::string msg) : Error("numerical failure: " + std::move(msg)) {}
};

struct TooManyBinariesError : Error {
    explicit TooManyBinariesError(std::size_t count)
        : Error("enumeration limited to 20 binaries, got " + std::to_string(count)) {}
};

struct InfeasibleError : Error {
    explicit InfeasibleError(std::string msg) : Error(std::move(msg)) {}
};

}  // namespace aidcots
