#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace dproc {

// Base class for every error thrown by the library.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct NotHermitian : Error {
    explicit NotHermitian(const std::string& msg) : Error(msg) {}
};

struct NoConvergence : Error {
    explicit NoConvergence(const std::string& msg) : Error(msg) {}
};

struct DimensionTooSmall : Error {
    explicit DimensionTooSmall(const std::string& msg) : Error(msg) {}
};

struct DimensionMismatch : Error {
    explicit DimensionMismatch(const std::string& msg) : Error(msg) {}
};

struct IndexOutOfRange : Error {
    explicit IndexOutOfRange(const std::string& msg) : Error(msg) {}
};

struct ZeroProbabilityBranch : Error {
    explicit ZeroProbabilityBranch(const std::string& msg) : Error(msg) {}
};

struct ZeroProbabilityObservation : Error {
    explicit ZeroProbabilityObservation(const std::string& msg) : Error(msg) {}
};

struct NonHermitianReward : Error {
    explicit NonHermitianReward(const std::string& msg) : Error(msg) {}
};

struct InvalidKraus : Error {
    explicit InvalidKraus(const std::string& msg) : Error(msg) {}
};

struct EmptySequence : Error {
    explicit EmptySequence(const std::string& msg) : Error(msg) {}
};

// The surviving branch of a policy path vanished at `step` (1-based).
struct PathExtinguished : Error {
    PathExtinguished(const std::string& msg, std::size_t step_) : Error(msg), step(step_) {}
    std::size_t step;
};

struct NotEmbeddable : Error {
    NotEmbeddable(const std::string& msg, double deviation_) : Error(msg), deviation(deviation_) {}
    double deviation;
};

struct MissingChild : Error {
    MissingChild(const std::string& msg, std::size_t observation_)
        : Error(msg), observation(observation_) {}
    std::size_t observation;
};

struct BudgetExceeded : Error {
    BudgetExceeded(const std::string& msg, std::uint64_t nodes_expanded_)
        : Error(msg), nodes_expanded(nodes_expanded_) {}
    std::uint64_t nodes_expanded;
};

struct StateBudgetExceeded : Error {
    StateBudgetExceeded(const std::string& msg, std::uint64_t states_)
        : Error(msg), states(states_) {}
    std::uint64_t states;
};

struct ParseError : Error {
    explicit ParseError(const std::string& msg) : Error(msg) {}
};

struct UnknownCommand : Error {
    explicit UnknownCommand(const std::string& msg) : Error(msg) {}
};

// One violated model invariant, named, with the worst observed deviation.
struct Violation {
    std::string invariant;
    double deviation = 0.0;
};

struct ValidationError : Error {
    ValidationError(const std::string& msg, std::vector<Violation> violations_)
        : Error(msg), violations(std::move(violations_)) {}
    std::vector<Violation> violations;
};

}  // namespace dproc
