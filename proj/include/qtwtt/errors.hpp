#pragma once

#include <stdexcept>
#include <string>

namespace qtwtt {

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Scenario/budget file problems. CLI exit code 2.
class ConfigError : public Error {
public:
    using Error::Error;
};

// Event-generation problems (out-of-range times, event caps). CLI exit code 3.
class SimulationError : public Error {
public:
    using Error::Error;
};

// Analysis-stage problems (acquisition, too few blocks, gaps). CLI exit code 4.
class AnalysisError : public Error {
public:
    using Error::Error;
};

} // namespace qtwtt
