#pragma once

#include <stdexcept>
#include <string>

namespace aqmlab {

/// Invalid or inconsistent run configuration. Maps to CLI exit code 1.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Internal consistency violation (scheduling into the past, unroutable
/// packet, ACK for unsent data). Always a simulator bug, never bad input.
class SimulatorBugError : public std::logic_error {
public:
    explicit SimulatorBugError(const std::string& what) : std::logic_error(what) {}
};

/// Metrics ledger violation: per-class packet conservation failed, or a
/// delivery was recorded without a matching enqueue.
class AccountingError : public std::logic_error {
public:
    explicit AccountingError(const std::string& what) : std::logic_error(what) {}
};

}  // namespace aqmlab
