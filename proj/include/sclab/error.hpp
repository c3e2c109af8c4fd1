#pragma once

#include <stdexcept>
#include <string>

namespace sclab {

// Exit codes surfaced by the command-line front end.
enum class ExitCode : int {
    ok = 0,
    config_error = 2,
    data_error = 3,
    invariant_breach = 4,
};

class Error : public std::runtime_error {
public:
    Error(ExitCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    [[nodiscard]] ExitCode code() const noexcept { return code_; }

private:
    ExitCode code_;
};

/// Bad user configuration or arguments.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(ExitCode::config_error, what) {}
};

/// Malformed or inconsistent input data (netlists, trace files, bitstreams).
class DataError : public Error {
public:
    explicit DataError(const std::string& what) : Error(ExitCode::data_error, what) {}
};

/// An internal invariant did not hold.
class InvariantError : public Error {
public:
    explicit InvariantError(const std::string& what) : Error(ExitCode::invariant_breach, what) {}
};

/// Netlist syntax or structural error, with a source location when known.
class NetlistError : public DataError {
public:
    enum class Kind {
        syntax,
        duplicate_net,
        undriven_net,
        multiple_drivers,
        arity_mismatch,
        combinational_cycle,
        clock_reset_as_data,
        unknown_net,
        async_reset_required,
    };

    NetlistError(Kind kind, const std::string& what, int line = 0, int column = 0)
        : DataError(format(what, line, column)), kind_(kind), line_(line), column_(column) {}

    [[nodiscard]] Kind kind() const noexcept { return kind_; }
    [[nodiscard]] int line() const noexcept { return line_; }
    [[nodiscard]] int column() const noexcept { return column_; }

private:
    static std::string format(const std::string& what, int line, int column) {
        if (line <= 0) return what;
        return "line " + std::to_string(line) + ":" + std::to_string(column) + ": " + what;
    }

    Kind kind_;
    int line_;
    int column_;
};

/// Insufficient input length for a statistical test or estimator.
class InsufficientDataError : public DataError {
public:
    explicit InsufficientDataError(const std::string& what) : DataError(what) {}
};

}  // namespace sclab
