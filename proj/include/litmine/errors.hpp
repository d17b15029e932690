#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace litmine {

/// Process exit codes shared by every command.
enum class ExitCode : int {
    ok = 0,
    usage = 2,  ///< bad arguments, config, or filter spec
    data = 3,   ///< malformed or inconsistent input data
    oracle = 4, ///< oracle transport or protocol failure
};

/// Base error. The message is prefixed with the module that raised it.
class Error : public std::runtime_error {
public:
    Error(std::string_view module, std::string_view message, ExitCode code)
        : std::runtime_error(std::string(module) + ": " + std::string(message)),
          module_(module), code_(code) {}

    const std::string& module() const noexcept { return module_; }
    ExitCode exit_code() const noexcept { return code_; }

private:
    std::string module_;
    ExitCode code_;
};

class ConfigError : public Error {
public:
    ConfigError(std::string_view module, std::string_view message)
        : Error(module, message, ExitCode::usage) {}
};

class DataError : public Error {
public:
    DataError(std::string_view module, std::string_view message)
        : Error(module, message, ExitCode::data) {}
};

class OracleError : public Error {
public:
    OracleError(std::string_view module, std::string_view message)
        : Error(module, message, ExitCode::oracle) {}
};

/// Network or service failure. Retriable.
class TransportError : public OracleError {
public:
    using OracleError::OracleError;
};

/// The peer answered, but not with something we can use. Not retriable
/// at the call site; surfaced to the enclosing unit of work.
class ProtocolError : public OracleError {
public:
    using OracleError::OracleError;
};

} // namespace litmine
