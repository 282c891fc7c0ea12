#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace asp {

enum class ErrorCode {
    InvalidArgument,   // bad numeric input, size precondition violated
    IndexOutOfRange,   // sample id >= sample count, epoch >= total epochs
    DuplicateSample,   // repeated sample id where a set is required
    Budget,            // requested subset size outside [1, n]
    DegenerateInput,   // constant vector where a correlation needs variance
    Parse,             // malformed file contents
    Config,            // invalid run configuration (carries a field path)
    Divergence,        // training loss blew up
    Io,                // filesystem failure
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}
    Error(ErrorCode code, const std::string& message, std::string field)
        : std::runtime_error(message), code_(code), field_(std::move(field)) {}

    ErrorCode code() const { return code_; }
    // Config errors name the offending config field, e.g. "hyperparams.learning_rate".
    const std::string& field() const { return field_; }

  private:
    ErrorCode code_;
    std::string field_;
};

[[noreturn]] inline void throw_error(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

[[noreturn]] inline void throw_config_error(const std::string& field, const std::string& message) {
    throw Error(ErrorCode::Config, field + ": " + message, field);
}

}  // namespace asp
