#ifndef SABCI_ERROR_HPP
#define SABCI_ERROR_HPP

#include <stdexcept>
#include <string>

namespace sabci {

enum class ErrorKind {
    invalid_argument,       // bad value passed to an operation
    invalid_configuration,  // inconsistent or empty configuration
    degenerate_pair,        // loudspeaker pair spans 180 degrees (singular base)
    out_of_arc,             // panning source outside the active pair's arc
    insufficient_extrema,   // projection lacks the extrema needed for an envelope
    boundary,               // epoch window falls outside the recording
    data,                   // unreadable or malformed input data
    numeric,                // numeric failure in a computation
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
    throw Error(kind, message);
}

inline const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::invalid_argument:      return "invalid-argument";
        case ErrorKind::invalid_configuration: return "invalid-configuration";
        case ErrorKind::degenerate_pair:       return "degenerate-pair";
        case ErrorKind::out_of_arc:            return "out-of-arc";
        case ErrorKind::insufficient_extrema:  return "insufficient-extrema";
        case ErrorKind::boundary:              return "boundary";
        case ErrorKind::data:                  return "data";
        case ErrorKind::numeric:               return "numeric";
    }
    return "unknown";
}

} // namespace sabci

#endif
