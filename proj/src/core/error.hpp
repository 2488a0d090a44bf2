#pragma once

#include <stdexcept>
#include <string>

namespace gsrc {

enum class errc {
    io,
    format,
    invalid_argument,
    dimension_mismatch,
    degenerate_input,
    internal,
};

// All library failures surface as this exception; the C API maps errc
// onto its status codes.
class Error : public std::runtime_error {
public:
    Error(errc code, const std::string& what) : std::runtime_error(what), code_(code) {}

    errc code() const noexcept { return code_; }

private:
    errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& what) {
    throw Error(code, what);
}

} // namespace gsrc
