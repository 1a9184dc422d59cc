#pragma once

#include <stdexcept>
#include <string>

namespace bnps {

// Broad failure classes. The CLI maps them onto exit codes 2, 3 and 4.
enum class ErrorKind { Usage, Data, Numeric };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail_usage(const std::string& what) {
    throw Error(ErrorKind::Usage, what);
}

[[noreturn]] inline void fail_data(const std::string& what) {
    throw Error(ErrorKind::Data, what);
}

[[noreturn]] inline void fail_numeric(const std::string& what) {
    throw Error(ErrorKind::Numeric, what);
}

}  // namespace bnps
