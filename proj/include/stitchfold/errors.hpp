#pragma once
#include <stdexcept>
#include <string>

namespace stitchfold {

// Process exit codes: 0 success, 2 validation, 3 unresolvable layout, 4 I/O.
enum class ErrClass { validation = 2, unresolvable = 3, io = 4 };

struct Error : std::runtime_error {
    ErrClass cls;
    std::string kind;  // stable machine-readable tag, e.g. "NonTriangleFace"

    Error(ErrClass c, std::string k, const std::string& msg)
        : std::runtime_error(msg), cls(c), kind(std::move(k)) {}
};

inline Error validation_error(std::string kind, const std::string& msg) {
    return Error(ErrClass::validation, std::move(kind), msg);
}
inline Error io_error(std::string kind, const std::string& msg) {
    return Error(ErrClass::io, std::move(kind), msg);
}

}  // namespace stitchfold
