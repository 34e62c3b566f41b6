#pragma once

#include <stdexcept>
#include <string>

namespace detlsh {

enum class FormatErrorKind {
    io,                    // file cannot be opened / read / written
    bad_magic,             // wrong leading magic bytes
    bad_version,           // unsupported format version
    truncated,             // stream ended mid-record
    inconsistent_dim,      // records disagree on dimensionality
    bad_record,            // malformed field (e.g. non-positive dimension)
    fingerprint_mismatch,  // index does not belong to the supplied dataset
    corrupt,               // structurally invalid content
};

class FormatError : public std::runtime_error {
public:
    FormatError(FormatErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    FormatErrorKind kind() const { return kind_; }

private:
    FormatErrorKind kind_;
};

}  // namespace detlsh
