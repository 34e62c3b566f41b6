#pragma once

#include <iosfwd>
#include <string>

#include "detlsh/errors.hpp"
#include "detlsh/index.hpp"

namespace detlsh {

// Binary layout, little-endian throughout:
//   magic "DETL", format version u32,
//   params, hash-family seed + dims (coefficients regenerate from the seed),
//   breakpoint table, per-tree preorder node streams, dataset fingerprint.
// Loading verifies the fingerprint against the supplied dataset.
void save_index(const DetIndex& index, std::ostream& out);
void save_index(const DetIndex& index, const std::string& path);

DetIndex load_index(std::istream& in, std::shared_ptr<const Dataset> data);
DetIndex load_index(const std::string& path, std::shared_ptr<const Dataset> data);

// Byte size of the serialized form.
std::size_t serialized_size(const DetIndex& index);

}  // namespace detlsh
