#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "detlsh/dataset.hpp"
#include "detlsh/errors.hpp"

namespace detlsh {

enum class VecElement : std::uint8_t {
    f32,  // .fvecs
    u8,   // .bvecs
    i32,  // .ivecs
};

// Picks the element kind from the file extension.
VecElement vec_element_from_path(const std::string& path);

// Reads records of (int32 LE dimension, then `dim` elements). All records
// must agree on the dimension; elements widen to float.
Dataset read_vectors(const std::string& path, VecElement kind);
Dataset read_vectors(const std::string& path);

void write_vectors(const std::string& path, const Dataset& data, VecElement kind);

// Ground-truth style integer records, one row of `k` values per query.
void write_ivecs_rows(const std::string& path, const std::vector<std::uint32_t>& values,
                      std::size_t rows, int row_width);
std::vector<std::uint32_t> read_ivecs_rows(const std::string& path, std::size_t& rows,
                                           int& row_width);

}  // namespace detlsh
