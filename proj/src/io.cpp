#include "detlsh/io.hpp"

#include <cstring>
#include <fstream>

namespace detlsh {

namespace {

std::size_t element_width(VecElement kind) {
    switch (kind) {
        case VecElement::u8:
            return 1;
        case VecElement::f32:
        case VecElement::i32:
            return 4;
    }
    return 4;
}

bool read_exact(std::ifstream& in, void* out, std::size_t len) {
    in.read(static_cast<char*>(out), static_cast<std::streamsize>(len));
    return static_cast<std::size_t>(in.gcount()) == len;
}

}  // namespace

VecElement vec_element_from_path(const std::string& path) {
    const auto dot = path.find_last_of('.');
    const std::string ext = dot == std::string::npos ? "" : path.substr(dot);
    if (ext == ".fvecs") return VecElement::f32;
    if (ext == ".bvecs") return VecElement::u8;
    if (ext == ".ivecs") return VecElement::i32;
    throw std::invalid_argument("unrecognized vector file extension: " + path);
}

Dataset read_vectors(const std::string& path, VecElement kind) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError(FormatErrorKind::io, "cannot open " + path);

    Dataset data;
    const std::size_t width = element_width(kind);
    std::vector<unsigned char> record;
    for (;;) {
        std::int32_t dim = 0;
        in.read(reinterpret_cast<char*>(&dim), sizeof(dim));
        if (in.gcount() == 0) break;  // clean end of file
        if (static_cast<std::size_t>(in.gcount()) != sizeof(dim))
            throw FormatError(FormatErrorKind::truncated, path + ": truncated dimension field");
        if (dim <= 0)
            throw FormatError(FormatErrorKind::bad_record,
                              path + ": non-positive record dimension");
        if (data.n == 0) {
            data.d = dim;
        } else if (dim != data.d) {
            throw FormatError(FormatErrorKind::inconsistent_dim,
                              path + ": records disagree on dimension");
        }
        record.resize(static_cast<std::size_t>(dim) * width);
        if (!read_exact(in, record.data(), record.size()))
            throw FormatError(FormatErrorKind::truncated, path + ": truncated record body");
        const std::size_t base = data.values.size();
        data.values.resize(base + static_cast<std::size_t>(dim));
        switch (kind) {
            case VecElement::f32:
                std::memcpy(data.values.data() + base, record.data(), record.size());
                break;
            case VecElement::u8:
                for (int t = 0; t < dim; ++t)
                    data.values[base + static_cast<std::size_t>(t)] =
                        static_cast<float>(record[static_cast<std::size_t>(t)]);
                break;
            case VecElement::i32: {
                for (int t = 0; t < dim; ++t) {
                    std::int32_t v = 0;
                    std::memcpy(&v, record.data() + static_cast<std::size_t>(t) * 4, 4);
                    data.values[base + static_cast<std::size_t>(t)] = static_cast<float>(v);
                }
                break;
            }
        }
        ++data.n;
    }
    return data;
}

Dataset read_vectors(const std::string& path) {
    return read_vectors(path, vec_element_from_path(path));
}

void write_vectors(const std::string& path, const Dataset& data, VecElement kind) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError(FormatErrorKind::io, "cannot open " + path + " for writing");
    const std::int32_t dim = data.d;
    for (std::size_t z = 0; z < data.n; ++z) {
        out.write(reinterpret_cast<const char*>(&dim), sizeof(dim));
        const auto row = data.row(z);
        switch (kind) {
            case VecElement::f32:
                out.write(reinterpret_cast<const char*>(row.data()),
                          static_cast<std::streamsize>(row.size() * sizeof(float)));
                break;
            case VecElement::u8:
                for (const float v : row) {
                    const auto b = static_cast<unsigned char>(v);
                    out.write(reinterpret_cast<const char*>(&b), 1);
                }
                break;
            case VecElement::i32:
                for (const float v : row) {
                    const auto t = static_cast<std::int32_t>(v);
                    out.write(reinterpret_cast<const char*>(&t), 4);
                }
                break;
        }
    }
    if (!out) throw FormatError(FormatErrorKind::io, "write failed: " + path);
}

void write_ivecs_rows(const std::string& path, const std::vector<std::uint32_t>& values,
                      std::size_t rows, int row_width) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError(FormatErrorKind::io, "cannot open " + path + " for writing");
    const std::int32_t dim = row_width;
    for (std::size_t r = 0; r < rows; ++r) {
        out.write(reinterpret_cast<const char*>(&dim), sizeof(dim));
        out.write(reinterpret_cast<const char*>(values.data() +
                                                r * static_cast<std::size_t>(row_width)),
                  static_cast<std::streamsize>(sizeof(std::uint32_t) *
                                               static_cast<std::size_t>(row_width)));
    }
    if (!out) throw FormatError(FormatErrorKind::io, "write failed: " + path);
}

std::vector<std::uint32_t> read_ivecs_rows(const std::string& path, std::size_t& rows,
                                           int& row_width) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError(FormatErrorKind::io, "cannot open " + path);
    std::vector<std::uint32_t> out;
    rows = 0;
    row_width = 0;
    for (;;) {
        std::int32_t dim = 0;
        in.read(reinterpret_cast<char*>(&dim), sizeof(dim));
        if (in.gcount() == 0) break;
        if (static_cast<std::size_t>(in.gcount()) != sizeof(dim))
            throw FormatError(FormatErrorKind::truncated, path + ": truncated dimension field");
        if (dim <= 0)
            throw FormatError(FormatErrorKind::bad_record,
                              path + ": non-positive record dimension");
        if (rows == 0) {
            row_width = dim;
        } else if (dim != row_width) {
            throw FormatError(FormatErrorKind::inconsistent_dim,
                              path + ": records disagree on dimension");
        }
        const std::size_t base = out.size();
        out.resize(base + static_cast<std::size_t>(dim));
        if (!read_exact(in, out.data() + base, static_cast<std::size_t>(dim) * 4))
            throw FormatError(FormatErrorKind::truncated, path + ": truncated record body");
        ++rows;
    }
    return out;
}

}  // namespace detlsh
