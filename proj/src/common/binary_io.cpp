#include "neon/common/binary_io.hpp"

#include <bit>
#include <cstdint>
#include <fstream>
#include <iterator>

#include "neon/common/error.hpp"

namespace neon {

void append_f32_le(std::vector<unsigned char>& out, std::span<const double> values) {
    out.reserve(out.size() + values.size() * 4);
    for (double v : values) {
        const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(v));
        for (int b = 0; b < 4; ++b) {
            out.push_back(static_cast<unsigned char>((bits >> (8 * b)) & 0xffu));
        }
    }
}

std::vector<float> decode_f32_le(std::span<const unsigned char> bytes) {
    if (bytes.size() % 4 != 0) {
        throw Error("float32 payload length " + std::to_string(bytes.size()) +
                    " is not a multiple of 4");
    }
    std::vector<float> values(bytes.size() / 4);
    for (std::size_t i = 0; i < values.size(); ++i) {
        std::uint32_t bits = 0;
        for (int b = 0; b < 4; ++b) {
            bits |= static_cast<std::uint32_t>(bytes[4 * i + b]) << (8 * b);
        }
        values[i] = std::bit_cast<float>(bits);
    }
    return values;
}

void write_f32_le(const std::filesystem::path& path, std::span<const double> values) {
    std::vector<unsigned char> bytes;
    append_f32_le(bytes, values);
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) {
        throw Error("cannot open " + path.string() + " for writing");
    }
    os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

std::vector<float> read_f32_le(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) {
        throw Error("cannot open weights sidecar " + path.string());
    }
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    return decode_f32_le(bytes);
}

}  // namespace neon
