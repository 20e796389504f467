#pragma once

// Little-endian primitives shared by the on-disk formats.

#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>

namespace tsg::bin {

inline void put_u32(std::ostream& out, std::uint32_t v) {
    char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xffu);
    out.write(b, 4);
}

inline void put_u64(std::ostream& out, std::uint64_t v) {
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xffu);
    out.write(b, 8);
}

inline void put_f32(std::ostream& out, float v) { put_u32(out, std::bit_cast<std::uint32_t>(v)); }
inline void put_f64(std::ostream& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

inline std::uint32_t get_u32(std::istream& in) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4)) throw std::runtime_error("unexpected end of file");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
}

inline std::uint64_t get_u64(std::istream& in) {
    unsigned char b[8];
    if (!in.read(reinterpret_cast<char*>(b), 8)) throw std::runtime_error("unexpected end of file");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

inline float get_f32(std::istream& in) { return std::bit_cast<float>(get_u32(in)); }
inline double get_f64(std::istream& in) { return std::bit_cast<double>(get_u64(in)); }

inline std::string hex64(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i) {
        s[static_cast<std::size_t>(i)] = digits[v & 0xfu];
        v >>= 4;
    }
    return s;
}

}  // namespace tsg::bin
