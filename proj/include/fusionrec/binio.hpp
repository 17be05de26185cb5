#pragma once

// Little-endian primitives shared by all persisted formats (FRG1, FRE1, FRS1,
// FRM1, FRC1, ...). Byte order is explicit so files are portable across hosts.

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "fusionrec/common.hpp"

namespace fusionrec::binio {

inline void write_bytes(std::ostream& out, const void* p, std::size_t n) {
    out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
    if (!out) throw IoError("write failed");
}

inline void read_bytes(std::istream& in, void* p, std::size_t n) {
    in.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in.gcount()) != n) throw IoError("unexpected end of stream");
}

inline void write_u32(std::ostream& out, std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    write_bytes(out, b, 4);
}

inline void write_u64(std::ostream& out, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    write_bytes(out, b, 8);
}

inline void write_f64(std::ostream& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    write_u64(out, bits);
}

inline void write_u8(std::ostream& out, std::uint8_t v) { write_bytes(out, &v, 1); }

inline void write_string(std::ostream& out, const std::string& s) {
    write_u32(out, static_cast<std::uint32_t>(s.size()));
    if (!s.empty()) write_bytes(out, s.data(), s.size());
}

inline std::uint32_t read_u32(std::istream& in) {
    unsigned char b[4];
    read_bytes(in, b, 4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
}

inline std::uint64_t read_u64(std::istream& in) {
    unsigned char b[8];
    read_bytes(in, b, 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

inline double read_f64(std::istream& in) {
    std::uint64_t bits = read_u64(in);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

inline std::uint8_t read_u8(std::istream& in) {
    std::uint8_t v;
    read_bytes(in, &v, 1);
    return v;
}

inline std::string read_string(std::istream& in) {
    const std::uint32_t n = read_u32(in);
    std::string s(n, '\0');
    if (n) read_bytes(in, s.data(), n);
    return s;
}

inline void write_magic(std::ostream& out, const char magic[5]) { write_bytes(out, magic, 4); }

inline void expect_magic(std::istream& in, const char magic[5]) {
    char got[5] = {0, 0, 0, 0, 0};
    read_bytes(in, got, 4);
    if (std::memcmp(got, magic, 4) != 0)
        throw IoError(std::string("bad magic, expected ") + magic + " got " + got);
}

}  // namespace fusionrec::binio
