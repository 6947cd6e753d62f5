#include "regclass/util.hpp"

#include <array>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace regclass {

uint64_t fnv1a64(const void* data, size_t n, uint64_t seed) {
    const auto* p = static_cast<const unsigned char*>(data);
    uint64_t h = seed;
    for (size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

uint64_t fnv1a64(std::string_view bytes) {
    return fnv1a64(bytes.data(), bytes.size());
}

std::string to_hex64(uint64_t value) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(value));
    return std::string(buf);
}

namespace {

uint64_t splitmix64(uint64_t& x) {
    x += 0x9e3779b97f4a7c15ull;
    uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

uint64_t rotl(uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

}  // namespace

Rng::Rng(uint64_t seed) : seed_(seed) {
    uint64_t x = seed;
    for (auto& s : s_) s = splitmix64(x);
}

uint64_t Rng::next_u64() {
    uint64_t result = rotl(s_[1] * 5, 7) * 9;
    uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

uint64_t Rng::below(uint64_t n) {
    // Rejection sampling keeps the draw unbiased.
    uint64_t threshold = (0 - n) % n;
    for (;;) {
        uint64_t r = next_u64();
        if (r >= threshold) return r % n;
    }
}

int64_t Rng::range(int64_t lo, int64_t hi) {
    return lo + static_cast<int64_t>(below(static_cast<uint64_t>(hi - lo + 1)));
}

double Rng::real01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) {
    return lo + (hi - lo) * real01();
}

bool Rng::bernoulli(double p) {
    return real01() < p;
}

Rng Rng::fork(uint64_t tag) const {
    uint64_t x = seed_ ^ (0x9e3779b97f4a7c15ull * (tag + 1));
    return Rng(splitmix64(x));
}

void ByteWriter::u32(uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void ByteWriter::u64(uint64_t v) {
    for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void ByteWriter::f64(double v) {
    uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    u64(bits);
}

void ByteWriter::str(std::string_view s) {
    u64(s.size());
    bytes_.append(s.data(), s.size());
}

void ByteWriter::f64_array(const std::vector<double>& v) {
    u64(v.size());
    for (double x : v) f64(x);
}

const char* ByteReader::take(size_t n) {
    if (pos_ + n > bytes_.size()) throw_validation("binary payload truncated");
    const char* p = bytes_.data() + pos_;
    pos_ += n;
    return p;
}

uint8_t ByteReader::u8() {
    return static_cast<uint8_t>(*take(1));
}

uint32_t ByteReader::u32() {
    const char* p = take(4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(static_cast<unsigned char>(p[i])) << (8 * i);
    return v;
}

uint64_t ByteReader::u64() {
    const char* p = take(8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(static_cast<unsigned char>(p[i])) << (8 * i);
    return v;
}

double ByteReader::f64() {
    uint64_t bits = u64();
    double v;
    std::memcpy(&v, &bits, sizeof v);
    return v;
}

std::string ByteReader::str() {
    uint64_t n = u64();
    if (n > bytes_.size()) throw_validation("binary payload truncated");
    const char* p = take(static_cast<size_t>(n));
    return std::string(p, static_cast<size_t>(n));
}

std::vector<double> ByteReader::f64_array() {
    uint64_t n = u64();
    if (n > bytes_.size() / 8) throw_validation("binary payload truncated");
    std::vector<double> v(static_cast<size_t>(n));
    for (double& x : v) x = f64();
    return v;
}

void ByteReader::expect_end() const {
    if (!at_end()) throw_validation("trailing bytes after binary payload");
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw_validation("cannot open '" + path + "' for reading");
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw_validation("read error on '" + path + "'");
    return buf.str();
}

void write_file(const std::string& path, std::string_view contents) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw_validation("cannot open '" + path + "' for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw_validation("write error on '" + path + "'");
}

}  // namespace regclass
