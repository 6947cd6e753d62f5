#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace regclass {

inline constexpr const char* kToolVersion = "0.1.0";

// Error categories map onto CLI exit codes (usage=1, validation=2, numeric=3).
enum class ErrorKind { Usage, Validation, Numeric };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string message)
        : std::runtime_error(std::move(message)), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void throw_validation(std::string message) {
    throw Error(ErrorKind::Validation, std::move(message));
}

[[noreturn]] inline void throw_numeric(std::string message) {
    throw Error(ErrorKind::Numeric, std::move(message));
}

[[noreturn]] inline void throw_usage(std::string message) {
    throw Error(ErrorKind::Usage, std::move(message));
}

uint64_t fnv1a64(std::string_view bytes);
uint64_t fnv1a64(const void* data, size_t n, uint64_t seed = 0xcbf29ce484222325ull);
std::string to_hex64(uint64_t value);

// Little-endian binary codec for the feature-file and checkpoint formats.
class ByteWriter {
public:
    void u8(uint8_t v) { bytes_.push_back(static_cast<char>(v)); }
    void u32(uint32_t v);
    void u64(uint64_t v);
    void i64(int64_t v) { u64(static_cast<uint64_t>(v)); }
    void f64(double v);
    void str(std::string_view s);
    void f64_array(const std::vector<double>& v);
    const std::string& bytes() const { return bytes_; }

private:
    std::string bytes_;
};

class ByteReader {
public:
    explicit ByteReader(std::string_view bytes) : bytes_(bytes) {}

    uint8_t u8();
    uint32_t u32();
    uint64_t u64();
    int64_t i64() { return static_cast<int64_t>(u64()); }
    double f64();
    std::string str();
    std::vector<double> f64_array();
    bool at_end() const { return pos_ == bytes_.size(); }
    void expect_end() const;

private:
    const char* take(size_t n);
    std::string_view bytes_;
    size_t pos_ = 0;
};

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

// Deterministic xoshiro256** generator. Seeded through splitmix64 so any
// 64-bit seed gives a well-mixed state; stable across platforms, unlike the
// std distributions.
class Rng {
public:
    explicit Rng(uint64_t seed);

    uint64_t next_u64();
    // Uniform in [0, n); n must be > 0.
    uint64_t below(uint64_t n);
    // Uniform integer in [lo, hi], inclusive.
    int64_t range(int64_t lo, int64_t hi);
    // Uniform real in [0, 1).
    double real01();
    double uniform(double lo, double hi);
    bool bernoulli(double p);

    // Derives an independent deterministic stream for the given tag.
    Rng fork(uint64_t tag) const;

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = static_cast<size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    template <typename T>
    const T& pick(const std::vector<T>& v) {
        return v[static_cast<size_t>(below(v.size()))];
    }

private:
    uint64_t seed_;
    uint64_t s_[4];
};

}  // namespace regclass
