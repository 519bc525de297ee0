#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace daic {

// Error categories double as CLI exit codes.
enum class ErrorCategory : int {
    config = 2,
    capacity = 3,
    io = 4,
    format = 5,
    consistency = 6,
    parameter = 7,
    state = 8,
    divergence = 9,
};

class DaicError : public std::runtime_error {
public:
    DaicError(ErrorCategory category, const std::string& message)
        : std::runtime_error(message), category_(category) {}

    ErrorCategory category() const noexcept { return category_; }

private:
    ErrorCategory category_;
};

#define DAIC_DEFINE_ERROR(NAME, CATEGORY)                        \
    class NAME : public DaicError {                              \
    public:                                                      \
        explicit NAME(const std::string& message)                \
            : DaicError(ErrorCategory::CATEGORY, message) {}     \
    }

DAIC_DEFINE_ERROR(ConfigError, config);
DAIC_DEFINE_ERROR(CapacityError, capacity);
DAIC_DEFINE_ERROR(IoError, io);
DAIC_DEFINE_ERROR(FormatError, format);
DAIC_DEFINE_ERROR(ConsistencyError, consistency);
DAIC_DEFINE_ERROR(ParameterError, parameter);
DAIC_DEFINE_ERROR(StateError, state);
DAIC_DEFINE_ERROR(DivergenceError, divergence);

#undef DAIC_DEFINE_ERROR

// splitmix64 finalizer; used to derive independent RNG streams from one
// master seed so that repetitions, cycles, trees, and replications never
// share a stream.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    return mix64(mix64(master) ^ mix64(stream));
}

constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b) {
    return derive_seed(derive_seed(master, a), b);
}

// FNV-1a over raw bytes; used for value identities and config hashes.
inline std::uint64_t fnv1a64(const void* data, std::size_t n, std::uint64_t h = 0xcbf29ce484222325ull) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

}  // namespace daic
