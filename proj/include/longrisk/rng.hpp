#pragma once

#include <cstdint>

namespace longrisk {

/// Deterministic splittable random stream (splitmix64 core).
///
/// A stream is identified by a 64-bit state derived from the seed and the
/// chain of substream keys used to reach it. Substreams addressed by the same
/// key path are identical no matter where or when they are derived, so
/// simulation results do not depend on evaluation order or thread count.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed);

    /// Child stream addressed by `key`. Does not advance this stream.
    RngStream substream(std::uint64_t key) const;
    RngStream substream(std::uint64_t k1, std::uint64_t k2) const;
    RngStream substream(std::uint64_t k1, std::uint64_t k2, std::uint64_t k3) const;

    std::uint64_t next_u64();

    /// Uniform draw in [0, 1).
    double uniform();

    /// Uniform draw in (0, 1), safe for inverse-CDF transforms.
    double uniform_open();

    /// Standard normal draw by inverse-CDF of uniform_open().
    double normal();

private:
    struct RawTag {};
    RngStream(std::uint64_t state, RawTag);

    std::uint64_t state_;
};

/// Fixed top-level substream labels, one per family of random inputs.
/// Shared so that independent pipelines address the same draws identically.
enum StreamLabel : std::uint64_t {
    kStreamSurface = 1, // mortality-surface noise, then keyed by (scenario, year)
    kStreamDeaths = 2,  // death times, keyed by (scenario[, inner], annuitant id)
    kStreamDrift = 3,   // drift-parameter draws, keyed by scenario
};

/// Inverse of the standard normal CDF, accurate to better than 1e-9 absolute
/// over u in [1e-10, 1 - 1e-10] (rational approximation, Wichura's algorithm).
double inverse_normal_cdf(double u);

} // namespace longrisk
