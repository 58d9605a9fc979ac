#ifndef CDIFF_RNG_HPP
#define CDIFF_RNG_HPP

#include <cstdint>

namespace cdiff {

/// Philox2x64-10 counter-based generator. Streams are independent blocks of
/// the 128-bit counter space: stream id occupies the high word, the position
/// within the stream the low word. Draws are therefore reproducible for a
/// fixed (seed, stream) no matter how work is scheduled across workers.
class Philox {
public:
    Philox(std::uint64_t seed, std::uint64_t stream)
        : key_(seed), ctr_hi_(stream), ctr_lo_(0), have_spare_(false), spare_(0) {}

    std::uint64_t next_u64();

    /// Uniform draw strictly inside (0, 1).
    double uniform();

private:
    void block(std::uint64_t& out0, std::uint64_t& out1);

    std::uint64_t key_;
    std::uint64_t ctr_hi_;
    std::uint64_t ctr_lo_;
    bool have_spare_;
    std::uint64_t spare_;
};

/// One replication's random stream with the distribution draws the
/// simulators need.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream) : gen_(seed, stream) {}

    double uniform() { return gen_.uniform(); }
    double normal();
    double normal(double mean, double sd) { return mean + sd * normal(); }
    /// Gamma(shape, scale) via Marsaglia-Tsang.
    double gamma(double shape, double scale);
    long poisson(double mean);

private:
    Philox gen_;
};

}  // namespace cdiff

#endif  // CDIFF_RNG_HPP
