// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>

namespace fadechan {

// Philox4x32-10 block function (Salmon et al.): one 128-bit counter block
// under a 64-bit key yields four 32-bit outputs.
using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;
PhiloxCounter philox4x32_10(PhiloxCounter counter, PhiloxKey key);

// Counter-based random stream. The key is the seed; the upper half of the
// counter is the stream id and the lower half the block index, so every
// (seed, stream_id) pair addresses an independent, replayable sequence.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream_id) noexcept;

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream_id() const noexcept { return stream_; }

    std::uint32_t next_u32() noexcept;
    std::uint64_t next_u64() noexcept;
    // Uniform on the open interval (0, 1) with 53 random bits.
    double uniform() noexcept;
    // Standard normal by inversion (one uniform per draw).
    double normal() noexcept;

    // Independent child stream derived from this stream's identity.
    RngStream substream(std::uint64_t index) const noexcept;

private:
    void refill() noexcept;

    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t block_ = 0;
    PhiloxCounter buffer_{};
    int used_ = 4;
};

}  // namespace fadechan
