// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "fadechan/numerics/rng.hpp"

namespace fadechan {

// Sobol low-discrepancy sequence (Joe-Kuo direction numbers, 32-bit
// digits) with optional randomization by a random lower-triangular linear
// scramble of the digits plus a random digital shift.
class SobolSequence {
public:
    static constexpr std::size_t kMaxDims = 16;
    static constexpr int kBits = 32;

    explicit SobolSequence(std::size_t dims);

    std::size_t dims() const noexcept { return dims_; }

    // Re-randomize from the given stream; the unscrambled net is restored by
    // constructing a fresh sequence.
    void scramble(RngStream& rng);

    // Raw 32-bit digits of point `index` (gray-code order).
    void integer_point(std::uint64_t index, std::span<std::uint32_t> out) const;
    // Point in the open unit cube, digits centred in their cell.
    void point(std::uint64_t index, std::span<double> out) const;

private:
    std::size_t dims_;
    std::vector<std::array<std::uint32_t, kBits>> directions_;
    std::vector<std::uint32_t> shift_;
};

}  // namespace fadechan
