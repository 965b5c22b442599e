// SPDX-License-Identifier: Apache-2.0
#include "fadechan/numerics/sobol.hpp"

#include <bit>

#include "fadechan/error.hpp"

namespace fadechan {

namespace {

struct Primitive {
    int degree;
    std::uint32_t coeffs;  // interior coefficients a_1..a_{s-1}, a_1 most significant
    std::array<std::uint32_t, 8> m;
};

// Dimensions 2..16 of new-joe-kuo-6.21201; dimension 1 is the van der Corput sequence.
constexpr Primitive kPrimitives[SobolSequence::kMaxDims - 1] = {
    {1, 0u, {1}},
    {2, 1u, {1, 3}},
    {3, 1u, {1, 3, 1}},
    {3, 2u, {1, 1, 1}},
    {4, 1u, {1, 1, 3, 3}},
    {4, 4u, {1, 3, 5, 13}},
    {5, 2u, {1, 1, 5, 5, 17}},
    {5, 4u, {1, 1, 5, 5, 5}},
    {5, 7u, {1, 1, 7, 11, 19}},
    {5, 11u, {1, 1, 5, 1, 1}},
    {5, 13u, {1, 1, 1, 3, 11}},
    {5, 14u, {1, 3, 5, 5, 31}},
    {6, 1u, {1, 3, 3, 9, 7, 49}},
    {6, 13u, {1, 1, 1, 15, 21, 21}},
    {6, 16u, {1, 3, 1, 13, 27, 49}},
};

}  // namespace

SobolSequence::SobolSequence(std::size_t dims) : dims_(dims), directions_(dims), shift_(dims, 0u) {
    if (dims == 0 || dims > kMaxDims) throw DomainError("SobolSequence: unsupported dimension");
    constexpr int B = kBits;
    for (int k = 0; k < B; ++k) directions_[0][k] = 1u << (B - 1 - k);
    for (std::size_t d = 1; d < dims; ++d) {
        const Primitive& p = kPrimitives[d - 1];
        const int s = p.degree;
        std::array<std::uint32_t, B> m{};
        for (int k = 0; k < s; ++k) m[k] = p.m[k];
        for (int k = s; k < B; ++k) {
            std::uint32_t value = m[k - s] ^ (m[k - s] << s);
            for (int j = 1; j < s; ++j) {
                if ((p.coeffs >> (s - 1 - j)) & 1u) value ^= m[k - j] << j;
            }
            m[k] = value;
        }
        for (int k = 0; k < B; ++k) directions_[d][k] = m[k] << (B - 1 - k);
    }
}

void SobolSequence::scramble(RngStream& rng) {
    constexpr int B = kBits;
    for (std::size_t d = 0; d < dims_; ++d) {
        // Row r of the lower-triangular matrix acts on digit r (bit B-1-r):
        // unit diagonal, random entries for the more significant digits.
        std::array<std::uint32_t, B> rows{};
        for (int r = 0; r < B; ++r) {
            const std::uint32_t diag = 1u << (B - 1 - r);
            const std::uint32_t above = r == 0 ? 0u : ~((diag << 1) - 1u);
            rows[r] = diag | (rng.next_u32() & above);
        }
        for (auto& v : directions_[d]) {
            std::uint32_t scrambled = 0;
            for (int r = 0; r < B; ++r) {
                if (std::popcount(v & rows[r]) & 1) scrambled |= 1u << (B - 1 - r);
            }
            v = scrambled;
        }
        shift_[d] = rng.next_u32();
    }
}

void SobolSequence::integer_point(std::uint64_t index, std::span<std::uint32_t> out) const {
    if (out.size() != dims_) throw DomainError("SobolSequence: output size mismatch");
    if (index >> kBits) throw DomainError("SobolSequence: index exceeds 2^32");
    const std::uint64_t gray = index ^ (index >> 1);
    for (std::size_t d = 0; d < dims_; ++d) {
        std::uint32_t x = shift_[d];
        std::uint64_t bits = gray;
        while (bits) {
            const int k = std::countr_zero(bits);
            x ^= directions_[d][k];
            bits &= bits - 1;
        }
        out[d] = x;
    }
}

void SobolSequence::point(std::uint64_t index, std::span<double> out) const {
    std::array<std::uint32_t, kMaxDims> digits{};
    integer_point(index, std::span<std::uint32_t>(digits.data(), dims_));
    for (std::size_t d = 0; d < dims_; ++d) out[d] = (static_cast<double>(digits[d]) + 0.5) * 0x1.0p-32;
}

}  // namespace fadechan
