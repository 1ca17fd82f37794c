#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace smgo {

/// SplitMix64 step; the workhorse for seed derivation and digital shifts.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Deterministic seed derivation for sub-streams (runs, noise channels, ...).
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t salt) {
    std::uint64_t s = master ^ (salt * 0xD6E8FEB86659FD93ULL + 0x2545F4914F6CDD1DULL);
    return splitmix64(s);
}

/// Uniform double in [0, 1) from a 64-bit word.
inline double u64_to_unit(std::uint64_t w) {
    return static_cast<double>(w >> 11) * 0x1.0p-53;
}

namespace detail {

struct SobolPoly {
    unsigned degree;
    unsigned coeffs;                   // inner polynomial coefficient bits
    std::array<unsigned, 8> m;         // initial odd direction integers
};

// Primitive polynomials and initial direction numbers for dimensions 2..16
// (dimension 1 is the van der Corput sequence in base 2).
inline constexpr std::array<SobolPoly, 15> sobol_polys{{
    {1, 0, {1}},
    {2, 1, {1, 3}},
    {3, 1, {1, 3, 1}},
    {3, 2, {1, 1, 1}},
    {4, 1, {1, 1, 3, 3}},
    {4, 4, {1, 3, 5, 13}},
    {5, 2, {1, 1, 5, 5, 17}},
    {5, 4, {1, 1, 5, 5, 5}},
    {5, 7, {1, 1, 7, 11, 19}},
    {5, 11, {1, 1, 5, 1, 1}},
    {5, 13, {1, 1, 1, 3, 11}},
    {5, 14, {1, 3, 5, 5, 31}},
    {6, 1, {1, 3, 3, 9, 7, 49}},
    {6, 13, {1, 1, 1, 15, 21, 21}},
    {6, 16, {1, 3, 1, 13, 27, 49}},
}};

} // namespace detail

/// Gray-code Sobol generator with an optional per-dimension digital shift.
///
/// Points are addressed by index; index 0 maps to the shift vector itself
/// (the origin when the shift seed is zero). A nonzero seed XOR-scrambles
/// every dimension, which preserves low discrepancy and distinctness.
class SobolSequence {
  public:
    static constexpr std::size_t max_dimension = 16;

    explicit SobolSequence(std::size_t dimension, std::uint64_t shift_seed = 0)
        : dim_(dimension) {
        if (dimension == 0 || dimension > max_dimension)
            throw std::invalid_argument("SobolSequence: dimension out of range");
        dirs_.resize(dim_);
        for (unsigned k = 0; k < 32; ++k)
            dirs_[0][k] = 1u << (31 - k);
        for (std::size_t d = 1; d < dim_; ++d) {
            const auto& p = detail::sobol_polys[d - 1];
            const unsigned s = p.degree;
            std::array<std::uint32_t, 32> m{};
            for (unsigned k = 0; k < s; ++k)
                m[k] = p.m[k];
            for (unsigned k = s; k < 32; ++k) {
                std::uint32_t v = m[k - s] ^ (m[k - s] << s);
                for (unsigned i = 1; i < s; ++i)
                    if ((p.coeffs >> (s - 1 - i)) & 1u)
                        v ^= m[k - i] << i;
                m[k] = v;
            }
            for (unsigned k = 0; k < 32; ++k)
                dirs_[d][k] = m[k] << (31 - k);
        }
        shift_.assign(dim_, 0);
        if (shift_seed != 0) {
            std::uint64_t state = shift_seed;
            for (auto& w : shift_)
                w = static_cast<std::uint32_t>(splitmix64(state) >> 32);
        }
    }

    std::size_t dimension() const { return dim_; }

    /// The index-th point of the (shifted) sequence, coordinates in [0, 1).
    void point(std::uint64_t index, double* out) const {
        const std::uint64_t gray = index ^ (index >> 1);
        for (std::size_t d = 0; d < dim_; ++d) {
            std::uint32_t x = shift_[d];
            std::uint64_t g = gray;
            for (unsigned b = 0; g != 0 && b < 32; ++b, g >>= 1)
                if (g & 1u)
                    x ^= dirs_[d][b];
            out[d] = static_cast<double>(x) * 0x1.0p-32;
        }
    }

    std::vector<double> point(std::uint64_t index) const {
        std::vector<double> out(dim_);
        point(index, out.data());
        return out;
    }

  private:
    std::size_t dim_;
    std::vector<std::array<std::uint32_t, 32>> dirs_;
    std::vector<std::uint32_t> shift_;
};

} // namespace smgo
