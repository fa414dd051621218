#include "porescale/sobol.hpp"

#include <array>
#include <bit>

namespace porescale {

namespace {
constexpr int kBits = 32;

// v[d][k] = direction number k (1-based bit position) in 32-bit fixed point.
std::array<std::array<std::uint32_t, kBits>, 2> direction_numbers() {
    std::array<std::array<std::uint32_t, kBits>, 2> v{};
    for (int k = 0; k < kBits; ++k)
        v[0][k] = 1u << (kBits - 1 - k);
    // dimension 2: m_k = 2 m_{k-1} XOR m_{k-1}  (poly x + 1, m1 = 1)
    std::uint32_t m = 1;
    for (int k = 0; k < kBits; ++k) {
        v[1][k] = m << (kBits - 1 - k);
        m = (m << 1) ^ m;
    }
    return v;
}
} // namespace

std::vector<std::pair<double, double>> sobol2d(std::size_t n) {
    static const auto v = direction_numbers();
    std::vector<std::pair<double, double>> pts;
    pts.reserve(n);
    std::uint32_t x0 = 0, x1 = 0;
    for (std::size_t i = 1; i <= n; ++i) {
        // Gray-code increment: flip the direction given by the lowest zero
        // bit of i-1, which equals countr_one(i-1).
        const int c = std::countr_one(static_cast<std::uint32_t>(i - 1));
        x0 ^= v[0][c];
        x1 ^= v[1][c];
        pts.emplace_back(static_cast<double>(x0) * 0x1.0p-32,
                         static_cast<double>(x1) * 0x1.0p-32);
    }
    return pts;
}

} // namespace porescale
