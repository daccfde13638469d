#pragma once

#include <array>
#include <cstdint>

namespace pfnn2 {

// Universal sample unit: a spatial coordinate (up to 3 dims used) plus time.
// Steady problems simply ignore t.
struct Point {
    std::array<double, 3> x{0.0, 0.0, 0.0};
    double t = 0.0;
};

enum class Precision : std::uint8_t { F32 = 32, F64 = 64 };

}  // namespace pfnn2
