#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace invlab {

/// Seeded uniform/Gaussian stream over mt19937_64. Gaussians use an
/// explicit Box-Muller transform so that streams are bit-reproducible
/// across standard-library implementations.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : eng_(seed) {}

    /// Uniform in the open interval (0,1).
    double uniform() {
        return (static_cast<double>(eng_() >> 11) + 0.5) * 0x1.0p-53;
    }

    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 2.0 * M_PI * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

private:
    std::mt19937_64 eng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

} // namespace invlab
