#pragma once

#include <cmath>
#include <stdexcept>

namespace tcqkd {

// Shannon entropy of a binary variable, in bits; h(0) = h(1) = 0.
inline double binary_entropy(double x) {
    if (x < 0.0 || x > 1.0) throw std::invalid_argument("binary_entropy argument outside [0, 1]");
    if (x == 0.0 || x == 1.0) return 0.0;
    return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

// Alice-Bob mutual information per sifted bit: the sifted key is a binary
// symmetric channel with crossover q, so I_AB = 1 - h(q).
inline double mutual_info_ab(double q) {
    if (q < 0.0 || q > 0.5) throw std::invalid_argument("QBER must be in [0, 1/2]");
    return 1.0 - binary_entropy(q);
}

}  // namespace tcqkd
