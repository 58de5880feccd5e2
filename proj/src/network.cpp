#include "dtrl/network.hpp"

#include "dtrl/info_theory.hpp"

namespace dtrl::net {

std::vector<std::size_t> derangement_permutation(std::size_t n, Rng& rng) {
    if (n < 2) {
        throw ValidationError("derangement_permutation: need n >= 2");
    }
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) {
        perm[i] = i;
    }
    rng.shuffle(perm);
    std::vector<std::size_t> fixed;
    for (std::size_t i = 0; i < n; ++i) {
        if (perm[i] == i) {
            fixed.push_back(i);
        }
    }
    if (fixed.size() == 1) {
        // Swapping with a neighbour breaks the fixed point without creating one.
        const std::size_t i = fixed[0];
        const std::size_t j = (i + 1) % n;
        std::swap(perm[i], perm[j]);
    } else if (fixed.size() >= 2) {
        // Rotate the stuck values among the stuck positions.
        const std::size_t first = perm[fixed[0]];
        for (std::size_t k = 0; k + 1 < fixed.size(); ++k) {
            perm[fixed[k]] = perm[fixed[k + 1]];
        }
        perm[fixed.back()] = first;
    }
    return perm;
}

double variational_bound(const std::vector<int>& labels, std::size_t num_classes,
                         double mean_cross_entropy) {
    if (labels.empty()) {
        throw ValidationError("variational_bound: empty label vector");
    }
    std::vector<double> freq(num_classes, 0.0);
    for (int label : labels) {
        if (label < 0 || static_cast<std::size_t>(label) >= num_classes) {
            throw ValidationError("variational_bound: label out of range");
        }
        freq[static_cast<std::size_t>(label)] += 1.0;
    }
    for (double& f : freq) {
        f /= static_cast<double>(labels.size());
    }
    const double h_y = info::entropy(info::DiscreteDistribution{freq});
    return h_y - mean_cross_entropy;
}

}  // namespace dtrl::net
