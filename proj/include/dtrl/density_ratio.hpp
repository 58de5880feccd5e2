#pragma once

#include <cstdint>
#include <vector>

#include "dtrl/info_theory.hpp"
#include "dtrl/mat.hpp"
#include "dtrl/network.hpp"

namespace dtrl::net {

// Standalone density-ratio MI estimator: train a fresh discriminator to tell
// joint samples from batch-shuffled ones, then read off
// I(A;B) ~= E_joint[ log (1-D)/D ] = E_joint[ -s ].
// Runs in double precision; the inputs are small sample matrices, not text.
struct DensityRatioConfig {
    std::vector<std::size_t> hidden = {64, 64};
    std::size_t steps = 4000;
    std::size_t batch = 256;
    double lr = 1e-3;
    std::uint64_t seed = 7;

    void validate() const;
};

class DensityRatioEstimator {
public:
    DensityRatioEstimator(std::size_t dim_a, std::size_t dim_b, DensityRatioConfig config);

    // Paired rows of a and b are joint samples.
    void fit(const nn::Mat<double>& a, const nn::Mat<double>& b);

    double estimate(const nn::Mat<double>& a, const nn::Mat<double>& b) const;

    const nn::ParamStore<double>& params() const { return params_; }

private:
    DensityRatioConfig config_;
    nn::MLPSpec spec_;
    nn::ParamStore<double> params_;
    bool fitted_ = false;
};

// z0 ~ N(0,1), z1 = rho z0 + sqrt(1-rho^2) eps; exact MI is -0.5 ln(1-rho^2).
std::pair<nn::Mat<double>, nn::Mat<double>> sample_correlated_gaussian(std::size_t n, double rho,
                                                                       std::uint64_t seed);

// Outcome indices of a 2-axis joint as real-valued columns.
std::pair<nn::Mat<double>, nn::Mat<double>> sample_discrete_joint(const info::DiscreteJoint& joint,
                                                                  std::size_t n,
                                                                  std::uint64_t seed);

}  // namespace dtrl::net
