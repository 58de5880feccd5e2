#include "dtrl/density_ratio.hpp"

#include <algorithm>
#include <cmath>

#include "dtrl/losses.hpp"
#include "dtrl/optimizer.hpp"

namespace dtrl::net {

void DensityRatioConfig::validate() const {
    if (steps == 0 || batch < 2) {
        throw ConfigError("density-ratio training needs steps >= 1 and batch >= 2");
    }
    if (lr <= 0.0) {
        throw ConfigError("density-ratio lr must be positive");
    }
}

DensityRatioEstimator::DensityRatioEstimator(std::size_t dim_a, std::size_t dim_b,
                                             DensityRatioConfig config)
    : config_(std::move(config)) {
    config_.validate();
    std::vector<std::size_t> widths;
    widths.push_back(dim_a + dim_b);
    for (std::size_t h : config_.hidden) {
        widths.push_back(h);
    }
    widths.push_back(1);
    spec_ = nn::MLPSpec::rectifier_stack(std::move(widths), nn::Activation::affine);
    Rng init_rng = substream(config_.seed, "density_ratio/init");
    nn::init_mlp_params(params_, spec_, "disc", init_rng);
}

void DensityRatioEstimator::fit(const nn::Mat<double>& a, const nn::Mat<double>& b) {
    if (a.rows != b.rows) {
        throw DimensionError("density-ratio fit: sample counts disagree");
    }
    if (a.rows < 2) {
        throw ValidationError("density-ratio fit: need at least 2 joint samples");
    }
    Rng batch_rng = substream(config_.seed, "density_ratio/batch");
    Rng shuffle_rng = substream(config_.seed, "density_ratio/shuffle");
    nn::OptimConfig opt;
    opt.kind = nn::OptimKind::adam;
    opt.lr = config_.lr;

    const std::size_t batch = std::min(config_.batch, a.rows);
    const std::vector<int> zeros(batch, 0);
    const std::vector<int> ones(batch, 1);

    for (std::size_t step = 0; step < config_.steps; ++step) {
        nn::Mat<double> ba(batch, a.cols);
        nn::Mat<double> bb(batch, b.cols);
        for (std::size_t i = 0; i < batch; ++i) {
            const std::size_t row = batch_rng.index(a.rows);
            for (std::size_t j = 0; j < a.cols; ++j) {
                ba(i, j) = a(row, j);
            }
            for (std::size_t j = 0; j < b.cols; ++j) {
                bb(i, j) = b(row, j);
            }
        }
        const std::vector<std::size_t> perm = derangement_permutation(batch, shuffle_rng);
        nn::Mat<double> bb_shuf = nn::permute_rows(bb, perm);

        params_.zero_grads();
        nn::MLPCache<double> joint_cache;
        nn::Mat<double> s_joint =
            nn::mlp_forward(spec_, params_, "disc", nn::hconcat(ba, bb), &joint_cache);
        nn::MLPCache<double> shuf_cache;
        nn::Mat<double> s_shuf =
            nn::mlp_forward(spec_, params_, "disc", nn::hconcat(ba, bb_shuf), &shuf_cache);
        auto joint_loss = nn::binary_logistic_loss(s_joint, zeros);
        auto shuf_loss = nn::binary_logistic_loss(s_shuf, ones);
        nn::mlp_backward(spec_, params_, "disc", joint_cache, joint_loss.grad);
        nn::mlp_backward(spec_, params_, "disc", shuf_cache, shuf_loss.grad);
        nn::optimizer_step(params_, opt);
    }
    fitted_ = true;
}

double DensityRatioEstimator::estimate(const nn::Mat<double>& a, const nn::Mat<double>& b) const {
    if (!fitted_) {
        throw ContractError("density-ratio estimate called before fit");
    }
    if (a.rows != b.rows) {
        throw DimensionError("density-ratio estimate: sample counts disagree");
    }
    nn::Mat<double> s = nn::mlp_forward(spec_, params_, "disc", nn::hconcat(a, b));
    double total = 0.0;
    for (std::size_t i = 0; i < s.rows; ++i) {
        total -= std::clamp(s.data[i], -kDiscLogitClamp, kDiscLogitClamp);
    }
    return total / static_cast<double>(s.rows);
}

std::pair<nn::Mat<double>, nn::Mat<double>> sample_correlated_gaussian(std::size_t n, double rho,
                                                                       std::uint64_t seed) {
    if (rho <= -1.0 || rho >= 1.0) {
        throw ValidationError("correlation must lie in (-1, 1)");
    }
    Rng rng = substream(seed, "gaussian_pair");
    nn::Mat<double> a(n, 1);
    nn::Mat<double> b(n, 1);
    const double noise = std::sqrt(1.0 - rho * rho);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = rng.normal();
        a(i, 0) = x;
        b(i, 0) = rho * x + noise * rng.normal();
    }
    return {std::move(a), std::move(b)};
}

std::pair<nn::Mat<double>, nn::Mat<double>> sample_discrete_joint(const info::DiscreteJoint& joint,
                                                                  std::size_t n,
                                                                  std::uint64_t seed) {
    if (joint.rank() != 2) {
        throw DimensionError("sample_discrete_joint: need a 2-axis joint");
    }
    Rng rng = substream(seed, "discrete_pair");
    const auto& table = joint.table();
    nn::Mat<double> a(n, 1);
    nn::Mat<double> b(n, 1);
    const std::size_t cols = joint.dims()[1];
    for (std::size_t i = 0; i < n; ++i) {
        double u = rng.uniform();
        std::size_t cell = table.size() - 1;
        for (std::size_t c = 0; c < table.size(); ++c) {
            u -= table[c];
            if (u <= 0.0) {
                cell = c;
                break;
            }
        }
        a(i, 0) = static_cast<double>(cell / cols);
        b(i, 0) = static_cast<double>(cell % cols);
    }
    return {std::move(a), std::move(b)};
}

}  // namespace dtrl::net
