#include "dtrl/info_theory.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "dtrl/errors.hpp"
#include "dtrl/rng.hpp"

namespace dtrl::info {

namespace {

double plogp(double p) {
    return p < kZeroFloor ? 0.0 : p * std::log(p);
}

void check_rank(const DiscreteJoint& joint, std::size_t want, const char* op) {
    if (joint.rank() != want) {
        throw DimensionError(std::string(op) + " requires a " + std::to_string(want) +
                             "-axis joint, got " + std::to_string(joint.rank()));
    }
}

void validate_channel(const std::vector<std::vector<double>>& channel, std::size_t rows,
                      const char* name) {
    if (channel.size() != rows) {
        throw DimensionError(std::string(name) + ": expected " + std::to_string(rows) + " rows");
    }
    for (const auto& row : channel) {
        if (row.empty() || row.size() != channel.front().size()) {
            throw DimensionError(std::string(name) + ": ragged channel matrix");
        }
        DiscreteDistribution{row}.validate();
    }
}

}  // namespace

void DiscreteDistribution::validate() const {
    if (probs.empty()) {
        throw ValidationError("distribution has no outcomes");
    }
    double sum = 0.0;
    for (double p : probs) {
        if (!(p >= 0.0)) {
            throw ValidationError("distribution entry is negative or NaN");
        }
        sum += p;
    }
    if (std::abs(sum - 1.0) > kProbTolerance) {
        throw ValidationError("distribution sums to " + std::to_string(sum) + ", not 1");
    }
}

double entropy(const DiscreteDistribution& dist) {
    dist.validate();
    double h = 0.0;
    for (double p : dist.probs) {
        h -= plogp(p);
    }
    return h < 0.0 ? 0.0 : h;
}

DiscreteJoint::DiscreteJoint(std::vector<std::size_t> dims, std::vector<double> table,
                             std::vector<std::string> axis_names)
    : dims_(std::move(dims)), table_(std::move(table)), axis_names_(std::move(axis_names)) {
    if (dims_.size() != 2 && dims_.size() != 3) {
        throw DimensionError("joint must have 2 or 3 axes, got " + std::to_string(dims_.size()));
    }
    std::size_t cells = 1;
    for (std::size_t d : dims_) {
        if (d == 0) {
            throw DimensionError("joint axis of size 0");
        }
        cells *= d;
    }
    if (table_.size() != cells) {
        throw DimensionError("joint table has " + std::to_string(table_.size()) +
                             " cells, expected " + std::to_string(cells));
    }
    if (!axis_names_.empty() && axis_names_.size() != dims_.size()) {
        throw DimensionError("axis_names count does not match axis count");
    }
    double sum = 0.0;
    for (double p : table_) {
        if (!(p >= 0.0)) {
            throw ValidationError("joint entry is negative or NaN");
        }
        sum += p;
    }
    if (std::abs(sum - 1.0) > kProbTolerance) {
        throw ValidationError("joint sums to " + std::to_string(sum) + ", not 1");
    }
}

DiscreteJoint DiscreteJoint::random(const std::vector<std::size_t>& dims, std::uint64_t seed) {
    std::size_t cells = 1;
    for (std::size_t d : dims) {
        cells *= d;
    }
    Rng rng = substream(seed, "random_joint");
    std::vector<double> table(cells);
    double sum = 0.0;
    for (double& cell : table) {
        cell = rng.exponential();
        sum += cell;
    }
    for (double& cell : table) {
        cell /= sum;
    }
    return DiscreteJoint(dims, std::move(table));
}

DiscreteJoint DiscreteJoint::markov_chain(const DiscreteDistribution& px,
                                          const std::vector<std::vector<double>>& channel_z_given_x,
                                          const std::vector<std::vector<double>>& channel_y_given_z) {
    px.validate();
    const std::size_t nx = px.probs.size();
    validate_channel(channel_z_given_x, nx, "channel p(z|x)");
    const std::size_t nz = channel_z_given_x.front().size();
    validate_channel(channel_y_given_z, nz, "channel p(y|z)");
    const std::size_t ny = channel_y_given_z.front().size();

    std::vector<double> table(nx * nz * ny, 0.0);
    for (std::size_t x = 0; x < nx; ++x) {
        for (std::size_t z = 0; z < nz; ++z) {
            const double pxz = px.probs[x] * channel_z_given_x[x][z];
            for (std::size_t y = 0; y < ny; ++y) {
                table[(x * nz + z) * ny + y] = pxz * channel_y_given_z[z][y];
            }
        }
    }
    DiscreteJoint joint({nx, nz, ny}, std::move(table), {"X", "Z", "Y"});
    joint.markov_ = true;
    return joint;
}

double DiscreteJoint::at(std::size_t i, std::size_t j) const {
    return table_[i * dims_[1] + j];
}

double DiscreteJoint::at(std::size_t i, std::size_t j, std::size_t k) const {
    return table_[(i * dims_[1] + j) * dims_[2] + k];
}

DiscreteDistribution DiscreteJoint::marginal(std::size_t axis) const {
    if (axis >= dims_.size()) {
        throw DimensionError("marginal axis out of range");
    }
    std::vector<double> probs(dims_[axis], 0.0);
    // Strides of a row-major table.
    std::vector<std::size_t> stride(dims_.size(), 1);
    for (std::size_t a = dims_.size() - 1; a-- > 0;) {
        stride[a] = stride[a + 1] * dims_[a + 1];
    }
    for (std::size_t flat = 0; flat < table_.size(); ++flat) {
        probs[(flat / stride[axis]) % dims_[axis]] += table_[flat];
    }
    return DiscreteDistribution{std::move(probs)};
}

DiscreteJoint DiscreteJoint::pair_marginal(std::size_t axis_a, std::size_t axis_b) const {
    if (axis_a >= dims_.size() || axis_b >= dims_.size() || axis_a == axis_b) {
        throw DimensionError("pair_marginal needs two distinct valid axes");
    }
    std::vector<std::size_t> stride(dims_.size(), 1);
    for (std::size_t a = dims_.size() - 1; a-- > 0;) {
        stride[a] = stride[a + 1] * dims_[a + 1];
    }
    std::vector<double> table(dims_[axis_a] * dims_[axis_b], 0.0);
    for (std::size_t flat = 0; flat < table_.size(); ++flat) {
        const std::size_t ia = (flat / stride[axis_a]) % dims_[axis_a];
        const std::size_t ib = (flat / stride[axis_b]) % dims_[axis_b];
        table[ia * dims_[axis_b] + ib] += table_[flat];
    }
    std::vector<std::string> names;
    if (!axis_names_.empty()) {
        names = {axis_names_[axis_a], axis_names_[axis_b]};
    }
    return DiscreteJoint({dims_[axis_a], dims_[axis_b]}, std::move(table), std::move(names));
}

DiscreteJoint DiscreteJoint::load_text(std::istream& in) {
    std::string first_line;
    if (!std::getline(in, first_line)) {
        throw ValidationError("joint table: empty input");
    }
    std::istringstream header(first_line);
    std::vector<std::size_t> dims;
    std::size_t d = 0;
    while (header >> d) {
        dims.push_back(d);
    }
    if (dims.empty()) {
        throw ValidationError("joint table: first line must list axis sizes");
    }
    std::size_t cells = 1;
    for (std::size_t dim : dims) {
        cells *= dim;
    }
    std::vector<double> table;
    table.reserve(cells);
    double p = 0.0;
    while (in >> p) {
        table.push_back(p);
    }
    if (table.size() != cells) {
        throw ValidationError("joint table: expected " + std::to_string(cells) +
                              " probabilities, got " + std::to_string(table.size()));
    }
    return DiscreteJoint(dims, std::move(table));
}

DiscreteJoint DiscreteJoint::load_text_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open joint table: " + path);
    }
    return load_text(in);
}

void DiscreteJoint::save_text(std::ostream& out) const {
    for (std::size_t a = 0; a < dims_.size(); ++a) {
        out << (a ? " " : "") << dims_[a];
    }
    out << "\n";
    const std::size_t row = dims_.back();
    out.precision(17);
    for (std::size_t flat = 0; flat < table_.size(); ++flat) {
        out << table_[flat] << ((flat + 1) % row == 0 ? "\n" : " ");
    }
}

double mutual_information(const DiscreteJoint& joint) {
    check_rank(joint, 2, "mutual_information");
    const auto pu = joint.marginal(0).probs;
    const auto pv = joint.marginal(1).probs;
    double mi = 0.0;
    for (std::size_t u = 0; u < pu.size(); ++u) {
        for (std::size_t v = 0; v < pv.size(); ++v) {
            const double p = joint.at(u, v);
            if (p < kZeroFloor) {
                continue;
            }
            mi += p * std::log(p / (pu[u] * pv[v]));
        }
    }
    return mi;
}

double variation_of_information(const DiscreteJoint& joint) {
    check_rank(joint, 2, "variation_of_information");
    const double h_u = entropy(joint.marginal(0));
    const double h_v = entropy(joint.marginal(1));
    return h_u + h_v - 2.0 * mutual_information(joint);
}

InfoReport info_report(const DiscreteJoint& joint) {
    check_rank(joint, 2, "info_report");
    InfoReport report;
    report.entropy_per_axis = {entropy(joint.marginal(0)), entropy(joint.marginal(1))};
    report.mutual_info = mutual_information(joint);
    report.vi = report.entropy_per_axis[0] + report.entropy_per_axis[1] - 2.0 * report.mutual_info;
    return report;
}

double triangle_gap(const DiscreteJoint& joint3) {
    check_rank(joint3, 3, "triangle_gap");
    const double vi_uv = variation_of_information(joint3.pair_marginal(0, 1));
    const double vi_uw = variation_of_information(joint3.pair_marginal(0, 2));
    const double vi_vw = variation_of_information(joint3.pair_marginal(1, 2));
    return vi_uv + vi_uw - vi_vw;
}

double disentangle_gap(const DiscreteJoint& joint3) {
    check_rank(joint3, 3, "disentangle_gap");
    const double gap = triangle_gap(joint3);

    const double h_x = entropy(joint3.marginal(0));
    const double i_x_zr = mutual_information(joint3.pair_marginal(0, 1));
    const double i_x_zn = mutual_information(joint3.pair_marginal(0, 2));
    const double i_zr_zn = mutual_information(joint3.pair_marginal(1, 2));
    const double expanded = 2.0 * h_x + 2.0 * (i_zr_zn - i_x_zr - i_x_zn);

    if (std::abs(gap - expanded) > 1e-9) {
        throw ContractError("disentangle_gap: VI form and entropy/MI form disagree by " +
                            std::to_string(gap - expanded));
    }
    return gap;
}

DpiTriple dpi_check(const DiscreteJoint& joint3) {
    check_rank(joint3, 3, "dpi_check");
    if (!joint3.markov_constructed()) {
        throw ContractError("dpi_check requires a joint built by DiscreteJoint::markov_chain");
    }
    DpiTriple triple;
    triple.h_x = entropy(joint3.marginal(0));
    triple.i_xz = mutual_information(joint3.pair_marginal(0, 1));
    triple.i_zy = mutual_information(joint3.pair_marginal(1, 2));
    return triple;
}

}  // namespace dtrl::info
