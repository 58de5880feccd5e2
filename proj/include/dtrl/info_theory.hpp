#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace dtrl::info {

// Probability tables must sum to 1 within this tolerance.
inline constexpr double kProbTolerance = 1e-9;
// Entries below this are treated as exact zeros (0 log 0 := 0).
inline constexpr double kZeroFloor = 1e-15;

struct DiscreteDistribution {
    std::vector<double> probs;

    // Throws ValidationError unless entries are >= 0 and sum to 1 within
    // kProbTolerance.
    void validate() const;
};

// Shannon entropy in nats.
double entropy(const DiscreteDistribution& dist);

// A finite joint probability table over 2 or 3 variables, row-major.
class DiscreteJoint {
public:
    DiscreteJoint(std::vector<std::size_t> dims, std::vector<double> table,
                  std::vector<std::string> axis_names = {});

    // Normalized exponential draws; the canonical random-joint generator used
    // by every seeded property suite.
    static DiscreteJoint random(const std::vector<std::size_t>& dims, std::uint64_t seed);

    // p(x, z, y) = p(x) p(z|x) p(y|z). The only way to build a joint that
    // dpi_check accepts: the Markov precondition is structural.
    static DiscreteJoint markov_chain(const DiscreteDistribution& px,
                                      const std::vector<std::vector<double>>& channel_z_given_x,
                                      const std::vector<std::vector<double>>& channel_y_given_z);

    std::size_t rank() const { return dims_.size(); }
    const std::vector<std::size_t>& dims() const { return dims_; }
    const std::vector<double>& table() const { return table_; }
    const std::vector<std::string>& axis_names() const { return axis_names_; }
    bool markov_constructed() const { return markov_; }

    double at(std::size_t i, std::size_t j) const;
    double at(std::size_t i, std::size_t j, std::size_t k) const;

    DiscreteDistribution marginal(std::size_t axis) const;
    DiscreteJoint pair_marginal(std::size_t axis_a, std::size_t axis_b) const;

    // Plain-text format: first line = space-separated axis sizes, then
    // row-major probabilities in free whitespace layout.
    static DiscreteJoint load_text(std::istream& in);
    static DiscreteJoint load_text_file(const std::string& path);
    void save_text(std::ostream& out) const;

private:
    std::vector<std::size_t> dims_;
    std::vector<double> table_;
    std::vector<std::string> axis_names_;
    bool markov_ = false;
};

struct InfoReport {
    std::vector<double> entropy_per_axis;  // nats
    double mutual_info = 0.0;              // nats
    double vi = 0.0;                       // nats
};

// I(U;V) in nats; joint must have 2 axes.
double mutual_information(const DiscreteJoint& joint);

// VI(U;V) = H(U) + H(V) - 2 I(U;V).
double variation_of_information(const DiscreteJoint& joint);

InfoReport info_report(const DiscreteJoint& joint);

// VI(U;V) + VI(U;W) - VI(V;W) over a 3-axis joint; >= 0 up to rounding for
// every valid joint (VI triangle inequality, with U in the shared slot).
double triangle_gap(const DiscreteJoint& joint3);

// Over (X, Zr, Zn): VI(X;Zr) + VI(X;Zn) - VI(Zr;Zn). Also evaluates the
// expanded form 2 H(X) + 2 [I(Zr;Zn) - I(X;Zr) - I(X;Zn)] and throws
// ContractError if the two disagree beyond 1e-9.
double disentangle_gap(const DiscreteJoint& joint3);

struct DpiTriple {
    double h_x = 0.0;
    double i_xz = 0.0;
    double i_zy = 0.0;
};

// Data processing inequality readout for a Markov-constructed joint
// X -> Z -> Y: returns (H(X), I(X;Z), I(Z;Y)), a non-increasing triple.
// Throws ContractError when the joint was not built by markov_chain().
DpiTriple dpi_check(const DiscreteJoint& joint3);

}  // namespace dtrl::info
