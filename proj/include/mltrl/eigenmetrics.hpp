#ifndef MLTRL_EIGENMETRICS_HPP
#define MLTRL_EIGENMETRICS_HPP

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "mltrl/medium.hpp"

namespace mltrl {

/// Ordered set of physical line lengths in meters. The thru is a zero-length
/// line by convention; design outputs are sorted ascending with lengths[0]==0.
struct LineSet {
    std::vector<double> lengths_m;

    LineSet() = default;
    explicit LineSet(std::vector<double> lengths);

    int size() const { return static_cast<int>(lengths_m.size()); }
    void validate() const;              // N >= 2, finite, non-negative
    bool is_design_convention() const;  // sorted ascending, first == 0
};

/// Pairwise eigengap matrix: w_ij = e^{gamma*l_ij} - e^{-gamma*l_ij} with
/// l_ij = l_i - l_j. Skew-symmetric by construction.
struct WeightingMatrix {
    Eigen::MatrixXcd entries;

    int size() const { return static_cast<int>(entries.rows()); }
};

/// Symmetric non-negative per-pair scaling applied element-wise to W.
struct ScalingMatrix {
    Eigen::MatrixXd entries;

    /// No scaling: all ones.
    static ScalingMatrix ones(int n);
    /// Occurrence weighting S = q*q^T from a per-line multiplicity weight.
    static ScalingMatrix occurrence(const Eigen::VectorXd& q);
    /// Occurrence weights derived from repeated lengths in the set.
    static ScalingMatrix occurrence_from_lines(const LineSet& lines,
                                               double tol_m = 1e-15);
    /// Norm-order weighting |W|^(m-1) element-wise.
    static ScalingMatrix norm_order(const WeightingMatrix& w, double m);

    void validate() const; // symmetric, >= 0, not identically zero
};

/// How to build the per-frequency scaling matrix inside a sweep.
struct ScalingSpec {
    enum class Kind { None, Occurrence, NormOrder };
    Kind kind = Kind::None;
    double norm_m = 1.0;

    static ScalingSpec none() { return {}; }
    static ScalingSpec occurrence() { return {Kind::Occurrence, 1.0}; }
    static ScalingSpec norm_order(double m) { return {Kind::NormOrder, m}; }

    ScalingMatrix materialize(const LineSet& lines, const WeightingMatrix& w) const;
};

/// Per-frequency metric curve.
struct PhaseCurve {
    std::vector<double> frequency_hz;
    std::vector<double> lambda;
    std::vector<double> kappa;
    std::vector<double> phi_deg;
    std::vector<bool> degenerate;

    std::size_t size() const { return frequency_hz.size(); }
};

/// Builds the pairwise eigengap matrix for a line set at a fixed gamma.
WeightingMatrix build_weighting(const LineSet& lines, std::complex<double> gamma);

/// Calibration eigenvalue: half the squared Frobenius norm of W, equal to
/// the sum of squared pair eigengaps.
double lambda_value(const WeightingMatrix& w);

/// Self-weighted normalized eigenvalue. With unit scaling this is
/// ||vec(W)||_2^2 / ||vec(W)||_1, bounded by the smallest and largest pair
/// eigengap. An all-null W yields 0 with *degenerate set instead of NaN.
double kappa_value(const WeightingMatrix& w, const ScalingMatrix& s,
                   bool* degenerate = nullptr);

/// Effective phase in degrees: arcsin(kappa/2), truncated at 90.
double phase_from_kappa(double kappa);

/// lambda, kappa and effective phase across a frequency grid.
PhaseCurve effective_phase(const LineSet& lines, const DispersionModel& model,
                           const FrequencyGrid& grid,
                           const ScalingSpec& scaling = ScalingSpec::none());

/// Superseded pair-count normalization arcsin(sqrt(lambda/C(N,2))/2), kept
/// for comparison; it over-counts repeated line pairs.
double effective_phase_rms(const LineSet& lines, const DispersionModel& model,
                           double f_hz);

/// Row vector d(lambda)/d(l_i). Components sum to zero because lambda
/// depends on length differences only.
Eigen::RowVectorXd lambda_jacobian(const LineSet& lines,
                                   const DispersionModel& model, double f_hz);

/// Same Jacobian evaluated at a precomputed gamma.
Eigen::RowVectorXd lambda_jacobian_at(const LineSet& lines,
                                      std::complex<double> gamma);

} // namespace mltrl

#endif
