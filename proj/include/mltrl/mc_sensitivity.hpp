#ifndef MLTRL_MC_SENSITIVITY_HPP
#define MLTRL_MC_SENSITIVITY_HPP

#include <Eigen/Dense>
#include <array>
#include <complex>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "mltrl/eigenmetrics.hpp"
#include "mltrl/medium.hpp"

namespace mltrl::mc {

using Matrix2cd = Eigen::Matrix2cd;
using Matrix4cd = Eigen::Matrix4cd;

/// Fixed permutation / signature factors of the vectorized two-port system.
const Matrix4cd& P_matrix();
const Matrix4cd& Q_matrix();

/// One simulated line measurement: the 2x2 T-parameter matrix.
struct LineMeasurement {
    Matrix2cd t;
};

/// Assembled system: vectorized measurements, determinant scaling and the
/// 4x4 weighted matrix whose eigenvectors carry the error terms.
struct SystemMatrices {
    Eigen::MatrixXcd meas;     // 4 x N, columns vec(M_i), column-major vec
    Eigen::VectorXcd dets;     // det(M_i)
    Matrix4cd f;               // weighted 4x4 system
};

/// Normalized error-box terms; all zero for identity error boxes.
struct ErrorTerms {
    std::complex<double> a21_over_a11{0.0, 0.0};
    std::complex<double> a12{0.0, 0.0};
    std::complex<double> b12_over_b11{0.0, 0.0};
    std::complex<double> b21{0.0, 0.0};
};

inline constexpr std::array<const char*, 4> kErrorTermNames = {
    "a21_over_a11", "a12", "b12_over_b11", "b21"};

struct McConfig {
    int trials = 500;
    double noise_sigma = 0.1;     // additive complex std per T-matrix entry
    double length_sigma_m = 0.0;
    double eps_sigma_real = 0.0;  // shared across lines per trial
    double eps_sigma_imag = 0.0;
    std::uint64_t seed = 1;
    int threads = 0;
};

/// Per-frequency mean absolute error of each term over the trials.
struct McResult {
    std::vector<double> frequency_hz;
    std::vector<std::array<double, 4>> mae;   // per frequency, per term
    std::vector<int> excluded;                // degenerate trials per frequency
    std::vector<double> lambda_nominal;       // for inverse-eigenvalue overlay
};

/// Ideal measurements diag(e^{-gamma l}, e^{gamma l}) with additive complex
/// Gaussian noise (real/imag each noise_sigma/sqrt(2)).
std::vector<LineMeasurement> synthesize(const LineSet& lines,
                                        std::complex<double> gamma,
                                        double noise_sigma, std::mt19937_64& rng);

/// Builds the weighted 4x4 system from measurements. The supplied pairwise
/// weighting enters conjugated so each line pair contributes |w_ij|^2;
/// noise-free identity error boxes then give diag(-lambda, 0, 0, +lambda).
SystemMatrices build_F(const std::vector<LineMeasurement>& measurements,
                       const WeightingMatrix& w);

/// The noise-free system L W L^T P Q for structure checks.
Matrix4cd ideal_system(const LineSet& lines, std::complex<double> gamma,
                       const WeightingMatrix& w);

/// Recovers the normalized error terms from the eigenvectors of F paired
/// with the +/- lambda eigenvalues. Throws DegenerateError when the measured
/// eigenvalue magnitude falls below 1e-9 * ||F||.
ErrorTerms extract_error_terms(const Matrix4cd& f, double lambda_nominal);

/// Monte Carlo sweep: per trial, lengths and permittivity are perturbed once
/// and fresh measurement noise is drawn per frequency, while the weighting
/// stays at nominal. Deterministic per seed, trial-parallel.
McResult run_mc(const LineSet& lines, const DispersionModel& model,
                const FrequencyGrid& grid, const McConfig& cfg);

/// Jacobian of the index-th eigenvector of F given the Jacobian of vec(F)
/// (16 x p, column-major). Eigenvalues are sorted by real part; only the
/// simple +/- lambda indices (0 and 3) are valid.
Eigen::MatrixXcd eigenvector_jacobian(const Matrix4cd& f,
                                      const Eigen::MatrixXcd& j_f, int index);

/// Gauge-fixed variant: Jacobian of the eigenvector normalized to unit
/// first entry, comparable against finite differences.
Eigen::MatrixXcd eigenvector_jacobian_normalized(const Matrix4cd& f,
                                                 const Eigen::MatrixXcd& j_f,
                                                 int index, int norm_entry);

} // namespace mltrl::mc

#endif
