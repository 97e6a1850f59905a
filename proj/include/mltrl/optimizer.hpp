#ifndef MLTRL_OPTIMIZER_HPP
#define MLTRL_OPTIMIZER_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "mltrl/eigenmetrics.hpp"
#include "mltrl/medium.hpp"

namespace mltrl::opt {

/// Linear constraints on the length vector. First line is anchored at zero
/// and the last at l_max; interior lines stay ordered with at least
/// l_min_gap between neighbours.
struct ConstraintSet {
    double l_max_m = 0.0;
    double l_min_gap_m = 0.0;
    /// Extra equality rows: coefficients over all N lengths = rhs meters.
    std::vector<std::pair<Eigen::RowVectorXd, double>> equalities;
    std::optional<double> quantization_step_m;

    void validate(int n_lines) const;
};

enum class LossKind {
    MinmaxMean,          // worst-case plus mean of -lambda
    Regularized,         // + rms of the length-uncertainty penalty
    RegularizedEquality, // regularized with equality penalty active
};

struct LossSpec {
    LossKind kind = LossKind::MinmaxMean;
    /// Covariance of line lengths [m^2]; empty means sigma_l^2 * I.
    Eigen::MatrixXd length_cov;
    double length_sigma_m = 0.0;
    double equality_penalty_weight = 1e8; // per meter^2
};

struct OptimizerConfig {
    int population_factor = 15;
    int max_generations = 2000;
    double mutation_f = 0.7;
    double crossover_cr = 0.9;
    std::uint64_t seed = 1;
    int grid_points = 201;
    double convergence_tol = 1e-10;
    int threads = 0; // 0 = hardware concurrency
    /// Called once per generation with (generation, best loss so far).
    std::function<void(int, double)> progress;
};

struct DesignProblem {
    int n_lines = 0;
    ConstraintSet constraints;
    LossSpec loss;
    DispersionModel model = DispersionModel::constant(1.0);
    double f_lo_target_hz = 0.0;
    double f_hi_target_hz = 0.0;
};

struct DesignResult {
    LineSet lengths;
    double loss = 0.0;
    double f_min_anchor_hz = 0.0;
    double f_max_anchor_hz = 0.0;
    PhaseCurve phase;
    bool feasible = false;
    bool converged = false;
    int generations_run = 0;
};

/// Optimization anchors: the band-0 quarter-wave center of the longest line
/// and the quarter-wave center of the lowest band at or above the upper
/// target. Solves the band-center condition with the actual dispersion.
std::pair<double, double> anchor_frequencies(double l_max_m,
                                             const DispersionModel& model,
                                             double f_lo_target_hz,
                                             double f_hi_target_hz);

/// Worst-case-plus-mean objective over the grid; lower is better, and a
/// flat response of value v scores -v.
double loss_minmax_mean(const LineSet& lines, const DispersionModel& model,
                        const FrequencyGrid& grid);

/// Adds the rms length-uncertainty penalty sqrt(mean_f J Sigma J^T).
double loss_regularized(const LineSet& lines, const DispersionModel& model,
                        const FrequencyGrid& grid, const Eigen::MatrixXd& cov);

/// Differential-evolution search (rand/1/bin) over the interior lengths.
/// Deterministic for a fixed seed regardless of thread count.
DesignResult optimize(const DesignProblem& problem, const OptimizerConfig& cfg);

/// End-to-end design request used by the command-line driver. When n_lines
/// or l_max are unset they are derived from the band arithmetic and the
/// line-count rules (lossy media instead grow the count until the margin
/// holds). The phase curve is evaluated on the margin-check band, which
/// starts at the longest line's band-0 quarter-wave anchor.
struct PipelineRequest {
    DispersionModel model = DispersionModel::constant(1.0);
    double f_min_hz = 0.0;
    double f_max_hz = 0.0;
    double margin_deg = 30.0;
    int n_lines = 0;              // <= 0: derive from the line-count rules
    double l_max_m = 0.0;         // <= 0: derive from f_min and margin
    double l_min_gap_m = 0.0;
    std::optional<double> quantization_step_m;
    std::vector<std::pair<Eigen::RowVectorXd, double>> equalities;
    LossSpec loss;
    OptimizerConfig optimizer;
    int margin_grid_points = 501;
};

struct PipelineResult {
    DesignResult design;
    int n_lines = 0;
    double l_max_m = 0.0;
    double eps_real_used = 0.0;    // representative eps' for the closed forms
    double margin_check_lo_hz = 0.0;
    double margin_check_hi_hz = 0.0;
    double min_phi_deg = 0.0;
    bool margin_satisfied = false;
};

PipelineResult design_pipeline(const PipelineRequest& req);

} // namespace mltrl::opt

#endif
