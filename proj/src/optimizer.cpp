#include "mltrl/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <thread>

#include "mltrl/line_count.hpp"
#include "mltrl/trl_classic.hpp"

namespace mltrl::opt {

namespace {

constexpr double kGapPenaltyPerMeter = 1e6;

// splitmix64, used to derive independent substreams per (seed, gen, member).
std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d649bb133111ebULL;
    return x ^ (x >> 31);
}

std::mt19937_64 substream(std::uint64_t seed, std::uint64_t gen, std::uint64_t member) {
    return std::mt19937_64(mix64(seed ^ mix64(gen ^ mix64(member))));
}

// Number of half-wavelengths accumulated by length l at frequency f.
double electrical_halfwaves(const DispersionModel& model, double f_hz, double l_m) {
    return gamma_at(model, f_hz).imag() * l_m / M_PI;
}

double solve_band_center(const DispersionModel& model, double l_m, int band,
                         double f_hint_hz) {
    const double target = band + 0.5;
    if (!model.is_dispersive()) {
        const double eps = permittivity_at(model, f_hint_hz).eps_real;
        return target * kC0 / (2.0 * l_m * std::sqrt(eps));
    }
    double lo = model.cutoff_hz();
    if (lo <= 0.0) {
        if (const auto* t = std::get_if<TabulatedModel>(&model.variant()))
            lo = t->frequencies_hz.front();
        else
            lo = std::numeric_limits<double>::min();
    } else {
        lo *= 1.0 + 1e-9;
    }
    double hi = std::max(f_hint_hz, lo * 2.0);
    if (const auto* t = std::get_if<TabulatedModel>(&model.variant())) {
        hi = t->frequencies_hz.back();
        if (electrical_halfwaves(model, hi, l_m) < target)
            throw RangeError("band center lies above the tabulated range");
    } else {
        int guard = 0;
        while (electrical_halfwaves(model, hi, l_m) < target) {
            hi *= 2.0;
            if (++guard > 200)
                throw InvalidInput("band center search failed to bracket");
        }
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (electrical_halfwaves(model, mid, l_m) < target)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

// Per-grid-point propagation constants, computed once per problem.
struct GammaGrid {
    std::vector<double> freqs;
    std::vector<std::complex<double>> gammas;
    bool lossless = true;

    static GammaGrid build(const DispersionModel& model, const FrequencyGrid& grid) {
        GammaGrid g;
        g.freqs = grid.frequencies_hz;
        g.gammas.reserve(g.freqs.size());
        for (double f : g.freqs) {
            const auto gm = gamma_at(model, f);
            if (gm.real() != 0.0) g.lossless = false;
            g.gammas.push_back(gm);
        }
        return g;
    }
};

double lambda_at(const std::vector<double>& lengths, std::complex<double> gamma,
                 bool lossless) {
    const std::size_t n = lengths.size();
    double acc = 0.0;
    if (lossless) {
        const double beta = gamma.imag();
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) {
                const double s = std::sin(beta * (lengths[i] - lengths[j]));
                acc += 4.0 * s * s;
            }
    } else {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) {
                const std::complex<double> e = std::exp(gamma * (lengths[i] - lengths[j]));
                acc += std::norm(e - 1.0 / e);
            }
    }
    return acc;
}

// J Sigma J^T at one frequency; sigma2_iso >= 0 selects the isotropic path.
double jacobian_quadratic(const std::vector<double>& lengths,
                          std::complex<double> gamma, bool lossless,
                          const Eigen::MatrixXd& cov, double sigma2_iso) {
    const std::size_t n = lengths.size();
    Eigen::RowVectorXd jac(static_cast<Eigen::Index>(n));
    if (lossless) {
        const double beta = gamma.imag();
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i) continue;
                s += std::sin(2.0 * beta * (lengths[i] - lengths[j]));
            }
            jac(static_cast<Eigen::Index>(i)) = 4.0 * beta * s;
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i) continue;
                const std::complex<double> e = std::exp(gamma * (lengths[i] - lengths[j]));
                const std::complex<double> w = e - 1.0 / e;
                s += (gamma * std::conj(w) * (e + 1.0 / e)).real();
            }
            jac(static_cast<Eigen::Index>(i)) = 2.0 * s;
        }
    }
    if (sigma2_iso >= 0.0) return sigma2_iso * jac.squaredNorm();
    return jac * cov * jac.transpose();
}

struct LossEvaluator {
    GammaGrid grid;
    LossKind kind = LossKind::MinmaxMean;
    Eigen::MatrixXd cov;
    double sigma2_iso = -1.0; // >= 0 when covariance is sigma^2 * I
    std::vector<std::pair<Eigen::RowVectorXd, double>> equalities;
    double equality_weight = 0.0;
    double l_min_gap = 0.0;

    double operator()(const std::vector<double>& lengths) const {
        double worst = -std::numeric_limits<double>::infinity();
        double mean = 0.0;
        double pen_mean = 0.0;
        const bool regularized = kind != LossKind::MinmaxMean;
        for (std::size_t k = 0; k < grid.gammas.size(); ++k) {
            const double lam = lambda_at(lengths, grid.gammas[k], grid.lossless);
            worst = std::max(worst, -lam);
            mean += lam;
            if (regularized)
                pen_mean += jacobian_quadratic(lengths, grid.gammas[k],
                                               grid.lossless, cov, sigma2_iso);
        }
        const double m = static_cast<double>(grid.gammas.size());
        double loss = 0.5 * (worst - mean / m);
        if (regularized) loss += std::sqrt(std::max(pen_mean / m, 0.0));

        for (const auto& [row, rhs] : equalities) {
            double v = -rhs;
            for (Eigen::Index i = 0; i < row.size(); ++i)
                v += row(i) * lengths[static_cast<std::size_t>(i)];
            loss += equality_weight * v * v;
        }
        double gap_violation = 0.0;
        for (std::size_t i = 1; i < lengths.size(); ++i) {
            const double gap = lengths[i] - lengths[i - 1];
            if (gap < l_min_gap) gap_violation += l_min_gap - gap;
        }
        return loss + kGapPenaltyPerMeter * gap_violation;
    }
};

// Sort interior lengths and clip them into the feasible ladder between the
// anchors; preserves ordering with at least l_min_gap between neighbours.
void repair(std::vector<double>& interior, double l_max, double gap) {
    std::sort(interior.begin(), interior.end());
    const int n_free = static_cast<int>(interior.size());
    for (int k = 0; k < n_free; ++k) {
        const double lo = gap * (k + 1);
        const double hi = l_max - gap * (n_free - k);
        interior[static_cast<std::size_t>(k)] =
            std::clamp(interior[static_cast<std::size_t>(k)], lo, hi);
    }
    for (int k = 1; k < n_free; ++k)
        interior[static_cast<std::size_t>(k)] = std::max(
            interior[static_cast<std::size_t>(k)],
            interior[static_cast<std::size_t>(k - 1)] + gap);
    for (int k = n_free - 2; k >= 0; --k)
        interior[static_cast<std::size_t>(k)] = std::min(
            interior[static_cast<std::size_t>(k)],
            interior[static_cast<std::size_t>(k + 1)] - gap);
}

std::vector<double> assemble(const std::vector<double>& interior, double l_max) {
    std::vector<double> full;
    full.reserve(interior.size() + 2);
    full.push_back(0.0);
    full.insert(full.end(), interior.begin(), interior.end());
    full.push_back(l_max);
    return full;
}

// Minimum-norm correction of the interior lengths onto the equality
// manifold; the penalty steers the search, this pins the final residual.
bool project_equalities(
    std::vector<double>& interior, double l_max,
    const std::vector<std::pair<Eigen::RowVectorXd, double>>& equalities) {
    if (equalities.empty()) return true;
    const int rows = static_cast<int>(equalities.size());
    const int free_dims = static_cast<int>(interior.size());
    Eigen::MatrixXd c_int(rows, free_dims);
    Eigen::VectorXd resid(rows);
    const std::vector<double> full = assemble(interior, l_max);
    for (int r = 0; r < rows; ++r) {
        const auto& [row, rhs] = equalities[static_cast<std::size_t>(r)];
        double v = -rhs;
        for (Eigen::Index i = 0; i < row.size(); ++i)
            v += row(i) * full[static_cast<std::size_t>(i)];
        resid(r) = -v;
        for (int d = 0; d < free_dims; ++d) c_int(r, d) = row(d + 1);
    }
    if (free_dims > 0) {
        const Eigen::VectorXd delta =
            c_int.completeOrthogonalDecomposition().solve(resid);
        for (int d = 0; d < free_dims; ++d)
            interior[static_cast<std::size_t>(d)] += delta(d);
        resid -= c_int * delta;
        std::sort(interior.begin(), interior.end());
    }
    return resid.lpNorm<Eigen::Infinity>() <= 1e-9;
}

void parallel_eval(const LossEvaluator& loss,
                   const std::vector<std::vector<double>>& candidates,
                   std::vector<double>& out, int threads) {
    const std::size_t n = candidates.size();
    out.resize(n);
    if (threads <= 0) {
        const unsigned hc = std::thread::hardware_concurrency();
        threads = hc > 0 ? static_cast<int>(hc) : 1;
    }
    threads = std::min<std::size_t>(static_cast<std::size_t>(threads), n);
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) out[i] = loss(candidates[i]);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
            for (std::size_t i = static_cast<std::size_t>(t); i < n;
                 i += static_cast<std::size_t>(threads))
                out[i] = loss(candidates[i]);
        });
    }
    for (auto& th : pool) th.join();
}

std::vector<double> quantize_and_polish(std::vector<double> interior,
                                        double l_max, double gap, double step,
                                        const LossEvaluator& loss,
                                        double& quantized_l_max) {
    quantized_l_max = std::round(l_max / step) * step;
    for (double& v : interior) v = std::round(v / step) * step;
    std::sort(interior.begin(), interior.end());

    const int n_free = static_cast<int>(interior.size());
    auto valid = [&](const std::vector<double>& cand) {
        double prev = 0.0;
        for (double v : cand) {
            if (v - prev < gap - step * 0.5 - 1e-12) return false;
            prev = v;
        }
        return quantized_l_max - prev >= gap - step * 0.5 - 1e-12 &&
               (n_free == 0 || cand.front() >= -1e-12);
    };
    auto score = [&](const std::vector<double>& cand) {
        return loss(assemble(cand, quantized_l_max));
    };
    if (n_free == 0) return interior;

    std::vector<double> best = interior;
    double best_loss = valid(best) ? score(best)
                                   : std::numeric_limits<double>::infinity();

    const double combos = std::pow(3.0, n_free);
    if (combos <= 729.0) {
        std::vector<int> offs(static_cast<std::size_t>(n_free), -1);
        while (true) {
            std::vector<double> cand = interior;
            for (int k = 0; k < n_free; ++k)
                cand[static_cast<std::size_t>(k)] +=
                    offs[static_cast<std::size_t>(k)] * step;
            std::sort(cand.begin(), cand.end());
            if (valid(cand)) {
                const double l = score(cand);
                if (l < best_loss) { best_loss = l; best = cand; }
            }
            int k = 0;
            while (k < n_free && offs[static_cast<std::size_t>(k)] == 1)
                offs[static_cast<std::size_t>(k++)] = -1;
            if (k == n_free) break;
            ++offs[static_cast<std::size_t>(k)];
        }
    } else {
        bool improved = true;
        for (int sweep = 0; sweep < 50 && improved; ++sweep) {
            improved = false;
            for (int k = 0; k < n_free; ++k) {
                for (int d : {-1, 1}) {
                    std::vector<double> cand = best;
                    cand[static_cast<std::size_t>(k)] += d * step;
                    std::sort(cand.begin(), cand.end());
                    if (!valid(cand)) continue;
                    const double l = score(cand);
                    if (l < best_loss - 1e-15) {
                        best_loss = l;
                        best = cand;
                        improved = true;
                    }
                }
            }
        }
    }
    return best;
}

} // namespace

void ConstraintSet::validate(int n_lines) const {
    if (!(l_max_m > 0.0))
        throw InfeasibleError("constraints: l_max must be > 0");
    if (l_min_gap_m < 0.0)
        throw InfeasibleError("constraints: minimum gap must be >= 0");
    if (!(l_max_m > (n_lines - 1) * l_min_gap_m)) {
        std::ostringstream os;
        os << "constraints: l_max " << l_max_m << " m cannot hold " << n_lines
           << " lines spaced >= " << l_min_gap_m << " m";
        throw InfeasibleError(os.str());
    }
    for (const auto& [row, rhs] : equalities) {
        (void)rhs;
        if (row.size() != n_lines)
            throw InfeasibleError("constraints: equality row size != n_lines");
    }
    if (quantization_step_m && !(*quantization_step_m > 0.0))
        throw InfeasibleError("constraints: quantization step must be > 0");
}

std::pair<double, double> anchor_frequencies(double l_max_m,
                                             const DispersionModel& model,
                                             double f_lo_target_hz,
                                             double f_hi_target_hz) {
    if (!(l_max_m > 0.0)) throw InvalidInput("l_max must be > 0");
    if (!(f_lo_target_hz > 0.0) || !(f_hi_target_hz >= f_lo_target_hz))
        throw InvalidInput("anchor targets require 0 < f_lo <= f_hi");

    const double lo = solve_band_center(model, l_max_m, 0, f_lo_target_hz);
    if (f_hi_target_hz <= lo) return {lo, lo};

    // smallest band whose center reaches the upper target; the guess uses
    // the constant-eps period 2*lo and backs off before stepping up
    int n = static_cast<int>(std::floor(f_hi_target_hz / (2.0 * lo) - 0.5));
    n = std::max(n - 2, 0);
    double center = solve_band_center(model, l_max_m, n, f_hi_target_hz);
    while (center < f_hi_target_hz) {
        ++n;
        center = solve_band_center(model, l_max_m, n, f_hi_target_hz);
    }
    while (n > 0) {
        const double below = solve_band_center(model, l_max_m, n - 1, f_hi_target_hz);
        if (below < f_hi_target_hz) break;
        --n;
        center = below;
    }
    return {lo, center};
}

double loss_minmax_mean(const LineSet& lines, const DispersionModel& model,
                        const FrequencyGrid& grid) {
    lines.validate();
    grid.validate();
    LossEvaluator eval;
    eval.grid = GammaGrid::build(model, grid);
    return eval(lines.lengths_m);
}

double loss_regularized(const LineSet& lines, const DispersionModel& model,
                        const FrequencyGrid& grid, const Eigen::MatrixXd& cov) {
    lines.validate();
    grid.validate();
    if (cov.rows() != lines.size() || cov.cols() != lines.size())
        throw InvalidInput("length covariance must be N x N");
    if (!cov.isApprox(cov.transpose(), 1e-10))
        throw InvalidInput("length covariance must be symmetric");
    LossEvaluator eval;
    eval.grid = GammaGrid::build(model, grid);
    eval.kind = LossKind::Regularized;
    eval.cov = cov;
    return eval(lines.lengths_m);
}

DesignResult optimize(const DesignProblem& problem, const OptimizerConfig& cfg) {
    const int n = problem.n_lines;
    if (n < 2) throw InvalidInput("optimize requires n_lines >= 2");
    problem.constraints.validate(n);
    if (!(cfg.mutation_f > 0.0) || !(cfg.mutation_f < 2.0))
        throw InvalidInput("mutation factor must lie in (0, 2)");
    if (cfg.crossover_cr < 0.0 || cfg.crossover_cr > 1.0)
        throw InvalidInput("crossover rate must lie in [0, 1]");
    if (cfg.grid_points < 2) throw InvalidInput("grid_points must be >= 2");

    const auto [f_lo, f_hi] = anchor_frequencies(
        problem.constraints.l_max_m, problem.model, problem.f_lo_target_hz,
        problem.f_hi_target_hz);

    DesignResult result;
    result.f_min_anchor_hz = f_lo;
    result.f_max_anchor_hz = f_hi;

    const FrequencyGrid grid =
        f_hi > f_lo ? FrequencyGrid::linspace(f_lo, f_hi, cfg.grid_points)
                    : FrequencyGrid{{f_lo, f_lo * (1.0 + 1e-9)}};

    LossEvaluator loss;
    loss.grid = GammaGrid::build(problem.model, grid);
    loss.kind = problem.loss.kind;
    loss.equalities = problem.constraints.equalities;
    loss.equality_weight =
        loss.equalities.empty() ? 0.0 : problem.loss.equality_penalty_weight;
    loss.l_min_gap = problem.constraints.l_min_gap_m;
    if (loss.kind != LossKind::MinmaxMean) {
        if (problem.loss.length_cov.size() > 0) {
            loss.cov = problem.loss.length_cov;
            if (loss.cov.rows() != n || !loss.cov.isApprox(loss.cov.transpose(), 1e-10))
                throw InvalidInput("length covariance must be symmetric N x N");
        } else {
            loss.sigma2_iso = problem.loss.length_sigma_m * problem.loss.length_sigma_m;
        }
    }

    const double l_max = problem.constraints.l_max_m;
    const double gap = problem.constraints.l_min_gap_m;
    const int free_dims = n - 2;

    {
        // equality rows must be reachable with the anchors fixed
        std::vector<double> probe(static_cast<std::size_t>(std::max(free_dims, 0)),
                                  l_max / 2.0);
        if (!project_equalities(probe, l_max, problem.constraints.equalities))
            throw InfeasibleError(
                "equality constraints conflict with the anchored lines");
    }

    if (free_dims <= 0) {
        std::vector<double> lengths = assemble({}, l_max);
        result.lengths = LineSet(lengths);
        result.loss = loss(lengths);
        result.feasible = true;
        result.converged = true;
        return result;
    }

    const int pop = std::max(cfg.population_factor * free_dims, 5);
    std::vector<std::vector<double>> members(static_cast<std::size_t>(pop));
    std::vector<double> fitness(static_cast<std::size_t>(pop));
    {
        std::vector<std::vector<double>> init(static_cast<std::size_t>(pop));
        for (int i = 0; i < pop; ++i) {
            auto rng = substream(cfg.seed, 0, static_cast<std::uint64_t>(i));
            std::uniform_real_distribution<double> unif(0.0, l_max);
            std::vector<double> cand(static_cast<std::size_t>(free_dims));
            for (double& v : cand) v = unif(rng);
            repair(cand, l_max, gap);
            init[static_cast<std::size_t>(i)] = std::move(cand);
        }
        members = std::move(init);
        std::vector<std::vector<double>> full(members.size());
        for (std::size_t i = 0; i < members.size(); ++i)
            full[i] = assemble(members[i], l_max);
        parallel_eval(loss, full, fitness, cfg.threads);
    }

    int generations = 0;
    bool converged = false;
    std::vector<std::vector<double>> trials(static_cast<std::size_t>(pop));
    std::vector<std::vector<double>> trial_full(static_cast<std::size_t>(pop));
    std::vector<double> trial_fit(static_cast<std::size_t>(pop));

    for (int g = 1; g <= cfg.max_generations; ++g) {
        for (int i = 0; i < pop; ++i) {
            auto rng = substream(cfg.seed, static_cast<std::uint64_t>(g),
                                 static_cast<std::uint64_t>(i));
            std::uniform_int_distribution<int> pick(0, pop - 1);
            int r1, r2, r3;
            do { r1 = pick(rng); } while (r1 == i);
            do { r2 = pick(rng); } while (r2 == i || r2 == r1);
            do { r3 = pick(rng); } while (r3 == i || r3 == r1 || r3 == r2);
            std::uniform_int_distribution<int> pick_dim(0, free_dims - 1);
            const int jrand = pick_dim(rng);
            std::uniform_real_distribution<double> unif01(0.0, 1.0);

            std::vector<double> trial = members[static_cast<std::size_t>(i)];
            for (int d = 0; d < free_dims; ++d) {
                if (d == jrand || unif01(rng) < cfg.crossover_cr) {
                    trial[static_cast<std::size_t>(d)] =
                        members[static_cast<std::size_t>(r1)][static_cast<std::size_t>(d)] +
                        cfg.mutation_f *
                            (members[static_cast<std::size_t>(r2)][static_cast<std::size_t>(d)] -
                             members[static_cast<std::size_t>(r3)][static_cast<std::size_t>(d)]);
                }
            }
            repair(trial, l_max, gap);
            trial_full[static_cast<std::size_t>(i)] = assemble(trial, l_max);
            trials[static_cast<std::size_t>(i)] = std::move(trial);
        }
        parallel_eval(loss, trial_full, trial_fit, cfg.threads);
        for (int i = 0; i < pop; ++i) {
            if (trial_fit[static_cast<std::size_t>(i)] <= fitness[static_cast<std::size_t>(i)]) {
                members[static_cast<std::size_t>(i)] = trials[static_cast<std::size_t>(i)];
                fitness[static_cast<std::size_t>(i)] = trial_fit[static_cast<std::size_t>(i)];
            }
        }
        generations = g;
        const auto [mn, mx] = std::minmax_element(fitness.begin(), fitness.end());
        if (cfg.progress) cfg.progress(g, *mn);
        if (*mx - *mn <= cfg.convergence_tol * std::max(1.0, std::abs(*mn))) {
            converged = true;
            break;
        }
    }

    const std::size_t best_idx = static_cast<std::size_t>(
        std::min_element(fitness.begin(), fitness.end()) - fitness.begin());
    std::vector<double> best = members[best_idx];
    double final_l_max = l_max;
    if (problem.constraints.quantization_step_m) {
        best = quantize_and_polish(best, l_max, gap,
                                   *problem.constraints.quantization_step_m,
                                   loss, final_l_max);
    }
    project_equalities(best, final_l_max, problem.constraints.equalities);
    const std::vector<double> lengths = assemble(best, final_l_max);

    result.lengths = LineSet(lengths);
    result.loss = loss(lengths);
    result.feasible = true;
    result.converged = converged;
    result.generations_run = generations;
    return result;
}

PipelineResult design_pipeline(const PipelineRequest& req) {
    if (!(req.f_min_hz > 0.0) || !(req.f_min_hz < req.f_max_hz))
        throw InvalidInput("design pipeline requires 0 < f_min < f_max");
    if (!(req.margin_deg > 0.0) || !(req.margin_deg < 90.0))
        throw InvalidInput("design margin must lie in (0, 90) degrees");

    PipelineResult out;
    // Representative eps' for the closed-form sizing steps, taken at the
    // lower target frequency.
    out.eps_real_used = permittivity_at(req.model, req.f_min_hz).eps_real;

    out.l_max_m = req.l_max_m > 0.0
                      ? req.l_max_m
                      : trl::length_for_band(req.f_min_hz, out.eps_real_used,
                                             req.margin_deg, 0, trl::Anchor::Low);

    const bool lossy =
        permittivity_at(req.model, req.f_min_hz).eps_imag > 0.0 ||
        permittivity_at(req.model, req.f_max_hz).eps_imag > 0.0;

    int n_lines = req.n_lines;
    if (n_lines <= 0) {
        // No closed form exists under loss; that case grows the count below.
        n_lines = lossy ? 2
                        : line_count::recommend(out.l_max_m, req.f_min_hz,
                                                req.f_max_hz, out.eps_real_used,
                                                req.margin_deg)
                              .n_lines;
    }

    auto run_once = [&](int n) {
        DesignProblem problem;
        problem.n_lines = n;
        problem.constraints.l_max_m = out.l_max_m;
        problem.constraints.l_min_gap_m = req.l_min_gap_m;
        problem.constraints.equalities = req.equalities;
        problem.constraints.quantization_step_m = req.quantization_step_m;
        problem.loss = req.loss;
        if (!req.equalities.empty() && problem.loss.kind == LossKind::Regularized)
            problem.loss.kind = LossKind::RegularizedEquality;
        problem.model = req.model;
        problem.f_lo_target_hz = req.f_min_hz;
        problem.f_hi_target_hz = req.f_max_hz;
        return optimize(problem, req.optimizer);
    };

    auto margin_check = [&](DesignResult& design) {
        out.margin_check_lo_hz =
            std::min(design.f_min_anchor_hz, req.f_max_hz * (1.0 - 1e-9));
        out.margin_check_hi_hz = req.f_max_hz;
        const FrequencyGrid check = FrequencyGrid::linspace(
            out.margin_check_lo_hz, out.margin_check_hi_hz, req.margin_grid_points);
        design.phase = effective_phase(design.lengths, req.model, check);
        out.min_phi_deg = *std::min_element(design.phase.phi_deg.begin(),
                                            design.phase.phi_deg.end());
        return out.min_phi_deg >= req.margin_deg;
    };

    DesignResult design = run_once(n_lines);
    bool ok = margin_check(design);
    if (lossy && req.n_lines <= 0) {
        const int n_cap = 30;
        while (!ok && n_lines < n_cap) {
            ++n_lines;
            design = run_once(n_lines);
            ok = margin_check(design);
        }
    }

    out.design = std::move(design);
    out.n_lines = n_lines;
    out.margin_satisfied = ok;
    return out;
}

} // namespace mltrl::opt
