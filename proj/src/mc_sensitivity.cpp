#include "mltrl/mc_sensitivity.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <thread>

namespace mltrl::mc {

namespace {

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d649bb133111ebULL;
    return x ^ (x >> 31);
}

Eigen::Vector4cd vec_colmajor(const Matrix2cd& m) {
    Eigen::Vector4cd v;
    v << m(0, 0), m(1, 0), m(0, 1), m(1, 1);
    return v;
}

Matrix4cd weighted_system(const Eigen::MatrixXcd& cols,
                          const Eigen::VectorXcd& dets,
                          const WeightingMatrix& w) {
    // Conjugated weighting makes each pair contribute |w_ij|^2, which
    // diagonalizes the ideal system as diag(-lambda, 0, 0, +lambda).
    const Eigen::MatrixXcd wd =
        w.entries.conjugate() * dets.cwiseInverse().asDiagonal();
    return cols * wd * cols.transpose() * P_matrix() * Q_matrix();
}

std::vector<LineMeasurement> synthesize_raw(const std::vector<double>& lengths,
                                            std::complex<double> gamma,
                                            double noise_sigma,
                                            std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    const double s = noise_sigma / std::sqrt(2.0);
    std::vector<LineMeasurement> out;
    out.reserve(lengths.size());
    for (double l : lengths) {
        Matrix2cd m = Matrix2cd::Zero();
        m(0, 0) = std::exp(-gamma * l);
        m(1, 1) = std::exp(gamma * l);
        if (noise_sigma > 0.0) {
            for (int r = 0; r < 2; ++r)
                for (int c = 0; c < 2; ++c)
                    m(r, c) += std::complex<double>(s * normal(rng), s * normal(rng));
        }
        out.push_back(LineMeasurement{m});
    }
    return out;
}

} // namespace

const Matrix4cd& P_matrix() {
    static const Matrix4cd p = [] {
        Matrix4cd m = Matrix4cd::Zero();
        m(0, 0) = 1.0;
        m(1, 2) = 1.0;
        m(2, 1) = 1.0;
        m(3, 3) = 1.0;
        return m;
    }();
    return p;
}

const Matrix4cd& Q_matrix() {
    static const Matrix4cd q = [] {
        Matrix4cd m = Matrix4cd::Zero();
        m(0, 3) = 1.0;
        m(1, 1) = -1.0;
        m(2, 2) = -1.0;
        m(3, 0) = 1.0;
        return m;
    }();
    return q;
}

std::vector<LineMeasurement> synthesize(const LineSet& lines,
                                        std::complex<double> gamma,
                                        double noise_sigma, std::mt19937_64& rng) {
    lines.validate();
    if (noise_sigma < 0.0) throw InvalidInput("noise sigma must be >= 0");
    return synthesize_raw(lines.lengths_m, gamma, noise_sigma, rng);
}

SystemMatrices build_F(const std::vector<LineMeasurement>& measurements,
                       const WeightingMatrix& w) {
    const int n = static_cast<int>(measurements.size());
    if (n < 2) throw InvalidInput("build_F needs at least 2 measurements");
    if (w.size() != n)
        throw InvalidInput("weighting matrix size must match measurement count");

    SystemMatrices sys;
    sys.meas.resize(4, n);
    sys.dets.resize(n);
    for (int i = 0; i < n; ++i) {
        const Matrix2cd& m = measurements[static_cast<std::size_t>(i)].t;
        if (!m.allFinite())
            throw InvalidInput("measurement contains non-finite entries");
        sys.meas.col(i) = vec_colmajor(m);
        sys.dets(i) = m.determinant();
        if (sys.dets(i) == std::complex<double>(0.0, 0.0)) {
            std::ostringstream os;
            os << "measurement " << i << " is singular";
            throw DegenerateError(os.str());
        }
    }
    sys.f = weighted_system(sys.meas, sys.dets, w);
    return sys;
}

Matrix4cd ideal_system(const LineSet& lines, std::complex<double> gamma,
                       const WeightingMatrix& w) {
    lines.validate();
    const int n = lines.size();
    Eigen::MatrixXcd cols(4, n);
    Eigen::VectorXcd dets(n);
    for (int i = 0; i < n; ++i) {
        Matrix2cd m = Matrix2cd::Zero();
        m(0, 0) = std::exp(-gamma * lines.lengths_m[static_cast<std::size_t>(i)]);
        m(1, 1) = std::exp(gamma * lines.lengths_m[static_cast<std::size_t>(i)]);
        cols.col(i) = vec_colmajor(m);
        dets(i) = m.determinant();
    }
    return weighted_system(cols, dets, w);
}

ErrorTerms extract_error_terms(const Matrix4cd& f, double lambda_nominal) {
    const std::complex<double> tr2 = (f * f).trace() / 2.0;
    std::complex<double> lam = std::sqrt(tr2);
    if (std::abs(lam - lambda_nominal) > std::abs(-lam - lambda_nominal))
        lam = -lam;
    // absolute floor of 1 covers systems that collapsed entirely at a null
    if (std::abs(lam) <= 1e-9 * std::max(f.norm(), 1.0))
        throw DegenerateError("measured eigenvalue is numerically zero");

    auto least_singular_vector = [](const Matrix4cd& a) {
        Eigen::JacobiSVD<Matrix4cd> svd(a, Eigen::ComputeFullV);
        return Eigen::Vector4cd(svd.matrixV().col(3));
    };

    // eigenvector for -lambda carries the left-box terms, +lambda the right
    Eigen::Vector4cd x_minus = least_singular_vector(f + lam * Matrix4cd::Identity());
    Eigen::Vector4cd x_plus = least_singular_vector(f - lam * Matrix4cd::Identity());
    if (std::abs(x_minus(0)) == 0.0 || std::abs(x_plus(3)) == 0.0)
        throw DegenerateError("eigenvector normalization entry vanishes");
    x_minus /= x_minus(0);
    x_plus /= x_plus(3);

    ErrorTerms terms;
    terms.a21_over_a11 = x_minus(1);
    terms.b12_over_b11 = x_minus(2);
    terms.a12 = x_plus(2);
    terms.b21 = x_plus(1);
    return terms;
}

McResult run_mc(const LineSet& lines, const DispersionModel& model,
                const FrequencyGrid& grid, const McConfig& cfg) {
    lines.validate();
    grid.validate();
    if (cfg.trials < 1) throw InvalidInput("mc trials must be >= 1");
    if (cfg.noise_sigma < 0.0 || cfg.length_sigma_m < 0.0 ||
        cfg.eps_sigma_real < 0.0 || cfg.eps_sigma_imag < 0.0)
        throw InvalidInput("mc sigmas must be >= 0");

    const std::size_t nf = grid.size();
    const std::size_t n_lines = lines.lengths_m.size();

    McResult res;
    res.frequency_hz = grid.frequencies_hz;
    res.mae.assign(nf, {0.0, 0.0, 0.0, 0.0});
    res.excluded.assign(nf, 0);
    res.lambda_nominal.resize(nf);

    // nominal weighting and permittivity per frequency
    std::vector<WeightingMatrix> w_nom;
    std::vector<Permittivity> eps_nom(nf);
    w_nom.reserve(nf);
    for (std::size_t k = 0; k < nf; ++k) {
        eps_nom[k] = permittivity_at(model, grid.frequencies_hz[k]);
        w_nom.push_back(build_weighting(lines, gamma_from_eps(eps_nom[k],
                                                              grid.frequencies_hz[k])));
        res.lambda_nominal[k] = lambda_value(w_nom.back());
    }

    // per-trial slots reduced in trial order afterwards, so the thread
    // schedule never changes the sums
    struct Accum {
        std::vector<std::array<double, 4>> sum;
        std::vector<int> count;
        std::vector<int> excluded;
    };

    auto run_trial = [&](int trial, Accum& acc) {
        std::mt19937_64 rng(mix64(cfg.seed ^ mix64(static_cast<std::uint64_t>(trial))));
        std::normal_distribution<double> normal(0.0, 1.0);

        // manufactured once per trial; a perturbed thru may go slightly negative
        std::vector<double> perturbed(n_lines);
        for (std::size_t i = 0; i < n_lines; ++i)
            perturbed[i] = lines.lengths_m[i] + cfg.length_sigma_m * normal(rng);
        const double d_eps_r = cfg.eps_sigma_real * normal(rng);
        const double d_eps_i = cfg.eps_sigma_imag * normal(rng);

        for (std::size_t k = 0; k < nf; ++k) {
            Permittivity eps = eps_nom[k];
            eps.eps_real = std::max(eps.eps_real + d_eps_r, 1e-9);
            eps.eps_imag = std::max(eps.eps_imag + d_eps_i, 0.0);
            const auto g = gamma_from_eps(eps, grid.frequencies_hz[k]);
            const auto meas = synthesize_raw(perturbed, g, cfg.noise_sigma, rng);
            try {
                const SystemMatrices sys = build_F(meas, w_nom[k]);
                const ErrorTerms t =
                    extract_error_terms(sys.f, res.lambda_nominal[k]);
                acc.sum[k][0] += std::abs(t.a21_over_a11);
                acc.sum[k][1] += std::abs(t.a12);
                acc.sum[k][2] += std::abs(t.b12_over_b11);
                acc.sum[k][3] += std::abs(t.b21);
                ++acc.count[k];
            } catch (const DegenerateError&) {
                ++acc.excluded[k];
            }
        }
    };

    int threads = cfg.threads;
    if (threads <= 0) {
        const unsigned hc = std::thread::hardware_concurrency();
        threads = hc > 0 ? static_cast<int>(hc) : 1;
    }
    threads = std::min(threads, cfg.trials);

    std::vector<Accum> per_trial(static_cast<std::size_t>(cfg.trials));
    auto worker = [&](int first) {
        for (int t = first; t < cfg.trials; t += threads) {
            auto& acc = per_trial[static_cast<std::size_t>(t)];
            acc.sum.assign(nf, {0.0, 0.0, 0.0, 0.0});
            acc.count.assign(nf, 0);
            acc.excluded.assign(nf, 0);
            run_trial(t, acc);
        }
    };
    if (threads <= 1) {
        worker(0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(threads));
        for (int w = 0; w < threads; ++w) pool.emplace_back(worker, w);
        for (auto& th : pool) th.join();
    }

    for (std::size_t k = 0; k < nf; ++k) {
        std::array<double, 4> total{0.0, 0.0, 0.0, 0.0};
        int count = 0, excluded = 0;
        for (const auto& a : per_trial) {
            for (int j = 0; j < 4; ++j) total[static_cast<std::size_t>(j)] +=
                a.sum[k][static_cast<std::size_t>(j)];
            count += a.count[k];
            excluded += a.excluded[k];
        }
        res.excluded[k] = excluded;
        for (int j = 0; j < 4; ++j)
            res.mae[k][static_cast<std::size_t>(j)] =
                count > 0 ? total[static_cast<std::size_t>(j)] / count : 0.0;
    }
    return res;
}

Eigen::MatrixXcd eigenvector_jacobian(const Matrix4cd& f,
                                      const Eigen::MatrixXcd& j_f, int index) {
    if (j_f.rows() != 16)
        throw InvalidInput("J_F must have 16 rows (vectorized 4x4, column-major)");
    if (index < 0 || index > 3) throw InvalidInput("eigenvector index out of range");

    Eigen::ComplexEigenSolver<Matrix4cd> es(f);
    if (es.info() != Eigen::Success)
        throw DegenerateError("eigendecomposition failed");

    // sort by real part, then imaginary part
    std::array<int, 4> order{0, 1, 2, 3};
    const auto& vals = es.eigenvalues();
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (vals(a).real() != vals(b).real()) return vals(a).real() < vals(b).real();
        return vals(a).imag() < vals(b).imag();
    });

    const int sel = order[static_cast<std::size_t>(index)];
    const std::complex<double> mu = vals(sel);
    const double scale = std::max(f.norm(), 1e-300);
    for (int k = 0; k < 4; ++k) {
        if (k == sel) continue;
        if (std::abs(vals(k) - mu) < 1e-8 * scale)
            throw InvalidInput("requested eigenvalue is repeated; Jacobian undefined");
    }

    Eigen::Matrix4cd u_all = es.eigenvectors();
    const Eigen::Vector4cd u = u_all.col(sel);
    // left eigenvectors from the inverse transpose; v_i^T u_j = delta_ij
    const Eigen::Matrix4cd v_all = u_all.inverse().transpose();
    const Eigen::Vector4cd v = v_all.col(sel);
    const std::complex<double> vtu = (v.transpose() * u)(0);

    const Matrix4cd shifted = f - mu * Matrix4cd::Identity();
    Eigen::JacobiSVD<Matrix4cd> svd(shifted, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::Vector4cd inv_s = Eigen::Vector4cd::Zero();
    const double tol = 1e-12 * svd.singularValues()(0);
    for (int k = 0; k < 4; ++k)
        if (svd.singularValues()(k) > tol)
            inv_s(k) = 1.0 / svd.singularValues()(k);
    const Matrix4cd pinv =
        svd.matrixV() * inv_s.asDiagonal() * svd.matrixU().adjoint();

    // rows of (u^T kron A) act on vec(dF) as A * dF * u
    Eigen::MatrixXcd op(4, 16);
    const Eigen::Matrix4cd uv = u * v.transpose() / vtu;
    for (int blk = 0; blk < 4; ++blk)
        op.middleCols(4 * blk, 4) =
            u(blk) * (uv - Eigen::Matrix4cd::Identity());
    return pinv * op * j_f;
}

Eigen::MatrixXcd eigenvector_jacobian_normalized(const Matrix4cd& f,
                                                 const Eigen::MatrixXcd& j_f,
                                                 int index, int norm_entry) {
    if (norm_entry < 0 || norm_entry > 3)
        throw InvalidInput("normalization entry out of range");
    Eigen::ComplexEigenSolver<Matrix4cd> es(f);
    std::array<int, 4> order{0, 1, 2, 3};
    const auto& vals = es.eigenvalues();
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (vals(a).real() != vals(b).real()) return vals(a).real() < vals(b).real();
        return vals(a).imag() < vals(b).imag();
    });
    const Eigen::Vector4cd u = es.eigenvectors().col(order[static_cast<std::size_t>(index)]);
    if (std::abs(u(norm_entry)) == 0.0)
        throw DegenerateError("normalization entry of the eigenvector vanishes");

    const Eigen::MatrixXcd ju = eigenvector_jacobian(f, j_f, index);
    // d(u/u_k) = du/u_k - u * du_k / u_k^2, invariant to the gauge of du
    const std::complex<double> uk = u(norm_entry);
    return ju / uk - (u / (uk * uk)) * ju.row(norm_entry);
}

} // namespace mltrl::mc
