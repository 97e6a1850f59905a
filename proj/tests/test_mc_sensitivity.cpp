#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

#include "mltrl/mc_sensitivity.hpp"

using namespace mltrl;
using namespace mltrl::mc;
using cplx = std::complex<double>;

namespace {

const DispersionModel kEps26 = DispersionModel::constant(2.6, 0.0);

Matrix2cd line_matrix(cplx gamma, double l) {
    Matrix2cd m = Matrix2cd::Zero();
    m(0, 0) = std::exp(-gamma * l);
    m(1, 1) = std::exp(gamma * l);
    return m;
}

std::vector<LineMeasurement> forward_model(const LineSet& lines, cplx gamma,
                                           const Matrix2cd& a, const Matrix2cd& b,
                                           cplx k) {
    std::vector<LineMeasurement> out;
    for (double l : lines.lengths_m)
        out.push_back(LineMeasurement{k * a * line_matrix(gamma, l) * b});
    return out;
}

} // namespace

TEST_CASE("permutation and signature constants") {
    const auto& p = P_matrix();
    const auto& q = Q_matrix();
    CHECK((p * p - Matrix4cd::Identity()).norm() == 0.0);
    CHECK(p(0, 0) == cplx(1.0));
    CHECK(p(1, 2) == cplx(1.0));
    CHECK(p(2, 1) == cplx(1.0));
    CHECK(p(3, 3) == cplx(1.0));
    CHECK(q(0, 3) == cplx(1.0));
    CHECK(q(1, 1) == cplx(-1.0));
    CHECK(q(2, 2) == cplx(-1.0));
    CHECK(q(3, 0) == cplx(1.0));
    CHECK(q.cwiseAbs().sum() == doctest::Approx(4.0));
    CHECK(std::abs(q.determinant()) == doctest::Approx(1.0));
}

TEST_CASE("noise-free thru measurement is the identity") {
    std::mt19937_64 rng(1);
    const auto ms = synthesize(LineSet({0.0, 0.01}), cplx(0.0, 100.0), 0.0, rng);
    CHECK((ms[0].t - Matrix2cd::Identity()).norm() == 0.0);
}

TEST_CASE("lossless measurements have unit determinant") {
    std::mt19937_64 rng(2);
    const auto ms =
        synthesize(LineSet({0.0, 0.013, 0.05}), cplx(0.0, 388.0), 0.0, rng);
    for (const auto& m : ms)
        CHECK(std::abs(m.t.determinant()) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("noise statistics match the configured sigma") {
    std::mt19937_64 rng(3);
    const double sigma = 0.1;
    double acc = 0.0;
    int count = 0;
    for (int t = 0; t < 5000; ++t) {
        const auto ms = synthesize(LineSet({0.0, 0.01}), cplx(0.0, 55.0), sigma, rng);
        const Matrix2cd noise = ms[0].t - line_matrix(cplx(0.0, 55.0), 0.0);
        for (int r = 0; r < 2; ++r)
            for (int c = 0; c < 2; ++c) {
                acc += std::norm(noise(r, c));
                ++count;
            }
    }
    const double var = acc / count; // E|entry|^2 = sigma^2
    CHECK(var == doctest::Approx(sigma * sigma).epsilon(0.05));
}

TEST_CASE("ideal system is diagonal with the eigenvalue pair") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> lr(0.0, 0.06);
    std::uniform_real_distribution<double> fr(0.5e9, 15e9);
    for (double ei : {0.0, 0.156}) {
        const auto model = DispersionModel::constant(2.6, ei);
        for (int n = 2; n <= 8; ++n) {
            std::vector<double> ls(static_cast<std::size_t>(n));
            for (double& l : ls) l = lr(rng);
            ls[0] = 0.0;
            const LineSet lines(ls);
            const auto g = gamma_at(model, fr(rng));
            const auto w = build_weighting(lines, g);
            const double lam = lambda_value(w);
            const Matrix4cd h = ideal_system(lines, g, w);
            Matrix4cd expect = Matrix4cd::Zero();
            expect(0, 0) = -lam;
            expect(3, 3) = lam;
            CHECK((h - expect).norm() <= 1e-10 * std::max(lam, 1e-30));
        }
    }
}

TEST_CASE("noise-free identity boxes give the diagonal system itself") {
    const LineSet lines({0.0, 0.01, 0.04, 0.06});
    const auto g = gamma_at(kEps26, 3e9);
    std::mt19937_64 rng(7);
    const auto ms = synthesize(lines, g, 0.0, rng);
    const auto w = build_weighting(lines, g);
    const auto sys = build_F(ms, w);
    const double lam = lambda_value(w);
    CHECK(std::abs(sys.f(0, 0) - cplx(-lam)) <= 1e-10 * lam);
    CHECK(std::abs(sys.f(3, 3) - cplx(lam)) <= 1e-10 * lam);
    // trace(F^2)/2 recovers lambda^2
    CHECK(std::abs((sys.f * sys.f).trace() / 2.0 - cplx(lam * lam)) <=
          1e-9 * lam * lam);
}

TEST_CASE("error terms vanish for identity boxes") {
    const LineSet lines({0.0, 0.01, 0.04, 0.06});
    const auto g = gamma_at(kEps26, 2.4e9);
    std::mt19937_64 rng(11);
    const auto sys = build_F(synthesize(lines, g, 0.0, rng), build_weighting(lines, g));
    const auto t = extract_error_terms(sys.f, lambda_value(build_weighting(lines, g)));
    CHECK(std::abs(t.a21_over_a11) <= 1e-10);
    CHECK(std::abs(t.a12) <= 1e-10);
    CHECK(std::abs(t.b12_over_b11) <= 1e-10);
    CHECK(std::abs(t.b21) <= 1e-10);
}

TEST_CASE("forward-synthesized error boxes are recovered") {
    Matrix2cd a, b;
    a << cplx(1.3, 0.2), cplx(0.11, -0.05), cplx(0.1, 0.02), cplx(1.0, 0.0);
    b << cplx(0.9, -0.1), cplx(0.07, 0.03), cplx(-0.12, 0.04), cplx(1.0, 0.0);
    const cplx k(1.7, -0.3);
    const auto model = DispersionModel::constant(2.6, 0.26);
    for (int n : {2, 3, 5}) {
        std::vector<double> ls;
        for (int i = 0; i < n; ++i) ls.push_back(0.015 * i * i / (n - 1.0));
        const LineSet lines(ls);
        const auto g = gamma_at(model, 3e9);
        const auto w = build_weighting(lines, g);
        const auto sys = build_F(forward_model(lines, g, a, b, k), w);
        const auto t = extract_error_terms(sys.f, lambda_value(w));
        CHECK(std::abs(t.a21_over_a11 - a(1, 0) / a(0, 0)) <= 1e-9);
        CHECK(std::abs(t.a12 - a(0, 1)) <= 1e-9);
        CHECK(std::abs(t.b12_over_b11 - b(0, 1) / b(0, 0)) <= 1e-9);
        CHECK(std::abs(t.b21 - b(1, 0)) <= 1e-9);
    }
}

TEST_CASE("specific off-diagonal term is recovered alone") {
    Matrix2cd a = Matrix2cd::Identity();
    a(1, 0) = cplx(0.1, 0.0); // a21 with a11 = 1
    const LineSet lines({0.0, 0.01, 0.04, 0.06});
    const auto g = gamma_at(kEps26, 2.1e9);
    const auto w = build_weighting(lines, g);
    const auto sys = build_F(forward_model(lines, g, a, Matrix2cd::Identity(), 1.0), w);
    const auto t = extract_error_terms(sys.f, lambda_value(w));
    CHECK(std::abs(t.a21_over_a11 - cplx(0.1, 0.0)) <= 1e-9);
    CHECK(std::abs(t.a12) <= 1e-9);
    CHECK(std::abs(t.b12_over_b11) <= 1e-9);
    CHECK(std::abs(t.b21) <= 1e-9);
}

TEST_CASE("conjugating the inputs conjugates the outputs") {
    Matrix2cd a, b;
    a << cplx(1.1, 0.1), cplx(0.05, -0.02), cplx(0.07, 0.05), cplx(1.0, 0.0);
    b << cplx(0.95, -0.04), cplx(0.03, 0.06), cplx(-0.08, 0.01), cplx(1.0, 0.0);
    const LineSet lines({0.0, 0.012, 0.05});
    const auto g = gamma_at(DispersionModel::constant(2.6, 0.13), 4e9);
    const auto w = build_weighting(lines, g);
    const auto ms = forward_model(lines, g, a, b, cplx(1.2, 0.4));

    const auto t = extract_error_terms(build_F(ms, w).f, lambda_value(w));

    std::vector<LineMeasurement> ms_conj;
    for (const auto& m : ms) ms_conj.push_back(LineMeasurement{m.t.conjugate()});
    WeightingMatrix w_conj{w.entries.conjugate()};
    const auto tc = extract_error_terms(build_F(ms_conj, w_conj).f, lambda_value(w));

    CHECK(std::abs(tc.a21_over_a11 - std::conj(t.a21_over_a11)) <= 1e-10);
    CHECK(std::abs(tc.a12 - std::conj(t.a12)) <= 1e-10);
    CHECK(std::abs(tc.b12_over_b11 - std::conj(t.b12_over_b11)) <= 1e-10);
    CHECK(std::abs(tc.b21 - std::conj(t.b21)) <= 1e-10);
}

TEST_CASE("singular measurements are rejected") {
    std::vector<LineMeasurement> ms(2);
    ms[0].t = Matrix2cd::Identity();
    ms[1].t = Matrix2cd::Zero(); // det = 0
    const auto w = build_weighting(LineSet({0.0, 0.01}), cplx(0.0, 100.0));
    CHECK_THROWS_AS(build_F(ms, w), DegenerateError);
}

TEST_CASE("vanishing eigenvalue is a degenerate extraction") {
    // half-wave pair: lambda = 0 exactly
    const double l = 0.01;
    const cplx g(0.0, M_PI / l);
    const LineSet lines({0.0, l});
    const auto w = build_weighting(lines, g);
    std::mt19937_64 rng(13);
    const auto sys = build_F(synthesize(lines, g, 0.0, rng), w);
    CHECK_THROWS_AS(extract_error_terms(sys.f, 0.0), DegenerateError);
}

TEST_CASE("mc with zero sigmas reports zero error") {
    McConfig cfg;
    cfg.trials = 4;
    cfg.noise_sigma = 0.0;
    cfg.length_sigma_m = 0.0;
    cfg.seed = 5;
    const auto grid = FrequencyGrid::linspace(1e9, 8e9, 12);
    const auto res = run_mc(LineSet({0.0, 0.01, 0.04, 0.06}), kEps26, grid, cfg);
    REQUIRE(res.mae.size() == 12);
    for (std::size_t k = 0; k < res.mae.size(); ++k) {
        for (double v : res.mae[k]) CHECK(v <= 1e-9);
        CHECK(res.excluded[k] == 0);
    }
}

TEST_CASE("mc is deterministic per seed and thread count") {
    McConfig cfg;
    cfg.trials = 16;
    cfg.seed = 77;
    cfg.length_sigma_m = 20e-6;
    const auto grid = FrequencyGrid::linspace(1e9, 30e9, 7);
    const LineSet lines({0.0, 0.25e-3, 0.7e-3, 1.6e-3, 3.3e-3, 5.05e-3});
    const auto model = DispersionModel::constant(5.2, 0.0);
    auto cfg1 = cfg;
    cfg1.threads = 1;
    auto cfg2 = cfg;
    cfg2.threads = 4;
    const auto a = run_mc(lines, model, grid, cfg1);
    const auto b = run_mc(lines, model, grid, cfg2);
    for (std::size_t k = 0; k < a.mae.size(); ++k)
        for (int j = 0; j < 4; ++j)
            CHECK(a.mae[k][static_cast<std::size_t>(j)] ==
                  b.mae[k][static_cast<std::size_t>(j)]);
}

TEST_CASE("mc error grows when the eigenvalue shrinks") {
    // one frequency near a deep dip of the pair vs one near the peak
    McConfig cfg;
    cfg.trials = 300;
    cfg.seed = 19;
    cfg.noise_sigma = 0.05;
    const LineSet lines({0.0, 0.01});
    const double f_qw = kC0 / (4.0 * 0.01 * std::sqrt(2.6));
    FrequencyGrid grid{{0.08 * f_qw, f_qw}};
    const auto res = run_mc(lines, kEps26, grid, cfg);
    const double mae_low = res.mae[0][0] + res.mae[0][1] + res.mae[0][2] + res.mae[0][3];
    const double mae_peak = res.mae[1][0] + res.mae[1][1] + res.mae[1][2] + res.mae[1][3];
    CHECK(res.lambda_nominal[1] > res.lambda_nominal[0]);
    CHECK(mae_peak < mae_low);
}

TEST_CASE("eigenvector jacobian: zero input, linearity") {
    const LineSet lines({0.0, 0.01, 0.04, 0.06});
    const auto g = gamma_at(kEps26, 3e9);
    const auto w = build_weighting(lines, g);
    const Matrix4cd f = ideal_system(lines, g, w);
    const Eigen::MatrixXcd zero = Eigen::MatrixXcd::Zero(16, 3);
    CHECK(eigenvector_jacobian(f, zero, 0).norm() == 0.0);
    Eigen::MatrixXcd j = Eigen::MatrixXcd::Random(16, 3);
    const auto j1 = eigenvector_jacobian(f, j, 3);
    const auto j2 = eigenvector_jacobian(f, (2.5 * j).eval(), 3);
    CHECK((j2 - 2.5 * j1).norm() <= 1e-10 * j1.norm());
}

TEST_CASE("eigenvector jacobian rejects the repeated zero pair") {
    const LineSet lines({0.0, 0.01, 0.04, 0.06});
    const auto g = gamma_at(kEps26, 3e9);
    const auto w = build_weighting(lines, g);
    const Matrix4cd f = ideal_system(lines, g, w);
    const Eigen::MatrixXcd j = Eigen::MatrixXcd::Zero(16, 1);
    CHECK_THROWS_AS(eigenvector_jacobian(f, j, 1), InvalidInput);
    CHECK_THROWS_AS(eigenvector_jacobian(f, j, 2), InvalidInput);
}

TEST_CASE("pseudo-inverse acts as identity off the null space") {
    const LineSet lines({0.0, 0.011, 0.045, 0.06});
    const auto g = gamma_at(DispersionModel::constant(2.6, 0.1), 2.2e9);
    const auto w = build_weighting(lines, g);
    const Matrix4cd f = ideal_system(lines, g, w);
    const double lam = lambda_value(w);
    const Matrix4cd shifted = f - cplx(lam) * Matrix4cd::Identity();
    Eigen::JacobiSVD<Matrix4cd> svd(shifted, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::Vector4cd inv_s = Eigen::Vector4cd::Zero();
    for (int i = 0; i < 4; ++i)
        if (svd.singularValues()(i) > 1e-12 * svd.singularValues()(0))
            inv_s(i) = 1.0 / svd.singularValues()(i);
    const Matrix4cd pinv = svd.matrixV() * inv_s.asDiagonal() * svd.matrixU().adjoint();
    const Matrix4cd pa = pinv * shifted;
    // row space of the shifted matrix: spanned by right singular vectors 0..2
    for (int i = 0; i < 3; ++i) {
        const Eigen::Vector4cd v = svd.matrixV().col(i);
        CHECK((pa * v - v).norm() <= 1e-10);
    }
}

TEST_CASE("eigenvector jacobian matches finite differences of the system") {
    // parameter: a fixed perturbation direction on one line measurement,
    // which moves the eigenvectors (exact error-box models do not)
    const LineSet lines({0.0, 0.012, 0.037, 0.06});
    const auto model = DispersionModel::constant(2.6, 0.08);
    const auto g = gamma_at(model, 2.7e9);
    const auto w = build_weighting(lines, g);

    Matrix2cd dir;
    dir << cplx(0.3, -0.1), cplx(-0.2, 0.05), cplx(0.1, 0.2), cplx(0.05, -0.3);
    std::mt19937_64 rng(29);
    const auto base = synthesize(lines, g, 0.0, rng);
    auto system_for = [&](double p) {
        auto ms = base;
        ms[1].t += p * dir;
        return build_F(ms, w).f;
    };

    const double p0 = 0.03;
    const double h = 1e-7;
    const Matrix4cd f0 = system_for(p0);
    const Matrix4cd fp = system_for(p0 + h);
    const Matrix4cd fm = system_for(p0 - h);

    Eigen::MatrixXcd j_f(16, 1);
    {
        const Matrix4cd d = (fp - fm) / (2.0 * h);
        for (int c = 0; c < 4; ++c)
            for (int r = 0; r < 4; ++r) j_f(4 * c + r, 0) = d(r, c);
    }

    for (int index : {0, 3}) {
        const int norm_entry = index == 0 ? 0 : 3;
        const auto j_analytic =
            eigenvector_jacobian_normalized(f0, j_f, index, norm_entry);

        auto normalized_vec = [&](const Matrix4cd& f) {
            Eigen::ComplexEigenSolver<Matrix4cd> es(f);
            std::array<int, 4> order{0, 1, 2, 3};
            const auto& vals = es.eigenvalues();
            std::sort(order.begin(), order.end(), [&](int x, int y) {
                if (vals(x).real() != vals(y).real())
                    return vals(x).real() < vals(y).real();
                return vals(x).imag() < vals(y).imag();
            });
            Eigen::Vector4cd u =
                es.eigenvectors().col(order[static_cast<std::size_t>(index)]);
            return (u / u(norm_entry)).eval();
        };
        const Eigen::Vector4cd fd =
            (normalized_vec(fp) - normalized_vec(fm)) / (2.0 * h);
        CHECK((j_analytic.col(0) - fd).norm() <= 1e-5 * std::max(fd.norm(), 1e-12));
    }
}
