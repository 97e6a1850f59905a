#include "mltrl/eigenmetrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace mltrl {

LineSet::LineSet(std::vector<double> lengths) : lengths_m(std::move(lengths)) {
    validate();
}

void LineSet::validate() const {
    if (lengths_m.size() < 2)
        throw InvalidInput("line set needs at least 2 lines");
    for (double l : lengths_m)
        if (!std::isfinite(l) || l < 0.0)
            throw InvalidInput("line lengths must be finite and >= 0");
}

bool LineSet::is_design_convention() const {
    if (lengths_m.empty() || lengths_m.front() != 0.0) return false;
    return std::is_sorted(lengths_m.begin(), lengths_m.end());
}

WeightingMatrix build_weighting(const LineSet& lines, std::complex<double> gamma) {
    lines.validate();
    const int n = lines.size();
    WeightingMatrix w;
    w.entries = Eigen::MatrixXcd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const double lij = lines.lengths_m[static_cast<std::size_t>(i)] -
                               lines.lengths_m[static_cast<std::size_t>(j)];
            const std::complex<double> e = std::exp(gamma * lij);
            const std::complex<double> wij = e - 1.0 / e;
            w.entries(i, j) = wij;
            w.entries(j, i) = -wij;
        }
    }
    return w;
}

double lambda_value(const WeightingMatrix& w) {
    return 0.5 * w.entries.squaredNorm();
}

ScalingMatrix ScalingMatrix::ones(int n) {
    ScalingMatrix s;
    s.entries = Eigen::MatrixXd::Ones(n, n);
    return s;
}

ScalingMatrix ScalingMatrix::occurrence(const Eigen::VectorXd& q) {
    if (q.size() == 0 || (q.array() < 0.0).any())
        throw InvalidInput("occurrence weights must be non-negative");
    ScalingMatrix s;
    s.entries = q * q.transpose();
    s.validate();
    return s;
}

ScalingMatrix ScalingMatrix::occurrence_from_lines(const LineSet& lines, double tol_m) {
    lines.validate();
    const int n = lines.size();
    Eigen::VectorXd q(n);
    for (int i = 0; i < n; ++i) {
        int count = 0;
        for (int j = 0; j < n; ++j)
            if (std::abs(lines.lengths_m[static_cast<std::size_t>(i)] -
                         lines.lengths_m[static_cast<std::size_t>(j)]) <= tol_m)
                ++count;
        q(i) = 1.0 / count;
    }
    return occurrence(q);
}

ScalingMatrix ScalingMatrix::norm_order(const WeightingMatrix& w, double m) {
    if (!(m >= 1.0))
        throw InvalidInput("norm order must be >= 1");
    ScalingMatrix s;
    if (m == 1.0) return ones(w.size());
    s.entries = w.entries.cwiseAbs().array().pow(m - 1.0).matrix();
    return s;
}

void ScalingMatrix::validate() const {
    if (entries.rows() != entries.cols())
        throw InvalidInput("scaling matrix must be square");
    if (!entries.isApprox(entries.transpose(), 1e-12))
        throw InvalidInput("scaling matrix must be symmetric");
    if ((entries.array() < 0.0).any())
        throw InvalidInput("scaling matrix entries must be >= 0");
    if (entries.isZero(0.0))
        throw InvalidInput("scaling matrix must not be identically zero");
}

ScalingMatrix ScalingSpec::materialize(const LineSet& lines,
                                       const WeightingMatrix& w) const {
    switch (kind) {
        case Kind::Occurrence: return ScalingMatrix::occurrence_from_lines(lines);
        case Kind::NormOrder: return ScalingMatrix::norm_order(w, norm_m);
        case Kind::None: break;
    }
    return ScalingMatrix::ones(w.size());
}

double kappa_value(const WeightingMatrix& w, const ScalingMatrix& s,
                   bool* degenerate) {
    if (s.entries.rows() != w.entries.rows())
        throw InvalidInput("scaling matrix size must match weighting matrix");
    const int n = w.size();
    double num = 0.0; // sum s_ij |w_ij|^2 over pairs
    double den = 0.0; // sum s_ij |w_ij| over pairs
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const double a = std::abs(w.entries(i, j));
            num += s.entries(i, j) * a * a;
            den += s.entries(i, j) * a;
        }
    }
    if (den == 0.0) {
        if (degenerate) *degenerate = true;
        return 0.0;
    }
    if (degenerate) *degenerate = false;
    return num / den;
}

double phase_from_kappa(double kappa) {
    const double arg = std::clamp(kappa / 2.0, 0.0, 1.0);
    return std::asin(arg) * 180.0 / M_PI;
}

PhaseCurve effective_phase(const LineSet& lines, const DispersionModel& model,
                           const FrequencyGrid& grid, const ScalingSpec& scaling) {
    lines.validate();
    grid.validate();
    PhaseCurve curve;
    const std::size_t nf = grid.size();
    curve.frequency_hz = grid.frequencies_hz;
    curve.lambda.resize(nf);
    curve.kappa.resize(nf);
    curve.phi_deg.resize(nf);
    curve.degenerate.resize(nf);
    for (std::size_t k = 0; k < nf; ++k) {
        const auto g = gamma_at(model, grid.frequencies_hz[k]);
        const WeightingMatrix w = build_weighting(lines, g);
        const ScalingMatrix s = scaling.materialize(lines, w);
        bool degen = false;
        curve.lambda[k] = lambda_value(w);
        curve.kappa[k] = kappa_value(w, s, &degen);
        curve.phi_deg[k] = phase_from_kappa(curve.kappa[k]);
        curve.degenerate[k] = degen;
    }
    return curve;
}

double effective_phase_rms(const LineSet& lines, const DispersionModel& model,
                           double f_hz) {
    lines.validate();
    const int n = lines.size();
    const double pairs = n * (n - 1) / 2.0;
    const WeightingMatrix w = build_weighting(lines, gamma_at(model, f_hz));
    return phase_from_kappa(std::sqrt(lambda_value(w) / pairs));
}

Eigen::RowVectorXd lambda_jacobian_at(const LineSet& lines,
                                      std::complex<double> gamma) {
    lines.validate();
    const int n = lines.size();
    Eigen::RowVectorXd jac(n);
    for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            const double lij = lines.lengths_m[static_cast<std::size_t>(i)] -
                               lines.lengths_m[static_cast<std::size_t>(j)];
            const std::complex<double> e = std::exp(gamma * lij);
            const std::complex<double> wij = e - 1.0 / e;
            s += (gamma * std::conj(wij) * (e + 1.0 / e)).real();
        }
        jac(i) = 2.0 * s;
    }
    return jac;
}

Eigen::RowVectorXd lambda_jacobian(const LineSet& lines,
                                   const DispersionModel& model, double f_hz) {
    return lambda_jacobian_at(lines, gamma_at(model, f_hz));
}

} // namespace mltrl
