#include "mltrl/medium.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mltrl {

namespace {

void check_permittivity(const Permittivity& p) {
    if (!(p.eps_real > 0.0) || !std::isfinite(p.eps_real))
        throw InvalidInput("permittivity: eps_real must be > 0");
    if (p.eps_imag < 0.0 || !std::isfinite(p.eps_imag))
        throw InvalidInput("permittivity: eps_imag must be >= 0");
}

} // namespace

DispersionModel DispersionModel::constant(double eps_real, double eps_imag) {
    Permittivity p{eps_real, eps_imag};
    check_permittivity(p);
    return DispersionModel(ConstantModel{p});
}

DispersionModel DispersionModel::tabulated(std::vector<double> frequencies_hz,
                                           std::vector<Permittivity> values) {
    if (frequencies_hz.size() < 2)
        throw InvalidInput("tabulated dispersion needs at least 2 points");
    if (frequencies_hz.size() != values.size())
        throw InvalidInput("tabulated dispersion: frequency/value size mismatch");
    for (std::size_t i = 0; i < frequencies_hz.size(); ++i) {
        if (!(frequencies_hz[i] > 0.0))
            throw InvalidInput("tabulated dispersion: frequencies must be > 0");
        if (i > 0 && !(frequencies_hz[i] > frequencies_hz[i - 1]))
            throw InvalidInput("tabulated dispersion: frequencies must be strictly increasing");
        check_permittivity(values[i]);
    }
    return DispersionModel(TabulatedModel{std::move(frequencies_hz), std::move(values)});
}

DispersionModel DispersionModel::waveguide(double width_m, double filling_eps) {
    if (!(width_m > 0.0))
        throw InvalidInput("waveguide width must be > 0");
    if (!(filling_eps >= 1.0))
        throw InvalidInput("waveguide filling permittivity must be >= 1");
    return DispersionModel(WaveguideModel{width_m, filling_eps});
}

bool DispersionModel::is_dispersive() const {
    return !std::holds_alternative<ConstantModel>(variant_);
}

double DispersionModel::cutoff_hz() const {
    if (const auto* wg = std::get_if<WaveguideModel>(&variant_))
        return kC0 / (2.0 * wg->width_m * std::sqrt(wg->filling_eps));
    return 0.0;
}

Permittivity permittivity_at(const DispersionModel& model, double f_hz) {
    if (!(f_hz > 0.0))
        throw InvalidInput("frequency must be > 0");

    const auto& v = model.variant();
    if (const auto* c = std::get_if<ConstantModel>(&v)) {
        return c->eps;
    }
    if (const auto* t = std::get_if<TabulatedModel>(&v)) {
        const auto& fs = t->frequencies_hz;
        if (f_hz < fs.front() || f_hz > fs.back()) {
            std::ostringstream os;
            os << "frequency " << f_hz << " Hz outside table range ["
               << fs.front() << ", " << fs.back() << "]";
            throw RangeError(os.str());
        }
        auto it = std::upper_bound(fs.begin(), fs.end(), f_hz);
        if (it == fs.end()) --it;
        std::size_t hi = static_cast<std::size_t>(it - fs.begin());
        if (hi == 0) hi = 1;
        std::size_t lo = hi - 1;
        const double u = (f_hz - fs[lo]) / (fs[hi] - fs[lo]);
        return Permittivity{
            t->values[lo].eps_real + u * (t->values[hi].eps_real - t->values[lo].eps_real),
            t->values[lo].eps_imag + u * (t->values[hi].eps_imag - t->values[lo].eps_imag)};
    }
    const auto& wg = std::get<WaveguideModel>(v);
    const double fc = model.cutoff_hz();
    if (f_hz <= fc) {
        std::ostringstream os;
        os << "frequency " << f_hz << " Hz at or below TE10 cutoff " << fc << " Hz";
        throw BelowCutoffError(os.str());
    }
    const double ratio = fc / f_hz;
    return Permittivity{wg.filling_eps * (1.0 - ratio * ratio), 0.0};
}

std::complex<double> gamma_from_eps(const Permittivity& eps, double f_hz) {
    check_permittivity(eps);
    const double k = 2.0 * M_PI * f_hz / kC0;
    if (eps.eps_imag == 0.0) {
        // lossless: purely imaginary, alpha exactly zero
        return {0.0, k * std::sqrt(eps.eps_real)};
    }
    std::complex<double> root = std::sqrt(std::complex<double>(-eps.eps_real, eps.eps_imag));
    if (root.real() < 0.0) root = -root;
    return k * root;
}

std::complex<double> gamma_at(const DispersionModel& model, double f_hz) {
    return gamma_from_eps(permittivity_at(model, f_hz), f_hz);
}

FrequencyGrid FrequencyGrid::linspace(double f_lo_hz, double f_hi_hz, int points) {
    if (points < 2)
        throw InvalidInput("frequency grid needs at least 2 points");
    if (!(f_lo_hz > 0.0) || !(f_hi_hz > f_lo_hz))
        throw InvalidInput("frequency grid requires 0 < f_lo < f_hi");
    FrequencyGrid g;
    g.frequencies_hz.resize(static_cast<std::size_t>(points));
    const double step = (f_hi_hz - f_lo_hz) / (points - 1);
    for (int i = 0; i < points; ++i)
        g.frequencies_hz[static_cast<std::size_t>(i)] = f_lo_hz + step * i;
    g.frequencies_hz.back() = f_hi_hz;
    return g;
}

void FrequencyGrid::validate() const {
    if (frequencies_hz.empty())
        throw InvalidInput("frequency grid is empty");
    double prev = 0.0;
    for (double f : frequencies_hz) {
        if (!(f > prev))
            throw InvalidInput("frequency grid must be strictly increasing and > 0");
        prev = f;
    }
}

} // namespace mltrl
