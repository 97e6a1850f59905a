#ifndef MLTRL_MEDIUM_HPP
#define MLTRL_MEDIUM_HPP

#include <complex>
#include <utility>
#include <variant>
#include <vector>

#include "mltrl/errors.hpp"

namespace mltrl {

/// Speed of light in vacuum [m/s].
inline constexpr double kC0 = 299792458.0;

/// Complex relative effective permittivity, stored as eps_real - j*eps_imag
/// with eps_imag kept non-negative.
struct Permittivity {
    double eps_real = 1.0;
    double eps_imag = 0.0;
};

/// Frequency-independent permittivity.
struct ConstantModel {
    Permittivity eps;
};

/// Piecewise-linear permittivity table over frequency; evaluation outside
/// the table range is an error, not a clamp.
struct TabulatedModel {
    std::vector<double> frequencies_hz;   // strictly increasing, >= 2 points
    std::vector<Permittivity> values;
};

/// Lossless rectangular waveguide, TE10 mode.
struct WaveguideModel {
    double width_m = 0.0;     // broad wall dimension a
    double filling_eps = 1.0; // relative permittivity of the fill, >= 1
};

using DispersionVariant = std::variant<ConstantModel, TabulatedModel, WaveguideModel>;

/// Maps frequency to complex relative effective permittivity.
class DispersionModel {
public:
    static DispersionModel constant(double eps_real, double eps_imag = 0.0);
    static DispersionModel tabulated(std::vector<double> frequencies_hz,
                                     std::vector<Permittivity> values);
    static DispersionModel waveguide(double width_m, double filling_eps = 1.0);

    const DispersionVariant& variant() const { return variant_; }

    /// True when permittivity changes with frequency.
    bool is_dispersive() const;

    /// TE10 cutoff frequency; only meaningful for waveguide models.
    double cutoff_hz() const;

private:
    explicit DispersionModel(DispersionVariant v) : variant_(std::move(v)) {}
    DispersionVariant variant_;
};

/// Permittivity at frequency f. Throws RangeError outside a table and
/// BelowCutoffError at or below a waveguide cutoff.
Permittivity permittivity_at(const DispersionModel& model, double f_hz);

/// Propagation constant gamma = alpha + j*beta = (2*pi*f/c0)*sqrt(-eps),
/// branch chosen with Re >= 0 and Im >= 0. Lossless input gives Re == 0
/// exactly.
std::complex<double> gamma_at(const DispersionModel& model, double f_hz);

/// Same branch rule, applied to an explicit permittivity.
std::complex<double> gamma_from_eps(const Permittivity& eps, double f_hz);

/// Strictly increasing positive frequency samples.
struct FrequencyGrid {
    std::vector<double> frequencies_hz;

    static FrequencyGrid linspace(double f_lo_hz, double f_hi_hz, int points);
    void validate() const;
    std::size_t size() const { return frequencies_hz.size(); }
};

} // namespace mltrl

#endif
