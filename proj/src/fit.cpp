#include "spinfp/fit.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

#include "spinfp/analytic.hpp"

namespace spinfp {

namespace {

const std::vector<double>& trace_values(const SpectrumTrace& trace) {
    return trace.normalized.empty() ? trace.raw : trace.normalized;
}

void require_grid(const SpectrumTrace& trace) {
    const auto& v = trace_values(trace);
    if (trace.delta_hz.size() < 3 || trace.delta_hz.size() != v.size())
        throw ConfigError("trace needs at least 3 aligned grid points");
}

// Linear interpolation of the detuning where the values cross `level`
// between samples i and i+1.
double crossing(const std::vector<double>& x, const std::vector<double>& y, std::size_t i,
                double level) {
    const double frac = (level - y[i]) / (y[i + 1] - y[i]);
    return x[i] + frac * (x[i + 1] - x[i]);
}

}  // namespace

double measure_fwhm(const SpectrumTrace& trace) {
    require_grid(trace);
    const auto& x = trace.delta_hz;
    const auto& y = trace_values(trace);
    const std::size_t n = y.size();

    const std::size_t imax = std::max_element(y.begin(), y.end()) - y.begin();
    if (imax == 0 || imax == n - 1)
        throw NumericError("peak sits on the grid edge; cannot measure FWHM");
    const double baseline = *std::min_element(y.begin(), y.end());
    const double half = baseline + 0.5 * (y[imax] - baseline);
    if (!(y[imax] > baseline))
        throw NumericError("flat trace; cannot measure FWHM");

    double left = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t i = imax; i-- > 0;) {
        if (y[i] <= half) {
            left = crossing(x, y, i, half);
            break;
        }
    }
    double right = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t i = imax; i + 1 < n; ++i) {
        if (y[i + 1] <= half) {
            right = crossing(x, y, i, half);
            break;
        }
    }
    if (std::isnan(left) || std::isnan(right))
        throw NumericError("half-maximum crossing not found inside the scan");
    return right - left;
}

FitResult fit_cpt_lineshape(const SpectrumTrace& trace, double Gamma) {
    require_grid(trace);
    const auto& x_hz = trace.delta_hz;
    const auto& y = trace_values(trace);
    const int n = static_cast<int>(y.size());

    const auto [ymin, ymax] = std::minmax_element(y.begin(), y.end());
    if (*ymin == *ymax) throw NumericError("degenerate flat trace; nothing to fit");

    // Initialize the linewidth from the measured FWHM; fall back to a quarter
    // of the scan span when the half-maximum crossings are unavailable.
    double fwhm_guess;
    try {
        fwhm_guess = measure_fwhm(trace);
    } catch (const NumericError&) {
        fwhm_guess = (x_hz.back() - x_hz.front()) / 4.0;
    }
    double omega = std::sqrt(Gamma * std::numbers::pi * fwhm_guess);

    const auto shape = [&](double omega_, int i) {
        return lorentzian_f(two_pi * x_hz[i], omega_, Gamma).real();
    };
    // d(Re f)/dOmega via f' = (2 f / Omega)(1 + 4 f).
    const auto shape_domega = [&](double omega_, int i) {
        const cplx f = lorentzian_f(two_pi * x_hz[i], omega_, Gamma);
        return ((2.0 * f / omega_) * (1.0 + 4.0 * f)).real();
    };
    // Best-fit (A1, A2) for fixed Omega is an ordinary linear LSQ solve.
    const auto linear_part = [&](double omega_) {
        double sg = 0, sgg = 0, sy = 0, sgy = 0;
        for (int i = 0; i < n; ++i) {
            const double g = shape(omega_, i);
            sg += g;
            sgg += g * g;
            sy += y[i];
            sgy += g * y[i];
        }
        const double det = sgg * n - sg * sg;
        if (det == 0.0) return std::pair{0.0, sy / n};
        return std::pair{(sgy * n - sy * sg) / det, (sgg * sy - sg * sgy) / det};
    };

    auto [A1, A2] = linear_part(omega);
    const auto sse = [&](double om, double a1, double a2) {
        double s = 0;
        for (int i = 0; i < n; ++i) {
            const double r = y[i] - (a1 * shape(om, i) + a2);
            s += r * r;
        }
        return s;
    };

    double err = sse(omega, A1, A2);
    double lambda = 1e-3;
    FitResult out;
    for (out.iterations = 1; out.iterations <= 200; ++out.iterations) {
        Eigen::Matrix3d JtJ = Eigen::Matrix3d::Zero();
        Eigen::Vector3d Jtr = Eigen::Vector3d::Zero();
        for (int i = 0; i < n; ++i) {
            const double g = shape(omega, i);
            const Eigen::Vector3d J(A1 * shape_domega(omega, i), g, 1.0);
            const double r = y[i] - (A1 * g + A2);
            JtJ += J * J.transpose();
            Jtr += J * r;
        }
        Eigen::Matrix3d damped = JtJ;
        for (int k = 0; k < 3; ++k) damped(k, k) += lambda * std::max(JtJ(k, k), 1e-30);
        const Eigen::Vector3d step = damped.ldlt().solve(Jtr);

        const double omega_try = std::abs(omega + step[0]);
        const double A1_try = A1 + step[1];
        const double A2_try = A2 + step[2];
        const double err_try = sse(omega_try, A1_try, A2_try);
        if (err_try <= err) {
            const double rel = step.norm() /
                               std::max(Eigen::Vector3d(omega, A1, A2).norm(), 1e-30);
            omega = omega_try;
            A1 = A1_try;
            A2 = A2_try;
            err = err_try;
            lambda = std::max(lambda / 3.0, 1e-12);
            if (rel < 1e-10) {
                out.converged = true;
                break;
            }
        } else {
            lambda *= 10.0;
            if (lambda > 1e12) break;
        }
    }

    out.omega_fit = omega;
    out.A1 = A1;
    out.A2 = A2;
    out.rms = std::sqrt(err / n);
    if (!std::isfinite(out.rms) || !(omega > 0.0)) out.converged = false;
    return out;
}

PeakSet find_peaks(const SpectrumTrace& trace, double min_prominence) {
    if (!(min_prominence > 0.0)) throw ConfigError("min_prominence must be > 0");
    require_grid(trace);
    const auto& x = trace.delta_hz;
    const auto& y = trace_values(trace);
    const std::size_t n = y.size();

    const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
    const double range = *hi - *lo;
    PeakSet out;
    if (range == 0.0) return out;
    const double threshold = min_prominence * range;

    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (!(y[i] > y[i - 1] && y[i] > y[i + 1])) continue;

        // Topographic prominence: lowest point on the way to the nearest
        // higher ground on each side, keeping the higher of the two bases.
        double left_base = y[i];
        for (std::size_t k = i; k-- > 0;) {
            left_base = std::min(left_base, y[k]);
            if (y[k] > y[i]) break;
        }
        double right_base = y[i];
        for (std::size_t k = i + 1; k < n; ++k) {
            right_base = std::min(right_base, y[k]);
            if (y[k] > y[i]) break;
        }
        if (y[i] - std::max(left_base, right_base) < threshold) continue;

        // Sub-grid refinement: vertex of the parabola through the three
        // samples around the maximum.
        const double denom = y[i - 1] - 2.0 * y[i] + y[i + 1];
        double center = x[i];
        if (denom != 0.0)
            center += 0.5 * (y[i - 1] - y[i + 1]) / denom * (x[i] - x[i - 1]);
        out.centers.push_back(center);
        out.heights.push_back(y[i] - *lo);
    }

    for (std::size_t k = 1; k < out.centers.size(); ++k)
        out.splittings.push_back(out.centers[k] - out.centers[k - 1]);
    return out;
}

double estimate_field_from_splitting(double split_hz, const Constants& c) {
    if (!(split_hz >= 0.0)) throw ConfigError("splitting must be >= 0");
    return split_hz / (2.0 * std::abs(c.g1 + c.g2) * c.muB_over_h);
}

std::vector<DipPrediction> predict_dips(double Bz, double period, int m_max,
                                        const Constants& c, double tol) {
    if (!(period > 0.0)) throw ConfigError("predict_dips requires period > 0");
    if (m_max < 1) throw ConfigError("predict_dips requires m_max >= 1");
    const double value = std::abs(c.g1 - c.g2) * c.muB_over_h * Bz * period;
    std::vector<DipPrediction> out;
    out.reserve(m_max);
    for (int m = 1; m <= m_max; ++m)
        out.push_back({m, value, std::abs(value - m) <= tol});
    return out;
}

}  // namespace spinfp
