#pragma once
// Quantitative analysis of computed spectra: linewidth measurement,
// Lorentzian-kernel lineshape fitting, comb-peak extraction, and the
// magnetometer-style field estimate from the Zeeman splitting.

#include <vector>

#include "spinfp/bloch.hpp"
#include "spinfp/core.hpp"

namespace spinfp {

struct FitResult {
    double omega_fit = 0.0;  // fitted average Rabi frequency, rad/s
    double A1 = 0.0;         // lineshape amplitude
    double A2 = 0.0;         // offset
    double rms = 0.0;        // root-mean-square residual
    int iterations = 0;
    bool converged = false;
};

struct PeakSet {
    std::vector<double> centers;     // Hz, sorted ascending
    std::vector<double> heights;     // above the trace minimum
    std::vector<double> splittings;  // gaps between consecutive centers, Hz
};

// Width of the tallest feature: linear interpolation of the two half-maximum
// crossings around the global maximum, with the trace minimum as baseline.
// Affine-invariant in the trace values.  Throws NumericError when the peak
// is clipped by the grid or a crossing never occurs.
double measure_fwhm(const SpectrumTrace& trace);

// Least-squares fit of A1 * Re f(delta; Omega, Gamma) + A2 to the trace by
// damped Gauss-Newton (Levenberg damping, max 200 iterations, relative step
// tolerance 1e-10), initialized from the measured FWHM via
// Omega^2 = Gamma * pi * FWHM.  Throws NumericError on a degenerate (flat)
// trace; a fit that exhausts its iterations reports converged = false.
FitResult fit_cpt_lineshape(const SpectrumTrace& trace, double Gamma);

// Local maxima whose topographic prominence exceeds min_prominence times the
// trace dynamic range, with sub-grid refinement of each center by a
// three-point parabola.  Edge samples are never peaks.
PeakSet find_peaks(const SpectrumTrace& trace, double min_prominence = 0.1);

// Invert the Zeeman splitting of the magneto-insensitive pair:
// Bz = split / (2 |g1 + g2| muB_over_h).
double estimate_field_from_splitting(double split_hz, const Constants& c = {});

// Resonance bookkeeping for the anomalous linewidth dips: the magneto-
// sensitive combs land on the main comb teeth when
// |g1 - g2| * muB_over_h * Bz * period is an integer.
struct DipPrediction {
    int m;
    double value;   // |g1 - g2| * muB_over_h * Bz * period
    bool resonant;  // |value - m| <= tol
};

std::vector<DipPrediction> predict_dips(double Bz, double period, int m_max,
                                        const Constants& c = {}, double tol = 0.05);

}  // namespace spinfp
