#pragma once
// Closed-form spectrum models for the pulsed-CPT interferometer.
//
// Each light pulse acts on a ground-state coherence like one mirror pass of
// a Fabry-Perot cavity: the coherence is attenuated by an effective
// reflection coefficient R = exp(-(Omega^2/Gamma) tau), refreshed by a
// transmission term, and accumulates phase during the dark interval.
// Summing over a pulse train gives a frequency comb sigma(delta) whose teeth
// sit at multiples of 1/period, and the absorption spectrum follows as
// rho55 = (Omega/Gamma)^2 (1 + weighted sums of Re sigma).

#include <complex>
#include <vector>

#include "spinfp/core.hpp"

namespace spinfp {

using cplx = std::complex<double>;

// Effective mirror coefficients of a single pulse at detuning delta.
struct FPCoefficients {
    double R;    // reflection, exp(-(Omega^2/Gamma) tau), in (0, 1]
    cplx Tc;     // transmission, 1 - exp(-(Omega^2/Gamma + i delta) tau)
    double fsr;  // free spectral range 1/period, Hz
};

FPCoefficients fp_coefficients(double delta, const PulseSegment& seg, double omega,
                               double Gamma);

// Ground-state dephasing rates entering the complex coherence detunings.
struct DephasingRates {
    double gamma_c = 1.2e4;          // magneto-sensitive pairs, 1/s
    double gamma_insensitive = 0.0;  // |1>-|4> and |2>-|3| pairs, 1/s
};

// Complex detunings Delta_ij = Delta_i - Delta_j - i*gamma_ij of the six
// ground coherences, rad/s.  At Bz = 0 with zero insensitive dephasing,
// d14 and d23 both reduce to the bare two-photon detuning delta.
struct CoherenceDetunings {
    cplx d12, d13, d14, d23, d24, d34;
};

CoherenceDetunings coherence_detunings(double delta, double Bz, const DephasingRates& g,
                                       const Constants& c = {});

// Lorentzian kernel f(x) = -Omega^2 / (4 Gamma (i x + Omega^2/Gamma)).
cplx lorentzian_f(cplx x, double omega, double Gamma);

// One light pulse acting on a coherence: pump toward the steady value f(Delta)
// while the previous coherence decays through the pulse.
cplx coherence_step(cplx rho0, cplx Delta, double tau, double omega, double Gamma);

// Free (dark) evolution: pure phase rotation, damped when Im(Delta) < 0.
cplx free_step(cplx rho0, cplx Delta, double t);

// Coherence after an arbitrary pulse train, sampled at the end of the last
// pulse.  Exactly equal to folding coherence_step/free_step over the train
// starting from zero; the closed form just unrolls that recursion.  The
// phase interval attributed to pulse k is the dark gap before it plus its
// own length, so non-uniform pulse lengths are handled consistently.
cplx sigma_general(cplx x, const std::vector<PulseSegment>& pulses, double omega,
                   double Gamma);

// Uniform-train special case evaluated through the finite geometric sum,
// numerically stable at large pulse counts.
cplx sigma_uniform(cplx x, int Nc, double tau, double period, double omega,
                   double Gamma);

// Whether the closed-form models keep the true preparation-pulse length as
// the first reflection event or replace it with a middle-pulse length (the
// dark gap before the first middle pulse is preserved either way).
enum class AnalyticPrep { true_length, uniform };

// The pulse train seen by the analytic models: preparation pulse, middles,
// and the detection pulse truncated at the sampling instant detect_delay
// (the closed forms evaluate the instantaneous coherence, not the averaged
// detection window).  A single-pulse sequence reduces to its preparation
// pulse alone.
std::vector<PulseSegment> analytic_pulse_list(const PulseSequence& seq,
                                              AnalyticPrep prep = AnalyticPrep::true_length);

// Weak-field absorption: rho55 = (Omega/Gamma)^2 (1 + 4 Re sigma(delta)).
double rho55_weak(double delta, const PulseSequence& seq, double omega, double Gamma,
                  AnalyticPrep prep = AnalyticPrep::true_length);

// Magneto-insensitive pair only: the comb evaluated at the two nearly
// delta-like detunings d14 and d23, producing the Zeeman-split sub-peaks.
double rho55_split(double delta, double Bz, const PulseSequence& seq, double omega,
                   double Gamma, const DephasingRates& gammas, const Constants& c = {},
                   AnalyticPrep prep = AnalyticPrep::true_length);

// All six ground coherences, each with its complex detuning; adds the
// magneto-sensitive side combs and the delta-independent offsets on top of
// rho55_split.
double rho55_full(double delta, double Bz, const PulseSequence& seq, double omega,
                  double Gamma, const DephasingRates& gammas, const Constants& c = {},
                  AnalyticPrep prep = AnalyticPrep::true_length);

// Cavity-analogy linewidth: (2/(pi*period)) * asin((1-sqrt(R)) / (2 R^(1/4))),
// in Hz.  Throws NumericError when the argument leaves the arcsine domain
// (low R, where the cavity analogy breaks down) rather than clamping.
double fwhm_formula(double R, double period);

// Weak-drive, short-pulse limit of sigma for a uniform rectangular train:
// the Laplace-domain response collapses to the windowed Fourier transform of
// the pulse pattern, evaluated here in closed form.  The train is taken from
// the first segment's (tau, period) and the list length.
cplx fourier_limit_sigma(double delta, const std::vector<PulseSegment>& pulses,
                         double omega, double Gamma);

}  // namespace spinfp
