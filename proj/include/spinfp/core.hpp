#pragma once
// Physical constants, field parameters, and pulse-sequence value types shared
// by the simulator, the closed-form spectrum models, and the analysis tools.
//
// Unit conventions:
//   * Every frequency or rate held internally is angular (rad/s).  Rabi
//     frequencies quoted in s^-1 in the spectroscopy literature are used
//     directly as angular values; they only ever enter through ratios such
//     as Omega^2 / Gamma.
//   * External interfaces (config files, CSV columns) use ordinary frequency
//     in Hz, magnetic field in Gauss, and durations in seconds.

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace spinfp {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

// Raised for malformed or out-of-range run configurations (CLI exit code 2).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Raised when a numeric procedure cannot produce a result (CLI exit code 3):
// a half-maximum crossing that never happens, a linewidth formula evaluated
// outside its domain, a propagator that failed to converge.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Atomic constants of the D1 line used throughout.  The excited-state decay
// rate and the Lande factors of the two ground manifolds and the excited
// manifold are fixed inputs, not fit parameters.
struct Constants {
    double Gamma = two_pi * 5.746e6;  // excited-state decay rate, rad/s
    double g1 = -0.5017;              // Lande factor, F=1 ground manifold
    double g2 = 0.4997;               // Lande factor, F=2 ground manifold
    double g3 = -1.0 / 6.0;           // Lande factor, F=1 excited manifold
    double muB_over_h = 1.4e6;        // Bohr magneton / Planck constant, Hz/G
};

// How the excited state decays back into the two ground manifolds:
// one part in four to F=1 and three parts in four to F=2, or equally
// into all four sublevels of the five-level scheme.
enum class Branching { one_three, equal };

// Laser and environment parameters for one run.
struct FieldParams {
    double omega_avg = 1.77e6;       // average Rabi frequency, rad/s
    double Bz = 0.0;                 // bias magnetic field, G
    double gamma_c = 1.2e4;          // magneto-sensitive ground dephasing, 1/s
    double gamma_insensitive = 0.0;  // dephasing of the |1>-|4>, |2>-|3> pairs, 1/s
    Branching branching = Branching::one_three;

    void validate() const {
        if (!(omega_avg > 0.0)) throw ConfigError("omega_avg must be > 0");
        if (!(Bz >= 0.0)) throw ConfigError("Bz must be >= 0");
        if (!(gamma_c >= 0.0)) throw ConfigError("gamma_c must be >= 0");
        if (!(gamma_insensitive >= 0.0))
            throw ConfigError("gamma_insensitive must be >= 0");
    }
};

// One light pulse plus the dark interval that follows it: light on for tau,
// then off until the end of the period.  period == tau means back-to-back
// pulses with no dark gap.
struct PulseSegment {
    double tau;     // light-on duration, s
    double period;  // total segment duration, s

    explicit PulseSegment(double tau_, double period_) : tau(tau_), period(period_) {
        if (!(tau > 0.0) || !(tau <= period))
            throw ConfigError("pulse segment requires 0 < tau <= period");
    }
    explicit PulseSegment(double tau_) : PulseSegment(tau_, tau_) {}
};

// A full interrogation sequence: a preparation pulse, N identical or distinct
// middle pulses, and a detection pulse of detect_length seconds.  Absorption
// is sampled at sample_rate from detect_delay into the detection pulse to its
// end.  When sample_in_prep is set the sequence degenerates to the
// single-pulse protocol: no middle or detection pulses are propagated and the
// sampling window [detect_delay, prep.tau] lies inside the preparation pulse
// itself.
struct PulseSequence {
    PulseSegment prep;
    std::vector<PulseSegment> middle;
    double detect_length = 8e-6;  // s
    double detect_delay = 2e-6;   // s, sampling delay into the detection pulse
    double sample_rate = 1e6;     // Hz
    bool sample_in_prep = false;

    // Total pulse count: preparation + middles + detection.
    int nc() const { return static_cast<int>(middle.size()) + 2; }

    void validate() const {
        if (!(detect_length > 0.0) || !(detect_delay > 0.0))
            throw ConfigError("detection durations must be > 0");
        if (!(sample_rate > 0.0)) throw ConfigError("sample_rate must be > 0");
        if (sample_in_prep) {
            if (!middle.empty())
                throw ConfigError("single-pulse protocol admits no middle pulses");
            if (!(detect_delay < prep.tau))
                throw ConfigError("sampling delay must fall inside the preparation pulse");
        } else if (!(detect_delay < detect_length)) {
            throw ConfigError("detect_delay must be smaller than detect_length");
        }
    }
};

// Diagonal detunings of the four ground sublevels in the rotating frame,
// rad/s.  Delta1/Delta2 carry the two-photon detuning delta plus/minus the
// F=1 Zeeman shift; Delta3/Delta4 carry the F=2 Zeeman shift alone.
struct ZeemanDetunings {
    double Delta1, Delta2, Delta3, Delta4;
};

inline ZeemanDetunings zeeman_detunings(double delta, double Bz, const Constants& c) {
    const double dz1 = c.g1 * two_pi * c.muB_over_h * Bz;
    const double dz2 = c.g2 * two_pi * c.muB_over_h * Bz;
    return {delta + dz1, delta - dz1, dz2, -dz2};
}

// The four Rabi frequencies of the double-Lambda scheme, rad/s.  Fixed
// amplitude ratio 1 : -1 : sqrt(3) : sqrt(3) between (a,+1), (a,-1), (b,+1),
// (b,-1); the sign difference between the two F=1 legs is what makes the
// |1>-|4> and |2>-|3> superpositions dark.
struct RabiSet {
    double a_plus, a_minus, b_plus, b_minus;

    double average() const {
        return std::sqrt((a_plus * a_plus + b_plus * b_plus) / 2.0);
    }
};

inline RabiSet rabi_set_from_average(double omega_avg) {
    if (!(omega_avg > 0.0))
        throw ConfigError("rabi_set_from_average requires omega_avg > 0");
    const double x = omega_avg / std::numbers::sqrt2;
    const double s3 = std::sqrt(3.0);
    return {x, -x, s3 * x, s3 * x};
}

}  // namespace spinfp
