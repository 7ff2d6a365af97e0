#include "spinfp/analytic.hpp"

#include <cmath>

namespace spinfp {

namespace {
constexpr cplx I{0.0, 1.0};
}

FPCoefficients fp_coefficients(double delta, const PulseSegment& seg, double omega,
                               double Gamma) {
    const double a = omega * omega / Gamma;
    return {std::exp(-a * seg.tau), 1.0 - std::exp(-(a + I * delta) * seg.tau),
            1.0 / seg.period};
}

CoherenceDetunings coherence_detunings(double delta, double Bz, const DephasingRates& g,
                                       const Constants& c) {
    const ZeemanDetunings z = zeeman_detunings(delta, Bz, c);
    const cplx ic = I * g.gamma_c;
    const cplx ii = I * g.gamma_insensitive;
    return {
        z.Delta1 - z.Delta2 - ic,  // d12
        z.Delta1 - z.Delta3 - ic,  // d13
        z.Delta1 - z.Delta4 - ii,  // d14
        z.Delta2 - z.Delta3 - ii,  // d23
        z.Delta2 - z.Delta4 - ic,  // d24
        z.Delta3 - z.Delta4 - ic,  // d34
    };
}

cplx lorentzian_f(cplx x, double omega, double Gamma) {
    const double a = omega * omega / Gamma;
    return -omega * omega / (4.0 * Gamma * (I * x + a));
}

cplx coherence_step(cplx rho0, cplx Delta, double tau, double omega, double Gamma) {
    const double a = omega * omega / Gamma;
    const cplx decay = std::exp(-(I * Delta + a) * tau);
    return lorentzian_f(Delta, omega, Gamma) * (1.0 - decay) + rho0 * decay;
}

cplx free_step(cplx rho0, cplx Delta, double t) { return rho0 * std::exp(-I * Delta * t); }

cplx sigma_general(cplx x, const std::vector<PulseSegment>& pulses, double omega,
                   double Gamma) {
    if (pulses.empty()) throw ConfigError("sigma_general requires a nonempty pulse list");
    const double a = omega * omega / Gamma;
    // Walk the train backwards: "atten" carries the attenuation and phase a
    // coherence created before pulse l suffers through every later pulse and
    // gap, so each pulse contributes its transmission term times atten.
    cplx total = 0.0;
    cplx atten = 1.0;
    for (std::size_t i = pulses.size(); i-- > 0;) {
        const double tau = pulses[i].tau;
        total += (1.0 - std::exp(-(a + I * x) * tau)) * atten;
        if (i > 0) {
            const double interval = (pulses[i - 1].period - pulses[i - 1].tau) + tau;
            atten *= std::exp(-a * tau) * std::exp(-I * x * interval);
        }
    }
    return lorentzian_f(x, omega, Gamma) * total;
}

cplx sigma_uniform(cplx x, int Nc, double tau, double period, double omega, double Gamma) {
    if (Nc < 1) throw ConfigError("sigma_uniform requires Nc >= 1");
    const double a = omega * omega / Gamma;
    const cplx T = 1.0 - std::exp(-(a + I * x) * tau);
    const cplx q = std::exp(-a * tau) * std::exp(-I * x * period);
    cplx series;
    if (q == 1.0) {
        series = static_cast<double>(Nc);
    } else {
        series = (1.0 - std::pow(q, Nc)) / (1.0 - q);
    }
    return lorentzian_f(x, omega, Gamma) * T * series;
}

std::vector<PulseSegment> analytic_pulse_list(const PulseSequence& seq, AnalyticPrep prep) {
    seq.validate();
    std::vector<PulseSegment> pulses;
    if (seq.sample_in_prep) {
        pulses.emplace_back(seq.prep.tau, seq.prep.period);
        return pulses;
    }
    if (prep == AnalyticPrep::true_length || seq.middle.empty()) {
        pulses.push_back(seq.prep);
    } else {
        // Swap in a middle-pulse length while keeping the dark gap after the
        // preparation pulse unchanged.
        const double tau = seq.middle.front().tau;
        pulses.emplace_back(tau, seq.prep.period - seq.prep.tau + tau);
    }
    pulses.insert(pulses.end(), seq.middle.begin(), seq.middle.end());
    pulses.emplace_back(seq.detect_delay, seq.detect_delay);
    return pulses;
}

double rho55_weak(double delta, const PulseSequence& seq, double omega, double Gamma,
                  AnalyticPrep prep) {
    const auto pulses = analytic_pulse_list(seq, prep);
    const double scale = omega * omega / (Gamma * Gamma);
    return scale * (1.0 + 4.0 * sigma_general(delta, pulses, omega, Gamma).real());
}

double rho55_split(double delta, double Bz, const PulseSequence& seq, double omega,
                   double Gamma, const DephasingRates& gammas, const Constants& c,
                   AnalyticPrep prep) {
    const auto pulses = analytic_pulse_list(seq, prep);
    const CoherenceDetunings d = coherence_detunings(delta, Bz, gammas, c);
    const double scale = omega * omega / (Gamma * Gamma);
    return scale * (1.0 + 2.0 * sigma_general(d.d14, pulses, omega, Gamma).real() +
                    2.0 * sigma_general(d.d23, pulses, omega, Gamma).real());
}

double rho55_full(double delta, double Bz, const PulseSequence& seq, double omega,
                  double Gamma, const DephasingRates& gammas, const Constants& c,
                  AnalyticPrep prep) {
    const auto pulses = analytic_pulse_list(seq, prep);
    const CoherenceDetunings d = coherence_detunings(delta, Bz, gammas, c);
    double sum = 0.0;
    for (cplx dij : {d.d12, d.d13, d.d14, d.d23, d.d24, d.d34})
        sum += sigma_general(dij, pulses, omega, Gamma).real();
    const double scale = omega * omega / (Gamma * Gamma);
    return scale * (1.0 + 2.0 * sum);
}

double fwhm_formula(double R, double period) {
    if (!(R > 0.0) || !(R <= 1.0))
        throw NumericError("fwhm_formula requires reflection R in (0, 1]");
    const double arg = (1.0 - std::sqrt(R)) / (2.0 * std::pow(R, 0.25));
    if (arg > 1.0)
        throw NumericError("fwhm_formula outside the arcsine domain (R too small)");
    return (2.0 / (std::numbers::pi * period)) * std::asin(arg);
}

cplx fourier_limit_sigma(double delta, const std::vector<PulseSegment>& pulses,
                         double omega, double Gamma) {
    if (pulses.empty())
        throw ConfigError("fourier_limit_sigma requires a nonempty pulse list");
    const double tau = pulses.front().tau;
    const double period = pulses.front().period;
    const auto Nc = static_cast<double>(pulses.size());
    // Mean pump rate over one period plus the detuning phase.
    const cplx s = omega * omega * tau / (Gamma * period) + I * delta;
    const cplx num = (1.0 - std::exp(-s * tau)) * (1.0 - std::exp(-s * Nc * period));
    const cplx den = s * (1.0 - std::exp(-s * period));
    return -(omega * omega / (4.0 * Gamma)) * num / den;
}

}  // namespace spinfp
