#include "spinfp/commands.hpp"

#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>
#include <system_error>

#include "spinfp/analytic.hpp"
#include "spinfp/fit.hpp"

namespace spinfp {

namespace {

double analytic_raw(const RunConfig& cfg, const PulseSequence& seq, double delta_hz) {
    const Constants c;
    const double delta = two_pi * delta_hz;
    const DephasingRates gammas{cfg.gamma_c, cfg.gamma_insensitive};
    double rho55 = 0.0;
    switch (cfg.model) {
        case ModelKind::analytic_weak:
            rho55 = rho55_weak(delta, seq, cfg.omega_avg, c.Gamma, cfg.analytic_prep);
            break;
        case ModelKind::analytic_split:
            rho55 = rho55_split(delta, cfg.bz, seq, cfg.omega_avg, c.Gamma, gammas, c,
                                cfg.analytic_prep);
            break;
        case ModelKind::analytic_full:
            rho55 = rho55_full(delta, cfg.bz, seq, cfg.omega_avg, c.Gamma, gammas, c,
                               cfg.analytic_prep);
            break;
        case ModelKind::fourier_limit: {
            const auto pulses = analytic_pulse_list(seq, cfg.analytic_prep);
            const cplx s = fourier_limit_sigma(delta, pulses, cfg.omega_avg, c.Gamma);
            const double scale = cfg.omega_avg * cfg.omega_avg / (c.Gamma * c.Gamma);
            rho55 = scale * (1.0 + 4.0 * s.real());
            break;
        }
        default:
            throw ConfigError("analytic_raw called with a numeric model");
    }
    return 1.0 - rho55;
}

}  // namespace

SpectrumTrace compute_spectrum(const RunConfig& cfg, int n_threads) {
    const Constants c;
    const PulseSequence seq = cfg.sequence();
    const std::vector<double> grid = cfg.grid();

    if (cfg.model == ModelKind::five || cfg.model == ModelKind::eleven) {
        const Model m = cfg.model == ModelKind::five ? Model::five : Model::eleven;
        SpectrumTrace trace = scan_spectrum(grid, seq, cfg.field_params(), c, m, n_threads);
        return trace;
    }

    SpectrumTrace trace;
    trace.delta_hz = grid;
    trace.model = to_string(cfg.model);
    trace.raw.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i)
        trace.raw[i] = analytic_raw(cfg, seq, grid[i]);
    normalize_trace(trace);
    return trace;
}

std::string cmd_spectrum(const RunConfig& cfg, const std::string& out_override,
                         int n_threads, std::ostream& log) {
    const std::string path = out_override.empty() ? cfg.out_path : out_override;
    const SpectrumTrace trace = compute_spectrum(cfg, n_threads);
    write_spectrum_csv(trace, path);
    log << "model " << to_string(cfg.model) << ": wrote " << trace.delta_hz.size()
        << " points to " << path << "\n";
    return path;
}

void cmd_analyze(const std::string& csv_path, const std::string& mode,
                 std::ostream& out) {
    const SpectrumTrace trace = read_spectrum_csv(csv_path);
    const Constants c;

    if (mode == "fwhm") {
        const double fwhm = measure_fwhm(trace);
        out << "FWHM of the tallest feature: " << format_double(fwhm) << " Hz\n";
        out << "fwhm_hz=" << format_double(fwhm) << "\n";
    } else if (mode == "fit") {
        const FitResult r = fit_cpt_lineshape(trace, c.Gamma);
        if (!r.converged)
            throw NumericError("lineshape fit did not converge after " +
                               std::to_string(r.iterations) + " iterations");
        out << "Lineshape fit: Omega = " << format_double(r.omega_fit)
            << " rad/s (rms residual " << format_double(r.rms) << ", "
            << r.iterations << " iterations)\n";
        out << "omega_fit=" << format_double(r.omega_fit) << "\n";
        out << "a1=" << format_double(r.A1) << "\n";
        out << "a2=" << format_double(r.A2) << "\n";
        out << "rms=" << format_double(r.rms) << "\n";
        out << "iterations=" << r.iterations << "\n";
        out << "converged=1\n";
    } else if (mode == "peaks") {
        const PeakSet peaks = find_peaks(trace);
        out << "Found " << peaks.centers.size() << " peak(s)\n";
        out << "peak_count=" << peaks.centers.size() << "\n";
        for (std::size_t i = 0; i < peaks.centers.size(); ++i)
            out << "peak_" << i << "_hz=" << format_double(peaks.centers[i]) << "\n";
        for (std::size_t i = 0; i < peaks.splittings.size(); ++i)
            out << "splitting_" << i << "_hz=" << format_double(peaks.splittings[i])
                << "\n";
    } else if (mode == "field") {
        const PeakSet peaks = find_peaks(trace);
        if (peaks.centers.size() < 2)
            throw NumericError("field estimate needs two resolved peaks, found " +
                               std::to_string(peaks.centers.size()));
        // Use the two tallest peaks; their separation carries the field.
        std::size_t a = 0, b = 1;
        if (peaks.heights[b] > peaks.heights[a]) std::swap(a, b);
        for (std::size_t i = 2; i < peaks.centers.size(); ++i) {
            if (peaks.heights[i] > peaks.heights[a]) {
                b = a;
                a = i;
            } else if (peaks.heights[i] > peaks.heights[b]) {
                b = i;
            }
        }
        const double split = std::abs(peaks.centers[a] - peaks.centers[b]);
        const double field = estimate_field_from_splitting(split, c);
        out << "Splitting " << format_double(split) << " Hz -> Bz = "
            << format_double(field) << " G\n";
        out << "splitting_hz=" << format_double(split) << "\n";
        out << "field_g=" << format_double(field) << "\n";
    } else {
        throw ConfigError("unknown analyze mode '" + mode +
                          "' (expected fwhm, fit, peaks or field)");
    }
}

std::string cmd_sweep(const RunConfig& cfg, const std::string& out_override,
                      int n_threads, std::ostream& log) {
    if (!cfg.sweep) throw ConfigError("sweep command needs a [sweep] section");
    const SweepSpec& sw = *cfg.sweep;
    const Constants c;

    const std::string path = out_override.empty() ? cfg.out_path : out_override;
    std::ostringstream body;
    body << "value,fwhm_hz,fwhm_formula_hz\n";

    for (int i = 0; i < sw.points; ++i) {
        const double value =
            sw.points == 1 ? sw.start
                           : sw.start + (sw.stop - sw.start) * i / (sw.points - 1);
        RunConfig point = cfg;
        if (sw.variable == "N") {
            point.n = static_cast<int>(std::round(value));
        } else if (sw.variable == "T") {
            point.period.reset();
            point.total_time = value;
        } else if (sw.variable == "tau") {
            point.tau = value;
        } else if (sw.variable == "omega") {
            point.omega_avg = value;
        } else {  // Bz
            point.bz = value;
        }

        body << format_double(value) << ',';
        std::string measured, predicted;
        try {
            const SpectrumTrace trace = compute_spectrum(point, n_threads);
            measured = format_double(measure_fwhm(trace));
        } catch (const NumericError& e) {
            log << "sweep " << sw.variable << "=" << format_double(value)
                << ": " << e.what() << "\n";
        }
        try {
            const double a = point.omega_avg * point.omega_avg / c.Gamma;
            const double R = std::exp(-a * point.tau);
            predicted = format_double(fwhm_formula(R, point.resolved_period()));
        } catch (const NumericError& e) {
            log << "sweep " << sw.variable << "=" << format_double(value)
                << ": " << e.what() << "\n";
        }
        body << measured << ',' << predicted << '\n';
    }

    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::system_error(errno, std::generic_category(),
                                      "cannot open '" + path + "' for writing");
    out << body.str();
    if (!out.flush()) throw std::system_error(errno, std::generic_category(),
                                              "write failed for '" + path + "'");
    log << "sweep over " << sw.variable << ": wrote " << sw.points << " rows to "
        << path << "\n";
    return path;
}

}  // namespace spinfp
