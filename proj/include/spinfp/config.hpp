#pragma once
// Run configuration: sectioned key-value text format, validation, and the
// CSV spectrum format shared by the spectrum/analyze/sweep commands.
//
// Config schema (snake-case keys; '#' or ';' start a comment):
//
//   [system]
//   model = five | eleven | analytic-weak | analytic-split | analytic-full
//           | fourier-limit                       (required)
//   omega_avg = 1.77e6        average Rabi frequency, s^-1 (angular)
//   bz = 0.0                  bias field, G
//   gamma_c = 1.2e4           magneto-sensitive dephasing, 1/s
//   gamma_insensitive = 0.0   insensitive-pair dephasing, 1/s
//   branching = one-three | equal
//
//   [pulses]
//   prep_tau = 3e-4           preparation pulse length, s
//   prep_period = ...         optional; default keeps the middle-pulse spacing
//   tau = 2e-6                middle pulse length, s
//   period = 3.1e-5           middle pulse period, s (exactly one of period /
//   total_time = 5e-4          total_time when n > 0; period = total/(n+1))
//   n = 15                    number of middle pulses
//   detect_length = 8e-6      detection pulse length, s
//   detect_delay = 2e-6       sampling delay into the detection pulse, s
//   sample_rate = 1e6         sampling rate inside the window, Hz
//   sample_in_prep = false    single-pulse protocol: sample inside the prep
//   analytic_prep = true-length | uniform    closed-form prep handling
//
//   [scan]
//   start_hz = -1e5           two-photon detuning grid, Hz (required)
//   stop_hz = 1e5
//   points = 801
//
//   [output]
//   path = spectrum.csv
//
//   [sweep]                   only read by the sweep command
//   variable = N | T | tau | omega | Bz
//   start = 3
//   stop = 41
//   points = 20

#include <optional>
#include <string>
#include <vector>

#include "spinfp/analytic.hpp"
#include "spinfp/bloch.hpp"
#include "spinfp/core.hpp"

namespace spinfp {

enum class ModelKind { five, eleven, analytic_weak, analytic_split, analytic_full,
                       fourier_limit };

std::string to_string(ModelKind m);

struct SweepSpec {
    std::string variable;  // N | T | tau | omega | Bz
    double start = 0.0;
    double stop = 0.0;
    int points = 0;
};

struct RunConfig {
    ModelKind model = ModelKind::analytic_weak;

    // [system]
    double omega_avg = 1.77e6;
    double bz = 0.0;
    double gamma_c = 1.2e4;
    double gamma_insensitive = 0.0;
    Branching branching = Branching::one_three;

    // [pulses]
    double prep_tau = 3e-4;
    std::optional<double> prep_period;
    double tau = 2e-6;
    std::optional<double> period;
    std::optional<double> total_time;
    int n = 0;
    double detect_length = 8e-6;
    double detect_delay = 2e-6;
    double sample_rate = 1e6;
    bool sample_in_prep = false;
    AnalyticPrep analytic_prep = AnalyticPrep::true_length;

    // [scan]
    double start_hz = 0.0;
    double stop_hz = 0.0;
    int points = 0;

    // [output]
    std::string out_path = "spectrum.csv";

    std::optional<SweepSpec> sweep;

    FieldParams field_params() const;
    // Middle-pulse period after resolving the period/total_time alternative.
    double resolved_period() const;
    PulseSequence sequence() const;
    std::vector<double> grid() const;
};

// Parse and fully validate a config; every diagnostic carries the offending
// line number where one exists.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);  // reads the file, then parses

// Shortest decimal representation that round-trips to the same double.
std::string format_double(double v);

void write_spectrum_csv(const SpectrumTrace& trace, const std::string& path);
SpectrumTrace read_spectrum_csv(const std::string& path);

}  // namespace spinfp
