#include "spinfp/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <system_error>

namespace spinfp {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

[[noreturn]] void fail(int line, const std::string& msg) {
    throw ConfigError("config line " + std::to_string(line) + ": " + msg);
}

double parse_number(const std::string& v, int line) {
    try {
        std::size_t used = 0;
        const double x = std::stod(v, &used);
        if (used != v.size()) fail(line, "trailing characters after number '" + v + "'");
        return x;
    } catch (const std::invalid_argument&) {
        fail(line, "expected a number, got '" + v + "'");
    } catch (const std::out_of_range&) {
        fail(line, "number out of range: '" + v + "'");
    }
}

int parse_int(const std::string& v, int line) {
    const double x = parse_number(v, line);
    const double r = std::round(x);
    if (std::abs(x - r) > 1e-9) fail(line, "expected an integer, got '" + v + "'");
    return static_cast<int>(r);
}

bool parse_bool(const std::string& v, int line) {
    if (v == "true") return true;
    if (v == "false") return false;
    fail(line, "expected true/false, got '" + v + "'");
}

ModelKind parse_model(const std::string& v, int line) {
    if (v == "five") return ModelKind::five;
    if (v == "eleven") return ModelKind::eleven;
    if (v == "analytic-weak") return ModelKind::analytic_weak;
    if (v == "analytic-split") return ModelKind::analytic_split;
    if (v == "analytic-full") return ModelKind::analytic_full;
    if (v == "fourier-limit") return ModelKind::fourier_limit;
    fail(line, "unknown model '" + v + "'");
}

}  // namespace

std::string to_string(ModelKind m) {
    switch (m) {
        case ModelKind::five: return "five";
        case ModelKind::eleven: return "eleven";
        case ModelKind::analytic_weak: return "analytic-weak";
        case ModelKind::analytic_split: return "analytic-split";
        case ModelKind::analytic_full: return "analytic-full";
        case ModelKind::fourier_limit: return "fourier-limit";
    }
    return "?";
}

FieldParams RunConfig::field_params() const {
    FieldParams fp;
    fp.omega_avg = omega_avg;
    fp.Bz = bz;
    fp.gamma_c = gamma_c;
    fp.gamma_insensitive = gamma_insensitive;
    fp.branching = branching;
    fp.validate();
    return fp;
}

double RunConfig::resolved_period() const {
    if (period && total_time)
        throw ConfigError("give either 'period' or 'total_time', not both");
    if (period) return *period;
    if (total_time) {
        if (n < 1) throw ConfigError("'total_time' requires n >= 1");
        return *total_time / (n + 1);
    }
    if (n > 0) throw ConfigError("n > 0 requires 'period' or 'total_time'");
    return tau;
}

PulseSequence RunConfig::sequence() const {
    const double p = resolved_period();
    // Default preparation period: keep the dark gap in front of the first
    // middle pulse equal to the middle-pulse gap.
    const double prep_p =
        prep_period ? *prep_period : (n > 0 ? prep_tau + (p - tau) : prep_tau);
    PulseSequence seq{PulseSegment(prep_tau, prep_p), {}, detect_length, detect_delay,
                      sample_rate, sample_in_prep};
    seq.middle.assign(n, PulseSegment(tau, p));
    seq.validate();
    return seq;
}

std::vector<double> RunConfig::grid() const {
    if (points < 2) throw ConfigError("scan needs points >= 2");
    if (!(stop_hz > start_hz)) throw ConfigError("scan needs stop_hz > start_hz");
    std::vector<double> g(points);
    const double step = (stop_hz - start_hz) / (points - 1);
    for (int i = 0; i < points; ++i) g[i] = start_hz + i * step;
    return g;
}

RunConfig parse_config(const std::string& text) {
    RunConfig cfg;
    SweepSpec sweep;
    bool has_sweep = false;

    std::map<std::string, int> seen;  // "section.key" -> line
    std::string section;
    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    bool has_model = false, has_start = false, has_stop = false, has_points = false;

    while (std::getline(in, raw)) {
        ++lineno;
        std::string line = raw;
        if (const auto pos = line.find_first_of("#;"); pos != std::string::npos)
            line = line.substr(0, pos);
        line = trim(line);
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']') fail(lineno, "unterminated section header");
            section = line.substr(1, line.size() - 2);
            if (section != "system" && section != "pulses" && section != "scan" &&
                section != "output" && section != "sweep")
                fail(lineno, "unknown section [" + section + "]");
            continue;
        }

        const auto eq = line.find('=');
        if (eq == std::string::npos) fail(lineno, "expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) fail(lineno, "empty key");
        if (value.empty()) fail(lineno, "empty value for key '" + key + "'");
        if (section.empty()) fail(lineno, "key '" + key + "' outside any section");
        if (!seen.emplace(section + "." + key, lineno).second)
            fail(lineno, "duplicate key '" + key + "' in [" + section + "]");

        const auto positive = [&](double x) {
            if (!(x > 0.0)) fail(lineno, "'" + key + "' must be > 0");
            return x;
        };
        const auto non_negative = [&](double x) {
            if (!(x < 0.0)) return x;
            fail(lineno, "'" + key + "' must be >= 0");
        };

        if (section == "system") {
            if (key == "model") {
                cfg.model = parse_model(value, lineno);
                has_model = true;
            } else if (key == "omega_avg") {
                cfg.omega_avg = positive(parse_number(value, lineno));
            } else if (key == "bz") {
                cfg.bz = non_negative(parse_number(value, lineno));
            } else if (key == "gamma_c") {
                cfg.gamma_c = non_negative(parse_number(value, lineno));
            } else if (key == "gamma_insensitive") {
                cfg.gamma_insensitive = non_negative(parse_number(value, lineno));
            } else if (key == "branching") {
                if (value == "one-three") cfg.branching = Branching::one_three;
                else if (value == "equal") cfg.branching = Branching::equal;
                else fail(lineno, "branching must be one-three or equal");
            } else {
                fail(lineno, "unknown key '" + key + "' in [system]");
            }
        } else if (section == "pulses") {
            if (key == "prep_tau") cfg.prep_tau = positive(parse_number(value, lineno));
            else if (key == "prep_period")
                cfg.prep_period = positive(parse_number(value, lineno));
            else if (key == "tau") cfg.tau = positive(parse_number(value, lineno));
            else if (key == "period") cfg.period = positive(parse_number(value, lineno));
            else if (key == "total_time")
                cfg.total_time = positive(parse_number(value, lineno));
            else if (key == "n") {
                cfg.n = parse_int(value, lineno);
                if (cfg.n < 0) fail(lineno, "'n' must be >= 0");
            } else if (key == "detect_length")
                cfg.detect_length = positive(parse_number(value, lineno));
            else if (key == "detect_delay")
                cfg.detect_delay = positive(parse_number(value, lineno));
            else if (key == "sample_rate")
                cfg.sample_rate = positive(parse_number(value, lineno));
            else if (key == "sample_in_prep")
                cfg.sample_in_prep = parse_bool(value, lineno);
            else if (key == "analytic_prep") {
                if (value == "true-length") cfg.analytic_prep = AnalyticPrep::true_length;
                else if (value == "uniform") cfg.analytic_prep = AnalyticPrep::uniform;
                else fail(lineno, "analytic_prep must be true-length or uniform");
            } else {
                fail(lineno, "unknown key '" + key + "' in [pulses]");
            }
        } else if (section == "scan") {
            if (key == "start_hz") {
                cfg.start_hz = parse_number(value, lineno);
                has_start = true;
            } else if (key == "stop_hz") {
                cfg.stop_hz = parse_number(value, lineno);
                has_stop = true;
            } else if (key == "points") {
                cfg.points = parse_int(value, lineno);
                has_points = true;
            } else {
                fail(lineno, "unknown key '" + key + "' in [scan]");
            }
        } else if (section == "output") {
            if (key == "path") cfg.out_path = value;
            else fail(lineno, "unknown key '" + key + "' in [output]");
        } else {  // sweep
            if (key == "variable") {
                if (value != "N" && value != "T" && value != "tau" && value != "omega" &&
                    value != "Bz")
                    fail(lineno, "sweep variable must be one of N, T, tau, omega, Bz");
                sweep.variable = value;
                has_sweep = true;
            } else if (key == "start") {
                sweep.start = parse_number(value, lineno);
                has_sweep = true;
            } else if (key == "stop") {
                sweep.stop = parse_number(value, lineno);
                has_sweep = true;
            } else if (key == "points") {
                sweep.points = parse_int(value, lineno);
                has_sweep = true;
            } else {
                fail(lineno, "unknown key '" + key + "' in [sweep]");
            }
        }
    }

    if (!has_model) throw ConfigError("config: missing required key 'model' in [system]");
    if (!has_start || !has_stop || !has_points)
        throw ConfigError("config: [scan] requires start_hz, stop_hz and points");
    if (has_sweep) {
        if (sweep.variable.empty())
            throw ConfigError("config: [sweep] requires 'variable'");
        if (sweep.points < 1) throw ConfigError("config: [sweep] requires points >= 1");
        cfg.sweep = sweep;
    }

    // Cross-field validation, reported against the lines that set the values.
    const auto line_of = [&](const std::string& sk) {
        const auto it = seen.find(sk);
        return it == seen.end() ? 0 : it->second;
    };
    try {
        cfg.field_params();
        cfg.sequence();
        cfg.grid();
    } catch (const ConfigError& e) {
        const std::string what = e.what();
        int line = 0;
        if (what.find("tau") != std::string::npos) line = line_of("pulses.tau");
        if (what.find("period") != std::string::npos && line == 0)
            line = line_of("pulses.period");
        if (what.find("detect") != std::string::npos) line = line_of("pulses.detect_delay");
        if (what.find("points") != std::string::npos) line = line_of("scan.points");
        if (what.find("stop_hz") != std::string::npos) line = line_of("scan.stop_hz");
        if (line > 0) fail(line, what);
        throw;
    }
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::system_error(errno, std::generic_category(),
                                     "cannot open config '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

void write_spectrum_csv(const SpectrumTrace& trace, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::system_error(errno, std::generic_category(),
                                      "cannot open '" + path + "' for writing");
    out << "delta_hz,raw,normalized\n";
    for (std::size_t i = 0; i < trace.delta_hz.size(); ++i)
        out << format_double(trace.delta_hz[i]) << ',' << format_double(trace.raw[i])
            << ',' << format_double(trace.normalized[i]) << '\n';
    if (!out.flush()) throw std::system_error(errno, std::generic_category(),
                                              "write failed for '" + path + "'");
}

SpectrumTrace read_spectrum_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::system_error(errno, std::generic_category(),
                                     "cannot open '" + path + "'");
    SpectrumTrace trace;
    std::string line;
    if (!std::getline(in, line) || trim(line) != "delta_hz,raw,normalized")
        throw ConfigError("malformed CSV '" + path + "': missing spectrum header");
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        std::istringstream row(line);
        std::string cell;
        double vals[3];
        for (int k = 0; k < 3; ++k) {
            if (!std::getline(row, cell, ','))
                throw ConfigError("malformed CSV '" + path + "' at line " +
                                  std::to_string(lineno));
            vals[k] = parse_number(trim(cell), lineno);
        }
        trace.delta_hz.push_back(vals[0]);
        trace.raw.push_back(vals[1]);
        trace.normalized.push_back(vals[2]);
    }
    if (trace.delta_hz.empty())
        throw ConfigError("malformed CSV '" + path + "': no data rows");
    return trace;
}

}  // namespace spinfp
