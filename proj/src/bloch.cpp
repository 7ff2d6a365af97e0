#include "spinfp/bloch.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <complex>
#include <thread>

namespace spinfp {

namespace {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;
constexpr std::complex<double> I{0.0, 1.0};

int idx(int r, int c, int d) { return c * d + r; }

// M += the coherent part -i (H rho - rho H^dagger) in column-stacked form.
void add_hamiltonian_part(MatrixXcd& M, const MatrixXcd& H) {
    const int d = static_cast<int>(H.rows());
    for (int r = 0; r < d; ++r)
        for (int c = 0; c < d; ++c)
            for (int k = 0; k < d; ++k) {
                M(idx(r, c, d), idx(k, c, d)) += -I * H(r, k);
                M(idx(r, c, d), idx(r, k, d)) += I * std::conj(H(c, k));
            }
}

void add_source(MatrixXcd& M, int ground, int excited, double rate, int d) {
    M(idx(ground, ground, d), idx(excited, excited, d)) += rate;
}

void add_dephasing(MatrixXcd& M, int i, int j, double gamma, int d) {
    M(idx(i, j, d), idx(i, j, d)) -= gamma;
    M(idx(j, i, d), idx(j, i, d)) -= gamma;
}

double absorption(const VectorXcd& v, Model model) {
    const int d = model_dim(model);
    double a = v[idx(4, 4, d)].real();
    if (model == Model::eleven) a += v[idx(9, 9, d)].real() + v[idx(10, 10, d)].real();
    return a;
}

VectorXcd initial_vec(Model model) {
    const DensityMatrix rho = DensityMatrix::uniform_ground(model);
    const int d = rho.dim();
    return Eigen::Map<const VectorXcd>(rho.rho.data(), d * d);
}

}  // namespace

DensityMatrix DensityMatrix::uniform_ground(Model m) {
    const int d = model_dim(m);
    DensityMatrix out{MatrixXcd::Zero(d, d)};
    if (m == Model::five) {
        for (int g : {0, 1, 2, 3}) out.rho(g, g) = 0.25;
    } else {
        for (int g : {0, 1, 2, 3, 5, 6, 7, 8}) out.rho(g, g) = 0.125;
    }
    return out;
}

double DensityMatrix::hermiticity_defect() const {
    return (rho - rho.adjoint()).cwiseAbs().maxCoeff();
}

double DensityMatrix::trace_defect() const { return std::abs(rho.trace() - 1.0); }

double DensityMatrix::population_range_defect() const {
    double worst = 0.0;
    for (int i = 0; i < dim(); ++i) {
        const double p = rho(i, i).real();
        worst = std::max({worst, -p, p - 1.0});
    }
    return std::max(worst, 0.0);
}

bool DensityMatrix::is_physical(double herm_tol, double trace_tol, double pop_tol) const {
    return hermiticity_defect() <= herm_tol && trace_defect() <= trace_tol &&
           population_range_defect() <= pop_tol;
}

Liouvillian build_liouvillian_5(double delta, const FieldParams& fp, const Constants& c,
                                bool light_on) {
    fp.validate();
    const int d = 5;
    const ZeemanDetunings z = zeeman_detunings(delta, fp.Bz, c);
    const RabiSet r = light_on ? rabi_set_from_average(fp.omega_avg)
                               : RabiSet{0.0, 0.0, 0.0, 0.0};

    MatrixXcd H = MatrixXcd::Zero(d, d);
    H(0, 0) = z.Delta1;
    H(1, 1) = z.Delta2;
    H(2, 2) = z.Delta3;
    H(3, 3) = z.Delta4;
    H(4, 4) = -I * (c.Gamma / 2.0);
    const double coup[4] = {r.a_plus, r.a_minus, r.b_plus, r.b_minus};
    for (int g = 0; g < 4; ++g) {
        H(g, 4) += coup[g] / 2.0;
        H(4, g) += coup[g] / 2.0;
    }

    MatrixXcd M = MatrixXcd::Zero(d * d, d * d);
    add_hamiltonian_part(M, H);

    if (fp.branching == Branching::one_three) {
        add_source(M, 0, 4, c.Gamma / 8.0, d);
        add_source(M, 1, 4, c.Gamma / 8.0, d);
        add_source(M, 2, 4, 3.0 * c.Gamma / 8.0, d);
        add_source(M, 3, 4, 3.0 * c.Gamma / 8.0, d);
    } else {
        for (int g = 0; g < 4; ++g) add_source(M, g, 4, c.Gamma / 4.0, d);
    }

    for (auto [i, j] : {std::pair{0, 1}, {0, 2}, {1, 3}, {2, 3}})
        add_dephasing(M, i, j, fp.gamma_c, d);
    for (auto [i, j] : {std::pair{0, 3}, {1, 2}})
        add_dephasing(M, i, j, fp.gamma_insensitive, d);

    return {std::move(M), d};
}

const std::vector<std::array<int, 3>>& eleven_branching_twelfths() {
    // {ground, excited, numerator/12 of Gamma}; columns 4, 9 and 10 each sum
    // to twelve twelfths, i.e. every excited state decays at exactly Gamma.
    static const std::vector<std::array<int, 3>> table = {
        {0, 4, 1}, {0, 9, 1}, {1, 4, 1}, {1, 10, 1}, {2, 4, 3},
        {2, 9, 3}, {3, 4, 3}, {3, 10, 3}, {5, 9, 1},  {5, 10, 1},
        {6, 9, 6}, {7, 4, 4}, {7, 9, 1},  {7, 10, 1}, {8, 10, 6},
    };
    return table;
}

Liouvillian build_liouvillian_11(double delta, const FieldParams& fp, const Constants& c,
                                 bool light_on) {
    fp.validate();
    const int d = 11;
    const double dz1 = c.g1 * two_pi * c.muB_over_h * fp.Bz;
    const double dz2 = c.g2 * two_pi * c.muB_over_h * fp.Bz;
    const double dz3 = c.g3 * two_pi * c.muB_over_h * fp.Bz;
    const double x = light_on ? rabi_set_from_average(fp.omega_avg).a_plus : 0.0;

    MatrixXcd H = MatrixXcd::Zero(d, d);
    const std::complex<double> diag[11] = {
        delta + dz1, delta - dz1, dz2,  -dz2, -I * (c.Gamma / 2.0),
        delta,       2.0 * dz2,   0.0,  -2.0 * dz2,
        dz3 - I * (c.Gamma / 2.0), -dz3 - I * (c.Gamma / 2.0)};
    for (int i = 0; i < d; ++i) H(i, i) = diag[i];

    const double s3 = std::sqrt(3.0), s6 = std::sqrt(6.0);
    const struct { int g, e; double amp; } coup[] = {
        {0, 4, x},       {1, 4, -x},     {2, 4, s3 * x}, {3, 4, s3 * x},
        {5, 9, -x},      {5, 10, x},     {6, 9, s6 * x}, {7, 9, x},
        {7, 10, x},      {8, 10, s6 * x},
    };
    for (const auto& cp : coup) {
        H(cp.g, cp.e) += cp.amp / 2.0;
        H(cp.e, cp.g) += cp.amp / 2.0;
    }

    MatrixXcd M = MatrixXcd::Zero(d * d, d * d);
    add_hamiltonian_part(M, H);

    for (const auto& br : eleven_branching_twelfths())
        add_source(M, br[0], br[1], c.Gamma * br[2] / 12.0, d);

    static const int ground[8] = {0, 1, 2, 3, 5, 6, 7, 8};
    auto insensitive = [](int i, int j) {
        return (i == 0 && j == 3) || (i == 1 && j == 2) || (i == 5 && j == 7);
    };
    for (int a = 0; a < 8; ++a)
        for (int b = a + 1; b < 8; ++b) {
            const int i = ground[a], j = ground[b];
            add_dephasing(M, i, j, insensitive(i, j) ? fp.gamma_insensitive : fp.gamma_c,
                          d);
        }

    return {std::move(M), d};
}

Liouvillian build_liouvillian(Model m, double delta, const FieldParams& fp,
                              const Constants& c, bool light_on) {
    return m == Model::five ? build_liouvillian_5(delta, fp, c, light_on)
                            : build_liouvillian_11(delta, fp, c, light_on);
}

Eigen::MatrixXcd propagator(const Liouvillian& L, double t) {
    MatrixXcd U = (L.M * t).exp();
    if (!U.allFinite())
        throw NumericError("matrix exponential failed to produce finite entries");
    return U;
}

DensityMatrix propagate_segment(const DensityMatrix& rho, const Liouvillian& L, double t) {
    const int d = L.dim;
    if (rho.dim() != d) throw ConfigError("density matrix dimension mismatch");
    const MatrixXcd U = propagator(L, t);
    const VectorXcd v = U * Eigen::Map<const VectorXcd>(rho.rho.data(), d * d);
    DensityMatrix out{Eigen::Map<const MatrixXcd>(v.data(), d, d)};
    return out;
}

const PropagatorCache::Entry& PropagatorCache::get(const Liouvillian& on,
                                                   const Liouvillian& off,
                                                   const PulseSegment& seg) {
    const auto key = std::make_pair(seg.tau, seg.period);
    auto it = entries_.find(key);
    if (it == entries_.end()) {
        Entry e{propagator(on, seg.tau),
                seg.period > seg.tau ? propagator(off, seg.period - seg.tau)
                                     : MatrixXcd::Identity(on.M.rows(), on.M.cols())};
        it = entries_.emplace(key, std::move(e)).first;
    }
    return it->second;
}

double run_sequence(double delta, const PulseSequence& seq, const FieldParams& fp,
                    const Constants& c, Model model) {
    seq.validate();
    const Liouvillian on = build_liouvillian(model, delta, fp, c, true);

    VectorXcd v = initial_vec(model);
    const double step = 1.0 / seq.sample_rate;

    // Sample the excited population at detect_delay + k/sample_rate while the
    // instant stays inside the sampling window (inclusive end).
    auto sample_window = [&](VectorXcd state, double window_end) {
        state = propagator(on, seq.detect_delay) * state;
        const int n =
            1 + static_cast<int>(std::floor((window_end - seq.detect_delay) / step + 1e-9));
        double acc = absorption(state, model);
        if (n > 1) {
            const MatrixXcd U_step = propagator(on, step);
            for (int k = 1; k < n; ++k) {
                state = U_step * state;
                acc += absorption(state, model);
            }
        }
        return acc / n;
    };

    if (seq.sample_in_prep) return 1.0 - sample_window(std::move(v), seq.prep.tau);

    const Liouvillian off = build_liouvillian(model, delta, fp, c, false);
    v = propagator(on, seq.prep.tau) * v;
    if (seq.prep.period > seq.prep.tau)
        v = propagator(off, seq.prep.period - seq.prep.tau) * v;

    PropagatorCache cache;
    for (const PulseSegment& seg : seq.middle) {
        const auto& e = cache.get(on, off, seg);
        v = e.U_on * v;
        v = e.U_off * v;
    }

    return 1.0 - sample_window(std::move(v), seq.detect_length);
}

void normalize_trace(SpectrumTrace& trace) {
    const auto [lo, hi] = std::minmax_element(trace.raw.begin(), trace.raw.end());
    if (trace.raw.empty() || *lo == *hi) {
        trace.degenerate = true;
        trace.normalized = trace.raw;
        return;
    }
    trace.degenerate = false;
    trace.normalized.resize(trace.raw.size());
    for (std::size_t i = 0; i < trace.raw.size(); ++i)
        trace.normalized[i] = (trace.raw[i] - *lo) / (*hi - *lo);
}

SpectrumTrace scan_spectrum(const std::vector<double>& delta_hz, const PulseSequence& seq,
                            const FieldParams& fp, const Constants& c, Model model,
                            int n_threads) {
    if (delta_hz.size() < 2) throw ConfigError("spectrum scan needs at least 2 grid points");
    for (std::size_t i = 1; i < delta_hz.size(); ++i)
        if (!(delta_hz[i] > delta_hz[i - 1]))
            throw ConfigError("scan grid must be strictly increasing");
    seq.validate();

    SpectrumTrace trace;
    trace.delta_hz = delta_hz;
    trace.raw.resize(delta_hz.size());
    trace.model = model == Model::five ? "five" : "eleven";

    if (n_threads <= 0) n_threads = static_cast<int>(std::thread::hardware_concurrency());
    n_threads = std::clamp<int>(n_threads, 1, static_cast<int>(delta_hz.size()));

    auto worker = [&](int tid) {
        for (std::size_t i = tid; i < delta_hz.size(); i += n_threads)
            trace.raw[i] = run_sequence(two_pi * delta_hz[i], seq, fp, c, model);
    };
    if (n_threads == 1) {
        worker(0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_threads);
        for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker, t);
        for (auto& th : pool) th.join();
    }

    normalize_trace(trace);
    return trace;
}

}  // namespace spinfp
