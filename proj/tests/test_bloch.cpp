#include <doctest.h>

#include <boost/numeric/odeint.hpp>

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "spinfp/bloch.hpp"

using namespace spinfp;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;

namespace {

const Constants kC;
constexpr std::complex<double> I{0.0, 1.0};

MatrixXcd random_matrix(int d, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    MatrixXcd m(d, d);
    for (int r = 0; r < d; ++r)
        for (int c = 0; c < d; ++c) m(r, c) = std::complex<double>{u(rng), u(rng)};
    return m;
}

VectorXcd vec(const MatrixXcd& m) {
    return Eigen::Map<const VectorXcd>(m.data(), m.size());
}

// Hand-built Hamiltonians duplicating the level scheme, so any accidental
// change to the generator shows up against these frozen tables.
MatrixXcd hamiltonian_5(double delta, const FieldParams& fp, bool light_on) {
    const ZeemanDetunings z = zeeman_detunings(delta, fp.Bz, kC);
    MatrixXcd H = MatrixXcd::Zero(5, 5);
    H(0, 0) = z.Delta1;
    H(1, 1) = z.Delta2;
    H(2, 2) = z.Delta3;
    H(3, 3) = z.Delta4;
    H(4, 4) = -I * (kC.Gamma / 2.0);
    if (light_on) {
        const RabiSet r = rabi_set_from_average(fp.omega_avg);
        const double coup[4] = {r.a_plus, r.a_minus, r.b_plus, r.b_minus};
        for (int g = 0; g < 4; ++g) H(g, 4) = H(4, g) = coup[g] / 2.0;
    }
    return H;
}

MatrixXcd hamiltonian_11(double delta, const FieldParams& fp, bool light_on) {
    const double u = two_pi * kC.muB_over_h * fp.Bz;
    const double dz1 = kC.g1 * u, dz2 = kC.g2 * u, dz3 = kC.g3 * u;
    MatrixXcd H = MatrixXcd::Zero(11, 11);
    const std::complex<double> diag[11] = {delta + dz1,
                                           delta - dz1,
                                           dz2,
                                           -dz2,
                                           -I * (kC.Gamma / 2.0),
                                           delta,
                                           2.0 * dz2,
                                           0.0,
                                           -2.0 * dz2,
                                           dz3 - I * (kC.Gamma / 2.0),
                                           -dz3 - I * (kC.Gamma / 2.0)};
    for (int i = 0; i < 11; ++i) H(i, i) = diag[i];
    if (light_on) {
        const double x = rabi_set_from_average(fp.omega_avg).a_plus;
        const double s3 = std::sqrt(3.0), s6 = std::sqrt(6.0);
        const struct {
            int g, e;
            double amp;
        } coup[] = {{0, 4, x},  {1, 4, -x},  {2, 4, s3 * x}, {3, 4, s3 * x},
                    {5, 9, -x}, {5, 10, x},  {6, 9, s6 * x}, {7, 9, x},
                    {7, 10, x}, {8, 10, s6 * x}};
        for (const auto& cp : coup) H(cp.g, cp.e) = H(cp.e, cp.g) = cp.amp / 2.0;
    }
    return H;
}

// Reference Lindblad right-hand side evaluated with dense matrix algebra.
MatrixXcd reference_rhs(Model model, double delta, const FieldParams& fp,
                        bool light_on, const MatrixXcd& rho) {
    const MatrixXcd H = model == Model::five ? hamiltonian_5(delta, fp, light_on)
                                             : hamiltonian_11(delta, fp, light_on);
    MatrixXcd d = -I * (H * rho - rho * H.adjoint());

    if (model == Model::five) {
        if (fp.branching == Branching::one_three) {
            const double w[4] = {1.0 / 8.0, 1.0 / 8.0, 3.0 / 8.0, 3.0 / 8.0};
            for (int g = 0; g < 4; ++g) d(g, g) += w[g] * kC.Gamma * rho(4, 4);
        } else {
            for (int g = 0; g < 4; ++g) d(g, g) += kC.Gamma / 4.0 * rho(4, 4);
        }
        for (auto [i, j] : {std::pair{0, 1}, {0, 2}, {1, 3}, {2, 3}}) {
            d(i, j) -= fp.gamma_c * rho(i, j);
            d(j, i) -= fp.gamma_c * rho(j, i);
        }
        for (auto [i, j] : {std::pair{0, 3}, {1, 2}}) {
            d(i, j) -= fp.gamma_insensitive * rho(i, j);
            d(j, i) -= fp.gamma_insensitive * rho(j, i);
        }
    } else {
        for (const auto& br : eleven_branching_twelfths())
            d(br[0], br[0]) += kC.Gamma * br[2] / 12.0 * rho(br[1], br[1]);
        const int ground[8] = {0, 1, 2, 3, 5, 6, 7, 8};
        auto insensitive = [](int i, int j) {
            return (i == 0 && j == 3) || (i == 1 && j == 2) || (i == 5 && j == 7);
        };
        for (int a = 0; a < 8; ++a)
            for (int b = a + 1; b < 8; ++b) {
                const int i = ground[a], j = ground[b];
                const double g = insensitive(i, j) ? fp.gamma_insensitive : fp.gamma_c;
                d(i, j) -= g * rho(i, j);
                d(j, i) -= g * rho(j, i);
            }
    }
    return d;
}

// High-order adaptive integration of dv/dt = M v over a real stacked state,
// used as an independent oracle for the matrix-exponential propagator.
VectorXcd ode_evolve(const Liouvillian& L, const VectorXcd& v0, double t) {
    namespace ode = boost::numeric::odeint;
    using state = std::vector<double>;
    const int n = static_cast<int>(L.M.rows());

    MatrixXd Mr(2 * n, 2 * n);
    Mr.topLeftCorner(n, n) = L.M.real();
    Mr.topRightCorner(n, n) = -L.M.imag();
    Mr.bottomLeftCorner(n, n) = L.M.imag();
    Mr.bottomRightCorner(n, n) = L.M.real();

    state y(2 * n);
    for (int i = 0; i < n; ++i) {
        y[i] = v0[i].real();
        y[n + i] = v0[i].imag();
    }
    auto rhs = [&Mr, n](const state& x, state& dxdt, double) {
        Eigen::Map<Eigen::VectorXd>(dxdt.data(), 2 * n) =
            Mr * Eigen::Map<const Eigen::VectorXd>(x.data(), 2 * n);
    };
    ode::integrate_adaptive(
        ode::make_controlled(1e-12, 1e-12, ode::runge_kutta_fehlberg78<state>()), rhs,
        y, 0.0, t, t / 256.0);

    VectorXcd out(n);
    for (int i = 0; i < n; ++i) out[i] = std::complex<double>{y[i], y[n + i]};
    return out;
}

FieldParams random_params(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> om(5e5, 2.5e6), bz(0.0, 0.6),
        gc(0.0, 5e4), gi(0.0, 1e3);
    FieldParams fp;
    fp.omega_avg = om(rng);
    fp.Bz = bz(rng);
    fp.gamma_c = gc(rng);
    fp.gamma_insensitive = gi(rng);
    fp.branching = (rng() & 1) ? Branching::one_three : Branching::equal;
    return fp;
}

PulseSequence short_sequence() {
    PulseSequence seq{PulseSegment(5e-5, 6e-5)};
    seq.middle.assign(2, PulseSegment(2e-6, 3.1e-5));
    seq.detect_length = 8e-6;
    seq.detect_delay = 2e-6;
    seq.sample_rate = 1e6;
    return seq;
}

}  // namespace

TEST_CASE("uniform ground states are physical and evenly populated") {
    const auto r5 = DensityMatrix::uniform_ground(Model::five);
    CHECK(r5.dim() == 5);
    CHECK(r5.trace_real() == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(r5.rho(0, 0).real() == doctest::Approx(0.25));
    CHECK(r5.rho(4, 4) == std::complex<double>{0.0, 0.0});
    CHECK(r5.is_physical());

    const auto r11 = DensityMatrix::uniform_ground(Model::eleven);
    CHECK(r11.dim() == 11);
    CHECK(r11.trace_real() == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(r11.rho(7, 7).real() == doctest::Approx(0.125));
    for (int e : {4, 9, 10}) CHECK(r11.rho(e, e) == std::complex<double>{0.0, 0.0});
    CHECK(r11.is_physical());
}

TEST_CASE("physicality defect measures flag broken matrices") {
    DensityMatrix bad{MatrixXcd::Zero(5, 5)};
    bad.rho(0, 0) = 1.3;
    bad.rho(1, 1) = -0.3;
    bad.rho(0, 1) = 0.2;
    bad.rho(1, 0) = 0.1;
    CHECK(bad.trace_defect() == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(bad.hermiticity_defect() == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(bad.population_range_defect() == doctest::Approx(0.3).epsilon(1e-12));
    CHECK_FALSE(bad.is_physical());
}

TEST_CASE("superoperator action matches the dense Lindblad right-hand side") {
    std::mt19937_64 rng(42);
    for (Model model : {Model::five, Model::eleven}) {
        const int d = model_dim(model);
        for (int k = 0; k < 12; ++k) {
            const FieldParams fp = random_params(rng);
            const double delta =
                two_pi * std::uniform_real_distribution<double>(-5e4, 5e4)(rng);
            const bool on = k % 3 != 0;
            const Liouvillian L = build_liouvillian(model, delta, fp, kC, on);
            REQUIRE(L.dim == d);

            const MatrixXcd rho = random_matrix(d, rng);
            const VectorXcd got = L.M * vec(rho);
            const VectorXcd want = vec(reference_rhs(model, delta, fp, on, rho));
            const double scale = std::max(want.cwiseAbs().maxCoeff(), 1.0);
            CHECK((got - want).cwiseAbs().maxCoeff() / scale < 1e-12);
        }
    }
}

TEST_CASE("generator preserves trace and hermiticity algebraically") {
    std::mt19937_64 rng(43);
    for (Model model : {Model::five, Model::eleven}) {
        const int d = model_dim(model);
        const FieldParams fp = random_params(rng);
        const Liouvillian L = build_liouvillian(model, two_pi * 1234.0, fp, kC, true);

        // d/dt Tr(rho) == 0 for every input: the diagonal rows of M sum to zero.
        for (int col = 0; col < d * d; ++col) {
            std::complex<double> s = 0.0;
            for (int i = 0; i < d; ++i) s += L.M(i * d + i, col);
            CHECK(std::abs(s) < 1e-8);
        }
        // Hermitian inputs stay Hermitian: M(rc <- ab) == conj(M(cr <- ba)).
        double worst = 0.0;
        for (int r = 0; r < d; ++r)
            for (int c = 0; c < d; ++c)
                for (int a = 0; a < d; ++a)
                    for (int b = 0; b < d; ++b)
                        worst = std::max(
                            worst, std::abs(L.M(c * d + r, b * d + a) -
                                            std::conj(L.M(r * d + c, a * d + b))));
        CHECK(worst < 1e-8);
    }
}

TEST_CASE("light-off generator is independent of the drive strength") {
    FieldParams a, b;
    a.omega_avg = 1.77e6;
    b.omega_avg = 3.3e5;
    a.Bz = b.Bz = 0.116;
    const MatrixXcd Ma = build_liouvillian_5(two_pi * 500.0, a, kC, false).M;
    const MatrixXcd Mb = build_liouvillian_5(two_pi * 500.0, b, kC, false).M;
    CHECK((Ma - Mb).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("eleven-level branching table conserves every excited state") {
    const auto& table = eleven_branching_twelfths();
    int sums[11] = {};
    for (const auto& br : table) {
        const int g = br[0], e = br[1], num = br[2];
        CHECK(num > 0);
        CHECK((g == 0 || g == 1 || g == 2 || g == 3 || g == 5 || g == 6 || g == 7 ||
               g == 8));
        CHECK((e == 4 || e == 9 || e == 10));
        sums[e] += num;
    }
    CHECK(sums[4] == 12);
    CHECK(sums[9] == 12);
    CHECK(sums[10] == 12);
}

TEST_CASE("matrix exponential agrees with adaptive integration") {
    std::mt19937_64 rng(44);
    for (Model model : {Model::five, Model::eleven}) {
        const FieldParams fp = random_params(rng);
        const double delta = two_pi * 2750.0;
        const VectorXcd v0 = vec(DensityMatrix::uniform_ground(model).rho);

        const Liouvillian on = build_liouvillian(model, delta, fp, kC, true);
        const Liouvillian off = build_liouvillian(model, delta, fp, kC, false);
        for (const auto& [L, t] : {std::pair<const Liouvillian&, double>{on, 2e-6},
                                   {off, 2.9e-5},
                                   {on, 8e-6}}) {
            const VectorXcd via_exp = propagator(L, t) * v0;
            const VectorXcd via_ode = ode_evolve(L, v0, t);
            CHECK((via_exp - via_ode).cwiseAbs().maxCoeff() < 1e-9);
        }
    }
}

TEST_CASE("propagation keeps random physical states physical") {
    std::mt19937_64 rng(45);
    std::uniform_real_distribution<double> dl(-5e4, 5e4);
    for (Model model : {Model::five, Model::eleven}) {
        const int reps = model == Model::five ? 20 : 6;
        for (int k = 0; k < reps; ++k) {
            const FieldParams fp = random_params(rng);
            const Liouvillian on =
                build_liouvillian(model, two_pi * dl(rng), fp, kC, true);
            const Liouvillian off =
                build_liouvillian(model, two_pi * dl(rng), fp, kC, false);

            DensityMatrix rho = DensityMatrix::uniform_ground(model);
            rho = propagate_segment(rho, on, 5e-5);
            rho = propagate_segment(rho, off, 2.9e-5);
            rho = propagate_segment(rho, on, 2e-6);
            CHECK(rho.is_physical(1e-10, 1e-9, 1e-9));
        }
    }
}

TEST_CASE("propagator rejects non-finite generators") {
    Liouvillian L{MatrixXcd::Zero(25, 25), 5};
    L.M(0, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(propagator(L, 1e-6), NumericError);
}

TEST_CASE("propagator cache reuses identical segments") {
    FieldParams fp;
    const Liouvillian on = build_liouvillian_5(two_pi * 100.0, fp, kC, true);
    const Liouvillian off = build_liouvillian_5(two_pi * 100.0, fp, kC, false);

    PropagatorCache cache;
    const PulseSegment seg(2e-6, 3.1e-5);
    const auto& e1 = cache.get(on, off, seg);
    const auto& e2 = cache.get(on, off, seg);
    CHECK(&e1 == &e2);
    CHECK(cache.size() == 1);

    const auto& e3 = cache.get(on, off, PulseSegment(2e-6, 4.0e-5));
    CHECK(cache.size() == 2);
    CHECK(&e3 != &e1);

    const auto& b2b = cache.get(on, off, PulseSegment(2e-6));
    CHECK(b2b.U_off.isIdentity(0.0));
}

TEST_CASE("run_sequence equals a hand-stepped propagation") {
    FieldParams fp;
    fp.omega_avg = 1.77e6;
    fp.Bz = 0.116;
    const PulseSequence seq = short_sequence();
    const double delta = two_pi * 1500.0;

    const Liouvillian on = build_liouvillian_5(delta, fp, kC, true);
    const Liouvillian off = build_liouvillian_5(delta, fp, kC, false);

    DensityMatrix rho = DensityMatrix::uniform_ground(Model::five);
    rho = propagate_segment(rho, on, seq.prep.tau);
    rho = propagate_segment(rho, off, seq.prep.period - seq.prep.tau);
    for (const auto& seg : seq.middle) {
        rho = propagate_segment(rho, on, seg.tau);
        rho = propagate_segment(rho, off, seg.period - seg.tau);
    }
    rho = propagate_segment(rho, on, seq.detect_delay);
    // Window [2 us, 8 us] at 1 MHz holds exactly seven samples.
    double acc = rho.rho(4, 4).real();
    for (int k = 1; k < 7; ++k) {
        rho = propagate_segment(rho, on, 1.0 / seq.sample_rate);
        acc += rho.rho(4, 4).real();
    }
    const double expected = 1.0 - acc / 7.0;

    CHECK(run_sequence(delta, seq, fp, kC, Model::five) ==
          doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("run_sequence takes a single sample when the window admits one") {
    FieldParams fp;
    fp.omega_avg = 1.77e6;
    PulseSequence seq = short_sequence();
    seq.detect_length = 2.5e-6;  // only the t = detect_delay sample fits

    const double delta = two_pi * 800.0;
    const Liouvillian on = build_liouvillian_5(delta, fp, kC, true);
    const Liouvillian off = build_liouvillian_5(delta, fp, kC, false);

    DensityMatrix rho = DensityMatrix::uniform_ground(Model::five);
    rho = propagate_segment(rho, on, seq.prep.tau);
    rho = propagate_segment(rho, off, seq.prep.period - seq.prep.tau);
    for (const auto& seg : seq.middle) {
        rho = propagate_segment(rho, on, seg.tau);
        rho = propagate_segment(rho, off, seg.period - seg.tau);
    }
    rho = propagate_segment(rho, on, seq.detect_delay);

    CHECK(run_sequence(delta, seq, fp, kC, Model::five) ==
          doctest::Approx(1.0 - rho.rho(4, 4).real()).epsilon(1e-12));
}

TEST_CASE("single-pulse protocol samples inside the preparation pulse") {
    FieldParams fp;
    fp.omega_avg = 1.25e6;
    PulseSequence seq{PulseSegment(2e-5)};
    seq.sample_in_prep = true;
    seq.detect_delay = 1.5e-5;
    seq.sample_rate = 1e6;  // samples at 15..20 us: six of them

    const double delta = two_pi * 3000.0;
    const Liouvillian on = build_liouvillian_5(delta, fp, kC, true);
    DensityMatrix rho = DensityMatrix::uniform_ground(Model::five);
    rho = propagate_segment(rho, on, seq.detect_delay);
    double acc = rho.rho(4, 4).real();
    for (int k = 1; k < 6; ++k) {
        rho = propagate_segment(rho, on, 1e-6);
        acc += rho.rho(4, 4).real();
    }
    CHECK(run_sequence(delta, seq, fp, kC, Model::five) ==
          doctest::Approx(1.0 - acc / 6.0).epsilon(1e-12));
}

TEST_CASE("zero-field spectra are symmetric in the detuning") {
    FieldParams fp;
    fp.omega_avg = 1.77e6;
    fp.Bz = 0.0;
    const PulseSequence seq = short_sequence();
    for (double hz : {713.0, 3713.0, 16129.0}) {
        const double plus = run_sequence(two_pi * hz, seq, fp, kC, Model::five);
        const double minus = run_sequence(-two_pi * hz, seq, fp, kC, Model::five);
        CHECK(plus == doctest::Approx(minus).epsilon(1e-9));
    }
}

TEST_CASE("normalize_trace rescales to [0, 1] and flags flat traces") {
    SpectrumTrace t;
    t.delta_hz = {0.0, 1.0, 2.0};
    t.raw = {0.2, 0.8, 0.5};
    normalize_trace(t);
    CHECK_FALSE(t.degenerate);
    CHECK(t.normalized[0] == doctest::Approx(0.0));
    CHECK(t.normalized[1] == doctest::Approx(1.0));
    CHECK(t.normalized[2] == doctest::Approx(0.5).epsilon(1e-12));

    SpectrumTrace flat;
    flat.delta_hz = {0.0, 1.0};
    flat.raw = {0.7, 0.7};
    normalize_trace(flat);
    CHECK(flat.degenerate);
    CHECK(flat.normalized == flat.raw);
}

TEST_CASE("scan_spectrum validates its grid") {
    FieldParams fp;
    const PulseSequence seq = short_sequence();
    CHECK_THROWS_AS(scan_spectrum({0.0}, seq, fp, kC, Model::five), ConfigError);
    CHECK_THROWS_AS(scan_spectrum({0.0, 0.0}, seq, fp, kC, Model::five), ConfigError);
    CHECK_THROWS_AS(scan_spectrum({1.0, -1.0}, seq, fp, kC, Model::five), ConfigError);
}

TEST_CASE("scan_spectrum is deterministic across thread counts") {
    FieldParams fp;
    fp.omega_avg = 1.77e6;
    fp.Bz = 0.05;
    const PulseSequence seq = short_sequence();
    std::vector<double> grid;
    for (int i = 0; i <= 16; ++i) grid.push_back(-8000.0 + 1000.0 * i);

    const SpectrumTrace one = scan_spectrum(grid, seq, fp, kC, Model::five, 1);
    const SpectrumTrace four = scan_spectrum(grid, seq, fp, kC, Model::five, 4);
    CHECK(one.model == "five");
    REQUIRE(one.raw.size() == grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        CHECK(one.raw[i] == four.raw[i]);
        CHECK(one.normalized[i] >= 0.0);
        CHECK(one.normalized[i] <= 1.0);
    }
    CHECK_FALSE(one.degenerate);
}
