#pragma once
// Density-matrix simulator for the pulsed-CPT interrogation sequence.
//
// Two level schemes are supported:
//   * five levels: the double-Lambda core (four ground sublevels, one
//     excited state) driven by the fixed-ratio Rabi set;
//   * eleven levels: the five-level core plus the remaining ground sublevels
//     and the second excited state.  The two blocks share no coherent
//     coupling; they talk only through spontaneous-emission population flow.
//
// Dynamics are generated by a Lindblad-style superoperator M acting on the
// column-stacked density matrix, rho(i,j) stored at index j*d + i, and
// propagated by the matrix exponential exp(M t) (scaling-and-squaring Pade).

#include <Eigen/Dense>
#include <array>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "spinfp/core.hpp"

namespace spinfp {

enum class Model { five, eleven };

inline int model_dim(Model m) { return m == Model::five ? 5 : 11; }

// Density matrix plus the physicality checks used by the conservation suite.
struct DensityMatrix {
    Eigen::MatrixXcd rho;

    // Uniform population over the ground sublevels of the scheme: 1/4 over
    // |1..4> (five) or 1/8 over the eight ground sublevels (eleven).
    static DensityMatrix uniform_ground(Model m);

    int dim() const { return static_cast<int>(rho.rows()); }
    double trace_real() const { return rho.trace().real(); }
    double hermiticity_defect() const;        // max |rho - rho^dagger|
    double trace_defect() const;              // |Tr rho - 1|
    double population_range_defect() const;   // how far any diagonal leaves [0, 1]
    bool is_physical(double herm_tol = 1e-10, double trace_tol = 1e-9,
                     double pop_tol = 1e-9) const;
};

// The superoperator M with d^2 x d^2 entries; dim is the level count d.
struct Liouvillian {
    Eigen::MatrixXcd M;
    int dim;
};

// Build the generator at two-photon detuning delta (rad/s).  light_on=false
// produces exactly the light_on generator with all Rabi couplings zero.
Liouvillian build_liouvillian_5(double delta, const FieldParams& fp, const Constants& c,
                                bool light_on);
Liouvillian build_liouvillian_11(double delta, const FieldParams& fp, const Constants& c,
                                 bool light_on);
Liouvillian build_liouvillian(Model m, double delta, const FieldParams& fp,
                              const Constants& c, bool light_on);

// Spontaneous-emission branching of the eleven-level scheme as integer
// twelfths of Gamma: {ground index, excited index, numerator}.  Each excited
// state's outgoing numerators sum to exactly twelve.
const std::vector<std::array<int, 3>>& eleven_branching_twelfths();

// exp(M t); throws NumericError if the exponential fails to produce finite
// entries.
Eigen::MatrixXcd propagator(const Liouvillian& L, double t);

// Evolve a density matrix for time t under L.
DensityMatrix propagate_segment(const DensityMatrix& rho, const Liouvillian& L, double t);

// Per-detuning store of the light-on/light-off propagators of repeated
// segments, so identical middle pulses reuse bitwise-identical matrices.
class PropagatorCache {
  public:
    struct Entry {
        Eigen::MatrixXcd U_on;   // exp(M_on * tau)
        Eigen::MatrixXcd U_off;  // exp(M_off * (period - tau))
    };

    const Entry& get(const Liouvillian& on, const Liouvillian& off,
                     const PulseSegment& seg);
    std::size_t size() const { return entries_.size(); }

  private:
    std::map<std::pair<double, double>, Entry> entries_;
};

// Run one full sequence at detuning delta (rad/s) and return the transmission
// proxy 1 - <absorption>, where the absorption is the excited-state
// population averaged over the detection samples (rho55 for the five-level
// scheme, rho55 + both upper populations of the second block for eleven).
double run_sequence(double delta, const PulseSequence& seq, const FieldParams& fp,
                    const Constants& c, Model model);

// A computed spectrum: scan grid in Hz, raw transmission values, and their
// min-max normalization.  A flat raw trace cannot be normalized; it is
// flagged degenerate and copied through unchanged.
struct SpectrumTrace {
    std::vector<double> delta_hz;
    std::vector<double> raw;
    std::vector<double> normalized;
    bool degenerate = false;
    std::string model;

    const std::vector<double>& values() const { return normalized; }
};

// Fill trace.normalized from trace.raw (min-max), flagging degenerate traces.
void normalize_trace(SpectrumTrace& trace);

// Evaluate run_sequence over a strictly increasing grid of detunings (Hz).
// The scan fans out over n_threads workers (0 = hardware concurrency); output
// ordering and values are independent of the thread count.
SpectrumTrace scan_spectrum(const std::vector<double>& delta_hz, const PulseSequence& seq,
                            const FieldParams& fp, const Constants& c, Model model,
                            int n_threads = 1);

}  // namespace spinfp
