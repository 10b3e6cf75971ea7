#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace atomlaser {

using cplx = std::complex<double>;

/// Mean-field amplitudes <a>, <b>, <c_j> (units of sqrt(atoms)) at time t, lab frame.
struct SystemState {
    double t = 0;
    cplx amp_a{};
    cplx amp_b{};
    std::vector<cplx> amp_c;

    double continuum_population() const
    {
        double n = 0;
        for (const auto& c : amp_c) n += std::norm(c);
        return n;
    }

    double total_norm() const { return std::norm(amp_a) + std::norm(amp_b) + continuum_population(); }
};

struct TrajectorySample {
    double t = 0;
    double n_a = 0;
    double n_b = 0;
    double n_c = 0;
    double relative_phase = 0; // arg(conj(<a>) <b>)
    double h_c = 0;            // regime indicator, NaN when J = 0
    double p_tilde = 0;        // (N_A - N_B) / N
};

struct IntegrationStats {
    std::size_t accepted_steps = 0;
    std::size_t rejected_steps = 0;
    std::size_t rhs_evaluations = 0;
};

struct Trajectory {
    double sample_dt = 0;
    double atom_number = 0;
    std::vector<TrajectorySample> samples;
    SystemState final_state;
    double max_norm_drift = 0; // atoms, max over samples of |N_A + N_B + N_C - N|
    IntegrationStats stats;
};

} // namespace atomlaser
