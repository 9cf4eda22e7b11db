#pragma once

// Normalized Kermack-McKendrick SIR model:
//   s' = -beta s i,  i' = beta s i - gamma i,  r' = gamma i
// with a fixed-step RK4 integrator and the closed-form reference values
// used to check both the integrator and the agent model.

#include "flusim/engine.hpp"

#include <iosfwd>
#include <span>
#include <vector>

namespace flusim {

struct SirParams {
    double beta = 3.0 / 9.5;
    double gamma = 1.0 / 9.5;
    double i0 = 1e-4;
    double m0 = 0.0;

    double r0() const noexcept { return beta / gamma; }
    static SirParams from_r0(double r0, double infection_duration, double i0, double m0 = 0.0);
    /// Throws std::invalid_argument.
    void validate() const;
};

struct SirSample {
    double t;
    double s;
    double i;
    double r;
};

struct SirTrajectory {
    double dt = 0.0;
    std::vector<SirSample> samples;

    /// Sample closest to time t (clamped to the ends).
    const SirSample& at(double t) const;
};

/// Throws std::invalid_argument on bad arguments and std::domain_error when
/// the state stops being finite (dt too large).
SirTrajectory integrate(const SirParams& params, double t_end, double dt);

struct SirPeak {
    double t = 0.0;
    double i = 0.0;
};

/// Maximal i; ties go to the earliest sample.
SirPeak peak_infected(const SirTrajectory& traj);

/// Nonzero root of r = 1 - exp(-r0 r) for r0 > 1, else 0.
double final_size(double r0);

/// i_max = i0 + s0 - (1 + ln(r0 s0)) / r0 when r0 s0 > 1, else i0.
double analytic_peak(double r0, double s0, double i0);

/// Largest drop below the running peak on both sides. Unimodal curves have none.
double max_dip(std::span<const double> curve);
bool is_unimodal(std::span<const double> curve, double tolerance);

struct AlignmentReport {
    // Fractions per census day; the ODE is read at t = day + 1, the end of that day.
    std::vector<double> abm_s, abm_i, abm_r;
    std::vector<double> ode_s, ode_i, ode_r;
    int abm_peak_day = 0;
    double abm_peak = 0.0;
    int ode_peak_day = 0;
    double ode_peak = 0.0;
    int peak_day_difference = 0;     // abm - ode
    double peak_height_difference = 0.0; // abm - ode
    double rmse = 0.0;               // between the infected curves
    bool unimodal = true;            // of the ABM infected curve
};

/// ABM classes fold into SIR as S; C+E+I+Q+NQ; D+R+M. Series are truncated to the shorter one.
AlignmentReport align_abm(std::span<const DailyCensus> census, const SirTrajectory& traj,
                          double unimodal_tolerance = 0.05);

// Columns: t,s,i,r
void write_trajectory_csv(std::ostream& out, const SirTrajectory& traj);

} // namespace flusim
