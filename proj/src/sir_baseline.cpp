#include "flusim/sir_baseline.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>

namespace flusim {

namespace {

struct Rates {
    double s, i, r;
};

Rates derivative(const SirParams& p, double s, double i)
{
    const double infection = p.beta * s * i;
    const double recovery = p.gamma * i;
    return {-infection, infection - recovery, recovery};
}

std::size_t argmax_first(std::span<const double> v)
{
    std::size_t best = 0;
    for (std::size_t k = 1; k < v.size(); ++k) {
        if (v[k] > v[best]) {
            best = k;
        }
    }
    return best;
}

} // namespace

SirParams SirParams::from_r0(double r0, double infection_duration, double i0, double m0)
{
    if (!(infection_duration > 0.0)) {
        throw std::invalid_argument("infection duration must be positive");
    }
    SirParams p;
    p.gamma = 1.0 / infection_duration;
    p.beta = r0 * p.gamma;
    p.i0 = i0;
    p.m0 = m0;
    return p;
}

void SirParams::validate() const
{
    if (!(beta > 0.0) || !(gamma > 0.0)) {
        throw std::invalid_argument("beta and gamma must be positive");
    }
    if (!(i0 >= 0.0 && i0 <= 1.0)) {
        throw std::invalid_argument("i0 must lie in [0, 1]");
    }
    if (!(m0 >= 0.0 && m0 < 1.0)) {
        throw std::invalid_argument("m0 must lie in [0, 1)");
    }
    if (i0 + m0 > 1.0) {
        throw std::invalid_argument("i0 + m0 must not exceed 1");
    }
}

const SirSample& SirTrajectory::at(double t) const
{
    if (samples.empty()) {
        throw std::out_of_range("empty trajectory");
    }
    const double k = std::round((t - samples.front().t) / dt);
    const auto idx = static_cast<std::size_t>(std::clamp(k, 0.0, static_cast<double>(samples.size() - 1)));
    return samples[idx];
}

SirTrajectory integrate(const SirParams& params, double t_end, double dt)
{
    params.validate();
    if (!(dt > 0.0) || !(t_end >= dt)) {
        throw std::invalid_argument("need dt > 0 and t_end >= dt");
    }
    const auto steps = static_cast<std::size_t>(std::llround(t_end / dt));
    SirTrajectory traj;
    traj.dt = dt;
    traj.samples.reserve(steps + 1);

    double s = 1.0 - params.i0 - params.m0;
    double i = params.i0;
    double r = params.m0;
    traj.samples.push_back({0.0, s, i, r});
    for (std::size_t n = 1; n <= steps; ++n) {
        const Rates k1 = derivative(params, s, i);
        const Rates k2 = derivative(params, s + 0.5 * dt * k1.s, i + 0.5 * dt * k1.i);
        const Rates k3 = derivative(params, s + 0.5 * dt * k2.s, i + 0.5 * dt * k2.i);
        const Rates k4 = derivative(params, s + dt * k3.s, i + dt * k3.i);
        s += dt / 6.0 * (k1.s + 2.0 * k2.s + 2.0 * k3.s + k4.s);
        i += dt / 6.0 * (k1.i + 2.0 * k2.i + 2.0 * k3.i + k4.i);
        r += dt / 6.0 * (k1.r + 2.0 * k2.r + 2.0 * k3.r + k4.r);
        if (!std::isfinite(s) || !std::isfinite(i) || !std::isfinite(r)) {
            throw std::domain_error("SIR integration diverged at step " + std::to_string(n) + "; reduce dt");
        }
        traj.samples.push_back({static_cast<double>(n) * dt, s, i, r});
    }
    return traj;
}

SirPeak peak_infected(const SirTrajectory& traj)
{
    SirPeak best;
    bool first = true;
    for (const auto& x : traj.samples) {
        if (first || x.i > best.i) {
            best = {x.t, x.i};
            first = false;
        }
    }
    return best;
}

double final_size(double r0)
{
    if (!(r0 > 1.0)) {
        return 0.0;
    }
    constexpr double damping = 0.5;
    double r = 1.0;
    for (int it = 0; it < 100'000'000; ++it) {
        const double next = (1.0 - damping) * r + damping * (1.0 - std::exp(-r0 * r));
        if (std::abs(next - r) < 1e-10 * damping) {
            return next;
        }
        r = next;
    }
    return r;
}

double analytic_peak(double r0, double s0, double i0)
{
    if (!(r0 * s0 > 1.0)) {
        return i0;
    }
    return i0 + s0 - (1.0 + std::log(r0 * s0)) / r0;
}

double max_dip(std::span<const double> curve)
{
    const std::size_t n = curve.size();
    if (n < 3) {
        return 0.0;
    }
    std::vector<double> right(n);
    right[n - 1] = curve[n - 1];
    for (std::size_t k = n - 1; k-- > 0;) {
        right[k] = std::max(right[k + 1], curve[k]);
    }
    double left = curve[0];
    double dip = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        left = std::max(left, curve[k]);
        dip = std::max(dip, std::min(left, right[k]) - curve[k]);
    }
    return dip;
}

bool is_unimodal(std::span<const double> curve, double tolerance) { return max_dip(curve) <= tolerance; }

AlignmentReport align_abm(std::span<const DailyCensus> census, const SirTrajectory& traj, double unimodal_tolerance)
{
    AlignmentReport rep;
    std::size_t days = census.size();
    if (!traj.samples.empty()) {
        const double horizon = traj.samples.back().t;
        days = std::min(days, static_cast<std::size_t>(std::max(0.0, std::floor(horizon + 1e-9))));
    } else {
        days = 0;
    }
    for (std::size_t d = 0; d < days; ++d) {
        const auto& c = census[d];
        const double n = c.total() > 0 ? static_cast<double>(c.total()) : 1.0;
        rep.abm_s.push_back(static_cast<double>(c.count(HealthState::Susceptible)) / n);
        rep.abm_i.push_back(static_cast<double>(c.infected()) / n);
        rep.abm_r.push_back(static_cast<double>(c.removed()) / n);
        const auto& x = traj.at(static_cast<double>(d) + 1.0);
        rep.ode_s.push_back(x.s);
        rep.ode_i.push_back(x.i);
        rep.ode_r.push_back(x.r);
    }
    if (days == 0) {
        return rep;
    }
    const auto abm_peak = argmax_first(rep.abm_i);
    const auto ode_peak = argmax_first(rep.ode_i);
    rep.abm_peak_day = static_cast<int>(abm_peak);
    rep.abm_peak = rep.abm_i[abm_peak];
    rep.ode_peak_day = static_cast<int>(ode_peak);
    rep.ode_peak = rep.ode_i[ode_peak];
    rep.peak_day_difference = rep.abm_peak_day - rep.ode_peak_day;
    rep.peak_height_difference = rep.abm_peak - rep.ode_peak;
    double sq = 0.0;
    for (std::size_t d = 0; d < days; ++d) {
        const double e = rep.abm_i[d] - rep.ode_i[d];
        sq += e * e;
    }
    rep.rmse = std::sqrt(sq / static_cast<double>(days));
    rep.unimodal = is_unimodal(rep.abm_i, unimodal_tolerance);
    return rep;
}

void write_trajectory_csv(std::ostream& out, const SirTrajectory& traj)
{
    out << "t,s,i,r\n";
    const auto old = out.precision(12);
    for (const auto& x : traj.samples) {
        out << x.t << ',' << x.s << ',' << x.i << ',' << x.r << '\n';
    }
    out.precision(old);
}

} // namespace flusim
