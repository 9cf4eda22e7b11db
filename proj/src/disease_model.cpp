#include "flusim/disease_model.hpp"

#include <stdexcept>
#include <string>

namespace flusim {

namespace {

constexpr std::array<std::string_view, kHealthStateCount> kShortNames = {"S", "C", "E", "I", "Q",
                                                                         "NQ", "D", "R", "M"};

void require_probability(double p, const char* field)
{
    if (!(p >= 0.0 && p <= 1.0)) {
        throw std::invalid_argument(std::string(field) + " must lie in [0, 1], got " + std::to_string(p));
    }
}

} // namespace

std::string_view short_name(HealthState s) noexcept { return kShortNames[index_of(s)]; }

std::optional<HealthState> health_state_from_short_name(std::string_view name) noexcept
{
    for (auto s : kAllHealthStates) {
        if (kShortNames[index_of(s)] == name) {
            return s;
        }
    }
    return std::nullopt;
}

void DiseaseParams::validate() const
{
    require_probability(p_transmit, "p_transmit");
    require_probability(p_quarantine, "p_quarantine");
    require_probability(p_recover, "p_recover");
    require_probability(p_dead, "p_dead");
    require_probability(p_immunize, "p_immunize");
    if (latent_days < 0) {
        throw std::invalid_argument("latent_days must be >= 0");
    }
    if (t_recover_min < 1) {
        throw std::invalid_argument("t_recover_min must be >= 1");
    }
    if (t_recover_max < t_recover_min) {
        throw std::invalid_argument("t_recover_max must be >= t_recover_min");
    }
}

double DiseaseParams::daily_death_hazard() const noexcept
{
    const double mean_course = 0.5 * (t_recover_min + t_recover_max);
    return 1.0 - std::pow(1.0 - p_dead, 1.0 / mean_course);
}

StateSet allowed_transitions(HealthState from) noexcept
{
    using enum HealthState;
    switch (from) {
    case Susceptible:
        return {InContact};
    case InContact:
        return {Exposed, Susceptible};
    case Exposed:
        return {Infectious};
    case Infectious:
        return {Quarantined, NotQuarantined};
    case Quarantined:
        return {Recovered, Dead};
    case NotQuarantined:
        return {Quarantined, Dead};
    case Recovered:
        return {Immunized, Susceptible};
    case Dead:
    case Immunized:
        return {};
    }
    return {};
}

double infection_probability(double p_transmit, int contacts) noexcept
{
    if (contacts <= 0) {
        return 0.0;
    }
    return 1.0 - std::pow(1.0 - p_transmit, contacts);
}

} // namespace flusim
