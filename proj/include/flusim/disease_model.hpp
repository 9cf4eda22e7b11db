#pragma once

// Nine-state extended SIR progression and the per-agent daily transition.

#include "flusim/random.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <span>
#include <string_view>

namespace flusim {

enum class HealthState : std::uint8_t {
    Susceptible,
    InContact,
    Exposed,
    Infectious,
    Quarantined,
    NotQuarantined,
    Dead,
    Recovered,
    Immunized,
};

inline constexpr std::size_t kHealthStateCount = 9;

inline constexpr std::array<HealthState, kHealthStateCount> kAllHealthStates = {
    HealthState::Susceptible,    HealthState::InContact, HealthState::Exposed,
    HealthState::Infectious,     HealthState::Quarantined, HealthState::NotQuarantined,
    HealthState::Dead,           HealthState::Recovered, HealthState::Immunized,
};

/// Short column label: S, C, E, I, Q, NQ, D, R, M.
std::string_view short_name(HealthState s) noexcept;
std::optional<HealthState> health_state_from_short_name(std::string_view name) noexcept;

constexpr std::size_t index_of(HealthState s) noexcept { return static_cast<std::size_t>(s); }

constexpr bool is_absorbing(HealthState s) noexcept
{
    return s == HealthState::Dead || s == HealthState::Immunized;
}

/// States that pass the infection on to contacts. Quarantined agents are isolated.
constexpr bool is_transmitting(HealthState s) noexcept
{
    return s == HealthState::Infectious || s == HealthState::NotQuarantined;
}

/// States counted in the aggregate "infected" curve (C, E, I, Q, NQ).
constexpr bool is_infected_aggregate(HealthState s) noexcept
{
    return s == HealthState::InContact || s == HealthState::Exposed || s == HealthState::Infectious ||
           s == HealthState::Quarantined || s == HealthState::NotQuarantined;
}

/// Small fixed-capacity set of states, used for the transition graph.
class StateSet {
public:
    constexpr StateSet() = default;
    constexpr StateSet(std::initializer_list<HealthState> states)
    {
        for (auto s : states) {
            insert(s);
        }
    }
    constexpr void insert(HealthState s) noexcept { bits_ |= static_cast<std::uint16_t>(1u << index_of(s)); }
    constexpr bool contains(HealthState s) const noexcept { return (bits_ >> index_of(s)) & 1u; }
    constexpr bool empty() const noexcept { return bits_ == 0; }
    constexpr std::size_t size() const noexcept { return static_cast<std::size_t>(std::popcount(bits_)); }
    constexpr bool operator==(const StateSet&) const = default;

private:
    std::uint16_t bits_ = 0;
};

struct DiseaseParams {
    int latent_days = 2;
    double p_transmit = 0.05;
    double p_quarantine = 0.1;
    double p_recover = 0.9;
    double p_dead = 0.14;
    double p_immunize = 0.95;
    int t_recover_min = 5;
    int t_recover_max = 14;

    /// Throws std::invalid_argument naming the offending field.
    void validate() const;

    /// Daily death hazard for not-quarantined agents; compounds to p_dead over the mean course length.
    double daily_death_hazard() const noexcept;

    bool operator==(const DiseaseParams&) const = default;
};

struct DiseaseClock {
    int days_in_state = 0;
    /// Infectious course length, drawn on entering Infectious.
    int course_length = 0;
    /// Days since entering Infectious; carried through Quarantined / NotQuarantined.
    int course_day = 0;
    /// Infectious contacts recorded on the day the agent became (or stayed) InContact.
    int exposure_contacts = 0;

    bool operator==(const DiseaseClock&) const = default;
};

struct Transition {
    HealthState state;
    DiseaseClock clock;
};

StateSet allowed_transitions(HealthState from) noexcept;

/// 1 - (1 - p)^k: probability that at least one of k independent contacts transmits.
double infection_probability(double p_transmit, int contacts) noexcept;

template <UniformSource Draws>
int draw_course_length(const DiseaseParams& params, Draws& draws)
{
    const int span = params.t_recover_max - params.t_recover_min + 1;
    auto offset = static_cast<int>(std::floor(draws.uniform() * span));
    if (offset >= span) {
        offset = span - 1;
    }
    return params.t_recover_min + offset;
}

/// Advances one agent by one day.
///
/// The clock is aged first, then the rules below run against the aged clock;
/// entering a new state resets days_in_state to 0.
///   S  -> C when infectious_contacts > 0 (contact count stored on the clock)
///   C  -> E with 1 - (1 - p_transmit)^stored, else stays C if contacted again today, else S
///   E  -> I once days_in_state reaches latent_days (course length drawn here)
///   I  -> Q with p_quarantine, else NQ
///   Q  -> R with p_recover, else D, when the course ends
///   NQ -> Q with p_quarantine, else D with the daily hazard, else Q at course end
///   R  -> M with p_immunize, else S
/// Dead and Immunized are returned unchanged.
template <UniformSource Draws>
Transition step_state(HealthState state, DiseaseClock clock, int infectious_contacts,
                      const DiseaseParams& params, Draws& draws)
{
    if (is_absorbing(state)) {
        return {state, clock};
    }
    ++clock.days_in_state;
    if (state == HealthState::Infectious || state == HealthState::Quarantined ||
        state == HealthState::NotQuarantined) {
        ++clock.course_day;
    }

    auto enter = [&clock](HealthState next) {
        clock.days_in_state = 0;
        return Transition{next, clock};
    };

    switch (state) {
    case HealthState::Susceptible:
        if (infectious_contacts > 0) {
            clock = DiseaseClock{};
            clock.exposure_contacts = infectious_contacts;
            return enter(HealthState::InContact);
        }
        return {state, clock};
    case HealthState::InContact: {
        const double p = infection_probability(params.p_transmit, clock.exposure_contacts);
        if (draws.uniform() < p) {
            clock.exposure_contacts = 0;
            return enter(HealthState::Exposed);
        }
        if (infectious_contacts > 0) {
            clock.exposure_contacts = infectious_contacts;
            return {state, clock};
        }
        clock.exposure_contacts = 0;
        return enter(HealthState::Susceptible);
    }
    case HealthState::Exposed:
        if (clock.days_in_state >= params.latent_days) {
            clock.course_length = draw_course_length(params, draws);
            clock.course_day = 0;
            return enter(HealthState::Infectious);
        }
        return {state, clock};
    case HealthState::Infectious:
        return enter(draws.uniform() < params.p_quarantine ? HealthState::Quarantined
                                                           : HealthState::NotQuarantined);
    case HealthState::Quarantined:
        if (clock.course_day >= clock.course_length) {
            return enter(draws.uniform() < params.p_recover ? HealthState::Recovered : HealthState::Dead);
        }
        return {state, clock};
    case HealthState::NotQuarantined:
        if (draws.uniform() < params.p_quarantine) {
            return enter(HealthState::Quarantined);
        }
        if (draws.uniform() < params.daily_death_hazard()) {
            return enter(HealthState::Dead);
        }
        if (clock.course_day >= clock.course_length) {
            return enter(HealthState::Quarantined);
        }
        return {state, clock};
    case HealthState::Recovered:
        return enter(draws.uniform() < params.p_immunize ? HealthState::Immunized : HealthState::Susceptible);
    case HealthState::Dead:
    case HealthState::Immunized:
        break;
    }
    return {state, clock};
}

} // namespace flusim
