#include "flusim/control.hpp"

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace flusim {

namespace {

constexpr std::array<std::string_view, 4> kKindNames = {"awareness", "vaccination", "social_distancing",
                                                        "quarantining"};

} // namespace

std::string_view control_kind_name(ControlKind kind) noexcept { return kKindNames[static_cast<std::size_t>(kind)]; }

std::optional<ControlKind> control_kind_from_name(std::string_view name) noexcept
{
    for (std::size_t i = 0; i < kKindNames.size(); ++i) {
        if (kKindNames[i] == name) {
            return static_cast<ControlKind>(i);
        }
    }
    return std::nullopt;
}

void validate_strategies(std::span<const ControlStrategy> strategies)
{
    for (std::size_t i = 0; i < strategies.size(); ++i) {
        const auto& s = strategies[i];
        const std::string at = "strategies[" + std::to_string(i) + "]";
        if (!(s.coverage >= 0.0 && s.coverage <= 1.0)) {
            throw std::invalid_argument(at + ".coverage must lie in [0, 1]");
        }
        if (s.start_day < 0) {
            throw std::invalid_argument(at + ".start_day must be >= 0");
        }
        if (s.end_day < s.start_day) {
            throw std::invalid_argument(at + ".end_day must be >= start_day");
        }
        for (std::size_t j = 0; j < i; ++j) {
            const auto& o = strategies[j];
            if (o.kind == s.kind && o.start_day <= s.end_day && s.start_day <= o.end_day) {
                throw std::invalid_argument(at + " overlaps strategies[" + std::to_string(j) + "] of the same kind");
            }
        }
    }
}

int scaled_contacts(int base, double scale) noexcept
{
    const int n = static_cast<int>(std::floor(base * scale + 1e-9));
    return n < 0 ? 0 : n;
}

void apply_controls(World& world, std::span<const ControlStrategy> strategies)
{
    world.effective_params = world.params;
    world.contact_scale = 1.0;

    for (const auto& s : strategies) {
        if (!s.active_on(world.day) || s.coverage <= 0.0) {
            continue;
        }
        switch (s.kind) {
        case ControlKind::Awareness: {
            const double p = world.effective_params.p_quarantine;
            world.effective_params.p_quarantine = p + s.coverage * (1.0 - p);
            break;
        }
        case ControlKind::SocialDistancing:
            world.contact_scale *= 1.0 - s.coverage;
            break;
        case ControlKind::Vaccination:
        case ControlKind::Quarantining:
            break;
        }
    }

    // State moves come after the contact scaling so distancing is in place
    // before quarantining removes agents from circulation.
    for (const auto& s : strategies) {
        if (!s.active_on(world.day) || s.coverage <= 0.0) {
            continue;
        }
        if (s.kind != ControlKind::Vaccination && s.kind != ControlKind::Quarantining) {
            continue;
        }
        const double p = s.kind == ControlKind::Vaccination ? s.coverage / s.window_length() : s.coverage;
        for (auto& a : world.agents) {
            const bool target = s.kind == ControlKind::Vaccination
                                    ? (a.state == HealthState::Susceptible || a.state == HealthState::InContact)
                                    : (a.state == HealthState::Infectious || a.state == HealthState::NotQuarantined);
            if (!target) {
                continue;
            }
            RandomStream draws(stream_key(world.seed, static_cast<std::uint64_t>(world.day), Phase::Control, a.id));
            if (!draws.bernoulli(p)) {
                continue;
            }
            a.clock.days_in_state = 0;
            if (s.kind == ControlKind::Vaccination) {
                a.state = HealthState::Immunized;
                a.clock.exposure_contacts = 0;
                a.exposure_sources.clear();
            } else {
                a.state = HealthState::Quarantined;
            }
        }
    }
}

} // namespace flusim
