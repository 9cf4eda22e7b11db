#pragma once

// Synthetic population: census age bands, social types, activity levels,
// positions on a square landscape, and home/work/school networks.

#include "flusim/disease_model.hpp"
#include "flusim/random.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace flusim {

using AgentId = std::uint32_t;

enum class SocialType : std::uint8_t {
    Spouse,
    Parent,
    Sibling,
    Child,
    OtherFamily,
    Coworker,
    GroupMember,
    Neighbor,
    Friend,
    Advisor,
    Schoolmate,
    Other,
};

inline constexpr std::size_t kSocialTypeCount = 12;

std::string_view social_type_name(SocialType t) noexcept;
std::optional<SocialType> social_type_from_name(std::string_view name) noexcept;

enum class AgeBand : std::uint8_t { Under5, From5To14, From15To44, From45To59, Over59 };

inline constexpr std::size_t kAgeBandCount = 5;

struct AgeBandInfo {
    AgeBand band;
    std::string_view label;
    double census_share; // as published, the five shares sum to 0.9999
    std::span<const SocialType> permitted_types;
};

/// Census table rows, youngest first.
std::span<const AgeBandInfo> age_bands() noexcept;
const AgeBandInfo& age_band_info(AgeBand band) noexcept;
std::optional<AgeBand> age_band_from_label(std::string_view label) noexcept;

/// Shares rescaled so they sum to 1.
const std::array<double, kAgeBandCount>& normalized_age_shares() noexcept;

bool is_permitted(AgeBand band, SocialType type) noexcept;

enum class ActivityLevel : std::uint8_t { Low, Moderate, High };

constexpr int contacts_per_day(ActivityLevel level) noexcept
{
    switch (level) {
    case ActivityLevel::Low:
        return 2;
    case ActivityLevel::Moderate:
        return 3;
    case ActivityLevel::High:
        return 4;
    }
    return 0;
}

std::string_view activity_name(ActivityLevel level) noexcept;
std::optional<ActivityLevel> activity_from_name(std::string_view name) noexcept;

struct Position {
    double x = 0.0;
    double y = 0.0;
    bool operator==(const Position&) const = default;
};

inline constexpr std::int32_t kNoGroup = -1;

struct Agent {
    AgentId id = 0;
    HealthState state = HealthState::Susceptible;
    DiseaseClock clock;
    ActivityLevel activity = ActivityLevel::Moderate;
    Position position;
    SocialType social_type = SocialType::Other;
    AgeBand age_band = AgeBand::From15To44;
    std::int32_t home_group = kNoGroup;
    std::int32_t work_group = kNoGroup;
    std::int32_t school_group = kNoGroup;
    // Other members of each group; never contains id itself.
    std::vector<AgentId> home;
    std::vector<AgentId> work;
    std::vector<AgentId> school;
    std::optional<int> infection_time;
    std::optional<AgentId> infector;
    /// Transmitting agents met on the day the agent last became or stayed InContact.
    std::vector<AgentId> exposure_sources;

    bool has_networks() const noexcept { return !home.empty() || !work.empty() || !school.empty(); }
    std::size_t network_size() const noexcept { return home.size() + work.size() + school.size(); }
    /// i-th member of the concatenated home, work, school lists.
    AgentId network_member(std::size_t i) const noexcept;

    bool operator==(const Agent&) const = default;
};

struct GroupSizeRange {
    int min = 2;
    int max = 6;
    bool operator==(const GroupSizeRange&) const = default;
};

struct PopulationConfig {
    double landscape_side = 1000.0;
    std::array<double, 3> activity_shares = {0.3, 0.5, 0.2}; // Low, Moderate, High
    GroupSizeRange home_size = {2, 6};
    GroupSizeRange work_size = {3, 8};
    GroupSizeRange school_size = {5, 15};

    /// Throws std::invalid_argument.
    void validate() const;
    bool operator==(const PopulationConfig&) const = default;
};

template <UniformSource Draws>
AgeBand sample_age_band(Draws& draws)
{
    const auto& shares = normalized_age_shares();
    const double u = draws.uniform();
    double cumulative = 0.0;
    for (std::size_t i = 0; i + 1 < kAgeBandCount; ++i) {
        cumulative += shares[i];
        if (u < cumulative) {
            return static_cast<AgeBand>(i);
        }
    }
    return AgeBand::Over59;
}

/// Uniform over the band's permitted social types.
template <UniformSource Draws>
SocialType sample_social_type(AgeBand band, Draws& draws)
{
    const auto types = age_band_info(band).permitted_types;
    auto i = static_cast<std::size_t>(draws.uniform() * static_cast<double>(types.size()));
    if (i >= types.size()) {
        i = types.size() - 1;
    }
    return types[i];
}

template <UniformSource Draws>
ActivityLevel sample_activity(const std::array<double, 3>& shares, Draws& draws)
{
    const double u = draws.uniform() * (shares[0] + shares[1] + shares[2]);
    if (u < shares[0]) {
        return ActivityLevel::Low;
    }
    if (u < shares[0] + shares[1]) {
        return ActivityLevel::Moderate;
    }
    return ActivityLevel::High;
}

/// A fresh susceptible agent with sampled attributes and no networks.
Agent make_agent(AgentId id, const PopulationConfig& config, RandomStream& draws);

/// Pure function of (n, config, seed). Throws std::invalid_argument for n == 0.
std::vector<Agent> synthesize_population(std::size_t n, const PopulationConfig& config, std::uint64_t seed);

/// Partitions everyone into homes, working-age agents into work groups and
/// school-age agents (plus young-adult schoolmates) into school groups.
/// Groups are fully connected; existing networks are replaced.
void build_networks(std::span<Agent> agents, const PopulationConfig& config, RandomStream& draws);

/// Rebuilds home/work/school member lists from the group ids.
void rebuild_networks_from_groups(std::span<Agent> agents);

bool eligible_for_work(const Agent& agent) noexcept;
bool eligible_for_school(const Agent& agent) noexcept;

// Columns: id,age_band,social_type,activity,x,y,home_group,work_group,school_group
void write_population_csv(std::ostream& out, std::span<const Agent> agents);
/// Throws std::runtime_error on malformed rows.
std::vector<Agent> read_population_csv(std::istream& in);

} // namespace flusim
