#pragma once

// Daily simulation loop over a synthesized population.

#include "flusim/control_strategy.hpp"
#include "flusim/disease_model.hpp"
#include "flusim/population.hpp"
#include "flusim/random.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace flusim {

enum class PopulationMode { Closed, Open };

struct EngineConfig {
    /// Share of contact slots filled from the agent's own networks.
    double p_network = 0.6;
    /// Largest daily displacement before the activity multiplier.
    double max_step = 20.0;
    std::array<double, 3> step_multiplier = {0.5, 1.0, 1.5}; // Low, Moderate, High
    /// Public contacts are picked among agents within this distance.
    double public_radius = 50.0;

    void validate() const;
    bool operator==(const EngineConfig&) const = default;
};

struct InfectionEdge {
    AgentId infector;
    AgentId infectee;
    int day;
    bool operator==(const InfectionEdge&) const = default;
};

struct DailyCensus {
    int day = 0;
    std::array<std::size_t, kHealthStateCount> counts{};
    std::size_t new_infections = 0;
    std::size_t cumulative_infected = 0;

    std::size_t count(HealthState s) const noexcept { return counts[index_of(s)]; }
    std::size_t total() const noexcept;
    /// C + E + I + Q + NQ.
    std::size_t infected() const noexcept;
    /// D + R + M.
    std::size_t removed() const noexcept;
    bool operator==(const DailyCensus&) const = default;
};

struct ContactSlot {
    AgentId id;
    bool from_network;
};

struct Exposure {
    int count = 0;
    /// Distinct transmitting agents met today.
    std::vector<AgentId> sources;
};

struct World {
    int day = 0;
    std::vector<Agent> agents;
    DiseaseParams params;
    EngineConfig engine;
    PopulationConfig population;
    PopulationMode mode = PopulationMode::Closed;
    /// Agent cap for Open mode; equals agents.size() in Closed mode.
    std::size_t capacity = 0;
    std::uint64_t seed = 0;
    std::vector<ControlStrategy> strategies;
    std::vector<InfectionEdge> infection_edges;
    std::size_t cumulative_infected = 0;

    // Per-day values; reset each step and adjusted by active controls.
    DiseaseParams effective_params;
    double contact_scale = 1.0;

    std::size_t size() const noexcept { return agents.size(); }
};

/// Validates inputs and wires up a world on day 0. Throws std::invalid_argument.
World make_world(std::vector<Agent> agents, const DiseaseParams& params, const EngineConfig& engine,
                 const PopulationConfig& population, std::uint64_t seed,
                 PopulationMode mode = PopulationMode::Closed, std::size_t capacity = 0,
                 std::vector<ControlStrategy> strategies = {});

/// Turns `count` distinct susceptible agents Infectious (day 0 seeds).
void seed_infections(World& world, std::size_t count);

bool is_mobile(const Agent& agent) noexcept;

void move_agents(World& world);

/// Uniform-grid index of mobile agents used for public contact picks.
class NeighborIndex {
public:
    NeighborIndex(const World& world);
    /// Mobile agents other than `self` within `radius` of `at`.
    void query(Position at, double radius, AgentId self, std::vector<AgentId>& out) const;
    std::span<const AgentId> all() const noexcept { return all_; }

private:
    std::size_t cell_of(double coord) const noexcept;
    double cell_size_;
    std::size_t cells_per_side_;
    std::vector<std::vector<AgentId>> cells_;
    std::vector<AgentId> all_;
    const World& world_;
};

/// Contact slots for one agent today; may append new agents in Open mode.
std::vector<ContactSlot> select_contacts(AgentId id, World& world, const NeighborIndex& index);
int contact_slots(const Agent& agent, const World& world) noexcept;

/// Per-agent exposure for today, indexed by agent id. Only Susceptible and
/// InContact agents receive counts; each transmitting agent met through a
/// contact (either direction) or shared network counts once.
std::vector<Exposure> propagate_infection(const World& world, std::span<const std::vector<ContactSlot>> contacts);

DailyCensus take_census(const World& world, std::size_t new_infections);

DailyCensus step_day(World& world);

/// Throws std::invalid_argument for days < 1.
std::vector<DailyCensus> run(World& world, int days);

/// Mean out-degree of the completed agents in the infection graph; nullopt when none completed.
std::optional<double> estimate_R(std::span<const InfectionEdge> edges, std::span<const AgentId> completed);

/// Agents that were infected and are no longer in E, I, Q or NQ.
std::vector<AgentId> completed_cases(const World& world);

using SocialTypeBreakdown = std::array<std::array<std::size_t, kHealthStateCount>, kSocialTypeCount>;
SocialTypeBreakdown social_type_breakdown(const World& world);

} // namespace flusim
