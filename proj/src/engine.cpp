#include "flusim/engine.hpp"

#include "flusim/control.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace flusim {

namespace {

RandomStream stream_for(const World& world, Phase phase, AgentId id)
{
    return RandomStream(stream_key(world.seed, static_cast<std::uint64_t>(world.day), phase, id));
}

double reflect(double v, double side)
{
    // A step longer than the landscape folds back repeatedly.
    for (int i = 0; i < 64 && (v < 0.0 || v > side); ++i) {
        v = v < 0.0 ? -v : 2.0 * side - v;
    }
    return std::clamp(v, 0.0, side);
}

std::size_t activity_index(ActivityLevel a) { return static_cast<std::size_t>(a); }

} // namespace

void EngineConfig::validate() const
{
    if (!(p_network >= 0.0 && p_network <= 1.0)) {
        throw std::invalid_argument("p_network must lie in [0, 1]");
    }
    if (!(max_step >= 0.0)) {
        throw std::invalid_argument("max_step must be >= 0");
    }
    for (double m : step_multiplier) {
        if (!(m >= 0.0)) {
            throw std::invalid_argument("step_multiplier entries must be >= 0");
        }
    }
    if (!(public_radius > 0.0)) {
        throw std::invalid_argument("public_radius must be positive");
    }
}

std::size_t DailyCensus::total() const noexcept
{
    std::size_t n = 0;
    for (auto c : counts) {
        n += c;
    }
    return n;
}

std::size_t DailyCensus::infected() const noexcept
{
    return count(HealthState::InContact) + count(HealthState::Exposed) + count(HealthState::Infectious) +
           count(HealthState::Quarantined) + count(HealthState::NotQuarantined);
}

std::size_t DailyCensus::removed() const noexcept
{
    return count(HealthState::Dead) + count(HealthState::Recovered) + count(HealthState::Immunized);
}

World make_world(std::vector<Agent> agents, const DiseaseParams& params, const EngineConfig& engine,
                 const PopulationConfig& population, std::uint64_t seed, PopulationMode mode, std::size_t capacity,
                 std::vector<ControlStrategy> strategies)
{
    params.validate();
    engine.validate();
    population.validate();
    validate_strategies(strategies);
    for (std::size_t i = 0; i < agents.size(); ++i) {
        if (agents[i].id != i) {
            throw std::invalid_argument("agent ids must equal their index");
        }
    }
    World w;
    w.agents = std::move(agents);
    w.params = params;
    w.effective_params = params;
    w.engine = engine;
    w.population = population;
    w.mode = mode;
    w.seed = seed;
    w.strategies = std::move(strategies);
    if (mode == PopulationMode::Closed) {
        w.capacity = w.agents.size();
    } else {
        w.capacity = std::max(capacity, w.agents.size());
        w.agents.reserve(w.capacity);
    }
    for (const auto& a : w.agents) {
        if (a.infection_time) {
            ++w.cumulative_infected;
        }
    }
    return w;
}

void seed_infections(World& world, std::size_t count)
{
    std::vector<AgentId> candidates;
    for (const auto& a : world.agents) {
        if (a.state == HealthState::Susceptible) {
            candidates.push_back(a.id);
        }
    }
    if (count > candidates.size()) {
        throw std::invalid_argument("more initial infections than susceptible agents");
    }
    RandomStream draws = stream_for(world, Phase::Seeding, 0);
    // Partial Fisher-Yates: the first `count` entries become the seeds.
    for (std::size_t i = 0; i < count; ++i) {
        const auto j = i + static_cast<std::size_t>(draws.below(candidates.size() - i));
        std::swap(candidates[i], candidates[j]);
        auto& a = world.agents[candidates[i]];
        a.state = HealthState::Infectious;
        a.clock = DiseaseClock{};
        a.clock.course_length = draw_course_length(world.params, draws);
        a.infection_time = world.day;
        ++world.cumulative_infected;
    }
}

bool is_mobile(const Agent& agent) noexcept
{
    return agent.state != HealthState::Dead && agent.state != HealthState::Quarantined;
}

void move_agents(World& world)
{
    const double side = world.population.landscape_side;
    for (auto& a : world.agents) {
        if (!is_mobile(a)) {
            continue;
        }
        RandomStream draws = stream_for(world, Phase::Movement, a.id);
        const double length = draws.uniform() * world.engine.max_step * world.engine.step_multiplier[activity_index(a.activity)];
        const double angle = 2.0 * std::numbers::pi * draws.uniform();
        a.position.x = reflect(a.position.x + length * std::cos(angle), side);
        a.position.y = reflect(a.position.y + length * std::sin(angle), side);
    }
}

NeighborIndex::NeighborIndex(const World& world) : world_(world)
{
    cell_size_ = world.engine.public_radius;
    cells_per_side_ = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::ceil(world.population.landscape_side / cell_size_)));
    cells_.resize(cells_per_side_ * cells_per_side_);
    for (const auto& a : world.agents) {
        if (!is_mobile(a)) {
            continue;
        }
        all_.push_back(a.id);
        cells_[cell_of(a.position.y) * cells_per_side_ + cell_of(a.position.x)].push_back(a.id);
    }
}

std::size_t NeighborIndex::cell_of(double coord) const noexcept
{
    const auto c = static_cast<std::size_t>(std::max(0.0, coord) / cell_size_);
    return std::min(c, cells_per_side_ - 1);
}

void NeighborIndex::query(Position at, double radius, AgentId self, std::vector<AgentId>& out) const
{
    out.clear();
    const auto span = static_cast<std::ptrdiff_t>(std::ceil(radius / cell_size_));
    const auto cx = static_cast<std::ptrdiff_t>(cell_of(at.x));
    const auto cy = static_cast<std::ptrdiff_t>(cell_of(at.y));
    const auto n = static_cast<std::ptrdiff_t>(cells_per_side_);
    const double r2 = radius * radius;
    for (auto y = std::max<std::ptrdiff_t>(0, cy - span); y <= std::min(n - 1, cy + span); ++y) {
        for (auto x = std::max<std::ptrdiff_t>(0, cx - span); x <= std::min(n - 1, cx + span); ++x) {
            for (AgentId id : cells_[static_cast<std::size_t>(y * n + x)]) {
                if (id == self) {
                    continue;
                }
                const auto& p = world_.agents[id].position;
                const double dx = p.x - at.x;
                const double dy = p.y - at.y;
                if (dx * dx + dy * dy <= r2) {
                    out.push_back(id);
                }
            }
        }
    }
}

int contact_slots(const Agent& agent, const World& world) noexcept
{
    return scaled_contacts(contacts_per_day(agent.activity), world.contact_scale);
}

std::vector<ContactSlot> select_contacts(AgentId id, World& world, const NeighborIndex& index)
{
    RandomStream draws = stream_for(world, Phase::Contact, id);
    const int slots = contact_slots(world.agents[id], world);
    std::vector<ContactSlot> out;
    out.reserve(static_cast<std::size_t>(slots));
    std::vector<AgentId> nearby;

    for (int slot = 0; slot < slots; ++slot) {
        const Agent& self = world.agents[id];
        const double u = draws.uniform();
        if (u < world.engine.p_network && self.has_networks()) {
            const AgentId pick = self.network_member(static_cast<std::size_t>(draws.below(self.network_size())));
            if (is_mobile(world.agents[pick])) {
                out.push_back({pick, true});
                continue;
            }
            // Dead or isolated member: the slot goes public instead.
        }

        if (world.mode == PopulationMode::Open && world.agents.size() < world.capacity) {
            const auto fresh = static_cast<AgentId>(world.agents.size());
            RandomStream attrs(stream_key(world.seed, static_cast<std::uint64_t>(world.day), Phase::Population, fresh));
            world.agents.push_back(make_agent(fresh, world.population, attrs));
            out.push_back({fresh, false});
            continue;
        }

        index.query(world.agents[id].position, world.engine.public_radius, id, nearby);
        if (!nearby.empty()) {
            out.push_back({nearby[static_cast<std::size_t>(draws.below(nearby.size()))], false});
            continue;
        }
        const auto everyone = index.all();
        const bool self_listed = std::binary_search(everyone.begin(), everyone.end(), id);
        const std::size_t others = everyone.size() - (self_listed ? 1 : 0);
        if (others == 0) {
            break;
        }
        auto k = static_cast<std::size_t>(draws.below(others));
        if (self_listed && everyone[k] >= id) {
            ++k; // skip self; `everyone` is sorted by id
        }
        out.push_back({everyone[k], false});
    }
    return out;
}

std::vector<Exposure> propagate_infection(const World& world, std::span<const std::vector<ContactSlot>> contacts)
{
    std::vector<Exposure> exposure(world.agents.size());
    auto receptive = [&](AgentId id) {
        const auto s = world.agents[id].state;
        return s == HealthState::Susceptible || s == HealthState::InContact;
    };
    auto expose = [&](AgentId target, AgentId source) {
        if (receptive(target) && is_transmitting(world.agents[source].state)) {
            exposure[target].sources.push_back(source);
        }
    };

    for (std::size_t i = 0; i < contacts.size(); ++i) {
        const auto a = static_cast<AgentId>(i);
        for (const auto& c : contacts[i]) {
            expose(c.id, a);
            expose(a, c.id);
        }
    }
    for (const auto& a : world.agents) {
        if (!is_transmitting(a.state)) {
            continue;
        }
        for (std::size_t k = 0; k < a.network_size(); ++k) {
            expose(a.network_member(k), a.id);
        }
    }
    for (auto& e : exposure) {
        std::sort(e.sources.begin(), e.sources.end());
        e.sources.erase(std::unique(e.sources.begin(), e.sources.end()), e.sources.end());
        e.count = static_cast<int>(e.sources.size());
    }
    return exposure;
}

DailyCensus take_census(const World& world, std::size_t new_infections)
{
    DailyCensus c;
    c.day = world.day;
    for (const auto& a : world.agents) {
        ++c.counts[index_of(a.state)];
    }
    c.new_infections = new_infections;
    c.cumulative_infected = world.cumulative_infected;
    return c;
}

DailyCensus step_day(World& world)
{
    move_agents(world);
    apply_controls(world, world.strategies);

    const NeighborIndex index(world);
    const std::size_t present = world.agents.size();
    std::vector<std::vector<ContactSlot>> contacts(present);
    for (std::size_t i = 0; i < present; ++i) {
        if (is_mobile(world.agents[i])) {
            contacts[i] = select_contacts(static_cast<AgentId>(i), world, index);
        }
    }
    auto exposure = propagate_infection(world, contacts);

    std::size_t new_infections = 0;
    for (auto& a : world.agents) {
        auto& e = exposure[a.id];
        RandomStream draws = stream_for(world, Phase::State, a.id);
        const auto before = a.state;
        const auto next = step_state(a.state, a.clock, e.count, world.effective_params, draws);
        a.state = next.state;
        a.clock = next.clock;

        if (before == HealthState::InContact && a.state == HealthState::Exposed) {
            if (!a.exposure_sources.empty()) {
                RandomStream pick = stream_for(world, Phase::Infection, a.id);
                const AgentId infector =
                    a.exposure_sources[static_cast<std::size_t>(pick.below(a.exposure_sources.size()))];
                a.infector = infector;
                world.infection_edges.push_back({infector, a.id, world.day});
            }
            if (!a.infection_time) {
                ++world.cumulative_infected;
            }
            a.infection_time = world.day;
            ++new_infections;
        }
        if (a.state == HealthState::InContact) {
            if (e.count > 0) {
                a.exposure_sources = std::move(e.sources);
            }
        } else {
            a.exposure_sources.clear();
        }
    }

    auto census = take_census(world, new_infections);
    ++world.day;
    return census;
}

std::vector<DailyCensus> run(World& world, int days)
{
    if (days < 1) {
        throw std::invalid_argument("days must be >= 1");
    }
    std::vector<DailyCensus> out;
    out.reserve(static_cast<std::size_t>(days));
    for (int d = 0; d < days; ++d) {
        out.push_back(step_day(world));
    }
    return out;
}

std::optional<double> estimate_R(std::span<const InfectionEdge> edges, std::span<const AgentId> completed)
{
    if (completed.empty()) {
        return std::nullopt;
    }
    std::vector<AgentId> sorted(completed.begin(), completed.end());
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    std::size_t secondary = 0;
    for (const auto& e : edges) {
        if (std::binary_search(sorted.begin(), sorted.end(), e.infector)) {
            ++secondary;
        }
    }
    return static_cast<double>(secondary) / static_cast<double>(sorted.size());
}

std::vector<AgentId> completed_cases(const World& world)
{
    std::vector<AgentId> out;
    for (const auto& a : world.agents) {
        if (!a.infection_time) {
            continue;
        }
        switch (a.state) {
        case HealthState::Exposed:
        case HealthState::Infectious:
        case HealthState::Quarantined:
        case HealthState::NotQuarantined:
            break;
        default:
            out.push_back(a.id);
        }
    }
    return out;
}

SocialTypeBreakdown social_type_breakdown(const World& world)
{
    SocialTypeBreakdown table{};
    for (const auto& a : world.agents) {
        ++table[static_cast<std::size_t>(a.social_type)][index_of(a.state)];
    }
    return table;
}

} // namespace flusim
