#include "flusim/population.hpp"

#include <algorithm>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace flusim {

namespace {

using enum SocialType;

constexpr std::array<std::string_view, kSocialTypeCount> kSocialTypeNames = {
    "SPOUSE", "PARENT", "SIBLING", "CHILD", "OTHERFAMILY", "COWORKER",
    "GROUPMEMBER", "NEIGHBOR", "FRIEND", "ADVISOR", "SCHOOLMATE", "OTHER",
};

constexpr std::array kUnder5Types = {Sibling, Child, Other};
constexpr std::array k5To14Types = {Sibling, Child, OtherFamily, Coworker, GroupMember,
                                    Neighbor, Friend, Schoolmate, Other};
constexpr std::array k15To44Types = {Spouse, Parent, Sibling, OtherFamily, Coworker, GroupMember,
                                     Neighbor, Friend, Advisor, Schoolmate, Other};
constexpr std::array k45To59Types = {Spouse, Parent, Sibling, OtherFamily, Coworker,
                                     GroupMember, Neighbor, Friend, Advisor, Other};
constexpr std::array kOver59Types = {Spouse, Parent, Sibling, OtherFamily, GroupMember, Neighbor, Friend, Other};

const std::array<AgeBandInfo, kAgeBandCount> kAgeBands = {{
    {AgeBand::Under5, "<4", 0.1060, kUnder5Types},
    {AgeBand::From5To14, "5-14", 0.2110, k5To14Types},
    {AgeBand::From15To44, "15-44", 0.4985, k15To44Types},
    {AgeBand::From45To59, "45-59", 0.1236, k45To59Types},
    {AgeBand::Over59, ">59", 0.0608, kOver59Types},
}};

constexpr std::array<std::string_view, 3> kActivityNames = {"Low", "Moderate", "High"};

// Sub-streams of the population seed.
constexpr std::uint64_t kAttributeStream = 0;
constexpr std::uint64_t kNetworkStream = 1;

template <class T>
void shuffle(std::vector<T>& v, RandomStream& draws)
{
    for (std::size_t i = v.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(draws.below(i));
        std::swap(v[i - 1], v[j]);
    }
}

int draw_size(GroupSizeRange range, RandomStream& draws)
{
    return range.min + static_cast<int>(draws.below(static_cast<std::uint64_t>(range.max - range.min + 1)));
}

// Splits the members into consecutive groups with sizes in [min, max]. Only
// when fewer than min members exist at all is a smaller group produced.
std::vector<std::vector<AgentId>> partition(const std::vector<AgentId>& members, GroupSizeRange range,
                                            RandomStream& draws)
{
    std::vector<std::vector<AgentId>> groups;
    std::size_t pos = 0;
    while (pos < members.size()) {
        const auto remaining = static_cast<int>(members.size() - pos);
        int size = std::min(draw_size(range, draws), remaining);
        if (remaining - size > 0 && remaining - size < range.min) {
            size = remaining <= range.max ? remaining : remaining - range.min;
        }
        groups.emplace_back(members.begin() + static_cast<std::ptrdiff_t>(pos),
                            members.begin() + static_cast<std::ptrdiff_t>(pos + static_cast<std::size_t>(size)));
        pos += static_cast<std::size_t>(size);
    }
    return groups;
}

void validate_range(GroupSizeRange r, const char* name)
{
    if (r.min < 1 || r.max < r.min) {
        throw std::invalid_argument(std::string(name) + ": need 1 <= min <= max");
    }
    // Ensures any remainder of at least min members can always be split.
    if (r.max < 2 * r.min - 1) {
        throw std::invalid_argument(std::string(name) + ": max must be at least 2*min - 1");
    }
}

std::vector<std::string> split_csv_line(const std::string& line)
{
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) {
        fields.push_back(field);
    }
    if (!line.empty() && line.back() == ',') {
        fields.emplace_back();
    }
    return fields;
}

} // namespace

std::string_view social_type_name(SocialType t) noexcept { return kSocialTypeNames[static_cast<std::size_t>(t)]; }

std::optional<SocialType> social_type_from_name(std::string_view name) noexcept
{
    for (std::size_t i = 0; i < kSocialTypeCount; ++i) {
        if (kSocialTypeNames[i] == name) {
            return static_cast<SocialType>(i);
        }
    }
    return std::nullopt;
}

std::span<const AgeBandInfo> age_bands() noexcept { return kAgeBands; }

const AgeBandInfo& age_band_info(AgeBand band) noexcept { return kAgeBands[static_cast<std::size_t>(band)]; }

std::optional<AgeBand> age_band_from_label(std::string_view label) noexcept
{
    for (const auto& info : kAgeBands) {
        if (info.label == label) {
            return info.band;
        }
    }
    return std::nullopt;
}

const std::array<double, kAgeBandCount>& normalized_age_shares() noexcept
{
    static const std::array<double, kAgeBandCount> shares = [] {
        double total = 0.0;
        for (const auto& b : kAgeBands) {
            total += b.census_share;
        }
        std::array<double, kAgeBandCount> out{};
        for (std::size_t i = 0; i < kAgeBandCount; ++i) {
            out[i] = kAgeBands[i].census_share / total;
        }
        return out;
    }();
    return shares;
}

bool is_permitted(AgeBand band, SocialType type) noexcept
{
    const auto types = age_band_info(band).permitted_types;
    return std::find(types.begin(), types.end(), type) != types.end();
}

std::string_view activity_name(ActivityLevel level) noexcept { return kActivityNames[static_cast<std::size_t>(level)]; }

std::optional<ActivityLevel> activity_from_name(std::string_view name) noexcept
{
    for (std::size_t i = 0; i < kActivityNames.size(); ++i) {
        if (kActivityNames[i] == name) {
            return static_cast<ActivityLevel>(i);
        }
    }
    return std::nullopt;
}

AgentId Agent::network_member(std::size_t i) const noexcept
{
    if (i < home.size()) {
        return home[i];
    }
    i -= home.size();
    if (i < work.size()) {
        return work[i];
    }
    return school[i - work.size()];
}

void PopulationConfig::validate() const
{
    if (!(landscape_side > 0.0)) {
        throw std::invalid_argument("landscape_side must be positive");
    }
    double total = 0.0;
    for (double s : activity_shares) {
        if (!(s >= 0.0)) {
            throw std::invalid_argument("activity_shares must be non-negative");
        }
        total += s;
    }
    if (!(total > 0.0)) {
        throw std::invalid_argument("activity_shares must not all be zero");
    }
    validate_range(home_size, "home_size");
    validate_range(work_size, "work_size");
    validate_range(school_size, "school_size");
}

bool eligible_for_work(const Agent& agent) noexcept
{
    return agent.age_band == AgeBand::From15To44 || agent.age_band == AgeBand::From45To59;
}

bool eligible_for_school(const Agent& agent) noexcept
{
    return agent.age_band == AgeBand::From5To14 ||
           (agent.age_band == AgeBand::From15To44 && agent.social_type == SocialType::Schoolmate);
}

Agent make_agent(AgentId id, const PopulationConfig& config, RandomStream& draws)
{
    Agent a;
    a.id = id;
    a.position = {draws.uniform() * config.landscape_side, draws.uniform() * config.landscape_side};
    a.age_band = sample_age_band(draws);
    a.social_type = sample_social_type(a.age_band, draws);
    a.activity = sample_activity(config.activity_shares, draws);
    return a;
}

std::vector<Agent> synthesize_population(std::size_t n, const PopulationConfig& config, std::uint64_t seed)
{
    if (n == 0) {
        throw std::invalid_argument("population size must be at least 1");
    }
    config.validate();
    std::vector<Agent> agents;
    agents.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        RandomStream draws(stream_key(seed, kAttributeStream, Phase::Population, i));
        agents.push_back(make_agent(static_cast<AgentId>(i), config, draws));
    }
    RandomStream network_draws(stream_key(seed, kNetworkStream, Phase::Population, 0));
    build_networks(agents, config, network_draws);
    return agents;
}

void build_networks(std::span<Agent> agents, const PopulationConfig& config, RandomStream& draws)
{
    std::vector<AgentId> everyone;
    std::vector<AgentId> workers;
    std::vector<AgentId> students;
    for (std::size_t i = 0; i < agents.size(); ++i) {
        auto& a = agents[i];
        a.home_group = a.work_group = a.school_group = kNoGroup;
        everyone.push_back(static_cast<AgentId>(i));
        if (eligible_for_work(a)) {
            workers.push_back(static_cast<AgentId>(i));
        }
        if (eligible_for_school(a)) {
            students.push_back(static_cast<AgentId>(i));
        }
    }

    auto assign = [&](std::vector<AgentId>& members, GroupSizeRange range, std::int32_t Agent::*group) {
        shuffle(members, draws);
        const auto groups = partition(members, range, draws);
        for (std::size_t g = 0; g < groups.size(); ++g) {
            for (AgentId id : groups[g]) {
                agents[id].*group = static_cast<std::int32_t>(g);
            }
        }
    };
    assign(everyone, config.home_size, &Agent::home_group);
    assign(workers, config.work_size, &Agent::work_group);
    assign(students, config.school_size, &Agent::school_group);
    rebuild_networks_from_groups(agents);
}

void rebuild_networks_from_groups(std::span<Agent> agents)
{
    auto rebuild = [&](std::int32_t Agent::*group, std::vector<AgentId> Agent::*network) {
        std::map<std::int32_t, std::vector<AgentId>> members;
        for (std::size_t i = 0; i < agents.size(); ++i) {
            agents[i].*network = {};
            if (agents[i].*group != kNoGroup) {
                members[agents[i].*group].push_back(static_cast<AgentId>(i));
            }
        }
        for (const auto& [g, ids] : members) {
            for (AgentId self : ids) {
                auto& out = agents[self].*network;
                out.reserve(ids.size() - 1);
                for (AgentId other : ids) {
                    if (other != self) {
                        out.push_back(other);
                    }
                }
            }
        }
    };
    rebuild(&Agent::home_group, &Agent::home);
    rebuild(&Agent::work_group, &Agent::work);
    rebuild(&Agent::school_group, &Agent::school);
}

void write_population_csv(std::ostream& out, std::span<const Agent> agents)
{
    out << "id,age_band,social_type,activity,x,y,home_group,work_group,school_group\n";
    const auto old_precision = out.precision(17);
    for (const auto& a : agents) {
        out << a.id << ',' << age_band_info(a.age_band).label << ',' << social_type_name(a.social_type) << ','
            << activity_name(a.activity) << ',' << a.position.x << ',' << a.position.y << ',' << a.home_group
            << ',' << a.work_group << ',' << a.school_group << '\n';
    }
    out.precision(old_precision);
}

std::vector<Agent> read_population_csv(std::istream& in)
{
    std::string line;
    if (!std::getline(in, line)) {
        throw std::runtime_error("population csv: missing header");
    }
    std::vector<Agent> agents;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        const auto f = split_csv_line(line);
        auto fail = [row](const std::string& what) {
            return std::runtime_error("population csv row " + std::to_string(row) + ": " + what);
        };
        if (f.size() != 9) {
            throw fail("expected 9 columns");
        }
        Agent a;
        try {
            a.id = static_cast<AgentId>(std::stoul(f[0]));
            a.position = {std::stod(f[4]), std::stod(f[5])};
            a.home_group = std::stoi(f[6]);
            a.work_group = std::stoi(f[7]);
            a.school_group = std::stoi(f[8]);
        } catch (const std::exception&) {
            throw fail("non-numeric field");
        }
        const auto band = age_band_from_label(f[1]);
        const auto type = social_type_from_name(f[2]);
        const auto activity = activity_from_name(f[3]);
        if (!band || !type || !activity) {
            throw fail("unknown age band, social type or activity");
        }
        if (!is_permitted(*band, *type)) {
            throw fail("social type not permitted for age band");
        }
        if (a.id != agents.size()) {
            throw fail("ids must be dense and in order");
        }
        a.age_band = *band;
        a.social_type = *type;
        a.activity = *activity;
        agents.push_back(std::move(a));
    }
    rebuild_networks_from_groups(agents);
    return agents;
}

} // namespace flusim
