#include "doctest.h"

#include "flusim/population.hpp"
#include "test_support.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

using namespace flusim;

namespace {

// Upper tail of the chi-square distribution with 4 degrees of freedom.
double chi2_sf_4(double x) { return std::exp(-x / 2.0) * (1.0 + x / 2.0); }

} // namespace

TEST_CASE("census shares and their normalization")
{
    const std::array<double, 5> published = {0.1060, 0.2110, 0.4985, 0.1236, 0.0608};
    const std::array<std::string_view, 5> labels = {"<4", "5-14", "15-44", "45-59", ">59"};
    double total = 0.0;
    for (std::size_t i = 0; i < 5; ++i) {
        CHECK(age_bands()[i].census_share == published[i]);
        CHECK(age_bands()[i].label == labels[i]);
        CHECK(age_band_from_label(labels[i]) == age_bands()[i].band);
        total += published[i];
    }
    CHECK(total == doctest::Approx(0.9999));
    double normalized = 0.0;
    for (std::size_t i = 0; i < 5; ++i) {
        CHECK(normalized_age_shares()[i] == doctest::Approx(published[i] / total).epsilon(1e-14));
        normalized += normalized_age_shares()[i];
    }
    CHECK(normalized == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("permitted social types per age band")
{
    using enum SocialType;
    const std::map<AgeBand, std::set<SocialType>> expected = {
        {AgeBand::Under5, {Sibling, Child, Other}},
        {AgeBand::From5To14, {Sibling, Child, OtherFamily, Coworker, GroupMember, Neighbor, Friend, Schoolmate, Other}},
        {AgeBand::From15To44,
         {Spouse, Parent, Sibling, OtherFamily, Coworker, GroupMember, Neighbor, Friend, Advisor, Schoolmate, Other}},
        {AgeBand::From45To59,
         {Spouse, Parent, Sibling, OtherFamily, Coworker, GroupMember, Neighbor, Friend, Advisor, Other}},
        {AgeBand::Over59, {Spouse, Parent, Sibling, OtherFamily, GroupMember, Neighbor, Friend, Other}},
    };
    for (const auto& [band, types] : expected) {
        for (std::size_t t = 0; t < kSocialTypeCount; ++t) {
            const auto type = static_cast<SocialType>(t);
            CHECK_MESSAGE(is_permitted(band, type) == types.contains(type), age_band_info(band).label, " ",
                          social_type_name(type));
        }
    }
}

TEST_CASE("social type and activity names round-trip")
{
    for (std::size_t t = 0; t < kSocialTypeCount; ++t) {
        const auto type = static_cast<SocialType>(t);
        CHECK(social_type_from_name(social_type_name(type)) == type);
    }
    for (auto level : {ActivityLevel::Low, ActivityLevel::Moderate, ActivityLevel::High}) {
        CHECK(activity_from_name(activity_name(level)) == level);
    }
    CHECK(contacts_per_day(ActivityLevel::Low) == 2);
    CHECK(contacts_per_day(ActivityLevel::Moderate) == 3);
    CHECK(contacts_per_day(ActivityLevel::High) == 4);
}

TEST_CASE("sampled age bands pass a chi-square goodness of fit test")
{
    constexpr int n = 200'000;
    std::array<int, kAgeBandCount> counts{};
    RandomStream draws(31337);
    for (int i = 0; i < n; ++i) {
        ++counts[static_cast<std::size_t>(sample_age_band(draws))];
    }
    double chi2 = 0.0;
    for (std::size_t i = 0; i < kAgeBandCount; ++i) {
        const double expected = n * normalized_age_shares()[i];
        chi2 += (counts[i] - expected) * (counts[i] - expected) / expected;
    }
    CHECK(chi2_sf_4(chi2) > 1e-3);
}

TEST_CASE("chi-square survival function sanity")
{
    // Known quantiles of chi-square with 4 degrees of freedom.
    CHECK(chi2_sf_4(9.487729) == doctest::Approx(0.05).epsilon(1e-5));
    CHECK(chi2_sf_4(13.276704) == doctest::Approx(0.01).epsilon(1e-5));
}

TEST_CASE("synthesized agents only carry permitted social types")
{
    const auto agents = synthesize_population(20'000, PopulationConfig{}, 5);
    std::map<std::pair<AgeBand, SocialType>, int> seen;
    for (const auto& a : agents) {
        REQUIRE(is_permitted(a.age_band, a.social_type));
        REQUIRE(a.state == HealthState::Susceptible);
        REQUIRE(a.position.x >= 0.0);
        REQUIRE(a.position.x < 1000.0);
        REQUIRE(a.position.y >= 0.0);
        REQUIRE(a.position.y < 1000.0);
        ++seen[{a.age_band, a.social_type}];
    }
    // Every permitted pair occurs at this size.
    std::size_t permitted = 0;
    for (const auto& info : age_bands()) {
        permitted += info.permitted_types.size();
    }
    CHECK(seen.size() == permitted);
}

TEST_CASE("activity shares follow the configuration")
{
    PopulationConfig config;
    config.activity_shares = {1.0, 0.0, 3.0};
    constexpr int n = 40'000;
    const auto agents = synthesize_population(n, config, 8);
    const auto low = std::count_if(agents.begin(), agents.end(),
                                   [](const Agent& a) { return a.activity == ActivityLevel::Low; });
    const auto moderate = std::count_if(agents.begin(), agents.end(),
                                        [](const Agent& a) { return a.activity == ActivityLevel::Moderate; });
    CHECK(moderate == 0);
    CHECK(std::abs(low / double(n) - 0.25) < flusim::test::binomial_tolerance(0.25, n, 4.0));
}

TEST_CASE("synthesis is a pure function of size, config and seed")
{
    const PopulationConfig config;
    const auto a = synthesize_population(2000, config, 42);
    const auto b = synthesize_population(2000, config, 42);
    const auto c = synthesize_population(2000, config, 43);
    CHECK(a == b);
    CHECK_FALSE(a == c);
}

TEST_CASE("a single agent population")
{
    const auto agents = synthesize_population(1, PopulationConfig{}, 1);
    REQUIRE(agents.size() == 1);
    CHECK(agents[0].network_size() == 0);
    CHECK(agents[0].home_group == 0);
    CHECK_THROWS_AS(synthesize_population(0, PopulationConfig{}, 1), std::invalid_argument);
}

TEST_CASE("networks are symmetric, exclude self and respect group sizes")
{
    PopulationConfig config;
    const auto agents = synthesize_population(5000, config, 17);

    auto check_layer = [&](std::int32_t Agent::*group, std::vector<AgentId> Agent::*network, GroupSizeRange range,
                           bool (*eligible)(const Agent&)) {
        std::map<std::int32_t, int> sizes;
        for (const auto& a : agents) {
            const auto& members = a.*network;
            if (a.*group == kNoGroup) {
                REQUIRE(members.empty());
                REQUIRE_FALSE(eligible(a));
                continue;
            }
            REQUIRE(eligible(a));
            ++sizes[a.*group];
            REQUIRE(std::find(members.begin(), members.end(), a.id) == members.end());
            for (AgentId other : members) {
                REQUIRE(agents[other].*group == a.*group);
                const auto& back = agents[other].*network;
                REQUIRE(std::find(back.begin(), back.end(), a.id) != back.end());
            }
        }
        for (const auto& [g, size] : sizes) {
            CHECK(size >= range.min);
            CHECK(size <= range.max);
        }
        for (const auto& a : agents) {
            if (a.*group != kNoGroup) {
                REQUIRE(static_cast<int>((a.*network).size()) == sizes[a.*group] - 1);
            }
        }
    };
    check_layer(&Agent::home_group, &Agent::home, config.home_size, [](const Agent&) { return true; });
    check_layer(&Agent::work_group, &Agent::work, config.work_size, &eligible_for_work);
    check_layer(&Agent::school_group, &Agent::school, config.school_size, &eligible_for_school);
}

TEST_CASE("network_member walks home, then work, then school")
{
    Agent a;
    a.home = {1, 2};
    a.work = {3};
    a.school = {4, 5};
    CHECK(a.network_size() == 5);
    std::vector<AgentId> walked;
    for (std::size_t i = 0; i < a.network_size(); ++i) {
        walked.push_back(a.network_member(i));
    }
    CHECK(walked == std::vector<AgentId>{1, 2, 3, 4, 5});
}

TEST_CASE("group size validation")
{
    PopulationConfig config;
    config.work_size = {4, 5};
    CHECK_THROWS_AS(config.validate(), std::invalid_argument);
    config.work_size = {4, 7};
    CHECK_NOTHROW(config.validate());
    config.home_size = {0, 3};
    CHECK_THROWS_AS(config.validate(), std::invalid_argument);
    config = PopulationConfig{};
    config.landscape_side = 0.0;
    CHECK_THROWS_AS(config.validate(), std::invalid_argument);
    config = PopulationConfig{};
    config.activity_shares = {0.0, 0.0, 0.0};
    CHECK_THROWS_AS(config.validate(), std::invalid_argument);
}

TEST_CASE("population csv round trip")
{
    const auto agents = synthesize_population(500, PopulationConfig{}, 3);
    std::stringstream ss;
    write_population_csv(ss, agents);
    const auto back = read_population_csv(ss);
    REQUIRE(back.size() == agents.size());
    for (std::size_t i = 0; i < agents.size(); ++i) {
        CHECK(back[i] == agents[i]);
    }
}

TEST_CASE("population csv rejects bad rows")
{
    const std::string header = "id,age_band,social_type,activity,x,y,home_group,work_group,school_group\n";
    auto read = [&](const std::string& body) {
        std::istringstream in(header + body);
        return read_population_csv(in);
    };
    CHECK_THROWS_AS(read("0,<4,SPOUSE,Low,1,1,0,-1,-1\n"), std::runtime_error);
    CHECK_THROWS_AS(read("0,<4,CHILD,Low,1,1,0,-1\n"), std::runtime_error);
    CHECK_THROWS_AS(read("0,10-20,CHILD,Low,1,1,0,-1,-1\n"), std::runtime_error);
    CHECK_THROWS_AS(read("1,<4,CHILD,Low,1,1,0,-1,-1\n"), std::runtime_error);
    CHECK_THROWS_AS(read("0,<4,CHILD,Low,x,1,0,-1,-1\n"), std::runtime_error);
    CHECK(read("0,<4,CHILD,Low,1,1,0,-1,-1\n").size() == 1);
}

TEST_CASE("band frequencies over a million draws")
{
    constexpr int n = 1'000'000;
    std::array<int, kAgeBandCount> counts{};
    RandomStream draws(2006);
    for (int i = 0; i < n; ++i) {
        ++counts[static_cast<std::size_t>(sample_age_band(draws))];
    }
    CHECK(std::abs(counts[2] / double(n) - 0.4985) <= 0.002);
    CHECK(std::abs(counts[0] / double(n) - 0.1060) <= 0.002);
}

TEST_CASE("youngest band draws its three types uniformly")
{
    constexpr int n = 100'000;
    std::map<SocialType, int> counts;
    RandomStream draws(4);
    for (int i = 0; i < n; ++i) {
        ++counts[sample_social_type(AgeBand::Under5, draws)];
    }
    REQUIRE(counts.size() == 3);
    for (auto t : {SocialType::Sibling, SocialType::Child, SocialType::Other}) {
        CHECK(std::abs(counts[t] / double(n) - 1.0 / 3.0) < 0.01);
    }
    for (int i = 0; i < n; ++i) {
        const auto t = sample_social_type(AgeBand::Over59, draws);
        REQUIRE(t != SocialType::Schoolmate);
        REQUIRE(t != SocialType::Advisor);
        REQUIRE(t != SocialType::Child);
        REQUIRE(t != SocialType::Coworker);
    }
}

TEST_CASE("network eligibility follows the age bands")
{
    const auto agents = synthesize_population(20'000, PopulationConfig{}, 23);
    for (const auto& a : agents) {
        const bool working_age = a.age_band == AgeBand::From15To44 || a.age_band == AgeBand::From45To59;
        const bool school_age = a.age_band == AgeBand::From5To14 ||
                                (a.age_band == AgeBand::From15To44 && a.social_type == SocialType::Schoolmate);
        REQUIRE(eligible_for_work(a) == working_age);
        REQUIRE(eligible_for_school(a) == school_age);
        if (a.age_band == AgeBand::Under5) {
            REQUIRE(a.work.empty());
            REQUIRE(a.school.empty());
        }
        REQUIRE(a.home_group != kNoGroup);
    }
}
