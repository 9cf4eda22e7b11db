#include "doctest.h"

#include "flusim/disease_model.hpp"
#include "flusim/random.hpp"
#include "test_support.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

using namespace flusim;
using flusim::test::ScriptedDraws;

namespace {

// Probability that at least one of k independent Bernoulli(p) contacts
// transmits, by summing over all 2^k outcomes.
double enumerate_infection(double p, int k)
{
    double infected = 0.0;
    for (unsigned mask = 0; mask < (1u << k); ++mask) {
        double prob = 1.0;
        for (int j = 0; j < k; ++j) {
            prob *= (mask >> j) & 1u ? p : 1.0 - p;
        }
        if (mask != 0) {
            infected += prob;
        }
    }
    return infected;
}

DiseaseClock clock_with(int days_in_state, int course_length = 9, int course_day = 0, int exposure = 0)
{
    DiseaseClock c;
    c.days_in_state = days_in_state;
    c.course_length = course_length;
    c.course_day = course_day;
    c.exposure_contacts = exposure;
    return c;
}

} // namespace

TEST_CASE("transition graph matches the nine-state chart")
{
    using enum HealthState;
    CHECK(allowed_transitions(Susceptible) == StateSet{InContact});
    CHECK(allowed_transitions(InContact) == StateSet{Exposed, Susceptible});
    CHECK(allowed_transitions(Exposed) == StateSet{Infectious});
    CHECK(allowed_transitions(Infectious) == StateSet{Quarantined, NotQuarantined});
    CHECK(allowed_transitions(Quarantined) == StateSet{Recovered, Dead});
    CHECK(allowed_transitions(NotQuarantined) == StateSet{Quarantined, Dead});
    CHECK(allowed_transitions(Recovered) == StateSet{Immunized, Susceptible});
    CHECK(allowed_transitions(Dead).empty());
    CHECK(allowed_transitions(Immunized).empty());
}

TEST_CASE("short names round-trip")
{
    for (auto s : kAllHealthStates) {
        CHECK(health_state_from_short_name(short_name(s)) == s);
    }
    CHECK_FALSE(health_state_from_short_name("X"));
}

TEST_CASE("exposed agent turns infectious once the latent period is reached")
{
    const DiseaseParams params;
    ScriptedDraws draws{{0.5}};
    const auto next = step_state(HealthState::Exposed, clock_with(params.latent_days), 0, params, draws);
    CHECK(next.state == HealthState::Infectious);
    CHECK(next.clock.days_in_state == 0);
    CHECK(next.clock.course_length >= params.t_recover_min);
    CHECK(next.clock.course_length <= params.t_recover_max);
}

TEST_CASE("exposed-to-infectious delay is exactly latent_days steps")
{
    for (int latent = 1; latent <= 6; ++latent) {
        DiseaseParams params;
        params.latent_days = latent;
        RandomStream draws(static_cast<std::uint64_t>(latent));
        Transition t{HealthState::Exposed, DiseaseClock{}};
        int steps = 0;
        while (t.state == HealthState::Exposed) {
            t = step_state(t.state, t.clock, 5, params, draws);
            ++steps;
        }
        CHECK(t.state == HealthState::Infectious);
        CHECK(steps == latent);
    }
}

TEST_CASE("dead and immunized ignore contacts")
{
    const DiseaseParams params;
    RandomStream draws(1);
    for (auto s : {HealthState::Dead, HealthState::Immunized}) {
        const auto clock = clock_with(4, 7, 3, 2);
        const auto next = step_state(s, clock, 10, params, draws);
        CHECK(next.state == s);
        CHECK(next.clock == clock);
    }
}

TEST_CASE("infection probability from three contacts")
{
    const double oracle = enumerate_infection(0.35, 3);
    CHECK(oracle == doctest::Approx(0.725375).epsilon(1e-12));
    CHECK(infection_probability(0.35, 3) == doctest::Approx(oracle).epsilon(1e-12));
    for (int k = 0; k <= 8; ++k) {
        CHECK(infection_probability(0.2, k) == doctest::Approx(enumerate_infection(0.2, k)).epsilon(1e-12));
    }
}

TEST_CASE("susceptible with three infectious contacts is exposed with 1 - 0.65^3")
{
    DiseaseParams params;
    params.p_transmit = 0.35;
    constexpr int trials = 100'000;
    int exposed = 0;
    for (int n = 0; n < trials; ++n) {
        RandomStream draws(stream_key(7, 0, Phase::State, static_cast<std::uint64_t>(n)));
        const auto contact = step_state(HealthState::Susceptible, DiseaseClock{}, 3, params, draws);
        REQUIRE(contact.state == HealthState::InContact);
        const auto next = step_state(contact.state, contact.clock, 0, params, draws);
        REQUIRE((next.state == HealthState::Exposed || next.state == HealthState::Susceptible));
        exposed += next.state == HealthState::Exposed ? 1 : 0;
    }
    const double p = 0.725375;
    CHECK(std::abs(exposed / double(trials) - p) < flusim::test::binomial_tolerance(p, trials));
}

TEST_CASE("in-contact agent stays in contact while still exposed, reverts otherwise")
{
    DiseaseParams params;
    params.p_transmit = 0.0;
    ScriptedDraws draws{{0.99}};
    auto c = step_state(HealthState::InContact, clock_with(0, 0, 0, 2), 4, params, draws);
    CHECK(c.state == HealthState::InContact);
    CHECK(c.clock.exposure_contacts == 4);
    c = step_state(c.state, c.clock, 0, params, draws);
    CHECK(c.state == HealthState::Susceptible);
}

TEST_CASE("transmission extremes")
{
    SUBCASE("p_transmit = 0 keeps agents in S and C")
    {
        DiseaseParams params;
        params.p_transmit = 0.0;
        RandomStream draws(3);
        Transition t{HealthState::Susceptible, DiseaseClock{}};
        for (int day = 0; day < 10'000; ++day) {
            t = step_state(t.state, t.clock, static_cast<int>(draws.below(4)), params, draws);
            REQUIRE((t.state == HealthState::Susceptible || t.state == HealthState::InContact));
        }
    }
    SUBCASE("p_transmit = 1 always converts C with a contact")
    {
        DiseaseParams params;
        params.p_transmit = 1.0;
        RandomStream draws(4);
        for (int k = 1; k <= 5; ++k) {
            for (int n = 0; n < 1000; ++n) {
                const auto next = step_state(HealthState::InContact, clock_with(0, 0, 0, k), 0, params, draws);
                REQUIRE(next.state == HealthState::Exposed);
            }
        }
    }
}

TEST_CASE("infection probability is non-decreasing in the contact count")
{
    RandomStream draws(11);
    for (int n = 0; n < 1000; ++n) {
        const double p = draws.uniform();
        double prev = 0.0;
        for (int k = 0; k <= 30; ++k) {
            const double q = infection_probability(p, k);
            REQUIRE(q >= prev);
            prev = q;
        }
    }
}

TEST_CASE("course length is uniform over the recovery bounds")
{
    DiseaseParams params;
    RandomStream draws(99);
    std::array<int, 10> hist{};
    double sum = 0.0;
    constexpr int n = 100'000;
    for (int i = 0; i < n; ++i) {
        const int d = draw_course_length(params, draws);
        REQUIRE(d >= 5);
        REQUIRE(d <= 14);
        ++hist[static_cast<std::size_t>(d - 5)];
        sum += d;
    }
    CHECK(std::abs(sum / n - 9.5) < 0.05);
    for (int h : hist) {
        CHECK(std::abs(h / double(n) - 0.1) < flusim::test::binomial_tolerance(0.1, n, 4.0));
    }

    params.t_recover_min = params.t_recover_max = 7;
    for (int i = 0; i < 100; ++i) {
        CHECK(draw_course_length(params, draws) == 7);
    }
}

TEST_CASE("quarantined agents recover with p_recover at course end")
{
    const DiseaseParams params;
    constexpr int n = 100'000;
    int recovered = 0;
    RandomStream draws(5);
    for (int i = 0; i < n; ++i) {
        const auto next = step_state(HealthState::Quarantined, clock_with(2, 6, 5), 0, params, draws);
        REQUIRE((next.state == HealthState::Recovered || next.state == HealthState::Dead));
        recovered += next.state == HealthState::Recovered ? 1 : 0;
    }
    CHECK(std::abs(recovered / double(n) - 0.9) < 0.01);
}

TEST_CASE("quarantined agents wait for the end of their course")
{
    const DiseaseParams params;
    ScriptedDraws draws{{0.0}};
    const auto next = step_state(HealthState::Quarantined, clock_with(1, 9, 3), 0, params, draws);
    CHECK(next.state == HealthState::Quarantined);
    CHECK(next.clock.course_day == 4);
}

TEST_CASE("not-quarantined daily branches")
{
    const DiseaseParams params;
    const double h = params.daily_death_hazard();
    SUBCASE("seeks care")
    {
        ScriptedDraws draws{{0.05}};
        CHECK(step_state(HealthState::NotQuarantined, clock_with(1, 9, 2), 0, params, draws).state ==
              HealthState::Quarantined);
    }
    SUBCASE("dies")
    {
        ScriptedDraws draws{{0.5, h / 2}};
        CHECK(step_state(HealthState::NotQuarantined, clock_with(1, 9, 2), 0, params, draws).state ==
              HealthState::Dead);
    }
    SUBCASE("remains")
    {
        ScriptedDraws draws{{0.5, 0.5}};
        CHECK(step_state(HealthState::NotQuarantined, clock_with(1, 9, 2), 0, params, draws).state ==
              HealthState::NotQuarantined);
    }
    SUBCASE("forced to care at course end")
    {
        ScriptedDraws draws{{0.5, 0.5}};
        CHECK(step_state(HealthState::NotQuarantined, clock_with(1, 9, 8), 0, params, draws).state ==
              HealthState::Quarantined);
    }
}

TEST_CASE("daily death hazard compounds to p_dead over the mean course")
{
    const DiseaseParams params;
    const double h = params.daily_death_hazard();
    CHECK(1.0 - std::pow(1.0 - h, 9.5) == doctest::Approx(0.14).epsilon(1e-12));
}

TEST_CASE("recovered agents become immunized or susceptible")
{
    const DiseaseParams params;
    ScriptedDraws low{{0.1}};
    ScriptedDraws high{{0.97}};
    CHECK(step_state(HealthState::Recovered, clock_with(0), 0, params, low).state == HealthState::Immunized);
    CHECK(step_state(HealthState::Recovered, clock_with(0), 0, params, high).state == HealthState::Susceptible);
}

TEST_CASE("every emitted transition is allowed")
{
    RandomStream draws(2024);
    for (int n = 0; n < 200'000; ++n) {
        DiseaseParams params;
        params.p_transmit = draws.uniform();
        params.p_quarantine = draws.uniform();
        params.p_recover = draws.uniform();
        params.p_dead = draws.uniform();
        params.p_immunize = draws.uniform();
        params.latent_days = static_cast<int>(draws.below(5));
        params.t_recover_min = 1 + static_cast<int>(draws.below(6));
        params.t_recover_max = params.t_recover_min + static_cast<int>(draws.below(10));
        const auto from = kAllHealthStates[draws.below(kHealthStateCount)];
        DiseaseClock clock = clock_with(static_cast<int>(draws.below(20)), params.t_recover_min,
                                        static_cast<int>(draws.below(20)), 1 + static_cast<int>(draws.below(4)));
        const auto next = step_state(from, clock, static_cast<int>(draws.below(6)), params, draws);
        if (next.state != from) {
            REQUIRE(allowed_transitions(from).contains(next.state));
        }
    }
}

TEST_CASE("parameter validation")
{
    DiseaseParams ok;
    CHECK_NOTHROW(ok.validate());
    auto bad = ok;
    bad.p_recover = 1.2;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = ok;
    bad.latent_days = -1;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = ok;
    bad.t_recover_min = 0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = ok;
    bad.t_recover_max = 4;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}
