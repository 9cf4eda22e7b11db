#include "flusim/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numeric>
#include <ostream>
#include <thread>

namespace flusim {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

template <class Fn>
void parallel_for(std::size_t n, std::size_t threads, Fn&& fn)
{
    if (threads == 0) {
        threads = std::max(1u, std::thread::hardware_concurrency());
    }
    threads = std::min(threads, n);
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) {
            fn(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < threads; ++t) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < n && !failed; i = next++) {
                    try {
                        fn(i);
                    } catch (...) {
                        if (!failed.exchange(true)) {
                            failure = std::current_exception();
                        }
                    }
                }
            });
        }
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
}

std::ofstream open_output(const fs::path& file)
{
    std::ofstream out(file, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write " + file.string());
    }
    return out;
}

void prepare_output_dir(const fs::path& dir)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
        throw std::runtime_error("cannot create output directory " + dir.string());
    }
}

json distribution_to_json(const Distribution& d)
{
    return {{"mean", d.mean}, {"median", d.median}, {"q10", d.q10}, {"q90", d.q90}};
}

Distribution distribution_from_json(const json& j, const std::string& path)
{
    try {
        return {j.at("mean").get<double>(), j.at("median").get<double>(), j.at("q10").get<double>(),
                j.at("q90").get<double>()};
    } catch (const json::exception& e) {
        throw ConfigError(path, e.what());
    }
}

json counts_to_json(const std::array<std::size_t, kHealthStateCount>& counts)
{
    json j = json::object();
    for (auto s : kAllHealthStates) {
        j[std::string(short_name(s))] = counts[index_of(s)];
    }
    return j;
}

std::array<std::size_t, kHealthStateCount> counts_from_json(const json& j)
{
    std::array<std::size_t, kHealthStateCount> out{};
    for (auto s : kAllHealthStates) {
        out[index_of(s)] = j.at(std::string(short_name(s))).get<std::size_t>();
    }
    return out;
}

std::vector<std::vector<double>> per_day_matrix(std::span<const SeedRun> runs, auto&& value)
{
    std::size_t days = runs.empty() ? 0 : runs.front().census.size();
    for (const auto& r : runs) {
        days = std::min(days, r.census.size());
    }
    std::vector<std::vector<double>> m(days);
    for (std::size_t d = 0; d < days; ++d) {
        for (const auto& r : runs) {
            m[d].push_back(value(r.census[d]));
        }
    }
    return m;
}

std::string seed_file(std::string_view prefix, std::uint64_t seed)
{
    return std::string(prefix) + "_seed" + std::to_string(seed) + ".csv";
}

} // namespace

SeedRun simulate_seed(const ScenarioConfig& config, std::uint64_t seed)
{
    const std::size_t initial_agents =
        config.mode == PopulationMode::Closed ? config.population : std::max<std::size_t>(1, config.initial_infected);
    auto agents = synthesize_population(initial_agents, config.population_model, config.population_seed);
    World world = make_world(std::move(agents), config.disease, config.engine, config.population_model, seed,
                             config.mode, config.population, config.strategies);
    seed_infections(world, config.initial_infected);

    SeedRun out;
    out.seed = seed;
    out.census = run(world, config.days);
    out.social_types = social_type_breakdown(world);
    out.estimated_R = estimate_R(world.infection_edges, completed_cases(world));
    out.population = world.size();
    return out;
}

double quantile(std::vector<double> values, double q)
{
    if (values.empty()) {
        return 0.0;
    }
    std::sort(values.begin(), values.end());
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

Distribution describe(std::span<const double> values)
{
    Distribution d;
    if (values.empty()) {
        return d;
    }
    std::vector<double> v(values.begin(), values.end());
    d.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    d.median = quantile(v, 0.5);
    d.q10 = quantile(v, 0.1);
    d.q90 = quantile(v, 0.9);
    return d;
}

SeedSummary summarize(const SeedRun& run)
{
    SeedSummary s;
    s.seed = run.seed;
    for (std::size_t d = 0; d < run.census.size(); ++d) {
        const auto& c = run.census[d];
        if (d == 0 || c.infected() > s.peak_infected) {
            s.peak_infected = c.infected();
            s.peak_day = c.day;
        }
    }
    if (!run.census.empty()) {
        const auto& last = run.census.back();
        s.final_counts = last.counts;
        s.total_dead = last.count(HealthState::Dead);
        s.cumulative_infected = last.cumulative_infected;
        const auto n = last.total();
        s.attack_rate = n > 0 ? static_cast<double>(last.cumulative_infected) / static_cast<double>(n) : 0.0;
    }
    s.social_types = run.social_types;
    s.estimated_R = run.estimated_R;
    return s;
}

SummaryReport summarize(const ScenarioConfig& config, std::span<const SeedRun> runs)
{
    SummaryReport rep;
    rep.name = config.name;
    rep.population = config.population;
    rep.days = config.days;
    std::vector<double> peak, day, attack, dead, r;
    for (const auto& run : runs) {
        auto s = summarize(run);
        peak.push_back(static_cast<double>(s.peak_infected));
        day.push_back(s.peak_day);
        attack.push_back(s.attack_rate);
        dead.push_back(static_cast<double>(s.total_dead));
        if (s.estimated_R) {
            r.push_back(*s.estimated_R);
        }
        rep.runs.push_back(std::move(s));
    }
    rep.peak_infected = describe(peak);
    rep.peak_day = describe(day);
    rep.attack_rate = describe(attack);
    rep.total_dead = describe(dead);
    if (!r.empty()) {
        rep.estimated_R = describe(r);
    }
    return rep;
}

json summary_to_json(const SummaryReport& rep)
{
    json runs = json::array();
    for (const auto& s : rep.runs) {
        json types = json::object();
        for (std::size_t t = 0; t < kSocialTypeCount; ++t) {
            types[std::string(social_type_name(static_cast<SocialType>(t)))] = counts_to_json(s.social_types[t]);
        }
        runs.push_back({
            {"seed", s.seed},
            {"peak_infected", s.peak_infected},
            {"peak_day", s.peak_day},
            {"attack_rate", s.attack_rate},
            {"total_dead", s.total_dead},
            {"cumulative_infected", s.cumulative_infected},
            {"estimated_R", s.estimated_R ? json(*s.estimated_R) : json(nullptr)},
            {"final_counts", counts_to_json(s.final_counts)},
            {"social_types", types},
        });
    }
    return {
        {"name", rep.name},
        {"population", rep.population},
        {"days", rep.days},
        {"runs", runs},
        {"aggregate",
         {{"peak_infected", distribution_to_json(rep.peak_infected)},
          {"peak_day", distribution_to_json(rep.peak_day)},
          {"attack_rate", distribution_to_json(rep.attack_rate)},
          {"total_dead", distribution_to_json(rep.total_dead)},
          {"estimated_R", rep.estimated_R ? distribution_to_json(*rep.estimated_R) : json(nullptr)}}},
    };
}

SummaryReport summary_from_json(const json& doc)
{
    SummaryReport rep;
    try {
        rep.name = doc.at("name").get<std::string>();
        rep.population = doc.at("population").get<std::size_t>();
        rep.days = doc.at("days").get<int>();
        const auto& runs = doc.at("runs");
        for (std::size_t i = 0; i < runs.size(); ++i) {
            const auto& r = runs[i];
            SeedSummary s;
            s.seed = r.at("seed").get<std::uint64_t>();
            s.peak_infected = r.at("peak_infected").get<std::size_t>();
            s.peak_day = r.at("peak_day").get<int>();
            s.attack_rate = r.at("attack_rate").get<double>();
            s.total_dead = r.at("total_dead").get<std::size_t>();
            s.cumulative_infected = r.at("cumulative_infected").get<std::size_t>();
            if (!r.at("estimated_R").is_null()) {
                s.estimated_R = r.at("estimated_R").get<double>();
            }
            s.final_counts = counts_from_json(r.at("final_counts"));
            for (std::size_t t = 0; t < kSocialTypeCount; ++t) {
                s.social_types[t] =
                    counts_from_json(r.at("social_types").at(std::string(social_type_name(static_cast<SocialType>(t)))));
            }
            rep.runs.push_back(s);
        }
        const auto& agg = doc.at("aggregate");
        rep.peak_infected = distribution_from_json(agg.at("peak_infected"), "aggregate.peak_infected");
        rep.peak_day = distribution_from_json(agg.at("peak_day"), "aggregate.peak_day");
        rep.attack_rate = distribution_from_json(agg.at("attack_rate"), "aggregate.attack_rate");
        rep.total_dead = distribution_from_json(agg.at("total_dead"), "aggregate.total_dead");
        if (!agg.at("estimated_R").is_null()) {
            rep.estimated_R = distribution_from_json(agg.at("estimated_R"), "aggregate.estimated_R");
        }
    } catch (const json::exception& e) {
        throw ConfigError("summary", e.what());
    }
    return rep;
}

void write_census_csv(std::ostream& out, std::span<const DailyCensus> census)
{
    out << "day";
    for (auto s : kAllHealthStates) {
        out << ',' << short_name(s);
    }
    out << ",new_infections,cumulative_infected\n";
    for (const auto& c : census) {
        out << c.day;
        for (auto n : c.counts) {
            out << ',' << n;
        }
        out << ',' << c.new_infections << ',' << c.cumulative_infected << '\n';
    }
}

void write_social_type_csv(std::ostream& out, const SocialTypeBreakdown& table)
{
    out << "social_type";
    for (auto s : kAllHealthStates) {
        out << ',' << short_name(s);
    }
    out << '\n';
    for (std::size_t t = 0; t < kSocialTypeCount; ++t) {
        out << social_type_name(static_cast<SocialType>(t));
        for (auto n : table[t]) {
            out << ',' << n;
        }
        out << '\n';
    }
}

void write_aggregate_csv(std::ostream& out, std::span<const SeedRun> runs)
{
    struct Column {
        std::string name;
        std::vector<std::vector<double>> values;
    };
    std::vector<Column> columns;
    for (auto s : kAllHealthStates) {
        columns.push_back({std::string(short_name(s)),
                           per_day_matrix(runs, [s](const DailyCensus& c) { return static_cast<double>(c.count(s)); })});
    }
    columns.push_back(
        {"infected", per_day_matrix(runs, [](const DailyCensus& c) { return static_cast<double>(c.infected()); })});
    columns.push_back({"cumulative_infected", per_day_matrix(runs, [](const DailyCensus& c) {
                           return static_cast<double>(c.cumulative_infected);
                       })});

    out << "day";
    for (const auto& col : columns) {
        out << ',' << col.name << "_mean," << col.name << "_median," << col.name << "_q10," << col.name << "_q90";
    }
    out << '\n';
    const auto old = out.precision(10);
    const std::size_t days = columns.front().values.size();
    for (std::size_t d = 0; d < days; ++d) {
        out << runs.front().census[d].day;
        for (const auto& col : columns) {
            const auto dist = describe(col.values[d]);
            out << ',' << dist.mean << ',' << dist.median << ',' << dist.q10 << ',' << dist.q90;
        }
        out << '\n';
    }
    out.precision(old);
}

ScenarioResult run_scenario(const ScenarioConfig& config, const RunOptions& options)
{
    config.validate();
    const fs::path dir = config.output_dir;
    if (options.write_files) {
        prepare_output_dir(dir);
    }

    ScenarioResult result;
    result.runs.resize(config.run_seeds.size());
    parallel_for(config.run_seeds.size(), options.threads,
                 [&](std::size_t i) { result.runs[i] = simulate_seed(config, config.run_seeds[i]); });
    result.summary = summarize(config, result.runs);

    if (!options.write_files) {
        return result;
    }
    for (const auto& r : result.runs) {
        auto census = open_output(dir / seed_file("census", r.seed));
        write_census_csv(census, r.census);
        auto types = open_output(dir / seed_file("social_types", r.seed));
        write_social_type_csv(types, r.social_types);
        if (!options.quiet) {
            const auto s = summarize(r);
            std::cout << config.name << " seed " << r.seed << ": peak " << s.peak_infected << " on day "
                      << s.peak_day << ", attack rate " << s.attack_rate << ", dead " << s.total_dead << '\n';
        }
    }
    {
        auto out = open_output(dir / "aggregate.csv");
        write_aggregate_csv(out, result.runs);
    }
    {
        // Mean over seeds, rounded to the nearest agent.
        SocialTypeBreakdown mean{};
        for (std::size_t t = 0; t < kSocialTypeCount; ++t) {
            for (std::size_t s = 0; s < kHealthStateCount; ++s) {
                double total = 0.0;
                for (const auto& r : result.runs) {
                    total += static_cast<double>(r.social_types[t][s]);
                }
                mean[t][s] = static_cast<std::size_t>(std::llround(total / static_cast<double>(result.runs.size())));
            }
        }
        auto out = open_output(dir / "social_types.csv");
        write_social_type_csv(out, mean);
    }
    {
        auto out = open_output(dir / "summary.json");
        out << summary_to_json(result.summary).dump(2) << '\n';
    }
    {
        auto out = open_output(dir / "config.json");
        out << config_to_json(config).dump(2) << '\n';
    }
    {
        const std::size_t initial_agents = config.mode == PopulationMode::Closed
                                               ? config.population
                                               : std::max<std::size_t>(1, config.initial_infected);
        auto out = open_output(dir / "population.csv");
        write_population_csv(out, synthesize_population(initial_agents, config.population_model, config.population_seed));
    }
    if (!options.quiet) {
        const auto& s = result.summary;
        std::cout << config.name << ": median peak " << s.peak_infected.median << " (q10 " << s.peak_infected.q10
                  << ", q90 " << s.peak_infected.q90 << ") on median day " << s.peak_day.median
                  << ", median attack rate " << s.attack_rate.median << "\n";
    }
    return result;
}

double sign_test_p_value(std::size_t negative, std::size_t positive)
{
    const std::size_t n = negative + positive;
    if (n == 0) {
        return 1.0;
    }
    const std::size_t k = std::min(negative, positive);
    double tail = 0.0;
    for (std::size_t i = 0; i <= k; ++i) {
        const double log_term = std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(i) + 1.0) -
                                std::lgamma(static_cast<double>(n - i) + 1.0) - static_cast<double>(n) * std::log(2.0);
        tail += std::exp(log_term);
    }
    return std::min(1.0, 2.0 * tail);
}

ComparisonTable compare_scenarios(const SummaryReport& baseline, const SummaryReport& variant)
{
    if (baseline.population != variant.population || baseline.days != variant.days) {
        throw ConfigError("", "summaries differ in population or days");
    }
    auto seeds_of = [](const SummaryReport& r) {
        std::vector<std::uint64_t> s;
        for (const auto& run : r.runs) {
            s.push_back(run.seed);
        }
        std::sort(s.begin(), s.end());
        return s;
    };
    ComparisonTable table;
    table.seeds = seeds_of(baseline);
    if (table.seeds != seeds_of(variant)) {
        throw ConfigError("runs", "seed sets differ; paired comparison needs identical seeds");
    }
    auto find = [](const SummaryReport& r, std::uint64_t seed) -> const SeedSummary& {
        return *std::find_if(r.runs.begin(), r.runs.end(), [seed](const SeedSummary& s) { return s.seed == seed; });
    };

    using Getter = double (*)(const SeedSummary&);
    const std::array<std::pair<const char*, Getter>, 4> metrics = {{
        {"peak_infected", [](const SeedSummary& s) { return static_cast<double>(s.peak_infected); }},
        {"peak_day", [](const SeedSummary& s) { return static_cast<double>(s.peak_day); }},
        {"attack_rate", [](const SeedSummary& s) { return s.attack_rate; }},
        {"total_dead", [](const SeedSummary& s) { return static_cast<double>(s.total_dead); }},
    }};
    for (const auto& [name, get] : metrics) {
        MetricComparison m;
        m.metric = name;
        for (auto seed : table.seeds) {
            const double d = get(find(variant, seed)) - get(find(baseline, seed));
            m.deltas.push_back(d);
            if (d < 0) {
                ++m.negative;
            } else if (d > 0) {
                ++m.positive;
            } else {
                ++m.zero;
            }
        }
        const auto dist = describe(m.deltas);
        m.mean_delta = dist.mean;
        m.median_delta = dist.median;
        m.sign_test_p = sign_test_p_value(m.negative, m.positive);
        table.metrics.push_back(std::move(m));
    }
    return table;
}

void write_comparison_csv(std::ostream& out, const ComparisonTable& table)
{
    out << "seed";
    for (const auto& m : table.metrics) {
        out << ",delta_" << m.metric;
    }
    out << '\n';
    const auto old = out.precision(10);
    for (std::size_t i = 0; i < table.seeds.size(); ++i) {
        out << table.seeds[i];
        for (const auto& m : table.metrics) {
            out << ',' << m.deltas[i];
        }
        out << '\n';
    }
    out.precision(old);
}

json comparison_to_json(const ComparisonTable& table)
{
    json metrics = json::object();
    for (const auto& m : table.metrics) {
        metrics[m.metric] = {{"mean_delta", m.mean_delta}, {"median_delta", m.median_delta},
                             {"negative", m.negative},     {"zero", m.zero},
                             {"positive", m.positive},     {"sign_test_p", m.sign_test_p}};
    }
    return {{"seeds", table.seeds}, {"metrics", metrics}};
}

AlignmentBatch validate_alignment(const ScenarioConfig& config, const RunOptions& options)
{
    config.validate();
    if (!config.strategies.empty()) {
        throw ConfigError("strategies", "alignment runs take no control strategies");
    }
    AlignmentBatch batch;
    const double i0 = static_cast<double>(config.initial_infected) / static_cast<double>(config.population);
    batch.ode_params = SirParams::from_r0(config.alignment.r0, config.alignment.infection_duration, i0, 0.0);
    batch.ode = integrate(batch.ode_params, static_cast<double>(config.days) + 1.0, config.alignment.ode_dt);

    std::vector<SeedRun> runs(config.run_seeds.size());
    parallel_for(runs.size(), options.threads, [&](std::size_t i) { runs[i] = simulate_seed(config, config.run_seeds[i]); });

    std::size_t unimodal = 0;
    std::size_t within = 0;
    for (const auto& r : runs) {
        AlignmentRun a{r.seed, align_abm(r.census, batch.ode, config.alignment.unimodal_tolerance)};
        unimodal += a.report.unimodal ? 1 : 0;
        within += std::abs(a.report.peak_day_difference) <= config.alignment.peak_day_window ? 1 : 0;
        batch.runs.push_back(std::move(a));
    }
    batch.unimodal_fraction = static_cast<double>(unimodal) / static_cast<double>(runs.size());
    batch.peak_within_window_fraction = static_cast<double>(within) / static_cast<double>(runs.size());

    if (options.write_files) {
        const fs::path dir = config.output_dir;
        prepare_output_dir(dir);
        for (const auto& a : batch.runs) {
            auto out = open_output(dir / seed_file("alignment", a.seed));
            out << "day,abm_s,abm_i,abm_r,ode_s,ode_i,ode_r\n";
            out.precision(10);
            const auto& rep = a.report;
            for (std::size_t d = 0; d < rep.abm_i.size(); ++d) {
                out << d << ',' << rep.abm_s[d] << ',' << rep.abm_i[d] << ',' << rep.abm_r[d] << ',' << rep.ode_s[d]
                    << ',' << rep.ode_i[d] << ',' << rep.ode_r[d] << '\n';
            }
        }
        {
            auto out = open_output(dir / "ode_trajectory.csv");
            write_trajectory_csv(out, batch.ode);
        }
        auto out = open_output(dir / "alignment_report.json");
        out << alignment_to_json(batch, config.alignment.peak_day_window).dump(2) << '\n';
    }
    if (!options.quiet) {
        const auto peak = peak_infected(batch.ode);
        std::cout << "ODE peak i = " << peak.i << " at t = " << peak.t << "; unimodal runs "
                  << batch.unimodal_fraction << ", peak within +/-" << config.alignment.peak_day_window << " days "
                  << batch.peak_within_window_fraction << '\n';
    }
    return batch;
}

json alignment_to_json(const AlignmentBatch& batch, int peak_day_window)
{
    json runs = json::array();
    for (const auto& a : batch.runs) {
        const auto& r = a.report;
        runs.push_back({{"seed", a.seed},
                        {"unimodal", r.unimodal},
                        {"abm_peak_day", r.abm_peak_day},
                        {"abm_peak", r.abm_peak},
                        {"ode_peak_day", r.ode_peak_day},
                        {"ode_peak", r.ode_peak},
                        {"peak_day_difference", r.peak_day_difference},
                        {"peak_height_difference", r.peak_height_difference},
                        {"rmse", r.rmse}});
    }
    const auto peak = peak_infected(batch.ode);
    return {{"ode",
             {{"r0", batch.ode_params.r0()},
              {"beta", batch.ode_params.beta},
              {"gamma", batch.ode_params.gamma},
              {"i0", batch.ode_params.i0},
              {"peak_t", peak.t},
              {"peak_i", peak.i}}},
            {"runs", runs},
            {"unimodal_fraction", batch.unimodal_fraction},
            {"peak_day_window", peak_day_window},
            {"peak_within_window_fraction", batch.peak_within_window_fraction}};
}

} // namespace flusim
