#pragma once

// Scenario batches: JSON configs, seeded Monte Carlo runs, CSV/JSON output,
// paired comparisons and the ODE alignment check.

#include "flusim/control_strategy.hpp"
#include "flusim/disease_model.hpp"
#include "flusim/engine.hpp"
#include "flusim/population.hpp"
#include "flusim/sir_baseline.hpp"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace flusim {

/// Invalid configuration or summary document; `path` names the offending key.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string path, const std::string& message)
        : std::runtime_error(path.empty() ? message : path + ": " + message), path_(std::move(path))
    {
    }
    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

struct AlignmentSettings {
    double r0 = 3.0;
    double infection_duration = 9.5;
    double unimodal_tolerance = 0.05;
    double ode_dt = 0.05;
    int peak_day_window = 5;
    bool operator==(const AlignmentSettings&) const = default;
};

struct ScenarioConfig {
    std::string name = "scenario";
    int days = 50;
    std::size_t population = 1000;
    std::size_t initial_infected = 3;
    std::uint64_t population_seed = 0;
    std::vector<std::uint64_t> run_seeds;
    PopulationMode mode = PopulationMode::Closed;
    DiseaseParams disease;
    std::vector<ControlStrategy> strategies;
    EngineConfig engine;
    PopulationConfig population_model; // also holds landscape_side
    AlignmentSettings alignment;
    std::string output_dir = "output";

    /// Throws ConfigError.
    void validate() const;
    bool operator==(const ScenarioConfig&) const = default;
};

/// Parses and validates a JSON document. Absent fields take their defaults;
/// unknown keys are rejected. Throws ConfigError.
ScenarioConfig parse_config(std::string_view document);
ScenarioConfig load_config(const std::filesystem::path& file);
nlohmann::json config_to_json(const ScenarioConfig& config);

/// Comma-separated seeds and inclusive ranges: "1,2,5-9". Throws ConfigError.
std::vector<std::uint64_t> parse_seed_list(std::string_view text);

struct SeedRun {
    std::uint64_t seed = 0;
    std::vector<DailyCensus> census;
    SocialTypeBreakdown social_types{};
    std::optional<double> estimated_R;
    std::size_t population = 0;
};

/// One full simulation for one run seed.
SeedRun simulate_seed(const ScenarioConfig& config, std::uint64_t seed);

struct Distribution {
    double mean = 0.0;
    double median = 0.0;
    double q10 = 0.0;
    double q90 = 0.0;
};

/// Linear-interpolation quantile of unsorted values, q in [0, 1].
double quantile(std::vector<double> values, double q);
Distribution describe(std::span<const double> values);

struct SeedSummary {
    std::uint64_t seed = 0;
    std::size_t peak_infected = 0;
    int peak_day = 0;
    double attack_rate = 0.0;
    std::size_t total_dead = 0;
    std::size_t cumulative_infected = 0;
    std::array<std::size_t, kHealthStateCount> final_counts{};
    SocialTypeBreakdown social_types{};
    std::optional<double> estimated_R;
};

struct SummaryReport {
    std::string name;
    std::size_t population = 0;
    int days = 0;
    std::vector<SeedSummary> runs;
    Distribution peak_infected;
    Distribution peak_day;
    Distribution attack_rate;
    Distribution total_dead;
    std::optional<Distribution> estimated_R;
};

SeedSummary summarize(const SeedRun& run);
SummaryReport summarize(const ScenarioConfig& config, std::span<const SeedRun> runs);
nlohmann::json summary_to_json(const SummaryReport& report);
/// Throws ConfigError.
SummaryReport summary_from_json(const nlohmann::json& doc);

struct RunOptions {
    bool quiet = true;
    bool write_files = true;
    std::size_t threads = 0; // 0: hardware concurrency
};

struct ScenarioResult {
    SummaryReport summary;
    std::vector<SeedRun> runs;
};

/// Runs every seed (in parallel) and, when write_files is set, writes into
/// config.output_dir:
///   census_seed<k>.csv, social_types_seed<k>.csv, aggregate.csv,
///   social_types.csv, summary.json, config.json, population.csv
/// Throws std::runtime_error when the directory is unwritable.
ScenarioResult run_scenario(const ScenarioConfig& config, const RunOptions& options = {});

// Columns: day,S,C,E,I,Q,NQ,D,R,M,new_infections,cumulative_infected
void write_census_csv(std::ostream& out, std::span<const DailyCensus> census);
// Rows: social types; columns: S..M
void write_social_type_csv(std::ostream& out, const SocialTypeBreakdown& table);
// Per-day mean/median/q10/q90 across seeds of each state, the infected aggregate and cumulative_infected.
void write_aggregate_csv(std::ostream& out, std::span<const SeedRun> runs);

struct MetricComparison {
    std::string metric;
    std::vector<double> deltas; // variant - baseline, per paired seed
    double mean_delta = 0.0;
    double median_delta = 0.0;
    std::size_t negative = 0;
    std::size_t zero = 0;
    std::size_t positive = 0;
    double sign_test_p = 1.0; // two-sided, ties dropped
};

struct ComparisonTable {
    std::vector<std::uint64_t> seeds;
    std::vector<MetricComparison> metrics; // peak_infected, peak_day, attack_rate, total_dead
};

/// Pairs runs by seed. Throws ConfigError when seeds, population or days differ.
ComparisonTable compare_scenarios(const SummaryReport& baseline, const SummaryReport& variant);
double sign_test_p_value(std::size_t negative, std::size_t positive);
void write_comparison_csv(std::ostream& out, const ComparisonTable& table);
nlohmann::json comparison_to_json(const ComparisonTable& table);

struct AlignmentRun {
    std::uint64_t seed = 0;
    AlignmentReport report;
};

struct AlignmentBatch {
    SirParams ode_params;
    SirTrajectory ode;
    std::vector<AlignmentRun> runs;
    double unimodal_fraction = 0.0;
    double peak_within_window_fraction = 0.0;
};

/// ABM runs against the matching ODE (i0 = initial_infected / population).
/// Rejects configs with control strategies. Writes alignment_seed<k>.csv,
/// ode_trajectory.csv and alignment_report.json when write_files is set.
AlignmentBatch validate_alignment(const ScenarioConfig& config, const RunOptions& options = {});
nlohmann::json alignment_to_json(const AlignmentBatch& batch, int peak_day_window);

} // namespace flusim
