#include "flusim/scenario.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace flusim {

using nlohmann::json;

namespace {

// Walks one JSON object, tracking the key path and which keys were consumed.
class ObjectReader {
public:
    ObjectReader(const json& obj, std::string path) : obj_(obj), path_(std::move(path))
    {
        if (!obj_.is_object()) {
            throw ConfigError(path_, "expected an object");
        }
    }

    std::string child(std::string_view key) const
    {
        return path_.empty() ? std::string(key) : path_ + "." + std::string(key);
    }

    const json* find(std::string_view key)
    {
        seen_.emplace(key);
        auto it = obj_.find(std::string(key));
        return it == obj_.end() ? nullptr : &*it;
    }

    template <class T>
    void number(std::string_view key, T& out)
    {
        const json* v = find(key);
        if (!v) {
            return;
        }
        if constexpr (std::is_floating_point_v<T>) {
            if (!v->is_number()) {
                throw ConfigError(child(key), "expected a number");
            }
            out = v->get<T>();
        } else {
            if (!v->is_number_integer()) {
                throw ConfigError(child(key), "expected an integer");
            }
            if constexpr (std::is_unsigned_v<T>) {
                if (v->is_number_unsigned()) {
                    out = v->get<T>();
                } else {
                    const auto x = v->get<std::int64_t>();
                    if (x < 0) {
                        throw ConfigError(child(key), "must be non-negative");
                    }
                    out = static_cast<T>(x);
                }
            } else {
                out = v->get<T>();
            }
        }
    }

    void probability(std::string_view key, double& out)
    {
        number(key, out);
        if (!(out >= 0.0 && out <= 1.0)) {
            throw ConfigError(child(key), "probability must lie in [0, 1]");
        }
    }

    void string(std::string_view key, std::string& out)
    {
        const json* v = find(key);
        if (!v) {
            return;
        }
        if (!v->is_string()) {
            throw ConfigError(child(key), "expected a string");
        }
        out = v->get<std::string>();
    }

    template <std::size_t N>
    void number_array(std::string_view key, std::array<double, N>& out)
    {
        const json* v = find(key);
        if (!v) {
            return;
        }
        if (!v->is_array() || v->size() != N) {
            throw ConfigError(child(key), "expected an array of " + std::to_string(N) + " numbers");
        }
        for (std::size_t i = 0; i < N; ++i) {
            if (!(*v)[i].is_number()) {
                throw ConfigError(child(key) + "[" + std::to_string(i) + "]", "expected a number");
            }
            out[i] = (*v)[i].get<double>();
        }
    }

    void finish() const
    {
        for (auto it = obj_.begin(); it != obj_.end(); ++it) {
            if (!seen_.contains(it.key())) {
                throw ConfigError(child(it.key()), "unknown key");
            }
        }
    }

private:
    const json& obj_;
    std::string path_;
    std::set<std::string, std::less<>> seen_;
};

void read_range(ObjectReader& parent, std::string_view key, GroupSizeRange& out)
{
    const json* v = parent.find(key);
    if (!v) {
        return;
    }
    ObjectReader r(*v, parent.child(key));
    r.number("min", out.min);
    r.number("max", out.max);
    r.finish();
}

DiseaseParams read_disease(const json& v, const std::string& path)
{
    DiseaseParams d;
    ObjectReader r(v, path);
    r.number("latent_days", d.latent_days);
    r.probability("p_transmit", d.p_transmit);
    r.probability("p_quarantine", d.p_quarantine);
    r.probability("p_recover", d.p_recover);
    r.probability("p_dead", d.p_dead);
    r.probability("p_immunize", d.p_immunize);
    r.number("t_recover_min", d.t_recover_min);
    r.number("t_recover_max", d.t_recover_max);
    r.finish();
    try {
        d.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(path, e.what());
    }
    return d;
}

ControlStrategy read_strategy(const json& v, const std::string& path)
{
    ControlStrategy s;
    ObjectReader r(v, path);
    std::string kind;
    r.string("kind", kind);
    if (kind.empty()) {
        throw ConfigError(r.child("kind"), "required");
    }
    const auto k = control_kind_from_name(kind);
    if (!k) {
        throw ConfigError(r.child("kind"),
                          "unknown kind '" + kind + "' (awareness, vaccination, social_distancing, quarantining)");
    }
    s.kind = *k;
    r.number("coverage", s.coverage);
    if (!(s.coverage >= 0.0 && s.coverage <= 1.0)) {
        throw ConfigError(r.child("coverage"), "must lie in [0, 1]");
    }
    r.number("start_day", s.start_day);
    r.number("end_day", s.end_day);
    if (s.start_day < 0) {
        throw ConfigError(r.child("start_day"), "must be >= 0");
    }
    if (s.end_day < s.start_day) {
        throw ConfigError(r.child("end_day"), "must be >= start_day");
    }
    r.finish();
    return s;
}

json range_to_json(GroupSizeRange r) { return {{"min", r.min}, {"max", r.max}}; }

} // namespace

void ScenarioConfig::validate() const
{
    if (days < 1) {
        throw ConfigError("days", "must be >= 1");
    }
    if (population < 1) {
        throw ConfigError("population", "must be >= 1");
    }
    if (initial_infected > population) {
        throw ConfigError("initial_infected", "must not exceed population");
    }
    if (run_seeds.empty()) {
        throw ConfigError("run_seeds", "at least one seed required");
    }
    std::set<std::uint64_t> unique(run_seeds.begin(), run_seeds.end());
    if (unique.size() != run_seeds.size()) {
        throw ConfigError("run_seeds", "seeds must be distinct");
    }
    try {
        disease.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError("disease", e.what());
    }
    try {
        validate_strategies(strategies);
    } catch (const std::invalid_argument& e) {
        throw ConfigError("", e.what());
    }
    try {
        engine.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError("engine", e.what());
    }
    try {
        population_model.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError("population_model", e.what());
    }
    if (!(alignment.r0 > 0.0) || !(alignment.infection_duration > 0.0) || !(alignment.ode_dt > 0.0) ||
        !(alignment.unimodal_tolerance >= 0.0) || alignment.peak_day_window < 0) {
        throw ConfigError("alignment", "r0, infection_duration and ode_dt must be positive; tolerances non-negative");
    }
}

ScenarioConfig parse_config(std::string_view document)
{
    json doc;
    try {
        doc = json::parse(document);
    } catch (const json::parse_error& e) {
        throw ConfigError("", std::string("invalid JSON: ") + e.what());
    }
    ScenarioConfig c;
    ObjectReader r(doc, "");
    r.string("name", c.name);
    r.number("days", c.days);
    r.number("population", c.population);
    r.number("initial_infected", c.initial_infected);
    r.number("population_seed", c.population_seed);
    r.string("output_dir", c.output_dir);

    if (const json* seeds = r.find("run_seeds")) {
        if (!seeds->is_array()) {
            throw ConfigError("run_seeds", "expected an array of integers");
        }
        for (std::size_t i = 0; i < seeds->size(); ++i) {
            const auto& s = (*seeds)[i];
            if (!s.is_number_integer() || (!s.is_number_unsigned() && s.get<std::int64_t>() < 0)) {
                throw ConfigError("run_seeds[" + std::to_string(i) + "]", "expected a non-negative integer");
            }
            c.run_seeds.push_back(s.get<std::uint64_t>());
        }
    }
    if (c.run_seeds.empty()) {
        throw ConfigError("run_seeds", "at least one seed required");
    }

    std::string mode = "closed";
    r.string("mode", mode);
    if (mode == "closed") {
        c.mode = PopulationMode::Closed;
    } else if (mode == "open") {
        c.mode = PopulationMode::Open;
    } else {
        throw ConfigError("mode", "expected \"closed\" or \"open\"");
    }
    r.number("landscape_side", c.population_model.landscape_side);

    if (const json* d = r.find("disease")) {
        c.disease = read_disease(*d, "disease");
    }
    if (const json* s = r.find("strategies")) {
        if (!s->is_array()) {
            throw ConfigError("strategies", "expected an array");
        }
        for (std::size_t i = 0; i < s->size(); ++i) {
            c.strategies.push_back(read_strategy((*s)[i], "strategies[" + std::to_string(i) + "]"));
        }
    }
    if (const json* e = r.find("engine")) {
        ObjectReader er(*e, "engine");
        er.probability("p_network", c.engine.p_network);
        er.number("max_step", c.engine.max_step);
        er.number_array("step_multiplier", c.engine.step_multiplier);
        er.number("public_radius", c.engine.public_radius);
        er.finish();
    }
    if (const json* p = r.find("population_model")) {
        ObjectReader pr(*p, "population_model");
        pr.number_array("activity_shares", c.population_model.activity_shares);
        read_range(pr, "home_size", c.population_model.home_size);
        read_range(pr, "work_size", c.population_model.work_size);
        read_range(pr, "school_size", c.population_model.school_size);
        pr.finish();
    }
    if (const json* a = r.find("alignment")) {
        ObjectReader ar(*a, "alignment");
        ar.number("r0", c.alignment.r0);
        ar.number("infection_duration", c.alignment.infection_duration);
        ar.number("unimodal_tolerance", c.alignment.unimodal_tolerance);
        ar.number("ode_dt", c.alignment.ode_dt);
        ar.number("peak_day_window", c.alignment.peak_day_window);
        ar.finish();
    }
    r.finish();
    c.validate();
    return c;
}

ScenarioConfig load_config(const std::filesystem::path& file)
{
    std::ifstream in(file);
    if (!in) {
        throw ConfigError("", "cannot read config file " + file.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

json config_to_json(const ScenarioConfig& c)
{
    json strategies = json::array();
    for (const auto& s : c.strategies) {
        strategies.push_back({{"kind", control_kind_name(s.kind)},
                              {"coverage", s.coverage},
                              {"start_day", s.start_day},
                              {"end_day", s.end_day}});
    }
    const auto& d = c.disease;
    const auto& p = c.population_model;
    return {
        {"name", c.name},
        {"days", c.days},
        {"population", c.population},
        {"initial_infected", c.initial_infected},
        {"population_seed", c.population_seed},
        {"run_seeds", c.run_seeds},
        {"mode", c.mode == PopulationMode::Closed ? "closed" : "open"},
        {"landscape_side", p.landscape_side},
        {"output_dir", c.output_dir},
        {"disease",
         {{"latent_days", d.latent_days},
          {"p_transmit", d.p_transmit},
          {"p_quarantine", d.p_quarantine},
          {"p_recover", d.p_recover},
          {"p_dead", d.p_dead},
          {"p_immunize", d.p_immunize},
          {"t_recover_min", d.t_recover_min},
          {"t_recover_max", d.t_recover_max}}},
        {"strategies", strategies},
        {"engine",
         {{"p_network", c.engine.p_network},
          {"max_step", c.engine.max_step},
          {"step_multiplier", c.engine.step_multiplier},
          {"public_radius", c.engine.public_radius}}},
        {"population_model",
         {{"activity_shares", p.activity_shares},
          {"home_size", range_to_json(p.home_size)},
          {"work_size", range_to_json(p.work_size)},
          {"school_size", range_to_json(p.school_size)}}},
        {"alignment",
         {{"r0", c.alignment.r0},
          {"infection_duration", c.alignment.infection_duration},
          {"unimodal_tolerance", c.alignment.unimodal_tolerance},
          {"ode_dt", c.alignment.ode_dt},
          {"peak_day_window", c.alignment.peak_day_window}}},
    };
}

std::vector<std::uint64_t> parse_seed_list(std::string_view text)
{
    std::vector<std::uint64_t> seeds;
    auto parse_one = [](std::string_view s) {
        std::uint64_t v = 0;
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
            throw ConfigError("--seeds", "bad seed '" + std::string(s) + "'");
        }
        return v;
    };
    while (!text.empty()) {
        const auto comma = text.find(',');
        const auto item = text.substr(0, comma);
        const auto dash = item.find('-');
        if (dash == std::string_view::npos) {
            seeds.push_back(parse_one(item));
        } else {
            const auto lo = parse_one(item.substr(0, dash));
            const auto hi = parse_one(item.substr(dash + 1));
            if (hi < lo || hi - lo > 1'000'000) {
                throw ConfigError("--seeds", "bad range '" + std::string(item) + "'");
            }
            for (auto s = lo; s <= hi; ++s) {
                seeds.push_back(s);
            }
        }
        if (comma == std::string_view::npos) {
            break;
        }
        text.remove_prefix(comma + 1);
    }
    if (seeds.empty()) {
        throw ConfigError("--seeds", "at least one seed required");
    }
    return seeds;
}

} // namespace flusim
