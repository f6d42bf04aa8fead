#include "increloc/bench.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <tuple>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace increloc {

namespace {

std::string fmt_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& s, const std::string& key) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        throw ConfigError(key + ": expected a number, got '" + s + "'");
    }
    return v;
}

std::uint64_t parse_uint(const std::string& s, const std::string& key) {
    std::uint64_t v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        throw ConfigError(key + ": expected a non-negative integer, got '" + s + "'");
    }
    return v;
}

bool parse_bool(const std::string& s, const std::string& key) {
    if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "0" || s == "no" || s == "off") return false;
    throw ConfigError(key + ": expected true/false, got '" + s + "'");
}

std::vector<double> parse_numbers(const std::string& s, const std::string& key, std::size_t expected) {
    std::istringstream in(s);
    std::vector<double> out;
    std::string tok;
    while (in >> tok) out.push_back(parse_double(tok, key));
    if (out.size() != expected) {
        throw ConfigError(key + ": expected " + std::to_string(expected) + " numbers, got '" + s + "'");
    }
    return out;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string rect_str(const Rect& r) {
    return fmt_double(r.min.x) + ' ' + fmt_double(r.min.y) + ' ' + fmt_double(r.max.x) + ' ' + fmt_double(r.max.y);
}

auto sort_key(const TrialResult& r) { return std::make_tuple(r.change_ratio, static_cast<int>(r.scheme), r.seed); }

}  // namespace

void TrialConfig::validate() const {
    try {
        world.validate();
    } catch (const InvalidParams& e) {
        throw ConfigError(std::string("world: ") + e.what());
    }
    if (!(path.step_length > 0.0)) throw ConfigError("step_length: must be positive");
    if (!(sensor.max_range > 0.0)) throw ConfigError("sensor.max_range: must be positive");
    if (sensor.sigma_range < 0.0) throw ConfigError("sensor.sigma_range: must be non-negative");
    if (sensor.sigma_bearing < 0.0) throw ConfigError("sensor.sigma_bearing: must be non-negative");
    if (motion.sigma_fraction < 0.0) throw ConfigError("motion.sigma_fraction: must be non-negative");
    if (scheme.preemption.budget == 0) throw ConfigError("budget: must be at least 1");
    if (scheme.preemption.groups < 1) throw ConfigError("groups: must be at least 1");
    if (scheme.preemption.priming_fraction < 0.0 || scheme.preemption.priming_fraction > 1.0) {
        throw ConfigError("priming_fraction: must be in [0, 1]");
    }
    if (!(scheme.generation.gate > 0.0)) throw ConfigError("gate: must be positive");
    if (scheme.generation.pair_tolerance < 0.0) throw ConfigError("pair_tolerance: must be non-negative");
}

TrialConfig default_config() { return TrialConfig{}; }

TrialConfig quick_config() {
    TrialConfig cfg;
    cfg.world.bounds = Rect{{-100.0, -25.0}, {100.0, 25.0}};
    cfg.world.mapped_region = Rect{{-100.0, -5.0}, {100.0, 5.0}};
    cfg.world.landmark_count = 1250;
    cfg.path.start = {0.0, -25.0};
    cfg.path.goal = {0.0, 25.0};
    return cfg;
}

bool same_outcome(const TrialResult& a, const TrialResult& b) {
    const auto tie_series = [](const ViewpointRecord& r) {
        return std::tie(r.viewpoint, r.observations, r.features, r.hypotheses, r.new_hypotheses, r.consumed, r.scored,
                        r.max_pair_memory, r.best_ratio, r.best_group, r.group_sizes, r.allocation);
    };
    if (a.series.size() != b.series.size()) return false;
    for (std::size_t i = 0; i < a.series.size(); ++i) {
        if (tie_series(a.series[i]) != tie_series(b.series[i])) return false;
    }
    return std::tie(a.change_ratio, a.scheme, a.seed, a.error_at_goal, a.estimate, a.true_goal, a.confidence,
                    a.features, a.hypotheses, a.retired, a.viewpoints) ==
           std::tie(b.change_ratio, b.scheme, b.seed, b.error_at_goal, b.estimate, b.true_goal, b.confidence,
                    b.features, b.hypotheses, b.retired, b.viewpoints);
}

TrialResult run_trial(const TrialConfig& cfg, TrialObserver* observer) {
    cfg.validate();
    const World world = generate_world(cfg.seed, cfg.world);
    return run_trial(cfg, world, observer);
}

TrialResult run_trial(const TrialConfig& cfg, const World& world, TrialObserver* observer) {
    cfg.validate();
    const GlobalMap gm = GlobalMap::from_world(world);
    Relocalizer reloc(gm, cfg.scheme, cfg.sensor, cfg.seed);
    Rng sensor_rng = make_stream(cfg.seed, "sensor");
    Rng odometry_rng = make_stream(cfg.seed, "odometry");

    TrialResult result;
    result.change_ratio = world.change_ratio();
    result.scheme = cfg.scheme.scheme;
    result.seed = cfg.seed;

    Pose2 pose = start_pose(cfg.path);
    const auto record = [&](const StepReport& report, std::size_t observations, double seconds) {
        if (observer) observer->on_step(reloc, report);
        if (!cfg.record_series) return;
        ViewpointRecord v;
        v.viewpoint = report.viewpoint;
        v.observations = observations;
        v.features = reloc.local_map().size();
        v.hypotheses = reloc.hypotheses().size();
        v.new_hypotheses = report.new_hypotheses;
        v.consumed = report.pairs.consumed;
        v.scored = report.pairs.scored;
        v.max_pair_memory = report.pairs.max_pair_memory;
        v.group_sizes = report.pairs.group_sizes;
        v.allocation = report.pairs.allocation;
        if (const auto est = reloc.estimate()) {
            v.best_ratio = est->confidence;
            v.best_group = classify(reloc.hypotheses()[est->hypothesis], cfg.scheme.preemption.groups);
        }
        v.step_seconds = seconds;
        result.series.push_back(std::move(v));
    };
    const auto timed_step = [&](const OdometryMeasurement& odo) {
        const auto obs = sense(world, pose, cfg.sensor, sensor_rng);
        const auto t0 = std::chrono::steady_clock::now();
        const StepReport report = reloc.step(odo, obs);
        const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
        record(report, obs.size(), dt.count());
    };

    timed_step(OdometryMeasurement{});
    for (const MotionCommand& cmd : trajectory(cfg.path)) {
        const StepResult moved = step_robot(pose, cmd, cfg.motion, odometry_rng);
        pose = moved.pose;
        timed_step(moved.odometry);
    }

    result.true_goal = pose;
    result.viewpoints = reloc.viewpoint();
    result.features = reloc.local_map().size();
    result.hypotheses = reloc.hypotheses().size();
    result.retired = static_cast<std::size_t>(std::count_if(
        reloc.hypotheses().begin(), reloc.hypotheses().end(), [](const Hypothesis& h) { return h.retired; }));
    if (const auto est = reloc.estimate()) {
        result.estimate = est->global_pose;
        result.confidence = est->confidence;
        result.error_at_goal = distance(est->global_pose.translation(), pose.translation());
    }
    return result;
}

std::vector<TrialConfig> expand_grid(const TrialConfig& base, const SweepGrid& grid) {
    std::vector<double> ratios = grid.ratios;
    std::vector<Scheme> schemes = grid.schemes;
    std::vector<std::uint64_t> seeds = grid.seeds;
    std::sort(ratios.begin(), ratios.end());
    std::sort(schemes.begin(), schemes.end());
    std::sort(seeds.begin(), seeds.end());
    std::vector<TrialConfig> out;
    for (double r : ratios) {
        for (Scheme s : schemes) {
            for (std::uint64_t seed : seeds) {
                TrialConfig cfg = base;
                cfg.world.change_ratio = r;
                cfg.scheme.scheme = s;
                cfg.seed = seed;
                out.push_back(cfg);
            }
        }
    }
    return out;
}

namespace {

std::string describe(const TrialConfig& cfg) {
    return "ratio=" + fmt_double(cfg.world.change_ratio) + " scheme=" + std::string(to_string(cfg.scheme.scheme)) +
           " seed=" + std::to_string(cfg.seed);
}

SweepOutcome collect(std::vector<std::optional<TrialResult>>& slots, std::vector<std::string>& errors) {
    SweepOutcome out;
    for (std::size_t i = 0; i < slots.size(); ++i) {
        if (slots[i]) out.results.push_back(std::move(*slots[i]));
        else out.failures.push_back(errors[i]);
    }
    std::stable_sort(out.results.begin(), out.results.end(),
                     [](const TrialResult& a, const TrialResult& b) { return sort_key(a) < sort_key(b); });
    return out;
}

}  // namespace

SweepOutcome sweep_serial(const std::vector<TrialConfig>& cfgs) {
    std::vector<std::optional<TrialResult>> slots(cfgs.size());
    std::vector<std::string> errors(cfgs.size());
    for (std::size_t i = 0; i < cfgs.size(); ++i) {
        try {
            slots[i] = run_trial(cfgs[i]);
        } catch (const std::exception& e) {
            errors[i] = describe(cfgs[i]) + ": " + e.what();
        }
    }
    return collect(slots, errors);
}

SweepOutcome sweep_parallel(const std::vector<TrialConfig>& cfgs, int threads) {
    std::vector<std::optional<TrialResult>> slots(cfgs.size());
    std::vector<std::string> errors(cfgs.size());
    const auto n = static_cast<std::int64_t>(cfgs.size());
#ifdef _OPENMP
    const int nthreads = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 1) num_threads(nthreads)
#endif
    for (std::int64_t i = 0; i < n; ++i) {
        const auto k = static_cast<std::size_t>(i);
        try {
            slots[k] = run_trial(cfgs[k]);
        } catch (const std::exception& e) {
            errors[k] = describe(cfgs[k]) + ": " + e.what();
        }
    }
    (void)threads;
    return collect(slots, errors);
}

std::vector<SummaryRow> summarize(const std::vector<TrialResult>& results) {
    std::map<std::pair<double, int>, std::vector<double>> groups;
    std::map<std::pair<double, int>, std::size_t> missing;
    for (const TrialResult& r : results) {
        const auto key = std::make_pair(r.change_ratio, static_cast<int>(r.scheme));
        groups[key].push_back(r.error_at_goal.value_or(std::numeric_limits<double>::infinity()));
        if (!r.error_at_goal) ++missing[key];
    }
    std::vector<SummaryRow> rows;
    for (auto& [key, errs] : groups) {
        std::sort(errs.begin(), errs.end());
        SummaryRow row;
        row.change_ratio = key.first;
        row.scheme = static_cast<Scheme>(key.second);
        row.trials = errs.size();
        row.no_estimate = missing[key];
        const std::size_t mid = errs.size() / 2;
        row.median_error = errs.size() % 2 == 1 ? errs[mid] : 0.5 * (errs[mid - 1] + errs[mid]);
        rows.push_back(row);
    }
    return rows;
}

namespace {

constexpr const char* kResultsMagic = "# increloc-results v1";
constexpr const char* kResultsHeader =
    "change_ratio,scheme,seed,status,error_at_goal,est_x,est_y,est_theta,goal_x,goal_y,goal_theta,"
    "confidence,features,hypotheses,retired,viewpoints";

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) out.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

}  // namespace

void write_results_csv(std::ostream& out, const std::vector<TrialResult>& results) {
    out << kResultsMagic << '\n' << kResultsHeader << '\n';
    for (const TrialResult& r : results) {
        out << fmt_double(r.change_ratio) << ',' << to_string(r.scheme) << ',' << r.seed << ','
            << (r.error_at_goal ? "ok" : "no_estimate") << ',';
        if (r.error_at_goal) {
            out << fmt_double(*r.error_at_goal) << ',' << fmt_double(r.estimate->translation().x) << ','
                << fmt_double(r.estimate->translation().y) << ',' << fmt_double(r.estimate->theta()) << ',';
        } else {
            out << ",,,,";
        }
        out << fmt_double(r.true_goal.translation().x) << ',' << fmt_double(r.true_goal.translation().y) << ','
            << fmt_double(r.true_goal.theta()) << ',' << fmt_double(r.confidence) << ',' << r.features << ','
            << r.hypotheses << ',' << r.retired << ',' << r.viewpoints << '\n';
    }
}

std::vector<TrialResult> read_results_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != kResultsMagic) {
        throw ConfigError("results csv: missing '" + std::string(kResultsMagic) + "' header");
    }
    if (!std::getline(in, line) || line != kResultsHeader) throw ConfigError("results csv: unexpected column header");
    std::vector<TrialResult> out;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto c = split_csv(line);
        if (c.size() != 16) throw ConfigError("results csv: expected 16 columns in '" + line + "'");
        TrialResult r;
        r.change_ratio = parse_double(c[0], "change_ratio");
        const auto scheme = parse_scheme(c[1]);
        if (!scheme) throw ConfigError("results csv: unknown scheme '" + c[1] + "'");
        r.scheme = *scheme;
        r.seed = parse_uint(c[2], "seed");
        if (c[3] == "ok") {
            r.error_at_goal = parse_double(c[4], "error_at_goal");
            r.estimate = Pose2(parse_double(c[5], "est_x"), parse_double(c[6], "est_y"),
                               parse_double(c[7], "est_theta"));
        } else if (c[3] != "no_estimate") {
            throw ConfigError("results csv: unknown status '" + c[3] + "'");
        }
        r.true_goal = Pose2(parse_double(c[8], "goal_x"), parse_double(c[9], "goal_y"), parse_double(c[10], "goal_theta"));
        r.confidence = parse_double(c[11], "confidence");
        r.features = parse_uint(c[12], "features");
        r.hypotheses = parse_uint(c[13], "hypotheses");
        r.retired = parse_uint(c[14], "retired");
        r.viewpoints = parse_uint(c[15], "viewpoints");
        out.push_back(std::move(r));
    }
    return out;
}

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows) {
    out << "# increloc-summary v1\n";
    out << "change_ratio,scheme,trials,no_estimate,median_error\n";
    for (const SummaryRow& r : rows) {
        out << fmt_double(r.change_ratio) << ',' << to_string(r.scheme) << ',' << r.trials << ',' << r.no_estimate
            << ',' << (std::isinf(r.median_error) ? std::string("inf") : fmt_double(r.median_error)) << '\n';
    }
}

void write_diagnostics_csv(std::ostream& out, const TrialResult& result) {
    out << "# increloc-diagnostics v1\n";
    out << "viewpoint,observations,features,hypotheses,new_hypotheses,consumed,scored,max_pair_memory,best_ratio,best_group";
    std::size_t groups = 0;
    for (const auto& v : result.series) groups = std::max(groups, v.group_sizes.size());
    for (std::size_t i = 0; i < groups; ++i) out << ",n" << i;
    for (std::size_t i = 0; i < groups; ++i) out << ",alloc" << i;
    out << ",step_us\n";
    for (const auto& v : result.series) {
        out << v.viewpoint << ',' << v.observations << ',' << v.features << ',' << v.hypotheses << ',' << v.new_hypotheses << ','
            << v.consumed << ',' << v.scored << ',' << v.max_pair_memory << ',' << fmt_double(v.best_ratio) << ','
            << v.best_group;
        for (std::size_t i = 0; i < groups; ++i) out << ',' << (i < v.group_sizes.size() ? v.group_sizes[i] : 0);
        for (std::size_t i = 0; i < groups; ++i) out << ',' << (i < v.allocation.size() ? v.allocation[i] : 0);
        out << ',' << static_cast<long long>(std::llround(v.step_seconds * 1e6)) << '\n';
    }
}

void apply_setting(TrialConfig& cfg, const std::string& key, const std::string& value) {
    auto& pre = cfg.scheme.preemption;
    auto& gen = cfg.scheme.generation;
    if (key == "seed") cfg.seed = parse_uint(value, key);
    else if (key == "scheme") {
        const auto s = parse_scheme(value);
        if (!s) throw ConfigError("scheme: expected depth, breadth or hybrid, got '" + value + "'");
        cfg.scheme.scheme = *s;
    }
    else if (key == "change_ratio") cfg.world.change_ratio = parse_double(value, key);
    else if (key == "landmarks") cfg.world.landmark_count = static_cast<std::int64_t>(parse_uint(value, key));
    else if (key == "bounds") {
        const auto v = parse_numbers(value, key, 4);
        cfg.world.bounds = Rect{{v[0], v[1]}, {v[2], v[3]}};
    } else if (key == "mapped_region") {
        const auto v = parse_numbers(value, key, 4);
        cfg.world.mapped_region = Rect{{v[0], v[1]}, {v[2], v[3]}};
    } else if (key == "start") {
        const auto v = parse_numbers(value, key, 2);
        cfg.path.start = {v[0], v[1]};
    } else if (key == "goal") {
        const auto v = parse_numbers(value, key, 2);
        cfg.path.goal = {v[0], v[1]};
    }
    else if (key == "initial_heading") cfg.path.initial_heading = parse_double(value, key);
    else if (key == "step_length") cfg.path.step_length = parse_double(value, key);
    else if (key == "sensor.max_range") cfg.sensor.max_range = parse_double(value, key);
    else if (key == "sensor.sigma_range") cfg.sensor.sigma_range = parse_double(value, key);
    else if (key == "sensor.sigma_bearing") cfg.sensor.sigma_bearing = parse_double(value, key);
    else if (key == "sensor.sigma_bearing_deg") cfg.sensor.sigma_bearing = parse_double(value, key) * std::numbers::pi / 180.0;
    else if (key == "motion.sigma_fraction") cfg.motion.sigma_fraction = parse_double(value, key);
    else if (key == "budget") pre.budget = parse_uint(value, key);
    else if (key == "groups") pre.groups = static_cast<int>(parse_uint(value, key));
    else if (key == "exponent") pre.exponent = parse_double(value, key);
    else if (key == "priming_fraction") pre.priming_fraction = parse_double(value, key);
    else if (key == "resample_retries") pre.resample_retries = static_cast<int>(parse_uint(value, key));
    else if (key == "clip_to_footprint") pre.clip_to_footprint = parse_bool(value, key);
    else if (key == "selection_radius") pre.selection_radius = parse_double(value, key);
    else if (key == "selection_attempts") pre.selection_attempts = static_cast<int>(parse_uint(value, key));
    else if (key == "breadth_newest_first") pre.breadth_newest_first = parse_bool(value, key);
    else if (key == "retirement") pre.retirement = parse_bool(value, key);
    else if (key == "retire_min_q") pre.retire_min_q = static_cast<std::uint32_t>(parse_uint(value, key));
    else if (key == "retire_max_ratio") pre.retire_max_ratio = parse_double(value, key);
    else if (key == "gate") gen.gate = parse_double(value, key);
    else if (key == "pair_tolerance") gen.pair_tolerance = parse_double(value, key);
    else if (key == "max_new") gen.max_new = parse_uint(value, key);
    else if (key == "max_triples") gen.max_triples = parse_uint(value, key);
    else if (key == "max_candidates") gen.max_candidates = parse_uint(value, key);
    else if (key == "q_min") cfg.scheme.q_min = static_cast<std::uint32_t>(parse_uint(value, key));
    else if (key == "record_series") cfg.record_series = parse_bool(value, key);
    else throw ConfigError(key + ": unknown setting");
}

TrialConfig parse_config(std::istream& in, TrialConfig base) {
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
        }
        apply_setting(base, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    base.validate();
    return base;
}

TrialConfig load_config(const std::string& path, TrialConfig base) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path);
    return parse_config(in, std::move(base));
}

void write_config(std::ostream& out, const TrialConfig& cfg) {
    const auto& pre = cfg.scheme.preemption;
    const auto& gen = cfg.scheme.generation;
    out << "# increloc trial config v1\n"
        << "seed = " << cfg.seed << '\n'
        << "scheme = " << to_string(cfg.scheme.scheme) << '\n'
        << "change_ratio = " << fmt_double(cfg.world.change_ratio) << '\n'
        << "landmarks = " << cfg.world.landmark_count << '\n'
        << "bounds = " << rect_str(cfg.world.bounds) << '\n'
        << "mapped_region = " << rect_str(cfg.world.mapped_region) << '\n'
        << "start = " << fmt_double(cfg.path.start.x) << ' ' << fmt_double(cfg.path.start.y) << '\n'
        << "goal = " << fmt_double(cfg.path.goal.x) << ' ' << fmt_double(cfg.path.goal.y) << '\n'
        << "initial_heading = " << fmt_double(cfg.path.initial_heading) << '\n'
        << "step_length = " << fmt_double(cfg.path.step_length) << '\n'
        << "sensor.max_range = " << fmt_double(cfg.sensor.max_range) << '\n'
        << "sensor.sigma_range = " << fmt_double(cfg.sensor.sigma_range) << '\n'
        << "sensor.sigma_bearing = " << fmt_double(cfg.sensor.sigma_bearing) << "  # radians\n"
        << "motion.sigma_fraction = " << fmt_double(cfg.motion.sigma_fraction) << '\n'
        << "budget = " << pre.budget << '\n'
        << "groups = " << pre.groups << '\n'
        << "exponent = " << fmt_double(pre.exponent) << '\n'
        << "priming_fraction = " << fmt_double(pre.priming_fraction) << '\n'
        << "resample_retries = " << pre.resample_retries << '\n'
        << "clip_to_footprint = " << (pre.clip_to_footprint ? "true" : "false") << '\n'
        << "selection_radius = " << fmt_double(pre.selection_radius) << '\n'
        << "selection_attempts = " << pre.selection_attempts << '\n'
        << "breadth_newest_first = " << (pre.breadth_newest_first ? "true" : "false") << '\n'
        << "retirement = " << (pre.retirement ? "true" : "false") << '\n'
        << "retire_min_q = " << pre.retire_min_q << '\n'
        << "retire_max_ratio = " << fmt_double(pre.retire_max_ratio) << '\n'
        << "gate = " << fmt_double(gen.gate) << '\n'
        << "pair_tolerance = " << fmt_double(gen.pair_tolerance) << '\n'
        << "max_new = " << gen.max_new << '\n'
        << "max_triples = " << gen.max_triples << '\n'
        << "max_candidates = " << gen.max_candidates << '\n'
        << "q_min = " << cfg.scheme.q_min << '\n'
        << "record_series = " << (cfg.record_series ? "true" : "false") << '\n';
}

}  // namespace increloc
