#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "increloc/environment.hpp"
#include "increloc/relocalizer.hpp"

namespace increloc {

/// Raised for invalid configuration; the message names the offending key.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct TrialConfig {
    WorldParams world;
    TrajectoryParams path;
    SensorParams sensor;
    MotionParams motion;
    SchemeConfig scheme;
    std::uint64_t seed = 1;
    /// Keep per-viewpoint records in the result.
    bool record_series = true;

    void validate() const;
};

/// Full-size world: 800 x 200 m, 20000 landmarks.
TrialConfig default_config();
/// 200 x 50 m world with 1250 landmarks (same density), mapped band
/// [-100, 100] x [-5, 5], drive from (0, -25) to (0, 25).
TrialConfig quick_config();

struct ViewpointRecord {
    std::uint32_t viewpoint = 0;
    std::size_t observations = 0;
    std::size_t features = 0;
    std::size_t hypotheses = 0;
    std::size_t new_hypotheses = 0;
    std::size_t consumed = 0;
    std::size_t scored = 0;
    std::size_t max_pair_memory = 0;
    double best_ratio = -1.0;
    int best_group = -1;
    std::vector<std::size_t> group_sizes;
    std::vector<std::size_t> allocation;
    double step_seconds = 0.0;  ///< wall time; excluded from deterministic outputs
};

struct TrialResult {
    double change_ratio = 0.0;
    Scheme scheme = Scheme::hybrid;
    std::uint64_t seed = 0;
    /// Distance from the estimated to the true final position; empty when no
    /// estimate exists.
    std::optional<double> error_at_goal;
    std::optional<Pose2> estimate;
    Pose2 true_goal;
    double confidence = 0.0;
    std::size_t features = 0;
    std::size_t hypotheses = 0;
    std::size_t retired = 0;
    std::size_t viewpoints = 0;
    std::vector<ViewpointRecord> series;

    /// Equality on the deterministic fields (timings ignored).
    friend bool same_outcome(const TrialResult& a, const TrialResult& b);
};

/// Observer for per-viewpoint instrumentation (budget checks in tests).
struct TrialObserver {
    virtual ~TrialObserver() = default;
    virtual void on_step(const Relocalizer& reloc, const StepReport& report) = 0;
};

TrialResult run_trial(const TrialConfig& cfg, TrialObserver* observer = nullptr);

/// Runs the trajectory in an already generated world.
TrialResult run_trial(const TrialConfig& cfg, const World& world, TrialObserver* observer = nullptr);

struct SweepGrid {
    std::vector<double> ratios;
    std::vector<Scheme> schemes;
    std::vector<std::uint64_t> seeds;
};

/// Trial configs for every (ratio, scheme, seed), sorted by that key.
std::vector<TrialConfig> expand_grid(const TrialConfig& base, const SweepGrid& grid);

struct SweepOutcome {
    std::vector<TrialResult> results;   ///< sorted by (ratio, scheme, seed)
    std::vector<std::string> failures;  ///< one message per failed trial
};

/// Reference: trials one after another.
SweepOutcome sweep_serial(const std::vector<TrialConfig>& cfgs);
/// Trials distributed over OpenMP threads; same output as sweep_serial.
SweepOutcome sweep_parallel(const std::vector<TrialConfig>& cfgs, int threads = 0);

struct SummaryRow {
    double change_ratio = 0.0;
    Scheme scheme = Scheme::hybrid;
    std::size_t trials = 0;
    std::size_t no_estimate = 0;
    /// Median over trials with an estimate; NoEstimate trials count as +inf.
    double median_error = 0.0;
};

std::vector<SummaryRow> summarize(const std::vector<TrialResult>& results);

// Results CSV: one row per trial, versioned header comment.
void write_results_csv(std::ostream& out, const std::vector<TrialResult>& results);
std::vector<TrialResult> read_results_csv(std::istream& in);
void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows);
/// Per-viewpoint diagnostics: group sizes, allocations, best ratio/group.
void write_diagnostics_csv(std::ostream& out, const TrialResult& result);

// Config file: flat `key = value` lines, '#' comments.
TrialConfig parse_config(std::istream& in, TrialConfig base = default_config());
TrialConfig load_config(const std::string& path, TrialConfig base = default_config());
void write_config(std::ostream& out, const TrialConfig& cfg);
/// Applies one `key`/`value` setting; throws ConfigError naming the key.
void apply_setting(TrialConfig& cfg, const std::string& key, const std::string& value);

}  // namespace increloc
