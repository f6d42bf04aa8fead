#include "increloc/environment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace increloc {

void WorldParams::validate() const {
    if (bounds.degenerate()) throw InvalidParams("world bounds must have positive area");
    if (!bounds.contains(mapped_region)) throw InvalidParams("mapped_region must lie inside bounds");
    if (landmark_count < 0) throw InvalidParams("landmark_count must be non-negative");
    if (!(change_ratio >= 0.0 && change_ratio <= 1.0)) {
        throw InvalidParams("change_ratio must be in [0, 1]");
    }
}

World::World(Rect bounds, Rect mapped_region, double change_ratio, std::uint64_t seed,
             std::vector<Landmark> prior, std::vector<Landmark> truth)
    : bounds_(bounds),
      mapped_region_(mapped_region),
      change_ratio_(change_ratio),
      seed_(seed),
      prior_(std::move(prior)),
      truth_(std::move(truth)) {
    if (prior_.size() != truth_.size()) {
        throw InvalidParams("prior and true landmark lists differ in size");
    }
    build_grid();
}

void World::build_grid() {
    grid_origin_ = bounds_.min;
    grid_nx_ = std::max(1, static_cast<int>(std::ceil(bounds_.width() / cell_)));
    grid_ny_ = std::max(1, static_cast<int>(std::ceil(bounds_.height() / cell_)));
    grid_.assign(static_cast<std::size_t>(grid_nx_) * grid_ny_, {});
    for (std::size_t i = 0; i < truth_.size(); ++i) {
        const Point2 p = truth_[i].pos;
        const int cx = std::clamp(static_cast<int>((p.x - grid_origin_.x) / cell_), 0, grid_nx_ - 1);
        const int cy = std::clamp(static_cast<int>((p.y - grid_origin_.y) / cell_), 0, grid_ny_ - 1);
        grid_[static_cast<std::size_t>(cy) * grid_nx_ + cx].push_back(static_cast<std::uint32_t>(i));
    }
}

std::size_t World::moved_count() const {
    std::size_t n = 0;
    for (std::size_t i = 0; i < truth_.size(); ++i) {
        if (!(truth_[i].pos == prior_[i].pos)) ++n;
    }
    return n;
}

std::vector<std::size_t> World::true_landmarks_within(Point2 center, double radius) const {
    std::vector<std::size_t> out;
    if (grid_.empty()) return out;
    const auto cell_of = [&](double v, double origin, int n) {
        return std::clamp(static_cast<int>(std::floor((v - origin) / cell_)), 0, n - 1);
    };
    const int x0 = cell_of(center.x - radius, grid_origin_.x, grid_nx_);
    const int x1 = cell_of(center.x + radius, grid_origin_.x, grid_nx_);
    const int y0 = cell_of(center.y - radius, grid_origin_.y, grid_ny_);
    const int y1 = cell_of(center.y + radius, grid_origin_.y, grid_ny_);
    const double r2 = radius * radius;
    for (int cy = y0; cy <= y1; ++cy) {
        for (int cx = x0; cx <= x1; ++cx) {
            for (auto i : grid_[static_cast<std::size_t>(cy) * grid_nx_ + cx]) {
                if (squared_distance(truth_[i].pos, center) <= r2) out.push_back(i);
            }
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

World generate_world(std::uint64_t seed, const WorldParams& params) {
    params.validate();
    Rng rng = make_stream(seed, "world");
    const auto n = static_cast<std::size_t>(params.landmark_count);
    const Rect& b = params.bounds;

    std::vector<Landmark> prior(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = uniform(rng, b.min.x, b.max.x);
        const double y = uniform(rng, b.min.y, b.max.y);
        prior[i] = Landmark{static_cast<std::uint32_t>(i), Point2{x, y}};
    }
    std::vector<Landmark> truth = prior;
    std::bernoulli_distribution moved(params.change_ratio);
    for (auto& lm : truth) {
        if (moved(rng)) {
            const double x = uniform(rng, b.min.x, b.max.x);
            const double y = uniform(rng, b.min.y, b.max.y);
            lm.pos = Point2{x, y};
        }
    }
    return World(params.bounds, params.mapped_region, params.change_ratio, seed, std::move(prior),
                 std::move(truth));
}

std::vector<Observation> sense(const World& world, const Pose2& true_pose,
                               const SensorParams& sensor, Rng& rng) {
    std::vector<Observation> out;
    const Point2 origin = true_pose.translation();
    for (auto i : world.true_landmarks_within(origin, sensor.max_range)) {
        const Landmark& lm = world.landmarks_true()[i];
        const Point2 d = lm.pos - origin;
        const double range = norm(d);
        const double bearing = std::atan2(d.y, d.x) - true_pose.theta();
        Observation obs;
        obs.track_id = lm.id;
        obs.range = range + gaussian(rng, sensor.sigma_range);
        obs.bearing = normalize_angle(bearing + gaussian(rng, sensor.sigma_bearing));
        out.push_back(obs);
    }
    return out;
}

Pose2 advance(const Pose2& pose, MotionCommand command) {
    return compose(pose, Pose2(command.d_rot, Pose2(command.d_rot, Point2{}).rotate({command.d_trans, 0.0})));
}

StepResult step_robot(const Pose2& true_pose, MotionCommand command, const MotionParams& motion,
                      Rng& rng) {
    StepResult r;
    r.pose = advance(true_pose, command);
    r.odometry.d_trans =
        command.d_trans + gaussian(rng, motion.sigma_fraction * std::abs(command.d_trans));
    r.odometry.d_rot = command.d_rot + gaussian(rng, motion.sigma_fraction * std::abs(command.d_rot));
    return r;
}

std::vector<MotionCommand> trajectory(const TrajectoryParams& params) {
    std::vector<MotionCommand> out;
    const Point2 d = params.goal - params.start;
    const double length = norm(d);
    if (length <= 0.0) return out;
    if (!(params.step_length > 0.0)) throw InvalidParams("step_length must be positive");

    const double turn = normalize_angle(std::atan2(d.y, d.x) - params.initial_heading);
    if (turn != 0.0) out.push_back({0.0, turn});

    const auto full = static_cast<std::size_t>(std::floor(length / params.step_length + 1e-9));
    out.insert(out.end(), full, MotionCommand{params.step_length, 0.0});
    const double rest = length - static_cast<double>(full) * params.step_length;
    if (rest > 1e-9) out.push_back({rest, 0.0});
    return out;
}

namespace {

constexpr const char* kWorldMagic = "# increloc-world v1";

void write_rect(std::ostream& out, const char* key, const Rect& r) {
    out << key << ' ' << r.min.x << ' ' << r.min.y << ' ' << r.max.x << ' ' << r.max.y << '\n';
}

Rect read_rect(std::istringstream& line) {
    Rect r;
    line >> r.min.x >> r.min.y >> r.max.x >> r.max.y;
    return r;
}

}  // namespace

void write_world(std::ostream& out, const World& world) {
    const auto flags = out.flags();
    const auto precision = out.precision();
    out << std::setprecision(17);
    out << kWorldMagic << '\n';
    write_rect(out, "bounds", world.bounds());
    write_rect(out, "mapped_region", world.mapped_region());
    out << "change_ratio " << world.change_ratio() << '\n';
    out << "seed " << world.seed() << '\n';
    out << "landmarks " << world.landmarks_true().size() << '\n';
    for (std::size_t i = 0; i < world.landmarks_true().size(); ++i) {
        const Landmark& p = world.landmarks_prior()[i];
        const Landmark& t = world.landmarks_true()[i];
        out << p.id << ' ' << p.pos.x << ' ' << p.pos.y << ' ' << t.pos.x << ' ' << t.pos.y << '\n';
    }
    out.flags(flags);
    out.precision(precision);
}

World read_world(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != kWorldMagic) {
        throw InvalidParams("world file: missing '" + std::string(kWorldMagic) + "' header");
    }
    Rect bounds{}, mapped{};
    double ratio = 0.0;
    std::uint64_t seed = 0;
    std::size_t count = 0;
    bool have_count = false;
    while (!have_count && std::getline(in, line)) {
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        if (key == "bounds") bounds = read_rect(ls);
        else if (key == "mapped_region") mapped = read_rect(ls);
        else if (key == "change_ratio") ls >> ratio;
        else if (key == "seed") ls >> seed;
        else if (key == "landmarks") { ls >> count; have_count = true; }
        else if (key.empty() || key[0] == '#') continue;
        else throw InvalidParams("world file: unknown header key '" + key + "'");
        if (ls.fail()) throw InvalidParams("world file: malformed header line '" + line + "'");
    }
    if (!have_count) throw InvalidParams("world file: missing 'landmarks' line");

    std::vector<Landmark> prior, truth;
    prior.reserve(count);
    truth.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        Landmark p, t;
        if (!(in >> p.id >> p.pos.x >> p.pos.y >> t.pos.x >> t.pos.y)) {
            throw InvalidParams("world file: truncated landmark list at entry " + std::to_string(i));
        }
        t.id = p.id;
        prior.push_back(p);
        truth.push_back(t);
    }
    return World(bounds, mapped, ratio, seed, std::move(prior), std::move(truth));
}

void save_world(const std::string& path, const World& world) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    write_world(out, world);
}

World load_world(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return read_world(in);
}

}  // namespace increloc
