#include <doctest.h>

#include <algorithm>

#include "increloc/bench.hpp"
#include "increloc/relocalizer.hpp"

using namespace increloc;

namespace {

struct BudgetObserver : TrialObserver {
    std::size_t budget;
    std::size_t checked = 0;
    std::size_t violations = 0;
    std::size_t id_mismatch = 0;
    explicit BudgetObserver(std::size_t b) : budget(b) {}
    void on_step(const Relocalizer& reloc, const StepReport& report) override {
        for (std::size_t i = 0; i < reloc.hypotheses().size(); ++i) {
            if (reloc.hypotheses()[i].id != i) ++id_mismatch;
        }
        if (reloc.hypotheses().empty()) return;
        ++checked;
        if (report.pairs.consumed != budget || report.pairs.max_pair_memory > budget) ++violations;
    }
};

}  // namespace

TEST_CASE("no observations: nothing is generated and there is no estimate") {
    const GlobalMap gm({{0, 0}, {3, 4}}, Rect{{-5, -5}, {5, 5}});
    Relocalizer reloc(gm, SchemeConfig{}, SensorParams{}, 1);
    for (int k = 0; k < 5; ++k) {
        const auto rep = reloc.step({0.5, 0.0}, {});
        CHECK(rep.new_features == 0);
        CHECK(rep.new_hypotheses == 0);
        CHECK(rep.pairs.consumed == 0);
    }
    CHECK(reloc.viewpoint() == 5);
    CHECK_FALSE(reloc.estimate().has_value());
    CHECK(reloc.local_map().robot_pose().translation().x == doctest::Approx(2.5));
}

TEST_CASE("estimate is a pure query") {
    TrialConfig cfg = quick_config();
    const World world = generate_world(3, cfg.world);
    const GlobalMap gm = GlobalMap::from_world(world);
    Relocalizer reloc(gm, cfg.scheme, cfg.sensor, 3);
    Rng srng = make_stream(3, "sensor");
    Pose2 pose = start_pose(cfg.path);
    reloc.step({}, sense(world, pose, cfg.sensor, srng));
    for (int k = 0; k < 20; ++k) {
        pose = advance(pose, {0.5, 0.0});
        reloc.step({0.5, 0.0}, sense(world, pose, cfg.sensor, srng));
    }
    const auto before = reloc.hypotheses();
    const auto a = reloc.estimate();
    const auto b = reloc.estimate();
    REQUIRE(a.has_value());
    CHECK(a->hypothesis == b->hypothesis);
    CHECK(a->global_pose == b->global_pose);
    CHECK(reloc.hypotheses().size() == before.size());
    for (std::size_t i = 0; i < before.size(); ++i) CHECK(reloc.hypotheses()[i].q == before[i].q);
}

TEST_CASE("every scheme consumes exactly the budget once hypotheses exist") {
    for (Scheme s : {Scheme::depth, Scheme::breadth, Scheme::hybrid}) {
        TrialConfig cfg = quick_config();
        cfg.scheme.scheme = s;
        cfg.world.change_ratio = 0.2;
        cfg.seed = 5;
        cfg.record_series = false;
        BudgetObserver obs(cfg.scheme.preemption.budget);
        const TrialResult r = run_trial(cfg, &obs);
        CHECK(obs.checked > 50);
        CHECK(obs.violations == 0);
        CHECK(obs.id_mismatch == 0);
        CHECK(r.viewpoints == trajectory(cfg.path).size() + 1);
    }
}

TEST_CASE("all schemes see identical hypotheses for a seed") {
    std::vector<std::vector<Hypothesis>> stores;
    for (Scheme s : {Scheme::depth, Scheme::breadth, Scheme::hybrid}) {
        TrialConfig cfg = quick_config();
        cfg.scheme.scheme = s;
        cfg.scheme.preemption.retirement = false;
        const World world = generate_world(cfg.seed, cfg.world);
        const GlobalMap gm = GlobalMap::from_world(world);
        Relocalizer reloc(gm, cfg.scheme, cfg.sensor, cfg.seed);
        Rng srng = make_stream(cfg.seed, "sensor");
        Pose2 pose = start_pose(cfg.path);
        reloc.step({}, sense(world, pose, cfg.sensor, srng));
        for (const auto& c : trajectory(cfg.path)) {
            pose = advance(pose, c);
            reloc.step(c, sense(world, pose, cfg.sensor, srng));
        }
        stores.push_back(reloc.hypotheses());
    }
    REQUIRE(stores[0].size() == stores[1].size());
    REQUIRE(stores[0].size() == stores[2].size());
    for (std::size_t i = 0; i < stores[0].size(); ++i) {
        CHECK(stores[0][i].psi == stores[1][i].psi);
        CHECK(stores[0][i].psi == stores[2][i].psi);
    }
}

TEST_CASE("hybrid localizes on the quick world without landmark changes") {
    TrialConfig cfg = quick_config();
    cfg.world.change_ratio = 0.0;
    cfg.record_series = false;
    std::vector<double> errors;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        cfg.seed = seed;
        const TrialResult r = run_trial(cfg);
        REQUIRE(r.error_at_goal.has_value());
        errors.push_back(*r.error_at_goal);
    }
    std::sort(errors.begin(), errors.end());
    CHECK(errors[2] < 2.0);
}
