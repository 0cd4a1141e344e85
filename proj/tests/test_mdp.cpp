#include <doctest.h>

#include "vismax/gridworld.hpp"
#include "vismax/mdp.hpp"
#include "vismax/random_mdp.hpp"
#include "vismax/replay_buffer.hpp"

using namespace vismax;

namespace {

// Two states visited in turn, one action, reward 0.5 in state 0.
TabularMdp two_cycle(double gamma = 0.5) {
  Table p(2, 2);
  p << 0, 1, 1, 0;
  Vector p0(2);
  p0 << 1, 0;
  Table r(2, 1);
  r << 0.5, 0.0;
  return TabularMdp(p, p0, r, gamma);
}

Trajectory line_trajectory(std::size_t n_actions) {
  Trajectory t;
  for (std::size_t i = 0; i <= n_actions; ++i) t.states.push_back(i);
  for (std::size_t i = 0; i < n_actions; ++i) {
    t.actions.push_back(i % 2);
    t.rewards.push_back(static_cast<double>(i));
  }
  return t;
}

}  // namespace

TEST_CASE("mdp construction rejects broken inputs") {
  Table p(1, 1);
  p << 1.0;
  Vector p0 = Vector::Ones(1);
  Table r = Table::Zero(1, 1);
  CHECK_NOTHROW(TabularMdp(p, p0, r, 0.9));
  CHECK_THROWS_AS(TabularMdp(p, p0, r, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(TabularMdp(p, p0, r, -0.1), std::invalid_argument);
  Table bad = p;
  bad(0, 0) = 0.9;
  CHECK_THROWS_AS(TabularMdp(bad, p0, r, 0.9), std::invalid_argument);
  Vector bad_p0 = Vector::Constant(1, 0.5);
  CHECK_THROWS_AS(TabularMdp(p, bad_p0, r, 0.9), std::invalid_argument);
}

TEST_CASE("3x3 open grid has 36 states, 4 actions and 9 features") {
  auto spec = parse_grid_map(".../.../...", "open");
  auto w = build_gridworld(spec, 0.9);
  CHECK(w.mdp.n_states() == 36);
  CHECK(w.mdp.n_actions() == 4);
  CHECK(w.n_features() == 9);
  for (Eigen::Index i = 0; i < w.mdp.transition().rows(); ++i)
    CHECK(w.mdp.transition().row(i).sum() == doctest::Approx(1.0).epsilon(1e-12));
  for (Eigen::Index i = 0; i < w.features.h().rows(); ++i)
    CHECK(w.features.h().row(i).sum() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("gridworld dynamics") {
  auto spec = parse_grid_map("S.#/.../..G", "small");
  auto w = build_gridworld(spec, 0.9);
  Rng rng(3);

  SUBCASE("forward into a wall or the border stays put") {
    // (1,0) faces east into the wall at (2,0).
    const std::size_t s = w.state_of({1, 0}, Orientation::East);
    CHECK(step(w.mdp, s, kForward, rng).first == s);
    const std::size_t top = w.state_of({0, 0}, Orientation::North);
    CHECK(step(w.mdp, top, kForward, rng).first == top);
  }
  SUBCASE("forward moves one cell in the heading") {
    const std::size_t s = w.state_of({0, 0}, Orientation::East);
    CHECK(step(w.mdp, s, kForward, rng).first == w.state_of({1, 0}, Orientation::East));
    const std::size_t d = w.state_of({0, 0}, Orientation::South);
    CHECK(step(w.mdp, d, kForward, rng).first == w.state_of({0, 1}, Orientation::South));
  }
  SUBCASE("turns rotate the heading in place") {
    const std::size_t s = w.state_of({1, 1}, Orientation::East);
    CHECK(step(w.mdp, s, kTurnRight, rng).first == w.state_of({1, 1}, Orientation::South));
    CHECK(step(w.mdp, s, kTurnLeft, rng).first == w.state_of({1, 1}, Orientation::North));
  }
  SUBCASE("stand still is the identity for every state") {
    for (std::size_t s = 0; s < w.mdp.n_states(); ++s) CHECK(step(w.mdp, s, kStay, rng).first == s);
  }
  SUBCASE("goal is absorbing and pays 1 on every action") {
    for (int o = 0; o < 4; ++o) {
      const std::size_t g = w.state_of({2, 2}, static_cast<Orientation>(o));
      for (std::size_t a = 0; a < kGridActions; ++a) {
        auto [next, r] = step(w.mdp, g, a, rng);
        CHECK(next == g);
        CHECK(r == 1.0);
      }
    }
    CHECK(w.mdp.reward()(w.state_of({0, 0}, Orientation::East), kStay) == 0.0);
  }
  SUBCASE("features are positions, independent of heading and action") {
    const std::size_t s = w.state_of({1, 2}, Orientation::West);
    const std::size_t z = w.cell_index({1, 2});
    for (std::size_t a = 0; a < kGridActions; ++a) CHECK(w.features.h()(w.mdp.pair(s, a), z) == 1.0);
  }
  SUBCASE("fixed start puts all mass on one state") {
    CHECK(w.mdp.p0()(w.state_of({0, 0}, Orientation::East)) == 1.0);
  }
}

TEST_CASE("random start is uniform over free non-goal cells and headings") {
  auto w = build_gridworld(parse_grid_map("..#/..G", "r"), 0.9);
  // Four usable cells times four headings.
  const Vector& p0 = w.mdp.p0();
  CHECK(p0.sum() == doctest::Approx(1.0));
  CHECK(p0.maxCoeff() == doctest::Approx(1.0 / 16.0));
  for (int o = 0; o < 4; ++o) CHECK(p0(w.state_of({2, 1}, static_cast<Orientation>(o))) == 0.0);
}

TEST_CASE("empty free-cell set is a construction error") {
  CHECK_THROWS(build_gridworld(parse_grid_map("##/##", "walls"), 0.9));
}

TEST_CASE("built-in layouts render and rebuild") {
  for (const auto& name : builtin_layout_names()) {
    auto spec = make_layout(name);
    auto again = parse_grid_map(render_grid(spec), name);
    CHECK(render_grid(again) == render_grid(spec));
    CHECK_NOTHROW(build_gridworld(spec, 0.95));
  }
  CHECK(make_layout("empty-room").width == 5);
  CHECK_FALSE(make_layout("two-rooms-random").start.has_value());
  CHECK_THROWS(make_layout("no-such-layout"));
}

TEST_CASE("step on a deterministic cycle") {
  auto mdp = two_cycle();
  Rng rng(1);
  auto [next, r] = step(mdp, 0, 0, rng);
  CHECK(next == 1);
  CHECK(r == 0.5);
  CHECK_THROWS(step(mdp, 2, 0, rng));
  CHECK_THROWS(step(mdp, 0, 1, rng));
}

TEST_CASE("sample_episode") {
  auto mdp = two_cycle();
  Policy pi = uniform_policy(2, 1);
  Rng rng(5);
  SUBCASE("horizon 0 holds only s0") {
    auto t = sample_episode(mdp, pi, 0, rng);
    CHECK(t.states == std::vector<std::size_t>{0});
    CHECK(t.actions.empty());
    CHECK(t.rewards.empty());
  }
  SUBCASE("deterministic path") {
    auto t = sample_episode(mdp, pi, 5, rng);
    CHECK(t.states == std::vector<std::size_t>{0, 1, 0, 1, 0, 1});
    CHECK(t.rewards == std::vector<double>{0.5, 0, 0.5, 0, 0.5});
  }
  SUBCASE("identical seeds give identical trajectories") {
    Rng a(42), b(42);
    auto inst = random_instance({}, a);
    Rng c(9), d(9);
    auto t1 = sample_episode(inst.mdp, inst.policy, 50, c);
    auto t2 = sample_episode(inst.mdp, inst.policy, 50, d);
    CHECK(t1.states == t2.states);
    CHECK(t1.actions == t2.actions);
  }
}

TEST_CASE("make_segments drops the tail") {
  CHECK(make_segments(line_trajectory(5), 2).size() == 3);
  CHECK(make_segments(line_trajectory(2), 3).empty());
  for (std::size_t n = 1; n <= 6; ++n) CHECK(make_segments(line_trajectory(6), n).size() == 6 - std::min<std::size_t>(n, 6));

  auto segs = make_segments(line_trajectory(5), 2);
  for (std::size_t t = 0; t < segs.size(); ++t) {
    const auto& s = segs[t];
    CHECK(s.time_index == t);
    CHECK(s.anchor_state == t);
    CHECK(s.anchor_action == t % 2);
    CHECK(s.reward == static_cast<double>(t));
    REQUIRE(s.future.size() == 2);
    CHECK(s.future[0] == StateAction{t + 1, (t + 1) % 2});
    CHECK(s.future[1] == StateAction{t + 2, (t + 2) % 2});
    CHECK(s.next_state() == t + 1);
  }
}

TEST_CASE("make_segments with N = 1 is a transition plus the next action") {
  auto segs = make_segments(line_trajectory(3), 1);
  REQUIRE(segs.size() == 2);
  CHECK(segs[0].future.size() == 1);
  CHECK(segs[0].future[0] == StateAction{1, 1});
}

TEST_CASE("make_segments records behavior probabilities") {
  Policy beta(6, 2);
  for (Eigen::Index s = 0; s < 6; ++s) beta.row(s) << 0.25, 0.75;
  auto segs = make_segments(line_trajectory(5), 2, &beta);
  REQUIRE(!segs.empty());
  CHECK(segs[0].behavior_probs == std::vector<double>{0.75, 0.25});
}

TEST_CASE("replay buffer is FIFO and bounded") {
  ReplayBuffer buf(3);
  CHECK(buf.empty());
  for (std::size_t i = 0; i < 5; ++i) {
    NStepSegment s;
    s.time_index = i;
    s.future = {{0, 0}};
    buf.push(s);
    CHECK(buf.size() <= buf.capacity());
  }
  CHECK(buf.size() == 3);
  CHECK(buf.total_pushed() == 5);
  CHECK(buf.at(0).time_index == 2);
  CHECK(buf.at(1).time_index == 3);
  CHECK(buf.at(2).time_index == 4);
  Rng rng(0);
  for (std::size_t idx : buf.sample_indices(100, rng)) CHECK(idx < 3);
  CHECK_THROWS(ReplayBuffer(0));
}
