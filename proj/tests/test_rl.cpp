#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cmath>
#include <filesystem>
#include <string>

#include "hmasim/rl.hpp"
#include "hmasim/rng.hpp"

using namespace hmasim;
using Catch::Approx;

TEST_CASE("learning parameter invariants name the config keys") {
  LearningParams p;
  REQUIRE_NOTHROW(p.validate());
  p.alpha = 1.5;
  REQUIRE_THROWS_WITH(p.validate(), Catch::Matchers::ContainsSubstring("learning.alpha"));
  p = LearningParams{};
  p.epsilon = -0.1;
  REQUIRE_THROWS_WITH(p.validate(), Catch::Matchers::ContainsSubstring("learning.epsilon"));
  p = LearningParams{};
  p.gamma = 1.0;
  REQUIRE_THROWS_WITH(p.validate(), Catch::Matchers::ContainsSubstring("learning.gamma"));
}

TEST_CASE("q_update moves toward the target by alpha") {
  QTable q(2, 2);
  LearningParams p;
  p.alpha = 0.5;
  p.gamma = 0.0;
  q_update(q, 0, 0, 1.0, 1, p);
  REQUIRE(q.q(0, 0) == Approx(0.5));
  q_update(q, 0, 0, 1.0, 1, p);
  REQUIRE(q.q(0, 0) == Approx(0.75));
  // With gamma > 0 the bootstrap term enters.
  p.gamma = 0.9;
  q.set(1, 1, 2.0);
  q_update(q, 0, 1, 1.0, 1, p);
  REQUIRE(q.q(0, 1) == Approx(0.5 * (1.0 + 0.9 * 2.0)));
}

TEST_CASE("q_update rejects non-finite rewards and unknown states") {
  QTable q(2, 2);
  LearningParams p;
  REQUIRE_THROWS_AS(q_update(q, 0, 0, std::nan(""), 0, p), std::invalid_argument);
  REQUIRE_THROWS_AS(q_update(q, 5, 0, 1.0, 0, p), std::out_of_range);
}

TEST_CASE("constant reward makes Q converge to r/(1-gamma)") {
  QTable q(1, 1);
  LearningParams p;
  p.alpha = 0.1;
  p.gamma = 0.9;
  for (int i = 0; i < 5000; ++i) q_update(q, 0, 0, 1.0, 0, p);
  REQUIRE(q.q(0, 0) == Approx(10.0).epsilon(1e-6));
}

TEST_CASE("greedy selection breaks ties toward the lowest action id") {
  QTable q(1, 3);
  REQUIRE(q.best_action(0) == 0);
  q.set(0, 2, 1.0);
  REQUIRE(q.best_action(0) == 2);
  q.set(0, 1, 1.0);
  REQUIRE(q.best_action(0) == 1);
}

TEST_CASE("epsilon=0 always selects greedily") {
  QTable q(1, 4);
  q.set(0, 3, 5.0);
  LearningParams p;
  p.epsilon = 0.0;
  Rng rng(1);
  for (int i = 0; i < 100; ++i) REQUIRE(select_action(q, 0, p, rng) == 3);
}

TEST_CASE("epsilon=1 explores every action") {
  QTable q(1, 4);
  LearningParams p;
  p.epsilon = 1.0;
  Rng rng(2);
  std::array<int, 4> counts{};
  for (int i = 0; i < 4000; ++i) ++counts[select_action(q, 0, p, rng)];
  for (int c : counts) REQUIRE(c > 700);
}

TEST_CASE("two-armed bandit learns the better arm") {
  // Arm 0 pays 0.4, arm 1 pays 0.6 (deterministic).
  QTable q(1, 2);
  LearningParams p;  // defaults: alpha 0.1, epsilon 0.85, gamma 0.9
  Rng rng(123);
  for (int step = 0; step < 5000; ++step) {
    const std::size_t a = select_action(q, 0, p, rng);
    q_update(q, 0, a, a == 1 ? 0.6 : 0.4, 0, p);
  }
  REQUIRE(q.best_action(0) == 1);
}

TEST_CASE("QTable save/load round trip preserves all entries") {
  QTable q(3, 4);
  Rng rng(77);
  for (std::size_t s = 0; s < 3; ++s)
    for (std::size_t a = 0; a < 4; ++a) q.set(s, a, rng.uniform() * 2 - 1);
  const std::filesystem::path path =
      std::filesystem::temp_directory_path() / "hmasim_qtable_test.txt";
  q.save(path.string());
  QTable r(3, 4);
  r.load(path.string());
  for (std::size_t s = 0; s < 3; ++s)
    for (std::size_t a = 0; a < 4; ++a) REQUIRE(r.q(s, a) == q.q(s, a));
  std::filesystem::remove(path);
}

TEST_CASE("risk utility is identity at beta=0 and concave otherwise") {
  REQUIRE(risk_utility(0.7, 0.0) == Approx(0.7));
  REQUIRE(risk_utility(-3.0, 0.0) == Approx(-3.0));
  REQUIRE(risk_utility(0.0, 1.0) == Approx(0.0));
  // Jensen: utility of the mean exceeds the mean of utilities.
  const double a = 1.0, b = -1.0, beta = 1.0;
  REQUIRE(risk_utility((a + b) / 2, beta) >
          (risk_utility(a, beta) + risk_utility(b, beta)) / 2);
  // Monotone increasing.
  REQUIRE(risk_utility(1.0, 0.5) > risk_utility(0.5, 0.5));
  // Small beta approaches the identity.
  REQUIRE(risk_utility(0.5, 1e-9) == Approx(0.5).margin(1e-8));
}
