#include "afqm/oracle.hpp"

#include <cmath>
#include <complex>

#include "doctest.h"

#include "afqm/errors.hpp"
#include "test_util.hpp"

using namespace afqm;
using namespace afqm::oracle;
using testing::random_policy;
using testing::random_state;
using cd = std::complex<double>;

TEST_CASE("symmetrize maps Dicke slots onto equal-weight strings") {
  const auto up = symmetrize(SymmetricState({cd(1.0), cd(0.0)}));
  CHECK(std::abs(up.amps[0] - cd(1.0)) < 1e-15);
  CHECK(std::abs(up.amps[1]) < 1e-15);

  const auto w = symmetrize(SymmetricState({cd(0.0), cd(1.0), cd(0.0)}));
  CHECK(std::abs(w.amps[0b01] - cd(1.0 / std::sqrt(2.0))) < 1e-15);
  CHECK(std::abs(w.amps[0b10] - cd(1.0 / std::sqrt(2.0))) < 1e-15);
  CHECK(std::abs(w.amps[0b00]) < 1e-15);
  CHECK(std::abs(w.amps[0b11]) < 1e-15);
}

TEST_CASE("symmetrize is an isometry") {
  Rng rng(3);
  for (int rep = 0; rep < 10; ++rep) {
    const int m = 1 + int(rng.below(8));
    const auto a = random_state(m, rng);
    const auto b = random_state(m, rng);
    const auto fa = symmetrize(a);
    const auto fb = symmetrize(b);
    CHECK(std::abs(fa.norm() - 1.0) < 1e-12);
    cd full_overlap = 0.0;
    for (std::size_t i = 0; i < fa.amps.size(); ++i)
      full_overlap += std::conj(fa.amps[i]) * fb.amps[i];
    CHECK(std::abs(full_overlap - testing::overlap(a, b)) < 1e-12);
  }
  CHECK_THROWS_AS(symmetrize(build_css(13)), std::invalid_argument);
}

TEST_CASE("full_rotate_qubit flips exactly the addressed qubit") {
  FullState two;
  two.n = 2;
  two.amps = {cd(1.0), cd(0.0), cd(0.0), cd(0.0)};  // |up,up>
  const auto flipped = full_rotate_qubit(two, 1, Axis::Y, kPi);
  CHECK(std::abs(std::abs(flipped.amps[0b10]) - 1.0) < 1e-12);
  CHECK(std::abs(flipped.amps[0b00]) < 1e-12);

  const auto same = full_rotate_qubit(two, 0, Axis::X, 0.0);
  CHECK(std::abs(same.amps[0] - cd(1.0)) < 1e-15);
}

TEST_CASE("full_measure_qubit is the textbook projective measurement") {
  FullState up;
  up.n = 1;
  up.amps = {cd(1.0), cd(0.0)};
  const auto sure = full_measure_qubit(up, 0, 0.999);
  CHECK(sure.prob_up == doctest::Approx(1.0));
  CHECK(sure.up);

  FullState bell;
  bell.n = 2;
  bell.amps = {cd(0.0), cd(1.0 / std::sqrt(2.0)), cd(1.0 / std::sqrt(2.0)),
               cd(0.0)};
  const auto res = full_measure_qubit(bell, 0, 0.3);
  CHECK(res.prob_up == doctest::Approx(0.5).epsilon(1e-12));
  REQUIRE(res.up);  // remaining qubit must be down
  CHECK(std::abs(std::abs(res.state.amps[1]) - 1.0) < 1e-12);
}

TEST_CASE("trial lockstep: Dicke engine equals the full-register engine") {
  Rng meta(77);
  const NoiseConfig noiseless{};
  const NoiseConfig noisy{0.3, 0.4};
  for (const auto kind : {StateKind::Sine, StateKind::CSS, StateKind::SSS}) {
    for (int n = kind == StateKind::SSS ? 2 : 1; n <= 6; ++n) {
      const auto policy = random_policy(kind, 4, meta, n);
      const auto input = make_input_state(kind, n, policy);
      for (const auto& noise : {noiseless, noisy}) {
        for (int rep = 0; rep < 10; ++rep) {
          const auto seed = meta.raw();
          Rng r1(seed), r2(seed);
          const auto a = run_trial(input, policy, noise, r1);
          const auto b = run_trial_full(input, policy, noise, r2);
          REQUIRE(a.outcomes.size() == b.outcomes.size());
          for (std::size_t i = 0; i < a.outcomes.size(); ++i)
            CHECK(a.outcomes[i] == b.outcomes[i]);
          CHECK(a.lost_count == b.lost_count);
          CHECK(std::abs(a.estimate - b.estimate) < 1e-12);
          CHECK(a.true_phase == b.true_phase);
        }
      }
    }
  }
}

TEST_CASE("enumerated outcome distributions agree across engines") {
  Rng meta(2718);
  for (int rep = 0; rep < 8; ++rep) {
    const int n = 2 + int(meta.below(4));  // 2..5
    const auto state = random_state(n, meta);
    const auto policy = random_policy(StateKind::Sine, 4, meta, n);
    const double phi = meta.uniform_angle();
    const double phi0 = meta.uniform_angle();
    std::vector<double> eps(n);
    std::vector<std::uint8_t> lost(n);
    for (int q = 0; q < n; ++q) {
      eps[q] = rep % 2 ? 0.4 * meta.normal() : 0.0;
      lost[q] = rep % 2 && meta.uniform() < 0.3 ? 1 : 0;
    }
    const auto a = enumerate_paths_dicke(state, policy, phi, phi0, eps, lost);
    const auto b = enumerate_paths_full(state, policy, phi, phi0, eps, lost);
    REQUIRE(a.size() == b.size());
    double total = 0.0;
    for (const auto& e : a) total += e.prob;
    CHECK(std::abs(total - 1.0) < 1e-12);
    CHECK(total_variation(a, b) < 1e-9);
    for (std::size_t i = 0; i < a.size(); ++i)
      if (a[i].prob > 1e-12)
        CHECK(std::abs(a[i].phi_final - b[i].phi_final) < 1e-9);
  }
}

TEST_CASE("sequential split-measure distribution matches the oracle at m=5") {
  Rng meta(5150);
  const auto state = random_state(5, meta);
  const auto policy = random_policy(StateKind::Sine, 4, meta, 5);
  const std::vector<double> eps(5, 0.0);
  const std::vector<std::uint8_t> lost(5, 0);
  const auto a = enumerate_paths_dicke(state, policy, 0.71, -0.2, eps, lost);
  const auto b = enumerate_paths_full(state, policy, 0.71, -0.2, eps, lost);
  REQUIRE(a.size() == 32);
  CHECK(total_variation(a, b) < 1e-9);
}
