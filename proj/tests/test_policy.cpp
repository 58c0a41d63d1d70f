#include "afqm/policy.hpp"

#include <cmath>
#include <cstring>

#include "doctest.h"

#include "afqm/errors.hpp"
#include "afqm/rng.hpp"
#include "test_util.hpp"

using namespace afqm;

namespace {

InverseScalingPolicy make(double wp, std::vector<double> coeffs,
                          StateKind kind = StateKind::Sine,
                          std::optional<double> cs = std::nullopt) {
  InverseScalingPolicy p;
  p.wp = wp;
  p.coeffs = std::move(coeffs);
  p.state_kind = kind;
  p.squeeze_coeff = cs;
  return p;
}

}  // namespace

TEST_CASE("delta evaluates the inverse-power expansion") {
  const auto p = make(1.0, {1.0, 0.0, 0.0, 0.0});
  CHECK(delta(p, 1) == doctest::Approx(kPi / 2.0).epsilon(1e-14));
  CHECK(delta(p, 3) == doctest::Approx(kPi / 4.0).epsilon(1e-14));

  const auto q = make(0.5, {1.0, 1.0, 0.0, 0.0});
  const double want = kPi / std::sqrt(5.0) + kPi / std::pow(5.0, 1.5);
  CHECK(delta(q, 4) == doctest::Approx(want).epsilon(1e-14));
  CHECK(delta(q, 4) == doctest::Approx(1.6859555354497742).epsilon(1e-12));

  CHECK_THROWS_AS(delta(p, 0), std::invalid_argument);
}

TEST_CASE("delta is strictly decreasing for nonnegative coefficients") {
  Rng rng(31);
  for (int rep = 0; rep < 50; ++rep) {
    InverseScalingPolicy p;
    p.wp = 0.05 + 5.0 * rng.uniform();
    p.coeffs.resize(1 + rng.below(4));
    for (auto& c : p.coeffs) c = 5.0 * rng.uniform();
    if (std::all_of(p.coeffs.begin(), p.coeffs.end(),
                    [](double c) { return c == 0.0; }))
      p.coeffs[0] = 1.0;
    for (int n = 1; n < 100; ++n) CHECK(delta(p, n + 1) < delta(p, n));
    // tail decay
    CHECK(delta(p, 1000000) < delta(p, 1000));
    CHECK(delta(p, 1000) < delta(p, 100));
  }
}

TEST_CASE("update_compensation applies -2 s Delta and wraps") {
  CHECK(update_compensation(0.0, 0.5, kPi / 2.0) ==
        doctest::Approx(-kPi / 2.0).epsilon(1e-14));
  CHECK(update_compensation(0.0, -0.5, kPi / 2.0) ==
        doctest::Approx(kPi / 2.0).epsilon(1e-14));
  CHECK(update_compensation(-3.0, 0.5, 0.5) ==
        doctest::Approx(2.0 * kPi - 3.5).epsilon(1e-12));

  Rng rng(17);
  for (int rep = 0; rep < 200; ++rep) {
    const double out = update_compensation(20.0 * (rng.uniform() - 0.5),
                                           rng.uniform() < 0.5 ? 0.5 : -0.5,
                                           10.0 * rng.uniform());
    CHECK(out >= -kPi);
    CHECK(out < kPi);
  }
}

TEST_CASE("squeeze_time scales as n^(-2/3) and respects the cap") {
  auto p = make(1.0, {1.0}, StateKind::SSS, 0.6);
  CHECK(squeeze_time(p, 1000) == doctest::Approx(0.006).epsilon(1e-12));

  p.squeeze_coeff = 0.0;
  CHECK(squeeze_time(p, 64) == 0.0);

  p.squeeze_coeff = 10.0;  // hits the 2/sqrt(n) cap
  CHECK(squeeze_time(p, 16) == doctest::Approx(0.5).epsilon(1e-14));

  const auto sine = make(1.0, {1.0});
  CHECK_THROWS_AS(squeeze_time(sine, 8), InvalidStateError);
}

TEST_CASE("search box bounds") {
  const auto box = SearchBox::policy_box(StateKind::SSS, 4, 64);
  REQUIRE(box.dim() == 6);
  CHECK(box.low[0] == 0.0);
  CHECK(box.high[0] == 5.0);
  for (int d = 1; d <= 4; ++d) {
    CHECK(box.low[d] == -5.0);
    CHECK(box.high[d] == 5.0);
  }
  CHECK(box.low[5] == 0.0);
  CHECK(box.high[5] == doctest::Approx(4.0).epsilon(1e-12));  // 2 * 64^(1/6)

  SearchBox degenerate{{0.0, 1.0}, {0.0, 2.0}};
  CHECK_THROWS_AS(degenerate.validate(), std::invalid_argument);
  CHECK(SearchBox::policy_box(StateKind::Sine, 4, 8).dim() == 5);
}

TEST_CASE("encode/decode round-trips the parameter layout") {
  Rng rng(4);
  for (const auto kind : {StateKind::Sine, StateKind::CSS, StateKind::SSS}) {
    const auto p = testing::random_policy(kind, 4, rng, 32);
    const auto x = encode_policy(p);
    const auto q = decode_policy(x, kind, 4, 32);
    CHECK(q.wp == p.wp);
    CHECK(q.coeffs == p.coeffs);
    CHECK(q.squeeze_coeff == p.squeeze_coeff);
  }
  CHECK_THROWS_AS(decode_policy({1.0, 2.0}, StateKind::Sine, 4, 8),
                  std::invalid_argument);
}

TEST_CASE("serialization round-trip is bit exact") {
  Rng rng(11);
  for (const auto kind : {StateKind::Sine, StateKind::CSS, StateKind::SSS}) {
    PolicyRecord rec;
    rec.policy = testing::random_policy(kind, 4, rng, 48);
    rec.policy.wp = 0.1 + 1e-17;  // awkward mantissa on purpose
    rec.training_seed = 0xDEADBEEFCAFEBABEull;
    rec.cost = 3.0303e-2;
    rec.cost_seed = 42;
    rec.cost_trials = 92160;
    const auto back = deserialize(serialize(rec));
    CHECK(std::memcmp(&back.policy.wp, &rec.policy.wp, sizeof(double)) == 0);
    CHECK(back.policy.coeffs == rec.policy.coeffs);
    CHECK(back.policy.squeeze_coeff == rec.policy.squeeze_coeff);
    CHECK(back.policy.state_kind == rec.policy.state_kind);
    CHECK(back.policy.n_trained == rec.policy.n_trained);
    CHECK(back.training_seed == rec.training_seed);
    CHECK(std::memcmp(&back.cost, &rec.cost, sizeof(double)) == 0);
    CHECK(back.cost_seed == rec.cost_seed);
    CHECK(back.cost_trials == rec.cost_trials);
    CHECK(serialize(back) == serialize(rec));
  }
}

TEST_CASE("deserialize rejects malformed records with the field path") {
  PolicyRecord rec;
  rec.policy = make(0.8, {1.0, 0.0, 0.0, 0.0});
  const std::string good = serialize(rec);

  {
    auto broken = good;
    const auto pos = broken.find("\"wp\"");
    broken.replace(pos, 4, "\"zz\"");
    try {
      deserialize(broken);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      const bool named = e.field() == "wp" || e.field() == "zz";
      CHECK(named);
    }
  }
  {
    // squeeze_coeff on a sine-state record violates the invariant
    auto broken = good;
    broken.insert(broken.rfind('}'), ",\"squeeze_coeff\": 0.5");
    CHECK_THROWS_AS(deserialize(broken), ParseError);
  }
  {
    auto broken = good;
    broken.insert(broken.rfind('}'), ",\"mystery\": 1");
    try {
      deserialize(broken);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.field() == "mystery");
    }
  }
  CHECK_THROWS_AS(deserialize("not json at all"), ParseError);
}

TEST_CASE("policy_id is stable and content addressed") {
  PolicyRecord rec;
  rec.policy = make(0.8, {1.0, 0.0});
  const auto id1 = policy_id(rec);
  CHECK(id1.size() == 12);
  rec.policy.wp = 0.800000001;
  CHECK(policy_id(rec) != id1);
}
