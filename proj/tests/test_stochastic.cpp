#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "cogrelay/stochastic.hpp"

using namespace cogrelay;

namespace {

// Independent reference for stationary distributions: power iteration on
// the explicit 2x2 row-stochastic matrix, no closed form involved.
double power_iteration_p1(double p00, double p10) {
  double pi0 = 1.0, pi1 = 0.0;
  for (int i = 0; i < 400; ++i) {
    const double n0 = pi0 * p00 + pi1 * p10;
    const double n1 = pi0 * (1.0 - p00) + pi1 * (1.0 - p10);
    pi0 = n0;
    pi1 = n1;
  }
  return pi1;
}

}  // namespace

TEST_CASE("arrival chain follows the inverse-cdf transition rule") {
  const MmbpParams p{0.4, 0.7};
  CHECK(mmbp_next(ArrivalChainState{0}, p, 0.39).had_arrival == 0);
  CHECK(mmbp_next(ArrivalChainState{0}, p, 0.41).had_arrival == 1);
  CHECK(mmbp_next(ArrivalChainState{1}, p, 0.69).had_arrival == 0);
  CHECK(mmbp_next(ArrivalChainState{1}, p, 0.71).had_arrival == 1);
}

TEST_CASE("absorbing arrival parameters pin the chain") {
  RngStream rng(7);
  ArrivalChainState s{0};
  const MmbpParams never{1.0, 0.5};
  for (int i = 0; i < 200; ++i) {
    const auto [next, arrival] = mmbp_step(s, never, rng);
    CHECK(next.had_arrival == 0);
    CHECK(arrival == 0);
    s = next;
  }
  // beta = 1 forces a transition out of the arrival state every slot.
  const MmbpParams bounce{0.0, 1.0};
  CHECK(mmbp_next(ArrivalChainState{1}, bounce, 0.999).had_arrival == 0);
  CHECK(mmbp_next(ArrivalChainState{0}, bounce, 0.001).had_arrival == 1);
}

TEST_CASE("arrival indicator equals the post-transition chain state") {
  RngStream rng(11);
  ArrivalChainState s{0};
  const MmbpParams p{0.3, 0.6};
  for (int i = 0; i < 1000; ++i) {
    const MmbpStep step = mmbp_step(s, p, rng);
    CHECK(step.arrival == step.next.had_arrival);
    s = step.next;
  }
}

TEST_CASE("stationary arrival probability closed form") {
  CHECK(mmbp_stationary_arrival_prob({1.0, 0.5}) == doctest::Approx(0.0));
  CHECK(mmbp_stationary_arrival_prob({0.4, 0.4}) == doctest::Approx(0.6));
  for (double x : {0.0, 0.25, 0.5, 0.8, 1.0}) {
    if (x == 1.0) continue;  // degenerate pair handled below
    CHECK(mmbp_stationary_arrival_prob({x, x}) == doctest::Approx(1.0 - x));
  }
  CHECK_THROWS_AS(mmbp_stationary_arrival_prob({1.0, 0.0}),
                  std::domain_error);
}

TEST_CASE("stationary arrival probability matches power iteration") {
  const double params[][2] = {{0.5, 0.5}, {0.8, 0.4}, {0.1, 0.9},
                              {0.95, 0.2}, {0.3, 0.05}};
  for (const auto& pq : params) {
    const MmbpParams p{pq[0], pq[1]};
    // Chain rows: from 0 stay with prob lambda, from 1 leave with prob beta.
    const double expected = power_iteration_p1(p.lambda, p.beta);
    CHECK(mmbp_stationary_arrival_prob(p) ==
          doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("channel transitions follow the inverse-cdf rule") {
  const ChannelParams p{0.2, 0.4};
  CHECK(channel_next(ChannelState{0}, p, 0.19).connected == 1);
  CHECK(channel_next(ChannelState{0}, p, 0.21).connected == 0);
  CHECK(channel_next(ChannelState{1}, p, 0.39).connected == 0);
  CHECK(channel_next(ChannelState{1}, p, 0.41).connected == 1);

  RngStream rng(3);
  ChannelState on{1};
  const ChannelParams sticky{0.5, 0.0};
  for (int i = 0; i < 200; ++i) {
    on = channel_step(on, sticky, rng);
    CHECK(on.connected == 1);
  }
  const ChannelParams always{1.0, 0.3};
  CHECK(channel_next(ChannelState{0}, always, 0.999).connected == 1);
}

TEST_CASE("stationary on probability closed form") {
  CHECK(channel_stationary_on_prob({0.2, 0.4}) ==
        doctest::Approx(1.0 / 3.0));
  CHECK(channel_stationary_on_prob({0.5, 0.0}) == doctest::Approx(1.0));
  CHECK(channel_stationary_on_prob({0.8, 0.05}) ==
        doctest::Approx(16.0 / 17.0));
  CHECK_THROWS_AS(channel_stationary_on_prob({0.0, 0.0}), std::domain_error);

  const double params[][2] = {{0.6, 0.1}, {0.7, 0.2}, {0.05, 0.9}};
  for (const auto& gq : params) {
    const ChannelParams p{gq[0], gq[1]};
    // From OFF stay with prob 1-gamma, from ON leave with prob q.
    const double expected = power_iteration_p1(1.0 - p.gamma, p.q);
    CHECK(channel_stationary_on_prob(p) ==
          doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("empirical frequencies match stationary laws") {
  const std::uint64_t n = 1000000;

  const MmbpParams arrivals[] = {{0.4, 0.4}, {0.8, 0.4}, {0.3, 0.7}};
  int idx = 0;
  for (const MmbpParams& p : arrivals) {
    RngStream rng(100 + idx++);
    ArrivalChainState s = mmbp_stationary_sample(p, rng);
    std::uint64_t count = 0;
    for (std::uint64_t i = 0; i < n; ++i) {
      const MmbpStep st = mmbp_step(s, p, rng);
      count += st.arrival;
      s = st.next;
    }
    const double freq = static_cast<double>(count) / n;
    CHECK(std::fabs(freq - mmbp_stationary_arrival_prob(p)) < 0.005);
  }

  const ChannelParams channels[] = {{0.2, 0.4}, {0.8, 0.05}};
  for (const ChannelParams& p : channels) {
    RngStream rng(200 + idx++);
    ChannelState s = channel_stationary_sample(p, rng);
    std::uint64_t count = 0;
    for (std::uint64_t i = 0; i < n; ++i) {
      s = channel_step(s, p, rng);
      count += s.connected;
    }
    const double freq = static_cast<double>(count) / n;
    CHECK(std::fabs(freq - channel_stationary_on_prob(p)) < 0.005);
  }
}

TEST_CASE("streams replay bit-exactly from the same seed") {
  RngStream a(42), b(42);
  for (int i = 0; i < 1000; ++i) {
    CHECK(a.next_u64() == b.next_u64());
  }

  RngStream c(42), d(43);
  int differing = 0;
  for (int i = 0; i < 64; ++i) {
    if (c.next_u64() != d.next_u64()) ++differing;
  }
  CHECK(differing > 60);
}

TEST_CASE("substreams are insensitive to sibling draws") {
  const RngStream root(99);
  std::vector<std::uint64_t> clean;
  {
    RngStream a = root.substream("alpha");
    for (int i = 0; i < 100; ++i) clean.push_back(a.next_u64());
  }
  {
    // Interleave draws from an unrelated sibling; alpha must not notice.
    RngStream b = root.substream("beta");
    for (int i = 0; i < 57; ++i) b.next_u64();
    RngStream a = root.substream("alpha");
    for (int i = 0; i < 100; ++i) {
      CHECK(a.next_u64() == clean[i]);
      b.next_u64();
    }
  }
  CHECK(root.substream("alpha").next_u64() !=
        root.substream("beta").next_u64());
}

TEST_CASE("uniform draws live in the half-open unit interval") {
  RngStream rng(5);
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("derived seeds differ across coordinates and repeat exactly") {
  const std::uint64_t a = derive_seed(1, {0, 0, 0, 0});
  const std::uint64_t b = derive_seed(1, {0, 0, 0, 1});
  const std::uint64_t c = derive_seed(1, {0, 0, 1, 0});
  const std::uint64_t d = derive_seed(2, {0, 0, 0, 0});
  CHECK(a != b);
  CHECK(a != c);
  CHECK(a != d);
  CHECK(b != c);
  CHECK(a == derive_seed(1, {0, 0, 0, 0}));
}

TEST_CASE("parameter validation rejects out-of-range probabilities") {
  CHECK_THROWS_AS(check_valid(MmbpParams{-0.1, 0.5}), std::invalid_argument);
  CHECK_THROWS_AS(check_valid(MmbpParams{0.5, 1.1}), std::invalid_argument);
  CHECK_THROWS_AS(check_valid(ChannelParams{2.0, 0.0}),
                  std::invalid_argument);
  CHECK_NOTHROW(check_valid(MmbpParams{0.0, 1.0}));
  CHECK_NOTHROW(check_valid(ChannelParams{1.0, 0.0}));
}
