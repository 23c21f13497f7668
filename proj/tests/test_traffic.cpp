// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>

#include "flowcast/traffic.hpp"

using namespace flowcast;

TEST_CASE("800 kbps burst of 8000-bit packets, 1 ms bursts every 10 ms over 20 ms") {
  // Inter-packet gap at 800 kbps is 10 ms, so each 1 ms burst admits exactly
  // one packet: expect t = 0 and t = 10 ms.
  ConstantBurst cb{800e3, 0.001, 0.01, 0.0, 0.02};
  const auto times = generate_packets(cb, 8000.0, 0.02);
  REQUIRE(times.size() == 2);
  CHECK(times[0] == 0.0);
  CHECK(times[1] == doctest::Approx(0.01).epsilon(1e-12));
}

TEST_CASE("trace replay filters to [0, duration)") {
  TraceReplay tr{{0.05, 0.15}};
  const auto times = generate_packets(tr, 1000.0, 0.1);
  REQUIRE(times.size() == 1);
  CHECK(times[0] == 0.05);
}

TEST_CASE("multi-burst of two identical components emits every time twice") {
  ConstantBurst cb{1e6, 0.001, 0.01, 0.0, 0.02};
  MultiBurst mb{{cb, cb}};
  const auto once = generate_packets(TrafficProfile{cb}, 2000.0, 0.02);
  const auto twice = generate_packets(TrafficProfile{mb}, 2000.0, 0.02);
  REQUIRE(twice.size() == 2 * once.size());
  for (std::size_t i = 0; i < once.size(); ++i) {
    CHECK(twice[2 * i] == once[i]);
    CHECK(twice[2 * i + 1] == once[i]);
  }
}

TEST_CASE("generated times are sorted and inside [0, duration)") {
  ConstantBurst a{5e5, 0.0008, 0.002, 0.0005, 1.0};
  ConstantBurst b{2e6, 0.0003, 0.001, 0.0, 0.004};
  MultiBurst mb{{a, b}};
  const auto times = generate_packets(TrafficProfile{mb}, 1500.0, 0.005);
  CHECK(std::is_sorted(times.begin(), times.end()));
  REQUIRE(!times.empty());
  CHECK(times.front() >= 0.0);
  CHECK(times.back() < 0.005);
}

TEST_CASE("stop time truncates bursts") {
  ConstantBurst cb{1e6, 0.01, 0.01, 0.0, 0.0035};
  // gap = 1 ms; stop at 3.5 ms cuts the train to packets at 0, 1, 2, 3 ms.
  const auto times = generate_packets(cb, 1000.0, 1.0);
  REQUIRE(times.size() == 4);
  CHECK(times[3] == doctest::Approx(0.003).epsilon(1e-12));
}
