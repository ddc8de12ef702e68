#include <doctest.h>

#include "dnl/report.hpp"

using namespace dnl;

TEST_CASE("json emission is deterministic with sorted keys and 17 digits") {
  Json j;
  j["zeta"] = 0.1;
  j["alpha"] = Json{{"nested", 1.0 / 3.0}};
  j["list"] = Json::array({1.5, 2, true, "text"});

  const std::string a = json_text(j);
  const std::string b = json_text(j);
  CHECK(a == b);
  CHECK(a.find("0.10000000000000001") != std::string::npos);
  CHECK(a.find("0.33333333333333331") != std::string::npos);
  // keys in sorted order
  CHECK(a.find("\"alpha\"") < a.find("\"list\""));
  CHECK(a.find("\"list\"") < a.find("\"zeta\""));
}

TEST_CASE("json emission round-trips structurally") {
  Json j;
  j["ratio"] = 0.5;
  j["count"] = 42;
  j["flag"] = false;
  j["values"] = Json::array({1e-300, 1e300, -0.0, 3.141592653589793});
  const Json back = Json::parse(json_text(j));
  CHECK(back == j);
  CHECK(back["values"][3].get<double>() == 3.141592653589793);
}

TEST_CASE("csv emission schema and determinism") {
  const std::string csv = csv_text({"gamma", "gap"}, {{0.2, 0.4}, {0.1, 0.2}});
  CHECK(csv.substr(0, 10) == "gamma,gap\n");
  CHECK(csv == csv_text({"gamma", "gap"}, {{0.2, 0.4}, {0.1, 0.2}}));
  CHECK(csv.find("0.20000000000000001") != std::string::npos);
}

TEST_CASE("fnv1a64 reference values") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ull);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cull);
  CHECK(hex64(fnv1a64("")) == "cbf29ce484222325");
}
