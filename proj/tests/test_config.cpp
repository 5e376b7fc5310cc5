#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <set>
#include <sstream>

#include "trustnav/config.hpp"

using namespace trustnav;

TEST_CASE("empty config text yields the documented defaults") {
  RunConfig cfg = parse_config("");
  RunConfig def = default_config();
  CHECK(serialize_config(cfg) == serialize_config(def));
  CHECK(cfg.env.l_max == 5);
  CHECK(cfg.env.episode_cap == 15);
  CHECK(cfg.affect.a_rep == doctest::Approx(0.75));
  CHECK(cfg.affect.a_hes == doctest::Approx(0.5));
  CHECK(cfg.affect.a_unc == doctest::Approx(0.5));
  CHECK(cfg.train.total_steps == 10000);
}

TEST_CASE("values are parsed into the right fields") {
  RunConfig cfg = parse_config(
      "[env]\n"
      "rows = 4\n"
      "sigma = 2.5\n"
      "[train]\n"
      "learning_rate = 0.1\n"
      "optimizer = sgd\n"
      "[affect]\n"
      "fillers = um, erm\n");
  CHECK(cfg.env.rows == 4);
  CHECK(cfg.env.sigma == doctest::Approx(2.5));
  CHECK(cfg.train.learning_rate == doctest::Approx(0.1));
  CHECK(cfg.train.optimizer == "sgd");
  REQUIRE(cfg.affect.fillers.size() == 2);
  CHECK(cfg.affect.fillers[0] == "um");
  CHECK(cfg.affect.fillers[1] == "erm");
}

TEST_CASE("unknown keys are rejected by path") {
  try {
    parse_config("[env]\nbogus = 1\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("env.bogus") != std::string::npos);
  }
}

TEST_CASE("out-of-range values name the key") {
  try {
    parse_config("[env]\nsigma = -1\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("env.sigma") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config("[env]\nh_min = 4\nh_max = 2\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[train]\nclip_eps = 1.5\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[env]\nrows = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[train]\noptimizer = rmsprop\n"), ConfigError);
}

TEST_CASE("malformed syntax is rejected") {
  CHECK_THROWS_AS(parse_config("rows = 3\n"), ConfigError);  // before section
  CHECK_THROWS_AS(parse_config("[env]\nrows 3\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[mystery]\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[env]\nrows = abc\n"), ConfigError);
}

TEST_CASE("load -> serialize -> load is a fixed point") {
  RunConfig cfg = parse_config(
      "[env]\nrows = 5\ncell_size = 4.25\nsigma = 1.75\n"
      "[rewards]\nr_reached = 50\n"
      "[train]\nseed = 42\ntotal_steps = 4096\n");
  std::string one = serialize_config(cfg);
  std::string two = serialize_config(parse_config(one));
  CHECK(one == two);
}

TEST_CASE("missing config file raises") {
  CHECK_THROWS_AS(load_config("/nonexistent/trustnav.ini"), ConfigError);
}

TEST_CASE("every serialized key is documented and vice versa") {
  // the canonical serialization must mention exactly the documented keys
  std::string text = serialize_config(default_config());
  std::istringstream in(text);
  std::string line, section;
  std::set<std::string> serialized;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.front() == '[') {
      section = line.substr(1, line.size() - 2);
    } else {
      serialized.insert(section + "." + line.substr(0, line.find(' ')));
    }
  }
  std::set<std::string> documented(documented_keys().begin(),
                                   documented_keys().end());
  CHECK(serialized == documented);

  // and the key table in docs/CONFIG.md must list the same set
  std::ifstream doc(std::string(TRUSTNAV_SOURCE_DIR) + "/docs/CONFIG.md");
  REQUIRE(doc.good());
  std::set<std::string> in_docs;
  while (std::getline(doc, line)) {
    auto tick = line.find("| `");
    if (tick != 0) continue;
    auto end = line.find('`', 3);
    if (end == std::string::npos) continue;
    in_docs.insert(line.substr(3, end - 3));
  }
  CHECK(in_docs == documented);
}
