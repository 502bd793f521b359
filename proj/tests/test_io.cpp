#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "spincm/errors.hpp"
#include "spincm/io.hpp"
#include "support.hpp"

using namespace spincm;
using namespace testing_support;
using io::json;

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

}  // namespace

TEST_SUITE("io") {

TEST_CASE("complex numbers") {
  CHECK(io::to_json(cplx(1.5, -2.0)) == json::parse("[1.5, -2.0]"));
  CHECK(io::complex_from_json(json::parse("[0.25, 3]")) == cplx(0.25, 3.0));
  CHECK(io::complex_from_json(json(2.5)) == cplx(2.5, 0.0));
  CHECK_THROWS_AS(io::complex_from_json(json::parse("[1, 2, 3]")), ValidationError);
  CHECK_THROWS_AS(io::complex_from_json(json("x")), ValidationError);
  Mat m(2, 2);
  m << cplx(1, 2), 3.0, cplx(0, -1), cplx(0.1, 0.2);
  CHECK(io::mat_from_json(io::to_json(m), "m") == m);
  CHECK_THROWS_AS(io::mat_from_json(json::parse("[[1,2],[3]]"), "m"), ValidationError);
}

TEST_CASE("model descriptions") {
  const auto r = io::model_from_json(json::parse(R"({"N": 3, "family": "rational", "delta_prime": {"blocks": [[1, 2], [3]]}})"));
  CHECK(r.family() == Family::rational);
  CHECK(r.subset().blocks().size() == 2);
  CHECK(r.subset().block_of(0) == r.subset().block_of(1));
  CHECK(r.subset().block_of(0) != r.subset().block_of(2));

  const auto roots = io::model_from_json(json::parse(R"({"N": 3, "family": "rational", "delta_prime": {"roots": [[1, 2], [2, 1]]}})"));
  CHECK(roots.subset().blocks() == r.subset().blocks());

  const auto t = io::model_from_json(json::parse(R"({"N": 3, "family": "trigonometric", "pi_prime": [2]})"));
  CHECK(t.subset().raw().pi_members == std::vector<int>{1});
  CHECK(t.subset().block_of(1) == t.subset().block_of(2));

  const auto e = io::model_from_json(json::parse(R"({"N": 2, "family": "elliptic", "omega1": [1, 0], "omega2": [0.3, 1.1]})"));
  CHECK(e.lattice().omega2() == cplx(0.3, 1.1));

  for (const auto* src : {R"({"N": 3, "family": "rational", "delta_prime": {"blocks": [[1, 2], [3]]}})",
                          R"({"N": 4, "family": "trigonometric", "pi_prime": [1, 3]})",
                          R"({"N": 2, "family": "elliptic", "omega1": [1, 0], "omega2": [0.3, 1.1]})"}) {
    const json j = json::parse(src);
    CHECK(io::model_to_json(io::model_from_json(j)) == j);
  }

  CHECK_THROWS_AS(io::model_from_json(json::parse(R"({"N": 1, "family": "rational"})")), ValidationError);
  CHECK_THROWS_AS(io::model_from_json(json::parse(R"({"N": 2, "family": "hyperbolic"})")), ValidationError);
  CHECK_THROWS_AS(io::model_from_json(json::parse(R"({"family": "rational"})")), ValidationError);
  CHECK_THROWS_AS(io::model_from_json(json::parse(R"({"N": 3, "family": "trigonometric", "pi_prime": [3]})")),
                  ValidationError);
  // {1,2} and {2,3} without {1,3}: not closed
  CHECK_THROWS_AS(io::model_from_json(json::parse(
                      R"({"N": 3, "family": "rational", "delta_prime": {"roots": [[1,2],[2,1],[2,3],[3,2]]}})")),
                  ValidationError);
}

TEST_CASE("initial data") {
  const auto spec = rational_full(2);
  const auto init = io::init_from_json(json::parse(R"({"q": [1, -1], "p": [[2, 0], [-2, 0]], "xi": [[0, 1], [1, 0]]})"), spec, 0);
  CHECK_FALSE(init.reduced);
  CHECK(init.point.q(0) == cplx(1.0, 0.0));
  CHECK(init.point.xi(1, 0) == cplx(1.0, 0.0));
  CHECK(io::init_from_json(io::init_to_json(init), spec, 0).point.xi == init.point.xi);

  CHECK_THROWS_AS(io::init_from_json(json::parse(R"({"q": [1, -1, 0], "p": [0, 0], "xi": [[0, 1], [1, 0]]})"), spec, 0),
                  ValidationError);
  CHECK_THROWS_AS(io::init_from_json(json::parse(R"({"q": [1, -1], "p": [0, 0]})"), spec, 0), ValidationError);
  CHECK_THROWS_AS(io::init_from_json(json::parse(R"({"q": [0.5, -0.5], "p": [0, 0], "xi": [[1, 1], [1, 0]]})"), spec, 0),
                  ValidationError);
  CHECK_THROWS_AS(io::init_from_json(json::parse(R"({"q": [0, 0], "p": [0, 0], "xi": [[0, 1], [1, 0]]})"), spec, 0),
                  DomainError);

  const auto red = io::init_from_json(json::parse(R"({"reduced": true, "q": [1, -1], "p": [2, -2], "s": [[0, 1], [0.5, 0]]})"), spec, 0);
  CHECK(red.reduced);
  CHECK(red.point.xi(0, 1) == cplx(1.0, 0.0));
  CHECK_THROWS_AS(io::init_from_json(json::parse(R"({"reduced": true, "q": [1, -1], "p": [2, -2], "s": [[0, 2], [0.5, 0]]})"), spec, 0),
                  ValidationError);
}

TEST_CASE("seeded random points") {
  const auto spec = rational_full(3);
  const json rnd = json::parse(R"({"random": true})");
  const auto a = io::init_from_json(rnd, spec, 17);
  const auto b = io::init_from_json(rnd, spec, 17);
  const auto c = io::init_from_json(rnd, spec, 18);
  CHECK(a.point.xi == b.point.xi);
  CHECK(a.point.q == b.point.q);
  CHECK(a.point.xi != c.point.xi);
  CHECK(a.point.xi.diagonal().cwiseAbs().maxCoeff() == 0.0);
  CHECK(std::abs(a.point.q.sum()) < 1e-15);
  CHECK(io::init_from_json(json::parse(R"({"random": true, "seed": 17})"), spec, 99).point.xi == a.point.xi);

  std::mt19937_64 rng(1);
  for (int k = 0; k < 1000; ++k) {
    const double u = io::uniform_pm1(rng);
    CHECK(u >= -1.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("hashing and number formatting") {
  CHECK(io::fnv1a("") == 0xcbf29ce484222325ULL);
  CHECK(io::fnv1a("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(io::fnv1a("foobar") == 0x85944171f73967e8ULL);
  CHECK(io::hex64(0xabcULL) == "0000000000000abc");
  CHECK(io::format_double(0.1) == "0.10000000000000001");
  CHECK(io::format_double(-2.0) == "-2");
}

TEST_CASE("spectral parameter lists") {
  const auto z = io::parse_complex_list("0.7, 1.3i,0.4+0.4i,-i,2-3e-1i,-0.5");
  REQUIRE(z.size() == 6);
  CHECK(z[0] == cplx(0.7, 0.0));
  CHECK(z[1] == cplx(0.0, 1.3));
  CHECK(z[2] == cplx(0.4, 0.4));
  CHECK(z[3] == cplx(0.0, -1.0));
  CHECK(z[4] == cplx(2.0, -0.3));
  CHECK(z[5] == cplx(-0.5, 0.0));
  CHECK_THROWS_AS(io::parse_complex_list("1,,2"), ValidationError);
  CHECK_THROWS_AS(io::parse_complex_list("abc"), ValidationError);
}

TEST_CASE("trajectory CSV") {
  Trajectory traj;
  traj.times = {0.0, 0.5};
  PhasePoint s{Vec(2), Vec(2), Mat(2, 2)};
  s.q << cplx(1.0, 0.1), cplx(-1.0, -0.1);
  s.p << 2.0, -2.0;
  s.xi << 0.0, cplx(0.3, 1.0 / 3.0), 1.0, 0.0;
  traj.states = {s, s};
  traj.states[1].q *= 2.0;
  std::ostringstream os;
  io::write_trajectory_csv(os, traj, {"simulate", "00ff", 42, "oracle", 2, false}, {{"energy_drift", "0"}});
  std::istringstream in(os.str());
  std::string line;
  std::vector<std::string> comments, rows;
  while (std::getline(in, line)) (line[0] == '#' ? comments : rows).push_back(line);
  CHECK(comments.front() == std::string("# spincm ") + io::version());
  CHECK(std::find(comments.begin(), comments.end(), "# seed 42") != comments.end());
  CHECK(std::find(comments.begin(), comments.end(), "# config_hash 00ff") != comments.end());
  CHECK(comments.back() == "# energy_drift 0");
  REQUIRE(rows.size() == 3);
  const auto head = split(rows[0]);
  CHECK(head.size() == 1 + 4 * 2 + 2 * 4);
  CHECK(head[1] == "re_q_1");
  CHECK(head[2] == "im_q_1");
  CHECK(head[11] == "re_xi_1_2");
  const auto r1 = split(rows[2]);
  CHECK(std::strtod(r1[0].c_str(), nullptr) == 0.5);
  CHECK(std::strtod(r1[1].c_str(), nullptr) == 2.0);
  CHECK(std::strtod(r1[2].c_str(), nullptr) == 0.2);
  CHECK(std::strtod(r1[12].c_str(), nullptr) == 1.0 / 3.0);
}

TEST_CASE("presets") {
  for (const auto& name : io::builtin_preset_names()) {
    const auto p = io::find_preset(name);
    const auto spec = io::model_from_json(p.model);
    CHECK_NOTHROW(io::init_from_json(p.init, spec, 0));
  }
  CHECK_THROWS_AS(io::find_preset("no-such-preset"), ValidationError);

  const auto dir = std::filesystem::temp_directory_path() / "spincm_io_presets";
  std::filesystem::create_directories(dir);
  {
    std::ofstream f(dir / "rational-sl2.json");
    f << R"({"description": "override", "model": {"N": 2, "family": "rational"}, "init": {"q": [3, -3], "p": [0, 0], "xi": [[0, 0], [0, 0]]}})";
  }
  ::setenv("SPINCM_PRESET_DIR", dir.c_str(), 1);
  const auto over = io::find_preset("rational-sl2");
  const auto other = io::find_preset("trig-sl2");
  ::unsetenv("SPINCM_PRESET_DIR");
  CHECK(over.description == "override");
  CHECK(io::complex_from_json(over.init["q"][0]) == cplx(3.0, 0.0));
  CHECK(other.name == "trig-sl2");
  std::filesystem::remove_all(dir);
}

}  // TEST_SUITE
