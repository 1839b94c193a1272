#include <doctest.h>

#include <algorithm>
#include <sstream>

#include "nucseg/cli.hpp"
#include "nucseg/config.hpp"
#include "nucseg/volume_io.hpp"
#include "test_util.hpp"

using namespace nucseg;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string s(const std::filesystem::path& p) { return p.string(); }

// A scaled-down em-like scene so the chain runs quickly.
void small_config(const testutil::TempDir& dir) {
  testutil::spit(dir / "cfg.json",
                 R"({"synth": {"shape": [48, 48, 48], "instance_count": 12}})");
}

}  // namespace

TEST_CASE("synth -> targets -> decode -> eval") {
  testutil::TempDir dir("cli_chain");
  small_config(dir);
  REQUIRE(run({"synth", "--preset", "em-like", "--seed", "3", "-c", s(dir / "cfg.json"), "-o",
               s(dir / "data")})
              .code == 0);
  const json manifest = load_json_file(dir / "data/manifest.json");
  CHECK(manifest["achieved_count"].get<int>() > 0);
  CHECK(read_volume_as<std::uint32_t>(dir / "data/labels.json").shape() == Shape{48, 48, 48});

  REQUIRE(run({"targets", "--labels", s(dir / "data/labels.json"), "-o", s(dir / "t/exact")})
              .code == 0);
  CHECK(std::filesystem::exists(dir / "t/exact.fg.json"));
  CHECK(std::filesystem::exists(dir / "t/exact.dt.raw"));

  REQUIRE(run({"decode", "--pred", s(dir / "t/exact"), "-o", s(dir / "seg.json"), "--report",
               s(dir / "decode.json")})
              .code == 0);
  const json dr = load_json_file(dir / "decode.json");
  CHECK(dr["instance_count"] == manifest["achieved_count"]);
  CHECK(dr["params"]["tau1"] == 0.8);

  const Run ev = run({"eval", "--gt", s(dir / "data/labels.json"), "--pred", s(dir / "seg.json"),
                      "--report", s(dir / "eval.json")});
  REQUIRE(ev.code == 0);
  CHECK(ev.out.find("mean AP") != std::string::npos);
  const json er = load_json_file(dir / "eval.json");
  CHECK(er["ap50"].get<double>() >= 0.95);

  const Run self = run({"eval", "--gt", s(dir / "data/labels.json"), "--pred",
                        s(dir / "data/labels.json"), "--report", s(dir / "self.json")});
  CHECK(load_json_file(dir / "self.json")["mean"] == 1.0);

  const Run sw = run({"sweep", "--pred", s(dir / "t/exact"), "--gt", s(dir / "data/labels.json"),
                      "--param", "tau1", "--range", "0.4:0.8:0.1"});
  REQUIRE(sw.code == 0);
  CHECK(std::count(sw.out.begin(), sw.out.end(), '\n') == 6);
  CHECK(sw.out.rfind("param,value,ap50,ap75,mean,instances\n", 0) == 0);
  // Exact targets: AP-50 never rises as the seed threshold loosens away from 0.8.
  std::vector<double> ap50;
  std::istringstream rows(sw.out);
  std::string line;
  std::getline(rows, line);
  while (std::getline(rows, line)) {
    std::istringstream cells(line);
    std::string c;
    for (int k = 0; k < 3; ++k) std::getline(cells, c, ',');
    ap50.push_back(std::stod(c));
  }
  REQUIRE(ap50.size() == 5);
  CHECK(std::is_sorted(ap50.begin(), ap50.end()));

  const Run sizes = run({"stats", "sizes", "--labels", s(dir / "data/labels.json"), "--bins", "5"});
  REQUIRE(sizes.code == 0);
  CHECK(json::parse(sizes.out)["histogram"]["counts"].size() == 5);
  const Run kl = run({"stats", "kl", "--image", s(dir / "data/image.json"), "--labels",
                      s(dir / "data/labels.json")});
  REQUIRE(kl.code == 0);
  CHECK(json::parse(kl.out)["kl"].get<double>() > 1.0);
}

TEST_CASE("reruns are byte-identical") {
  testutil::TempDir dir("cli_determinism");
  small_config(dir);
  for (const char* tag : {"a", "b"}) {
    const std::string d = s(dir / tag);
    REQUIRE(run({"synth", "--preset", "uct-like", "--seed", "9", "-c", s(dir / "cfg.json"), "-o", d})
                .code == 0);
    REQUIRE(run({"targets", "--labels", d + "/labels.json", "-o", d + "/noisy", "--noise-std", "0.1",
                 "--blur", "1", "--noise-seed", "4"})
                .code == 0);
    REQUIRE(run({"decode", "--pred", d + "/noisy", "-o", d + "/seg.json", "--report",
                 d + "/dec.json"})
                .code == 0);
  }
  for (const char* f : {"labels.raw", "image.raw", "manifest.json", "noisy.fg.raw", "noisy.dt.raw",
                        "seg.raw", "seg.json", "dec.json"}) {
    CHECK_MESSAGE(testutil::slurp(dir / "a" / f) == testutil::slurp(dir / "b" / f), f);
  }
}

TEST_CASE("exit codes") {
  testutil::TempDir dir("cli_errors");
  CHECK(run({}).code == 2);
  CHECK(run({"frobnicate"}).code == 2);
  CHECK(run({"eval", "--gt", "x.json"}).code == 2);
  const Run missing = run({"eval", "--gt", s(dir / "nope.json"), "--pred", s(dir / "nope.json")});
  CHECK(missing.code == 1);
  CHECK(missing.err.find("nucseg:") != std::string::npos);

  testutil::spit(dir / "bad.json", R"({"decode": {"tau9": 1}})");
  CHECK(run({"synth", "--preset", "em-like", "-c", s(dir / "bad.json"), "-o", s(dir / "o")}).code ==
        1);
  CHECK(run({"synth", "--preset", "nope", "-o", s(dir / "o")}).code != 0);
  CHECK(run({"--help"}).code == 0);
}
