#include <doctest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

#include "../tools/cli.hpp"

namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code = 0;
  std::string out;
  std::string err;
};

Outcome run(std::initializer_list<std::string> args) {
  std::vector<std::string> owned{"vdrive"};
  owned.insert(owned.end(), args);
  std::vector<const char*> argv;
  for (const auto& a : owned) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = vdrive::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path workdir() {
  const fs::path d = fs::temp_directory_path() / "vdrive_cli_test";
  fs::create_directories(d);
  return d;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

const char* kSmallTrain =
    "agent=PG_MA\nepisodes=4\nwindow=30\nstride=15\nlr=0.01\nhidden=8\n"
    "encoder.input_rows=8\nencoder.input_cols=8\nencoder.conv_channels=2,3\n"
    "encoder.kernel=3\nencoder.dense_out=4\nencoder.embed_size=3\nencoder.attn_size=3\n";

}  // namespace

TEST_CASE("gradcheck subcommand passes") {
  const Outcome o = run({"gradcheck", "--seeds", "2"});
  CHECK(o.code == 0);
  CHECK(o.out.find("max rel error") != std::string::npos);
  CHECK(o.out.find("ok") != std::string::npos);
}

TEST_CASE("usage errors exit 2") {
  CHECK(run({"frobnicate"}).code == 2);
  CHECK(run({"gradcheck", "--no-such-flag"}).code == 2);
  CHECK(run({"eval"}).code == 2);
  CHECK(run({}).code == 2);
}

TEST_CASE("train with episodes=0 exits 2") {
  const fs::path d = workdir();
  write(d / "spec.txt", "n_frames=60\n");
  REQUIRE(run({"gen", "--spec", (d / "spec.txt").string(), "--out", (d / "scene.json").string()}).code == 0);
  write(d / "zero.cfg", "episodes=0\n");
  const Outcome o = run({"train", "--config", (d / "zero.cfg").string(), "--annotations",
                         (d / "scene.json").string(), "--checkpoint", (d / "c.json").string(),
                         "--metrics", (d / "m.csv").string()});
  CHECK(o.code == 2);
  CHECK(o.err.find("episodes") != std::string::npos);
}

TEST_CASE("gen is deterministic in the seed") {
  const fs::path d = workdir();
  write(d / "spec.txt", "n_frames=30\nobstacle_count=3\n");
  const auto gen = [&](const std::string& name, const std::string& seed) {
    return run({"gen", "--spec", (d / "spec.txt").string(), "--out", (d / name).string(), "--seed", seed}).code;
  };
  REQUIRE(gen("a.json", "1") == 0);
  REQUIRE(gen("b.json", "1") == 0);
  REQUIRE(gen("c.json", "2") == 0);
  CHECK(slurp(d / "a.json") == slurp(d / "b.json"));
  CHECK(slurp(d / "a.json") != slurp(d / "c.json"));
}

TEST_CASE("gen, inspect, train and eval run end to end") {
  const fs::path d = workdir();
  write(d / "spec.txt", "n_frames=80\n");
  write(d / "train.cfg", kSmallTrain);
  const std::string scene = (d / "e2e.json").string();
  REQUIRE(run({"gen", "--spec", (d / "spec.txt").string(), "--out", scene}).code == 0);

  const Outcome ins = run({"inspect", "--annotations", scene});
  CHECK(ins.code == 0);
  CHECK(ins.out.rfind("frame,theta_lane,l_lane,r_lane,boxes,m_center", 0) == 0);
  CHECK(std::count(ins.out.begin(), ins.out.end(), '\n') == 81);

  const Outcome tr = run({"train", "--config", (d / "train.cfg").string(), "--annotations", scene,
                          "--checkpoint", (d / "ck.json").string(), "--metrics",
                          (d / "m.csv").string(), "--audit", (d / "audit.csv").string(), "--quiet"});
  REQUIRE(tr.code == 0);
  const std::string metrics = slurp(d / "m.csv");
  CHECK(std::count(metrics.begin(), metrics.end(), '\n') == 5);
  CHECK(fs::exists(d / "audit.csv"));

  const Outcome ev = run({"eval", "--checkpoint", (d / "ck.json").string(), "--annotations", scene,
                          "--trace", (d / "trace.csv").string()});
  CHECK(ev.code == 0);
  CHECK(ev.out.find("agent=PG_MA") != std::string::npos);
  CHECK(ev.out.find("total_reward=") != std::string::npos);
  const Outcome again = run({"eval", "--checkpoint", (d / "ck.json").string(), "--annotations", scene});
  CHECK(again.out == ev.out);
}

TEST_CASE("runtime failures exit 1") {
  const fs::path d = workdir();
  CHECK(run({"inspect", "--annotations", (d / "missing.json").string()}).code == 1);
  write(d / "broken.json", "{\"w\": 4");
  const Outcome o = run({"inspect", "--annotations", (d / "broken.json").string()});
  CHECK(o.code == 1);
  CHECK_FALSE(o.err.empty());
}

#ifdef VDRIVE_CLI_PATH
TEST_CASE("the installed binary reports usage errors") {
  const std::string cmd = std::string("\"") + VDRIVE_CLI_PATH + "\" --bogus > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(WIFEXITED(status));
  CHECK(WEXITSTATUS(status) == 2);
  const std::string ok = std::string("\"") + VDRIVE_CLI_PATH + "\" gradcheck --seeds 1 > /dev/null 2>&1";
  CHECK(WEXITSTATUS(std::system(ok.c_str())) == 0);
}
#endif
