#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "../fixtures.hpp"
#include "mfd/io.hpp"
#include "mfd/pipeline.hpp"
#include "mfd/session.hpp"

using namespace mfd;
namespace fs = std::filesystem;

namespace {

const fs::path kFixtures = MFD_FIXTURES_DIR;

fs::path scratch() {
  static const fs::path dir = [] {
    const fs::path d = fs::temp_directory_path() / ("mfd_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

struct Run {
  int status;
  std::string output;
};

Run run(const std::string& args) {
  const fs::path log = scratch() / "last.log";
  const std::string cmd = std::string(MFD_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
  const int raw = std::system(cmd.c_str());
  std::ifstream in(log);
  std::stringstream text;
  text << in.rdbuf();
  return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, text.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string fx(const std::string& name) { return (kFixtures / name).string(); }

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("weights on the close-handle fixture") {
    const fs::path out = scratch() / "close.csv";
    const Run r = run("weights --domain " + fx("line11.json") + " --handles " + fx("line11_close_handles.json") +
                      " --alpha 1 --out " + out.string());
    INFO(r.output);
    REQUIRE(r.status == 0);
    const Json trace = read_json_file(out.string() + ".trace.json");
    CHECK(trace[0]["inserted_index"] == 10);
    CHECK(trace[0]["handle"] == 1);
  }

  TEST_CASE("batch and service exports are identical") {
    const fs::path csv = scratch() / "same.csv";
    const fs::path bin = scratch() / "same.mfw";
    const std::string common = " --domain " + fx("disk.json") + " --handles " + fx("disk_handles.json");
    REQUIRE(run("weights" + common + " --out " + csv.string()).status == 0);
    REQUIRE(run("weights" + common + " --out " + bin.string()).status == 0);

    SessionService s;
    const Json opened = s.handle({{"type", "open_session"}, {"domain", read_json_file(fx("disk.json"))}});
    const std::string id = opened["session_id"];
    const Json handles = read_json_file(fx("disk_handles.json"))["handles"];
    REQUIRE(s.handle({{"type", "set_handles"}, {"session_id", id}, {"handles", handles}})["ok"] == true);
    REQUIRE(s.handle({{"type", "compute_weights"}, {"session_id", id}, {"alpha", 1.0}})["ok"] == true);
    CHECK(s.handle({{"type", "export_weights"}, {"session_id", id}})["csv"] == slurp(csv));
    std::ostringstream binary;
    write_weights_binary(binary, *s.weights_snapshot(id));
    CHECK(binary.str() == slurp(bin));
  }

  TEST_CASE("deform with a uniform pose") {
    const fs::path w = scratch() / "annulus.mfw";
    const fs::path poses = scratch() / "uniform.json";
    const fs::path out = scratch() / "annulus_deformed.json";
    const fs::path ppm = scratch() / "annulus.ppm";
    const std::string common = " --domain " + fx("annulus.json") + " --handles " + fx("annulus_handles.json");
    REQUIRE(run("weights" + common + " --out " + w.string()).status == 0);
    Json list = Json::array();
    for (int h = 0; h < 4; ++h) list.push_back({{"handle", h}, {"matrix", {0.6, -0.8, 0.3, 0.8, 0.6, -1.2, 0, 0, 1}}});
    write_json_file(poses, list);
    const Run r = run("deform" + common + " --weights " + w.string() + " --poses " + poses.string() + " --out " +
                      out.string() + " --ppm " + ppm.string());
    INFO(r.output);
    REQUIRE(r.status == 0);
    const Json doc = read_json_file(out);
    CHECK(doc["deformed"] == true);
    const DomainFile before = parse_domain(read_json_file(fx("annulus.json")));
    const DomainFile after = parse_domain(doc);
    REQUIRE(after.points.size() >= before.points.size());
    for (std::size_t i = 0; i < before.points.size(); i += 37) {
      const Vec3& p = before.points[i];
      const Vec3 expect(0.6 * p.x() - 0.8 * p.y() + 0.3, 0.8 * p.x() + 0.6 * p.y() - 1.2, 0.0);
      CHECK((after.points[i] - expect).norm() <= 1e-9 * (1 + p.norm()));
    }
    CHECK(slurp(ppm).rfind("P6\n512 512\n255\n", 0) == 0);
  }

  TEST_CASE("progressive deform of the bar") {
    const fs::path w = scratch() / "bar.csv";
    const fs::path poses = scratch() / "twist.json";
    const fs::path out = scratch() / "bar_twisted.json";
    const std::string common = " --domain " + fx("bar.json") + " --handles " + fx("bar_handles.json");
    REQUIRE(run("weights" + common + " --out " + w.string()).status == 0);
    write_json_file(poses, Json::array({{{"handle", 1}, {"angle", 90}, {"axis", {1, 0, 0}}, {"pivot", {0, 0, 0}}}}));
    for (const char* policy : {"frozen", "recompute"}) {
      const Run r = run("deform" + common + " --weights " + w.string() + " --poses " + poses.string() +
                        " --progressive --step 5 --policy " + policy + " --out " + out.string());
      INFO(r.output);
      REQUIRE(r.status == 0);
      for (const Json& p : read_json_file(out)["points"]) {
        for (const Json& c : p) CHECK(std::isfinite(c.get<double>()));
      }
    }
  }

  TEST_CASE("sample builds a domain") {
    const fs::path pts = scratch() / "pts.json";
    const fs::path out = scratch() / "sampled.json";
    write_json_file(pts, Json::array({{0, 0}, {1, 0}, {2, 0}, {3, 0.5}}));
    const Run r = run("sample --points " + pts.string() + " --k 2 --out " + out.string());
    INFO(r.output);
    REQUIRE(r.status == 0);
    const DomainFile f = parse_domain(read_json_file(out));
    CHECK(f.points.size() == 4);
    CHECK(f.k == 2);
  }

  TEST_CASE("check reports through its exit status") {
    struct Case {
      const char* domain;
      const char* handles;
      const char* extra;
    };
    for (const Case& c : {Case{"line11.json", "line11_close_handles.json", ""},
                          Case{"line11.json", "line11_far_handles.json", " --mirror x"},
                          Case{"grid.json", "grid_handles.json", " --mirror x"}, Case{"annulus.json", "annulus_handles.json", ""},
                          Case{"cage.json", "cage_handles.json", ""}, Case{"bar.json", "bar_handles.json", ""},
                          Case{"disk.json", "disk_handles.json", ""}}) {
      const Run r = run(std::string("check --domain ") + fx(c.domain) + " --handles " + fx(c.handles) + c.extra);
      INFO(c.domain << " " << c.handles << "\n" << r.output);
      const bool any_fail = r.output.find(" fail ") != std::string::npos;
      CHECK(r.status == (any_fail ? 1 : 0));
      for (const char* row : {"partition_of_unity", "non_negativity", "consistency", "virtual_insertion",
                              "dijkstra_oracle"}) {
        CHECK(r.output.find(std::string(row) + std::string(20 - std::string(row).size(), ' ') + " pass") !=
              std::string::npos);
      }
    }
    const Run grid = run("check --domain " + fx("grid.json") + " --handles " + fx("grid_handles.json") + " --mirror x");
    CHECK(grid.output.find("symmetry             pass") != std::string::npos);
  }

  TEST_CASE("errors exit 1 with a diagnostic") {
    Run r = run("weights --domain /does/not/exist.json --handles " + fx("disk_handles.json") + " --out " +
                (scratch() / "x.csv").string());
    CHECK(r.status == 1);
    CHECK(r.output.find("mfd: ParseError") != std::string::npos);

    const fs::path bad = scratch() / "dup.json";
    write_json_file(bad, {{"dim", 2}, {"points", {{0, 0}, {0, 0}, {1, 1}}}});
    r = run("sample --points " + bad.string() + " --out " + (scratch() / "y.json").string());
    CHECK(r.status == 1);
    CHECK(r.output.find("DuplicatePoints") != std::string::npos);

    r = run("deform --domain " + fx("line11.json") + " --handles " + fx("line11_far_handles.json") + " --weights " +
            (scratch() / "close.csv").string() + " --poses " + (scratch() / "twist.json").string() + " --out " +
            (scratch() / "z.json").string());
    CHECK(r.status == 1);
    CHECK(r.output.find("mfd: ") != std::string::npos);

    CHECK(run("").status != 0);
  }
}
