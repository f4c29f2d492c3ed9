#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fracheat/cli.hpp"

using namespace fracheat;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome call(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = parse_and_dispatch(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "fracheat_cli_test";
  fs::create_directories(dir);
  return dir / name;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

std::vector<std::string> fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

json without_manifest(json j) {
  j.erase("manifest");
  return j;
}

}  // namespace

TEST_CASE("mlf prints the exponential") {
  const Outcome o = call({"mlf", "--alpha", "1", "--r", "1", "--z", "1"});
  CHECK(o.code == exit_ok);
  CHECK(std::abs(std::stod(o.out) - std::exp(1.0)) <= 1e-14);
  CHECK(o.out == "2.71828182845905\n");
}

TEST_CASE("out-of-range flags are usage errors naming the flag") {
  const Outcome o = call({"solve", "--alpha", "1.5"});
  CHECK(o.code == exit_usage);
  CHECK(o.err.find("--alpha") != std::string::npos);
  CHECK(o.err.find("(0,1]") != std::string::npos);

  CHECK(call({"mlf", "--alpha", "0"}).code == exit_usage);
  CHECK(call({"mlf", "--z", "abc"}).code == exit_usage);
  CHECK(call({"fode", "--p", "1"}).code == exit_usage);
  CHECK(call({"solve", "--nx", "2"}).code == exit_usage);
  CHECK(call({"nosuch"}).code == exit_usage);
  CHECK(call({}).code == exit_usage);
  CHECK(call({"sweep", "--grid", "huge"}).code == exit_usage);
}

TEST_CASE("help exits cleanly") { CHECK(call({"--help"}).code == exit_ok); }

TEST_CASE("verify default grid writes a passing sixteen-entry report") {
  const fs::path report = scratch("report.json");
  const Outcome o = call({"verify", "--grid", "default", "--out", report.string()});
  CHECK(o.code == exit_ok);
  const json j = json::parse(slurp(report));
  CHECK(j.at("entries").size() == 16);
  CHECK(j.at("pass") == true);
  CHECK(j.contains("manifest"));
  CHECK(j.at("manifest").at("subcommand") == "verify");
  CHECK(j.contains("tolerances"));
}

TEST_CASE("sweep default grid: verdict yes exactly when p > 1") {
  const Outcome o = call({"sweep"});
  REQUIRE(o.code == exit_ok);
  const auto rows = lines(o.out);
  REQUIRE(rows.size() == 17);
  CHECK(rows[0] ==
        "alpha,p,a,l0,verdict,t_cross,t_estimate,bound_time,argmax_always_rightmost,interior_sup,error");
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto f = fields(rows[i]);
    REQUIRE(f.size() == 11);
    INFO(rows[i]);
    const double p = std::stod(f[1]);
    CHECK((f[4] == "yes") == (p > 1.0));
    CHECK(f[10].empty());
  }
  // rows are ordered lexicographically by (alpha, p, a)
  for (std::size_t i = 2; i < rows.size(); ++i) {
    const auto a = fields(rows[i - 1]), b = fields(rows[i]);
    const std::pair<double, double> ka{std::stod(a[0]), std::stod(a[1])}, kb{std::stod(b[0]), std::stod(b[1])};
    CHECK(ka < kb);
  }
}

TEST_CASE("sweep single cell and an incompatible profile") {
  const Outcome one = call({"sweep", "--alpha", "0.5", "--p", "2", "--a", "0.48"});
  CHECK(one.code == exit_ok);
  CHECK(lines(one.out).size() == 2);

  const Outcome mixed = call({"sweep", "--alpha", "0.5", "--p", "2", "--a", "0.3,1"});
  CHECK(mixed.code == exit_ok);
  const auto rows = lines(mixed.out);
  REQUIRE(rows.size() == 3);
  const auto good = fields(rows[1]);
  const auto bad = fields(rows[2]);
  CHECK(std::stod(good[2]) == 0.3);
  CHECK(good[4] == "yes");
  CHECK(good[10].empty());
  CHECK(std::stod(bad[2]) == 1.0);
  CHECK(bad[10] == "no-compatible-profile");
}

TEST_CASE("flags override the config file, which overrides defaults") {
  const fs::path cfg = scratch("cfg.json");
  std::ofstream(cfg) << R"({"alpha": 0.7, "n0": 2.0, "p": 3})";
  const fs::path summary = scratch("fode_summary.json");
  const Outcome o = call({"fode", "--config", cfg.string(), "--alpha", "0.3", "--out", scratch("fode.csv").string(),
                          "--summary", summary.string()});
  REQUIRE(o.code == exit_ok);
  const json params = json::parse(slurp(summary)).at("manifest").at("parameters");
  CHECK(params.at("alpha").at("value") == 0.3);
  CHECK(params.at("alpha").at("source") == "flag");
  CHECK(params.at("n0").at("value") == 2.0);
  CHECK(params.at("n0").at("source") == "file");
  CHECK(params.at("p").at("source") == "file");
  CHECK(params.at("growth_cap").at("source") == "default");
  for (const auto& [name, entry] : params.items()) {
    INFO(name);
    CHECK(entry.contains("value"));
    CHECK(entry.contains("source"));
  }
}

TEST_CASE("config files must be flat and use known keys") {
  const fs::path unknown = scratch("unknown.json");
  std::ofstream(unknown) << R"({"alpha": 0.5, "bogus": 1})";
  CHECK(call({"fode", "--config", unknown.string()}).code == exit_usage);
  const fs::path nested = scratch("nested.json");
  std::ofstream(nested) << R"({"alpha": {"value": 0.5}})";
  CHECK(call({"fode", "--config", nested.string()}).code == exit_usage);
  const fs::path broken = scratch("broken.json");
  std::ofstream(broken) << "{not json";
  CHECK(call({"fode", "--config", broken.string()}).code == exit_usage);
  CHECK(call({"fode", "--config", scratch("missing.json").string()}).code == exit_usage);
  const fs::path range = scratch("range.json");
  std::ofstream(range) << R"({"alpha": 1.5})";
  const Outcome o = call({"fode", "--config", range.string()});
  CHECK(o.code == exit_usage);
  CHECK(o.err.find("--alpha") != std::string::npos);
}

TEST_CASE("solve writes the run table, snapshots and summary") {
  const fs::path csv = scratch("run.csv"), snaps = scratch("snap.csv"), summary = scratch("run.json");
  const Outcome o = call({"solve", "--alpha", "0.5", "--p", "2", "--a", "0.48", "--nx", "21", "--horizon", "1",
                          "--out", csv.string(), "--snapshots", snaps.string(), "--stride", "10", "--summary",
                          summary.string()});
  REQUIRE(o.code == exit_ok);
  const auto rows = lines(slurp(csv));
  REQUIRE(rows.size() > 2);
  CHECK(rows[0] == "t,dt,max_u,u_at_x0,u_at_x1,mass,newton_iters");
  for (std::size_t i = 1; i < rows.size(); ++i) CHECK(fields(rows[i]).size() == 7);
  CHECK(std::stod(fields(rows[1])[0]) == 0.0);

  const auto snap = lines(slurp(snaps));
  REQUIRE(snap.size() >= 2);
  const auto nodes = fields(snap[0]);
  CHECK(nodes.size() == 21);
  CHECK(std::stod(nodes.front()) == 0.0);
  CHECK(std::stod(nodes.back()) == 1.0);
  for (std::size_t i = 1; i < snap.size(); ++i) CHECK(fields(snap[i]).size() == 22);
  CHECK(fields(snap.back())[0] == fields(rows.back())[0]);  // the last level is always written

  const json j = json::parse(slurp(summary));
  for (const char* key : {"config", "verdict", "t_cross", "t_estimate", "argmax_always_rightmost", "interior_sup",
                          "steps_accepted", "steps_rejected", "manifest"}) {
    INFO(key);
    CHECK(j.contains(key));
  }
  CHECK(j.at("verdict") == "yes");
  CHECK(j.at("steps_accepted") == rows.size() - 2);
}

TEST_CASE("solve rejects an incompatible profile") {
  const Outcome o = call({"solve", "--p", "2", "--a", "1", "--out", scratch("bad.csv").string()});
  CHECK(o.code == exit_usage);
  CHECK_FALSE(o.err.empty());
}

TEST_CASE("fode writes t, n, dt and reports inconclusive runs as numerical failures") {
  const Outcome ok = call({"fode", "--alpha", "0.5", "--p", "2", "--n0", "1"});
  REQUIRE(ok.code == exit_ok);
  const auto rows = lines(ok.out);
  CHECK(rows[0] == "t,n,dt");
  const json s = json::parse(ok.err);
  CHECK(s.at("verdict") == "yes");
  CHECK(s.at("t_cross").get<double>() <= s.at("bound_time").get<double>() * 1.02);

  const Outcome stuck = call({"fode", "--dt0", "0.001", "--dt_min", "0.001"});
  CHECK(stuck.code == exit_numerical);
}

TEST_CASE("identical invocations give byte-identical data") {
  auto once = [](const std::string& tag) {
    const fs::path csv = scratch("det_" + tag + ".csv"), summary = scratch("det_" + tag + ".json");
    const Outcome o = call({"solve", "--alpha", "0.7", "--p", "3", "--a", "0.48", "--nx", "41", "--horizon", "1",
                            "--out", csv.string(), "--summary", summary.string()});
    REQUIRE(o.code == exit_ok);
    json j = without_manifest(json::parse(slurp(summary)));
    return std::pair{slurp(csv), j.dump()};
  };
  CHECK(once("a") == once("b"));

  const fs::path r1 = scratch("det1.json"), r2 = scratch("det2.json");
  REQUIRE(call({"verify", "--grid", "small", "--jobs", "1", "--out", r1.string()}).code == exit_ok);
  REQUIRE(call({"verify", "--grid", "small", "--jobs", "3", "--out", r2.string()}).code == exit_ok);
  CHECK(without_manifest(json::parse(slurp(r1))).dump() == without_manifest(json::parse(slurp(r2))).dump());
  CHECK(call({"sweep", "--grid", "small"}).out == call({"sweep", "--grid", "small", "--jobs", "2"}).out);
}

TEST_CASE("numbers carry 15 significant digits") {
  const Outcome o = call({"mlf", "--alpha", "0.5", "--r", "1", "--z", "0.3"});
  REQUIRE(o.code == exit_ok);
  std::string digits;
  for (char c : o.out) {
    if (c == 'e' || c == 'E') break;
    if (std::isdigit(static_cast<unsigned char>(c))) digits += c;
  }
  while (!digits.empty() && digits.front() == '0') digits.erase(digits.begin());
  CHECK(digits.size() <= 15);
  CHECK(digits.size() >= 14);  // only trailing zeros may be dropped
}
