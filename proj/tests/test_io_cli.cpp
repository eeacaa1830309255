#include <doctest.h>

#include <nlohmann/json.hpp>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "flsa/errors.hpp"
#include "flsa/flsa_solver.hpp"
#include "flsa/io.hpp"
#include "flsa/puffer.hpp"
#include "flsa/random.hpp"
#include "flsa/signal_model.hpp"

#ifndef FLSA_CLI_PATH
#error "FLSA_CLI_PATH must point at the command-line binary"
#endif
#ifndef FLSA_DATA_DIR
#error "FLSA_DATA_DIR must point at the bundled data directory"
#endif

namespace {

namespace fs = std::filesystem;

fs::path scratch_dir() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() /
             ("flsa_cli_test_" + std::to_string(static_cast<unsigned long>(::getpid())));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct CliResult {
  int code = -1;
  std::string out;
  std::string err;
};

CliResult run_cli(const std::string& args) {
  static int counter = 0;
  const fs::path out = scratch_dir() / ("stdout_" + std::to_string(counter) + ".txt");
  const fs::path err = scratch_dir() / ("stderr_" + std::to_string(counter) + ".txt");
  ++counter;
  const std::string cmd = std::string(FLSA_CLI_PATH) + " " + args + " > " +
                          out.string() + " 2> " + err.string();
  const int status = std::system(cmd.c_str());
  CliResult r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

fs::path write_file(const std::string& name, const std::string& content) {
  const fs::path p = scratch_dir() / name;
  std::ofstream out(p, std::ios::binary);
  out << content;
  return p;
}

const std::string kSevenBlocks = std::string(FLSA_DATA_DIR) + "/seven_block.csv";

}  // namespace

TEST_SUITE("io") {

TEST_CASE("format_double round-trips exactly") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-17, 1e300, 0.0, -7.25, 430.0}) {
    const std::string s = flsa::format_double(v);
    CHECK(std::stod(s) == v);
  }
}

TEST_CASE("blocks CSV round trip") {
  const std::vector<flsa::Block> blocks{{1, 100, 0.5}, {101, 110, -2.0}, {111, 430, 0.0}};
  std::ostringstream out;
  flsa::write_blocks_csv(out, blocks);
  std::istringstream in(out.str());
  const auto back = flsa::read_blocks_csv(in);
  REQUIRE(back.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(back[i].lo == blocks[i].lo);
    CHECK(back[i].hi == blocks[i].hi);
    CHECK(back[i].level == blocks[i].level);
  }
}

TEST_CASE("blocks CSV accepts headerless input and flags bad rows") {
  std::istringstream plain("1,3,0.5\n4,6,-1\n");
  const auto blocks = flsa::read_blocks_csv(plain);
  CHECK(blocks.size() == 2);
  CHECK(blocks[1].level == -1.0);

  std::istringstream bad_fields("L,U,level\n1,3\n");
  CHECK_THROWS_WITH_AS((void)flsa::read_blocks_csv(bad_fields),
                       doctest::Contains("line 2"), flsa::InvalidInput);
  std::istringstream bad_level("1,3,abc\n");
  CHECK_THROWS_AS((void)flsa::read_blocks_csv(bad_level), flsa::InvalidInput);
  std::istringstream empty("L,U,level\n");
  CHECK_THROWS_AS((void)flsa::read_blocks_csv(empty), flsa::InvalidInput);
  CHECK_THROWS_AS((void)flsa::read_blocks_file("/nonexistent/blocks.csv"),
                  flsa::InvalidInput);
}

TEST_CASE("sequence CSV round trip and index checking") {
  const std::vector<double> values{0.5, -1.25, 3.0};
  std::ostringstream out;
  flsa::write_sequence_csv(out, values);
  CHECK(out.str() == "index,value\n1,0.5\n2,-1.25\n3,3\n");
  std::istringstream in(out.str());
  CHECK(flsa::read_sequence_csv(in) == values);

  std::istringstream gap("index,value\n1,0.5\n3,1.0\n");
  CHECK_THROWS_WITH_AS((void)flsa::read_sequence_csv(gap),
                       doctest::Contains("line 3"), flsa::InvalidInput);
  std::istringstream start("2,0.5\n");
  CHECK_THROWS_AS((void)flsa::read_sequence_csv(start), flsa::InvalidInput);
  std::istringstream wide("1,0.5,9\n");
  CHECK_THROWS_AS((void)flsa::read_sequence_csv(wide), flsa::InvalidInput);
}

TEST_CASE("sweep CSV layout") {
  const std::vector<flsa::SweepPoint> points{{0.25, 0.5, 0.0625}, {0.5, 0.0, 0.0}};
  std::ostringstream out;
  flsa::write_sweep_csv(out, points);
  CHECK(out.str() == "sigma,probability,stderr\n0.25,0.5,0.0625\n0.5,0,0\n");
}

TEST_CASE("breakpoints and events CSV layout") {
  const std::vector<double> y{0.0, 3.0, 1.0};
  const auto tp = flsa::threshold_path(y);
  std::ostringstream bp;
  flsa::write_breakpoints_csv(bp, tp.breakpoints);
  CHECK(bp.str() == "rank,lambda\n1,3\n2,2\n");

  const std::vector<double> two{0.0, 2.0};
  std::ostringstream ev;
  flsa::write_events_csv(ev, flsa::flsa_path(two));
  CHECK(ev.str() == "lambda,boundary\n1,1\n");
}

TEST_CASE("ic report serializes completely") {
  const auto report =
      flsa::ic_report(flsa::support_from_signal(flsa::seven_block_signal()));
  const auto j = flsa::to_json(report);
  CHECK(j["n"] == 430);
  CHECK(j["jump_columns"].size() == 6);
  CHECK(j["holds"] == false);
  CHECK(j["strong_holds"] == false);
  CHECK(j["structural_weak"] == false);
  CHECK(j["structural_strong"] == false);
  CHECK(j["argmax_column"] == 113);
  CHECK(j["max_abs_signed"].get<double>() >= 1.0);
  CHECK(j["columns"].size() == 423);
  CHECK(j["signed_value"].size() == 423);
  CHECK(j["l1_norm"].size() == 423);
}

TEST_CASE("recovery result serializes flags as a bit string") {
  flsa::RecoveryResult result;
  result.method = flsa::Method::preconditioned;
  result.replicates = 4;
  result.seed = 9;
  result.per_sigma.resize(1);
  result.per_sigma[0].sigma = 0.25;
  result.per_sigma[0].successes = 3;
  result.per_sigma[0].probability = 0.75;
  result.per_sigma[0].flags = {1, 0, 1, 1};
  const auto j = flsa::to_json(result);
  CHECK(j["method"] == "preconditioned");
  CHECK(j["per_sigma"][0]["flags"] == "1011");
}

}  // TEST_SUITE

TEST_SUITE("cli") {

TEST_CASE("fit reproduces the two-point fusion example") {
  const auto input = write_file("pair.csv", "index,value\n1,0\n2,2\n");
  const auto r = run_cli("fit -i " + input.string() + " --lambda2 1");
  CHECK(r.code == 0);
  CHECK(r.out == "index,value\n1,1\n2,1\n");
}

TEST_CASE("precondition reproduces the worked step example") {
  const auto input = write_file("steps.csv", "index,value\n1,0\n2,0\n3,1\n4,1\n");
  const auto bp = scratch_dir() / "bp.csv";
  const auto r = run_cli("precondition -i " + input.string() +
                         " --lambda 0.5 --breakpoints " + bp.string());
  CHECK(r.code == 0);
  CHECK(r.out == "index,value\n1,0.25\n2,0.25\n3,0.75\n4,0.75\n");
  CHECK(slurp(bp) == "rank,lambda\n1,1\n2,0\n3,0\n");
}

TEST_CASE("path prints merge events or threshold breakpoints") {
  const auto input = write_file("valley.csv", "index,value\n1,1\n2,0\n3,1\n");
  const auto ev = run_cli("path -i " + input.string());
  CHECK(ev.code == 0);
  CHECK(ev.out.substr(0, 16) == "lambda,boundary\n");
  CHECK(ev.out.find(",1\n") != std::string::npos);
  CHECK(ev.out.find(",2\n") != std::string::npos);

  const auto bp = run_cli("path -i " + input.string() + " --method preconditioned");
  CHECK(bp.code == 0);
  CHECK(bp.out == "rank,lambda\n1,1\n2,1\n");
}

TEST_CASE("check-ic emits the full JSON verdict") {
  const auto r = run_cli("check-ic -b " + kSevenBlocks);
  CHECK(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["n"] == 430);
  CHECK(j["holds"] == false);
  CHECK(j["structural_weak"] == false);
  CHECK(j["argmax_column"] == 113);

  const auto single = write_file("single.csv", "L,U,level\n1,5,0\n6,10,1\n");
  const auto r2 = run_cli("check-ic -b " + single.string());
  CHECK(r2.code == 0);
  const auto j2 = nlohmann::json::parse(r2.out);
  CHECK(j2["holds"] == true);
  CHECK(j2["structural_strong"] == true);
}

TEST_CASE("simulate is deterministic in seed and replicate") {
  const std::string args = "simulate -b " + kSevenBlocks + " --sigma 0.25 --seed 11 --replicate 3";
  const auto a = run_cli(args);
  const auto b = run_cli(args);
  CHECK(a.code == 0);
  CHECK(a.out == b.out);
  const auto c = run_cli("simulate -b " + kSevenBlocks + " --sigma 0.25 --seed 11 --replicate 4");
  CHECK(c.out != a.out);

  // The stream matches the library keying (seed, {replicate}).
  flsa::Rng rng(11, {3});
  const auto draw = flsa::sample_noisy(flsa::seven_block_signal(), 0.25, rng);
  std::ostringstream expect;
  flsa::write_sequence_csv(expect, draw.values);
  CHECK(a.out == expect.str());
}

TEST_CASE("sweep writes the probability table") {
  // Dyadic sigmas so the shortest-round-trip rendering has no tail.
  const auto json_path = scratch_dir() / "sweep.json";
  const auto r = run_cli("sweep -b " + kSevenBlocks +
                         " --sigmas 0.0625,0.125 --replicates 25 --seed 7 --json " +
                         json_path.string());
  CHECK(r.code == 0);
  std::istringstream out(r.out);
  std::string header;
  std::getline(out, header);
  CHECK(header == "sigma,probability,stderr");
  std::string row1, row2;
  std::getline(out, row1);
  std::getline(out, row2);
  CHECK(row1 == "0.0625,1,0");  // noise far below the smallest jump
  CHECK(row2.substr(0, 6) == "0.125,");

  const auto j = nlohmann::json::parse(slurp(json_path));
  CHECK(j["config"]["replicates"] == 25);
  CHECK(j["result"]["per_sigma"][0]["flags"] == std::string(25, '1'));
}

TEST_CASE("bound prints the guarantee to four decimals") {
  const auto r = run_cli("bound --lambda 2 --sigma 0.25 --n 430");
  CHECK(r.code == 0);
  CHECK(r.out == "0.7115\n");

  const auto rb = run_cli("bound --lambda 0.9 --sigma 0.25 -b " + kSevenBlocks +
                          " --check-jumps");
  CHECK(rb.code == 0);
  std::istringstream out(rb.out);
  std::string line;
  std::getline(out, line);
  char expect[16];
  std::snprintf(expect, sizeof(expect), "%.4f", flsa::recovery_lower_bound(0.9, 0.25, 430));
  CHECK(line == std::string(expect));
  std::getline(out, line);
  CHECK(line == "min_jump,1.8999999999999999");
  std::getline(out, line);
  CHECK(line == "jump_condition_met,1");
}

TEST_CASE("bound with --lasso reports the general-design guarantee") {
  const auto single = write_file("single2.csv", "L,U,level\n1,5,0\n6,10,1\n");
  const auto r = run_cli("bound --lambda 0.5 --sigma 0.25 -b " + single.string() + " --lasso");
  CHECK(r.code == 0);
  CHECK(r.out.find("psi,") != std::string::npos);
  CHECK(r.out.find("eta,") != std::string::npos);
  CHECK(r.out.find("condition_ok,") != std::string::npos);
  CHECK(r.out.find("probability,") != std::string::npos);

  // The benchmark signal violates the condition, so the general bound
  // does not exist for it: that is a data error, not a usage error.
  const auto bad = run_cli("bound --lambda 0.5 --sigma 0.25 -b " + kSevenBlocks + " --lasso");
  CHECK(bad.code == 2);
}

TEST_CASE("exit codes separate usage errors from data errors") {
  CHECK(run_cli("--help").code == 0);
  CHECK(run_cli("fit --help").code == 0);
  CHECK(run_cli("").code == 1);                     // missing subcommand
  CHECK(run_cli("fit").code == 1);                  // missing required option
  CHECK(run_cli("fit -i x.csv --bogus 1").code == 1);
  CHECK(run_cli("path -i x.csv --method nope").code == 1);
  CHECK(run_cli("bound --lambda 1 --sigma 0.1").code == 1);  // neither --n nor --blocks
  CHECK(run_cli("bound --lambda 1 --sigma 0.1 --n 10 -b " + kSevenBlocks).code == 1);

  CHECK(run_cli("fit -i /nonexistent/y.csv").code == 2);     // unreadable data
  const auto bad = write_file("bad.csv", "index,value\n1,0.5\nbroken\n");
  CHECK(run_cli("fit -i " + bad.string()).code == 2);        // malformed data
  const auto negative = write_file("neg.csv", "L,U,level\n1,4,0\n5,9,1\n");
  CHECK(run_cli("simulate -b " + negative.string() + " --sigma -1").code == 1);
}

}  // TEST_SUITE
